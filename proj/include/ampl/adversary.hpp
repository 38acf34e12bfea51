#pragma once

#include <cstdint>
#include <vector>

#include "ampl/inference.hpp"
#include "ampl/space.hpp"

namespace ampl {

enum class ModelKind { linear, mlp };

struct TrainConfig {
    ModelKind model_kind = ModelKind::linear;
    std::vector<int> hidden_dims;  // mlp only
    double learning_rate = 0.001;
    int plateau_patience = 10;
    double plateau_factor = 0.5;
    int max_epochs = 500;
    double train_frac = 0.6;
    double val_frac = 0.2;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
    double learning_rate = 0.0;
};

// Feed-forward reconstructor: tanh hidden layers, linear output. A `linear`
// model is the zero-hidden-layer case (affine map).
struct Reconstructor {
    ModelKind kind = ModelKind::linear;
    int input_dim = 0;
    int output_dim = 0;
    std::vector<std::vector<std::vector<double>>> weights;  // [layer][out][in]
    std::vector<std::vector<double>> biases;                // [layer][out]
    std::vector<EpochStats> training_log;

    std::vector<double> forward(const std::vector<double>& input) const;
};

struct SoftmaxConfig {
    double tau_base = 1.0;
    double tau = 1.0;
    double gamma_floor = 1e-6;
};

Reconstructor train_reconstructor(const std::vector<std::vector<double>>& inputs,
                                  const std::vector<std::vector<double>>& targets,
                                  const TrainConfig& config);

std::vector<double> reconstruct(const Reconstructor& model, const std::vector<double>& y_vec);

// Temperature-scaled Gaussian softmax over squared Euclidean distances from
// the reconstruction to every candidate, with floor clipping.
PosteriorVector posterior_from_reconstruction(const std::vector<double>& x_hat,
                                              const SecretSpace& space,
                                              const SoftmaxConfig& cfg);
PosteriorVector posterior_from_reconstruction(const std::vector<double>& x_hat,
                                              const std::vector<std::vector<double>>& candidates,
                                              const SoftmaxConfig& cfg);

// Mask rule: a fixed placeholder release carries no information, so the
// posterior equals the prior.
PosteriorVector posterior_masked(const SecretSpace& space);

// Default temperature: mean squared nearest-neighbor distance in the space.
double default_temperature(const SecretSpace& space);

// Test hooks for gradient verification.
double mse_loss(const Reconstructor& model, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets);
std::vector<double> mse_gradient(const Reconstructor& model,
                                 const std::vector<std::vector<double>>& inputs,
                                 const std::vector<std::vector<double>>& targets);
std::vector<double> flatten_parameters(const Reconstructor& model);
void assign_parameters(Reconstructor& model, const std::vector<double>& flat);

Reconstructor make_model(ModelKind kind, int input_dim, int output_dim,
                         const std::vector<int>& hidden_dims, std::uint64_t seed);

}  // namespace ampl
