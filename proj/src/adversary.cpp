#include "ampl/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ampl {

namespace {

std::vector<double> layer_forward(const std::vector<std::vector<double>>& w,
                                  const std::vector<double>& b,
                                  const std::vector<double>& in) {
    std::vector<double> out(b);
    for (std::size_t r = 0; r < w.size(); ++r)
        for (std::size_t c = 0; c < w[r].size(); ++c) out[r] += w[r][c] * in[c];
    return out;
}

// Forward pass keeping pre- and post-activation values per layer for backprop.
struct ForwardTrace {
    std::vector<std::vector<double>> activations;  // activations[0] = input
};

ForwardTrace trace_forward(const Reconstructor& m, const std::vector<double>& input) {
    ForwardTrace t;
    t.activations.push_back(input);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        auto z = layer_forward(m.weights[l], m.biases[l], t.activations.back());
        if (l + 1 < m.weights.size())
            for (double& v : z) v = std::tanh(v);
        t.activations.push_back(std::move(z));
    }
    return t;
}

struct Gradients {
    std::vector<std::vector<std::vector<double>>> weights;
    std::vector<std::vector<double>> biases;
};

Gradients zero_like(const Reconstructor& m) {
    Gradients g;
    g.weights = m.weights;
    g.biases = m.biases;
    for (auto& layer : g.weights)
        for (auto& row : layer) std::fill(row.begin(), row.end(), 0.0);
    for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
    return g;
}

// Accumulates d(MSE)/d(params) for one sample into g. MSE is averaged over
// coordinates and samples; the caller divides by the sample count.
void backprop_sample(const Reconstructor& m, const std::vector<double>& input,
                     const std::vector<double>& target, Gradients& g) {
    ForwardTrace t = trace_forward(m, input);
    const auto& out = t.activations.back();
    std::vector<double> delta(out.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        delta[k] = 2.0 * (out[k] - target[k]) / static_cast<double>(out.size());

    for (int l = static_cast<int>(m.weights.size()) - 1; l >= 0; --l) {
        const auto& a_in = t.activations[l];
        for (std::size_t r = 0; r < m.weights[l].size(); ++r) {
            g.biases[l][r] += delta[r];
            for (std::size_t c = 0; c < m.weights[l][r].size(); ++c)
                g.weights[l][r][c] += delta[r] * a_in[c];
        }
        if (l > 0) {
            std::vector<double> prev(a_in.size(), 0.0);
            for (std::size_t c = 0; c < a_in.size(); ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < m.weights[l].size(); ++r)
                    s += m.weights[l][r][c] * delta[r];
                // a_in is already tanh-activated for hidden layers
                prev[c] = s * (1.0 - a_in[c] * a_in[c]);
            }
            delta = std::move(prev);
        }
    }
}

double mse_over(const Reconstructor& m, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets,
                const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t s : idx) {
        auto out = m.forward(inputs[s]);
        double e = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            double d = out[k] - targets[s][k];
            e += d * d;
        }
        total += e / static_cast<double>(out.size());
    }
    return total / static_cast<double>(idx.size());
}

}  // namespace

std::vector<double> Reconstructor::forward(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> a = input;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        a = layer_forward(weights[l], biases[l], a);
        if (l + 1 < weights.size())
            for (double& v : a) v = std::tanh(v);
    }
    return a;
}

Reconstructor make_model(ModelKind kind, int input_dim, int output_dim,
                         const std::vector<int>& hidden_dims, std::uint64_t seed) {
    Reconstructor m;
    m.kind = kind;
    m.input_dim = input_dim;
    m.output_dim = output_dim;
    std::vector<int> dims{input_dim};
    if (kind == ModelKind::mlp)
        for (int h : hidden_dims) dims.push_back(h);
    dims.push_back(output_dim);

    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
        std::uniform_real_distribution<double> init(-bound, bound);
        std::vector<std::vector<double>> w(dims[l + 1], std::vector<double>(dims[l]));
        for (auto& row : w)
            for (double& v : row) v = init(rng);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(dims[l + 1], 0.0);
    }
    return m;
}

double mse_loss(const Reconstructor& model, const std::vector<std::vector<double>>& inputs,
                const std::vector<std::vector<double>>& targets) {
    std::vector<std::size_t> all(inputs.size());
    std::iota(all.begin(), all.end(), 0);
    return mse_over(model, inputs, targets, all);
}

std::vector<double> flatten_parameters(const Reconstructor& model) {
    std::vector<double> flat;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (const auto& row : model.weights[l])
            flat.insert(flat.end(), row.begin(), row.end());
        flat.insert(flat.end(), model.biases[l].begin(), model.biases[l].end());
    }
    return flat;
}

void assign_parameters(Reconstructor& model, const std::vector<double>& flat) {
    std::size_t p = 0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (auto& row : model.weights[l])
            for (double& v : row) v = flat.at(p++);
        for (double& v : model.biases[l]) v = flat.at(p++);
    }
    if (p != flat.size())
        throw std::invalid_argument("assign_parameters: size mismatch");
}

std::vector<double> mse_gradient(const Reconstructor& model,
                                 const std::vector<std::vector<double>>& inputs,
                                 const std::vector<std::vector<double>>& targets) {
    Gradients g = zero_like(model);
    for (std::size_t s = 0; s < inputs.size(); ++s)
        backprop_sample(model, inputs[s], targets[s], g);
    double inv_n = 1.0 / static_cast<double>(inputs.size());
    std::vector<double> flat;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        for (const auto& row : g.weights[l])
            for (double v : row) flat.push_back(v * inv_n);
        for (double v : g.biases[l]) flat.push_back(v * inv_n);
    }
    return flat;
}

Reconstructor train_reconstructor(const std::vector<std::vector<double>>& inputs,
                                  const std::vector<std::vector<double>>& targets,
                                  const TrainConfig& config) {
    if (inputs.size() < 10)
        throw std::invalid_argument("train_reconstructor: need at least 10 pairs");
    if (inputs.size() != targets.size())
        throw std::invalid_argument("train_reconstructor: input/target count mismatch");
    if (config.learning_rate <= 0.0)
        throw std::invalid_argument("train_reconstructor: learning_rate must be positive");
    if (config.train_frac <= 0.0 || config.val_frac <= 0.0 ||
        config.train_frac + config.val_frac >= 1.0 + 1e-12)
        throw std::invalid_argument("train_reconstructor: bad split fractions");
    const std::size_t n = inputs.size();
    const std::size_t in_dim = inputs[0].size();
    const std::size_t out_dim = targets[0].size();
    for (std::size_t s = 0; s < n; ++s)
        if (inputs[s].size() != in_dim || targets[s].size() != out_dim)
            throw std::invalid_argument("train_reconstructor: inconsistent dimensions");

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(n * config.train_frac));
    std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(n * config.val_frac));
    n_val = std::min(n_val, n - n_train);
    std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + n_train);
    std::vector<std::size_t> val_idx(perm.begin() + n_train, perm.begin() + n_train + n_val);

    Reconstructor model = make_model(config.model_kind, static_cast<int>(in_dim),
                                     static_cast<int>(out_dim), config.hidden_dims,
                                     config.seed ^ 0x9e3779b97f4a7c15ULL);

    auto params = flatten_parameters(model);
    std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double lr = config.learning_rate;

    std::vector<std::vector<double>> train_in, train_tgt;
    for (std::size_t s : train_idx) {
        train_in.push_back(inputs[s]);
        train_tgt.push_back(targets[s]);
    }

    double best_val = std::numeric_limits<double>::infinity();
    auto best_params = params;
    int stale = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        auto grad = mse_gradient(model, train_in, train_tgt);
        double t = epoch + 1;
        for (std::size_t p = 0; p < params.size(); ++p) {
            m1[p] = beta1 * m1[p] + (1.0 - beta1) * grad[p];
            m2[p] = beta2 * m2[p] + (1.0 - beta2) * grad[p] * grad[p];
            double m1_hat = m1[p] / (1.0 - std::pow(beta1, t));
            double m2_hat = m2[p] / (1.0 - std::pow(beta2, t));
            params[p] -= lr * m1_hat / (std::sqrt(m2_hat) + adam_eps);
        }
        assign_parameters(model, params);

        double train_mse = mse_over(model, inputs, targets, train_idx);
        double val_mse = mse_over(model, inputs, targets, val_idx);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw std::runtime_error("train_reconstructor: diverged at epoch " +
                                     std::to_string(epoch));
        model.training_log.push_back({train_mse, val_mse, lr});

        if (val_mse < best_val - 1e-15) {
            best_val = val_mse;
            best_params = params;
            stale = 0;
        } else if (++stale >= config.plateau_patience) {
            lr *= config.plateau_factor;
            stale = 0;
        }
    }

    assign_parameters(model, best_params);
    return model;
}

std::vector<double> reconstruct(const Reconstructor& model, const std::vector<double>& y_vec) {
    return model.forward(y_vec);
}

PosteriorVector posterior_from_reconstruction(const std::vector<double>& x_hat,
                                              const SecretSpace& space,
                                              const SoftmaxConfig& cfg) {
    return posterior_from_reconstruction(x_hat, space.embeddings, cfg);
}

PosteriorVector posterior_from_reconstruction(const std::vector<double>& x_hat,
                                              const std::vector<std::vector<double>>& candidates,
                                              const SoftmaxConfig& cfg) {
    const double temp = cfg.tau_base * cfg.tau;
    if (temp <= 0.0)
        throw std::invalid_argument("posterior_from_reconstruction: temperature must be positive");
    const std::size_t n = candidates.size();
    if (cfg.gamma_floor < 0.0 || cfg.gamma_floor * n >= 1.0)
        throw std::invalid_argument("posterior_from_reconstruction: invalid gamma_floor");

    PosteriorVector post;
    post.probs.resize(n);
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < x_hat.size(); ++k) {
            double diff = x_hat[k] - candidates[i][k];
            d2 += diff * diff;
        }
        post.probs[i] = -d2 / temp;
        max_score = std::max(max_score, post.probs[i]);
    }
    double z = 0.0;
    for (double& p : post.probs) {
        p = std::exp(p - max_score);
        z += p;
    }
    for (double& p : post.probs) p /= z;

    if (cfg.gamma_floor > 0.0) {
        // Floor clipping: raise entries below gamma and rescale the rest so
        // the floor is respected after normalization.
        const double gamma = cfg.gamma_floor;
        for (int pass = 0; pass < 64; ++pass) {
            double clipped_mass = 0.0, free_mass = 0.0;
            std::size_t clipped = 0;
            for (double p : post.probs) {
                if (p <= gamma) {
                    clipped_mass += gamma;
                    ++clipped;
                } else {
                    free_mass += p;
                }
            }
            if (clipped == 0) break;
            double scale = (1.0 - clipped_mass) / free_mass;
            bool stable = true;
            for (double& p : post.probs) {
                if (p <= gamma) {
                    p = gamma;
                } else {
                    p *= scale;
                    if (p < gamma) stable = false;
                }
            }
            if (stable) break;
        }
    }
    return post;
}

PosteriorVector posterior_masked(const SecretSpace& space) {
    PosteriorVector post;
    post.probs = space.prior;
    return post;
}

double default_temperature(const SecretSpace& space) {
    const std::size_t n = space.size();
    if (n < 2) return 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double d = distance(space, static_cast<int>(i), static_cast<int>(j));
            if (d > 0.0) nearest = std::min(nearest, d);
        }
        if (std::isfinite(nearest)) total += nearest * nearest;
    }
    double mean = total / static_cast<double>(n);
    return mean > 0.0 ? mean : 1.0;
}

}  // namespace ampl
