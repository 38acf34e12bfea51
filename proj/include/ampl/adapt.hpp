#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ampl/adversary.hpp"
#include "ampl/audit.hpp"
#include "ampl/mechanism.hpp"
#include "ampl/remap.hpp"
#include "ampl/space.hpp"

namespace ampl {

// Builds a posterior estimator for one tier channel; seed controls any
// attacker training inside the builder.
using TierPosteriorBuilder = std::function<PosteriorFn(
    int tier, const Channel& channel, const std::vector<double>& tier_prior,
    std::uint64_t seed)>;

struct AdaptConfig {
    double lambda1 = 1.0;  // privacy weight
    double lambda2 = 1.0;  // utility weight
    double eps = 1.0;      // mPL budget
    double delta_target = 0.0;
    std::size_t audit_S = 2000;
    double eta0 = 0.5;
    double decay = 0.7;  // in (0.5, 1]
    int max_iters = 30;
    double tol = 1e-4;
    std::uint64_t seed = 0;
    int retrain_every = 5;
    double fd_step = 0.05;
};

struct AdaptRecord {
    std::vector<double> alpha;
    double privacy_loss = 0.0;
    double utility_loss = 0.0;
    double composite = 0.0;
};

struct AdaptState {
    std::vector<double> alpha;  // incumbent (best composite seen)
    int iter = 0;
    std::vector<AdaptRecord> history;
    double best_composite = 0.0;
    bool tier_order_inverted = false;  // alpha_1 < alpha_2 convention broken
};

struct LossBreakdown {
    double privacy_loss = 0.0;
    double utility_loss = 0.0;
    double composite = 0.0;
};

// Expected semantic distortion sum over tier channels; cost columns are
// indexed by `outputs` labels.
double utility_loss(const LevelwiseMechanism& mech, const SecretSpace& space,
                    const CostMatrix& cost, const LabeledVectors& outputs);

// `attacker_seed` feeds the builder (any attacker training); reusing it across
// calls lets builders with internal model caches skip retraining.
LossBreakdown composite_loss(const std::vector<double>& alpha, const AdaptConfig& cfg,
                             const SecretSpace& space, const CostMatrix& cost,
                             const LabeledVectors& outputs,
                             const TierPosteriorBuilder& posterior_builder,
                             double mechanism_eps, std::uint64_t audit_seed,
                             std::uint64_t attacker_seed = 0);

AdaptState ampl_run(const AdaptConfig& cfg, const SecretSpace& space, const CostMatrix& cost,
                    const LabeledVectors& outputs, const TierPosteriorBuilder& posterior_builder,
                    double mechanism_eps, const std::vector<double>& alpha_init);

// Ground-truth Bayes posterior per tier channel.
TierPosteriorBuilder exact_bayes_builder();

// Learned reconstructor + Gaussian-softmax posterior per tier channel. The
// trained model is cached per (tier, seed): repeated calls with the same seed
// reuse the model and only rebind it to the channel at hand, so the feedback
// loop retrains at its own cadence by keeping the seed fixed across probes.
TierPosteriorBuilder learned_attacker_builder(const SecretSpace& space, TrainConfig train_cfg,
                                              SoftmaxConfig softmax_cfg,
                                              std::size_t train_samples = 2000);

// Per-tier sampler drawing x from the tier prior, then y from the channel.
ObservationSampler channel_sampler(const Channel& channel, const std::vector<double>& tier_prior);

}  // namespace ampl
