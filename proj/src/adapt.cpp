#include "ampl/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace ampl {

namespace {

constexpr double kAlphaMin = 1e-3;

std::vector<double> tier_prior_of(const SecretSpace& space, const Channel& channel) {
    double mass = 0.0;
    for (int idx : channel.inputs) mass += space.prior[idx];
    std::vector<double> prior(channel.inputs.size());
    for (std::size_t r = 0; r < channel.inputs.size(); ++r)
        prior[r] = space.prior[channel.inputs[r]] / mass;
    return prior;
}

// Sub-space view of a tier for the audit's pair sampling and distances.
SecretSpace tier_subspace(const SecretSpace& space, const Channel& channel,
                          const std::vector<double>& tier_prior) {
    SecretSpace sub;
    for (std::size_t r = 0; r < channel.inputs.size(); ++r) {
        sub.candidates.push_back(space.candidates[channel.inputs[r]]);
        sub.embeddings.push_back(space.embeddings[channel.inputs[r]]);
        sub.tier_of.push_back(1);
        sub.prior.push_back(tier_prior[r]);
    }
    return sub;
}

bool tier_has_positive_pair(const SecretSpace& sub) {
    for (std::size_t i = 0; i < sub.size(); ++i)
        for (std::size_t j = i + 1; j < sub.size(); ++j)
            if (euclidean(sub.embeddings[i], sub.embeddings[j]) > 0.0) return true;
    return false;
}

}  // namespace

ObservationSampler channel_sampler(const Channel& channel, const std::vector<double>& tier_prior) {
    return [&channel, tier_prior](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double ux = unit(rng);
        int row = static_cast<int>(tier_prior.size()) - 1;
        double cum = 0.0;
        for (std::size_t r = 0; r + 1 < tier_prior.size(); ++r) {
            cum += tier_prior[r];
            if (ux < cum) {
                row = static_cast<int>(r);
                break;
            }
        }
        double uy = unit(rng);
        if (uy >= 1.0) uy = std::nextafter(1.0, 0.0);
        return std::vector<int>{sample(channel, row, uy)};
    };
}

TierPosteriorBuilder exact_bayes_builder() {
    return [](int, const Channel& channel, const std::vector<double>& tier_prior,
              std::uint64_t) -> PosteriorFn {
        return [channel, tier_prior](const std::vector<int>& y) {
            return posterior_single(channel, tier_prior, y.at(0));
        };
    };
}

TierPosteriorBuilder learned_attacker_builder(const SecretSpace& space, TrainConfig train_cfg,
                                              SoftmaxConfig softmax_cfg,
                                              std::size_t train_samples) {
    auto model_cache = std::make_shared<std::map<std::pair<int, std::uint64_t>, Reconstructor>>();
    return [&space, train_cfg, softmax_cfg, train_samples, model_cache](
               int tier, const Channel& channel, const std::vector<double>& tier_prior,
               std::uint64_t seed) -> PosteriorFn {
        auto cached = model_cache->find({tier, seed});
        if (cached != model_cache->end()) {
            std::vector<std::vector<double>> candidates;
            for (int idx : channel.inputs) candidates.push_back(space.embeddings[idx]);
            Reconstructor model = cached->second;
            Channel channel_copy = channel;
            return [model = std::move(model), candidates = std::move(candidates),
                    channel_copy = std::move(channel_copy),
                    softmax_cfg](const std::vector<int>& y) {
                auto x_hat = model.forward(channel_copy.outputs.vectors[y.at(0)]);
                return posterior_from_reconstruction(x_hat, candidates, softmax_cfg);
            };
        }
        // Supervised pairs (y embedding -> x embedding) drawn from the channel.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::vector<double>> ys, xs;
        for (std::size_t s = 0; s < train_samples; ++s) {
            double ux = unit(rng);
            int row = static_cast<int>(tier_prior.size()) - 1;
            double cum = 0.0;
            for (std::size_t r = 0; r + 1 < tier_prior.size(); ++r) {
                cum += tier_prior[r];
                if (ux < cum) {
                    row = static_cast<int>(r);
                    break;
                }
            }
            double uy = unit(rng);
            if (uy >= 1.0) uy = std::nextafter(1.0, 0.0);
            int y = sample(channel, row, uy);
            ys.push_back(channel.outputs.vectors[y]);
            xs.push_back(space.embeddings[channel.inputs[row]]);
        }
        TrainConfig cfg = train_cfg;
        cfg.seed = seed;
        auto model = train_reconstructor(ys, xs, cfg);
        (*model_cache)[{tier, seed}] = model;

        std::vector<std::vector<double>> candidates;
        for (int idx : channel.inputs) candidates.push_back(space.embeddings[idx]);

        Channel channel_copy = channel;
        return [model = std::move(model), candidates = std::move(candidates),
                channel_copy = std::move(channel_copy), softmax_cfg](const std::vector<int>& y) {
            auto x_hat = model.forward(channel_copy.outputs.vectors[y.at(0)]);
            return posterior_from_reconstruction(x_hat, candidates, softmax_cfg);
        };
    };
}

double utility_loss(const LevelwiseMechanism& mech, const SecretSpace& space,
                    const CostMatrix& cost, const LabeledVectors& outputs) {
    double total = 0.0;
    for (const auto& [tier, channel] : mech.tier_channels) {
        std::vector<int> global_of(channel.outputs.labels.size(), -1);
        for (std::size_t k = 0; k < channel.outputs.labels.size(); ++k) {
            for (std::size_t g = 0; g < outputs.labels.size(); ++g)
                if (outputs.labels[g] == channel.outputs.labels[k]) {
                    global_of[k] = static_cast<int>(g);
                    break;
                }
            if (global_of[k] < 0)
                throw std::invalid_argument("utility_loss: missing cost entry for tier output");
        }
        for (std::size_t r = 0; r < channel.inputs.size(); ++r) {
            double pi = space.prior[channel.inputs[r]];
            for (std::size_t k = 0; k < channel.outputs.labels.size(); ++k)
                total += pi * cost.entries[channel.inputs[r]][global_of[k]] *
                         channel.matrix[r][k];
        }
    }
    return total;
}

LossBreakdown composite_loss(const std::vector<double>& alpha, const AdaptConfig& cfg,
                             const SecretSpace& space, const CostMatrix& cost,
                             const LabeledVectors& outputs,
                             const TierPosteriorBuilder& posterior_builder,
                             double mechanism_eps, std::uint64_t audit_seed,
                             std::uint64_t attacker_seed) {
    if (attacker_seed == 0) attacker_seed = audit_seed;
    auto mech = compose_levels(space, mechanism_eps, alpha);
    LossBreakdown loss;
    loss.utility_loss = utility_loss(mech, space, cost, outputs);

    // Per-tier violation rates combined by tier prior mass.
    double p = 0.0;
    for (const auto& [tier, channel] : mech.tier_channels) {
        auto tier_prior = tier_prior_of(space, channel);
        auto sub = tier_subspace(space, channel, tier_prior);
        if (!tier_has_positive_pair(sub)) continue;
        auto posterior_fn = posterior_builder(tier, channel, tier_prior, attacker_seed ^ tier);
        auto sampler = channel_sampler(channel, tier_prior);
        auto triples = sample_triples(sub, tier_prior, posterior_fn, sampler, cfg.audit_S,
                                      audit_seed ^ (0x517cc1b727220a95ULL * tier), cfg.eps);
        p += space.tier_prior_mass(tier) * empirical_rate(triples.samples, cfg.eps);
    }
    loss.privacy_loss = p;
    loss.composite = cfg.lambda1 * loss.privacy_loss + cfg.lambda2 * loss.utility_loss;
    return loss;
}

AdaptState ampl_run(const AdaptConfig& cfg, const SecretSpace& space, const CostMatrix& cost,
                    const LabeledVectors& outputs, const TierPosteriorBuilder& posterior_builder,
                    double mechanism_eps, const std::vector<double>& alpha_init) {
    const int tiers = space.tier_count();
    if (static_cast<int>(alpha_init.size()) != tiers)
        throw std::invalid_argument("ampl_run: alpha size must equal tier count");

    AdaptState state;
    state.alpha = alpha_init;
    for (double& a : state.alpha) a = std::clamp(a, kAlphaMin, 1.0);

    // Attacker retraining cadence: the builder seed is held fixed for
    // retrain_every iterations (all probes included), so builders that cache
    // trained models per seed retrain only at epoch boundaries.
    const int cadence = std::max(1, cfg.retrain_every);
    auto attacker_seed_at = [&cfg, cadence](int t) {
        return cfg.seed ^ (0xD1B54A32D192ED03ULL * (t / cadence + 1));
    };

    // Baseline at alpha = 1 for the utility stop condition.
    std::vector<double> ones(tiers, 1.0);
    auto baseline = composite_loss(ones, cfg, space, cost, outputs, exact_bayes_builder(),
                                   mechanism_eps, cfg.seed);

    auto eval = composite_loss(state.alpha, cfg, space, cost, outputs, posterior_builder,
                               mechanism_eps, cfg.seed, attacker_seed_at(0));
    state.history.push_back({state.alpha, eval.privacy_loss, eval.utility_loss, eval.composite});
    state.best_composite = eval.composite;
    std::vector<double> best_alpha = state.alpha;

    double eta_scale = 1.0;
    int no_improve = 0;
    bool halved = false;
    std::vector<double> alpha = state.alpha;

    for (int t = 0; t < cfg.max_iters; ++t) {
        // Common random numbers: one audit seed per iteration shared by all
        // probe evaluations to tame finite-difference variance.
        std::uint64_t it_seed = cfg.seed + 0x2545F4914F6CDD1DULL * (t + 1);
        std::uint64_t atk_seed = attacker_seed_at(t);
        double eta = eta_scale * cfg.eta0 / std::pow(t + 1.0, cfg.decay);

        std::vector<double> grad(tiers, 0.0);
        for (int k = 0; k < tiers; ++k) {
            double up = std::min(1.0, alpha[k] + cfg.fd_step);
            double dn = std::max(kAlphaMin, alpha[k] - cfg.fd_step);
            auto a_up = alpha, a_dn = alpha;
            a_up[k] = up;
            a_dn[k] = dn;
            double l_up = composite_loss(a_up, cfg, space, cost, outputs, posterior_builder,
                                         mechanism_eps, it_seed, atk_seed).composite;
            double l_dn = composite_loss(a_dn, cfg, space, cost, outputs, posterior_builder,
                                         mechanism_eps, it_seed, atk_seed).composite;
            grad[k] = (up > dn) ? (l_up - l_dn) / (up - dn) : 0.0;
        }

        std::vector<double> next = alpha;
        double max_step = 0.0;
        for (int k = 0; k < tiers; ++k) {
            next[k] = std::clamp(alpha[k] - eta * grad[k], kAlphaMin, 1.0);
            max_step = std::max(max_step, std::abs(next[k] - alpha[k]));
        }
        alpha = next;

        auto it_eval = composite_loss(alpha, cfg, space, cost, outputs, posterior_builder,
                                      mechanism_eps, it_seed, atk_seed);
        state.history.push_back({alpha, it_eval.privacy_loss, it_eval.utility_loss,
                                 it_eval.composite});
        state.iter = t + 1;

        if (it_eval.composite < state.best_composite) {
            state.best_composite = it_eval.composite;
            best_alpha = alpha;
            no_improve = 0;
        } else {
            ++no_improve;
        }

        if (max_step < cfg.tol) break;
        if (cfg.delta_target > 0.0 && it_eval.privacy_loss <= cfg.delta_target &&
            it_eval.utility_loss <= baseline.utility_loss)
            break;
        if (no_improve >= 5) {
            if (halved) break;
            eta_scale *= 0.5;
            halved = true;
            no_improve = 0;
        }
    }

    state.alpha = best_alpha;
    if (tiers >= 2) {
        for (int k = 0; k + 1 < tiers; ++k)
            if (state.alpha[k] >= state.alpha[k + 1] + 1e-12) state.tier_order_inverted = true;
    }
    return state;
}

}  // namespace ampl
