#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ampl/leakage.hpp"
#include "ampl/space.hpp"

namespace ampl {

// Draws one observation (y index per position); the sampler owns the draw of
// the secret(s) from the prior and the mechanism noise.
using ObservationSampler = std::function<std::vector<int>(std::mt19937_64&)>;

// Maps an observation to a posterior over the audited position's candidates.
using PosteriorFn = std::function<PosteriorVector(const std::vector<int>&)>;

struct HoeffdingResult {
    double bound = 0.0;        // lower bound on Pr[p <= delta], clamped to [0,1]
    double log10_exponent = 0.0;  // k with bound >= 1 - 10^{-k}
    bool vacuous = false;      // xi >= 1
};

struct AuditReport {
    std::size_t sample_count = 0;
    double eps = 0.0;
    double p_hat = 0.0;
    double delta_target = 0.0;
    double xi = 0.0;  // p_hat / delta_target; recorded even when >= 1
    double confidence_bound = 0.0;
    double log10_exponent = 0.0;
    std::uint64_t seed = 0;
    std::size_t excluded_zero_distance_pairs = 0;
};

struct TripleSampleResult {
    std::vector<LeakageSample> samples;
    std::size_t excluded_zero_distance_pairs = 0;
};

// Monte-Carlo audit triples: (i,j) uniform over ordered pairs at positive
// distance (rejection), observation drawn from the sampler, mPL evaluated via
// posterior_fn against `prior`. Deterministic given seed; batches use derived
// seeds so parallel and serial runs agree.
TripleSampleResult sample_triples(const SecretSpace& space, const std::vector<double>& prior,
                                  const PosteriorFn& posterior_fn,
                                  const ObservationSampler& mechanism, std::size_t S,
                                  std::uint64_t seed, double eps);

double empirical_rate(const std::vector<LeakageSample>& samples, double eps);

HoeffdingResult hoeffding_certificate(std::size_t S, double xi, double delta);

double recommend_delta(double p_hat_star, double margin = 0.05);

AuditReport run_audit(const SecretSpace& space, const std::vector<double>& prior,
                      const PosteriorFn& posterior_fn, const ObservationSampler& mechanism,
                      std::size_t S, std::uint64_t seed, double eps, double delta_target);

}  // namespace ampl
