#include "ampl/audit.hpp"

#include <cmath>
#include <stdexcept>

namespace ampl {

namespace {

constexpr std::size_t kBatchSize = 1024;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TripleSampleResult sample_triples(const SecretSpace& space, const std::vector<double>& prior,
                                  const PosteriorFn& posterior_fn,
                                  const ObservationSampler& mechanism, std::size_t S,
                                  std::uint64_t seed, double eps) {
    if (S < 1) throw std::invalid_argument("sample_triples: S must be >= 1");
    const std::size_t n = space.size();
    bool any_pair = false;
    for (std::size_t i = 0; i < n && !any_pair; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && distance(space, static_cast<int>(i), static_cast<int>(j)) > 0.0) {
                any_pair = true;
                break;
            }
    if (!any_pair)
        throw std::invalid_argument("sample_triples: no candidate pair with positive distance");

    TripleSampleResult result;
    result.samples.reserve(S);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);

    const std::size_t batches = (S + kBatchSize - 1) / kBatchSize;
    for (std::size_t b = 0; b < batches; ++b) {
        std::mt19937_64 rng(splitmix64(seed ^ (b + 1)));
        std::size_t count = std::min(kBatchSize, S - b * kBatchSize);
        for (std::size_t s = 0; s < count; ++s) {
            int i, j;
            double d;
            for (;;) {
                i = pick(rng);
                j = pick(rng);
                if (i == j) continue;
                d = distance(space, i, j);
                if (d > 0.0) break;
                ++result.excluded_zero_distance_pairs;
            }
            std::vector<int> y = mechanism(rng);
            PosteriorVector post = posterior_fn(y);
            LeakageSample sample;
            sample.i = i;
            sample.j = j;
            sample.observation = y;
            sample.position = post.target_position;
            sample.mpl = mpl_value(prior, post.probs, i, j, d);
            sample.violated = sample.mpl > eps;
            result.samples.push_back(std::move(sample));
        }
    }
    return result;
}

double empirical_rate(const std::vector<LeakageSample>& samples, double eps) {
    if (samples.empty()) throw std::invalid_argument("empirical_rate: empty sample set");
    std::size_t violations = 0;
    for (const auto& s : samples)
        if (s.mpl > eps) ++violations;
    return static_cast<double>(violations) / static_cast<double>(samples.size());
}

HoeffdingResult hoeffding_certificate(std::size_t S, double xi, double delta) {
    if (S < 1) throw std::invalid_argument("hoeffding_certificate: S must be >= 1");
    if (delta <= 0.0 || delta > 1.0)
        throw std::invalid_argument("hoeffding_certificate: delta must be in (0,1]");
    if (xi < 0.0) throw std::invalid_argument("hoeffding_certificate: xi must be nonnegative");

    HoeffdingResult result;
    if (xi >= 1.0) {
        result.vacuous = true;
        result.bound = 0.0;
        result.log10_exponent = 0.0;
        return result;
    }
    double exponent = 2.0 * static_cast<double>(S) * (1.0 - xi) * (1.0 - xi) * delta * delta;
    result.bound = std::max(0.0, 1.0 - 2.0 * std::exp(-exponent));
    // Linear bound underflows to 1 at paper-scale S; the base-10 exponent k
    // with bound >= 1 - 10^{-k} stays representable.
    result.log10_exponent = exponent * 0.4342944819032518 - 0.3010299956639812;
    return result;
}

double recommend_delta(double p_hat_star, double margin) {
    if (margin < 0.0) throw std::invalid_argument("recommend_delta: negative margin");
    if (p_hat_star < 0.0 || p_hat_star > 1.0)
        throw std::invalid_argument("recommend_delta: rate must be in [0,1]");
    return std::min(1.0, (1.0 + margin) * p_hat_star);
}

AuditReport run_audit(const SecretSpace& space, const std::vector<double>& prior,
                      const PosteriorFn& posterior_fn, const ObservationSampler& mechanism,
                      std::size_t S, std::uint64_t seed, double eps, double delta_target) {
    auto triples = sample_triples(space, prior, posterior_fn, mechanism, S, seed, eps);
    AuditReport report;
    report.sample_count = S;
    report.eps = eps;
    report.seed = seed;
    report.excluded_zero_distance_pairs = triples.excluded_zero_distance_pairs;
    report.p_hat = empirical_rate(triples.samples, eps);
    report.delta_target = delta_target;
    report.xi = delta_target > 0.0 ? report.p_hat / delta_target : 0.0;
    if (delta_target > 0.0) {
        auto cert = hoeffding_certificate(S, report.xi, delta_target);
        report.confidence_bound = cert.bound;
        report.log10_exponent = cert.log10_exponent;
    }
    return report;
}

}  // namespace ampl
