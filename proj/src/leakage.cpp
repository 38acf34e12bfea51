#include "ampl/leakage.hpp"

#include <cmath>
#include <stdexcept>

namespace ampl {

double mpl_value(const std::vector<double>& prior, const std::vector<double>& posterior,
                 int i, int j, double d_ij) {
    if (d_ij <= 0.0) throw std::invalid_argument("mpl_value: distance must be positive");
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= posterior.size() ||
        static_cast<std::size_t>(j) >= posterior.size() ||
        static_cast<std::size_t>(i) >= prior.size() ||
        static_cast<std::size_t>(j) >= prior.size())
        throw std::out_of_range("mpl_value: candidate index out of range");
    if (prior[i] <= 0.0 || prior[j] <= 0.0 || posterior[i] <= 0.0 || posterior[j] <= 0.0)
        throw std::invalid_argument("mpl_value: zero probability");
    double post_odds = std::log(posterior[i]) - std::log(posterior[j]);
    double prior_odds = std::log(prior[i]) - std::log(prior[j]);
    return std::abs(post_odds - prior_odds) / d_ij;
}

BoundedCheck check_bounded(const std::vector<LeakageSample>& samples, double eps) {
    BoundedCheck result;
    for (const auto& s : samples) {
        if (s.mpl > result.max_mpl) result.max_mpl = s.mpl;
        if (s.mpl > eps) {
            ++result.violation_count;
            LeakageSample v = s;
            v.violated = true;
            result.violating.push_back(v);
        }
    }
    return result;
}

double lipschitz_bound(const std::vector<double>& p, const std::vector<double>& q,
                       double gamma, double d_min) {
    if (d_min <= 0.0) throw std::invalid_argument("lipschitz_bound: d_min must be positive");
    if (gamma <= 0.0) throw std::invalid_argument("lipschitz_bound: gamma must be positive");
    if (p.size() != q.size())
        throw std::invalid_argument("lipschitz_bound: posterior size mismatch");
    double l1 = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] < gamma * (1.0 - 1e-12) || q[k] < gamma * (1.0 - 1e-12))
            throw std::invalid_argument("lipschitz_bound: posterior below floor");
        l1 += std::abs(p[k] - q[k]);
    }
    return 2.0 / (gamma * d_min) * l1;
}

}  // namespace ampl
