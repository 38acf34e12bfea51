#pragma once

#include <vector>

#include "ampl/inference.hpp"

namespace ampl {

// One audited triple (x_i, x_j, y or y-vector) with its mPL value.
struct LeakageSample {
    int i = -1;
    int j = -1;
    std::vector<int> observation;
    int position = 0;
    double mpl = 0.0;  // units 1/distance
    bool violated = false;
};

struct BoundedCheck {
    double max_mpl = 0.0;
    std::size_t violation_count = 0;
    std::vector<LeakageSample> violating;
};

// Metric-normalized posterior leakage for candidates (i, j) at distance d_ij:
// |ln(post_i/post_j) - ln(prior_i/prior_j)| / d_ij, all logs natural.
double mpl_value(const std::vector<double>& prior, const std::vector<double>& posterior,
                 int i, int j, double d_ij);

BoundedCheck check_bounded(const std::vector<LeakageSample>& samples, double eps);

// Stability bound (2 / (gamma * d_min)) * ||p - q||_1 for floored posteriors.
double lipschitz_bound(const std::vector<double>& p, const std::vector<double>& q,
                       double gamma, double d_min);

}  // namespace ampl
