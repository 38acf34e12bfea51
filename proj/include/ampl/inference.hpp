#pragma once

#include <vector>

#include "ampl/mechanism.hpp"
#include "ampl/space.hpp"

namespace ampl {

struct PosteriorVector {
    int target_position = 0;
    std::vector<double> probs;          // over the channel's input candidates
    std::vector<int> conditioning;      // the observed y (or y-vector)
};

// Bayes posterior over channel inputs given one observed output index.
// Throws on zero evidence (y unreachable under the prior).
PosteriorVector posterior_single(const Channel& channel, const std::vector<double>& prior,
                                 int y);

// Exact joint posterior for position `ell` given one observation per position.
// Cost is O(|support| * L); intended for small explicit joint models.
PosteriorVector posterior_joint_exact(const JointModel& joint,
                                      const std::vector<Channel>& channels,
                                      const std::vector<int>& y_vec, int ell);

std::vector<double> marginal_output(const Channel& channel, const std::vector<double>& prior);

}  // namespace ampl
