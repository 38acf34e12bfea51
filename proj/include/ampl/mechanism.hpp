#pragma once

#include <map>
#include <string>
#include <vector>

#include "ampl/space.hpp"

namespace ampl {

// Row-stochastic perturbation channel Pr[Y=y_k | X = candidate inputs[r]].
// Immutable after build; sampling is pure given (row, u).
struct Channel {
    std::vector<int> inputs;  // candidate indices into the owning SecretSpace
    LabeledVectors outputs;
    std::vector<std::vector<double>> matrix;  // [input row][output]

    int row_of(int candidate) const;  // -1 if candidate not an input
};

struct LevelwiseMechanism {
    std::map<int, Channel> tier_channels;  // tier index -> channel
    std::map<int, double> alpha;           // tier index -> strength in (0,1]
};

struct MdpCertificate {
    double epsilon_effective = 0.0;  // sup over (i != j, y) of |ln ratio| / d
    int witness_i = -1;
    int witness_j = -1;
    int witness_y = -1;
    bool pass = false;
};

Channel build_em_channel(const SecretSpace& space, const std::vector<int>& inputs,
                         const LabeledVectors& outputs, double eps, double alpha);

// Convenience: outputs taken from the space's own candidates.
LabeledVectors outputs_from_space(const SecretSpace& space, const std::vector<int>& indices);

// CDF inversion over row `x`: returns k with F_{k-1} <= u < F_k. Requires u in [0,1).
int sample(const Channel& channel, int x_row, double u);

MdpCertificate certify_mdp(const Channel& channel, const SecretSpace& space,
                           double eps_target);

LevelwiseMechanism compose_levels(const SecretSpace& space, double eps,
                                  const std::vector<double>& alpha,
                                  const std::map<int, LabeledVectors>* outputs_per_tier = nullptr);

}  // namespace ampl
