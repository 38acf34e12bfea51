#pragma once

#include <vector>

#include "ampl/inference.hpp"
#include "ampl/mechanism.hpp"
#include "ampl/space.hpp"

namespace ampl {

// Deterministic post-processing map over a shared output candidate list.
struct RemapTable {
    std::vector<int> mapping;                 // y index -> z index
    std::vector<std::vector<int>> preimages;  // z index -> {y : f(y) = z}
    std::vector<int> unreachable;             // outputs with zero evidence, mapped to self
};

// Expected-cost-minimizing remap under the tier-mixture posterior, with tier
// weights proportional to tier prior mass. Ties break to the lowest output
// index. Cost columns must be indexed by `outputs`.
RemapTable bayes_remap(const LevelwiseMechanism& mech, const SecretSpace& space,
                       const CostMatrix& cost, const LabeledVectors& outputs);

// Single-channel form over the channel's own output list.
RemapTable bayes_remap(const Channel& channel, const std::vector<double>& prior,
                       const CostMatrix& cost);

// (f o M): P[z|x] = sum over the preimage of z of P[y|x].
Channel remap_channel(const Channel& channel, const RemapTable& table);

// Posterior given the remapped release: mixture of preimage posteriors
// weighted by output marginals.
PosteriorVector post_remap_posterior(const Channel& channel, const std::vector<double>& prior,
                                     const RemapTable& table, int z);

double expected_cost(const Channel& channel, const std::vector<double>& prior,
                     const CostMatrix& cost);

}  // namespace ampl
