#pragma once

#include <map>
#include <string>
#include <vector>

namespace ampl {

// Finite metric secret space: candidates with embeddings, tier labels and a
// strictly positive prior. Immutable after construction; safe to share
// read-only across audit workers.
struct SecretSpace {
    std::vector<std::string> candidates;
    std::vector<std::vector<double>> embeddings;  // all rows have dimension D
    std::vector<int> tier_of;                     // tiers are 1..N, contiguous
    std::vector<double> prior;                    // strictly positive, sums to 1

    std::size_t size() const { return candidates.size(); }
    std::size_t dim() const { return embeddings.empty() ? 0 : embeddings[0].size(); }
    int tier_count() const;
    int index_of(const std::string& label) const;  // -1 if unknown
    std::vector<int> tier_members(int tier) const;
    double tier_prior_mass(int tier) const;
};

// Explicit joint prior over L-tuples of candidate indices.
struct JointModel {
    int length = 0;
    std::vector<std::vector<int>> support;  // sorted lexicographically
    std::vector<double> probs;
    std::vector<std::vector<double>> marginals;  // [position][candidate]
};

// Utility-loss entries c_{x,y} in [0,1]; rows indexed by secret candidates,
// columns by output candidates.
struct CostMatrix {
    std::vector<std::vector<double>> entries;
};

struct LabeledVectors {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> vectors;
};

SecretSpace build_space(const LabeledVectors& embeddings,
                        const std::map<std::string, int>& tiers,
                        const std::map<std::string, double>& counts,
                        double smoothing = 1.0);

double distance(const SecretSpace& space, int i, int j);
double euclidean(const std::vector<double>& a, const std::vector<double>& b);

JointModel build_joint(int length, const std::map<std::vector<int>, double>& table,
                       int candidate_count);

CostMatrix cost_matrix(const SecretSpace& space, const LabeledVectors& outputs);

}  // namespace ampl
