#include "ampl/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ampl {

int SecretSpace::tier_count() const {
    int n = 0;
    for (int t : tier_of) n = std::max(n, t);
    return n;
}

int SecretSpace::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (candidates[i] == label) return static_cast<int>(i);
    return -1;
}

std::vector<int> SecretSpace::tier_members(int tier) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < tier_of.size(); ++i)
        if (tier_of[i] == tier) out.push_back(static_cast<int>(i));
    return out;
}

double SecretSpace::tier_prior_mass(int tier) const {
    double m = 0.0;
    for (std::size_t i = 0; i < tier_of.size(); ++i)
        if (tier_of[i] == tier) m += prior[i];
    return m;
}

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

SecretSpace build_space(const LabeledVectors& embeddings,
                        const std::map<std::string, int>& tiers,
                        const std::map<std::string, double>& counts,
                        double smoothing) {
    if (embeddings.labels.empty())
        throw std::invalid_argument("build_space: empty candidate set");
    if (smoothing <= 0.0)
        throw std::invalid_argument("build_space: smoothing must be positive");

    const std::size_t dim = embeddings.vectors[0].size();
    if (dim == 0) throw std::invalid_argument("build_space: zero-dimensional embeddings");
    for (const auto& v : embeddings.vectors)
        if (v.size() != dim)
            throw std::invalid_argument("build_space: embedding dimension mismatch");
    for (const auto& [label, tier] : tiers) {
        bool known = std::find(embeddings.labels.begin(), embeddings.labels.end(), label) !=
                     embeddings.labels.end();
        if (!known)
            throw std::invalid_argument("build_space: unknown label in tiers: " + label);
        if (tier < 1) throw std::invalid_argument("build_space: tier indices start at 1");
    }

    SecretSpace space;
    space.candidates = embeddings.labels;
    space.embeddings = embeddings.vectors;
    space.tier_of.resize(space.candidates.size(), 1);
    for (std::size_t i = 0; i < space.candidates.size(); ++i) {
        auto it = tiers.find(space.candidates[i]);
        if (it != tiers.end()) space.tier_of[i] = it->second;
    }

    // Laplace-smoothed prior; smoothing > 0 keeps every entry strictly positive.
    space.prior.resize(space.candidates.size());
    double total = 0.0;
    for (std::size_t i = 0; i < space.candidates.size(); ++i) {
        auto it = counts.find(space.candidates[i]);
        double c = (it == counts.end()) ? 0.0 : it->second;
        if (c < 0.0) throw std::invalid_argument("build_space: negative count");
        space.prior[i] = c + smoothing;
        total += space.prior[i];
    }
    for (double& p : space.prior) p /= total;
    return space;
}

double distance(const SecretSpace& space, int i, int j) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= space.size() ||
        static_cast<std::size_t>(j) >= space.size())
        throw std::out_of_range("distance: candidate index out of range");
    if (i == j) return 0.0;
    return euclidean(space.embeddings[i], space.embeddings[j]);
}

JointModel build_joint(int length, const std::map<std::vector<int>, double>& table,
                       int candidate_count) {
    if (length < 1) throw std::invalid_argument("build_joint: length must be >= 1");
    if (table.empty()) throw std::invalid_argument("build_joint: empty table");

    double total = 0.0;
    for (const auto& [tuple, p] : table) {
        if (static_cast<int>(tuple.size()) != length)
            throw std::invalid_argument("build_joint: tuple length mismatch");
        for (int idx : tuple)
            if (idx < 0 || idx >= candidate_count)
                throw std::invalid_argument("build_joint: candidate index out of range");
        if (p <= 0.0) throw std::invalid_argument("build_joint: probabilities must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("build_joint: probabilities must sum to 1");

    JointModel joint;
    joint.length = length;
    // std::map iterates keys in lexicographic order already.
    for (const auto& [tuple, p] : table) {
        joint.support.push_back(tuple);
        joint.probs.push_back(p);
    }
    joint.marginals.assign(length, std::vector<double>(candidate_count, 0.0));
    for (std::size_t t = 0; t < joint.support.size(); ++t)
        for (int pos = 0; pos < length; ++pos)
            joint.marginals[pos][joint.support[t][pos]] += joint.probs[t];
    return joint;
}

CostMatrix cost_matrix(const SecretSpace& space, const LabeledVectors& outputs) {
    CostMatrix cost;
    cost.entries.assign(space.size(), std::vector<double>(outputs.labels.size(), 0.0));
    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    for (std::size_t i = 0; i < space.size(); ++i) {
        double ni = norm(space.embeddings[i]);
        if (ni == 0.0) throw std::invalid_argument("cost_matrix: zero-norm embedding");
        for (std::size_t k = 0; k < outputs.labels.size(); ++k) {
            const auto& y = outputs.vectors[k];
            if (y.size() != space.dim())
                throw std::invalid_argument("cost_matrix: output dimension mismatch");
            double ny = norm(y);
            if (ny == 0.0) throw std::invalid_argument("cost_matrix: zero-norm output embedding");
            double dot = 0.0;
            for (std::size_t d = 0; d < y.size(); ++d) dot += space.embeddings[i][d] * y[d];
            double sim = dot / (ni * ny);
            sim = std::clamp(sim, -1.0, 1.0);
            cost.entries[i][k] = 1.0 - (sim + 1.0) / 2.0;
        }
    }
    return cost;
}

}  // namespace ampl
