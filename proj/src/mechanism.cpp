#include "ampl/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ampl {

int Channel::row_of(int candidate) const {
    for (std::size_t r = 0; r < inputs.size(); ++r)
        if (inputs[r] == candidate) return static_cast<int>(r);
    return -1;
}

LabeledVectors outputs_from_space(const SecretSpace& space, const std::vector<int>& indices) {
    LabeledVectors out;
    for (int idx : indices) {
        out.labels.push_back(space.candidates[idx]);
        out.vectors.push_back(space.embeddings[idx]);
    }
    return out;
}

Channel build_em_channel(const SecretSpace& space, const std::vector<int>& inputs,
                         const LabeledVectors& outputs, double eps, double alpha) {
    if (outputs.labels.empty())
        throw std::invalid_argument("build_em_channel: empty output set");
    if (eps <= 0.0) throw std::invalid_argument("build_em_channel: eps must be positive");
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("build_em_channel: alpha must be in (0,1]");

    Channel ch;
    ch.inputs = inputs;
    ch.outputs = outputs;
    ch.matrix.assign(inputs.size(), std::vector<double>(outputs.labels.size(), 0.0));

    const double scale = 0.5 * alpha * eps;
    std::vector<double> scores(outputs.labels.size());
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const auto& x = space.embeddings[inputs[r]];
        double max_score = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < outputs.labels.size(); ++k) {
            scores[k] = -scale * euclidean(x, outputs.vectors[k]);
            max_score = std::max(max_score, scores[k]);
        }
        // log-sum-exp: subtract the row max so exp never overflows.
        double z = 0.0;
        for (std::size_t k = 0; k < outputs.labels.size(); ++k) {
            scores[k] = std::exp(scores[k] - max_score);
            z += scores[k];
        }
        for (std::size_t k = 0; k < outputs.labels.size(); ++k)
            ch.matrix[r][k] = scores[k] / z;
    }
    return ch;
}

int sample(const Channel& channel, int x_row, double u) {
    if (x_row < 0 || static_cast<std::size_t>(x_row) >= channel.matrix.size())
        throw std::out_of_range("sample: input row out of range");
    if (u < 0.0 || u >= 1.0)
        throw std::invalid_argument("sample: u must lie in [0,1)");
    const auto& row = channel.matrix[x_row];
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
        cum += row[k];
        if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(row.size()) - 1;
}

MdpCertificate certify_mdp(const Channel& channel, const SecretSpace& space,
                           double eps_target) {
    MdpCertificate cert;
    const std::size_t n = channel.inputs.size();
    const std::size_t m = channel.outputs.labels.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = distance(space, channel.inputs[i], channel.inputs[j]);
            for (std::size_t y = 0; y < m; ++y) {
                double pi = channel.matrix[i][y];
                double pj = channel.matrix[j][y];
                if (pi == pj) continue;
                if (pi <= 0.0 || pj <= 0.0) {
                    // unbounded likelihood ratio at positive distance
                    cert.epsilon_effective = std::numeric_limits<double>::infinity();
                    cert.witness_i = channel.inputs[i];
                    cert.witness_j = channel.inputs[j];
                    cert.witness_y = static_cast<int>(y);
                    cert.pass = false;
                    return cert;
                }
                if (d == 0.0) {
                    cert.epsilon_effective = std::numeric_limits<double>::infinity();
                    cert.witness_i = channel.inputs[i];
                    cert.witness_j = channel.inputs[j];
                    cert.witness_y = static_cast<int>(y);
                    cert.pass = false;
                    return cert;
                }
                double ratio = std::abs(std::log(pi) - std::log(pj)) / d;
                if (ratio > cert.epsilon_effective) {
                    cert.epsilon_effective = ratio;
                    cert.witness_i = channel.inputs[i];
                    cert.witness_j = channel.inputs[j];
                    cert.witness_y = static_cast<int>(y);
                }
            }
        }
    }
    cert.pass = cert.epsilon_effective <= eps_target * (1.0 + 1e-9);
    return cert;
}

LevelwiseMechanism compose_levels(const SecretSpace& space, double eps,
                                  const std::vector<double>& alpha,
                                  const std::map<int, LabeledVectors>* outputs_per_tier) {
    const int tiers = space.tier_count();
    if (static_cast<int>(alpha.size()) != tiers)
        throw std::invalid_argument("compose_levels: alpha size must equal tier count");
    LevelwiseMechanism mech;
    for (int t = 1; t <= tiers; ++t) {
        double a = alpha[t - 1];
        if (a <= 0.0 || a > 1.0)
            throw std::invalid_argument("compose_levels: alpha entries must be in (0,1]");
        auto members = space.tier_members(t);
        LabeledVectors outs;
        if (outputs_per_tier != nullptr && outputs_per_tier->count(t))
            outs = outputs_per_tier->at(t);
        else
            outs = outputs_from_space(space, members);  // secret-to-secret substitution
        if (outs.labels.empty())
            throw std::invalid_argument("compose_levels: tier without output candidates");
        mech.tier_channels[t] = build_em_channel(space, members, outs, eps, a);
        mech.alpha[t] = a;
    }
    return mech;
}

}  // namespace ampl
