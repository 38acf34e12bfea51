#include "ampl/inference.hpp"

#include <cmath>
#include <stdexcept>

namespace ampl {

PosteriorVector posterior_single(const Channel& channel, const std::vector<double>& prior,
                                 int y) {
    if (prior.size() != channel.inputs.size())
        throw std::invalid_argument("posterior_single: prior size mismatch");
    if (y < 0 || static_cast<std::size_t>(y) >= channel.outputs.labels.size())
        throw std::out_of_range("posterior_single: output index out of range");

    PosteriorVector post;
    post.conditioning = {y};
    post.probs.resize(prior.size());
    double evidence = 0.0;
    for (std::size_t x = 0; x < prior.size(); ++x) {
        post.probs[x] = channel.matrix[x][y] * prior[x];
        evidence += post.probs[x];
    }
    if (evidence <= 0.0)
        throw std::runtime_error("posterior_single: zero evidence for observation");
    for (double& p : post.probs) p /= evidence;
    return post;
}

PosteriorVector posterior_joint_exact(const JointModel& joint,
                                      const std::vector<Channel>& channels,
                                      const std::vector<int>& y_vec, int ell) {
    if (static_cast<int>(y_vec.size()) != joint.length)
        throw std::invalid_argument("posterior_joint_exact: y_vec length mismatch");
    if (static_cast<int>(channels.size()) != joint.length)
        throw std::invalid_argument("posterior_joint_exact: one channel per position required");
    if (ell < 0 || ell >= joint.length)
        throw std::out_of_range("posterior_joint_exact: target position out of range");
    if (joint.support.empty())
        throw std::invalid_argument("posterior_joint_exact: empty joint support");

    const std::size_t n = joint.marginals[ell].size();
    PosteriorVector post;
    post.target_position = ell;
    post.conditioning = y_vec;
    post.probs.assign(n, 0.0);

    double evidence = 0.0;
    for (std::size_t t = 0; t < joint.support.size(); ++t) {
        const auto& tuple = joint.support[t];
        double w = joint.probs[t];
        for (int m = 0; m < joint.length && w > 0.0; ++m) {
            int row = channels[m].row_of(tuple[m]);
            if (row < 0)
                throw std::invalid_argument(
                    "posterior_joint_exact: support candidate missing from channel inputs");
            w *= channels[m].matrix[row][y_vec[m]];
        }
        post.probs[tuple[ell]] += w;
        evidence += w;
    }
    if (evidence <= 0.0)
        throw std::runtime_error("posterior_joint_exact: zero evidence for observation");
    for (double& p : post.probs) p /= evidence;
    return post;
}

std::vector<double> marginal_output(const Channel& channel, const std::vector<double>& prior) {
    if (prior.size() != channel.inputs.size())
        throw std::invalid_argument("marginal_output: prior size mismatch");
    std::vector<double> marginal(channel.outputs.labels.size(), 0.0);
    for (std::size_t x = 0; x < prior.size(); ++x)
        for (std::size_t y = 0; y < marginal.size(); ++y)
            marginal[y] += channel.matrix[x][y] * prior[x];
    return marginal;
}

}  // namespace ampl
