#include "ampl/remap.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ampl {

namespace {

RemapTable table_from_costs(const std::vector<std::vector<double>>& expected,
                            const std::vector<bool>& reachable) {
    const std::size_t m = expected.size();
    RemapTable table;
    table.mapping.resize(m);
    table.preimages.assign(m, {});
    for (std::size_t y = 0; y < m; ++y) {
        if (!reachable[y]) {
            table.mapping[y] = static_cast<int>(y);
            table.unreachable.push_back(static_cast<int>(y));
            continue;
        }
        std::size_t best = 0;
        for (std::size_t z = 1; z < expected[y].size(); ++z)
            if (expected[y][z] < expected[y][best]) best = z;  // ties keep lowest index
        table.mapping[y] = static_cast<int>(best);
    }
    for (std::size_t y = 0; y < m; ++y)
        table.preimages[table.mapping[y]].push_back(static_cast<int>(y));
    return table;
}

}  // namespace

RemapTable bayes_remap(const LevelwiseMechanism& mech, const SecretSpace& space,
                       const CostMatrix& cost, const LabeledVectors& outputs) {
    const std::size_t m = outputs.labels.size();
    // weight[y][x]: tier-mixture posterior mass of candidate x given release y
    std::vector<std::vector<double>> posterior(m, std::vector<double>(space.size(), 0.0));
    std::vector<double> total_weight(m, 0.0);

    for (const auto& [tier, channel] : mech.tier_channels) {
        double tier_mass = space.tier_prior_mass(tier);
        if (tier_mass <= 0.0) continue;

        // Tier-restricted prior, renormalized.
        std::vector<double> prior(channel.inputs.size());
        for (std::size_t r = 0; r < channel.inputs.size(); ++r)
            prior[r] = space.prior[channel.inputs[r]] / tier_mass;

        // Match tier outputs to the global output list by label.
        std::vector<int> global_of(channel.outputs.labels.size(), -1);
        for (std::size_t k = 0; k < channel.outputs.labels.size(); ++k)
            for (std::size_t g = 0; g < m; ++g)
                if (outputs.labels[g] == channel.outputs.labels[k]) {
                    global_of[k] = static_cast<int>(g);
                    break;
                }

        for (std::size_t k = 0; k < channel.outputs.labels.size(); ++k) {
            if (global_of[k] < 0)
                throw std::invalid_argument("bayes_remap: tier output missing from output list");
            double evidence = 0.0;
            for (std::size_t r = 0; r < channel.inputs.size(); ++r)
                evidence += channel.matrix[r][k] * prior[r];
            if (evidence <= 0.0) continue;
            for (std::size_t r = 0; r < channel.inputs.size(); ++r)
                posterior[global_of[k]][channel.inputs[r]] +=
                    tier_mass * channel.matrix[r][k] * prior[r] / evidence;
            total_weight[global_of[k]] += tier_mass;
        }
    }

    std::vector<std::vector<double>> expected(m, std::vector<double>(m, 0.0));
    std::vector<bool> reachable(m, false);
    for (std::size_t y = 0; y < m; ++y) {
        if (total_weight[y] <= 0.0) continue;
        reachable[y] = true;
        for (std::size_t z = 0; z < m; ++z) {
            double e = 0.0;
            for (std::size_t x = 0; x < space.size(); ++x)
                e += posterior[y][x] / total_weight[y] * cost.entries[x][z];
            expected[y][z] = e;
        }
    }
    return table_from_costs(expected, reachable);
}

RemapTable bayes_remap(const Channel& channel, const std::vector<double>& prior,
                       const CostMatrix& cost) {
    const std::size_t m = channel.outputs.labels.size();
    std::vector<std::vector<double>> expected(m, std::vector<double>(m, 0.0));
    std::vector<bool> reachable(m, false);
    for (std::size_t y = 0; y < m; ++y) {
        double evidence = 0.0;
        for (std::size_t x = 0; x < channel.inputs.size(); ++x)
            evidence += channel.matrix[x][y] * prior[x];
        if (evidence <= 0.0) continue;
        reachable[y] = true;
        for (std::size_t z = 0; z < m; ++z) {
            double e = 0.0;
            for (std::size_t x = 0; x < channel.inputs.size(); ++x)
                e += channel.matrix[x][y] * prior[x] / evidence *
                     cost.entries[channel.inputs[x]][z];
            expected[y][z] = e;
        }
    }
    return table_from_costs(expected, reachable);
}

Channel remap_channel(const Channel& channel, const RemapTable& table) {
    if (table.mapping.size() != channel.outputs.labels.size())
        throw std::invalid_argument("remap_channel: table does not cover the output set");
    Channel out;
    out.inputs = channel.inputs;
    out.outputs = channel.outputs;
    out.matrix.assign(channel.matrix.size(),
                      std::vector<double>(channel.outputs.labels.size(), 0.0));
    for (std::size_t x = 0; x < channel.matrix.size(); ++x)
        for (std::size_t y = 0; y < table.mapping.size(); ++y)
            out.matrix[x][table.mapping[y]] += channel.matrix[x][y];
    return out;
}

PosteriorVector post_remap_posterior(const Channel& channel, const std::vector<double>& prior,
                                     const RemapTable& table, int z) {
    if (z < 0 || static_cast<std::size_t>(z) >= table.preimages.size())
        throw std::out_of_range("post_remap_posterior: z out of range");
    const auto& pre = table.preimages[z];
    if (pre.empty())
        throw std::runtime_error("post_remap_posterior: empty preimage");

    auto marginal = marginal_output(channel, prior);
    double mass = 0.0;
    for (int y : pre) mass += marginal[y];
    if (mass <= 0.0)
        throw std::runtime_error("post_remap_posterior: zero-mass preimage");

    PosteriorVector post;
    post.conditioning = {z};
    post.probs.assign(prior.size(), 0.0);
    for (int y : pre) {
        if (marginal[y] <= 0.0) continue;
        auto py = posterior_single(channel, prior, y);
        for (std::size_t x = 0; x < prior.size(); ++x)
            post.probs[x] += py.probs[x] * marginal[y] / mass;
    }
    return post;
}

double expected_cost(const Channel& channel, const std::vector<double>& prior,
                     const CostMatrix& cost) {
    double total = 0.0;
    for (std::size_t x = 0; x < channel.inputs.size(); ++x)
        for (std::size_t y = 0; y < channel.outputs.labels.size(); ++y)
            total += prior[x] * channel.matrix[x][y] * cost.entries[channel.inputs[x]][y];
    return total;
}

}  // namespace ampl
