#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "ampl/leakage.hpp"
#include "ampl/mechanism.hpp"
#include "ampl/toy.hpp"

using namespace ampl;

namespace {

Channel random_channel(std::mt19937_64& rng, int n_in, int n_out) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    Channel ch;
    for (int i = 0; i < n_in; ++i) ch.inputs.push_back(i);
    for (int k = 0; k < n_out; ++k) {
        ch.outputs.labels.push_back("y" + std::to_string(k));
        ch.outputs.vectors.push_back({static_cast<double>(k)});
    }
    ch.matrix.assign(n_in, std::vector<double>(n_out));
    for (auto& row : ch.matrix) {
        double sum = 0.0;
        for (double& p : row) {
            p = unit(rng);
            sum += p;
        }
        for (double& p : row) p /= sum;
    }
    return ch;
}

std::vector<double> random_prior(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::vector<double> prior(n);
    double sum = 0.0;
    for (double& p : prior) {
        p = unit(rng);
        sum += p;
    }
    for (double& p : prior) p /= sum;
    return prior;
}

SecretSpace line_space(int n) {
    LabeledVectors v;
    for (int i = 0; i < n; ++i) {
        v.labels.push_back("c" + std::to_string(i));
        v.vectors.push_back({static_cast<double>(i)});
    }
    return build_space(v, {}, {}, 1.0);
}

double sup_single_mpl(const Channel& ch, const SecretSpace& space,
                      const std::vector<double>& prior) {
    double sup = 0.0;
    for (std::size_t y = 0; y < ch.outputs.labels.size(); ++y) {
        auto post = posterior_single(ch, prior, static_cast<int>(y));
        for (std::size_t i = 0; i < prior.size(); ++i)
            for (std::size_t j = 0; j < prior.size(); ++j) {
                if (i == j) continue;
                double d = distance(space, static_cast<int>(i), static_cast<int>(j));
                if (d <= 0.0) continue;
                sup = std::max(sup, mpl_value(prior, post.probs, static_cast<int>(i),
                                              static_cast<int>(j), d));
            }
    }
    return sup;
}

std::vector<double> random_floored_posterior(std::mt19937_64& rng, int n, double gamma) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (double& x : p) {
        x = unit(rng);
        sum += x;
    }
    // mix with uniform so the floor holds
    for (double& x : p) x = (1.0 - n * gamma) * (x / sum) + gamma;
    return p;
}

}  // namespace

TEST_CASE("mpl_value") {
    SUBCASE("no belief shift is zero leakage") {
        std::vector<double> prior{0.4, 0.6};
        CHECK(mpl_value(prior, prior, 0, 1, 2.0) == doctest::Approx(0.0));
    }
    SUBCASE("single-observation golden value") {
        std::vector<double> prior{0.5, 0.5}, post{0.72, 0.28};
        CHECK(mpl_value(prior, post, 0, 1, 1.0) == doctest::Approx(0.9445).epsilon(1e-4));
    }
    SUBCASE("joint golden value from the worked odds") {
        double s = 0.256032 + 0.040432;
        std::vector<double> prior{0.5, 0.5}, post{0.256032 / s, 0.040432 / s};
        CHECK(mpl_value(prior, post, 0, 1, 1.0) == doctest::Approx(1.8456).epsilon(1e-4));
    }
    SUBCASE("rejects zero probability and zero distance") {
        std::vector<double> prior{0.5, 0.5}, post{1.0, 0.0};
        CHECK_THROWS_AS(mpl_value(prior, post, 0, 1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(mpl_value(prior, prior, 0, 1, 0.0), std::invalid_argument);
    }
}

TEST_CASE("check_bounded") {
    std::vector<double> prior{0.5, 0.5};
    LeakageSample low{0, 1, {0}, 0, 0.9445, false};
    LeakageSample high{0, 1, {0, 1}, 0, 1.8456, false};

    SUBCASE("toy verdicts at eps = 1") {
        auto r = check_bounded({low, high}, 1.0);
        CHECK(r.violation_count == 1);
        CHECK(r.max_mpl == doctest::Approx(1.8456));
        REQUIRE(r.violating.size() == 1);
        CHECK(r.violating[0].mpl == doctest::Approx(1.8456));
    }
    SUBCASE("all below eps") {
        auto r = check_bounded({low}, 1.0);
        CHECK(r.violation_count == 0);
    }
    SUBCASE("eps = 0 flags everything nonzero") {
        auto r = check_bounded({low, high}, 0.0);
        CHECK(r.violation_count == 2);
    }
    SUBCASE("empty input") {
        auto r = check_bounded({}, 1.0);
        CHECK(r.max_mpl == 0.0);
        CHECK(r.violation_count == 0);
    }
}

TEST_CASE("lipschitz_bound") {
    std::vector<double> p{0.5, 0.45, 0.05}, q{0.55, 0.4, 0.05};
    CHECK(lipschitz_bound(p, p, 0.05, 1.0) == doctest::Approx(0.0));
    CHECK(lipschitz_bound(p, q, 0.05, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(lipschitz_bound(p, q, 0.05, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    std::vector<double> below{0.97, 0.02, 0.01};
    CHECK_THROWS_AS(lipschitz_bound(below, q, 0.05, 1.0), std::invalid_argument);
}

TEST_CASE("single-observation equivalence with mDP certificate") {
    std::mt19937_64 rng(53);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + rep % 7, m = 2 + rep % 7;
        auto space = line_space(n);
        auto ch = random_channel(rng, n, m);
        auto prior = random_prior(rng, n);
        auto cert = certify_mdp(ch, space, 1e9);
        CHECK(sup_single_mpl(ch, space, prior) ==
              doctest::Approx(cert.epsilon_effective).epsilon(1e-9));
    }
}

TEST_CASE("post-processing never increases sup mPL (random remaps)") {
    std::mt19937_64 rng(59);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + rep % 4, m = 2 + rep % 4;
        auto space = line_space(n);
        auto ch = random_channel(rng, n, m);
        auto prior = random_prior(rng, n);
        std::uniform_int_distribution<int> pick(0, m - 1);

        // random deterministic remap f over outputs
        std::vector<int> f(m);
        for (int& z : f) z = pick(rng);
        Channel mapped = ch;
        for (auto& row : mapped.matrix) {
            std::vector<double> out(m, 0.0);
            for (int y = 0; y < m; ++y) out[f[y]] += row[y];
            row = out;
        }

        double sup_before = sup_single_mpl(ch, space, prior);
        double sup_after = 0.0;
        for (int z = 0; z < m; ++z) {
            double evidence = 0.0;
            for (int x = 0; x < n; ++x) evidence += mapped.matrix[x][z] * prior[x];
            if (evidence <= 0.0) continue;
            auto post = posterior_single(mapped, prior, z);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    double d = distance(space, i, j);
                    sup_after = std::max(sup_after, mpl_value(prior, post.probs, i, j, d));
                }
        }
        CHECK(sup_after <= sup_before + 1e-9);
    }
}

TEST_CASE("Lipschitz bound holds for random floored posterior pairs") {
    std::mt19937_64 rng(61);
    const double gamma = 0.02, d_min = 0.5;
    std::vector<double> prior{0.25, 0.25, 0.25, 0.25};
    for (int rep = 0; rep < 1000; ++rep) {
        auto p = random_floored_posterior(rng, 4, gamma);
        auto q = random_floored_posterior(rng, 4, gamma);
        double bound = lipschitz_bound(p, q, gamma, d_min);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                if (i == j) continue;
                double diff = std::abs(mpl_value(prior, p, i, j, d_min) -
                                       mpl_value(prior, q, i, j, d_min));
                CHECK(diff <= bound + 1e-9);
            }
    }
}
