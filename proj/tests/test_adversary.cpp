#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "ampl/adversary.hpp"
#include "ampl/leakage.hpp"
#include "ampl/mechanism.hpp"

using namespace ampl;

namespace {

SecretSpace random_space(std::mt19937_64& rng, int n, int dim) {
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    LabeledVectors v;
    for (int i = 0; i < n; ++i) {
        v.labels.push_back("c" + std::to_string(i));
        std::vector<double> e(dim);
        for (double& x : e) x = coord(rng);
        v.vectors.push_back(e);
    }
    return build_space(v, {}, {}, 1.0);
}

std::vector<std::vector<double>> random_inputs(std::mt19937_64& rng, int n, int dim) {
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
    for (auto& x : xs)
        for (double& c : x) c = coord(rng);
    return xs;
}

}  // namespace

TEST_CASE("train_reconstructor") {
    SUBCASE("identity task reaches tiny validation MSE") {
        std::mt19937_64 rng(67);
        auto xs = random_inputs(rng, 60, 3);
        TrainConfig cfg;
        cfg.max_epochs = 200;
        cfg.learning_rate = 0.05;
        cfg.seed = 1;
        auto model = train_reconstructor(xs, xs, cfg);
        double best = 1e18;
        for (const auto& e : model.training_log) best = std::min(best, e.val_mse);
        CHECK(best < 1e-6);
    }
    SUBCASE("affine task is realizable with the bias") {
        std::mt19937_64 rng(71);
        auto xs = random_inputs(rng, 60, 3);
        auto ys = xs;
        for (auto& y : ys)
            for (std::size_t k = 0; k < y.size(); ++k) y[k] += 0.7;
        TrainConfig cfg;
        cfg.max_epochs = 300;
        cfg.learning_rate = 0.05;
        cfg.seed = 2;
        auto model = train_reconstructor(xs, ys, cfg);
        double best = 1e18;
        for (const auto& e : model.training_log) best = std::min(best, e.val_mse);
        CHECK(best < 1e-6);
    }
    SUBCASE("EM-perturbed pairs: validation MSE improves") {
        std::mt19937_64 rng(73);
        auto space = random_space(rng, 10, 3);
        std::vector<int> all;
        for (int i = 0; i < 10; ++i) all.push_back(i);
        auto ch = build_em_channel(space, all, outputs_from_space(space, all), 4.0, 1.0);
        std::uniform_int_distribution<int> pick(0, 9);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::vector<double>> ys, xs;
        for (int s = 0; s < 200; ++s) {
            int x = pick(rng);
            int y = sample(ch, x, unit(rng) * 0.999999);
            ys.push_back(ch.outputs.vectors[y]);
            xs.push_back(space.embeddings[x]);
        }
        TrainConfig cfg;
        cfg.max_epochs = 150;
        cfg.learning_rate = 0.01;
        cfg.seed = 3;
        auto model = train_reconstructor(ys, xs, cfg);
        CHECK(model.training_log.back().val_mse <= model.training_log.front().val_mse);
    }
    SUBCASE("too few pairs rejected") {
        std::vector<std::vector<double>> xs(5, {0.0});
        CHECK_THROWS_AS(train_reconstructor(xs, xs, TrainConfig{}), std::invalid_argument);
    }
    SUBCASE("determinism: identical seed gives identical training log") {
        std::mt19937_64 rng(79);
        auto xs = random_inputs(rng, 40, 2);
        auto ys = random_inputs(rng, 40, 2);
        TrainConfig cfg;
        cfg.model_kind = ModelKind::mlp;
        cfg.hidden_dims = {8};
        cfg.max_epochs = 30;
        cfg.seed = 99;
        auto a = train_reconstructor(xs, ys, cfg);
        auto b = train_reconstructor(xs, ys, cfg);
        REQUIRE(a.training_log.size() == b.training_log.size());
        for (std::size_t e = 0; e < a.training_log.size(); ++e) {
            CHECK(a.training_log[e].train_mse == b.training_log[e].train_mse);
            CHECK(a.training_log[e].val_mse == b.training_log[e].val_mse);
        }
    }
}

TEST_CASE("reconstruct") {
    SUBCASE("identity-trained model approximates identity") {
        std::mt19937_64 rng(83);
        auto xs = random_inputs(rng, 80, 2);
        TrainConfig cfg;
        cfg.max_epochs = 400;
        cfg.learning_rate = 0.05;
        cfg.seed = 4;
        auto model = train_reconstructor(xs, xs, cfg);
        for (int s = 0; s < 5; ++s) {
            auto out = reconstruct(model, xs[s]);
            for (std::size_t k = 0; k < out.size(); ++k)
                CHECK(out[k] == doctest::Approx(xs[s][k]).epsilon(1e-3));
        }
    }
    SUBCASE("zero-weight model returns the bias") {
        auto model = make_model(ModelKind::linear, 2, 2, {}, 0);
        for (auto& row : model.weights[0])
            for (double& v : row) v = 0.0;
        model.biases[0] = {1.5, -2.5};
        auto out = reconstruct(model, {7.0, 8.0});
        CHECK(out[0] == doctest::Approx(1.5));
        CHECK(out[1] == doctest::Approx(-2.5));
    }
    SUBCASE("finite outputs across a test set") {
        std::mt19937_64 rng(89);
        auto xs = random_inputs(rng, 50, 3);
        auto ys = random_inputs(rng, 50, 3);
        TrainConfig cfg;
        cfg.model_kind = ModelKind::mlp;
        cfg.hidden_dims = {8, 8};
        cfg.max_epochs = 50;
        cfg.seed = 5;
        auto model = train_reconstructor(xs, ys, cfg);
        for (const auto& x : xs)
            for (double v : reconstruct(model, x)) CHECK(std::isfinite(v));
    }
    SUBCASE("dimension mismatch throws") {
        auto model = make_model(ModelKind::linear, 3, 3, {}, 0);
        CHECK_THROWS_AS(reconstruct(model, {1.0, 2.0}), std::invalid_argument);
    }
}

TEST_CASE("MLP analytic gradients match central finite differences") {
    std::mt19937_64 rng(97);
    for (int rep = 0; rep < 5; ++rep) {
        int width = 4 + rep * 3;  // <= 16
        int layers = 1 + rep % 2;
        std::vector<int> hidden(layers, width);
        auto model = make_model(ModelKind::mlp, 3, 2, hidden, 1000 + rep);
        auto xs = random_inputs(rng, 12, 3);
        auto ys = random_inputs(rng, 12, 2);

        auto analytic = mse_gradient(model, xs, ys);
        auto params = flatten_parameters(model);
        const double h = 1e-5;
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto up = params, dn = params;
            up[p] += h;
            dn[p] -= h;
            Reconstructor mu = model, md = model;
            assign_parameters(mu, up);
            assign_parameters(md, dn);
            double numeric = (mse_loss(mu, xs, ys) - mse_loss(md, xs, ys)) / (2.0 * h);
            double denom = std::max({std::abs(numeric), std::abs(analytic[p]), 1e-8});
            CHECK(std::abs(numeric - analytic[p]) / denom <= 1e-4);
        }
    }
}

TEST_CASE("posterior_from_reconstruction") {
    std::mt19937_64 rng(101);

    SUBCASE("equidistant reconstruction gives uniform posterior") {
        LabeledVectors v;
        v.labels = {"a", "b", "c", "d"};
        v.vectors = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
        auto space = build_space(v, {}, {}, 1.0);
        SoftmaxConfig cfg{1.0, 1.0, 0.0};
        auto post = posterior_from_reconstruction({0.0, 0.0}, space, cfg);
        for (double p : post.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }
    SUBCASE("two candidates, unit gap") {
        LabeledVectors v;
        v.labels = {"a", "b"};
        v.vectors = {{0.0}, {1.0}};
        auto space = build_space(v, {}, {}, 1.0);
        SoftmaxConfig cfg{1.0, 1.0, 0.0};
        auto post = posterior_from_reconstruction({0.0}, space, cfg);
        double denom = 1.0 + std::exp(-1.0);
        CHECK(post.probs[0] == doctest::Approx(1.0 / denom).epsilon(1e-9));
        CHECK(post.probs[1] == doctest::Approx(std::exp(-1.0) / denom).epsilon(1e-9));
    }
    SUBCASE("infinite temperature flattens the posterior") {
        auto space = random_space(rng, 6, 2);
        SoftmaxConfig cfg{1e9, 1.0, 0.0};
        auto post = posterior_from_reconstruction(space.embeddings[0], space, cfg);
        for (double p : post.probs) CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    }
    SUBCASE("normalization and floor hold on random inputs") {
        for (int rep = 0; rep < 50; ++rep) {
            auto space = random_space(rng, 3 + rep % 6, 2);
            SoftmaxConfig cfg{0.5, 1.0, 1e-3};
            std::uniform_real_distribution<double> coord(-2.0, 2.0);
            std::vector<double> x_hat{coord(rng), coord(rng)};
            auto post = posterior_from_reconstruction(x_hat, space, cfg);
            double sum = 0.0;
            for (double p : post.probs) {
                CHECK(p >= cfg.gamma_floor - 1e-15);
                sum += p;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("posterior_masked equals the prior") {
    std::mt19937_64 rng(103);
    auto space = random_space(rng, 5, 2);
    auto post = posterior_masked(space);
    for (std::size_t i = 0; i < space.size(); ++i)
        CHECK(post.probs[i] == space.prior[i]);

    // masked posterior has zero mPL for every pair
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            if (i == j) continue;
            double d = distance(space, i, j);
            if (d <= 0.0) continue;
            CHECK(mpl_value(space.prior, post.probs, i, j, d) == doctest::Approx(0.0));
        }
}
