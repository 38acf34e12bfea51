// Batch front-end: builds tiered perturbation channels, runs leakage audits,
// adapts per-tier strengths and emits reports/histograms as JSON/CSV.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ampl/adapt.hpp"
#include "ampl/adversary.hpp"
#include "ampl/audit.hpp"
#include "ampl/inference.hpp"
#include "ampl/io.hpp"
#include "ampl/leakage.hpp"
#include "ampl/mechanism.hpp"
#include "ampl/remap.hpp"
#include "ampl/space.hpp"
#include "ampl/toy.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitMismatch = 4;

struct RunConfig {
    std::string embeddings_path;
    std::string tiers_path;
    std::string counts_path;
    double eps = 1.0;
    double delta = 0.05;
    std::size_t samples = 2000;
    std::uint64_t seed = 0;
    std::vector<double> alpha;
    std::string out_dir = ".";
    std::string posterior = "exact";  // exact | learned | masked
    // attacker
    std::string attacker_model = "linear";
    std::vector<int> attacker_hidden = {32};
    int attacker_epochs = 200;
    double attacker_gamma = 1e-6;
    std::size_t attacker_pairs = 2000;
    // adapt
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double eta0 = 0.5;
    double decay = 0.7;
    int max_iters = 20;
    double tol = 1e-4;
    int retrain_every = 5;
};

std::vector<double> parse_alpha(const std::string& text) {
    std::vector<double> alpha;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) alpha.push_back(std::stod(field));
    return alpha;
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line without '=': " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "embeddings") cfg.embeddings_path = value;
        else if (key == "tiers") cfg.tiers_path = value;
        else if (key == "counts") cfg.counts_path = value;
        else if (key == "eps") cfg.eps = std::stod(value);
        else if (key == "delta") cfg.delta = std::stod(value);
        else if (key == "samples") cfg.samples = std::stoull(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "alpha") cfg.alpha = parse_alpha(value);
        else if (key == "out") cfg.out_dir = value;
        else if (key == "posterior") cfg.posterior = value;
        else if (key == "attacker.model") cfg.attacker_model = value;
        else if (key == "attacker.epochs") cfg.attacker_epochs = std::stoi(value);
        else if (key == "attacker.gamma") cfg.attacker_gamma = std::stod(value);
        else if (key == "attacker.pairs") cfg.attacker_pairs = std::stoull(value);
        else if (key == "adapt.lambda1") cfg.lambda1 = std::stod(value);
        else if (key == "adapt.lambda2") cfg.lambda2 = std::stod(value);
        else if (key == "adapt.eta0") cfg.eta0 = std::stod(value);
        else if (key == "adapt.decay") cfg.decay = std::stod(value);
        else if (key == "adapt.max_iters") cfg.max_iters = std::stoi(value);
        else if (key == "adapt.tol") cfg.tol = std::stod(value);
        else if (key == "adapt.retrain_every") cfg.retrain_every = std::stoi(value);
        else throw std::invalid_argument("unknown config key: " + key);
    }
}

ampl::SecretSpace load_space(const RunConfig& cfg) {
    if (cfg.embeddings_path.empty())
        throw std::invalid_argument("missing embeddings path (config key 'embeddings')");
    auto vecs = ampl::io::read_embeddings(cfg.embeddings_path);
    std::map<std::string, int> tiers;
    if (!cfg.tiers_path.empty()) tiers = ampl::io::read_tiers(cfg.tiers_path);
    std::map<std::string, double> counts;
    if (!cfg.counts_path.empty()) counts = ampl::io::read_counts(cfg.counts_path);
    return ampl::build_space(vecs, tiers, counts);
}

std::vector<double> effective_alpha(const RunConfig& cfg, const ampl::SecretSpace& space) {
    if (!cfg.alpha.empty()) return cfg.alpha;
    return std::vector<double>(space.tier_count(), 1.0);
}

ampl::TrainConfig attacker_train_config(const RunConfig& cfg) {
    ampl::TrainConfig tc;
    tc.model_kind =
        cfg.attacker_model == "mlp" ? ampl::ModelKind::mlp : ampl::ModelKind::linear;
    tc.hidden_dims = cfg.attacker_hidden;
    tc.max_epochs = cfg.attacker_epochs;
    tc.seed = cfg.seed;
    return tc;
}

ampl::TierPosteriorBuilder posterior_builder_for(const RunConfig& cfg,
                                                 const ampl::SecretSpace& space) {
    if (cfg.posterior == "masked") {
        return [&space](int, const ampl::Channel& channel, const std::vector<double>& tier_prior,
                        std::uint64_t) -> ampl::PosteriorFn {
            return [tier_prior](const std::vector<int>&) {
                ampl::PosteriorVector post;
                post.probs = tier_prior;
                return post;
            };
        };
    }
    if (cfg.posterior == "learned") {
        ampl::SoftmaxConfig sc;
        sc.tau_base = ampl::default_temperature(space);
        sc.tau = 1.0;
        sc.gamma_floor = cfg.attacker_gamma;
        return ampl::learned_attacker_builder(space, attacker_train_config(cfg), sc,
                                              cfg.attacker_pairs);
    }
    if (cfg.posterior != "exact")
        throw std::invalid_argument("posterior must be exact, learned or masked");
    return ampl::exact_bayes_builder();
}

int cmd_toy(double eps) {
    auto space = ampl::toy::make_space();
    auto channel = ampl::toy::make_channel(space);
    auto joint = ampl::toy::make_joint();

    auto single_post = ampl::posterior_single(channel, space.prior, 0);
    double single = ampl::mpl_value(space.prior, single_post.probs, 0, 1, 1.0);

    auto joint_post = ampl::posterior_joint_exact(joint, {channel, channel}, {0, 1}, 0);
    double joint_mpl =
        ampl::mpl_value(joint.marginals[0], joint_post.probs, 0, 1, 1.0);

    std::cout << std::fixed << std::setprecision(4);
    std::cout << "single-observation mPL = " << single << "  ["
              << (single > eps ? "VIOLATION" : "ok") << " at eps=" << eps << "]\n";
    std::cout << "joint-observation  mPL = " << joint_mpl << "  ["
              << (joint_mpl > eps ? "VIOLATION" : "ok") << " at eps=" << eps << "]\n";

    if (std::abs(single - 0.9444) > 1e-3 || std::abs(joint_mpl - 1.8456) > 1e-3) {
        std::cerr << "golden value mismatch\n";
        return kExitMismatch;
    }
    return kExitOk;
}

int cmd_audit(const RunConfig& cfg) {
    auto space = load_space(cfg);
    auto alpha = effective_alpha(cfg, space);
    auto mech = ampl::compose_levels(space, cfg.eps, alpha);
    auto builder = posterior_builder_for(cfg, space);

    std::vector<ampl::LeakageSample> all_samples;
    double p_hat = 0.0;
    std::size_t excluded = 0;
    for (const auto& [tier, channel] : mech.tier_channels) {
        double mass = 0.0;
        for (int idx : channel.inputs) mass += space.prior[idx];
        std::vector<double> tier_prior(channel.inputs.size());
        for (std::size_t r = 0; r < channel.inputs.size(); ++r)
            tier_prior[r] = space.prior[channel.inputs[r]] / mass;

        ampl::SecretSpace sub;
        for (std::size_t r = 0; r < channel.inputs.size(); ++r) {
            sub.candidates.push_back(space.candidates[channel.inputs[r]]);
            sub.embeddings.push_back(space.embeddings[channel.inputs[r]]);
            sub.tier_of.push_back(1);
            sub.prior.push_back(tier_prior[r]);
        }
        if (sub.size() < 2) continue;

        auto posterior_fn = builder(tier, channel, tier_prior, cfg.seed ^ tier);
        auto sampler = ampl::channel_sampler(channel, tier_prior);
        auto triples = ampl::sample_triples(sub, tier_prior, posterior_fn, sampler, cfg.samples,
                                            cfg.seed ^ (0x517cc1b727220a95ULL * tier), cfg.eps);
        p_hat += mass * ampl::empirical_rate(triples.samples, cfg.eps);
        excluded += triples.excluded_zero_distance_pairs;
        all_samples.insert(all_samples.end(), triples.samples.begin(), triples.samples.end());
    }

    ampl::AuditReport report;
    report.sample_count = all_samples.size();
    report.eps = cfg.eps;
    report.p_hat = p_hat;
    report.delta_target = cfg.delta;
    report.seed = cfg.seed;
    report.excluded_zero_distance_pairs = excluded;
    report.xi = cfg.delta > 0.0 ? p_hat / cfg.delta : 0.0;
    auto cert = ampl::hoeffding_certificate(std::max<std::size_t>(1, all_samples.size()),
                                            report.xi, cfg.delta);
    report.confidence_bound = cert.bound;
    report.log10_exponent = cert.log10_exponent;

    ampl::io::write_audit_report(cfg.out_dir + "/audit_report.json", report);
    ampl::io::write_histogram_csv(cfg.out_dir + "/mpl_histogram.csv", all_samples, cfg.eps, 20);

    std::cout << std::setprecision(6);
    std::cout << "p_hat            " << report.p_hat << '\n';
    std::cout << "delta_recommend  " << ampl::recommend_delta(report.p_hat) << '\n';
    std::cout << "hoeffding_k      " << report.log10_exponent
              << (cert.vacuous ? "  (vacuous: xi >= 1)" : "") << '\n';
    return kExitOk;
}

int cmd_perturb(const RunConfig& cfg, bool apply_remap, bool masked) {
    auto space = load_space(cfg);
    auto alpha = effective_alpha(cfg, space);
    auto mech = ampl::compose_levels(space, cfg.eps, alpha);

    std::optional<ampl::RemapTable> table;
    std::vector<std::string> out_labels;
    if (apply_remap) {
        auto outputs = ampl::outputs_from_space(
            space, [&] {
                std::vector<int> all(space.size());
                for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
                return all;
            }());
        auto cost = ampl::cost_matrix(space, outputs);
        table = ampl::bayes_remap(mech, space, cost, outputs);
        out_labels = outputs.labels;
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string token;
    bool first = true;
    while (std::cin >> token) {
        int idx = space.index_of(token);
        std::string emitted = token;
        if (idx >= 0) {
            if (masked) {
                emitted = "xxxx";
            } else {
                const auto& channel = mech.tier_channels.at(space.tier_of[idx]);
                int row = channel.row_of(idx);
                double u = unit(rng);
                if (u >= 1.0) u = std::nextafter(1.0, 0.0);
                int y = ampl::sample(channel, row, u);
                emitted = channel.outputs.labels[y];
                if (table) {
                    for (std::size_t g = 0; g < out_labels.size(); ++g)
                        if (out_labels[g] == emitted) {
                            emitted = out_labels[table->mapping[g]];
                            break;
                        }
                }
            }
        }
        std::cout << (first ? "" : " ") << emitted;
        first = false;
    }
    if (!first) std::cout << '\n';
    return kExitOk;
}

int cmd_train_attacker(const RunConfig& cfg) {
    auto space = load_space(cfg);
    auto alpha = effective_alpha(cfg, space);
    auto mech = ampl::compose_levels(space, cfg.eps, alpha);

    // One model per run over the pooled tier pairs.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> ys, xs;
    std::vector<std::pair<int, const ampl::Channel*>> rows;
    for (const auto& [tier, channel] : mech.tier_channels)
        for (std::size_t r = 0; r < channel.inputs.size(); ++r)
            rows.push_back({static_cast<int>(r), &channel});
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    for (std::size_t s = 0; s < cfg.attacker_pairs; ++s) {
        auto [row, channel] = rows[pick(rng)];
        double u = unit(rng);
        if (u >= 1.0) u = std::nextafter(1.0, 0.0);
        int y = ampl::sample(*channel, row, u);
        ys.push_back(channel->outputs.vectors[y]);
        xs.push_back(space.embeddings[channel->inputs[row]]);
    }
    auto model = ampl::train_reconstructor(ys, xs, attacker_train_config(cfg));
    ampl::io::write_checkpoint(cfg.out_dir + "/attacker.ckpt", model, cfg.seed);
    std::cout << "final val MSE " << std::setprecision(6)
              << model.training_log.back().val_mse << '\n';
    return kExitOk;
}

ampl::LabeledVectors full_outputs(const ampl::SecretSpace& space) {
    std::vector<int> all(space.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return ampl::outputs_from_space(space, all);
}

int cmd_adapt(const RunConfig& cfg) {
    auto space = load_space(cfg);
    auto outputs = full_outputs(space);
    auto cost = ampl::cost_matrix(space, outputs);

    ampl::AdaptConfig ac;
    ac.lambda1 = cfg.lambda1;
    ac.lambda2 = cfg.lambda2;
    ac.eps = cfg.eps;
    ac.delta_target = cfg.delta;
    ac.audit_S = cfg.samples;
    ac.eta0 = cfg.eta0;
    ac.decay = cfg.decay;
    ac.max_iters = cfg.max_iters;
    ac.tol = cfg.tol;
    ac.seed = cfg.seed;
    ac.retrain_every = cfg.retrain_every;

    auto alpha = effective_alpha(cfg, space);
    auto state = ampl::ampl_run(ac, space, cost, outputs, posterior_builder_for(cfg, space),
                                cfg.eps, alpha);

    std::ofstream out(cfg.out_dir + "/adapt_trajectory.csv");
    if (!out) throw std::runtime_error("cannot write trajectory CSV");
    out << "iter";
    for (std::size_t k = 0; k < alpha.size(); ++k) out << ",alpha_" << (k + 1);
    out << ",privacy,utility,composite\n";
    out << std::setprecision(10);
    for (std::size_t t = 0; t < state.history.size(); ++t) {
        out << t;
        for (double a : state.history[t].alpha) out << ',' << a;
        out << ',' << state.history[t].privacy_loss << ',' << state.history[t].utility_loss
            << ',' << state.history[t].composite << '\n';
    }
    std::cout << "best composite " << std::setprecision(6) << state.best_composite
              << " at alpha";
    for (double a : state.alpha) std::cout << ' ' << a;
    std::cout << '\n';
    if (state.tier_order_inverted)
        std::cerr << "warning: tier strengths inverted (alpha_1 >= alpha_2)\n";
    return kExitOk;
}

int cmd_grid(const RunConfig& cfg) {
    auto space = load_space(cfg);
    auto outputs = full_outputs(space);
    auto cost = ampl::cost_matrix(space, outputs);
    const int tiers = space.tier_count();

    ampl::AdaptConfig ac;
    ac.eps = cfg.eps;
    ac.audit_S = cfg.samples;
    auto builder = posterior_builder_for(cfg, space);

    std::ofstream out(cfg.out_dir + "/tradeoff_grid.csv");
    if (!out) throw std::runtime_error("cannot write grid CSV");
    for (int k = 0; k < tiers; ++k) out << (k ? "," : "") << "alpha_" << (k + 1);
    out << ",violation,utility\n";
    out << std::setprecision(10);

    // alpha_k in {0.1, ..., 1.0}, step 0.1, full lattice, shared audit seed
    std::vector<int> idx(tiers, 1);
    for (;;) {
        std::vector<double> alpha(tiers);
        for (int k = 0; k < tiers; ++k) alpha[k] = idx[k] / 10.0;
        auto loss = ampl::composite_loss(alpha, ac, space, cost, outputs, builder, cfg.eps,
                                         cfg.seed);
        for (int k = 0; k < tiers; ++k) out << (k ? "," : "") << alpha[k];
        out << ',' << loss.privacy_loss << ',' << loss.utility_loss << '\n';

        int k = tiers - 1;
        while (k >= 0 && ++idx[k] > 10) idx[k--] = 1;
        if (k < 0) break;
    }
    return kExitOk;
}

int cmd_remap_build(const RunConfig& cfg) {
    auto space = load_space(cfg);
    auto outputs = full_outputs(space);
    auto cost = ampl::cost_matrix(space, outputs);
    auto mech = ampl::compose_levels(space, cfg.eps, effective_alpha(cfg, space));
    auto table = ampl::bayes_remap(mech, space, cost, outputs);
    ampl::io::write_remap_csv(cfg.out_dir + "/remap_table.csv", table, outputs);
    std::cout << "remap table written (" << table.mapping.size() << " outputs, "
              << table.unreachable.size() << " unreachable)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metric-privacy leakage auditing and calibration toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path, alpha_text;
    app.add_option("--config", config_path, "flat key=value config file");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--eps", cfg.eps, "privacy budget epsilon");
    app.add_option("--delta", cfg.delta, "PBmPL target delta");
    app.add_option("--samples", cfg.samples, "audit sample count");
    app.add_option("--alpha", alpha_text, "per-tier strengths, comma-separated");
    app.add_option("--out", cfg.out_dir, "output directory");
    bool masked = false, apply_remap = false;
    app.add_flag("--masked", masked, "mask rule: replace sensitive tokens / prior posterior");
    app.add_flag("--remap", apply_remap, "apply Bayesian remapping post-processing");

    auto* toy = app.add_subcommand("toy", "correlated-pair worked example with golden values");
    auto* audit = app.add_subcommand("audit", "PBmPL audit: report + histogram");
    auto* perturb = app.add_subcommand("perturb", "perturb a token stream from stdin");
    auto* train = app.add_subcommand("train-attacker", "train a reconstruction attacker");
    auto* adapt = app.add_subcommand("adapt", "feedback loop over per-tier strengths");
    auto* grid = app.add_subcommand("grid", "privacy-utility trade-off over an alpha lattice");
    auto* remap_build = app.add_subcommand("remap-build", "build and export a remap table");
    // global flags may appear after the subcommand name
    for (auto* sub : {toy, audit, perturb, train, adapt, grid, remap_build}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            // file values fill in anything not given on the command line
            RunConfig flags = cfg;
            cfg = RunConfig{};
            load_config_file(config_path, cfg);
            if (app.count("--seed")) cfg.seed = flags.seed;
            if (app.count("--eps")) cfg.eps = flags.eps;
            if (app.count("--delta")) cfg.delta = flags.delta;
            if (app.count("--samples")) cfg.samples = flags.samples;
            if (app.count("--out")) cfg.out_dir = flags.out_dir;
        }
        if (!alpha_text.empty()) cfg.alpha = parse_alpha(alpha_text);
        if (masked) cfg.posterior = "masked";

        if (toy->parsed()) return cmd_toy(cfg.eps);
        if (audit->parsed()) return cmd_audit(cfg);
        if (perturb->parsed()) return cmd_perturb(cfg, apply_remap, masked);
        if (train->parsed()) return cmd_train_attacker(cfg);
        if (adapt->parsed()) return cmd_adapt(cfg);
        if (grid->parsed()) return cmd_grid(cfg);
        if (remap_build->parsed()) return cmd_remap_build(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}
