#include "ampl/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ampl::io {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

LabeledVectors read_embeddings(const std::string& path) {
    auto in = open_in(path);
    LabeledVectors result;
    std::string line;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string label;
        ss >> label;
        std::vector<double> vec;
        double v;
        while (ss >> v) vec.push_back(v);
        if (vec.empty())
            throw std::runtime_error("embedding line without values: " + label);
        if (dim == 0)
            dim = vec.size();
        else if (vec.size() != dim)
            throw std::runtime_error("embedding dimension mismatch at label: " + label);
        result.labels.push_back(label);
        result.vectors.push_back(std::move(vec));
    }
    if (result.labels.empty()) throw std::runtime_error("empty embedding file: " + path);
    return result;
}

std::map<std::string, int> read_tiers(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, int> tiers;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("tier line without tab separator: " + line);
        tiers[line.substr(0, tab)] = std::stoi(line.substr(tab + 1));
    }
    return tiers;
}

std::map<std::string, double> read_counts(const std::string& path) {
    auto in = open_in(path);
    std::map<std::string, double> counts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("count line without tab separator: " + line);
        counts[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
    }
    return counts;
}

void write_channel_csv(const std::string& path, const Channel& channel,
                       const SecretSpace& space) {
    auto out = open_out(path);
    out << "input";
    for (const auto& label : channel.outputs.labels) out << ',' << label;
    out << '\n';
    out << std::setprecision(14);
    for (std::size_t r = 0; r < channel.inputs.size(); ++r) {
        out << space.candidates[channel.inputs[r]];
        for (double p : channel.matrix[r]) out << ',' << p;
        out << '\n';
    }
}

Channel read_channel_csv(const std::string& path, const SecretSpace& space) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty channel file: " + path);
    auto header = split_csv(line);
    if (header.size() < 2) throw std::runtime_error("channel header too short");

    Channel channel;
    for (std::size_t k = 1; k < header.size(); ++k) {
        channel.outputs.labels.push_back(header[k]);
        int idx = space.index_of(header[k]);
        channel.outputs.vectors.push_back(idx >= 0 ? space.embeddings[idx]
                                                   : std::vector<double>(space.dim(), 0.0));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw std::runtime_error("channel row width mismatch: " + line);
        int idx = space.index_of(fields[0]);
        if (idx < 0) throw std::runtime_error("unknown channel input label: " + fields[0]);
        channel.inputs.push_back(idx);
        std::vector<double> row;
        for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(std::stod(fields[k]));
        channel.matrix.push_back(std::move(row));
    }
    return channel;
}

void write_histogram_csv(const std::string& path, const std::vector<LeakageSample>& samples,
                         double eps, int bins) {
    double max_mpl = 0.0;
    for (const auto& s : samples) max_mpl = std::max(max_mpl, s.mpl);
    double width = max_mpl > 0.0 ? max_mpl / bins : 1.0;
    std::vector<std::size_t> count(bins, 0), violated(bins, 0);
    for (const auto& s : samples) {
        int b = std::min(bins - 1, static_cast<int>(s.mpl / width));
        ++count[b];
        if (s.mpl > eps) ++violated[b];
    }
    auto out = open_out(path);
    out << "bin_left,bin_right,count,violated_count\n";
    out << std::setprecision(10);
    for (int b = 0; b < bins; ++b)
        out << b * width << ',' << (b + 1) * width << ',' << count[b] << ',' << violated[b]
            << '\n';
}

std::string audit_report_json(const AuditReport& report) {
    nlohmann::ordered_json j;
    j["sample_count"] = report.sample_count;
    j["eps"] = report.eps;
    j["p_hat"] = report.p_hat;
    j["delta_target"] = report.delta_target;
    j["xi"] = report.xi;
    j["confidence_bound"] = report.confidence_bound;
    j["log10_exponent"] = report.log10_exponent;
    j["seed"] = report.seed;
    j["excluded_zero_distance_pairs"] = report.excluded_zero_distance_pairs;
    return j.dump(2);
}

void write_audit_report(const std::string& path, const AuditReport& report) {
    auto out = open_out(path);
    out << audit_report_json(report) << '\n';
}

void write_remap_csv(const std::string& path, const RemapTable& table,
                     const LabeledVectors& outputs) {
    auto out = open_out(path);
    out << "y_label,z_label\n";
    for (std::size_t y = 0; y < table.mapping.size(); ++y)
        out << outputs.labels[y] << ',' << outputs.labels[table.mapping[y]] << '\n';
}

RemapTable read_remap_csv(const std::string& path, const LabeledVectors& outputs) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    RemapTable table;
    table.mapping.assign(outputs.labels.size(), -1);
    table.preimages.assign(outputs.labels.size(), {});
    auto index_of = [&outputs](const std::string& label) {
        for (std::size_t k = 0; k < outputs.labels.size(); ++k)
            if (outputs.labels[k] == label) return static_cast<int>(k);
        return -1;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 2) throw std::runtime_error("bad remap row: " + line);
        int y = index_of(fields[0]);
        int z = index_of(fields[1]);
        if (y < 0 || z < 0) throw std::runtime_error("unknown remap label: " + line);
        table.mapping[y] = z;
    }
    for (std::size_t y = 0; y < table.mapping.size(); ++y) {
        if (table.mapping[y] < 0)
            throw std::runtime_error("remap table does not cover every output");
        table.preimages[table.mapping[y]].push_back(static_cast<int>(y));
    }
    return table;
}

void write_checkpoint(const std::string& path, const Reconstructor& model,
                      std::uint64_t seed) {
    auto out = open_out(path);
    out << "ampl-checkpoint 1\n";
    out << "model_kind " << (model.kind == ModelKind::linear ? "linear" : "mlp") << '\n';
    out << "input_dim " << model.input_dim << '\n';
    out << "output_dim " << model.output_dim << '\n';
    out << "seed " << seed << '\n';
    out << "layers " << model.weights.size() << '\n';
    out << std::setprecision(17);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        out << "layer " << model.weights[l].size() << ' ' << model.weights[l][0].size() << '\n';
        for (const auto& row : model.weights[l]) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << row[c];
            out << '\n';
        }
        for (std::size_t c = 0; c < model.biases[l].size(); ++c)
            out << (c ? " " : "") << model.biases[l][c];
        out << '\n';
    }
}

Reconstructor read_checkpoint(const std::string& path) {
    auto in = open_in(path);
    std::string word;
    int version;
    in >> word >> version;
    if (word != "ampl-checkpoint") throw std::runtime_error("not a checkpoint file: " + path);
    Reconstructor model;
    std::string kind;
    std::uint64_t seed;
    std::size_t layers;
    in >> word >> kind >> word >> model.input_dim >> word >> model.output_dim >> word >> seed >>
        word >> layers;
    model.kind = (kind == "linear") ? ModelKind::linear : ModelKind::mlp;
    for (std::size_t l = 0; l < layers; ++l) {
        std::size_t rows, cols;
        in >> word >> rows >> cols;
        std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
        for (auto& row : w)
            for (double& v : row) in >> v;
        std::vector<double> b(rows);
        for (double& v : b) in >> v;
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return model;
}

}  // namespace ampl::io
