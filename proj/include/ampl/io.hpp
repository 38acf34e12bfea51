#pragma once

#include <map>
#include <string>
#include <vector>

#include "ampl/adversary.hpp"
#include "ampl/audit.hpp"
#include "ampl/mechanism.hpp"
#include "ampl/remap.hpp"
#include "ampl/space.hpp"

namespace ampl::io {

// GloVe-style embedding file: `label v1 v2 ... vD`, whitespace-separated.
LabeledVectors read_embeddings(const std::string& path);

// `label<TAB>tier_index`
std::map<std::string, int> read_tiers(const std::string& path);

// `label<TAB>count`
std::map<std::string, double> read_counts(const std::string& path);

// Channel CSV: header row of output labels, one row per input label,
// probabilities with >= 12 significant digits.
void write_channel_csv(const std::string& path, const Channel& channel,
                       const SecretSpace& space);
Channel read_channel_csv(const std::string& path, const SecretSpace& space);

// Histogram CSV: `bin_left,bin_right,count,violated_count`
void write_histogram_csv(const std::string& path, const std::vector<LeakageSample>& samples,
                         double eps, int bins);

std::string audit_report_json(const AuditReport& report);
void write_audit_report(const std::string& path, const AuditReport& report);

// RemapTable CSV: `y_label,z_label`
void write_remap_csv(const std::string& path, const RemapTable& table,
                     const LabeledVectors& outputs);
RemapTable read_remap_csv(const std::string& path, const LabeledVectors& outputs);

// Decimal-text model checkpoint with a small header (model_kind, dims, seed).
void write_checkpoint(const std::string& path, const Reconstructor& model,
                      std::uint64_t seed);
Reconstructor read_checkpoint(const std::string& path);

}  // namespace ampl::io
