#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dpc/component.hpp"
#include "dpc/config.hpp"
#include "dpc/robust.hpp"
#include "dpc/simulation.hpp"

namespace dpc {

struct RobustInfo {
  RhoFamily family = RhoFamily::TukeyBiweight;
  double c = 5.13;
  double b = 0.1;
  std::vector<Eigen::VectorXd> scales;  // per component
};

struct Provenance {
  std::string input_digest;  // fnv1a-64 of the training CSV bytes
  std::string timestamp;     // ISO-8601 UTC
  std::uint64_t seed = 0;
};

/// On-disk model: everything needed to reconstruct, echoing the fit options.
struct ModelFile {
  int format_version = 1;
  SolverConfig config;
  std::vector<DpcComponent> components;
  std::optional<RobustInfo> robust;
  Provenance provenance;
};

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex characters.
std::string fnv1a_digest_file(const std::filesystem::path& path);

/// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible output.
std::string make_timestamp();

/// Study results as versioned CSV / JSON files.
void write_results_csv(const std::filesystem::path& path,
                       const StudyResults& results);
void write_results_json(const std::filesystem::path& path,
                        const StudyResults& results);

/// Study configuration from JSON (see README for the schema).
McConfig read_study_config(const std::filesystem::path& path);

}  // namespace dpc
