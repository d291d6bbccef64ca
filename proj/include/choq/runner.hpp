#pragma once

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace choq {

// Parsed command-line request. Validation happens inside dispatch, before
// any numerical work.
struct RunConfig {
  std::string command;  // verify | atlas | kernel | grid | solve | ledger | bubble | plot
  int n = 3;
  std::string mu = "2";          // exact rational text
  std::vector<int> parts;        // biaxial partition, e.g. {2, 2}
  std::string symmetry_class = "G";  // "G" or "Gamma"
  int grid_size = 64;
  int count = 1;
  double tol = 1e-8;
  int max_iter = 600;
  int max_degree = 12;
  std::string out_path;    // JSON envelope destination; empty -> stdout only
  std::string csv_path;    // direct CSV dump for kernel/grid commands
  std::string cache_dir;
  bool deterministic = true;
  // bubble profile
  double lambda = 1.0;
  double r_max = 10.0;
  int samples = 101;
  // plot
  std::string in_path;
  std::string kind;  // profile | energy-ladder | kernel-heatmap
};

struct ResultEnvelope {
  int schema_version = 1;
  std::string command;
  nlohmann::json config;
  nlohmann::json timings;
  nlohmann::json payload;
  std::vector<std::string> warnings;
};

nlohmann::json envelope_to_json(const ResultEnvelope& env);

// Runs the named command. Throws validation_error / numeric_error / io_error;
// the CLI maps those to exit codes 2 / 3 / 4.
ResultEnvelope dispatch(const RunConfig& config);

// Re-emits a stored envelope as a flat CSV series.
void emit_plot_data(const nlohmann::json& envelope, const std::string& kind,
                    std::ostream& out);

}  // namespace choq
