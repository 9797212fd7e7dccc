#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "mcl/geometry.hpp"

namespace mcl::harness {

using nlohmann::json;

struct ExperimentConfig {
  std::string kind;  // duality | flow | bvp | forms | reduction
  json params = json::object();
  json tolerances = json::object();
  geometry::QuadratureSpec quadrature;
  std::uint64_t seed = 0;
};

// Parses a config file; IoError on unreadable input, std::invalid_argument
// on malformed content (unknown kind, bad types).
ExperimentConfig load_config(const std::string& path);

struct ReportRow {
  std::string name;
  json computed;
  json reference;
  std::string provenance;  // closed-form | pinned-constant | oracle | property
  double tolerance = 0.0;
  bool pass = false;
  double runtime_ms = 0.0;
};

struct VerificationReport {
  std::string experiment_id;
  std::vector<ReportRow> rows;
  std::string status = "PASS";  // PASS | FAIL | INVALID-HYPOTHESIS
  std::string timestamp;
  json extra = json::object();  // experiment-specific summary block

  bool overall_pass() const { return status == "PASS"; }
};

// Canonical serialization: keys sorted (the json object type is ordered by
// key), timestamp excluded. Byte-identical across reruns with equal seeds.
std::string canonical_json(const VerificationReport& report);
// Full serialization including the timestamp.
std::string full_json(const VerificationReport& report);
// CSV table of the rows.
std::string rows_csv(const VerificationReport& report);

// Dispatch on config.kind.
VerificationReport run_experiment(const ExperimentConfig& config);

VerificationReport run_duality_experiment(const ExperimentConfig& config);
VerificationReport run_flow_experiment(const ExperimentConfig& config);
VerificationReport run_bvp_experiment(const ExperimentConfig& config);
VerificationReport run_forms_experiment(const ExperimentConfig& config);
VerificationReport run_reduction_experiment(const ExperimentConfig& config);

// Writes report.json (plus rows.csv / plot data when asked) into out_dir.
// Plot data currently covers the decay curves of bvp runs (columns tau,
// log_abs_x1star, log_abs_y0star). IoError on write failure.
void write_outputs(const VerificationReport& report, const std::string& out_dir,
                   bool want_json, bool want_csv, bool want_plots);

struct RegistryEntry {
  std::string id;
  std::string kind;
  std::string description;
};
std::vector<RegistryEntry> list_experiments();

// ============================================================================
// Acceptance suite
// ============================================================================

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string detail;
  double runtime_ms = 0.0;
};

// Runs every acceptance criterion with its pinned tolerance; one result per
// criterion, in order.
std::vector<CriterionResult> run_acceptance();

}  // namespace mcl::harness
