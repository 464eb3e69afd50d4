#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rotlab/closing.hpp"
#include "rotlab/config.hpp"
#include "rotlab/serialize.hpp"

namespace rotlab::experiments {

using serialize::Json;

enum class Format { Json, Csv, Both };
Format parse_format(const std::string& s);

struct RunContext {
  std::optional<std::uint64_t> seed;  // overrides [experiment] seed
  int threads = 1;
  std::optional<std::string> input;  // replay: system file given on the command line
};

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentOutput {
  std::string name;
  std::uint64_t seed = 0;
  std::string config_hash;
  Json result;  // deterministic: no timings
  std::vector<std::pair<std::string, Json>> extra_json;  // further files, e.g. the closed system
  std::vector<CsvTable> tables;
  std::string summary;
  int status = 0;  // exit code; nonzero when a stage check failed after the artifacts were built
};

// `command` is a CLI subcommand: hull, deviation, pseudo, close, grow,
// certify, replay. Errors propagate as rotlab::Error.
ExperimentOutput run_experiment(const std::string& command, const config::ConfigFile& cfg, const RunContext& ctx);

// Writes <name>.json (and extras) for json/both, <name>_<table>.csv for
// csv/both, and <name>_summary.txt always.
void write_outputs(const ExperimentOutput& out, const std::string& dir, Format format);

std::string csv_text(const CsvTable& t, const ExperimentOutput& owner);

// --- the close-rigid pipeline, also used directly by tests ----------------

struct CloseRigidParams {
  double eps = 0.05;
  double drift_fraction = 0.125;  // |v - t| < fraction * eps for the rational vectors
  double min_margin = 2e-3;       // region margin of each rational vector
  long max_period = 1'000'000;
  closing::PlacementOptions placement;
  closing::ClosingOptions closing;
  closing::VerifyOptions verify;
  double hull_margin = 1e-3;
  std::uint64_t seed = 1;
};

struct CloseRigidResult {
  std::vector<pseudo_orbit::DriftCandidate> candidates;  // Delta1, Delta0, Omega1, Omega0
  closing::ClosingPlan plan;
  closing::ClosedSystem system;
  closing::VerifyReport report;
  geometry::ConvexPolygon rational_hull;
  double hull_margin = 0.0;  // signed margin of the target in rational_hull
  bool passed = false;       // C0 < eps, closure < 1e-9, margin > params.hull_margin
};

CloseRigidResult close_rigid(dynamics::MapPtr f, const geometry::RotationTarget& target,
                             const CloseRigidParams& params);
Json to_json(const CloseRigidResult& r);

}  // namespace rotlab::experiments
