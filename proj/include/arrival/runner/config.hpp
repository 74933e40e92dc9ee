#pragma once
// Experiment configuration: JSON defaults, file overlay, --set overrides, and
// a validation pass that turns the merged document into typed settings.

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "arrival/histories.hpp"
#include "arrival/states.hpp"
#include "arrival/timescales.hpp"

namespace arrival::runner {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { evolve, branches, decoherence, current, backflow, zeno, scan };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);  // throws ConfigError
const std::vector<std::string>& kind_names();

struct GridSettings {
  std::size_t n_points;
  double half_width;
  double mass;
};

struct StateTerm {
  states::GaussianSpec spec;
  std::complex<double> coefficient;
};

enum class StateSource { gaussian, backflow };

struct BackflowSettings {
  int M;
  double p_max_units;
  double t1;
  double t2;
  bool synthesize;
  double p_max(double mass) const;  // p_max_units * sqrt(m / (t2 - t1))
};

struct ExperimentSettings {
  ExperimentKind kind;
  GridSettings grid;
  StateSource source;
  std::vector<StateTerm> terms;
  histories::HistoryPartition partition;
  histories::BranchMode mode;
  bool include_nc;
  double eps_dec;
  double dt_factor;
  double nc_exhaustive;
  double orthogonality;
  timescales::RegimeThresholds regime;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> times;
  BackflowSettings backflow;
  double zeno_tau;
  std::vector<double> zeno_eps;
};

struct ScanSettings {
  ExperimentKind experiment;
  std::string axis;
  std::vector<json> values;
  std::vector<json> point_configs;  // resolved per value
  std::vector<ExperimentSettings> points;
};

// Full default document; every accepted key appears here.
json default_config();

json load_config_file(const std::string& path);

// Set a dotted path to a value parsed as JSON, or to the raw string if it
// does not parse.
void apply_override(json& doc, const std::string& assignment);

// defaults <- file <- overrides, with unknown keys rejected.
json resolve_config(const json& file, const std::vector<std::string>& overrides);

// Fills nulls (epsilon, n_steps) with their derived values and checks every
// module precondition. The returned document is the resolved echo.
ExperimentSettings validate(ExperimentKind kind, json& doc);

ScanSettings validate_scan(json& doc);

}  // namespace arrival::runner
