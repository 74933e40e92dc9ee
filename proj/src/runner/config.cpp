#include "arrival/runner/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "arrival/backflow.hpp"
#include "arrival/qgrid.hpp"

namespace arrival::runner {
namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_table() {
  static const std::vector<std::pair<ExperimentKind, std::string>> table{
      {ExperimentKind::evolve, "evolve"},   {ExperimentKind::branches, "branches"},
      {ExperimentKind::decoherence, "decoherence"}, {ExperimentKind::current, "current"},
      {ExperimentKind::backflow, "backflow"}, {ExperimentKind::zeno, "zeno"},
      {ExperimentKind::scan, "scan"}};
  return table;
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError(path, "malformed dotted path");
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

// Reject keys absent from the defaults, so typos never pass silently.
void check_known(const json& doc, const json& ref, const std::string& path) {
  if (!doc.is_object() || !ref.is_object()) return;
  for (const auto& [key, value] : doc.items()) {
    const std::string here = join(path, key);
    if (here == "experiment" || here == "scan.sweep") continue;
    if (!ref.contains(key)) throw ConfigError(here, "unknown key");
    if (here == "state.terms") {
      if (!value.is_array()) continue;
      static const json term_ref = {{"q0", 0}, {"p0", 0}, {"sigma", 0}, {"re", 0}, {"im", 0}};
      for (std::size_t i = 0; i < value.size(); ++i)
        check_known(value[i], term_ref, fmt::format("state.terms[{}]", i));
      continue;
    }
    check_known(value, ref[key], here);
  }
}

// --- typed readers ------------------------------------------------------------

const json* lookup(const json& doc, const std::string& path) {
  const json* cur = &doc;
  for (const auto& part : split_path(path)) {
    if (!cur->is_object() || !cur->contains(part)) return nullptr;
    cur = &(*cur)[part];
  }
  return cur;
}

double number_at(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double get_number(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || v->is_null()) throw ConfigError(path, "required value is missing");
  return number_at(*v, path);
}

std::optional<double> get_optional_number(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return number_at(*v, path);
}

long long integer_at(const json& v, const std::string& field) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15)
      return static_cast<long long>(x);
  }
  throw ConfigError(field, "expected an integer");
}

std::optional<long long> get_optional_integer(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || v->is_null()) return std::nullopt;
  return integer_at(*v, path);
}

long long get_integer(const json& doc, const std::string& path) {
  auto v = get_optional_integer(doc, path);
  if (!v) throw ConfigError(path, "required value is missing");
  return *v;
}

bool get_bool(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || v->is_null()) throw ConfigError(path, "required value is missing");
  if (!v->is_boolean()) throw ConfigError(path, "expected true or false");
  return v->get<bool>();
}

std::string get_string(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || v->is_null()) throw ConfigError(path, "required value is missing");
  if (!v->is_string()) throw ConfigError(path, "expected a string");
  return v->get<std::string>();
}

const json& get_array(const json& doc, const std::string& path) {
  const json* v = lookup(doc, path);
  if (v == nullptr || !v->is_array()) throw ConfigError(path, "expected a list");
  return *v;
}

json& slot(json& doc, const std::string& path) {
  json* cur = &doc;
  for (const auto& part : split_path(path)) cur = &(*cur)[part];
  return *cur;
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0)) throw ConfigError(field, "must be positive");
}

bool close_multiple(double tau, double eps) {
  const double r = tau / eps;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

// --- sections -------------------------------------------------------------------

GridSettings read_grid(const json& doc) {
  GridSettings g{};
  const long long n = get_integer(doc, "grid.n_points");
  if (n < 256 || n > (1LL << 22) || (n & (n - 1)) != 0)
    throw ConfigError("grid.n_points", "must be a power of two in [256, 4194304]");
  g.n_points = static_cast<std::size_t>(n);
  g.half_width = get_number(doc, "grid.half_width");
  positive(g.half_width, "grid.half_width");
  g.mass = get_number(doc, "grid.mass");
  positive(g.mass, "grid.mass");
  return g;
}

double grid_p_max(const GridSettings& g) {
  return std::acos(-1.0) * static_cast<double>(g.n_points) / (2.0 * g.half_width);
}

std::vector<StateTerm> read_terms(const json& doc, const GridSettings& grid) {
  const json& arr = get_array(doc, "state.terms");
  if (arr.empty()) throw ConfigError("state.terms", "needs at least one term");
  std::vector<StateTerm> terms;
  double coef_sum = 0.0;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string base = fmt::format("state.terms[{}]", i);
    const json& t = arr[i];
    if (!t.is_object()) throw ConfigError(base, "expected an object");
    auto num = [&](const char* key, std::optional<double> fallback) {
      const std::string f = base + "." + key;
      if (!t.contains(key) || t[key].is_null()) {
        if (fallback) return *fallback;
        throw ConfigError(f, "required value is missing");
      }
      return number_at(t[key], f);
    };
    StateTerm term{{num("q0", {}), num("p0", {}), num("sigma", {})},
                   {num("re", 1.0), num("im", 0.0)}};
    const auto& s = term.spec;
    positive(s.sigma, base + ".sigma");
    if (!(s.q0 > 0.0)) throw ConfigError(base + ".q0", "packet must start in x > 0");
    if (!(s.p0 < 0.0)) throw ConfigError(base + ".p0", "packet must move left (p0 < 0)");
    if (s.q0 < 5.0 * s.sigma)
      throw ConfigError(base + ".q0", "must be at least 5 sigma from the origin");
    if (std::abs(s.p0) + 2.0 / s.sigma >= grid_p_max(grid))
      throw ConfigError(base + ".p0", fmt::format("|p0| + 2/sigma exceeds the grid Nyquist momentum {:.6g}",
                                                  grid_p_max(grid)));
    coef_sum += std::abs(term.coefficient);
    terms.push_back(term);
  }
  if (coef_sum == 0.0) throw ConfigError("state.terms", "all coefficients vanish");
  return terms;
}

BackflowSettings read_backflow(const json& doc) {
  BackflowSettings b{};
  const long long M = get_integer(doc, "backflow.M");
  if (M < 1 || M > 4096) throw ConfigError("backflow.M", "must lie in [1, 4096]");
  b.M = static_cast<int>(M);
  b.p_max_units = get_number(doc, "backflow.p_max_units");
  positive(b.p_max_units, "backflow.p_max_units");
  b.t1 = get_number(doc, "backflow.t1");
  b.t2 = get_number(doc, "backflow.t2");
  if (!(b.t2 > b.t1)) throw ConfigError("backflow.t2", "must exceed backflow.t1");
  b.synthesize = get_bool(doc, "backflow.synthesize");
  return b;
}

void check_synthesis(const BackflowSettings& b, const GridSettings& g) {
  if (b.p_max(g.mass) >= grid_p_max(g))
    throw ConfigError("backflow.p_max_units",
                      fmt::format("kernel momenta reach {:.6g}, beyond the grid Nyquist momentum {:.6g}",
                                  b.p_max(g.mass), grid_p_max(g)));
  const double dk = std::acos(-1.0) / g.half_width;
  if (b.p_max(g.mass) / b.M < dk)
    throw ConfigError("backflow.M", "quadrature cells narrower than the grid momentum spacing");
}

double reference_zeno_time(const ExperimentSettings& s) {
  return timescales::zeno_time_packet(s.terms.front().spec, s.grid.mass);
}

void check_box(const ExperimentSettings& s, double horizon) {
  if (s.source != StateSource::gaussian) return;
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const auto& sp = s.terms[i].spec;
    const double need = qgrid::required_half_width(sp.q0, sp.p0, sp.sigma, horizon, s.grid.mass);
    if (need > s.grid.half_width)
      throw ConfigError("grid.half_width",
                        fmt::format("term {} needs half_width >= {:.6g} to stay clear of the box edges up to t = {:.6g}",
                                    i, need, horizon));
  }
}

void read_partition(ExperimentSettings& s, json& doc) {
  auto eps = get_optional_number(doc, "partition.epsilon");
  if (!eps) {
    if (s.source != StateSource::gaussian)
      throw ConfigError("partition.epsilon", "must be given when state.source is backflow");
    eps = 2.0 * reference_zeno_time(s);
  }
  positive(*eps, "partition.epsilon");
  const auto m_cg = get_integer(doc, "partition.m_cg");
  if (m_cg < 1) throw ConfigError("partition.m_cg", "must be a positive integer");
  const double start = get_number(doc, "partition.start");

  long long n = 0;
  if (auto ns = get_optional_integer(doc, "partition.n_steps")) {
    n = *ns;
  } else {
    auto tau = get_optional_number(doc, "partition.tau");
    if (!tau) throw ConfigError("partition.tau", "give either partition.tau or partition.n_steps");
    positive(*tau, "partition.tau");
    if (!close_multiple(*tau, *eps))
      throw ConfigError("partition.tau", "must be a whole multiple of partition.epsilon");
    n = std::llround(*tau / *eps);
  }
  if (n < 1 || n > 100000) throw ConfigError("partition.n_steps", "must lie in [1, 100000]");
  if (n % m_cg != 0) throw ConfigError("partition.m_cg", "must divide partition.n_steps");

  s.partition = histories::HistoryPartition::make(*eps, static_cast<std::size_t>(n),
                                                  static_cast<std::size_t>(m_cg), start);
  slot(doc, "partition.epsilon") = *eps;
  slot(doc, "partition.n_steps") = n;
  slot(doc, "partition.tau") = s.partition.tau();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_table())
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kind_table())
    if (n == name) return k;
  throw ConfigError("experiment", "unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& kv : kind_table()) v.push_back(kv.second);
    return v;
  }();
  return names;
}

double BackflowSettings::p_max(double mass) const {
  return p_max_units * backflow::natural_momentum(t1, t2, mass);
}

json default_config() {
  return json::parse(R"({
    "grid": {"n_points": 4096, "half_width": 400.0, "mass": 1.0},
    "state": {
      "source": "gaussian",
      "terms": [{"q0": 50.0, "p0": -5.0, "sigma": 2.0, "re": 1.0, "im": 0.0}]
    },
    "partition": {"epsilon": null, "n_steps": null, "tau": 20.0, "m_cg": 1, "start": 0.0},
    "mode": "exact",
    "include_nc": true,
    "thresholds": {
      "eps_dec": 0.1, "dt_factor": 0.05, "nc_exhaustive": 0.01, "orthogonality": 0.001,
      "delta_over_tz": 5.0, "margin_tz": 2.0, "momentum_peaking": 10.0
    },
    "intervals": [[0.0, 20.0]],
    "times": [0.0, 10.0, 20.0],
    "backflow": {"M": 64, "p_max_units": 10.0, "t1": 0.0, "t2": 1.0, "synthesize": true},
    "zeno": {"tau": 20.0, "eps_list": [2.0, 1.0, 0.5, 0.25, 0.125]},
    "scan": {"experiment": "zeno", "sweep": {}}
  })");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    json doc = json::parse(buf.str());
    if (!doc.is_object()) throw ConfigError("--config", "top level must be an object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* cur = &doc;
  const auto parts = split_path(path);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& part = parts[i];
    const bool last = i + 1 == parts.size();
    if (cur->is_array() && is_index(part)) {
      const auto idx = std::stoul(part);
      if (idx >= cur->size()) throw ConfigError(path, "list index out of range");
      cur = &(*cur)[idx];
    } else {
      if (!cur->is_object() && !cur->is_null()) throw ConfigError(path, "cannot descend into a value");
      cur = &(*cur)[part];
    }
    if (last) *cur = value;
  }
}

json resolve_config(const json& file, const std::vector<std::string>& overrides) {
  const json defaults = default_config();
  check_known(file, defaults, "");
  json doc = defaults;
  doc.merge_patch(file);
  // merge_patch merges objects; lists and the sweep map replace wholesale.
  if (file.contains("scan") && file["scan"].is_object() && file["scan"].contains("sweep"))
    doc["scan"]["sweep"] = file["scan"]["sweep"];
  for (const auto& o : overrides) apply_override(doc, o);
  check_known(doc, defaults, "");
  return doc;
}

ExperimentSettings validate(ExperimentKind kind, json& doc) {
  if (kind == ExperimentKind::scan) throw ConfigError("experiment", "scan needs validate_scan");
  if (doc.contains("experiment") && !doc["experiment"].is_null()) {
    const std::string named = get_string(doc, "experiment");
    if (parse_kind(named) != kind)
      throw ConfigError("experiment", "config names '" + named + "' but the subcommand is '" +
                                          to_string(kind) + "'");
  }

  ExperimentSettings s{};
  s.kind = kind;
  s.grid = read_grid(doc);

  const std::string source = get_string(doc, "state.source");
  if (source == "gaussian") {
    s.source = StateSource::gaussian;
  } else if (source == "backflow") {
    s.source = StateSource::backflow;
  } else {
    throw ConfigError("state.source", "expected 'gaussian' or 'backflow'");
  }
  s.terms = read_terms(doc, s.grid);

  s.eps_dec = get_number(doc, "thresholds.eps_dec");
  positive(s.eps_dec, "thresholds.eps_dec");
  s.dt_factor = get_number(doc, "thresholds.dt_factor");
  if (!(s.dt_factor > 0.0 && s.dt_factor <= 1.0))
    throw ConfigError("thresholds.dt_factor", "must lie in (0, 1]");
  s.nc_exhaustive = get_number(doc, "thresholds.nc_exhaustive");
  if (!(s.nc_exhaustive > 0.0 && s.nc_exhaustive < 1.0))
    throw ConfigError("thresholds.nc_exhaustive", "must lie in (0, 1)");
  s.orthogonality = get_number(doc, "thresholds.orthogonality");
  positive(s.orthogonality, "thresholds.orthogonality");
  s.regime.delta_over_tz = get_number(doc, "thresholds.delta_over_tz");
  positive(s.regime.delta_over_tz, "thresholds.delta_over_tz");
  s.regime.margin_tz = get_number(doc, "thresholds.margin_tz");
  if (s.regime.margin_tz < 0.0) throw ConfigError("thresholds.margin_tz", "must be non-negative");
  s.regime.momentum_peaking = get_number(doc, "thresholds.momentum_peaking");
  positive(s.regime.momentum_peaking, "thresholds.momentum_peaking");

  const std::string mode = get_string(doc, "mode");
  if (mode == "exact") {
    s.mode = histories::BranchMode::exact;
  } else if (mode == "semiclassical") {
    s.mode = histories::BranchMode::semiclassical;
  } else {
    throw ConfigError("mode", "expected 'exact' or 'semiclassical'");
  }
  s.include_nc = get_bool(doc, "include_nc");

  s.backflow = read_backflow(doc);
  if (s.source == StateSource::backflow ||
      (kind == ExperimentKind::backflow && s.backflow.synthesize))
    check_synthesis(s.backflow, s.grid);

  double horizon = 0.0;
  switch (kind) {
    case ExperimentKind::evolve: {
      const json& arr = get_array(doc, "times");
      if (arr.empty()) throw ConfigError("times", "needs at least one time");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        s.times.push_back(number_at(arr[i], fmt::format("times[{}]", i)));
        horizon = std::max(horizon, std::abs(s.times.back()));
      }
      break;
    }
    case ExperimentKind::branches:
    case ExperimentKind::decoherence:
      read_partition(s, doc);
      horizon = std::max(std::abs(s.partition.start), std::abs(s.partition.end_time()));
      break;
    case ExperimentKind::current: {
      const json& arr = get_array(doc, "intervals");
      if (arr.empty()) throw ConfigError("intervals", "needs at least one interval");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string f = fmt::format("intervals[{}]", i);
        if (!arr[i].is_array() || arr[i].size() != 2) throw ConfigError(f, "expected [t1, t2]");
        const double t1 = number_at(arr[i][0], f), t2 = number_at(arr[i][1], f);
        if (!(t2 > t1)) throw ConfigError(f, "t2 must exceed t1");
        s.intervals.emplace_back(t1, t2);
        horizon = std::max({horizon, std::abs(t1), std::abs(t2)});
      }
      break;
    }
    case ExperimentKind::backflow:
      break;
    case ExperimentKind::zeno: {
      s.zeno_tau = get_number(doc, "zeno.tau");
      positive(s.zeno_tau, "zeno.tau");
      const json* lst = lookup(doc, "zeno.eps_list");
      if (lst == nullptr || lst->is_null()) {
        read_partition(s, doc);
        s.zeno_eps = {s.partition.epsilon};
        slot(doc, "zeno.eps_list") = s.zeno_eps;
      } else {
        const json& arr = get_array(doc, "zeno.eps_list");
        if (arr.empty()) throw ConfigError("zeno.eps_list", "needs at least one epsilon");
        for (std::size_t i = 0; i < arr.size(); ++i) s.zeno_eps.push_back(number_at(arr[i], fmt::format("zeno.eps_list[{}]", i)));
      }
      for (std::size_t i = 0; i < s.zeno_eps.size(); ++i) {
        const std::string f = fmt::format("zeno.eps_list[{}]", i);
        positive(s.zeno_eps[i], f);
        if (!close_multiple(s.zeno_tau, s.zeno_eps[i])) throw ConfigError(f, "must divide zeno.tau");
        if (s.zeno_tau / s.zeno_eps[i] > 1e6 + 0.5) throw ConfigError(f, "more than 1e6 steps");
      }
      horizon = s.zeno_tau;
      break;
    }
    case ExperimentKind::scan:
      break;
  }
  check_box(s, horizon);
  doc["experiment"] = to_string(kind);
  return s;
}

ScanSettings validate_scan(json& doc) {
  ScanSettings sc;
  const std::string exp = get_string(doc, "scan.experiment");
  sc.experiment = parse_kind(exp);
  if (sc.experiment == ExperimentKind::scan)
    throw ConfigError("scan.experiment", "a scan cannot sweep another scan");
  const json* sweep = lookup(doc, "scan.sweep");
  if (sweep == nullptr || !sweep->is_object() || sweep->empty())
    throw ConfigError("scan.sweep", "needs exactly one swept parameter");
  if (sweep->size() != 1) throw ConfigError("scan.sweep", "only one swept axis is allowed");
  sc.axis = sweep->begin().key();
  const json& values = sweep->begin().value();
  if (!values.is_array()) throw ConfigError("scan.sweep." + sc.axis, "expected a list of values");
  if (values.empty()) throw ConfigError("scan.sweep." + sc.axis, "value list is empty");
  if (sc.axis.rfind("scan", 0) == 0 || sc.axis == "experiment")
    throw ConfigError("scan.sweep." + sc.axis, "cannot sweep scan or experiment settings");

  json base = doc;
  base.erase("scan");
  base["experiment"] = exp;
  const json defaults = default_config();
  bool known = lookup(defaults, sc.axis) != nullptr;
  if (!known) {
    // Allow list-element paths such as state.terms.0.q0.
    json probe = base;
    try {
      apply_override(probe, sc.axis + "=0");
      check_known(probe, defaults, "");
      known = true;
    } catch (const ConfigError&) {
    }
  }
  if (!known) throw ConfigError("scan.sweep." + sc.axis, "unknown parameter");

  for (std::size_t i = 0; i < values.size(); ++i) {
    json point = base;
    apply_override(point, sc.axis + "=" + values[i].dump());
    try {
      sc.points.push_back(validate(sc.experiment, point));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("scan.sweep.{}[{}] -> {}", sc.axis, i, e.field()),
                        std::string(e.what()).substr(e.field().size() + 2));
    }
    sc.values.push_back(values[i]);
    sc.point_configs.push_back(std::move(point));
  }
  doc["experiment"] = "scan";
  return sc;
}

}  // namespace arrival::runner
