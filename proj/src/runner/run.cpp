#include "arrival/runner/run.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "arrival/backflow.hpp"
#include "arrival/current.hpp"
#include "arrival/error.hpp"
#include "arrival/histories.hpp"
#include "arrival/qgrid.hpp"
#include "arrival/states.hpp"
#include "arrival/timescales.hpp"

namespace arrival::runner {
namespace {

using qgrid::WaveFunction;

struct Prepared {
  qgrid::GridPtr grid;
  WaveFunction psi;
  double tz_ref;  // time unit for the current quadrature step
};

backflow::BackflowKernel make_kernel(const ExperimentSettings& s) {
  return backflow::build_kernel(s.backflow.M, s.backflow.p_max(s.grid.mass), s.backflow.t1,
                                s.backflow.t2, s.grid.mass);
}

Prepared prepare(const ExperimentSettings& s, ResultRecord& rec) {
  auto grid = qgrid::make_grid(s.grid.n_points, s.grid.half_width, s.grid.mass);
  rec.set("dx", grid->dx());
  rec.set("grid_p_max", grid->p_max());

  if (s.source == StateSource::backflow) {
    const auto kernel = make_kernel(s);
    const auto eig = backflow::min_eigenvalue(kernel);
    auto psi = backflow::backflow_state(kernel, eig.vector, grid);
    rec.set("state_lambda_min", eig.lambda);
    const double tz = timescales::zeno_time_general(psi);
    rec.set("zeno_time_general", tz);
    rec.set("negative_momentum_fraction", states::negative_momentum_fraction(psi));
    return {grid, std::move(psi), tz};
  }

  std::vector<std::pair<qgrid::cplx, WaveFunction>> parts;
  for (const auto& t : s.terms) parts.emplace_back(t.coefficient, states::gaussian(t.spec, grid));
  double max_overlap = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j)
      max_overlap = std::max(max_overlap, std::abs(qgrid::inner(parts[i].second, parts[j].second)));
  WaveFunction psi = parts.size() == 1 ? parts.front().second : states::superpose(parts);

  const auto& spec = s.terms.front().spec;
  rec.set("arrival_time", timescales::arrival_time(spec, s.grid.mass));
  rec.set("zeno_time", timescales::zeno_time_packet(spec, s.grid.mass));
  rec.set("zeno_time_general", timescales::zeno_time_general(psi));
  rec.set("negative_momentum_fraction", states::negative_momentum_fraction(psi));
  if (parts.size() > 1) {
    rec.set("max_term_overlap", max_overlap);
    rec.set("terms_orthogonal", max_overlap < s.orthogonality);
  }
  return {grid, std::move(psi), timescales::zeno_time_packet(spec, s.grid.mass)};
}

void add_regime(const ExperimentSettings& s, ResultRecord& rec) {
  if (s.source != StateSource::gaussian) return;
  const auto r = timescales::regime_check(s.terms.front().spec, s.partition, s.grid.mass, s.regime);
  rec.set("delta", r.delta);
  rec.set("delta_over_tz", r.delta / r.zeno_time);
  rec.set("momentum_peaking", r.momentum_peaking);
  rec.set("arrival_interval", r.interval ? static_cast<std::int64_t>(*r.interval) : std::int64_t{-1});
  rec.set("arrival_margin_tz", r.margin);
  rec.set("regime_ok", r.regime_ok);
}

std::vector<double> column_of(std::size_t n, auto f) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(i);
  return v;
}

// --- pipelines -------------------------------------------------------------------

void run_evolve(const ExperimentSettings& s, ResultRecord& rec) {
  const auto st = prepare(s, rec);
  const auto& g = *st.grid;
  Table evo{"evolution", {}};
  Table dens{"density", {}};
  dens.add("x", std::vector<double>(g.positions().begin(), g.positions().end()));
  std::vector<double> n2, ppos, xm, xs, J;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const auto psi = qgrid::free_evolve(st.psi, s.times[i]);
    const auto a = psi.amplitudes();
    double m1 = 0.0, m2 = 0.0, tot = 0.0;
    std::vector<double> rho(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      rho[j] = std::norm(a[j]);
      tot += rho[j];
      m1 += rho[j] * g.x(j);
      m2 += rho[j] * g.x(j) * g.x(j);
    }
    m1 /= tot;
    n2.push_back(psi.norm2());
    ppos.push_back(qgrid::positive_norm2(psi));
    xm.push_back(m1);
    xs.push_back(std::sqrt(std::max(0.0, m2 / tot - m1 * m1)));
    J.push_back(current::current_at_origin(psi));
    dens.add(fmt::format("rho_{}", i), std::move(rho));
  }
  evo.add("t", s.times).add("norm2", n2).add("p_positive", ppos).add("x_mean", xm);
  evo.add("x_std", xs).add("current", J);
  rec.tables.push_back(std::move(evo));
  rec.tables.push_back(std::move(dens));
}

histories::BranchSet branches_for(const ExperimentSettings& s, const Prepared& st,
                                  ResultRecord& rec) {
  auto set = histories::make_branches(st.psi, s.partition, s.mode);
  const double nc = set.non_crossing.norm2();
  rec.set("mode", histories::to_string(s.mode));
  rec.set("n_steps", static_cast<std::int64_t>(s.partition.n_steps));
  rec.set("n_intervals", static_cast<std::int64_t>(s.partition.n_intervals()));
  rec.set("resolution_residual", set.resolution_residual());
  rec.set("nc_norm2", nc);
  rec.set("exhaustive", nc < s.nc_exhaustive);
  add_regime(s, rec);
  return set;
}

void run_branches(const ExperimentSettings& s, ResultRecord& rec) {
  const auto st = prepare(s, rec);
  const auto set = branches_for(s, st, rec);
  const auto& part = s.partition;
  const std::size_t n = part.n_intervals();
  Table t{"branches", {}};
  t.add("alpha", column_of(n, [](std::size_t a) { return static_cast<double>(a); }));
  t.add("t_start", column_of(n, [&](std::size_t a) { return part.boundary(a); }));
  t.add("t_end", column_of(n, [&](std::size_t a) { return part.boundary(a + 1); }));
  t.add("norm2", column_of(n, [&](std::size_t a) { return set.crossing[a].norm2(); }));
  std::size_t peak = 0;
  for (std::size_t a = 0; a < n; ++a)
    if (set.crossing[a].norm2() > set.crossing[peak].norm2()) peak = a;
  rec.set("peak_interval", static_cast<std::int64_t>(peak));
  rec.set("peak_norm2", set.crossing[peak].norm2());
  rec.tables.push_back(std::move(t));
}

Table matrix_table(const std::string& name, const std::vector<std::string>& labels,
                   const auto& M, bool allow_missing, auto element) {
  Table t{name, {}};
  t.add_labels("row", labels);
  for (Eigen::Index b = 0; b < M.cols(); ++b) {
    std::vector<double> col(static_cast<std::size_t>(M.rows()));
    for (Eigen::Index a = 0; a < M.rows(); ++a) col[static_cast<std::size_t>(a)] = element(M(a, b));
    t.add(labels[static_cast<std::size_t>(b)], std::move(col), allow_missing);
  }
  return t;
}

void run_decoherence(const ExperimentSettings& s, ResultRecord& rec) {
  const auto st = prepare(s, rec);
  const auto set = branches_for(s, st, rec);
  const auto rep = histories::decoherence_analysis(set, s.include_nc, s.eps_dec);
  const auto& part = s.partition;
  const std::size_t rows = static_cast<std::size_t>(rep.p.size());
  const double dt = s.dt_factor * st.tz_ref;

  std::vector<double> t0(rows), t1(rows), p(rows), qre(rows), qim(rows), jint(rows);
  for (std::size_t a = 0; a < rows; ++a) {
    const bool crossing = a < part.n_intervals();
    t0[a] = crossing ? part.boundary(a) : std::nan("");
    t1[a] = crossing ? part.boundary(a + 1) : std::nan("");
    p[a] = rep.p(static_cast<Eigen::Index>(a));
    qre[a] = rep.q(static_cast<Eigen::Index>(a)).real();
    qim[a] = rep.q(static_cast<Eigen::Index>(a)).imag();
    jint[a] = crossing ? current::integrated_current(st.psi, t0[a], t1[a], dt) : std::nan("");
  }
  Table h{"histories", {}};
  h.add_labels("label", rep.labels).add("t_start", t0, true).add("t_end", t1, true);
  h.add("p", p).add("q_re", qre).add("q_im", qim).add("integrated_current", jint, true);
  rec.tables.push_back(std::move(h));
  rec.tables.push_back(matrix_table("D_re", rep.labels, rep.D, false, [](auto z) { return z.real(); }));
  rec.tables.push_back(matrix_table("D_im", rep.labels, rep.D, false, [](auto z) { return z.imag(); }));
  rec.tables.push_back(matrix_table("normalized", rep.labels, rep.normalized, true, [](double x) { return x; }));

  const std::size_t pk = rep.peak();
  const double p_peak = rep.p(static_cast<Eigen::Index>(pk));
  double max_imag = 0.0, min_re = 0.0;
  for (std::size_t a = 0; a < rows; ++a) {
    max_imag = std::max(max_imag, std::abs(qim[a]));
    min_re = std::min(min_re, qre[a]);
  }
  rec.set("include_nc", rep.includes_nc);
  rec.set("eps_dec", rep.eps_dec);
  rec.set("max_offdiag", rep.max_offdiag);
  rec.set("decoherent", rep.decoherent);
  rec.set("q_sum", rep.q_sum);
  rec.set("identity_residual", rep.identity_residual);
  rec.set("hermiticity_residual", rep.hermiticity_residual);
  rec.set("peak_label", rep.labels[pk]);
  rec.set("p_peak", p_peak);
  rec.set("q_peak", rep.q(static_cast<Eigen::Index>(pk)));
  if (pk < part.n_intervals()) rec.set("current_peak", jint[pk]);
  rec.set("max_q_imag_over_p_peak", p_peak > 0.0 ? max_imag / p_peak : std::nan(""));
  rec.set("min_q_re", min_re);
  rec.set("negative_quasi_probability", min_re < -1e-3);
}

void run_current(const ExperimentSettings& s, ResultRecord& rec) {
  const auto st = prepare(s, rec);
  const double dt = s.dt_factor * st.tz_ref;
  Table iv{"intervals", {}};
  Table tr{"trace", {}};
  std::vector<double> a, b, J, P, d, tidx, tt, tj;
  double max_diff = 0.0, min_p = 0.0, total_j = 0.0, total_p = 0.0;
  for (std::size_t i = 0; i < s.intervals.size(); ++i) {
    const auto [t1, t2] = s.intervals[i];
    const auto trace = current::current_trace(st.psi, t1, t2, dt);
    const double j = current::simpson(trace);
    const double p = current::semiclassical_crossing_probability(st.psi, t1, t2);
    a.push_back(t1);
    b.push_back(t2);
    J.push_back(j);
    P.push_back(p);
    d.push_back(j - p);
    max_diff = std::max(max_diff, std::abs(j - p));
    min_p = i == 0 ? j : std::min(min_p, j);
    total_j += j;
    total_p += p;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      tidx.push_back(static_cast<double>(i));
      tt.push_back(trace.times[k]);
      tj.push_back(trace.J[k]);
    }
  }
  iv.add("t1", a).add("t2", b).add("integrated_current", J).add("semiclassical", P).add("difference", d);
  tr.add("interval", tidx).add("t", tt).add("current", tj);
  rec.set("dt", dt);
  rec.set("total_integrated_current", total_j);
  rec.set("total_semiclassical", total_p);
  rec.set("max_abs_difference", max_diff);
  rec.set("min_integrated_current", min_p);
  rec.tables.push_back(std::move(iv));
  rec.tables.push_back(std::move(tr));
}

void run_backflow(const ExperimentSettings& s, ResultRecord& rec) {
  const auto kernel = make_kernel(s);
  const auto ev = backflow::eigenvalues(kernel);
  const auto eig = backflow::min_eigenvalue(kernel);
  const auto M = static_cast<std::size_t>(kernel.size());
  rec.set("M", static_cast<std::int64_t>(M));
  rec.set("p_max", s.backflow.p_max(s.grid.mass));
  rec.set("natural_momentum", backflow::natural_momentum(s.backflow.t1, s.backflow.t2, s.grid.mass));
  rec.set("lambda_min", eig.lambda);
  rec.set("lambda_max", ev.maxCoeff());
  rec.set("trace", kernel.K.trace().real());
  rec.set("eigenvalue_sum", ev.sum());
  rec.set("has_backflow", eig.lambda < 0.0);

  Table spec{"spectrum", {}};
  spec.add("index", column_of(M, [](std::size_t i) { return static_cast<double>(i); }));
  spec.add("lambda", column_of(M, [&](std::size_t i) { return ev(static_cast<Eigen::Index>(i)); }));
  Table vec{"eigvec", {}};
  vec.add("p", kernel.p_nodes).add("weight", kernel.weights);
  vec.add("re", column_of(M, [&](std::size_t i) { return eig.vector(static_cast<Eigen::Index>(i)).real(); }));
  vec.add("im", column_of(M, [&](std::size_t i) { return eig.vector(static_cast<Eigen::Index>(i)).imag(); }));
  rec.tables.push_back(std::move(spec));
  rec.tables.push_back(std::move(vec));

  if (!s.backflow.synthesize) return;
  const auto grid = qgrid::make_grid(s.grid.n_points, s.grid.half_width, s.grid.mass);
  const auto psi = backflow::backflow_state(kernel, eig.vector, grid);
  const double tz = timescales::zeno_time_general(psi);
  const double dt = s.dt_factor * std::min(tz, s.backflow.t2 - s.backflow.t1);
  const double j = current::integrated_current(psi, s.backflow.t1, s.backflow.t2, dt);
  const auto w = backflow::interference_witness(psi, s.backflow.t1, s.backflow.t2);
  rec.set("dt", dt);
  rec.set("negative_momentum_fraction", states::negative_momentum_fraction(psi));
  rec.set("grid_crossing_probability", j);
  rec.set("grid_relative_difference", std::abs(j - eig.lambda) / std::abs(eig.lambda));
  rec.set("expC", w.expC);
  rec.set("expC_imag", w.expC_imag);
  rec.set("expC2", w.expC2);
  rec.set("witness", w.witness);
}

void run_zeno(const ExperimentSettings& s, ResultRecord& rec) {
  const auto st = prepare(s, rec);
  const auto pts = histories::zeno_reflection_scan(st.psi, s.zeno_tau, s.zeno_eps);
  Table t{"survival", {}};
  const std::size_t n = pts.size();
  t.add("epsilon", column_of(n, [&](std::size_t i) { return pts[i].epsilon; }));
  t.add("epsilon_over_tz", column_of(n, [&](std::size_t i) { return pts[i].epsilon / st.tz_ref; }));
  t.add("n_steps", column_of(n, [&](std::size_t i) {
          return static_cast<double>(histories::steps_for(s.zeno_tau, pts[i].epsilon));
        }));
  t.add("survival", column_of(n, [&](std::size_t i) { return pts[i].survival; }));
  rec.tables.push_back(std::move(t));

  // Monotone in the order of decreasing epsilon, 1e-3 slack.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pts[a].epsilon > pts[b].epsilon; });
  bool mono = true;
  for (std::size_t i = 1; i < n; ++i)
    mono = mono && pts[order[i]].survival >= pts[order[i - 1]].survival - 1e-3;
  rec.set("tau", s.zeno_tau);
  rec.set("monotone", mono);
  rec.set("survival_at_smallest_epsilon", pts[order.back()].survival);
}

}  // namespace

ResultRecord run(const ExperimentSettings& settings, const json& echo) {
  ResultRecord rec;
  rec.kind = to_string(settings.kind);
  rec.config = echo;
  switch (settings.kind) {
    case ExperimentKind::evolve: run_evolve(settings, rec); break;
    case ExperimentKind::branches: run_branches(settings, rec); break;
    case ExperimentKind::decoherence: run_decoherence(settings, rec); break;
    case ExperimentKind::current: run_current(settings, rec); break;
    case ExperimentKind::backflow: run_backflow(settings, rec); break;
    case ExperimentKind::zeno: run_zeno(settings, rec); break;
    case ExperimentKind::scan: throw PreconditionError("run: use run_scan for sweeps");
  }
  check_finite(rec);
  return rec;
}

ScanOutcome run_scan(const ScanSettings& scan, const json& echo, unsigned workers) {
  const std::size_t n = scan.points.size();
  std::vector<ResultRecord> records(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        records[i] = run(scan.points[i], scan.point_configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScanOutcome out;
  out.summary.kind = "scan";
  out.summary.config = echo;
  out.summary.set("experiment", to_string(scan.experiment));
  out.summary.set("axis", scan.axis);
  out.summary.set("n_points", static_cast<std::int64_t>(n));

  Table t{"points", {}};
  t.add("index", column_of(n, [](std::size_t i) { return static_cast<double>(i); }));
  bool numeric = true;
  for (const auto& v : scan.values) numeric = numeric && v.is_number();
  if (numeric) {
    t.add("value", column_of(n, [&](std::size_t i) { return scan.values[i].get<double>(); }));
  } else {
    std::vector<std::string> labels;
    for (const auto& v : scan.values) labels.push_back(v.dump());
    t.add_labels("value", labels);
  }
  // Numeric scalars shared by every point, in first-point order.
  for (const auto& [name, first] : records.front().scalars) {
    std::vector<double> col;
    for (const auto& r : records) {
      const Scalar* v = r.find(name);
      if (v == nullptr) break;
      if (const auto* d = std::get_if<double>(v)) col.push_back(*d);
      else if (const auto* k = std::get_if<std::int64_t>(v)) col.push_back(static_cast<double>(*k));
      else if (const auto* b = std::get_if<bool>(v)) col.push_back(*b ? 1.0 : 0.0);
      else break;
    }
    if (col.size() == n) t.add(name, std::move(col), true);
  }
  out.summary.tables.push_back(std::move(t));
  out.points = std::move(records);
  return out;
}

void execute(ExperimentKind kind, const json& file, const std::vector<std::string>& overrides,
             const std::string& out_dir, unsigned workers, std::ostream& log) {
  json doc = resolve_config(file, overrides);
  namespace fs = std::filesystem;
  if (kind == ExperimentKind::scan) {
    const auto scan = validate_scan(doc);
    const auto out = run_scan(scan, doc, workers);
    for (std::size_t i = 0; i < out.points.size(); ++i)
      write_record(out.points[i], (fs::path(out_dir) / fmt::format("point_{:03d}", i)).string());
    write_record(out.summary, out_dir);
    log << fmt::format("scan over {} ({} points of {}) written to {}\n", scan.axis,
                       out.points.size(), to_string(scan.experiment), out_dir);
    return;
  }
  const auto settings = validate(kind, doc);
  const auto rec = run(settings, doc);
  write_record(rec, out_dir);
  log << rec.kind << " written to " << out_dir << "\n";
  for (const auto& [name, v] : rec.scalars) {
    log << "  " << name << " = ";
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, double>) log << format_real(x);
          else if constexpr (std::is_same_v<T, bool>) log << (x ? "true" : "false");
          else if constexpr (std::is_same_v<T, std::complex<double>>)
            log << format_real(x.real()) << (x.imag() < 0 ? " - " : " + ")
                << format_real(std::abs(x.imag())) << "i";
          else log << x;
        },
        v);
    log << "\n";
  }
}

}  // namespace arrival::runner
