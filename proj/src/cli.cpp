#include "mh/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mh/closedform.hpp"
#include "mh/combinat.hpp"
#include "mh/config.hpp"
#include "mh/core.hpp"
#include "mh/csvio.hpp"
#include "mh/errors.hpp"
#include "mh/games.hpp"
#include "mh/integrators.hpp"
#include "mh/rational.hpp"
#include "mh/series.hpp"
#include "mh/svg.hpp"

namespace mh::cli {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

constexpr int kSymbolicOrderBudget = 12;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;
};

struct Context {
  config::Config cfg;
  fs::path out;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Resolves config file, output directory, and the effective seed (command
// line overrides the config's global 'seed' key).
Context make_context(const CommonArgs& args, const std::string& command) {
  config::Config cfg = args.config_path.empty()
                           ? config::Config::from_string("", "<no config>")
                           : config::Config::from_file(args.config_path);
  config::SectionReader global(cfg, "");
  std::string experiment = global.get_string("experiment", command);
  if (experiment != command) {
    throw ConfigError(cfg.name() + ": config is for experiment '" + experiment +
                      "', not '" + command + "'");
  }
  std::uint64_t cfg_seed = global.get_u64("seed", 0);
  global.finish();
  Context ctx{std::move(cfg), fs::path(args.out_dir),
              args.seed_given ? args.seed : cfg_seed,
              std::max(1, args.jobs)};
  fs::create_directories(ctx.out);
  return ctx;
}

// Rejects config sections the command does not know about; typos in section
// headers fail just as loudly as typos in keys.
void require_sections(const config::Config& cfg,
                      const std::vector<std::string>& allowed) {
  for (const auto& sec : cfg.sections()) {
    if (std::find(allowed.begin(), allowed.end(), sec) == allowed.end()) {
      throw ConfigError(cfg.name() + ": unknown section [" + sec + "]");
    }
  }
}

template <class Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  body(os);
  os.flush();
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

// Runs fn(0..n-1) on a small pool. Task errors are rethrown in index order
// after the pool drains, so failures are deterministic under --jobs.
void parallel_grid(int jobs, int n, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Keyed metric rows; written sorted by (param, metric) so concurrent
// producers cannot perturb the artifact.
class ReportTable {
 public:
  ReportTable(std::string experiment, std::uint64_t config_hash, std::uint64_t seed)
      : experiment_(std::move(experiment)),
        hash_(config::hash_hex(config_hash)),
        seed_(std::to_string(seed)) {}

  void add(const std::string& param, const std::string& metric, double value) {
    add_text(param, metric, csv::format_double(value));
  }

  void add_text(const std::string& param, const std::string& metric,
                std::string value) {
    std::lock_guard<std::mutex> lock(mu_);
    rows_.push_back(Row{param, metric, std::move(value)});
  }

  void write(std::ostream& os) const {
    std::vector<Row> rows;
    {
      std::lock_guard<std::mutex> lock(mu_);
      rows = rows_;
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& l, const Row& r) {
      return l.param != r.param ? l.param < r.param : l.metric < r.metric;
    });
    csv::CsvWriter w(os);
    w.write_row({"experiment", "config_hash", "seed", "param", "metric", "value"});
    for (const auto& row : rows) {
      w.write_row({experiment_, hash_, seed_, row.param, row.metric, row.value});
    }
  }

 private:
  struct Row {
    std::string param, metric, value;
  };
  std::string experiment_, hash_, seed_;
  mutable std::mutex mu_;
  std::vector<Row> rows_;
};

// ---------------------------------------------------------------------------
// Config-driven model builders

core::Vec parse_vec(const std::vector<double>& vals) {
  core::Vec v(static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v[static_cast<long>(i)] = vals[i];
  return v;
}

core::PhasePoint parse_phase_point(config::SectionReader& sec,
                                   const std::string& key, int dim) {
  std::vector<double> vals = sec.get_double_list(key);
  if (static_cast<int>(vals.size()) != 2 * dim) {
    throw ConfigError("key '" + key + "' needs " + std::to_string(2 * dim) +
                      " entries (p then q), got " + std::to_string(vals.size()));
  }
  core::Vec p(dim), q(dim);
  for (int i = 0; i < dim; ++i) {
    p[i] = vals[static_cast<size_t>(i)];
    q[i] = vals[static_cast<size_t>(dim + i)];
  }
  return core::PhasePoint(std::move(p), std::move(q));
}

// The kind and scalar coefficients ride along so commands can offer
// kind-specific extras (the closed-form trace for quadratics).
struct HamiltonianSpec {
  core::SeparableHamiltonian H;
  std::string kind;
  double a = 0.0;
  double b = 0.0;
};

HamiltonianSpec build_hamiltonian(const config::Config& cfg) {
  config::SectionReader h(cfg, "hamiltonian");
  std::string kind = h.get_string("kind");
  int dim = static_cast<int>(h.get_int("dim", 1));
  if (dim < 1) throw ConfigError("hamiltonian dim must be >= 1");
  if (kind == "logcosh") {
    h.finish();
    return {core::SeparableHamiltonian(core::SmoothScalarFamily::log_cosh(dim),
                                       core::SmoothScalarFamily::log_cosh(dim)),
            kind};
  }
  if (kind == "quadratic") {
    double a = h.get_double("a", 1.0);
    double b = h.get_double("b", 1.0);
    h.finish();
    core::Mat id = core::Mat::Identity(dim, dim);
    return {core::SeparableHamiltonian(core::SmoothScalarFamily::quadratic(a * id),
                                       core::SmoothScalarFamily::quadratic(b * id)),
            kind, a, b};
  }
  if (kind == "power") {
    double expo = h.get_double("exponent");
    h.finish();
    return {core::SeparableHamiltonian(core::SmoothScalarFamily::power(expo, dim),
                                       core::SmoothScalarFamily::power(expo, dim)),
            kind};
  }
  if (kind == "logshift") {
    double alpha = h.get_double("alpha", 0.0);
    double beta = h.get_double("beta", 0.0);
    h.finish();
    return {core::SeparableHamiltonian(
                core::SmoothScalarFamily::log_shift(alpha, dim),
                core::SmoothScalarFamily::log_shift(beta, dim)),
            kind};
  }
  throw ConfigError("unknown hamiltonian kind '" + kind +
                    "' (expected logcosh, quadratic, power, or logshift)");
}

integrators::Scheme parse_scheme(const std::string& name) {
  if (name == "symplectic") return integrators::Scheme::Symplectic;
  if (name == "forward") return integrators::Scheme::Forward;
  if (name == "backward") return integrators::Scheme::Backward;
  if (name == "exact") return integrators::Scheme::ExactQuadratic;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected symplectic, forward, backward, or exact)");
}

// Truncated series value of the conserved quantity: full symbolic route in
// one dimension, gradient/Hessian route otherwise.
double truncation_value(const core::SeparableHamiltonian& H,
                        const core::PhasePoint& z, double eta, int order) {
  if (H.dim() == 1) return series::truncated_mh_eval(H, z, eta, order);
  return series::general_d_truncation_eval(H, z, eta, order);
}

// Empty CSV still carries the trajectory header so downstream readers see
// the schema even when no steps were requested.
void write_trajectory_header(std::ostream& os, int dim) {
  csv::CsvWriter w(os);
  std::vector<std::string> header;
  header.emplace_back("step");
  for (int i = 0; i < dim; ++i) header.push_back("p_" + std::to_string(i));
  for (int i = 0; i < dim; ++i) header.push_back("q_" + std::to_string(i));
  header.emplace_back("H");
  w.write_row(header);
}

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;
};

// Least-squares line through (x_i, y_i); degenerate when fewer than two
// usable points remain.
FitResult fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  FitResult fit;
  size_t n = std::min(xs.size(), ys.size());
  std::vector<double> x, y;
  for (size_t i = 0; i < n; ++i) {
    if (std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      x.push_back(xs[i]);
      y.push_back(ys[i]);
    }
  }
  if (x.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  double xm = 0, ym = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(x.size());
  ym /= static_cast<double>(x.size());
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx == 0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  return fit;
}

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Context& ctx) {
  require_sections(ctx.cfg, {"", "hamiltonian", "simulate"});
  HamiltonianSpec spec = build_hamiltonian(ctx.cfg);
  const core::SeparableHamiltonian& H = spec.H;
  config::SectionReader sec(ctx.cfg, "simulate");
  core::PhasePoint z0 = parse_phase_point(sec, "z0", H.dim());
  double eta = sec.get_double("eta");
  long steps = sec.get_int("steps", 1000);
  integrators::Scheme scheme = parse_scheme(sec.get_string("scheme", "symplectic"));
  std::vector<long long> orders = sec.get_int_list("orders", {});
  sec.finish();
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(eta > 0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
  for (long long N : orders) {
    if (N < 0) throw ConfigError("truncation orders must be >= 0");
  }

  integrators::StepperConfig stepper(eta, scheme);
  integrators::TrajectoryRecord rec =
      integrators::run_trajectory(H, z0, stepper, steps);

  write_file(ctx.out / "trajectory.csv", [&](std::ostream& os) {
    if (steps == 0) {
      write_trajectory_header(os, H.dim());
    } else {
      rec.write_csv(os);
    }
  });

  ReportTable report("simulate", ctx.cfg.content_hash(), ctx.seed);
  double hmin = rec.energies.front();
  double hmax = hmin;
  for (double v : rec.energies) {
    hmin = std::min(hmin, v);
    hmax = std::max(hmax, v);
  }
  report.add("H", "peak_to_peak", hmax - hmin);
  report.add("H", "final_value", rec.energies.back());

  // For quadratics inside the convergence range, the full conserved quantity
  // has a closed form; its trace rides along with the truncated series.
  bool closed_available = spec.kind == "quadratic" && spec.a * spec.b != 0.0 &&
                          spec.a * spec.b * eta * eta < 1.0;
  std::vector<double> closed_vals;
  if (closed_available) {
    core::Mat id = core::Mat::Identity(H.dim(), H.dim());
    closedform::QuadraticMH closed(spec.a * id, spec.b * id, eta);
    closed_vals.reserve(rec.points.size());
    for (const auto& z : rec.points) closed_vals.push_back(closed.value(z));
  }

  if (!orders.empty() || closed_available) {
    // One value series per truncation order, evaluated along the orbit.
    std::vector<std::vector<double>> values(orders.size());
    for (size_t oi = 0; oi < orders.size(); ++oi) {
      values[oi].reserve(rec.points.size());
      for (const auto& z : rec.points) {
        values[oi].push_back(
            truncation_value(H, z, eta, static_cast<int>(orders[oi])));
      }
    }
    write_file(ctx.out / "mh_values.csv", [&](std::ostream& os) {
      csv::CsvWriter w(os);
      std::vector<std::string> header{"step", "H"};
      for (long long N : orders) header.push_back("mh_" + std::to_string(N));
      if (closed_available) header.emplace_back("mh_closed");
      w.write_row(header);
      if (steps == 0) return;
      for (size_t k = 0; k < rec.points.size(); ++k) {
        std::vector<std::string> row{std::to_string(k),
                                     csv::format_double(rec.energies[k])};
        for (size_t oi = 0; oi < orders.size(); ++oi) {
          row.push_back(csv::format_double(values[oi][k]));
        }
        if (closed_available) row.push_back(csv::format_double(closed_vals[k]));
        w.write_row(row);
      }
    });

    std::vector<double> xs(rec.points.size());
    for (size_t k = 0; k < xs.size(); ++k) xs[k] = static_cast<double>(k);
    svg::SvgPlot plot(720, 480, "Conserved-quantity traces");
    plot.set_axis_labels("step", "value");
    plot.add_line(xs, rec.energies, "H");
    auto add_trace = [&](const std::string& param, const std::vector<double>& vals) {
      double vmin = vals.front();
      double vmax = vmin;
      for (double v : vals) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      report.add(param, "peak_to_peak", vmax - vmin);
      report.add(param, "max_rel_drift",
                 (vmax - vmin) / std::max(1.0, std::abs(vals.front())));
      report.add(param, "final_value", vals.back());
      plot.add_line(xs, vals, param);
    };
    for (size_t oi = 0; oi < orders.size(); ++oi) {
      add_trace("N=" + std::to_string(orders[oi]), values[oi]);
    }
    if (closed_available) add_trace("closed", closed_vals);
    write_file(ctx.out / "mh_orders.svg",
               [&](std::ostream& os) { plot.write(os); });
  }

  write_file(ctx.out / "simulate_report.csv",
             [&](std::ostream& os) { report.write(os); });
  return 0;
}

// ---------------------------------------------------------------------------
// order-sweep

int cmd_order_sweep(const Context& ctx) {
  require_sections(ctx.cfg, {"", "hamiltonian", "sweep"});
  HamiltonianSpec spec = build_hamiltonian(ctx.cfg);
  const core::SeparableHamiltonian& H = spec.H;
  config::SectionReader sec(ctx.cfg, "sweep");
  core::PhasePoint z0 = parse_phase_point(sec, "z0", H.dim());
  std::vector<double> etas = sec.get_double_list("etas");
  long steps = sec.get_int("steps", 1000);
  std::vector<long long> orders = sec.get_int_list("orders", {0, 1, 2, 3});
  sec.finish();
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (etas.size() < 3) {
    throw ConfigError("order-sweep needs at least 3 eta grid points, got " +
                      std::to_string(etas.size()));
  }
  for (double e : etas) {
    if (!(e > 0)) throw ConfigError("eta grid entries must be positive");
  }

  // err[oi][ei] = worst deviation of the order-N value along the orbit.
  std::vector<std::vector<double>> err(orders.size(),
                                       std::vector<double>(etas.size(), 0.0));
  parallel_grid(ctx.jobs, static_cast<int>(etas.size()), [&](int ei) {
    double eta = etas[static_cast<size_t>(ei)];
    integrators::StepperConfig stepper(eta, integrators::Scheme::Symplectic);
    integrators::TrajectoryRecord rec =
        integrators::run_trajectory(H, z0, stepper, steps);
    for (size_t oi = 0; oi < orders.size(); ++oi) {
      int N = static_cast<int>(orders[oi]);
      double ref = truncation_value(H, z0, eta, N);
      double worst = 0.0;
      for (const auto& z : rec.points) {
        worst = std::max(worst, std::abs(truncation_value(H, z, eta, N) - ref));
      }
      err[oi][static_cast<size_t>(ei)] = worst;
    }
  });

  ReportTable report("order-sweep", ctx.cfg.content_hash(), ctx.seed);
  svg::SvgPlot plot(720, 480, "Deviation scaling");
  plot.set_axis_labels("log10 eta", "log10 max deviation");
  for (size_t oi = 0; oi < orders.size(); ++oi) {
    int N = static_cast<int>(orders[oi]);
    std::string param = "N=" + std::to_string(N);
    // Deviations at rounding scale make the log-log fit meaningless; such
    // grid points are flagged instead of fitted.
    bool degenerate = false;
    std::vector<double> lx, ly;
    for (size_t ei = 0; ei < etas.size(); ++ei) {
      double scale = std::max(1.0, std::abs(truncation_value(H, z0, etas[ei], N)));
      if (err[oi][ei] <= 1e-14 * scale) {
        degenerate = true;
        continue;
      }
      lx.push_back(std::log(etas[ei]));
      ly.push_back(std::log(err[oi][ei]));
    }
    FitResult fit = fit_line(lx, ly);
    degenerate = degenerate || fit.degenerate;
    report.add(param, "degenerate_fit", degenerate ? 1.0 : 0.0);
    if (!fit.degenerate) {
      report.add(param, "slope", fit.slope);
      report.add(param, "intercept", fit.intercept);
      // Empirical prefactor when the decay is forced to the expected
      // exponent N + 2, comparable against the tabulated bound.
      double acc = 0.0;
      for (size_t i = 0; i < lx.size(); ++i) {
        acc += ly[i] - (N + 2) * lx[i];
      }
      report.add(param, "phi_hat",
                 std::exp(acc / static_cast<double>(lx.size())));
    }
    if (N <= 10) {
      report.add(param, "phi_bound",
                 series::phi_bound(N).convert_to<double>());
    }
    if (!lx.empty()) {
      std::vector<double> px(lx.size()), py(ly.size());
      for (size_t i = 0; i < lx.size(); ++i) {
        px[i] = lx[i] / std::log(10.0);
        py[i] = ly[i] / std::log(10.0);
      }
      plot.add_line(px, py, param);
    }
  }
  write_file(ctx.out / "order_sweep_report.csv",
             [&](std::ostream& os) { report.write(os); });
  write_file(ctx.out / "order_sweep.svg",
             [&](std::ostream& os) { plot.write(os); });
  return 0;
}

// ---------------------------------------------------------------------------
// cancel-verify / phi / dump

int cmd_cancel_verify(int order, std::ostream& os) {
  int effective = std::min(order, kSymbolicOrderBudget);
  series::CancellationReport rep = series::cancellation_check(effective);
  int shown = rep.pass ? effective : rep.first_failure_diagonal;
  for (int i = 0; i <= shown; ++i) {
    bool failed_here = !rep.pass && i == rep.first_failure_diagonal;
    os << "diagonal " << i << ": "
       << (failed_here ? "NONZERO residual" : "exact zero") << "\n";
    if (failed_here) {
      os << "  residual l1 = " << rat_str(rep.residual.l1()) << "\n";
    }
  }
  if (rep.pass) {
    os << "cancellation holds through diagonal " << effective << "\n";
  }
  if (order > kSymbolicOrderBudget) {
    throw ResourceBudgetExceeded(
        "order " + std::to_string(order) + " exceeds the symbolic budget (" +
        std::to_string(kSymbolicOrderBudget) + "); partial table above");
  }
  return rep.pass ? 0 : 1;
}

int cmd_phi(int order, std::ostream& os) {
  int effective = std::min(order, kSymbolicOrderBudget);
  for (int n = 0; n <= effective; ++n) {
    os << "Phi(" << n << ") = " << rat_str(series::phi_bound(n)) << "\n";
  }
  if (order > kSymbolicOrderBudget) {
    throw ResourceBudgetExceeded(
        "order " + std::to_string(order) + " exceeds the symbolic budget (" +
        std::to_string(kSymbolicOrderBudget) + "); partial table above");
  }
  return 0;
}

int cmd_dump(int order, std::ostream& os) {
  if (order > kSymbolicOrderBudget) {
    throw ResourceBudgetExceeded("order " + std::to_string(order) +
                                 " exceeds the symbolic budget (" +
                                 std::to_string(kSymbolicOrderBudget) + ")");
  }
  for (const auto& line : series::dump_correction(order)) {
    os << line << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// regret

core::Mat random_payoff(std::mt19937_64& rng, int rows) {
  // Well-conditioned similarity with a nonzero real spectrum, so symmetric
  // factors always exist.
  core::Mat S = core::Mat::Identity(rows, rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < rows; ++j) {
      double r = u01(rng);
      S(i, j) += 0.3 * (2.0 * r - 1.0);
    }
  }
  core::Vec lam(rows);
  for (int i = 0; i < rows; ++i) {
    double sign_draw = u01(rng);
    double mag = 0.5 + u01(rng);
    lam[i] = (sign_draw < 0.5 ? -1.0 : 1.0) * mag;
  }
  core::Mat D = lam.asDiagonal();
  return S * D * S.fullPivLu().solve(core::Mat::Identity(rows, rows));
}

int cmd_regret(const Context& ctx) {
  require_sections(ctx.cfg, {"", "game", "regret"});
  config::SectionReader gsec(ctx.cfg, "game");
  std::string kind = gsec.get_string("kind", "random");
  bool decompose = gsec.get_bool("decompose", true);
  core::Mat A;
  if (kind == "random") {
    int d = static_cast<int>(gsec.get_int("d", 2));
    if (d < 1) throw ConfigError("game dimension must be >= 1");
    std::mt19937_64 rng(ctx.seed);
    A = random_payoff(rng, d);
  } else if (kind == "matrix") {
    int rows = static_cast<int>(gsec.get_int("rows"));
    int cols = static_cast<int>(gsec.get_int("cols"));
    std::vector<double> entries = gsec.get_double_list("payoff");
    if (rows < 1 || cols < 1 ||
        entries.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
      throw ConfigError("payoff needs rows*cols entries");
    }
    A = core::Mat(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        A(i, j) = entries[static_cast<size_t>(i) * static_cast<size_t>(cols) +
                          static_cast<size_t>(j)];
      }
    }
  } else {
    throw ConfigError("unknown game kind '" + kind +
                      "' (expected random or matrix)");
  }
  gsec.finish();

  config::SectionReader rsec(ctx.cfg, "regret");
  std::vector<long long> k_grid = rsec.get_int_list("k_grid", {100, 1000, 10000});
  double c = rsec.get_double("c", 1.0);
  long long schedule_n = rsec.get_int("schedule_n", 1);
  rsec.finish();
  if (k_grid.empty()) throw ConfigError("k_grid must not be empty");
  for (long long k : k_grid) {
    if (k < 1) throw ConfigError("k_grid entries must be >= 1");
  }
  if (!(c > 0)) throw ConfigError("schedule constant c must be positive");
  if (schedule_n < 0) throw ConfigError("schedule_n must be >= 0");

  games::GameInstance game =
      games::make_game(A, core::Regularizer::negative_entropy(static_cast<int>(A.rows())),
                       core::Regularizer::negative_entropy(static_cast<int>(A.cols())),
                       decompose);
  bool have_factors = game.payoff.U.size() > 0;

  core::Vec a0 = core::Vec::Constant(A.rows(), 1.0 / static_cast<double>(A.rows()));
  core::Vec b0 = core::Vec::Constant(A.cols(), 1.0 / static_cast<double>(A.cols()));

  ReportTable report("regret", ctx.cfg.content_hash(), ctx.seed);
  std::vector<double> gap_by_k(k_grid.size(), 0.0);
  parallel_grid(ctx.jobs, static_cast<int>(k_grid.size()), [&](int ki) {
    long K = static_cast<long>(k_grid[static_cast<size_t>(ki)]);
    double eta =
        c * std::pow(static_cast<double>(K),
                     -1.0 / (static_cast<double>(schedule_n) + 2.0));
    games::StrategyPair start(a0, b0);
    games::AmdTrajectory traj = games::run_amd(game, start, eta, K);
    std::string param = "K=" + std::to_string(K);
    double r_total = games::total_regret(game, traj.pairs);
    double avg_gap = games::average_iterate_gap(game, traj.pairs, K);
    gap_by_k[static_cast<size_t>(ki)] = avg_gap;
    report.add(param, "eta", eta);
    report.add(param, "total_regret", r_total);
    report.add(param, "avg_gap", avg_gap);
    report.add(param, "gap_regret_residual",
               games::verify_gap_regret_identity(game, traj.pairs, K));
    report.add(param, "conjugacy_residual",
               games::conjugacy_residual(game, traj));
    if (have_factors) {
      games::StrategyPair comparator(a0, b0);
      double lhs = games::cumulative_regret(game, traj.pairs, comparator);
      double rhs = games::lemma_regret_formula(game, traj, comparator, K);
      report.add(param, "regret_formula_residual",
                 std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    write_file(ctx.out / ("regret_K" + std::to_string(K) + ".csv"),
               [&](std::ostream& os) { games::write_amd_csv(os, game, traj); });
  });

  if (k_grid.size() >= 2) {
    std::vector<double> lk(k_grid.size()), lg(k_grid.size());
    for (size_t i = 0; i < k_grid.size(); ++i) {
      lk[i] = std::log(static_cast<double>(k_grid[i]));
      lg[i] = gap_by_k[i] > 0 ? std::log(gap_by_k[i])
                              : std::numeric_limits<double>::quiet_NaN();
    }
    FitResult fit = fit_line(lk, lg);
    if (!fit.degenerate) {
      report.add("schedule", "gap_slope", fit.slope);
    }
    svg::SvgPlot plot(720, 480, "Average-iterate gap");
    plot.set_axis_labels("log10 K", "log10 gap");
    std::vector<double> px(lk.size()), py(lg.size());
    for (size_t i = 0; i < lk.size(); ++i) {
      px[i] = lk[i] / std::log(10.0);
      py[i] = lg[i] / std::log(10.0);
    }
    plot.add_line(px, py, "avg gap");
    write_file(ctx.out / "gap_vs_k.svg",
               [&](std::ostream& os) { plot.write(os); });
  }

  write_file(ctx.out / "regret_report.csv",
             [&](std::ostream& os) { report.write(os); });
  return 0;
}

// ---------------------------------------------------------------------------
// quad-mh

int cmd_quad_mh(const Context& ctx) {
  require_sections(ctx.cfg, {"", "quad"});
  config::SectionReader sec(ctx.cfg, "quad");
  double a = sec.get_double("a", 1.0);
  double b = sec.get_double("b", 1.0);
  double ab = a * b;
  double eta_max_default = ab > 0 ? 0.99 / std::sqrt(ab) : 1.0;
  double eta_min = sec.get_double("eta_min", 0.0);
  double eta_max = sec.get_double("eta_max", eta_max_default);
  long samples = sec.get_int("samples", 200);
  sec.finish();
  if (samples < 2) throw ConfigError("samples must be >= 2");
  if (!(eta_max > eta_min) || eta_min < 0) {
    throw ConfigError("need 0 <= eta_min < eta_max");
  }
  if (ab > 0 && eta_max * eta_max * ab >= 1.0) {
    throw ConfigError("eta_max is outside the convergence range for a*b = " +
                      csv::format_double(ab));
  }

  std::vector<double> xs(static_cast<size_t>(samples)),
      ys(static_cast<size_t>(samples));
  for (long i = 0; i < samples; ++i) {
    double eta = eta_min + (eta_max - eta_min) * static_cast<double>(i) /
                               static_cast<double>(samples - 1);
    xs[static_cast<size_t>(i)] = eta;
    ys[static_cast<size_t>(i)] = closedform::t_function(eta, ab);
  }
  write_file(ctx.out / "quad_mh.csv", [&](std::ostream& os) {
    csv::CsvWriter w(os);
    w.write_row({"eta", "t"});
    for (size_t i = 0; i < xs.size(); ++i) {
      w.write_row({csv::format_double(xs[i]), csv::format_double(ys[i])});
    }
  });
  svg::SvgPlot plot(720, 480, "Rescaling factor");
  plot.set_axis_labels("eta", "T");
  plot.add_line(xs, ys, "a*b = " + csv::format_double(ab));
  write_file(ctx.out / "quad_mh.svg", [&](std::ostream& os) { plot.write(os); });

  ReportTable report("quad-mh", ctx.cfg.content_hash(), ctx.seed);
  report.add("grid", "samples", static_cast<double>(samples));
  report.add("grid", "eta_max", eta_max);
  report.add("grid", "t_at_eta_max", ys.back());
  write_file(ctx.out / "quad_mh_report.csv",
             [&](std::ostream& os) { report.write(os); });
  return 0;
}

// ---------------------------------------------------------------------------
// examples-fig

int cmd_examples_fig(const Context& ctx) {
  require_sections(ctx.cfg, {"", "fig"});
  config::SectionReader sec(ctx.cfg, "fig");
  double power = sec.get_double("power");
  double eta = sec.get_double("eta", 1.0);
  long steps = sec.get_int("steps", 10000);
  std::vector<double> start_vals = sec.get_double_list("starts", {1.0, 1.0});
  double box_radius = sec.get_double("box_radius", 100.0);
  sec.finish();
  if (power != 1.5 && power != 2.0 && power != 4.0) {
    throw ConfigError("power must be one of 1.5, 2, 4");
  }
  if (eta != 1.0) throw ConfigError("this experiment is defined at eta = 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (start_vals.empty() || start_vals.size() % 2 != 0) {
    throw ConfigError("starts must list (p, q) pairs");
  }
  if (!(box_radius > 0)) throw ConfigError("box_radius must be positive");

  // The orbit map normalizes the power by its exponent, so the force is
  // |x|^(power-1) sign(x); this is the map whose orbits close at eta = 1.
  auto value = [power](const core::Vec& x) {
    return std::pow(std::abs(x[0]), power) / power;
  };
  auto gradient = [power](const core::Vec& x) {
    core::Vec g(1);
    g[0] = std::pow(std::abs(x[0]), power - 1.0) *
           (x[0] > 0 ? 1.0 : x[0] < 0 ? -1.0 : 0.0);
    return g;
  };
  core::SeparableHamiltonian H(
      core::SmoothScalarFamily::custom(1, value, gradient),
      core::SmoothScalarFamily::custom(1, value, gradient));

  size_t n_starts = start_vals.size() / 2;
  std::vector<integrators::TrajectoryRecord> orbits(n_starts);
  parallel_grid(ctx.jobs, static_cast<int>(n_starts), [&](int si) {
    core::Vec p(1), q(1);
    p[0] = start_vals[2 * static_cast<size_t>(si)];
    q[0] = start_vals[2 * static_cast<size_t>(si) + 1];
    integrators::StepperConfig stepper(eta, integrators::Scheme::Symplectic);
    orbits[static_cast<size_t>(si)] = integrators::run_trajectory(
        H, core::PhasePoint(std::move(p), std::move(q)), stepper, steps);
  });

  ReportTable report("examples-fig", ctx.cfg.content_hash(), ctx.seed);
  bool all_bounded = true;
  write_file(ctx.out / "orbits.csv", [&](std::ostream& os) {
    csv::CsvWriter w(os);
    w.write_row({"start", "step", "p", "q", "H"});
    for (size_t si = 0; si < n_starts; ++si) {
      const auto& rec = orbits[si];
      for (size_t k = 0; k < rec.points.size(); ++k) {
        w.write_row({std::to_string(si), std::to_string(k),
                     csv::format_double(rec.points[k].p[0]),
                     csv::format_double(rec.points[k].q[0]),
                     csv::format_double(rec.energies[k])});
      }
    }
  });

  svg::SvgPlot plot(560, 560, "Orbit point clouds");
  plot.set_axis_labels("p", "q");
  for (size_t si = 0; si < n_starts; ++si) {
    const auto& rec = orbits[si];
    double p0 = rec.points.front().p[0];
    double q0 = rec.points.front().q[0];
    double max_radius = 0.0;
    bool finite = true;
    std::vector<double> ps, qs;
    ps.reserve(rec.points.size());
    qs.reserve(rec.points.size());
    for (const auto& z : rec.points) {
      ps.push_back(z.p[0]);
      qs.push_back(z.q[0]);
      if (!std::isfinite(z.p[0]) || !std::isfinite(z.q[0])) finite = false;
      max_radius = std::max(max_radius, std::hypot(z.p[0] - p0, z.q[0] - q0));
    }
    std::string param = "start" + std::to_string(si);
    bool bounded = finite && max_radius <= box_radius;
    all_bounded = all_bounded && bounded;
    report.add(param, "max_radius", max_radius);
    report.add(param, "bounded", bounded ? 1.0 : 0.0);
    plot.add_scatter(ps, qs,
                     "(" + csv::format_double(p0) + ", " +
                         csv::format_double(q0) + ")");
  }
  write_file(ctx.out / "orbits.svg", [&](std::ostream& os) { plot.write(os); });
  write_file(ctx.out / "examples_report.csv",
             [&](std::ostream& os) { report.write(os); });
  if (!all_bounded) {
    std::cerr << "examples-fig: an orbit left the declared box (radius "
              << csv::format_double(box_radius) << ")\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// combinatorics-verify

int cmd_combinatorics_verify(std::ostream& os) {
  int failures = 0;
  auto check = [&](const std::string& name, bool pass) {
    os << (pass ? "PASS " : "FAIL ") << name << "\n";
    if (!pass) ++failures;
  };

  {
    bool ok = combinat::stirling2(3, 2) == 3;
    for (int k = 0; k <= 10 && ok; ++k) {
      ok = combinat::stirling2(k, k) == 1 &&
           combinat::stirling2(k, 0) == (k == 0 ? 1 : 0);
    }
    check("stirling2 pins (S(3,2), S(k,k), S(k,0))", ok);
  }
  {
    check("fubini pins (a_0 = 1, a_3 = 13)",
          combinat::fubini(0) == 1 && combinat::fubini(3) == 13);
  }
  {
    bool ok = true;
    for (int k = 1; k <= 10 && ok; ++k) {
      for (int n = 1; n <= k && ok; ++n) {
        Int rhs = factorial(n) * pow(Int(2), static_cast<unsigned>(k)) *
                  combinat::stirling2(k, n);
        ok = combinat::lemma1_lhs(k, n) == rhs;
      }
    }
    check("composition identity k <= 10", ok);
  }
  {
    // log-space comparison; the margin is several orders of magnitude.
    bool ok = true;
    for (int k = 1; k <= 20 && ok; ++k) {
      double lhs = std::log(combinat::fubini(k - 1).convert_to<double>());
      double rhs = std::lgamma(static_cast<double>(k)) -
                   static_cast<double>(k) * std::log(std::log(2.0));
      ok = lhs < rhs;
    }
    check("ordered-partition growth bound k <= 20", ok);
  }
  {
    // Exponential generating function partial sum against 1/(2 - e^x) at
    // x = 0.3, within the exact geometric tail envelope.
    double x = 0.3;
    double partial = 0.0;
    double xn = 1.0;
    for (int n = 0; n <= 15; ++n) {
      partial += combinat::fubini(n).convert_to<double>() * xn /
                 factorial(n).convert_to<double>();
      xn *= x;
    }
    double closed = 1.0 / (2.0 - std::exp(x));
    double ratio = x / std::log(2.0);
    double tail = std::pow(ratio, 16.0) / (std::log(2.0) * (1.0 - ratio));
    check("generating function at x = 0.3",
          std::abs(partial - closed) <= tail);
  }
  {
    bool ok = true;
    for (double r : {0.5, 2.0, 10.0}) {
      for (int k = 1; k <= 200 && ok; ++k) {
        ok = combinat::backseat_sum(k, r) <= combinat::backseat_bound(k, r);
      }
    }
    check("backseat sum below bound (k <= 200, r in {0.5, 2, 10})", ok);
  }
  {
    int k = 200;
    double r = 2.0;
    double base = (2.0 + r + std::sqrt(r * (4.0 + r))) / 2.0;
    double gap = std::abs(combinat::backseat_log_sum(k, r) /
                              static_cast<double>(k) -
                          std::log(base));
    check("backseat growth-rate gap at k = 200",
          gap <= std::log(static_cast<double>(k)) / static_cast<double>(k) + 0.05);
  }
  {
    bool ok = true;
    for (int n = 0; n <= 20 && ok; ++n) {
      if (n == 1) continue;  // the two recurrences use opposite sign families
      ok = combinat::bernoulli(n) == combinat::bernoulli_via_stirling(n);
    }
    check("bernoulli recurrences agree (n <= 20, n != 1)", ok);
  }
  {
    auto rep = combinat::quadratic_ipb_bound_check(Rat(1), Rat(1), 6);
    check("quadratic bracket bound to weight 6", rep.pass);
  }
  {
    bool ok = true;
    for (int n = 1; n <= 4 && ok; ++n) {
      Rat expected = Rat(Int(n + 1) * factorial(2 * n) *
                         pow(Int(4), static_cast<unsigned>(2 * n - 1)));
      // The bracket value alternates in sign; the growth law pins |value|.
      ok = abs(combinat::quartic_alternating_ipb(n)) == expected;
    }
    check("quartic alternating bracket growth n <= 4", ok);
  }

  if (failures == 0) {
    os << "all checks passed\n";
  } else {
    os << "FAILURES: " << failures << "\n";
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// argument parsing and dispatch

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Symplectic game-dynamics experiment runner"};
  app.require_subcommand(1);

  std::map<std::string, CommonArgs> args;
  std::map<std::string, CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* sub, const std::string& name, bool with_config) {
    CommonArgs& a = args[name];
    if (with_config) {
      sub->add_option("--config", a.config_path, "experiment config file");
    }
    sub->add_option("--out", a.out_dir, "output directory (default '.')");
    seed_opts[name] = sub->add_option("--seed", a.seed, "64-bit PRNG seed");
    sub->add_option("--jobs", a.jobs, "worker threads for grid runs")
        ->check(CLI::PositiveNumber);
    return sub;
  };

  auto* simulate = add_common(
      app.add_subcommand("simulate",
                         "integrate one trajectory; write CSV/SVG artifacts"),
      "simulate", true);
  simulate->get_option("--config")->required();

  auto* sweep = add_common(
      app.add_subcommand("order-sweep",
                         "fit deviation-vs-stepsize slopes per truncation order"),
      "order-sweep", true);
  sweep->get_option("--config")->required();

  int cancel_order = 5;
  auto* cancel = add_common(
      app.add_subcommand("cancel-verify",
                         "verify the exact cancellation diagonals"),
      "cancel-verify", false);
  cancel->add_option("--order", cancel_order, "highest diagonal to check")
      ->check(CLI::NonNegativeNumber);

  int phi_order = 5;
  auto* phi = add_common(
      app.add_subcommand("phi", "print the exact coefficient-mass table"),
      "phi", false);
  phi->add_option("--order", phi_order, "highest order to print")
      ->check(CLI::NonNegativeNumber);

  auto* regret = add_common(
      app.add_subcommand("regret",
                         "alternating-update regret and gap experiments"),
      "regret", true);
  regret->get_option("--config")->required();

  auto* quad = add_common(
      app.add_subcommand("quad-mh", "sample the quadratic rescaling factor"),
      "quad-mh", true);

  auto* fig = add_common(
      app.add_subcommand("examples-fig", "orbit point clouds for power maps"),
      "examples-fig", true);
  fig->get_option("--config")->required();

  auto* comb = add_common(
      app.add_subcommand("combinatorics-verify",
                         "pass/fail table for the exact counting identities"),
      "combinatorics-verify", false);

  int dump_order = 0;
  auto* dump = add_common(
      app.add_subcommand("dump", "print one correction term as sorted monomials"),
      "dump", false);
  dump->add_option("--order", dump_order, "correction order to print")
      ->required()
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [name, a] : args) {
    a.seed_given = seed_opts[name]->count() > 0;
  }

  try {
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(make_context(args["simulate"], "simulate"));
    }
    if (app.got_subcommand(sweep)) {
      return cmd_order_sweep(make_context(args["order-sweep"], "order-sweep"));
    }
    if (app.got_subcommand(cancel)) {
      return cmd_cancel_verify(cancel_order, std::cout);
    }
    if (app.got_subcommand(phi)) {
      return cmd_phi(phi_order, std::cout);
    }
    if (app.got_subcommand(regret)) {
      return cmd_regret(make_context(args["regret"], "regret"));
    }
    if (app.got_subcommand(quad)) {
      return cmd_quad_mh(make_context(args["quad-mh"], "quad-mh"));
    }
    if (app.got_subcommand(fig)) {
      return cmd_examples_fig(make_context(args["examples-fig"], "examples-fig"));
    }
    if (app.got_subcommand(comb)) {
      return cmd_combinatorics_verify(std::cout);
    }
    if (app.got_subcommand(dump)) {
      return cmd_dump(dump_order, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mh::cli
