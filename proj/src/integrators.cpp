#include "mh/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mh/csvio.hpp"
#include "mh/errors.hpp"

namespace mh::integrators {

StepperConfig::StepperConfig(double eta_in, Scheme scheme_in)
    : eta(eta_in), scheme(scheme_in) {
  // Zero is allowed and means "stay put"; only negative or nonfinite step
  // sizes are rejected.
  if (!(eta_in >= 0.0) || !std::isfinite(eta_in)) {
    throw DomainViolation("step size must be nonnegative and finite");
  }
}

core::PhasePoint symplectic_euler_step(const core::SeparableHamiltonian& H,
                                       const core::PhasePoint& z, double eta) {
  core::Vec p_next = z.p - eta * H.G.gradient(z.q);
  core::Vec q_next = z.q + eta * H.F.gradient(p_next);
  return core::PhasePoint(std::move(p_next), std::move(q_next));
}

core::PhasePoint forward_euler_step(const core::SeparableHamiltonian& H,
                                    const core::PhasePoint& z, double eta) {
  core::Vec p_next = z.p - eta * H.G.gradient(z.q);
  core::Vec q_next = z.q + eta * H.F.gradient(z.p);
  return core::PhasePoint(std::move(p_next), std::move(q_next));
}

ImplicitResult backward_euler_step(const core::SeparableHamiltonian& H,
                                   const core::PhasePoint& z, const StepperConfig& cfg) {
  if (cfg.eta == 0.0) {
    return ImplicitResult{z, 0};
  }
  core::Vec pc = z.p;
  core::Vec qc = z.q;
  double omega = 1.0;
  double prev_res = std::numeric_limits<double>::infinity();
  double res = prev_res;
  for (int it = 1; it <= cfg.implicit_max_iter; ++it) {
    core::Vec pt = z.p - cfg.eta * H.G.gradient(qc);
    core::Vec qt = z.q + cfg.eta * H.F.gradient(pt);
    res = std::max((pt - pc).lpNorm<Eigen::Infinity>(),
                   (qt - qc).lpNorm<Eigen::Infinity>());
    if (!std::isfinite(res)) {
      throw ImplicitSolveFailed("implicit step diverged", res, it);
    }
    if (res <= cfg.implicit_tol) {
      return ImplicitResult{core::PhasePoint(std::move(pt), std::move(qt)), it};
    }
    if (res > prev_res) {
      omega = std::max(omega * 0.5, 0.0625);
    } else {
      omega = std::min(omega * 1.25, 1.0);
    }
    pc += omega * (pt - pc);
    qc += omega * (qt - qc);
    prev_res = res;
  }
  throw ImplicitSolveFailed("implicit step did not reach tolerance", res,
                            cfg.implicit_max_iter);
}

core::PhasePoint exact_quadratic_step(const core::Mat& B, const core::Mat& C,
                                      const core::PhasePoint& z, double eta) {
  if (B.rows() != z.p.size() || B.cols() != z.p.size() || C.rows() != z.q.size() ||
      C.cols() != z.q.size()) {
    throw DomainViolation("coefficient matrices do not match the phase dimension");
  }
  core::Vec p_next = z.p - 2.0 * eta * (C * z.q);
  core::Vec q_next = z.q + 2.0 * eta * (B * p_next);
  return core::PhasePoint(std::move(p_next), std::move(q_next));
}

Eigen::Matrix2d quadratic_step_matrix_1d(double a, double b, double eta) {
  Eigen::Matrix2d M;
  M << 1.0, -2.0 * b * eta, 2.0 * a * eta, 1.0 - 4.0 * a * b * eta * eta;
  return M;
}

void TrajectoryRecord::write_csv(std::ostream& os) const {
  if (points.empty()) {
    return;
  }
  const long d = points.front().dim();
  csv::CsvWriter w(os);
  std::vector<std::string> header;
  header.emplace_back("step");
  for (long i = 0; i < d; ++i) {
    header.push_back("p_" + std::to_string(i));
  }
  for (long i = 0; i < d; ++i) {
    header.push_back("q_" + std::to_string(i));
  }
  header.emplace_back("H");
  w.write_row(header);
  for (std::size_t k = 0; k < points.size(); ++k) {
    std::vector<std::string> row;
    row.push_back(std::to_string(k));
    for (long i = 0; i < d; ++i) {
      row.push_back(csv::format_double(points[k].p[i]));
    }
    for (long i = 0; i < d; ++i) {
      row.push_back(csv::format_double(points[k].q[i]));
    }
    row.push_back(csv::format_double(energies[k]));
    w.write_row(row);
  }
}

namespace {

std::string step_prefix(long k) { return "step " + std::to_string(k) + ": "; }

}  // namespace

TrajectoryRecord run_trajectory(const core::SeparableHamiltonian& H,
                                const core::PhasePoint& z0, const StepperConfig& cfg,
                                long steps) {
  if (steps < 0) {
    throw DomainViolation("step count must be nonnegative");
  }
  core::Mat B;
  core::Mat C;
  if (cfg.scheme == Scheme::ExactQuadratic) {
    if (H.F.kind() != core::ScalarKind::Quadratic ||
        H.G.kind() != core::ScalarKind::Quadratic) {
      throw DomainViolation("the closed-form scheme needs quadratic F and G");
    }
    B = H.F.coef();
    C = H.G.coef();
  }
  TrajectoryRecord rec;
  rec.config = cfg;
  rec.points.reserve(static_cast<std::size_t>(steps) + 1);
  rec.energies.reserve(static_cast<std::size_t>(steps) + 1);
  rec.implicit_iterations.reserve(static_cast<std::size_t>(steps));
  rec.points.push_back(z0);
  rec.energies.push_back(H.value(z0));
  for (long k = 0; k < steps; ++k) {
    try {
      const core::PhasePoint& z = rec.points.back();
      int iters = 0;
      core::PhasePoint next(0.0, 0.0);
      switch (cfg.scheme) {
        case Scheme::Forward:
          next = forward_euler_step(H, z, cfg.eta);
          break;
        case Scheme::Backward: {
          ImplicitResult r = backward_euler_step(H, z, cfg);
          next = std::move(r.z);
          iters = r.iterations;
          break;
        }
        case Scheme::Symplectic:
          next = symplectic_euler_step(H, z, cfg.eta);
          break;
        case Scheme::ExactQuadratic:
          next = exact_quadratic_step(B, C, z, cfg.eta);
          break;
      }
      rec.energies.push_back(H.value(next));
      rec.points.push_back(std::move(next));
      rec.implicit_iterations.push_back(iters);
    } catch (const ImplicitSolveFailed& e) {
      throw ImplicitSolveFailed(step_prefix(k) + e.what(), e.residual, e.iterations);
    } catch (const DomainViolation& e) {
      throw DomainViolation(step_prefix(k) + e.what());
    } catch (const Error& e) {
      throw Error(step_prefix(k) + e.what());
    }
  }
  return rec;
}

double symplecticity_defect(const core::SeparableHamiltonian& H, const core::PhasePoint& z,
                            double eta) {
  const long d = z.dim();
  const long n = 2 * d;
  auto map = [&](const core::Vec& w) {
    core::PhasePoint zz(w.head(d), w.tail(d));
    core::PhasePoint out = symplectic_euler_step(H, zz, eta);
    core::Vec v(n);
    v << out.p, out.q;
    return v;
  };
  core::Vec w0(n);
  w0 << z.p, z.q;
  const double h = 1e-4 * std::max(1.0, w0.lpNorm<Eigen::Infinity>());
  core::Mat J(n, n);
  for (long j = 0; j < n; ++j) {
    core::Vec e = core::Vec::Zero(n);
    e[j] = 1.0;
    // Fourth-order central difference keeps the truncation error well below
    // the roundoff floor at this h.
    core::Vec col = (8.0 * (map(w0 + h * e) - map(w0 - h * e)) -
                     (map(w0 + 2.0 * h * e) - map(w0 - 2.0 * h * e))) /
                    (12.0 * h);
    J.col(j) = col;
  }
  core::Mat Om = core::omega_matrix(d);
  return (J * Om * J.transpose() - Om).lpNorm<Eigen::Infinity>();
}

}  // namespace mh::integrators
