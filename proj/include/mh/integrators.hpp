#ifndef MH_INTEGRATORS_HPP
#define MH_INTEGRATORS_HPP

#include <iosfwd>
#include <vector>

#include "mh/core.hpp"

namespace mh::integrators {

enum class Scheme { Forward, Backward, Symplectic, ExactQuadratic };

struct StepperConfig {
  double eta = 0.1;
  Scheme scheme = Scheme::Symplectic;
  double implicit_tol = 1e-13;
  int implicit_max_iter = 200;
  StepperConfig() = default;
  StepperConfig(double eta_in, Scheme scheme_in);
};

// p' = p - eta grad G(q); q' = q + eta grad F(p'). Fully explicit because
// the Hamiltonian is separable.
core::PhasePoint symplectic_euler_step(const core::SeparableHamiltonian& H,
                                       const core::PhasePoint& z, double eta);

// p' = p - eta grad G(q); q' = q + eta grad F(p).
core::PhasePoint forward_euler_step(const core::SeparableHamiltonian& H,
                                    const core::PhasePoint& z, double eta);

struct ImplicitResult {
  core::PhasePoint z;
  int iterations = 0;
};

// Solves p' = p - eta grad G(q'), q' = q + eta grad F(p') by damped
// fixed-point iteration to residual <= implicit_tol.
ImplicitResult backward_euler_step(const core::SeparableHamiltonian& H,
                                   const core::PhasePoint& z, const StepperConfig& cfg);

// Closed-form update for F = p^T B p, G = q^T C q:
// p' = p - 2 eta C q; q' = q + 2 eta B p'.
core::PhasePoint exact_quadratic_step(const core::Mat& B, const core::Mat& C,
                                      const core::PhasePoint& z, double eta);

// 2x2 one-step matrix of the d = 1 quadratic scheme:
// [[1, -2 b eta], [2 a eta, 1 - 4 a b eta^2]].
Eigen::Matrix2d quadratic_step_matrix_1d(double a, double b, double eta);

struct TrajectoryRecord {
  std::vector<core::PhasePoint> points;   // steps + 1 entries
  std::vector<double> energies;           // H(z_k), same length as points
  StepperConfig config;
  std::vector<int> implicit_iterations;   // one per step; 0 for explicit schemes

  long steps() const { return static_cast<long>(points.size()) - 1; }
  // Columns: step, p_0..p_{d-1}, q_0..q_{d-1}, H.
  void write_csv(std::ostream& os) const;
};

// Applies the configured stepper K times from z0, recording every point and
// H(z_k). Step failures are rethrown with the failing index prepended.
TrajectoryRecord run_trajectory(const core::SeparableHamiltonian& H,
                                const core::PhasePoint& z0, const StepperConfig& cfg,
                                long steps);

// Finite-difference Jacobian of the symplectic Euler one-step map at z,
// and the symplecticity defect || J Omega J^T - Omega ||_inf.
double symplecticity_defect(const core::SeparableHamiltonian& H, const core::PhasePoint& z,
                            double eta);

}  // namespace mh::integrators

#endif  // MH_INTEGRATORS_HPP
