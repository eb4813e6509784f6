#ifndef MH_CLOSEDFORM_HPP
#define MH_CLOSEDFORM_HPP

#include "mh/core.hpp"

namespace mh::closedform {

// Scalar profile of the summed correction series:
//   arcsin(sqrt(u)) / sqrt(u (1 - u))    for u = lambda eta^2 > 0,
//   arcsinh(sqrt(-u)) / sqrt(-u (1 - u)) for u < 0,
//   1 at u = 0 (continuous limit).
// Throws ConvergenceRadiusExceeded when u >= 1.
double t_function(double eta, double lambda);

// F = a p^2, G = b q^2 in one dimension: T(eta, ab) * (a p^2 + b q^2 - 2 a b eta p q).
// Requires ab != 0 and a b eta^2 < 1.
double mh_quadratic_1d(double a, double b, double p, double q, double eta);

// The conserved quadratic a p^2 + b q^2 - 2 a b eta p q.
double conserved_s_1d(double a, double b, double p, double q, double eta);

// Multivariate quadratic case F = p^T B p, G = q^T C q with B, C symmetric.
// Holds the eigendecomposition BC = Q^{-1} Lambda Q plus the assembled
// quadratic forms; evaluation is then three small quadratic products.
class QuadraticMH {
 public:
  QuadraticMH(const core::Mat& B, const core::Mat& C, double eta);

  double value(const core::PhasePoint& z) const;

  const core::Mat& b() const { return b_; }
  const core::Mat& c() const { return c_; }
  // Columns of q_inverse are the eigenvectors of BC.
  const core::Mat& q_inverse() const { return v_; }
  const core::Vec& eigenvalues() const { return lambda_; }
  core::Vec t_values() const;  // T(eta, lambda_i) entrywise
  double eta() const { return eta_; }

 private:
  core::Mat b_, c_;
  core::Mat v_, v_inv_;
  core::Vec lambda_;
  double eta_ = 0.0;
  core::Mat form_pp_, form_qq_, form_pq_;  // H = p'form_pp p + q'form_qq q - 2 eta p'form_pq q
};

// Convenience wrapper: builds the decomposition and evaluates once.
double mh_quadratic_multi(const core::Mat& B, const core::Mat& C, const core::PhasePoint& z,
                          double eta);

// 3x3 matrices of u -> {u, F} and u -> {u, G} on the basis {p^2, q^2, pq},
// with their closed-form exponentials (both operators are nilpotent).
struct AdjointRep1D {
  double a = 0.0;
  double b = 0.0;
  Eigen::Matrix3d ad_f;
  Eigen::Matrix3d ad_g;

  AdjointRep1D(double a_in, double b_in);
  Eigen::Matrix3d exp_ad_f(double t) const;
  Eigen::Matrix3d exp_ad_g(double t) const;
};

struct QuadCoeffs {
  double c_pp = 0.0;
  double c_qq = 0.0;
  double c_pq = 0.0;
};

// Coefficient route through the operator integral: averages the logarithm
// series sum_j ((I - M(t))^j / (j + 1)) applied to the coordinates of
// G + e^{t ad_G} F over t in [0, eta], by adaptive Simpson quadrature.
// M(t) = e^{t ad_G} e^{t ad_F}; requires ||M(t) - I|| < 1 on the interval.
QuadCoeffs integral_form_quadratic_1d(double a, double b, double eta,
                                      double quad_tol = 1e-10);

// The same coefficients from the summed form: T(eta, ab) * (a, b, -2 a b eta).
QuadCoeffs closed_form_coeffs_1d(double a, double b, double eta);

// Integrates z' = Omega grad H~ from 0 to eta with RK4 (eta/substeps per
// step) and returns the infinity-norm gap to one discrete update from z.
double interpolating_flow_check_1d(double a, double b, const core::PhasePoint& z,
                                   double eta, int substeps = 2048);

// Solution operator of the same linear flow, for the matrix-level check
// against [[1, -2 b eta], [2 a eta, 1 - 4 a b eta^2]].
Eigen::Matrix2d interpolating_flow_matrix_1d(double a, double b, double eta,
                                             int substeps = 2048);

// Logarithmic pair F = log(alpha + p), G = log(beta + q).
// conserved_l returns L(p, q) = log(alpha + p) + log(beta + q), which the
// discrete update preserves exactly; mh_log evaluates the published closed
// form in terms of L. Requires alpha + p > 0, beta + q > 0; mh_log further
// requires eta > 0 and eta / L < 1.
double conserved_l(double alpha, double beta, double p, double q);
double mh_log(double alpha, double beta, double p, double q, double eta);

}  // namespace mh::closedform

#endif  // MH_CLOSEDFORM_HPP
