#ifndef MH_CORE_HPP
#define MH_CORE_HPP

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mh/errors.hpp"

namespace mh::core {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Canonical symplectic matrix [[0, -I], [I, 0]] of size 2d.
Mat omega_matrix(int d);

// Skew block matrix [[0, -M], [M^T, 0]] built from a payoff matrix.
Mat omega_skew(const Mat& M);

// A point z = (p, q) in phase space. Components are validated finite and
// the two blocks share one dimension d >= 1.
struct PhasePoint {
  Vec p, q;
  PhasePoint(Vec p_in, Vec q_in);
  PhasePoint(double p_scalar, double q_scalar);
  int dim() const { return static_cast<int>(p.size()); }
};

enum class ScalarKind { Quadratic, LogCosh, Log, Power, Custom };

// A smooth scalar function of a d-vector together with derivative oracles.
// All built-ins supply value, gradient, Hessian for any d; in d = 1 they
// additionally supply scalar derivatives up to max_order (arbitrary order
// except LogCosh, which is generated to order 12).
class SmoothScalarFamily {
 public:
  // x^T B x with B symmetrized on construction.
  static SmoothScalarFamily quadratic(const Mat& coef);
  // sum_i log cosh x_i.
  static SmoothScalarFamily log_cosh(int dim);
  // sum_i log(shift + x_i) on shift + x_i > 0.
  static SmoothScalarFamily log_shift(double shift, int dim);
  // sum_i |x_i|^exponent, exponent > 1.
  static SmoothScalarFamily power(double exponent, int dim);
  // General-d custom oracles; hessian may be empty (max_order then 1).
  static SmoothScalarFamily custom(int dim, std::function<double(const Vec&)> value,
                                   std::function<Vec(const Vec&)> gradient,
                                   std::function<Mat(const Vec&)> hessian = {});
  // d = 1 custom: value plus derivative oracles of order 1..derivs.size().
  static SmoothScalarFamily custom1d(std::function<double(double)> value,
                                     std::vector<std::function<double(double)>> derivs);

  ScalarKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int max_order() const { return max_order_; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  // d = 1 derivative of the given order (order 0 is the value).
  double derivative1d(double x, int order) const;

  // Coefficient matrix for the Quadratic kind.
  const Mat& coef() const;

 private:
  SmoothScalarFamily() = default;
  ScalarKind kind_ = ScalarKind::Custom;
  int dim_ = 1;
  int max_order_ = 0;
  Mat coef_;          // Quadratic
  double shift_ = 0;  // Log
  double expo_ = 2;   // Power
  std::function<double(const Vec&)> value_fn_;
  std::function<Vec(const Vec&)> grad_fn_;
  std::function<Mat(const Vec&)> hess_fn_;
  std::vector<std::function<double(double)>> deriv1d_;
};

// H(p, q) = F(p) + G(q).
struct SeparableHamiltonian {
  SmoothScalarFamily F, G;
  SeparableHamiltonian(SmoothScalarFamily F_in, SmoothScalarFamily G_in);
  int dim() const { return F.dim(); }
  double value(const PhasePoint& z) const { return F.value(z.p) + G.value(z.q); }
};

enum class Domain { Simplex, Box, All };

// Strictly convex Legendre-type regularizer with conjugate oracles and a
// domain descriptor. The conjugate gradient inverts the gradient map on the
// domain interior.
class Regularizer {
 public:
  // (1/2) w^T M w with SPD scale M; domain all of R^d.
  static Regularizer half_squared_norm(const Mat& scale);
  // sum_i w_i log w_i on the open probability simplex; the conjugate
  // gradient is the softmax map and the conjugate value is log-sum-exp.
  static Regularizer negative_entropy(int dim);
  static Regularizer custom(int dim, Domain domain,
                            std::function<double(const Vec&)> value,
                            std::function<Vec(const Vec&)> gradient,
                            std::function<double(const Vec&)> conj_value,
                            std::function<Vec(const Vec&)> conj_gradient,
                            std::optional<std::pair<Vec, Vec>> box_bounds = {});

  int dim() const { return dim_; }
  Domain domain() const { return domain_; }
  // Lower/upper bounds; only meaningful for Domain::Box.
  const std::pair<Vec, Vec>& box_bounds() const;

  double value(const Vec& w) const;
  Vec gradient(const Vec& w) const;
  double conjugate_value(const Vec& x) const;
  Vec conjugate_gradient(const Vec& x) const;

  // Throws DomainViolation when w is outside the domain (interior for the
  // simplex).
  void require_in_domain(const Vec& w) const;

 private:
  Regularizer() = default;
  int dim_ = 1;
  Domain domain_ = Domain::All;
  std::optional<std::pair<Vec, Vec>> box_;
  std::function<double(const Vec&)> value_fn_;
  std::function<Vec(const Vec&)> grad_fn_;
  std::function<double(const Vec&)> conj_value_fn_;
  std::function<Vec(const Vec&)> conj_grad_fn_;
};

// Psi(w) - Psi(wt) - <grad Psi(wt), w - wt>. Nonnegative by convexity.
double bregman(const Regularizer& reg, const Vec& w, const Vec& wt);

struct ConjugateReport {
  double max_residual = 0.0;
  bool pass = true;
};

// Max over samples of || conj_grad(grad(w)) - w ||_inf; passes at 1e-10.
ConjugateReport conjugate_pair_check(const Regularizer& reg, const std::vector<Vec>& samples);

// A = U V with U, V real symmetric. 'exact' records whether the
// construction met the product tolerance.
struct PayoffMatrix {
  Mat A, U, V;
  bool exact = false;
};

// Symmetric A returns (A, I). Otherwise uses a real eigendecomposition
// A = Q D Q^-1 and returns U = Q D Q^T, V = (Q Q^T)^-1. Throws
// DecompositionUnavailable for complex or defective spectra.
PayoffMatrix symmetric_decompose(const Mat& A);

}  // namespace mh::core

#endif  // MH_CORE_HPP
