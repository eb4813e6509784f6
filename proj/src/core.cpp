#include "mh/core.hpp"

#include <algorithm>
#include <cmath>

namespace mh::core {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw OracleFailure(std::string(what) + ": non-finite components");
}

// Coefficient tables of the polynomials P_k with
// d^k/dx^k log cosh x = P_k(tanh x), P_1 = t, P_{k+1} = P_k'(t) (1 - t^2).
// Coefficients are integers; order 12 keeps them far below 2^53.
const std::vector<std::vector<double>>& logcosh_poly_table() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> polys;
    polys.push_back({0.0, 1.0});  // P_1(t) = t
    for (int k = 1; k < 12; ++k) {
      const auto& p = polys.back();
      // derivative
      std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
      for (size_t i = 1; i < p.size(); ++i) dp[i - 1] = p[i] * static_cast<double>(i);
      // times (1 - t^2)
      std::vector<double> next(dp.size() + 2, 0.0);
      for (size_t i = 0; i < dp.size(); ++i) {
        next[i] += dp[i];
        next[i + 2] -= dp[i];
      }
      while (next.size() > 1 && next.back() == 0.0) next.pop_back();
      polys.push_back(std::move(next));
    }
    return polys;
  }();
  return table;
}

double poly_eval(const std::vector<double>& coeffs, double t) {
  double acc = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
  return acc;
}

}  // namespace

Mat omega_matrix(int d) {
  Mat J = Mat::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d) = -Mat::Identity(d, d);
  J.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  return J;
}

Mat omega_skew(const Mat& M) {
  const int r = static_cast<int>(M.rows());
  const int c = static_cast<int>(M.cols());
  Mat J = Mat::Zero(r + c, r + c);
  J.topRightCorner(r, c) = -M;
  J.bottomLeftCorner(c, r) = M.transpose();
  return J;
}

PhasePoint::PhasePoint(Vec p_in, Vec q_in) : p(std::move(p_in)), q(std::move(q_in)) {
  if (p.size() < 1 || p.size() != q.size())
    throw Error("PhasePoint: p and q must share a dimension d >= 1");
  require_finite(p, "PhasePoint p");
  require_finite(q, "PhasePoint q");
}

PhasePoint::PhasePoint(double p_scalar, double q_scalar)
    : PhasePoint(Vec::Constant(1, p_scalar), Vec::Constant(1, q_scalar)) {}

SmoothScalarFamily SmoothScalarFamily::quadratic(const Mat& coef) {
  if (coef.rows() != coef.cols() || coef.rows() < 1)
    throw Error("quadratic: coefficient matrix must be square");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::Quadratic;
  s.dim_ = static_cast<int>(coef.rows());
  s.coef_ = 0.5 * (coef + coef.transpose());
  s.max_order_ = 1 << 20;  // polynomial: every order is available
  return s;
}

SmoothScalarFamily SmoothScalarFamily::log_cosh(int dim) {
  if (dim < 1) throw Error("log_cosh: dim >= 1 required");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::LogCosh;
  s.dim_ = dim;
  s.max_order_ = 12;
  return s;
}

SmoothScalarFamily SmoothScalarFamily::log_shift(double shift, int dim) {
  if (dim < 1) throw Error("log_shift: dim >= 1 required");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::Log;
  s.dim_ = dim;
  s.shift_ = shift;
  s.max_order_ = 1 << 20;
  return s;
}

SmoothScalarFamily SmoothScalarFamily::power(double exponent, int dim) {
  if (dim < 1) throw Error("power: dim >= 1 required");
  if (exponent <= 1.0) throw Error("power: exponent > 1 required");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::Power;
  s.dim_ = dim;
  s.expo_ = exponent;
  s.max_order_ = 1 << 20;  // valid away from coordinate zeros
  return s;
}

SmoothScalarFamily SmoothScalarFamily::custom(int dim, std::function<double(const Vec&)> value,
                                              std::function<Vec(const Vec&)> gradient,
                                              std::function<Mat(const Vec&)> hessian) {
  if (dim < 1) throw Error("custom: dim >= 1 required");
  if (!value || !gradient) throw Error("custom: value and gradient oracles required");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::Custom;
  s.dim_ = dim;
  s.value_fn_ = std::move(value);
  s.grad_fn_ = std::move(gradient);
  s.hess_fn_ = std::move(hessian);
  s.max_order_ = s.hess_fn_ ? 2 : 1;
  return s;
}

SmoothScalarFamily SmoothScalarFamily::custom1d(std::function<double(double)> value,
                                                std::vector<std::function<double(double)>> derivs) {
  if (!value) throw Error("custom1d: value oracle required");
  SmoothScalarFamily s;
  s.kind_ = ScalarKind::Custom;
  s.dim_ = 1;
  s.max_order_ = static_cast<int>(derivs.size());
  s.deriv1d_ = std::move(derivs);
  s.value_fn_ = [value = std::move(value)](const Vec& x) { return value(x[0]); };
  return s;
}

double SmoothScalarFamily::value(const Vec& x) const {
  if (x.size() != dim_) throw Error("value: dimension mismatch");
  switch (kind_) {
    case ScalarKind::Quadratic:
      return x.dot(coef_ * x);
    case ScalarKind::LogCosh: {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        // log cosh x = |x| + log1p(exp(-2|x|)) - log 2, stable for large x.
        double ax = std::abs(x[i]);
        acc += ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
      }
      return acc;
    }
    case ScalarKind::Log: {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i) {
        double u = shift_ + x[i];
        if (u <= 0.0) throw DomainViolation("log family: shift + x must be positive");
        acc += std::log(u);
      }
      return acc;
    }
    case ScalarKind::Power: {
      double acc = 0.0;
      for (int i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]), expo_);
      return acc;
    }
    case ScalarKind::Custom:
      return value_fn_(x);
  }
  throw Error("value: unreachable");
}

Vec SmoothScalarFamily::gradient(const Vec& x) const {
  if (x.size() != dim_) throw Error("gradient: dimension mismatch");
  switch (kind_) {
    case ScalarKind::Quadratic:
      return 2.0 * (coef_ * x);
    case ScalarKind::LogCosh: {
      Vec g(x.size());
      for (int i = 0; i < x.size(); ++i) g[i] = std::tanh(x[i]);
      return g;
    }
    case ScalarKind::Log: {
      Vec g(x.size());
      for (int i = 0; i < x.size(); ++i) {
        double u = shift_ + x[i];
        if (u <= 0.0) throw DomainViolation("log family: shift + x must be positive");
        g[i] = 1.0 / u;
      }
      return g;
    }
    case ScalarKind::Power: {
      Vec g(x.size());
      for (int i = 0; i < x.size(); ++i) {
        double ax = std::abs(x[i]);
        g[i] = (ax == 0.0) ? 0.0
                           : expo_ * std::pow(ax, expo_ - 1.0) * (x[i] > 0 ? 1.0 : -1.0);
      }
      return g;
    }
    case ScalarKind::Custom: {
      if (!grad_fn_) {
        if (deriv1d_.empty()) throw OracleOrderExceeded("custom: no gradient oracle");
        Vec g(1);
        g[0] = deriv1d_[0](x[0]);
        return g;
      }
      Vec g = grad_fn_(x);
      require_finite(g, "custom gradient");
      return g;
    }
  }
  throw Error("gradient: unreachable");
}

Mat SmoothScalarFamily::hessian(const Vec& x) const {
  if (x.size() != dim_) throw Error("hessian: dimension mismatch");
  switch (kind_) {
    case ScalarKind::Quadratic:
      return 2.0 * coef_;
    case ScalarKind::LogCosh: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < x.size(); ++i) {
        double t = std::tanh(x[i]);
        h(i, i) = 1.0 - t * t;
      }
      return h;
    }
    case ScalarKind::Log: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < x.size(); ++i) {
        double u = shift_ + x[i];
        if (u <= 0.0) throw DomainViolation("log family: shift + x must be positive");
        h(i, i) = -1.0 / (u * u);
      }
      return h;
    }
    case ScalarKind::Power: {
      Mat h = Mat::Zero(dim_, dim_);
      for (int i = 0; i < x.size(); ++i) {
        double ax = std::abs(x[i]);
        h(i, i) = (ax == 0.0) ? 0.0 : expo_ * (expo_ - 1.0) * std::pow(ax, expo_ - 2.0);
      }
      return h;
    }
    case ScalarKind::Custom: {
      if (!hess_fn_) throw OracleOrderExceeded("custom: no hessian oracle");
      return hess_fn_(x);
    }
  }
  throw Error("hessian: unreachable");
}

double SmoothScalarFamily::derivative1d(double x, int order) const {
  if (dim_ != 1) throw Error("derivative1d: family is not one-dimensional");
  if (order < 0) throw Error("derivative1d: negative order");
  Vec xv = Vec::Constant(1, x);
  if (order == 0) return value(xv);
  if (order > max_order_) throw OracleOrderExceeded("derivative1d: order beyond the family's oracle range");
  switch (kind_) {
    case ScalarKind::Quadratic: {
      double a = coef_(0, 0);
      if (order == 1) return 2.0 * a * x;
      if (order == 2) return 2.0 * a;
      return 0.0;
    }
    case ScalarKind::LogCosh:
      return poly_eval(logcosh_poly_table()[static_cast<size_t>(order - 1)], std::tanh(x));
    case ScalarKind::Log: {
      double u = shift_ + x;
      if (u <= 0.0) throw DomainViolation("log family: shift + x must be positive");
      // (-1)^(k-1) (k-1)! / u^k
      double fact = 1.0;
      for (int i = 2; i < order; ++i) fact *= static_cast<double>(i);
      double v = fact / std::pow(u, order);
      return (order % 2 == 1) ? v : -v;
    }
    case ScalarKind::Power: {
      double ax = std::abs(x);
      if (ax == 0.0) throw DomainViolation("power family: derivative at zero is not available");
      double c = 1.0;
      for (int i = 0; i < order; ++i) c *= (expo_ - i);
      double v = c * std::pow(ax, expo_ - order);
      // sign(x)^order from repeated chain rule through |x|.
      if (x < 0 && order % 2 == 1) v = -v;
      return v;
    }
    case ScalarKind::Custom: {
      if (order <= static_cast<int>(deriv1d_.size()))
        return deriv1d_[static_cast<size_t>(order - 1)](x);
      throw OracleOrderExceeded("custom1d: order beyond the supplied oracles");
    }
  }
  throw Error("derivative1d: unreachable");
}

const Mat& SmoothScalarFamily::coef() const {
  if (kind_ != ScalarKind::Quadratic) throw Error("coef: not a quadratic family");
  return coef_;
}

SeparableHamiltonian::SeparableHamiltonian(SmoothScalarFamily F_in, SmoothScalarFamily G_in)
    : F(std::move(F_in)), G(std::move(G_in)) {
  if (F.dim() != G.dim()) throw Error("SeparableHamiltonian: F and G dimensions differ");
}

namespace {

double entropy_value(const Vec& w) {
  double acc = 0.0;
  for (int i = 0; i < w.size(); ++i) acc += w[i] * std::log(w[i]);
  return acc;
}

Vec softmax(const Vec& x) {
  double m = x.maxCoeff();
  Vec e = (x.array() - m).exp();
  return e / e.sum();
}

double log_sum_exp(const Vec& x) {
  double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace

Regularizer Regularizer::half_squared_norm(const Mat& scale) {
  if (scale.rows() != scale.cols() || scale.rows() < 1)
    throw Error("half_squared_norm: scale must be square");
  Mat M = 0.5 * (scale + scale.transpose());
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error("half_squared_norm: scale matrix must be positive definite");
  Regularizer r;
  r.dim_ = static_cast<int>(M.rows());
  r.domain_ = Domain::All;
  r.value_fn_ = [M](const Vec& w) { return 0.5 * w.dot(M * w); };
  r.grad_fn_ = [M](const Vec& w) -> Vec { return M * w; };
  r.conj_value_fn_ = [llt](const Vec& x) { return 0.5 * x.dot(llt.solve(x)); };
  r.conj_grad_fn_ = [llt](const Vec& x) -> Vec { return llt.solve(x); };
  return r;
}

Regularizer Regularizer::negative_entropy(int dim) {
  if (dim < 1) throw Error("negative_entropy: dim >= 1 required");
  Regularizer r;
  r.dim_ = dim;
  r.domain_ = Domain::Simplex;
  r.value_fn_ = entropy_value;
  r.grad_fn_ = [](const Vec& w) -> Vec { return w.array().log() + 1.0; };
  r.conj_value_fn_ = log_sum_exp;
  r.conj_grad_fn_ = [](const Vec& x) -> Vec { return softmax(x); };
  return r;
}

Regularizer Regularizer::custom(int dim, Domain domain,
                                std::function<double(const Vec&)> value,
                                std::function<Vec(const Vec&)> gradient,
                                std::function<double(const Vec&)> conj_value,
                                std::function<Vec(const Vec&)> conj_gradient,
                                std::optional<std::pair<Vec, Vec>> box_bounds) {
  if (dim < 1) throw Error("custom regularizer: dim >= 1 required");
  if (!value || !gradient || !conj_gradient)
    throw Error("custom regularizer: value, gradient, conjugate gradient required");
  if (domain == Domain::Box && !box_bounds)
    throw Error("custom regularizer: box domain needs bounds");
  Regularizer r;
  r.dim_ = dim;
  r.domain_ = domain;
  r.box_ = std::move(box_bounds);
  r.value_fn_ = std::move(value);
  r.grad_fn_ = std::move(gradient);
  r.conj_value_fn_ = std::move(conj_value);
  r.conj_grad_fn_ = std::move(conj_gradient);
  return r;
}

const std::pair<Vec, Vec>& Regularizer::box_bounds() const {
  if (!box_) throw Error("box_bounds: regularizer has no box domain");
  return *box_;
}

void Regularizer::require_in_domain(const Vec& w) const {
  if (w.size() != dim_) throw DomainViolation("regularizer: dimension mismatch");
  switch (domain_) {
    case Domain::Simplex: {
      for (int i = 0; i < w.size(); ++i)
        if (!(w[i] > 0.0)) throw DomainViolation("simplex interior requires strictly positive coordinates");
      if (std::abs(w.sum() - 1.0) > 1e-9)
        throw DomainViolation("simplex point must sum to one");
      return;
    }
    case Domain::Box: {
      const auto& [lo, hi] = *box_;
      for (int i = 0; i < w.size(); ++i)
        if (w[i] < lo[i] || w[i] > hi[i]) throw DomainViolation("point outside box domain");
      return;
    }
    case Domain::All:
      return;
  }
}

double Regularizer::value(const Vec& w) const { return value_fn_(w); }
Vec Regularizer::gradient(const Vec& w) const { return grad_fn_(w); }

double Regularizer::conjugate_value(const Vec& x) const {
  if (!conj_value_fn_) throw OracleOrderExceeded("regularizer: no conjugate value oracle");
  return conj_value_fn_(x);
}

Vec Regularizer::conjugate_gradient(const Vec& x) const { return conj_grad_fn_(x); }

double bregman(const Regularizer& reg, const Vec& w, const Vec& wt) {
  reg.require_in_domain(w);
  reg.require_in_domain(wt);
  return reg.value(w) - reg.value(wt) - reg.gradient(wt).dot(w - wt);
}

ConjugateReport conjugate_pair_check(const Regularizer& reg, const std::vector<Vec>& samples) {
  ConjugateReport report;
  for (const Vec& w : samples) {
    reg.require_in_domain(w);
    double res = (reg.conjugate_gradient(reg.gradient(w)) - w).lpNorm<Eigen::Infinity>();
    report.max_residual = std::max(report.max_residual, res);
  }
  report.pass = report.max_residual <= 1e-10;
  return report;
}

PayoffMatrix symmetric_decompose(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw Error("symmetric_decompose: A must be square");
  if (!A.allFinite()) throw Error("symmetric_decompose: A must be finite");
  const int d = static_cast<int>(A.rows());
  PayoffMatrix out;
  out.A = A;
  const double sym_gap = (A - A.transpose()).lpNorm<Eigen::Infinity>();
  if (sym_gap == 0.0) {
    out.U = A;
    out.V = Mat::Identity(d, d);
    out.exact = true;
    return out;
  }
  Eigen::EigenSolver<Mat> es(A);
  if (es.info() != Eigen::Success)
    throw DecompositionUnavailable("symmetric_decompose: eigensolver failed");
  const double scale = 1.0 + A.lpNorm<Eigen::Infinity>();
  if (es.eigenvalues().imag().lpNorm<Eigen::Infinity>() > 1e-9 * scale)
    throw DecompositionUnavailable("symmetric_decompose: non-real eigenvalues");
  Mat Q = es.eigenvectors().real();
  Mat D = es.eigenvalues().real().asDiagonal();
  // Defective A shows up as a numerically singular eigenvector matrix.
  Eigen::FullPivLU<Mat> lu(Q);
  if (!lu.isInvertible() || lu.rcond() < 1e-12)
    throw DecompositionUnavailable("symmetric_decompose: defective eigenbasis");
  Mat U = Q * D * Q.transpose();
  Mat QQt = Q * Q.transpose();
  Mat V = QQt.inverse();
  // Symmetrize away the float asymmetry so the stored invariants are exact.
  out.U = 0.5 * (U + U.transpose());
  out.V = 0.5 * (V + V.transpose());
  out.exact = (A - out.U * out.V).lpNorm<Eigen::Infinity>() <= 1e-10 * scale;
  return out;
}

}  // namespace mh::core
