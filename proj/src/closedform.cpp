#include "mh/closedform.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mh/errors.hpp"

namespace mh::closedform {

using core::Mat;
using core::PhasePoint;
using core::Vec;

double t_function(double eta, double lambda) {
  const double u = lambda * eta * eta;
  if (!std::isfinite(u)) {
    throw DomainViolation("nonfinite argument to the series profile");
  }
  if (u >= 1.0) {
    throw ConvergenceRadiusExceeded("lambda * eta^2 must be below 1");
  }
  if (std::abs(u) < 1e-14) {
    // The two closed branches meet in a removable 0/0 at u = 0; the shared
    // Taylor series takes over inside roundoff distance of it.
    return 1.0 + (2.0 / 3.0) * u;
  }
  if (u > 0.0) {
    const double r = std::sqrt(u);
    return std::asin(r) / (r * std::sqrt(1.0 - u));
  }
  const double r = std::sqrt(-u);
  return std::asinh(r) / (r * std::sqrt(1.0 - u));
}

double conserved_s_1d(double a, double b, double p, double q, double eta) {
  return a * p * p + b * q * q - 2.0 * a * b * eta * p * q;
}

double mh_quadratic_1d(double a, double b, double p, double q, double eta) {
  if (a * b == 0.0) {
    throw DomainViolation("both curvatures must be nonzero");
  }
  return t_function(eta, a * b) * conserved_s_1d(a, b, p, q, eta);
}

namespace {

void require_symmetric(const Mat& M, const char* which) {
  if (M.rows() != M.cols() || M.rows() < 1) {
    throw DomainViolation(std::string(which) + " must be square and nonempty");
  }
  const double gap = (M - M.transpose()).lpNorm<Eigen::Infinity>();
  if (gap > 1e-12 * (1.0 + M.lpNorm<Eigen::Infinity>())) {
    throw DomainViolation(std::string(which) + " must be symmetric");
  }
}

}  // namespace

QuadraticMH::QuadraticMH(const Mat& B, const Mat& C, double eta) : eta_(eta) {
  require_symmetric(B, "B");
  require_symmetric(C, "C");
  if (B.rows() != C.rows()) {
    throw DomainViolation("B and C must share one dimension");
  }
  b_ = 0.5 * (B + B.transpose());
  c_ = 0.5 * (C + C.transpose());
  const Mat bc = b_ * c_;
  const double scale = 1.0 + bc.lpNorm<Eigen::Infinity>();

  Eigen::JacobiSVD<Mat> svd(bc);
  const double sigma_max = svd.singularValues()(0);
  if (sigma_max * eta * eta >= 1.0) {
    throw ConvergenceRadiusExceeded("sigma_max(BC) * eta^2 must be below 1");
  }

  if ((bc - bc.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12 * scale) {
    // B and C commute here, so the product admits an orthogonal eigenbasis.
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (bc + bc.transpose()));
    if (es.info() != Eigen::Success) {
      throw NonRealSpectrum("eigendecomposition of the product failed");
    }
    lambda_ = es.eigenvalues();
    v_ = es.eigenvectors();
  } else {
    Eigen::EigenSolver<Mat> es(bc);
    if (es.info() != Eigen::Success) {
      throw NonRealSpectrum("eigendecomposition of the product failed");
    }
    if (es.eigenvalues().imag().lpNorm<Eigen::Infinity>() > 1e-9 * scale) {
      throw NonRealSpectrum("the product has nonreal eigenvalues");
    }
    lambda_ = es.eigenvalues().real();
    v_ = es.eigenvectors().real();
  }
  Eigen::FullPivLU<Mat> lu(v_);
  if (!lu.isInvertible()) {
    throw NonRealSpectrum("the product is not diagonalizable");
  }
  v_inv_ = lu.inverse();
  if ((v_ * lambda_.asDiagonal() * v_inv_ - bc).lpNorm<Eigen::Infinity>() > 1e-9 * scale) {
    throw NonRealSpectrum("eigendecomposition does not reproduce the product");
  }

  const Vec t = t_values();
  const Mat t_of_bc = v_ * t.asDiagonal() * v_inv_;
  form_pp_ = t_of_bc * b_;
  form_qq_ = c_ * t_of_bc;
  form_pq_ = v_ * (lambda_.array() * t.array()).matrix().asDiagonal() * v_inv_;
}

Vec QuadraticMH::t_values() const {
  Vec t(lambda_.size());
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    t[i] = t_function(eta_, lambda_[i]);
  }
  return t;
}

double QuadraticMH::value(const PhasePoint& z) const {
  if (z.dim() != b_.rows()) {
    throw DomainViolation("phase point does not match the matrix dimension");
  }
  return z.p.dot(form_pp_ * z.p) + z.q.dot(form_qq_ * z.q) -
         2.0 * eta_ * z.p.dot(form_pq_ * z.q);
}

double mh_quadratic_multi(const Mat& B, const Mat& C, const PhasePoint& z, double eta) {
  return QuadraticMH(B, C, eta).value(z);
}

AdjointRep1D::AdjointRep1D(double a_in, double b_in) : a(a_in), b(b_in) {
  ad_f << 0, 0, 2 * a, 0, 0, 0, 0, 4 * a, 0;
  ad_g << 0, 0, 0, 0, 0, -2 * b, -4 * b, 0, 0;
}

Eigen::Matrix3d AdjointRep1D::exp_ad_f(double t) const {
  // ad_f is nilpotent of index 3, so the exponential closes after t^2.
  Eigen::Matrix3d e;
  e << 1, 4 * a * a * t * t, 2 * a * t, 0, 1, 0, 0, 4 * a * t, 1;
  return e;
}

Eigen::Matrix3d AdjointRep1D::exp_ad_g(double t) const {
  Eigen::Matrix3d e;
  e << 1, 0, 0, 4 * b * b * t * t, 1, -2 * b * t, -4 * b * t, 0, 1;
  return e;
}

namespace {

Eigen::Vector3d log_series_apply(const Eigen::Matrix3d& m, const Eigen::Vector3d& v,
                                 double quad_tol) {
  const Eigen::Matrix3d e = Eigen::Matrix3d::Identity() - m;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(e);
  if (svd.singularValues()(0) >= 1.0) {
    throw OperatorNormTooLarge("||M(t) - I|| must stay below 1 on the interval");
  }
  Eigen::Vector3d acc = v;  // j = 0 term
  Eigen::Vector3d w = v;
  for (int j = 1; j <= 2000; ++j) {
    w = e * w;
    const Eigen::Vector3d term = w / (j + 1);
    acc += term;
    if (term.lpNorm<Eigen::Infinity>() < quad_tol / 10.0) {
      return acc;
    }
  }
  throw QuadratureFailure("logarithm series did not settle");
}

struct IntegralKernel {
  AdjointRep1D rep;
  double quad_tol;

  Eigen::Vector3d operator()(double t) const {
    const Eigen::Matrix3d m = rep.exp_ad_g(t) * rep.exp_ad_f(t);
    const Eigen::Vector3d v =
        rep.exp_ad_g(t) * Eigen::Vector3d(rep.a, 0, 0) + Eigen::Vector3d(0, rep.b, 0);
    return log_series_apply(m, v, quad_tol);
  }
};

Eigen::Vector3d simpson_slice(const Eigen::Vector3d& fa, const Eigen::Vector3d& fm,
                              const Eigen::Vector3d& fb, double h) {
  return (fa + 4.0 * fm + fb) * (h / 6.0);
}

Eigen::Vector3d adaptive_simpson(const IntegralKernel& f, double a, double b,
                                 const Eigen::Vector3d& fa, const Eigen::Vector3d& fm,
                                 const Eigen::Vector3d& fb, const Eigen::Vector3d& whole,
                                 double tol, int depth) {
  if (depth <= 0) {
    throw QuadratureFailure("quadrature recursion exhausted");
  }
  const double m = 0.5 * (a + b);
  const Eigen::Vector3d flm = f(0.5 * (a + m));
  const Eigen::Vector3d frm = f(0.5 * (m + b));
  const Eigen::Vector3d left = simpson_slice(fa, flm, fm, m - a);
  const Eigen::Vector3d right = simpson_slice(fm, frm, fb, b - m);
  const Eigen::Vector3d delta = left + right - whole;
  if (delta.lpNorm<Eigen::Infinity>() <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

QuadCoeffs integral_form_quadratic_1d(double a, double b, double eta, double quad_tol) {
  if (!(eta > 0.0)) {
    throw DomainViolation("the averaging interval needs eta > 0");
  }
  if (!(quad_tol > 0.0)) {
    throw DomainViolation("quadrature tolerance must be positive");
  }
  const IntegralKernel f{AdjointRep1D(a, b), quad_tol};
  const Eigen::Vector3d fa = f(0.0);
  const Eigen::Vector3d fm = f(0.5 * eta);
  const Eigen::Vector3d fb = f(eta);
  const Eigen::Vector3d whole = simpson_slice(fa, fm, fb, eta);
  const Eigen::Vector3d integral =
      adaptive_simpson(f, 0.0, eta, fa, fm, fb, whole, quad_tol * eta, 40);
  const Eigen::Vector3d avg = integral / eta;
  return QuadCoeffs{avg[0], avg[1], avg[2]};
}

QuadCoeffs closed_form_coeffs_1d(double a, double b, double eta) {
  const double t = t_function(eta, a * b);
  return QuadCoeffs{t * a, t * b, t * (-2.0 * a * b * eta)};
}

namespace {

Eigen::Matrix2d flow_generator(double a, double b, double eta) {
  const double t = t_function(eta, a * b);
  Eigen::Matrix2d gen;
  gen << 2.0 * a * b * eta, -2.0 * b, 2.0 * a, -2.0 * a * b * eta;
  return t * gen;
}

}  // namespace

Eigen::Matrix2d interpolating_flow_matrix_1d(double a, double b, double eta, int substeps) {
  if (substeps < 1) {
    throw DomainViolation("substep count must be positive");
  }
  const Eigen::Matrix2d gen = flow_generator(a, b, eta);
  const double h = eta / substeps;
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (int i = 0; i < substeps; ++i) {
    const Eigen::Matrix2d k1 = gen * m;
    const Eigen::Matrix2d k2 = gen * (m + 0.5 * h * k1);
    const Eigen::Matrix2d k3 = gen * (m + 0.5 * h * k2);
    const Eigen::Matrix2d k4 = gen * (m + h * k3);
    m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

double interpolating_flow_check_1d(double a, double b, const PhasePoint& z, double eta,
                                   int substeps) {
  if (z.dim() != 1) {
    throw DomainViolation("this check is one-dimensional");
  }
  const Eigen::Matrix2d m = interpolating_flow_matrix_1d(a, b, eta, substeps);
  const Eigen::Vector2d z0(z.p[0], z.q[0]);
  const Eigen::Vector2d z_flow = m * z0;
  const double p_step = z.p[0] - 2.0 * b * eta * z.q[0];
  const double q_step = z.q[0] + 2.0 * a * eta * p_step;
  return std::max(std::abs(z_flow[0] - p_step), std::abs(z_flow[1] - q_step));
}

double conserved_l(double alpha, double beta, double p, double q) {
  const double up = alpha + p;
  const double uq = beta + q;
  if (!(up > 0.0) || !(uq > 0.0)) {
    throw DomainViolation("both shifted coordinates must be positive");
  }
  return std::log(up) + std::log(uq);
}

double mh_log(double alpha, double beta, double p, double q, double eta) {
  if (!(eta > 0.0)) {
    throw DomainViolation("the closed form is evaluated for eta > 0 only");
  }
  const double level = conserved_l(alpha, beta, p, q);
  if (level == 0.0) {
    throw DomainViolation("the conserved level must be nonzero");
  }
  const double x = eta / level;
  if (x >= 1.0) {
    throw DomainViolation("eta must stay below the conserved level");
  }
  const double lg = std::log1p(-x);
  return lg - x * lg;
}

}  // namespace mh::closedform
