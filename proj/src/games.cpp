#include "mh/games.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mh/csvio.hpp"
#include "mh/errors.hpp"
#include "mh/integrators.hpp"
#include "mh/series.hpp"

namespace mh::games {

using core::Domain;
using core::Mat;
using core::PhasePoint;
using core::Regularizer;
using core::Vec;

namespace {

// Entropy-style gradients blow up on exact zeros; iterates are pinned a hair
// inside the domain instead.
Vec floor_positive(const Vec& v) {
  return v.cwiseMax(1e-300);
}

Vec domain_gradient(const Regularizer& reg, const Vec& w) {
  return reg.gradient(reg.domain() == Domain::Simplex ? Vec(floor_positive(w)) : w);
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw DomainViolation(std::string(what) + " left the representable range");
  }
}

void require_in_closure(Domain domain, const Regularizer& reg, const Vec& v,
                        const char* which) {
  if (!v.allFinite()) {
    throw DomainViolation(std::string(which) + " has nonfinite entries");
  }
  switch (domain) {
    case Domain::Simplex: {
      if (v.minCoeff() < 0.0) {
        throw DomainViolation(std::string(which) + " has negative simplex weights");
      }
      if (std::abs(v.sum() - 1.0) > 1e-12) {
        throw DomainViolation(std::string(which) + " does not sum to 1");
      }
      break;
    }
    case Domain::Box: {
      const auto& [lo, hi] = reg.box_bounds();
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < lo[i] - 1e-12 || v[i] > hi[i] + 1e-12) {
          throw DomainViolation(std::string(which) + " leaves its box");
        }
      }
      break;
    }
    case Domain::All:
      break;
  }
}

// Linear programs over the feasible domains sit at vertices; these return
// the extreme values of <c, w> over the closure.
double linear_max(Domain domain, const Regularizer& reg, const Vec& c) {
  switch (domain) {
    case Domain::Simplex:
      return c.maxCoeff();
    case Domain::Box: {
      const auto& [lo, hi] = reg.box_bounds();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        acc += c[i] > 0.0 ? c[i] * hi[i] : c[i] * lo[i];
      }
      return acc;
    }
    case Domain::All:
      throw UnboundedDomain("a linear functional has no maximum over all of R^d");
  }
  throw UnboundedDomain("unknown domain");
}

double linear_min(Domain domain, const Regularizer& reg, const Vec& c) {
  return -linear_max(domain, reg, Vec(-c));
}

core::SmoothScalarFamily conjugate_family(const Regularizer& reg) {
  return core::SmoothScalarFamily::custom(
      reg.dim(), [reg](const Vec& x) { return reg.conjugate_value(x); },
      [reg](const Vec& x) { return reg.conjugate_gradient(x); });
}

void require_factors(const core::PayoffMatrix& payoff, const char* who) {
  if (payoff.U.size() == 0 || payoff.V.size() == 0) {
    throw DecompositionUnavailable(std::string(who) +
                                   " needs the symmetric payoff factors; build the game "
                                   "with decompose enabled");
  }
}

}  // namespace

GameInstance make_game(const Mat& A, Regularizer reg_a, Regularizer reg_b, bool decompose) {
  if (A.rows() != reg_a.dim() || A.cols() != reg_b.dim()) {
    throw DomainViolation("payoff shape does not match the regularizer dimensions");
  }
  GameInstance g{core::PayoffMatrix{A, Mat(), Mat(), false},
                 reg_a.domain(),
                 reg_b.domain(),
                 std::move(reg_a),
                 std::move(reg_b)};
  if (decompose) {
    g.payoff = core::symmetric_decompose(A);
  }
  return g;
}

StrategyPair::StrategyPair(Vec a_in, Vec b_in) : a(std::move(a_in)), b(std::move(b_in)) {
  if (a.size() < 1 || b.size() < 1) {
    throw DomainViolation("strategies must be nonempty");
  }
  require_finite(a, "the first strategy");
  require_finite(b, "the second strategy");
}

void require_pair_feasible(const GameInstance& game, const StrategyPair& s) {
  if (s.a.size() != game.rows() || s.b.size() != game.cols()) {
    throw DomainViolation("strategy lengths do not match the payoff shape");
  }
  require_in_closure(game.domain_a, game.reg_a, s.a, "the first strategy");
  require_in_closure(game.domain_b, game.reg_b, s.b, "the second strategy");
}

StrategyPair amd_step(const GameInstance& game, const StrategyPair& s, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw DomainViolation("stepsize must be finite and nonnegative");
  }
  require_pair_feasible(game, s);
  const Mat& A = game.payoff.A;
  const Vec x_next = domain_gradient(game.reg_a, s.a) - eta * (A * s.b);
  require_finite(x_next, "the first dual update");
  Vec a_next = game.reg_a.conjugate_gradient(x_next);
  require_finite(a_next, "the first strategy update");
  const Vec y_next = domain_gradient(game.reg_b, s.b) + eta * (A.transpose() * a_next);
  require_finite(y_next, "the second dual update");
  Vec b_next = game.reg_b.conjugate_gradient(y_next);
  require_finite(b_next, "the second strategy update");
  return StrategyPair(std::move(a_next), std::move(b_next));
}

DualPoint damd_step(const core::SmoothScalarFamily& f, const core::SmoothScalarFamily& g,
                    const Mat& A, const DualPoint& z, double eta) {
  if (z.x.size() != A.rows() || z.y.size() != A.cols()) {
    throw DomainViolation("dual point does not match the payoff shape");
  }
  Vec x_next = z.x - eta * (A * g.gradient(z.y));
  require_finite(x_next, "the first dual update");
  Vec y_next = z.y + eta * (A.transpose() * f.gradient(x_next));
  require_finite(y_next, "the second dual update");
  return DualPoint{std::move(x_next), std::move(y_next)};
}

AmdTrajectory run_amd(const GameInstance& game, const StrategyPair& start, double eta,
                      long steps) {
  if (steps < 0) {
    throw DomainViolation("step count must be nonnegative");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw DomainViolation("stepsize must be finite and nonnegative");
  }
  require_pair_feasible(game, start);
  const Mat& A = game.payoff.A;
  AmdTrajectory traj;
  traj.eta = eta;
  traj.pairs.reserve(static_cast<std::size_t>(steps) + 1);
  traj.duals.reserve(static_cast<std::size_t>(steps) + 1);
  traj.pairs.push_back(start);
  traj.duals.push_back(DualPoint{domain_gradient(game.reg_a, start.a),
                                 domain_gradient(game.reg_b, start.b)});
  for (long k = 0; k < steps; ++k) {
    const DualPoint& z = traj.duals.back();
    const StrategyPair& s = traj.pairs.back();
    // The dual coordinates, not the primal ones, carry the state: the
    // telescoping regret identities hold exactly along this recursion.
    Vec x_next = z.x - eta * (A * s.b);
    require_finite(x_next, "the first dual update");
    Vec a_next = game.reg_a.conjugate_gradient(x_next);
    require_finite(a_next, "the first strategy update");
    Vec y_next = z.y + eta * (A.transpose() * a_next);
    require_finite(y_next, "the second dual update");
    Vec b_next = game.reg_b.conjugate_gradient(y_next);
    require_finite(b_next, "the second strategy update");
    traj.duals.push_back(DualPoint{std::move(x_next), std::move(y_next)});
    traj.pairs.push_back(StrategyPair(std::move(a_next), std::move(b_next)));
  }
  return traj;
}

double conjugacy_residual(const GameInstance& game, const AmdTrajectory& traj) {
  const Mat& A = game.payoff.A;
  auto deflate = [](Domain domain, Vec v) {
    if (domain == Domain::Simplex) {
      v.array() -= v.mean();
    }
    return v;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < traj.pairs.size(); ++k) {
    const Vec ga_next = domain_gradient(game.reg_a, traj.pairs[k + 1].a);
    const Vec ga = domain_gradient(game.reg_a, traj.pairs[k].a);
    const Vec ra = deflate(game.domain_a, ga_next - ga + traj.eta * (A * traj.pairs[k].b));
    const Vec gb_next = domain_gradient(game.reg_b, traj.pairs[k + 1].b);
    const Vec gb = domain_gradient(game.reg_b, traj.pairs[k].b);
    const Vec rb = deflate(game.domain_b,
                           gb_next - gb - traj.eta * (A.transpose() * traj.pairs[k + 1].a));
    worst = std::max({worst, ra.lpNorm<Eigen::Infinity>(), rb.lpNorm<Eigen::Infinity>()});
  }
  return worst;
}

double pushforward_check(const core::SmoothScalarFamily& f, const core::SmoothScalarFamily& g,
                         const core::PayoffMatrix& payoff, const PhasePoint& z0, double eta,
                         long steps) {
  require_factors(payoff, "the pushforward comparison");
  if (steps < 0) {
    throw DomainViolation("step count must be nonnegative");
  }
  const Mat U = payoff.U;
  const Mat V = payoff.V;
  if (z0.dim() != U.rows()) {
    throw DomainViolation("start point does not match the payoff dimension");
  }
  const core::SmoothScalarFamily F = core::SmoothScalarFamily::custom(
      static_cast<int>(U.rows()), [f, U](const Vec& p) { return f.value(U * p); },
      [f, U](const Vec& p) { return Vec(U * f.gradient(U * p)); });
  const core::SmoothScalarFamily G = core::SmoothScalarFamily::custom(
      static_cast<int>(V.rows()), [g, V](const Vec& q) { return g.value(V * q); },
      [g, V](const Vec& q) { return Vec(V * g.gradient(V * q)); });
  const core::SeparableHamiltonian H{F, G};

  PhasePoint z = z0;
  DualPoint w{U * z0.p, V * z0.q};
  double worst = 0.0;
  for (long k = 0; k < steps; ++k) {
    z = integrators::symplectic_euler_step(H, z, eta);
    w = damd_step(f, g, payoff.A, w, eta);
    const double dev = std::max((U * z.p - w.x).lpNorm<Eigen::Infinity>(),
                                (V * z.q - w.y).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, dev);
  }
  return worst;
}

double duality_gap(const GameInstance& game, const StrategyPair& s) {
  require_pair_feasible(game, s);
  const Mat& A = game.payoff.A;
  const double best_col = linear_max(game.domain_b, game.reg_b, Vec(A.transpose() * s.a));
  const double best_row = linear_min(game.domain_a, game.reg_a, Vec(A * s.b));
  return best_col - best_row;
}

double average_iterate_gap(const GameInstance& game, const std::vector<StrategyPair>& pairs,
                           long K) {
  if (K < 1 || K > static_cast<long>(pairs.size())) {
    throw DomainViolation("the average needs 1 <= K <= number of recorded pairs");
  }
  Vec abar = Vec::Zero(game.rows());
  Vec bbar = Vec::Zero(game.cols());
  for (long k = 0; k < K; ++k) {
    abar += pairs[static_cast<std::size_t>(k)].a;
    bbar += pairs[static_cast<std::size_t>(k)].b;
  }
  return duality_gap(game, StrategyPair(abar / K, bbar / K));
}

double cumulative_regret(const GameInstance& game, const std::vector<StrategyPair>& pairs,
                         const StrategyPair& comparator) {
  if (pairs.empty()) {
    throw DomainViolation("the trajectory must contain its start");
  }
  require_pair_feasible(game, comparator);
  const Mat& A = game.payoff.A;
  double r1 = 0.0;
  double r2 = 0.0;
  for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
    const Vec mid_a = 0.5 * (pairs[k].a + pairs[k + 1].a);
    const Vec mid_b = 0.5 * (pairs[k].b + pairs[k + 1].b);
    r1 += (mid_a - comparator.a).dot(A * pairs[k].b);
    r2 += pairs[k + 1].a.dot(A * (comparator.b - mid_b));
  }
  return r1 + r2;
}

double total_regret(const GameInstance& game, const std::vector<StrategyPair>& pairs) {
  if (pairs.empty()) {
    throw DomainViolation("the trajectory must contain its start");
  }
  const Mat& A = game.payoff.A;
  double track = 0.0;
  Vec b_sum = Vec::Zero(game.cols());
  Vec a_sum = Vec::Zero(game.rows());
  for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
    const Vec mid_a = 0.5 * (pairs[k].a + pairs[k + 1].a);
    const Vec mid_b = 0.5 * (pairs[k].b + pairs[k + 1].b);
    track += mid_a.dot(A * pairs[k].b) - pairs[k + 1].a.dot(A * mid_b);
    b_sum += pairs[k].b;
    a_sum += pairs[k + 1].a;
  }
  if (pairs.size() == 1) {
    return 0.0;
  }
  const double best_row = linear_min(game.domain_a, game.reg_a, Vec(A * b_sum));
  const double best_col = linear_max(game.domain_b, game.reg_b, Vec(A.transpose() * a_sum));
  return track - best_row + best_col;
}

double verify_gap_regret_identity(const GameInstance& game,
                                  const std::vector<StrategyPair>& pairs, long K) {
  if (K < 1 || K + 1 > static_cast<long>(pairs.size())) {
    throw DomainViolation("the identity needs 1 <= K <= recorded steps");
  }
  const std::vector<StrategyPair> prefix(pairs.begin(), pairs.begin() + K + 1);
  const double total = total_regret(game, prefix);
  // The exact telescoping pairs the later a-iterates with the earlier
  // b-iterates: a over 1..K, b over 0..K-1.
  Vec abar = Vec::Zero(game.rows());
  Vec bbar = Vec::Zero(game.cols());
  for (long k = 0; k < K; ++k) {
    abar += pairs[static_cast<std::size_t>(k) + 1].a;
    bbar += pairs[static_cast<std::size_t>(k)].b;
  }
  const double gap = duality_gap(game, StrategyPair(abar / K, bbar / K));
  const Mat& A = game.payoff.A;
  const double head = pairs.front().a.dot(A * pairs.front().b);
  const double tail =
      pairs[static_cast<std::size_t>(K)].a.dot(A * pairs[static_cast<std::size_t>(K)].b);
  return std::abs(gap - (total / K - (head - tail) / (2.0 * K)));
}

namespace {

double conj_bregman(const Regularizer& reg, const Vec& u, const Vec& v) {
  return reg.conjugate_value(u) - reg.conjugate_value(v) -
         reg.conjugate_gradient(v).dot(u - v);
}

// First-order corrected value at a dual point, routed through phase space:
// p = U^{-1} x, q = V^{-1} y, F = conj(reg_a) after U, G = conj(reg_b)
// after V.
double first_order_value(const GameInstance& game, const DualPoint& z, double eta) {
  const Mat& U = game.payoff.U;
  const Mat& V = game.payoff.V;
  const core::SmoothScalarFamily f = conjugate_family(game.reg_a);
  const core::SmoothScalarFamily g = conjugate_family(game.reg_b);
  const core::SmoothScalarFamily F = core::SmoothScalarFamily::custom(
      static_cast<int>(U.rows()), [f, U](const Vec& p) { return f.value(U * p); },
      [f, U](const Vec& p) { return Vec(U * f.gradient(U * p)); });
  const core::SmoothScalarFamily G = core::SmoothScalarFamily::custom(
      static_cast<int>(V.rows()), [g, V](const Vec& q) { return g.value(V * q); },
      [g, V](const Vec& q) { return Vec(V * g.gradient(V * q)); });
  const Vec p = U.fullPivLu().solve(z.x);
  const Vec q = V.fullPivLu().solve(z.y);
  return series::general_d_truncation_eval(core::SeparableHamiltonian{F, G},
                                           PhasePoint(p, q), eta, 1);
}

}  // namespace

double lemma_regret_formula(const GameInstance& game, const AmdTrajectory& traj,
                            const StrategyPair& comparator, long K) {
  if (K < 1 || K + 1 > static_cast<long>(traj.duals.size())) {
    throw DomainViolation("the formula needs 1 <= K <= recorded steps");
  }
  if (!(traj.eta > 0.0)) {
    throw DomainViolation("the formula divides by a positive stepsize");
  }
  require_factors(game.payoff, "the first-order value route");
  require_pair_feasible(game, comparator);
  const Vec cx = domain_gradient(game.reg_a, comparator.a);
  const Vec cy = domain_gradient(game.reg_b, comparator.b);
  const DualPoint& z0 = traj.duals.front();
  const DualPoint& zk = traj.duals[static_cast<std::size_t>(K)];
  const double d_head = conj_bregman(game.reg_a, z0.x, cx) + conj_bregman(game.reg_b, z0.y, cy);
  const double d_tail = conj_bregman(game.reg_a, zk.x, cx) + conj_bregman(game.reg_b, zk.y, cy);
  const double m_head = first_order_value(game, z0, traj.eta);
  const double m_tail = first_order_value(game, zk, traj.eta);
  return (d_head - d_tail + m_tail - m_head) / traj.eta;
}

void write_amd_csv(std::ostream& os, const GameInstance& game, const AmdTrajectory& traj) {
  csv::CsvWriter w(os);
  std::vector<std::string> header{"step"};
  for (long i = 0; i < game.rows(); ++i) {
    header.push_back("a_" + std::to_string(i));
  }
  for (long i = 0; i < game.cols(); ++i) {
    header.push_back("b_" + std::to_string(i));
  }
  for (long i = 0; i < game.rows(); ++i) {
    header.push_back("x_" + std::to_string(i));
  }
  for (long i = 0; i < game.cols(); ++i) {
    header.push_back("y_" + std::to_string(i));
  }
  header.emplace_back("gap");
  header.emplace_back("running_avg_gap");
  w.write_row(header);
  Vec a_run = Vec::Zero(game.rows());
  Vec b_run = Vec::Zero(game.cols());
  for (std::size_t k = 0; k < traj.pairs.size(); ++k) {
    const StrategyPair& s = traj.pairs[k];
    const DualPoint& z = traj.duals[k];
    a_run += s.a;
    b_run += s.b;
    std::vector<std::string> row{std::to_string(k)};
    for (Eigen::Index i = 0; i < s.a.size(); ++i) {
      row.push_back(csv::format_double(s.a[i]));
    }
    for (Eigen::Index i = 0; i < s.b.size(); ++i) {
      row.push_back(csv::format_double(s.b[i]));
    }
    for (Eigen::Index i = 0; i < z.x.size(); ++i) {
      row.push_back(csv::format_double(z.x[i]));
    }
    for (Eigen::Index i = 0; i < z.y.size(); ++i) {
      row.push_back(csv::format_double(z.y[i]));
    }
    row.push_back(csv::format_double(duality_gap(game, s)));
    const double denom = static_cast<double>(k + 1);
    row.push_back(csv::format_double(
        duality_gap(game, StrategyPair(a_run / denom, b_run / denom))));
    w.write_row(row);
  }
}

}  // namespace mh::games
