#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mh/core.hpp"
#include "mh/errors.hpp"
#include "mh/games.hpp"

using namespace mh::core;
using namespace mh::games;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

GameInstance entropic_game(const Mat& A, bool decompose) {
  return make_game(A, Regularizer::negative_entropy(static_cast<int>(A.rows())),
                   Regularizer::negative_entropy(static_cast<int>(A.cols())), decompose);
}

Mat skew2() {
  Mat A(2, 2);
  A << 0, 1, -1, 0;
  return A;
}

Mat rock_paper_scissors() {
  Mat A(3, 3);
  A << 0, 1, -1, -1, 0, 1, 1, -1, 0;
  return A;
}

// Random payoff with a real, well-separated spectrum, so the symmetric
// factorization exists.
Mat random_real_spectrum(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat S = Mat::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) += 0.3 * unif(rng);
  Vec lambda(d);
  for (int i = 0; i < d; ++i) {
    const double sign = unif(rng) > 0.0 ? 1.0 : -1.0;
    lambda[i] = sign * (0.5 + 0.5 * (unif(rng) + 1.0));
  }
  const Mat D = lambda.asDiagonal();
  return Mat(S * D * S.fullPivLu().solve(Mat::Identity(d, d)));
}

Vec random_simplex(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec raw(d);
  for (int i = 0; i < d; ++i) raw[i] = std::exp(unif(rng));
  return raw / raw.sum();
}

}  // namespace

TEST_CASE("game construction validates shapes and spectra") {
  CHECK_THROWS_AS(make_game(Mat::Identity(2, 2), Regularizer::negative_entropy(3),
                            Regularizer::negative_entropy(2), false),
                  mh::DomainViolation);

  // Fully antisymmetric circulant payoffs have imaginary eigenvalues, so the
  // factorization must be declined up front.
  CHECK_THROWS_AS(entropic_game(rock_paper_scissors(), true), mh::DecompositionUnavailable);
  const GameInstance ok = entropic_game(rock_paper_scissors(), false);
  CHECK(ok.rows() == 3);
  CHECK(ok.payoff.U.size() == 0);

  const GameInstance with_factors = entropic_game(Mat::Identity(2, 2), true);
  CHECK(with_factors.payoff.U.size() > 0);

  CHECK_THROWS_AS(StrategyPair(Vec(0), Vec(0)), mh::DomainViolation);
}

TEST_CASE("zero stepsize leaves strategies unchanged") {
  const GameInstance game = entropic_game(skew2(), false);
  const StrategyPair s(vec2(0.5, 0.5), vec2(0.3, 0.7));
  const StrategyPair next = amd_step(game, s, 0.0);
  CHECK((next.a - s.a).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((next.b - s.b).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("identity-regularized update reduces to alternating gradient play") {
  const GameInstance game =
      make_game(Mat::Identity(1, 1), Regularizer::half_squared_norm(Mat::Identity(1, 1)),
                Regularizer::half_squared_norm(Mat::Identity(1, 1)), true);
  const double eta = 0.1;
  const StrategyPair s(Vec::Constant(1, 1.0), Vec::Constant(1, 0.5));
  const StrategyPair next = amd_step(game, s, eta);
  const double a_next = 1.0 - eta * 0.5;
  const double b_next = 0.5 + eta * a_next;
  CHECK(next.a[0] == doctest::Approx(a_next).epsilon(1e-15));
  CHECK(next.b[0] == doctest::Approx(b_next).epsilon(1e-15));
}

TEST_CASE("entropic update is multiplicative-weights with the fresh opponent") {
  const GameInstance game = entropic_game(skew2(), false);
  const double eta = 0.1;
  const StrategyPair s(vec2(0.5, 0.5), vec2(0.5, 0.5));
  const StrategyPair next = amd_step(game, s, eta);

  auto softmax = [](const Vec& x) -> Vec {
    Vec e = (x.array() - x.maxCoeff()).exp();
    return e / e.sum();
  };
  const Vec a_expect = softmax(s.a.array().log().matrix() - eta * (skew2() * s.b));
  CHECK((next.a - a_expect).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK(next.a.sum() == doctest::Approx(1.0).epsilon(1e-13));
  const Vec b_expect =
      softmax(s.b.array().log().matrix() + eta * (skew2().transpose() * next.a));
  CHECK((next.b - b_expect).lpNorm<Eigen::Infinity>() <= 1e-14);
  CHECK(next.b.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("dual recursion at zero stepsize and on quadratic conjugates") {
  const auto half_sq = SmoothScalarFamily::quadratic(0.5 * Mat::Identity(2, 2));
  const DualPoint z{vec2(0.4, -0.2), vec2(0.1, 0.9)};

  const DualPoint frozen = damd_step(half_sq, half_sq, skew2(), z, 0.0);
  CHECK((frozen.x - z.x).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((frozen.y - z.y).lpNorm<Eigen::Infinity>() == 0.0);

  const double eta = 0.2;
  const DualPoint next = damd_step(half_sq, half_sq, skew2(), z, eta);
  const Vec x_expect = z.x - eta * (skew2() * z.y);
  const Vec y_expect = z.y + eta * (skew2().transpose() * x_expect);
  CHECK((next.x - x_expect).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((next.y - y_expect).lpNorm<Eigen::Infinity>() <= 1e-15);
}

TEST_CASE("strategy update and dual recursion are the same map in dual coordinates") {
  const GameInstance game = entropic_game(skew2(), false);
  auto lse = SmoothScalarFamily::custom(
      2,
      [](const Vec& x) {
        const double m = x.maxCoeff();
        return m + std::log((x.array() - m).exp().sum());
      },
      [](const Vec& x) -> Vec {
        Vec e = (x.array() - x.maxCoeff()).exp();
        return e / e.sum();
      });

  const StrategyPair s(vec2(0.4, 0.6), vec2(0.25, 0.75));
  const double eta = 0.15;
  const StrategyPair via_strategies = amd_step(game, s, eta);

  const DualPoint z{game.reg_a.gradient(s.a), game.reg_b.gradient(s.b)};
  const DualPoint via_duals = damd_step(lse, lse, skew2(), z, eta);
  CHECK((game.reg_a.conjugate_gradient(via_duals.x) - via_strategies.a)
            .lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((game.reg_b.conjugate_gradient(via_duals.y) - via_strategies.b)
            .lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("trajectories have aligned primal and dual records") {
  const GameInstance game = entropic_game(skew2(), false);
  const StrategyPair start(vec2(0.5, 0.5), vec2(0.5, 0.5));
  const auto traj = run_amd(game, start, 0.1, 25);
  CHECK(traj.steps() == 25);
  CHECK(traj.pairs.size() == 26);
  CHECK(traj.duals.size() == 26);
  for (const auto& pair : traj.pairs) {
    require_pair_feasible(game, pair);
  }

  const auto frozen = run_amd(game, start, 0.1, 0);
  CHECK(frozen.steps() == 0);
  CHECK(frozen.pairs.size() == 1);
}

TEST_CASE("carried duals reproduce the strategies and stay conjugate") {
  const GameInstance game = entropic_game(skew2(), false);
  const auto traj = run_amd(game, StrategyPair(vec2(0.5, 0.5), vec2(0.5, 0.5)), 0.1, 200);
  CHECK(conjugacy_residual(game, traj) <= 1e-10);
}

TEST_CASE("linear pushforward carries the dual recursion onto phase space") {
  const auto half_sq = SmoothScalarFamily::quadratic(0.5 * Mat::Identity(2, 2));
  Vec p(2), q(2);
  p << 0.4, -0.3;
  q << 0.2, 0.6;
  const PhasePoint z0(p, q);

  CHECK(pushforward_check(half_sq, half_sq, symmetric_decompose(Mat::Identity(2, 2)), z0, 0.1,
                          100) <= 1e-12);
  CHECK(pushforward_check(half_sq, half_sq, symmetric_decompose(Mat::Identity(2, 2)), z0, 0.1,
                          0) == 0.0);

  Mat diag(2, 2);
  diag << 2, 0, 0, 3;
  CHECK(pushforward_check(half_sq, half_sq, symmetric_decompose(diag), z0, 0.1, 100) <= 1e-10);

  Mat shear(2, 2);
  shear << 1, 1, 0, 2;
  CHECK(pushforward_check(half_sq, half_sq, symmetric_decompose(shear), z0, 0.1, 100) <= 1e-10);
}

TEST_CASE("duality gap pins on the skew game") {
  const GameInstance game = entropic_game(skew2(), false);
  CHECK(duality_gap(game, StrategyPair(vec2(0.5, 0.5), vec2(0.5, 0.5))) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // The second pure strategy pair is the equilibrium of this payoff.
  CHECK(duality_gap(game, StrategyPair(vec2(0.0, 1.0), vec2(0.0, 1.0))) ==
        doctest::Approx(0.0).epsilon(1e-14));

  const GameInstance flat = entropic_game(Mat::Zero(2, 2), false);
  CHECK(duality_gap(flat, StrategyPair(vec2(0.3, 0.7), vec2(0.8, 0.2))) == 0.0);

  const GameInstance free =
      make_game(Mat::Identity(2, 2), Regularizer::half_squared_norm(Mat::Identity(2, 2)),
                Regularizer::half_squared_norm(Mat::Identity(2, 2)), true);
  CHECK_THROWS_AS(duality_gap(free, StrategyPair(vec2(0.1, 0.2), vec2(0.3, 0.4))),
                  mh::UnboundedDomain);
}

TEST_CASE("duality gap is nonnegative and vanishes at the uniform equilibrium") {
  const GameInstance game = entropic_game(rock_paper_scissors(), false);
  const Vec uniform = Vec::Constant(3, 1.0 / 3.0);
  CHECK(duality_gap(game, StrategyPair(uniform, uniform)) <= 1e-15);

  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 1000; ++trial) {
    const StrategyPair s(random_simplex(rng, 3), random_simplex(rng, 3));
    CHECK(duality_gap(game, s) >= 0.0);
  }
}

TEST_CASE("averaged-iterate gap reductions") {
  const GameInstance game = entropic_game(rock_paper_scissors(), false);
  const Vec uniform = Vec::Constant(3, 1.0 / 3.0);
  std::vector<StrategyPair> constant(5, StrategyPair(uniform, uniform));
  CHECK(average_iterate_gap(game, constant, 4) <= 1e-15);

  std::mt19937_64 rng(62);
  const auto traj =
      run_amd(game, StrategyPair(random_simplex(rng, 3), random_simplex(rng, 3)), 0.1, 3);
  CHECK(average_iterate_gap(game, traj.pairs, 1) ==
        doctest::Approx(duality_gap(game, traj.pairs[0])).epsilon(1e-13));
}

TEST_CASE("regret sums collapse on trivial inputs") {
  const GameInstance flat = entropic_game(Mat::Zero(2, 2), false);
  const auto traj = run_amd(flat, StrategyPair(vec2(0.5, 0.5), vec2(0.5, 0.5)), 0.1, 10);
  CHECK(total_regret(flat, traj.pairs) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(cumulative_regret(flat, traj.pairs, StrategyPair(vec2(1.0, 0.0), vec2(0.0, 1.0))) ==
        doctest::Approx(0.0).epsilon(1e-14));

  const GameInstance game = entropic_game(skew2(), false);
  std::vector<StrategyPair> single{StrategyPair(vec2(0.5, 0.5), vec2(0.5, 0.5))};
  CHECK(cumulative_regret(game, single, StrategyPair(vec2(1.0, 0.0), vec2(0.0, 1.0))) == 0.0);
}

TEST_CASE("averaged gap equals scaled regret minus the telescoped payoff") {
  const GameInstance game = entropic_game(rock_paper_scissors(), false);
  std::mt19937_64 rng(64);
  const auto traj =
      run_amd(game, StrategyPair(random_simplex(rng, 3), random_simplex(rng, 3)), 0.08, 200);
  CHECK(verify_gap_regret_identity(game, traj.pairs, 1) <= 1e-12);
  CHECK(verify_gap_regret_identity(game, traj.pairs, 200) <= 1e-9);
  for (long K : {10L, 50L, 120L}) {
    CHECK(verify_gap_regret_identity(game, traj.pairs, K) <= 1e-9);
  }

  const GameInstance flat = entropic_game(Mat::Zero(3, 3), false);
  const auto still = run_amd(flat, StrategyPair(Vec::Constant(3, 1.0 / 3.0),
                                                Vec::Constant(3, 1.0 / 3.0)),
                             0.1, 20);
  CHECK(verify_gap_regret_identity(flat, still.pairs, 20) <= 1e-14);
}

TEST_CASE("dual-coordinate formula reproduces the cumulative regret exactly") {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 3; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const Mat A = random_real_spectrum(rng, d);
    const GameInstance game =
        make_game(A, Regularizer::negative_entropy(d), Regularizer::negative_entropy(d), true);
    const Vec uniform = Vec::Constant(d, 1.0 / d);
    const auto traj = run_amd(game, StrategyPair(uniform, uniform), 0.05, 60);

    std::vector<StrategyPair> comparators{StrategyPair(uniform, uniform)};
    for (int c = 0; c < 3; ++c) {
      comparators.emplace_back(random_simplex(rng, d), random_simplex(rng, d));
    }
    for (const auto& cmp : comparators) {
      for (long K : {1L, 7L, 60L}) {
        const std::vector<StrategyPair> prefix(traj.pairs.begin(),
                                               traj.pairs.begin() + K + 1);
        const double direct = cumulative_regret(game, prefix, cmp);
        const double via_duals = lemma_regret_formula(game, traj, cmp, K);
        CHECK(std::abs(direct - via_duals) <= 1e-9 * std::max(1.0, std::abs(direct)));
      }
    }
  }
}
