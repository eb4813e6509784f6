#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "mh/core.hpp"
#include "mh/errors.hpp"
#include "mh/integrators.hpp"

using namespace mh::core;
using namespace mh::integrators;

namespace {

SeparableHamiltonian unit_quadratic() {
  return SeparableHamiltonian(SmoothScalarFamily::quadratic(Mat::Identity(1, 1)),
                              SmoothScalarFamily::quadratic(Mat::Identity(1, 1)));
}

SeparableHamiltonian scaled_quadratic(double a, double b) {
  return SeparableHamiltonian(SmoothScalarFamily::quadratic(Mat::Constant(1, 1, a)),
                              SmoothScalarFamily::quadratic(Mat::Constant(1, 1, b)));
}

Mat random_symmetric(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = unif(rng);
  return Mat(0.5 * (m + m.transpose()));
}

}  // namespace

TEST_CASE("explicit alternating step on the unit quadratic") {
  const auto H = unit_quadratic();

  const PhasePoint z1 = symplectic_euler_step(H, PhasePoint(1.0, 0.0), 0.1);
  CHECK(z1.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z1.q[0] == doctest::Approx(0.2).epsilon(1e-15));

  const PhasePoint z0 = symplectic_euler_step(H, PhasePoint(1.0, 1.0), 0.0);
  CHECK(z0.p[0] == 1.0);
  CHECK(z0.q[0] == 1.0);

  const PhasePoint z2 = symplectic_euler_step(H, PhasePoint(1.0, 1.0), 0.1);
  CHECK(z2.p[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(z2.q[0] == doctest::Approx(1.16).epsilon(1e-15));
}

TEST_CASE("simultaneous explicit step on the unit quadratic") {
  const auto H = unit_quadratic();

  const PhasePoint z1 = forward_euler_step(H, PhasePoint(1.0, 1.0), 0.1);
  CHECK(z1.p[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(z1.q[0] == doctest::Approx(1.2).epsilon(1e-15));

  const PhasePoint z2 = forward_euler_step(H, PhasePoint(1.0, 0.0), 0.1);
  CHECK(z2.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z2.q[0] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("implicit step solves its fixed point") {
  const auto H = unit_quadratic();

  StepperConfig still(0.0, Scheme::Backward);
  const auto at_rest = backward_euler_step(H, PhasePoint(1.0, 1.0), still);
  CHECK(at_rest.z.p[0] == 1.0);
  CHECK(at_rest.z.q[0] == 1.0);
  CHECK(at_rest.iterations == 0);

  const double eta = 0.1;
  StepperConfig cfg(eta, Scheme::Backward);
  const auto res = backward_euler_step(H, PhasePoint(1.0, 1.0), cfg);
  // The quadratic fixed point has a closed solution to verify against.
  const double p_exact = (1.0 - 2.0 * eta) / (1.0 + 4.0 * eta * eta);
  const double q_exact = 1.0 + 2.0 * eta * p_exact;
  CHECK(std::abs(res.z.p[0] - p_exact) <= 1e-13);
  CHECK(std::abs(res.z.q[0] - q_exact) <= 1e-13);
  CHECK(res.iterations >= 1);
}

TEST_CASE("implicit step dissipates a convex quadratic") {
  const auto H = unit_quadratic();
  for (double eta : {0.05, 0.1, 0.2, 0.3}) {
    StepperConfig cfg(eta, Scheme::Backward);
    const PhasePoint z(1.0, 1.0);
    const auto res = backward_euler_step(H, z, cfg);
    CHECK(H.value(res.z) < H.value(z));
  }
}

TEST_CASE("closed-form quadratic step matches its matrix") {
  const PhasePoint z1 = exact_quadratic_step(Mat::Identity(1, 1), Mat::Identity(1, 1),
                                             PhasePoint(1.0, 0.0), 0.1);
  CHECK(z1.p[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(z1.q[0] == doctest::Approx(0.2).epsilon(1e-15));

  const PhasePoint z0 = exact_quadratic_step(Mat::Identity(1, 1), Mat::Identity(1, 1),
                                             PhasePoint(0.7, -0.3), 0.0);
  CHECK(z0.p[0] == 0.7);
  CHECK(z0.q[0] == -0.3);

  const double a = 2.0, b = 3.0, eta = 0.05;
  const Eigen::Matrix2d M = quadratic_step_matrix_1d(a, b, eta);
  CHECK(M(0, 0) == 1.0);
  CHECK(M(0, 1) == -2.0 * b * eta);
  CHECK(M(1, 0) == 2.0 * a * eta);
  CHECK(M(1, 1) == doctest::Approx(1.0 - 4.0 * a * b * eta * eta).epsilon(1e-15));

  const PhasePoint z = exact_quadratic_step(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b),
                                            PhasePoint(0.4, -1.1), eta);
  const Eigen::Vector2d via_matrix = M * Eigen::Vector2d(0.4, -1.1);
  CHECK(std::abs(z.p[0] - via_matrix[0]) <= 1e-15);
  CHECK(std::abs(z.q[0] - via_matrix[1]) <= 1e-15);
}

TEST_CASE("closed-form step coincides with the alternating step on random quadratics") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const Mat B = random_symmetric(rng, d);
    const Mat C = random_symmetric(rng, d);
    Vec p(d), q(d);
    for (int i = 0; i < d; ++i) {
      p[i] = unif(rng);
      q[i] = unif(rng);
    }
    const PhasePoint z(p, q);
    const double eta = 0.05;
    const SeparableHamiltonian H(SmoothScalarFamily::quadratic(B),
                                 SmoothScalarFamily::quadratic(C));
    const PhasePoint via_exact = exact_quadratic_step(B, C, z, eta);
    const PhasePoint via_euler = symplectic_euler_step(H, z, eta);
    CHECK((via_exact.p - via_euler.p).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((via_exact.q - via_euler.q).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}

TEST_CASE("trajectories record every point including the start") {
  const auto H = unit_quadratic();
  const StepperConfig cfg(0.1, Scheme::Symplectic);

  const auto empty = run_trajectory(H, PhasePoint(1.0, 1.0), cfg, 0);
  CHECK(empty.points.size() == 1);
  CHECK(empty.energies.size() == 1);
  CHECK(empty.steps() == 0);
  CHECK(empty.energies[0] == doctest::Approx(2.0).epsilon(1e-15));

  const auto five = run_trajectory(H, PhasePoint(1.0, 1.0), cfg, 5);
  CHECK(five.points.size() == 6);
  CHECK(five.energies.size() == 6);
  CHECK(five.implicit_iterations.size() == 5);
}

TEST_CASE("bounded oscillation for the log cosh system") {
  const SeparableHamiltonian H(SmoothScalarFamily::log_cosh(1), SmoothScalarFamily::log_cosh(1));
  const auto traj = run_trajectory(H, PhasePoint(1.0, 1.0), StepperConfig(0.05, Scheme::Symplectic),
                                   1000);
  REQUIRE(traj.points.size() == 1001);
  for (const auto& z : traj.points) {
    CHECK(std::isfinite(z.p[0]));
    CHECK(std::isfinite(z.q[0]));
    CHECK(std::abs(z.p[0]) <= 10.0);
    CHECK(std::abs(z.q[0]) <= 10.0);
  }
  for (double e : traj.energies) CHECK(std::isfinite(e));
}

TEST_CASE("energy drifts monotonically for the two non-symplectic schemes") {
  const auto H = unit_quadratic();
  const auto rising =
      run_trajectory(H, PhasePoint(1.0, 1.0), StepperConfig(0.1, Scheme::Forward), 50);
  for (size_t k = 1; k < rising.energies.size(); ++k) {
    CHECK(rising.energies[k] > rising.energies[k - 1]);
  }

  const auto falling =
      run_trajectory(H, PhasePoint(1.0, 1.0), StepperConfig(0.1, Scheme::Backward), 50);
  for (size_t k = 1; k < falling.energies.size(); ++k) {
    CHECK(falling.energies[k] < falling.energies[k - 1]);
  }
}

TEST_CASE("logarithmic system conserves the coordinate product") {
  const SeparableHamiltonian H(SmoothScalarFamily::log_shift(0.0, 1),
                               SmoothScalarFamily::log_shift(0.0, 1));
  const auto traj = run_trajectory(H, PhasePoint(2.0, 2.0), StepperConfig(0.1, Scheme::Symplectic),
                                   10000);
  const double c = 4.0;
  double worst = 0.0;
  for (const auto& z : traj.points) {
    worst = std::max(worst, std::abs(z.p[0] * z.q[0] - c) / c);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("one-step map preserves the symplectic form") {
  const SeparableHamiltonian logcosh(SmoothScalarFamily::log_cosh(1),
                                     SmoothScalarFamily::log_cosh(1));
  CHECK(symplecticity_defect(logcosh, PhasePoint(0.3, -0.4), 0.1) <= 1e-10);

  const auto quad = scaled_quadratic(1.5, 0.5);
  CHECK(symplecticity_defect(quad, PhasePoint(0.9, 1.1), 0.2) <= 1e-10);

  std::mt19937_64 rng(32);
  const Mat B = random_symmetric(rng, 2);
  const Mat C = random_symmetric(rng, 2);
  const SeparableHamiltonian multi(SmoothScalarFamily::quadratic(B),
                                   SmoothScalarFamily::quadratic(C));
  Vec p(2), q(2);
  p << 0.2, -0.7;
  q << 1.0, 0.4;
  CHECK(symplecticity_defect(multi, PhasePoint(p, q), 0.1) <= 1e-10);
}

TEST_CASE("trajectory csv layout") {
  const auto H = unit_quadratic();
  const auto traj = run_trajectory(H, PhasePoint(1.0, 0.0), StepperConfig(0.1, Scheme::Symplectic),
                                   1);
  std::ostringstream os;
  traj.write_csv(os);
  const std::string text = os.str();
  CHECK(text.rfind("step,p_0,q_0,H\r\n", 0) == 0);
  // Header plus one row per recorded point, CRLF-terminated.
  size_t lines = 0;
  for (size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '\r' && text[i + 1] == '\n') ++lines;
  }
  CHECK(lines == 3);
  CHECK(text.find("step,") == 0);
  CHECK(text.find("1,") != std::string::npos);
}

TEST_CASE("step failures carry the failing index") {
  const SeparableHamiltonian H(SmoothScalarFamily::log_shift(0.0, 1),
                               SmoothScalarFamily::log_shift(0.0, 1));
  try {
    run_trajectory(H, PhasePoint(0.05, 0.05), StepperConfig(0.1, Scheme::Symplectic), 10);
    FAIL("expected the trajectory to leave the domain");
  } catch (const mh::Error& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}
