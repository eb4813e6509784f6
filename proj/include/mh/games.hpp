#ifndef MH_GAMES_HPP
#define MH_GAMES_HPP

#include <iosfwd>
#include <vector>

#include "mh/core.hpp"

namespace mh::games {

// Two-player zero-sum bilinear game: row player minimizes a^T A b over the
// domain of reg_a, column player maximizes over the domain of reg_b.
struct GameInstance {
  core::PayoffMatrix payoff;  // U, V may be empty when only A is needed
  core::Domain domain_a = core::Domain::All;
  core::Domain domain_b = core::Domain::All;
  core::Regularizer reg_a;
  core::Regularizer reg_b;

  long rows() const { return payoff.A.rows(); }
  long cols() const { return payoff.A.cols(); }
};

// Builds a game, checking that the regularizer dimensions fit the payoff.
// With decompose set, the symmetric factorization A = UV is computed up
// front (needed by the pushforward and the first-order value route); games
// whose payoff has complex spectrum must pass decompose = false.
GameInstance make_game(const core::Mat& A, core::Regularizer reg_a, core::Regularizer reg_b,
                       bool decompose);

struct StrategyPair {
  core::Vec a;
  core::Vec b;
  StrategyPair(core::Vec a_in, core::Vec b_in);
};

struct DualPoint {
  core::Vec x;
  core::Vec y;
};

// Checks membership of (a, b) in the closure of the declared domains
// (simplex sums to 1 within 1e-12, boxes within bounds). Throws
// DomainViolation on failure.
void require_pair_feasible(const GameInstance& game, const StrategyPair& s);

// One alternating update through the dual maps:
// x' = grad(reg_a)(a) - eta A b, a' = conj_grad(reg_a)(x'),
// y' = grad(reg_b)(b) + eta A^T a', b' = conj_grad(reg_b)(y').
// The b-update sees the already-updated a'.
StrategyPair amd_step(const GameInstance& game, const StrategyPair& s, double eta);

// The same recursion written on dual coordinates with explicit conjugate
// oracles: x' = x - eta A grad g(y); y' = y + eta A^T grad f(x').
DualPoint damd_step(const core::SmoothScalarFamily& f, const core::SmoothScalarFamily& g,
                    const core::Mat& A, const DualPoint& z, double eta);

// Trajectory of the alternating update. Dual coordinates are carried across
// steps by the exact dual recursion (primal iterates are read off through
// the conjugate gradients), which keeps the telescoping identities below
// exact to roundoff.
struct AmdTrajectory {
  std::vector<StrategyPair> pairs;  // K + 1 entries
  std::vector<DualPoint> duals;     // K + 1 entries, aligned with pairs
  double eta = 0.0;

  long steps() const { return static_cast<long>(pairs.size()) - 1; }
};

AmdTrajectory run_amd(const GameInstance& game, const StrategyPair& start, double eta,
                      long steps);

// Max over steps of || grad(reg_a)(a_{k+1}) - grad(reg_a)(a_k) + eta A b_k ||_inf
// and the mirrored b-residual. On simplex domains the all-ones component is
// projected out first: the constrained update fixes the dual point only up
// to that direction.
double conjugacy_residual(const GameInstance& game, const AmdTrajectory& traj);

// Runs the phase-space update and the dual recursion side by side under the
// coordinate change x = U p, y = V q (payoff factors A = U V) and returns
// max_k ||(U p_k, V q_k) - (x_k, y_k)||_inf. The phase-space Hamiltonian
// F(p) = f(U p), G(q) = g(V q) is assembled internally.
double pushforward_check(const core::SmoothScalarFamily& f, const core::SmoothScalarFamily& g,
                         const core::PayoffMatrix& payoff, const core::PhasePoint& z0,
                         double eta, long steps);

// max_{b'} a^T A b' - min_{a'} a'^T A b, each linear program solved at the
// domain vertices (coordinate max on the simplex, sign split on a box).
// Throws UnboundedDomain when either domain is all of R^d.
double duality_gap(const GameInstance& game, const StrategyPair& s);

// duality_gap at the means of the first K pairs (indices 0..K-1).
double average_iterate_gap(const GameInstance& game, const std::vector<StrategyPair>& pairs,
                           long K);

// Half-step regret sums against a fixed comparator pair:
//   sum_k ((a_k + a_{k+1})/2 - a)^T A b_k
// + sum_k a_{k+1}^T A (b - (b_k + b_{k+1})/2).
double cumulative_regret(const GameInstance& game, const std::vector<StrategyPair>& pairs,
                         const StrategyPair& comparator);

// Best cumulative regret in hindsight: the comparator maximization splits
// per player and lands on domain vertices.
double total_regret(const GameInstance& game, const std::vector<StrategyPair>& pairs);

// Residual of the averaged-iterate identity
//   gap(mean a_1..a_K, mean b_0..b_{K-1})
//     = R_K / K - (a_0^T A b_0 - a_K^T A b_K) / (2K)
// over the first K steps of the trajectory.
double verify_gap_regret_identity(const GameInstance& game,
                                  const std::vector<StrategyPair>& pairs, long K);

// Right-hand side of the dual-coordinate regret formula over the first K
// steps: (1/eta) (D(z_0, z) - D(z_K, z) + M(z_K) - M(z_0)), where D is the
// Bregman divergence of conj(reg_a) + conj(reg_b) on dual points and M is
// the first-order corrected value, evaluated through the phase-space route.
double lemma_regret_formula(const GameInstance& game, const AmdTrajectory& traj,
                            const StrategyPair& comparator, long K);

// Trajectory CSV: step, a_*, b_*, x_*, y_*, gap, running_avg_gap.
void write_amd_csv(std::ostream& os, const GameInstance& game, const AmdTrajectory& traj);

}  // namespace mh::games

#endif  // MH_GAMES_HPP
