#ifndef MH_SERIES_HPP
#define MH_SERIES_HPP

#include <string>
#include <vector>

#include "mh/core.hpp"
#include "mh/termpoly.hpp"

namespace mh::series {

// n-th correction term of the modified Hamiltonian as an exact polynomial in
// the derivative symbols: H_0 = f_0 + g_0, H_1 = -1/2 f_1 g_1, and so on.
// Computed once through the Bernoulli-weighted recursion and cached; the
// returned reference stays valid for the life of the program.
const symbolic::TermPoly& bch_correction(int n);

// The same coefficient assembled by direct summation over bracket words.
// Independent of the recursion in bch_correction, so the two act as mutual
// checks; agreement is asserted in the tests and the acceptance gate.
symbolic::TermPoly dynkin_correction(int n);

// Printed form of bch_correction(n), one canonical term per line, or the
// single line "0" when the coefficient vanishes.
std::vector<std::string> dump_correction(int n);

// Evaluates sum_{j=0}^{N} eta^j H_j at a one-dimensional phase point by
// substituting f_k = F^(k)(p), g_k = G^(k)(q). Throws OracleOrderExceeded
// when the scalar families cannot supply derivatives deep enough for N.
double truncated_mh_eval(const core::SeparableHamiltonian& H, const core::PhasePoint& z,
                         double eta, int N);

// Truncated evaluation in arbitrary dimension, available for N <= 3 only:
// those orders need nothing beyond gradients and Hessians of F and G.
double general_d_truncation_eval(const core::SeparableHamiltonian& H,
                                 const core::PhasePoint& z, double eta, int N);

// Polynomial in eta whose coefficients are term polynomials; index = power.
using EtaPoly = std::vector<symbolic::TermPoly>;

// Remainder-expansion coefficient C_{j,k} attached to eta^{j+k} through the
// correction of order k. Requires j >= 1, k >= 0.
symbolic::TermPoly omega_coefficient(int j, int k);

struct CancellationReport {
  bool pass = true;
  int first_failure_diagonal = -1;  // smallest i whose diagonal sum is nonzero
  symbolic::TermPoly residual;      // that nonzero sum, empty on pass
};

// Checks that sum_{j=0}^{i} C_{i+1-j, j} vanishes identically for every
// i <= N. Exact rational arithmetic throughout; no tolerance involved.
CancellationReport cancellation_check(int N);

// Coefficient-mass bound along the first surviving diagonal:
// sum_{m=0}^{N} l1(C_{N+2-m, m}).
Rat phi_bound(int N);

}  // namespace mh::series

#endif  // MH_SERIES_HPP
