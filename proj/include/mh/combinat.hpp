#ifndef MH_COMBINAT_HPP
#define MH_COMBINAT_HPP

#include <string>

#include "mh/rational.hpp"

namespace mh::combinat {

// Stirling numbers of the second kind, S(k, n) = n*S(k-1, n) + S(k-1, n-1).
Int stirling2(int k, int n);

// Fubini (ordered-set-partition) numbers, a_n = sum_m m! * S(n, m).
Int fubini(int n);

// Brute-force enumeration of all tuples (r_1, s_1, ..., r_n, s_n) with
// r_i + s_i > 0 and total sum k, accumulating k! / prod(r_i! s_i!).
// Closed form: n! * 2^k * S(k, n).
Int lemma1_lhs(int k, int n);

// sum_{n=1}^{k} prod_{m=0}^{n-1} r (k^2 - m^2) / (n^2 - m^2) and its
// upper bound k * ((2 + r + sqrt(r (4 + r))) / 2)^k.
// Direct products up to k = 300; the log variants stay finite beyond that.
double backseat_sum(int k, double r);
double backseat_bound(int k, double r);
double backseat_log_sum(int k, double r);
double backseat_log_bound(int k, double r);

// Exact Bernoulli numbers. bernoulli() uses the Akiyama-Tanigawa recurrence
// (B_1 = +1/2 family); bernoulli_via_stirling() is the independent
// sum-over-Stirling route (B_1 = -1/2 family). Only even indices are
// consumed downstream, where the two agree.
Rat bernoulli(int n);
Rat bernoulli_via_stirling(int n);

struct BoundCheckReport {
  bool pass = true;
  int checked = 0;          // number of bracket strings evaluated
  int failed_weight = -1;   // weight of the first violated bound
  std::string detail;       // human-readable witness when failed
};

// For F = a p^2, G = b q^2 evaluated at (p, q) = (1, 1): every iterated
// bracket of total weight <= max_weight is bounded by max(4a, 4b)^weight.
// Exact rational evaluation; a, b > 0.
BoundCheckReport quadratic_ipb_bound_check(const Rat& a, const Rat& b, int max_weight);

// For F = p^4, G = q^4 at (1, 1): the alternating bracket string
// G F G F ... of length 2n. Grows like (n+1) (2n)! 4^(2n-1), which defeats
// any c^weight bound; returned exactly so the growth law can be checked.
Rat quartic_alternating_ipb(int n);

}  // namespace mh::combinat

#endif  // MH_COMBINAT_HPP
