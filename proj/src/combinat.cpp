#include "mh/combinat.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mh/termpoly.hpp"

namespace mh::combinat {

namespace {

// Row cache for stirling2: tables are tiny (k <= a few hundred) and the
// callers hammer the same rows.
std::map<std::pair<int, int>, Int>& stirling_cache() {
  static std::map<std::pair<int, int>, Int> cache;
  return cache;
}

}  // namespace

Int stirling2(int k, int n) {
  if (k < 0 || n < 0) throw std::invalid_argument("stirling2: negative index");
  if (n > k) return 0;
  if (k == 0) return n == 0 ? 1 : 0;
  if (n == 0) return 0;
  auto key = std::make_pair(k, n);
  auto& cache = stirling_cache();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  Int value = Int(n) * stirling2(k - 1, n) + stirling2(k - 1, n - 1);
  cache.emplace(key, value);
  return value;
}

Int fubini(int n) {
  Int acc = 0;
  for (int m = 0; m <= n; ++m) acc += factorial(m) * stirling2(n, m);
  return acc;
}

namespace {

// Sum over tuples (r_1, s_1, ..., r_n, s_n) with r_i + s_i > 0 and total k
// of 1 / prod(r_i! s_i!). The caller multiplies by k!. Brute force on
// purpose: this is the independent check of the closed form, so no
// per-pair collapse to 2^c / c! is applied here.
Rat lemma1_rec(int remaining, int pairs_left) {
  if (pairs_left == 0) return remaining == 0 ? Rat(1) : Rat(0);
  Rat acc = 0;
  // This pair consumes c >= 1, leaving at least pairs_left - 1 behind.
  for (int c = 1; c <= remaining - (pairs_left - 1); ++c) {
    Rat inner = 0;
    for (int r = 0; r <= c; ++r)
      inner += Rat(1) / Rat(factorial(r) * factorial(c - r));
    acc += inner * lemma1_rec(remaining - c, pairs_left - 1);
  }
  return acc;
}

}  // namespace

Int lemma1_lhs(int k, int n) {
  if (n < 1 || n > k) throw std::invalid_argument("lemma1_lhs: need 1 <= n <= k");
  // Individual multinomials are integers but the partial quotients are not,
  // so accumulate in rationals and assert integrality at the end.
  Rat total = Rat(factorial(k)) * lemma1_rec(k, n);
  if (denominator(total) != 1)
    throw std::logic_error("lemma1_lhs: non-integer total");
  return numerator(total);
}

double backseat_sum(int k, double r) {
  if (k < 1 || r <= 0) throw std::invalid_argument("backseat_sum: need k >= 1, r > 0");
  if (k > 300) return std::exp(backseat_log_sum(k, r));
  double acc = 0.0;
  for (int n = 1; n <= k; ++n) {
    double prod = 1.0;
    for (int m = 0; m < n; ++m) {
      double kk = static_cast<double>(k) * k - static_cast<double>(m) * m;
      double nn = static_cast<double>(n) * n - static_cast<double>(m) * m;
      prod *= r * kk / nn;
    }
    acc += prod;
  }
  return acc;
}

double backseat_log_sum(int k, double r) {
  if (k < 1 || r <= 0) throw std::invalid_argument("backseat_log_sum: need k >= 1, r > 0");
  // log-sum-exp over the n terms; every factor is positive.
  std::vector<double> logs(static_cast<size_t>(k));
  double max_log = -HUGE_VAL;
  for (int n = 1; n <= k; ++n) {
    double lg = 0.0;
    for (int m = 0; m < n; ++m) {
      double kk = static_cast<double>(k) * k - static_cast<double>(m) * m;
      double nn = static_cast<double>(n) * n - static_cast<double>(m) * m;
      lg += std::log(r) + std::log(kk) - std::log(nn);
    }
    logs[static_cast<size_t>(n - 1)] = lg;
    if (lg > max_log) max_log = lg;
  }
  double acc = 0.0;
  for (double lg : logs) acc += std::exp(lg - max_log);
  return max_log + std::log(acc);
}

double backseat_bound(int k, double r) {
  return static_cast<double>(k) * std::exp(k * std::log((2.0 + r + std::sqrt(r * (4.0 + r))) / 2.0));
}

double backseat_log_bound(int k, double r) {
  return std::log(static_cast<double>(k)) + k * std::log((2.0 + r + std::sqrt(r * (4.0 + r))) / 2.0);
}

Rat bernoulli(int n) {
  if (n < 0) throw std::invalid_argument("bernoulli: negative index");
  // Akiyama-Tanigawa: start a_j = 1/(j+1), sweep n times, read a_0.
  std::vector<Rat> a(static_cast<size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) a[static_cast<size_t>(j)] = Rat(1, j + 1);
  for (int i = 1; i <= n; ++i)
    for (int j = 0; j <= n - i; ++j)
      a[static_cast<size_t>(j)] =
          Rat(j + 1) * (a[static_cast<size_t>(j)] - a[static_cast<size_t>(j) + 1]);
  return a[0];
}

Rat bernoulli_via_stirling(int n) {
  if (n < 0) throw std::invalid_argument("bernoulli_via_stirling: negative index");
  Rat acc = 0;
  for (int m = 0; m <= n; ++m) {
    Rat term = Rat(factorial(m) * stirling2(n, m), m + 1);
    if (m % 2 == 1) term = -term;
    acc += term;
  }
  return acc;
}

namespace {

using symbolic::Sym;
using symbolic::TermPoly;

// Exact value of a bracket string evaluated at derivative values val_f[k],
// val_g[k] (zero beyond the stored range).
Rat eval_letters(const std::vector<int>& letters, const std::vector<Rat>& val_f,
                 const std::vector<Rat>& val_g) {
  TermPoly t = symbolic::ipb_letters(letters);
  return t.eval_exact([&](Sym s) -> Rat {
    const auto& tab = s.is_g ? val_g : val_f;
    if (s.order >= static_cast<int>(tab.size())) return Rat(0);
    return tab[static_cast<size_t>(s.order)];
  });
}

}  // namespace

BoundCheckReport quadratic_ipb_bound_check(const Rat& a, const Rat& b, int max_weight) {
  if (a <= 0 || b <= 0)
    throw std::invalid_argument("quadratic_ipb_bound_check: need a, b > 0");
  // F = a p^2, G = b q^2 at p = q = 1.
  const std::vector<Rat> val_f = {a, 2 * a, 2 * a};
  const std::vector<Rat> val_g = {b, 2 * b, 2 * b};
  const Rat base = 4 * std::max(a, b);

  BoundCheckReport report;
  // Distinct bracket strings of each length; words with merged runs
  // collapse onto these.
  for (int w = 1; w <= max_weight; ++w) {
    Rat bound = 1;
    for (int i = 0; i < w; ++i) bound *= base;
    for (unsigned mask = 0; mask < (1u << w); ++mask) {
      std::vector<int> letters(static_cast<size_t>(w));
      for (int i = 0; i < w; ++i) letters[static_cast<size_t>(i)] = (mask >> i) & 1u;
      Rat v = eval_letters(letters, val_f, val_g);
      ++report.checked;
      if (abs(v) > bound) {
        report.pass = false;
        report.failed_weight = w;
        std::ostringstream os;
        os << "weight " << w << " string value " << rat_str(v) << " exceeds "
           << rat_str(bound);
        report.detail = os.str();
        return report;
      }
    }
  }
  return report;
}

Rat quartic_alternating_ipb(int n) {
  if (n < 1) throw std::invalid_argument("quartic_alternating_ipb: need n >= 1");
  // F = p^4, G = q^4 at p = q = 1: derivatives 1, 4, 12, 24, 24, then zero.
  const std::vector<Rat> vals = {Rat(1), Rat(4), Rat(12), Rat(24), Rat(24)};
  std::vector<int> letters;
  letters.reserve(static_cast<size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    letters.push_back(1);  // G
    letters.push_back(0);  // F
  }
  return eval_letters(letters, vals, vals);
}

}  // namespace mh::combinat
