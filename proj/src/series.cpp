#include "mh/series.hpp"

#include <deque>
#include <mutex>

#include "mh/combinat.hpp"
#include "mh/errors.hpp"

namespace mh::series {

using symbolic::TermPoly;

namespace {

TermPoly poly_pow(const TermPoly& base, int e) {
  TermPoly out = TermPoly::constant(1);
  for (int i = 0; i < e; ++i) {
    out = out * base;
  }
  return out;
}

// Iterates over all compositions of `total` into `parts` strictly positive
// integers and invokes fn on each.
template <typename Fn>
void for_each_composition(int total, int parts, std::vector<int>& ks, int idx, Fn&& fn) {
  if (idx == parts) {
    if (total == 0) {
      fn(ks);
    }
    return;
  }
  const int remaining_parts = parts - idx - 1;
  for (int k = 1; k + remaining_parts <= total; ++k) {
    ks[idx] = k;
    for_each_composition(total - k, parts, ks, idx + 1, fn);
  }
}

}  // namespace

const TermPoly& bch_correction(int n) {
  if (n < 0) {
    throw DomainViolation("correction order must be nonnegative");
  }
  static std::mutex mu;
  static std::deque<TermPoly> cache;  // deque keeps references stable
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(cache.size()) <= n) {
    const int N = static_cast<int>(cache.size());
    if (N == 0) {
      cache.push_back(TermPoly::f(0) + TermPoly::g(0));
      continue;
    }
    TermPoly rhs =
        Rat(1, 2) * symbolic::poisson(cache[N - 1], TermPoly::g(0) - TermPoly::f(0));
    for (int p = 1; 2 * p <= N; ++p) {
      const Rat weight = combinat::bernoulli(2 * p) / Rat(factorial(2 * p));
      TermPoly level;
      std::vector<int> ks(2 * p);
      for_each_composition(N, 2 * p, ks, 0, [&](const std::vector<int>& comp) {
        TermPoly t = TermPoly::f(0) + TermPoly::g(0);
        for (int i = 2 * p; i >= 1; --i) {
          t = symbolic::poisson(t, cache[comp[i - 1] - 1]);
        }
        level += t;
      });
      rhs += weight * level;
    }
    rhs *= Rat(1, N + 1);
    cache.push_back(std::move(rhs));
  }
  return cache[n];
}

TermPoly dynkin_correction(int n) {
  if (n < 0) {
    throw DomainViolation("correction order must be nonnegative");
  }
  const int weight = n + 1;
  const TermPoly letter_f = TermPoly::f(0);
  const TermPoly letter_g = TermPoly::g(0);
  TermPoly total;
  for (int m = 1; m <= weight; ++m) {
    TermPoly level;
    std::vector<int> letters;  // 0 = F, 1 = G
    // Assigns pair i = (r_i, s_i), appending r_i g-letters then s_i f-letters.
    auto rec = [&](auto&& self, int pair_idx, int remaining, const Rat& inv_denom) -> void {
      if (pair_idx == m) {
        if (remaining != 0) {
          return;
        }
        // The innermost bracket {letters[1], letters[0]} dies when the first
        // two letters coincide, so skip those words outright.
        if (letters.size() >= 2 && letters[0] == letters[1]) {
          return;
        }
        TermPoly t = letters[0] ? letter_g : letter_f;
        for (std::size_t i = 1; i < letters.size(); ++i) {
          t = symbolic::poisson(letters[i] ? letter_g : letter_f, t);
        }
        level += t * inv_denom;
        return;
      }
      const int pairs_left = m - pair_idx - 1;
      for (int r = 0; r <= remaining; ++r) {
        for (int s = (r == 0 ? 1 : 0); r + s <= remaining; ++s) {
          if (remaining - r - s < pairs_left) {
            break;
          }
          for (int i = 0; i < r; ++i) {
            letters.push_back(1);
          }
          for (int i = 0; i < s; ++i) {
            letters.push_back(0);
          }
          self(self, pair_idx + 1,
               remaining - r - s,
               inv_denom / (Rat(factorial(r)) * Rat(factorial(s))));
          letters.resize(letters.size() - static_cast<std::size_t>(r + s));
        }
      }
    };
    rec(rec, 0, weight, Rat(1));
    const Rat sign = (m % 2 == 1) ? Rat(1) : Rat(-1);
    total += level * (sign / Rat(m));
  }
  return total * Rat(1, weight);
}

std::vector<std::string> dump_correction(int n) {
  std::vector<std::string> lines = bch_correction(n).dump_lines();
  if (lines.empty()) {
    lines.emplace_back("0");
  }
  return lines;
}

double truncated_mh_eval(const core::SeparableHamiltonian& H, const core::PhasePoint& z,
                         double eta, int N) {
  if (H.dim() != 1 || z.dim() != 1) {
    throw DomainViolation("symbol substitution is defined for one dimension only");
  }
  if (N < 0) {
    throw DomainViolation("truncation order must be nonnegative");
  }
  const double p = z.p[0];
  const double q = z.q[0];
  auto value_of = [&](symbolic::Sym s) {
    return s.is_g ? H.G.derivative1d(q, s.order) : H.F.derivative1d(p, s.order);
  };
  double acc = 0.0;
  double eta_pow = 1.0;
  for (int j = 0; j <= N; ++j) {
    acc += eta_pow * bch_correction(j).eval(value_of);
    eta_pow *= eta;
  }
  return acc;
}

double general_d_truncation_eval(const core::SeparableHamiltonian& H,
                                 const core::PhasePoint& z, double eta, int N) {
  if (N < 0 || N > 3) {
    throw DomainViolation("general-dimension truncation is available for orders 0..3");
  }
  double acc = H.value(z);
  if (N >= 1) {
    const core::Vec gf = H.F.gradient(z.p);
    const core::Vec gg = H.G.gradient(z.q);
    acc += eta * (-0.5) * gf.dot(gg);
    if (N >= 2) {
      const core::Mat fpp = H.F.hessian(z.p);
      const core::Mat gqq = H.G.hessian(z.q);
      acc += eta * eta / 12.0 * (gg.dot(fpp * gg) + gf.dot(gqq * gf));
      if (N >= 3) {
        acc += eta * eta * eta * (-1.0 / 12.0) * gf.dot(gqq * (fpp * gg));
      }
    }
  }
  return acc;
}

namespace {

// phi[t] = (-1)^t f_{t+1} g_1^t / t!, the eta-expansion of the velocity shift
// the p-first update induces inside the q-update.
EtaPoly phi_series(int max_deg) {
  EtaPoly phi(static_cast<std::size_t>(max_deg) + 1);
  TermPoly g1_pow = TermPoly::constant(1);
  for (int t = 0; t <= max_deg; ++t) {
    const Rat c = Rat(t % 2 == 0 ? 1 : -1) / Rat(factorial(t));
    phi[static_cast<std::size_t>(t)] = TermPoly::f(t + 1) * g1_pow * c;
    g1_pow = g1_pow * TermPoly::g(1);
  }
  return phi;
}

EtaPoly eta_mul(const EtaPoly& a, const EtaPoly& b, int max_deg) {
  EtaPoly out(static_cast<std::size_t>(max_deg) + 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) {
      continue;
    }
    for (std::size_t j = 0; j < b.size() && i + j <= static_cast<std::size_t>(max_deg); ++j) {
      if (b[j].is_zero()) {
        continue;
      }
      out[i + j] += a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

TermPoly omega_coefficient(int j, int k) {
  if (j < 1 || k < 0) {
    throw DomainViolation("remainder coefficients need j >= 1, k >= 0");
  }
  const TermPoly& hk = bch_correction(k);

  // Mixed derivatives d[m][l] = d_p^m d_q^l H_k for m + l <= j.
  std::vector<std::vector<TermPoly>> d(static_cast<std::size_t>(j) + 1);
  d[0].push_back(hk);
  for (int l = 1; l <= j; ++l) {
    d[0].push_back(symbolic::diff_q(d[0][static_cast<std::size_t>(l) - 1]));
  }
  for (int m = 1; m <= j; ++m) {
    d[static_cast<std::size_t>(m)].push_back(
        symbolic::diff_p(d[static_cast<std::size_t>(m) - 1][0]));
    for (int l = 1; m + l <= j; ++l) {
      d[static_cast<std::size_t>(m)].push_back(
          symbolic::diff_q(d[static_cast<std::size_t>(m)][static_cast<std::size_t>(l) - 1]));
    }
  }

  // Powers of the shift series, truncated past eta^{j-1}.
  const EtaPoly phi = phi_series(j);
  std::vector<EtaPoly> phi_pow(static_cast<std::size_t>(j) + 1);
  phi_pow[0] = EtaPoly{TermPoly::constant(1)};
  for (int e = 1; e <= j; ++e) {
    phi_pow[static_cast<std::size_t>(e)] = eta_mul(phi_pow[static_cast<std::size_t>(e) - 1], phi, j);
  }

  TermPoly g1_pow[2] = {TermPoly::constant(1), TermPoly::g(1)};
  TermPoly out;
  for (int i = 1; i <= j; ++i) {
    const Rat inv_fact = Rat(1) / Rat(factorial(i));
    for (int m = 0; m <= i; ++m) {
      const int t = j - i;           // eta power extracted from the shift series
      const int e = i - m;           // power of the shift series
      const EtaPoly& pw = phi_pow[static_cast<std::size_t>(e)];
      if (t >= static_cast<int>(pw.size()) || pw[static_cast<std::size_t>(t)].is_zero()) {
        continue;
      }
      const TermPoly& deriv = d[static_cast<std::size_t>(m)][static_cast<std::size_t>(i - m)];
      if (deriv.is_zero()) {
        continue;
      }
      TermPoly g1m = TermPoly::constant(1);
      for (int r = 0; r < m; ++r) {
        g1m = g1m * g1_pow[1];
      }
      const Rat c = inv_fact * Rat(binomial(i, m)) * Rat(m % 2 == 0 ? 1 : -1);
      out += deriv * g1m * pw[static_cast<std::size_t>(t)] * c;
    }
  }
  return out;
}

CancellationReport cancellation_check(int N) {
  if (N < 0) {
    throw DomainViolation("diagonal count must be nonnegative");
  }
  for (int i = 0; i <= N; ++i) {
    TermPoly s;
    for (int j = 0; j <= i; ++j) {
      s += omega_coefficient(i + 1 - j, j);
    }
    if (!s.is_zero()) {
      return CancellationReport{false, i, std::move(s)};
    }
  }
  return CancellationReport{};
}

Rat phi_bound(int N) {
  if (N < 0) {
    throw DomainViolation("diagonal index must be nonnegative");
  }
  Rat total = 0;
  for (int m = 0; m <= N; ++m) {
    total += omega_coefficient(N + 2 - m, m).l1();
  }
  return total;
}

}  // namespace mh::series
