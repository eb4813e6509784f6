#ifndef MH_TERMPOLY_HPP
#define MH_TERMPOLY_HPP

#include <compare>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mh/rational.hpp"

namespace mh::symbolic {

// One abstract derivative symbol in the d = 1 term algebra:
// f_k stands for F^(k)(p), g_k for G^(k)(q).
struct Sym {
  int is_g = 0;   // 0: f family, 1: g family
  int order = 0;  // k >= 0
  auto operator<=>(const Sym&) const = default;
};

// Product of symbol powers, kept sorted (f's ascending, then g's ascending)
// with strictly positive exponents. The sorted form is the canonical key.
using Monomial = std::vector<std::pair<Sym, int>>;

// Exact-rational multivariate polynomial over the derivative symbols.
// Zero coefficients are never stored, so map equality is structural equality.
class TermPoly {
 public:
  std::map<Monomial, Rat> terms;

  TermPoly() = default;

  static TermPoly constant(const Rat& c);
  static TermPoly symbol(Sym s);
  static TermPoly f(int k) { return symbol(Sym{0, k}); }
  static TermPoly g(int k) { return symbol(Sym{1, k}); }

  bool is_zero() const { return terms.empty(); }

  TermPoly& operator+=(const TermPoly& o);
  TermPoly& operator-=(const TermPoly& o);
  TermPoly& operator*=(const Rat& c);
  friend TermPoly operator+(TermPoly a, const TermPoly& b) { return a += b; }
  friend TermPoly operator-(TermPoly a, const TermPoly& b) { return a -= b; }
  friend TermPoly operator*(TermPoly a, const Rat& c) { return a *= c; }
  friend TermPoly operator*(const Rat& c, TermPoly a) { return a *= c; }
  friend TermPoly operator*(const TermPoly& a, const TermPoly& b);
  bool operator==(const TermPoly&) const = default;

  // Highest derivative order appearing, per family. -1 when absent.
  int max_f_order() const;
  int max_g_order() const;

  // Sum of absolute coefficient values (the remainder-diagonal metric).
  Rat l1() const;

  // Substitute numeric values for every symbol.
  double eval(const std::function<double(Sym)>& value_of) const;
  Rat eval_exact(const std::function<Rat(Sym)>& value_of) const;

  // Canonical printed form, one term per line: "coeff * f_i^a * g_j^b",
  // sorted by monomial key. The dump subcommand and golden files use this.
  std::vector<std::string> dump_lines() const;
};

// Linear derivations with d_p f_k = f_{k+1}, d_p g_k = 0 (and symmetrically
// for d_q), extended by the product rule.
TermPoly diff_p(const TermPoly& t);
TermPoly diff_q(const TermPoly& t);

// {u, v} = -(d_p u)(d_q v) + (d_q u)(d_p v).
TermPoly poisson(const TermPoly& u, const TermPoly& v);

// Alternating exponent tuple (r_1, s_1, ..., r_n, s_n), r_i + s_i > 0.
struct BracketWord {
  std::vector<std::pair<int, int>> pairs;
  explicit BracketWord(std::vector<std::pair<int, int>> rs);
  int weight() const;  // sum of all r_i + s_i
};

enum class Leading { F, G };

// Iterated bracket of the letter string the word spells out, with the first
// letter innermost: {l1 l2 l3} = {{l1, l2}, l3}. 'leading' names the family
// the r_i exponents count. Single-letter strings return the bare function.
TermPoly ipb(const BracketWord& word, Leading leading);

// Same nesting applied directly to a letter string (0 = F, 1 = G,
// letters[0] innermost). The word form above flattens to this.
TermPoly ipb_letters(const std::vector<int>& letters);

}  // namespace mh::symbolic

#endif  // MH_TERMPOLY_HPP
