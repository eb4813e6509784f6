#include "mh/termpoly.hpp"

#include <sstream>
#include <stdexcept>

namespace mh::symbolic {

namespace {

// Insert (s, e) into a sorted monomial, merging exponents.
Monomial mono_mul_sym(const Monomial& m, Sym s, int e) {
  Monomial out;
  out.reserve(m.size() + 1);
  bool placed = false;
  for (const auto& [sym, exp] : m) {
    if (!placed && s == sym) {
      out.emplace_back(sym, exp + e);
      placed = true;
    } else {
      if (!placed && s < sym) {
        out.emplace_back(s, e);
        placed = true;
      }
      out.emplace_back(sym, exp);
    }
  }
  if (!placed) out.emplace_back(s, e);
  return out;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  // Merge of two sorted factor lists.
  Monomial out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      out.push_back(a[i++]);
    } else {
      out.push_back(b[j++]);
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

std::string sym_str(Sym s) {
  return std::string(s.is_g ? "g_" : "f_") + std::to_string(s.order);
}

}  // namespace

TermPoly TermPoly::constant(const Rat& c) {
  TermPoly t;
  if (c != 0) t.terms.emplace(Monomial{}, c);
  return t;
}

TermPoly TermPoly::symbol(Sym s) {
  TermPoly t;
  t.terms.emplace(Monomial{{s, 1}}, Rat(1));
  return t;
}

TermPoly& TermPoly::operator+=(const TermPoly& o) {
  for (const auto& [mono, coef] : o.terms) {
    auto it = terms.find(mono);
    if (it == terms.end()) {
      terms.emplace(mono, coef);
    } else {
      it->second += coef;
      if (it->second == 0) terms.erase(it);
    }
  }
  return *this;
}

TermPoly& TermPoly::operator-=(const TermPoly& o) {
  for (const auto& [mono, coef] : o.terms) {
    auto it = terms.find(mono);
    if (it == terms.end()) {
      terms.emplace(mono, -coef);
    } else {
      it->second -= coef;
      if (it->second == 0) terms.erase(it);
    }
  }
  return *this;
}

TermPoly& TermPoly::operator*=(const Rat& c) {
  if (c == 0) {
    terms.clear();
    return *this;
  }
  for (auto& [mono, coef] : terms) coef *= c;
  return *this;
}

TermPoly operator*(const TermPoly& a, const TermPoly& b) {
  TermPoly out;
  for (const auto& [ma, ca] : a.terms) {
    for (const auto& [mb, cb] : b.terms) {
      Monomial m = mono_mul(ma, mb);
      Rat c = ca * cb;
      auto it = out.terms.find(m);
      if (it == out.terms.end()) {
        out.terms.emplace(std::move(m), std::move(c));
      } else {
        it->second += c;
        if (it->second == 0) out.terms.erase(it);
      }
    }
  }
  return out;
}

int TermPoly::max_f_order() const {
  int best = -1;
  for (const auto& [mono, coef] : terms)
    for (const auto& [sym, exp] : mono)
      if (!sym.is_g && sym.order > best) best = sym.order;
  return best;
}

int TermPoly::max_g_order() const {
  int best = -1;
  for (const auto& [mono, coef] : terms)
    for (const auto& [sym, exp] : mono)
      if (sym.is_g && sym.order > best) best = sym.order;
  return best;
}

Rat TermPoly::l1() const {
  Rat acc = 0;
  for (const auto& [mono, coef] : terms) acc += abs(coef);
  return acc;
}

double TermPoly::eval(const std::function<double(Sym)>& value_of) const {
  double acc = 0.0;
  for (const auto& [mono, coef] : terms) {
    double prod = static_cast<double>(coef);
    for (const auto& [sym, exp] : mono) {
      double v = value_of(sym);
      for (int i = 0; i < exp; ++i) prod *= v;
    }
    acc += prod;
  }
  return acc;
}

Rat TermPoly::eval_exact(const std::function<Rat(Sym)>& value_of) const {
  Rat acc = 0;
  for (const auto& [mono, coef] : terms) {
    Rat prod = coef;
    for (const auto& [sym, exp] : mono) {
      Rat v = value_of(sym);
      for (int i = 0; i < exp; ++i) prod *= v;
    }
    acc += prod;
  }
  return acc;
}

std::vector<std::string> TermPoly::dump_lines() const {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& [mono, coef] : terms) {
    std::ostringstream line;
    line << rat_str(coef);
    for (const auto& [sym, exp] : mono) {
      line << " * " << sym_str(sym);
      if (exp > 1) line << "^" << exp;
    }
    out.push_back(line.str());
  }
  return out;
}

namespace {

TermPoly diff(const TermPoly& t, int family) {
  TermPoly out;
  for (const auto& [mono, coef] : t.terms) {
    for (size_t i = 0; i < mono.size(); ++i) {
      const auto& [sym, exp] = mono[i];
      if (sym.is_g != family) continue;
      // d(sym^exp) = exp * sym^(exp-1) * sym', applied within the product.
      Monomial rest;
      rest.reserve(mono.size());
      for (size_t j = 0; j < mono.size(); ++j) {
        if (j == i) {
          if (exp > 1) rest.emplace_back(sym, exp - 1);
        } else {
          rest.push_back(mono[j]);
        }
      }
      Monomial m = mono_mul_sym(rest, Sym{sym.is_g, sym.order + 1}, 1);
      Rat c = coef * exp;
      auto it = out.terms.find(m);
      if (it == out.terms.end()) {
        out.terms.emplace(std::move(m), std::move(c));
      } else {
        it->second += c;
        if (it->second == 0) out.terms.erase(it);
      }
    }
  }
  return out;
}

}  // namespace

TermPoly diff_p(const TermPoly& t) { return diff(t, 0); }
TermPoly diff_q(const TermPoly& t) { return diff(t, 1); }

TermPoly poisson(const TermPoly& u, const TermPoly& v) {
  return TermPoly{} - diff_p(u) * diff_q(v) + diff_q(u) * diff_p(v);
}

BracketWord::BracketWord(std::vector<std::pair<int, int>> rs) : pairs(std::move(rs)) {
  if (pairs.empty()) throw std::invalid_argument("BracketWord: empty word");
  for (const auto& [r, s] : pairs) {
    if (r < 0 || s < 0 || r + s == 0)
      throw std::invalid_argument("BracketWord: each pair needs r, s >= 0 and r + s > 0");
  }
}

int BracketWord::weight() const {
  int w = 0;
  for (const auto& [r, s] : pairs) w += r + s;
  return w;
}

TermPoly ipb_letters(const std::vector<int>& letters) {
  if (letters.empty()) throw std::invalid_argument("ipb_letters: empty string");
  auto base = [](int l) { return l == 0 ? TermPoly::f(0) : TermPoly::g(0); };
  TermPoly acc = base(letters[0]);
  for (size_t i = 1; i < letters.size(); ++i) acc = poisson(acc, base(letters[i]));
  return acc;
}

TermPoly ipb(const BracketWord& word, Leading leading) {
  const int first = (leading == Leading::F) ? 0 : 1;
  std::vector<int> letters;
  letters.reserve(static_cast<size_t>(word.weight()));
  for (const auto& [r, s] : word.pairs) {
    for (int i = 0; i < r; ++i) letters.push_back(first);
    for (int i = 0; i < s; ++i) letters.push_back(1 - first);
  }
  return ipb_letters(letters);
}

}  // namespace mh::symbolic
