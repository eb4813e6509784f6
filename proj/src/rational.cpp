#include "mh/rational.hpp"

#include <stdexcept>

namespace mh {

Int factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  Int acc = 1;
  for (int i = 2; i <= n; ++i) acc *= i;
  return acc;
}

Int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Int acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc *= (n - k + i);
    acc /= i;  // exact at every step: acc is C(n-k+i, i) * i! / i!
  }
  return acc;
}

std::string rat_str(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace mh
