#ifndef MH_RATIONAL_HPP
#define MH_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace mh {

// Exact arithmetic carriers. GMP keeps gcd-reduced, positive-denominator
// canonical form on its own, which the identity checks rely on.
using Int = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

Int factorial(int n);
Int binomial(int n, int k);

// "7", "-3/4": the canonical text form used by the dump format and tables.
std::string rat_str(const Rat& r);

}  // namespace mh

#endif  // MH_RATIONAL_HPP
