#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace midpoint {

using Rational = boost::multiprecision::mpq_rational;

// "p/q" in lowest terms; integers print as "p/1".
std::string to_fraction_string(const Rational& r);
Rational parse_fraction(const std::string& text);

}  // namespace midpoint
