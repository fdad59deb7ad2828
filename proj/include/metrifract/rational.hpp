#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>

#include "metrifract/util.hpp"

namespace metrifract {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline std::string rat_string(const Rat& x) {
  return numerator(x).str() + "/" + denominator(x).str();
}

// Accepts "p/q", an integer, or a finite decimal ("0.1" becomes 1/10 exactly).
inline Rat parse_rat(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw io_error("empty rational");
  auto bad = [&] { return io_error("bad rational: '" + raw + "'"); };
  try {
    size_t slash = s.find('/');
    if (slash != std::string::npos) {
      BigInt p(s.substr(0, slash)), q(s.substr(slash + 1));
      if (q == 0) throw bad();
      return Rat(p, q);
    }
    size_t dot = s.find('.');
    if (dot == std::string::npos) return Rat(BigInt(s));
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (frac.empty()) throw bad();
    bool neg = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    BigInt scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt num = BigInt(whole) * scale;
    BigInt f(frac);
    num += neg ? -f : f;
    return Rat(num, scale);
  } catch (const std::runtime_error&) {
    throw;
  } catch (...) {
    throw bad();
  }
}

inline double rat_double(const Rat& x) { return x.convert_to<double>(); }

// Smallest double >= x; keeps emitted endpoints inside their closed interval
// when the double is read back as an exact rational.
inline double rat_double_up(const Rat& x) {
  double d = x.convert_to<double>();
  while (Rat(d) < x) d = std::nextafter(d, HUGE_VAL);
  return d;
}

inline Rat rat_of_double(double d) { return Rat(d); }

}  // namespace metrifract
