#include "qalt/common.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace qalt {

std::string rational_to_string(const BigRat& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigRat rational_from_string(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational");
  const auto slash = text.find('/');
  BigInt num, den = 1;
  try {
    if (slash == std::string::npos) {
      num = BigInt(text);
    } else {
      num = BigInt(text.substr(0, slash));
      den = BigInt(text.substr(slash + 1));
    }
  } catch (const std::exception&) {
    throw ParseError("malformed rational '" + text + "'");
  }
  if (den == 0) throw ParseError("zero denominator in '" + text + "'");
  return BigRat(num, den);
}

double rational_to_double(const BigRat& r) {
  using Wide = boost::multiprecision::cpp_bin_float_50;
  const Wide num(boost::multiprecision::numerator(r));
  const Wide den(boost::multiprecision::denominator(r));
  return static_cast<double>(num / den);
}

}  // namespace qalt
