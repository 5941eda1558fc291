#include "tiletide/rational.hpp"

#include "tiletide/error.hpp"

namespace tiletide {

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  Rational q(mpz_class(std::to_string(num)), mpz_class(std::to_string(den)));
  q.canonicalize();
  return q;
}

Rational pow2(int exponent) {
  Rational q(1);
  if (exponent >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(exponent));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-exponent));
  }
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

int exact_log2(const Rational& q) {
  if (q <= 0) throw DomainError("log2 of a non-positive rational");
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  if (den == 1 && mpz_popcount(num.get_mpz_t()) == 1) {
    return static_cast<int>(mpz_sizeinbase(num.get_mpz_t(), 2)) - 1;
  }
  if (num == 1 && mpz_popcount(den.get_mpz_t()) == 1) {
    return 1 - static_cast<int>(mpz_sizeinbase(den.get_mpz_t(), 2));
  }
  throw DomainError("not a power of two: " + to_string(q));
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw DomainError("empty rational literal");
  const auto dot = text.find('.');
  if (dot == std::string::npos) {
    Rational q;
    if (q.set_str(text, 10) != 0) throw DomainError("malformed rational literal: " + text);
    if (q.get_den() == 0) throw DomainError("rational with zero denominator: " + text);
    q.canonicalize();
    return q;
  }
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  const auto frac_len = text.size() - dot - 1;
  if (digits.empty() || digits == "-" || digits == "+") throw DomainError("malformed decimal: " + text);
  mpz_class num;
  if (num.set_str(digits, 10) != 0) throw DomainError("malformed decimal: " + text);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Interval Interval::dilate(const Rational& factor) const {
  const Rational c = center();
  const Rational half = length() * factor / 2;
  return Interval{c - half, c + half};
}

}  // namespace tiletide
