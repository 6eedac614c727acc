#pragma once

// Exact integer / rational coefficient domain shared by every module.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace polya {

using BigInt = mpz_class;
using Rational = mpq_class;

inline std::string to_decimal(const BigInt& v) { return v.get_str(10); }

inline std::string to_decimal(const Rational& v) { return v.get_str(10); }

inline std::size_t bit_length(const BigInt& v) {
  return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

// Mantissa/exponent split of a big integer: v ~= mantissa * 2^exponent,
// mantissa in [0.5, 1). Keeps the full long-double mantissa, which
// mpz_get_d_2exp would truncate to 53 bits.
struct ScaledValue {
  long double mantissa = 0.0L;
  long exponent = 0;
};

inline ScaledValue scaled(const BigInt& v) {
  ScaledValue out;
  if (v == 0) return out;
  const long bits = static_cast<long>(bit_length(v));
  constexpr long keep = 64;
  BigInt top;
  if (bits > keep) {
    mpz_fdiv_q_2exp(top.get_mpz_t(), v.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - keep));
  } else {
    top = v;
  }
  // top < 2^64 fits an unsigned long on LP64.
  const long double t = static_cast<long double>(mpz_get_ui(top.get_mpz_t()));
  const long shift = bits > keep ? bits - keep : 0;
  int e = 0;
  out.mantissa = std::frexp(t, &e);
  out.exponent = e + shift;
  return out;
}

inline long double to_long_double(const BigInt& v) {
  const auto s = scaled(v);
  return std::ldexp(s.mantissa, static_cast<int>(s.exponent));
}

inline long double to_long_double(const Rational& q) {
  const auto n = scaled(abs(q.get_num()));
  const auto d = scaled(q.get_den());
  if (n.mantissa == 0.0L) return 0.0L;
  const long double v = std::ldexp(n.mantissa / d.mantissa, static_cast<int>(n.exponent - d.exponent));
  return q < 0 ? -v : v;
}

inline double to_double(const Rational& q) { return static_cast<double>(to_long_double(q)); }

inline double to_double(const BigInt& v) { return static_cast<double>(to_long_double(v)); }

// Exact division; the caller guarantees divisibility.
inline BigInt divexact(const BigInt& a, unsigned long d) {
  BigInt q;
  mpz_divexact_ui(q.get_mpz_t(), a.get_mpz_t(), d);
  return q;
}

inline Rational divexact(const Rational& a, unsigned long d) {
  Rational q = a / Rational(static_cast<long>(d));
  return q;
}

}  // namespace polya
