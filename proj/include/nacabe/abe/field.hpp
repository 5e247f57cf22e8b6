#pragma once

#include "../core/bytes.hpp"
#include "../core/rng.hpp"

#include <compare>

namespace nacabe::abe {

/// Element of GF(p), p = 2^61 - 1. Products fit in 128-bit intermediates
/// and the Mersenne reduction is branch-light.
class Fe {
public:
  static constexpr uint64_t P = (uint64_t(1) << 61) - 1;

  constexpr Fe() = default;

  constexpr explicit Fe(uint64_t v)
    : m_v(reduce64(v))
  {
  }

  constexpr uint64_t value() const { return m_v; }
  constexpr bool isZero() const { return m_v == 0; }

  friend constexpr Fe operator+(Fe a, Fe b)
  {
    uint64_t s = a.m_v + b.m_v; // < 2^62, no overflow
    return fromReduced(s >= P ? s - P : s);
  }

  friend constexpr Fe operator-(Fe a, Fe b)
  {
    return fromReduced(a.m_v >= b.m_v ? a.m_v - b.m_v : a.m_v + P - b.m_v);
  }

  friend constexpr Fe operator*(Fe a, Fe b)
  {
    unsigned __int128 prod = static_cast<unsigned __int128>(a.m_v) * b.m_v;
    uint64_t lo = static_cast<uint64_t>(prod & P);
    uint64_t hi = static_cast<uint64_t>(prod >> 61);
    uint64_t s = lo + hi; // < 2^62
    s = (s & P) + (s >> 61);
    return fromReduced(s >= P ? s - P : s);
  }

  constexpr Fe pow(uint64_t e) const
  {
    Fe base = *this;
    Fe acc(1);
    while (e != 0) {
      if (e & 1)
        acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  /// Multiplicative inverse via Fermat; undefined for zero.
  constexpr Fe inverse() const
  {
    if (isZero())
      throw Error("no inverse of zero in GF(2^61-1)");
    return pow(P - 2);
  }

  static Fe random(Rng& rng)
  {
    // rejection sampling over 61-bit draws keeps the distribution uniform
    for (;;) {
      uint64_t v = rng.nextU64() >> 3;
      if (v < P)
        return fromReduced(v);
    }
  }

  static Fe randomNonzero(Rng& rng)
  {
    for (;;) {
      Fe f = random(rng);
      if (!f.isZero())
        return f;
    }
  }

  std::array<uint8_t, 8> toBytesBE() const
  {
    std::array<uint8_t, 8> out;
    for (int i = 0; i < 8; ++i)
      out[static_cast<size_t>(i)] = static_cast<uint8_t>(m_v >> (8 * (7 - i)));
    return out;
  }

  static Fe fromBytesBE(BytesView b)
  {
    if (b.size() != 8)
      throw DecodeError("bad field element length");
    uint64_t v = 0;
    for (uint8_t x : b)
      v = (v << 8) | x;
    return Fe(v);
  }

  friend constexpr bool operator==(Fe, Fe) = default;
  friend constexpr auto operator<=>(Fe, Fe) = default;

private:
  static constexpr uint64_t reduce64(uint64_t v)
  {
    uint64_t s = (v & P) + (v >> 61);
    return s >= P ? s - P : s;
  }

  static constexpr Fe fromReduced(uint64_t v)
  {
    Fe f;
    f.m_v = v;
    return f;
  }

  uint64_t m_v = 0;
};

/// Evaluates the polynomial with the given coefficients (constant term
/// first) at x, all in GF(p).
inline Fe
evalPolynomial(const std::vector<Fe>& coeffs, Fe x)
{
  Fe acc;
  for (size_t i = coeffs.size(); i-- > 0;)
    acc = acc * x + coeffs[i];
  return acc;
}

/// Lagrange basis coefficient at zero for index i over the index set xs.
inline Fe
lagrangeAtZero(uint64_t i, const std::vector<uint64_t>& xs)
{
  Fe num(1);
  Fe den(1);
  Fe xi(i);
  for (uint64_t j : xs) {
    if (j == i)
      continue;
    Fe xj(j);
    num = num * (Fe(0) - xj);
    den = den * (xi - xj);
  }
  return num * den.inverse();
}

} // namespace nacabe::abe
