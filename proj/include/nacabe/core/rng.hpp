#pragma once

#include "bytes.hpp"

#include <array>
#include <memory>
#include <random>

namespace nacabe {

/// Random source. Seeded instances reproduce the exact same stream on every
/// platform (mt19937_64 output is standard-defined), which is what makes
/// scenario runs byte-identical for a given seed. Unseeded instances draw
/// their seed from the OS.
class Rng {
public:
  static Rng seeded(uint64_t seed) { return Rng(seed); }

  static Rng system()
  {
    std::random_device rd;
    uint64_t seed = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    return Rng(seed);
  }

  uint64_t nextU64() { return m_gen(); }

  uint32_t nextU32() { return static_cast<uint32_t>(m_gen() >> 32); }

  /// Uniform in [0, bound); bound > 0.
  uint64_t nextBelow(uint64_t bound)
  {
    // rejection sampling keeps the distribution exact
    uint64_t limit = ~uint64_t(0) - (~uint64_t(0) % bound);
    uint64_t v;
    do {
      v = m_gen();
    } while (v >= limit);
    return v % bound;
  }

  /// Uniform in [0, 1).
  double nextDouble()
  {
    return static_cast<double>(m_gen() >> 11) * 0x1.0p-53;
  }

  bool chance(double probability)
  {
    if (probability <= 0.0)
      return false;
    if (probability >= 1.0)
      return true;
    return nextDouble() < probability;
  }

  void fill(uint8_t* out, size_t n)
  {
    size_t i = 0;
    while (i + 8 <= n) {
      uint64_t v = m_gen();
      std::memcpy(out + i, &v, 8);
      i += 8;
    }
    if (i < n) {
      uint64_t v = m_gen();
      std::memcpy(out + i, &v, n - i);
    }
  }

  Bytes bytes(size_t n)
  {
    Bytes b(n);
    fill(b.data(), n);
    return b;
  }

  template<size_t N>
  std::array<uint8_t, N> array()
  {
    std::array<uint8_t, N> a;
    fill(a.data(), N);
    return a;
  }

  /// Derive an independent child stream (used to decouple link loss from
  /// crypto-material draws).
  Rng fork() { return Rng(m_gen() ^ 0x9e3779b97f4a7c15ull); }

private:
  explicit Rng(uint64_t seed)
    : m_gen(seed)
  {
  }

  std::mt19937_64 m_gen;
};

using RngPtr = std::shared_ptr<Rng>;

} // namespace nacabe
