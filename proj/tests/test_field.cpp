#include <nacabe/abe/field.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;
using nacabe::abe::Fe;

namespace {

// Oracle: arithmetic via __int128 and plain % reduction.
uint64_t
mulMod(uint64_t a, uint64_t b)
{
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % Fe::P);
}

} // namespace

TEST_CASE("field arithmetic matches the direct-mod oracle")
{
  Rng rng = Rng::seeded(9001);
  for (int i = 0; i < 5000; ++i) {
    uint64_t a = rng.nextBelow(Fe::P);
    uint64_t b = rng.nextBelow(Fe::P);
    CHECK((Fe(a) * Fe(b)).value() == mulMod(a, b));
    CHECK((Fe(a) + Fe(b)).value() == (a + b) % Fe::P);
    CHECK((Fe(a) - Fe(b)).value() == (a + Fe::P - b) % Fe::P);
  }
}

TEST_CASE("field edge values reduce correctly")
{
  CHECK(Fe(Fe::P).value() == 0);
  CHECK(Fe(Fe::P + 1).value() == 1);
  CHECK(Fe(~uint64_t(0)).value() == (~uint64_t(0)) % Fe::P);
  CHECK((Fe(Fe::P - 1) * Fe(Fe::P - 1)).value() == mulMod(Fe::P - 1, Fe::P - 1));
  CHECK((Fe(Fe::P - 1) + Fe(1)).value() == 0);
}

TEST_CASE("inverses exist for nonzero values")
{
  Rng rng = Rng::seeded(9002);
  for (int i = 0; i < 200; ++i) {
    Fe a = Fe::randomNonzero(rng);
    CHECK((a * a.inverse()).value() == 1);
  }
  CHECK(Fe(1).inverse().value() == 1);
  CHECK_THROWS_AS(Fe(0).inverse(), Error);
}

TEST_CASE("polynomial evaluation matches a power-sum oracle")
{
  Rng rng = Rng::seeded(9003);
  std::vector<Fe> coeffs;
  for (int i = 0; i < 5; ++i)
    coeffs.push_back(Fe::random(rng));
  for (uint64_t x = 0; x < 10; ++x) {
    Fe expect;
    Fe xe(x);
    for (size_t i = 0; i < coeffs.size(); ++i)
      expect = expect + coeffs[i] * xe.pow(i);
    CHECK(abe::evalPolynomial(coeffs, xe) == expect);
  }
}

TEST_CASE("Lagrange interpolation at zero recovers the constant term")
{
  Rng rng = Rng::seeded(9004);
  for (int trial = 0; trial < 50; ++trial) {
    size_t degree = 1 + rng.nextBelow(4);
    std::vector<Fe> coeffs;
    for (size_t i = 0; i <= degree; ++i)
      coeffs.push_back(Fe::random(rng));
    // any degree+1 distinct points recover c_0
    std::vector<uint64_t> xs;
    for (uint64_t x = 1; xs.size() < degree + 1; ++x) {
      if (rng.chance(0.7))
        xs.push_back(x);
    }
    Fe acc;
    for (uint64_t x : xs)
      acc = acc + abe::evalPolynomial(coeffs, Fe(x)) * abe::lagrangeAtZero(x, xs);
    CHECK(acc == coeffs[0]);
  }
}

TEST_CASE("field element byte round-trip")
{
  Rng rng = Rng::seeded(9005);
  for (int i = 0; i < 100; ++i) {
    Fe a = Fe::random(rng);
    auto be = a.toBytesBE();
    CHECK(Fe::fromBytesBE(BytesView(be.data(), be.size())) == a);
  }
}
