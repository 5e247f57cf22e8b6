#include <nacabe/abe/access_tree.hpp>
#include <nacabe/abe/policy.hpp>
#include <nacabe/core/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;
using namespace nacabe::abe;

namespace {

constexpr CompareOp AllOps[] = {CompareOp::Lt, CompareOp::Gt, CompareOp::Le,
                                CompareOp::Ge, CompareOp::Eq};

// Counts zero bits in the low `width` bits.
unsigned
zeroBits(uint32_t v, unsigned width)
{
  unsigned n = 0;
  for (unsigned i = 0; i < width; ++i) {
    if ((v & (uint32_t(1) << i)) == 0)
      ++n;
  }
  return n;
}

bool
policySatisfied(const PolicyExpr& p, const AttributeSet& attrs)
{
  if (p.kind() == PolicyExpr::Kind::AlwaysTrue)
    return true;
  if (p.kind() == PolicyExpr::Kind::AlwaysFalse)
    return false;
  return satisfies(buildAccessTree(p), attrs);
}

} // namespace

TEST_CASE("GT on 5 over 3 bits keeps exactly the 11-prefix")
{
  // 5 = 101b: the only zero bit is position 1, so the expansion is the
  // single leaf x:pfx:11
  PolicyExpr p = expandComparison("x", CompareOp::Gt, 5, 3);
  CHECK(p == PolicyExpr::leaf(Attribute::bitPrefix("x", "11")));
  // brute force: v > 5 over 3 bits holds exactly for 6 and 7
  for (uint32_t v = 0; v < 8; ++v) {
    AttributeSet attrs = dataAttributesFor("x", v, 3);
    CHECK(policySatisfied(p, attrs) == (v > 5));
  }
}

TEST_CASE("EQ is the single full-width prefix leaf")
{
  PolicyExpr p = expandComparison("x", CompareOp::Eq, 5, 3);
  CHECK(p == PolicyExpr::leaf(Attribute::bitPrefix("x", "101")));
}

TEST_CASE("GT leaf count equals the zero-bit count at width 32")
{
  Rng rng = Rng::seeded(9201);
  for (int i = 0; i < 100; ++i) {
    uint32_t x = rng.nextU32();
    if (x == 0xFFFFFFFFu)
      continue; // always-false case, no leaves
    PolicyExpr p = expandComparison("ts", CompareOp::Gt, x, 32);
    CHECK(p.leafCount() == zeroBits(x, 32));
  }
}

TEST_CASE("data attribute sets carry one prefix per length")
{
  AttributeSet s = dataAttributesFor("x", 5, 3);
  AttributeSet expect;
  expect.insert(Attribute::bitPrefix("x", "1"));
  expect.insert(Attribute::bitPrefix("x", "10"));
  expect.insert(Attribute::bitPrefix("x", "101"));
  CHECK(s == expect);

  Rng rng = Rng::seeded(9202);
  for (int i = 0; i < 20; ++i)
    CHECK(dataAttributesFor("name", rng.nextU32(), 32).size() == 32);
}

TEST_CASE("boundary comparisons fold to the constant policies")
{
  CHECK(expandComparison("x", CompareOp::Ge, 0, 8).kind() ==
        PolicyExpr::Kind::AlwaysTrue);
  CHECK(expandComparison("x", CompareOp::Le, 255, 8).kind() ==
        PolicyExpr::Kind::AlwaysTrue);
  CHECK(expandComparison("x", CompareOp::Gt, 255, 8).kind() ==
        PolicyExpr::Kind::AlwaysFalse);
  CHECK(expandComparison("x", CompareOp::Lt, 0, 8).kind() ==
        PolicyExpr::Kind::AlwaysFalse);
  CHECK_THROWS_AS(expandComparison("x", CompareOp::Gt, 8, 3), PolicyError);
}

TEST_CASE("comparison semantics are exhaustive at width 6")
{
  // satisfies(expand(op, X), dataAttributes(v)) == (v op X), all 64x64x5
  for (CompareOp op : AllOps) {
    for (uint32_t x = 0; x < 64; ++x) {
      PolicyExpr p = expandComparison("a", op, x, 6);
      for (uint32_t v = 0; v < 64; ++v) {
        AttributeSet attrs = dataAttributesFor("a", v, 6);
        REQUIRE(policySatisfied(p, attrs) == opHolds(v, op, x));
      }
    }
  }
}

TEST_CASE("comparison semantics are exhaustive at widths 1..5")
{
  for (unsigned w = 1; w <= 5; ++w) {
    uint32_t range = uint32_t(1) << w;
    for (CompareOp op : AllOps) {
      for (uint32_t x = 0; x < range; ++x) {
        PolicyExpr p = expandComparison("a", op, x, w);
        for (uint32_t v = 0; v < range; ++v) {
          AttributeSet attrs = dataAttributesFor("a", v, w);
          REQUIRE(policySatisfied(p, attrs) == opHolds(v, op, x));
        }
      }
    }
  }
}

TEST_CASE("mixing attribute names never cross-satisfies")
{
  PolicyExpr p = expandComparison("x", CompareOp::Gt, 5, 3);
  AttributeSet other = dataAttributesFor("y", 7, 3);
  CHECK_FALSE(policySatisfied(p, other));
}
