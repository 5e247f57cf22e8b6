#include <nacabe/abe/policy.hpp>
#include <nacabe/core/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;
using namespace nacabe::abe;

TEST_CASE("the mhealth example policy parses to the expected AST")
{
  PolicyExpr p = parsePolicy(
    "\"doctor\" OR \"trainer\" OR (\"researcher\" AND \"start_date\" > 1672531200)");
  // the parse is loose-form (comparisons still present)
  REQUIRE(p.kind() == PolicyExpr::Kind::Or);
  REQUIRE(p.children().size() == 3);
  CHECK(p.children()[0] == PolicyExpr::leaf(Attribute::plain("doctor")));
  CHECK(p.children()[1] == PolicyExpr::leaf(Attribute::plain("trainer")));
  const PolicyExpr& third = p.children()[2];
  REQUIRE(third.kind() == PolicyExpr::Kind::And);
  REQUIRE(third.children().size() == 2);
  CHECK(third.children()[0] == PolicyExpr::leaf(Attribute::plain("researcher")));
  const PolicyExpr& cmp = third.children()[1];
  REQUIRE(cmp.kind() == PolicyExpr::Kind::Compare);
  CHECK(cmp.attribute().str() == "start_date");
  CHECK(cmp.op() == CompareOp::Gt);
  CHECK(cmp.compareValue() == 1672531200);
}

TEST_CASE("date literals are day-granularity timestamps")
{
  PolicyExpr p = parsePolicy("start_date > 2023-01-01");
  REQUIRE(p.kind() == PolicyExpr::Kind::Compare);
  CHECK(p.compareValue() == 1672531200); // 2023-01-01T00:00:00Z
  CHECK(parsePolicy("d = 1970-01-01").compareValue() == 0);
  CHECK(parsePolicy("d = 1970-01-02").compareValue() == 86400);
}

TEST_CASE("duplicate conjuncts collapse to a single leaf")
{
  PolicyExpr p = parsePolicy("\"a\" AND \"a\"").normalized();
  CHECK(p == PolicyExpr::leaf(Attribute::plain("a")));
}

TEST_CASE("syntax errors carry the position")
{
  try {
    parsePolicy("\"a\" OR");
    FAIL("expected a PolicyError");
  }
  catch (const PolicyError& e) {
    CHECK(e.position() == 7);
  }
  CHECK_THROWS_AS(parsePolicy(""), PolicyError);
  CHECK_THROWS_AS(parsePolicy("\"a\" AND (\"b\""), PolicyError);
  CHECK_THROWS_AS(parsePolicy("a >"), PolicyError);
  CHECK_THROWS_AS(parsePolicy("a ? 3"), PolicyError);
  CHECK_THROWS_AS(parsePolicy("\"a\" \"b\""), PolicyError);
}

TEST_CASE("integers beyond 32 bits are rejected")
{
  CHECK_THROWS_AS(parsePolicy("ts > 4294967296"), PolicyError);
  CHECK_NOTHROW(parsePolicy("ts > 4294967295"));
}

TEST_CASE("normalization enforces the gate invariants")
{
  Rng rng = Rng::seeded(9101);
  std::vector<std::string> attrNames = {"a", "b", "c", "d"};

  std::function<PolicyExpr(int)> randomPolicy = [&](int depth) -> PolicyExpr {
    if (depth == 0 || rng.chance(0.4))
      return PolicyExpr::leaf(
        Attribute::plain(attrNames[rng.nextBelow(attrNames.size())]));
    size_t n = 2 + rng.nextBelow(3);
    std::vector<PolicyExpr> children;
    for (size_t i = 0; i < n; ++i)
      children.push_back(randomPolicy(depth - 1));
    return rng.chance(0.5) ? PolicyExpr::andOf(std::move(children))
                           : PolicyExpr::orOf(std::move(children));
  };

  std::function<void(const PolicyExpr&)> checkInvariant = [&](const PolicyExpr& p) {
    if (p.kind() == PolicyExpr::Kind::And || p.kind() == PolicyExpr::Kind::Or) {
      REQUIRE(p.children().size() >= 2);
      for (size_t i = 0; i < p.children().size(); ++i) {
        for (size_t j = i + 1; j < p.children().size(); ++j)
          REQUIRE_FALSE(p.children()[i] == p.children()[j]);
        checkInvariant(p.children()[i]);
      }
    }
    REQUIRE(p.kind() != PolicyExpr::Kind::Compare);
  };

  for (int trial = 0; trial < 300; ++trial) {
    PolicyExpr p = randomPolicy(3);
    PolicyExpr n = p.normalized();
    checkInvariant(n);
    CHECK(n.isNormalized());
    // normalization preserves semantics over random attribute sets
    for (int s = 0; s < 8; ++s) {
      AttributeSet attrs;
      for (const auto& name : attrNames) {
        if (rng.chance(0.5))
          attrs.insert(Attribute::plain(name));
      }
      REQUIRE(p.evaluate(attrs) == n.evaluate(attrs));
    }
  }
}

TEST_CASE("canonical policy text is the source with single spaces")
{
  std::string canon = canonicalPolicyText(
    "  \"doctor\"   OR (\"researcher\"  AND start_date >   1672531200 ) ");
  CHECK(canon == "\"doctor\" OR ( \"researcher\" AND start_date > 1672531200 )");
  // canonicalizing is idempotent
  CHECK(canonicalPolicyText(canon) == canon);
  CHECK_THROWS_AS(canonicalPolicyText("\"a\" OR"), PolicyError);
}

TEST_CASE("attribute sets deduplicate and order canonically")
{
  AttributeSet s{"home", "blood-glucose", "home"};
  CHECK(s.size() == 2);
  CHECK(s.canonicalString() == "blood-glucose,home");
  CHECK(s.contains(Attribute::plain("home")));
}

TEST_CASE("bit-prefix attributes parse from strings")
{
  Attribute a = Attribute::fromString("ts:pfx:101");
  CHECK(a.kind() == Attribute::Kind::BitPrefix);
  CHECK(a.str() == "ts:pfx:101");
  CHECK(Attribute::fromString("plain").kind() == Attribute::Kind::Plain);
  CHECK_THROWS_AS(Attribute::fromString("x:pfx:"), Error);
  CHECK_THROWS_AS(Attribute::fromString("x:pfx:210"), Error);
  CHECK_THROWS_AS(Attribute::bitPrefix("x", std::string(33, '1')), Error);
}
