#include <nacabe/abe/abe.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <functional>

using namespace nacabe;
using namespace nacabe::abe;

namespace {

PolicyExpr
randomPolicy(Rng& rng, const std::vector<std::string>& names, int depth)
{
  std::function<PolicyExpr(int)> gen = [&](int d) -> PolicyExpr {
    if (d == 0 || rng.chance(0.45))
      return PolicyExpr::leaf(Attribute::plain(names[rng.nextBelow(names.size())]));
    size_t n = 2 + rng.nextBelow(3);
    std::vector<PolicyExpr> children;
    for (size_t i = 0; i < n; ++i)
      children.push_back(gen(d - 1));
    return rng.chance(0.5) ? PolicyExpr::andOf(std::move(children))
                           : PolicyExpr::orOf(std::move(children));
  };
  return gen(depth);
}

// A flat OR over k same-length attribute names (a00..a63).
PolicyExpr
flatOr(size_t k)
{
  std::vector<PolicyExpr> leaves;
  for (size_t i = 0; i < k; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "a%02zu", i);
    leaves.push_back(PolicyExpr::leaf(Attribute::plain(buf)));
  }
  if (leaves.size() == 1)
    return std::move(leaves.front());
  return PolicyExpr::orOf(std::move(leaves));
}

} // namespace

TEST_CASE("key serialization round-trips for 200 random keys")
{
  Rng rng = Rng::seeded(9501);
  auto [kpParams, kpMaster] = setup(AbeType::Kp, rng);
  auto [cpParams, cpMaster] = setup(AbeType::Cp, rng);
  std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  for (int i = 0; i < 100; ++i) {
    AbeKey k = kpKeygen(kpMaster, randomPolicy(rng, names, 3), rng);
    Bytes wire = serializeKey(k);
    AbeKey back = deserializeKey(wire);
    REQUIRE(back == k);
    REQUIRE(serializeKey(back) == wire);
  }
  for (int i = 0; i < 100; ++i) {
    AttributeSet attrs;
    while (attrs.empty()) {
      for (const auto& n : names) {
        if (rng.chance(0.5))
          attrs.insert(Attribute::plain(n));
      }
    }
    AbeKey k = cpKeygen(cpMaster, attrs, rng);
    Bytes wire = serializeKey(k);
    REQUIRE(deserializeKey(wire) == k);
  }
}

TEST_CASE("ciphertext and params serialization round-trip")
{
  Rng rng = Rng::seeded(9502);
  auto [params, master] = setup(AbeType::Kp, rng);
  for (int i = 0; i < 50; ++i) {
    AbeCiphertext ct =
      kpEncrypt(params, AttributeSet{"a", "b", "c"}, rng.bytes(1 + rng.nextBelow(64)), rng);
    Bytes wire = serializeCiphertext(ct);
    REQUIRE(deserializeCiphertext(wire) == ct);
  }

  auto [cparams, cmaster] = setup(AbeType::Cp, rng);
  AbeCiphertext cct = cpEncrypt(cparams, parsePolicy("\"a\" AND (\"b\" OR \"c\")"),
                                toBytes("x"), rng);
  REQUIRE(deserializeCiphertext(serializeCiphertext(cct)) == cct);

  Bytes paramsWire = serializeParams(params);
  PublicParams snapshot = deserializeParams(paramsWire);
  CHECK(snapshot == params);
  CHECK(serializeParams(snapshot) == paramsWire);

  // deserialized material still decrypts
  AbeKey key = kpKeygen(master, parsePolicy("\"a\""), rng);
  AbeCiphertext ct = kpEncrypt(params, AttributeSet{"a"}, toBytes("via wire"), rng);
  AbeKey keyBack = deserializeKey(serializeKey(key));
  AbeCiphertext ctBack = deserializeCiphertext(serializeCiphertext(ct));
  PublicParams paramsBack = deserializeParams(serializeParams(params));
  CHECK(abeDecrypt(paramsBack, keyBack, ctBack) == toBytes("via wire"));
}

TEST_CASE("malformed key bytes are rejected")
{
  Rng rng = Rng::seeded(9503);
  auto [params, master] = setup(AbeType::Kp, rng);
  Bytes wire = serializeKey(kpKeygen(master, parsePolicy("\"a\""), rng));
  CHECK_THROWS_AS(deserializeKey(Bytes{}), DecodeError);
  Bytes truncated(wire.begin(), wire.begin() + static_cast<long>(wire.size() / 2));
  CHECK_THROWS_AS(deserializeKey(truncated), DecodeError);
  Bytes trailing = wire;
  trailing.push_back(0);
  CHECK_THROWS_AS(deserializeKey(trailing), DecodeError);
  CHECK_THROWS_AS(deserializeParams(wire), DecodeError); // wrong container type
}

TEST_CASE("serialized KP key size is affine in the leaf count")
{
  Rng rng = Rng::seeded(9504);
  auto [params, master] = setup(AbeType::Kp, rng);
  std::vector<size_t> sizes(65, 0);
  for (size_t k = 1; k <= 64; ++k)
    sizes[k] = serializeKey(kpKeygen(master, flatOr(k), rng)).size();
  size_t perLeaf = sizes[2] - sizes[1];
  CHECK(perLeaf > 0);
  for (size_t k = 1; k <= 64; ++k)
    REQUIRE(sizes[k] - sizes[1] == (k - 1) * perLeaf);
}

TEST_CASE("keys for comparison policies grow with the zero-bit leaf count")
{
  Rng rng = Rng::seeded(9505);
  auto [params, master] = setup(AbeType::Kp, rng);
  for (int c = 1; c <= 5; ++c) {
    // AND of c fresh 32-bit GT comparisons
    std::vector<PolicyExpr> terms;
    size_t expectLeaves = 0;
    for (int i = 0; i < c; ++i) {
      uint32_t x = rng.nextU32();
      if (x == 0xFFFFFFFFu)
        x -= 1;
      std::string name = "ts" + std::to_string(i);
      terms.push_back(PolicyExpr::compare(name, CompareOp::Gt, x));
      expectLeaves += expandComparison(name, CompareOp::Gt, x, 32).leafCount();
    }
    PolicyExpr policy =
      terms.size() == 1 ? terms[0] : PolicyExpr::andOf(std::move(terms));
    AbeKey key = kpKeygen(master, policy, rng);
    REQUIRE(key.tree.leafCount() == expectLeaves);
    // size tracks the leaf count: affine bound from the flat-OR law
    size_t wireSize = serializeKey(key).size();
    CHECK(wireSize > expectLeaves * ElementBlockLen);
  }
}

TEST_CASE("always-true key serialization round-trips")
{
  Rng rng = Rng::seeded(9506);
  auto [params, master] = setup(AbeType::Kp, rng);
  AbeKey key = kpKeygen(master, parsePolicy("ts >= 0"), rng);
  AbeKey back = deserializeKey(serializeKey(key));
  CHECK(back == key);
  CHECK(back.tree.alwaysTrue());
}
