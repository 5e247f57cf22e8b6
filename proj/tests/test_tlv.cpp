#include <nacabe/core/tlv.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;

namespace {

// Independent var-number encoder written straight from the 1/3/5/9-octet
// rules; the library implementation is checked against this.
Bytes
referenceVarNum(uint64_t v)
{
  Bytes out;
  if (v < 253) {
    out.push_back(static_cast<uint8_t>(v));
  }
  else if (v <= 0xFFFF) {
    out = {0xFD, static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v & 0xFF)};
  }
  else if (v <= 0xFFFFFFFF) {
    out = {0xFE,
           static_cast<uint8_t>(v >> 24), static_cast<uint8_t>(v >> 16),
           static_cast<uint8_t>(v >> 8),  static_cast<uint8_t>(v)};
  }
  else {
    out.push_back(0xFF);
    for (int i = 7; i >= 0; --i)
      out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  return out;
}

} // namespace

TEST_CASE("var-number single octet below 253")
{
  Bytes out;
  tlv::writeVarNum(out, 42);
  CHECK(out == Bytes{0x2A});
}

TEST_CASE("var-number 253 uses the 3-octet form")
{
  Bytes out;
  tlv::writeVarNum(out, 253);
  CHECK(out == Bytes{0xFD, 0x00, 0xFD});
}

TEST_CASE("var-number round-trips exhaustively over 0..70000")
{
  for (uint64_t v = 0; v <= 70000; ++v) {
    Bytes lib;
    tlv::writeVarNum(lib, v);
    REQUIRE(lib == referenceVarNum(v));
    tlv::Reader r(lib);
    REQUIRE(r.readVarNum() == v);
    REQUIRE(r.atEnd());
  }
}

TEST_CASE("var-number wide forms")
{
  for (uint64_t v : {uint64_t(0x10000), uint64_t(0xFFFFFFFF), uint64_t(0x100000000),
                     uint64_t(0xFFFFFFFFFFFFFFFF)}) {
    Bytes lib;
    tlv::writeVarNum(lib, v);
    CHECK(lib == referenceVarNum(v));
    tlv::Reader r(lib);
    CHECK(r.readVarNum() == v);
  }
}

TEST_CASE("NonNegativeInteger uses shortest of 1/2/4/8 octets")
{
  CHECK(tlv::encodeNni(0).size() == 1);
  CHECK(tlv::encodeNni(255).size() == 1);
  CHECK(tlv::encodeNni(256).size() == 2);
  CHECK(tlv::encodeNni(65535).size() == 2);
  CHECK(tlv::encodeNni(65536).size() == 4);
  CHECK(tlv::encodeNni(0xFFFFFFFFull).size() == 4);
  CHECK(tlv::encodeNni(0x100000000ull).size() == 8);
  for (uint64_t v : {uint64_t(0), uint64_t(1), uint64_t(4000), uint64_t(1u << 20),
                     uint64_t(0xFFFFFFFFFFFFFFFF)})
    CHECK(tlv::decodeNni(tlv::encodeNni(v)) == v);
  CHECK_THROWS_AS(tlv::decodeNni(Bytes{1, 2, 3}), DecodeError);
}

TEST_CASE("writer open/close patches long lengths")
{
  tlv::Writer w;
  size_t mark = w.open(0x15);
  Bytes big(300, 0xAB);
  w.raw(big);
  w.close(mark);
  tlv::Reader r(w.buffer());
  auto e = r.readElement();
  CHECK(e.type == 0x15);
  REQUIRE(e.value.size() == 300);
  CHECK(r.atEnd());
}

TEST_CASE("reader rejects truncation and bad lengths")
{
  CHECK_THROWS_AS(tlv::Reader(Bytes{}).readVarNum(), DecodeError);
  // declared length exceeds the available bytes
  Bytes bad{0x15, 0x05, 0x01};
  tlv::Reader r(bad);
  CHECK_THROWS_AS(r.readElement(), DecodeError);
  // length marker cut off
  Bytes cut{0x15, 0xFD, 0x01};
  tlv::Reader r2(cut);
  CHECK_THROWS_AS(r2.readElement(), DecodeError);
}
