#pragma once

#include "bytes.hpp"

#include <cstdint>
#include <optional>

namespace nacabe::tlv {

// Packet-level TLV type assignments.
inline constexpr uint32_t Interest = 0x05;
inline constexpr uint32_t Data = 0x06;
inline constexpr uint32_t Name = 0x07;
inline constexpr uint32_t GenericComponent = 0x08;
inline constexpr uint32_t Nonce = 0x0A;
inline constexpr uint32_t InterestLifetime = 0x0C;
inline constexpr uint32_t MustBeFresh = 0x12;
inline constexpr uint32_t MetaInfo = 0x14;
inline constexpr uint32_t Content = 0x15;
inline constexpr uint32_t SignatureInfo = 0x16;
inline constexpr uint32_t SignatureValue = 0x17;
inline constexpr uint32_t ContentType = 0x18;
inline constexpr uint32_t FreshnessPeriod = 0x19;
inline constexpr uint32_t FinalBlockId = 0x1A;
inline constexpr uint32_t SignatureType = 0x1B;
inline constexpr uint32_t KeyLocator = 0x1C;
inline constexpr uint32_t CanBePrefix = 0x21;

// Typed name components (a separate number space from the above).
inline constexpr uint32_t SegmentComponent = 0x21;
inline constexpr uint32_t VersionComponent = 0x24;

// ABE object containers.
inline constexpr uint32_t AbeKey = 0x80;
inline constexpr uint32_t AbeCiphertext = 0x81;
inline constexpr uint32_t AbePublicParams = 0x82;

// Certificate content fields.
inline constexpr uint32_t CertKemPublicKey = 0x85;
inline constexpr uint32_t CertSigningPublicKey = 0x86;
inline constexpr uint32_t CertNotBefore = 0x87;
inline constexpr uint32_t CertNotAfter = 0x88;

// DKEY packet content fields.
inline constexpr uint32_t DkeyWrappedSymKey = 0x90;
inline constexpr uint32_t DkeyAeadNonce = 0x91;
inline constexpr uint32_t DkeyEncryptedKey = 0x92;

inline constexpr uint8_t Signature_Ed25519 = 0x08;

/// Size in octets of the variable-length encoding of v.
inline size_t
varNumSize(uint64_t v)
{
  if (v < 253)
    return 1;
  if (v <= 0xFFFF)
    return 3;
  if (v <= 0xFFFFFFFF)
    return 5;
  return 9;
}

/// Variable-length number: <253 in one octet, then 0xFD/0xFE/0xFF markers
/// followed by 2/4/8 big-endian octets.
inline void
writeVarNum(Bytes& out, uint64_t v)
{
  if (v < 253) {
    out.push_back(static_cast<uint8_t>(v));
  }
  else if (v <= 0xFFFF) {
    out.push_back(0xFD);
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
  }
  else if (v <= 0xFFFFFFFF) {
    out.push_back(0xFE);
    for (int i = 3; i >= 0; --i)
      out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  else {
    out.push_back(0xFF);
    for (int i = 7; i >= 0; --i)
      out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
}

/// NonNegativeInteger: shortest of 1/2/4/8 big-endian octets.
inline Bytes
encodeNni(uint64_t v)
{
  Bytes out;
  if (v <= 0xFF) {
    out.push_back(static_cast<uint8_t>(v));
  }
  else if (v <= 0xFFFF) {
    out = {static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v)};
  }
  else if (v <= 0xFFFFFFFF) {
    for (int i = 3; i >= 0; --i)
      out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  else {
    for (int i = 7; i >= 0; --i)
      out.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  return out;
}

inline uint64_t
decodeNni(BytesView v)
{
  if (v.size() != 1 && v.size() != 2 && v.size() != 4 && v.size() != 8)
    throw DecodeError("bad NonNegativeInteger length");
  uint64_t out = 0;
  for (uint8_t b : v)
    out = (out << 8) | b;
  return out;
}

/// Appends TLV blocks to a byte buffer.
class Writer {
public:
  void varNum(uint64_t v) { writeVarNum(m_buf, v); }

  void raw(BytesView b) { append(m_buf, b); }

  void block(uint32_t type, BytesView value)
  {
    varNum(type);
    varNum(value.size());
    raw(value);
  }

  void blockNni(uint32_t type, uint64_t v) { block(type, encodeNni(v)); }

  void blockEmpty(uint32_t type)
  {
    varNum(type);
    varNum(0);
  }

  /// Opens a block whose length is fixed up when the matching close() runs.
  size_t open(uint32_t type)
  {
    varNum(type);
    m_buf.push_back(0); // placeholder length, patched in close()
    return m_buf.size();
  }

  void close(size_t mark)
  {
    size_t len = m_buf.size() - mark;
    if (len < 253) {
      m_buf[mark - 1] = static_cast<uint8_t>(len);
      return;
    }
    Bytes lenBytes;
    writeVarNum(lenBytes, len);
    m_buf.insert(m_buf.begin() + static_cast<std::ptrdiff_t>(mark),
                 lenBytes.begin() + 1, lenBytes.end());
    m_buf[mark - 1] = lenBytes[0];
  }

  const Bytes& buffer() const { return m_buf; }
  Bytes take() { return std::move(m_buf); }
  size_t size() const { return m_buf.size(); }

private:
  Bytes m_buf;
};

/// Cursor over a TLV byte string; throws DecodeError on malformed input.
class Reader {
public:
  explicit Reader(BytesView view)
    : m_view(view)
  {
  }

  bool atEnd() const { return m_pos == m_view.size(); }
  size_t remaining() const { return m_view.size() - m_pos; }

  uint64_t readVarNum()
  {
    uint8_t first = readOctet();
    if (first < 253)
      return first;
    size_t n = first == 0xFD ? 2 : first == 0xFE ? 4 : 8;
    uint64_t v = 0;
    for (size_t i = 0; i < n; ++i)
      v = (v << 8) | readOctet();
    return v;
  }

  struct Element {
    uint32_t type;
    BytesView value;
  };

  Element readElement()
  {
    uint64_t type = readVarNum();
    uint64_t len = readVarNum();
    if (len > remaining())
      throw DecodeError("truncated TLV: declared length overflows input");
    Element e{static_cast<uint32_t>(type), m_view.subspan(m_pos, len)};
    m_pos += len;
    return e;
  }

  /// Next element, which must have the given type.
  BytesView expect(uint32_t type)
  {
    Element e = readElement();
    if (e.type != type)
      throw DecodeError("unexpected TLV type " + std::to_string(e.type) +
                        ", wanted " + std::to_string(type));
    return e.value;
  }

  /// Consumes and returns the next element if it has the given type.
  std::optional<BytesView> accept(uint32_t type)
  {
    if (atEnd())
      return std::nullopt;
    size_t save = m_pos;
    Element e = readElement();
    if (e.type == type)
      return e.value;
    m_pos = save;
    return std::nullopt;
  }

  uint32_t peekType()
  {
    size_t save = m_pos;
    uint64_t type = readVarNum();
    m_pos = save;
    return static_cast<uint32_t>(type);
  }

  void requireEnd(const char* context) const
  {
    if (!atEnd())
      throw DecodeError(std::string("trailing bytes after ") + context);
  }

private:
  uint8_t readOctet()
  {
    if (m_pos >= m_view.size())
      throw DecodeError("truncated TLV");
    return m_view[m_pos++];
  }

  BytesView m_view;
  size_t m_pos = 0;
};

} // namespace nacabe::tlv
