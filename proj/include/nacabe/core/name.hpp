#pragma once

#include "tlv.hpp"

#include <algorithm>
#include <charconv>
#include <compare>
#include <initializer_list>
#include <ostream>

namespace nacabe {

inline constexpr size_t MaxComponentLen = 255;

/// One name component: a type number plus up to 255 raw bytes. Version and
/// segment numbers are typed components carrying a NonNegativeInteger.
class Component {
public:
  Component() = default;

  static Component generic(std::string_view text) { return generic(toBytes(text)); }

  static Component generic(Bytes value)
  {
    Component c;
    c.m_value = std::move(value);
    c.checkSize();
    return c;
  }

  static Component version(uint64_t v)
  {
    Component c;
    c.m_type = tlv::VersionComponent;
    c.m_value = tlv::encodeNni(v);
    return c;
  }

  static Component segment(uint64_t v)
  {
    Component c;
    c.m_type = tlv::SegmentComponent;
    c.m_value = tlv::encodeNni(v);
    return c;
  }

  uint32_t type() const { return m_type; }
  const Bytes& value() const { return m_value; }
  size_t size() const { return m_value.size(); }

  bool isGeneric() const { return m_type == tlv::GenericComponent; }
  bool isVersion() const { return m_type == tlv::VersionComponent; }
  bool isSegment() const { return m_type == tlv::SegmentComponent; }

  uint64_t toNumber() const { return tlv::decodeNni(m_value); }

  bool is(std::string_view text) const
  {
    return isGeneric() && m_value.size() == text.size() &&
           std::equal(m_value.begin(), m_value.end(), text.begin(),
                      [](uint8_t a, char b) { return a == static_cast<uint8_t>(b); });
  }

  std::string text() const { return toString(m_value); }

  /// URI form: "v=<n>" / "seg=<n>" for typed components, percent-escaped
  /// text otherwise.
  std::string toUri() const
  {
    if (isVersion())
      return "v=" + std::to_string(toNumber());
    if (isSegment())
      return "seg=" + std::to_string(toNumber());
    std::string out;
    std::string plain = text();
    bool looksTyped = plain.rfind("v=", 0) == 0 || plain.rfind("seg=", 0) == 0;
    for (uint8_t b : m_value) {
      bool safe = (b >= 0x20 && b < 0x7f) && b != '/' && b != '%';
      if (safe && !(looksTyped && b == '='))
        out.push_back(static_cast<char>(b));
      else {
        static const char* digits = "0123456789ABCDEF";
        out.push_back('%');
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
      }
    }
    return out;
  }

  static Component fromUri(std::string_view uri)
  {
    auto parseNum = [](std::string_view s) -> std::optional<uint64_t> {
      if (s.empty())
        return std::nullopt;
      uint64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        return std::nullopt;
      return v;
    };
    if (uri.rfind("v=", 0) == 0) {
      if (auto v = parseNum(uri.substr(2)))
        return version(*v);
    }
    if (uri.rfind("seg=", 0) == 0) {
      if (auto v = parseNum(uri.substr(4)))
        return segment(*v);
    }
    Bytes raw;
    for (size_t i = 0; i < uri.size(); ++i) {
      if (uri[i] == '%' && i + 2 < uri.size()) {
        auto hex = [](char c) -> int {
          if (c >= '0' && c <= '9')
            return c - '0';
          if (c >= 'a' && c <= 'f')
            return c - 'a' + 10;
          if (c >= 'A' && c <= 'F')
            return c - 'A' + 10;
          return -1;
        };
        int hi = hex(uri[i + 1]), lo = hex(uri[i + 2]);
        if (hi >= 0 && lo >= 0) {
          raw.push_back(static_cast<uint8_t>(hi * 16 + lo));
          i += 2;
          continue;
        }
      }
      raw.push_back(static_cast<uint8_t>(uri[i]));
    }
    return generic(std::move(raw));
  }

  void encodeTo(tlv::Writer& w) const { w.block(m_type, m_value); }

  static Component decodeFrom(const tlv::Reader::Element& e)
  {
    if (e.type != tlv::GenericComponent && e.type != tlv::VersionComponent &&
        e.type != tlv::SegmentComponent)
      throw DecodeError("unknown name component type " + std::to_string(e.type));
    Component c;
    c.m_type = e.type;
    c.m_value.assign(e.value.begin(), e.value.end());
    c.checkSize();
    return c;
  }

  friend bool operator==(const Component& a, const Component& b)
  {
    return a.m_type == b.m_type && a.m_value == b.m_value;
  }

  // raw-byte lexicographic ordering; component type breaks ties
  friend std::strong_ordering operator<=>(const Component& a, const Component& b)
  {
    if (auto c = std::lexicographical_compare_three_way(
          a.m_value.begin(), a.m_value.end(), b.m_value.begin(), b.m_value.end());
        c != std::strong_ordering::equal)
      return c;
    return a.m_type <=> b.m_type;
  }

private:
  void checkSize() const
  {
    if (m_value.size() > MaxComponentLen)
      throw EncodeError("name component too long (" + std::to_string(m_value.size()) +
                        " > " + std::to_string(MaxComponentLen) + ")");
  }

  uint32_t m_type = tlv::GenericComponent;
  Bytes m_value;
};

/// Hierarchical name: an ordered list of components. The empty name is a
/// routing wildcard only and never names a packet.
class Name {
public:
  Name() = default;

  explicit Name(std::string_view uri) { *this = fromUri(uri); }

  Name(std::initializer_list<std::string_view> comps)
  {
    for (auto c : comps)
      m_comps.push_back(Component::generic(c));
  }

  static Name fromUri(std::string_view uri)
  {
    Name n;
    size_t i = 0;
    while (i < uri.size()) {
      if (uri[i] == '/') {
        ++i;
        continue;
      }
      size_t j = uri.find('/', i);
      if (j == std::string_view::npos)
        j = uri.size();
      n.m_comps.push_back(Component::fromUri(uri.substr(i, j - i)));
      i = j;
    }
    return n;
  }

  size_t size() const { return m_comps.size(); }
  bool empty() const { return m_comps.empty(); }

  const Component& at(size_t i) const { return m_comps.at(i); }
  const Component& operator[](size_t i) const { return m_comps[i]; }

  Name& append(Component c)
  {
    m_comps.push_back(std::move(c));
    return *this;
  }

  Name& append(std::string_view text) { return append(Component::generic(text)); }

  Name& append(const Name& suffix)
  {
    m_comps.insert(m_comps.end(), suffix.m_comps.begin(), suffix.m_comps.end());
    return *this;
  }

  Name& appendVersion(uint64_t v) { return append(Component::version(v)); }
  Name& appendSegment(uint64_t v) { return append(Component::segment(v)); }

  Name getPrefix(size_t nComponents) const
  {
    Name n;
    n.m_comps.assign(m_comps.begin(),
                     m_comps.begin() + static_cast<std::ptrdiff_t>(
                                         std::min(nComponents, m_comps.size())));
    return n;
  }

  bool isPrefixOf(const Name& other) const
  {
    if (m_comps.size() > other.m_comps.size())
      return false;
    return std::equal(m_comps.begin(), m_comps.end(), other.m_comps.begin());
  }

  std::string toUri() const
  {
    if (m_comps.empty())
      return "/";
    std::string out;
    for (const auto& c : m_comps) {
      out.push_back('/');
      out += c.toUri();
    }
    return out;
  }

  void encodeTo(tlv::Writer& w) const
  {
    size_t mark = w.open(tlv::Name);
    for (const auto& c : m_comps)
      c.encodeTo(w);
    w.close(mark);
  }

  Bytes wireEncode() const
  {
    tlv::Writer w;
    encodeTo(w);
    return w.take();
  }

  static Name decodeFrom(BytesView nameValue)
  {
    Name n;
    tlv::Reader r(nameValue);
    while (!r.atEnd())
      n.m_comps.push_back(Component::decodeFrom(r.readElement()));
    return n;
  }

  /// Decodes a full Name TLV (type + length + value) from a reader.
  static Name decodeBlock(tlv::Reader& r) { return decodeFrom(r.expect(tlv::Name)); }

  static Name fromWire(BytesView wire)
  {
    tlv::Reader r(wire);
    Name n = decodeBlock(r);
    r.requireEnd("Name");
    return n;
  }

  friend bool operator==(const Name& a, const Name& b) = default;

  friend std::strong_ordering operator<=>(const Name& a, const Name& b)
  {
    return std::lexicographical_compare_three_way(a.m_comps.begin(), a.m_comps.end(),
                                                  b.m_comps.begin(), b.m_comps.end());
  }

private:
  std::vector<Component> m_comps;
};

inline std::ostream&
operator<<(std::ostream& os, const Name& n)
{
  return os << n.toUri();
}

} // namespace nacabe
