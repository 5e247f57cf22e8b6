#pragma once

#include "../core/errors.hpp"

#include <compare>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nacabe::abe {

inline constexpr std::string_view BitPrefixMarker = ":pfx:";
inline constexpr unsigned MaxBitWidth = 32;

/// A descriptive string. Bit-prefix attributes ("<name>:pfx:<bits>") carry
/// one binary prefix of an integer value and power the comparison encoding.
class Attribute {
public:
  enum class Kind {
    Plain,
    BitPrefix,
  };

  Attribute() = default;

  static Attribute plain(std::string value)
  {
    if (value.empty())
      throw Error("attribute must be non-empty");
    if (value.find(BitPrefixMarker) != std::string::npos)
      throw Error("plain attribute must not contain the bit-prefix marker");
    Attribute a;
    a.m_value = std::move(value);
    return a;
  }

  static Attribute bitPrefix(std::string_view name, std::string_view bits)
  {
    if (name.empty())
      throw Error("attribute must be non-empty");
    if (bits.empty() || bits.size() > MaxBitWidth)
      throw Error("bit prefix length must be in [1, 32]");
    for (char c : bits) {
      if (c != '0' && c != '1')
        throw Error("bit prefix must be binary");
    }
    Attribute a;
    a.m_value = std::string(name) + std::string(BitPrefixMarker) + std::string(bits);
    return a;
  }

  /// Parses either form from its string representation.
  static Attribute fromString(std::string_view s)
  {
    size_t pos = s.find(BitPrefixMarker);
    if (pos == std::string_view::npos)
      return plain(std::string(s));
    return bitPrefix(s.substr(0, pos), s.substr(pos + BitPrefixMarker.size()));
  }

  const std::string& str() const { return m_value; }

  Kind kind() const
  {
    return m_value.find(BitPrefixMarker) == std::string::npos ? Kind::Plain
                                                              : Kind::BitPrefix;
  }

  friend bool operator==(const Attribute&, const Attribute&) = default;
  friend auto operator<=>(const Attribute&, const Attribute&) = default;

private:
  std::string m_value;
};

/// Deduplicating attribute collection; the unit of CP key generation and of
/// KP encryption.
class AttributeSet {
public:
  AttributeSet() = default;

  AttributeSet(std::initializer_list<std::string_view> values)
  {
    for (auto v : values)
      insert(Attribute::fromString(v));
  }

  static AttributeSet of(const std::vector<std::string>& values)
  {
    AttributeSet s;
    for (const auto& v : values)
      s.insert(Attribute::fromString(v));
    return s;
  }

  void insert(Attribute a) { m_attrs.insert(std::move(a)); }

  void merge(const AttributeSet& other)
  {
    m_attrs.insert(other.m_attrs.begin(), other.m_attrs.end());
  }

  bool contains(const Attribute& a) const { return m_attrs.contains(a); }
  size_t size() const { return m_attrs.size(); }
  bool empty() const { return m_attrs.empty(); }

  auto begin() const { return m_attrs.begin(); }
  auto end() const { return m_attrs.end(); }

  /// Canonical text form: sorted attribute strings joined by commas. Used
  /// as the CK cache key and inside CK names in KP mode.
  std::string canonicalString() const
  {
    std::string out;
    for (const auto& a : m_attrs) {
      if (!out.empty())
        out.push_back(',');
      out += a.str();
    }
    return out;
  }

  friend bool operator==(const AttributeSet&, const AttributeSet&) = default;

private:
  std::set<Attribute> m_attrs;
};

} // namespace nacabe::abe
