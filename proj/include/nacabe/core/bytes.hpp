#pragma once

#include "errors.hpp"

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nacabe {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline Bytes
toBytes(std::string_view s)
{
  return Bytes(s.begin(), s.end());
}

inline std::string
toString(BytesView b)
{
  return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

inline void
append(Bytes& out, BytesView b)
{
  out.insert(out.end(), b.begin(), b.end());
}

inline std::string
toHex(BytesView b)
{
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (uint8_t v : b) {
    s.push_back(digits[v >> 4]);
    s.push_back(digits[v & 0xf]);
  }
  return s;
}

namespace detail {

inline constexpr char base64Alphabet[] =
  "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int
base64Value(char c)
{
  if (c >= 'A' && c <= 'Z')
    return c - 'A';
  if (c >= 'a' && c <= 'z')
    return c - 'a' + 26;
  if (c >= '0' && c <= '9')
    return c - '0' + 52;
  if (c == '+')
    return 62;
  if (c == '/')
    return 63;
  return -1;
}

} // namespace detail

inline std::string
base64Encode(BytesView in)
{
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 3 <= in.size()) {
    uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    out.push_back(detail::base64Alphabet[(v >> 18) & 0x3f]);
    out.push_back(detail::base64Alphabet[(v >> 12) & 0x3f]);
    out.push_back(detail::base64Alphabet[(v >> 6) & 0x3f]);
    out.push_back(detail::base64Alphabet[v & 0x3f]);
    i += 3;
  }
  size_t rest = in.size() - i;
  if (rest == 1) {
    uint32_t v = in[i] << 16;
    out.push_back(detail::base64Alphabet[(v >> 18) & 0x3f]);
    out.push_back(detail::base64Alphabet[(v >> 12) & 0x3f]);
    out += "==";
  }
  else if (rest == 2) {
    uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
    out.push_back(detail::base64Alphabet[(v >> 18) & 0x3f]);
    out.push_back(detail::base64Alphabet[(v >> 12) & 0x3f]);
    out.push_back(detail::base64Alphabet[(v >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

inline Bytes
base64Decode(std::string_view in)
{
  Bytes out;
  out.reserve(in.size() / 4 * 3);
  uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=' || c == '\n' || c == '\r' || c == ' ')
      continue;
    int v = detail::base64Value(c);
    if (v < 0)
      throw DecodeError("invalid base64 character");
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

} // namespace nacabe
