#pragma once

#include <stdexcept>
#include <string>

namespace nacabe {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Packet/TLV encoding failures (oversized components, content cap).
class EncodeError : public Error {
public:
  using Error::Error;
};

/// Malformed wire input: truncation, trailing bytes, bad lengths.
class DecodeError : public Error {
public:
  using Error::Error;
};

/// Policy text rejected by the parser; carries a 1-based position.
class PolicyError : public Error {
public:
  PolicyError(const std::string& what, size_t position)
    : Error(what + " at position " + std::to_string(position))
    , m_position(position)
  {
  }

  explicit PolicyError(const std::string& what)
    : Error(what)
    , m_position(0)
  {
  }

  size_t position() const noexcept { return m_position; }

private:
  size_t m_position;
};

/// ABE engine failures ("policy not satisfied", "params mismatch", ...).
class AbeError : public Error {
public:
  using Error::Error;
};

/// Forwarder/face misuse (duplicate prefix registration, detached face).
class NetError : public Error {
public:
  using Error::Error;
};

} // namespace nacabe
