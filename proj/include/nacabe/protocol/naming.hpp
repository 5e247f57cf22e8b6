#pragma once

#include "../abe/abe.hpp"
#include "../core/name.hpp"

namespace nacabe {

/// Name construction for the three publication kinds:
///   pub params:  /<aa-prefix>/PUBPARAMS/<abe-type>/v=<n>[/seg=<i>]
///   DKEY:        /<aa-prefix>/DKEY/<consumer-key-name>/v=<n>[/seg=<i>]
///   CK:          /<producer-prefix>/CK/v=<n>/ENC-BY/<attrs-or-policy>[/seg=<i>]
namespace naming {

inline Name
pubParamsPrefix(const Name& aaPrefix, abe::AbeType type)
{
  Name n = aaPrefix;
  n.append("PUBPARAMS");
  n.append(abe::abeTypeToken(type));
  return n;
}

inline Name
pubParamsName(const Name& aaPrefix, abe::AbeType type, uint64_t version)
{
  return pubParamsPrefix(aaPrefix, type).appendVersion(version);
}

inline Name
dkeyPrefix(const Name& aaPrefix, const Name& consumerKeyName)
{
  Name n = aaPrefix;
  n.append("DKEY");
  n.append(consumerKeyName);
  return n;
}

inline Name
dkeyName(const Name& aaPrefix, const Name& consumerKeyName, uint64_t version)
{
  return dkeyPrefix(aaPrefix, consumerKeyName).appendVersion(version);
}

inline Name
ckName(const Name& producerPrefix, uint64_t ckVersion, const std::string& encBy)
{
  Name n = producerPrefix;
  n.append("CK");
  n.appendVersion(ckVersion);
  n.append("ENC-BY");
  n.append(encBy);
  return n;
}

/// Parses "<...>/v=<n>[/seg=<i>]" tails; returns the version and the name
/// cut after the version component.
struct VersionedName {
  Name base; // through the version component
  uint64_t version = 0;
  std::optional<uint64_t> segment;
};

inline std::optional<VersionedName>
parseVersioned(const Name& name)
{
  size_t end = name.size();
  std::optional<uint64_t> segment;
  if (end > 0 && name[end - 1].isSegment()) {
    segment = name[end - 1].toNumber();
    --end;
  }
  if (end == 0 || !name[end - 1].isVersion())
    return std::nullopt;
  VersionedName v;
  v.base = name.getPrefix(end);
  v.version = name[end - 1].toNumber();
  v.segment = segment;
  return v;
}

} // namespace naming

/// Content layout of an encrypted application packet: the CK's full name
/// in TLV form, then the sealed payload bytes.
inline Bytes
embedCkName(const Name& ckName, BytesView payload)
{
  tlv::Writer w;
  ckName.encodeTo(w);
  w.block(tlv::Content, payload);
  return w.take();
}

inline std::pair<Name, Bytes>
extractCkName(BytesView content)
{
  tlv::Reader r(content);
  Name ckName = Name::decodeBlock(r);
  BytesView payload = r.expect(tlv::Content);
  r.requireEnd("encrypted payload");
  return {std::move(ckName), Bytes(payload.begin(), payload.end())};
}

} // namespace nacabe
