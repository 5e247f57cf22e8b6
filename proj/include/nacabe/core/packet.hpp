#pragma once

#include "crypto.hpp"
#include "name.hpp"

#include <variant>

namespace nacabe {

inline constexpr size_t MaxContentLen = 64 * 1024;
inline constexpr uint64_t DefaultInterestLifetimeMs = 4000;

enum class ContentType : uint8_t {
  Blob = 0,
  Key = 2,
  Nack = 3,
};

struct Interest {
  Name name;
  bool canBePrefix = false;
  bool mustBeFresh = false;
  uint32_t nonce = 0;
  uint64_t lifetimeMs = DefaultInterestLifetimeMs;

  bool matchesData(const Name& dataName) const
  {
    return canBePrefix ? name.isPrefixOf(dataName) : name == dataName;
  }

  friend bool operator==(const Interest&, const Interest&) = default;
};

struct Data {
  Name name;
  ContentType contentType = ContentType::Blob;
  uint64_t freshnessPeriodMs = 0;
  std::optional<Component> finalBlockId;
  Bytes content;
  Name keyLocator;
  Bytes signature;

  /// The TLV span the signature covers: Name, MetaInfo, Content and
  /// SignatureInfo (which carries the KeyLocator), in encoded order.
  Bytes signedPortion() const
  {
    tlv::Writer w;
    encodeSignedPortion(w);
    return w.take();
  }

  void encodeSignedPortion(tlv::Writer& w) const
  {
    if (content.size() > MaxContentLen)
      throw EncodeError("content exceeds 64 KiB cap");
    name.encodeTo(w);
    size_t meta = w.open(tlv::MetaInfo);
    w.blockNni(tlv::ContentType, static_cast<uint64_t>(contentType));
    w.blockNni(tlv::FreshnessPeriod, freshnessPeriodMs);
    if (finalBlockId.has_value()) {
      size_t fbi = w.open(tlv::FinalBlockId);
      finalBlockId->encodeTo(w);
      w.close(fbi);
    }
    w.close(meta);
    w.block(tlv::Content, content);
    size_t si = w.open(tlv::SignatureInfo);
    w.blockNni(tlv::SignatureType, tlv::Signature_Ed25519);
    size_t kl = w.open(tlv::KeyLocator);
    keyLocator.encodeTo(w);
    w.close(kl);
    w.close(si);
  }

  friend bool operator==(const Data&, const Data&) = default;
};

using Packet = std::variant<Interest, Data>;

inline Bytes
encodePacket(const Interest& interest)
{
  if (interest.name.empty())
    throw EncodeError("Interest requires a non-empty name");
  tlv::Writer w;
  size_t mark = w.open(tlv::Interest);
  interest.name.encodeTo(w);
  if (interest.canBePrefix)
    w.blockEmpty(tlv::CanBePrefix);
  if (interest.mustBeFresh)
    w.blockEmpty(tlv::MustBeFresh);
  Bytes nonce(4);
  for (int i = 0; i < 4; ++i)
    nonce[i] = static_cast<uint8_t>(interest.nonce >> (8 * (3 - i)));
  w.block(tlv::Nonce, nonce);
  w.blockNni(tlv::InterestLifetime, interest.lifetimeMs);
  w.close(mark);
  return w.take();
}

inline Bytes
encodePacket(const Data& data)
{
  if (data.name.empty())
    throw EncodeError("Data requires a non-empty name");
  tlv::Writer w;
  size_t mark = w.open(tlv::Data);
  data.encodeSignedPortion(w);
  w.block(tlv::SignatureValue, data.signature);
  w.close(mark);
  return w.take();
}

inline Bytes
encodePacket(const Packet& packet)
{
  return std::visit([](const auto& p) { return encodePacket(p); }, packet);
}

namespace detail {

inline Interest
decodeInterest(BytesView value)
{
  Interest interest;
  tlv::Reader r(value);
  interest.name = Name::decodeBlock(r);
  if (r.accept(tlv::CanBePrefix))
    interest.canBePrefix = true;
  if (r.accept(tlv::MustBeFresh))
    interest.mustBeFresh = true;
  BytesView nonce = r.expect(tlv::Nonce);
  if (nonce.size() != 4)
    throw DecodeError("bad Nonce length");
  for (uint8_t b : nonce)
    interest.nonce = (interest.nonce << 8) | b;
  interest.lifetimeMs = tlv::decodeNni(r.expect(tlv::InterestLifetime));
  r.requireEnd("Interest");
  return interest;
}

inline Data
decodeData(BytesView value)
{
  Data data;
  tlv::Reader r(value);
  data.name = Name::decodeBlock(r);
  tlv::Reader meta(r.expect(tlv::MetaInfo));
  uint64_t ct = tlv::decodeNni(meta.expect(tlv::ContentType));
  if (ct != 0 && ct != 2 && ct != 3)
    throw DecodeError("unknown ContentType");
  data.contentType = static_cast<ContentType>(ct);
  data.freshnessPeriodMs = tlv::decodeNni(meta.expect(tlv::FreshnessPeriod));
  if (auto fbi = meta.accept(tlv::FinalBlockId)) {
    tlv::Reader fr(*fbi);
    data.finalBlockId = Component::decodeFrom(fr.readElement());
    fr.requireEnd("FinalBlockId");
  }
  meta.requireEnd("MetaInfo");
  BytesView content = r.expect(tlv::Content);
  if (content.size() > MaxContentLen)
    throw DecodeError("content exceeds 64 KiB cap");
  data.content.assign(content.begin(), content.end());
  tlv::Reader si(r.expect(tlv::SignatureInfo));
  if (tlv::decodeNni(si.expect(tlv::SignatureType)) != tlv::Signature_Ed25519)
    throw DecodeError("unknown SignatureType");
  tlv::Reader kl(si.expect(tlv::KeyLocator));
  data.keyLocator = Name::decodeBlock(kl);
  kl.requireEnd("KeyLocator");
  si.requireEnd("SignatureInfo");
  BytesView sig = r.expect(tlv::SignatureValue);
  data.signature.assign(sig.begin(), sig.end());
  r.requireEnd("Data");
  return data;
}

} // namespace detail

inline Packet
decodePacket(BytesView wire)
{
  tlv::Reader r(wire);
  auto e = r.readElement();
  Packet packet;
  switch (e.type) {
    case tlv::Interest:
      packet = detail::decodeInterest(e.value);
      break;
    case tlv::Data:
      packet = detail::decodeData(e.value);
      break;
    default:
      throw DecodeError("unknown critical TLV type " + std::to_string(e.type));
  }
  r.requireEnd("packet");
  return packet;
}

inline Data
decodeDataPacket(BytesView wire)
{
  Packet p = decodePacket(wire);
  if (!std::holds_alternative<Data>(p))
    throw DecodeError("expected a Data packet");
  return std::get<Data>(std::move(p));
}

/// Signs over the SHA-256 digest of the signed TLV span and records the
/// signer's certificate name in the KeyLocator.
inline Data
signData(Data data, const crypto::SigningKey& key, const Name& signerCertName)
{
  data.keyLocator = signerCertName;
  Bytes digest = crypto::sha256(data.signedPortion());
  data.signature = key.sign(digest);
  return data;
}

inline bool
verifyData(const Data& data, BytesView signerPublicKey32)
{
  Bytes digest = crypto::sha256(data.signedPortion());
  return crypto::verify(signerPublicKey32, digest, data.signature);
}

} // namespace nacabe
