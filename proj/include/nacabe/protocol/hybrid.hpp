#pragma once

#include "../core/certificate.hpp"

namespace nacabe {

/// DKEY packet content, bit-exact layout:
///   TLV(0x90, wrapped symmetric key)  -- eph X25519 pub (32) || nonce (12)
///                                        || AES-256-GCM(sym key) (48)
///   TLV(0x91, AEAD nonce)             -- nonce for the key-bytes AEAD
///   TLV(0x92, encrypted AbeKey bytes) -- AES-256-GCM under the sym key
///
/// The symmetric key wrap derives its AEAD key via X25519 agreement with
/// the consumer's public key and HKDF-SHA256.
inline constexpr std::string_view DkeyWrapInfo = "nacabe-dkey-wrap";

inline Bytes
wrapDkeyContent(BytesView serializedKey, BytesView consumerKemPublic32, Rng& rng)
{
  auto sym = rng.array<32>();
  auto keyNonce = rng.array<crypto::AeadNonceLen>();
  Bytes sealedKey = crypto::aeadSeal(BytesView(sym.data(), sym.size()),
                                     BytesView(keyNonce.data(), keyNonce.size()),
                                     serializedKey);

  crypto::KemKey eph = crypto::KemKey::generate(rng);
  Bytes shared = eph.agree(consumerKemPublic32);
  Bytes wrapKey = crypto::hkdfSha256(shared, {}, toBytes(DkeyWrapInfo), 32);
  auto wrapNonce = rng.array<crypto::AeadNonceLen>();
  Bytes sealedSym = crypto::aeadSeal(wrapKey, BytesView(wrapNonce.data(), wrapNonce.size()),
                                     BytesView(sym.data(), sym.size()));

  Bytes wrapped = eph.publicKey();
  append(wrapped, BytesView(wrapNonce.data(), wrapNonce.size()));
  append(wrapped, sealedSym);

  tlv::Writer w;
  w.block(tlv::DkeyWrappedSymKey, wrapped);
  w.block(tlv::DkeyAeadNonce, BytesView(keyNonce.data(), keyNonce.size()));
  w.block(tlv::DkeyEncryptedKey, sealedKey);
  return w.take();
}

/// Inverse of wrapDkeyContent with the consumer's private key; throws on
/// authentication failure (wrong consumer, tampering).
inline Bytes
unwrapDkeyContent(BytesView content, const crypto::KemKey& consumerKem)
{
  tlv::Reader r(content);
  BytesView wrapped = r.expect(tlv::DkeyWrappedSymKey);
  BytesView keyNonce = r.expect(tlv::DkeyAeadNonce);
  BytesView sealedKey = r.expect(tlv::DkeyEncryptedKey);
  r.requireEnd("DKEY content");

  if (wrapped.size() != 32 + crypto::AeadNonceLen + 32 + crypto::AeadTagLen)
    throw DecodeError("bad wrapped key length");
  if (keyNonce.size() != crypto::AeadNonceLen)
    throw DecodeError("bad DKEY nonce length");

  BytesView ephPublic = wrapped.subspan(0, 32);
  BytesView wrapNonce = wrapped.subspan(32, crypto::AeadNonceLen);
  BytesView sealedSym = wrapped.subspan(32 + crypto::AeadNonceLen);

  Bytes shared = consumerKem.agree(ephPublic);
  Bytes wrapKey = crypto::hkdfSha256(shared, {}, toBytes(DkeyWrapInfo), 32);
  auto sym = crypto::aeadOpen(wrapKey, wrapNonce, sealedSym);
  if (!sym.has_value())
    throw Error("DKEY unwrap failed: not encrypted to this consumer");
  auto keyBytes = crypto::aeadOpen(*sym, keyNonce, sealedKey);
  if (!keyBytes.has_value())
    throw Error("DKEY unwrap failed: key payload authentication failed");
  return std::move(*keyBytes);
}

} // namespace nacabe
