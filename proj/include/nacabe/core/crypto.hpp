#pragma once

#include "bytes.hpp"
#include "rng.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <array>
#include <memory>
#include <optional>

namespace nacabe::crypto {

namespace detail {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
};
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;

inline PkeyPtr
rawPrivateKey(int type, BytesView seed)
{
  EVP_PKEY* p = EVP_PKEY_new_raw_private_key(type, nullptr, seed.data(), seed.size());
  if (p == nullptr)
    throw Error("cannot construct raw private key");
  return PkeyPtr(p);
}

inline PkeyPtr
rawPublicKey(int type, BytesView pub)
{
  EVP_PKEY* p = EVP_PKEY_new_raw_public_key(type, nullptr, pub.data(), pub.size());
  if (p == nullptr)
    throw Error("cannot construct raw public key");
  return PkeyPtr(p);
}

// EVP_PKEY is refcounted and immutable here, so copies share the key.
inline PkeyPtr
sharePkey(const PkeyPtr& p)
{
  if (p == nullptr)
    return nullptr;
  EVP_PKEY_up_ref(p.get());
  return PkeyPtr(p.get());
}

inline Bytes
rawPublicBytes(EVP_PKEY* key)
{
  size_t len = 0;
  if (EVP_PKEY_get_raw_public_key(key, nullptr, &len) != 1)
    throw Error("cannot read raw public key");
  Bytes out(len);
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1)
    throw Error("cannot read raw public key");
  out.resize(len);
  return out;
}

} // namespace detail

inline Bytes
sha256(BytesView in)
{
  Bytes out(32);
  unsigned int len = 32;
  detail::MdCtxPtr ctx(EVP_MD_CTX_new());
  if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), in.data(), in.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1)
    throw Error("sha256 failure");
  return out;
}

/// Ed25519 signing key. Deterministic given its 32-byte seed, which is what
/// lets seeded scenario runs mint reproducible identities.
class SigningKey {
public:
  static SigningKey generate(Rng& rng)
  {
    auto seed = rng.array<32>();
    return fromSeed(BytesView(seed.data(), seed.size()));
  }

  static SigningKey fromSeed(BytesView seed32)
  {
    SigningKey k;
    k.m_key = detail::rawPrivateKey(EVP_PKEY_ED25519, seed32);
    return k;
  }

  SigningKey(const SigningKey& other)
    : m_key(detail::sharePkey(other.m_key))
  {
  }
  SigningKey& operator=(const SigningKey& other)
  {
    m_key = detail::sharePkey(other.m_key);
    return *this;
  }
  SigningKey(SigningKey&&) = default;
  SigningKey& operator=(SigningKey&&) = default;

  Bytes publicKey() const { return detail::rawPublicBytes(m_key.get()); }

  Bytes sign(BytesView msg) const
  {
    detail::MdCtxPtr ctx(EVP_MD_CTX_new());
    if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, m_key.get()) != 1)
      throw Error("ed25519 sign init failure");
    size_t sigLen = 64;
    Bytes sig(sigLen);
    if (EVP_DigestSign(ctx.get(), sig.data(), &sigLen, msg.data(), msg.size()) != 1)
      throw Error("ed25519 sign failure");
    sig.resize(sigLen);
    return sig;
  }

private:
  SigningKey() = default;
  detail::PkeyPtr m_key;
};

inline bool
verify(BytesView publicKey32, BytesView msg, BytesView sig)
{
  if (publicKey32.size() != 32 || sig.size() != 64)
    return false;
  detail::PkeyPtr key;
  try {
    key = detail::rawPublicKey(EVP_PKEY_ED25519, publicKey32);
  }
  catch (const Error&) {
    return false;
  }
  detail::MdCtxPtr ctx(EVP_MD_CTX_new());
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
    return false;
  return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

/// X25519 key-agreement key (DKEY hybrid wrapping).
class KemKey {
public:
  static KemKey generate(Rng& rng)
  {
    auto seed = rng.array<32>();
    return fromSeed(BytesView(seed.data(), seed.size()));
  }

  static KemKey fromSeed(BytesView seed32)
  {
    KemKey k;
    k.m_key = detail::rawPrivateKey(EVP_PKEY_X25519, seed32);
    return k;
  }

  KemKey(const KemKey& other)
    : m_key(detail::sharePkey(other.m_key))
  {
  }
  KemKey& operator=(const KemKey& other)
  {
    m_key = detail::sharePkey(other.m_key);
    return *this;
  }
  KemKey(KemKey&&) = default;
  KemKey& operator=(KemKey&&) = default;

  Bytes publicKey() const { return detail::rawPublicBytes(m_key.get()); }

  Bytes agree(BytesView peerPublic32) const
  {
    detail::PkeyPtr peer = detail::rawPublicKey(EVP_PKEY_X25519, peerPublic32);
    detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new(m_key.get(), nullptr));
    if (EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1)
      throw Error("x25519 derive init failure");
    size_t len = 32;
    Bytes shared(len);
    if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1)
      throw Error("x25519 derive failure");
    shared.resize(len);
    return shared;
  }

private:
  KemKey() = default;
  detail::PkeyPtr m_key;
};

inline Bytes
hkdfSha256(BytesView ikm, BytesView salt, BytesView info, size_t outLen)
{
  detail::PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) != 1)
    throw Error("hkdf init failure");
  Bytes out(outLen);
  size_t len = outLen;
  if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != outLen)
    throw Error("hkdf derive failure");
  return out;
}

inline constexpr size_t AeadNonceLen = 12;
inline constexpr size_t AeadTagLen = 16;

/// AES-256-GCM. Returns ciphertext with the 16-byte tag appended.
inline Bytes
aeadSeal(BytesView key32, BytesView nonce12, BytesView plaintext, BytesView aad = {})
{
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key32.data(), nonce12.data()) != 1)
    throw Error("aes-gcm init failure");
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    throw Error("aes-gcm aad failure");
  Bytes out(plaintext.size() + AeadTagLen);
  int total = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
      throw Error("aes-gcm encrypt failure");
    total = len;
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) != 1)
    throw Error("aes-gcm final failure");
  total += len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, AeadTagLen,
                          out.data() + total) != 1)
    throw Error("aes-gcm tag failure");
  out.resize(total + AeadTagLen);
  return out;
}

/// Inverse of aeadSeal; nullopt on authentication failure.
inline std::optional<Bytes>
aeadOpen(BytesView key32, BytesView nonce12, BytesView sealed, BytesView aad = {})
{
  if (sealed.size() < AeadTagLen)
    return std::nullopt;
  size_t ctLen = sealed.size() - AeadTagLen;
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key32.data(), nonce12.data()) != 1)
    return std::nullopt;
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1)
    return std::nullopt;
  Bytes out(ctLen);
  if (ctLen > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(ctLen)) != 1)
    return std::nullopt;
  int total = len;
  Bytes tag(sealed.begin() + ctLen, sealed.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, AeadTagLen, tag.data()) != 1)
    return std::nullopt;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &len) != 1)
    return std::nullopt;
  out.resize(total + len);
  return out;
}

} // namespace nacabe::crypto
