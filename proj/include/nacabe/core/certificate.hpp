#pragma once

#include "packet.hpp"

#include <limits>

namespace nacabe {

/// A certificate is a Data packet of ContentType::Key named
/// <identity>/KEY/<key-id>/<issuer>/v=<version>. Its content carries the
/// subject's Ed25519 signing key, an X25519 key for DKEY wrapping, and the
/// validity window. A trust anchor is the self-signed case: its KeyLocator
/// equals its own name.
class Certificate {
public:
  Certificate() = default;

  explicit Certificate(Data data)
    : m_data(std::move(data))
  {
    parseContent();
  }

  struct Subject {
    Bytes signingPublicKey; // 32 bytes
    Bytes kemPublicKey;     // 32 bytes
    int64_t notBeforeMs = 0;
    int64_t notAfterMs = 0;

    friend bool operator==(const Subject&, const Subject&) = default;
  };

  static Bytes encodeSubject(const Subject& s)
  {
    tlv::Writer w;
    w.block(tlv::CertSigningPublicKey, s.signingPublicKey);
    w.block(tlv::CertKemPublicKey, s.kemPublicKey);
    w.blockNni(tlv::CertNotBefore, static_cast<uint64_t>(s.notBeforeMs));
    w.blockNni(tlv::CertNotAfter, static_cast<uint64_t>(s.notAfterMs));
    return w.take();
  }

  /// Builds and signs a certificate. For a self-signed anchor pass the
  /// subject's own signing key and the certificate's own name.
  static Certificate make(const Name& certName, const Subject& subject,
                          const crypto::SigningKey& issuerKey, const Name& issuerCertName,
                          uint64_t freshnessMs = 3'600'000)
  {
    Data d;
    d.name = certName;
    d.contentType = ContentType::Key;
    d.freshnessPeriodMs = freshnessMs;
    d.content = encodeSubject(subject);
    return Certificate(signData(std::move(d), issuerKey, issuerCertName));
  }

  const Data& data() const { return m_data; }
  const Name& name() const { return m_data.name; }
  const Name& keyLocator() const { return m_data.keyLocator; }

  const Bytes& signingPublicKey() const { return m_subject.signingPublicKey; }
  const Bytes& kemPublicKey() const { return m_subject.kemPublicKey; }
  int64_t notBeforeMs() const { return m_subject.notBeforeMs; }
  int64_t notAfterMs() const { return m_subject.notAfterMs; }

  bool isSelfSigned() const { return m_data.keyLocator == m_data.name; }

  /// Identity prefix: the name up to (excluding) the KEY component.
  Name identity() const
  {
    for (size_t i = 0; i < m_data.name.size(); ++i) {
      if (m_data.name[i].is("KEY"))
        return m_data.name.getPrefix(i);
    }
    return m_data.name;
  }

  /// Key name: <identity>/KEY/<key-id>, without issuer and version. This
  /// is the consumer identifier embedded in DKEY names.
  Name keyName() const
  {
    for (size_t i = 0; i < m_data.name.size(); ++i) {
      if (m_data.name[i].is("KEY"))
        return m_data.name.getPrefix(std::min(i + 2, m_data.name.size()));
    }
    return m_data.name;
  }

  friend bool operator==(const Certificate&, const Certificate&) = default;

private:
  void parseContent()
  {
    if (m_data.contentType != ContentType::Key)
      throw DecodeError("certificate must have ContentType Key");
    tlv::Reader r(m_data.content);
    BytesView sig = r.expect(tlv::CertSigningPublicKey);
    BytesView kem = r.expect(tlv::CertKemPublicKey);
    if (sig.size() != 32 || kem.size() != 32)
      throw DecodeError("bad certificate key length");
    m_subject.signingPublicKey.assign(sig.begin(), sig.end());
    m_subject.kemPublicKey.assign(kem.begin(), kem.end());
    m_subject.notBeforeMs = static_cast<int64_t>(tlv::decodeNni(r.expect(tlv::CertNotBefore)));
    m_subject.notAfterMs = static_cast<int64_t>(tlv::decodeNni(r.expect(tlv::CertNotAfter)));
    r.requireEnd("certificate content");
  }

  Data m_data;
  Subject m_subject;
};

/// Key material plus certificate for one entity in a simulation.
struct Identity {
  Name prefix;
  crypto::SigningKey signingKey;
  crypto::KemKey kemKey;
  Certificate cert;

  /// Self-signed identity (trust anchor).
  static Identity makeAnchor(const Name& prefix, Rng& rng, const std::string& keyId = "root")
  {
    crypto::SigningKey sk = crypto::SigningKey::generate(rng);
    crypto::KemKey kk = crypto::KemKey::generate(rng);
    Name certName = prefix;
    certName.append("KEY").append(keyId).append("self").appendVersion(1);
    Certificate::Subject subject{sk.publicKey(), kk.publicKey(), 0,
                                 std::numeric_limits<int64_t>::max()};
    Certificate cert = Certificate::make(certName, subject, sk, certName);
    return Identity{prefix, std::move(sk), std::move(kk), std::move(cert)};
  }

  /// Identity whose certificate is signed by the given issuer.
  static Identity makeSigned(const Name& prefix, const Identity& issuer, Rng& rng,
                             const std::string& issuerTag = "issuer")
  {
    crypto::SigningKey sk = crypto::SigningKey::generate(rng);
    crypto::KemKey kk = crypto::KemKey::generate(rng);
    std::string keyId = "k-" + toHex(rng.bytes(4));
    Name certName = prefix;
    certName.append("KEY").append(keyId).append(issuerTag).appendVersion(1);
    Certificate::Subject subject{sk.publicKey(), kk.publicKey(), 0,
                                 std::numeric_limits<int64_t>::max()};
    Certificate cert = Certificate::make(certName, subject, issuer.signingKey,
                                         issuer.cert.name());
    return Identity{prefix, std::move(sk), std::move(kk), std::move(cert)};
  }
};

} // namespace nacabe
