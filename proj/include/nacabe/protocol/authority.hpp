#pragma once

#include "hybrid.hpp"
#include "segments.hpp"

namespace nacabe {

/// Attribute Authority role: owns the ABE system, publishes versioned
/// public parameters, and grants per-consumer decryption keys as hybrid-
/// encrypted, segmented DKEY objects. Everything it publishes is signed
/// with its own identity and served under its prefix.
class AttributeAuthority {
public:
  struct Options {
    size_t mss = DefaultMss;
    uint64_t keyFreshnessMs = 3'600'000;
  };

  struct GrantInfo {
    Name baseName; // through the version component
    uint64_t version = 0;
    size_t packageBytes = 0;
    size_t segmentCount = 0;
  };

  AttributeAuthority(Face& face, Identity identity, abe::AbeType type, RngPtr rng)
    : AttributeAuthority(face, std::move(identity), type, std::move(rng), Options{})
  {
  }

  AttributeAuthority(Face& face, Identity identity, abe::AbeType type, RngPtr rng,
                     Options options)
    : m_face(face)
    , m_identity(std::move(identity))
    , m_type(type)
    , m_rng(std::move(rng))
    , m_options(options)
    , m_server(face)
  {
    auto [params, master] = abe::setup(type, *m_rng);
    m_params = std::move(params);
    m_master = std::move(master);
    m_server.servePrefix(m_identity.prefix);
    m_server.store().put(m_identity.cert.data());
  }

  const Identity& identity() const { return m_identity; }
  abe::AbeType abeType() const { return m_type; }
  abe::PublicParams& params() { return m_params; }
  abe::MasterKey& master() { return m_master; }

  /// Grows the attribute universe ahead of publication, so encryptors find
  /// every data-side attribute in the fetched params.
  void registerAttributes(const abe::AttributeSet& attrs)
  {
    for (const auto& a : attrs)
      m_master.ensureAttribute(a, *m_rng);
  }

  /// Publishes the current params under
  /// /<prefix>/PUBPARAMS/<abe-type>/v=<n>; the version advances only when
  /// the attribute universe grew since the last publication.
  Name publishPubParams()
  {
    uint64_t version = m_params.bumpVersionForPublish();
    Name base = naming::pubParamsName(m_identity.prefix, m_type, version);
    SegmentedObject obj =
      makeSegments(base, m_params.serialize(), m_options.mss, m_options.keyFreshnessMs,
                   m_identity.signingKey, m_identity.cert.name(), ContentType::Key);
    m_server.store().add(obj);
    log::info("aa published ", base.toUri(), " (", obj.segments.size(), " segments)");
    return base;
  }

  /// KP grant: the consumer's DKEY embeds an access policy.
  Name grantAccess(const Certificate& consumerCert, const abe::PolicyExpr& policy)
  {
    if (m_type != abe::AbeType::Kp)
      throw AbeError("grant type mismatch: KP authority expects a policy grant");
    abe::AbeKey key = abe::kpKeygen(m_master, policy, *m_rng);
    return publishDkey(consumerCert, key);
  }

  /// CP grant: the consumer's DKEY embeds its attribute set.
  Name grantAccess(const Certificate& consumerCert, const abe::AttributeSet& attrs)
  {
    if (m_type != abe::AbeType::Cp)
      throw AbeError("grant type mismatch: CP authority expects an attribute grant");
    abe::AbeKey key = abe::cpKeygen(m_master, attrs, *m_rng);
    return publishDkey(consumerCert, key);
  }

  size_t dkeyObjectCount() const { return m_dkeyObjects; }
  const std::map<Name, GrantInfo>& grants() const { return m_grants; }
  const SegmentStore& store() const { return m_server.store(); }

private:
  Name publishDkey(const Certificate& consumerCert, const abe::AbeKey& key)
  {
    if (consumerCert.kemPublicKey().size() != 32)
      throw Error("unknown consumer certificate: no key-agreement key");
    Bytes package = wrapDkeyContent(key.serialize(), consumerCert.kemPublicKey(), *m_rng);

    Name consumerKeyName = consumerCert.keyName();
    GrantInfo& grant = m_grants[consumerKeyName];
    grant.version += 1; // re-grants advance the version
    Name base = naming::dkeyName(m_identity.prefix, consumerKeyName, grant.version);
    SegmentedObject obj =
      makeSegments(base, package, m_options.mss, m_options.keyFreshnessMs,
                   m_identity.signingKey, m_identity.cert.name(), ContentType::Key);
    m_server.store().add(obj); // older versions stay fetchable
    ++m_dkeyObjects;
    grant.baseName = base;
    grant.packageBytes = package.size();
    grant.segmentCount = obj.segments.size();
    log::info("aa granted ", base.toUri(), " (", obj.segments.size(), " segments)");
    return base;
  }

  Face& m_face;
  Identity m_identity;
  abe::AbeType m_type;
  RngPtr m_rng;
  Options m_options;
  SegmentServer m_server;
  abe::PublicParams m_params;
  abe::MasterKey m_master;
  std::map<Name, GrantInfo> m_grants;
  size_t m_dkeyObjects = 0;
};

} // namespace nacabe
