#pragma once

#include "fetcher.hpp"
#include "segments.hpp"

namespace nacabe {

/// CK cache policy: an entry is retired once it has encrypted maxItems
/// payloads or once it is older than maxAgeMs. Zero disables the
/// respective bound.
struct CkCachePolicy {
  uint64_t maxItems = 100;
  int64_t maxAgeMs = 3'600'000;
};

/// Content-key reuse state for one encryption tag.
struct CkCacheEntry {
  std::string cacheKey; // canonical attribute set (KP) or policy text (CP)
  std::array<uint8_t, 32> ck{};
  Name ckName; // full CK name through the ENC-BY component
  uint64_t itemsEncrypted = 0;
  int64_t createdAt = 0;
  uint64_t ckVersion = 0;
};

/// CK-caching encryptor role. Payloads are sealed under a cached content
/// key; a fresh CK is minted (and its ABE encryption published as a
/// segmented CK object) only when the tag is new or the cache policy
/// retires the entry. The CK's full name rides inside each data packet.
class Encryptor {
public:
  struct Options {
    size_t mss = DefaultMss;
    uint64_t keyFreshnessMs = 3'600'000;
    uint64_t dataFreshnessMs = 60'000;
    std::vector<Name> servedPrefixes; // beyond the identity prefix
  };

  struct Stats {
    uint64_t itemsProduced = 0;
    uint64_t cksMinted = 0;
    uint64_t abeEncryptions = 0;
    uint64_t paramsFetches = 0;
  };

  struct ProduceResult {
    bool ok = false;
    Name dataName;
    Name ckName;
    std::string error;
  };
  using ProduceCallback = std::function<void(ProduceResult)>;

  Encryptor(Face& face, Identity identity, Name aaPrefix, abe::AbeType type,
            CkCachePolicy cachePolicy, RngPtr rng, Validator* validator)
    : Encryptor(face, std::move(identity), std::move(aaPrefix), type, cachePolicy,
                std::move(rng), validator, Options{})
  {
  }

  Encryptor(Face& face, Identity identity, Name aaPrefix, abe::AbeType type,
            CkCachePolicy cachePolicy, RngPtr rng, Validator* validator, Options options)
    : m_face(face)
    , m_identity(std::move(identity))
    , m_aaPrefix(std::move(aaPrefix))
    , m_type(type)
    , m_cachePolicy(cachePolicy)
    , m_rng(std::move(rng))
    , m_validator(validator)
    , m_options(std::move(options))
    , m_server(face)
  {
    m_server.servePrefix(m_identity.prefix);
    for (const auto& prefix : m_options.servedPrefixes) {
      if (!m_identity.prefix.isPrefixOf(prefix))
        m_server.servePrefix(prefix);
    }
    m_server.store().put(m_identity.cert.data());
  }

  const Identity& identity() const { return m_identity; }
  const Stats& stats() const { return m_stats; }
  const SegmentStore& store() const { return m_server.store(); }

  /// KP production: the payload is tagged with data attributes.
  void produce(const Name& dataName, BytesView payload, const abe::AttributeSet& attrs,
               ProduceCallback done)
  {
    if (m_type != abe::AbeType::Kp) {
      done(failure(dataName, "tag mismatch: KP encryptor expects attributes"));
      return;
    }
    if (attrs.empty()) {
      done(failure(dataName, "empty attribute set"));
      return;
    }
    Tag tag;
    tag.attrs = attrs;
    tag.cacheKey = attrs.canonicalString();
    produceImpl(dataName, Bytes(payload.begin(), payload.end()), std::move(tag),
                std::move(done));
  }

  /// CP production: the payload is bound to an access policy.
  void produce(const Name& dataName, BytesView payload, const std::string& policyText,
               ProduceCallback done)
  {
    if (m_type != abe::AbeType::Cp) {
      done(failure(dataName, "tag mismatch: CP encryptor expects a policy"));
      return;
    }
    Tag tag;
    try {
      tag.cacheKey = abe::canonicalPolicyText(policyText);
      tag.policy = abe::parsePolicy(policyText);
    }
    catch (const Error& e) {
      done(failure(dataName, std::string("bad policy: ") + e.what()));
      return;
    }
    produceImpl(dataName, Bytes(payload.begin(), payload.end()), std::move(tag),
                std::move(done));
  }

  /// Cache inspection (tests and benches).
  const std::map<std::string, CkCacheEntry>& ckCache() const { return m_ckCache; }

private:
  struct Tag {
    std::string cacheKey;
    abe::AttributeSet attrs;           // KP
    std::optional<abe::PolicyExpr> policy; // CP
  };

  static ProduceResult failure(const Name& dataName, std::string error)
  {
    return ProduceResult{false, dataName, {}, std::move(error)};
  }

  void produceImpl(Name dataName, Bytes payload, Tag tag, ProduceCallback done)
  {
    bool covered = m_identity.prefix.isPrefixOf(dataName);
    for (const auto& prefix : m_options.servedPrefixes)
      covered = covered || prefix.isPrefixOf(dataName);
    if (!covered) {
      done(failure(dataName, "data name is not under a served prefix"));
      return;
    }
    ensureParams(false, [this, dataName = std::move(dataName),
                         payload = std::move(payload), tag = std::move(tag),
                         done = std::move(done)](std::string error) mutable {
      if (!error.empty()) {
        done(failure(dataName, std::move(error)));
        return;
      }
      encryptAndPublish(std::move(dataName), std::move(payload), std::move(tag),
                        std::move(done), true);
    });
  }

  void encryptAndPublish(Name dataName, Bytes payload, Tag tag, ProduceCallback done,
                         bool mayRefetchParams)
  {
    try {
      encryptAndPublishImpl(dataName, std::move(payload), std::move(tag), done,
                            mayRefetchParams);
    }
    catch (const Error& e) {
      // oversized names/contents and similar encode-time failures
      done(failure(dataName, e.what()));
    }
  }

  void encryptAndPublishImpl(Name dataName, Bytes payload, Tag tag, ProduceCallback done,
                             bool mayRefetchParams)
  {
    auto [entry, minted] = ckCacheLookup(tag);
    if (minted) {
      Bytes ckCiphertext;
      try {
        abe::AttributeSet attrs = tag.attrs;
        BytesView ckView(entry->ck.data(), entry->ck.size());
        if (m_type == abe::AbeType::Kp)
          ckCiphertext = abe::kpEncrypt(*m_params, attrs, ckView, *m_rng).serialize();
        else
          ckCiphertext = abe::cpEncrypt(*m_params, *tag.policy, ckView, *m_rng).serialize();
      }
      catch (const AbeError& e) {
        std::string what = e.what();
        m_ckCache.erase(tag.cacheKey); // do not cache a CK that never published
        if (what.find("unknown attribute") != std::string::npos && mayRefetchParams) {
          // the attribute universe may have grown: refetch once, then retry
          ensureParams(true, [this, dataName = std::move(dataName),
                              payload = std::move(payload), tag = std::move(tag),
                              done = std::move(done)](std::string error) mutable {
            if (!error.empty()) {
              done(failure(dataName, std::move(error)));
              return;
            }
            encryptAndPublish(std::move(dataName), std::move(payload), std::move(tag),
                              std::move(done), false);
          });
          return;
        }
        done(failure(dataName, what));
        return;
      }
      ++m_stats.abeEncryptions;
      ++m_stats.cksMinted;
      SegmentedObject obj = makeSegments(entry->ckName, ckCiphertext, m_options.mss,
                                         m_options.keyFreshnessMs, m_identity.signingKey,
                                         m_identity.cert.name());
      m_server.store().add(obj);
      log::info("encryptor published ", entry->ckName.toUri(), " (",
                obj.segments.size(), " segments)");
    }

    // seal the payload under the CK and embed the CK name
    auto nonce = m_rng->array<crypto::AeadNonceLen>();
    Bytes sealed = crypto::aeadSeal(BytesView(entry->ck.data(), entry->ck.size()),
                                    BytesView(nonce.data(), nonce.size()), payload);
    Bytes blob(nonce.begin(), nonce.end());
    append(blob, sealed);

    Data data;
    data.name = dataName;
    data.contentType = ContentType::Blob;
    data.freshnessPeriodMs = m_options.dataFreshnessMs;
    data.content = embedCkName(entry->ckName, blob);
    data = signData(std::move(data), m_identity.signingKey, m_identity.cert.name());
    m_server.store().put(data);
    ++m_stats.itemsProduced;

    ProduceResult result;
    result.ok = true;
    result.dataName = dataName;
    result.ckName = entry->ckName;
    done(std::move(result));
  }

  /// Returns the live cache entry for the tag, minting a fresh CK when the
  /// tag is new or the policy retired the old one. Every call counts one
  /// encrypted item against the entry.
  std::pair<CkCacheEntry*, bool> ckCacheLookup(const Tag& tag)
  {
    int64_t now = m_face.forwarder().nowMs();
    auto it = m_ckCache.find(tag.cacheKey);
    if (it != m_ckCache.end()) {
      CkCacheEntry& entry = it->second;
      bool itemsOk =
        m_cachePolicy.maxItems == 0 || entry.itemsEncrypted < m_cachePolicy.maxItems;
      bool ageOk =
        m_cachePolicy.maxAgeMs == 0 || now - entry.createdAt < m_cachePolicy.maxAgeMs;
      if (itemsOk && ageOk) {
        ++entry.itemsEncrypted;
        return {&entry, false};
      }
      m_ckCache.erase(it); // retire
    }
    CkCacheEntry entry;
    entry.cacheKey = tag.cacheKey;
    m_rng->fill(entry.ck.data(), entry.ck.size());
    entry.ckVersion = ++m_lastCkVersion;
    entry.ckName = naming::ckName(m_identity.prefix, entry.ckVersion, tag.cacheKey);
    entry.createdAt = now;
    entry.itemsEncrypted = 1;
    auto [pos, inserted] = m_ckCache.emplace(tag.cacheKey, std::move(entry));
    return {&pos->second, true};
  }

  void ensureParams(bool force, std::function<void(std::string)> cont)
  {
    if (m_params.has_value() && !force) {
      cont("");
      return;
    }
    SegmentFetcher::Options fo;
    fo.validator = m_validator;
    ++m_stats.paramsFetches;
    SegmentFetcher::fetch(
      m_face, naming::pubParamsPrefix(m_aaPrefix, m_type), fo,
      [this, cont](Bytes bytes, SegmentFetcher::Stats) {
        try {
          abe::PublicParams params = abe::deserializeParams(bytes);
          if (params.abeType() != m_type) {
            cont("fetched params are for the wrong abe type");
            return;
          }
          m_params = std::move(params);
        }
        catch (const Error& e) {
          cont(std::string("cannot parse fetched params: ") + e.what());
          return;
        }
        cont("");
      },
      [cont](std::string reason) { cont("params fetch failed: " + reason); });
  }

  Face& m_face;
  Identity m_identity;
  Name m_aaPrefix;
  abe::AbeType m_type;
  CkCachePolicy m_cachePolicy;
  RngPtr m_rng;
  Validator* m_validator;
  Options m_options;
  SegmentServer m_server;
  std::optional<abe::PublicParams> m_params;
  std::map<std::string, CkCacheEntry> m_ckCache;
  uint64_t m_lastCkVersion = 0;
  Stats m_stats;
};

} // namespace nacabe
