#pragma once

#include "fetcher.hpp"
#include "hybrid.hpp"

namespace nacabe {

/// Decryptor role: fetches encrypted application data, walks the CK name
/// embedded in it to the segmented CK object, lazily fetches the public
/// params and its own DKEY (latest version via prefix discovery), and
/// unwraps the chain down to the plaintext. Every received packet is
/// validated against the trust schema. The decrypted DKEY lives only in
/// memory.
class Decryptor {
public:
  struct Options {
    uint64_t interestLifetimeMs = DefaultInterestLifetimeMs;
    int retries = 3;
  };

  struct ConsumeError {
    enum class Kind {
      Fetch,
      Validation,
      PolicyNotSatisfied,
      Decrypt,
    };
    Kind kind = Kind::Fetch;
    std::string detail;
  };

  using ConsumeCallback =
    std::function<void(std::optional<Bytes>, std::optional<ConsumeError>)>;

  Decryptor(Face& face, Identity identity, Name aaPrefix, abe::AbeType type,
            Validator& validator, RngPtr rng)
    : Decryptor(face, std::move(identity), std::move(aaPrefix), type, validator,
                std::move(rng), Options{})
  {
  }

  Decryptor(Face& face, Identity identity, Name aaPrefix, abe::AbeType type,
            Validator& validator, RngPtr rng, Options options)
    : m_face(face)
    , m_identity(std::move(identity))
    , m_aaPrefix(std::move(aaPrefix))
    , m_type(type)
    , m_validator(validator)
    , m_rng(std::move(rng))
    , m_options(options)
  {
  }

  const Identity& identity() const { return m_identity; }
  bool hasParams() const { return m_params.has_value(); }
  bool hasDkey() const { return m_dkey.has_value(); }
  uint64_t dkeyVersion() const { return m_dkeyVersion; }
  /// Every params / DKEY version this instance has fetched.
  const std::map<uint64_t, abe::PublicParams>& paramsVersions() const
  {
    return m_paramsByVersion;
  }
  const std::map<uint64_t, abe::AbeKey>& dkeyVersions() const { return m_dkeyByVersion; }

  void consume(const Name& dataName, ConsumeCallback done)
  {
    Interest interest;
    interest.name = dataName;
    interest.lifetimeMs = m_options.interestLifetimeMs;
    fetchOne(m_face, interest, m_options.retries,
             [this, dataName, done = std::move(done)](std::optional<Data> d) mutable {
               if (!d.has_value()) {
                 fail(done, ConsumeError::Kind::Fetch,
                      "data fetch timed out: " + dataName.toUri());
                 return;
               }
               validateData(std::move(*d), std::move(done));
             });
  }

private:
  void fail(const ConsumeCallback& done, ConsumeError::Kind kind, std::string detail)
  {
    log::debug("consume failed: ", detail);
    done(std::nullopt, ConsumeError{kind, std::move(detail)});
  }

  void validateData(Data data, ConsumeCallback done)
  {
    m_validator.validate(data, [this, data, done = std::move(done)](ValidationResult r) {
      if (!r.valid()) {
        fail(done, ConsumeError::Kind::Validation,
             "data validation failed (" + std::string(to_string(r.outcome)) + "): " +
               r.detail);
        return;
      }
      Name ckName;
      Bytes blob;
      try {
        std::tie(ckName, blob) = extractCkName(data.content);
      }
      catch (const Error& e) {
        fail(done, ConsumeError::Kind::Decrypt,
             std::string("malformed encrypted payload: ") + e.what());
        return;
      }
      fetchCk(std::move(ckName), std::move(blob), std::move(done));
    });
  }

  void fetchCk(Name ckName, Bytes blob, ConsumeCallback done)
  {
    SegmentFetcher::Options fo;
    fo.interestLifetimeMs = m_options.interestLifetimeMs;
    fo.validator = &m_validator;
    SegmentFetcher::fetch(
      m_face, ckName, fo,
      [this, blob = std::move(blob), done](Bytes ckBytes, SegmentFetcher::Stats stats) {
        m_lastFetchStats = stats;
        abe::AbeCiphertext ckCiphertext;
        try {
          ckCiphertext = abe::deserializeCiphertext(ckBytes);
        }
        catch (const Error& e) {
          fail(done, ConsumeError::Kind::Decrypt,
               std::string("malformed CK object: ") + e.what());
          return;
        }
        ensureParams([this, ckCiphertext = std::move(ckCiphertext),
                      blob = std::move(blob), done](std::string error) mutable {
          if (!error.empty()) {
            fail(done, ConsumeError::Kind::Fetch, std::move(error));
            return;
          }
          ensureDkey([this, ckCiphertext = std::move(ckCiphertext),
                      blob = std::move(blob), done](std::string error2) mutable {
            if (!error2.empty()) {
              fail(done, ConsumeError::Kind::Fetch, std::move(error2));
              return;
            }
            unwrapPayload(std::move(ckCiphertext), std::move(blob), std::move(done));
          });
        });
      },
      [this, done](std::string reason) {
        fail(done, ConsumeError::Kind::Fetch, "CK fetch failed: " + reason);
      });
  }

  void unwrapPayload(abe::AbeCiphertext ckCiphertext, Bytes blob, ConsumeCallback done)
  {
    Bytes ck;
    try {
      ck = abe::abeDecrypt(*m_params, *m_dkey, ckCiphertext);
    }
    catch (const AbeError& e) {
      std::string what = e.what();
      if (what.find("policy not satisfied") != std::string::npos) {
        fail(done, ConsumeError::Kind::PolicyNotSatisfied, what);
        return;
      }
      fail(done, ConsumeError::Kind::Decrypt, "CK decryption failed: " + what);
      return;
    }
    if (ck.size() != 32 || blob.size() < crypto::AeadNonceLen) {
      fail(done, ConsumeError::Kind::Decrypt, "malformed content key or payload");
      return;
    }
    auto plain =
      crypto::aeadOpen(ck, BytesView(blob).subspan(0, crypto::AeadNonceLen),
                       BytesView(blob).subspan(crypto::AeadNonceLen));
    if (!plain.has_value()) {
      fail(done, ConsumeError::Kind::Decrypt, "payload authentication failed");
      return;
    }
    done(std::move(*plain), std::nullopt);
  }

  void ensureParams(std::function<void(std::string)> cont)
  {
    if (m_params.has_value()) {
      cont("");
      return;
    }
    SegmentFetcher::Options fo;
    fo.interestLifetimeMs = m_options.interestLifetimeMs;
    fo.validator = &m_validator;
    SegmentFetcher::fetch(
      m_face, naming::pubParamsPrefix(m_aaPrefix, m_type), fo,
      [this, cont](Bytes bytes, SegmentFetcher::Stats) {
        try {
          abe::PublicParams params = abe::deserializeParams(bytes);
          if (params.abeType() != m_type) {
            cont("fetched params are for the wrong abe type");
            return;
          }
          m_paramsByVersion[params.version()] = params;
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

  // Latest-version DKEY discovery: a canBePrefix+mustBeFresh Interest at
  // /<aa>/DKEY/<own key name>; the responder's version wins.
  void ensureDkey(std::function<void(std::string)> cont)
  {
    if (m_dkey.has_value()) {
      cont("");
      return;
    }
    SegmentFetcher::Options fo;
    fo.interestLifetimeMs = m_options.interestLifetimeMs;
    fo.validator = &m_validator;
    Name base = naming::dkeyPrefix(m_aaPrefix, m_identity.cert.keyName());
    SegmentFetcher::fetch(
      m_face, base, fo,
      [this, cont](Bytes package, SegmentFetcher::Stats stats) {
        try {
          Bytes keyBytes = unwrapDkeyContent(package, m_identity.kemKey);
          abe::AbeKey key = abe::deserializeKey(keyBytes);
          if (key.abeType != m_type) {
            cont("fetched DKEY is for the wrong abe type");
            return;
          }
          if (auto v = naming::parseVersioned(stats.objectBase))
            m_dkeyVersion = v->version;
          m_dkeyByVersion[m_dkeyVersion] = key;
          m_dkey = std::move(key);
        }
        catch (const Error& e) {
          cont(std::string("DKEY unusable: ") + e.what());
          return;
        }
        cont("");
      },
      [cont](std::string reason) { cont("DKEY fetch failed: " + reason); });
  }

public:
  /// Stats of the most recent segmented fetch (tests/benchmarks).
  const SegmentFetcher::Stats& lastFetchStats() const { return m_lastFetchStats; }

private:
  Face& m_face;
  Identity m_identity;
  Name m_aaPrefix;
  abe::AbeType m_type;
  Validator& m_validator;
  RngPtr m_rng;
  Options m_options;
  std::optional<abe::PublicParams> m_params;
  std::map<uint64_t, abe::PublicParams> m_paramsByVersion;
  std::optional<abe::AbeKey> m_dkey;
  std::map<uint64_t, abe::AbeKey> m_dkeyByVersion;
  uint64_t m_dkeyVersion = 0;
  SegmentFetcher::Stats m_lastFetchStats;
};

} // namespace nacabe
