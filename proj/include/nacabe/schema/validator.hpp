#pragma once

#include "../core/forwarder.hpp"
#include "trust_schema.hpp"

namespace nacabe {

/// Schema validator bound to a face. Certificates are fetched through the
/// regular forwarding path (so the content store serves them when their
/// issuer is offline), verified, and memoized together with their chain.
class Validator {
public:
  struct Options {
    uint64_t interestLifetimeMs = DefaultInterestLifetimeMs;
    int retries = 3; // retransmissions after the first attempt
  };

  Validator(TrustSchema schema, Face& face)
    : m_schema(std::move(schema))
    , m_face(face)
  {
  }

  Validator(TrustSchema schema, Face& face, Options options)
    : m_schema(std::move(schema))
    , m_face(face)
    , m_options(options)
  {
  }

  const TrustSchema& schema() const { return m_schema; }

  void validate(const Data& data, std::function<void(ValidationResult)> done)
  {
    // short-circuit through already-validated signers
    if (auto it = m_validatedCerts.find(data.keyLocator); it != m_validatedCerts.end()) {
      NamingCheck naming = checkNamingConvention(data.name);
      if (!naming.ok) {
        done(ValidationResult{ValidationOutcome::NamingViolation, {}, naming.what,
                              naming.violationIndex});
        return;
      }
      bool anchorMismatchSeen = false;
      auto rule = m_schema.findRule(data.name, data.keyLocator, anchorMismatchSeen);
      if (!rule.has_value()) {
        done(ValidationResult{anchorMismatchSeen ? ValidationOutcome::AnchorMismatch
                                                 : ValidationOutcome::NoMatchingRule,
                              {},
                              "no rule admits signer " + data.keyLocator.toUri(),
                              std::nullopt});
        return;
      }
      if (!verifyData(data, it->second.publicKey)) {
        done(ValidationResult{ValidationOutcome::InvalidSignature, {},
                              "signature check failed", std::nullopt});
        return;
      }
      std::vector<Name> chain;
      if (data.keyLocator != m_schema.anchor().name())
        chain.push_back(data.keyLocator);
      chain.insert(chain.end(), it->second.chain.begin(), it->second.chain.end());
      if (chain.empty() || chain.back() != m_schema.anchor().name())
        chain.push_back(m_schema.anchor().name());
      done(ValidationResult{ValidationOutcome::Valid, std::move(chain), "",
                            std::nullopt});
      return;
    }

    validateAsync(data, fetchFn(), m_schema,
                  [this, done = std::move(done)](ValidationResult r) {
                    if (r.valid())
                      memoizeChain(r.chain);
                    done(std::move(r));
                  });
  }

  size_t cachedCertCount() const { return m_validatedCerts.size(); }

private:
  AsyncFetchFn fetchFn()
  {
    return [this](const Name& certName, std::function<void(const Data*)> cb) {
      if (auto it = m_fetchedCerts.find(certName); it != m_fetchedCerts.end()) {
        cb(&it->second);
        return;
      }
      fetchWithRetry(certName, m_options.retries, std::move(cb));
    };
  }

  void fetchWithRetry(const Name& certName, int retriesLeft,
                      std::function<void(const Data*)> cb)
  {
    Interest interest;
    interest.name = certName;
    interest.canBePrefix = true;
    interest.lifetimeMs = m_options.interestLifetimeMs;
    // exactly one of the two callbacks fires; both need the continuation
    m_face.expressInterest(
      interest,
      [this, certName, cb](const Data& d) {
        auto [it, inserted] = m_fetchedCerts.emplace(certName, d);
        if (!inserted)
          it->second = d;
        cb(&it->second);
      },
      [this, certName, retriesLeft, cb]() mutable {
        if (retriesLeft > 0) {
          fetchWithRetry(certName, retriesLeft - 1, std::move(cb));
          return;
        }
        cb(nullptr);
      });
  }

  void memoizeChain(const std::vector<Name>& chain)
  {
    // chain[i] is validated by chain[i+1..]; the anchor closes it
    for (size_t i = 0; i < chain.size(); ++i) {
      if (m_validatedCerts.contains(chain[i]))
        continue;
      Bytes publicKey;
      if (chain[i] == m_schema.anchor().name()) {
        publicKey = m_schema.anchor().signingPublicKey();
      }
      else if (auto it = m_fetchedCerts.find(chain[i]); it != m_fetchedCerts.end()) {
        try {
          publicKey = Certificate(it->second).signingPublicKey();
        }
        catch (const Error&) {
          continue;
        }
      }
      else {
        continue;
      }
      std::vector<Name> suffix(chain.begin() + static_cast<long>(i) + 1, chain.end());
      m_validatedCerts.emplace(chain[i], ValidatedCert{std::move(publicKey),
                                                       std::move(suffix)});
    }
  }

  struct ValidatedCert {
    Bytes publicKey;
    std::vector<Name> chain; // remainder of the chain above this cert
  };

  TrustSchema m_schema;
  Face& m_face;
  Options m_options;
  std::map<Name, Data> m_fetchedCerts;
  std::map<Name, ValidatedCert> m_validatedCerts;
};

} // namespace nacabe
