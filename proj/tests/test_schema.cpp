#include <nacabe/schema/trust_schema.hpp>
#include <nacabe/schema/validator.hpp>

#include <catch2/catch_amalgamated.hpp>

using namespace nacabe;

namespace {

struct MhealthPki {
  Rng rng = Rng::seeded(10001);
  Identity anchor = Identity::makeAnchor(Name::fromUri("/org/mhealth"), rng);
  Identity aa =
    Identity::makeSigned(Name::fromUri("/org/mhealth/aa/main"), anchor, rng, "org");
  Identity producer =
    Identity::makeSigned(Name::fromUri("/org/mhealth/producer/alice"), anchor, rng, "org");
  Identity consumer =
    Identity::makeSigned(Name::fromUri("/org/mhealth/consumer/doctor"), anchor, rng, "org");

  std::string schemaText() const
  {
    return "# mhealth application schema\n"
           "anchor: " +
           base64Encode(encodePacket(anchor.cert.data())) +
           "\n"
           "rule app-data:  /org/mhealth/<>*            => /org/mhealth/producer/<>/KEY/<>*\n"
           "rule pubparams: /<aa>*/PUBPARAMS/<>*        => /<aa>*/KEY/<>*\n"
           "rule dkey:      /<aa>*/DKEY/<>*             => /<aa>*/KEY/<>*\n"
           "rule entity:    /org/mhealth/<role>/<>/KEY/<>* => anchor\n";
  }

  TrustSchema schema() const { return loadSchema(schemaText()); }

  // map-backed synchronous fetch over the entity certificates
  std::function<std::optional<Data>(const Name&)> fetchFn() const
  {
    return [this](const Name& name) -> std::optional<Data> {
      for (const Identity* id : {&anchor, &aa, &producer, &consumer}) {
        if (name.isPrefixOf(id->cert.name()) || name == id->cert.name())
          return id->cert.data();
      }
      return std::nullopt;
    };
  }

  Data signedAppData(std::string_view nameUri, const Identity& signer) const
  {
    Data d;
    d.name = Name::fromUri(nameUri);
    d.content = toBytes("o2 reading");
    d.freshnessPeriodMs = 10000;
    return signData(d, signer.signingKey, signer.cert.name());
  }
};

} // namespace

TEST_CASE("name patterns match literals, wildcards and captures")
{
  NamePattern p = NamePattern::parse("/org/mhealth/<role>/<>/KEY/<>*");
  NamePattern::Captures caps;
  REQUIRE(p.match(Name::fromUri("/org/mhealth/producer/alice/KEY/k1/org/v=1"), caps));
  CHECK(caps.at("role") == Name::fromUri("/producer"));
  CHECK_FALSE(p.matches(Name::fromUri("/org/mhealth/producer/KEY/k1")));
  CHECK_FALSE(p.matches(Name::fromUri("/org/other/producer/alice/KEY/k1")));

  NamePattern multi = NamePattern::parse("/<aa>*/PUBPARAMS/<>*");
  NamePattern::Captures caps2;
  REQUIRE(multi.match(Name::fromUri("/org/mhealth/aa/main/PUBPARAMS/KP/v=1"), caps2));
  CHECK(caps2.at("aa") == Name::fromUri("/org/mhealth/aa/main"));

  // substitution carries the captured components into the signer side
  NamePattern signer = NamePattern::parse("/<aa>*/KEY/<>*");
  CHECK(signer.substitute(caps2).matches(
    Name::fromUri("/org/mhealth/aa/main/KEY/k9/org/v=1")));
  CHECK_FALSE(signer.substitute(caps2).matches(
    Name::fromUri("/org/mhealth/consumer/doctor/KEY/k1/org/v=1")));
}

TEST_CASE("the mhealth schema loads with four rules and an anchor")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  CHECK(schema.rules().size() == 4);
  CHECK(schema.anchor().name() == pki.anchor.cert.name());
  CHECK(schema.rules()[0].id == "app-data");
  CHECK(schema.rules()[3].signerIsAnchor);
}

TEST_CASE("schema loading rejects malformed inputs")
{
  MhealthPki pki;
  std::string anchorLine = "anchor: " + base64Encode(encodePacket(pki.anchor.cert.data()));
  // no rules
  CHECK_THROWS_WITH(loadSchema(anchorLine + "\n"),
                    Catch::Matchers::ContainsSubstring("empty rule list"));
  // no anchor
  CHECK_THROWS_WITH(loadSchema("rule r: /a/<>* => /b/<>*\n"),
                    Catch::Matchers::ContainsSubstring("missing the anchor"));
  // signer references a capture the data pattern does not define
  CHECK_THROWS_WITH(loadSchema(anchorLine + "\nrule r: /a/<>* => /<aa>*/KEY/<>*\n"),
                    Catch::Matchers::ContainsSubstring("undefined capture"));
  // junk line
  CHECK_THROWS_WITH(loadSchema(anchorLine + "\nnonsense\n"),
                    Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("producer data validates with a two-certificate chain")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  Data d = pki.signedAppData("/org/mhealth/diabetes/id123/cgm/blood-glucose/r1",
                             pki.producer);
  ValidationResult r = validate(d, pki.fetchFn(), schema);
  REQUIRE(r.outcome == ValidationOutcome::Valid);
  REQUIRE(r.chain.size() == 2);
  CHECK(r.chain[0] == pki.producer.cert.name());
  CHECK(r.chain[1] == pki.anchor.cert.name());
}

TEST_CASE("a key outside the hierarchy finds no matching rule")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  // AA output signed by a consumer key (unauthorized production)
  Data pubparams;
  pubparams.name = Name::fromUri("/org/mhealth/aa/main/PUBPARAMS/KP/v=1");
  pubparams.content = toBytes("params");
  pubparams = signData(pubparams, pki.consumer.signingKey, pki.consumer.cert.name());
  ValidationResult r = validate(pubparams, pki.fetchFn(), schema);
  CHECK(r.outcome == ValidationOutcome::NoMatchingRule);
}

TEST_CASE("a flipped signature bit yields INVALID_SIGNATURE")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  Data d = pki.signedAppData("/org/mhealth/diabetes/id123/watch/heart-rate/r1",
                             pki.producer);
  d.signature[10] ^= 0x01;
  ValidationResult r = validate(d, pki.fetchFn(), schema);
  CHECK(r.outcome == ValidationOutcome::InvalidSignature);
}

TEST_CASE("valid pubparams and dkey names validate under their rules")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();

  Data pubparams;
  pubparams.name = Name::fromUri("/org/mhealth/aa/main/PUBPARAMS/KP/v=1/seg=0");
  pubparams.content = toBytes("params");
  pubparams = signData(pubparams, pki.aa.signingKey, pki.aa.cert.name());
  ValidationResult r1 = validate(pubparams, pki.fetchFn(), schema);
  CHECK(r1.outcome == ValidationOutcome::Valid);

  Data dkey;
  Name dkeyName = Name::fromUri("/org/mhealth/aa/main/DKEY");
  dkeyName.append(pki.consumer.cert.keyName());
  dkeyName.appendVersion(1);
  dkeyName.appendSegment(0);
  dkey.name = dkeyName;
  dkey.content = toBytes("wrapped key");
  dkey = signData(dkey, pki.aa.signingKey, pki.aa.cert.name());
  ValidationResult r2 = validate(dkey, pki.fetchFn(), schema);
  CHECK(r2.outcome == ValidationOutcome::Valid);
}

TEST_CASE("a self-signed non-anchor certificate is rejected")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  Identity rogue = Identity::makeAnchor(Name::fromUri("/org/mhealth/consumer/mallory"),
                                        pki.rng, "rogue");
  ValidationResult r = validate(rogue.cert.data(), pki.fetchFn(), schema);
  // the entity rule matches the name but demands the anchor as signer
  CHECK(r.outcome == ValidationOutcome::AnchorMismatch);
}

TEST_CASE("certificate fetch failure is reported as CHAIN_FETCH_FAILED")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  Data d = pki.signedAppData("/org/mhealth/diabetes/id123/cgm/blood-glucose/r2",
                             pki.producer);
  auto noFetch = [](const Name&) -> std::optional<Data> { return std::nullopt; };
  ValidationResult r = validate(d, noFetch, schema);
  CHECK(r.outcome == ValidationOutcome::ChainFetchFailed);
}

TEST_CASE("chains deeper than 8 certificates fail")
{
  Rng rng = Rng::seeded(10002);
  Identity anchor = Identity::makeAnchor(Name::fromUri("/root"), rng);
  std::string schemaText = "anchor: " + base64Encode(encodePacket(anchor.cert.data())) +
                           "\n"
                           "rule any: /<>* => /<>*\n";
  TrustSchema schema = loadSchema(schemaText);

  // a linear chain of 10 intermediate certificates
  std::vector<Identity> chain;
  chain.push_back(Identity::makeSigned(Name::fromUri("/e/0"), anchor, rng));
  for (int i = 1; i < 10; ++i)
    chain.push_back(Identity::makeSigned(Name::fromUri("/e/" + std::to_string(i)),
                                         chain.back(), rng));
  auto fetch = [&](const Name& name) -> std::optional<Data> {
    for (const auto& id : chain) {
      if (name.isPrefixOf(id.cert.name()))
        return id.cert.data();
    }
    if (name.isPrefixOf(anchor.cert.name()))
      return anchor.cert.data();
    return std::nullopt;
  };

  Data d;
  d.name = Name::fromUri("/e/data");
  d.content = toBytes("x");
  d = signData(d, chain.back().signingKey, chain.back().cert.name());
  ValidationResult r = validate(d, fetch, schema);
  CHECK(r.outcome == ValidationOutcome::ChainFetchFailed);
  CHECK_THAT(r.detail, Catch::Matchers::ContainsSubstring("depth"));

  // a short chain through the same schema is fine
  Data ok;
  ok.name = Name::fromUri("/e/data2");
  ok.content = toBytes("y");
  ok = signData(ok, chain[0].signingKey, chain[0].cert.name());
  CHECK(validate(ok, fetch, schema).outcome == ValidationOutcome::Valid);
}

TEST_CASE("validation is deterministic given the same fetch results")
{
  MhealthPki pki;
  TrustSchema schema = pki.schema();
  Data d = pki.signedAppData("/org/mhealth/diabetes/id123/cgm/blood-glucose/r3",
                             pki.producer);
  ValidationResult a = validate(d, pki.fetchFn(), schema);
  ValidationResult b = validate(d, pki.fetchFn(), schema);
  CHECK(a.outcome == b.outcome);
  CHECK(a.chain == b.chain);
}

TEST_CASE("the face-driven validator caches certificates")
{
  MhealthPki pki;
  Scheduler sched;
  auto rng = std::make_shared<Rng>(Rng::seeded(10003));
  Forwarder fwd(sched, rng);

  Face& certServer = fwd.createFace();
  int certInterests = 0;
  certServer.registerPrefix(Name::fromUri("/org/mhealth"), [&](const Interest& i) {
    ++certInterests;
    for (const Identity* id : {&pki.aa, &pki.producer, &pki.consumer}) {
      if (i.matchesData(id->cert.name())) {
        certServer.put(id->cert.data());
        return;
      }
    }
  });

  Face& consumerFace = fwd.createFace();
  Validator validator(pki.schema(), consumerFace);

  Data d1 = pki.signedAppData("/org/mhealth/diabetes/id123/cgm/blood-glucose/a",
                              pki.producer);
  Data d2 = pki.signedAppData("/org/mhealth/diabetes/id123/cgm/blood-glucose/b",
                              pki.producer);

  std::vector<ValidationResult> results;
  validator.validate(d1, [&](ValidationResult r) { results.push_back(std::move(r)); });
  sched.runUntilIdle();
  REQUIRE(results.size() == 1);
  CHECK(results[0].outcome == ValidationOutcome::Valid);
  CHECK(results[0].chain.size() == 2);
  int fetchesAfterFirst = certInterests;
  CHECK(fetchesAfterFirst >= 1);

  // the second validation never touches the network
  validator.validate(d2, [&](ValidationResult r) { results.push_back(std::move(r)); });
  sched.runUntilIdle();
  REQUIRE(results.size() == 2);
  CHECK(results[1].outcome == ValidationOutcome::Valid);
  CHECK(results[1].chain == results[0].chain);
  CHECK(certInterests == fetchesAfterFirst);
}
