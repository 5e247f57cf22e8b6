#pragma once

#include "../protocol/authority.hpp"
#include "../protocol/decryptor.hpp"
#include "../schema/validator.hpp"
#include "config.hpp"

#include <deque>
#include <sstream>

namespace nacabe::scenario {

struct RunReport {
  std::string scenario;
  uint64_t seed = 0;
  bool ok = false;

  struct Consumption {
    std::string consumer;
    std::string name;
    std::string expected;
    std::string outcome; // SUCCESS, DENIED or FAILED
    std::string detail;
    bool ok = false;
  };
  std::vector<Consumption> consumptions;

  uint64_t interestsForwarded = 0;
  uint64_t dataForwarded = 0;
  uint64_t csHits = 0;
  uint64_t retransmits = 0;
  uint64_t cksPublished = 0;

  struct DkeyRow {
    std::string consumer;
    uint64_t bytes = 0;
    uint64_t segments = 0;
  };
  std::vector<DkeyRow> dkeys;

  int64_t virtualTimeMs = 0;

  int exitCode() const { return ok ? 0 : 1; }

  /// Machine-readable report: one JSON object per line, consumptions first
  /// and a summary last. Contains only seed-determined values, so a given
  /// (config, seed) pair always produces identical bytes.
  std::string toJsonLines() const
  {
    std::string out;
    for (const auto& c : consumptions) {
      nlohmann::json line{{"type", "consumption"}, {"consumer", c.consumer},
                          {"name", c.name},        {"expected", c.expected},
                          {"outcome", c.outcome},  {"detail", c.detail},
                          {"ok", c.ok}};
      out += line.dump();
      out += "\n";
    }
    nlohmann::json dkeyRows = nlohmann::json::array();
    for (const auto& d : dkeys)
      dkeyRows.push_back(
        {{"consumer", d.consumer}, {"bytes", d.bytes}, {"segments", d.segments}});
    nlohmann::json summary{
      {"type", "summary"},
      {"scenario", scenario},
      {"seed", seed},
      {"ok", ok},
      {"counters",
       {{"interests", interestsForwarded},
        {"data", dataForwarded},
        {"csHits", csHits},
        {"retransmits", retransmits}}},
      {"cksPublished", cksPublished},
      {"dkeys", dkeyRows},
      {"virtualTimeMs", virtualTimeMs}};
    out += summary.dump();
    out += "\n";
    return out;
  }

  std::string summaryText() const
  {
    std::ostringstream os;
    os << "scenario " << scenario << " (seed " << seed << "): "
       << (ok ? "PASS" : "FAIL") << "\n";
    for (const auto& c : consumptions) {
      os << "  [" << (c.ok ? "ok" : "MISMATCH") << "] " << c.consumer << " <- " << c.name
         << " expected=" << c.expected << " outcome=" << c.outcome;
      if (!c.ok && !c.detail.empty())
        os << " (" << c.detail << ")";
      os << "\n";
    }
    os << "  cks published: " << cksPublished << ", dkeys:";
    for (const auto& d : dkeys)
      os << " " << d.consumer << "=" << d.bytes << "B/" << d.segments << "seg";
    os << "\n  interests " << interestsForwarded << ", data " << dataForwarded
       << ", cs hits " << csHits << ", retransmits " << retransmits << ", virtual time "
       << virtualTimeMs << " ms\n";
    return os.str();
  }
};

namespace detail {

/// Collects every attribute a policy's normalized form touches.
inline abe::AttributeSet
policyAttributes(const abe::PolicyExpr& policy)
{
  abe::AttributeSet out;
  std::function<void(const abe::PolicyExpr&)> walk = [&](const abe::PolicyExpr& p) {
    if (p.kind() == abe::PolicyExpr::Kind::Leaf)
      out.insert(p.attribute());
    for (const auto& c : p.children())
      walk(c);
  };
  walk(policy.normalized());
  return out;
}

} // namespace detail

/// One simulated node: a forwarder plus the role instance bound to it.
class ScenarioNet {
public:
  ScenarioNet(const ScenarioConfig& config, uint64_t seed)
    : m_config(config)
    , m_rng(std::make_shared<Rng>(Rng::seeded(seed)))
  {
    build();
  }

  Scheduler& scheduler() { return m_sched; }
  const TrustSchema& schema() const { return *m_schema; }

  AttributeAuthority& authority()
  {
    if (m_authority == nullptr)
      throw ConfigError("scenario has no aa node");
    return *m_authority;
  }

  Encryptor& encryptor(const std::string& id) { return *m_encryptors.at(id); }
  Decryptor& decryptor(const std::string& id) { return *m_decryptors.at(id); }
  Forwarder& forwarder(const std::string& id) { return *m_forwarders.at(id); }
  Face& face(const std::string& id) { return *m_faces.at(id); }
  const Identity& identityOf(const std::string& id) const { return m_identities.at(id); }
  RngPtr rng() { return m_rng; }

  /// Detaches every link touching the node (intermittent-connectivity
  /// experiments).
  void detachNode(const std::string& id)
  {
    for (auto& [link, ends] : m_links) {
      if (ends.first == id || ends.second == id)
        link->setUp(false);
    }
  }

  Forwarder::Counters totalCounters() const
  {
    Forwarder::Counters total;
    for (const auto& [id, fwd] : m_forwarders) {
      total.inInterests += fwd->counters().inInterests;
      total.outInterests += fwd->counters().outInterests;
      total.inData += fwd->counters().inData;
      total.outData += fwd->counters().outData;
      total.csHits += fwd->counters().csHits;
      total.unsolicitedData += fwd->counters().unsolicitedData;
      total.duplicateNonces += fwd->counters().duplicateNonces;
    }
    return total;
  }

  uint64_t totalCksMinted() const
  {
    uint64_t total = 0;
    for (const auto& [id, enc] : m_encryptors)
      total += enc->stats().cksMinted;
    return total;
  }

private:
  void build()
  {
    // forwarders and links
    for (const auto& n : m_config.nodes)
      m_forwarders.emplace(n.id, std::make_unique<Forwarder>(m_sched, m_rng));
    for (const auto& l : m_config.links) {
      auto link = Link::connect(*m_forwarders.at(l.a), *m_forwarders.at(l.b),
                                LinkPolicy{l.delayMs, l.lossProbability},
                                LinkPolicy{l.delayMs, l.lossProbability});
      m_links.emplace_back(link, std::make_pair(l.a, l.b));
    }

    installRoutes();

    // identities: anchor first, then nodes in config order
    m_anchor = Identity::makeAnchor(m_config.trustAnchorPrefix, *m_rng);
    for (const auto& n : m_config.nodes) {
      if (n.role == NodeRole::Router)
        continue;
      m_identities.emplace(n.id, Identity::makeSigned(n.prefix, *m_anchor, *m_rng, "org"));
      m_faces.emplace(n.id, &m_forwarders.at(n.id)->createFace());
    }

    m_schema.emplace(loadSchema(schemaText()));

    // roles
    for (const auto& n : m_config.nodes) {
      switch (n.role) {
        case NodeRole::Router:
          break;
        case NodeRole::Authority: {
          AttributeAuthority::Options ao;
          ao.mss = m_config.mss;
          m_authority = std::make_unique<AttributeAuthority>(
            *m_faces.at(n.id), m_identities.at(n.id), m_config.abeType, m_rng, ao);
          break;
        }
        case NodeRole::Producer: {
          m_validators.push_back(
            std::make_unique<Validator>(*m_schema, *m_faces.at(n.id)));
          Encryptor::Options eo;
          eo.mss = m_config.mss;
          eo.servedPrefixes = n.announces;
          m_encryptors.emplace(
            n.id, std::make_unique<Encryptor>(*m_faces.at(n.id), m_identities.at(n.id),
                                              aaPrefix(), m_config.abeType,
                                              m_config.cachePolicy, m_rng,
                                              m_validators.back().get(), eo));
          break;
        }
        case NodeRole::Consumer: {
          m_validators.push_back(
            std::make_unique<Validator>(*m_schema, *m_faces.at(n.id)));
          m_decryptors.emplace(
            n.id, std::make_unique<Decryptor>(*m_faces.at(n.id), m_identities.at(n.id),
                                              aaPrefix(), m_config.abeType,
                                              *m_validators.back(), m_rng));
          break;
        }
      }
    }
  }

  Name aaPrefix() const
  {
    for (const auto& n : m_config.nodes) {
      if (n.role == NodeRole::Authority)
        return n.prefix;
    }
    return Name();
  }

  // static shortest-path routes for every announced prefix
  void installRoutes()
  {
    // adjacency: node -> (neighbor, link face on node)
    std::map<std::string, std::vector<std::pair<std::string, FaceId>>> adj;
    for (const auto& [link, ends] : m_links) {
      adj[ends.first].emplace_back(ends.second, link->faceOn(*m_forwarders.at(ends.first)));
      adj[ends.second].emplace_back(ends.first, link->faceOn(*m_forwarders.at(ends.second)));
    }
    for (const auto& target : m_config.nodes) {
      std::vector<Name> prefixes = target.announces;
      if (target.role != NodeRole::Router)
        prefixes.push_back(target.prefix);
      if (prefixes.empty())
        continue;
      // BFS outward from the target; every discovered node routes back
      // through the neighbor it was discovered from
      std::map<std::string, FaceId> egress; // node -> face toward the target
      std::deque<std::string> queue{target.id};
      std::set<std::string> seen{target.id};
      while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        for (const auto& [nbr, faceOnCur] : adj[cur]) {
          (void)faceOnCur;
          if (!seen.insert(nbr).second)
            continue;
          for (const auto& [back, faceOnNbr] : adj[nbr]) {
            if (back == cur) {
              egress[nbr] = faceOnNbr;
              break;
            }
          }
          queue.push_back(nbr);
        }
      }
      for (const auto& [nodeId, face] : egress) {
        for (const auto& prefix : prefixes)
          m_forwarders.at(nodeId)->addRoute(prefix, face);
      }
    }
  }

  std::string schemaText() const
  {
    std::string text = "anchor: " + base64Encode(encodePacket(m_anchor->cert.data())) + "\n";
    if (!m_config.schemaRules.empty()) {
      for (const auto& rule : m_config.schemaRules)
        text += rule + "\n";
      return text;
    }
    // default rule set over the anchor prefix hierarchy
    std::string root = m_config.trustAnchorPrefix.toUri();
    if (root == "/")
      root.clear();
    text += "rule app-data:  " + root + "/<>* => " + root + "/producer/<>/KEY/<>*\n";
    text += "rule pubparams: /<aa>*/PUBPARAMS/<>* => /<aa>*/KEY/<>*\n";
    text += "rule dkey:      /<aa>*/DKEY/<>* => /<aa>*/KEY/<>*\n";
    text += "rule entity:    " + root + "/<role>/<>/KEY/<>* => anchor\n";
    return text;
  }

  const ScenarioConfig& m_config;
  RngPtr m_rng;
  Scheduler m_sched;
  std::map<std::string, std::unique_ptr<Forwarder>> m_forwarders;
  std::vector<std::pair<std::shared_ptr<Link>, std::pair<std::string, std::string>>> m_links;
  std::optional<Identity> m_anchor;
  std::map<std::string, Identity> m_identities;
  std::map<std::string, Face*> m_faces;
  std::optional<TrustSchema> m_schema;
  std::vector<std::unique_ptr<Validator>> m_validators;
  std::unique_ptr<AttributeAuthority> m_authority;
  std::map<std::string, std::unique_ptr<Encryptor>> m_encryptors;
  std::map<std::string, std::unique_ptr<Decryptor>> m_decryptors;
};

/// Executes a scenario: sets up the network and PKI, publishes params,
/// processes grants, runs every production and consumption at its virtual
/// time, and reports outcomes against expectations.
inline RunReport
runScenario(const ScenarioConfig& config, uint64_t seed)
{
  ScenarioNet net(config, seed);
  Scheduler& sched = net.scheduler();

  RunReport report;
  report.scenario = config.name;
  report.seed = seed;

  // attribute universe: every tag and grant the scenario mentions
  abe::AttributeSet universe;
  for (const auto& p : config.productions) {
    for (const auto& a : p.attributes)
      universe.insert(abe::Attribute::fromString(a));
    if (!p.policy.empty())
      universe.merge(detail::policyAttributes(abe::parsePolicy(p.policy)));
  }
  for (const auto& g : config.grants) {
    for (const auto& a : g.attributes)
      universe.insert(abe::Attribute::fromString(a));
    if (!g.policy.empty())
      universe.merge(detail::policyAttributes(abe::parsePolicy(g.policy)));
  }

  AttributeAuthority& aa = net.authority();
  aa.registerAttributes(universe);
  aa.publishPubParams();

  for (const auto& g : config.grants) {
    const Identity& consumer = net.identityOf(g.consumer);
    if (config.abeType == abe::AbeType::Kp)
      aa.grantAccess(consumer.cert, abe::parsePolicy(g.policy));
    else
      aa.grantAccess(consumer.cert, abe::AttributeSet::of(g.attributes));
  }

  // schedule productions at their virtual times
  std::map<Name, Bytes> expectedPayloads;
  size_t productionFailures = 0;
  int64_t lastProductionAt = 0;
  for (const auto& p : config.productions) {
    expectedPayloads[p.name] = p.payload;
    lastProductionAt = std::max(lastProductionAt, p.atMs);
    sched.schedule(p.atMs, [&net, &p, &productionFailures] {
      auto done = [&productionFailures, name = p.name](Encryptor::ProduceResult r) {
        if (!r.ok) {
          ++productionFailures;
          log::error("production failed for ", name.toUri(), ": ", r.error);
        }
      };
      if (p.attributes.empty())
        net.encryptor(p.producer).produce(p.name, p.payload, p.policy, done);
      else
        net.encryptor(p.producer).produce(p.name, p.payload,
                                          abe::AttributeSet::of(p.attributes), done);
    });
  }

  // consumptions follow the productions unless the config pins a time
  report.consumptions.resize(config.consumptions.size());
  int64_t defaultStart = lastProductionAt + 1000;
  for (size_t i = 0; i < config.consumptions.size(); ++i) {
    const ConsumptionConfig& k = config.consumptions[i];
    RunReport::Consumption& row = report.consumptions[i];
    row.consumer = k.consumer;
    row.name = k.name.toUri();
    row.expected = k.expected;
    int64_t at = k.atMs.value_or(defaultStart + static_cast<int64_t>(i) * 200);
    sched.schedule(at, [&net, &k, &row, &expectedPayloads] {
      net.decryptor(k.consumer)
        .consume(k.name, [&row, &expectedPayloads, name = k.name](
                           std::optional<Bytes> payload,
                           std::optional<Decryptor::ConsumeError> error) {
          if (payload.has_value()) {
            auto it = expectedPayloads.find(name);
            if (it != expectedPayloads.end() && it->second != *payload) {
              row.outcome = "FAILED";
              row.detail = "payload differs from the produced bytes";
              return;
            }
            row.outcome = "SUCCESS";
            return;
          }
          if (error.has_value() &&
              error->kind == Decryptor::ConsumeError::Kind::PolicyNotSatisfied) {
            row.outcome = "DENIED";
            row.detail = error->detail;
            return;
          }
          row.outcome = "FAILED";
          row.detail = error.has_value() ? error->detail : "no payload";
        });
    });
  }

  sched.runUntilIdle();

  bool allMatched = productionFailures == 0;
  for (auto& row : report.consumptions) {
    if (row.outcome.empty()) {
      row.outcome = "FAILED";
      row.detail = "consumption never completed";
    }
    row.ok = row.outcome == row.expected;
    allMatched = allMatched && row.ok;
  }
  report.ok = allMatched;

  Forwarder::Counters counters = net.totalCounters();
  report.interestsForwarded = counters.outInterests;
  report.dataForwarded = counters.outData;
  report.csHits = counters.csHits;
  report.cksPublished = net.totalCksMinted();
  for (const auto& g : config.grants) {
    const auto& info =
      aa.grants().at(net.identityOf(g.consumer).cert.keyName());
    report.dkeys.push_back({g.consumer, info.packageBytes, info.segmentCount});
  }
  report.virtualTimeMs = sched.nowMs();
  return report;
}

} // namespace nacabe::scenario
