#pragma once

#include "../abe/abe.hpp"
#include "../core/name.hpp"
#include "../protocol/encryptor.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nacabe::scenario {

class ConfigError : public Error {
public:
  using Error::Error;
};

enum class NodeRole {
  Router,
  Authority,
  Producer,
  Consumer,
};

struct NodeConfig {
  std::string id;
  NodeRole role = NodeRole::Router;
  Name prefix;                // empty for routers
  std::vector<Name> announces; // extra namespaces served by this node
};

struct LinkConfig {
  std::string a;
  std::string b;
  int64_t delayMs = 5;
  double lossProbability = 0.0;
};

struct GrantConfig {
  std::string consumer;
  std::string policy;                  // KP
  std::vector<std::string> attributes; // CP
};

struct ProductionConfig {
  std::string producer;
  Name name;
  Bytes payload;
  std::vector<std::string> attributes; // KP tag
  std::string policy;                  // CP tag
  int64_t atMs = 0;
};

struct ConsumptionConfig {
  std::string consumer;
  Name name;
  std::string expected; // SUCCESS or DENIED
  std::optional<int64_t> atMs;
};

struct ScenarioConfig {
  std::string name;
  abe::AbeType abeType = abe::AbeType::Kp;
  Name trustAnchorPrefix = Name::fromUri("/org/mhealth");
  size_t mss = DefaultMss;
  CkCachePolicy cachePolicy;
  std::vector<std::string> schemaRules; // without the anchor line
  std::vector<NodeConfig> nodes;
  std::vector<LinkConfig> links;
  std::vector<GrantConfig> grants;
  std::vector<ProductionConfig> productions;
  std::vector<ConsumptionConfig> consumptions;

  const NodeConfig& node(const std::string& id) const
  {
    for (const auto& n : nodes) {
      if (n.id == id)
        return n;
    }
    throw ConfigError("unknown node id: " + id);
  }

  static ScenarioConfig fromJson(const nlohmann::json& j);
  static ScenarioConfig fromJsonText(const std::string& text)
  {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, true, true);
    return fromJson(j);
  }

  void validate() const;
};

inline ScenarioConfig
ScenarioConfig::fromJson(const nlohmann::json& j)
{
  auto bad = [](const std::string& what) { return ConfigError("config: " + what); };
  ScenarioConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    auto type = abe::abeTypeFromToken(j.at("abeType").get<std::string>());
    if (!type.has_value())
      throw bad("abeType must be KP or CP");
    c.abeType = *type;
    if (j.contains("trustAnchor"))
      c.trustAnchorPrefix = Name::fromUri(j.at("trustAnchor").get<std::string>());
    if (j.contains("mss"))
      c.mss = j.at("mss").get<size_t>();
    if (j.contains("cache")) {
      const auto& cache = j.at("cache");
      if (cache.contains("maxItems"))
        c.cachePolicy.maxItems = cache.at("maxItems").get<uint64_t>();
      if (cache.contains("maxAgeMs"))
        c.cachePolicy.maxAgeMs = cache.at("maxAgeMs").get<int64_t>();
    }
    if (j.contains("schemaRules"))
      c.schemaRules = j.at("schemaRules").get<std::vector<std::string>>();

    for (const auto& n : j.at("nodes")) {
      NodeConfig node;
      node.id = n.at("id").get<std::string>();
      std::string role = n.at("role").get<std::string>();
      if (role == "router")
        node.role = NodeRole::Router;
      else if (role == "aa")
        node.role = NodeRole::Authority;
      else if (role == "producer")
        node.role = NodeRole::Producer;
      else if (role == "consumer")
        node.role = NodeRole::Consumer;
      else
        throw bad("unknown role '" + role + "' for node " + node.id);
      if (node.role != NodeRole::Router)
        node.prefix = Name::fromUri(n.at("prefix").get<std::string>());
      if (n.contains("announces")) {
        for (const auto& a : n.at("announces"))
          node.announces.push_back(Name::fromUri(a.get<std::string>()));
      }
      c.nodes.push_back(std::move(node));
    }

    for (const auto& l : j.at("links")) {
      LinkConfig link;
      link.a = l.at("a").get<std::string>();
      link.b = l.at("b").get<std::string>();
      if (l.contains("delayMs"))
        link.delayMs = l.at("delayMs").get<int64_t>();
      if (l.contains("loss"))
        link.lossProbability = l.at("loss").get<double>();
      c.links.push_back(std::move(link));
    }

    if (j.contains("grants")) {
      for (const auto& g : j.at("grants")) {
        GrantConfig grant;
        grant.consumer = g.at("consumer").get<std::string>();
        if (g.contains("policy"))
          grant.policy = g.at("policy").get<std::string>();
        if (g.contains("attributes"))
          grant.attributes = g.at("attributes").get<std::vector<std::string>>();
        c.grants.push_back(std::move(grant));
      }
    }

    if (j.contains("productions")) {
      for (const auto& p : j.at("productions")) {
        ProductionConfig prod;
        prod.producer = p.at("producer").get<std::string>();
        prod.name = Name::fromUri(p.at("name").get<std::string>());
        prod.payload = toBytes(p.at("payload").get<std::string>());
        if (p.contains("attributes"))
          prod.attributes = p.at("attributes").get<std::vector<std::string>>();
        if (p.contains("policy"))
          prod.policy = p.at("policy").get<std::string>();
        if (p.contains("atMs"))
          prod.atMs = p.at("atMs").get<int64_t>();
        c.productions.push_back(std::move(prod));
      }
    }

    if (j.contains("consumptions")) {
      for (const auto& k : j.at("consumptions")) {
        ConsumptionConfig cons;
        cons.consumer = k.at("consumer").get<std::string>();
        cons.name = Name::fromUri(k.at("name").get<std::string>());
        cons.expected = k.at("expected").get<std::string>();
        if (k.contains("atMs"))
          cons.atMs = k.at("atMs").get<int64_t>();
        c.consumptions.push_back(std::move(cons));
      }
    }
  }
  catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  c.validate();
  return c;
}

inline void
ScenarioConfig::validate() const
{
  auto bad = [](const std::string& what) { return ConfigError("config: " + what); };
  if (nodes.empty())
    throw bad("at least one node is required");
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (!ids.insert(n.id).second)
      throw bad("duplicate node id: " + n.id);
    if (n.role != NodeRole::Router && n.prefix.empty())
      throw bad("node " + n.id + " needs a prefix");
  }
  auto requireRole = [&](const std::string& id, NodeRole role, const char* what) {
    const NodeConfig& n = node(id); // throws on unknown ids
    if (n.role != role)
      throw bad(std::string(what) + " references node " + id + " with the wrong role");
  };
  for (const auto& l : links) {
    node(l.a);
    node(l.b);
    if (l.a == l.b)
      throw bad("link endpoints must differ");
    if (l.lossProbability < 0.0 || l.lossProbability > 1.0)
      throw bad("loss probability must be within [0, 1]");
  }
  size_t authorities = 0;
  for (const auto& n : nodes)
    authorities += n.role == NodeRole::Authority ? 1 : 0;
  if (authorities != 1 && !(grants.empty() && productions.empty() && consumptions.empty()))
    throw bad("exactly one aa node is required");

  for (const auto& g : grants) {
    requireRole(g.consumer, NodeRole::Consumer, "grant");
    if (abeType == abe::AbeType::Kp && g.policy.empty())
      throw bad("KP grants need a policy (consumer " + g.consumer + ")");
    if (abeType == abe::AbeType::Cp && g.attributes.empty())
      throw bad("CP grants need attributes (consumer " + g.consumer + ")");
  }
  for (const auto& p : productions) {
    requireRole(p.producer, NodeRole::Producer, "production");
    if (abeType == abe::AbeType::Kp && p.attributes.empty())
      throw bad("KP productions need attributes (" + p.name.toUri() + ")");
    if (abeType == abe::AbeType::Cp && p.policy.empty())
      throw bad("CP productions need a policy (" + p.name.toUri() + ")");
  }
  for (const auto& k : consumptions) {
    requireRole(k.consumer, NodeRole::Consumer, "consumption");
    if (k.expected != "SUCCESS" && k.expected != "DENIED")
      throw bad("expected outcome must be SUCCESS or DENIED");
  }
}

} // namespace nacabe::scenario
