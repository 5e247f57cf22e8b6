#pragma once

#include "../core/certificate.hpp"

#include <cctype>
#include <functional>
#include <map>
#include <memory>

namespace nacabe {

/// Name pattern for schema rules. Components are literals, single-component
/// wildcards `<>`, multi-component wildcards `<>*`, or capture groups
/// `<name>` / `<name>*` whose bindings a signer pattern can reference.
class NamePattern {
public:
  struct Part {
    enum class Kind {
      Literal,
      Any,       // <>
      AnyMulti,  // <>*
      Capture,   // <name>
      CaptureMulti, // <name>*
    };
    Kind kind;
    std::string text; // literal text or capture name
  };

  NamePattern() = default;

  static NamePattern parse(std::string_view text)
  {
    NamePattern p;
    size_t i = 0;
    while (i < text.size()) {
      if (text[i] == '/') {
        ++i;
        continue;
      }
      size_t j = text.find('/', i);
      if (j == std::string_view::npos)
        j = text.size();
      std::string_view tok = text.substr(i, j - i);
      i = j;
      if (tok == "<>") {
        p.m_parts.push_back({Part::Kind::Any, ""});
      }
      else if (tok == "<>*") {
        p.m_parts.push_back({Part::Kind::AnyMulti, ""});
      }
      else if (tok.size() >= 2 && tok.front() == '<') {
        bool multi = tok.back() == '*';
        std::string_view inner = tok.substr(1, tok.size() - (multi ? 3 : 2));
        if (inner.empty() || tok[tok.size() - (multi ? 2 : 1)] != '>')
          throw Error("malformed pattern component: " + std::string(tok));
        p.m_parts.push_back(
          {multi ? Part::Kind::CaptureMulti : Part::Kind::Capture, std::string(inner)});
      }
      else {
        p.m_parts.push_back({Part::Kind::Literal, std::string(tok)});
      }
    }
    if (p.m_parts.empty())
      throw Error("empty name pattern");
    return p;
  }

  using Captures = std::map<std::string, Name>;

  /// Matches the whole name; multi wildcards consume one or more
  /// components. On success the captures map holds every capture group's
  /// binding.
  bool match(const Name& name, Captures& captures) const
  {
    Captures scratch;
    if (!matchFrom(0, name, 0, scratch))
      return false;
    captures = std::move(scratch);
    return true;
  }

  bool matches(const Name& name) const
  {
    Captures ignored;
    return match(name, ignored);
  }

  /// Instantiates this pattern with bindings captured elsewhere. Remaining
  /// wildcards stay wildcards; unresolved named captures are an error.
  NamePattern substitute(const Captures& captures) const
  {
    NamePattern out;
    for (const auto& part : m_parts) {
      if (part.kind == Part::Kind::Capture || part.kind == Part::Kind::CaptureMulti) {
        auto it = captures.find(part.text);
        if (it == captures.end())
          throw Error("unresolved capture <" + part.text + ">");
        for (size_t i = 0; i < it->second.size(); ++i)
          out.m_parts.push_back({Part::Kind::Literal, it->second[i].toUri()});
      }
      else {
        out.m_parts.push_back(part);
      }
    }
    return out;
  }

  /// Capture names this pattern defines.
  std::vector<std::string> captureNames() const
  {
    std::vector<std::string> names;
    for (const auto& p : m_parts) {
      if (p.kind == Part::Kind::Capture || p.kind == Part::Kind::CaptureMulti)
        names.push_back(p.text);
    }
    return names;
  }

private:
  static bool componentMatchesLiteral(const Component& c, const std::string& text)
  {
    return c.toUri() == text;
  }

  bool matchFrom(size_t pi, const Name& name, size_t ni, Captures& captures) const
  {
    if (pi == m_parts.size())
      return ni == name.size();
    const Part& part = m_parts[pi];
    switch (part.kind) {
      case Part::Kind::Literal:
        if (ni < name.size() && componentMatchesLiteral(name[ni], part.text))
          return matchFrom(pi + 1, name, ni + 1, captures);
        return false;
      case Part::Kind::Any:
        if (ni < name.size())
          return matchFrom(pi + 1, name, ni + 1, captures);
        return false;
      case Part::Kind::Capture:
        if (ni < name.size()) {
          Name prev;
          bool had = captures.contains(part.text);
          if (had)
            prev = captures[part.text];
          captures[part.text] = Name().append(name[ni]);
          if (matchFrom(pi + 1, name, ni + 1, captures))
            return true;
          if (had)
            captures[part.text] = prev;
          else
            captures.erase(part.text);
        }
        return false;
      case Part::Kind::AnyMulti:
      case Part::Kind::CaptureMulti:
        // one or more components, shortest-first backtracking
        for (size_t take = 1; ni + take <= name.size(); ++take) {
          if (part.kind == Part::Kind::CaptureMulti) {
            Name bound;
            for (size_t k = 0; k < take; ++k)
              bound.append(name[ni + k]);
            captures[part.text] = bound;
          }
          if (matchFrom(pi + 1, name, ni + take, captures))
            return true;
          if (part.kind == Part::Kind::CaptureMulti)
            captures.erase(part.text);
        }
        return false;
    }
    return false;
  }

  std::vector<Part> m_parts;
};

/// One schema rule: data names matching dataPattern must be signed by a
/// key whose certificate name matches signerPattern (with dataPattern's
/// captures substituted), or by the trust anchor directly.
struct SchemaRule {
  std::string id;
  NamePattern dataPattern;
  NamePattern signerPattern;
  bool signerIsAnchor = false;
};

enum class ValidationOutcome {
  Valid,
  InvalidSignature,
  NoMatchingRule,
  ChainFetchFailed,
  AnchorMismatch,
  NamingViolation,
};

inline std::string_view
to_string(ValidationOutcome o)
{
  switch (o) {
    case ValidationOutcome::Valid:
      return "VALID";
    case ValidationOutcome::InvalidSignature:
      return "INVALID_SIGNATURE";
    case ValidationOutcome::NoMatchingRule:
      return "NO_MATCHING_RULE";
    case ValidationOutcome::ChainFetchFailed:
      return "CHAIN_FETCH_FAILED";
    case ValidationOutcome::AnchorMismatch:
      return "ANCHOR_MISMATCH";
    case ValidationOutcome::NamingViolation:
      return "NAMING_VIOLATION";
  }
  return "?";
}

struct ValidationResult {
  ValidationOutcome outcome = ValidationOutcome::NoMatchingRule;
  std::vector<Name> chain; // certificate names traversed, anchor last
  std::string detail;
  std::optional<size_t> violationIndex; // naming violations: offending component

  bool valid() const { return outcome == ValidationOutcome::Valid; }
};

/// Naming-convention check for NAC-ABE-produced packets. Names carrying a
/// PUBPARAMS / DKEY / CK marker must follow the publication grammar;
/// anything else passes untouched.
struct NamingCheck {
  bool ok = true;
  size_t violationIndex = 0;
  std::string what;
};

inline NamingCheck
checkNamingConvention(const Name& name)
{
  auto fail = [](size_t index, std::string what) {
    return NamingCheck{false, index, std::move(what)};
  };

  size_t marker = name.size();
  for (size_t i = 0; i < name.size(); ++i) {
    if (name[i].is("PUBPARAMS") || name[i].is("DKEY") || name[i].is("CK")) {
      marker = i;
      break;
    }
  }
  if (marker == name.size())
    return {};
  if (marker == 0)
    return fail(0, "publication marker requires a non-empty owner prefix");

  size_t i = marker;
  if (name[i].is("PUBPARAMS")) {
    if (i + 1 >= name.size() || !(name[i + 1].is("KP") || name[i + 1].is("CP")))
      return fail(i + 1, "expected abe-type component (KP or CP)");
    if (i + 2 >= name.size() || !name[i + 2].isVersion())
      return fail(i + 2, "expected version component");
    size_t next = i + 3;
    if (next < name.size() && name[next].isSegment())
      ++next;
    if (next != name.size())
      return fail(next, "unexpected components after PUBPARAMS name");
    return {};
  }

  if (name[i].is("DKEY")) {
    // /<aa>/DKEY/<consumer pubkey name>/v=<n>[/seg=<i>]
    // anchored at the tail: the consumer key name may itself carry
    // version-typed components
    size_t end = name.size();
    if (end > i + 1 && name[end - 1].isSegment())
      --end;
    if (end <= i + 1 || !name[end - 1].isVersion())
      return fail(name.size() - 1, "expected version component after consumer key name");
    size_t version = end - 1;
    if (version == i + 1)
      return fail(i + 1, "expected consumer public key name");
    bool hasKey = false;
    for (size_t j = i + 1; j < version; ++j)
      hasKey = hasKey || name[j].is("KEY");
    if (!hasKey)
      return fail(i + 1, "consumer component must be a public key name (missing KEY)");
    return {};
  }

  // CK: /<producer>/CK/v=<n>/ENC-BY/<attrs-or-policy>[/seg=<i>]
  if (i + 1 >= name.size() || !name[i + 1].isVersion())
    return fail(i + 1, "expected version component after CK");
  if (i + 2 >= name.size() || !name[i + 2].is("ENC-BY"))
    return fail(i + 2, "expected ENC-BY component");
  if (i + 3 >= name.size())
    return fail(i + 3, "expected encryption attributes or policy component");
  size_t next = i + 4;
  if (next < name.size() && name[next].isSegment())
    ++next;
  if (next != name.size())
    return fail(next, "unexpected components after CK name");
  return {};
}

inline NamingCheck
checkNamingConvention(const Data& data)
{
  return checkNamingConvention(data.name);
}

/// Rules in file order plus the self-signed trust anchor.
class TrustSchema {
public:
  TrustSchema() = default;

  TrustSchema(std::vector<SchemaRule> rules, Certificate anchor)
    : m_rules(std::move(rules))
    , m_anchor(std::move(anchor))
  {
    if (m_rules.empty())
      throw Error("trust schema needs at least one rule");
    if (!m_anchor.isSelfSigned() || !verifyData(m_anchor.data(), m_anchor.signingPublicKey()))
      throw Error("trust anchor must be self-signed and self-consistent");
    for (const auto& rule : m_rules)
      checkRule(rule);
  }

  const std::vector<SchemaRule>& rules() const { return m_rules; }
  const Certificate& anchor() const { return m_anchor; }

  struct RuleMatch {
    const SchemaRule* rule = nullptr;
    bool anchorStep = false;
  };

  /// First rule (file order) whose dataPattern matches the name AND whose
  /// signer side accepts the KeyLocator. anchorMismatchSeen reports that
  /// some rule matched the data but demanded the anchor while the
  /// KeyLocator named something else.
  std::optional<RuleMatch> findRule(const Name& dataName, const Name& keyLocator,
                                    bool& anchorMismatchSeen) const
  {
    anchorMismatchSeen = false;
    for (const auto& rule : m_rules) {
      NamePattern::Captures captures;
      if (!rule.dataPattern.match(dataName, captures))
        continue;
      if (rule.signerIsAnchor) {
        if (keyLocator == m_anchor.name())
          return RuleMatch{&rule, true};
        anchorMismatchSeen = true;
        continue;
      }
      if (rule.signerPattern.substitute(captures).matches(keyLocator))
        return RuleMatch{&rule, keyLocator == m_anchor.name()};
    }
    return std::nullopt;
  }

private:
  static void checkRule(const SchemaRule& rule)
  {
    if (rule.signerIsAnchor)
      return;
    auto defined = rule.dataPattern.captureNames();
    for (const auto& used : rule.signerPattern.captureNames()) {
      if (std::find(defined.begin(), defined.end(), used) == defined.end())
        throw Error("rule " + rule.id + ": signer pattern references undefined capture <" +
                    used + ">");
    }
  }

  std::vector<SchemaRule> m_rules;
  Certificate m_anchor;
};

/// Parses the line-oriented schema format:
///
///   anchor: <base64 certificate>
///   rule <id>: <dataPattern> => <signerPattern | anchor>
///
/// Blank lines and '#' comments are ignored. Rules keep file order.
inline TrustSchema
loadSchema(std::string_view text)
{
  std::optional<Certificate> anchor;
  std::vector<SchemaRule> rules;

  size_t lineNo = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
      text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineNo;

    auto trim = [](std::string_view s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
      return s;
    };
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;

    auto parseError = [&](const std::string& what) {
      return Error("schema line " + std::to_string(lineNo) + ": " + what);
    };

    if (line.rfind("anchor:", 0) == 0) {
      std::string_view b64 = trim(line.substr(7));
      try {
        anchor = Certificate(decodeDataPacket(base64Decode(b64)));
      }
      catch (const Error& e) {
        throw parseError(std::string("bad anchor certificate: ") + e.what());
      }
      continue;
    }

    if (line.rfind("rule", 0) == 0) {
      std::string_view rest = trim(line.substr(4));
      size_t colon = rest.find(':');
      if (colon == std::string_view::npos)
        throw parseError("expected 'rule <id>: <data> => <signer>'");
      std::string id(trim(rest.substr(0, colon)));
      std::string_view patterns = rest.substr(colon + 1);
      size_t arrow = patterns.find("=>");
      if (arrow == std::string_view::npos)
        throw parseError("expected '=>' between data and signer patterns");
      std::string_view dataPat = trim(patterns.substr(0, arrow));
      std::string_view signerPat = trim(patterns.substr(arrow + 2));
      SchemaRule rule;
      rule.id = id;
      try {
        rule.dataPattern = NamePattern::parse(dataPat);
        if (signerPat == "anchor")
          rule.signerIsAnchor = true;
        else
          rule.signerPattern = NamePattern::parse(signerPat);
      }
      catch (const Error& e) {
        throw parseError(e.what());
      }
      rules.push_back(std::move(rule));
      continue;
    }

    throw parseError("unrecognized directive");
  }

  if (!anchor.has_value())
    throw Error("schema is missing the anchor");
  if (rules.empty())
    throw Error("schema has an empty rule list");
  return TrustSchema(std::move(rules), std::move(*anchor));
}

inline constexpr size_t MaxChainDepth = 8;

/// Asynchronous fetch interface: resolve a certificate name to a Data
/// packet, or null on failure/timeout.
using AsyncFetchFn =
  std::function<void(const Name&, std::function<void(const Data*)>)>;

namespace detail {

// The schema reference must stay valid until the completion callback runs;
// everything else is owned by the walk itself.
inline void
validateStep(Data data, AsyncFetchFn fetch, const TrustSchema& schema, size_t depth,
             std::shared_ptr<std::vector<Name>> chain,
             std::function<void(ValidationResult)> done)
{
  auto finish = [&](ValidationOutcome outcome, std::string detail = "") {
    done(ValidationResult{outcome, *chain, std::move(detail), std::nullopt});
  };

  if (depth > MaxChainDepth) {
    finish(ValidationOutcome::ChainFetchFailed, "signing chain exceeds depth 8");
    return;
  }

  NamingCheck naming = checkNamingConvention(data.name);
  if (!naming.ok) {
    done(ValidationResult{ValidationOutcome::NamingViolation, *chain, naming.what,
                          naming.violationIndex});
    return;
  }

  bool anchorMismatchSeen = false;
  auto match = schema.findRule(data.name, data.keyLocator, anchorMismatchSeen);
  if (!match.has_value()) {
    finish(anchorMismatchSeen ? ValidationOutcome::AnchorMismatch
                              : ValidationOutcome::NoMatchingRule,
           "no rule admits signer " + data.keyLocator.toUri() + " for " +
             data.name.toUri());
    return;
  }

  if (data.keyLocator == schema.anchor().name()) {
    // terminal step: the embedded anchor key is authoritative
    if (!verifyData(data, schema.anchor().signingPublicKey())) {
      finish(ValidationOutcome::InvalidSignature, "anchor signature check failed");
      return;
    }
    chain->push_back(schema.anchor().name());
    finish(ValidationOutcome::Valid);
    return;
  }

  Name locator = data.keyLocator;
  fetch(locator, [data = std::move(data), fetch, &schema, depth, chain,
                  done = std::move(done)](const Data* certData) mutable {
    auto finish = [&](ValidationOutcome outcome, std::string detail = "") {
      done(ValidationResult{outcome, *chain, std::move(detail), std::nullopt});
    };
    if (certData == nullptr) {
      finish(ValidationOutcome::ChainFetchFailed,
             "cannot fetch certificate " + data.keyLocator.toUri());
      return;
    }
    std::optional<Certificate> cert;
    try {
      cert.emplace(*certData);
    }
    catch (const Error& e) {
      finish(ValidationOutcome::ChainFetchFailed,
             std::string("fetched certificate is malformed: ") + e.what());
      return;
    }
    if (!verifyData(data, cert->signingPublicKey())) {
      finish(ValidationOutcome::InvalidSignature,
             "signature check failed against " + cert->name().toUri());
      return;
    }
    chain->push_back(cert->name());
    // recursively validate every certificate along the chain
    validateStep(cert->data(), std::move(fetch), schema, depth + 1, chain,
                 std::move(done));
  });
}

} // namespace detail

inline void
validateAsync(const Data& data, AsyncFetchFn fetch, const TrustSchema& schema,
              std::function<void(ValidationResult)> done)
{
  auto chain = std::make_shared<std::vector<Name>>();
  detail::validateStep(data, std::move(fetch), schema, 0, chain, std::move(done));
}

/// Synchronous validation with a blocking fetch callback (spec operation
/// shape); the async machinery runs to completion inline.
inline ValidationResult
validate(const Data& data, const std::function<std::optional<Data>(const Name&)>& fetch,
         const TrustSchema& schema)
{
  ValidationResult result;
  AsyncFetchFn asyncFetch = [&fetch](const Name& name,
                                     std::function<void(const Data*)> cb) {
    std::optional<Data> d = fetch(name);
    cb(d.has_value() ? &*d : nullptr);
  };
  validateAsync(data, asyncFetch, schema, [&result](ValidationResult r) {
    result = std::move(r);
  });
  return result;
}

} // namespace nacabe
