#pragma once

#include "attribute.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>

namespace nacabe::abe {

enum class CompareOp {
  Lt,
  Gt,
  Le,
  Ge,
  Eq,
};

inline std::string_view
opToken(CompareOp op)
{
  switch (op) {
    case CompareOp::Lt:
      return "<";
    case CompareOp::Gt:
      return ">";
    case CompareOp::Le:
      return "<=";
    case CompareOp::Ge:
      return ">=";
    case CompareOp::Eq:
      return "=";
  }
  return "?";
}

inline bool
opHolds(uint64_t v, CompareOp op, uint64_t x)
{
  switch (op) {
    case CompareOp::Lt:
      return v < x;
    case CompareOp::Gt:
      return v > x;
    case CompareOp::Le:
      return v <= x;
    case CompareOp::Ge:
      return v >= x;
    case CompareOp::Eq:
      return v == x;
  }
  return false;
}

/// Access-policy AST. Compare nodes exist only before normalization; a
/// normalized policy contains only And/Or gates over leaves, or one of the
/// distinguished AlwaysTrue/AlwaysFalse markers.
class PolicyExpr {
public:
  enum class Kind {
    And,
    Or,
    Leaf,
    Compare,
    AlwaysTrue,
    AlwaysFalse,
  };

  PolicyExpr() = default;

  static PolicyExpr leaf(Attribute a)
  {
    PolicyExpr p;
    p.m_kind = Kind::Leaf;
    p.m_attr = std::move(a);
    return p;
  }

  static PolicyExpr andOf(std::vector<PolicyExpr> children)
  {
    return gate(Kind::And, std::move(children));
  }

  static PolicyExpr orOf(std::vector<PolicyExpr> children)
  {
    return gate(Kind::Or, std::move(children));
  }

  static PolicyExpr compare(std::string attrName, CompareOp op, uint32_t value)
  {
    PolicyExpr p;
    p.m_kind = Kind::Compare;
    p.m_attr = Attribute::plain(std::move(attrName));
    p.m_op = op;
    p.m_cmpValue = value;
    return p;
  }

  static PolicyExpr alwaysTrue()
  {
    PolicyExpr p;
    p.m_kind = Kind::AlwaysTrue;
    return p;
  }

  static PolicyExpr alwaysFalse()
  {
    PolicyExpr p;
    p.m_kind = Kind::AlwaysFalse;
    return p;
  }

  Kind kind() const { return m_kind; }
  const std::vector<PolicyExpr>& children() const { return m_children; }
  const Attribute& attribute() const { return m_attr; }
  CompareOp op() const { return m_op; }
  uint32_t compareValue() const { return m_cmpValue; }

  bool isNormalized() const
  {
    switch (m_kind) {
      case Kind::Leaf:
      case Kind::AlwaysTrue:
      case Kind::AlwaysFalse:
        return true;
      case Kind::Compare:
        return false;
      case Kind::And:
      case Kind::Or:
        if (m_children.size() < 2)
          return false;
        return std::all_of(m_children.begin(), m_children.end(), [](const PolicyExpr& c) {
          return c.m_kind != Kind::AlwaysTrue && c.m_kind != Kind::AlwaysFalse &&
                 c.isNormalized();
        });
    }
    return false;
  }

  size_t leafCount() const
  {
    switch (m_kind) {
      case Kind::Leaf:
        return 1;
      case Kind::And:
      case Kind::Or: {
        size_t n = 0;
        for (const auto& c : m_children)
          n += c.leafCount();
        return n;
      }
      default:
        return 0;
    }
  }

  /// Truth value over an attribute set, evaluated directly on this AST.
  bool evaluate(const AttributeSet& attrs, unsigned bitWidth = MaxBitWidth) const;

  /// Expands comparisons into bit-prefix leaves, collapses duplicate
  /// children and single-child gates, and folds the constant markers.
  PolicyExpr normalized(unsigned bitWidth = MaxBitWidth) const;

  friend bool operator==(const PolicyExpr&, const PolicyExpr&) = default;

private:
  static PolicyExpr gate(Kind kind, std::vector<PolicyExpr> children)
  {
    if (children.empty())
      throw PolicyError("logic gate needs at least one operand");
    PolicyExpr p;
    p.m_kind = kind;
    p.m_children = std::move(children);
    return p;
  }

  Kind m_kind = Kind::AlwaysFalse;
  std::vector<PolicyExpr> m_children;
  Attribute m_attr;
  CompareOp m_op = CompareOp::Eq;
  uint32_t m_cmpValue = 0;
};

namespace detail {

inline std::string
bitString(uint32_t value, unsigned bitWidth)
{
  std::string s(bitWidth, '0');
  for (unsigned i = 0; i < bitWidth; ++i) {
    if (value & (uint32_t(1) << (bitWidth - 1 - i)))
      s[i] = '1';
  }
  return s;
}

} // namespace detail

/// Rewrites `attrName op value` over bitWidth-bit integers into a gate over
/// bit-prefix attributes. GT(X) takes an OR over every zero bit of X: data
/// matching X's bits above position i with a one at i is strictly greater.
/// LT is the dual over the one bits. The boundary cases fold to the
/// distinguished constants.
inline PolicyExpr
expandComparison(const std::string& attrName, CompareOp op, uint32_t value,
                 unsigned bitWidth = MaxBitWidth)
{
  if (bitWidth == 0 || bitWidth > MaxBitWidth)
    throw PolicyError("comparison bit width must be in [1, 32]");
  uint64_t max = (uint64_t(1) << bitWidth) - 1;
  if (value > max)
    throw PolicyError("comparison value exceeds bit width");

  switch (op) {
    case CompareOp::Ge:
      if (value == 0)
        return PolicyExpr::alwaysTrue();
      return expandComparison(attrName, CompareOp::Gt, value - 1, bitWidth);
    case CompareOp::Le:
      if (value == max)
        return PolicyExpr::alwaysTrue();
      return expandComparison(attrName, CompareOp::Lt, value + 1, bitWidth);
    case CompareOp::Eq:
      return PolicyExpr::leaf(
        Attribute::bitPrefix(attrName, detail::bitString(value, bitWidth)));
    case CompareOp::Gt:
    case CompareOp::Lt:
      break;
  }

  std::string bits = detail::bitString(value, bitWidth);
  char takeBit = (op == CompareOp::Gt) ? '0' : '1';
  char setTo = (op == CompareOp::Gt) ? '1' : '0';
  std::vector<PolicyExpr> leaves;
  for (unsigned i = 0; i < bitWidth; ++i) {
    if (bits[i] != takeBit)
      continue;
    std::string prefix = bits.substr(0, i);
    prefix.push_back(setTo);
    leaves.push_back(PolicyExpr::leaf(Attribute::bitPrefix(attrName, prefix)));
  }
  if (leaves.empty())
    return PolicyExpr::alwaysFalse(); // GT on the max value, LT on zero
  if (leaves.size() == 1)
    return std::move(leaves.front());
  return PolicyExpr::orOf(std::move(leaves));
}

/// The data-side counterpart: every binary prefix of value, lengths
/// 1..bitWidth.
inline AttributeSet
dataAttributesFor(const std::string& attrName, uint32_t value, unsigned bitWidth = MaxBitWidth)
{
  if (bitWidth == 0 || bitWidth > MaxBitWidth)
    throw PolicyError("comparison bit width must be in [1, 32]");
  if (bitWidth < 32 && value > ((uint64_t(1) << bitWidth) - 1))
    throw PolicyError("value exceeds bit width");
  std::string bits = detail::bitString(value, bitWidth);
  AttributeSet out;
  for (unsigned len = 1; len <= bitWidth; ++len)
    out.insert(Attribute::bitPrefix(attrName, bits.substr(0, len)));
  return out;
}

inline bool
PolicyExpr::evaluate(const AttributeSet& attrs, unsigned bitWidth) const
{
  switch (m_kind) {
    case Kind::AlwaysTrue:
      return true;
    case Kind::AlwaysFalse:
      return false;
    case Kind::Leaf:
      return attrs.contains(m_attr);
    case Kind::Compare:
      return expandComparison(m_attr.str(), m_op, m_cmpValue, bitWidth).evaluate(attrs);
    case Kind::And:
      return std::all_of(m_children.begin(), m_children.end(),
                         [&](const PolicyExpr& c) { return c.evaluate(attrs, bitWidth); });
    case Kind::Or:
      return std::any_of(m_children.begin(), m_children.end(),
                         [&](const PolicyExpr& c) { return c.evaluate(attrs, bitWidth); });
  }
  return false;
}

inline PolicyExpr
PolicyExpr::normalized(unsigned bitWidth) const
{
  switch (m_kind) {
    case Kind::Leaf:
    case Kind::AlwaysTrue:
    case Kind::AlwaysFalse:
      return *this;
    case Kind::Compare:
      return expandComparison(m_attr.str(), m_op, m_cmpValue, bitWidth);
    case Kind::And:
    case Kind::Or:
      break;
  }

  bool isAnd = m_kind == Kind::And;
  std::vector<PolicyExpr> kept;
  for (const auto& child : m_children) {
    PolicyExpr c = child.normalized(bitWidth);
    if (c.kind() == Kind::AlwaysTrue) {
      if (!isAnd)
        return PolicyExpr::alwaysTrue(); // OR short-circuits
      continue;                          // AND drops the neutral child
    }
    if (c.kind() == Kind::AlwaysFalse) {
      if (isAnd)
        return PolicyExpr::alwaysFalse();
      continue;
    }
    if (std::find(kept.begin(), kept.end(), c) == kept.end())
      kept.push_back(std::move(c)); // duplicates collapse
  }
  if (kept.empty())
    return isAnd ? PolicyExpr::alwaysTrue() : PolicyExpr::alwaysFalse();
  if (kept.size() == 1)
    return std::move(kept.front()); // single-child gates collapse
  return gate(m_kind, std::move(kept));
}

namespace detail {

// Tokenizer for the policy grammar:
//   policy := or ; or := and ("OR" and)* ; and := primary ("AND" primary)*
//   primary := STRING | comparison | "(" policy ")"
//   comparison := IDENT OP INT ; OP := ">" | "<" | ">=" | "<=" | "="
struct Token {
  enum class Type {
    String,
    Ident,
    Number,
    Op,
    LParen,
    RParen,
    And,
    Or,
    End,
  };
  Type type;
  std::string text;
  uint64_t number = 0;
  size_t position; // 1-based offset in the source
};

class PolicyLexer {
public:
  explicit PolicyLexer(std::string_view text)
    : m_text(text)
  {
  }

  std::vector<Token> run()
  {
    std::vector<Token> out;
    for (;;) {
      skipSpace();
      size_t pos = m_pos + 1;
      if (m_pos >= m_text.size()) {
        out.push_back({Token::Type::End, "", 0, pos});
        return out;
      }
      char c = m_text[m_pos];
      if (c == '(') {
        ++m_pos;
        out.push_back({Token::Type::LParen, "(", 0, pos});
      }
      else if (c == ')') {
        ++m_pos;
        out.push_back({Token::Type::RParen, ")", 0, pos});
      }
      else if (c == '"') {
        out.push_back(lexString(pos));
      }
      else if (c == '<' || c == '>' || c == '=') {
        std::string op(1, c);
        ++m_pos;
        if ((c == '<' || c == '>') && m_pos < m_text.size() && m_text[m_pos] == '=') {
          op.push_back('=');
          ++m_pos;
        }
        out.push_back({Token::Type::Op, op, 0, pos});
      }
      else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(lexNumberOrDate(pos));
      }
      else if (isIdentChar(c)) {
        size_t start = m_pos;
        while (m_pos < m_text.size() && isIdentChar(m_text[m_pos]))
          ++m_pos;
        std::string word(m_text.substr(start, m_pos - start));
        if (word == "AND")
          out.push_back({Token::Type::And, word, 0, pos});
        else if (word == "OR")
          out.push_back({Token::Type::Or, word, 0, pos});
        else
          out.push_back({Token::Type::Ident, word, 0, pos});
      }
      else {
        throw PolicyError("unexpected character '" + std::string(1, c) + "'", pos);
      }
    }
  }

private:
  static bool isIdentChar(char c)
  {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == '/' || c == ':';
  }

  void skipSpace()
  {
    while (m_pos < m_text.size() &&
           std::isspace(static_cast<unsigned char>(m_text[m_pos])))
      ++m_pos;
  }

  Token lexString(size_t pos)
  {
    ++m_pos; // opening quote
    size_t start = m_pos;
    while (m_pos < m_text.size() && m_text[m_pos] != '"')
      ++m_pos;
    if (m_pos >= m_text.size())
      throw PolicyError("unterminated string", pos);
    std::string value(m_text.substr(start, m_pos - start));
    ++m_pos; // closing quote
    if (value.empty())
      throw PolicyError("empty attribute string", pos);
    return {Token::Type::String, value, 0, pos};
  }

  // INT, or an ISO date (YYYY-MM-DD) converted to a UNIX timestamp at day
  // granularity.
  Token lexNumberOrDate(size_t pos)
  {
    size_t start = m_pos;
    while (m_pos < m_text.size() &&
           (std::isdigit(static_cast<unsigned char>(m_text[m_pos])) ||
            m_text[m_pos] == '-'))
      ++m_pos;
    std::string text(m_text.substr(start, m_pos - start));
    if (text.find('-') != std::string::npos) {
      unsigned y = 0, m = 0, d = 0;
      if (std::sscanf(text.c_str(), "%u-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 ||
          d < 1 || d > 31)
        throw PolicyError("malformed date literal", pos);
      // days-since-epoch arithmetic, independent of local timezone
      int64_t days = daysFromCivil(static_cast<int>(y), static_cast<int>(m),
                                   static_cast<int>(d));
      int64_t ts = days * 86400;
      if (ts < 0 || ts > 0xFFFFFFFFll)
        throw PolicyError("date out of 32-bit timestamp range", pos);
      return {Token::Type::Number, text, static_cast<uint64_t>(ts), pos};
    }
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
      throw PolicyError("malformed integer", pos);
    if (v > 0xFFFFFFFFull)
      throw PolicyError("integer out of 32-bit range", pos);
    return {Token::Type::Number, text, v, pos};
  }

  // Howard Hinnant's civil-days algorithm.
  static int64_t daysFromCivil(int y, int m, int d)
  {
    y -= m <= 2;
    int era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<int64_t>(era) * 146097 + static_cast<int64_t>(doe) - 719468;
  }

  std::string_view m_text;
  size_t m_pos = 0;
};

class PolicyParser {
public:
  explicit PolicyParser(std::vector<Token> tokens)
    : m_tokens(std::move(tokens))
  {
  }

  PolicyExpr run()
  {
    PolicyExpr p = parseOr();
    expect(Token::Type::End, "expected end of policy");
    return p;
  }

private:
  const Token& peek() const { return m_tokens[m_idx]; }
  const Token& next() { return m_tokens[m_idx++]; }

  void expect(Token::Type t, const char* message)
  {
    if (peek().type != t)
      throw PolicyError(message, peek().position);
  }

  PolicyExpr parseOr()
  {
    std::vector<PolicyExpr> terms;
    terms.push_back(parseAnd());
    while (peek().type == Token::Type::Or) {
      next();
      terms.push_back(parseAnd());
    }
    if (terms.size() == 1)
      return std::move(terms.front());
    return PolicyExpr::orOf(std::move(terms));
  }

  PolicyExpr parseAnd()
  {
    std::vector<PolicyExpr> terms;
    terms.push_back(parsePrimary());
    while (peek().type == Token::Type::And) {
      next();
      terms.push_back(parsePrimary());
    }
    if (terms.size() == 1)
      return std::move(terms.front());
    return PolicyExpr::andOf(std::move(terms));
  }

  PolicyExpr parsePrimary()
  {
    const Token& t = peek();
    switch (t.type) {
      case Token::Type::String:
        next();
        // a quoted name may also open a comparison ("start_date" > N)
        if (peek().type == Token::Type::Op)
          return parseComparisonTail(t);
        return PolicyExpr::leaf(Attribute::fromString(t.text));
      case Token::Type::LParen: {
        next();
        PolicyExpr inner = parseOr();
        expect(Token::Type::RParen, "expected ')'");
        next();
        return inner;
      }
      case Token::Type::Ident:
        return parseComparison();
      default:
        throw PolicyError("expected attribute, comparison or '('", t.position);
    }
  }

  PolicyExpr parseComparison()
  {
    const Token& ident = next();
    return parseComparisonTail(ident);
  }

  PolicyExpr parseComparisonTail(const Token& ident)
  {
    const Token& op = peek();
    if (op.type != Token::Type::Op)
      throw PolicyError("expected comparison operator", op.position);
    next();
    const Token& num = peek();
    if (num.type != Token::Type::Number)
      throw PolicyError("expected integer", num.position);
    next();
    CompareOp cop;
    if (op.text == "<")
      cop = CompareOp::Lt;
    else if (op.text == ">")
      cop = CompareOp::Gt;
    else if (op.text == "<=")
      cop = CompareOp::Le;
    else if (op.text == ">=")
      cop = CompareOp::Ge;
    else if (op.text == "=")
      cop = CompareOp::Eq;
    else
      throw PolicyError("unknown operator '" + op.text + "'", op.position);
    return PolicyExpr::compare(ident.text, cop, static_cast<uint32_t>(num.number));
  }

  std::vector<Token> m_tokens;
  size_t m_idx = 0;
};

} // namespace detail

inline PolicyExpr
parsePolicy(std::string_view text)
{
  detail::PolicyLexer lexer(text);
  detail::PolicyParser parser(lexer.run());
  return parser.run();
}

/// Canonical policy serialization for embedding in names: the source
/// tokens re-joined with single spaces.
inline std::string
canonicalPolicyText(std::string_view text)
{
  auto tokens = detail::PolicyLexer(text).run();
  // reject unparsable text up front so names never carry garbage
  detail::PolicyParser(tokens).run();
  std::string out;
  for (const auto& t : tokens) {
    if (t.type == detail::Token::Type::End)
      break;
    if (!out.empty())
      out.push_back(' ');
    if (t.type == detail::Token::Type::String)
      out += "\"" + t.text + "\"";
    else
      out += t.text;
  }
  return out;
}

} // namespace nacabe::abe
