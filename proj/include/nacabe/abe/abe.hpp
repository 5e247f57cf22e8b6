#pragma once

#include "../core/crypto.hpp"
#include "../core/tlv.hpp"
#include "access_tree.hpp"
#include "field.hpp"

#include <map>

namespace nacabe::abe {

enum class AbeType : uint8_t {
  Cp = 0,
  Kp = 1,
};

inline std::string_view
abeTypeToken(AbeType t)
{
  return t == AbeType::Kp ? "KP" : "CP";
}

inline std::optional<AbeType>
abeTypeFromToken(std::string_view s)
{
  if (s == "KP" || s == "kp")
    return AbeType::Kp;
  if (s == "CP" || s == "cp")
    return AbeType::Cp;
  return std::nullopt;
}

using ParamsId = std::array<uint8_t, 16>;

/// The reserved params entry that exposes the master secret. This is the
/// documented security sacrifice of the arithmetic emulation: encryptors
/// need y*s, and the emulation publishes y instead of hiding it behind a
/// pairing. A real ABE provider would never ship this entry.
inline const Attribute&
masterAttribute()
{
  static const Attribute a = Attribute::plain("__master__");
  return a;
}

// Every element in a serialized object occupies a fixed 256-byte block
// (value big-endian in the first 8 bytes). This keeps key and ciphertext
// sizes in the range of deployed pairing-based backends, so segmentation
// behaves realistically even though the emulation's field elements are
// 8 bytes.
inline constexpr size_t ElementBlockLen = 256;

namespace wire {

inline constexpr uint32_t AbeTypeField = 0x01;
inline constexpr uint32_t ParamsIdField = 0x02;
inline constexpr uint32_t VersionField = 0x03;
inline constexpr uint32_t AttrEntry = 0x04;
inline constexpr uint32_t AttrName = 0x05;
inline constexpr uint32_t Element = 0x06;
inline constexpr uint32_t Tree = 0x07;

inline constexpr uint32_t AeadNonce = 0x09;
inline constexpr uint32_t SealedPayload = 0x0A;
inline constexpr uint32_t ConstantElement = 0x0B;
inline constexpr uint32_t GateNode = 0x10;
inline constexpr uint32_t LeafNode = 0x11;

inline Bytes
encodeElementBlock(Fe v)
{
  Bytes out(ElementBlockLen, 0);
  auto be = v.toBytesBE();
  std::copy(be.begin(), be.end(), out.begin());
  return out;
}

inline Fe
decodeElementBlock(BytesView b)
{
  if (b.size() != ElementBlockLen)
    throw DecodeError("bad element block length");
  return Fe::fromBytesBE(b.subspan(0, 8));
}

inline void
encodeTreeNode(tlv::Writer& w, const AccessTreeNode& n, const std::vector<Fe>& leafValues,
               size_t& cursor)
{
  if (n.isLeaf()) {
    size_t mark = w.open(LeafNode);
    w.block(AttrName, toBytes(n.attr->str()));
    w.block(Element, encodeElementBlock(leafValues.at(cursor++)));
    w.close(mark);
    return;
  }
  tlv::Writer head;
  head.varNum(n.threshold);
  head.varNum(n.children.size());
  w.block(GateNode, head.buffer());
  for (const auto& c : n.children)
    encodeTreeNode(w, c, leafValues, cursor);
}

/// Trees are encoded as a pre-order node list with the per-leaf element
/// embedded in each leaf node, so every leaf contributes the same number
/// of bytes. A leaf-only tree is wrapped in a synthetic 1-of-1 gate so
/// every encoding starts with a gate node of constant size; the decoder
/// strips the wrapper (normalized trees contain no genuine single-child
/// gates). The always-true tree is the lone 0-of-0 gate.
inline Bytes
encodeTree(const AccessTree& t, const std::vector<Fe>& leafValues)
{
  tlv::Writer w;
  if (t.alwaysTrue()) {
    tlv::Writer head;
    head.varNum(0);
    head.varNum(0);
    w.block(GateNode, head.buffer());
    return w.take();
  }
  if (t.root().isLeaf()) {
    tlv::Writer head;
    head.varNum(1);
    head.varNum(1);
    w.block(GateNode, head.buffer());
  }
  size_t cursor = 0;
  encodeTreeNode(w, t.root(), leafValues, cursor);
  if (cursor != leafValues.size())
    throw EncodeError("leaf value count does not match tree");
  return w.take();
}

inline AccessTreeNode
decodeTreeNode(tlv::Reader& r, std::vector<Fe>& leafValues)
{
  auto e = r.readElement();
  if (e.type == LeafNode) {
    tlv::Reader body(e.value);
    AccessTreeNode n;
    n.attr = Attribute::fromString(toString(body.expect(AttrName)));
    leafValues.push_back(decodeElementBlock(body.expect(Element)));
    body.requireEnd("leaf node");
    return n;
  }
  if (e.type != GateNode)
    throw DecodeError("bad tree node type");
  tlv::Reader head(e.value);
  uint64_t threshold = head.readVarNum();
  uint64_t count = head.readVarNum();
  head.requireEnd("gate node");
  if (threshold == 0 || count == 0 || threshold > count)
    throw DecodeError("bad gate threshold");
  AccessTreeNode n;
  n.threshold = static_cast<uint32_t>(threshold);
  for (uint64_t i = 0; i < count; ++i)
    n.children.push_back(decodeTreeNode(r, leafValues));
  return n;
}

inline std::pair<AccessTree, std::vector<Fe>>
decodeTree(BytesView b)
{
  tlv::Reader r(b);
  auto first = r.readElement();
  if (first.type != GateNode)
    throw DecodeError("tree must start with a gate node");
  tlv::Reader head(first.value);
  uint64_t threshold = head.readVarNum();
  uint64_t count = head.readVarNum();
  std::vector<Fe> leafValues;
  if (threshold == 0 && count == 0) {
    r.requireEnd("tree");
    return {AccessTree::alwaysTrueTree(), std::move(leafValues)};
  }
  if (threshold == 1 && count == 1) {
    // synthetic wrapper around a leaf-only tree
    AccessTreeNode leaf = decodeTreeNode(r, leafValues);
    r.requireEnd("tree");
    if (!leaf.isLeaf())
      throw DecodeError("wrapper gate must hold a leaf");
    return {AccessTree::fromRoot(std::move(leaf)), std::move(leafValues)};
  }
  AccessTreeNode root;
  root.threshold = static_cast<uint32_t>(threshold);
  for (uint64_t i = 0; i < count; ++i)
    root.children.push_back(decodeTreeNode(r, leafValues));
  r.requireEnd("tree");
  return {AccessTree::fromRoot(std::move(root)), std::move(leafValues)};
}

inline void
encodeAttrMap(tlv::Writer& w, const std::map<Attribute, Fe>& m)
{
  for (const auto& [attr, v] : m) {
    size_t entry = w.open(AttrEntry);
    w.block(AttrName, toBytes(attr.str()));
    w.block(Element, encodeElementBlock(v));
    w.close(entry);
  }
}

inline std::map<Attribute, Fe>
decodeAttrMap(tlv::Reader& r)
{
  std::map<Attribute, Fe> m;
  while (!r.atEnd() && r.peekType() == AttrEntry) {
    tlv::Reader e(r.expect(AttrEntry));
    Attribute a = Attribute::fromString(toString(e.expect(AttrName)));
    Fe v = decodeElementBlock(e.expect(Element));
    e.requireEnd("attribute entry");
    m.emplace(std::move(a), v);
  }
  return m;
}

} // namespace wire

namespace detail {

/// Authority-side state shared between the master key and its live public
/// params: per-attribute secrets grow lazily, and in this emulation the
/// public values equal the secrets.
struct AttrTable {
  Fe y;
  ParamsId id{};
  std::map<Attribute, Fe> t;
  uint64_t publishedVersion = 0;
  bool grownSincePublish = true;

  Fe ensure(const Attribute& a, Rng& rng)
  {
    auto it = t.find(a);
    if (it != t.end())
      return it->second;
    Fe v = Fe::randomNonzero(rng);
    t.emplace(a, v);
    grownSincePublish = true;
    return v;
  }
};

inline void
dealShares(const AccessTreeNode& n, Fe share, Rng& rng, std::vector<Fe>& out)
{
  if (n.isLeaf()) {
    out.push_back(share);
    return;
  }
  // polynomial of degree threshold-1 through (0, share)
  std::vector<Fe> coeffs(n.threshold);
  coeffs[0] = share;
  for (size_t i = 1; i < coeffs.size(); ++i)
    coeffs[i] = Fe::random(rng);
  uint64_t childIndex = 0;
  for (const auto& c : n.children) {
    ++childIndex;
    dealShares(c, evalPolynomial(coeffs, Fe(childIndex)), rng, out);
  }
}

/// Bottom-up reconstruction: leafValue yields q_x(0)*secret at satisfied
/// leaves; interior nodes Lagrange-interpolate at zero over the
/// lowest-index satisfying children.
template<typename LeafValueFn>
std::optional<Fe>
solveNode(const AccessTreeNode& n, size_t& leafCursor, const LeafValueFn& leafValue)
{
  if (n.isLeaf()) {
    size_t index = leafCursor++;
    return leafValue(index, *n.attr);
  }
  std::vector<std::pair<uint64_t, Fe>> satisfied;
  uint64_t childIndex = 0;
  for (const auto& c : n.children) {
    ++childIndex;
    auto v = solveNode(c, leafCursor, leafValue); // cursor walks every leaf
    if (v.has_value())
      satisfied.emplace_back(childIndex, *v);
  }
  if (satisfied.size() < n.threshold)
    return std::nullopt;
  satisfied.resize(n.threshold);
  std::vector<uint64_t> xs;
  xs.reserve(satisfied.size());
  for (const auto& [x, v] : satisfied)
    xs.push_back(x);
  Fe acc;
  for (const auto& [x, v] : satisfied)
    acc = acc + v * lagrangeAtZero(x, xs);
  return acc;
}

inline Bytes
kdf(const ParamsId& id, Fe ys)
{
  Bytes input(id.begin(), id.end());
  auto be = ys.toBytesBE();
  input.insert(input.end(), be.begin(), be.end());
  return crypto::sha256(input);
}

} // namespace detail

class MasterKey;

/// Public side of the ABE system. The instance returned by setup() stays
/// live: it shares the authority's attribute table and mints entries on
/// first use. Deserialized instances are frozen snapshots; encrypting with
/// an attribute missing from a snapshot fails with "unknown attribute".
class PublicParams {
public:
  PublicParams() = default;

  AbeType abeType() const { return m_type; }
  const ParamsId& paramsId() const { return m_id; }

  uint64_t version() const
  {
    return m_live != nullptr ? m_live->publishedVersion : m_version;
  }

  bool isLive() const { return m_live != nullptr; }

  /// Assigns the version a publish operation should carry: bumps only when
  /// the attribute universe grew since the previous publish.
  uint64_t bumpVersionForPublish()
  {
    if (m_live == nullptr)
      throw AbeError("cannot publish a params snapshot");
    if (m_live->grownSincePublish) {
      ++m_live->publishedVersion;
      m_live->grownSincePublish = false;
    }
    if (m_live->publishedVersion == 0)
      m_live->publishedVersion = 1;
    return m_live->publishedVersion;
  }

  std::optional<Fe> lookup(const Attribute& a) const
  {
    if (m_live != nullptr) {
      auto it = m_live->t.find(a);
      if (it == m_live->t.end())
        return std::nullopt;
      return it->second;
    }
    auto it = m_attrPublic.find(a);
    if (it == m_attrPublic.end())
      return std::nullopt;
    return it->second;
  }

  Fe lookupOrMint(const Attribute& a, Rng& rng)
  {
    if (m_live != nullptr)
      return m_live->ensure(a, rng);
    auto v = lookup(a);
    if (!v.has_value())
      throw AbeError("unknown attribute \"" + a.str() + "\" under these params");
    return *v;
  }

  Fe master() const
  {
    if (m_live != nullptr)
      return m_live->y;
    auto v = lookup(masterAttribute());
    if (!v.has_value())
      throw AbeError("params carry no master entry");
    return *v;
  }

  /// Full public map including the reserved master entry.
  std::map<Attribute, Fe> attrPublic() const
  {
    if (m_live == nullptr)
      return m_attrPublic;
    std::map<Attribute, Fe> m = m_live->t;
    m[masterAttribute()] = m_live->y;
    return m;
  }

  Bytes serialize() const
  {
    tlv::Writer w;
    size_t mark = w.open(tlv::AbePublicParams);
    w.block(wire::AbeTypeField, Bytes{static_cast<uint8_t>(m_type)});
    w.block(wire::ParamsIdField, BytesView(m_id.data(), m_id.size()));
    w.blockNni(wire::VersionField, version());
    wire::encodeAttrMap(w, attrPublic());
    w.close(mark);
    return w.take();
  }

  static PublicParams deserialize(BytesView b)
  {
    tlv::Reader outer(b);
    tlv::Reader r(outer.expect(tlv::AbePublicParams));
    outer.requireEnd("PublicParams");
    PublicParams p;
    BytesView type = r.expect(wire::AbeTypeField);
    if (type.size() != 1 || type[0] > 1)
      throw DecodeError("bad abe type");
    p.m_type = static_cast<AbeType>(type[0]);
    BytesView id = r.expect(wire::ParamsIdField);
    if (id.size() != p.m_id.size())
      throw DecodeError("bad params id length");
    std::copy(id.begin(), id.end(), p.m_id.begin());
    p.m_version = tlv::decodeNni(r.expect(wire::VersionField));
    p.m_attrPublic = wire::decodeAttrMap(r);
    r.requireEnd("PublicParams");
    return p;
  }

  friend bool operator==(const PublicParams& a, const PublicParams& b)
  {
    return a.m_type == b.m_type && a.paramsId() == b.paramsId() &&
           a.version() == b.version() && a.attrPublic() == b.attrPublic();
  }

private:
  friend std::pair<PublicParams, MasterKey> setup(AbeType, Rng&);

  AbeType m_type = AbeType::Cp;
  ParamsId m_id{};
  uint64_t m_version = 0;
  std::map<Attribute, Fe> m_attrPublic;
  std::shared_ptr<detail::AttrTable> m_live;
};

/// Held only by the Attribute Authority; never serialized.
class MasterKey {
public:
  MasterKey() = default;

  Fe y() const { return m_tab->y; }

  Fe ensureAttribute(const Attribute& a, Rng& rng) { return m_tab->ensure(a, rng); }

  std::optional<Fe> attrSecret(const Attribute& a) const
  {
    auto it = m_tab->t.find(a);
    if (it == m_tab->t.end())
      return std::nullopt;
    return it->second;
  }

  const ParamsId& paramsId() const { return m_tab->id; }

private:
  friend std::pair<PublicParams, MasterKey> setup(AbeType, Rng&);

  std::shared_ptr<detail::AttrTable> m_tab;
};

inline std::pair<PublicParams, MasterKey>
setup(AbeType type, Rng& rng)
{
  auto tab = std::make_shared<detail::AttrTable>();
  tab->y = Fe::randomNonzero(rng);
  tab->id = rng.array<16>();
  PublicParams params;
  params.m_type = type;
  params.m_id = tab->id;
  params.m_live = tab;
  MasterKey master;
  master.m_tab = std::move(tab);
  return {std::move(params), std::move(master)};
}

/// Decryption key. KP keys embed an access tree with per-leaf values
/// d_x = q_x(0) * t_x^-1; CP keys carry k_x = y * t_x^-1 per attribute.
struct AbeKey {
  AbeType abeType = AbeType::Cp;
  ParamsId paramsId{};
  // KP side
  AccessTree tree;
  std::vector<Fe> leafValues;
  std::optional<Fe> rootValue; // always-true policy: y itself
  // CP side
  std::map<Attribute, Fe> attrValues;

  friend bool operator==(const AbeKey&, const AbeKey&) = default;

  Bytes serialize() const
  {
    tlv::Writer w;
    size_t mark = w.open(tlv::AbeKey);
    w.block(wire::AbeTypeField, Bytes{static_cast<uint8_t>(abeType)});
    w.block(wire::ParamsIdField, BytesView(paramsId.data(), paramsId.size()));
    if (abeType == AbeType::Kp) {
      w.block(wire::Tree, wire::encodeTree(tree, leafValues));
      if (rootValue.has_value())
        w.block(wire::ConstantElement, wire::encodeElementBlock(*rootValue));
    }
    else {
      wire::encodeAttrMap(w, attrValues);
    }
    w.close(mark);
    return w.take();
  }

  static AbeKey deserialize(BytesView b)
  {
    tlv::Reader outer(b);
    tlv::Reader r(outer.expect(tlv::AbeKey));
    outer.requireEnd("AbeKey");
    AbeKey k;
    BytesView type = r.expect(wire::AbeTypeField);
    if (type.size() != 1 || type[0] > 1)
      throw DecodeError("bad abe type");
    k.abeType = static_cast<AbeType>(type[0]);
    BytesView id = r.expect(wire::ParamsIdField);
    if (id.size() != k.paramsId.size())
      throw DecodeError("bad params id length");
    std::copy(id.begin(), id.end(), k.paramsId.begin());
    if (k.abeType == AbeType::Kp) {
      std::tie(k.tree, k.leafValues) = wire::decodeTree(r.expect(wire::Tree));
      if (!r.atEnd() && r.peekType() == wire::ConstantElement)
        k.rootValue = wire::decodeElementBlock(r.expect(wire::ConstantElement));
      if (k.tree.alwaysTrue() != k.rootValue.has_value())
        throw DecodeError("constant element does not match tree");
    }
    else {
      k.attrValues = wire::decodeAttrMap(r);
    }
    r.requireEnd("AbeKey");
    return k;
  }
};

/// Ciphertext. The payload hides under KDF(y*s); the per-attribute or
/// per-leaf elements let a matching key reconstruct y*s.
struct AbeCiphertext {
  AbeType abeType = AbeType::Cp;
  ParamsId paramsId{};
  std::array<uint8_t, crypto::AeadNonceLen> nonce{};
  Bytes sealed; // AES-256-GCM ciphertext with tag
  // KP side: c_x = t_x * s per data attribute
  std::map<Attribute, Fe> attrValues;
  // CP side: the policy tree with c_x = q_x(0) * t_x per leaf
  AccessTree tree;
  std::vector<Fe> leafValues;
  std::optional<Fe> rootValue; // always-true policy: s itself

  friend bool operator==(const AbeCiphertext&, const AbeCiphertext&) = default;

  Bytes serialize() const
  {
    tlv::Writer w;
    size_t mark = w.open(tlv::AbeCiphertext);
    w.block(wire::AbeTypeField, Bytes{static_cast<uint8_t>(abeType)});
    w.block(wire::ParamsIdField, BytesView(paramsId.data(), paramsId.size()));
    w.block(wire::AeadNonce, BytesView(nonce.data(), nonce.size()));
    w.block(wire::SealedPayload, sealed);
    if (abeType == AbeType::Kp) {
      wire::encodeAttrMap(w, attrValues);
    }
    else {
      w.block(wire::Tree, wire::encodeTree(tree, leafValues));
      if (rootValue.has_value())
        w.block(wire::ConstantElement, wire::encodeElementBlock(*rootValue));
    }
    w.close(mark);
    return w.take();
  }

  static AbeCiphertext deserialize(BytesView b)
  {
    tlv::Reader outer(b);
    tlv::Reader r(outer.expect(tlv::AbeCiphertext));
    outer.requireEnd("AbeCiphertext");
    AbeCiphertext ct;
    BytesView type = r.expect(wire::AbeTypeField);
    if (type.size() != 1 || type[0] > 1)
      throw DecodeError("bad abe type");
    ct.abeType = static_cast<AbeType>(type[0]);
    BytesView id = r.expect(wire::ParamsIdField);
    if (id.size() != ct.paramsId.size())
      throw DecodeError("bad params id length");
    std::copy(id.begin(), id.end(), ct.paramsId.begin());
    BytesView nonce = r.expect(wire::AeadNonce);
    if (nonce.size() != ct.nonce.size())
      throw DecodeError("bad nonce length");
    std::copy(nonce.begin(), nonce.end(), ct.nonce.begin());
    BytesView sealed = r.expect(wire::SealedPayload);
    ct.sealed.assign(sealed.begin(), sealed.end());
    if (ct.abeType == AbeType::Kp) {
      ct.attrValues = wire::decodeAttrMap(r);
    }
    else {
      std::tie(ct.tree, ct.leafValues) = wire::decodeTree(r.expect(wire::Tree));
      if (!r.atEnd() && r.peekType() == wire::ConstantElement)
        ct.rootValue = wire::decodeElementBlock(r.expect(wire::ConstantElement));
      if (ct.tree.alwaysTrue() != ct.rootValue.has_value())
        throw DecodeError("constant element does not match tree");
    }
    r.requireEnd("AbeCiphertext");
    return ct;
  }
};

/// KP key generation: the root polynomial passes through (0, y); each leaf
/// x stores q_x(0) * t_x^-1.
inline AbeKey
kpKeygen(MasterKey& master, const PolicyExpr& policy, Rng& rng)
{
  PolicyExpr norm = policy.normalized();
  AbeKey key;
  key.abeType = AbeType::Kp;
  key.paramsId = master.paramsId();
  key.tree = buildAccessTree(norm); // rejects always-false policies
  if (key.tree.alwaysTrue()) {
    key.rootValue = master.y();
    return key;
  }
  std::vector<Fe> shares;
  detail::dealShares(key.tree.root(), master.y(), rng, shares);
  size_t i = 0;
  key.tree.forEachLeaf([&](size_t, const Attribute& a) {
    Fe t = master.ensureAttribute(a, rng);
    key.leafValues.push_back(shares[i++] * t.inverse());
  });
  return key;
}

/// CP key generation: k_x = y * t_x^-1 for each of the consumer's
/// attributes.
inline AbeKey
cpKeygen(MasterKey& master, const AttributeSet& attrs, Rng& rng)
{
  if (attrs.empty())
    throw AbeError("cannot generate a key for an empty attribute set");
  AbeKey key;
  key.abeType = AbeType::Cp;
  key.paramsId = master.paramsId();
  for (const auto& a : attrs) {
    Fe t = master.ensureAttribute(a, rng);
    key.attrValues.emplace(a, master.y() * t.inverse());
  }
  return key;
}

/// KP encryption: fresh s, c_x = t_x * s per data attribute, payload under
/// KDF(y*s). y is read from the params' reserved master entry.
inline AbeCiphertext
kpEncrypt(PublicParams& params, const AttributeSet& attrs, BytesView plaintext, Rng& rng)
{
  if (params.abeType() != AbeType::Kp)
    throw AbeError("params mismatch: expected KP params");
  if (attrs.empty())
    throw AbeError("cannot encrypt under an empty attribute set");
  AbeCiphertext ct;
  ct.abeType = AbeType::Kp;
  ct.paramsId = params.paramsId();
  Fe s = Fe::randomNonzero(rng);
  for (const auto& a : attrs) {
    Fe t = params.lookupOrMint(a, rng);
    ct.attrValues.emplace(a, t * s);
  }
  ct.nonce = rng.array<crypto::AeadNonceLen>();
  Bytes key = detail::kdf(params.paramsId(), params.master() * s);
  ct.sealed = crypto::aeadSeal(key, BytesView(ct.nonce.data(), ct.nonce.size()), plaintext);
  return ct;
}

/// CP encryption: fresh s shared along the policy tree, c_x = q_x(0) * t_x
/// per leaf, payload under KDF(y*s).
inline AbeCiphertext
cpEncrypt(PublicParams& params, const PolicyExpr& policy, BytesView plaintext, Rng& rng)
{
  if (params.abeType() != AbeType::Cp)
    throw AbeError("params mismatch: expected CP params");
  PolicyExpr norm = policy.normalized();
  AbeCiphertext ct;
  ct.abeType = AbeType::Cp;
  ct.paramsId = params.paramsId();
  ct.tree = buildAccessTree(norm);
  Fe s = Fe::randomNonzero(rng);
  if (ct.tree.alwaysTrue()) {
    ct.rootValue = s;
  }
  else {
    std::vector<Fe> shares;
    detail::dealShares(ct.tree.root(), s, rng, shares);
    size_t i = 0;
    ct.tree.forEachLeaf([&](size_t, const Attribute& a) {
      Fe t = params.lookupOrMint(a, rng);
      ct.leafValues.push_back(shares[i++] * t);
    });
  }
  ct.nonce = rng.array<crypto::AeadNonceLen>();
  Bytes key = detail::kdf(params.paramsId(), params.master() * s);
  ct.sealed = crypto::aeadSeal(key, BytesView(ct.nonce.data(), ct.nonce.size()), plaintext);
  return ct;
}

namespace detail {

// Recovers s from any KP ciphertext attribute (t_x is public in the
// emulation). Used only for always-true keys, which have no leaves to
// interpolate through.
inline Fe
recoverS(const PublicParams& params, const AbeCiphertext& ct)
{
  for (const auto& [attr, c] : ct.attrValues) {
    if (auto t = params.lookup(attr))
      return c * t->inverse();
  }
  throw AbeError("unknown attribute: cannot recover the encryption secret");
}

// Recovers y from any CP key attribute, for always-true ciphertexts.
inline Fe
recoverY(const PublicParams& params, const AbeKey& key)
{
  for (const auto& [attr, k] : key.attrValues) {
    if (auto t = params.lookup(attr))
      return k * *t;
  }
  throw AbeError("unknown attribute: cannot recover the master point");
}

} // namespace detail

/// Decryption for both modes: reconstruct y*s along the satisfied tree,
/// then unblind and authenticate the payload.
inline Bytes
abeDecrypt(const PublicParams& params, const AbeKey& key, const AbeCiphertext& ct)
{
  if (key.paramsId != ct.paramsId || key.abeType != ct.abeType ||
      key.paramsId != params.paramsId() || key.abeType != params.abeType())
    throw AbeError("params mismatch");

  Fe ys;
  if (key.abeType == AbeType::Kp) {
    if (key.rootValue.has_value()) {
      ys = *key.rootValue * detail::recoverS(params, ct);
    }
    else {
      size_t cursor = 0;
      auto solved = detail::solveNode(
        key.tree.root(), cursor, [&](size_t index, const Attribute& a) -> std::optional<Fe> {
          auto it = ct.attrValues.find(a);
          if (it == ct.attrValues.end())
            return std::nullopt;
          // d_x * c_x = q_x(0) * s
          return key.leafValues[index] * it->second;
        });
      if (!solved.has_value())
        throw AbeError("policy not satisfied");
      ys = *solved;
    }
  }
  else {
    if (ct.rootValue.has_value()) {
      ys = *ct.rootValue * detail::recoverY(params, key);
    }
    else {
      size_t cursor = 0;
      auto solved = detail::solveNode(
        ct.tree.root(), cursor, [&](size_t index, const Attribute& a) -> std::optional<Fe> {
          auto it = key.attrValues.find(a);
          if (it == key.attrValues.end())
            return std::nullopt;
          // k_x * c_x = y * q_x(0)
          return it->second * ct.leafValues[index];
        });
      if (!solved.has_value())
        throw AbeError("policy not satisfied");
      ys = *solved;
    }
  }

  Bytes aeadKey = detail::kdf(params.paramsId(), ys);
  auto plain = crypto::aeadOpen(aeadKey, BytesView(ct.nonce.data(), ct.nonce.size()),
                                ct.sealed);
  if (!plain.has_value())
    throw AbeError("authentication failed");
  return std::move(*plain);
}

// Spec-named serialization entry points.
inline Bytes
serializeKey(const AbeKey& k)
{
  return k.serialize();
}
inline AbeKey
deserializeKey(BytesView b)
{
  return AbeKey::deserialize(b);
}
inline Bytes
serializeCiphertext(const AbeCiphertext& ct)
{
  return ct.serialize();
}
inline AbeCiphertext
deserializeCiphertext(BytesView b)
{
  return AbeCiphertext::deserialize(b);
}
inline Bytes
serializeParams(const PublicParams& p)
{
  return p.serialize();
}
inline PublicParams
deserializeParams(BytesView b)
{
  return PublicParams::deserialize(b);
}

} // namespace nacabe::abe
