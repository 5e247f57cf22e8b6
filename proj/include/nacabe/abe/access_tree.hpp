#pragma once

#include "policy.hpp"

#include <functional>

namespace nacabe::abe {

/// Threshold-gate tree node. Internal nodes require threshold-of-children;
/// leaves carry an attribute. Children are addressed 1-based when shares
/// are dealt and recombined.
struct AccessTreeNode {
  uint32_t threshold = 0;
  std::vector<AccessTreeNode> children;
  std::optional<Attribute> attr;

  bool isLeaf() const { return attr.has_value(); }

  friend bool operator==(const AccessTreeNode&, const AccessTreeNode&) = default;
};

/// Compiled form of a normalized policy: AND becomes an n-of-n gate, OR a
/// 1-of-n gate. The distinguished always-true policy compiles to an empty
/// tree with the flag set; always-false policies are rejected.
class AccessTree {
public:
  AccessTree() = default;

  static AccessTree fromPolicy(const PolicyExpr& policy)
  {
    AccessTree t;
    if (policy.kind() == PolicyExpr::Kind::AlwaysTrue) {
      t.m_alwaysTrue = true;
      return t;
    }
    if (policy.kind() == PolicyExpr::Kind::AlwaysFalse)
      throw AbeError("policy is unsatisfiable");
    t.m_root = build(policy);
    return t;
  }

  static AccessTree alwaysTrueTree()
  {
    AccessTree t;
    t.m_alwaysTrue = true;
    return t;
  }

  static AccessTree fromRoot(AccessTreeNode root)
  {
    AccessTree t;
    t.m_root = std::move(root);
    return t;
  }

  bool alwaysTrue() const { return m_alwaysTrue; }
  const AccessTreeNode& root() const { return m_root; }

  size_t leafCount() const { return m_alwaysTrue ? 0 : countLeaves(m_root); }

  bool satisfies(const AttributeSet& attrs) const
  {
    if (m_alwaysTrue)
      return true;
    return satisfied(m_root, attrs);
  }

  /// Pre-order visit of the leaves; the index order matches the share
  /// vectors stored in keys and ciphertexts.
  void forEachLeaf(const std::function<void(size_t, const Attribute&)>& fn) const
  {
    if (m_alwaysTrue)
      return;
    size_t index = 0;
    visitLeaves(m_root, index, fn);
  }

  friend bool operator==(const AccessTree&, const AccessTree&) = default;

private:
  static AccessTreeNode build(const PolicyExpr& p)
  {
    switch (p.kind()) {
      case PolicyExpr::Kind::Leaf: {
        AccessTreeNode n;
        n.attr = p.attribute();
        return n;
      }
      case PolicyExpr::Kind::And:
      case PolicyExpr::Kind::Or: {
        AccessTreeNode n;
        n.threshold = p.kind() == PolicyExpr::Kind::And
                        ? static_cast<uint32_t>(p.children().size())
                        : 1;
        for (const auto& c : p.children())
          n.children.push_back(build(c));
        return n;
      }
      case PolicyExpr::Kind::Compare:
        throw AbeError("cannot compile an unnormalized policy (Compare node)");
      default:
        throw AbeError("cannot compile a constant policy node");
    }
  }

  static size_t countLeaves(const AccessTreeNode& n)
  {
    if (n.isLeaf())
      return 1;
    size_t total = 0;
    for (const auto& c : n.children)
      total += countLeaves(c);
    return total;
  }

  static bool satisfied(const AccessTreeNode& n, const AttributeSet& attrs)
  {
    if (n.isLeaf())
      return attrs.contains(*n.attr);
    uint32_t hits = 0;
    for (const auto& c : n.children) {
      if (satisfied(c, attrs))
        ++hits;
    }
    return hits >= n.threshold;
  }

  static void visitLeaves(const AccessTreeNode& n, size_t& index,
                          const std::function<void(size_t, const Attribute&)>& fn)
  {
    if (n.isLeaf()) {
      fn(index++, *n.attr);
      return;
    }
    for (const auto& c : n.children)
      visitLeaves(c, index, fn);
  }

  AccessTreeNode m_root;
  bool m_alwaysTrue = false;
};

/// Compiles a normalized policy (spec operation name).
inline AccessTree
buildAccessTree(const PolicyExpr& policy)
{
  return AccessTree::fromPolicy(policy);
}

inline bool
satisfies(const AccessTree& tree, const AttributeSet& attrs)
{
  return tree.satisfies(attrs);
}

} // namespace nacabe::abe
