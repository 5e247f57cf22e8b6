#pragma once

#include "../core/certificate.hpp"
#include "../core/forwarder.hpp"
#include "naming.hpp"

namespace nacabe {

inline constexpr size_t DefaultMss = 1500;
inline constexpr size_t MinMss = 64;

/// A published large object: ceil(len/mss) independently signed segments
/// named <base>/seg=<i>, each carrying FinalBlockId = seg=<n-1>.
struct SegmentedObject {
  Name baseName; // through the version component
  std::vector<Data> segments;
  size_t totalBytes = 0;
};

inline SegmentedObject
makeSegments(const Name& versionedBase, BytesView bytes, size_t mss,
             uint64_t freshnessMs, const crypto::SigningKey& signerKey,
             const Name& signerCertName, ContentType contentType = ContentType::Blob)
{
  if (mss < MinMss)
    throw Error("segment size must be at least 64 bytes");
  if (bytes.empty())
    throw Error("cannot segment an empty object");
  SegmentedObject obj;
  obj.baseName = versionedBase;
  obj.totalBytes = bytes.size();
  size_t count = (bytes.size() + mss - 1) / mss;
  Component finalBlock = Component::segment(count - 1);
  for (size_t i = 0; i < count; ++i) {
    Data d;
    d.name = versionedBase;
    d.name.appendSegment(i);
    d.contentType = contentType;
    d.freshnessPeriodMs = freshnessMs;
    d.finalBlockId = finalBlock;
    size_t offset = i * mss;
    size_t len = std::min(mss, bytes.size() - offset);
    d.content.assign(bytes.begin() + static_cast<long>(offset),
                     bytes.begin() + static_cast<long>(offset + len));
    obj.segments.push_back(signData(std::move(d), signerKey, signerCertName));
  }
  return obj;
}

/// Packets a role has published, served on request. Discovery Interests
/// (canBePrefix) resolve to the highest version, lowest segment under the
/// Interest name.
class SegmentStore {
public:
  void add(const SegmentedObject& obj)
  {
    for (const auto& seg : obj.segments)
      m_byName[seg.name] = seg;
    m_bases.insert(obj.baseName);
  }

  void put(const Data& data) { m_byName[data.name] = data; }

  const Data* match(const Interest& interest) const
  {
    if (!interest.canBePrefix) {
      auto it = m_byName.find(interest.name);
      return it == m_byName.end() ? nullptr : &it->second;
    }
    const Data* best = nullptr;
    uint64_t bestVersion = 0;
    uint64_t bestSegment = 0;
    for (auto it = m_byName.lower_bound(interest.name);
         it != m_byName.end() && interest.name.isPrefixOf(it->first); ++it) {
      auto v = naming::parseVersioned(it->first);
      uint64_t version = v.has_value() ? v->version : 0;
      uint64_t segment = v.has_value() && v->segment.has_value() ? *v->segment : 0;
      if (best == nullptr || version > bestVersion ||
          (version == bestVersion && segment < bestSegment)) {
        best = &it->second;
        bestVersion = version;
        bestSegment = segment;
      }
    }
    return best;
  }

  size_t objectCount() const { return m_bases.size(); }
  size_t packetCount() const { return m_byName.size(); }

private:
  std::map<Name, Data> m_byName;
  std::set<Name> m_bases;
};

/// Serves a SegmentStore over a face: one registered prefix per namespace
/// the role owns.
class SegmentServer {
public:
  explicit SegmentServer(Face& face)
    : m_face(face)
  {
  }

  void servePrefix(const Name& prefix)
  {
    m_face.registerPrefix(prefix, [this](const Interest& interest) {
      if (const Data* d = m_store.match(interest))
        m_face.put(*d);
    });
  }

  SegmentStore& store() { return m_store; }
  const SegmentStore& store() const { return m_store; }

private:
  Face& m_face;
  SegmentStore m_store;
};

} // namespace nacabe
