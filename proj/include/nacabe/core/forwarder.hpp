#pragma once

#include "log.hpp"
#include "packet.hpp"
#include "rng.hpp"
#include "scheduler.hpp"

#include <list>
#include <map>
#include <memory>

namespace nacabe {

using FaceId = uint32_t;

struct LinkPolicy {
  int64_t delayMs = 0;
  double lossProbability = 0.0;
};

/// Bounded LRU cache of Data packets, keyed by name. Serves exact-name and
/// prefix lookups; a mustBeFresh lookup only returns entries still inside
/// their freshness window.
class ContentStore {
public:
  explicit ContentStore(size_t capacity = 4096)
    : m_capacity(capacity)
  {
  }

  void insert(const Data& data, int64_t nowMs)
  {
    if (m_capacity == 0)
      return;
    auto it = m_map.find(data.name);
    if (it != m_map.end()) {
      it->second.data = data;
      it->second.arrivalMs = nowMs;
      touch(it);
      return;
    }
    if (m_map.size() >= m_capacity) {
      // evict least recently used
      m_map.erase(m_lru.back());
      m_lru.pop_back();
    }
    auto [pos, inserted] = m_map.emplace(data.name, Entry{data, nowMs, {}});
    m_lru.push_front(pos->first);
    pos->second.lruIt = m_lru.begin();
  }

  const Data* find(const Interest& interest, int64_t nowMs)
  {
    if (!interest.canBePrefix) {
      auto it = m_map.find(interest.name);
      if (it == m_map.end() || !freshEnough(it->second, interest, nowMs))
        return nullptr;
      touch(it);
      return &it->second.data;
    }
    for (auto it = m_map.lower_bound(interest.name);
         it != m_map.end() && interest.name.isPrefixOf(it->first); ++it) {
      if (freshEnough(it->second, interest, nowMs)) {
        touch(it);
        return &it->second.data;
      }
    }
    return nullptr;
  }

  size_t size() const { return m_map.size(); }
  void clear()
  {
    m_map.clear();
    m_lru.clear();
  }

private:
  struct Entry {
    Data data;
    int64_t arrivalMs;
    std::list<Name>::iterator lruIt;
  };

  static bool freshEnough(const Entry& e, const Interest& interest, int64_t nowMs)
  {
    if (!interest.mustBeFresh)
      return true;
    return nowMs - e.arrivalMs < static_cast<int64_t>(e.data.freshnessPeriodMs);
  }

  void touch(std::map<Name, Entry>::iterator it)
  {
    m_lru.erase(it->second.lruIt);
    m_lru.push_front(it->first);
    it->second.lruIt = m_lru.begin();
  }

  size_t m_capacity;
  std::map<Name, Entry> m_map;
  std::list<Name> m_lru;
};

class Forwarder;
class Link;

/// Application endpoint on a forwarder. Producers register prefixes and
/// answer with put(); consumers express Interests and receive exactly one
/// of onData / onTimeout per expression.
class Face {
public:
  using DataCallback = std::function<void(const Data&)>;
  using TimeoutCallback = std::function<void()>;
  using InterestCallback = std::function<void(const Interest&)>;

  struct PendingHandle {
    uint64_t id = 0;
  };

  PendingHandle expressInterest(Interest interest, DataCallback onData,
                                TimeoutCallback onTimeout);
  void cancel(PendingHandle h);
  void registerPrefix(const Name& prefix, InterestCallback onInterest);
  void put(const Data& data);

  FaceId id() const { return m_id; }
  Forwarder& forwarder() { return m_forwarder; }

private:
  friend class Forwarder;

  Face(Forwarder& fwd, FaceId id)
    : m_forwarder(fwd)
    , m_id(id)
  {
  }

  struct Pending {
    Interest interest;
    DataCallback onData;
    TimeoutCallback onTimeout;
    Scheduler::EventId timeoutEvent;
  };

  void deliverData(const Data& data);
  void deliverInterest(const Interest& interest);

  Forwarder& m_forwarder;
  FaceId m_id;
  uint64_t m_lastPendingId = 0;
  std::map<uint64_t, Pending> m_pending;
  std::map<Name, InterestCallback> m_handlers;
};

/// Single-process NDN message router: FIB with longest-prefix match, PIT
/// with per-face in-records, and an LRU content store. One logical event
/// loop (the Scheduler) serializes every callback.
class Forwarder {
public:
  struct Counters {
    uint64_t inInterests = 0;
    uint64_t outInterests = 0;
    uint64_t inData = 0;
    uint64_t outData = 0;
    uint64_t csHits = 0;
    uint64_t unsolicitedData = 0;
    uint64_t duplicateNonces = 0;
  };

  explicit Forwarder(Scheduler& sched, RngPtr rng, size_t csCapacity = 4096)
    : m_sched(sched)
    , m_rng(std::move(rng))
    , m_cs(csCapacity)
  {
  }

  Forwarder(const Forwarder&) = delete;
  Forwarder& operator=(const Forwarder&) = delete;

  Face& createFace()
  {
    FaceId id = nextFaceId();
    auto face = std::unique_ptr<Face>(new Face(*this, id));
    Face& ref = *face;
    m_faces.emplace(id, Slot{std::move(face), nullptr, {}});
    return ref;
  }

  /// Static route: Interests matching the prefix leave through this face.
  void addRoute(const Name& prefix, FaceId nexthop)
  {
    m_fib[prefix] = nexthop;
  }

  Scheduler& scheduler() { return m_sched; }
  Rng& rng() { return *m_rng; }
  int64_t nowMs() const { return m_sched.nowMs(); }
  const Counters& counters() const { return m_counters; }
  ContentStore& contentStore() { return m_cs; }

private:
  friend class Face;
  friend class Link;

  struct Slot {
    std::unique_ptr<Face> appFace; // null for link endpoints
    Link* link = nullptr;
    LinkPolicy sendPolicy; // applies to packets leaving through this slot
  };

  struct PitInRecord {
    FaceId face;
    uint32_t nonce;
    int64_t expiryMs;
  };

  struct PitEntry {
    Interest interest;
    std::vector<PitInRecord> inRecords;
    bool forwarded = false;
  };

  using PitKey = std::tuple<Name, bool, bool>; // name, canBePrefix, mustBeFresh

  FaceId nextFaceId() { return ++m_lastFaceId; }

  static PitKey pitKeyOf(const Interest& i)
  {
    return {i.name, i.canBePrefix, i.mustBeFresh};
  }

  void registerRoute(const Name& prefix, FaceId face)
  {
    auto it = m_fib.find(prefix);
    if (it != m_fib.end() && it->second == face)
      throw NetError("duplicate prefix registration on face: " + prefix.toUri());
    m_fib[prefix] = face;
  }

  std::optional<FaceId> longestPrefixMatch(const Name& name, FaceId ingress) const
  {
    const Name* best = nullptr;
    FaceId bestFace = 0;
    for (const auto& [prefix, face] : m_fib) {
      if (face == ingress)
        continue;
      if (prefix.isPrefixOf(name) && (best == nullptr || prefix.size() > best->size())) {
        best = &prefix;
        bestFace = face;
      }
    }
    if (best == nullptr)
      return std::nullopt;
    return bestFace;
  }

  void onIncomingInterest(FaceId ingress, const Interest& interest)
  {
    ++m_counters.inInterests;
    log::trace("fwd interest in face=", ingress, " ", interest.name.toUri());

    PitKey key = pitKeyOf(interest);
    auto pitIt = m_pit.find(key);

    // duplicate nonce on the same face is dropped; a fresh nonce from a
    // face that already has an in-record is a retransmission
    bool retransmission = false;
    if (pitIt != m_pit.end()) {
      for (auto& rec : pitIt->second.inRecords) {
        if (rec.face != ingress)
          continue;
        if (rec.nonce == interest.nonce) {
          ++m_counters.duplicateNonces;
          return;
        }
        rec.nonce = interest.nonce;
        rec.expiryMs = nowMs() + static_cast<int64_t>(interest.lifetimeMs);
        retransmission = true;
        break;
      }
    }

    // content store lookup
    if (const Data* cached = m_cs.find(interest, nowMs())) {
      ++m_counters.csHits;
      log::trace("fwd cs-hit ", cached->name.toUri());
      sendData(ingress, *cached);
      return;
    }

    // PIT insert
    if (pitIt == m_pit.end())
      pitIt = m_pit.emplace(key, PitEntry{interest, {}, false}).first;
    if (!retransmission)
      pitIt->second.inRecords.push_back(
        PitInRecord{ingress, interest.nonce,
                    nowMs() + static_cast<int64_t>(interest.lifetimeMs)});
    scheduleAtPitCleanup(key, interest.lifetimeMs);

    // forward on first insertion; later Interests aggregate, but a
    // retransmission goes upstream again
    if (!pitIt->second.forwarded || retransmission) {
      auto nexthop = longestPrefixMatch(interest.name, ingress);
      if (nexthop.has_value()) {
        pitIt->second.forwarded = true;
        sendInterest(*nexthop, interest);
      }
    }
  }

  void onIncomingData(FaceId ingress, const Data& data)
  {
    ++m_counters.inData;
    log::trace("fwd data in face=", ingress, " ", data.name.toUri());

    // collect every PIT entry this Data satisfies
    std::vector<PitKey> satisfied;
    for (const auto& [key, entry] : m_pit) {
      if (entry.interest.matchesData(data.name))
        satisfied.push_back(key);
    }
    if (satisfied.empty()) {
      ++m_counters.unsolicitedData; // no pending Interest: drop
      return;
    }

    m_cs.insert(data, nowMs());

    std::vector<FaceId> downstreams;
    for (const auto& key : satisfied) {
      auto it = m_pit.find(key);
      for (const auto& rec : it->second.inRecords) {
        if (rec.face != ingress && rec.expiryMs > nowMs())
          downstreams.push_back(rec.face);
      }
      m_pit.erase(it); // entry consumed
    }
    std::sort(downstreams.begin(), downstreams.end());
    downstreams.erase(std::unique(downstreams.begin(), downstreams.end()),
                      downstreams.end());
    for (FaceId f : downstreams)
      sendData(f, data);
  }

  void scheduleAtPitCleanup(const PitKey& key, uint64_t lifetimeMs)
  {
    m_sched.schedule(static_cast<int64_t>(lifetimeMs) + 1, [this, key] {
      auto it = m_pit.find(key);
      if (it == m_pit.end())
        return;
      auto& recs = it->second.inRecords;
      std::erase_if(recs, [this](const PitInRecord& r) { return r.expiryMs <= nowMs(); });
      if (recs.empty())
        m_pit.erase(it);
    });
  }

  void sendInterest(FaceId egress, const Interest& interest);
  void sendData(FaceId egress, const Data& data);

  Scheduler& m_sched;
  RngPtr m_rng;
  ContentStore m_cs;
  Counters m_counters;
  FaceId m_lastFaceId = 0;
  std::map<FaceId, Slot> m_faces;
  std::map<Name, FaceId> m_fib;
  std::map<PitKey, PitEntry> m_pit;
};

/// Point-to-point link between two forwarders with per-direction fixed
/// delay and Bernoulli loss. A detached link drops everything.
class Link {
public:
  struct PrivateTag {};

  static std::shared_ptr<Link> connect(Forwarder& a, Forwarder& b, LinkPolicy aToB = {},
                                       LinkPolicy bToA = {})
  {
    auto link = std::make_shared<Link>(PrivateTag{});
    link->m_a = &a;
    link->m_b = &b;
    link->m_faceOnA = a.nextFaceId();
    link->m_faceOnB = b.nextFaceId();
    a.m_faces.emplace(link->m_faceOnA, Forwarder::Slot{nullptr, link.get(), aToB});
    b.m_faces.emplace(link->m_faceOnB, Forwarder::Slot{nullptr, link.get(), bToA});
    return link;
  }

  explicit Link(PrivateTag) {}

  void setUp(bool up) { m_up = up; }
  bool isUp() const { return m_up; }

  FaceId faceOn(const Forwarder& f) const
  {
    return &f == m_a ? m_faceOnA : m_faceOnB;
  }

private:
  friend class Forwarder;

  void transmit(Forwarder& from, const LinkPolicy& policy, Packet packet)
  {
    Forwarder* to = (&from == m_a) ? m_b : m_a;
    FaceId arrivalFace = (&from == m_a) ? m_faceOnB : m_faceOnA;
    if (!m_up)
      return;
    if (from.rng().chance(policy.lossProbability)) {
      log::trace("link drop");
      return;
    }
    from.scheduler().schedule(policy.delayMs, [to, arrivalFace, packet = std::move(packet)] {
      if (std::holds_alternative<Interest>(packet))
        to->onIncomingInterest(arrivalFace, std::get<Interest>(packet));
      else
        to->onIncomingData(arrivalFace, std::get<Data>(packet));
    });
  }

  Forwarder* m_a = nullptr;
  Forwarder* m_b = nullptr;
  FaceId m_faceOnA = 0;
  FaceId m_faceOnB = 0;
  bool m_up = true;
};

inline void
Forwarder::sendInterest(FaceId egress, const Interest& interest)
{
  auto it = m_faces.find(egress);
  if (it == m_faces.end())
    return;
  ++m_counters.outInterests;
  if (it->second.link != nullptr) {
    it->second.link->transmit(*this, it->second.sendPolicy, interest);
  }
  else if (it->second.appFace != nullptr) {
    Face* face = it->second.appFace.get();
    m_sched.schedule(0, [face, interest] { face->deliverInterest(interest); });
  }
}

inline void
Forwarder::sendData(FaceId egress, const Data& data)
{
  auto it = m_faces.find(egress);
  if (it == m_faces.end())
    return;
  ++m_counters.outData;
  if (it->second.link != nullptr) {
    it->second.link->transmit(*this, it->second.sendPolicy, data);
  }
  else if (it->second.appFace != nullptr) {
    Face* face = it->second.appFace.get();
    m_sched.schedule(0, [face, data] { face->deliverData(data); });
  }
}

inline Face::PendingHandle
Face::expressInterest(Interest interest, DataCallback onData, TimeoutCallback onTimeout)
{
  if (interest.nonce == 0)
    interest.nonce = m_forwarder.rng().nextU32();
  uint64_t id = ++m_lastPendingId;
  Scheduler::EventId timeoutEvent = m_forwarder.scheduler().schedule(
    static_cast<int64_t>(interest.lifetimeMs), [this, id] {
      auto it = m_pending.find(id);
      if (it == m_pending.end())
        return;
      auto onTimeout = std::move(it->second.onTimeout);
      m_pending.erase(it);
      if (onTimeout)
        onTimeout();
    });
  m_pending.emplace(id, Pending{interest, std::move(onData), std::move(onTimeout),
                                timeoutEvent});
  Interest copy = interest;
  m_forwarder.scheduler().schedule(0, [this, copy = std::move(copy)] {
    m_forwarder.onIncomingInterest(m_id, copy);
  });
  return PendingHandle{id};
}

inline void
Face::cancel(PendingHandle h)
{
  auto it = m_pending.find(h.id);
  if (it == m_pending.end())
    return;
  m_forwarder.scheduler().cancel(it->second.timeoutEvent);
  m_pending.erase(it);
}

inline void
Face::registerPrefix(const Name& prefix, InterestCallback onInterest)
{
  if (prefix.empty())
    throw NetError("cannot register the empty prefix");
  if (m_handlers.contains(prefix))
    throw NetError("duplicate prefix registration on face: " + prefix.toUri());
  m_forwarder.registerRoute(prefix, m_id);
  m_handlers.emplace(prefix, std::move(onInterest));
}

inline void
Face::put(const Data& data)
{
  Data copy = data;
  m_forwarder.scheduler().schedule(0, [this, copy = std::move(copy)] {
    m_forwarder.onIncomingData(m_id, copy);
  });
}

inline void
Face::deliverData(const Data& data)
{
  // one Data may satisfy several pending Interests on this face
  std::vector<uint64_t> matched;
  for (const auto& [id, pending] : m_pending) {
    if (pending.interest.matchesData(data.name))
      matched.push_back(id);
  }
  for (uint64_t id : matched) {
    auto it = m_pending.find(id);
    if (it == m_pending.end())
      continue;
    auto onData = std::move(it->second.onData);
    m_forwarder.scheduler().cancel(it->second.timeoutEvent);
    m_pending.erase(it);
    if (onData)
      onData(data);
  }
}

inline void
Face::deliverInterest(const Interest& interest)
{
  // longest registered prefix on this face wins
  const InterestCallback* handler = nullptr;
  size_t bestLen = 0;
  for (const auto& [prefix, cb] : m_handlers) {
    if (prefix.isPrefixOf(interest.name) && prefix.size() + 1 > bestLen) {
      bestLen = prefix.size() + 1;
      handler = &cb;
    }
  }
  if (handler != nullptr && *handler)
    (*handler)(interest);
}

} // namespace nacabe
