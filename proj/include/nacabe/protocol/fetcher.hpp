#pragma once

#include "../schema/validator.hpp"
#include "naming.hpp"

#include <cmath>

namespace nacabe {

/// Single-interest fetch with retransmissions (fresh nonce each attempt).
inline void
fetchOne(Face& face, Interest interest, int retries,
         std::function<void(std::optional<Data>)> done)
{
  interest.nonce = 0; // regenerate per expression
  face.expressInterest(
    interest, [done](const Data& d) { done(d); },
    [&face, interest, retries, done]() mutable {
      if (retries > 0) {
        fetchOne(face, interest, retries - 1, std::move(done));
        return;
      }
      done(std::nullopt);
    });
}

/// Segmented-object fetcher with TCP-like congestion control: slow start
/// from cwnd=1 doubling per RTT up to ssthresh (initially 16), additive
/// increase beyond it, and on any timeout ssthresh = max(cwnd/2, 1) with
/// cwnd reset to 1 and retransmission.
///
/// Per segment, one timeout round is the original transmission plus up to
/// `retriesPerRound` retransmissions; `maxTimeoutRounds` consecutive
/// failed rounds abort the fetch.
class SegmentFetcher : public std::enable_shared_from_this<SegmentFetcher> {
public:
  struct Options {
    uint64_t interestLifetimeMs = DefaultInterestLifetimeMs;
    int retriesPerRound = 3;
    int maxTimeoutRounds = 3;
    double initialSsthresh = 16.0;
    Validator* validator = nullptr; // validates every segment when set
  };

  struct Stats {
    Name objectBase; // resolved name through the version component
    size_t segmentCount = 0;
    size_t retransmits = 0;
    size_t decreases = 0; // multiplicative decrease events
    double maxWindow = 1.0;
    std::vector<double> windowTrace;
  };

  using SuccessCallback = std::function<void(Bytes, Stats)>;
  using FailureCallback = std::function<void(std::string)>;

  static void fetch(Face& face, const Name& baseName, const Options& options,
                    SuccessCallback onDone, FailureCallback onFail)
  {
    auto self = std::shared_ptr<SegmentFetcher>(
      new SegmentFetcher(face, baseName, options, std::move(onDone), std::move(onFail)));
    self->discover();
  }

private:
  SegmentFetcher(Face& face, Name baseName, Options options, SuccessCallback onDone,
                 FailureCallback onFail)
    : m_face(face)
    , m_baseName(std::move(baseName))
    , m_options(options)
    , m_onDone(std::move(onDone))
    , m_onFail(std::move(onFail))
    , m_cwnd(1.0)
    , m_ssthresh(options.initialSsthresh)
  {
  }

  size_t maxAttempts() const
  {
    return static_cast<size_t>(1 + m_options.retriesPerRound) *
           static_cast<size_t>(m_options.maxTimeoutRounds);
  }

  // Phase 1: learn the version and FinalBlockId from any segment under the
  // base name. mustBeFresh steers latest-version discovery at producers
  // and keeps stale cached versions out.
  void discover()
  {
    Interest interest;
    interest.name = m_baseName;
    interest.canBePrefix = true;
    interest.mustBeFresh = true;
    interest.lifetimeMs = m_options.interestLifetimeMs;
    auto self = shared_from_this();
    fetchOne(m_face, interest, static_cast<int>(maxAttempts()) - 1,
             [self](std::optional<Data> d) {
               if (self->m_done)
                 return;
               if (!d.has_value()) {
                 self->fail("discovery timed out under " + self->m_baseName.toUri());
                 return;
               }
               self->onDiscovery(*d);
             });
  }

  void onDiscovery(const Data& data)
  {
    if (data.name.empty() || !data.name[data.name.size() - 1].isSegment()) {
      fail("object under " + m_baseName.toUri() + " is not segmented");
      return;
    }
    if (!data.finalBlockId.has_value() || !data.finalBlockId->isSegment()) {
      fail("segment " + data.name.toUri() + " carries no FinalBlockId");
      return;
    }
    m_objectBase = data.name.getPrefix(data.name.size() - 1);
    m_totalSegments = data.finalBlockId->toNumber() + 1;
    m_received.assign(m_totalSegments, std::nullopt);
    m_failures.assign(m_totalSegments, 0);
    m_stats.objectBase = m_objectBase;
    m_stats.segmentCount = m_totalSegments;
    acceptSegment(data);
    pump();
  }

  void acceptSegment(const Data& data)
  {
    uint64_t index = data.name[data.name.size() - 1].toNumber();
    if (index >= m_totalSegments || m_received[index].has_value())
      return;
    if (data.finalBlockId.has_value() && data.finalBlockId->isSegment() &&
        data.finalBlockId->toNumber() + 1 != m_totalSegments) {
      fail("inconsistent FinalBlockId at " + data.name.toUri());
      return;
    }
    m_received[index] = data.content;
    m_failures[index] = 0;
    if (m_options.validator != nullptr) {
      ++m_pendingValidations;
      auto self = shared_from_this();
      m_options.validator->validate(data, [self, name = data.name](ValidationResult r) {
        --self->m_pendingValidations;
        if (self->m_done)
          return;
        if (!r.valid()) {
          self->fail("segment validation failed (" + std::string(to_string(r.outcome)) +
                     ") at " + name.toUri());
          return;
        }
        self->maybeFinish();
      });
    }
  }

  void pump()
  {
    if (m_done)
      return;
    while (m_inFlight.size() < static_cast<size_t>(std::floor(m_cwnd))) {
      std::optional<uint64_t> next = nextToRequest();
      if (!next.has_value())
        break;
      request(*next);
    }
    maybeFinish();
  }

  std::optional<uint64_t> nextToRequest() const
  {
    for (uint64_t i = 0; i < m_totalSegments; ++i) {
      if (!m_received[i].has_value() && !m_inFlight.contains(i))
        return i;
    }
    return std::nullopt;
  }

  void request(uint64_t index)
  {
    Interest interest;
    interest.name = m_objectBase;
    interest.name.appendSegment(index);
    interest.lifetimeMs = m_options.interestLifetimeMs;
    m_inFlight.insert(index);
    auto self = shared_from_this();
    m_face.expressInterest(
      interest,
      [self, index](const Data& d) {
        if (self->m_done)
          return;
        self->m_inFlight.erase(index);
        self->onSegment(d);
      },
      [self, index]() {
        if (self->m_done)
          return;
        self->m_inFlight.erase(index);
        self->onTimeout(index);
      });
  }

  void onSegment(const Data& data)
  {
    acceptSegment(data);
    // slow start doubles per RTT; congestion avoidance adds one per window
    if (m_cwnd < m_ssthresh)
      m_cwnd += 1.0;
    else
      m_cwnd += 1.0 / std::floor(m_cwnd);
    noteWindow();
    pump();
  }

  void onTimeout(uint64_t index)
  {
    // multiplicative decrease, then retransmit the lost segment
    m_ssthresh = std::max(m_cwnd / 2.0, 1.0);
    m_cwnd = 1.0;
    ++m_stats.decreases;
    noteWindow();
    if (++m_failures[index] >= maxAttempts()) {
      fail("segment " + std::to_string(index) + " exhausted " +
           std::to_string(maxAttempts()) + " attempts");
      return;
    }
    ++m_stats.retransmits;
    request(index);
  }

  void noteWindow()
  {
    m_stats.maxWindow = std::max(m_stats.maxWindow, m_cwnd);
    m_stats.windowTrace.push_back(m_cwnd);
  }

  void maybeFinish()
  {
    if (m_done || m_pendingValidations > 0)
      return;
    for (const auto& piece : m_received) {
      if (!piece.has_value())
        return;
    }
    m_done = true;
    Bytes out;
    for (const auto& piece : m_received)
      append(out, *piece);
    m_onDone(std::move(out), std::move(m_stats));
  }

  void fail(std::string reason)
  {
    if (m_done)
      return;
    m_done = true;
    log::debug("segment fetch failed: ", reason);
    m_onFail(std::move(reason));
  }

  Face& m_face;
  Name m_baseName;
  Options m_options;
  SuccessCallback m_onDone;
  FailureCallback m_onFail;

  Name m_objectBase;
  uint64_t m_totalSegments = 0;
  std::vector<std::optional<Bytes>> m_received;
  std::vector<size_t> m_failures;
  std::set<uint64_t> m_inFlight;
  size_t m_pendingValidations = 0;
  double m_cwnd;
  double m_ssthresh;
  Stats m_stats;
  bool m_done = false;
};

} // namespace nacabe
