#pragma once

#include "errors.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

namespace nacabe {

/// Discrete-event loop with a virtual millisecond clock. All forwarder and
/// role callbacks in one simulation run serially on one Scheduler, so a
/// seeded run is fully deterministic: ties are broken by insertion order.
class Scheduler {
public:
  using EventId = uint64_t;

  int64_t nowMs() const { return m_nowMs; }

  EventId schedule(int64_t delayMs, std::function<void()> fn)
  {
    if (delayMs < 0)
      delayMs = 0;
    EventId id = ++m_lastId;
    m_queue.push(Event{m_nowMs + delayMs, id, std::move(fn)});
    return id;
  }

  void cancel(EventId id) { m_cancelled.insert(id); }

  bool pending() const { return m_queue.size() > m_cancelled.size(); }

  /// Runs the earliest event; returns false when the queue is empty.
  bool runOne()
  {
    while (!m_queue.empty()) {
      Event ev = m_queue.top();
      m_queue.pop();
      if (auto it = m_cancelled.find(ev.id); it != m_cancelled.end()) {
        m_cancelled.erase(it);
        continue;
      }
      m_nowMs = ev.at;
      ev.fn();
      return true;
    }
    return false;
  }

  void runUntilIdle()
  {
    size_t guard = 0;
    while (runOne()) {
      if (++guard > MaxEventsPerRun)
        throw Error("scheduler runaway: event budget exhausted");
    }
  }

  /// Processes events up to and including tMs; the clock lands on tMs.
  void runUntil(int64_t tMs)
  {
    size_t guard = 0;
    while (!m_queue.empty() && m_queue.top().at <= tMs) {
      runOne();
      if (++guard > MaxEventsPerRun)
        throw Error("scheduler runaway: event budget exhausted");
    }
    if (m_nowMs < tMs)
      m_nowMs = tMs;
  }

  /// Runs until the predicate holds or the queue drains; returns the
  /// predicate's final value.
  bool runUntilCondition(const std::function<bool()>& done)
  {
    size_t guard = 0;
    while (!done()) {
      if (!runOne())
        return done();
      if (++guard > MaxEventsPerRun)
        throw Error("scheduler runaway: event budget exhausted");
    }
    return true;
  }

private:
  static constexpr size_t MaxEventsPerRun = 50'000'000;

  struct Event {
    int64_t at;
    EventId id;
    std::function<void()> fn;

    bool operator>(const Event& o) const
    {
      if (at != o.at)
        return at > o.at;
      return id > o.id;
    }
  };

  int64_t m_nowMs = 0;
  EventId m_lastId = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> m_queue;
  std::unordered_set<EventId> m_cancelled;
};

} // namespace nacabe
