#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "fairsched/sim_time.hpp"

namespace fairsched {

/// Declaration order is the tiebreak order among events at the same instant.
enum class EventKind : std::uint8_t {
  RequestArrival = 0,
  StepComplete = 1,
  RequestFinished = 2,
  EvictionNotice = 3,
};

const char* to_string(EventKind kind);

struct Event {
  SimTime time;
  EventKind kind = EventKind::RequestArrival;
  std::uint64_t sequence = 0;
  // Payload slots; meaning depends on kind.
  std::int64_t a = 0;
  std::int64_t b = 0;
};

class ScheduleInPast : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using EventHandle = std::uint64_t;

/// Ordered event queue with a virtual clock. Events fire in
/// lexicographic (time, kind, sequence) order.
class EventQueue {
 public:
  /// Throws ScheduleInPast when `time` precedes the clock.
  EventHandle schedule(SimTime time, EventKind kind, std::int64_t a = 0, std::int64_t b = 0);
  void cancel(EventHandle handle);

  /// Processes every event with time <= t_end, then advances the clock to
  /// t_end if the queue drained before it. Returns events processed.
  std::size_t run_until(SimTime t_end, const std::function<void(const Event&)>& handler);

  SimTime now() const { return now_; }
  bool empty() const { return live_.empty(); }
  std::size_t pending() const { return live_.size(); }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      if (x.time != y.time) return x.time > y.time;
      if (x.kind != y.kind) return x.kind > y.kind;
      return x.sequence > y.sequence;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::unordered_set<std::uint64_t> live_;
  std::unordered_set<std::uint64_t> cancelled_;
  SimTime now_;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace fairsched
