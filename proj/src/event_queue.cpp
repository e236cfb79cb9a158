#include "fairsched/event_queue.hpp"

#include <string>

namespace fairsched {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::RequestArrival:
      return "arrival";
    case EventKind::StepComplete:
      return "step";
    case EventKind::RequestFinished:
      return "finish";
    case EventKind::EvictionNotice:
      return "evict";
  }
  return "?";
}

EventHandle EventQueue::schedule(SimTime time, EventKind kind, std::int64_t a, std::int64_t b) {
  if (time < now_) {
    throw ScheduleInPast("event at t=" + to_string(time) + "us scheduled while clock is at " +
                         to_string(now_) + "us");
  }
  Event e{time, kind, next_sequence_++, a, b};
  heap_.push(e);
  live_.insert(e.sequence);
  return e.sequence;
}

void EventQueue::cancel(EventHandle handle) {
  if (live_.erase(handle) > 0) cancelled_.insert(handle);
}

std::size_t EventQueue::run_until(SimTime t_end, const std::function<void(const Event&)>& handler) {
  std::size_t processed = 0;
  while (!heap_.empty() && heap_.top().time <= t_end) {
    Event e = heap_.top();
    heap_.pop();
    if (auto it = cancelled_.find(e.sequence); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    live_.erase(e.sequence);
    now_ = e.time;
    handler(e);
    ++processed;
  }
  if (now_ < t_end) now_ = t_end;
  return processed;
}

}  // namespace fairsched
