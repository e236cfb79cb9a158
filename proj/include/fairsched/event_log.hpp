#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fairsched/event_queue.hpp"
#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

enum class RecordType : std::uint8_t {
  Event,      // one per processed event: v1 = EventKind
  Arrival,    // v1 = input_len, v2 = parent id or -1
  Dispatch,   // v1 = global match length, v2 = input_len; list = matched worker set
  Admit,      // v1 = input_len, v2 = match length, v3 = extend tokens
  StepStart,  // v1 = batch size, v2 = extend tokens computed, v3 = latency (us)
  StepEnd,    // list = (client, generated tokens) pairs; v1 = batch size after filtering
  Refill,     // v1 = quantum, v2 = scope (0 local, 1 global)
  Finish,     // v1 = output tokens, v2 = first-token time (us)
  Evict,      // v1 = tokens evicted, v2 = kept prefix length
  Idle,       // work-conservation violation: idle worker with an admissible request
  Overflow,   // v1 = pool footprint above M
};

const char* to_string(RecordType t);
RecordType record_type_from(const std::string& s);

struct LogRecord {
  std::uint64_t event = 0;  // index of the processed event that produced it
  SimTime time;
  RecordType type = RecordType::Event;
  RequestId request = -1;
  ClientId client = -1;
  WorkerId worker = -1;
  std::int64_t v1 = 0;
  std::int64_t v2 = 0;
  std::int64_t v3 = 0;
  std::vector<std::int64_t> list;

  bool operator==(const LogRecord&) const = default;
};

/// Everything a verifier needs to know about the run that produced a log.
struct RunMeta {
  std::uint64_t seed = 0;
  SimTime horizon;
  SystemParams params;
  Service U = 0;
  Service quantum_u = 0;
  Service quantum_w = 0;
  std::string local_policy;
  std::string global_policy;
  std::int32_t clients = 0;
  std::uint64_t events = 0;

  bool operator==(const RunMeta&) const = default;
};

/// Append-only trace of a run. Serialized as one JSON object per line with
/// a fixed key order; the first line is the run header.
class EventLog {
 public:
  RunMeta meta;

  void append(LogRecord r) { records_.push_back(std::move(r)); }
  const std::vector<LogRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void write(std::ostream& os) const;
  static EventLog read(std::istream& is);

  /// FNV-1a over the serialized form.
  std::uint64_t hash() const;

 private:
  std::vector<LogRecord> records_;
};

std::string serialize_record(const LogRecord& r);
std::string serialize_meta(const RunMeta& m);

}  // namespace fairsched
