#include "fairsched/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fairsched/rng.hpp"

namespace fairsched {

namespace {

constexpr std::array<const char*, 11> kRecordNames = {
    "event", "arrival", "dispatch", "admit", "step_start", "step_end",
    "refill", "finish", "evict", "idle", "overflow"};

}  // namespace

const char* to_string(RecordType t) { return kRecordNames.at(static_cast<std::size_t>(t)); }

RecordType record_type_from(const std::string& s) {
  for (std::size_t i = 0; i < kRecordNames.size(); ++i) {
    if (s == kRecordNames[i]) return static_cast<RecordType>(i);
  }
  throw std::runtime_error("unknown log record type '" + s + "'");
}

std::string serialize_record(const LogRecord& r) {
  std::ostringstream os;
  os << "{\"e\":" << r.event << ",\"t\":" << r.time.us() << ",\"type\":\"" << to_string(r.type)
     << "\",\"req\":" << r.request << ",\"client\":" << r.client << ",\"worker\":" << r.worker
     << ",\"v1\":" << r.v1 << ",\"v2\":" << r.v2 << ",\"v3\":" << r.v3 << ",\"list\":[";
  for (std::size_t i = 0; i < r.list.size(); ++i) os << (i ? "," : "") << r.list[i];
  os << "]}";
  return os.str();
}

std::string serialize_meta(const RunMeta& m) {
  std::ostringstream os;
  os << "{\"type\":\"header\",\"seed\":" << m.seed << ",\"horizon_us\":" << m.horizon.us()
     << ",\"L_input\":" << m.params.max_input << ",\"L_output\":" << m.params.max_output
     << ",\"M\":" << m.params.batch_tokens << ",\"D\":" << m.params.workers
     << ",\"w_e\":" << m.params.weights.extend << ",\"w_q\":" << m.params.weights.output
     << ",\"U\":" << m.U << ",\"Q_u\":" << m.quantum_u << ",\"Q_w\":" << m.quantum_w
     << ",\"local_policy\":\"" << m.local_policy << "\",\"global_policy\":\"" << m.global_policy
     << "\",\"clients\":" << m.clients << ",\"events\":" << m.events << "}";
  return os.str();
}

void EventLog::write(std::ostream& os) const {
  os << serialize_meta(meta) << '\n';
  for (const auto& r : records_) os << serialize_record(r) << '\n';
}

EventLog EventLog::read(std::istream& is) {
  EventLog log;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("event log line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!header) {
      if (j.value("type", "") != "header") throw std::runtime_error("event log lacks a header line");
      RunMeta& m = log.meta;
      m.seed = j.at("seed").get<std::uint64_t>();
      m.horizon = SimTime::from_us(j.at("horizon_us").get<std::int64_t>());
      m.params.max_input = j.at("L_input");
      m.params.max_output = j.at("L_output");
      m.params.batch_tokens = j.at("M");
      m.params.workers = j.at("D");
      m.params.weights.extend = j.at("w_e");
      m.params.weights.output = j.at("w_q");
      m.U = j.at("U");
      m.quantum_u = j.at("Q_u");
      m.quantum_w = j.at("Q_w");
      m.local_policy = j.at("local_policy");
      m.global_policy = j.at("global_policy");
      m.clients = j.at("clients");
      m.events = j.at("events");
      header = true;
      continue;
    }
    LogRecord r;
    r.event = j.at("e");
    r.time = SimTime::from_us(j.at("t").get<std::int64_t>());
    r.type = record_type_from(j.at("type"));
    r.request = j.at("req");
    r.client = j.at("client");
    r.worker = j.at("worker");
    r.v1 = j.at("v1");
    r.v2 = j.at("v2");
    r.v3 = j.at("v3");
    r.list = j.at("list").get<std::vector<std::int64_t>>();
    log.append(std::move(r));
  }
  if (!header) throw std::runtime_error("empty event log");
  return log;
}

std::uint64_t EventLog::hash() const {
  std::uint64_t h = fnv1a(serialize_meta(meta));
  for (const auto& r : records_) h = fnv1a(serialize_record(r), h);
  return h;
}

}  // namespace fairsched
