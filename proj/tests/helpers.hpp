#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairsched/simulation.hpp"
#include "fairsched/workload.hpp"

namespace testing_helpers {

using namespace fairsched;

inline Request make_request(RequestId id, ClientId client, TokenSeq input, std::int64_t output,
                            SimTime arrival = {}, std::optional<RequestId> parent = std::nullopt) {
  Request r;
  r.id = id;
  r.client = client;
  r.input = std::move(input);
  r.true_output_len = output;
  r.arrival = arrival;
  r.parent = parent;
  return r;
}

/// [base, base + 1, ..., base + len - 1]
inline TokenSeq seq(Token base, std::int64_t len) {
  TokenSeq out;
  for (std::int64_t i = 0; i < len; ++i) out.push_back(base + static_cast<Token>(i));
  return out;
}

inline TokenSeq concat(TokenSeq a, const TokenSeq& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Workload workload_of(std::vector<Request> reqs) {
  Workload w;
  w.requests = std::move(reqs);
  return w;
}

/// One worker, small pool, simple timing: 1 ms per step plus 1 us per
/// extend token, no per-request decode cost.
inline ClusterConfig small_cluster(const std::string& local = "dlpm", Service quantum = 1000) {
  ClusterConfig c;
  c.params.max_input = 256;
  c.params.max_output = 64;
  c.params.batch_tokens = 1024;
  c.params.workers = 1;
  c.horizon = SimTime::from_s(10);
  c.timing.fixed = SimTime::from_ms(1);
  c.timing.per_prefill_token = SimTime::from_us(1);
  c.timing.per_decode_request = SimTime::from_us(0);
  c.local = {local, quantum};
  c.global = {"rr", 0, 0.5};
  return c;
}

inline std::vector<RequestId> admission_order(const EventLog& log) {
  std::vector<RequestId> out;
  for (const auto& r : log.records()) {
    if (r.type == RecordType::Admit) out.push_back(r.request);
  }
  return out;
}

}  // namespace testing_helpers
