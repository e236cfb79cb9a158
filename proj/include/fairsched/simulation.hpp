#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fairsched/cost.hpp"
#include "fairsched/event_log.hpp"
#include "fairsched/global_policy.hpp"
#include "fairsched/local_policy.hpp"
#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"
#include "fairsched/worker.hpp"
#include "fairsched/workload.hpp"

namespace fairsched {

struct ClusterConfig {
  std::uint64_t seed = 0;
  SimTime horizon = SimTime::from_s(60);
  SystemParams params;
  std::int64_t cache_capacity = 0;   // 0 = M
  std::int64_t output_reserve = -1;  // -1 = L_output
  std::int64_t chunk_size = 0;
  std::int64_t admission_interval = 1;
  StepTiming timing;
  LocalPolicySpec local;
  GlobalPolicySpec global{"rr", 0, 0.5};
  SimTime eviction_delay;

  WorkerConfig worker_config(WorkerId id) const;
  /// Throws InvalidArgument listing every offending field.
  void validate() const;
};

/// Lifecycle of one request. Times are unset until the step happens.
struct RequestRecord {
  RequestId id = 0;
  ClientId client = 0;
  std::optional<RequestId> parent;
  WorkerId worker = -1;
  std::int64_t input_len = 0;
  std::int64_t match_len = 0;
  std::int64_t extend = 0;
  std::int64_t output_tokens = 0;
  std::optional<SimTime> arrival;
  std::optional<SimTime> dispatch;
  std::optional<SimTime> admit;
  std::optional<SimTime> first_token;
  std::optional<SimTime> finish;
};

struct RunResult {
  EventLog log;
  ServiceLog service;
  std::vector<RequestRecord> requests;
  std::vector<DispatchRecord> dispatches;
  std::vector<WorkerSample> samples;
  /// Extremes of each worker's local counters (deficit policies only).
  std::vector<std::map<ClientId, CounterRange>> local_ranges;
  std::map<std::pair<ClientId, WorkerId>, CounterRange> global_ranges;
  std::uint64_t events = 0;
  SimTime end;
  std::int64_t idle_violations = 0;
  std::int64_t overflow_events = 0;
};

/// One isolated simulated cluster: global dispatcher, D workers, the event
/// loop and every log a verifier needs.
RunResult simulate(const ClusterConfig& config, const Workload& workload);

}  // namespace fairsched
