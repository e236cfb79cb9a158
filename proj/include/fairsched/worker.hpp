#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fairsched/local_policy.hpp"
#include "fairsched/radix_cache.hpp"
#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

/// step latency = c0 + c_prefill * extend tokens + c_decode * batch size
struct StepTiming {
  SimTime fixed = SimTime::from_ms(5.0);
  SimTime per_prefill_token = SimTime::from_ms(0.05);
  SimTime per_decode_request = SimTime::from_ms(0.4);

  SimTime step_latency(std::int64_t extend_tokens, std::int64_t batch_size) const;

  bool operator==(const StepTiming&) const = default;
};

struct WorkerConfig {
  WorkerId id = 0;
  std::int64_t batch_tokens = 16384;     // M
  std::int64_t cache_capacity = 16384;   // KV prefix cache budget
  std::int64_t max_output = 1024;        // L_output
  std::int64_t output_reserve = 1024;    // tokens reserved per running request at admission
  std::int64_t chunk_size = 0;           // max extend tokens per request per step; 0 = no chunking
  std::int64_t admission_interval = 1;   // admission pass every k steps (always when idle)
  StepTiming timing;
  CostWeights weights;
};

struct BatchEntry {
  const Request* request = nullptr;
  RadixCache::Node* pinned = nullptr;
  std::int64_t match_len = 0;
  std::int64_t prefill_remaining = 0;
  std::int64_t prefill_this_step = 0;
  std::int64_t generated = 0;
};

struct FinishedRequest {
  const Request* request = nullptr;
  std::int64_t output_tokens = 0;
  SimTime first_token;
};

struct StepResult {
  std::vector<ClientTokens> generated;  // per client, ascending client id
  std::vector<FinishedRequest> finished;
  std::int64_t batch_size = 0;
};

struct WorkerSample {
  SimTime time;
  WorkerId worker = 0;
  std::int64_t queue_len = 0;
  std::int64_t batch_size = 0;
  std::int64_t pool_used = 0;
  std::int64_t cache_hit_tokens = 0;
  std::int64_t extend_tokens = 0;
  std::int64_t output_tokens = 0;
};

/// Callbacks from a worker into whatever is recording the run.
struct WorkerObserver {
  std::function<void(const Request&, std::int64_t match_len, std::int64_t extend)> on_admit;
  std::function<void(ClientId, Service quantum)> on_refill;
  std::function<void(const Evicted&)> on_evict;
};

/// One simulated data-parallel replica: waiting queue, running batch, KV
/// prefix cache and the local policy that decides admission order.
class Worker {
 public:
  Worker(WorkerConfig config, std::unique_ptr<LocalPolicy> policy, WorkerObserver observer = {});

  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  WorkerId id() const { return config_.id; }
  const WorkerConfig& config() const { return config_; }

  void enqueue(const Request& r, SimTime now);

  /// Starts a step when none is in flight: runs an admission pass if due,
  /// then returns the step's completion time, or nullopt if the batch is empty.
  std::optional<SimTime> try_start_step(SimTime now);

  /// Completes the in-flight step at `now`.
  StepResult complete_step(SimTime now);

  bool can_add(const RequestView& r) const;
  bool step_in_flight() const { return in_flight_; }
  bool idle() const { return !in_flight_; }
  /// Some waiting request passes can_add.
  bool has_admissible() const;

  std::int64_t queue_len() const { return static_cast<std::int64_t>(queue_.size()); }
  std::int64_t batch_size() const { return static_cast<std::int64_t>(batch_.size()); }
  /// Pinned prefix tokens (counted once) plus per-request output reservations.
  std::int64_t footprint() const;
  std::int64_t queued_count(ClientId c) const;
  std::int64_t running_count(ClientId c) const;

  const std::vector<BatchEntry>& batch() const { return batch_; }
  const std::vector<const Request*>& queue() const { return queue_; }
  const RadixCache& cache() const { return cache_; }
  RadixCache& cache() { return cache_; }
  LocalPolicy& policy() { return *policy_; }
  const LocalPolicy& policy() const { return *policy_; }
  WorkerSample sample(SimTime now) const;

  SimTime last_step_latency() const { return last_latency_; }
  std::int64_t last_step_extend() const { return last_extend_; }

 private:
  class Context;
  std::int64_t admit(const RequestView& r);
  std::int64_t reserve_for(const BatchEntry& e) const;
  std::int64_t generation_target(const Request& r) const;

  WorkerConfig config_;
  std::unique_ptr<LocalPolicy> policy_;
  WorkerObserver observer_;
  RadixCache cache_;
  std::vector<const Request*> queue_;
  std::map<ClientId, std::int64_t> queued_per_client_;
  std::vector<BatchEntry> batch_;
  std::map<RequestId, SimTime> first_token_;
  bool in_flight_ = false;
  std::int64_t steps_since_fill_ = 0;
  SimTime now_;
  SimTime last_latency_;
  std::int64_t last_extend_ = 0;
  std::int64_t reserved_output_ = 0;
  std::int64_t cache_hit_tokens_ = 0;
  std::int64_t extend_tokens_ = 0;
  std::int64_t output_tokens_ = 0;
};

}  // namespace fairsched
