#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fairsched/local_policy.hpp"
#include "fairsched/radix_cache.hpp"
#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

struct DispatchRecord {
  RequestId request = 0;
  ClientId client = 0;
  WorkerId worker = 0;
  std::vector<WorkerId> matched;  // G
  std::int64_t match_len = 0;
  SimTime time;
};

/// What a global policy may look at when routing one request.
class DispatchContext {
 public:
  virtual ~DispatchContext() = default;
  virtual std::int32_t workers() const = 0;
  /// s_w: dispatched and not yet finished at worker w.
  virtual std::int64_t queue_size(WorkerId w) const = 0;
  virtual void on_refill(ClientId client, Service quantum) { (void)client, (void)quantum; }
};

class GlobalPolicy {
 public:
  virtual ~GlobalPolicy() = default;
  virtual std::string_view name() const = 0;
  /// `match` is the global index lookup for r (length and worker set G).
  virtual WorkerId select(const RequestView& r, const RadixCache::WorkerMatch& match,
                          DispatchContext& ctx) = 0;
  virtual void on_finish(ClientId client, WorkerId w, std::int64_t output_tokens) {
    (void)client, (void)w, (void)output_tokens;
  }
};

/// Lowest s_w among `candidates`, ties to the lower worker id.
WorkerId least_loaded(const std::vector<WorkerId>& candidates, const DispatchContext& ctx);

/// Double deficit dispatch. Each (client, worker) pair holds a counter; a
/// client is routed to a worker caching its prefix while that counter is
/// positive, else to the least loaded worker that still has credit.
class D2lpmPolicy final : public GlobalPolicy {
 public:
  D2lpmPolicy(Service quantum, CostWeights weights) : quantum_(quantum), weights_(weights) {}

  std::string_view name() const override { return "d2lpm"; }
  WorkerId select(const RequestView& r, const RadixCache::WorkerMatch& match,
                  DispatchContext& ctx) override;
  void on_finish(ClientId client, WorkerId w, std::int64_t output_tokens) override;

  /// SelectWorker: refills this client's counters while none is positive.
  WorkerId select_worker(const std::vector<WorkerId>& G, ClientId client, DispatchContext& ctx);

  Service quantum() const { return quantum_; }
  Service counter(ClientId c, WorkerId w) const;
  void set_counter(ClientId c, WorkerId w, Service q);
  const std::map<std::pair<ClientId, WorkerId>, CounterRange>& ranges() const { return ranges_; }
  std::int64_t refills(ClientId c) const;

 private:
  std::vector<Service>& row(ClientId c, std::int32_t workers);
  void note(ClientId c, WorkerId w, Service q);

  Service quantum_;
  CostWeights weights_;
  std::map<ClientId, std::vector<Service>> q_;
  std::map<std::pair<ClientId, WorkerId>, CounterRange> ranges_;
  std::map<ClientId, std::int64_t> refills_;
};

class RoundRobinPolicy final : public GlobalPolicy {
 public:
  std::string_view name() const override { return "rr"; }
  WorkerId select(const RequestView& r, const RadixCache::WorkerMatch& match,
                  DispatchContext& ctx) override;

 private:
  std::int64_t cursor_ = 0;
};

class PerClientRoundRobinPolicy final : public GlobalPolicy {
 public:
  std::string_view name() const override { return "client_rr"; }
  WorkerId select(const RequestView& r, const RadixCache::WorkerMatch& match,
                  DispatchContext& ctx) override;

 private:
  std::map<ClientId, std::int64_t> cursor_;
};

/// Prefix-ratio router: when the cached share of the input reaches theta,
/// go to a worker holding the longest match (least loaded among them);
/// otherwise go to the least loaded worker overall.
class ThresholdRouterPolicy final : public GlobalPolicy {
 public:
  explicit ThresholdRouterPolicy(double theta);

  std::string_view name() const override { return "threshold"; }
  WorkerId select(const RequestView& r, const RadixCache::WorkerMatch& match,
                  DispatchContext& ctx) override;

  double theta() const { return theta_; }

 private:
  double theta_;
};

struct GlobalPolicySpec {
  std::string kind = "d2lpm";  // d2lpm | rr | client_rr | threshold
  Service quantum = 0;         // Q_w
  double theta = 0.5;
};

std::unique_ptr<GlobalPolicy> make_global_policy(const GlobalPolicySpec& spec, CostWeights weights);

/// Global scheduler state shared by every policy: the worker-set radix
/// index and the per-worker outstanding counts s_w.
class Dispatcher {
 public:
  Dispatcher(std::int32_t workers, std::unique_ptr<GlobalPolicy> policy);

  using RefillHook = std::function<void(ClientId, Service)>;

  /// Routes r, bumps s_w and records r's input in the index under the chosen worker.
  DispatchRecord dispatch(const Request& r, SimTime now, const RefillHook& on_refill = {});
  void on_finish(ClientId client, WorkerId w, std::int64_t output_tokens);
  void on_evict(const Evicted& ev, WorkerId w, SimTime evicted_at);

  std::int32_t workers() const { return workers_; }
  std::int64_t queue_size(WorkerId w) const { return s_.at(static_cast<std::size_t>(w)); }
  const RadixCache& index() const { return index_; }
  GlobalPolicy& policy() { return *policy_; }
  const GlobalPolicy& policy() const { return *policy_; }

 private:
  class Context;

  std::int32_t workers_;
  std::unique_ptr<GlobalPolicy> policy_;
  RadixCache index_;
  std::vector<std::int64_t> s_;
};

}  // namespace fairsched
