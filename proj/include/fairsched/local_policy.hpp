#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

/// What a local policy sees of its worker during one admission pass.
class AdmissionContext {
 public:
  virtual ~AdmissionContext() = default;

  /// Waiting requests in arrival order.
  virtual std::vector<RequestView> waiting() const = 0;
  virtual std::int64_t queued_count(ClientId client) const = 0;
  /// Clients with at least one waiting request, ascending.
  virtual std::vector<ClientId> queued_clients() const = 0;
  /// Length of the cached prefix this request would reuse right now.
  virtual std::int64_t matched_prefix(const RequestView& r) const = 0;
  virtual bool can_add(const RequestView& r) const = 0;
  /// Moves `r` into the running batch; returns its extend length.
  virtual std::int64_t admit(const RequestView& r) = 0;
  /// Called by deficit-based policies whenever a client's counter is refilled.
  virtual void on_refill(ClientId client, Service quantum) { (void)client, (void)quantum; }
};

struct ClientTokens {
  ClientId client = 0;
  std::int64_t tokens = 0;
};

class LocalPolicy {
 public:
  virtual ~LocalPolicy() = default;
  virtual std::string_view name() const = 0;

  /// A request joined this worker's waiting queue; `ctx.waiting()` already includes it.
  virtual void on_enqueue(const RequestView& r, const AdmissionContext& ctx) { (void)r, (void)ctx; }
  /// One admission pass at a batching boundary.
  virtual void fill_batch(AdmissionContext& ctx) = 0;
  /// A forward step finished and generated these tokens.
  virtual void on_step(std::span<const ClientTokens> generated) { (void)generated; }
};

/// Stable LPM order: longest match first, then arrival, then request id.
std::vector<RequestView> lpm_order(std::vector<RequestView> queue,
                                   const std::function<std::int64_t(const RequestView&)>& match);

class FcfsPolicy final : public LocalPolicy {
 public:
  std::string_view name() const override { return "fcfs"; }
  void fill_batch(AdmissionContext& ctx) override;
};

class LpmPolicy final : public LocalPolicy {
 public:
  std::string_view name() const override { return "lpm"; }
  void fill_batch(AdmissionContext& ctx) override;
};

struct CounterRange {
  Service min = 0;
  Service max = 0;
};

/// Deficit Longest Prefix Match.
///
/// Requests are scanned in LPM order and admitted only while their client's
/// deficit counter is positive. Admission charges w_e per extend token and
/// every forward step charges w_q per generated token. When every client
/// that still has queued requests is out of credit, all known clients with
/// a non-positive counter receive one quantum.
class DlpmPolicy final : public LocalPolicy {
 public:
  DlpmPolicy(Service quantum, CostWeights weights) : quantum_(quantum), weights_(weights) {}

  std::string_view name() const override { return "dlpm"; }
  void on_enqueue(const RequestView& r, const AdmissionContext& ctx) override;
  void fill_batch(AdmissionContext& ctx) override;
  void on_step(std::span<const ClientTokens> generated) override;

  /// Refills if no queued client holds credit. Returns whether it refilled.
  bool check_refill(std::span<const RequestView> queue, AdmissionContext* ctx = nullptr);
  bool check_refill(std::span<const ClientId> queued_clients, AdmissionContext* ctx = nullptr);

  Service quantum() const { return quantum_; }
  Service counter(ClientId c) const;
  void set_counter(ClientId c, Service q);
  const std::vector<ClientId>& clients() const { return clients_; }
  /// Extremes each counter has taken, sampled after every mutation.
  const std::map<ClientId, CounterRange>& ranges() const { return ranges_; }
  std::int64_t refills() const { return refills_; }

 private:
  void join(ClientId c);
  void adjust(ClientId c, Service delta);

  Service quantum_;
  CostWeights weights_;
  std::map<ClientId, Service> q_;
  std::vector<ClientId> clients_;
  std::map<ClientId, CounterRange> ranges_;
  std::int64_t refills_ = 0;
};

/// Virtual Token Counter: serve the queued client with the least service
/// so far. Admission charges w_e per input token (cached or not), steps
/// charge w_q per generated token. A client that becomes active is lifted
/// to the smallest counter among the other active clients.
class VtcPolicy final : public LocalPolicy {
 public:
  explicit VtcPolicy(CostWeights weights) : weights_(weights) {}

  std::string_view name() const override { return "vtc"; }
  void on_enqueue(const RequestView& r, const AdmissionContext& ctx) override;
  void fill_batch(AdmissionContext& ctx) override;
  void on_step(std::span<const ClientTokens> generated) override;

  Service counter(ClientId c) const;

 private:
  CostWeights weights_;
  std::map<ClientId, Service> counter_;
};

struct LocalPolicySpec {
  std::string kind = "dlpm";  // fcfs | lpm | dlpm | vtc
  Service quantum = 0;
};

std::unique_ptr<LocalPolicy> make_local_policy(const LocalPolicySpec& spec, CostWeights weights);

}  // namespace fairsched
