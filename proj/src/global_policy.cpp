#include "fairsched/global_policy.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairsched {

WorkerId least_loaded(const std::vector<WorkerId>& candidates, const DispatchContext& ctx) {
  if (candidates.empty()) throw std::logic_error("least_loaded over an empty set");
  WorkerId best = candidates.front();
  for (WorkerId w : candidates) {
    const auto sw = ctx.queue_size(w), sb = ctx.queue_size(best);
    if (sw < sb || (sw == sb && w < best)) best = w;
  }
  return best;
}

// ---- D2LPM ------------------------------------------------------------

std::vector<Service>& D2lpmPolicy::row(ClientId c, std::int32_t workers) {
  auto& r = q_[c];
  if (r.size() < static_cast<std::size_t>(workers)) r.resize(static_cast<std::size_t>(workers), 0);
  return r;
}

void D2lpmPolicy::note(ClientId c, WorkerId w, Service q) {
  auto [it, fresh] = ranges_.try_emplace({c, w}, CounterRange{0, 0});
  it->second.min = std::min(it->second.min, q);
  it->second.max = std::max(it->second.max, q);
}

Service D2lpmPolicy::counter(ClientId c, WorkerId w) const {
  auto it = q_.find(c);
  if (it == q_.end() || static_cast<std::size_t>(w) >= it->second.size()) return 0;
  return it->second[static_cast<std::size_t>(w)];
}

void D2lpmPolicy::set_counter(ClientId c, WorkerId w, Service q) {
  row(c, w + 1)[static_cast<std::size_t>(w)] = q;
  note(c, w, q);
}

std::int64_t D2lpmPolicy::refills(ClientId c) const {
  auto it = refills_.find(c);
  return it == refills_.end() ? 0 : it->second;
}

WorkerId D2lpmPolicy::select_worker(const std::vector<WorkerId>& G, ClientId client,
                                    DispatchContext& ctx) {
  auto& q = row(client, ctx.workers());
  std::vector<WorkerId> avail;
  auto collect = [&] {
    avail.clear();
    for (WorkerId w = 0; w < ctx.workers(); ++w) {
      if (q[static_cast<std::size_t>(w)] > 0) avail.push_back(w);
    }
  };
  collect();
  while (avail.empty()) {
    for (WorkerId w = 0; w < ctx.workers(); ++w) {
      q[static_cast<std::size_t>(w)] += quantum_;
      note(client, w, q[static_cast<std::size_t>(w)]);
    }
    ++refills_[client];
    ctx.on_refill(client, quantum_);
    collect();
  }
  std::vector<WorkerId> cand;
  for (WorkerId w : G) {
    if (std::binary_search(avail.begin(), avail.end(), w)) cand.push_back(w);
  }
  return least_loaded(cand.empty() ? avail : cand, ctx);
}

WorkerId D2lpmPolicy::select(const RequestView& r, const RadixCache::WorkerMatch& match,
                             DispatchContext& ctx) {
  std::vector<WorkerId> G;
  if (match.length > 0) G = match.workers;
  const WorkerId w = select_worker(G, r.client, ctx);
  auto& q = row(r.client, ctx.workers())[static_cast<std::size_t>(w)];
  q -= weights_.extend * r.input_len();
  note(r.client, w, q);
  return w;
}

void D2lpmPolicy::on_finish(ClientId client, WorkerId w, std::int64_t output_tokens) {
  auto& q = row(client, w + 1)[static_cast<std::size_t>(w)];
  q -= weights_.output * output_tokens;
  note(client, w, q);
}

// ---- baselines ----------------------------------------------------------

WorkerId RoundRobinPolicy::select(const RequestView&, const RadixCache::WorkerMatch&,
                                  DispatchContext& ctx) {
  return static_cast<WorkerId>(cursor_++ % ctx.workers());
}

WorkerId PerClientRoundRobinPolicy::select(const RequestView& r, const RadixCache::WorkerMatch&,
                                           DispatchContext& ctx) {
  return static_cast<WorkerId>(cursor_[r.client]++ % ctx.workers());
}

ThresholdRouterPolicy::ThresholdRouterPolicy(double theta) : theta_(theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
}

WorkerId ThresholdRouterPolicy::select(const RequestView& r, const RadixCache::WorkerMatch& match,
                                       DispatchContext& ctx) {
  const double ratio = r.input_len() > 0 ? static_cast<double>(match.length) / r.input_len() : 0.0;
  if (match.length > 0 && !match.workers.empty() && ratio >= theta_) {
    return least_loaded(match.workers, ctx);
  }
  std::vector<WorkerId> all(static_cast<std::size_t>(ctx.workers()));
  for (WorkerId w = 0; w < ctx.workers(); ++w) all[static_cast<std::size_t>(w)] = w;
  return least_loaded(all, ctx);
}

std::unique_ptr<GlobalPolicy> make_global_policy(const GlobalPolicySpec& spec, CostWeights weights) {
  if (spec.kind == "d2lpm") {
    if (spec.quantum <= 0) throw InvalidArgument("d2lpm quantum must be positive");
    return std::make_unique<D2lpmPolicy>(spec.quantum, weights);
  }
  if (spec.kind == "rr") return std::make_unique<RoundRobinPolicy>();
  if (spec.kind == "client_rr") return std::make_unique<PerClientRoundRobinPolicy>();
  if (spec.kind == "threshold") return std::make_unique<ThresholdRouterPolicy>(spec.theta);
  throw InvalidArgument("unknown global policy '" + spec.kind + "'");
}

// ---- dispatcher ---------------------------------------------------------

class Dispatcher::Context final : public DispatchContext {
 public:
  Context(const Dispatcher& d, const RefillHook& hook) : d_(d), hook_(hook) {}
  std::int32_t workers() const override { return d_.workers_; }
  std::int64_t queue_size(WorkerId w) const override { return d_.queue_size(w); }
  void on_refill(ClientId c, Service quantum) override {
    if (hook_) hook_(c, quantum);
  }

 private:
  const Dispatcher& d_;
  const RefillHook& hook_;
};

Dispatcher::Dispatcher(std::int32_t workers, std::unique_ptr<GlobalPolicy> policy)
    : workers_(workers),
      policy_(std::move(policy)),
      index_(RadixCache::global_index()),
      s_(static_cast<std::size_t>(workers), 0) {
  if (workers < 1) throw InvalidArgument("need at least one worker");
  if (!policy_) throw InvalidArgument("dispatcher needs a global policy");
}

DispatchRecord Dispatcher::dispatch(const Request& r, SimTime now, const RefillHook& on_refill) {
  auto match = index_.longest_match_workers(r.input);
  Context ctx(*this, on_refill);
  const WorkerId w = policy_->select(view_of(r), match, ctx);
  if (w < 0 || w >= workers_) throw std::logic_error("global policy chose an invalid worker");
  ++s_[static_cast<std::size_t>(w)];
  index_.insert(r.input, now, w);
  return {r.id, r.client, w, std::move(match.workers), match.length, now};
}

void Dispatcher::on_finish(ClientId client, WorkerId w, std::int64_t output_tokens) {
  auto& s = s_.at(static_cast<std::size_t>(w));
  if (s <= 0) throw std::logic_error("finish at a worker with nothing outstanding");
  --s;
  policy_->on_finish(client, w, output_tokens);
}

void Dispatcher::on_evict(const Evicted& ev, WorkerId w, SimTime evicted_at) {
  index_.evict_notify(ev.prefix, w, ev.keep_len, evicted_at);
}

}  // namespace fairsched
