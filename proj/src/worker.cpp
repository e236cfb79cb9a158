#include "fairsched/worker.hpp"

#include <algorithm>
#include <stdexcept>

namespace fairsched {

SimTime StepTiming::step_latency(std::int64_t extend_tokens, std::int64_t batch_size) const {
  if (extend_tokens < 0 || batch_size < 0) throw InvalidArgument("negative step latency input");
  return SimTime::from_us(fixed.us() + per_prefill_token.us() * extend_tokens +
                          per_decode_request.us() * batch_size);
}

class Worker::Context final : public AdmissionContext {
 public:
  explicit Context(Worker& w) : w_(w) {}

  std::vector<RequestView> waiting() const override {
    std::vector<RequestView> out;
    out.reserve(w_.queue_.size());
    for (const Request* r : w_.queue_) out.push_back(view_of(*r));
    return out;
  }
  std::int64_t queued_count(ClientId c) const override { return w_.queued_count(c); }
  std::vector<ClientId> queued_clients() const override {
    std::vector<ClientId> out;
    for (const auto& [c, n] : w_.queued_per_client_) {
      if (n > 0) out.push_back(c);
    }
    return out;
  }
  std::int64_t matched_prefix(const RequestView& r) const override {
    return w_.cache_.peek(r.input).length;
  }
  bool can_add(const RequestView& r) const override { return w_.can_add(r); }
  std::int64_t admit(const RequestView& r) override { return w_.admit(r); }
  void on_refill(ClientId c, Service quantum) override {
    if (w_.observer_.on_refill) w_.observer_.on_refill(c, quantum);
  }

 private:
  Worker& w_;
};

Worker::Worker(WorkerConfig config, std::unique_ptr<LocalPolicy> policy, WorkerObserver observer)
    : config_(config),
      policy_(std::move(policy)),
      observer_(std::move(observer)),
      cache_(config.cache_capacity) {
  if (!policy_) throw InvalidArgument("worker needs a local policy");
  if (config_.output_reserve < 0) throw InvalidArgument("output_reserve must be >= 0");
  if (config_.admission_interval < 1) throw InvalidArgument("admission_interval must be >= 1");
}

void Worker::enqueue(const Request& r, SimTime now) {
  now_ = now;
  queue_.push_back(&r);
  ++queued_per_client_[r.client];
  Context ctx(*this);
  policy_->on_enqueue(view_of(r), ctx);
}

std::int64_t Worker::queued_count(ClientId c) const {
  auto it = queued_per_client_.find(c);
  return it == queued_per_client_.end() ? 0 : it->second;
}

std::int64_t Worker::running_count(ClientId c) const {
  return std::count_if(batch_.begin(), batch_.end(),
                       [c](const BatchEntry& e) { return e.request->client == c; });
}

std::int64_t Worker::reserve_for(const BatchEntry& e) const {
  return std::max(e.generated, config_.output_reserve);
}

std::int64_t Worker::generation_target(const Request& r) const {
  return std::max<std::int64_t>(1, std::min(r.true_output_len, config_.max_output));
}

std::int64_t Worker::footprint() const { return cache_.pinned_tokens() + reserved_output_; }

bool Worker::can_add(const RequestView& r) const {
  const std::int64_t base = footprint() + config_.output_reserve;
  auto peek = cache_.peek(r.input);
  const std::int64_t newly_pinned = r.input_len() - peek.pinned_length;
  return base + newly_pinned <= config_.batch_tokens &&
         cache_.pinned_tokens() + newly_pinned <= cache_.capacity();
}

bool Worker::has_admissible() const {
  return std::any_of(queue_.begin(), queue_.end(),
                     [this](const Request* r) { return can_add(view_of(*r)); });
}

std::int64_t Worker::admit(const RequestView& view) {
  auto it = std::find_if(queue_.begin(), queue_.end(),
                         [&](const Request* r) { return r->id == view.id; });
  if (it == queue_.end()) throw std::logic_error("admit of a request that is not waiting");
  const Request& r = **it;
  queue_.erase(it);
  --queued_per_client_[r.client];

  auto match = cache_.match_prefix(r.input, now_);
  auto inserted = cache_.insert(r.input, now_);
  cache_.pin(inserted.node);
  for (const auto& ev : inserted.evicted) {
    if (observer_.on_evict) observer_.on_evict(ev);
  }

  BatchEntry entry;
  entry.request = &r;
  entry.pinned = inserted.node;
  entry.match_len = match.length;
  entry.prefill_remaining = r.input_len() - match.length;
  batch_.push_back(entry);
  reserved_output_ += reserve_for(entry);

  cache_hit_tokens_ += match.length;
  extend_tokens_ += entry.prefill_remaining;
  if (observer_.on_admit) observer_.on_admit(r, match.length, entry.prefill_remaining);
  return entry.prefill_remaining;
}

std::optional<SimTime> Worker::try_start_step(SimTime now) {
  if (in_flight_) return std::nullopt;
  now_ = now;
  if (batch_.empty() || steps_since_fill_ >= config_.admission_interval) {
    Context ctx(*this);
    policy_->fill_batch(ctx);
    steps_since_fill_ = 0;
  }
  if (batch_.empty()) return std::nullopt;

  std::int64_t extend = 0;
  for (auto& e : batch_) {
    e.prefill_this_step = config_.chunk_size > 0 ? std::min(e.prefill_remaining, config_.chunk_size)
                                                 : e.prefill_remaining;
    extend += e.prefill_this_step;
  }
  last_extend_ = extend;
  last_latency_ = config_.timing.step_latency(extend, batch_size());
  in_flight_ = true;
  return now + last_latency_;
}

StepResult Worker::complete_step(SimTime now) {
  if (!in_flight_) throw std::logic_error("complete_step without a step in flight");
  in_flight_ = false;
  now_ = now;
  ++steps_since_fill_;

  StepResult result;
  result.batch_size = batch_size();
  std::map<ClientId, std::int64_t> per_client;
  for (auto& e : batch_) {
    e.prefill_remaining -= e.prefill_this_step;
    e.prefill_this_step = 0;
    if (e.prefill_remaining > 0) continue;
    if (e.generated == 0) first_token_[e.request->id] = now;
    if (++e.generated > config_.output_reserve) ++reserved_output_;
    ++per_client[e.request->client];
  }
  for (const auto& [c, n] : per_client) {
    result.generated.push_back({c, n});
    output_tokens_ += n;
  }
  policy_->on_step(result.generated);

  std::vector<BatchEntry> still_running;
  still_running.reserve(batch_.size());
  for (auto& e : batch_) {
    if (e.generated >= generation_target(*e.request)) {
      cache_.unpin(e.pinned);
      reserved_output_ -= reserve_for(e);
      auto ft = first_token_.extract(e.request->id);
      result.finished.push_back({e.request, e.generated, ft.empty() ? now : ft.mapped()});
    } else {
      still_running.push_back(e);
    }
  }
  batch_ = std::move(still_running);
  return result;
}

WorkerSample Worker::sample(SimTime now) const {
  return {now,           config_.id,        queue_len(),    batch_size(),
          footprint(),   cache_hit_tokens_, extend_tokens_, output_tokens_};
}

}  // namespace fairsched
