#include "fairsched/local_policy.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace fairsched {

std::vector<RequestView> lpm_order(std::vector<RequestView> queue,
                                   const std::function<std::int64_t(const RequestView&)>& match) {
  std::vector<std::pair<std::int64_t, RequestView>> keyed;
  keyed.reserve(queue.size());
  for (const auto& r : queue) keyed.emplace_back(match(r), r);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    if (x.second.arrival != y.second.arrival) return x.second.arrival < y.second.arrival;
    return x.second.id < y.second.id;
  });
  for (std::size_t i = 0; i < keyed.size(); ++i) queue[i] = keyed[i].second;
  return queue;
}

void FcfsPolicy::fill_batch(AdmissionContext& ctx) {
  for (const auto& r : ctx.waiting()) {
    if (!ctx.can_add(r)) break;
    ctx.admit(r);
  }
}

void LpmPolicy::fill_batch(AdmissionContext& ctx) {
  auto order = lpm_order(ctx.waiting(), [&](const RequestView& r) { return ctx.matched_prefix(r); });
  for (const auto& r : order) {
    if (ctx.can_add(r)) ctx.admit(r);
  }
}

// ---- DLPM -------------------------------------------------------------

Service DlpmPolicy::counter(ClientId c) const {
  auto it = q_.find(c);
  return it == q_.end() ? 0 : it->second;
}

void DlpmPolicy::set_counter(ClientId c, Service q) {
  join(c);
  q_[c] = q;
  auto& range = ranges_[c];
  range.min = std::min(range.min, q);
  range.max = std::max(range.max, q);
}

void DlpmPolicy::join(ClientId c) {
  if (q_.contains(c)) return;
  q_[c] = 0;
  clients_.push_back(c);
  ranges_[c] = {0, 0};
}

void DlpmPolicy::adjust(ClientId c, Service delta) { set_counter(c, counter(c) + delta); }

void DlpmPolicy::on_enqueue(const RequestView& r, const AdmissionContext&) { join(r.client); }

bool DlpmPolicy::check_refill(std::span<const ClientId> queued_clients, AdmissionContext* ctx) {
  for (ClientId c : queued_clients) {
    if (counter(c) > 0) return false;
  }
  for (ClientId c : clients_) {
    if (counter(c) <= 0) {
      adjust(c, quantum_);
      if (ctx != nullptr) ctx->on_refill(c, quantum_);
    }
  }
  ++refills_;
  return true;
}

bool DlpmPolicy::check_refill(std::span<const RequestView> queue, AdmissionContext* ctx) {
  std::set<ClientId> queued;
  for (const auto& r : queue) queued.insert(r.client);
  std::vector<ClientId> ids(queued.begin(), queued.end());
  return check_refill(ids, ctx);
}

void DlpmPolicy::fill_batch(AdmissionContext& ctx) {
  auto order = lpm_order(ctx.waiting(), [&](const RequestView& r) { return ctx.matched_prefix(r); });
  std::vector<char> admitted(order.size(), 0);
  std::map<ClientId, std::int64_t> remaining;
  for (const auto& r : order) ++remaining[r.client];
  auto queued_clients = [&] {
    std::vector<ClientId> ids;
    for (const auto& [c, n] : remaining) {
      if (n > 0) ids.push_back(c);
    }
    return ids;
  };

  // Repeat passes until one neither admits nor refills; a pass that only
  // refilled may unblock requests earlier in the order.
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (admitted[i]) continue;
      const RequestView& r = order[i];
      if (counter(r.client) <= 0) {
        auto ids = queued_clients();
        progress |= check_refill(ids, &ctx);
      }
      if (counter(r.client) > 0 && ctx.can_add(r)) {
        std::int64_t extend = ctx.admit(r);
        adjust(r.client, -weights_.extend * extend);
        admitted[i] = 1;
        --remaining[r.client];
        progress = true;
      }
    }
  }
}

void DlpmPolicy::on_step(std::span<const ClientTokens> generated) {
  for (const auto& g : generated) {
    if (g.tokens > 0) adjust(g.client, -weights_.output * g.tokens);
  }
}

// ---- VTC --------------------------------------------------------------

Service VtcPolicy::counter(ClientId c) const {
  auto it = counter_.find(c);
  return it == counter_.end() ? 0 : it->second;
}

void VtcPolicy::on_enqueue(const RequestView& r, const AdmissionContext& ctx) {
  if (ctx.queued_count(r.client) > 1) return;
  Service lift = std::numeric_limits<Service>::max();
  for (ClientId c : ctx.queued_clients()) {
    if (c != r.client) lift = std::min(lift, counter(c));
  }
  Service& own = counter_[r.client];
  if (lift != std::numeric_limits<Service>::max()) own = std::max(own, lift);
}

void VtcPolicy::fill_batch(AdmissionContext& ctx) {
  auto waiting = ctx.waiting();
  std::vector<char> taken(waiting.size(), 0);
  while (true) {
    // Queued client with the smallest counter, ties to the lower id.
    const RequestView* head = nullptr;
    std::size_t head_idx = 0;
    for (std::size_t i = 0; i < waiting.size(); ++i) {
      if (taken[i]) continue;
      const RequestView& r = waiting[i];
      if (head == nullptr || counter(r.client) < counter(head->client) ||
          (counter(r.client) == counter(head->client) && r.client < head->client)) {
        head = &r;
        head_idx = i;
      }
    }
    if (head == nullptr || !ctx.can_add(*head)) return;
    ctx.admit(*head);
    counter_[head->client] += weights_.extend * head->input_len();
    taken[head_idx] = 1;
  }
}

void VtcPolicy::on_step(std::span<const ClientTokens> generated) {
  for (const auto& g : generated) counter_[g.client] += weights_.output * g.tokens;
}

std::unique_ptr<LocalPolicy> make_local_policy(const LocalPolicySpec& spec, CostWeights weights) {
  if (spec.kind == "fcfs") return std::make_unique<FcfsPolicy>();
  if (spec.kind == "lpm") return std::make_unique<LpmPolicy>();
  if (spec.kind == "dlpm") {
    if (spec.quantum <= 0) throw InvalidArgument("dlpm quantum must be positive");
    return std::make_unique<DlpmPolicy>(spec.quantum, weights);
  }
  if (spec.kind == "vtc") return std::make_unique<VtcPolicy>(weights);
  throw InvalidArgument("unknown local policy '" + spec.kind + "'");
}

}  // namespace fairsched
