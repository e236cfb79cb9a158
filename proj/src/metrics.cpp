#include "fairsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fairsched {

double jain_index(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("jain_index of an empty list");
  double sum = 0, sq = 0;
  for (double v : values) {
    if (!(v >= 0) || !std::isfinite(v)) throw InvalidArgument("jain_index needs finite non-negative values");
    sum += v;
    sq += v * v;
  }
  if (sum == 0) throw InvalidArgument("jain_index is undefined when every value is zero");
  return sum * sum / (static_cast<double>(values.size()) * sq);
}

SimTime percentile(std::vector<SimTime> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty list");
  if (!(p > 0 && p <= 100)) throw InvalidArgument("percentile p must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double cache_hit_rate(const EventLog& log) {
  std::int64_t matched = 0, input = 0;
  for (const auto& r : log.records()) {
    if (r.type != RecordType::Admit) continue;
    input += r.v1;
    matched += r.v2;
  }
  return input == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(input);
}

// ---- replay -------------------------------------------------------------

LogReplay::LogReplay(const EventLog& log) : meta_(log.meta) {
  events_ = meta_.events;
  for (const auto& r : log.records()) events_ = std::max<std::uint64_t>(events_, r.event + 1);
  clients_ = meta_.clients;
  for (const auto& r : log.records()) clients_ = std::max(clients_, r.client + 1);
  const std::int32_t workers = std::max(1, meta_.params.workers);
  const auto n = static_cast<std::size_t>(events_);
  const auto nc = static_cast<std::size_t>(clients_);
  times_.assign(n, SimTime{});
  cum_.assign(nc, std::vector<Service>(n, 0));
  anywhere_.assign(nc, std::vector<std::uint8_t>(n, 0));
  everywhere_.assign(nc, std::vector<std::uint8_t>(n, 0));

  const auto& w = meta_.params.weights;
  std::vector<std::vector<std::int64_t>> pending(nc, std::vector<std::int64_t>(static_cast<std::size_t>(workers), 0));
  std::vector<std::int32_t> nonzero(nc, 0);
  std::vector<Service> running_total(nc, 0);
  auto bump = [&](ClientId c, WorkerId wk, std::int64_t delta) {
    auto& p = pending[static_cast<std::size_t>(c)][static_cast<std::size_t>(wk)];
    const bool before = p > 0;
    p += delta;
    if (p < 0) throw std::runtime_error("event log admits a request that was never dispatched");
    const bool after = p > 0;
    if (before != after) nonzero[static_cast<std::size_t>(c)] += after ? 1 : -1;
  };

  const auto& recs = log.records();
  std::size_t i = 0;
  for (std::uint64_t e = 0; e < events_; ++e) {
    while (i < recs.size() && recs[i].event == e) {
      const auto& r = recs[i];
      switch (r.type) {
        case RecordType::Event: times_[e] = r.time; break;
        case RecordType::Dispatch: bump(r.client, r.worker, +1); break;
        case RecordType::Admit:
          bump(r.client, r.worker, -1);
          running_total[static_cast<std::size_t>(r.client)] += w.extend * r.v3;
          break;
        case RecordType::StepEnd:
          for (std::size_t k = 0; k + 1 < r.list.size(); k += 2) {
            running_total.at(static_cast<std::size_t>(r.list[k])) += w.output * r.list[k + 1];
          }
          break;
        default: break;
      }
      ++i;
    }
    if (e > 0 && times_[e] < times_[e - 1]) times_[e] = times_[e - 1];
    for (std::size_t c = 0; c < nc; ++c) {
      cum_[c][e] = running_total[c];
      anywhere_[c][e] = nonzero[c] > 0;
      everywhere_[c][e] = nonzero[c] == workers;
    }
  }
}

Service LogReplay::cumulative(ClientId c, std::uint64_t event) const {
  return cum_.at(static_cast<std::size_t>(c)).at(event);
}

bool LogReplay::backlogged(ClientId c, std::uint64_t event, BacklogScope scope) const {
  const auto& m = scope == BacklogScope::Anywhere ? anywhere_ : everywhere_;
  return m.at(static_cast<std::size_t>(c)).at(event) != 0;
}

std::vector<BacklogRun> LogReplay::backlog_runs(ClientId c, BacklogScope scope) const {
  const auto& m = (scope == BacklogScope::Anywhere ? anywhere_ : everywhere_).at(static_cast<std::size_t>(c));
  std::vector<BacklogRun> out;
  for (std::uint64_t e = 0; e < events_; ++e) {
    if (!m[e]) continue;
    if (!out.empty() && out.back().last + 1 == e) {
      out.back().last = e;
      out.back().t_last = times_[e];
    } else {
      out.push_back({e, e, times_[e], times_[e]});
    }
  }
  return out;
}

std::vector<BacklogRun> backlogged_intervals(ClientId client, const EventLog& log, BacklogScope scope) {
  LogReplay replay(log);
  if (client < 0 || client >= replay.clients()) return {};
  return replay.backlog_runs(client, scope);
}

// ---- service bounds -----------------------------------------------------

BoundReport BoundReport::inapplicable(std::string check, std::string why) {
  BoundReport r;
  r.check = std::move(check);
  r.witness = std::move(why);
  return r;
}

namespace {

std::string window_text(const LogReplay& rp, std::uint64_t i, std::uint64_t j) {
  std::ostringstream os;
  os << "events (" << i << ';' << j << "] t=[" << rp.time_of(i).us() << ';' << rp.time_of(j).us() << "]us";
  return os.str();
}

void finish(BoundReport& r) {
  r.margin = r.bound - r.measured;
  r.pass = !r.applicable || r.measured <= r.bound;
}

/// max over i < j inside runs where `both(e)` holds of |D(j) - D(i)| (two_sided)
/// or D(j) - D(i) (one sided), D(e) = cum_a(e) - cum_b(e).
struct Gap {
  Service value = 0;
  std::uint64_t i = 0, j = 0;
  bool any = false;
};

template <class Mask>
Gap scan_gap(const LogReplay& rp, ClientId a, ClientId b, const Mask& inside, bool two_sided) {
  Gap best;
  const auto& ca = rp.cumulative(a);
  const auto& cb = rp.cumulative(b);
  bool in_run = false;
  Service lo = 0, hi = 0;
  std::uint64_t lo_at = 0, hi_at = 0;
  for (std::uint64_t e = 0; e < rp.events(); ++e) {
    if (!inside(e)) {
      in_run = false;
      continue;
    }
    const Service d = ca[e] - cb[e];
    if (!in_run) {
      in_run = true;
      lo = hi = d;
      lo_at = hi_at = e;
      best.any = true;
      continue;
    }
    if (d - lo > best.value) best = {d - lo, lo_at, e, true};
    if (two_sided && hi - d > best.value) best = {hi - d, hi_at, e, true};
    if (d < lo) lo = d, lo_at = e;
    if (d > hi) hi = d, hi_at = e;
  }
  return best;
}

BoundReport pair_report(const LogReplay& rp, const std::string& check, ClientId f, ClientId g,
                        BacklogScope scope, bool both_backlogged, Service bound) {
  BoundReport r;
  r.check = check;
  r.subject = "f=" + std::to_string(f) + " g=" + std::to_string(g);
  r.bound = static_cast<double>(bound);
  Gap gap;
  if (both_backlogged) {
    gap = scan_gap(rp, f, g,
                   [&](std::uint64_t e) { return rp.backlogged(f, e, scope) && rp.backlogged(g, e, scope); },
                   true);
  } else {
    gap = scan_gap(rp, g, f, [&](std::uint64_t e) { return rp.backlogged(f, e, scope); }, false);
  }
  r.applicable = gap.any;
  r.measured = static_cast<double>(gap.value);
  if (gap.any) r.witness = window_text(rp, gap.i, gap.j);
  finish(r);
  return r;
}

Service local_bound(const RunMeta& m) { return 2 * (m.U + m.quantum_u); }

BoundReport worst_of(std::vector<BoundReport> all, const std::string& check) {
  BoundReport out = BoundReport::inapplicable(check, "no client pair was backlogged together");
  for (auto& r : all) {
    if (!r.applicable) continue;
    if (!out.applicable || r.pass < out.pass || (r.pass == out.pass && r.margin < out.margin)) out = r;
  }
  out.check = check;
  return out;
}

BoundReport all_pairs(const LogReplay& rp, const std::string& check, BacklogScope scope,
                      bool both_backlogged, Service bound) {
  std::vector<BoundReport> all;
  for (ClientId f = 0; f < rp.clients(); ++f) {
    for (ClientId g = 0; g < rp.clients(); ++g) {
      if (f == g || (both_backlogged && g < f)) continue;
      all.push_back(pair_report(rp, check, f, g, scope, both_backlogged, bound));
    }
  }
  return worst_of(std::move(all), check);
}

}  // namespace

BoundReport verify_service_bound_local(const LogReplay& rp, ClientId f, ClientId g) {
  return pair_report(rp, "service_bound_local", f, g, BacklogScope::Anywhere, true, local_bound(rp.meta()));
}

BoundReport verify_backlogged_vs_any_local(const LogReplay& rp, ClientId f, ClientId g) {
  return pair_report(rp, "backlog_vs_any_local", f, g, BacklogScope::Anywhere, false,
                     local_bound(rp.meta()));
}

BoundReport verify_service_bound_local_all(const LogReplay& rp) {
  return all_pairs(rp, "service_bound_local", BacklogScope::Anywhere, true, local_bound(rp.meta()));
}

BoundReport verify_backlogged_vs_any_local_all(const LogReplay& rp) {
  return all_pairs(rp, "backlog_vs_any_local", BacklogScope::Anywhere, false, local_bound(rp.meta()));
}

BoundReport verify_service_bound_global(const LogReplay& rp) {
  const auto& m = rp.meta();
  return all_pairs(rp, "service_bound_global", BacklogScope::Everywhere, true,
                   m.params.workers * local_bound(m));
}

BoundReport verify_backlogged_vs_any_global(const LogReplay& rp) {
  const auto& m = rp.meta();
  return all_pairs(rp, "backlog_vs_any_global", BacklogScope::Everywhere, false,
                   m.params.workers * local_bound(m));
}

// ---- latency ------------------------------------------------------------

std::optional<double> capacity_lower_bound(const EventLog& log, SimTime width) {
  if (width.us() <= 0) throw InvalidArgument("capacity window must be positive");
  const auto& w = log.meta.params.weights;
  struct Span {
    SimTime begin, end;
  };
  std::map<WorkerId, std::vector<Span>> busy;
  std::map<WorkerId, std::vector<std::pair<SimTime, Service>>> service;
  std::map<WorkerId, SimTime> open;
  for (const auto& r : log.records()) {
    switch (r.type) {
      case RecordType::StepStart: {
        auto& spans = busy[r.worker];
        if (spans.empty() || spans.back().end != r.time) {
          spans.push_back({r.time, r.time});
        }
        open[r.worker] = r.time;
        break;
      }
      case RecordType::StepEnd: {
        busy[r.worker].back().end = r.time;
        Service s = 0;
        for (std::size_t k = 0; k + 1 < r.list.size(); k += 2) s += w.output * r.list[k + 1];
        if (s > 0) service[r.worker].emplace_back(r.time, s);
        break;
      }
      case RecordType::Admit:
        if (r.v3 > 0) service[r.worker].emplace_back(r.time, w.extend * r.v3);
        break;
      default: break;
    }
  }
  std::optional<double> best;
  for (const auto& [wk, spans] : busy) {
    const auto& entries = service[wk];
    std::vector<Service> prefix(entries.size() + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) prefix[k + 1] = prefix[k] + entries[k].second;
    auto sum_in = [&](SimTime a, SimTime b) {  // [a, b)
      auto lo = std::lower_bound(entries.begin(), entries.end(), a,
                                 [](const auto& x, SimTime t) { return x.first < t; });
      auto hi = std::lower_bound(entries.begin(), entries.end(), b,
                                 [](const auto& x, SimTime t) { return x.first < t; });
      return prefix[static_cast<std::size_t>(hi - entries.begin())] -
             prefix[static_cast<std::size_t>(lo - entries.begin())];
    };
    for (const auto& sp : spans) {
      if (sp.end - sp.begin < width) continue;
      const SimTime last_start = sp.end - width;
      auto consider = [&](SimTime s) {
        s = std::min(s, last_start);
        const double rate = static_cast<double>(sum_in(s, s + width)) / width.seconds();
        if (!best || rate < *best) best = rate;
      };
      consider(sp.begin);
      for (const auto& [t, units] : entries) {
        if (t < sp.begin) continue;
        if (t >= last_start) break;
        consider(t + SimTime::from_us(1));
      }
    }
  }
  return best;
}

std::vector<LatencyProbeResult> fresh_client_requests(const EventLog& log) {
  std::map<ClientId, std::int64_t> pending, running;
  std::map<RequestId, SimTime> admitted;
  for (const auto& r : log.records()) {
    if (r.type == RecordType::Admit) admitted.emplace(r.request, r.time);
  }
  std::vector<LatencyProbeResult> out;
  for (const auto& r : log.records()) {
    switch (r.type) {
      case RecordType::Arrival:
        if (pending[r.client] == 0 && running[r.client] == 0) {
          LatencyProbeResult p;
          p.request = r.request;
          p.client = r.client;
          p.arrival = r.time;
          auto it = admitted.find(r.request);
          if (it != admitted.end()) p.admit = it->second;
          p.delay = (p.admit ? *p.admit : log.meta.horizon) - r.time;
          out.push_back(p);
        }
        ++pending[r.client];
        break;
      case RecordType::Admit:
        --pending[r.client];
        ++running[r.client];
        break;
      case RecordType::Finish: --running[r.client]; break;
      default: break;
    }
  }
  return out;
}

double latency_bound_seconds(std::int32_t clients, std::int32_t workers, Service U, Service quantum,
                             double capacity) {
  if (!(capacity > 0)) throw InvalidArgument("capacity must be positive");
  const double others = std::max(0, clients - 1);
  if (workers <= 1) return 2.0 * others * static_cast<double>(quantum + U) / capacity;
  return others * workers * static_cast<double>(2 * U + 2 * quantum) / capacity;
}

BoundReport verify_latency_bound(const EventLog& log, SimTime window) {
  const std::string check = "latency_bound";
  auto probes = fresh_client_requests(log);
  if (probes.empty()) return BoundReport::inapplicable(check, "no fresh-client requests");
  auto a = capacity_lower_bound(log, window);
  if (!a || *a <= 0) return BoundReport::inapplicable(check, "no busy window long enough to measure capacity");
  const auto& m = log.meta;
  BoundReport r;
  r.check = check;
  r.applicable = true;
  r.bound = latency_bound_seconds(m.clients, m.params.workers, m.U, m.quantum_u, *a);
  const LatencyProbeResult* worst = &probes.front();
  for (const auto& p : probes) {
    if (p.delay > worst->delay) worst = &p;
  }
  r.measured = worst->delay.seconds();
  r.subject = "request " + std::to_string(worst->request) + " client " + std::to_string(worst->client);
  std::ostringstream os;
  os << probes.size() << " probes; a=" << *a << " units/s";
  r.witness = os.str();
  finish(r);
  return r;
}

// ---- counters -----------------------------------------------------------

namespace {

CounterReport counter_report(const std::string& name, bool have, Service min, Service max,
                             std::uint64_t samples, Service U, Service quantum, bool lower_guaranteed) {
  CounterReport c;
  c.min = min;
  c.max = max;
  c.samples = samples;
  if (!have) {
    c.lower = BoundReport::inapplicable(name + "_lower", "no counter samples");
    c.upper = BoundReport::inapplicable(name + "_upper", "no counter samples");
    return c;
  }
  c.lower.check = name + "_lower";
  c.lower.subject = "-min q";
  c.lower.applicable = true;
  c.lower.measured = static_cast<double>(-min);
  c.lower.bound = static_cast<double>(U - 1);  // q > -U on integers
  finish(c.lower);
  if (!lower_guaranteed) {
    c.lower.witness = c.lower.pass ? "informational" : "informational; not implied by the algorithm";
    c.lower.pass = true;
  }
  c.upper.check = name + "_upper";
  c.upper.subject = "max q";
  c.upper.applicable = true;
  c.upper.measured = static_cast<double>(max);
  c.upper.bound = static_cast<double>(quantum);
  finish(c.upper);
  c.lower.guaranteed = lower_guaranteed;
  c.upper.guaranteed = true;
  return c;
}

}  // namespace

CounterReport verify_local_counters(const EventLog& log) {
  const auto& m = log.meta;
  if (m.local_policy != "dlpm") {
    CounterReport c;
    c.lower = BoundReport::inapplicable("local_counter_lower", "local policy has no deficit counters");
    c.upper = BoundReport::inapplicable("local_counter_upper", "local policy has no deficit counters");
    return c;
  }
  std::map<std::pair<WorkerId, ClientId>, Service> q;
  Service lo = 0, hi = 0;
  std::uint64_t samples = 0;
  auto apply = [&](WorkerId w, ClientId c, Service delta) {
    Service& v = q[{w, c}];
    v += delta;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++samples;
  };
  for (const auto& r : log.records()) {
    switch (r.type) {
      case RecordType::Refill:
        if (r.v2 == 0) apply(r.worker, r.client, r.v1);
        break;
      case RecordType::Admit: apply(r.worker, r.client, -m.params.weights.extend * r.v3); break;
      case RecordType::StepEnd:
        for (std::size_t k = 0; k + 1 < r.list.size(); k += 2) {
          apply(r.worker, static_cast<ClientId>(r.list[k]), -m.params.weights.output * r.list[k + 1]);
        }
        break;
      default: break;
    }
  }
  return counter_report("local_counter", samples > 0, lo, hi, samples, m.U, m.quantum_u, true);
}

CounterReport verify_global_counters(const EventLog& log) {
  const auto& m = log.meta;
  if (m.global_policy != "d2lpm") {
    CounterReport c;
    c.lower = BoundReport::inapplicable("global_counter_lower", "global policy has no deficit counters");
    c.upper = BoundReport::inapplicable("global_counter_upper", "global policy has no deficit counters");
    return c;
  }
  std::map<std::pair<ClientId, WorkerId>, Service> q;
  Service lo = 0, hi = 0;
  std::uint64_t samples = 0;
  auto apply = [&](ClientId c, WorkerId w, Service delta) {
    Service& v = q[{c, w}];
    v += delta;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++samples;
  };
  for (const auto& r : log.records()) {
    switch (r.type) {
      case RecordType::Refill:
        if (r.v2 == 1) {
          for (WorkerId w = 0; w < m.params.workers; ++w) apply(r.client, w, r.v1);
        }
        break;
      case RecordType::Dispatch: apply(r.client, r.worker, -m.params.weights.extend * r.v2); break;
      case RecordType::Finish: apply(r.client, r.worker, -m.params.weights.output * r.v1); break;
      default: break;
    }
  }
  return counter_report("global_counter", samples > 0, lo, hi, samples, m.U, m.quantum_w, false);
}

// ---- invariants ----------------------------------------------------------

namespace {

BoundReport count_records(const EventLog& log, RecordType type, const std::string& check) {
  BoundReport r;
  r.check = check;
  r.applicable = true;
  r.guaranteed = true;
  std::int64_t n = 0;
  for (const auto& rec : log.records()) {
    if (rec.type != type) continue;
    if (n++ == 0) {
      r.witness = "first at event " + std::to_string(rec.event) + " worker " + std::to_string(rec.worker);
    }
  }
  r.measured = static_cast<double>(n);
  r.bound = 0;
  finish(r);
  return r;
}

}  // namespace

BoundReport verify_work_conservation(const EventLog& log) {
  return count_records(log, RecordType::Idle, "work_conservation");
}

BoundReport verify_pool_safety(const EventLog& log) {
  return count_records(log, RecordType::Overflow, "pool_safety");
}

std::vector<BoundReport> verify_all(const EventLog& log, SimTime window) {
  const auto& m = log.meta;
  std::vector<BoundReport> out;
  out.push_back(verify_work_conservation(log));
  out.push_back(verify_pool_safety(log));
  const bool dlpm = m.local_policy == "dlpm";
  const bool single = m.params.workers == 1;
  const bool d2lpm = !single && dlpm && m.global_policy == "d2lpm";

  auto local = verify_local_counters(log);
  out.push_back(local.lower);
  out.push_back(local.upper);
  if (!single) {
    auto global = verify_global_counters(log);
    out.push_back(global.lower);
    out.push_back(global.upper);
  }

  LogReplay rp(log);
  std::vector<BoundReport> fairness;
  if (single) {
    fairness.push_back(verify_service_bound_local_all(rp));
    fairness.push_back(verify_backlogged_vs_any_local_all(rp));
  } else {
    fairness.push_back(verify_service_bound_global(rp));
    fairness.push_back(verify_backlogged_vs_any_global(rp));
  }
  fairness.push_back(verify_latency_bound(log, window));
  for (auto& r : fairness) {
    r.guaranteed = single ? dlpm : d2lpm;
    out.push_back(std::move(r));
  }
  return out;
}

void write_reports_csv(std::ostream& os, std::span<const BoundReport> reports) {
  os << "check,subject,applicable,guaranteed,pass,measured,bound,margin,witness\n";
  for (const auto& r : reports) {
    os << r.check << ',' << r.subject << ',' << r.applicable << ',' << r.guaranteed << ',' << r.pass
       << ',' << r.measured << ',' << r.bound << ',' << r.margin << ',' << r.witness << '\n';
  }
}

}  // namespace fairsched
