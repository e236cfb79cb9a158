#include "fairsched/simulation.hpp"

#include <memory>
#include <stdexcept>

namespace fairsched {

WorkerConfig ClusterConfig::worker_config(WorkerId id) const {
  WorkerConfig w;
  w.id = id;
  w.batch_tokens = params.batch_tokens;
  w.cache_capacity = cache_capacity > 0 ? cache_capacity : params.batch_tokens;
  w.max_output = params.max_output;
  w.output_reserve = output_reserve >= 0 ? output_reserve : params.max_output;
  w.chunk_size = chunk_size;
  w.admission_interval = admission_interval;
  w.timing = timing;
  w.weights = params.weights;
  return w;
}

void ClusterConfig::validate() const {
  params.validate();
  std::string bad;
  auto require = [&](bool ok, const char* field) {
    if (!ok) bad += bad.empty() ? field : std::string(", ") + field;
  };
  require(horizon.us() > 0, "horizon");
  require(cache_capacity == 0 || cache_capacity >= params.max_input, "cache_capacity");
  require(output_reserve >= -1, "output_reserve");
  require(chunk_size >= 0, "chunk_size");
  require(admission_interval >= 1, "admission_interval");
  require(timing.fixed.us() >= 1, "timing.c0");
  require(timing.per_prefill_token.us() >= 0, "timing.c_prefill");
  require(timing.per_decode_request.us() >= 0, "timing.c_decode");
  require(local.kind == "fcfs" || local.kind == "lpm" || local.kind == "dlpm" || local.kind == "vtc",
          "local.policy");
  require(local.kind != "dlpm" || local.quantum > 0, "local.quantum");
  require(global.kind == "d2lpm" || global.kind == "rr" || global.kind == "client_rr" ||
              global.kind == "threshold",
          "global.policy");
  require(global.kind != "d2lpm" || global.quantum > 0, "global.quantum");
  require(global.theta >= 0.0 && global.theta <= 1.0, "global.theta");
  require(eviction_delay.us() >= 0, "eviction_delay");
  if (!bad.empty()) throw InvalidArgument("invalid cluster config: " + bad);
}

namespace {

class Engine {
 public:
  Engine(const ClusterConfig& cfg, const Workload& wl)
      : cfg_(cfg),
        requests_(wl.requests),
        children_(wl.children()),
        dispatcher_(cfg.params.workers, make_global_policy(cfg.global, cfg.params.weights)) {
    res_.service = ServiceLog(cfg.params.weights);
    for (WorkerId w = 0; w < cfg.params.workers; ++w) {
      WorkerObserver obs;
      obs.on_admit = [this, w](const Request& r, std::int64_t match, std::int64_t extend) {
        on_admit(w, r, match, extend);
      };
      obs.on_refill = [this, w](ClientId c, Service quantum) {
        log(RecordType::Refill, -1, c, w, quantum, 0);
      };
      obs.on_evict = [this, w](const Evicted& ev) { on_evict(w, ev); };
      workers_.push_back(std::make_unique<Worker>(
          cfg.worker_config(w), make_local_policy(cfg.local, cfg.params.weights), std::move(obs)));
    }
    res_.requests.resize(requests_.size());
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      const Request& r = requests_[i];
      if (r.id != static_cast<RequestId>(i)) throw InvalidArgument("workload ids must be 0..n-1");
      if (r.input_len() < 1 || r.input_len() > cfg.params.max_input) {
        throw InvalidArgument("request " + std::to_string(r.id) + " input length outside [1, L_input]");
      }
      auto& rec = res_.requests[i];
      rec.id = r.id;
      rec.client = r.client;
      rec.parent = r.parent;
      rec.input_len = r.input_len();
      if (!r.parent && r.arrival <= cfg.horizon) queue_.schedule(r.arrival, EventKind::RequestArrival, r.id);
    }
  }

  RunResult run() {
    queue_.run_until(cfg_.horizon, [this](const Event& e) { handle(e); });
    res_.end = queue_.now();
    for (const auto& w : workers_) {
      if (const auto* d = dynamic_cast<const DlpmPolicy*>(&w->policy())) {
        res_.local_ranges.push_back(d->ranges());
      } else {
        res_.local_ranges.emplace_back();
      }
    }
    if (const auto* g = dynamic_cast<const D2lpmPolicy*>(&dispatcher_.policy())) {
      res_.global_ranges = g->ranges();
    }
    RunMeta& m = res_.log.meta;
    m.seed = cfg_.seed;
    m.horizon = cfg_.horizon;
    m.params = cfg_.params;
    m.U = compute_U(cfg_.params);
    m.quantum_u = cfg_.local.kind == "dlpm" ? cfg_.local.quantum : 0;
    m.quantum_w = cfg_.global.kind == "d2lpm" ? cfg_.global.quantum : 0;
    m.local_policy = cfg_.local.kind;
    m.global_policy = cfg_.global.kind;
    std::int32_t clients = 0;
    for (const auto& r : requests_) clients = std::max(clients, r.client + 1);
    m.clients = clients;
    m.events = res_.events;
    return std::move(res_);
  }

 private:
  SimTime now() const { return queue_.now(); }

  void log(RecordType type, RequestId req, ClientId client, WorkerId worker, std::int64_t v1 = 0,
           std::int64_t v2 = 0, std::int64_t v3 = 0, std::vector<std::int64_t> list = {}) {
    res_.log.append({event_, now(), type, req, client, worker, v1, v2, v3, std::move(list)});
  }

  void handle(const Event& e) {
    event_ = res_.events++;
    log(RecordType::Event, -1, -1, -1, static_cast<std::int64_t>(e.kind), e.a, e.b);
    switch (e.kind) {
      case EventKind::RequestArrival: on_arrival(e.a); break;
      case EventKind::StepComplete: on_step(static_cast<WorkerId>(e.a)); break;
      case EventKind::RequestFinished: on_finished(e.a, static_cast<WorkerId>(e.b)); break;
      case EventKind::EvictionNotice: on_notice(static_cast<std::size_t>(e.a)); break;
    }
    for (const auto& w : workers_) {
      const std::int64_t over = w->footprint() - cfg_.params.batch_tokens;
      if (over > 0) {
        log(RecordType::Overflow, -1, -1, w->id(), over);
        ++res_.overflow_events;
      }
      if (w->idle() && w->queue_len() > 0 && w->has_admissible()) {
        log(RecordType::Idle, -1, -1, w->id(), w->queue_len());
        ++res_.idle_violations;
      }
    }
  }

  void on_arrival(RequestId id) {
    Request& r = requests_.at(static_cast<std::size_t>(id));
    r.arrival = now();
    auto& rec = res_.requests[static_cast<std::size_t>(id)];
    rec.arrival = now();
    log(RecordType::Arrival, r.id, r.client, -1, r.input_len(), r.parent ? *r.parent : -1);
    auto d = dispatcher_.dispatch(r, now(), [this, &r](ClientId c, Service quantum) {
      log(RecordType::Refill, r.id, c, -1, quantum, 1);
    });
    log(RecordType::Dispatch, r.id, r.client, d.worker, d.match_len, r.input_len(), 0,
        std::vector<std::int64_t>(d.matched.begin(), d.matched.end()));
    rec.dispatch = now();
    rec.worker = d.worker;
    res_.dispatches.push_back(std::move(d));
    Worker& w = *workers_[static_cast<std::size_t>(rec.worker)];
    w.enqueue(r, now());
    maybe_start(w);
  }

  void maybe_start(Worker& w) {
    if (auto done = w.try_start_step(now())) {
      queue_.schedule(*done, EventKind::StepComplete, w.id());
      log(RecordType::StepStart, -1, -1, w.id(), w.batch_size(), w.last_step_extend(),
          w.last_step_latency().us());
    }
  }

  void on_step(WorkerId wid) {
    Worker& w = *workers_[static_cast<std::size_t>(wid)];
    auto result = w.complete_step(now());
    std::vector<std::int64_t> pairs;
    for (const auto& g : result.generated) {
      res_.service.record_output(now(), g.client, wid, g.tokens);
      pairs.push_back(g.client);
      pairs.push_back(g.tokens);
    }
    log(RecordType::StepEnd, -1, -1, wid, w.batch_size(), 0, 0, std::move(pairs));
    for (const auto& f : result.finished) {
      auto& rec = res_.requests[static_cast<std::size_t>(f.request->id)];
      rec.output_tokens = f.output_tokens;
      rec.first_token = f.first_token;
      queue_.schedule(now(), EventKind::RequestFinished, f.request->id, wid);
    }
    res_.samples.push_back(w.sample(now()));
    maybe_start(w);
  }

  void on_finished(RequestId id, WorkerId wid) {
    const Request& r = requests_.at(static_cast<std::size_t>(id));
    auto& rec = res_.requests[static_cast<std::size_t>(id)];
    rec.finish = now();
    log(RecordType::Finish, id, r.client, wid, rec.output_tokens, rec.first_token->us());
    dispatcher_.on_finish(r.client, wid, rec.output_tokens);
    for (RequestId child : children_[static_cast<std::size_t>(id)]) {
      const Request& c = requests_[static_cast<std::size_t>(child)];
      queue_.schedule(now() + c.think_time, EventKind::RequestArrival, child);
    }
  }

  void on_admit(WorkerId wid, const Request& r, std::int64_t match, std::int64_t extend) {
    res_.service.record_extend(now(), r.client, wid, extend, r.input_len());
    log(RecordType::Admit, r.id, r.client, wid, r.input_len(), match, extend);
    auto& rec = res_.requests[static_cast<std::size_t>(r.id)];
    rec.admit = now();
    rec.match_len = match;
    rec.extend = extend;
  }

  void on_evict(WorkerId wid, const Evicted& ev) {
    log(RecordType::Evict, -1, -1, wid, ev.tokens, ev.keep_len);
    evictions_.push_back({ev, wid, now()});
    queue_.schedule(now() + cfg_.eviction_delay, EventKind::EvictionNotice,
                    static_cast<std::int64_t>(evictions_.size() - 1));
  }

  void on_notice(std::size_t idx) {
    auto& n = evictions_.at(idx);
    dispatcher_.on_evict(n.ev, n.worker, n.at);
    n.ev.prefix = {};
  }

  struct Notice {
    Evicted ev;
    WorkerId worker;
    SimTime at;
  };

  const ClusterConfig& cfg_;
  std::vector<Request> requests_;
  std::vector<std::vector<RequestId>> children_;
  EventQueue queue_;
  Dispatcher dispatcher_;
  std::vector<std::unique_ptr<Worker>> workers_;
  std::vector<Notice> evictions_;
  RunResult res_;
  std::uint64_t event_ = 0;
};

}  // namespace

RunResult simulate(const ClusterConfig& config, const Workload& workload) {
  config.validate();
  Engine engine(config, workload);
  return engine.run();
}

}  // namespace fairsched
