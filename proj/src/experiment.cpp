#include "fairsched/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace fairsched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string opt_us(const std::optional<SimTime>& t) { return t ? std::to_string(t->us()) : ""; }

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

double ms(SimTime t) { return t.ms(); }

}  // namespace

json Summary::to_json() const {
  json j;
  j["name"] = name;
  j["local_policy"] = local_policy;
  j["global_policy"] = global_policy;
  j["quantum_u"] = quantum_u;
  j["quantum_w"] = quantum_w;
  j["requests"] = requests;
  j["finished"] = finished;
  j["elapsed_s"] = elapsed_s;
  j["throughput_tps"] = throughput_tps;
  j["jain_index"] = jain;
  j["client_service_rates"] = client_rates;
  j["p50_latency_ms"] = p50_latency_ms;
  j["p99_latency_ms"] = p99_latency_ms;
  j["p50_ttft_ms"] = p50_ttft_ms;
  j["p99_ttft_ms"] = p99_ttft_ms;
  j["cache_hit_rate"] = cache_hit_rate;
  j["max_service_gap"] = max_service_gap;
  std::ostringstream h;
  h << std::hex << std::setw(16) << std::setfill('0') << log_hash;
  j["event_log_hash"] = h.str();
  j["failed_guarantees"] = failed_guarantees;
  return j;
}

double fairness_index(const RunResult& run, std::vector<double>* rates) {
  const std::int32_t n = run.log.meta.clients;
  if (n <= 0) return 0;
  std::vector<std::optional<SimTime>> first(static_cast<std::size_t>(n)), last(static_cast<std::size_t>(n));
  for (const auto& r : run.requests) {
    if (!r.arrival) continue;
    auto& f = first[static_cast<std::size_t>(r.client)];
    if (!f || *r.arrival < *f) f = r.arrival;
  }
  for (const auto& e : run.service.entries()) {
    auto& l = last[static_cast<std::size_t>(e.client)];
    if (!l || e.time > *l) l = e.time;
  }
  SimTime begin, end = run.end;
  bool all = true;
  for (std::int32_t c = 0; c < n; ++c) {
    const auto& f = first[static_cast<std::size_t>(c)];
    const auto& l = last[static_cast<std::size_t>(c)];
    if (!f || !l) {
      all = false;
      break;
    }
    begin = std::max(begin, *f);
    end = std::min(end, *l);
  }
  if (!all || end <= begin) {
    begin = SimTime{};
    end = run.end;
  }
  std::vector<double> x;
  const double span = std::max((end - begin).seconds(), 1e-6);
  for (ClientId c = 0; c < n; ++c) {
    x.push_back(static_cast<double>(run.service.client_perspective_service(c, begin, end)) / span);
  }
  if (rates) *rates = x;
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0; })) return 0;
  return jain_index(x);
}

Workload build_workload(const ExperimentConfig& c) {
  if (!c.trace.empty()) {
    std::ifstream in(c.trace);
    if (!in) throw InvalidArgument("cannot open trace '" + c.trace + "'");
    return read_trace(in);
  }
  return generate_workload(c.clients, c.system, c.horizon, c.seed);
}

bool has_guarantee_failure(const std::vector<BoundReport>& reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const BoundReport& r) { return r.guaranteed && r.applicable && !r.pass; });
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  return run_experiment(c, build_workload(c));
}

ExperimentResult run_experiment(const ExperimentConfig& c, const Workload& w) {
  c.validate();
  ExperimentResult out;
  out.config = c;
  const ClusterConfig cluster = c.cluster();
  out.run = simulate(cluster, w);
  const RunResult& run = out.run;
  if (c.metrics.verify) out.reports = verify_all(run.log, c.metrics.capacity_window);

  Summary& s = out.summary;
  s.name = c.name;
  s.local_policy = cluster.local.kind;
  s.global_policy = cluster.global.kind;
  s.quantum_u = cluster.local.quantum;
  s.quantum_w = cluster.global.quantum;
  s.requests = static_cast<std::int64_t>(w.requests.size());
  std::vector<SimTime> latency, ttft;
  for (const auto& r : run.requests) {
    if (r.finish && r.arrival) {
      ++s.finished;
      latency.push_back(*r.finish - *r.arrival);
    }
    if (r.first_token && r.arrival) ttft.push_back(*r.first_token - *r.arrival);
  }
  if (!latency.empty()) {
    s.p50_latency_ms = ms(percentile(latency, 50));
    s.p99_latency_ms = ms(percentile(latency, 99));
  }
  if (!ttft.empty()) {
    s.p50_ttft_ms = ms(percentile(ttft, 50));
    s.p99_ttft_ms = ms(percentile(ttft, 99));
  }
  s.elapsed_s = run.end.seconds();
  std::int64_t tokens = 0;
  for (const auto& e : run.service.entries()) {
    tokens += e.kind == ServiceKind::Extend ? e.input_tokens : e.tokens;
  }
  s.throughput_tps = s.elapsed_s > 0 ? static_cast<double>(tokens) / s.elapsed_s : 0;
  s.jain = fairness_index(run, &s.client_rates);
  s.cache_hit_rate = cache_hit_rate(run.log);
  LogReplay replay(run.log);
  const auto gap = cluster.params.workers == 1 ? verify_service_bound_local_all(replay)
                                               : verify_service_bound_global(replay);
  s.max_service_gap = gap.applicable ? gap.measured : 0;
  s.log_hash = run.log.hash();
  s.failed_guarantees = std::count_if(out.reports.begin(), out.reports.end(), [](const BoundReport& r) {
    return r.guaranteed && r.applicable && !r.pass;
  });
  return out;
}

void write_workers_csv(std::ostream& os, const RunResult& run) {
  os << "time_us,worker,queue_len,batch_size,pool_used,cache_hit_tokens,extend_tokens,output_tokens\n";
  for (const auto& s : run.samples) {
    os << s.time.us() << ',' << s.worker << ',' << s.queue_len << ',' << s.batch_size << ','
       << s.pool_used << ',' << s.cache_hit_tokens << ',' << s.extend_tokens << ',' << s.output_tokens
       << '\n';
  }
}

void write_dispatch_csv(std::ostream& os, const RunResult& run) {
  os << "time_us,request,client,worker,match_len,matched_workers\n";
  for (const auto& d : run.dispatches) {
    os << d.time.us() << ',' << d.request << ',' << d.client << ',' << d.worker << ',' << d.match_len << ',';
    for (std::size_t i = 0; i < d.matched.size(); ++i) os << (i ? ";" : "") << d.matched[i];
    os << '\n';
  }
}

void write_requests_csv(std::ostream& os, const RunResult& run) {
  os << "id,client,parent,worker,input_len,match_len,extend,output_tokens,arrival_us,dispatch_us,"
        "admit_us,first_token_us,finish_us\n";
  for (const auto& r : run.requests) {
    os << r.id << ',' << r.client << ',' << (r.parent ? std::to_string(*r.parent) : "") << ','
       << r.worker << ',' << r.input_len << ',' << r.match_len << ',' << r.extend << ','
       << r.output_tokens << ',' << opt_us(r.arrival) << ',' << opt_us(r.dispatch) << ','
       << opt_us(r.admit) << ',' << opt_us(r.first_token) << ',' << opt_us(r.finish) << '\n';
  }
}

void write_artifacts(const ExperimentResult& r, const fs::path& dir) {
  fs::create_directories(dir / "bounds");
  open_out(dir / "effective_config.json") << config_to_json(r.config).dump(2) << '\n';
  {
    auto os = open_out(dir / "event_log.jsonl");
    r.run.log.write(os);
  }
  {
    auto os = open_out(dir / "service.csv");
    r.run.service.write_csv(os);
  }
  {
    auto os = open_out(dir / "workers.csv");
    write_workers_csv(os, r.run);
  }
  {
    auto os = open_out(dir / "dispatch.csv");
    write_dispatch_csv(os, r.run);
  }
  {
    auto os = open_out(dir / "requests.csv");
    write_requests_csv(os, r.run);
  }
  for (const auto& b : r.reports) {
    auto os = open_out(dir / "bounds" / (b.check + ".csv"));
    write_reports_csv(os, std::span<const BoundReport>(&b, 1));
  }
  open_out(dir / "summary.json") << r.summary.to_json().dump(2) << '\n';
}

std::vector<ExperimentResult> compare(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw InvalidArgument("compare needs at least one config");
  for (const auto& c : configs) c.validate();
  const Workload w = build_workload(configs.front());
  const auto reference = to_trace(w);
  std::vector<ExperimentResult> out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (i > 0 && to_trace(build_workload(configs[i])) != reference) {
      throw InvalidArgument("config '" + configs[i].name + "' generates a different workload than '" +
                            configs.front().name + "'");
    }
    out.push_back(run_experiment(configs[i], w));
  }
  return out;
}

std::vector<ExperimentResult> sweep(const ExperimentConfig& c) {
  if (!c.sweep) throw InvalidArgument("config has no sweep stanza");
  c.validate();
  ExperimentConfig base = c;
  base.sweep.reset();
  const Workload w = build_workload(base);
  std::vector<ExperimentResult> out;
  for (double v : c.sweep->values) {
    ExperimentConfig point = base;
    std::ostringstream os;
    os.precision(17);
    os << v;
    set_config_value(point, c.sweep->parameter, os.str());
    point.name = base.name + "[" + c.sweep->parameter + "=" + os.str() + "]";
    out.push_back(run_experiment(point, w));
  }
  return out;
}

void write_summary_table(std::ostream& os, const std::vector<Summary>& rows) {
  os << "name,local_policy,global_policy,quantum_u,quantum_w,requests,finished,throughput_tps,jain_index,"
        "p50_latency_ms,p99_latency_ms,p50_ttft_ms,p99_ttft_ms,cache_hit_rate,max_service_gap,"
        "failed_guarantees\n";
  for (const auto& s : rows) {
    os << s.name << ',' << s.local_policy << ',' << s.global_policy << ',' << s.quantum_u << ','
       << s.quantum_w << ',' << s.requests << ',' << s.finished << ',' << s.throughput_tps << ','
       << s.jain << ',' << s.p50_latency_ms << ',' << s.p99_latency_ms << ',' << s.p50_ttft_ms << ','
       << s.p99_ttft_ms << ',' << s.cache_hit_rate << ',' << s.max_service_gap << ','
       << s.failed_guarantees << '\n';
  }
}

void write_summary_block(std::ostream& os, const Summary& s) {
  os << s.name << " (" << s.local_policy << " / " << s.global_policy << ")\n"
     << "  requests        " << s.finished << " finished of " << s.requests << '\n'
     << "  throughput      " << s.throughput_tps << " tok/s\n"
     << "  jain index      " << s.jain << '\n'
     << "  latency p50/p99 " << s.p50_latency_ms << " / " << s.p99_latency_ms << " ms\n"
     << "  ttft p50/p99    " << s.p50_ttft_ms << " / " << s.p99_ttft_ms << " ms\n"
     << "  cache hit rate  " << s.cache_hit_rate << '\n'
     << "  max service gap " << s.max_service_gap << '\n';
}

}  // namespace fairsched
