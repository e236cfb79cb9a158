// Acceptance suite. Prints one line per criterion and exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dlpm_oracle.hpp"
#include "fairsched/cost.hpp"
#include "fairsched/experiment.hpp"
#include "fairsched/metrics.hpp"
#include "fairsched/simulation.hpp"
#include "fairsched/workload.hpp"

using namespace fairsched;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[2048];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ClusterConfig base_cluster(std::int32_t workers, const std::string& local, Service qu,
                           const std::string& global = "rr", Service qw = 0) {
  ClusterConfig c;
  c.params.max_input = 1024;
  c.params.max_output = 128;
  c.params.batch_tokens = 4096;
  c.params.workers = workers;
  c.horizon = SimTime::from_s(6);
  c.timing = {SimTime::from_ms(5), SimTime::from_us(50), SimTime::from_us(400)};
  c.local = {local, qu};
  c.global = {global, qw, 0.5};
  return c;
}

ClientProfile profile(double rate, std::int64_t prefix, std::int64_t suffix, std::int32_t prefixes,
                      std::int64_t out_lo, std::int64_t out_hi) {
  ClientProfile p;
  p.rate = rate;
  p.prefix_len = prefix;
  p.suffix_len = suffix;
  p.prefixes = prefixes;
  p.output = {"uniform", 0, out_lo, out_hi, 0};
  return p;
}

/// Random client mix: flat and tree programs, some S1 or S2 misbehavers.
std::vector<ClientProfile> random_clients(std::mt19937_64& rng, std::int32_t n, double load) {
  std::vector<ClientProfile> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::int32_t i = 0; i < n; ++i) {
    ClientProfile p = profile(load * (0.5 + u(rng)) / n, 100 + static_cast<std::int64_t>(rng() % 300),
                              16 + static_cast<std::int64_t>(rng() % 48), 1 + static_cast<std::int32_t>(rng() % 3),
                              8, 16 + static_cast<std::int64_t>(rng() % 100));
    p.name = "c" + std::to_string(i);
    p.cv = 0.5 + 2 * u(rng);
    if (rng() % 3 == 0) {
      p.shape = "tree";
      p.branches = 2;
      p.depth = 2;
      p.suffix_len = 24;
      p.rate /= 4;
    }
    switch (rng() % 4) {
      case 0:
        p.misbehavior = "S1";
        p.factor = 3;
        break;
      case 1:
        p.misbehavior = "S2";
        p.factor = 2;
        break;
      default:
        break;
    }
    // keep S2 inputs inside L_input
    if (p.misbehavior == "S2" && apply_misbehavior(p, SystemParams{1024, 128, 4096, 1, {1, 2}}).max_input_len() > 1024) {
      p.misbehavior = "none";
    }
    out.push_back(p);
  }
  return out;
}

struct Run {
  ClusterConfig config;
  Workload workload;
  RunResult result;
};

Run run(const ClusterConfig& c, const std::vector<ClientProfile>& clients, std::uint64_t seed,
        SimTime gen_horizon) {
  Run r;
  r.config = c;
  r.config.seed = seed;
  r.workload = generate_workload(clients, c.params, gen_horizon, seed);
  r.result = simulate(r.config, r.workload);
  return r;
}

// ---- criteria 1-3 -------------------------------------------------------------

struct LocalSuite {
  std::vector<Run> runs;
};

LocalSuite local_suite() {
  LocalSuite s;
  const double fractions[] = {0.1, 0.5, 1.0, 4.0};
  for (std::uint64_t i = 0; i < 56; ++i) {
    std::mt19937_64 rng(1000 + i);
    const std::int32_t n = 2 + static_cast<std::int32_t>(i % 7);
    ClusterConfig c = base_cluster(1, "dlpm", 0);
    const Service U = compute_U(c.params);
    c.local.quantum = static_cast<Service>(std::llround(fractions[i % 4] * static_cast<double>(U)));
    s.runs.push_back(run(c, random_clients(rng, n, 40.0), 1000 + i, SimTime::from_s(5)));
  }
  return s;
}

Outcome criterion_counters(const LocalSuite& s) {
  Outcome o;
  double worst_lo = 0, worst_hi = -1e300;
  std::uint64_t samples = 0;
  for (const auto& r : s.runs) {
    auto rep = verify_local_counters(r.result.log);
    samples += rep.samples;
    const auto& m = r.result.log.meta;
    worst_lo = std::min(worst_lo, static_cast<double>(rep.min) / static_cast<double>(m.U));
    worst_hi = std::max(worst_hi, static_cast<double>(rep.max) / static_cast<double>(m.quantum_u));
    if (!rep.lower.pass || !rep.upper.pass || rep.samples == 0) o.pass = false;
  }
  o.detail = fmt("%zu runs, %llu counter samples, min q/U = %.3f (> -1), max q/Q_u = %.3f (<= 1)",
                 s.runs.size(), static_cast<unsigned long long>(samples), worst_lo, worst_hi);
  return o;
}

Outcome criterion_pairs(const LocalSuite& s, bool both) {
  Outcome o;
  std::size_t applicable = 0;
  double worst = 0;
  std::string witness;
  for (const auto& r : s.runs) {
    LogReplay rp(r.result.log);
    auto rep = both ? verify_service_bound_local_all(rp) : verify_backlogged_vs_any_local_all(rp);
    if (!rep.applicable) continue;
    ++applicable;
    const double ratio = rep.measured / rep.bound;
    if (ratio > worst) {
      worst = ratio;
      witness = rep.subject;
    }
    if (!rep.pass) o.pass = false;
  }
  // a vacuous suite proves nothing
  if (applicable * 5 < s.runs.size() * 4) o.pass = false;
  o.detail = fmt("%zu/%zu runs with backlogged windows, worst measured/bound = %.3f (%s)", applicable,
                 s.runs.size(), worst, witness.c_str());
  return o;
}

// ---- criterion 4 ---------------------------------------------------------------

std::vector<Run> global_suite() {
  std::vector<Run> out;
  const double fractions[] = {0.25, 1.0, 4.0};
  std::int32_t k = 0;
  for (std::int32_t D : {2, 4, 8}) {
    for (std::uint64_t i = 0; i < 7; ++i, ++k) {
      std::mt19937_64 rng(2000 + static_cast<std::uint64_t>(k));
      ClusterConfig c = base_cluster(D, "dlpm", 0, "d2lpm", 0);
      const Service U = compute_U(c.params);
      c.local.quantum = static_cast<Service>(std::llround(fractions[i % 3] * static_cast<double>(U)));
      c.global.quantum = static_cast<Service>(std::llround(fractions[(i + 1) % 3] * static_cast<double>(U)));
      c.horizon = SimTime::from_s(4);
      const std::int32_t n = 2 + static_cast<std::int32_t>(i % 3);
      out.push_back(run(c, random_clients(rng, n, 40.0 * D), 2000 + static_cast<std::uint64_t>(k), SimTime::from_s(3)));
    }
  }
  return out;
}

Outcome criterion_global(const std::vector<Run>& runs) {
  Outcome o;
  std::size_t applicable = 0;
  double worst = 0;
  for (const auto& r : runs) {
    LogReplay rp(r.result.log);
    for (const auto& rep : {verify_service_bound_global(rp), verify_backlogged_vs_any_global(rp)}) {
      if (!rep.pass) o.pass = false;
    }
    auto rep = verify_service_bound_global(rp);
    auto cnt = verify_global_counters(r.result.log);
    if (!cnt.upper.pass) o.pass = false;
    if (!rep.applicable) continue;
    ++applicable;
    worst = std::max(worst, rep.measured / rep.bound);
  }
  if (applicable * 5 < runs.size() * 4) o.pass = false;
  o.detail = fmt("%zu runs at D in {2,4,8}, %zu with clients backlogged at every worker, worst measured/bound = %.3f",
                 runs.size(), applicable, worst);
  return o;
}

// ---- criterion 5 ---------------------------------------------------------------

/// Two saturating clients plus a sparse client whose requests arrive to an
/// empty pending set.
std::vector<Run> probe_runs() {
  std::vector<Run> out;
  for (std::int32_t D : {1, 1, 1, 2, 4}) {
    const std::uint64_t seed = 3000 + out.size();
    ClusterConfig c = D == 1 ? base_cluster(1, "dlpm", 0) : base_cluster(D, "dlpm", 0, "d2lpm", 0);
    const Service U = compute_U(c.params);
    c.local.quantum = U / 2;
    c.global.quantum = U;
    std::vector<ClientProfile> clients{profile(30.0 * D, 300, 32, 2, 16, 96), profile(30.0 * D, 200, 32, 2, 16, 96),
                                       profile(1.5, 0, 64, 1, 8, 32)};
    clients[2].cv = 0.5;
    out.push_back(run(c, clients, seed, SimTime::from_s(5)));
  }
  return out;
}

Outcome criterion_latency(const std::vector<const Run*>& runs) {
  Outcome o;
  std::size_t applicable = 0, probes = 0;
  double worst = 0;
  for (const Run* r : runs) {
    auto rep = verify_latency_bound(r->result.log);
    if (!rep.applicable) continue;
    ++applicable;
    probes += fresh_client_requests(r->result.log).size();
    worst = std::max(worst, rep.measured / rep.bound);
    if (!rep.pass) o.pass = false;
  }
  if (applicable == 0) o.pass = false;
  o.detail = fmt("%zu runs with fresh-client probes (%zu probes), worst delay/bound = %.4f", applicable, probes, worst);
  return o;
}

// ---- criterion 6 ---------------------------------------------------------------

Outcome criterion_work_conservation(const std::vector<const Run*>& runs) {
  Outcome o;
  std::size_t n = 0;
  for (const Run* r : runs) {
    ++n;
    if (!verify_work_conservation(r->result.log).pass || !verify_pool_safety(r->result.log).pass) o.pass = false;
  }
  // every local and global policy on a shared workload
  std::mt19937_64 rng(4000);
  const auto clients = random_clients(rng, 4, 160.0);
  std::size_t combos = 0;
  for (const char* local : {"fcfs", "lpm", "dlpm", "vtc"}) {
    for (const char* global : {"rr", "client_rr", "threshold", "d2lpm"}) {
      ClusterConfig c = base_cluster(4, local, 4000, global, 9000);
      c.horizon = SimTime::from_s(3);
      Run r = run(c, clients, 4000, SimTime::from_s(2.5));
      ++n;
      ++combos;
      if (!verify_work_conservation(r.result.log).pass || !verify_pool_safety(r.result.log).pass) o.pass = false;
      if (r.result.idle_violations != 0 || r.result.overflow_events != 0) o.pass = false;
    }
  }
  for (const char* local : {"fcfs", "lpm", "vtc"}) {
    ClusterConfig c = base_cluster(1, local, 0);
    Run r = run(c, clients, 4001, SimTime::from_s(5));
    ++n;
    if (!verify_work_conservation(r.result.log).pass || !verify_pool_safety(r.result.log).pass) o.pass = false;
  }
  o.detail = fmt("%zu runs (%zu local x global policy pairs), no idle worker with an admissible request, no pool overflow",
                 n, combos);
  return o;
}

// ---- criterion 7 ---------------------------------------------------------------

/// W_g - W_f from time 0 to t, summed over workers.
double gap_at(const RunResult& r, ClientId g, ClientId f, SimTime t) {
  return static_cast<double>(r.service.service_in_interval(g, SimTime{}, t) -
                             r.service.service_in_interval(f, SimTime{}, t));
}

Outcome criterion_infinite_qw() {
  // f: every request shares one long prefix, so a locality-first router pins
  // it to one worker. g: no prefix at all, spread by load over every worker.
  const SimTime T = SimTime::from_s(1);
  const std::int32_t doublings = 4;
  const SimTime H = SimTime::from_us(T.us() << doublings);
  ClusterConfig c = base_cluster(4, "dlpm", 0, "threshold", 0);
  const Service U = compute_U(c.params);
  c.local.quantum = U;
  c.global.theta = 0.0;
  c.horizon = H;
  ClientProfile f = profile(200, 800, 32, 1, 32, 64);
  ClientProfile g = profile(200, 0, 600, 1, 32, 64);
  Run r = run(c, {f, g}, 5000, H);
  Outcome o;
  std::vector<double> gaps;
  for (std::int32_t k = 0; k <= doublings; ++k) gaps.push_back(gap_at(r.result, 1, 0, SimTime::from_us(T.us() << k)));
  // increment per doubling must stay above one request's worth of service
  const double step = static_cast<double>(U);
  std::string seq;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    seq += fmt("%s%.0f", k ? ", " : "", gaps[k]);
    if (k > 0 && gaps[k] - gaps[k - 1] < step) o.pass = false;
  }
  // the same workload under D2LPM stays inside its bound
  ClusterConfig d2 = c;
  d2.global = {"d2lpm", U, 0.5};
  d2.horizon = SimTime::from_us(T.us() * 4);
  Run fair = run(d2, {f, g}, 5000, d2.horizon);
  LogReplay rp(fair.result.log);
  auto rep = verify_service_bound_global(rp);
  o.detail = fmt("threshold(theta=0) W_g - W_f at T..16T = [%s], increments >= U = %lld; d2lpm on same workload: %s",
                 seq.c_str(), static_cast<long long>(U),
                 rep.applicable ? fmt("gap %.0f <= bound %.0f", rep.measured, rep.bound).c_str() : "no co-backlog");
  return o;
}

Outcome criterion_lpm_vs_dlpm() {
  Outcome o;
  double lpm_max = 0, dlpm_min = 1;
  int seeds = 0;
  std::string per_seed;
  for (std::uint64_t seed = 6000; seed < 6008; ++seed, ++seeds) {
    ClusterConfig c = base_cluster(1, "lpm", 0);
    c.horizon = SimTime::from_s(16);
    ClientProfile honest = profile(30, 300, 48, 2, 32, 96);
    ClientProfile s1 = honest;
    s1.misbehavior = "S1";
    s1.factor = 4;
    const std::vector<ClientProfile> clients{honest, s1};
    const Workload w = generate_workload(clients, c.params, SimTime::from_s(16), seed);
    c.seed = seed;
    auto lpm = simulate(c, w);
    c.local = {"dlpm", compute_U(c.params)};
    auto dlpm = simulate(c, w);
    const double jl = fairness_index(lpm), jd = fairness_index(dlpm);
    lpm_max = std::max(lpm_max, jl);
    dlpm_min = std::min(dlpm_min, jd);
    if (!(jd > jl)) o.pass = false;
    per_seed += fmt("%s%.2f/%.2f", per_seed.empty() ? "" : " ", jl, jd);
  }
  if (lpm_max > 0.9 || dlpm_min < 0.95) o.pass = false;
  o.detail = fmt("%d seeds with one S1 client: LPM Jain <= %.3f (need <= 0.9), DLPM Jain >= %.3f (need >= 0.95); "
                 "per seed LPM/DLPM [%s]",
                 seeds, lpm_max, dlpm_min, per_seed.c_str());
  return o;
}

// ---- criterion 8 ---------------------------------------------------------------

struct Point {
  double throughput = 0;
  double gap = 0;
};

Point measure(const ClusterConfig& c, const Workload& w) {
  auto r = simulate(c, w);
  Point p;
  std::int64_t tokens = 0;
  for (const auto& rec : r.requests) {
    if (rec.admit) tokens += rec.input_len;
    tokens += rec.output_tokens;
  }
  p.throughput = static_cast<double>(tokens) / r.end.seconds();
  LogReplay rp(r.log);
  auto rep = verify_service_bound_local_all(rp);
  p.gap = rep.applicable ? rep.measured : 0;
  return p;
}

/// Counts (inversions, whether every inversion is within tol).
std::pair<int, bool> inversions(const std::vector<double>& v, double tol) {
  int n = 0;
  bool small = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1]) {
      ++n;
      if (v[i] < v[i - 1] * (1 - tol)) small = false;
    }
  }
  return {n, small};
}

Outcome criterion_pareto() {
  // One long shared prefix per client in a cache that holds only one of them,
  // so every switch between clients costs a prefill. Each point is the mean
  // over three workload seeds. The ladder stops at 2U: from there on DLPM
  // makes the same choices as LPM on this workload and the curve is flat.
  ClusterConfig c = base_cluster(1, "dlpm", 0);
  c.horizon = SimTime::from_s(20);
  c.cache_capacity = 1400;
  const Service U = compute_U(c.params);
  const std::vector<ClientProfile> clients{profile(30, 900, 32, 1, 16, 64), profile(30, 900, 32, 1, 16, 64)};
  std::vector<Workload> ws;
  for (std::uint64_t seed = 7000; seed < 7003; ++seed) ws.push_back(generate_workload(clients, c.params, SimTime::from_s(20), seed));
  auto mean_point = [&](const ClusterConfig& cc) {
    Point m;
    for (const auto& w : ws) {
      const Point p = measure(cc, w);
      m.throughput += p.throughput / static_cast<double>(ws.size());
      m.gap += p.gap / static_cast<double>(ws.size());
    }
    return m;
  };
  const std::vector<double> ladder{0.0625, 0.125, 0.25, 0.5, 1, 2};
  std::vector<double> thr, gap;
  Outcome o;
  ClusterConfig v = c;
  v.local = {"vtc", 0};
  const Point vtc = mean_point(v);
  for (double f : ladder) {
    c.local = {"dlpm", static_cast<Service>(std::llround(f * static_cast<double>(U)))};
    const Point p = mean_point(c);
    thr.push_back(p.throughput);
    gap.push_back(p.gap);
    if (vtc.throughput > p.throughput) o.pass = false;
  }
  ClusterConfig l = c;
  l.local = {"lpm", 0};
  const Point lpm = mean_point(l);
  auto [ti, ts] = inversions(thr, 0.02);
  auto [gi, gs] = inversions(gap, 0.02);
  if (ti > 1 || !ts || gi > 1 || !gs) o.pass = false;
  const double ratio = thr.back() / lpm.throughput;
  if (ratio < 0.9) o.pass = false;
  auto join = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += fmt("%s%.0f", out.empty() ? "" : " ", x);
    return out;
  };
  o.detail = fmt("Q_u/U in {1/16..2}: throughput [%s] tok/s (%d inversions), gap [%s] (%d inversions); "
                 "DLPM at top = %.1f%% of LPM; VTC %.0f tok/s",
                 join(thr).c_str(), ti, join(gap).c_str(), gi, 100 * ratio, vtc.throughput);
  return o;
}

// ---- criterion 9 ---------------------------------------------------------------

Outcome criterion_locality() {
  Outcome o;
  std::vector<ClientProfile> clients;
  for (int i = 0; i < 4; ++i) clients.push_back(profile(10, 900, 32, 1, 16, 64));
  ClusterConfig c = base_cluster(4, "dlpm", 0, "rr", 0);
  const Service U = compute_U(c.params);
  c.local.quantum = U;
  c.horizon = SimTime::from_s(5);
  c.cache_capacity = 2048;
  const Workload w = generate_workload(clients, c.params, SimTime::from_s(5), 8000);
  const double rr = cache_hit_rate(simulate(c, w).log);
  c.global = {"d2lpm", 4 * U, 0.5};
  const double d2 = cache_hit_rate(simulate(c, w).log);
  if (d2 - rr < 0.20) o.pass = false;
  o.detail = fmt("D=4, 4 clients with one shared prefix each: d2lpm hit rate %.1f%% vs rr %.1f%% (+%.1f pp, need >= 20)",
                 100 * d2, 100 * rr, 100 * (d2 - rr));
  return o;
}

// ---- criterion 10 --------------------------------------------------------------

Outcome criterion_oracle() {
  Outcome o;
  int matched = 0, total = 0;
  std::string first_mismatch;
  for (std::uint64_t seed = 1; seed <= 200; ++seed, ++total) {
    std::mt19937_64 rng(seed);
    const int n = 1 + static_cast<int>(rng() % 6);
    ClusterConfig c;
    c.params.max_input = 64;
    c.params.max_output = 8;
    c.params.batch_tokens = 72 + static_cast<std::int64_t>(rng() % 120);
    c.params.workers = 1;
    c.params.weights = {1 + static_cast<Service>(rng() % 2), 1 + static_cast<Service>(rng() % 3)};
    const Service U = compute_U(c.params);
    c.local = {"dlpm", 1 + static_cast<Service>(rng() % static_cast<std::uint64_t>(2 * U))};
    c.output_reserve = 1 + static_cast<std::int64_t>(rng() % 8);
    c.cache_capacity = 1'000'000;
    c.timing = {SimTime::from_us(100), SimTime::from_us(1 + static_cast<std::int64_t>(rng() % 5)), SimTime::from_us(10)};
    c.horizon = SimTime::from_s(100);

    Workload w;
    std::vector<oracle::Req> reqs;
    const std::vector<int> shared{7, 7, 7, 7, 7, 7, 7, 7};
    for (int i = 0; i < n; ++i) {
      oracle::Req q;
      q.id = i;
      q.client = static_cast<int>(rng() % 2);
      q.arrival_us = static_cast<std::int64_t>(rng() % 4) * 150;
      if (rng() % 2) q.tokens.assign(shared.begin(), shared.begin() + static_cast<long>(rng() % 8));
      const int extra = 1 + static_cast<int>(rng() % 40);
      for (int k = 0; k < extra; ++k) q.tokens.push_back(100 + static_cast<int>(rng() % 3) + 10 * i);
      q.output_len = 1 + static_cast<std::int64_t>(rng() % 8);
      reqs.push_back(q);

      Request r;
      r.id = i;
      r.client = q.client;
      r.arrival = SimTime::from_us(q.arrival_us);
      r.input.assign(q.tokens.begin(), q.tokens.end());
      r.true_output_len = q.output_len;
      w.requests.push_back(r);
    }
    oracle::Params p{c.params.batch_tokens, c.output_reserve, c.params.weights.extend, c.params.weights.output,
                     c.local.quantum, c.timing.fixed.us(), c.timing.per_prefill_token.us(),
                     c.timing.per_decode_request.us()};
    auto expect = oracle::Dlpm(reqs, p).run();
    auto got = simulate(c, w);
    std::vector<std::tuple<std::int64_t, std::int64_t, std::int64_t>> a, b;
    for (const auto& e : expect) a.emplace_back(e.id, e.time_us, e.extend);
    for (const auto& rec : got.log.records()) {
      if (rec.type == RecordType::Admit) b.emplace_back(rec.request, rec.time.us(), rec.v3);
    }
    if (a == b) {
      ++matched;
    } else if (first_mismatch.empty()) {
      first_mismatch = fmt(" (first mismatch: seed %llu)", static_cast<unsigned long long>(seed));
    }
  }
  o.pass = matched == total;
  o.detail = fmt("%d/%d random instances (<= 6 requests, 2 clients) match the reference admission sequence%s",
                 matched, total, first_mismatch.c_str());
  return o;
}

// ---- criterion 11 --------------------------------------------------------------

Outcome criterion_determinism(const std::vector<const Run*>& runs) {
  Outcome o;
  std::size_t n = 0;
  for (const Run* r : runs) {
    auto again = simulate(r->config, r->workload);
    ++n;
    if (again.log.hash() != r->result.log.hash()) o.pass = false;
  }
  o.detail = fmt("%zu acceptance runs repeated with the same seed: identical event-log hashes", n);
  if (!o.pass) o.detail = "event-log hash changed on a repeated run";
  return o;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Line {
    int id;
    const char* name;
    Outcome out;
  };
  std::vector<Line> lines;
  auto report = [&](int id, const char* name, Outcome o) {
    std::printf("criterion %2d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    lines.push_back({id, name, std::move(o)});
  };

  const LocalSuite local = local_suite();
  report(1, "DLPM counter invariants", criterion_counters(local));
  report(2, "service bound, both backlogged", criterion_pairs(local, true));
  report(3, "service bound, backlogged vs any", criterion_pairs(local, false));
  const auto global = global_suite();
  report(4, "D2LPM global service bound", criterion_global(global));
  const auto probes = probe_runs();
  std::vector<const Run*> all;
  for (const auto& r : local.runs) all.push_back(&r);
  for (const auto& r : global) all.push_back(&r);
  for (const auto& r : probes) all.push_back(&r);
  report(5, "latency bounds", criterion_latency(all));
  report(6, "work conservation", criterion_work_conservation(all));
  report(7, "unfairness witness: infinite Q_w", criterion_infinite_qw());
  report(7, "unfairness witness: LPM vs DLPM Jain", criterion_lpm_vs_dlpm());
  report(8, "Pareto shape over Q_u", criterion_pareto());
  report(9, "locality vs round robin", criterion_locality());
  report(10, "reference equivalence", criterion_oracle());
  std::vector<const Run*> sample;
  for (std::size_t i = 0; i < all.size(); i += 7) sample.push_back(all[i]);
  report(11, "determinism", criterion_determinism(sample));

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = std::all_of(lines.begin(), lines.end(), [](const Line& l) { return l.out.pass; });
  std::printf("acceptance %s in %.1f s\n", ok ? "PASS" : "FAIL", secs);
  return ok ? 0 : 1;
}
