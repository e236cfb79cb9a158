#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fairsched/metrics.hpp"
#include "fairsched/simulation.hpp"
#include "helpers.hpp"

using namespace fairsched;
using namespace testing_helpers;

namespace {

double jain(std::vector<double> x) { return jain_index(x); }

/// Direct evaluation of the index, written independently of the library.
double jain_oracle(const std::vector<double>& x) {
  double s = 0, s2 = 0;
  for (double v : x) {
    s += v;
    s2 += v * v;
  }
  return s * s / (static_cast<double>(x.size()) * s2);
}

ClientProfile flat(double rate, std::int64_t prefix, std::int32_t prefixes = 1) {
  ClientProfile p;
  p.rate = rate;
  p.prefix_len = prefix;
  p.suffix_len = 24;
  p.prefixes = prefixes;
  p.output = {"constant", 16, 1, 1, 0};
  return p;
}

}  // namespace

TEST_CASE("jain index") {
  CHECK(jain({1, 1, 1, 1}) == doctest::Approx(1.0));
  CHECK(jain({7, 0, 0, 0}) == doctest::Approx(0.25));
  CHECK(jain({1, 2, 3}) == doctest::Approx(6.0 / 7.0));
  CHECK(jain({5}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(jain({0, 0}), InvalidArgument);
  CHECK_THROWS_AS(jain({}), InvalidArgument);
  CHECK_THROWS_AS(jain({1, -1}), InvalidArgument);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(1 + rng() % 8);
    for (auto& v : x) v = u(rng);
    x[0] += 0.1;
    const double j = jain(x);
    CHECK(j == doctest::Approx(jain_oracle(x)));
    CHECK(j >= 1.0 / static_cast<double>(x.size()) - 1e-12);
    CHECK(j <= 1.0 + 1e-12);
    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= 3.7;
    CHECK(jain(scaled) == doctest::Approx(j));
  }
}

TEST_CASE("nearest-rank percentile") {
  std::vector<SimTime> v;
  for (int i = 1; i <= 100; ++i) v.push_back(SimTime::from_us(i));
  CHECK(percentile(v, 50) == SimTime::from_us(50));
  CHECK(percentile(v, 99) == SimTime::from_us(99));
  CHECK(percentile(v, 100) == SimTime::from_us(100));
  for (double p : {1.0, 50.0, 100.0}) CHECK(percentile({SimTime::from_us(7)}, p) == SimTime::from_us(7));
  CHECK_THROWS_AS(percentile({}, 50), InvalidArgument);
  CHECK_THROWS_AS(percentile(v, 0), InvalidArgument);
}

TEST_CASE("backlog timeline") {
  SUBCASE("a request admitted on arrival never backlogs its client") {
    ClusterConfig c = small_cluster();
    auto run = simulate(c, workload_of({make_request(0, 0, seq(0, 10), 2, SimTime::from_ms(1))}));
    CHECK(backlogged_intervals(0, run.log).empty());
  }
  SUBCASE("an idle client has an empty timeline") {
    ClusterConfig c = small_cluster();
    auto run = simulate(c, workload_of({make_request(0, 1, seq(0, 10), 2)}));
    CHECK(backlogged_intervals(0, run.log).empty());
  }
  SUBCASE("a client that always has a queue is backlogged in one run") {
    ClusterConfig c = small_cluster("fcfs");
    std::vector<Request> rs;
    for (RequestId i = 0; i < 20; ++i) rs.push_back(make_request(i, 0, seq(1000 * i, 200), 40));
    auto run = simulate(c, workload_of(rs));
    auto runs = backlogged_intervals(0, run.log);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].t_first == SimTime{});
    for (std::size_t i = 1; i < runs.size(); ++i) CHECK(runs[i - 1].last < runs[i].first);
  }
}

TEST_CASE("cache hit rate") {
  ClusterConfig c = small_cluster("lpm");
  c.cache_capacity = 100000;
  SUBCASE("disjoint cold requests") {
    std::vector<Request> rs;
    for (RequestId i = 0; i < 5; ++i) rs.push_back(make_request(i, 0, seq(1000 * i, 50), 2, SimTime::from_ms(100 * i)));
    CHECK(cache_hit_rate(simulate(c, workload_of(rs)).log) == 0.0);
  }
  SUBCASE("a repeated prefix hits on every request after the first") {
    const TokenSeq P = seq(0, 60);
    for (int k : {2, 5, 10}) {
      std::vector<Request> rs;
      for (RequestId i = 0; i < k; ++i) {
        rs.push_back(make_request(i, 0, concat(P, seq(10000 * (i + 1), 20)), 2, SimTime::from_ms(100 * i)));
      }
      const double share = 60.0 / 80.0;
      CHECK(cache_hit_rate(simulate(c, workload_of(rs)).log) == doctest::Approx((k - 1.0) / k * share));
    }
  }
  SUBCASE("round robin over four workers hits less than one worker") {
    auto w = generate_workload({flat(40, 150, 2)}, c.params, SimTime::from_s(2), 3);
    ClusterConfig one = c;
    ClusterConfig four = c;
    four.params.workers = 4;
    const double h1 = cache_hit_rate(simulate(one, w).log);
    const double h4 = cache_hit_rate(simulate(four, w).log);
    CHECK(h4 < h1);
    CHECK(h1 <= 1.0);
    CHECK(h4 >= 0.0);
  }
}

TEST_CASE("local service bound on simulated runs") {
  SUBCASE("symmetric saturation") {
    ClusterConfig c = small_cluster("dlpm", 500);
    auto w = generate_workload({flat(80, 64), flat(80, 64)}, c.params, SimTime::from_s(3), 8);
    auto run = simulate(c, w);
    LogReplay replay(run.log);
    auto r = verify_service_bound_local(replay, 0, 1);
    CHECK(r.applicable);
    CHECK(r.pass);
    CHECK(r.margin > 0);
    CHECK(r.bound == doctest::Approx(2.0 * static_cast<double>(run.log.meta.U + 500)));
    // an empty window measures zero
    CHECK(replay.cumulative(0, 5) - replay.cumulative(0, 5) == 0);
  }
  SUBCASE("long cached prefix against a cold client") {
    ClusterConfig c = small_cluster("dlpm", 300);
    c.cache_capacity = 100000;
    auto w = generate_workload({flat(80, 200), flat(80, 0)}, c.params, SimTime::from_s(3), 9);
    auto run = simulate(c, w);
    LogReplay replay(run.log);
    for (auto r : {verify_service_bound_local(replay, 0, 1), verify_backlogged_vs_any_local(replay, 0, 1),
                   verify_backlogged_vs_any_local(replay, 1, 0)}) {
      CHECK(r.pass);
    }
    CHECK(verify_service_bound_local(replay, 0, 1).applicable);
  }
}

TEST_CASE("global service bound on a symmetric run") {
  ClusterConfig c = small_cluster("dlpm", 500);
  c.params.workers = 4;
  c.global = {"d2lpm", 2000, 0.5};
  auto w = generate_workload({flat(200, 64, 4), flat(200, 64, 4)}, c.params, SimTime::from_s(2), 10);
  auto run = simulate(c, w);
  LogReplay replay(run.log);
  CHECK(verify_service_bound_global(replay).pass);
  CHECK(verify_backlogged_vs_any_global(replay).pass);
  for (const auto& r : verify_all(run.log)) {
    if (r.guaranteed) CHECK_MESSAGE(r.pass, r.check);
  }
}

TEST_CASE("latency bound") {
  SUBCASE("a lone client on an idle system waits zero") {
    ClusterConfig c = small_cluster();
    std::vector<Request> rs;
    for (RequestId i = 0; i < 3; ++i) rs.push_back(make_request(i, 0, seq(1000 * i, 20), 2, SimTime::from_s(static_cast<double>(i))));
    auto run = simulate(c, workload_of(rs));
    auto probes = fresh_client_requests(run.log);
    REQUIRE(probes.size() == 3);
    for (const auto& p : probes) CHECK(p.delay == SimTime{});
  }
  SUBCASE("doubling Q doubles the quantum term") {
    for (std::int32_t D : {1, 4}) {
      const double base = latency_bound_seconds(3, D, 1000, 0, 50.0);
      const double q1 = latency_bound_seconds(3, D, 1000, 700, 50.0) - base;
      const double q2 = latency_bound_seconds(3, D, 1000, 1400, 50.0) - base;
      CHECK(q2 == doctest::Approx(2 * q1));
    }
    CHECK(latency_bound_seconds(3, 1, 1000, 500, 100.0) == doctest::Approx(2.0 * 2 * 1500 / 100.0));
    CHECK(latency_bound_seconds(3, 2, 1000, 500, 100.0) == doctest::Approx(2.0 * 2 * 3000 / 100.0));
  }
  SUBCASE("saturated pair plus a fresh probe client") {
    ClusterConfig c = small_cluster("dlpm", 500);
    c.horizon = SimTime::from_s(4);
    ClientProfile probe = flat(2, 0);
    probe.cv = 1;
    auto w = generate_workload({flat(100, 64), flat(100, 64), probe}, c.params, SimTime::from_s(3), 12);
    auto run = simulate(c, w);
    auto r = verify_latency_bound(run.log);
    CHECK(r.pass);
  }
}

TEST_CASE("reports csv") {
  std::vector<BoundReport> rs{BoundReport::inapplicable("x", "none")};
  std::ostringstream os;
  write_reports_csv(os, rs);
  CHECK(os.str().rfind("check,subject,applicable,guaranteed,pass,measured,bound,margin,witness", 0) == 0);
}
