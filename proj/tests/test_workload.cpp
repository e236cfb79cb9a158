#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fairsched/simulation.hpp"
#include "fairsched/workload.hpp"
#include "helpers.hpp"

using namespace fairsched;
using namespace testing_helpers;

namespace {

ClientProfile tree(std::int32_t b, std::int32_t d) {
  ClientProfile p;
  p.shape = "tree";
  p.branches = b;
  p.depth = d;
  p.prefix_len = 50;
  p.suffix_len = 8;
  p.output = {"constant", 4, 1, 1, 0};
  return p;
}

std::vector<Request> program(const ClientProfile& p) {
  std::mt19937_64 rng(1);
  return gen_program(p, 0, 0, SimTime{}, 0, rng, 64);
}

std::int64_t common_prefix(const TokenSeq& a, const TokenSeq& b) {
  std::int64_t k = 0;
  while (k < static_cast<std::int64_t>(std::min(a.size(), b.size())) && a[static_cast<std::size_t>(k)] == b[static_cast<std::size_t>(k)]) ++k;
  return k;
}

}  // namespace

TEST_CASE("gamma arrivals") {
  SUBCASE("cv 1 gives exponential gaps") {
    std::mt19937_64 rng(5);
    auto t = gen_gamma_arrivals(50.0, 1.0, SimTime::from_s(400), rng);
    std::vector<double> gaps;
    double prev = 0;
    for (auto x : t) {
      gaps.push_back(x.seconds() - prev);
      prev = x.seconds();
    }
    const double n = static_cast<double>(gaps.size());
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
    double var = 0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= n;
    CHECK(mean == doctest::Approx(0.02).epsilon(0.03));
    CHECK(std::sqrt(var) / mean == doctest::Approx(1.0).epsilon(0.05));
    // exponential survival: P(gap > mean) = e^-1
    const double above = static_cast<double>(std::count_if(gaps.begin(), gaps.end(), [&](double g) { return g > mean; })) / n;
    CHECK(above == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
  }
  SUBCASE("same seed gives the same instants") {
    std::mt19937_64 a(9), b(9);
    CHECK(gen_gamma_arrivals(3.0, 2.0, SimTime::from_s(50), a) == gen_gamma_arrivals(3.0, 2.0, SimTime::from_s(50), b));
  }
  SUBCASE("counts stay inside a 3 sigma band") {
    // Poisson(1000): sigma = sqrt(1000)
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      std::mt19937_64 rng(seed);
      const double n = static_cast<double>(gen_gamma_arrivals(10.0, 1.0, SimTime::from_s(100), rng).size());
      CHECK(std::abs(n - 1000.0) <= 3 * std::sqrt(1000.0));
    }
  }
  SUBCASE("bad parameters") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(gen_gamma_arrivals(0.0, 1.0, SimTime::from_s(1), rng), InvalidArgument);
    CHECK_THROWS_AS(gen_gamma_arrivals(1.0, -1.0, SimTime::from_s(1), rng), InvalidArgument);
  }
}

TEST_CASE("program shapes") {
  SUBCASE("b=2 d=1") {
    auto reqs = program(tree(2, 1));
    REQUIRE(reqs.size() == 3);
    for (int i : {1, 2}) {
      CHECK(reqs[static_cast<std::size_t>(i)].parent == reqs[0].id);
      CHECK(common_prefix(reqs[static_cast<std::size_t>(i)].input, reqs[0].input) == reqs[0].input_len());
    }
  }
  SUBCASE("request counts follow the geometric series") {
    for (std::int32_t b = 1; b <= 4; ++b) {
      for (std::int32_t d = 0; d <= 4; ++d) {
        std::int64_t expect = 0, level = 1;
        for (std::int32_t k = 0; k <= d; ++k, level *= b) expect += level;
        CHECK(static_cast<std::int64_t>(program(tree(b, d)).size()) == expect);
        CHECK(tree(b, d).requests_per_program() == expect);
      }
    }
    CHECK(program(tree(4, 4)).size() == 341);
  }
  SUBCASE("b=1 is a chain with growing prefixes") {
    auto reqs = program(tree(1, 5));
    REQUIRE(reqs.size() == 6);
    for (std::size_t i = 1; i < reqs.size(); ++i) {
      CHECK(reqs[i].parent == reqs[i - 1].id);
      CHECK(reqs[i].input_len() > reqs[i - 1].input_len());
      CHECK(common_prefix(reqs[i].input, reqs[i - 1].input) == reqs[i - 1].input_len());
    }
  }
  SUBCASE("flat program is one request") {
    ClientProfile p = tree(3, 3);
    p.shape = "flat";
    CHECK(program(p).size() == 1);
  }
}

TEST_CASE("two requests of a tree share exactly their lowest common ancestor") {
  auto reqs = program(tree(3, 3));
  auto ancestors = [&](std::size_t i) {
    std::vector<RequestId> chain{reqs[i].id};
    while (reqs[static_cast<std::size_t>(chain.back())].parent) chain.push_back(*reqs[static_cast<std::size_t>(chain.back())].parent);
    return chain;
  };
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const auto ai = ancestors(i);
    for (std::size_t j = i + 1; j < reqs.size(); ++j) {
      const auto aj = ancestors(j);
      RequestId lca = -1;
      for (RequestId x : ai) {
        if (std::find(aj.begin(), aj.end(), x) != aj.end()) {
          lca = x;
          break;
        }
      }
      REQUIRE(lca >= 0);
      CHECK(common_prefix(reqs[i].input, reqs[j].input) == reqs[static_cast<std::size_t>(lca)].input_len());
    }
  }
}

TEST_CASE("misbehavior") {
  SystemParams params;
  ClientProfile p = tree(2, 3);
  SUBCASE("S1 on branches: 15 requests per tree become 85") {
    // 1 + 2 + 4 + 8 = 15; 1 + 4 + 16 + 64 = 85
    CHECK(p.requests_per_program() == 15);
    p.misbehavior = "S1";
    p.s1_target = "branches";
    p.factor = 2;
    CHECK(apply_misbehavior(p, params).requests_per_program() == 85);
  }
  SUBCASE("S1 on rate") {
    p.rate = 3;
    p.misbehavior = "S1";
    p.factor = 4;
    CHECK(apply_misbehavior(p, params).rate == doctest::Approx(12));
  }
  SUBCASE("S2 doubles the document") {
    ClientProfile q;
    q.prefix_len = 1000;
    q.misbehavior = "S2";
    q.factor = 2;
    CHECK(apply_misbehavior(q, params).prefix_len == 2000);
    q.factor = 100;
    CHECK_THROWS_AS(apply_misbehavior(q, params), InvalidArgument);
  }
  SUBCASE("none is the identity") { CHECK(apply_misbehavior(p, params) == p); }
  SUBCASE("unknown tag") {
    p.misbehavior = "S3";
    CHECK_THROWS_AS(apply_misbehavior(p, params), InvalidArgument);
  }
}

TEST_CASE("profile validation lists the bad fields") {
  SystemParams params;
  ClientProfile p;
  p.rate = -1;
  p.shape = "dag";
  try {
    validate_profile(p, params);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("rate") != std::string::npos);
    CHECK(msg.find("shape") != std::string::npos);
  }
}

TEST_CASE("clients never share prefixes") {
  CHECK(common_prefix(prefix_tokens(0, 0, 10), prefix_tokens(1, 0, 10)) == 0);
  CHECK(common_prefix(prefix_tokens(0, 0, 10), prefix_tokens(0, 1, 10)) == 0);
  CHECK(common_prefix(suffix_tokens(3, 10), suffix_tokens(4, 10)) == 0);
  CHECK(prefix_tokens(2, 5, 10) == prefix_tokens(2, 5, 10));
}

TEST_CASE("workloads are reproducible and survive the trace format") {
  ClientProfile a = tree(2, 2);
  a.rate = 4;
  a.prefixes = 3;
  a.think_time = SimTime::from_ms(3);
  ClientProfile b;
  b.rate = 10;
  b.cv = 2;
  b.prefix_len = 40;
  b.output = {"lognormal", 20, 1, 1, 0.8};
  SystemParams params;
  auto w1 = generate_workload({a, b}, params, SimTime::from_s(5), 77);
  auto w2 = generate_workload({a, b}, params, SimTime::from_s(5), 77);
  auto w3 = generate_workload({a, b}, params, SimTime::from_s(5), 78);
  CHECK(to_trace(w1) == to_trace(w2));
  CHECK(to_trace(w1) != to_trace(w3));
  for (std::size_t i = 0; i < w1.requests.size(); ++i) CHECK(w1.requests[i].id == static_cast<RequestId>(i));

  std::stringstream ss;
  write_trace(ss, w1);
  Workload back = read_trace(ss);
  REQUIRE(back.requests.size() == w1.requests.size());
  for (std::size_t i = 0; i < back.requests.size(); ++i) {
    CHECK(back.requests[i].input == w1.requests[i].input);
    CHECK(back.requests[i].arrival == w1.requests[i].arrival);
    CHECK(back.requests[i].parent == w1.requests[i].parent);
    CHECK(back.requests[i].true_output_len == w1.requests[i].true_output_len);
  }
}

TEST_CASE("children arrive after their parent finishes") {
  ClientProfile p = tree(3, 2);
  p.rate = 5;
  p.think_time = SimTime::from_ms(2);
  ClusterConfig c = small_cluster("dlpm", 2000);
  c.horizon = SimTime::from_s(4);
  auto w = generate_workload({p, p}, c.params, SimTime::from_s(3), 21);
  auto run = simulate(c, w);
  std::int64_t checked = 0;
  for (const auto& r : run.requests) {
    if (!r.parent || !r.arrival) continue;
    const auto& parent = run.requests[static_cast<std::size_t>(*r.parent)];
    REQUIRE(parent.finish);
    CHECK(*r.arrival >= *parent.finish + p.think_time);
    ++checked;
  }
  CHECK(checked > 0);
}
