#include "fairsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "fairsched/rng.hpp"

namespace fairsched {

namespace {

constexpr std::int64_t kTokenSpace = std::int64_t{1} << 30;
constexpr std::int32_t kMaxPrefixes = 4096;

std::int64_t clamp_len(std::int64_t v, std::int64_t max_output) {
  return std::clamp<std::int64_t>(v, 1, max_output);
}

}  // namespace

std::int64_t OutputDist::sample(std::mt19937_64& rng, std::int64_t max_output) const {
  if (kind == "constant") return clamp_len(value, max_output);
  if (kind == "uniform") {
    std::uniform_int_distribution<std::int64_t> d(low, high);
    return clamp_len(d(rng), max_output);
  }
  if (kind == "lognormal") {
    std::lognormal_distribution<double> d(std::log(static_cast<double>(value)), sigma);
    return clamp_len(std::llround(d(rng)), max_output);
  }
  throw InvalidArgument("unknown output distribution '" + kind + "'");
}

std::int64_t ClientProfile::requests_per_program() const {
  if (shape != "tree") return 1;
  std::int64_t total = 0, level = 1;
  for (std::int32_t d = 0; d <= depth; ++d) {
    total += level;
    level *= branches;
  }
  return total;
}

std::int64_t ClientProfile::max_input_len() const {
  const std::int64_t levels = shape == "tree" ? depth + 1 : 1;
  return prefix_len + levels * suffix_len;
}

void validate_profile(const ClientProfile& p, const SystemParams& params) {
  std::string bad;
  auto require = [&](bool ok, const std::string& field) {
    if (!ok) bad += (bad.empty() ? "" : ", ") + field;
  };
  require(p.rate > 0 && std::isfinite(p.rate), "rate");
  require(p.cv > 0 && std::isfinite(p.cv), "cv");
  require(p.shape == "flat" || p.shape == "tree", "shape");
  require(p.branches >= 1, "branches");
  require(p.depth >= 0 && p.depth <= 12, "depth");
  require(p.prefix_len >= 0, "prefix_len");
  require(p.suffix_len >= 1, "suffix_len");
  require(p.prefixes >= 1 && p.prefixes <= kMaxPrefixes, "prefixes");
  require(p.max_input_len() <= params.max_input, "prefix_len + levels * suffix_len <= L_input");
  require(p.output.kind == "constant" || p.output.kind == "uniform" || p.output.kind == "lognormal",
          "output.kind");
  require(p.output.kind != "uniform" || (p.output.low >= 1 && p.output.low <= p.output.high),
          "output.low/high");
  require(p.output.kind == "uniform" || p.output.value >= 1, "output.value");
  require(p.output.sigma >= 0, "output.sigma");
  require(p.misbehavior == "none" || p.misbehavior == "S1" || p.misbehavior == "S2", "misbehavior");
  require(p.s1_target == "rate" || p.s1_target == "branches", "s1_target");
  require(p.factor > 0, "factor");
  require(p.think_time.us() >= 0, "think_time");
  require(p.requests_per_program() <= 1'000'000, "branches^depth");
  if (!bad.empty()) {
    throw InvalidArgument("invalid client profile '" + p.name + "': " + bad);
  }
}

ClientProfile apply_misbehavior(ClientProfile p, const SystemParams& params) {
  if (p.misbehavior == "S1") {
    if (p.s1_target == "branches") {
      p.branches = static_cast<std::int32_t>(std::llround(p.branches * p.factor));
    } else {
      p.rate *= p.factor;
    }
  } else if (p.misbehavior == "S2") {
    p.prefix_len = std::llround(static_cast<double>(p.prefix_len) * p.factor);
    if (p.max_input_len() > params.max_input) {
      throw InvalidArgument("S2 factor on '" + p.name + "' pushes the input to " +
                            std::to_string(p.max_input_len()) + " tokens, above L_input");
    }
  } else if (p.misbehavior != "none") {
    throw InvalidArgument("unknown misbehavior tag '" + p.misbehavior + "'");
  }
  p.misbehavior = "none";
  return p;
}

std::vector<SimTime> gen_gamma_arrivals(double rate, double cv, SimTime horizon,
                                        std::mt19937_64& rng, SimTime start) {
  if (!(rate > 0) || !(cv > 0)) throw InvalidArgument("gamma arrivals need rate > 0 and cv > 0");
  std::gamma_distribution<double> gap(1.0 / (cv * cv), cv * cv / rate);
  std::vector<SimTime> out;
  double t = start.seconds();
  while (true) {
    t += gap(rng);
    const SimTime at = SimTime::from_s(t);
    if (at >= horizon) break;
    out.push_back(at);
  }
  return out;
}

TokenSeq prefix_tokens(ClientId client, std::int32_t prefix_id, std::int64_t len) {
  TokenSeq out;
  out.reserve(static_cast<std::size_t>(len));
  const std::uint64_t key = (static_cast<std::uint64_t>(client) << 12) | static_cast<std::uint64_t>(prefix_id);
  for (std::int64_t i = 0; i < len; ++i) {
    const std::uint64_t v = i == 0 ? key : mix64(key * 0x100000001b3ULL + static_cast<std::uint64_t>(i));
    out.push_back(static_cast<Token>(v % kTokenSpace));
  }
  return out;
}

TokenSeq suffix_tokens(RequestId id, std::int64_t len) {
  TokenSeq out;
  out.reserve(static_cast<std::size_t>(len));
  const auto key = static_cast<std::uint64_t>(id);
  for (std::int64_t i = 0; i < len; ++i) {
    const std::uint64_t v = i == 0 ? key : mix64(~key * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(i));
    out.push_back(static_cast<Token>(kTokenSpace + static_cast<std::int64_t>(v % kTokenSpace)));
  }
  return out;
}

std::vector<Request> gen_program(const ClientProfile& p, ClientId client, std::int32_t prefix_id,
                                 SimTime root_arrival, RequestId first_id,
                                 std::mt19937_64& output_rng, std::int64_t max_output) {
  std::vector<Request> out;
  Request root;
  root.id = first_id;
  root.client = client;
  root.input = prefix_tokens(client, prefix_id, p.prefix_len);
  auto sfx = suffix_tokens(root.id, p.suffix_len);
  root.input.insert(root.input.end(), sfx.begin(), sfx.end());
  root.true_output_len = p.output.sample(output_rng, max_output);
  root.arrival = root_arrival;
  root.shared_prefix_id = prefix_id;
  root.shared_prefix_len = p.prefix_len;
  out.push_back(std::move(root));
  if (p.shape != "tree") return out;

  std::deque<std::pair<std::size_t, std::int32_t>> frontier{{0, 0}};
  while (!frontier.empty()) {
    auto [idx, level] = frontier.front();
    frontier.pop_front();
    if (level == p.depth) continue;
    for (std::int32_t b = 0; b < p.branches; ++b) {
      Request child;
      child.id = first_id + static_cast<RequestId>(out.size());
      child.client = client;
      child.input = out[idx].input;
      auto s = suffix_tokens(child.id, p.suffix_len);
      child.input.insert(child.input.end(), s.begin(), s.end());
      child.true_output_len = p.output.sample(output_rng, max_output);
      child.parent = out[idx].id;
      child.think_time = p.think_time;
      child.arrival = p.think_time;
      child.shared_prefix_id = prefix_id;
      child.shared_prefix_len = out[idx].input_len();
      out.push_back(std::move(child));
      frontier.emplace_back(out.size() - 1, level + 1);
    }
  }
  return out;
}

std::vector<std::vector<RequestId>> Workload::children() const {
  std::vector<std::vector<RequestId>> out(requests.size());
  for (const auto& r : requests) {
    if (r.parent) out.at(static_cast<std::size_t>(*r.parent)).push_back(r.id);
  }
  return out;
}

std::int32_t Workload::client_count() const {
  std::int32_t n = 0;
  for (const auto& r : requests) n = std::max(n, r.client + 1);
  return n;
}

Workload generate_workload(const std::vector<ClientProfile>& profiles, const SystemParams& params,
                           SimTime horizon, std::uint64_t seed) {
  params.validate();
  SeedSource seeds(seed);
  struct Root {
    SimTime at;
    ClientId client;
    std::size_t index;
    std::int32_t prefix_id;
  };
  std::vector<ClientProfile> effective;
  std::vector<std::mt19937_64> output_rngs;
  std::vector<Root> roots;
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    validate_profile(profiles[c], params);
    effective.push_back(apply_misbehavior(profiles[c], params));
    const auto& p = effective.back();
    validate_profile(p, params);
    const std::string tag = std::to_string(c);
    auto arr_rng = seeds.stream("arrivals/" + tag);
    auto pfx_rng = seeds.stream("prefix/" + tag);
    output_rngs.push_back(seeds.stream("outputs/" + tag));
    const SimTime end = p.stop ? std::min(*p.stop, horizon) : horizon;
    auto times = gen_gamma_arrivals(p.rate, p.cv, end, arr_rng, p.start);
    std::uniform_int_distribution<std::int32_t> pick(0, p.prefixes - 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
      roots.push_back({times[i], static_cast<ClientId>(c), i, pick(pfx_rng)});
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) {
    return std::tie(x.at, x.client, x.index) < std::tie(y.at, y.client, y.index);
  });

  Workload w;
  w.seed = seed;
  for (const auto& root : roots) {
    const auto c = static_cast<std::size_t>(root.client);
    auto program = gen_program(effective[c], root.client, root.prefix_id, root.at,
                               static_cast<RequestId>(w.requests.size()), output_rngs[c],
                               params.max_output);
    for (auto& r : program) w.requests.push_back(std::move(r));
  }
  return w;
}

std::vector<TraceRecord> to_trace(const Workload& w) {
  std::vector<TraceRecord> out;
  out.reserve(w.requests.size());
  for (const auto& r : w.requests) {
    out.push_back({r.id, r.client, r.parent ? r.think_time.us() : r.arrival.us(), r.input_len(),
                   r.shared_prefix_id, r.shared_prefix_len, r.true_output_len, r.parent});
  }
  return out;
}

Workload from_trace(const std::vector<TraceRecord>& records, std::uint64_t seed) {
  Workload w;
  w.seed = seed;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& t = records[i];
    const std::string where = "trace record " + std::to_string(i) + ": ";
    if (t.id != static_cast<RequestId>(i)) throw InvalidArgument(where + "ids must be 0..n-1 in order");
    if (t.client < 0) throw InvalidArgument(where + "negative client");
    if (t.input_token_count < 1 || t.prefix_len < 0 || t.prefix_len >= t.input_token_count) {
      throw InvalidArgument(where + "need 0 <= prefix_len < input_token_count");
    }
    if (t.true_output_len < 1) throw InvalidArgument(where + "true_output_len must be positive");
    if (t.arrival_us < 0) throw InvalidArgument(where + "negative arrival_time");
    Request r;
    r.id = t.id;
    r.client = t.client;
    r.true_output_len = t.true_output_len;
    r.shared_prefix_id = t.shared_prefix_id;
    r.shared_prefix_len = t.prefix_len;
    if (t.parent_id) {
      if (*t.parent_id < 0 || *t.parent_id >= t.id) throw InvalidArgument(where + "parent must precede child");
      const Request& parent = w.requests[static_cast<std::size_t>(*t.parent_id)];
      if (parent.input_len() != t.prefix_len) {
        throw InvalidArgument(where + "prefix_len must equal the parent's input length");
      }
      r.input = parent.input;
      r.parent = t.parent_id;
      r.think_time = SimTime::from_us(t.arrival_us);
    } else {
      if (t.shared_prefix_id < 0 || t.shared_prefix_id >= kMaxPrefixes) {
        throw InvalidArgument(where + "shared_prefix_id out of range");
      }
      r.input = prefix_tokens(t.client, t.shared_prefix_id, t.prefix_len);
    }
    r.arrival = SimTime::from_us(t.arrival_us);
    auto s = suffix_tokens(r.id, t.input_token_count - t.prefix_len);
    r.input.insert(r.input.end(), s.begin(), s.end());
    w.requests.push_back(std::move(r));
  }
  return w;
}

void write_trace(std::ostream& os, const Workload& w) {
  nlohmann::ordered_json head;
  head["type"] = "trace";
  head["seed"] = w.seed;
  os << head.dump() << '\n';
  for (const auto& t : to_trace(w)) {
    nlohmann::ordered_json j;
    j["id"] = t.id;
    j["client"] = t.client;
    j["arrival_time"] = t.arrival_us;
    j["input_token_count"] = t.input_token_count;
    j["shared_prefix_id"] = t.shared_prefix_id;
    j["prefix_len"] = t.prefix_len;
    j["true_output_len"] = t.true_output_len;
    j["parent_id"] = t.parent_id ? nlohmann::ordered_json(*t.parent_id) : nlohmann::ordered_json();
    os << j.dump() << '\n';
  }
}

Workload read_trace(std::istream& is) {
  std::vector<TraceRecord> records;
  std::uint64_t seed = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (j.value("type", "") == "trace") {
        seed = j.value("seed", std::uint64_t{0});
        continue;
      }
      TraceRecord t;
      t.id = j.at("id");
      t.client = j.at("client");
      t.arrival_us = j.at("arrival_time");
      t.input_token_count = j.at("input_token_count");
      t.shared_prefix_id = j.value("shared_prefix_id", 0);
      t.prefix_len = j.value("prefix_len", std::int64_t{0});
      t.true_output_len = j.at("true_output_len");
      if (j.contains("parent_id") && !j["parent_id"].is_null()) t.parent_id = j["parent_id"].get<RequestId>();
      records.push_back(t);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return from_trace(records, seed);
}

}  // namespace fairsched
