#include "fairsched/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fairsched {

using nlohmann::json;

Service QuantumSetting::resolve(Service U) const {
  if (of_U) return static_cast<Service>(std::llround(*of_U * static_cast<double>(U)));
  return units;
}

namespace {

/// Reads one JSON object, remembering which keys were consumed so the rest
/// can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key) && !j_.at(key).is_null();
  }

  void integer(const std::string& key, std::int64_t& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number_integer()) return fail(key, "expected an integer");
    out = j_.at(key).get<std::int64_t>();
  }
  void integer(const std::string& key, std::int32_t& out) {
    std::int64_t v = out;
    integer(key, v);
    if (v < INT32_MIN || v > INT32_MAX) return fail(key, "out of range");
    out = static_cast<std::int32_t>(v);
  }
  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number_unsigned()) return fail(key, "expected a non-negative integer");
    out = j_.at(key).get<std::uint64_t>();
  }
  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_number()) return fail(key, "expected a number");
    out = j_.at(key).get<double>();
  }
  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) return fail(key, "expected a string");
    out = j_.at(key).get<std::string>();
  }
  void flag(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!j_.at(key).is_boolean()) return fail(key, "expected true or false");
    out = j_.at(key).get<bool>();
  }
  void seconds(const std::string& key, SimTime& out) { scaled(key, out, 1e6); }
  void millis(const std::string& key, SimTime& out) { scaled(key, out, 1e3); }
  void seconds(const std::string& key, std::optional<SimTime>& out) {
    if (!has(key)) return;
    SimTime t;
    scaled(key, t, 1e6);
    out = t;
  }

  const json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(k, "unknown key");
    }
  }

  void fail(const std::string& key, const std::string& what) {
    errors_.push_back((path_ + key).empty() ? what : path_ + key + ": " + what);
  }

  const std::string& path() const { return path_; }

 private:
  void scaled(const std::string& key, SimTime& out, double per_unit) {
    double v = 0;
    if (!has(key)) return;
    if (!j_.at(key).is_number()) return fail(key, "expected a number");
    v = j_.at(key).get<double>();
    if (!std::isfinite(v) || std::abs(v * per_unit) > 9e15) return fail(key, "out of range");
    out = SimTime::from_us(std::llround(v * per_unit));
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

double as_seconds(SimTime t) { return static_cast<double>(t.us()) / 1e6; }
double as_millis(SimTime t) { return static_cast<double>(t.us()) / 1e3; }

void read_quantum(Reader& r, QuantumSetting& q) {
  const bool units = r.has("quantum");
  const bool frac = r.has("quantum_of_U");
  if (units && frac) {
    r.fail("quantum", "give either quantum or quantum_of_U, not both");
    return;
  }
  if (units) {
    q.of_U.reset();
    r.integer("quantum", q.units);
  } else if (frac) {
    double v = 0;
    r.number("quantum_of_U", v);
    q.of_U = v;
    q.units = 0;
  }
}

void write_quantum(json& j, const QuantumSetting& q) {
  if (q.of_U) {
    j["quantum_of_U"] = *q.of_U;
  } else {
    j["quantum"] = q.units;
  }
}

}  // namespace

json profile_to_json(const ClientProfile& p) {
  json j;
  j["name"] = p.name;
  j["rate"] = p.rate;
  j["cv"] = p.cv;
  j["shape"] = p.shape;
  j["branches"] = p.branches;
  j["depth"] = p.depth;
  j["prefix_len"] = p.prefix_len;
  j["suffix_len"] = p.suffix_len;
  j["prefixes"] = p.prefixes;
  j["output"] = {{"kind", p.output.kind},
                 {"value", p.output.value},
                 {"low", p.output.low},
                 {"high", p.output.high},
                 {"sigma", p.output.sigma}};
  j["think_time_ms"] = as_millis(p.think_time);
  j["start_s"] = as_seconds(p.start);
  j["stop_s"] = p.stop ? json(as_seconds(*p.stop)) : json();
  j["misbehavior"] = p.misbehavior;
  j["factor"] = p.factor;
  j["s1_target"] = p.s1_target;
  return j;
}

ClientProfile profile_from_json(const json& j, const std::string& where, std::vector<std::string>& errors) {
  ClientProfile p;
  Reader r(j, where, errors);
  r.text("name", p.name);
  r.number("rate", p.rate);
  r.number("cv", p.cv);
  r.text("shape", p.shape);
  r.integer("branches", p.branches);
  r.integer("depth", p.depth);
  r.integer("prefix_len", p.prefix_len);
  r.integer("suffix_len", p.suffix_len);
  r.integer("prefixes", p.prefixes);
  if (const json* o = r.child("output")) {
    Reader out(*o, where + "output.", errors);
    out.text("kind", p.output.kind);
    out.integer("value", p.output.value);
    out.integer("low", p.output.low);
    out.integer("high", p.output.high);
    out.number("sigma", p.output.sigma);
    out.finish();
  }
  r.millis("think_time_ms", p.think_time);
  r.seconds("start_s", p.start);
  r.seconds("stop_s", p.stop);
  r.text("misbehavior", p.misbehavior);
  r.number("factor", p.factor);
  r.text("s1_target", p.s1_target);
  r.has("count");  // consumed by the caller
  r.finish();
  return p;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  Reader r(j, "", errors);
  r.text("name", c.name);
  r.unsigned_integer("seed", c.seed);
  r.seconds("horizon_s", c.horizon);
  if (const json* s = r.child("system")) {
    Reader sr(*s, "system.", errors);
    sr.integer("L_input", c.system.max_input);
    sr.integer("L_output", c.system.max_output);
    sr.integer("M", c.system.batch_tokens);
    sr.integer("D", c.system.workers);
    sr.integer("w_e", c.system.weights.extend);
    sr.integer("w_q", c.system.weights.output);
    sr.finish();
  }
  if (const json* w = r.child("worker")) {
    Reader wr(*w, "worker.", errors);
    wr.integer("cache_capacity", c.worker.cache_capacity);
    wr.integer("output_reserve", c.worker.output_reserve);
    wr.integer("chunk_size", c.worker.chunk_size);
    wr.integer("admission_interval", c.worker.admission_interval);
    wr.millis("c0_ms", c.worker.timing.fixed);
    wr.millis("c_prefill_ms", c.worker.timing.per_prefill_token);
    wr.millis("c_decode_ms", c.worker.timing.per_decode_request);
    wr.millis("eviction_delay_ms", c.worker.eviction_delay);
    wr.finish();
  }
  if (const json* l = r.child("local")) {
    Reader lr(*l, "local.", errors);
    lr.text("policy", c.local.policy);
    read_quantum(lr, c.local.quantum);
    lr.finish();
  }
  if (const json* g = r.child("global")) {
    Reader gr(*g, "global.", errors);
    gr.text("policy", c.global.policy);
    read_quantum(gr, c.global.quantum);
    gr.number("theta", c.global.theta);
    gr.finish();
  }
  if (const json* cl = r.child("clients")) {
    if (!cl->is_array()) {
      r.fail("clients", "expected a list of client profiles");
    } else {
      for (std::size_t i = 0; i < cl->size(); ++i) {
        const std::string where = "clients[" + std::to_string(i) + "].";
        const json& pj = cl->at(i);
        auto p = profile_from_json(pj, where, errors);
        std::int64_t count = 1;
        if (pj.is_object() && pj.contains("count")) {
          if (!pj["count"].is_number_integer() || pj["count"].get<std::int64_t>() < 1) {
            errors.push_back(where + "count: expected a positive integer");
          } else {
            count = pj["count"].get<std::int64_t>();
          }
        }
        for (std::int64_t k = 0; k < count; ++k) {
          auto copy = p;
          if (count > 1) copy.name += "#" + std::to_string(k);
          c.clients.push_back(std::move(copy));
        }
      }
    }
  }
  r.text("trace", c.trace);
  if (const json* m = r.child("metrics")) {
    Reader mr(*m, "metrics.", errors);
    mr.seconds("capacity_window_s", c.metrics.capacity_window);
    mr.flag("verify", c.metrics.verify);
    mr.finish();
  }
  if (const json* s = r.child("sweep")) {
    Reader sr(*s, "sweep.", errors);
    SweepStanza sw;
    sr.text("parameter", sw.parameter);
    if (const json* v = sr.child("values")) {
      if (!v->is_array()) {
        sr.fail("values", "expected a list of numbers");
      } else {
        for (const auto& x : *v) {
          if (!x.is_number()) {
            sr.fail("values", "expected a list of numbers");
            break;
          }
          sw.values.push_back(x.get<double>());
        }
      }
    }
    sr.finish();
    c.sweep = sw;
  }
  r.text("out", c.out);
  r.finish();
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidArgument(msg);
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["horizon_s"] = as_seconds(c.horizon);
  j["system"] = {{"L_input", c.system.max_input},  {"L_output", c.system.max_output},
                 {"M", c.system.batch_tokens},     {"D", c.system.workers},
                 {"w_e", c.system.weights.extend}, {"w_q", c.system.weights.output}};
  j["worker"] = {{"cache_capacity", c.worker.cache_capacity},
                 {"output_reserve", c.worker.output_reserve},
                 {"chunk_size", c.worker.chunk_size},
                 {"admission_interval", c.worker.admission_interval},
                 {"c0_ms", as_millis(c.worker.timing.fixed)},
                 {"c_prefill_ms", as_millis(c.worker.timing.per_prefill_token)},
                 {"c_decode_ms", as_millis(c.worker.timing.per_decode_request)},
                 {"eviction_delay_ms", as_millis(c.worker.eviction_delay)}};
  json local = {{"policy", c.local.policy}};
  write_quantum(local, c.local.quantum);
  j["local"] = local;
  json global = {{"policy", c.global.policy}, {"theta", c.global.theta}};
  write_quantum(global, c.global.quantum);
  j["global"] = global;
  j["clients"] = json::array();
  for (const auto& p : c.clients) j["clients"].push_back(profile_to_json(p));
  j["trace"] = c.trace;
  j["metrics"] = {{"capacity_window_s", as_seconds(c.metrics.capacity_window)},
                  {"verify", c.metrics.verify}};
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  j["out"] = c.out;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

Service ExperimentConfig::U() const { return compute_U(system); }

ClusterConfig ExperimentConfig::cluster() const {
  ClusterConfig k;
  k.seed = seed;
  k.horizon = horizon;
  k.params = system;
  k.cache_capacity = worker.cache_capacity;
  k.output_reserve = worker.output_reserve;
  k.chunk_size = worker.chunk_size;
  k.admission_interval = worker.admission_interval;
  k.timing = worker.timing;
  k.eviction_delay = worker.eviction_delay;
  const Service u = system.max_input > 0 && system.batch_tokens > 0 ? U() : 0;
  k.local = {local.policy, local.quantum.resolve(u)};
  k.global = {global.policy, global.quantum.resolve(u), global.theta};
  return k;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto collect = [&](auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      errors.emplace_back(e.what());
    }
  };
  collect([&] { system.validate(); });
  const bool system_ok = errors.empty();
  if (system_ok) collect([&] { cluster().validate(); });
  if (clients.empty() && trace.empty()) errors.emplace_back("clients: need at least one profile or a trace");
  if (system_ok) {
    for (const auto& p : clients) {
      collect([&] {
        validate_profile(p, system);
        validate_profile(apply_misbehavior(p, system), system);
      });
    }
  }
  if (local.quantum.of_U && !(*local.quantum.of_U >= 0)) errors.emplace_back("local.quantum_of_U");
  if (global.quantum.of_U && !(*global.quantum.of_U >= 0)) errors.emplace_back("global.quantum_of_U");
  if (!(metrics.capacity_window.us() > 0)) errors.emplace_back("metrics.capacity_window_s");
  if (sweep) {
    if (sweep->values.empty()) errors.emplace_back("sweep.values: empty");
    collect([&] {
      ExperimentConfig probe = *this;
      probe.sweep.reset();
      for (double v : sweep->values) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        set_config_value(probe, sweep->parameter, os.str());
      }
    });
  }
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidArgument(msg);
  }
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  json j = config_to_json(c);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &j;
  std::string rest = key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string part = rest.substr(0, dot);
    const bool last = dot == std::string::npos;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "': '" + part + "' is not a list index");
      }
      if (idx >= node->size()) throw InvalidArgument("config key '" + key + "': index out of range");
      node = &(*node)[idx];
    } else if (node->is_object()) {
      if (last) {
        if (part == "quantum") node->erase("quantum_of_U");
        if (part == "quantum_of_U") node->erase("quantum");
        if (!node->contains(part) && part != "quantum" && part != "quantum_of_U") {
          throw InvalidArgument("unknown config key '" + key + "'");
        }
        (*node)[part] = parsed;
        break;
      }
      if (!node->contains(part)) throw InvalidArgument("unknown config key '" + key + "'");
      node = &(*node)[part];
    } else {
      throw InvalidArgument("unknown config key '" + key + "'");
    }
    if (last) {
      *node = parsed;
      break;
    }
    rest = rest.substr(dot + 1);
  }
  c = config_from_json(j);
}

}  // namespace fairsched
