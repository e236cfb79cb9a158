#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fairsched/config.hpp"
#include "fairsched/experiment.hpp"
#include "fairsched/metrics.hpp"

namespace fs = std::filesystem;
using namespace fairsched;

namespace {

constexpr int kGuaranteeFailed = 1;
constexpr int kBadInput = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> policies;
  std::vector<std::string> sets;
};

bool is_local(const std::string& p) { return p == "fcfs" || p == "lpm" || p == "dlpm" || p == "vtc"; }
bool is_global(const std::string& p) {
  return p == "d2lpm" || p == "rr" || p == "client_rr" || p == "threshold";
}

/// "dlpm", "global=d2lpm", "d2lpm,dlpm" or "local.quantum_of_U=0.5".
void apply_policy(ExperimentConfig& c, const std::string& spec) {
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string part = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto eq = part.find('=');
    if (eq != std::string::npos) {
      std::string key = part.substr(0, eq);
      if (key == "local" || key == "global") key += ".policy";
      set_config_value(c, key, part.substr(eq + 1));
    } else if (is_local(part)) {
      set_config_value(c, "local.policy", part);
    } else if (is_global(part)) {
      set_config_value(c, "global.policy", part);
    } else {
      throw InvalidArgument("unknown policy '" + part + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
}

ExperimentConfig load(const Common& o, bool with_policies = true) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + s + "'");
    set_config_value(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out = o.out;
  if (with_policies) {
    for (const auto& p : o.policies) apply_policy(c, p);
  }
  c.validate();
  return c;
}

void print_failures(const std::vector<BoundReport>& reports) {
  for (const auto& r : reports) {
    if (!r.applicable) continue;
    std::cout << "  " << (r.pass ? "ok  " : "FAIL") << ' ' << r.check << ": measured " << r.measured
              << " bound " << r.bound << (r.guaranteed ? "" : " (informational)");
    if (!r.pass && !r.witness.empty()) std::cout << " at " << r.witness;
    std::cout << '\n';
  }
}

int cmd_run(const Common& o) {
  auto c = load(o);
  auto r = run_experiment(c);
  write_artifacts(r, c.out);
  write_summary_block(std::cout, r.summary);
  print_failures(r.reports);
  std::cout << "artifacts in " << c.out << '\n';
  return has_guarantee_failure(r.reports) ? kGuaranteeFailed : 0;
}

int cmd_compare(const Common& o, const std::vector<std::string>& extra_configs) {
  std::vector<ExperimentConfig> configs;
  if (!extra_configs.empty()) {
    for (const auto& path : extra_configs) {
      Common one = o;
      one.config = path;
      configs.push_back(load(one));
    }
  } else {
    auto base = load(o, false);
    if (o.policies.empty()) throw InvalidArgument("compare needs several --config files or --policy variants");
    for (const auto& p : o.policies) {
      auto c = base;
      apply_policy(c, p);
      c.name = p;
      c.validate();
      configs.push_back(std::move(c));
    }
  }
  auto results = compare(configs);
  const fs::path out = configs.front().out;
  std::vector<Summary> rows;
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_artifacts(results[i], out / ("run" + std::to_string(i)));
    rows.push_back(results[i].summary);
    failed = failed || has_guarantee_failure(results[i].reports);
  }
  fs::create_directories(out);
  std::ofstream table(out / "compare.csv");
  write_summary_table(table, rows);
  write_summary_table(std::cout, rows);
  return failed ? kGuaranteeFailed : 0;
}

int cmd_sweep(const Common& o) {
  auto c = load(o);
  auto results = sweep(c);
  const fs::path out = c.out;
  std::vector<Summary> rows;
  bool failed = false;
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_artifacts(results[i], out / ("point" + std::to_string(i)));
    rows.push_back(results[i].summary);
    failed = failed || has_guarantee_failure(results[i].reports);
  }
  fs::create_directories(out);
  std::ofstream table(out / "sweep.csv");
  write_summary_table(table, rows);
  write_summary_table(std::cout, rows);
  return failed ? kGuaranteeFailed : 0;
}

int cmd_verify(const std::string& log_path, const std::string& out, double window_s) {
  std::ifstream in(log_path);
  if (!in) throw InvalidArgument("cannot open event log '" + log_path + "'");
  const EventLog log = EventLog::read(in);
  const auto reports = verify_all(log, SimTime::from_s(window_s));
  if (!out.empty()) {
    fs::create_directories(fs::path(out) / "bounds");
    for (const auto& b : reports) {
      std::ofstream os(fs::path(out) / "bounds" / (b.check + ".csv"));
      write_reports_csv(os, std::span<const BoundReport>(&b, 1));
    }
  }
  write_reports_csv(std::cout, reports);
  return has_guarantee_failure(reports) ? kGuaranteeFailed : 0;
}

int cmd_gen_trace(const Common& o) {
  auto c = load(o);
  const Workload w = build_workload(c);
  fs::path path = c.out;
  if (path.extension() != ".jsonl") {
    fs::create_directories(path);
    path /= "trace.jsonl";
  }
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  write_trace(os, w);
  std::cout << w.requests.size() << " requests written to " << path.string() << '\n';
  return 0;
}

void add_common(CLI::App* app, Common& o) {
  app->add_option("--config,-c", o.config, "experiment config (JSON)");
  app->add_option("--seed", o.seed, "override the config seed");
  app->add_option("--out,-o", o.out, "output directory");
  app->add_option("--policy,-p", o.policies,
                  "policy override: a name (dlpm, d2lpm, ...), local=NAME, global=NAME or key=value; "
                  "comma separated");
  app->add_option("--set", o.sets, "override any config key, e.g. system.D=4");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair, locality-aware LLM request scheduling simulator"};
  app.require_subcommand(1);

  Common run_o, cmp_o, sweep_o, trace_o;
  auto* run = app.add_subcommand("run", "simulate one config and write its artifacts");
  add_common(run, run_o);
  auto* cmp = app.add_subcommand("compare", "run several policies on one shared workload");
  add_common(cmp, cmp_o);
  std::vector<std::string> cmp_configs;
  cmp->add_option("configs", cmp_configs, "configs to compare (instead of --policy variants)");
  auto* sw = app.add_subcommand("sweep", "run every point of the config's sweep stanza");
  add_common(sw, sweep_o);
  auto* ver = app.add_subcommand("verify", "re-run the bound checks on an existing event log");
  std::string log_path, ver_out;
  double window_s = 1.0;
  ver->add_option("log", log_path, "event_log.jsonl")->required();
  ver->add_option("--out,-o", ver_out, "write bounds/<check>.csv here");
  ver->add_option("--window", window_s, "capacity window in seconds");
  auto* gen = app.add_subcommand("gen-trace", "write the config's workload as a trace");
  add_common(gen, trace_o);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(run_o);
    if (*cmp) return cmd_compare(cmp_o, cmp_configs);
    if (*sw) return cmd_sweep(sweep_o);
    if (*ver) return cmd_verify(log_path, ver_out, window_s);
    if (*gen) return cmd_gen_trace(trace_o);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return 0;
}
