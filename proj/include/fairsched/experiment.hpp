#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairsched/config.hpp"
#include "fairsched/metrics.hpp"
#include "fairsched/simulation.hpp"

namespace fairsched {

struct Summary {
  std::string name;
  std::string local_policy;
  std::string global_policy;
  Service quantum_u = 0;
  Service quantum_w = 0;
  std::int64_t requests = 0;
  std::int64_t finished = 0;
  double elapsed_s = 0;
  double throughput_tps = 0;  // admitted input + generated tokens per second
  double jain = 0;
  std::vector<double> client_rates;  // client-perspective service per second
  double p50_latency_ms = 0;
  double p99_latency_ms = 0;
  double p50_ttft_ms = 0;
  double p99_ttft_ms = 0;
  double cache_hit_rate = 0;
  /// Largest service gap between two co-backlogged clients.
  double max_service_gap = 0;
  std::uint64_t log_hash = 0;
  std::int64_t failed_guarantees = 0;

  nlohmann::json to_json() const;
};

/// Jain's index over client-perspective service rates, measured over the
/// span in which every client has arrived and none has gone quiet yet.
double fairness_index(const RunResult& run, std::vector<double>* rates = nullptr);

Workload build_workload(const ExperimentConfig& c);

struct ExperimentResult {
  ExperimentConfig config;
  RunResult run;
  std::vector<BoundReport> reports;
  Summary summary;
};

/// Simulates and verifies without touching the file system.
ExperimentResult run_experiment(const ExperimentConfig& c);
ExperimentResult run_experiment(const ExperimentConfig& c, const Workload& w);

/// Writes effective_config.json, event_log.jsonl, service.csv, workers.csv,
/// dispatch.csv, requests.csv, bounds/<check>.csv and summary.json.
void write_artifacts(const ExperimentResult& r, const std::filesystem::path& dir);

/// Any applicable report on a bound the run's policies promise that failed.
bool has_guarantee_failure(const std::vector<BoundReport>& reports);

/// Runs every config on one shared workload. Throws if the configs would
/// generate different workloads.
std::vector<ExperimentResult> compare(const std::vector<ExperimentConfig>& configs);

/// One run per sweep value, in order.
std::vector<ExperimentResult> sweep(const ExperimentConfig& c);

void write_summary_table(std::ostream& os, const std::vector<Summary>& rows);
void write_summary_block(std::ostream& os, const Summary& s);

/// CSV writers used by write_artifacts.
void write_workers_csv(std::ostream& os, const RunResult& run);
void write_dispatch_csv(std::ostream& os, const RunResult& run);
void write_requests_csv(std::ostream& os, const RunResult& run);

}  // namespace fairsched
