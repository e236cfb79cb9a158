#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairsched/simulation.hpp"
#include "fairsched/workload.hpp"

namespace fairsched {

/// Quantum given either in service units or as a multiple of U.
struct QuantumSetting {
  Service units = 0;
  std::optional<double> of_U;

  Service resolve(Service U) const;
  bool operator==(const QuantumSetting&) const = default;
};

struct LocalStanza {
  std::string policy = "dlpm";
  QuantumSetting quantum{0, 1.0};
  bool operator==(const LocalStanza&) const = default;
};

struct GlobalStanza {
  std::string policy = "rr";
  QuantumSetting quantum{0, 1.0};
  double theta = 0.5;
  bool operator==(const GlobalStanza&) const = default;
};

struct WorkerStanza {
  std::int64_t cache_capacity = 0;
  std::int64_t output_reserve = -1;
  std::int64_t chunk_size = 0;
  std::int64_t admission_interval = 1;
  StepTiming timing;
  SimTime eviction_delay;
  bool operator==(const WorkerStanza&) const = default;
};

struct MetricsStanza {
  SimTime capacity_window = SimTime::from_s(1);
  bool verify = true;
  bool operator==(const MetricsStanza&) const = default;
};

/// One point per value of a dotted config key, e.g. "local.quantum_of_U".
struct SweepStanza {
  std::string parameter;
  std::vector<double> values;
  bool operator==(const SweepStanza&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  SimTime horizon = SimTime::from_s(60);
  SystemParams system;
  WorkerStanza worker;
  LocalStanza local;
  GlobalStanza global;
  std::vector<ClientProfile> clients;
  /// Replaces generated clients with a recorded trace when set.
  std::string trace;
  MetricsStanza metrics;
  std::optional<SweepStanza> sweep;
  std::string out = "out";

  /// Throws InvalidArgument listing every offending field.
  void validate() const;
  ClusterConfig cluster() const;
  Service U() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Missing keys take their defaults; unknown keys and bad values are
/// collected and reported together.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Every field, defaults included.
nlohmann::json config_to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::string& path);

/// Sets one dotted key ("local.policy", "global.quantum_of_U", "seed", ...)
/// from its textual value.
void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value);

nlohmann::json profile_to_json(const ClientProfile& p);
ClientProfile profile_from_json(const nlohmann::json& j, const std::string& where,
                                std::vector<std::string>& errors);

}  // namespace fairsched
