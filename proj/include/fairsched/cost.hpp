#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

/// U: the most counter a single request can consume, w_e*L_input + w_q*M.
Service compute_U(const SystemParams& params);

enum class ServiceKind : std::uint8_t { Extend, Output };

struct ServiceEntry {
  SimTime time;
  ClientId client = 0;
  WorkerId worker = 0;
  ServiceKind kind = ServiceKind::Extend;
  /// Tokens computed: extend tokens for Extend, generated tokens for Output.
  std::int64_t tokens = 0;
  /// Full input length for Extend entries (client-perspective accounting).
  std::int64_t input_tokens = 0;
};

/// Append-only, time-ordered record of service delivered to each client.
///
/// Actual service counts extend tokens at w_e and output tokens at w_q.
/// Client-perspective service counts the whole input (cached prefix
/// included) at w_e instead of just the extend tokens.
class ServiceLog {
 public:
  explicit ServiceLog(CostWeights weights = {}) : weights_(weights) {}

  void record_extend(SimTime t, ClientId client, WorkerId worker, std::int64_t extend_tokens,
                     std::int64_t input_tokens);
  void record_output(SimTime t, ClientId client, WorkerId worker, std::int64_t tokens);

  /// Actual service with timestamps in [t1, t2).
  Service service_in_interval(ClientId client, SimTime t1, SimTime t2) const;
  Service client_perspective_service(ClientId client, SimTime t1, SimTime t2) const;

  Service total_service() const;
  std::int64_t total_extend_tokens() const;
  std::int64_t total_output_tokens() const;

  const std::vector<ServiceEntry>& entries() const { return entries_; }
  const CostWeights& weights() const { return weights_; }

  Service units(const ServiceEntry& e) const;

  /// CSV with header: time_us,client,worker,kind,tokens,units
  void write_csv(std::ostream& os) const;

 private:
  void append(ServiceEntry e);

  CostWeights weights_;
  std::vector<ServiceEntry> entries_;
};

}  // namespace fairsched
