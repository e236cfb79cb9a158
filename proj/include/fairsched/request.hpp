#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsched/sim_time.hpp"

namespace fairsched {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;
using TokenView = std::span<const Token>;

using RequestId = std::int64_t;
using ClientId = std::int32_t;
using WorkerId = std::int32_t;

/// Service units; integer so that ledgers and counters compare exactly.
using Service = std::int64_t;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Request {
  RequestId id = 0;
  ClientId client = 0;
  TokenSeq input;
  /// Hidden from schedulers; only the worker engine reads it to decide
  /// when generation stops.
  std::int64_t true_output_len = 1;
  SimTime arrival;
  std::optional<RequestId> parent;
  /// Delay between parent finish and this request's arrival (dependent requests only).
  SimTime think_time;
  /// Which canonical prefix the input starts with; trace bookkeeping only.
  std::int32_t shared_prefix_id = 0;
  std::int64_t shared_prefix_len = 0;

  std::int64_t input_len() const { return static_cast<std::int64_t>(input.size()); }
};

/// Scheduler-visible view of a request: everything except the output length.
struct RequestView {
  RequestId id = 0;
  ClientId client = 0;
  TokenView input;
  SimTime arrival;

  std::int64_t input_len() const { return static_cast<std::int64_t>(input.size()); }
};

inline RequestView view_of(const Request& r) { return {r.id, r.client, r.input, r.arrival}; }

struct CostWeights {
  Service extend = 1;  // w_e
  Service output = 2;  // w_q

  bool operator==(const CostWeights&) const = default;
};

struct SystemParams {
  std::int64_t max_input = 4096;    // L_input
  std::int64_t max_output = 1024;   // L_output
  std::int64_t batch_tokens = 16384;  // M
  std::int32_t workers = 1;         // D
  CostWeights weights;

  /// Throws InvalidArgument listing every offending field.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// Input tokens that must be computed given a cached prefix of `matched_prefix_len`.
std::int64_t extend_length(const RequestView& request, std::int64_t matched_prefix_len);
inline std::int64_t extend_length(const Request& request, std::int64_t matched_prefix_len) {
  return extend_length(view_of(request), matched_prefix_len);
}

}  // namespace fairsched
