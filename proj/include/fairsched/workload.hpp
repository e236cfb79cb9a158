#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

struct OutputDist {
  std::string kind = "constant";  // constant | uniform | lognormal
  std::int64_t value = 128;       // constant value, or lognormal median
  std::int64_t low = 1;           // uniform bounds
  std::int64_t high = 256;
  double sigma = 0.5;             // lognormal shape

  /// Draws one length, truncated to [1, max_output].
  std::int64_t sample(std::mt19937_64& rng, std::int64_t max_output) const;

  bool operator==(const OutputDist&) const = default;
};

struct ClientProfile {
  std::string name;
  double rate = 1.0;  // programs per second
  double cv = 1.0;    // coefficient of variation of inter-arrival times
  std::string shape = "flat";  // flat | tree
  std::int32_t branches = 1;
  std::int32_t depth = 0;
  std::int64_t prefix_len = 0;   // shared document / system prompt
  std::int64_t suffix_len = 32;  // unique tokens appended per request
  std::int32_t prefixes = 1;     // distinct shared prefixes the client draws from
  OutputDist output;
  SimTime think_time;            // child arrival = parent finish + think_time
  SimTime start;                 // first program no earlier than this
  std::optional<SimTime> stop;   // no programs at or after this
  std::string misbehavior = "none";  // none | S1 | S2
  double factor = 2.0;               // misbehavior multiplier
  std::string s1_target = "rate";    // rate | branches

  /// b^0 + b^1 + ... + b^d for trees, 1 for flat programs.
  std::int64_t requests_per_program() const;
  std::int64_t max_input_len() const;

  bool operator==(const ClientProfile&) const = default;
};

/// Returns the profile with its misbehavior multiplier applied. S1 scales
/// the program rate or the branch count; S2 scales the prefix length.
ClientProfile apply_misbehavior(ClientProfile profile, const SystemParams& params);

/// Throws InvalidArgument listing every offending field.
void validate_profile(const ClientProfile& p, const SystemParams& params);

/// Gamma-renewal arrival instants in [start, horizon): mean gap 1/rate,
/// coefficient of variation cv.
std::vector<SimTime> gen_gamma_arrivals(double rate, double cv, SimTime horizon,
                                        std::mt19937_64& rng, SimTime start = {});

/// Canonical token sequences. Prefix tokens live below 2^30 and suffix
/// tokens at or above it; the first token encodes the owner, so different
/// clients never share a prefix and different requests never share a suffix.
TokenSeq prefix_tokens(ClientId client, std::int32_t prefix_id, std::int64_t len);
TokenSeq suffix_tokens(RequestId id, std::int64_t len);

/// One program rooted at `root_arrival`, ids assigned from `first_id` in
/// breadth-first order. Children carry their parent id and arrive
/// `think_time` after the parent finishes (their `arrival` is the delay).
std::vector<Request> gen_program(const ClientProfile& profile, ClientId client,
                                 std::int32_t prefix_id, SimTime root_arrival,
                                 RequestId first_id, std::mt19937_64& output_rng,
                                 std::int64_t max_output);

/// Requests indexed by id. Roots carry absolute arrival times; dependent
/// requests carry their think delay.
struct Workload {
  std::uint64_t seed = 0;
  std::vector<Request> requests;

  std::vector<std::vector<RequestId>> children() const;
  std::int32_t client_count() const;
};

Workload generate_workload(const std::vector<ClientProfile>& profiles, const SystemParams& params,
                           SimTime horizon, std::uint64_t seed);

/// Compact trace line; token sequences are rebuilt from the ids.
struct TraceRecord {
  RequestId id = 0;
  ClientId client = 0;
  std::int64_t arrival_us = 0;  // think delay for dependent requests
  std::int64_t input_token_count = 0;
  std::int32_t shared_prefix_id = 0;
  std::int64_t prefix_len = 0;  // parent input length for dependent requests
  std::int64_t true_output_len = 1;
  std::optional<RequestId> parent_id;

  bool operator==(const TraceRecord&) const = default;
};

std::vector<TraceRecord> to_trace(const Workload& w);
Workload from_trace(const std::vector<TraceRecord>& records, std::uint64_t seed = 0);

void write_trace(std::ostream& os, const Workload& w);
Workload read_trace(std::istream& is);

}  // namespace fairsched
