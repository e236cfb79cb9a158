#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairsched/event_log.hpp"
#include "fairsched/request.hpp"
#include "fairsched/sim_time.hpp"

namespace fairsched {

/// (sum x)^2 / (n * sum x^2). Throws on empty, negative or all-zero input.
double jain_index(std::span<const double> values);

/// Nearest-rank percentile, p in (0, 100].
SimTime percentile(std::vector<SimTime> values, double p);

/// Matched prefix tokens over input tokens, summed over admissions.
double cache_hit_rate(const EventLog& log);

enum class BacklogScope : std::uint8_t {
  Anywhere,    // pending at some worker
  Everywhere,  // pending at every worker
};

/// A maximal run of consecutive post-event states in which a client is
/// backlogged. States are indexed by the event that produced them.
struct BacklogRun {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  SimTime t_first;
  SimTime t_last;
};

/// State of a finished run reconstructed from its event log alone.
///
/// Service is attributed to the event that produced it, so windows are
/// half-open event ranges (i, j]: the service of events i+1..j, with the
/// client backlogged in every state i..j.
class LogReplay {
 public:
  explicit LogReplay(const EventLog& log);

  const RunMeta& meta() const { return meta_; }
  std::uint64_t events() const { return events_; }
  std::int32_t clients() const { return clients_; }
  SimTime time_of(std::uint64_t event) const { return times_.at(event); }

  /// Actual service (w_e * extend + w_q * output) through the end of `event`.
  Service cumulative(ClientId c, std::uint64_t event) const;
  /// Cumulative service at every event for one client.
  const std::vector<Service>& cumulative(ClientId c) const { return cum_.at(static_cast<std::size_t>(c)); }

  /// Backlogged after `event`?
  bool backlogged(ClientId c, std::uint64_t event, BacklogScope scope) const;
  std::vector<BacklogRun> backlog_runs(ClientId c, BacklogScope scope) const;

 private:
  RunMeta meta_;
  std::uint64_t events_ = 0;
  std::int32_t clients_ = 0;
  std::vector<SimTime> times_;
  std::vector<std::vector<Service>> cum_;
  std::vector<std::vector<std::uint8_t>> anywhere_;
  std::vector<std::vector<std::uint8_t>> everywhere_;
};

/// Backlog timeline of one client, in virtual time.
std::vector<BacklogRun> backlogged_intervals(ClientId client, const EventLog& log,
                                             BacklogScope scope = BacklogScope::Anywhere);

struct BoundReport {
  std::string check;    // which bound
  std::string subject;  // clients or request the worst case refers to
  double measured = 0;
  double bound = 0;
  double margin = 0;  // bound - measured
  bool applicable = false;
  bool pass = true;   // inapplicable reports pass
  /// The run's policies promise this bound, so a failure is a bug.
  bool guaranteed = false;
  std::string witness;

  static BoundReport inapplicable(std::string check, std::string why);
};

/// Largest |W_f - W_g| over windows where both are backlogged; bound 2(U + Q_u).
BoundReport verify_service_bound_local(const LogReplay& replay, ClientId f, ClientId g);
/// Largest W_g - W_f over windows where f is backlogged; bound 2(U + Q_u).
BoundReport verify_backlogged_vs_any_local(const LogReplay& replay, ClientId f, ClientId g);

/// Multi-worker analogues with f (and g) backlogged at every worker; bound 2 D (U + Q_u).
BoundReport verify_service_bound_global(const LogReplay& replay);
BoundReport verify_backlogged_vs_any_global(const LogReplay& replay);

/// Worst pairwise report over every client pair of a single-worker run.
BoundReport verify_service_bound_local_all(const LogReplay& replay);
BoundReport verify_backlogged_vs_any_local_all(const LogReplay& replay);

/// Smallest per-worker service rate (units/s) over every window of
/// `width` lying inside one busy period. nullopt if no busy period is that long.
std::optional<double> capacity_lower_bound(const EventLog& log, SimTime width);

struct LatencyProbeResult {
  RequestId request = -1;
  ClientId client = -1;
  SimTime arrival;
  std::optional<SimTime> admit;
  SimTime delay;  // admit - arrival, or horizon - arrival if never admitted
};

/// Requests whose client had nothing pending and nothing running when they arrived.
std::vector<LatencyProbeResult> fresh_client_requests(const EventLog& log);

/// Dispatch delay of fresh-client requests against 2(n-1)(Q_u+U)/a for one
/// worker, (n-1) D (2U + 2Q_u)/a for several.
BoundReport verify_latency_bound(const EventLog& log, SimTime window = SimTime::from_s(1));

/// Latency bound formula alone, in seconds.
double latency_bound_seconds(std::int32_t clients, std::int32_t workers, Service U, Service quantum,
                             double capacity);

struct CounterReport {
  Service min = 0;
  Service max = 0;
  std::uint64_t samples = 0;
  BoundReport lower;  // q > -U
  BoundReport upper;  // q <= Q
};

/// Replays local deficit counters from the log (deficit local policy only).
CounterReport verify_local_counters(const EventLog& log);
/// Replays global per-(client, worker) counters (d2lpm only). The lower
/// report is informational: it is never marked failed.
CounterReport verify_global_counters(const EventLog& log);

/// Idle-with-admissible-work and pool overflow records must be absent.
BoundReport verify_work_conservation(const EventLog& log);
BoundReport verify_pool_safety(const EventLog& log);

/// Every check that applies to the run's policies.
std::vector<BoundReport> verify_all(const EventLog& log, SimTime window = SimTime::from_s(1));

/// CSV: check,subject,applicable,guaranteed,pass,measured,bound,margin,witness
void write_reports_csv(std::ostream& os, std::span<const BoundReport> reports);

}  // namespace fairsched
