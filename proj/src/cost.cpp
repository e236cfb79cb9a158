#include "fairsched/cost.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace fairsched {

Service compute_U(const SystemParams& params) {
  return params.weights.extend * params.max_input + params.weights.output * params.batch_tokens;
}

void ServiceLog::append(ServiceEntry e) {
  if (e.tokens < 0) throw std::logic_error("negative service increment");
  if (!entries_.empty() && e.time < entries_.back().time) {
    throw std::logic_error("service entries must be appended in time order");
  }
  entries_.push_back(e);
}

void ServiceLog::record_extend(SimTime t, ClientId client, WorkerId worker,
                               std::int64_t extend_tokens, std::int64_t input_tokens) {
  append({t, client, worker, ServiceKind::Extend, extend_tokens, input_tokens});
}

void ServiceLog::record_output(SimTime t, ClientId client, WorkerId worker, std::int64_t tokens) {
  append({t, client, worker, ServiceKind::Output, tokens, 0});
}

Service ServiceLog::units(const ServiceEntry& e) const {
  return e.kind == ServiceKind::Extend ? weights_.extend * e.tokens : weights_.output * e.tokens;
}

namespace {

template <typename Fn>
Service sum_window(const std::vector<ServiceEntry>& entries, ClientId client, SimTime t1, SimTime t2,
                   Fn&& value) {
  if (t2 < t1) throw InvalidArgument("service interval with t2 < t1");
  auto lo = std::lower_bound(entries.begin(), entries.end(), t1,
                             [](const ServiceEntry& e, SimTime t) { return e.time < t; });
  Service total = 0;
  for (auto it = lo; it != entries.end() && it->time < t2; ++it) {
    if (it->client == client) total += value(*it);
  }
  return total;
}

}  // namespace

Service ServiceLog::service_in_interval(ClientId client, SimTime t1, SimTime t2) const {
  return sum_window(entries_, client, t1, t2, [this](const ServiceEntry& e) { return units(e); });
}

Service ServiceLog::client_perspective_service(ClientId client, SimTime t1, SimTime t2) const {
  return sum_window(entries_, client, t1, t2, [this](const ServiceEntry& e) {
    return e.kind == ServiceKind::Extend ? weights_.extend * e.input_tokens : units(e);
  });
}

Service ServiceLog::total_service() const {
  Service total = 0;
  for (const auto& e : entries_) total += units(e);
  return total;
}

std::int64_t ServiceLog::total_extend_tokens() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.kind == ServiceKind::Extend ? e.tokens : 0;
  return n;
}

std::int64_t ServiceLog::total_output_tokens() const {
  std::int64_t n = 0;
  for (const auto& e : entries_) n += e.kind == ServiceKind::Output ? e.tokens : 0;
  return n;
}

void ServiceLog::write_csv(std::ostream& os) const {
  os << "time_us,client,worker,kind,tokens,units\n";
  for (const auto& e : entries_) {
    os << e.time.us() << ',' << e.client << ',' << e.worker << ','
       << (e.kind == ServiceKind::Extend ? "extend" : "output") << ',' << e.tokens << ','
       << units(e) << '\n';
  }
}

}  // namespace fairsched
