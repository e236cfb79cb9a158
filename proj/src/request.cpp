#include "fairsched/request.hpp"

namespace fairsched {

void SystemParams::validate() const {
  std::string bad;
  auto require = [&](bool ok, const char* field) {
    if (!ok) bad += bad.empty() ? field : std::string(", ") + field;
  };
  require(max_input > 0, "L_input");
  require(max_output > 0, "L_output");
  require(batch_tokens > 0, "M");
  // An empty worker must be able to take any request, or work conservation fails.
  require(max_input + max_output <= batch_tokens, "L_input + L_output <= M");
  require(workers > 0, "D");
  require(weights.extend >= 0, "w_e");
  require(weights.output >= 0, "w_q");
  if (!bad.empty()) throw InvalidArgument("invalid system parameters: " + bad);
}

std::int64_t extend_length(const RequestView& request, std::int64_t matched_prefix_len) {
  if (matched_prefix_len < 0 || matched_prefix_len > request.input_len()) {
    throw InvalidArgument("matched prefix length " + std::to_string(matched_prefix_len) +
                          " outside [0, " + std::to_string(request.input_len()) + "]");
  }
  return request.input_len() - matched_prefix_len;
}

}  // namespace fairsched
