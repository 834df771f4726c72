#include "specseg/select.hpp"

#include <algorithm>
#include <sstream>

#include "specseg/error.hpp"

namespace specseg {

void SelectorConfig::validate() const {
  if (!(r_max > 0.0 && r_max <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "r_max must lie in (0, 1]");
  }
}

double white_ratio(const BinaryMask& mask) noexcept {
  if (mask.empty()) return 0.0;
  return static_cast<double>(foreground_count(mask)) / static_cast<double>(mask.size());
}

SelectionResult select_by_ratio(const std::vector<double>& ratios, const SelectorConfig& config) {
  config.validate();
  if (ratios.empty()) {
    throw Error(ErrorCode::NoCandidates, "selector received no candidates");
  }
  SelectionResult result;
  result.ratios = ratios;
  result.valid.reserve(ratios.size());
  bool any_valid = false;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const bool ok = ratios[i] <= config.r_max;
    result.valid.push_back(ok);
    // Strict '>' keeps the lowest index on ties.
    if (ok && (!any_valid || ratios[i] > ratios[result.selected_index])) {
      result.selected_index = i;
      any_valid = true;
    }
  }
  if (any_valid) {
    return result;
  }
  if (config.fallback_policy == FallbackPolicy::strict) {
    std::ostringstream msg;
    msg << "every candidate exceeds r_max = " << config.r_max << " (ratios:";
    for (const auto r : ratios) msg << ' ' << r;
    msg << ')';
    throw Error(ErrorCode::NoValidMask, msg.str());
  }
  result.selected_index = static_cast<std::size_t>(std::min_element(ratios.begin(), ratios.end()) - ratios.begin());
  result.used_fallback = true;
  return result;
}

SelectionResult select_mask(const CandidateSet& candidates, const SelectorConfig& config) {
  std::vector<double> ratios;
  ratios.reserve(candidates.size());
  for (const auto& c : candidates.candidates) ratios.push_back(white_ratio(c));
  return select_by_ratio(ratios, config);
}

}  // namespace specseg
