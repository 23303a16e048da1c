#include "botflow/labeling.hpp"

namespace botflow {

std::optional<LabelRegime> parse_label_regime(std::string_view text) {
  if (text == "coarse") return LabelRegime::coarse;
  if (text == "fine") return LabelRegime::fine;
  return std::nullopt;
}

std::string_view label_regime_name(LabelRegime regime) {
  return regime == LabelRegime::coarse ? "coarse" : "fine";
}

}  // namespace botflow
