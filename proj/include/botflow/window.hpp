#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace botflow {

/// Half-open aggregation windows [t0 + k*T, t0 + (k+1)*T), anchored at
/// the scenario start.
struct WindowConfig {
  double window_len = 30.0;
  double t0 = 0.0;
};

inline std::int64_t assign_window(double ts, const WindowConfig& cfg) {
  if (!(cfg.window_len > 0.0))
    throw std::invalid_argument("window length must be > 0");
  if (ts < cfg.t0)
    throw std::domain_error("record precedes scenario start");
  return static_cast<std::int64_t>(std::floor((ts - cfg.t0) / cfg.window_len));
}

}  // namespace botflow
