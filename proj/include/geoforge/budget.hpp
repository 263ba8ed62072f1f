// Cooperative wall-clock budget for long-running stages.

#pragma once

#include "geoforge/types.hpp"

#include <chrono>
#include <optional>

namespace geoforge {

class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() = default;
  explicit Deadline(std::chrono::duration<double> budget) : limit_(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget)) {}

  bool expired() const { return limit_ && Clock::now() > *limit_; }
  void check() const {
    if (expired()) throw BudgetExceeded("wall-clock budget exceeded");
  }

 private:
  std::optional<Clock::time_point> limit_;
};

inline void check_deadline(const Deadline* deadline) {
  if (deadline) deadline->check();
}

}  // namespace geoforge
