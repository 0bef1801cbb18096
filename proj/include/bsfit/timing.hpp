#pragma once

#include <chrono>

namespace bsfit {

/// Monotonic stopwatch; lap() returns seconds since the previous lap.
class Stopwatch {
 public:
  using Clock = std::chrono::steady_clock;

  Stopwatch() : start_(Clock::now()), last_(start_) {}

  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  void restart() { start_ = last_ = Clock::now(); }

 private:
  Clock::time_point start_;
  Clock::time_point last_;
};

}  // namespace bsfit
