#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "codedbbo/code_construction.hpp"
#include "codedbbo/hadamard_codec.hpp"

namespace codedbbo {

inline constexpr double kDefaultShift = 1.0;
inline constexpr double kDefaultRate = 0.5;

/// Worker runtime t = shift + Exp(rate).
struct ShiftedExponential {
  double shift = kDefaultShift;
  double rate = kDefaultRate;
};

/// Runtimes resampled uniformly with replacement from measured samples.
struct EmpiricalRuntimes {
  std::vector<double> samples;
};

using RuntimeDistribution = std::variant<ShiftedExponential, EmpiricalRuntimes>;

/// One positive decimal runtime (seconds) per line; blank lines and lines
/// starting with '#' are skipped.
[[nodiscard]] EmpiricalRuntimes load_runtime_samples(const std::filesystem::path& path);

void validate(const RuntimeDistribution& dist);

struct ArrivalSchedule {
  std::vector<double> times;
  std::vector<std::size_t> order;  // worker indices sorted by arrival, ties by index

  static ArrivalSchedule from_times(std::vector<double> times);
};

[[nodiscard]] ArrivalSchedule sample_runtimes(const RuntimeDistribution& dist, std::size_t n,
                                              std::uint64_t seed);

struct FirstK {
  std::size_t k = 1;
};
struct FirstDecodable {
  CodeConfig config;
};
struct WaitAll {};

using StoppingRule = std::variant<FirstK, FirstDecodable, WaitAll>;

/// Tracks which outputs have arrived and decides when the master may stop
/// waiting. Fed one arrival at a time by either the simulator or a real
/// executor.
class StoppingMonitor {
 public:
  StoppingMonitor(StoppingRule rule, std::size_t n_workers);

  /// Records an arrival; returns true once the rule is satisfied.
  bool admit(std::size_t worker);

  [[nodiscard]] bool satisfied() const { return satisfied_; }
  [[nodiscard]] std::size_t admitted() const { return admitted_; }
  [[nodiscard]] const std::vector<bool>& available() const { return available_; }

 private:
  [[nodiscard]] bool evaluate_rule() const;

  StoppingRule rule_;
  std::vector<bool> available_;
  std::size_t admitted_ = 0;
  bool satisfied_ = false;
};

struct IterationResult {
  ErasedOutputs outputs;
  double stop_time = 0.0;
  std::size_t admitted = 0;
};

/// Replays the schedule in arrival order until the rule fires. Throws if the
/// rule can never be satisfied.
[[nodiscard]] IterationResult run_iteration(const ArrivalSchedule& schedule, const StoppingRule& rule,
                                            std::span<const double> outputs);

/// Evaluates every task on a thread pool and feeds completions, in the order
/// they finish, to the same stopping logic. stop_time is wall-clock seconds.
/// Tasks still running when the rule fires are waited for but not admitted.
[[nodiscard]] IterationResult run_concurrent_iteration(
    const std::vector<std::function<double()>>& tasks, const StoppingRule& rule, std::size_t threads);

}  // namespace codedbbo
