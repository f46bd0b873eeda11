#include "codedbbo/straggler_sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

namespace codedbbo {

EmpiricalRuntimes load_runtime_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open runtime file " + path.string());
  EmpiricalRuntimes out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || line.find_first_not_of(" \t", used) != std::string::npos || !(v > 0.0) ||
        !std::isfinite(v)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected a positive runtime");
    }
    out.samples.push_back(v);
  }
  if (out.samples.empty()) throw std::runtime_error("runtime file " + path.string() + " has no samples");
  return out;
}

void validate(const RuntimeDistribution& dist) {
  if (const auto* se = std::get_if<ShiftedExponential>(&dist)) {
    if (!(se->shift >= 0.0)) throw std::invalid_argument("shift must be non-negative");
    if (!(se->rate > 0.0)) throw std::invalid_argument("rate must be positive");
  } else {
    const auto& emp = std::get<EmpiricalRuntimes>(dist);
    if (emp.samples.empty()) throw std::invalid_argument("empirical runtime distribution has no samples");
    for (double s : emp.samples)
      if (!(s > 0.0)) throw std::invalid_argument("empirical runtimes must be positive");
  }
}

ArrivalSchedule ArrivalSchedule::from_times(std::vector<double> times) {
  ArrivalSchedule s;
  s.order.resize(times.size());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  s.times = std::move(times);
  return s;
}

ArrivalSchedule sample_runtimes(const RuntimeDistribution& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("need at least one worker");
  validate(dist);
  std::mt19937_64 gen(seed);
  std::vector<double> times(n);
  if (const auto* se = std::get_if<ShiftedExponential>(&dist)) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& t : times) {
      // inverse CDF; 1 - u lies in (0, 1]
      const double u = unif(gen);
      t = se->shift - std::log1p(-u) / se->rate;
      if (!(t > 0.0)) t = std::numeric_limits<double>::min();
    }
  } else {
    const auto& samples = std::get<EmpiricalRuntimes>(dist).samples;
    std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
    for (auto& t : times) t = samples[pick(gen)];
  }
  return ArrivalSchedule::from_times(std::move(times));
}

StoppingMonitor::StoppingMonitor(StoppingRule rule, std::size_t n_workers)
    : rule_(std::move(rule)), available_(n_workers, false) {
  if (const auto* fk = std::get_if<FirstK>(&rule_)) {
    if (fk->k < 1 || fk->k > n_workers) {
      throw std::invalid_argument("first_k rule needs 1 <= k <= N (k=" + std::to_string(fk->k) +
                                  ", N=" + std::to_string(n_workers) + ")");
    }
  } else if (const auto* fd = std::get_if<FirstDecodable>(&rule_)) {
    if (fd->config.n_total != n_workers) {
      throw std::invalid_argument("first_decodable rule built for N=" + std::to_string(fd->config.n_total) +
                                  " but there are " + std::to_string(n_workers) + " workers");
    }
  }
}

bool StoppingMonitor::admit(std::size_t worker) {
  if (satisfied_) return true;
  if (worker >= available_.size() || available_[worker]) {
    throw std::invalid_argument("invalid or duplicate arrival for worker " + std::to_string(worker));
  }
  available_[worker] = true;
  ++admitted_;
  satisfied_ = evaluate_rule();
  return satisfied_;
}

bool StoppingMonitor::evaluate_rule() const {
  return std::visit(
      [&](const auto& r) -> bool {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, FirstK>) {
          return admitted_ >= r.k;
        } else if constexpr (std::is_same_v<R, WaitAll>) {
          return admitted_ == available_.size();
        } else {
          // fewer arrivals than unknowns can never decode
          return admitted_ >= r.config.n_params && check_decodability(r.config, available_);
        }
      },
      rule_);
}

IterationResult run_iteration(const ArrivalSchedule& schedule, const StoppingRule& rule,
                              std::span<const double> outputs) {
  const std::size_t n = schedule.times.size();
  if (outputs.size() != n || schedule.order.size() != n) {
    throw std::invalid_argument("schedule and outputs differ in length");
  }
  StoppingMonitor monitor(rule, n);
  IterationResult result;
  for (std::size_t worker : schedule.order) {
    const bool done = monitor.admit(worker);
    result.stop_time = schedule.times[worker];
    if (done) break;
  }
  if (!monitor.satisfied()) throw std::runtime_error("stopping rule cannot be satisfied by the worker pool");
  result.admitted = monitor.admitted();
  result.outputs.available = monitor.available();
  result.outputs.values.assign(outputs.begin(), outputs.end());
  for (std::size_t i = 0; i < n; ++i)
    if (!result.outputs.available[i]) result.outputs.values[i] = 0.0;
  return result;
}

IterationResult run_concurrent_iteration(const std::vector<std::function<double()>>& tasks,
                                         const StoppingRule& rule, std::size_t threads) {
  const std::size_t n = tasks.size();
  StoppingMonitor monitor(rule, n);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));

  struct Completion {
    std::size_t worker;
    double value;
    double seconds;
  };
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Completion> queue;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  const auto start = std::chrono::steady_clock::now();

  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          if (stop.load()) return;
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          Completion c{i, 0.0, 0.0};
          try {
            c.value = tasks[i]();
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            cv.notify_all();
            return;
          }
          c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          std::lock_guard lock(mu);
          queue.push_back(c);
          cv.notify_all();
        }
      });
    }

    IterationResult result;
    result.outputs.values.assign(n, 0.0);
    std::size_t consumed = 0;
    std::unique_lock lock(mu);
    while (!monitor.satisfied() && consumed < n) {
      cv.wait(lock, [&] { return !queue.empty() || failure; });
      if (failure) break;
      const Completion c = queue.front();
      queue.pop_front();
      ++consumed;
      result.outputs.values[c.worker] = c.value;
      result.stop_time = c.seconds;
      monitor.admit(c.worker);
    }
    stop.store(true);
    lock.unlock();
    pool.clear();  // joins

    if (failure) std::rethrow_exception(failure);
    if (!monitor.satisfied()) throw std::runtime_error("stopping rule cannot be satisfied by the worker pool");
    result.admitted = monitor.admitted();
    result.outputs.available = monitor.available();
    for (std::size_t i = 0; i < n; ++i)
      if (!result.outputs.available[i]) result.outputs.values[i] = 0.0;
    return result;
  }
}

}  // namespace codedbbo
