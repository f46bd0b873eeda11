#include "codedbbo/code_construction.hpp"

#include "codedbbo/butterfly.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace codedbbo {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t log2_exact(std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("N must be a power of two, got " + std::to_string(n));
  std::size_t levels = 0;
  while ((std::size_t{1} << levels) < n) ++levels;
  return levels;
}

std::size_t CodeConfig::levels() const { return log2_exact(n_total); }

std::vector<double> bec_channel_reliabilities(std::size_t n_total, double design_erasure) {
  if (!is_power_of_two(n_total)) {
    throw std::invalid_argument("N must be a power of two, got " + std::to_string(n_total));
  }
  if (!(design_erasure > 0.0 && design_erasure < 1.0)) {
    throw std::invalid_argument("design_erasure must lie in (0,1), got " + std::to_string(design_erasure));
  }

  // Walk the decoding direction of the circuit: every worker output is erased
  // with probability eps; an upper node is lost if either parent is, a lower
  // node only if both are.
  const std::size_t levels = log2_exact(n_total);
  std::vector<double> z(n_total, design_erasure);
  std::vector<double> next(n_total);
  for (std::size_t level = levels; level-- > 0;) {
    for (std::size_t i = 0; i < n_total; ++i) {
      const double a = z[i];
      const double b = z[butterfly::partner(i, level)];
      next[i] = butterfly::is_upper(i, level) ? a + b - a * b : a * b;
    }
    z.swap(next);
  }
  return z;
}

std::vector<std::size_t> select_frozen(const std::vector<double>& z_values, std::size_t n_frozen) {
  if (n_frozen > z_values.size()) throw std::invalid_argument("cannot freeze more channels than exist");
  std::vector<std::size_t> by_badness(z_values.size());
  std::iota(by_badness.begin(), by_badness.end(), std::size_t{0});
  std::stable_sort(by_badness.begin(), by_badness.end(),
                   [&](std::size_t a, std::size_t b) { return z_values[a] > z_values[b]; });
  std::vector<std::size_t> frozen(by_badness.begin(), by_badness.begin() + static_cast<std::ptrdiff_t>(n_frozen));
  std::sort(frozen.begin(), frozen.end());
  return frozen;
}

CodeConfig build_config(std::size_t n_params, std::size_t n_total, double design_erasure) {
  if (n_params == 0) throw std::invalid_argument("d must be at least 1");
  if (!is_power_of_two(n_total)) {
    throw std::invalid_argument("N must be a power of two, got " + std::to_string(n_total));
  }
  if (n_params > n_total) {
    throw std::invalid_argument("d must not exceed N (d=" + std::to_string(n_params) +
                                ", N=" + std::to_string(n_total) + ")");
  }

  CodeConfig cfg;
  cfg.n_total = n_total;
  cfg.n_params = n_params;
  cfg.design_erasure = design_erasure;
  cfg.z_values = bec_channel_reliabilities(n_total, design_erasure);

  cfg.frozen_set = select_frozen(cfg.z_values, n_total - n_params);

  cfg.coordinate_of.assign(n_total, CodeConfig::npos);
  std::vector<bool> frozen(n_total, false);
  for (auto c : cfg.frozen_set) frozen[c] = true;
  for (std::size_t c = 0; c < n_total; ++c) {
    if (frozen[c]) continue;
    cfg.coordinate_of[c] = cfg.info_channels.size();
    cfg.info_channels.push_back(c);
  }
  return cfg;
}

}  // namespace codedbbo
