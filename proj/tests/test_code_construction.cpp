#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "codedbbo/code_construction.hpp"
#include "oracles.hpp"

using namespace codedbbo;

TEST_CASE("bec reliabilities: small cases") {
  CHECK(bec_channel_reliabilities(1, 0.5) == std::vector<double>{0.5});

  const auto z2 = bec_channel_reliabilities(2, 0.5);
  REQUIRE(z2.size() == 2);
  CHECK(z2[0] == doctest::Approx(2 * 0.5 - 0.25).epsilon(1e-15));
  CHECK(z2[1] == doctest::Approx(0.25).epsilon(1e-15));

  const auto z4 = bec_channel_reliabilities(4, 0.5);
  const std::vector<double> expected{0.9375, 0.5625, 0.4375, 0.0625};
  for (std::size_t i = 0; i < 4; ++i) CHECK(z4[i] == doctest::Approx(expected[i]).epsilon(1e-15));
  CHECK(std::max_element(z4.begin(), z4.end()) - z4.begin() == 0);
}

TEST_CASE("bec reliabilities agree with the top-down split tree") {
  for (std::size_t n = 1; n <= 1024; n *= 2) {
    for (double eps : {0.1, 0.3, 0.5, 0.77}) {
      const auto z = bec_channel_reliabilities(n, eps);
      const auto ref = oracles::reliabilities_by_tree(n, eps);
      for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("bec reliabilities: errors") {
  CHECK_THROWS_AS((void)bec_channel_reliabilities(3, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)bec_channel_reliabilities(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)bec_channel_reliabilities(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)bec_channel_reliabilities(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)bec_channel_reliabilities(4, -0.2), std::invalid_argument);
}

TEST_CASE("polarization bounds and pair conservation") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int trial = 0; trial < 50; ++trial) {
    const double eps = u(gen);
    for (std::size_t n = 2; n <= 256; n *= 2) {
      const auto z = bec_channel_reliabilities(n, eps);
      CHECK(*std::min_element(z.begin(), z.end()) <= eps);
      CHECK(*std::max_element(z.begin(), z.end()) >= eps);
      for (double v : z) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      // every final split z -> (2z - z^2, z^2) sums to 2z; the parent is recoverable
      // from the lower member as sqrt(z^2)
      for (std::size_t i = 0; i < n; i += 2) {
        const double parent = std::sqrt(z[i + 1]);
        CHECK(z[i] + z[i + 1] == doctest::Approx(2 * parent).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("build_config: frozen sets from the worked examples") {
  const auto c43 = build_config(3, 4, 0.5);
  CHECK(c43.frozen_set == std::vector<std::size_t>{0});
  CHECK(c43.info_channels == std::vector<std::size_t>{1, 2, 3});
  CHECK(c43.rate() == doctest::Approx(0.75));

  // z for N=8, eps=0.5 by hand:
  // [.99609375 .87890625 .80859375 .31640625 .68359375 .19140625 .12109375 .00390625]
  const auto c83 = build_config(3, 8, 0.5);
  CHECK(c83.frozen_set == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(c83.info_channels == std::vector<std::size_t>{5, 6, 7});
  CHECK(c83.rate() == doctest::Approx(3.0 / 8.0));

  for (std::size_t n : {1u, 2u, 8u, 64u}) {
    const auto full = build_config(n, n, 0.3);
    CHECK(full.frozen_set.empty());
    CHECK(full.info_channels.size() == n);
  }
}

TEST_CASE("build_config: invariants") {
  for (std::size_t n = 1; n <= 128; n *= 2) {
    for (std::size_t d = 1; d <= n; ++d) {
      const auto cfg = build_config(d, n, 0.5);
      CHECK(cfg.frozen_set.size() == n - d);
      CHECK(cfg.info_channels.size() == d);
      CHECK(std::is_sorted(cfg.info_channels.begin(), cfg.info_channels.end()));

      std::vector<int> seen(n, 0);
      for (auto c : cfg.frozen_set) ++seen[c];
      for (auto c : cfg.info_channels) ++seen[c];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));

      double worst_info = 0.0, best_frozen = 1.0;
      for (auto c : cfg.info_channels) worst_info = std::max(worst_info, cfg.z_values[c]);
      for (auto c : cfg.frozen_set) best_frozen = std::min(best_frozen, cfg.z_values[c]);
      if (!cfg.frozen_set.empty()) CHECK(worst_info <= best_frozen);

      for (std::size_t j = 0; j < d; ++j) CHECK(cfg.coordinate_of[cfg.info_channels[j]] == j);
    }
  }
}

TEST_CASE("select_frozen: ties freeze the lower index") {
  CHECK(select_frozen({0.5, 0.5, 0.5, 0.5}, 2) == std::vector<std::size_t>{0, 1});
  CHECK(select_frozen({0.1, 0.7, 0.3, 0.7}, 1) == std::vector<std::size_t>{1});
  CHECK(select_frozen({0.1, 0.7, 0.3, 0.7}, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK(select_frozen({0.2, 0.2}, 0).empty());
  CHECK_THROWS_AS((void)select_frozen({0.2}, 2), std::invalid_argument);
}

TEST_CASE("build_config: deterministic") {
  const auto a = build_config(20, 64, 0.37);
  const auto b = build_config(20, 64, 0.37);
  CHECK(a.z_values == b.z_values);
  CHECK(a.frozen_set == b.frozen_set);
  CHECK(a.info_channels == b.info_channels);
}

TEST_CASE("build_config: errors") {
  CHECK_THROWS_AS((void)build_config(5, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)build_config(0, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)build_config(3, 6, 0.5), std::invalid_argument);
}
