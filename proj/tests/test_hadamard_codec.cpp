#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>

#include "codedbbo/hadamard_codec.hpp"
#include "oracles.hpp"

using namespace codedbbo;

namespace {

Matrix info_block(const CodeConfig& cfg, const std::vector<double>& diag) {
  Matrix block(cfg.n_total, cfg.n_params);
  for (std::size_t j = 0; j < cfg.n_params; ++j) block(cfg.info_channels[j], j) = diag[j];
  return block;
}

std::vector<bool> pattern(std::size_t n, std::uint64_t bits) {
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = ((bits >> i) & 1U) != 0;
  return out;
}

std::vector<bool> frozen_mask(const CodeConfig& cfg) {
  std::vector<bool> out(cfg.n_total);
  for (std::size_t i = 0; i < cfg.n_total; ++i) out[i] = cfg.is_frozen(i);
  return out;
}

}  // namespace

TEST_CASE("encode: small examples") {
  const auto c12 = build_config(1, 2);
  Matrix in(2, 1);
  in(1, 0) = 1.0;
  const auto out = encode(c12, in);
  CHECK(out(0, 0) == 1.0);
  CHECK(out(1, 0) == -1.0);

  const auto c34 = build_config(3, 4);
  CHECK(encode(c34, Matrix(4, 3)) == Matrix(4, 3));
  CHECK_THROWS_AS((void)encode(c34, Matrix(3, 3)), std::invalid_argument);
}

TEST_CASE("encode matches the explicit Hadamard product") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g;
  for (std::size_t n = 1; n <= 64; n *= 2) {
    const auto cfg = build_config(n, n);
    const auto h = oracles::hadamard(n);
    Matrix x(n, 3);
    Eigen::MatrixXd xe(n, 3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 3; ++c) xe(i, c) = x(i, c) = g(gen);
    const auto out = encode(cfg, x);
    const Eigen::MatrixXd ref = h * xe;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 3; ++c) CHECK(out(i, c) == doctest::Approx(ref(i, c)).epsilon(1e-12));

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = x(i, 0);
    encode_values(v);
    for (std::size_t i = 0; i < n; ++i) CHECK(v[i] == doctest::Approx(ref(i, 0)).epsilon(1e-12));
  }
}

TEST_CASE("encode: N=4 worked example") {
  const auto cfg = build_config(3, 4);
  const auto out = encode(cfg, info_block(cfg, {1, 1, 1}));
  const auto h = oracles::hadamard(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(out(i, j) == h(i, cfg.info_channels[j]));
  // first worker sees e1 + e2 + e3
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 1.0);
  CHECK(out(0, 2) == 1.0);
}

TEST_CASE("encode is linear") {
  const auto cfg = build_config(5, 16);
  const auto x = gaussian_matrix(16, 5, 1);
  const auto y = gaussian_matrix(16, 5, 2);
  Matrix combo(16, 5);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t c = 0; c < 5; ++c) combo(i, c) = 2.5 * x(i, c) - 0.75 * y(i, c);
  const auto ex = encode(cfg, x);
  const auto ey = encode(cfg, y);
  const auto ec = encode(cfg, combo);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t c = 0; c < 5; ++c)
      CHECK(ec(i, c) == doctest::Approx(2.5 * ex(i, c) - 0.75 * ey(i, c)).epsilon(1e-12));
}

TEST_CASE("make_direction_set") {
  const auto c22 = build_config(2, 2);
  const auto s22 = make_direction_set(c22, std::vector<double>{1, 1});
  CHECK(s22.directions(0, 0) == 1.0);
  CHECK(s22.directions(0, 1) == 1.0);
  CHECK(s22.directions(1, 0) == 1.0);
  CHECK(s22.directions(1, 1) == -1.0);

  const auto c34 = build_config(3, 4);
  const auto plus = make_direction_set(c34, std::vector<double>{1, 1, 1});
  const auto flip = make_direction_set(c34, std::vector<double>{-1, 1, 1});
  CHECK(plus.directions == encode(c34, info_block(c34, {1, 1, 1})));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(flip.directions(i, 0) == -plus.directions(i, 0));
    CHECK(flip.directions(i, 1) == plus.directions(i, 1));
    CHECK(flip.directions(i, 2) == plus.directions(i, 2));
  }

  CHECK_THROWS_AS((void)make_direction_set(c34, std::vector<double>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS((void)make_direction_set(c34, std::vector<double>{1, 0.5, 1}), std::invalid_argument);
}

TEST_CASE("direction entries and orthogonality") {
  std::mt19937_64 gen(3);
  std::bernoulli_distribution coin;
  for (std::size_t n = 1; n <= 128; n *= 2) {
    for (std::size_t d : {std::size_t{1}, (n + 1) / 2, n}) {
      const auto cfg = build_config(d, n);
      std::vector<double> diag(d);
      for (auto& s : diag) s = coin(gen) ? 1.0 : -1.0;
      const auto set = make_direction_set(cfg, diag);
      for (double v : set.directions.data()) CHECK((v == 0.0 || v == 1.0 || v == -1.0));
      if (d != n) continue;
      for (std::size_t a = 0; a < n; ++a) {
        CHECK(dot(set.directions.row(a), set.directions.row(a)) == static_cast<double>(n));
        for (std::size_t b = a + 1; b < n; ++b) CHECK(dot(set.directions.row(a), set.directions.row(b)) == 0.0);
      }
    }
  }
}

TEST_CASE("decode: small examples") {
  const auto c22 = build_config(2, 2);
  const auto both = decode(c22, ErasedOutputs::all_available({3.0, 1.0}));
  CHECK(both == Vector{2.0, 1.0});

  const auto c12 = build_config(1, 2);
  REQUIRE(c12.frozen_set == std::vector<std::size_t>{0});
  ErasedOutputs only_q{{0.0, -5.0}, {false, true}};
  CHECK(decode(c12, only_q) == Vector{5.0});
}

TEST_CASE("decodability: fixtures") {
  const auto cfg = build_config(3, 4);
  CHECK(check_decodability(cfg, {true, true, true, true}));
  // hand-traced: frozen {0}, worker 3 lost
  CHECK(check_decodability(cfg, {true, true, true, false}));
  CHECK_FALSE(check_decodability(cfg, {true, true, false, false}));
  CHECK_FALSE(check_decodability(cfg, {false, false, false, false}));
  CHECK_THROWS_AS((void)check_decodability(cfg, {true, true}), std::invalid_argument);
}

TEST_CASE("decode: rate-1 roundtrip") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g(0.0, 10.0);
  for (std::size_t n = 2; n <= 256; n *= 2) {
    const auto cfg = build_config(n, n);
    std::vector<double> x(n);
    for (auto& v : x) v = g(gen);
    std::vector<double> y(n);
    for (std::size_t j = 0; j < n; ++j) y[cfg.info_channels[j]] = x[j];
    encode_values(y);
    const auto back = decode(cfg, ErasedOutputs::all_available(y));
    for (std::size_t j = 0; j < n; ++j) CHECK(back[j] == doctest::Approx(x[j]).epsilon(1e-12));
  }
}

TEST_CASE("decode agrees with dense elimination and the literal sweep") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> g;
  auto sweep = [&](std::size_t n, std::size_t d) {
    const auto cfg = build_config(d, n);
    const auto h = oracles::hadamard(n);
    const auto frozen = frozen_mask(cfg);
    std::vector<double> diag(d);
    for (std::size_t j = 0; j < d; ++j) diag[j] = (j % 3 == 0) ? -1.0 : 1.0;
    const auto set = make_direction_set(cfg, diag);
    std::vector<double> c(d);
    for (auto& v : c) v = g(gen);
    const auto values = multiply(set.directions, c);
    std::vector<double> u(n, 0.0);
    for (std::size_t j = 0; j < d; ++j) u[cfg.info_channels[j]] = diag[j] * c[j];

    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
      const auto avail = pattern(n, bits);
      const bool ok = check_decodability(cfg, avail);
      REQUIRE(ok == oracles::literal_sc_decodable(n, frozen, avail));
      if (ok) REQUIRE(static_cast<std::size_t>(std::popcount(bits)) >= d);

      ErasedOutputs out{values, avail};
      for (std::size_t i = 0; i < n; ++i)
        if (!avail[i]) out.values[i] = 1e9;  // must never be read
      if (ok) {
        const auto dec = decode(cfg, out);
        const auto ref = oracles::dense_solve(cfg.info_channels, avail, out.values, h);
        REQUIRE(ref.has_value());
        for (std::size_t j = 0; j < d; ++j) {
          CHECK(dec[j] == doctest::Approx(diag[j] * c[j]).epsilon(1e-12));
          CHECK(dec[j] == doctest::Approx((*ref)(static_cast<Eigen::Index>(j))).epsilon(1e-9));
        }
      } else {
        CHECK_THROWS_AS((void)decode(cfg, out), NotDecodableError);
      }
    }
  };
  for (std::size_t n = 1; n <= 8; n *= 2)
    for (std::size_t d = 1; d <= n; ++d) sweep(n, d);
  for (std::size_t d : {1, 3, 8, 11, 16}) sweep(16, d);
}

TEST_CASE("decode reports every failed information channel") {
  const auto cfg = build_config(3, 4);
  ErasedOutputs none{{0, 0, 0, 0}, {false, false, false, false}};
  try {
    (void)decode(cfg, none);
    FAIL("expected NotDecodableError");
  } catch (const NotDecodableError& e) {
    CHECK(e.failed_channels() == cfg.info_channels);
  }
}

TEST_CASE("decodability is monotone in the available set") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = std::size_t{1} << std::uniform_int_distribution<int>(1, 6)(gen);
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, n)(gen);
    const auto cfg = build_config(d, n);
    std::bernoulli_distribution keep(std::uniform_real_distribution<double>(0.3, 1.0)(gen));
    std::vector<bool> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = keep(gen);
      b[i] = a[i] || keep(gen);
    }
    if (check_decodability(cfg, a)) CHECK(check_decodability(cfg, b));
    if (check_decodability(cfg, a)) CHECK(std::count(a.begin(), a.end(), true) >= static_cast<long>(d));
  }
}
