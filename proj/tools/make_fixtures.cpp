// Regenerates the checked-in fixtures under a data directory. Every file is a
// pure function of the seeds below, so rerunning this is a no-op.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

#include "codedbbo/experiment_config.hpp"

using namespace codedbbo;

namespace {

constexpr std::uint64_t kProblemSeed = 2020;
constexpr std::uint64_t kRuntimeSeed = 9;

void write_column(const std::filesystem::path& path, const Vector& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  write_csv_matrix(path, m);
}

// Stand-in for measured serverless runtimes: a 1.2 s floor, a lognormal body
// and a 5% slow tail. Not measured data.
void write_runtimes(const std::filesystem::path& path) {
  std::mt19937_64 gen(kRuntimeSeed);
  std::lognormal_distribution<double> body(0.0, 0.35);
  std::exponential_distribution<double> tail(0.25);
  std::bernoulli_distribution slow(0.05);
  std::ofstream out(path, std::ios::binary);
  out << "# synthetic stand-in runtimes (seconds), not measurements\n";
  char buf[32];
  for (int i = 0; i < 1000; ++i) {
    double t = 1.2 + body(gen);
    if (slow(gen)) t += tail(gen);
    std::snprintf(buf, sizeof buf, "%.6f", t);
    out << buf << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: codedbbo_make_fixtures <data-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  const auto [a, b] = generate_regression_problem(200, 32, kProblemSeed);
  write_csv_matrix(dir / "l1_A.csv", a);
  write_column(dir / "l1_b.csv", b);

  const AttackSetup attack = generate_attack_setup(48, kProblemSeed);
  attack.model->save(dir / "attack_model.csv");
  write_column(dir / "attack_theta0.csv", attack.theta0);

  write_runtimes(dir / "runtimes_synthetic.txt");
  std::cout << "fixtures written to " << dir.string() << '\n';
  return 0;
}
