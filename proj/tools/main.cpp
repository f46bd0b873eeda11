// codedbbo command line: experiment runner plus debugging views of the code.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "codedbbo/experiment_config.hpp"
#include "codedbbo/seeding.hpp"

namespace {

using namespace codedbbo;

// One-line machine-parsable failure: "error: <category>: <message>".
struct CliFailure {
  std::string category;
  std::string message;
  int code;
};

[[noreturn]] void fail(std::string category, std::string message, int code = 2) {
  throw CliFailure{std::move(category), std::move(message), code};
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Parses "1,-2,3"; an empty field or one of x, -, nan marks an erased entry
// when `allow_erased` is set.
std::vector<std::optional<double>> parse_csv_line(const std::string& line, bool allow_erased) {
  std::vector<std::optional<double>> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
    if (cell.empty() || cell == "x" || cell == "-" || cell == "nan") {
      if (!allow_erased) fail("input", "missing value in '" + line + "'");
      out.emplace_back();
      continue;
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || p != cell.data() + cell.size()) fail("input", "not a number: '" + cell + "'");
    out.emplace_back(v);
  }
  if (!line.empty() && line.back() == ',') {
    if (!allow_erased) fail("input", "missing value in '" + line + "'");
    out.emplace_back();
  }
  return out;
}

std::vector<double> parse_values(const std::string& line) {
  std::vector<double> out;
  for (const auto& v : parse_csv_line(line, false)) out.push_back(*v);
  return out;
}

std::string read_stdin_line() {
  std::string line;
  if (!std::getline(std::cin, line)) fail("input", "expected a CSV line on stdin");
  return line;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

CodeConfig make_code(std::size_t d, std::size_t n, double eps) {
  try {
    return build_config(d, n, eps);
  } catch (const std::invalid_argument& e) {
    fail("config", e.what());
  }
}

std::vector<double> diag_or_identity(const std::string& text, std::size_t d) {
  if (text.empty()) return std::vector<double>(d, 1.0);
  auto diag = parse_values(text);
  if (diag.size() != d) fail("input", "expected " + std::to_string(d) + " diagonal signs, got " + std::to_string(diag.size()));
  for (double s : diag)
    if (s != 1.0 && s != -1.0) fail("input", "diagonal signs must be +1 or -1");
  return diag;
}

std::string flag_name(const std::string& key) {
  std::string flag = key;
  for (char& c : flag)
    if (c == '_') c = '-';
  return "--" + flag;
}

int cmd_run(const std::string& config_path, const std::map<std::string, std::string>& flags) {
  KeyValues file;
  if (!config_path.empty()) file = read_config_file(config_path);
  KeyValues overrides;
  for (const auto& [k, v] : flags) overrides[k] = v;

  const ExperimentConfig cfg = resolve_config(file, overrides);
  std::vector<IterationTrace> traces;
  try {
    traces = run_configured(cfg);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    fail("config", e.what());
  }
  try {
    emit_trace(traces, cfg.output);
    std::ofstream echo(cfg.output + ".config", std::ios::binary | std::ios::trunc);
    echo << echo_config(cfg);
    if (!echo) throw std::runtime_error("cannot write " + cfg.output + ".config");
  } catch (const std::exception& e) {
    fail("io", e.what(), 4);
  }
  std::cout << "wrote " << traces.size() << " iterations to " << cfg.output << " (final cost "
            << fmt(traces.back().cost) << ")\n";
  return 0;
}

int cmd_construct(std::size_t n, std::size_t d, double eps) {
  const CodeConfig cfg = make_code(d, n, eps);
  nlohmann::ordered_json out;
  out["N"] = cfg.n_total;
  out["d"] = cfg.n_params;
  out["design_erasure"] = cfg.design_erasure;
  out["rate"] = cfg.rate();
  out["frozen"] = cfg.frozen_set;
  out["info_channels"] = cfg.info_channels;
  out["z"] = cfg.z_values;
  out["codec_convention"] = kCodecConvention;
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_encode(std::size_t n, std::size_t d, double eps, const std::string& diag_text, std::string values,
               bool directions) {
  const CodeConfig cfg = make_code(d, n, eps);
  const auto diag = diag_or_identity(diag_text, d);
  const DirectionSet set = make_direction_set(cfg, diag);
  if (directions) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = set.directions.row(i);
      std::cout << join(std::vector<double>(row.begin(), row.end())) << '\n';
    }
    return 0;
  }
  if (values.empty()) values = read_stdin_line();
  const auto c = parse_values(values);
  if (c.size() != d) fail("input", "expected " + std::to_string(d) + " values, got " + std::to_string(c.size()));
  // worker i would report the directional derivative c . v_i
  std::cout << join(multiply(set.directions, c)) << '\n';
  return 0;
}

int cmd_decode(std::size_t n, std::size_t d, double eps, const std::string& diag_text, std::string values) {
  const CodeConfig cfg = make_code(d, n, eps);
  const auto diag = diag_or_identity(diag_text, d);
  if (values.empty()) values = read_stdin_line();
  const auto cells = parse_csv_line(values, true);
  if (cells.size() != n) fail("input", "expected " + std::to_string(n) + " outputs, got " + std::to_string(cells.size()));
  ErasedOutputs outputs;
  for (const auto& c : cells) {
    outputs.values.push_back(c.value_or(0.0));
    outputs.available.push_back(c.has_value());
  }
  try {
    Vector u = decode(cfg, outputs);
    for (std::size_t j = 0; j < d; ++j) u[j] /= diag[j];
    std::cout << join(u) << '\n';
  } catch (const NotDecodableError& e) {
    fail("not_decodable", e.what(), 3);
  }
  return 0;
}

int cmd_simulate(std::size_t n, std::size_t d, double eps, std::size_t schedules, std::uint64_t seed,
                 const std::string& dist, double shift, double rate, const std::string& runtime_file,
                 std::size_t k) {
  const CodeConfig cfg = make_code(d, n, eps);
  RuntimeDistribution runtime;
  if (dist == "shifted_exponential") {
    runtime = ShiftedExponential{shift, rate};
  } else if (dist == "empirical") {
    if (runtime_file.empty()) fail("config", "runtime_file: required when runtime_dist=empirical");
    try {
      runtime = load_runtime_samples(runtime_file);
    } catch (const std::exception& e) {
      fail("config", std::string("runtime_file: ") + e.what());
    }
  } else {
    fail("config", "runtime_dist: expected shifted_exponential or empirical");
  }
  try {
    validate(runtime);
  } catch (const std::exception& e) {
    fail("config", e.what());
  }
  if (k == 0) k = d;
  if (k > n) fail("config", "k: must satisfy 1 <= k <= N");

  struct Tally {
    std::string name;
    StoppingRule rule;
    double time = 0.0;
    double admitted = 0.0;
  };
  std::vector<Tally> tallies{{"first_decodable", FirstDecodable{cfg}},
                             {"first_k", FirstK{k}},
                             {"all", WaitAll{}}};
  const std::vector<double> dummy(n, 0.0);
  for (std::size_t s = 0; s < schedules; ++s) {
    const auto schedule = sample_runtimes(runtime, n, derive_seed(seed, s, Stream::runtimes));
    for (auto& t : tallies) {
      const auto r = run_iteration(schedule, t.rule, dummy);
      t.time += r.stop_time;
      t.admitted += static_cast<double>(r.admitted);
    }
  }
  std::cout << "rule,k,mean_stop_time,mean_admitted,schedules\n";
  for (const auto& t : tallies) {
    const std::size_t kk = t.name == "first_k" ? k : (t.name == "all" ? n : 0);
    std::cout << t.name << ',' << kk << ',' << fmt(t.time / static_cast<double>(schedules)) << ','
              << fmt(t.admitted / static_cast<double>(schedules)) << ',' << schedules << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coded black-box optimization: experiments and code debugging"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an optimization experiment and write a CSV trace");
  std::string config_path;
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> run_flags;
  for (const auto& key : config_keys()) {
    run->add_option_function<std::string>(
        flag_name(key), [&run_flags, key](const std::string& v) { run_flags[key] = v; },
        "overrides '" + key + "' from the config file");
  }

  std::size_t n = 0, d = 0;
  double eps = kDefaultDesignErasure;
  auto add_code_opts = [&](CLI::App* sub) {
    sub->add_option("--N", n, "code length (number of workers)")->required();
    sub->add_option("--d", d, "number of parameters")->required();
    sub->add_option("--design-erasure", eps, "BEC design erasure probability");
  };

  auto* construct = app.add_subcommand("construct", "Print the frozen/information channel split as JSON");
  add_code_opts(construct);

  std::string diag, values;
  bool directions = false;
  auto* enc = app.add_subcommand("encode-debug", "Worker outputs c.v_i for a coordinate vector c (CSV)");
  add_code_opts(enc);
  enc->add_option("--diag", diag, "comma-separated +-1 diagonal (default all +1)");
  enc->add_option("--values", values, "d comma-separated values (default: read one line from stdin)");
  enc->add_flag("--directions", directions, "print the N x d direction matrix instead");

  auto* dec = app.add_subcommand("decode-debug", "Decode N worker outputs; empty or x marks an erased output");
  add_code_opts(dec);
  dec->add_option("--diag", diag, "comma-separated +-1 diagonal (default all +1)");
  dec->add_option("--values", values, "N comma-separated outputs (default: read one line from stdin)");

  std::size_t schedules = 1000, k = 0;
  std::uint64_t seed = 0;
  std::string dist = "shifted_exponential", runtime_file;
  double shift = kDefaultShift, rate = kDefaultRate;
  auto* sim = app.add_subcommand("simulate-timing", "Mean stop time of each stopping rule over sampled schedules");
  add_code_opts(sim);
  sim->add_option("--schedules", schedules, "number of sampled schedules")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "base seed");
  sim->add_option("--runtime-dist", dist, "shifted_exponential or empirical");
  sim->add_option("--shift", shift, "shifted exponential shift");
  sim->add_option("--rate", rate, "shifted exponential rate");
  sim->add_option("--runtime-file", runtime_file, "runtime samples, one per line");
  sim->add_option("--k", k, "k for the first_k rule (default d)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, run_flags);
    if (*construct) return cmd_construct(n, d, eps);
    if (*enc) return cmd_encode(n, d, eps, diag, values, directions);
    if (*dec) return cmd_decode(n, d, eps, diag, values);
    if (*sim) return cmd_simulate(n, d, eps, schedules, seed, dist, shift, rate, runtime_file, k);
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.category << ": " << one_line(f.message) << '\n';
    return f.code;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: runtime: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
