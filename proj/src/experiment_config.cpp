#include "codedbbo/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace codedbbo {

namespace {

constexpr const char* kEsNormalization = "received";
constexpr const char* kHybridCharge = "master_zero_time";

const std::vector<std::string> kPathKeys = {"a_path", "b_path", "model_path", "theta0_path", "runtime_file",
                                            "output"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Lookup {
 public:
  Lookup(const KeyValues& file, const KeyValues& overrides) : file_(file), overrides_(overrides) {}

  [[nodiscard]] std::optional<std::string> raw(const std::string& key) const {
    if (auto it = overrides_.find(key); it != overrides_.end() && !it->second.empty()) return it->second;
    if (auto it = file_.find(key); it != file_.end() && !it->second.empty()) return it->second;
    return std::nullopt;
  }

  [[nodiscard]] std::string str(const std::string& key, std::string fallback) const {
    return raw(key).value_or(std::move(fallback));
  }

  [[nodiscard]] double real(const std::string& key, double fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    double out = 0.0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size()) throw ConfigError(key, "expected a number, got '" + *v + "'");
    return out;
  }

  [[nodiscard]] std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size()) {
      throw ConfigError(key, "expected a non-negative integer, got '" + *v + "'");
    }
    return out;
  }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + *v + "'");
  }

 private:
  const KeyValues& file_;
  const KeyValues& overrides_;
};

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::string fmt_real(double v) {
  // round-trips exactly
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "objective",   "a_path",     "b_path",     "m",           "problem_seed",  "quartic_weight",
      "model_path",  "theta0_path", "target",    "true_class",  "c",             "kappa",
      "attack_literal_form",        "method",    "d",           "N",             "design_erasure",
      "delta",       "optimizer",  "step_size",  "beta1",       "beta2",         "adam_epsilon",
      "rule",        "k",          "runtime_dist", "runtime_file", "shift",      "rate",
      "iterations",  "seed",       "freeze_diag", "decode_cost", "output",       "codec_convention",
      "es_normalization",          "hybrid_extra_evals"};
  return keys;
}

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  const auto& keys = config_keys();
  KeyValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError("", where + ": expected key=value, got '" + content + "'");
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, where + ": unknown key");
    }
    if (out.count(key)) throw ConfigError(key, where + ": duplicate key");
    out.emplace(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  KeyValues kv = parse_key_values(ss.str(), path.string());
  // fixture paths inside a config file are relative to that file
  for (const auto& key : kPathKeys) {
    if (key == "output") continue;
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) continue;
    std::filesystem::path p(it->second);
    if (p.is_relative()) it->second = (path.parent_path() / p).lexically_normal().string();
  }
  return kv;
}

std::string_view to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::l1: return "l1";
    case ObjectiveKind::l2sq: return "l2sq";
    case ObjectiveKind::quartic: return "quartic";
    case ObjectiveKind::targeted: return "targeted";
    case ObjectiveKind::untargeted: return "untargeted";
  }
  return "unknown";
}

std::pair<Matrix, Vector> generate_regression_problem(std::size_t m, std::size_t d, std::uint64_t seed) {
  // A ~ N(0, 1/m) keeps the default step stable on the smooth objectives.
  // b = A x* + noise with x* planted far from the origin, so a 2000-step run
  // from theta = 0 still measures how fast each estimator travels.
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(m));
  Matrix a = gaussian_matrix(m, d, seed, row_scale);
  Matrix x_star = gaussian_matrix(1, d, seed + 1, 1000.0);
  Matrix noise = gaussian_matrix(1, m, seed + 2, 0.5 * row_scale);
  Vector b = multiply(a, x_star.row(0));
  for (std::size_t i = 0; i < m; ++i) b[i] += noise(0, i);
  return {std::move(a), std::move(b)};
}

AttackSetup generate_attack_setup(std::size_t d, std::uint64_t seed) {
  AttackSetup s;
  s.model = std::make_shared<const SyntheticClassifier>(SyntheticClassifier::generate(d, 32, 10, seed));
  Matrix x = gaussian_matrix(1, d, seed + 1, 0.5);
  s.theta0 = x.data();
  return s;
}

AttackSetup load_attack_setup(const ExperimentConfig& config) {
  const std::size_t d = config.settings.n_params;
  AttackSetup s;
  if (config.model_path.empty()) {
    s = generate_attack_setup(d, config.problem_seed);
  } else {
    s.model = std::make_shared<const SyntheticClassifier>(SyntheticClassifier::load(config.model_path));
  }
  if (!config.theta0_path.empty()) {
    s.theta0 = read_csv_vector(config.theta0_path);
  } else if (s.theta0.empty()) {
    s.theta0 = generate_attack_setup(s.model->input_dim(), config.problem_seed).theta0;
  }
  if (s.theta0.size() != s.model->input_dim()) {
    throw ConfigError("theta0_path", "theta0 has " + std::to_string(s.theta0.size()) + " entries, model expects " +
                                         std::to_string(s.model->input_dim()));
  }
  return s;
}

ExperimentConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides,
                                const std::filesystem::path& base_dir) {
  for (const auto* kv : {&file_values, &overrides}) {
    for (const auto& [key, _] : *kv) {
      const auto& keys = config_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, "unknown key");
    }
  }
  KeyValues file = file_values;
  if (!base_dir.empty()) {
    for (const auto& key : kPathKeys) {
      auto it = file.find(key);
      if (key == "output" || it == file.end() || it->second.empty()) continue;
      if (std::filesystem::path(it->second).is_relative()) it->second = (base_dir / it->second).string();
    }
  }
  const Lookup get(file, overrides);
  ExperimentConfig cfg;

  const std::string objective = get.str("objective", "l1");
  if (objective == "l1") cfg.objective = ObjectiveKind::l1;
  else if (objective == "l2sq") cfg.objective = ObjectiveKind::l2sq;
  else if (objective == "quartic") cfg.objective = ObjectiveKind::quartic;
  else if (objective == "targeted") cfg.objective = ObjectiveKind::targeted;
  else if (objective == "untargeted") cfg.objective = ObjectiveKind::untargeted;
  else throw ConfigError("objective", "expected l1, l2sq, quartic, targeted or untargeted, got '" + objective + "'");
  const bool is_attack = cfg.objective == ObjectiveKind::targeted || cfg.objective == ObjectiveKind::untargeted;

  for (const auto& [key, expected] : {std::pair<std::string, std::string>{"codec_convention", kCodecConvention},
                                      {"es_normalization", kEsNormalization},
                                      {"hybrid_extra_evals", kHybridCharge}}) {
    if (auto v = get.raw(key); v && *v != expected) {
      throw ConfigError(key, "this build only supports '" + expected + "', got '" + *v + "'");
    }
  }

  cfg.a_path = get.str("a_path", "");
  cfg.b_path = get.str("b_path", "");
  cfg.m = get.integer("m", 200);
  if (cfg.m == 0) throw ConfigError("m", "must be at least 1");
  cfg.problem_seed = get.integer("problem_seed", 2020);
  cfg.quartic_weight = get.real("quartic_weight", 0.1);
  cfg.model_path = get.str("model_path", "");
  cfg.theta0_path = get.str("theta0_path", "");
  cfg.c = get.real("c", 0.1);
  cfg.kappa = get.real("kappa", 0.0);
  if (cfg.c < 0.0) throw ConfigError("c", "must be non-negative");
  if (cfg.kappa < 0.0) throw ConfigError("kappa", "must be non-negative");
  cfg.attack_literal_form = get.boolean("attack_literal_form", false);
  if ((cfg.a_path.empty()) != (cfg.b_path.empty())) {
    throw ConfigError(cfg.a_path.empty() ? "a_path" : "b_path", "a_path and b_path must be given together");
  }
  for (const auto& key : {"a_path", "b_path", "model_path", "theta0_path", "runtime_file"}) {
    if (auto v = get.raw(key); v && !std::filesystem::exists(*v)) {
      throw ConfigError(key, "file does not exist: " + *v);
    }
  }

  auto& s = cfg.settings;
  const auto method = parse_method(get.str("method", "coded"));
  if (!method) throw ConfigError("method", "expected fd, es, coded or hybrid");
  s.method = *method;

  std::size_t default_d = 32;
  if (is_attack) {
    default_d = cfg.model_path.empty() ? 48 : SyntheticClassifier::load(cfg.model_path).input_dim();
  } else if (!cfg.a_path.empty()) {
    default_d = read_csv_matrix(cfg.a_path).cols();
  }
  s.n_params = get.integer("d", default_d);
  if (s.n_params == 0) throw ConfigError("d", "must be at least 1");
  std::size_t default_n = s.n_params;
  if (s.method == Method::es) default_n = next_power_of_two(s.n_params);
  if (s.method == Method::coded || s.method == Method::hybrid) default_n = next_power_of_two(2 * s.n_params);
  s.n_total = get.integer("N", default_n);
  if (!is_power_of_two(s.n_total)) throw ConfigError("N", "N must be a power of two");
  if (s.n_params > s.n_total) throw ConfigError("N", "N must be at least d");
  if (s.method == Method::fd && s.n_total != s.n_params) throw ConfigError("N", "method fd needs N equal to d");

  s.design_erasure = get.real("design_erasure", kDefaultDesignErasure);
  if (!(s.design_erasure > 0.0 && s.design_erasure < 1.0)) throw ConfigError("design_erasure", "must lie in (0,1)");
  s.delta = get.real("delta", kDefaultDelta);
  if (!(s.delta > 0.0)) throw ConfigError("delta", "must be positive");

  const auto optimizer = parse_optimizer(get.str("optimizer", "gd"));
  if (!optimizer) throw ConfigError("optimizer", "expected gd or adam");
  s.optimizer = *optimizer;
  s.step_size = get.real("step_size", s.optimizer == OptimizerKind::gd ? 0.5 : 0.01);
  if (!(s.step_size > 0.0)) throw ConfigError("step_size", "must be positive");
  s.adam.beta1 = get.real("beta1", 0.9);
  s.adam.beta2 = get.real("beta2", 0.999);
  s.adam.epsilon = get.real("adam_epsilon", 1e-8);
  if (s.adam.beta1 < 0.0 || s.adam.beta1 >= 1.0) throw ConfigError("beta1", "must lie in [0,1)");
  if (s.adam.beta2 < 0.0 || s.adam.beta2 >= 1.0) throw ConfigError("beta2", "must lie in [0,1)");
  if (!(s.adam.epsilon > 0.0)) throw ConfigError("adam_epsilon", "must be positive");

  const bool needs_decoding = s.method == Method::coded || s.method == Method::hybrid;
  const auto rule = parse_rule(get.str("rule", needs_decoding ? "first_decodable" : "all"));
  if (!rule) throw ConfigError("rule", "expected first_k, first_decodable or all");
  s.rule = *rule;
  s.first_k = get.integer("k", std::max<std::size_t>(1, s.n_total / 2));
  if (s.first_k < 1 || s.first_k > s.n_total) throw ConfigError("k", "must satisfy 1 <= k <= N");
  if (s.rule == RuleKind::first_k && needs_decoding) {
    throw ConfigError("rule", "methods coded and hybrid need rule first_decodable or all");
  }
  if (s.rule == RuleKind::first_decodable && s.method == Method::fd) {
    throw ConfigError("rule", "method fd has no code; use first_k or all");
  }

  cfg.runtime_dist = get.str("runtime_dist", "shifted_exponential");
  cfg.runtime_file = get.str("runtime_file", "");
  const double shift = get.real("shift", kDefaultShift);
  const double rate = get.real("rate", kDefaultRate);
  if (cfg.runtime_dist == "shifted_exponential") {
    if (!(shift >= 0.0)) throw ConfigError("shift", "must be non-negative");
    if (!(rate > 0.0)) throw ConfigError("rate", "must be positive");
    s.runtime = ShiftedExponential{shift, rate};
  } else if (cfg.runtime_dist == "empirical") {
    if (cfg.runtime_file.empty()) throw ConfigError("runtime_file", "required when runtime_dist=empirical");
    try {
      s.runtime = load_runtime_samples(cfg.runtime_file);
    } catch (const std::exception& e) {
      throw ConfigError("runtime_file", e.what());
    }
  } else {
    throw ConfigError("runtime_dist", "expected shifted_exponential or empirical");
  }
  cfg.shift = shift;
  cfg.rate = rate;

  s.iterations = get.integer("iterations", 100);
  if (s.iterations == 0) throw ConfigError("iterations", "must be at least 1");
  s.seed = get.integer("seed", 0);
  s.freeze_diag = get.boolean("freeze_diag", false);
  s.decode_cost = get.real("decode_cost", 0.0);
  if (!(s.decode_cost >= 0.0)) throw ConfigError("decode_cost", "must be non-negative");
  cfg.output = get.str("output", "trace.csv");

  if (is_attack) {
    const AttackSetup setup = load_attack_setup(cfg);
    if (setup.model->input_dim() != s.n_params) {
      throw ConfigError("d", "attack objectives need d equal to the model input dimension (" +
                                 std::to_string(setup.model->input_dim()) + ")");
    }
    const Vector lp = setup.model->log_probabilities(setup.theta0);
    std::vector<std::size_t> ranked(lp.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
    std::stable_sort(ranked.begin(), ranked.end(), [&](auto a, auto b) { return lp[a] > lp[b]; });
    cfg.true_class = get.integer("true_class", ranked[0]);
    cfg.target = get.integer("target", ranked[1]);
    if (cfg.true_class >= lp.size()) throw ConfigError("true_class", "class index out of range");
    if (cfg.target >= lp.size()) throw ConfigError("target", "class index out of range");
  } else {
    cfg.true_class = get.integer("true_class", 0);
    cfg.target = get.integer("target", 0);
    if (cfg.objective == ObjectiveKind::quartic && cfg.quartic_weight < 0.0) {
      throw ConfigError("quartic_weight", "must be non-negative");
    }
  }
  return cfg;
}

std::string echo_config(const ExperimentConfig& cfg) {
  const auto& s = cfg.settings;
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& value) { out << key << '=' << value << '\n'; };
  put("objective", std::string(to_string(cfg.objective)));
  put("a_path", cfg.a_path);
  put("b_path", cfg.b_path);
  put("m", std::to_string(cfg.m));
  put("problem_seed", std::to_string(cfg.problem_seed));
  put("quartic_weight", fmt_real(cfg.quartic_weight));
  put("model_path", cfg.model_path);
  put("theta0_path", cfg.theta0_path);
  put("target", std::to_string(cfg.target));
  put("true_class", std::to_string(cfg.true_class));
  put("c", fmt_real(cfg.c));
  put("kappa", fmt_real(cfg.kappa));
  put("attack_literal_form", cfg.attack_literal_form ? "true" : "false");
  put("method", std::string(to_string(s.method)));
  put("d", std::to_string(s.n_params));
  put("N", std::to_string(s.n_total));
  put("design_erasure", fmt_real(s.design_erasure));
  put("delta", fmt_real(s.delta));
  put("optimizer", std::string(to_string(s.optimizer)));
  put("step_size", fmt_real(s.step_size));
  put("beta1", fmt_real(s.adam.beta1));
  put("beta2", fmt_real(s.adam.beta2));
  put("adam_epsilon", fmt_real(s.adam.epsilon));
  put("rule", std::string(to_string(s.rule)));
  put("k", std::to_string(s.first_k));
  put("runtime_dist", cfg.runtime_dist);
  put("runtime_file", cfg.runtime_file);
  put("shift", fmt_real(cfg.shift));
  put("rate", fmt_real(cfg.rate));
  put("iterations", std::to_string(s.iterations));
  put("seed", std::to_string(s.seed));
  put("freeze_diag", s.freeze_diag ? "true" : "false");
  put("decode_cost", fmt_real(s.decode_cost));
  put("output", cfg.output);
  put("codec_convention", kCodecConvention);
  put("es_normalization", kEsNormalization);
  put("hybrid_extra_evals", kHybridCharge);
  return out.str();
}

namespace {

AttackParams attack_params(const ExperimentConfig& cfg) {
  AttackParams p;
  p.c = cfg.c;
  p.kappa = cfg.kappa;
  p.literal_probability_margin = cfg.attack_literal_form;
  return p;
}

}  // namespace

BlackBoxObjective make_objective(const ExperimentConfig& cfg) {
  const std::size_t d = cfg.settings.n_params;
  switch (cfg.objective) {
    case ObjectiveKind::l1:
    case ObjectiveKind::l2sq:
    case ObjectiveKind::quartic: {
      Matrix a;
      Vector b;
      if (cfg.a_path.empty()) {
        std::tie(a, b) = generate_regression_problem(cfg.m, d, cfg.problem_seed);
      } else {
        a = read_csv_matrix(cfg.a_path);
        b = read_csv_vector(cfg.b_path);
      }
      if (a.cols() != d) {
        throw ConfigError("d", "matrix has " + std::to_string(a.cols()) + " columns but d=" + std::to_string(d));
      }
      if (cfg.objective == ObjectiveKind::l1) return l1_objective(std::move(a), std::move(b));
      if (cfg.objective == ObjectiveKind::l2sq) return l2sq_objective(std::move(a), std::move(b));
      return quartic_objective(std::move(a), std::move(b), cfg.quartic_weight);
    }
    case ObjectiveKind::targeted: {
      AttackSetup setup = load_attack_setup(cfg);
      return targeted_attack_objective(setup.model, std::move(setup.theta0), cfg.target, attack_params(cfg));
    }
    case ObjectiveKind::untargeted: {
      AttackSetup setup = load_attack_setup(cfg);
      return untargeted_attack_objective(setup.model, std::move(setup.theta0), cfg.true_class,
                                         attack_params(cfg));
    }
  }
  throw ConfigError("objective", "unsupported objective");
}

Vector initial_theta(const ExperimentConfig& cfg) {
  if (cfg.objective == ObjectiveKind::targeted || cfg.objective == ObjectiveKind::untargeted) {
    return load_attack_setup(cfg).theta0;
  }
  return Vector(cfg.settings.n_params, 0.0);
}

std::vector<IterationTrace> run_configured(const ExperimentConfig& config, const IterateObserver& observer) {
  const BlackBoxObjective objective = make_objective(config);
  ExperimentSettings settings = config.settings;
  settings.theta0 = initial_theta(config);
  return run_experiment(objective, settings, observer);
}

std::string format_trace(const std::vector<IterationTrace>& traces) {
  std::string out = kTraceHeader;
  out += '\n';
  char buf[256];
  for (const auto& t : traces) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%zu,%d,%s,%.12g,%llu\n", t.iteration, t.cost, t.elapsed_time,
                  t.n_outputs_used, t.decoded ? 1 : 0, std::string(to_string(t.method)).c_str(), t.delta,
                  static_cast<unsigned long long>(t.seed));
    out += buf;
  }
  return out;
}

void emit_trace(const std::vector<IterationTrace>& traces, const std::filesystem::path& path) {
  if (traces.empty()) throw std::invalid_argument("refusing to write an empty trace");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace to " + path.string());
  out << format_trace(traces);
  if (!out) throw std::runtime_error("failed while writing " + path.string());
}

}  // namespace codedbbo
