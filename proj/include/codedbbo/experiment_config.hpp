#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "codedbbo/objectives.hpp"
#include "codedbbo/optimizer.hpp"

namespace codedbbo {

/// Tag of the butterfly pairing / channel ordering convention, echoed into
/// every run so traces stay comparable if the convention ever changes.
inline constexpr const char* kCodecConvention = "xor-stride-2^level/natural-order/v1";

/// Raised for malformed or inconsistent configuration; `key` names the
/// offending setting when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

using KeyValues = std::map<std::string, std::string>;

enum class ObjectiveKind { l1, l2sq, quartic, targeted, untargeted };

struct ExperimentConfig {
  ObjectiveKind objective = ObjectiveKind::l1;
  std::string a_path;  // empty: generated from problem_seed
  std::string b_path;
  std::size_t m = 200;  // rows of the generated A
  std::uint64_t problem_seed = 2020;
  double quartic_weight = 0.1;

  std::string model_path;  // empty: generated classifier
  std::string theta0_path;
  std::size_t target = 0;
  std::size_t true_class = 0;
  double c = 0.1;
  double kappa = 0.0;
  bool attack_literal_form = false;

  ExperimentSettings settings;
  std::string runtime_dist = "shifted_exponential";
  std::string runtime_file;
  double shift = kDefaultShift;
  double rate = kDefaultRate;
  std::string output = "trace.csv";
};

/// Every key accepted in config files (flags use the same names with '-').
[[nodiscard]] const std::vector<std::string>& config_keys();

/// Parses `key=value` lines; '#' starts a comment. Unknown keys are rejected.
[[nodiscard]] KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
[[nodiscard]] KeyValues read_config_file(const std::filesystem::path& path);

/// Applies defaults and checks every constraint. Keys in `overrides` win over
/// `file_values`. Relative fixture paths resolve against `base_dir`.
[[nodiscard]] ExperimentConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides = {},
                                              const std::filesystem::path& base_dir = {});

/// Fully resolved config as key=value lines, every key present.
[[nodiscard]] std::string echo_config(const ExperimentConfig& config);

[[nodiscard]] std::string_view to_string(ObjectiveKind k);

/// Instantiates the objective named by the config. Attack objectives also
/// fill in the default target / true class from the model's prediction at
/// theta0 when the config leaves them unset.
[[nodiscard]] BlackBoxObjective make_objective(const ExperimentConfig& config);

/// Starting point: the origin for the regression objectives, theta0 for attacks.
[[nodiscard]] Vector initial_theta(const ExperimentConfig& config);

struct AttackSetup {
  std::shared_ptr<const SyntheticClassifier> model;
  Vector theta0;
};
[[nodiscard]] AttackSetup load_attack_setup(const ExperimentConfig& config);

/// Data generators behind the default fixtures.
[[nodiscard]] std::pair<Matrix, Vector> generate_regression_problem(std::size_t m, std::size_t d,
                                                                    std::uint64_t seed);
[[nodiscard]] AttackSetup generate_attack_setup(std::size_t d, std::uint64_t seed);

/// Builds the objective and starting point for `config` and runs it.
[[nodiscard]] std::vector<IterationTrace> run_configured(const ExperimentConfig& config,
                                                         const IterateObserver& observer = {});

inline constexpr const char* kTraceHeader = "iteration,cost,elapsed_time,n_outputs_used,decoded,method,delta,seed";

[[nodiscard]] std::string format_trace(const std::vector<IterationTrace>& traces);
void emit_trace(const std::vector<IterationTrace>& traces, const std::filesystem::path& path);

}  // namespace codedbbo
