#ifndef GRADFLOW_EXPERIMENT_HPP
#define GRADFLOW_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gradflow/basis.hpp"
#include "gradflow/decay.hpp"
#include "gradflow/flows.hpp"
#include "gradflow/integrate.hpp"
#include "gradflow/metrics.hpp"
#include "gradflow/nonlocal_model.hpp"
#include "json.hpp"

namespace gradflow::experiment {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// A mode reference from the config, kept with its field path so a mode
/// missing from the basis can be reported against the config.
struct ModeRef {
  Mode mode;
  std::string path;
};

struct ModeValue {
  ModeRef mode;
  double value = 0.0;
};

struct InitialSpec {
  std::vector<ModeValue> pairs;
  /// Random data: amplitude * N(0, 1) on the first `random_count` modes.
  bool random = false;
  double amplitude = 0.0;
  int random_count = 0;
};

enum class SolverMethod { Integrate, ClosedForm, None };

struct SolverSpec {
  SolverMethod method = SolverMethod::Integrate;
  IntegratorParams params;
  /// Closed-form sampling: t = 0 followed by `samples` points on [t_start, t_end].
  double t_start = 0.0;
  int samples = 0;
  bool log_spacing = false;
};

// Analyses -------------------------------------------------------------------

struct ClosedFormMatch {
  double tol = 1e-6;
};

enum class ValueScale { None, Sqrt2t, SqrtLnT, SqrtLn2t };

struct ScaledValue {
  ModeRef mode;
  double t = 0.0;
  ValueScale scale = ValueScale::None;
  double lo = 0.0, hi = 0.0;
};

enum class SeriesKind { Mode, Deviation, Norm, TailEnergy };

struct RateFitCheck {
  SeriesKind series = SeriesKind::Norm;
  std::optional<ModeRef> mode;
  double target = 0.0;
  std::optional<std::pair<double, double>> t_window;
  std::optional<std::pair<double, double>> value_window;
  DecayModel model = DecayModel::Exponential;
  double rate = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
};

struct LimitNorm {
  double expected = 0.0;
  double tol = 0.0;
};

struct Classify {
  nonlocal::RateCase expect = nonlocal::RateCase::DecayExponential;
};

struct HrCheck {
  GroupSelector j;
  int samples = 8;
  std::optional<int> kernel_dim;  // default: manifold dimension
  std::optional<double> gap;
  double gap_tol = 1e-6;
};

struct EnergyIdentity {
  double tol = 1e-6;
  std::optional<double> min_reduction;
};

struct Zelenyak {
  bool synthetic = false;
  double c8 = 0.25, beta = 1.0, t_end = 20.0;
  int samples = 1001;
};

struct OmegaLimit {
  std::vector<ModeValue> candidate;
  double tol = 1e-3;
  bool expect = true;
};

struct PerturbedBound {
  double t_min = 2.0;
};

struct HClass {
  std::optional<double> alpha;  // power law; default: the flow's h
  double t_probe = 1e6;
  std::optional<double> integral;
  double integral_tol = 1e-4;
};

struct SlowFlow {
  SlowFlowKind kind = SlowFlowKind::FlatExp;
  double rho1 = 1.0, rho2 = 1.0, a0 = 0.5, t_end = 1e6;
  std::optional<std::pair<double, double>> bound_window;
  std::optional<double> theta_max;
  std::optional<double> value_t;
  double value_lo = 0.0, value_hi = 0.0;
};

struct Lojasiewicz {
  std::optional<double> theta;
  double tol = 0.05;
  std::optional<double> theta_max;
};

struct BlowUp {
  bool expect = true;
};

using AnalysisParams = std::variant<ClosedFormMatch, ScaledValue, RateFitCheck, LimitNorm, Classify, HrCheck,
                                    EnergyIdentity, Zelenyak, OmegaLimit, PerturbedBound, HClass, SlowFlow,
                                    Lojasiewicz, BlowUp>;

struct AnalysisSpec {
  std::string type;
  std::string label;
  std::string path;
  AnalysisParams params;
};

struct RunConfig {
  std::string id;
  FlowSpec flow;
  InitialSpec initial;
  SolverSpec solver;
  std::vector<AnalysisSpec> analyses;
  std::optional<double> max_seconds;
};

struct ExperimentConfig {
  std::string id;
  DomainSpec domain;
  int n_modes = 16;
  std::vector<RunConfig> runs;
  std::string out_dir;
  bool write_csv = true;
  std::uint64_t seed = 1;
  Json source;  // echoed in the report
};

/// Parses a config document; errors are Config errors naming the field.
ExperimentConfig parse_config(const Json& doc);

/// Reads and parses a config file (JSON syntax errors report line and column).
ExperimentConfig load_config(const std::string& path);

std::vector<std::string> preset_names();

/// Pinned config of a named preset; throws UnknownPreset.
ExperimentConfig preset(const std::string& name);

struct Report {
  std::string id;
  Json json;
  int assertions = 0;
  int failed = 0;
  bool passed() const { return failed == 0; }
};

/// Runs every configured run and analysis. When `out_dir` is set the
/// trajectory CSVs and the report JSON are written there atomically.
/// Pipeline failures are rethrown with the experiment id in the message.
Report run(const ExperimentConfig& config);

/// CSV with header t,V,ut_norm,a_1..a_n and 17 significant digits.
std::string trajectory_csv(const Trajectory& traj);

/// Writes through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// Entry point of the command-line tool; returns the process exit code
/// (0 pass, 1 assertion failure, 2 usage or config error, 3 runtime error).
int cli_main(int argc, char** argv);

}  // namespace gradflow::experiment

#endif
