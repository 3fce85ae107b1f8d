#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gradflow/error.hpp"
#include "gradflow/experiment.hpp"

using namespace gradflow;
using namespace gradflow::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gradflow_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gradflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

Error config_error(const std::string& text) {
  try {
    parse_config(Json::parse(text));
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a config error");
  return Error(ErrorCode::Config, "");
}

const char* kSmall = R"({
  "id": "small",
  "domain": "interval",
  "n_modes": 8,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "initial": {"random": {"amplitude": 0.1, "count": 4}},
  "integrator": {"method": "integrate", "dt": 1e-2, "t_end": 2, "record_stride": 5},
  "analyses": [{"type": "closed_form_match", "tol": 1e-4}]
})";

}  // namespace

TEST_CASE("presets") {
  const auto names = preset_names();
  for (const char* n : {"prop41-i", "prop41-ii", "prop41-iii", "hr-square", "hr-interval", "zelenyak", "slow-decay",
                        "lojasiewicz-flat", "perturbed-alpha3", "oracle-match", "energy-identity"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& n : names) CHECK_NOTHROW(preset(n));

  const ExperimentConfig p2 = preset("prop41-ii");
  CHECK(p2.domain.kind == DomainKind::Interval);
  REQUIRE(p2.runs.size() == 1);
  const auto& cubic = std::get<NonlocalCubicFlow>(p2.runs[0].flow.variant);
  CHECK(cubic.l.value == 1);
  REQUIRE(p2.runs[0].initial.pairs.size() == 1);
  CHECK(p2.runs[0].initial.pairs[0].value == 0.3);
  CHECK(p2.runs[0].solver.params.t_end == 1e4);

  const ExperimentConfig p8 = preset("perturbed-alpha3");
  const auto& pert = std::get<PerturbedFlow>(p8.runs[0].flow.variant);
  CHECK(pert.h.form() == DecayProfile::Form::PowerLaw);
  CHECK(pert.h.alpha() == 3.0);
  CHECK(pert.w.f(0.7) == 0.7);

  try {
    preset("nope");
    FAIL("expected unknown preset");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownPreset);
  }
}

TEST_CASE("config errors name the field") {
  std::string text = kSmall;
  text.replace(text.find("nonlocal_cubic"), 14, "bogus");
  const Error e = config_error(text);
  CHECK(e.code() == ErrorCode::Config);
  CHECK(std::string(e.what()).find("flow.type") != std::string::npos);

  CHECK(std::string(config_error(R"({"id": "x", "flow": {"type": "nonlocal_cubic"}, "typo": 1})").what())
            .find("typo") != std::string::npos);

  const fs::path dir = scratch("bad");
  std::ofstream(dir / "unknown.json") << text;
  CHECK(cli({"run", "--config", (dir / "unknown.json").string()}) == 2);

  std::ofstream(dir / "broken.json") << "{\n  \"id\": \"x\",\n  \"n_modes\": ,\n}";
  try {
    load_config((dir / "broken.json").string());
    FAIL("expected a parse error");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::Config);
    CHECK(std::string(err.what()).find("line 3") != std::string::npos);
  }
  CHECK(cli({"run", "--config", (dir / "broken.json").string()}) == 2);
  CHECK(cli({"run", "--config", (dir / "missing.json").string()}) == 2);
}

TEST_CASE("modes outside the basis are config errors") {
  std::string text = kSmall;
  text.replace(text.find(R"({"random": {"amplitude": 0.1, "count": 4}})"), 42, R"({"modes": [[12, 0.1]]})");
  try {
    run(parse_config(Json::parse(text)));
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("small") != std::string::npos);
  }
}

TEST_CASE("runs are deterministic and write atomically") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ExperimentConfig cfg = parse_config(Json::parse(kSmall));
  cfg.out_dir = a.string();
  const Report ra = run(cfg);
  cfg.out_dir = b.string();
  const Report rb = run(cfg);
  CHECK(ra.passed());
  CHECK(slurp(a / "small.csv") == slurp(b / "small.csv"));
  Json ja = Json::parse(slurp(a / "small.report.json")), jb = Json::parse(slurp(b / "small.report.json"));
  ja.erase("timings");
  jb.erase("timings");
  CHECK(ja == jb);
  CHECK(ja.begin().key() == "schema_version");
  for (const auto& entry : fs::directory_iterator(a)) CHECK(entry.path().extension() != ".tmp");

  // Every assertion carries measured value and tolerance.
  for (const auto& r : ja["runs"])
    for (const auto& an : r["analyses"])
      for (const auto& s : an["assertions"]) {
        CHECK(s.contains("measured"));
        CHECK(s.contains("tolerance"));
      }

  cfg.seed = 2;
  cfg.out_dir = b.string();
  run(cfg);
  CHECK(slurp(a / "small.csv") != slurp(b / "small.csv"));
}

TEST_CASE("CSV round trip") {
  Trajectory traj;
  traj.times = {0.0, 0.1};
  traj.states = {SpectralField::Constant(2, 1.0 / 3.0), SpectralField::Constant(2, std::exp(1.0))};
  traj.lyapunov_values = {0.1, 1e-300};
  traj.ut_norms = {M_PI, 2.0};
  const std::string csv = trajectory_csv(traj);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,V,ut_norm,a_1,a_2");
  std::getline(in, line);
  std::getline(in, line);
  std::vector<double> row;
  std::stringstream ls(line);
  for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::stod(cell));
  REQUIRE(row.size() == 5);
  CHECK(row[0] == 0.1);
  CHECK(row[1] == 1e-300);
  CHECK(row[3] == std::exp(1.0));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(cli({"list-presets"}) == 0);
  CHECK(cli({"preset", "blow-up", "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "blow-up.report.json"));
  CHECK(cli({"preset", "nope"}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  CHECK(cli({"run"}) == 2);

  std::string text = kSmall;
  text.replace(text.find("1e-4"), 4, "1e-30");
  std::ofstream(dir / "strict.json") << text;
  CHECK(cli({"run", "--config", (dir / "strict.json").string(), "--out", dir.string()}) == 1);

  std::ofstream(dir / "small.json") << kSmall;
  CHECK(cli({"run", "--config", (dir / "small.json").string(), "--out", dir.string(), "--seed", "7"}) == 0);
  CHECK(Json::parse(slurp(dir / "small.report.json"))["seed"] == 7);
}
