#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "gradflow/error.hpp"
#include "gradflow/experiment.hpp"

namespace gradflow::experiment {

namespace {

class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::Config, (path_.empty() ? std::string("<root>") : path_) + ": " + msg);
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) Node(j_, child_path(key)).fail("missing required field");
    return Node(j_.at(key), child_path(key));
  }

  Node item(size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  size_t size() const { return j_.size(); }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }

  void require_array() const {
    if (!j_.is_array()) fail("expected an array");
  }

  void allow(std::initializer_list<const char*> keys) const {
    require_object();
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) Node(value, child_path(key)).fail("unknown field");
    }
  }

  double as_number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::int64_t as_integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }

  std::string as_string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  bool as_bool() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  double number(const std::string& key) const { return at(key).as_number(); }
  double number(const std::string& key, double def) const { return has(key) ? at(key).as_number() : def; }
  std::optional<double> opt_number(const std::string& key) const {
    return has(key) ? std::optional<double>(at(key).as_number()) : std::nullopt;
  }
  std::int64_t integer(const std::string& key, std::int64_t def) const {
    return has(key) ? at(key).as_integer() : def;
  }
  std::string string(const std::string& key) const { return at(key).as_string(); }
  bool boolean(const std::string& key, bool def) const { return has(key) ? at(key).as_bool() : def; }

  double positive(const std::string& key, double def) const {
    const double v = number(key, def);
    if (!(v > 0.0)) at(key).fail("must be positive");
    return v;
  }

  std::pair<double, double> interval(const std::string& key) const {
    const Node n = at(key);
    if (!n.json().is_array() || n.size() != 2) n.fail("expected [lo, hi]");
    const double lo = n.item(0).as_number(), hi = n.item(1).as_number();
    if (!(lo < hi)) n.fail("expected lo < hi");
    return {lo, hi};
  }

 private:
  const Json& j_;
  std::string path_;
};

DomainSpec parse_domain(const Node& n) {
  DomainSpec d;
  std::string kind;
  if (n.json().is_string()) {
    kind = n.as_string();
  } else {
    n.allow({"kind", "quadrature_points_per_dim"});
    kind = n.string("kind");
    const auto q = n.integer("quadrature_points_per_dim", 0);
    if (q < 0) n.at("quadrature_points_per_dim").fail("must be >= 0");
    d.quadrature_points_per_dim = static_cast<int>(q);
  }
  if (kind == "interval")
    d.kind = DomainKind::Interval;
  else if (kind == "square")
    d.kind = DomainKind::Square;
  else
    (n.json().is_string() ? n : n.at("kind")).fail("unknown domain '" + kind + "' (interval, square)");
  return d;
}

ModeRef parse_mode(const Node& n, DomainKind domain) {
  ModeRef ref;
  ref.path = n.path();
  if (domain == DomainKind::Interval) {
    const auto k = n.as_integer();
    if (k < 1) n.fail("mode number must be >= 1");
    ref.mode = {static_cast<int>(k), 0};
  } else {
    if (!n.json().is_array() || n.size() != 2) n.fail("square modes are [k1, k2]");
    const auto k1 = n.item(0).as_integer(), k2 = n.item(1).as_integer();
    if (k1 < 1 || k2 < 1) n.fail("mode numbers must be >= 1");
    ref.mode = {static_cast<int>(k1), static_cast<int>(k2)};
  }
  return ref;
}

std::vector<ModeValue> parse_pairs(const Node& n, DomainKind domain) {
  n.require_array();
  std::vector<ModeValue> out;
  for (size_t i = 0; i < n.size(); ++i) {
    const Node p = n.item(i);
    if (!p.json().is_array() || p.size() != 2) p.fail("expected [mode, value]");
    out.push_back({parse_mode(p.item(0), domain), p.item(1).as_number()});
  }
  return out;
}

GroupSelector parse_group(const Node& n) {
  if (n.json().is_number_integer()) {
    const auto i = n.as_integer();
    if (i < 1) n.fail("group index is 1-based");
    return GroupSelector::index(i);
  }
  n.allow({"index", "eigenvalue"});
  if (n.has("index") == n.has("eigenvalue")) n.fail("give exactly one of index, eigenvalue");
  if (n.has("index")) return GroupSelector::index(n.at("index").as_integer());
  return GroupSelector::eigenvalue(n.at("eigenvalue").as_integer());
}

PointwiseNonlinearity parse_nonlinearity(const Node& n, double mu) {
  const std::string name = n.as_string();
  if (name == "allen_cahn") return allen_cahn(mu);
  if (name == "pure_cubic") return pure_cubic();
  if (name == "flat_exponential") return flat_exponential();
  if (name == "zero") return zero_nonlinearity();
  if (name == "linear_forcing") return linear_forcing();
  n.fail("unknown nonlinearity '" + name + "' (allen_cahn, pure_cubic, flat_exponential, zero, linear_forcing)");
}

FlowSpec parse_flow(const Node& n) {
  n.require_object();
  const std::string type = n.string("type");
  if (type == "local") {
    n.allow({"type", "nonlinearity", "mu"});
    return FlowSpec{LocalFlow{parse_nonlinearity(n.at("nonlinearity"), n.number("mu", 1.0))}};
  }
  if (type == "nonlocal_cubic") {
    n.allow({"type", "l", "m"});
    NonlocalCubicFlow f;
    f.l = parse_group(n.at("l"));
    const auto m = n.integer("m", 1);
    if (m < 1) n.at("m").fail("polyharmonic order must be >= 1");
    f.m = static_cast<int>(m);
    return FlowSpec{f};
  }
  if (type == "nonlocal_general") {
    n.allow({"type", "mu", "potential"});
    NonlocalGeneralFlow f;
    f.mu = n.number("mu", 1.0);
    const Node p = n.at("potential");
    const std::string name = p.as_string();
    if (name == "quadratic")
      f.g = quadratic_potential();
    else if (name == "slow_log")
      f.g = slow_log_potential();
    else
      p.fail("unknown potential '" + name + "' (quadratic, slow_log)");
    return FlowSpec{f};
  }
  if (type == "perturbed") {
    n.allow({"type", "base", "h", "w"});
    PerturbedFlow f;
    const Node base = n.at("base");
    FlowSpec b = parse_flow(base);
    if (std::holds_alternative<PerturbedFlow>(b.variant)) base.fail("the base flow must be unperturbed");
    f.base = std::make_shared<const FlowSpec>(std::move(b));
    const Node h = n.at("h");
    h.allow({"power_law"});
    const double alpha = h.number("power_law");
    if (!(alpha > 0.0)) h.at("power_law").fail("exponent must be positive");
    f.h = DecayProfile::power_law(alpha);
    f.w = parse_nonlinearity(n.at("w"), 1.0);
    return FlowSpec{f};
  }
  n.at("type").fail("unknown flow type '" + type + "' (local, nonlocal_cubic, nonlocal_general, perturbed)");
}

InitialSpec parse_initial(const Node& n, DomainKind domain) {
  n.allow({"modes", "random"});
  InitialSpec init;
  if (n.has("modes") == n.has("random")) n.fail("give exactly one of modes, random");
  if (n.has("modes")) {
    init.pairs = parse_pairs(n.at("modes"), domain);
  } else {
    const Node r = n.at("random");
    r.allow({"amplitude", "count"});
    init.random = true;
    init.amplitude = r.positive("amplitude", 0.1);
    const auto count = r.integer("count", 0);
    if (count < 1) r.at("count").fail("must be >= 1");
    init.random_count = static_cast<int>(count);
  }
  return init;
}

SolverSpec parse_solver(const Node& n) {
  n.allow({"method", "dt", "t_end", "record_stride", "stationary_tol", "blowup_threshold", "t_start", "samples",
           "spacing"});
  SolverSpec s;
  const std::string method = n.has("method") ? n.string("method") : "integrate";
  if (method == "integrate")
    s.method = SolverMethod::Integrate;
  else if (method == "closed_form")
    s.method = SolverMethod::ClosedForm;
  else if (method == "none")
    s.method = SolverMethod::None;
  else
    n.at("method").fail("unknown method '" + method + "' (integrate, closed_form, none)");

  auto& p = s.params;
  p.dt = n.positive("dt", p.dt);
  if (!(p.dt < 1.0)) n.at("dt").fail("must be < 1");
  p.t_end = n.positive("t_end", p.t_end);
  const auto stride = n.integer("record_stride", 1);
  if (stride < 1) n.at("record_stride").fail("must be >= 1");
  p.record_stride = static_cast<int>(stride);
  p.stationary_tol = n.number("stationary_tol", 0.0);
  if (p.stationary_tol < 0.0) n.at("stationary_tol").fail("must be >= 0");
  p.blowup_threshold = n.positive("blowup_threshold", p.blowup_threshold);

  if (s.method == SolverMethod::ClosedForm) {
    const auto samples = n.integer("samples", 1001);
    if (samples < 2) n.at("samples").fail("must be >= 2");
    s.samples = static_cast<int>(samples);
    const std::string spacing = n.has("spacing") ? n.string("spacing") : "linear";
    if (spacing != "linear" && spacing != "log") n.at("spacing").fail("expected linear or log");
    s.log_spacing = spacing == "log";
    s.t_start = n.number("t_start", s.log_spacing ? 1e-3 : 0.0);
    if (s.log_spacing && !(s.t_start > 0.0)) n.at("t_start").fail("log spacing needs t_start > 0");
    if (!(s.t_start < p.t_end) || s.t_start < 0.0) n.at("t_start").fail("must lie in [0, t_end)");
  }
  return s;
}

nonlocal::RateCase parse_rate_case(const Node& n) {
  const std::string s = n.as_string();
  for (auto c : {nonlocal::RateCase::DecayExponential, nonlocal::RateCase::DecayAlgebraic,
                 nonlocal::RateCase::ConvergeNonzero})
    if (s == nonlocal::to_string(c)) return c;
  n.fail("unknown case '" + s + "' (decay_exponential, decay_algebraic, converge_nonzero)");
}

DecayModel parse_model(const Node& n) {
  const std::string s = n.as_string();
  for (auto m : {DecayModel::Exponential, DecayModel::Algebraic, DecayModel::Logarithmic, DecayModel::TExponential})
    if (s == to_string(m)) return m;
  n.fail("unknown model '" + s + "' (exponential, algebraic, logarithmic, t_exponential)");
}

AnalysisParams parse_analysis_params(const std::string& type, const Node& n, DomainKind domain) {
  if (type == "closed_form_match") {
    n.allow({"type", "label", "tol"});
    return ClosedFormMatch{n.positive("tol", 1e-6)};
  }
  if (type == "scaled_value") {
    n.allow({"type", "label", "mode", "t", "scale", "range"});
    ScaledValue a;
    a.mode = parse_mode(n.at("mode"), domain);
    a.t = n.number("t");
    const std::string scale = n.has("scale") ? n.string("scale") : "none";
    if (scale == "none")
      a.scale = ValueScale::None;
    else if (scale == "sqrt_2t")
      a.scale = ValueScale::Sqrt2t;
    else if (scale == "sqrt_ln_t")
      a.scale = ValueScale::SqrtLnT;
    else if (scale == "sqrt_ln_2t")
      a.scale = ValueScale::SqrtLn2t;
    else
      n.at("scale").fail("unknown scale '" + scale + "' (none, sqrt_2t, sqrt_ln_t, sqrt_ln_2t)");
    std::tie(a.lo, a.hi) = n.interval("range");
    return a;
  }
  if (type == "rate_fit") {
    n.allow({"type", "label", "series", "mode", "target", "t_window", "value_window", "model", "rate", "rel_tol",
             "abs_tol"});
    RateFitCheck a;
    const std::string series = n.string("series");
    if (series == "mode")
      a.series = SeriesKind::Mode;
    else if (series == "deviation")
      a.series = SeriesKind::Deviation;
    else if (series == "norm")
      a.series = SeriesKind::Norm;
    else if (series == "tail_energy")
      a.series = SeriesKind::TailEnergy;
    else
      n.at("series").fail("unknown series '" + series + "' (mode, deviation, norm, tail_energy)");
    if (a.series == SeriesKind::Mode || a.series == SeriesKind::Deviation) a.mode = parse_mode(n.at("mode"), domain);
    a.target = n.number("target", 0.0);
    if (n.has("t_window")) a.t_window = n.interval("t_window");
    if (n.has("value_window")) a.value_window = n.interval("value_window");
    a.model = parse_model(n.at("model"));
    a.rate = n.number("rate");
    a.rel_tol = n.number("rel_tol", 0.0);
    a.abs_tol = n.number("abs_tol", 0.0);
    if (a.rel_tol < 0.0 || a.abs_tol < 0.0 || (a.rel_tol == 0.0 && a.abs_tol == 0.0))
      n.fail("give a positive rel_tol or abs_tol");
    return a;
  }
  if (type == "limit_norm") {
    n.allow({"type", "label", "expected", "tol"});
    return LimitNorm{n.number("expected"), n.positive("tol", 1e-8)};
  }
  if (type == "classify") {
    n.allow({"type", "label", "expect"});
    return Classify{parse_rate_case(n.at("expect"))};
  }
  if (type == "hr_check") {
    n.allow({"type", "label", "j", "samples", "kernel_dim", "gap", "gap_tol"});
    HrCheck a;
    a.j = parse_group(n.at("j"));
    const auto samples = n.integer("samples", 8);
    if (samples < 1) n.at("samples").fail("must be >= 1");
    a.samples = static_cast<int>(samples);
    if (n.has("kernel_dim")) a.kernel_dim = static_cast<int>(n.at("kernel_dim").as_integer());
    a.gap = n.opt_number("gap");
    a.gap_tol = n.positive("gap_tol", 1e-6);
    return a;
  }
  if (type == "energy_identity") {
    n.allow({"type", "label", "tol", "min_reduction"});
    EnergyIdentity a;
    a.tol = n.positive("tol", 1e-6);
    a.min_reduction = n.opt_number("min_reduction");
    return a;
  }
  if (type == "zelenyak") {
    n.allow({"type", "label", "source", "c8", "beta", "t_end", "samples"});
    Zelenyak a;
    const std::string source = n.has("source") ? n.string("source") : "trajectory";
    if (source != "trajectory" && source != "synthetic") n.at("source").fail("expected trajectory or synthetic");
    a.synthetic = source == "synthetic";
    a.c8 = n.positive("c8", 0.25);
    a.beta = n.positive("beta", 1.0);
    a.t_end = n.positive("t_end", 20.0);
    const auto samples = n.integer("samples", 1001);
    if (samples < 2) n.at("samples").fail("must be >= 2");
    a.samples = static_cast<int>(samples);
    return a;
  }
  if (type == "omega_limit") {
    n.allow({"type", "label", "candidate", "tol", "expect"});
    OmegaLimit a;
    a.candidate = parse_pairs(n.at("candidate"), domain);
    a.tol = n.positive("tol", 1e-3);
    a.expect = n.boolean("expect", true);
    return a;
  }
  if (type == "perturbed_bound") {
    n.allow({"type", "label", "t_min"});
    PerturbedBound a;
    a.t_min = n.number("t_min", 2.0);
    if (a.t_min < 1.0) n.at("t_min").fail("must be >= 1");
    return a;
  }
  if (type == "h_class") {
    n.allow({"type", "label", "power_law", "t_probe", "integral", "integral_tol"});
    HClass a;
    a.alpha = n.opt_number("power_law");
    if (a.alpha && !(*a.alpha > 0.0)) n.at("power_law").fail("exponent must be positive");
    a.t_probe = n.positive("t_probe", 1e6);
    a.integral = n.opt_number("integral");
    a.integral_tol = n.positive("integral_tol", 1e-4);
    return a;
  }
  if (type == "slow_flow") {
    n.allow({"type", "label", "kind", "rho1", "rho2", "a0", "t_end", "bound_window", "theta_max", "value_t",
             "value_range"});
    SlowFlow a;
    const std::string kind = n.string("kind");
    if (kind == "flat_exp")
      a.kind = SlowFlowKind::FlatExp;
    else if (kind == "nonlocal_log")
      a.kind = SlowFlowKind::NonlocalLog;
    else
      n.at("kind").fail("unknown kind '" + kind + "' (flat_exp, nonlocal_log)");
    a.rho1 = n.positive("rho1", 1.0);
    a.rho2 = n.positive("rho2", 1.0);
    a.a0 = n.positive("a0", 0.5);
    a.t_end = n.positive("t_end", 1e6);
    if (n.has("bound_window")) {
      if (a.kind != SlowFlowKind::FlatExp) n.at("bound_window").fail("the lower bound applies to flat_exp only");
      a.bound_window = n.interval("bound_window");
      if (!(a.bound_window->first > 1.0)) n.at("bound_window").fail("needs t > 1");
    }
    a.theta_max = n.opt_number("theta_max");
    if (n.has("value_t") != n.has("value_range")) n.fail("value_t and value_range go together");
    if (n.has("value_t")) {
      a.value_t = n.positive("value_t", 1.0);
      std::tie(a.value_lo, a.value_hi) = n.interval("value_range");
      if (*a.value_t > a.t_end) n.at("value_t").fail("must not exceed t_end");
    }
    return a;
  }
  if (type == "lojasiewicz") {
    n.allow({"type", "label", "theta", "tol", "theta_max"});
    Lojasiewicz a;
    a.theta = n.opt_number("theta");
    a.tol = n.positive("tol", 0.05);
    a.theta_max = n.opt_number("theta_max");
    return a;
  }
  if (type == "blow_up") {
    n.allow({"type", "label", "expect"});
    return BlowUp{n.boolean("expect", true)};
  }
  n.at("type").fail("unknown analysis '" + type + "'");
}

bool needs_trajectory(const AnalysisParams& p) {
  if (const auto* z = std::get_if<Zelenyak>(&p)) return !z->synthetic;
  return !std::holds_alternative<Classify>(p) && !std::holds_alternative<HrCheck>(p) &&
         !std::holds_alternative<HClass>(p) && !std::holds_alternative<SlowFlow>(p);
}

void check_compatibility(const AnalysisSpec& a, const RunConfig& run, const Node& n) {
  const bool nonlocal_cubic = std::holds_alternative<NonlocalCubicFlow>(run.flow.variant);
  const bool perturbed = std::holds_alternative<PerturbedFlow>(run.flow.variant);
  if (needs_trajectory(a.params) && run.solver.method == SolverMethod::None)
    n.fail("analysis '" + a.type + "' needs a trajectory (solver method is none)");
  if ((std::holds_alternative<ClosedFormMatch>(a.params) || std::holds_alternative<Classify>(a.params) ||
       std::holds_alternative<HrCheck>(a.params)) &&
      !nonlocal_cubic)
    n.fail("analysis '" + a.type + "' needs a nonlocal_cubic flow");
  if (std::holds_alternative<PerturbedBound>(a.params) && !perturbed)
    n.fail("analysis '" + a.type + "' needs a perturbed flow");
  if (const auto* h = std::get_if<HClass>(&a.params); h && !h->alpha && !perturbed)
    n.fail("h_class needs power_law or a perturbed flow");
  if (std::holds_alternative<Lojasiewicz>(a.params) && perturbed)
    n.fail("lojasiewicz needs an unperturbed flow");
  if (std::holds_alternative<EnergyIdentity>(a.params) && run.solver.method != SolverMethod::Integrate)
    n.fail("energy_identity needs the integrate solver");
}

std::vector<AnalysisSpec> parse_analyses(const Node& n, DomainKind domain) {
  n.require_array();
  std::vector<AnalysisSpec> out;
  for (size_t i = 0; i < n.size(); ++i) {
    const Node a = n.item(i);
    a.require_object();
    AnalysisSpec spec;
    spec.type = a.string("type");
    spec.label = a.has("label") ? a.string("label") : spec.type;
    spec.path = a.path();
    spec.params = parse_analysis_params(spec.type, a, domain);
    out.push_back(std::move(spec));
  }
  return out;
}

// Run-level field from the run object, falling back to the top level.
std::optional<Node> pick(const Node& run, const Node& top, const std::string& key) {
  if (run.has(key)) return run.at(key);
  if (top.has(key)) return top.at(key);
  return std::nullopt;
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  const Node root(doc, "");
  root.allow({"schema_version", "id", "description", "domain", "n_modes", "flow", "initial", "integrator",
              "analyses", "runs", "max_seconds", "output", "seed"});
  if (root.has("schema_version") && root.at("schema_version").as_integer() != kSchemaVersion)
    root.at("schema_version").fail("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.id = root.string("id");
  if (cfg.id.empty() || cfg.id.find_first_of("/\\") != std::string::npos)
    root.at("id").fail("must be a non-empty name without path separators");
  cfg.domain = parse_domain(root.at("domain"));
  const auto n_modes = root.at("n_modes").as_integer();
  if (n_modes < 1) root.at("n_modes").fail("must be >= 1");
  cfg.n_modes = static_cast<int>(n_modes);
  const auto seed = root.integer("seed", 1);
  if (seed < 0) root.at("seed").fail("must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (root.has("output")) {
    const Node out = root.at("output");
    out.allow({"dir", "csv"});
    if (out.has("dir")) cfg.out_dir = out.string("dir");
    cfg.write_csv = out.boolean("csv", true);
  }

  const Json empty_run = Json::object();
  std::vector<Node> runs;
  if (root.has("runs")) {
    const Node list = root.at("runs");
    list.require_array();
    if (list.size() == 0) list.fail("needs at least one run");
    for (size_t i = 0; i < list.size(); ++i) runs.push_back(list.item(i));
  } else {
    runs.emplace_back(empty_run, "");
  }

  for (const Node& r : runs) {
    RunConfig run;
    if (!r.path().empty()) {
      r.allow({"id", "flow", "initial", "integrator", "analyses", "max_seconds"});
      run.id = r.string("id");
      if (run.id.empty() || run.id.find_first_of("/\\.") != std::string::npos)
        r.at("id").fail("must be a non-empty name without '.', '/' or '\\'");
      for (const auto& other : cfg.runs)
        if (other.id == run.id) r.at("id").fail("duplicate run id '" + run.id + "'");
    }
    const auto flow = pick(r, root, "flow");
    if (!flow) root.at("flow").fail("missing required field");
    run.flow = parse_flow(*flow);

    // Integrator fields merge key by key, run level first.
    Json solver_doc = Json::object();
    std::string solver_path = "integrator";
    if (root.has("integrator")) {
      root.at("integrator").require_object();
      solver_doc = root.at("integrator").json();
    }
    if (r.has("integrator")) {
      r.at("integrator").require_object();
      for (const auto& [k, v] : r.at("integrator").json().items()) solver_doc[k] = v;
      solver_path = r.child_path("integrator");
    }
    run.solver = parse_solver(Node(solver_doc, solver_path));

    if (const auto init = pick(r, root, "initial"))
      run.initial = parse_initial(*init, cfg.domain.kind);
    else if (run.solver.method != SolverMethod::None)
      root.at("initial").fail("missing required field");
    if (const auto analyses = pick(r, root, "analyses")) {
      run.analyses = parse_analyses(*analyses, cfg.domain.kind);
      for (size_t i = 0; i < run.analyses.size(); ++i) check_compatibility(run.analyses[i], run, analyses->item(i));
    }
    if (const auto budget = pick(r, root, "max_seconds")) {
      run.max_seconds = budget->as_number();
      if (!(*run.max_seconds > 0.0)) budget->fail("must be positive");
    }
    cfg.runs.push_back(std::move(run));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json doc;
  try {
    doc = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace gradflow::experiment
