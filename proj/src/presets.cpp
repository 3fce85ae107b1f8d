#include <map>

#include "gradflow/error.hpp"
#include "gradflow/experiment.hpp"

namespace gradflow::experiment {

namespace {

// 1.7320508075688772 is sqrt(3), the equilibrium radius for l = 2, j = 1.
const std::map<std::string, const char*>& preset_table() {
  static const std::map<std::string, const char*> table{
      {"oracle-match", R"({
  "id": "oracle-match",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "initial": {"modes": [[1, 0.1], [2, 0.05]]},
  "integrator": {"method": "integrate", "dt": 1e-3, "t_end": 10},
  "analyses": [{"type": "closed_form_match", "tol": 1e-6}],
  "max_seconds": 5
})"},
      {"prop41-i", R"({
  "id": "prop41-i",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 1},
  "initial": {"modes": [[2, 0.1]]},
  "integrator": {"method": "integrate", "dt": 1e-3, "t_end": 10, "record_stride": 10},
  "analyses": [
    {"type": "classify", "expect": "decay_exponential"},
    {"type": "rate_fit", "series": "norm", "model": "exponential", "rate": 3, "rel_tol": 0.05},
    {"type": "omega_limit", "candidate": [], "tol": 1e-3}
  ]
})"},
      {"prop41-ii", R"({
  "id": "prop41-ii",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 1},
  "initial": {"modes": [[1, 0.3]]},
  "integrator": {"method": "closed_form", "t_start": 1e-2, "t_end": 1e4, "samples": 601, "spacing": "log"},
  "analyses": [
    {"type": "classify", "expect": "decay_algebraic"},
    {"type": "scaled_value", "mode": 1, "t": 1e4, "scale": "sqrt_2t", "range": [0.99, 1.01]},
    {"type": "rate_fit", "series": "mode", "mode": 1, "t_window": [1e2, 1e4],
     "model": "algebraic", "rate": 0.5, "abs_tol": 0.005}
  ]
})"},
      {"prop41-iii", R"({
  "id": "prop41-iii",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "integrator": {"method": "integrate", "dt": 5e-4, "t_end": 10, "record_stride": 20},
  "runs": [
    {"id": "single",
     "initial": {"modes": [[1, 0.1]]},
     "analyses": [
       {"type": "classify", "expect": "converge_nonzero"},
       {"type": "rate_fit", "series": "deviation", "mode": 1, "target": 1.7320508075688772,
        "value_window": [1e-12, 1e-2], "model": "exponential", "rate": 6, "rel_tol": 0.05},
       {"type": "limit_norm", "expected": 1.7320508075688772, "tol": 1e-8},
       {"type": "omega_limit", "label": "omega_limit_psi", "candidate": [[1, 1.7320508075688772]], "tol": 1e-3},
       {"type": "omega_limit", "label": "omega_limit_minus_psi", "candidate": [[1, -1.7320508075688772]],
        "tol": 1e-3, "expect": false}
     ]},
    {"id": "resonant",
     "initial": {"modes": [[1, 0.1], [2, 0.05]]},
     "analyses": [
       {"type": "classify", "expect": "converge_nonzero"},
       {"type": "rate_fit", "series": "mode", "mode": 2, "value_window": [1e-12, 1e-2],
        "model": "exponential", "rate": 3, "rel_tol": 0.05},
       {"type": "limit_norm", "expected": 1.7320508075688772, "tol": 1e-8}
     ]},
    {"id": "lojasiewicz",
     "initial": {"modes": [[1, 0.1]]},
     "analyses": [{"type": "lojasiewicz", "theta": 0.5, "tol": 0.05}]}
  ]
})"},
      {"hr-square", R"({
  "id": "hr-square",
  "domain": "square",
  "n_modes": 64,
  "flow": {"type": "nonlocal_cubic", "l": {"eigenvalue": 10}},
  "integrator": {"method": "none"},
  "analyses": [
    {"type": "hr_check", "j": {"eigenvalue": 5}, "samples": 8, "kernel_dim": 1, "gap": 3, "gap_tol": 1e-6}
  ],
  "max_seconds": 10
})"},
      {"hr-interval", R"({
  "id": "hr-interval",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "integrator": {"method": "none"},
  "analyses": [
    {"type": "hr_check", "j": 1, "samples": 2, "kernel_dim": 0, "gap": 3, "gap_tol": 1e-6}
  ]
})"},
      {"zelenyak", R"({
  "id": "zelenyak",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "runs": [
    {"id": "synthetic",
     "integrator": {"method": "none"},
     "analyses": [{"type": "zelenyak", "source": "synthetic", "c8": 0.25, "beta": 1, "t_end": 20, "samples": 1001}]},
    {"id": "case-iii",
     "initial": {"modes": [[1, 0.1]]},
     "integrator": {"method": "integrate", "dt": 5e-4, "t_end": 10, "record_stride": 20},
     "analyses": [{"type": "zelenyak", "source": "trajectory"}]}
  ]
})"},
      {"slow-decay", R"({
  "id": "slow-decay",
  "domain": "interval",
  "n_modes": 1,
  "flow": {"type": "local", "nonlinearity": "flat_exponential"},
  "integrator": {"method": "none"},
  "analyses": [
    {"type": "slow_flow", "kind": "flat_exp", "rho1": 1, "rho2": 1, "a0": 0.5, "t_end": 1e6,
     "bound_window": [1e3, 1e6], "theta_max": 0.1},
    {"type": "slow_flow", "kind": "nonlocal_log", "a0": 0.5, "t_end": 1e6,
     "value_t": 1e6, "value_range": [0.9, 1.1]}
  ],
  "max_seconds": 2
})"},
      {"lojasiewicz-flat", R"({
  "id": "lojasiewicz-flat",
  "domain": "interval",
  "n_modes": 1,
  "flow": {"type": "local", "nonlinearity": "flat_exponential"},
  "integrator": {"method": "none"},
  "analyses": [
    {"type": "slow_flow", "kind": "flat_exp", "rho1": 1, "rho2": 1, "a0": 0.5, "t_end": 1e6, "theta_max": 0.1}
  ]
})"},
      {"perturbed-alpha3", R"({
  "id": "perturbed-alpha3",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "perturbed", "base": {"type": "nonlocal_cubic", "l": 2},
           "h": {"power_law": 3}, "w": "linear_forcing"},
  "initial": {"modes": [[1, 0.1], [2, 0.05]]},
  "runs": [
    {"id": "convergence",
     "integrator": {"method": "integrate", "dt": 1e-2, "t_end": 200, "record_stride": 10},
     "analyses": [
       {"type": "omega_limit", "candidate": [[1, 1.7320508075688772]], "tol": 1e-3},
       {"type": "perturbed_bound", "t_min": 10},
       {"type": "h_class", "t_probe": 1e6, "integral": 2, "integral_tol": 1e-4}
     ]},
    {"id": "energy",
     "integrator": {"method": "integrate", "dt": 1e-3, "t_end": 20, "record_stride": 10},
     "analyses": [{"type": "energy_identity", "tol": 1e-5}]}
  ]
})"},
      {"energy-identity", R"({
  "id": "energy-identity",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "nonlocal_cubic", "l": 2},
  "initial": {"modes": [[1, 0.1], [2, 0.05]]},
  "integrator": {"method": "integrate", "dt": 1e-3, "t_end": 10, "record_stride": 10},
  "analyses": [{"type": "energy_identity", "tol": 1e-6, "min_reduction": 4}]
})"},
      {"blow-up", R"({
  "id": "blow-up",
  "domain": "interval",
  "n_modes": 16,
  "flow": {"type": "local", "nonlinearity": "pure_cubic"},
  "initial": {"modes": [[1, 10]]},
  "integrator": {"method": "integrate", "dt": 1e-3, "t_end": 10, "blowup_threshold": 1e6},
  "analyses": [{"type": "blow_up", "expect": true}]
})"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

ExperimentConfig preset(const std::string& name) {
  const auto it = preset_table().find(name);
  if (it == preset_table().end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::UnknownPreset, "'" + name + "' (known: " + known + ")");
  }
  return parse_config(Json::parse(it->second));
}

}  // namespace gradflow::experiment
