#include "presets.hpp"

namespace fbstefan::cli {

namespace {

// Presets ending in _like are reconstructions with guessed initial profiles;
// only their qualitative outcome (event type, attractor type) is meaningful.
const char* const kSteadyStep = R"json({
  "name": "steady_step",
  "description": "Exact two-plateau step at the mass-matched front; stays put.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "target_mass": 0.6,
    "phases": [
      {"kind": "low", "profile": {"family": "constant", "value": "plateau"}},
      {"kind": "high", "profile": {"family": "constant", "value": "plateau"}}
    ]
  },
  "numerics": {"cells_per_phase": 50},
  "run": {"t_end": 1.0, "sample_interval": 0.01}
})json";

const char* const kUnstableMass = R"json({
  "name": "thm21_i",
  "description": "Mass inside the unstable interval: smooth decay to the step steady state.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "target_mass": 0.6,
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.05}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.004,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 200},
  "run": {"t_end": 2.0, "sample_interval": 0.01}
})json";

const char* const kPlateauSide = R"json({
  "name": "plateau_side",
  "description": "Reconstruction: data on the plateau side in both phases (gradient sign condition holds).",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "target_mass": 0.5,
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.1}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.03,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 100},
  "run": {"t_end": 0.5, "sample_interval": 0.005, "snapshot_times": [0, 0.0125, 0.1289, 0.456]}
})json";

const char* const kUnstableSide = R"json({
  "name": "unstable_side",
  "description": "Reconstruction: data on the unstable side of both plateaus (gradient sign condition fails).",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "target_mass": 0.5,
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.15}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.04,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 100},
  "run": {"t_end": 0.5, "sample_interval": 0.005, "snapshot_times": [0, 0.0125, 0.1289, 0.456]}
})json";

const char* const kFarFromSteady = R"json({
  "name": "fig4_like",
  "description": "Reconstruction, far from steady: a dense shoulder in the low phase pushes the front into x = 1.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.9],
    "target_mass": 0.3184,
    "phases": [
      {"kind": "low", "profile": {"family": "table",
                                  "points": [[0, 0.43], [0.5, 0.43], [0.75, 0.0], [1, "plateau"]]}},
      {"kind": "high", "profile": {"family": "linear", "left": "plateau", "right": 0.9}}
    ]
  },
  "numerics": {"cells_per_phase": 100},
  "run": {"t_end": 1.5, "sample_interval": 0.001, "snapshot_times": [0, 0.001, 0.0051, 0.012]}
})json";

const char* const kNearSteady = R"json({
  "name": "fig5_like",
  "description": "Reconstruction, near steady: same mass as fig4_like, settles on the step steady state.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.9],
    "target_mass": 0.3184,
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.12}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.01,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 100},
  "run": {"t_end": 2.0, "sample_interval": 0.01, "snapshot_times": [0, 0.0373, 0.6264, 0.7479]}
})json";

const char* const kCoalescence = R"json({
  "name": "coalescence",
  "description": "Symmetric high | low | high pinch; the two high phases merge and the run continues as NP.",
  "model": {"alpha": 0.8},
  "initial": {
    "fronts": [0.45, 0.55],
    "phases": [
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.09}},
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.14,
                                  "frequency": 1.0, "phase": -0.5}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.09,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 40},
  "run": {"t_end": 1.0, "sample_interval": 0.01}
})json";

const char* const kLagrange = R"json({
  "name": "lagrange_one_phase",
  "description": "One-phase problem (high phase held at rho2) with the gradient pointing the wrong way; front tracking against the mass-coordinate solver.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.6],
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.15}},
      {"kind": "high", "profile": {"family": "constant", "value": "plateau"}}
    ]
  },
  "numerics": {"cells_per_phase": 100, "lagrange_cells": 100},
  "run": {"t_end": 0.5, "sample_interval": 0.01, "solver": "paired", "stop_at_steady": false}
})json";

const char* const kEnthalpyC1 = R"json({
  "name": "enthalpy_c1",
  "description": "Data below rho1 in the low phase and above rho2 in the high phase; front tracking against the enthalpy solver.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.1}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.03,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 100, "enthalpy_cells": 200},
  "run": {"t_end": 0.5, "sample_interval": 0.01, "solver": "paired", "stop_at_steady": false}
})json";

const char* const kSigmaMonitor = R"json({
  "name": "sigma_gradient_monitor",
  "description": "Data satisfying the gradient sign condition; sup |sigma_x| should not grow.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.5],
    "target_mass": 0.6,
    "phases": [
      {"kind": "low", "profile": {"family": "cosine", "base": "plateau", "amplitude": -0.1}},
      {"kind": "high", "profile": {"family": "cosine", "base": "plateau", "amplitude": 0.03,
                                   "phase": -0.5}}
    ]
  },
  "numerics": {"cells_per_phase": 100},
  "run": {"t_end": 0.5, "sample_interval": 0.005}
})json";

const char* const kLowMassWall = R"json({
  "name": "low_mass_wall_hit",
  "description": "Mass below rho1: the high phase empties, the front hits x = 1 and the Neumann problem takes over.",
  "model": {"alpha": 0.85},
  "initial": {
    "fronts": [0.8],
    "target_mass": 0.18,
    "phases": [
      {"kind": "low", "profile": {"family": "table", "points": [[0, 0.03], [0.7, 0.03], [1, "plateau"]]}},
      {"kind": "high", "profile": {"family": "constant", "value": "plateau"}}
    ]
  },
  "numerics": {"cells_per_phase": 50},
  "run": {"t_end": 2.0, "sample_interval": 0.01}
})json";

const char* const kMassSweep = R"json({
  "name": "mass_sweep",
  "description": "Sweep: near-steady single-front data at three masses (below rho1, bistable, proved regime).",
  "sweep": {
    "base": "fig5_like",
    "overrides": {"/numerics/cells_per_phase": 60, "/run/snapshot_times": []},
    "cases": [
      {"/initial/target_mass": 0.2, "/initial/phases/0/profile/amplitude": -0.1},
      {"/initial/target_mass": 0.3184},
      {"/initial/target_mass": 0.6}
    ]
  }
})json";

std::vector<Preset> build() {
    std::vector<Preset> out;
    for (const char* text : {kSteadyStep, kUnstableMass, kPlateauSide, kUnstableSide, kFarFromSteady, kNearSteady, kCoalescence,
                             kLagrange, kEnthalpyC1, kSigmaMonitor, kLowMassWall, kMassSweep}) {
        auto doc = nlohmann::json::parse(text);
        out.push_back({doc.at("name").get<std::string>(), doc.at("description").get<std::string>(),
                       std::move(doc)});
    }
    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build();
    return all;
}

const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets()) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

}  // namespace fbstefan::cli
