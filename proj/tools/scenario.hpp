#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbstefan/enthalpy.hpp"
#include "fbstefan/events.hpp"
#include "fbstefan/model.hpp"

namespace fbstefan::cli {

using nlohmann::json;

enum class Solver { FrontTrack, Enthalpy, Lagrange, Paired };
std::string to_string(Solver s);
Solver solver_from_string(const std::string& name, const std::string& field = "run.solver");

// A density level: either a number or the plateau of the phase it sits in.
struct Level {
    bool plateau = false;
    double value = 0.0;
    double resolve(const AdhesionModel& m, Branch kind) const {
        return plateau ? m.plateau(kind) : value;
    }
};

struct ProfileSpec {
    enum class Family { Constant, Linear, Cosine, Table } family = Family::Constant;
    Level value{true, 0.0};  // constant
    Level left, right;       // linear
    Level base{true, 0.0};   // cosine: base + amplitude cos(pi (frequency x + phase))
    double amplitude = 0.0;
    double frequency = 0.5;
    double phase = 0.0;
    std::vector<std::pair<double, Level>> table;  // (x_hat, level), x_hat ascending

    double operator()(double x_hat, const AdhesionModel& m, Branch kind) const;
};

struct PhaseSpec {
    Branch kind = Branch::Low;
    ProfileSpec profile;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::string description;

    double alpha = 0.85;
    std::optional<double> rho1, rho2;

    std::vector<double> fronts;
    std::optional<double> target_mass;
    std::vector<PhaseSpec> phases;

    int cells_per_phase = 100;
    StepControl control;
    int enthalpy_cells = 0;  // 0: cells_per_phase * number of phases
    int lagrange_cells = 0;  // 0: cells_per_phase

    EventThresholds thresholds;

    double t_end = 1.0;
    double sample_interval = 1e-2;
    std::vector<double> snapshot_times;
    Solver solver = Solver::FrontTrack;
    bool stop_at_steady = true;
    bool require_compatibility = false;
    double compatibility_tol = 1e-6;

    std::string output_dir = "out";
    bool write_snapshots = true;

    json source;  // the document this was read from
};

/// Reads and validates. Throws ConfigError naming the offending field, or the
/// line and column for malformed text.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const json& doc);
json parse_text(const std::string& text, const std::string& origin);

AdhesionModel make_model(const ScenarioConfig& config);

/// Initial front-tracking state, with the single front moved to match
/// target_mass when that is set. Throws ConfigError on band or order trouble.
SimState build_state(const ScenarioConfig& config);

struct ScenarioResult {
    ScenarioConfig config;
    SimState initial;
    std::optional<Trajectory> trajectory;
    std::optional<EnthalpyRun> enthalpy;
    std::optional<LagrangeRun> lagrange;
    json report;
    bool blowup = false;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

/// "uniform", "discontinuous" or "running".
std::string final_outcome(const Trajectory& trajectory);

/// fronts.csv, diagnostics.csv, snapshots/, events.jsonl, report.json (and
/// the cross-solver series in paired mode). Returns the files written.
std::vector<std::filesystem::path> emit_outputs(const ScenarioResult& result,
                                                const std::filesystem::path& dir);

struct SweepRow {
    std::size_t index = 0;
    json overrides;
    std::string regime;
    std::string outcome;
    std::size_t events = 0;
    std::size_t coalescences = 0;
    std::size_t boundary_hits = 0;
    std::optional<double> annihilation_time;
    std::string error;
};

/// Expands {"sweep": {"base", "cases", "grid"}} into rows and runs them,
/// at most `threads` at a time (0: hardware concurrency).
std::vector<SweepRow> run_sweep(const json& sweep_doc, unsigned threads = 0);
void write_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& dir);

std::string format_number(double v);

}  // namespace fbstefan::cli
