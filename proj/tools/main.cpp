#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fbstefan/errors.hpp"
#include "presets.hpp"
#include "scenario.hpp"

using namespace fbstefan;
using namespace fbstefan::cli;

namespace {

// Exit codes
constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kConfigError = 2;

json load_document(const std::string& path, const std::string& preset) {
    if (!preset.empty()) {
        const Preset* p = find_preset(preset);
        if (!p) throw ConfigError("--preset", "no preset named '" + preset + "' (try: presets list)");
        return p->doc;
    }
    if (path.empty()) throw ConfigError("config", "give a config file or --preset NAME");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

void print_summary(const ScenarioResult& r, const std::filesystem::path& dir) {
    const auto& rep = r.report;
    std::cout << "scenario " << r.config.name << " (" << to_string(r.config.solver) << ")\n";
    if (rep.contains("regime") && !rep["regime"].is_null()) {
        std::cout << "  regime      " << rep["regime"]["tag"].get<std::string>() << "\n";
    }
    if (rep.contains("run")) {
        std::cout << "  termination " << rep["run"]["termination"].get<std::string>() << " at t = "
                  << rep["run"]["t_final"].get<double>() << "\n";
        std::cout << "  events      " << rep["events"]["coalescence"] << " coalescence, "
                  << rep["events"]["boundary_hit_left"].get<int>() + rep["events"]["boundary_hit_right"].get<int>()
                  << " boundary hit\n";
        std::cout << "  outcome     " << rep["final"]["outcome"].get<std::string>() << "\n";
    }
    for (const char* k : {"enthalpy", "lagrange"}) {
        const auto& c = rep["cross_validation"];
        if (c.contains(k) && c[k].contains("discrepancy_in_cells")) {
            std::cout << "  " << k << " max discrepancy " << c[k]["max_front_discrepancy"].get<double>() << " ("
                      << c[k]["discrepancy_in_cells"].get<double>() << " cells)\n";
        }
    }
    std::cout << "  output      " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward-backward diffusion with sharp interfaces: front tracking, enthalpy and "
                 "mass-coordinate solvers"};
    app.require_subcommand(1);
    bool seedless = false;
    app.add_flag("--seedless", seedless, "reserved; the solvers have no random elements");

    std::string config_path, preset_name, out_dir, solver_name;
    auto* run = app.add_subcommand("run", "run one scenario and write its outputs");
    run->add_option("config", config_path, "scenario JSON file");
    run->add_option("--preset", preset_name, "use a built-in preset instead of a file");
    run->add_option("--out", out_dir, "output directory (overrides output.directory)");
    run->add_option("--solver", solver_name, "fronttrack, enthalpy, lagrange or paired");
    run->add_flag("--seedless", seedless, "reserved; rejected");

    std::string sweep_path, sweep_preset, sweep_out;
    unsigned threads = 0;
    auto* sweep = app.add_subcommand("sweep", "run a batch of scenario variants");
    sweep->add_option("config", sweep_path, "sweep JSON file");
    sweep->add_option("--preset", sweep_preset, "built-in sweep preset");
    sweep->add_option("--out", sweep_out, "output directory")->default_val("sweep_out");
    sweep->add_option("--threads", threads, "concurrent runs (0: all cores)");
    sweep->add_flag("--seedless", seedless, "reserved; rejected");

    auto* presets_cmd = app.add_subcommand("presets", "list or print the built-in presets");
    presets_cmd->require_subcommand(1);
    presets_cmd->add_subcommand("list", "names and descriptions");
    std::string show_name;
    auto* show = presets_cmd->add_subcommand("show", "print a preset as JSON");
    show->add_option("name", show_name)->required();

    std::string validate_path, validate_preset;
    auto* validate = app.add_subcommand("validate", "check a scenario file without running it");
    validate->add_option("config", validate_path, "scenario JSON file");
    validate->add_option("--preset", validate_preset, "built-in preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (seedless) throw ConfigError("--seedless", "no stochastic elements exist; the flag is reserved");

        if (run->parsed()) {
            json doc = load_document(config_path, preset_name);
            if (!solver_name.empty()) doc["run"]["solver"] = solver_name;
            if (!out_dir.empty()) doc["output"]["directory"] = out_dir;
            const auto cfg = parse_config(doc);
            const auto result = run_scenario(cfg);
            emit_outputs(result, cfg.output_dir);
            print_summary(result, cfg.output_dir);
            if (result.blowup) {
                std::cerr << "run ended in blowup; see events.jsonl\n";
                return kRunFailure;
            }
            return kOk;
        }
        if (sweep->parsed()) {
            const json doc = load_document(sweep_path, sweep_preset);
            const auto rows = run_sweep(doc, threads);
            write_sweep(rows, sweep_out);
            int failed = 0;
            for (const auto& r : rows) {
                std::cout << r.index << "  " << (r.error.empty() ? r.regime + "  " + r.outcome : "error: " + r.error)
                          << "\n";
                failed += r.error.empty() ? 0 : 1;
            }
            std::cout << rows.size() << " rows written to " << sweep_out << "\n";
            return failed ? kRunFailure : kOk;
        }
        if (presets_cmd->parsed()) {
            if (show->parsed()) {
                const Preset* p = find_preset(show_name);
                if (!p) throw ConfigError("name", "no preset named '" + show_name + "'");
                std::cout << p->doc.dump(2) << "\n";
            } else {
                for (const auto& p : presets()) std::printf("%-24s %s\n", p.name.c_str(), p.description.c_str());
            }
            return kOk;
        }
        if (validate->parsed()) {
            const auto cfg = parse_config(load_document(validate_path, validate_preset));
            const auto st = build_state(cfg);
            std::cout << "ok: " << cfg.name << ", " << st.n_fronts() << " front(s), mass " << st.mass0 << "\n";
            return kOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRunFailure;
    }
    return kOk;
}
