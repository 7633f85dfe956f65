#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "seled/scenario.hpp"

namespace {

using namespace seled;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open " + out_path + " for writing");
    out << j.dump(2) << '\n';
}

std::string default_out_dir() {
    const char* env = std::getenv("SELED_OUT_DIR");
    return env != nullptr ? env : ".";
}

struct SimSetup {
    std::string config_path;
    std::uint64_t seed = 1;
    std::uint64_t pulses = 1000000;
    int threads = 1;

    EmitterConfig emitter;
    DriveConfig drive;
    DetectorConfig detector;

    void load() {
        json j = config_path.empty() ? json::object() : read_json_file(config_path);
        emitter = emitter_from_json(j.value("emitter", json::object()));
        drive = drive_from_json(j.value("drive", json::object()));
        detector = detector_from_json(j.value("detector", json::object()));
        if (pulses < 1) throw ValidationError("--pulses must be positive");
        if (threads < 1) throw ValidationError("--threads must be positive");
    }

    void add_options(CLI::App* app) {
        app->add_option("-c,--config", config_path,
                        "JSON with emitter/drive/detector blocks (defaults otherwise)");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--pulses", pulses, "pulses per setting");
        app->add_option("--threads", threads, "worker threads");
    }
};

int run(int argc, char** argv) {
    CLI::App app{"strain-tunable entangled-photon-source toolkit"};
    app.require_subcommand(1);

    std::string format = "json";
    app.add_option("--format", format, "output format for curve data")
        ->check(CLI::IsMember({"csv", "json"}));

    // fit ------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit strain-tuning parameters to a tuning CSV");
    std::string fit_input, fit_out;
    fit_cmd->add_option("input", fit_input, "tuning curve CSV")->required();
    fit_cmd->add_option("-o,--out", fit_out, "output JSON path (default: stdout)");

    // simulate -------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo coincidence histograms");
    SimSetup sim;
    sim.add_options(sim_cmd);
    std::string sim_out = "histograms.csv";
    sim_cmd->add_option("-o,--out", sim_out, "output histogram CSV (JSON sidecar alongside)");

    // analyze --------------------------------------------------------------
    auto* ana_cmd = app.add_subcommand("analyze", "gated correlation/Bell analysis of histograms");
    std::string ana_input, ana_out;
    std::vector<double> ana_gates{1.8};
    ana_cmd->add_option("input", ana_input, "histogram CSV (with JSON sidecar)")->required();
    ana_cmd->add_option("--gates", ana_gates, "gate widths in ns, descending");
    ana_cmd->add_option("-o,--out", ana_out, "output JSON path (default: stdout)");

    // tomo -----------------------------------------------------------------
    auto* tomo_cmd = app.add_subcommand("tomo", "maximum-likelihood state tomography");
    std::string tomo_input, tomo_out;
    tomo_cmd->add_option("input", tomo_input, "16-setting records CSV")->required();
    tomo_cmd->add_option("-o,--out", tomo_out, "output JSON path (default: stdout)");

    // yield ----------------------------------------------------------------
    auto* yield_cmd = app.add_subcommand("yield", "population s_min yield statistics");
    std::string yield_config, yield_out;
    std::uint64_t yield_seed = 1;
    std::size_t yield_n = 82;
    std::vector<double> yield_thresholds{1.0, 3.0};
    yield_cmd->add_option("-c,--config", yield_config, "population model JSON");
    yield_cmd->add_option("--seed", yield_seed, "random seed");
    yield_cmd->add_option("-n,--dots", yield_n, "number of sampled dots");
    yield_cmd->add_option("--thresholds", yield_thresholds, "s_min thresholds in ueV");
    yield_cmd->add_option("-o,--out", yield_out, "output path (default: stdout)");

    // scan -----------------------------------------------------------------
    auto* scan_cmd = app.add_subcommand("scan", "fidelity-vs-FSS sweep with Lorentzian fit");
    SimSetup scan;
    scan.add_options(scan_cmd);
    std::vector<double> scan_grid;
    double scan_gate = 0.0;
    std::string scan_out;
    scan_cmd->add_option("--fss", scan_grid, "FSS grid in ueV")->required();
    scan_cmd->add_option("--gate", scan_gate, "gate width in ns (default: full period)");
    scan_cmd->add_option("-o,--out", scan_out, "output path (default: stdout)");

    // scenario run ---------------------------------------------------------
    auto* scen_cmd = app.add_subcommand("scenario", "scenario pipelines");
    auto* scen_run = scen_cmd->add_subcommand("run", "validate and run a scenario file");
    std::string scen_path, scen_dir = default_out_dir();
    int scen_threads = 0;
    scen_run->add_option("file", scen_path, "scenario JSON")->required();
    scen_run->add_option("-d,--out-dir", scen_dir, "output directory (env SELED_OUT_DIR)");
    scen_run->add_option("--threads", scen_threads, "override simulation thread count");
    scen_cmd->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    if (*fit_cmd) {
        auto fit = fit_tuning_params(read_tuning_csv(fit_input));
        emit(tuning_fit_to_json(fit), fit_out);
        return 0;
    }

    if (*sim_cmd) {
        sim.load();
        HistogramBundle bundle;
        bundle.emitter = sim.emitter;
        bundle.drive = sim.drive;
        bundle.detector = sim.detector;
        bundle.seed = sim.seed;
        SimulationOptions opts;
        opts.threads = sim.threads;
        bundle.histograms = simulate(sim.emitter, sim.drive, sim.detector,
                                     correlation_settings(), sim.pulses, sim.seed, opts);
        write_histograms(sim_out, bundle);
        std::cerr << "wrote " << sim_out << '\n';
        return 0;
    }

    if (*ana_cmd) {
        auto bundle = read_histograms(ana_input);
        std::vector<GateWindow> gates;
        for (double w : ana_gates) gates.push_back(GateWindow{w});
        auto rows = gate_scan(bundle.histograms, gates, bundle.drive.period_ns());
        emit(gate_scan_to_json(rows), ana_out);
        return 0;
    }

    if (*tomo_cmd) {
        auto records = read_records_csv(tomo_input);
        auto mle = mle_reconstruct(records);
        json out;
        out["rho"] = density_matrix_to_json(mle.rho);
        out["metrics"] = metrics_to_json(entanglement_metrics(mle.rho));
        out["log_likelihood"] = mle.log_likelihood;
        out["converged"] = mle.converged;
        emit(out, tomo_out);
        return 0;
    }

    if (*yield_cmd) {
        PopulationModel model =
            yield_config.empty() ? PopulationModel{}
                                 : population_from_json(read_json_file(yield_config));
        model.validate();
        auto samples = sample_population(model, yield_n, yield_seed);
        if (format == "csv") {
            if (yield_out.empty()) throw ValidationError("--format csv requires --out");
            write_smin_histogram_csv(yield_out, smin_distribution(samples));
        } else {
            json report = yield_report_to_json(samples, yield_thresholds);
            report["population"] = population_to_json(model);
            emit(report, yield_out);
        }
        return 0;
    }

    if (*scan_cmd) {
        scan.load();
        GateWindow gate{scan_gate > 0.0 ? scan_gate : scan.drive.period_ns()};
        gate.validate(scan.drive.period_ns());
        SimulationOptions opts;
        opts.threads = scan.threads;
        auto result = fidelity_vs_fss_scan(scan.emitter, scan.drive, scan.detector, scan_grid,
                                           scan.pulses, scan.seed, gate, opts);
        if (format == "csv") {
            if (scan_out.empty()) throw ValidationError("--format csv requires --out");
            write_fss_curve_csv(scan_out, result);
        } else {
            emit(fss_scan_to_json(result), scan_out);
        }
        return 0;
    }

    if (*scen_run) {
        Scenario sc = load_scenario(scen_path);
        auto files = run_scenario(sc, std::filesystem::path(scen_dir) / sc.name, scen_threads);
        for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const seled::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const seled::ConvergenceError& e) {
        std::cerr << "convergence diagnostic: " << e.what() << '\n';
        return 3;
    } catch (const seled::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
