#include "seled/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "seled/constants.hpp"
#include "seled/rng.hpp"

namespace seled {

namespace {

double req(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    return j.at(key).get<double>();
}

std::vector<double> req_array(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).empty()) {
        throw ValidationError(std::string("field '") + key + "' must be a non-empty array");
    }
    return j.at(key).get<std::vector<double>>();
}

TuningFitStage parse_tuning_fit(const json& j) {
    TuningFitStage st;
    if (j.contains("input_csv")) {
        st.input_csv = j.at("input_csv").get<std::string>();
        return st;
    }
    if (!j.contains("synthetic")) {
        throw ValidationError("tuning_fit stage needs 'input_csv' or 'synthetic'");
    }
    const json& s = j.at("synthetic");
    SyntheticTuning syn;
    syn.truth = tuning_from_s0_theta0(req(s, "s0_ueV"), req(s, "theta0_deg"),
                                      req(s, "alpha_ueV_per_unit"));
    syn.fields = req_array(s, "fields_kv_cm");
    if (syn.fields.size() < 3) {
        throw ValidationError("synthetic tuning curve needs at least 3 field points");
    }
    if (s.contains("s_err_ueV")) syn.s_err = s.at("s_err_ueV").get<double>();
    if (s.contains("theta_err_deg")) syn.theta_err = s.at("theta_err_deg").get<double>();
    if (syn.s_err <= 0.0 || syn.theta_err <= 0.0) {
        throw ValidationError("synthetic tuning noise sigmas must be positive");
    }
    syn.truth.validate();
    st.synthetic = syn;
    return st;
}

SimulationOptions parse_opts(const json& j) {
    SimulationOptions opts;
    if (j.contains("bin_width_ns")) opts.bin_width = j.at("bin_width_ns").get<double>();
    if (j.contains("n_shards")) opts.n_shards = j.at("n_shards").get<int>();
    if (j.contains("threads")) opts.threads = j.at("threads").get<int>();
    if (opts.bin_width <= 0.0 || opts.n_shards < 1 || opts.threads < 1) {
        throw ValidationError("invalid simulation options");
    }
    return opts;
}

GateScanStage parse_gate_scan(const json& j) {
    GateScanStage st;
    st.emitter = emitter_from_json(j.value("emitter", json::object()));
    st.drive = drive_from_json(j.value("drive", json::object()));
    st.detector = detector_from_json(j.value("detector", json::object()));
    st.n_pulses = j.value("n_pulses", st.n_pulses);
    if (st.n_pulses < 1) throw ValidationError("n_pulses must be positive");
    for (double w : req_array(j, "gates_ns")) {
        GateWindow g{w};
        g.validate(st.drive.period_ns());
        st.gates.push_back(g);
    }
    st.opts = parse_opts(j);
    return st;
}

FssScanStage parse_fss_scan(const json& j) {
    FssScanStage st;
    st.emitter = emitter_from_json(j.value("emitter", json::object()));
    st.drive = drive_from_json(j.value("drive", json::object()));
    st.detector = detector_from_json(j.value("detector", json::object()));
    st.n_pulses = j.value("n_pulses", st.n_pulses);
    if (st.n_pulses < 1) throw ValidationError("n_pulses must be positive");
    st.fss_grid = req_array(j, "fss_grid_ueV");
    if (st.fss_grid.size() < 3) throw ValidationError("fss_grid_ueV needs at least 3 points");
    for (double s : st.fss_grid) {
        if (s < 0.0) throw ValidationError("fss grid values must be non-negative");
    }
    st.gate.width = j.value("gate_ns", st.drive.period_ns());
    st.gate.validate(st.drive.period_ns());
    st.opts = parse_opts(j);
    return st;
}

TomographyStage parse_tomography(const json& j) {
    TomographyStage st;
    if (j.contains("input_csv")) {
        st.input_csv = j.at("input_csv").get<std::string>();
        return st;
    }
    st.phase = j.value("phase_over_pi", 0.0) * pi();
    st.white_noise = j.value("white_noise", 0.0);
    st.mean_counts = j.value("mean_counts", st.mean_counts);
    if (st.white_noise < 0.0 || st.white_noise > 1.0) {
        throw ValidationError("white_noise must lie in [0, 1]");
    }
    if (st.mean_counts < 1.0) throw ValidationError("mean_counts must be at least 1");
    return st;
}

YieldStage parse_yield(const json& j) {
    YieldStage st;
    st.model = population_from_json(j.value("population", json::object()));
    st.n_dots = j.value("n_dots", st.n_dots);
    if (st.n_dots < 1) throw ValidationError("n_dots must be positive");
    if (j.contains("thresholds_ueV")) st.thresholds = req_array(j, "thresholds_ueV");
    for (double t : st.thresholds) {
        if (t <= 0.0) throw ValidationError("thresholds must be positive");
    }
    return st;
}

std::uint64_t stage_seed(const Scenario& sc, const Stage& stage) {
    return Rng(sc.seed).substream(stage.label).next_u64();
}

}  // namespace

Scenario scenario_from_json(const json& j, std::string config_hash) {
    Scenario sc;
    sc.config_hash = std::move(config_hash);
    try {
        if (!j.contains("name")) throw ValidationError("scenario: missing 'name'");
        sc.name = j.at("name").get<std::string>();
        if (sc.name.empty()) throw ValidationError("scenario: 'name' must be non-empty");
        if (!j.contains("seed")) throw ValidationError("scenario: missing 'seed'");
        sc.seed = j.at("seed").get<std::uint64_t>();
        if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty()) {
            throw ValidationError("scenario: 'stages' must be a non-empty array");
        }

        std::set<std::string> labels;
        for (const auto& js : j.at("stages")) {
            Stage stage;
            std::string type = js.value("type", "");
            stage.label = js.value("label", type + "_" + std::to_string(sc.stages.size()));
            if (stage.label.empty() || !labels.insert(stage.label).second) {
                throw ValidationError("stage labels must be non-empty and unique");
            }
            try {
                if (type == "tuning_fit") {
                    stage.body = parse_tuning_fit(js);
                } else if (type == "gate_scan") {
                    stage.body = parse_gate_scan(js);
                } else if (type == "fss_scan") {
                    stage.body = parse_fss_scan(js);
                } else if (type == "tomography") {
                    stage.body = parse_tomography(js);
                } else if (type == "yield") {
                    stage.body = parse_yield(js);
                } else {
                    throw ValidationError("unknown stage type '" + type + "'");
                }
            } catch (const ValidationError& e) {
                throw ValidationError("stage '" + stage.label + "': " + e.what());
            }
            sc.stages.push_back(std::move(stage));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file " + path.string());
    std::ostringstream raw;
    raw << in.rdbuf();
    json j;
    try {
        j = json::parse(raw.str());
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return scenario_from_json(j, fnv1a_hex(raw.str()));
}

namespace {

struct StageRunner {
    const Scenario& sc;
    const Stage& stage;
    const std::filesystem::path& dir;
    int threads;
    std::vector<std::filesystem::path>& files;

    std::filesystem::path out(const std::string& suffix) const {
        auto p = dir / (stage.label + "_" + suffix);
        files.push_back(p);
        return p;
    }

    void operator()(const TuningFitStage& st) const {
        std::vector<TuningSample> samples;
        if (st.input_csv) {
            samples = read_tuning_csv(*st.input_csv);
        } else {
            const auto& syn = *st.synthetic;
            Rng rng(stage_seed(sc, stage));
            for (double fp : syn.fields) {
                auto [s, theta] = fss_and_angle(syn.truth, field_to_stress(syn.map, fp));
                TuningSample sample;
                sample.fp = fp;
                sample.s = std::abs(s + rng.gaussian(0.0, syn.s_err));
                sample.s_err = syn.s_err;
                sample.theta = theta + rng.gaussian(0.0, syn.theta_err);
                sample.theta_err = syn.theta_err;
                samples.push_back(sample);
            }
        }
        write_tuning_csv(out("tuning_curve.csv"), samples);
        TuningFit fit = fit_tuning_params(samples);
        std::ofstream(out("fit.json")) << tuning_fit_to_json(fit).dump(2) << '\n';
    }

    void operator()(const GateScanStage& st) const {
        SimulationOptions opts = st.opts;
        if (threads > 0) opts.threads = threads;
        HistogramBundle bundle;
        bundle.emitter = st.emitter;
        bundle.drive = st.drive;
        bundle.detector = st.detector;
        bundle.seed = stage_seed(sc, stage);
        bundle.histograms = simulate(st.emitter, st.drive, st.detector, correlation_settings(),
                                     st.n_pulses, bundle.seed, opts);
        write_histograms(out("histograms.csv"), bundle);
        files.push_back(dir / (stage.label + "_histograms.json"));  // sidecar
        auto rows = gate_scan(bundle.histograms, st.gates, st.drive.period_ns());
        std::ofstream(out("gate_report.json")) << gate_scan_to_json(rows).dump(2) << '\n';
    }

    void operator()(const FssScanStage& st) const {
        SimulationOptions opts = st.opts;
        if (threads > 0) opts.threads = threads;
        FssScanResult scan;
        try {
            scan = fidelity_vs_fss_scan(st.emitter, st.drive, st.detector, st.fss_grid,
                                        st.n_pulses, stage_seed(sc, stage), st.gate, opts);
        } catch (const ConvergenceError&) {
            throw;
        }
        write_fss_curve_csv(out("fss_curve.csv"), scan);
        std::ofstream(out("fss_fit.json")) << fss_scan_to_json(scan).dump(2) << '\n';
    }

    void operator()(const TomographyStage& st) const {
        std::vector<TomographyRecord> records;
        if (st.input_csv) {
            records = read_records_csv(*st.input_csv);
        } else {
            auto rho = DensityMatrix4::werner(1.0 - st.white_noise, st.phase);
            records = sample_counts(rho, st.mean_counts, stage_seed(sc, stage));
        }
        write_records_csv(out("records.csv"), records);
        MleResult mle = mle_reconstruct(records);
        std::ofstream(out("rho.json")) << density_matrix_to_json(mle.rho).dump(2) << '\n';
        auto metrics = entanglement_metrics(mle.rho);
        json mj = metrics_to_json(metrics);
        mj["log_likelihood"] = mle.log_likelihood;
        mj["mle_iterations"] = mle.iterations;
        mj["mle_converged"] = mle.converged;
        std::ofstream(out("metrics.json")) << mj.dump(2) << '\n';
    }

    void operator()(const YieldStage& st) const {
        auto samples = sample_population(st.model, st.n_dots, stage_seed(sc, stage));
        write_smin_histogram_csv(out("smin_histogram.csv"), smin_distribution(samples));
        json report = yield_report_to_json(samples, st.thresholds);
        report["population"] = population_to_json(st.model);
        std::ofstream(out("yield.json")) << report.dump(2) << '\n';
    }
};

}  // namespace

std::vector<std::filesystem::path> run_scenario(const Scenario& scenario,
                                                const std::filesystem::path& out_dir,
                                                int threads) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& stage : scenario.stages) {
        std::visit(StageRunner{scenario, stage, out_dir, threads, files}, stage.body);
    }

    RunManifest manifest(scenario.name, scenario.seed, scenario.config_hash);
    for (const auto& f : files) manifest.add(f);
    manifest.write(out_dir);
    files.push_back(out_dir / "manifest.json");
    return files;
}

}  // namespace seled
