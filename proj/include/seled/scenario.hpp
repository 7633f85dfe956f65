#pragma once

#include <optional>
#include <variant>

#include "seled/io.hpp"

namespace seled {

// A scenario is a named, seeded pipeline of stages. Parsing validates every
// stage config up front: a scenario that loads cannot fail later on a config
// error, only on numerical/convergence diagnostics. Each stage draws its
// seed from the scenario seed through a substream named after its label, so
// adding a stage never perturbs the streams of earlier ones.

struct SyntheticTuning {
    TuningParams truth;
    StressMap map;
    std::vector<double> fields;  // kV/cm
    double s_err = 0.1;          // ueV
    double theta_err = 1.0;      // deg
};

// Fit strain-tuning parameters from a measured CSV or a synthetic noisy
// curve generated from known truth. Emits the curve and the fit JSON.
struct TuningFitStage {
    std::optional<std::filesystem::path> input_csv;
    std::optional<SyntheticTuning> synthetic;
};

// Simulate the cascade at the six correlation settings and report
// fidelity/Bell parameters per gate. Emits histograms and the gate report.
struct GateScanStage {
    EmitterConfig emitter;
    DriveConfig drive;
    DetectorConfig detector;
    std::uint64_t n_pulses = 1000000;
    std::vector<GateWindow> gates;
    SimulationOptions opts;
};

// Fidelity-vs-FSS sweep with a Lorentzian fit. Emits the curve and fit.
struct FssScanStage {
    EmitterConfig emitter;
    DriveConfig drive;
    DetectorConfig detector;
    std::vector<double> fss_grid;  // ueV
    std::uint64_t n_pulses = 1000000;
    GateWindow gate;
    SimulationOptions opts;
};

// Reconstruct a density matrix from measured records or synthetic counts
// sampled from a mixed Bell state. Emits records, rho and metrics JSON.
struct TomographyStage {
    std::optional<std::filesystem::path> input_csv;
    double phase = 0.0;            // rad, synthetic source state
    double white_noise = 0.0;      // admixture of I/4
    double mean_counts = 100000.0; // per setting
};

// Sample a dot population and report s_min yield fractions. Emits the s_min
// histogram and the yield report JSON.
struct YieldStage {
    PopulationModel model;
    std::size_t n_dots = 82;
    std::vector<double> thresholds = {1.0, 3.0};
};

struct Stage {
    std::string label;
    std::variant<TuningFitStage, GateScanStage, FssScanStage, TomographyStage, YieldStage> body;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<Stage> stages;
    std::string config_hash;  // of the source file, for the manifest
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const json& j, std::string config_hash);

// Runs every stage, writes all artifacts plus manifest.json under
// out_dir. `threads` overrides the per-stage simulation thread count when
// positive. Returns the written file names.
std::vector<std::filesystem::path> run_scenario(const Scenario& scenario,
                                                const std::filesystem::path& out_dir,
                                                int threads = 0);

}  // namespace seled
