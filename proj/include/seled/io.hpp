#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "seled/cascade.hpp"
#include "seled/correlation.hpp"
#include "seled/strain.hpp"
#include "seled/tomography.hpp"
#include "seled/yield.hpp"

namespace seled {

using json = nlohmann::json;

// --- CSV schemas -----------------------------------------------------------
// tuning curve:     fp_kv_cm,s_ueV,s_err,theta_deg,theta_err
// histograms:       setting_xx,setting_x,bin_center_ns,counts
// tomography:       setting_xx,setting_x,counts,weight
// fss scan curve:   fss_ueV,fidelity,fidelity_err
// smin histogram:   bin_lo_ueV,bin_hi_ueV,count
// Malformed rows are reported with their 1-based line number.

std::vector<TuningSample> read_tuning_csv(const std::filesystem::path& path);
void write_tuning_csv(const std::filesystem::path& path, const std::vector<TuningSample>& samples);

// Histograms travel as one CSV for all settings plus a JSON sidecar holding
// the bin layout, the configs and the seed (full reproducibility).
struct HistogramBundle {
    std::vector<CoincidenceHistogram> histograms;
    EmitterConfig emitter;
    DriveConfig drive;
    DetectorConfig detector;
    std::uint64_t seed = 0;
};

void write_histograms(const std::filesystem::path& csv_path, const HistogramBundle& bundle);
HistogramBundle read_histograms(const std::filesystem::path& csv_path);

std::vector<TomographyRecord> read_records_csv(const std::filesystem::path& path);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TomographyRecord>& records);

void write_fss_curve_csv(const std::filesystem::path& path, const FssScanResult& scan);
void write_smin_histogram_csv(const std::filesystem::path& path, const SminHistogram& hist);

// --- JSON ------------------------------------------------------------------

// Density matrices: {"matrix": [[re, im] x 16]} row-major (HH, HV, VH, VV).
json density_matrix_to_json(const DensityMatrix4& rho);
DensityMatrix4 density_matrix_from_json(const json& j);

json tuning_fit_to_json(const TuningFit& fit);
json metrics_to_json(const EntanglementMetrics& m);
json gate_scan_to_json(const std::vector<GateScanRow>& rows);
json fss_scan_to_json(const FssScanResult& scan);
json yield_report_to_json(const std::vector<DotSample>& samples,
                          const std::vector<double>& thresholds);

json emitter_to_json(const EmitterConfig& c);
EmitterConfig emitter_from_json(const json& j);
json drive_to_json(const DriveConfig& c);
DriveConfig drive_from_json(const json& j);
json detector_to_json(const DetectorConfig& c);
DetectorConfig detector_from_json(const json& j);
json population_to_json(const PopulationModel& m);
PopulationModel population_from_json(const json& j);

// --- manifest --------------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes);
std::string hash_file(const std::filesystem::path& path);

// Tracks every artifact a run produces and writes manifest.json alongside
// them; re-running a manifest reproduces every hash.
class RunManifest {
public:
    RunManifest(std::string name, std::uint64_t seed, std::string config_hash);

    void add(const std::filesystem::path& path);
    void write(const std::filesystem::path& dir) const;

private:
    std::string name_;
    std::uint64_t seed_;
    std::string config_hash_;
    std::vector<std::pair<std::string, std::string>> files_;  // (name, hash)
};

}  // namespace seled
