#include "seled/io.hpp"

#include <fstream>
#include <sstream>

namespace seled {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, int line_no, const char* field) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": cannot parse " + field +
                              " from '" + s + "'");
    }
}

std::uint64_t parse_count(const std::string& s, int line_no, const char* field) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing garbage");
        if (v < 0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative " + field);
        }
        return static_cast<std::uint64_t>(v);
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": cannot parse " + field +
                              " from '" + s + "'");
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void expect_header(const std::string& got, const std::string& want,
                   const std::filesystem::path& path) {
    if (got != want) {
        throw ValidationError(path.string() + ": expected header '" + want + "', got '" + got +
                              "'");
    }
}

}  // namespace

std::vector<TuningSample> read_tuning_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    expect_header(line, "fp_kv_cm,s_ueV,s_err,theta_deg,theta_err", path);

    std::vector<TuningSample> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 5) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                                  std::to_string(f.size()));
        }
        TuningSample s;
        s.fp = parse_double(f[0], line_no, "fp_kv_cm");
        s.s = parse_double(f[1], line_no, "s_ueV");
        s.s_err = parse_double(f[2], line_no, "s_err");
        s.theta = parse_double(f[3], line_no, "theta_deg");
        s.theta_err = parse_double(f[4], line_no, "theta_err");
        if (s.s < 0.0) throw ValidationError("line " + std::to_string(line_no) + ": negative FSS");
        if (s.s_err <= 0.0 || s.theta_err <= 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": errors must be positive");
        }
        out.push_back(s);
    }
    return out;
}

void write_tuning_csv(const std::filesystem::path& path, const std::vector<TuningSample>& samples) {
    auto out = open_output(path);
    out << "fp_kv_cm,s_ueV,s_err,theta_deg,theta_err\n";
    for (const auto& s : samples) {
        out << s.fp << ',' << s.s << ',' << s.s_err << ',' << s.theta << ',' << s.theta_err
            << '\n';
    }
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

}  // namespace

void write_histograms(const std::filesystem::path& csv_path, const HistogramBundle& bundle) {
    auto out = open_output(csv_path);
    out.precision(17);  // bin centers must survive the round-trip exactly
    out << "setting_xx,setting_x,bin_center_ns,counts\n";
    for (const auto& h : bundle.histograms) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            if (h.counts[i] == 0) continue;  // zero bins restored from the sidecar layout
            out << pol_name(h.setting.xx) << ',' << pol_name(h.setting.x) << ','
                << h.bin_center(i) << ',' << h.counts[i] << '\n';
        }
    }

    json side;
    side["emitter"] = emitter_to_json(bundle.emitter);
    side["drive"] = drive_to_json(bundle.drive);
    side["detector"] = detector_to_json(bundle.detector);
    side["seed"] = bundle.seed;
    json layouts = json::array();
    for (const auto& h : bundle.histograms) {
        layouts.push_back({{"setting_xx", pol_name(h.setting.xx)},
                           {"setting_x", pol_name(h.setting.x)},
                           {"bin_width_ns", h.bin_width},
                           {"origin_ns", h.origin},
                           {"n_bins", h.counts.size()},
                           {"n_pulses", h.n_pulses}});
    }
    side["histograms"] = layouts;
    auto sj = open_output(sidecar_path(csv_path));
    sj << side.dump(2) << '\n';
}

HistogramBundle read_histograms(const std::filesystem::path& csv_path) {
    json side;
    {
        auto in = open_input(sidecar_path(csv_path));
        try {
            in >> side;
        } catch (const json::exception& e) {
            throw ValidationError(sidecar_path(csv_path).string() + ": " + e.what());
        }
    }

    HistogramBundle bundle;
    try {
        bundle.emitter = emitter_from_json(side.at("emitter"));
        bundle.drive = drive_from_json(side.at("drive"));
        bundle.detector = detector_from_json(side.at("detector"));
        bundle.seed = side.at("seed").get<std::uint64_t>();
        for (const auto& l : side.at("histograms")) {
            CoincidenceHistogram h;
            h.setting.xx = pol_from_name(l.at("setting_xx").get<std::string>());
            h.setting.x = pol_from_name(l.at("setting_x").get<std::string>());
            h.bin_width = l.at("bin_width_ns").get<double>();
            h.origin = l.at("origin_ns").get<double>();
            h.counts.assign(l.at("n_bins").get<std::size_t>(), 0);
            h.n_pulses = l.at("n_pulses").get<std::uint64_t>();
            if (h.bin_width <= 0.0 || h.counts.empty()) {
                throw ValidationError("invalid histogram layout in sidecar");
            }
            bundle.histograms.push_back(std::move(h));
        }
    } catch (const json::exception& e) {
        throw ValidationError(sidecar_path(csv_path).string() + ": " + e.what());
    }

    auto in = open_input(csv_path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(csv_path.string() + ": empty file");
    expect_header(line, "setting_xx,setting_x,bin_center_ns,counts", csv_path);

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 4) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields");
        }
        MeasurementSetting s{pol_from_name(f[0]), pol_from_name(f[1])};
        double center = parse_double(f[2], line_no, "bin_center_ns");
        std::uint64_t counts = parse_count(f[3], line_no, "counts");

        CoincidenceHistogram* h = nullptr;
        for (auto& cand : bundle.histograms) {
            if (cand.setting == s) {
                h = &cand;
                break;
            }
        }
        if (h == nullptr) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": setting not declared in sidecar");
        }
        double b = (center - h->origin) / h->bin_width - 0.5;
        auto idx = static_cast<std::size_t>(std::llround(b));
        if (idx >= h->counts.size() || std::abs(b - static_cast<double>(idx)) > 1e-6) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": bin center does not match the declared layout");
        }
        h->counts[idx] = counts;
    }
    return bundle;
}

std::vector<TomographyRecord> read_records_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    expect_header(line, "setting_xx,setting_x,counts,weight", path);

    std::vector<TomographyRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_csv(line);
        if (f.size() != 4) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields");
        }
        TomographyRecord rec;
        rec.setting.xx = pol_from_name(f[0]);
        rec.setting.x = pol_from_name(f[1]);
        rec.counts = parse_count(f[2], line_no, "counts");
        rec.acquisition_weight = parse_double(f[3], line_no, "weight");
        if (rec.acquisition_weight <= 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": non-positive weight");
        }
        out.push_back(rec);
    }
    return out;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<TomographyRecord>& records) {
    auto out = open_output(path);
    out << "setting_xx,setting_x,counts,weight\n";
    for (const auto& r : records) {
        out << pol_name(r.setting.xx) << ',' << pol_name(r.setting.x) << ',' << r.counts << ','
            << r.acquisition_weight << '\n';
    }
}

void write_fss_curve_csv(const std::filesystem::path& path, const FssScanResult& scan) {
    auto out = open_output(path);
    out << "fss_ueV,fidelity,fidelity_err\n";
    for (const auto& p : scan.points) {
        out << p.fss << ',' << p.fidelity << ',' << p.fidelity_err << '\n';
    }
}

void write_smin_histogram_csv(const std::filesystem::path& path, const SminHistogram& hist) {
    auto out = open_output(path);
    out << "bin_lo_ueV,bin_hi_ueV,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out << static_cast<double>(i) * hist.bin_width << ','
            << static_cast<double>(i + 1) * hist.bin_width << ',' << hist.counts[i] << '\n';
    }
}

json density_matrix_to_json(const DensityMatrix4& rho) {
    json entries = json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            entries.push_back({rho.matrix()(r, c).real(), rho.matrix()(r, c).imag()});
        }
    }
    return json{{"matrix", entries}};
}

DensityMatrix4 density_matrix_from_json(const json& j) {
    try {
        const auto& entries = j.at("matrix");
        if (entries.size() != 16) throw ValidationError("matrix must have 16 [re, im] entries");
        Eigen::Matrix4cd m;
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                const auto& e = entries[static_cast<std::size_t>(4 * r + c)];
                m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
            }
        }
        return DensityMatrix4(m);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad density matrix JSON: ") + e.what());
    }
}

json tuning_fit_to_json(const TuningFit& fit) {
    return json{
        {"s0_ueV", fit.params.s0},         {"s0_err", fit.s0_err},
        {"theta0_deg", fit.params.theta0}, {"theta0_err", fit.theta0_err},
        {"k_ueV", fit.params.k},           {"k_err", fit.k_err},
        {"delta_ueV", fit.params.delta},   {"delta_err", fit.delta_err},
        {"alpha_ueV_per_unit", fit.params.alpha},
        {"alpha_err", fit.alpha_err},      {"beta_ueV_per_unit", fit.params.beta},
        {"s_min_ueV", 2.0 * std::abs(fit.params.k)},
        {"residual_norm", fit.residual_norm},
        {"iterations", fit.iterations},    {"converged", fit.converged},
    };
}

json metrics_to_json(const EntanglementMetrics& m) {
    return json{
        {"fidelity_psi_plus", m.fidelity_psi_plus},
        {"concurrence", m.concurrence},
        {"tangle", m.tangle},
        {"largest_eigenvalue", m.largest_eigenvalue},
        {"peres_min_eig", m.peres_min_eig},
        {"most_probable_phase_rad", m.most_probable_phase},
    };
}

json gate_scan_to_json(const std::vector<GateScanRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({
            {"gate_ns", r.gate.width},
            {"c_hv", r.correlations.c_hv},
            {"c_hv_err", r.correlations.sigma_hv},
            {"c_da", r.correlations.c_da},
            {"c_da_err", r.correlations.sigma_da},
            {"c_rl", r.correlations.c_rl},
            {"c_rl_err", r.correlations.sigma_rl},
            {"fidelity", r.fidelity.value},
            {"fidelity_err", r.fidelity.sigma},
            {"s_rd", r.bell.s_rd},
            {"s_rd_err", r.bell.sigma_rd},
            {"s_rc", r.bell.s_rc},
            {"s_rc_err", r.bell.sigma_rc},
            {"s_dc", r.bell.s_dc},
            {"s_dc_err", r.bell.sigma_dc},
            {"kept_fraction", r.kept_fraction},
        });
    }
    return json{{"gates", out}};
}

json fss_scan_to_json(const FssScanResult& scan) {
    json points = json::array();
    for (const auto& p : scan.points) {
        points.push_back({{"fss_ueV", p.fss}, {"fidelity", p.fidelity}, {"err", p.fidelity_err}});
    }
    return json{{"points", points},
                {"lorentzian",
                 {{"peak", scan.fit.peak},
                  {"fwhm_ueV", scan.fit.fwhm},
                  {"fwhm_err", scan.fit.fwhm_err},
                  {"baseline", scan.fit.baseline},
                  {"amplitude", scan.fit.amplitude},
                  {"converged", scan.fit.converged}}}};
}

json yield_report_to_json(const std::vector<DotSample>& samples,
                          const std::vector<double>& thresholds) {
    json fr = json::array();
    for (double t : thresholds) {
        auto f = fraction_below(samples, t);
        fr.push_back({{"threshold_ueV", t},
                      {"fraction", f.fraction},
                      {"count", f.count},
                      {"wilson_lo", f.wilson_lo},
                      {"wilson_hi", f.wilson_hi}});
    }
    return json{{"n_dots", samples.size()}, {"fractions", fr}};
}

json emitter_to_json(const EmitterConfig& c) {
    return json{{"fss_ueV", c.fss},
                {"tau_xx_ns", c.tau_xx},
                {"tau_x_ns", c.tau_x},
                {"pair_prob", c.pair_prob},
                {"background_frac", c.background_frac},
                {"reexcite_prob", c.reexcite_prob},
                {"psi_phase0_rad", c.psi_phase0},
                {"bright_coupling_rad", c.bright_coupling}};
}

namespace {

double get_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

}  // namespace

EmitterConfig emitter_from_json(const json& j) {
    try {
        EmitterConfig c;
        c.fss = get_or(j, "fss_ueV", c.fss);
        c.tau_xx = get_or(j, "tau_xx_ns", c.tau_xx);
        c.tau_x = get_or(j, "tau_x_ns", c.tau_x);
        c.pair_prob = get_or(j, "pair_prob", c.pair_prob);
        c.background_frac = get_or(j, "background_frac", c.background_frac);
        c.reexcite_prob = get_or(j, "reexcite_prob", c.reexcite_prob);
        c.psi_phase0 = get_or(j, "psi_phase0_rad", c.psi_phase0);
        c.bright_coupling = get_or(j, "bright_coupling_rad", c.bright_coupling);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad emitter config: ") + e.what());
    }
}

json drive_to_json(const DriveConfig& c) {
    return json{{"rep_rate_mhz", c.rep_rate_mhz}, {"pulse_width_ns", c.pulse_width}};
}

DriveConfig drive_from_json(const json& j) {
    try {
        DriveConfig c;
        c.rep_rate_mhz = get_or(j, "rep_rate_mhz", c.rep_rate_mhz);
        c.pulse_width = get_or(j, "pulse_width_ns", c.pulse_width);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad drive config: ") + e.what());
    }
}

json detector_to_json(const DetectorConfig& c) {
    return json{{"jitter_sigma_ns", c.jitter_sigma}, {"efficiency", c.efficiency}};
}

DetectorConfig detector_from_json(const json& j) {
    try {
        DetectorConfig c;
        c.jitter_sigma = get_or(j, "jitter_sigma_ns", c.jitter_sigma);
        c.efficiency = get_or(j, "efficiency", c.efficiency);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad detector config: ") + e.what());
    }
}

json population_to_json(const PopulationModel& m) {
    return json{{"theta0_center_deg", m.theta0_center},
                {"theta0_spread_deg", m.theta0_spread},
                {"theta0_lo_deg", m.theta0_lo},
                {"theta0_hi_deg", m.theta0_hi},
                {"s0_mean_ueV", m.s0_mean},
                {"s0_spread_ueV", m.s0_spread},
                {"theta0_family",
                 m.theta0_family == DistFamily::TruncatedNormal ? "truncated_normal" : "gamma"},
                {"s0_family", m.s0_family == DistFamily::Gamma ? "gamma" : "truncated_normal"}};
}

PopulationModel population_from_json(const json& j) {
    try {
        PopulationModel m;
        m.theta0_center = get_or(j, "theta0_center_deg", m.theta0_center);
        m.theta0_spread = get_or(j, "theta0_spread_deg", m.theta0_spread);
        m.theta0_lo = get_or(j, "theta0_lo_deg", m.theta0_lo);
        m.theta0_hi = get_or(j, "theta0_hi_deg", m.theta0_hi);
        m.s0_mean = get_or(j, "s0_mean_ueV", m.s0_mean);
        m.s0_spread = get_or(j, "s0_spread_ueV", m.s0_spread);
        auto family = [](const std::string& name) {
            if (name == "truncated_normal") return DistFamily::TruncatedNormal;
            if (name == "gamma") return DistFamily::Gamma;
            throw ValidationError("unknown distribution family '" + name + "'");
        };
        if (j.contains("theta0_family")) {
            m.theta0_family = family(j.at("theta0_family").get<std::string>());
        }
        if (j.contains("s0_family")) m.s0_family = family(j.at("s0_family").get<std::string>());
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad population model: ") + e.what());
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

RunManifest::RunManifest(std::string name, std::uint64_t seed, std::string config_hash)
    : name_(std::move(name)), seed_(seed), config_hash_(std::move(config_hash)) {}

void RunManifest::add(const std::filesystem::path& path) {
    files_.emplace_back(path.filename().string(), hash_file(path));
}

void RunManifest::write(const std::filesystem::path& dir) const {
    json files = json::array();
    for (const auto& [name, hash] : files_) {
        files.push_back({{"file", name}, {"fnv1a64", hash}});
    }
    json m{{"scenario", name_}, {"seed", seed_}, {"config_fnv1a64", config_hash_},
           {"outputs", files}};
    auto out = open_output(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

}  // namespace seled
