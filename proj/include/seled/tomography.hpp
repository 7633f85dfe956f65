#pragma once

#include <cstdint>
#include <vector>

#include "seled/correlation.hpp"
#include "seled/quantum.hpp"

namespace seled {

struct TomographyRecord {
    MeasurementSetting setting{Pol::H, Pol::H};
    std::uint64_t counts = 0;
    double acquisition_weight = 1.0;  // relative integration time, > 0
};

// The frozen 16-setting list (ordered XX ket, X ket):
//   HH HV VV VH RH RV DV DH DR DD RD HD VD VL HL RL
// Informationally complete; the 16x16 design matrix has full rank.
std::vector<MeasurementSetting> canonical_settings();

// Validates a full record set: 16 records, canonical settings, no
// duplicates, positive weights. Order does not matter.
void validate_records(const std::vector<TomographyRecord>& records);

// Least-squares inversion of the design matrix against normalized
// frequencies. Hermitian with unit trace, but possibly non-physical
// (negative eigenvalues); feed to mle_reconstruct for a physical state.
Eigen::Matrix4cd linear_inversion(const std::vector<TomographyRecord>& records);

struct MleResult {
    DensityMatrix4 rho;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Maximum-likelihood reconstruction over the 16-parameter Cholesky
// factorization rho = T T^dag / tr(T T^dag) with lower-triangular T,
// Poissonian counts with a profiled global scale. Physical by construction.
MleResult mle_reconstruct(const std::vector<TomographyRecord>& records);

// Integrate gated zero-delay coincidences of one histogram per canonical
// setting into records. Throws ValidationError listing missing settings.
std::vector<TomographyRecord> tomography_from_histograms(
    const std::vector<CoincidenceHistogram>& hists, const GateWindow& gate, double period_ns);

// Synthetic Poisson counts for a known state; test/scenario hook.
std::vector<TomographyRecord> sample_counts(const DensityMatrix4& rho,
                                            double mean_counts_per_setting, std::uint64_t seed);

double trace_distance(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b);

}  // namespace seled
