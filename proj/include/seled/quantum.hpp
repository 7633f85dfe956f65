#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "seled/errors.hpp"

namespace seled {

using Complex = std::complex<double>;

// Single-photon polarization basis labels. R = (H + iV)/sqrt(2),
// L = (H - iV)/sqrt(2); this convention is fixed here and everywhere else
// (RL expectations such as the |Psi+> anti-correlation follow from it).
enum class Pol { H, V, D, A, R, L };

const char* pol_name(Pol p);
Pol pol_from_name(const std::string& name);  // throws ValidationError

// Normalized single-photon polarization state.
struct PolarizationKet {
    Complex amp_h;
    Complex amp_v;

    PolarizationKet(Complex h, Complex v);  // normalizes, rejects null ket

    static PolarizationKet basis(Pol p);

    Complex inner(const PolarizationKet& other) const;  // <this|other>
    PolarizationKet orthogonal() const;
};

// Ordered measurement setting: XX-photon ket first, X-photon ket second.
struct MeasurementSetting {
    Pol xx;
    Pol x;

    bool operator==(const MeasurementSetting&) const = default;
};

// The basis is co-polarized iff the two kets are equal or orthogonal partners
// within the same basis (HV, DA or RL).
MeasurementSetting co_setting(Pol basis_first);     // (k, k)
MeasurementSetting cross_setting(Pol basis_first);  // (k, k_perp)

// Pure two-photon polarization state, amplitudes ordered (HH, HV, VH, VV)
// with the XX photon as the first tensor factor.
class TwoPhotonState {
public:
    explicit TwoPhotonState(const std::array<Complex, 4>& amps);  // normalizes

    static TwoPhotonState product(const PolarizationKet& xx, const PolarizationKet& x);

    const std::array<Complex, 4>& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_[static_cast<std::size_t>(i)]; }

    Eigen::Vector4cd vector() const;

    // |<k1 k2|psi>|^2 for the ordered setting.
    double projection_probability(const MeasurementSetting& s) const;

    Complex overlap(const TwoPhotonState& other) const;  // <this|other>

private:
    std::array<Complex, 4> amps_;
};

// |Psi(phi)> = (|HH> + e^{i phi}|VV>)/sqrt(2).
TwoPhotonState bell_psi_plus(double phase = 0.0);

// The four-amplitude vector of the ordered two-photon projector |k1 k2>.
Eigen::Vector4cd setting_vector(const MeasurementSetting& s);

// Two-photon density matrix in the (HH, HV, VH, VV) basis.
class DensityMatrix4 {
public:
    // Validates hermiticity (1e-10 entrywise), unit trace (1e-10) and
    // positivity (min eigenvalue >= -1e-9); throws ValidationError.
    explicit DensityMatrix4(const Eigen::Matrix4cd& m);

    static DensityMatrix4 pure(const TwoPhotonState& psi);
    static DensityMatrix4 maximally_mixed();
    // p |Psi+><Psi+| + (1-p) I/4
    static DensityMatrix4 werner(double p, double phase = 0.0);

    const Eigen::Matrix4cd& matrix() const { return m_; }

    // Eigenvalues clipped to [-1e-9, 1+1e-9] and renormalized, as used by
    // every entanglement metric to absorb floating-point PSD violations.
    Eigen::Matrix4cd regularized() const;

private:
    Eigen::Matrix4cd m_;
};

struct MostProbableState {
    TwoPhotonState state;
    double eigenvalue = 0.0;
    double phase = 0.0;     // arg(a_VV) - arg(a_HH), the phi_0 of the state
    bool ambiguous = false; // largest-eigenvalue gap below 1e-9
};

struct EntanglementMetrics {
    double fidelity_psi_plus = 0.0;
    double concurrence = 0.0;
    double tangle = 0.0;
    double largest_eigenvalue = 0.0;
    double peres_min_eig = 0.0;
    double most_probable_phase = 0.0;
};

double projection_probability(const DensityMatrix4& rho, const MeasurementSetting& s);
double fidelity_to_psi_plus(const DensityMatrix4& rho);
double concurrence(const DensityMatrix4& rho);  // Wootters
// Minimum eigenvalue of the partial transpose on the X (second) photon.
double peres_criterion(const DensityMatrix4& rho);
MostProbableState most_probable_state(const DensityMatrix4& rho);
EntanglementMetrics entanglement_metrics(const DensityMatrix4& rho);

}  // namespace seled
