#include "seled/quantum.hpp"

#include <algorithm>
#include <cmath>

namespace seled {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
const Complex kI(0.0, 1.0);

}  // namespace

const char* pol_name(Pol p) {
    switch (p) {
        case Pol::H: return "H";
        case Pol::V: return "V";
        case Pol::D: return "D";
        case Pol::A: return "A";
        case Pol::R: return "R";
        case Pol::L: return "L";
    }
    return "?";
}

Pol pol_from_name(const std::string& name) {
    if (name.size() == 1) {
        switch (name[0]) {
            case 'H': return Pol::H;
            case 'V': return Pol::V;
            case 'D': return Pol::D;
            case 'A': return Pol::A;
            case 'R': return Pol::R;
            case 'L': return Pol::L;
            default: break;
        }
    }
    throw ValidationError("unknown polarization ket '" + name + "' (expected one of H,V,D,A,R,L)");
}

PolarizationKet::PolarizationKet(Complex h, Complex v) : amp_h(h), amp_v(v) {
    double n = std::sqrt(std::norm(amp_h) + std::norm(amp_v));
    if (n < 1e-12) throw ValidationError("polarization ket has zero norm");
    amp_h /= n;
    amp_v /= n;
}

PolarizationKet PolarizationKet::basis(Pol p) {
    switch (p) {
        case Pol::H: return {1.0, 0.0};
        case Pol::V: return {0.0, 1.0};
        case Pol::D: return {kInvSqrt2, kInvSqrt2};
        case Pol::A: return {kInvSqrt2, -kInvSqrt2};
        case Pol::R: return {kInvSqrt2, kI * kInvSqrt2};
        case Pol::L: return {kInvSqrt2, -kI * kInvSqrt2};
    }
    throw ValidationError("invalid polarization label");
}

Complex PolarizationKet::inner(const PolarizationKet& other) const {
    return std::conj(amp_h) * other.amp_h + std::conj(amp_v) * other.amp_v;
}

PolarizationKet PolarizationKet::orthogonal() const {
    return {-std::conj(amp_v), std::conj(amp_h)};
}

MeasurementSetting co_setting(Pol k) { return {k, k}; }

MeasurementSetting cross_setting(Pol k) {
    switch (k) {
        case Pol::H: return {Pol::H, Pol::V};
        case Pol::V: return {Pol::V, Pol::H};
        case Pol::D: return {Pol::D, Pol::A};
        case Pol::A: return {Pol::A, Pol::D};
        case Pol::R: return {Pol::R, Pol::L};
        case Pol::L: return {Pol::L, Pol::R};
    }
    throw ValidationError("invalid polarization label");
}

TwoPhotonState::TwoPhotonState(const std::array<Complex, 4>& amps) : amps_(amps) {
    double n2 = 0.0;
    for (const auto& a : amps_) n2 += std::norm(a);
    if (n2 < 1e-24) throw ValidationError("two-photon state has zero norm");
    double n = std::sqrt(n2);
    for (auto& a : amps_) a /= n;
}

TwoPhotonState TwoPhotonState::product(const PolarizationKet& xx, const PolarizationKet& x) {
    return TwoPhotonState({xx.amp_h * x.amp_h, xx.amp_h * x.amp_v,
                           xx.amp_v * x.amp_h, xx.amp_v * x.amp_v});
}

Eigen::Vector4cd TwoPhotonState::vector() const {
    return Eigen::Vector4cd(amps_[0], amps_[1], amps_[2], amps_[3]);
}

Eigen::Vector4cd setting_vector(const MeasurementSetting& s) {
    PolarizationKet k1 = PolarizationKet::basis(s.xx);
    PolarizationKet k2 = PolarizationKet::basis(s.x);
    return Eigen::Vector4cd(k1.amp_h * k2.amp_h, k1.amp_h * k2.amp_v,
                            k1.amp_v * k2.amp_h, k1.amp_v * k2.amp_v);
}

double TwoPhotonState::projection_probability(const MeasurementSetting& s) const {
    Complex amp = setting_vector(s).dot(vector());  // Eigen dot conjugates lhs
    return std::norm(amp);
}

Complex TwoPhotonState::overlap(const TwoPhotonState& other) const {
    return vector().dot(other.vector());
}

TwoPhotonState bell_psi_plus(double phase) {
    return TwoPhotonState({kInvSqrt2, 0.0, 0.0, std::exp(kI * phase) * kInvSqrt2});
}

DensityMatrix4::DensityMatrix4(const Eigen::Matrix4cd& m) : m_(m) {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError("density matrix is not Hermitian");
    }
    if (std::abs(m_.trace().real() - 1.0) > 1e-10 || std::abs(m_.trace().imag()) > 1e-10) {
        throw ValidationError("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ComputationError("eigenvalue computation failed");
    if (es.eigenvalues().minCoeff() < -1e-9) {
        throw ValidationError("density matrix has a negative eigenvalue beyond tolerance");
    }
}

DensityMatrix4 DensityMatrix4::pure(const TwoPhotonState& psi) {
    Eigen::Vector4cd v = psi.vector();
    return DensityMatrix4(v * v.adjoint());
}

DensityMatrix4 DensityMatrix4::maximally_mixed() {
    return DensityMatrix4(Eigen::Matrix4cd::Identity() * 0.25);
}

DensityMatrix4 DensityMatrix4::werner(double p, double phase) {
    if (p < 0.0 || p > 1.0) throw ValidationError("werner mixing parameter outside [0,1]");
    Eigen::Vector4cd v = bell_psi_plus(phase).vector();
    Eigen::Matrix4cd m = p * (v * v.adjoint()) + (1.0 - p) * 0.25 * Eigen::Matrix4cd::Identity();
    return DensityMatrix4(m);
}

Eigen::Matrix4cd DensityMatrix4::regularized() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m_);
    if (es.info() != Eigen::Success) throw ComputationError("eigenvalue computation failed");
    Eigen::Vector4d ev = es.eigenvalues();
    for (int i = 0; i < 4; ++i) ev[i] = std::clamp(ev[i], 0.0, 1.0 + 1e-9);
    double s = ev.sum();
    if (s <= 0.0) throw ComputationError("density matrix regularization collapsed to zero");
    ev /= s;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double projection_probability(const DensityMatrix4& rho, const MeasurementSetting& s) {
    Eigen::Vector4cd v = setting_vector(s);
    double p = (v.adjoint() * rho.matrix() * v)(0).real();
    return std::clamp(p, 0.0, 1.0);
}

double fidelity_to_psi_plus(const DensityMatrix4& rho) {
    Eigen::Vector4cd v = bell_psi_plus(0.0).vector();
    double f = (v.adjoint() * rho.matrix() * v)(0).real();
    return std::clamp(f, 0.0, 1.0);
}

double concurrence(const DensityMatrix4& rho) {
    // Spin-flip matrix sigma_y (x) sigma_y in the (HH, HV, VH, VV) basis.
    Eigen::Matrix4cd flip = Eigen::Matrix4cd::Zero();
    flip(0, 3) = -1.0;
    flip(1, 2) = 1.0;
    flip(2, 1) = 1.0;
    flip(3, 0) = -1.0;

    Eigen::Matrix4cd r = rho.regularized();
    Eigen::Matrix4cd m = r * flip * r.conjugate() * flip;
    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(m, false);
    if (es.info() != Eigen::Success) throw ComputationError("concurrence eigenvalue computation failed");

    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) {
        lam[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()[i].real()));
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());
    return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

double peres_criterion(const DensityMatrix4& rho) {
    Eigen::Matrix4cd r = rho.regularized();
    // Transpose the X (second) photon: swap the column index pairs within
    // each 2x2 block, i.e. pt[2a+b][2c+d] = r[2a+d][2c+b].
    Eigen::Matrix4cd pt;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d)
                    pt(2 * a + b, 2 * c + d) = r(2 * a + d, 2 * c + b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(pt, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ComputationError("partial transpose eigenvalue computation failed");
    return es.eigenvalues().minCoeff();
}

MostProbableState most_probable_state(const DensityMatrix4& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho.regularized());
    if (es.info() != Eigen::Success) throw ComputationError("eigenvalue computation failed");

    // Eigen sorts ascending; the dominant pair is index 3.
    Eigen::Vector4cd v = es.eigenvectors().col(3);
    MostProbableState out{
        TwoPhotonState({v[0], v[1], v[2], v[3]}),
        es.eigenvalues()[3],
        0.0,
        (es.eigenvalues()[3] - es.eigenvalues()[2]) < 1e-9,
    };
    Complex hh = out.state.amplitude(0);
    Complex vv = out.state.amplitude(3);
    if (std::abs(hh) > 1e-9 && std::abs(vv) > 1e-9) {
        out.phase = std::arg(vv) - std::arg(hh);
        if (out.phase > 3.14159265358979323846) out.phase -= 2 * 3.14159265358979323846;
        if (out.phase <= -3.14159265358979323846) out.phase += 2 * 3.14159265358979323846;
    }
    return out;
}

EntanglementMetrics entanglement_metrics(const DensityMatrix4& rho) {
    EntanglementMetrics m;
    m.fidelity_psi_plus = fidelity_to_psi_plus(rho);
    m.concurrence = concurrence(rho);
    m.tangle = m.concurrence * m.concurrence;
    MostProbableState mps = most_probable_state(rho);
    m.largest_eigenvalue = mps.eigenvalue;
    m.most_probable_phase = mps.phase;
    m.peres_min_eig = peres_criterion(rho);
    return m;
}

}  // namespace seled
