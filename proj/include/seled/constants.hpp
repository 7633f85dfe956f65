#pragma once

namespace seled {

// Reduced Planck constant in ueV*ns. Single source of truth: a FSS of
// s ueV makes the two-photon phase precess at s/hbar() rad/ns.
inline constexpr double hbar() { return 0.6582119569; }

inline constexpr double pi() { return 3.14159265358979323846; }

inline constexpr double deg_to_rad(double deg) { return deg * pi() / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi(); }

}  // namespace seled
