#pragma once

// SI constants (2019 redefinition, exact where exact) and the unit conventions
// used across the library:
//   * energies are stored as E/h in Hz ("h*Hz"), never in Joule or eV,
//   * rates (kappa, gamma, g) are stored as rate/2pi in Hz,
//   * promotion to angular frequency (x 2pi) happens only inside the
//     transmission / susceptibility formulas.
namespace cqed {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double h_planck = 6.62607015e-34;         // J s (exact)
inline constexpr double hbar = h_planck / two_pi;          // J s
inline constexpr double e_charge = 1.602176634e-19;        // C (exact)
inline constexpr double k_boltzmann = 1.380649e-23;        // J/K (exact)
inline constexpr double eps0 = 8.8541878128e-12;           // F/m
inline constexpr double m_electron = 9.1093837015e-31;     // kg
inline constexpr double flux_quantum = h_planck / (2.0 * e_charge);  // Wb

// 1 eV expressed as E/h [Hz]
inline constexpr double ev_to_hz = e_charge / h_planck;

}  // namespace cqed
