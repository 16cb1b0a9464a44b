#pragma once

// Universal physical constants (CODATA 2018 exact / recommended values).
// All of them can be overridden per run through the cell parameter block;
// these are only the shipped defaults.

namespace sttsim::constants {

inline constexpr double k_boltzmann = 1.380649e-23;        // J/K
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double electron_charge = 1.602176634e-19; // C

// The "c" appearing in the write-failure switching-delay denominator.
// Defaults to the Euler-Mascheroni constant.
inline constexpr double euler_c = 0.5772156649015329;

} // namespace sttsim::constants
