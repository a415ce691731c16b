#pragma once

// Reduced-unit conventions used everywhere in the workbench:
//   time    t/T          (T = one pulse duration)
//   energy  E*T          (hbar = 1)
//   rates   Gamma*T
// A single scale constant converts to atomic units / fs for reports.

namespace qcw {

inline constexpr double PI = 3.14159265358979323846;

// Pulse duration in atomic time units. 20 fs nominally = 826.8 a.u.;
// the workbench adopts 840 throughout so that the default excited-state
// energies come out as 0.16277*840 and 0.16439*840 (see SystemSpec).
inline constexpr double T_AU = 840.0;

inline constexpr double HARTREE_PER_CM1 = 4.556335252767e-6; // 1 cm^-1 in E_h
inline constexpr double KB_AU = 3.166811563e-6;              // k_B in E_h/K
inline constexpr double FS_PER_AU = 0.02418884326509;        // fs per a.u. time

// omega given in cm^-1 -> reduced angular frequency omega*T
inline constexpr double cm1_to_reduced(double wavenumber) {
    return wavenumber * HARTREE_PER_CM1 * T_AU;
}

// inverse temperature at T_kelvin, in reduced units (beta/T)
inline constexpr double beta_reduced(double T_kelvin) {
    return 1.0 / (KB_AU * T_kelvin) / T_AU;
}

} // namespace qcw
