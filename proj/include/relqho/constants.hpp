#pragma once

namespace relqho::constants {

// CODATA-2018 values.
//
//   name                      value                unit
//   ------------------------  -------------------  ------
//   hbar                      1.054571817e-34      J s     (exact, derived from h)
//   electron_mass             9.1093837015e-31     kg
//   speed_of_light            299792458.0          m/s     (exact)
//   electron_volt             1.602176634e-19      J       (exact)
//   electron_rest_energy_ev   510998.95000         eV
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double electron_mass = 9.1093837015e-31;
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double electron_volt = 1.602176634e-19;
inline constexpr double electron_rest_energy_ev = 510998.95000;

} // namespace relqho::constants
