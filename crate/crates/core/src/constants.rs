//! CODATA 2018 physical constants (SI).

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.022_140_76e23;
/// Riemann zeta(3) (Apéry's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;
/// Angular frequency corresponding to 1 eV, rad/s.
pub const EV_TO_RAD_PER_S: f64 = ELEMENTARY_CHARGE / HBAR;
/// Standard gravitational acceleration used for the plate load, m/s².
pub const STANDARD_GRAVITY: f64 = 9.8;
