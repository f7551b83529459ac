//! Published benchmark values with the tolerances used to compare against
//! them. Temperatures are 20 °C and 120 °C; shifts are λ(20 °C) − λ(120 °C).

use crate::dispersion::CrystalId;

pub const T_LOW_C: f64 = 20.0;
pub const T_HIGH_C: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub value: f64,
    pub tol: f64,
}

impl Target {
    pub const fn new(value: f64, tol: f64) -> Self {
        Self { value, tol }
    }

    pub fn accepts(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tol
    }
}

/// One row of the crystal comparison table, nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub crystal: CrystalId,
    pub gvm1: Target,
    pub gvm1_shift: Target,
    pub gvm2: Target,
    pub gvm2_shift: Target,
    pub pm_shift: Target,
}

const fn row(c: CrystalId, g1: f64, d1: f64, g2: f64, d2: f64, pm: f64) -> TableRow {
    TableRow {
        crystal: c,
        gvm1: Target::new(g1, 1.0),
        gvm1_shift: Target::new(d1, 0.5),
        gvm2: Target::new(g2, 1.0),
        gvm2_shift: Target::new(d2, 0.5),
        pm_shift: Target::new(pm, 1.0),
    }
}

pub const TABLE: [TableRow; 5] = [
    row(CrystalId::Ktp, 1584.6, 6.4, 1225.2, 7.3, 4.4),
    row(CrystalId::Rtp, 1643.2, 1.2, 1282.0, -2.4, -0.4),
    row(CrystalId::Kta, 1680.9, 8.9, 1288.1, -2.1, -1.2),
    row(CrystalId::Rta, 1786.6, 25.6, 1379.7, 22.4, 29.1),
    row(CrystalId::Cta, 1972.5, 6.3, 1577.2, 5.4, 59.5),
];

pub fn table_row(c: CrystalId) -> &'static TableRow {
    TABLE
        .iter()
        .find(|r| r.crystal == c)
        .expect("every crystal has a row")
}

/// Poling period at the 20 °C GVM1 degeneracy, µm.
pub fn poling_period(c: CrystalId) -> Option<Target> {
    match c {
        CrystalId::Ktp => Some(Target::new(45.0, 0.5)),
        CrystalId::Kta => Some(Target::new(50.2, 0.5)),
        CrystalId::Rta => Some(Target::new(73.3, 1.0)),
        CrystalId::Cta => Some(Target::new(248.4, 5.0)),
        CrystalId::Rtp => None,
    }
}

/// KTP with the alternate coefficient set: GVM1 wavelength (nm) and period (µm).
pub const KTP_ALTERNATE_GVM1_NM: f64 = 1582.2;
pub const KTP_ALTERNATE_PERIOD_UM: f64 = 46.1;

/// PPCTA two-photon interference configuration.
pub mod hom {
    pub const LENGTH_MM: f64 = 30.0;
    pub const PUMP_FWHM_NM: f64 = 0.87;
    /// (temperature °C, visibility, dip count)
    pub const POINTS: [(f64, f64, usize); 4] = [
        (20.0, 1.00, 1),
        (22.0, 0.21, 2),
        (25.0, 0.12, 3),
        (30.0, 0.06, 6),
    ];
    pub const VISIBILITY_TOL: f64 = 0.03;
    pub const PURITY_FLOOR: f64 = 0.8;
}
