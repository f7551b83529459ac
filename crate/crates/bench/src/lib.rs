//! Shared setup for the criterion benches.

use spdc_core::*;

pub const LENGTH_MM: f64 = 30.0;
pub const FWHM_NM: f64 = 0.87;

/// A crystal with its 20 degC degenerate design resolved against the bundled database.
pub struct Fixture {
    pub db: CoefficientDatabase,
    pub crystal: CrystalId,
}

impl Fixture {
    pub fn new(crystal: CrystalId) -> Self {
        Self {
            db: CoefficientDatabase::bundled(),
            crystal,
        }
    }

    pub fn medium(&self) -> Medium<'_> {
        Medium::new(&self.db, self.crystal).expect("bundled models cover every crystal")
    }

    pub fn source(&self, temperature_c: f64) -> (DegenerateDesign, PumpSpec, CrystalGeometry) {
        let design = DegenerateDesign::at_gvm1(&self.medium(), 20.0).expect("design solves");
        let pump = PumpSpec::new(design.lambda_p_nm, FWHM_NM).unwrap();
        let geometry =
            CrystalGeometry::new(LENGTH_MM, design.poling_period_um, temperature_c).unwrap();
        (design, pump, geometry)
    }

    pub fn jsa(&self, temperature_c: f64, n: usize) -> JointSpectralAmplitude {
        let (_, pump, geometry) = self.source(temperature_c);
        compute_jsa_auto(&self.medium(), &geometry, &pump, n).expect("grid converges")
    }
}
