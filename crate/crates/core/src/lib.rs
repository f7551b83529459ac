//! Dispersion, phase-matching, biphoton and two-photon-interference modelling
//! for type-II spontaneous parametric down-conversion in KTP-family crystals.
//!
//! Wavelengths are nm at the public edges of the solvers and µm inside the
//! dispersion models; temperatures are °C; angular frequencies rad/s.
//!
//! ```
//! use spdc_core::{gvm1_wavelength, CoefficientDatabase, CrystalId, Medium};
//!
//! let db = CoefficientDatabase::bundled();
//! let ktp = Medium::new(&db, CrystalId::Ktp).unwrap();
//! let gvm = gvm1_wavelength(&ktp, 20.0).unwrap();
//! assert!((gvm.lambda_deg_nm - 1584.5).abs() < 1.0);
//! ```

pub mod biphoton;
pub mod dispersion;
pub mod error;
pub mod interference;
pub mod matching;
pub mod reference;
pub mod units;

mod roots;

pub use biphoton::{
    compute_jsa, compute_jsa_auto, optimize_pump_bandwidth, pm_amplitude, pump_envelope,
    schmidt_purity, sigma_from_fwhm, CrystalGeometry, JointSpectralAmplitude, PumpSpec,
    SpectralGrid,
};
pub use dispersion::{CoefficientDatabase, CrystalId, DispersionModel, OpticalAxis};
pub use error::{Error, Result};
pub use interference::{count_dips, hom_probability, hom_trace, visibility, HomTrace};
pub use matching::{
    degenerate_poling_period, gvm1_wavelength, gvm2_wavelength, gvm3_residual, phase_matched_pair,
    phase_mismatch, scan_over_temperature, DegenerateDesign, Gvm2Branch, GvmCondition, GvmResult,
    Medium, PhaseMatchSpec, ScanCondition, ScanTable, TemperatureSweep, TypeIIAssignment,
};
