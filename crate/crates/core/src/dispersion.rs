//! Refractive-index laws for the principal axes of the KTP isomorphs.
//!
//! Every [`DispersionModel`] combines a two-pole Sellmeier law with a
//! polynomial thermo-optic correction
//!
//! ```text
//! n(λ, T) = sqrt(n²(λ)) + n₁(λ)·(T − t0) + n₂(λ)·(T − t0)²,   nₘ(λ) = Σⱼ aⱼ / λʲ
//! ```
//!
//! with λ in µm and T in °C. Models refuse to evaluate outside their declared
//! validity window.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five crystals of the MTiOXO₄ family covered by the bundled database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CrystalId {
    #[serde(rename = "KTP")]
    Ktp,
    #[serde(rename = "RTP")]
    Rtp,
    #[serde(rename = "KTA")]
    Kta,
    #[serde(rename = "RTA")]
    Rta,
    #[serde(rename = "CTA")]
    Cta,
}

impl CrystalId {
    pub const ALL: [CrystalId; 5] = [
        CrystalId::Ktp,
        CrystalId::Rtp,
        CrystalId::Kta,
        CrystalId::Rta,
        CrystalId::Cta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CrystalId::Ktp => "KTP",
            CrystalId::Rtp => "RTP",
            CrystalId::Kta => "KTA",
            CrystalId::Rta => "RTA",
            CrystalId::Cta => "CTA",
        }
    }

    pub fn composition(self) -> &'static str {
        match self {
            CrystalId::Ktp => "KTiOPO4",
            CrystalId::Rtp => "RbTiOPO4",
            CrystalId::Kta => "KTiOAsO4",
            CrystalId::Rta => "RbTiOAsO4",
            CrystalId::Cta => "CsTiOAsO4",
        }
    }
}

impl fmt::Display for CrystalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CrystalId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let name = upper.strip_prefix("PP").unwrap_or(&upper);
        CrystalId::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown crystal `{s}`; expected one of KTP, RTP, KTA, RTA, CTA"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpticalAxis {
    X,
    Y,
    Z,
}

impl fmt::Display for OpticalAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpticalAxis::X => "x",
            OpticalAxis::Y => "y",
            OpticalAxis::Z => "z",
        })
    }
}

/// Functional form of the Sellmeier law. Coefficients are `[A, B, C, D, E, F]`.
///
/// * `Pole`:  n² = A + B/(λ² − C) + D/(λ² − E) − F·λ²
/// * `Ratio`: n² = A + B/(1 − C/λ²) + D/(1 − E/λ²) − F·λ²
///
/// A pole term with a zero numerator is disabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SellmeierForm {
    Pole,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sellmeier {
    pub form: SellmeierForm,
    pub coeffs: [f64; 6],
}

impl Sellmeier {
    pub fn new(form: SellmeierForm, coeffs: [f64; 6]) -> Self {
        Self { form, coeffs }
    }

    /// n²(λ), λ in µm.
    pub fn n_squared(&self, lambda: f64) -> f64 {
        let [a, b, c, d, e, f] = self.coeffs;
        let l2 = lambda * lambda;
        let term = |num: f64, pole: f64| -> f64 {
            if num == 0.0 {
                0.0
            } else {
                match self.form {
                    SellmeierForm::Pole => num / (l2 - pole),
                    SellmeierForm::Ratio => num / (1.0 - pole / l2),
                }
            }
        };
        a + term(b, c) + term(d, e) - f * l2
    }

    /// d(n²)/dλ, µm⁻¹.
    pub fn dn_squared_dlambda(&self, lambda: f64) -> f64 {
        let [_, b, c, d, e, f] = self.coeffs;
        let l2 = lambda * lambda;
        let term = |num: f64, pole: f64| -> f64 {
            if num == 0.0 {
                return 0.0;
            }
            let den = l2 - pole;
            match self.form {
                // d/dλ [B/(λ²−C)] = −2λB/(λ²−C)²
                SellmeierForm::Pole => -2.0 * lambda * num / (den * den),
                // B/(1−C/λ²) = Bλ²/(λ²−C)  →  −2BCλ/(λ²−C)²
                SellmeierForm::Ratio => -2.0 * num * pole * lambda / (den * den),
            }
        };
        term(b, c) + term(d, e) - 2.0 * f * lambda
    }

    /// Pole locations (in µm²) of the enabled terms.
    pub fn poles(&self) -> impl Iterator<Item = f64> + '_ {
        let [_, b, c, d, e, _] = self.coeffs;
        [(b, c), (d, e)]
            .into_iter()
            .filter(|(num, _)| *num != 0.0)
            .map(|(_, pole)| pole)
    }
}

/// Temperature correction Δn(λ, T) = n₁(λ)(T − t0) + n₂(λ)(T − t0)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoOptic {
    pub t0: f64,
    pub order1: [f64; 4],
    pub order2: [f64; 4],
}

impl ThermoOptic {
    pub fn none(t0: f64) -> Self {
        Self {
            t0,
            order1: [0.0; 4],
            order2: [0.0; 4],
        }
    }

    fn laurent(a: &[f64; 4], lambda: f64) -> f64 {
        let inv = 1.0 / lambda;
        a[0] + inv * (a[1] + inv * (a[2] + inv * a[3]))
    }

    fn laurent_derivative(a: &[f64; 4], lambda: f64) -> f64 {
        let inv = 1.0 / lambda;
        -inv * inv * (a[1] + inv * (2.0 * a[2] + inv * 3.0 * a[3]))
    }

    pub fn delta_n(&self, lambda: f64, t: f64) -> f64 {
        let dt = t - self.t0;
        Self::laurent(&self.order1, lambda) * dt + Self::laurent(&self.order2, lambda) * dt * dt
    }

    pub fn d_delta_n_dlambda(&self, lambda: f64, t: f64) -> f64 {
        let dt = t - self.t0;
        Self::laurent_derivative(&self.order1, lambda) * dt
            + Self::laurent_derivative(&self.order2, lambda) * dt * dt
    }
}

/// Refractive-index law of one crystal axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionModel {
    pub crystal: CrystalId,
    pub axis: OpticalAxis,
    pub sellmeier: Sellmeier,
    pub thermo: ThermoOptic,
    /// Validity window in µm.
    pub lambda_range: (f64, f64),
    /// Validity window in °C.
    pub temp_range: (f64, f64),
    pub source: String,
}

impl DispersionModel {
    /// Short tag of the source: the citation text before the first `:`.
    pub fn source_tag(&self) -> &str {
        source_tag(&self.source)
    }

    pub fn label(&self) -> String {
        format!("{} n_{} [{}]", self.crystal, self.axis, self.source_tag())
    }

    fn check(&self, lambda: f64, t: f64) -> Result<()> {
        let (lo, hi) = self.lambda_range;
        if !(lo..=hi).contains(&lambda) {
            return Err(Error::OutOfRange {
                quantity: "wavelength (um)",
                value: lambda,
                lo,
                hi,
                model: self.label(),
            });
        }
        let (lo, hi) = self.temp_range;
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange {
                quantity: "temperature (degC)",
                value: t,
                lo,
                hi,
                model: self.label(),
            });
        }
        Ok(())
    }

    /// n(λ, T), λ in µm, T in °C.
    pub fn refractive_index(&self, lambda: f64, t: f64) -> Result<f64> {
        self.check(lambda, t)?;
        Ok(self.sellmeier.n_squared(lambda).sqrt() + self.thermo.delta_n(lambda, t))
    }

    /// Analytic dn/dλ in µm⁻¹.
    pub fn dn_dlambda(&self, lambda: f64, t: f64) -> Result<f64> {
        self.check(lambda, t)?;
        let n_s = self.sellmeier.n_squared(lambda).sqrt();
        Ok(self.sellmeier.dn_squared_dlambda(lambda) / (2.0 * n_s)
            + self.thermo.d_delta_n_dlambda(lambda, t))
    }

    /// Group index n − λ·dn/dλ; the group velocity is c divided by this.
    pub fn inverse_group_velocity(&self, lambda: f64, t: f64) -> Result<f64> {
        Ok(self.refractive_index(lambda, t)? - lambda * self.dn_dlambda(lambda, t)?)
    }

    /// k = 2πn/λ in rad/µm.
    pub fn wave_number(&self, lambda: f64, t: f64) -> Result<f64> {
        Ok(2.0 * std::f64::consts::PI * self.refractive_index(lambda, t)? / lambda)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let (lo, hi) = self.lambda_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
            return Err(format!(
                "lambda_range_um [{lo}, {hi}] must be positive and non-empty"
            ));
        }
        let (tlo, thi) = self.temp_range;
        if !(tlo.is_finite() && thi.is_finite() && tlo <= thi) {
            return Err(format!("temp_range_c [{tlo}, {thi}] is invalid"));
        }
        if !(tlo..=thi).contains(&self.thermo.t0) {
            return Err(format!(
                "t0_celsius {} outside temp_range_c",
                self.thermo.t0
            ));
        }
        let all = self
            .sellmeier
            .coeffs
            .iter()
            .chain(&self.thermo.order1)
            .chain(&self.thermo.order2);
        if all.clone().any(|c| !c.is_finite()) {
            return Err("non-finite coefficient".into());
        }
        for pole in self.sellmeier.poles() {
            if (lo * lo..=hi * hi).contains(&pole) {
                return Err(format!(
                    "pole at lambda^2 = {pole} um^2 lies inside lambda_range_um [{lo}, {hi}]"
                ));
            }
        }
        const SAMPLES: usize = 512;
        for k in 0..=SAMPLES {
            let lambda = lo + (hi - lo) * k as f64 / SAMPLES as f64;
            let n2 = self.sellmeier.n_squared(lambda);
            if !(n2 > 1.0 && n2.is_finite()) {
                return Err(format!("n^2 = {n2} <= 1 at {lambda} um"));
            }
        }
        Ok(())
    }
}

pub(crate) fn source_tag(source: &str) -> &str {
    source.split_once(':').map_or(source, |(tag, _)| tag).trim()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatabase {
    schema_version: u32,
    models: Vec<RawModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    crystal: CrystalId,
    axis: OpticalAxis,
    form: SellmeierForm,
    coeffs: [f64; 6],
    t0_celsius: f64,
    thermo_order1: [f64; 4],
    thermo_order2: [f64; 4],
    lambda_range_um: [f64; 2],
    temp_range_c: [f64; 2],
    source: String,
    default: bool,
}

impl From<&RawModel> for DispersionModel {
    fn from(r: &RawModel) -> Self {
        DispersionModel {
            crystal: r.crystal,
            axis: r.axis,
            sellmeier: Sellmeier::new(r.form, r.coeffs),
            thermo: ThermoOptic {
                t0: r.t0_celsius,
                order1: r.thermo_order1,
                order2: r.thermo_order2,
            },
            lambda_range: (r.lambda_range_um[0], r.lambda_range_um[1]),
            temp_range: (r.temp_range_c[0], r.temp_range_c[1]),
            source: r.source.clone(),
        }
    }
}

pub const SCHEMA_VERSION: u32 = 1;

const BUNDLED: &str = include_str!("../data/coefficients.json");

/// Validated, immutable collection of dispersion models.
#[derive(Debug, Clone)]
pub struct CoefficientDatabase {
    models: Vec<DispersionModel>,
    defaults: BTreeMap<(CrystalId, OpticalAxis), usize>,
}

impl CoefficientDatabase {
    /// The coefficient file shipped with the crate.
    pub fn bundled_text() -> &'static str {
        BUNDLED
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled coefficient database is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawDatabase = serde_json::from_str(text).map_err(|e| Error::Database {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Database {
                location: "schema_version".into(),
                message: format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    raw.schema_version
                ),
            });
        }

        let mut models = Vec::with_capacity(raw.models.len());
        let mut keys = HashSet::new();
        let mut defaults = BTreeMap::new();
        for (idx, r) in raw.models.iter().enumerate() {
            let location = || format!("models[{idx}] ({} {})", r.crystal, r.axis);
            let model = DispersionModel::from(r);
            model.validate().map_err(|message| Error::Database {
                location: location(),
                message,
            })?;
            let key = (r.crystal, r.axis, model.source_tag().to_owned());
            if !keys.insert(key) {
                return Err(Error::Database {
                    location: location(),
                    message: format!("duplicate source tag `{}`", model.source_tag()),
                });
            }
            if r.default && defaults.insert((r.crystal, r.axis), idx).is_some() {
                return Err(Error::Database {
                    location: location(),
                    message: "more than one default model for this crystal axis".into(),
                });
            }
            models.push(model);
        }

        for crystal in CrystalId::ALL {
            for axis in [OpticalAxis::Y, OpticalAxis::Z] {
                if !defaults.contains_key(&(crystal, axis)) {
                    return Err(Error::Database {
                        location: "models".into(),
                        message: format!("missing default model for ({crystal}, {axis})"),
                    });
                }
            }
        }

        Ok(Self { models, defaults })
    }

    /// Serializes back to the file schema. Coefficients round-trip exactly.
    pub fn to_json(&self) -> String {
        let default_idx: HashSet<usize> = self.defaults.values().copied().collect();
        let models = self
            .models
            .iter()
            .enumerate()
            .map(|(idx, m)| RawModel {
                crystal: m.crystal,
                axis: m.axis,
                form: m.sellmeier.form,
                coeffs: m.sellmeier.coeffs,
                t0_celsius: m.thermo.t0,
                thermo_order1: m.thermo.order1,
                thermo_order2: m.thermo.order2,
                lambda_range_um: [m.lambda_range.0, m.lambda_range.1],
                temp_range_c: [m.temp_range.0, m.temp_range.1],
                source: m.source.clone(),
                default: default_idx.contains(&idx),
            })
            .collect();
        let raw = RawDatabase {
            schema_version: SCHEMA_VERSION,
            models,
        };
        serde_json::to_string_pretty(&raw).expect("database serializes")
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[DispersionModel] {
        &self.models
    }

    pub fn default_model(&self, crystal: CrystalId, axis: OpticalAxis) -> Result<&DispersionModel> {
        self.defaults
            .get(&(crystal, axis))
            .map(|&i| &self.models[i])
            .ok_or(Error::MissingModel {
                crystal,
                axis,
                tag: None,
            })
    }

    /// Model for `(crystal, axis)` with the given source tag, or the default.
    pub fn model(
        &self,
        crystal: CrystalId,
        axis: OpticalAxis,
        tag: Option<&str>,
    ) -> Result<&DispersionModel> {
        match tag {
            None => self.default_model(crystal, axis),
            Some(tag) => self
                .models
                .iter()
                .find(|m| m.crystal == crystal && m.axis == axis && m.source_tag() == tag)
                .ok_or_else(|| Error::MissingModel {
                    crystal,
                    axis,
                    tag: Some(tag.to_owned()),
                }),
        }
    }

    /// Distinct source tags available for a crystal, in file order.
    pub fn source_tags(&self, crystal: CrystalId) -> Vec<&str> {
        let mut tags: Vec<&str> = Vec::new();
        for m in self.models.iter().filter(|m| m.crystal == crystal) {
            if !tags.contains(&m.source_tag()) {
                tags.push(m.source_tag());
            }
        }
        tags
    }
}
