//! Function-space functionals on a region of a point cloud: Besov norms in
//! both forms, Hajlasz and Poincare gradients, the fractional maximal
//! operator, the row-selection lemma and the inequality suite.

mod besov;
mod gradients;
mod maximal;
mod selection;
pub mod suite;

pub use besov::{besov_norm_bp, besov_norm_gks, ep_functional};
pub use gradients::{
    hajlasz_averaged_gradient, hajlasz_feasible_gradient, infimal_pi_transform, lip_field,
    verify_hajlasz, verify_pi, PiViolation,
};
pub use maximal::frac_maximal;
pub use selection::{select_small_row, selection_guarantee};

use serde::{Deserialize, Serialize};

use crate::space::{PointCloudSpace, PointId, Region};
use crate::{Error, Result};

/// Real-valued samples on one region, aligned with `space.ids(region)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub region: Region,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(space: &PointCloudSpace, region: Region, c: f64) -> Self {
        ScalarField {
            region,
            values: vec![c; space.ids(region).len()],
        }
    }

    pub fn from_fn(
        space: &PointCloudSpace,
        region: Region,
        f: impl Fn(&[f64]) -> f64,
    ) -> Self {
        ScalarField {
            region,
            values: space.ids(region).iter().map(|&id| f(space.point(id))).collect(),
        }
    }

    pub fn get(&self, space: &PointCloudSpace, id: PointId) -> f64 {
        debug_assert_eq!(space.region_of(id), self.region);
        self.values[space.region_slot(id)]
    }

    pub fn validate(&self, space: &PointCloudSpace) -> Result<()> {
        if self.values.len() != space.ids(self.region).len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, region has {} points",
                self.values.len(),
                space.ids(self.region).len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field has non-finite values".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            region: self.region,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Weighted `L^p` norm of a field over its region.
pub fn lp_norm(space: &PointCloudSpace, field: &ScalarField, p: f64) -> f64 {
    let ids = space.ids(field.region);
    let mut acc = 0.0;
    for (slot, &id) in ids.iter().enumerate() {
        acc += space.weight(id) * field.values[slot].abs().powf(p);
    }
    acc.powf(1.0 / p)
}

/// Mass-weighted mean of a field over its whole region.
pub fn region_mean(space: &PointCloudSpace, field: &ScalarField) -> f64 {
    let ids = space.ids(field.region);
    let mut num = 0.0;
    let mut den = 0.0;
    for (slot, &id) in ids.iter().enumerate() {
        num += space.weight(id) * field.values[slot];
        den += space.weight(id);
    }
    num / den
}

/// Second Besov exponent; infinity is a first-class value with closed-form
/// interval suprema, not a large-q stand-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BesovQ {
    Finite(f64),
    Infinity,
}

/// Parameters of the modulus-of-smoothness Besov norm: smoothness `alpha`,
/// integrability `p`, fine index `q` and the upper truncation `r_sup` of the
/// scale integral.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BesovParams {
    pub alpha: f64,
    pub p: f64,
    pub q: BesovQ,
    pub r_sup: f64,
}

impl BesovParams {
    pub fn new(alpha: f64, p: f64, q: BesovQ, r_sup: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} below 1")));
        }
        if let BesovQ::Finite(q) = q {
            if !(q > 0.0) {
                return Err(Error::InvalidParameter(format!("q = {q} not positive")));
            }
        }
        if !(r_sup > 0.0) {
            return Err(Error::InvalidParameter("r_sup must be positive".into()));
        }
        Ok(BesovParams { alpha, p, q, r_sup })
    }

    /// Default truncation for a region: twice its diameter.
    pub fn default_r(space: &PointCloudSpace, region: Region) -> f64 {
        2.0 * space.diam(region)
    }
}

/// Gradient notion paired with a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GradientFlavor {
    Hajlasz { alpha: f64 },
    Pi { q: f64, lambda: f64 },
    LipField,
}

/// A function/gradient couple; the flavor states which inequality the couple
/// is supposed to satisfy (checked by the `verify_*` operations).
#[derive(Debug, Clone)]
pub struct GradientPair {
    pub u: ScalarField,
    pub g: ScalarField,
    pub flavor: GradientFlavor,
}
