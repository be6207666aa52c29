//! Fractional maximal operator from interior data to the boundary.

use rayon::prelude::*;

use crate::functionals::ScalarField;
use crate::space::{PointCloudSpace, Region};
use crate::{Error, Result};

/// `M_{alpha,p} f(z) = sup_{0 < r < 2 diam(boundary)}
/// (r^alpha mean_{B(z,r) cap interior} |f|^p)^(1/p)` for every boundary `z`.
///
/// The mean is constant between consecutive breakpoint distances and
/// `r^alpha` is nondecreasing, so the supremum is attained at the right
/// endpoint of each breakpoint interval.
pub fn frac_maximal(
    space: &PointCloudSpace,
    f: &ScalarField,
    alpha: f64,
    p: f64,
) -> Result<ScalarField> {
    if f.region != Region::Interior {
        return Err(Error::InvalidParameter("fractional maximal needs an interior field".into()));
    }
    if !(alpha >= 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidParameter("need alpha >= 0 and p >= 1".into()));
    }
    f.validate(space)?;
    let cap = 2.0 * space.diam(Region::Boundary);
    if !(cap > 0.0) {
        return Err(Error::EmptyBoundary);
    }
    let interior = space.ids(Region::Interior);
    let boundary = space.ids(Region::Boundary);

    let values: Vec<Result<f64>> = boundary
        .par_iter()
        .map(|&z| {
            let mut entries: Vec<(f64, f64, f64)> = interior
                .iter()
                .enumerate()
                .map(|(slot, &x)| {
                    let w = space.weight(x);
                    (space.dist(z, x), w, w * f.values[slot].abs().powf(p))
                })
                .collect();
            entries.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if entries.is_empty() || entries[0].0 >= cap {
                return Err(Error::RadiusBelowResolution(z));
            }
            let mut mass = 0.0;
            let mut num = 0.0;
            let mut best = 0.0f64;
            let mut k = 0usize;
            while k < entries.len() {
                let d = entries[k].0;
                if d >= cap {
                    break;
                }
                while k < entries.len() && entries[k].0 == d {
                    mass += entries[k].1;
                    num += entries[k].2;
                    k += 1;
                }
                // Membership stays fixed for r in (d, next), so the best
                // admissible radius is the interval's right end.
                let r_star = if k < entries.len() {
                    entries[k].0.min(cap)
                } else {
                    cap
                };
                best = best.max((r_star.powf(alpha) * num / mass).powf(1.0 / p));
            }
            Ok(best)
        })
        .collect();
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        out.push(v?);
    }
    Ok(ScalarField {
        region: Region::Boundary,
        values: out,
    })
}
