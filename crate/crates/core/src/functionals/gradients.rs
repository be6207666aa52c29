//! Hajlasz gradients, Poincare-inequality verification and Lipschitz-slope
//! surrogates.

use rayon::prelude::*;

use crate::functionals::{GradientFlavor, GradientPair, ScalarField};
use crate::space::{ball_members, Ball, PointCloudSpace, PointId, Region};
use crate::{Error, Result};

/// The canonical feasible Hajlasz gradient
/// `g(x) = sup_{y != x} |u(x)-u(y)| / (2 d(x,y)^alpha)`.
///
/// The returned couple satisfies the Hajlasz inequality on every pair; there
/// is no exceptional set on a finite cloud.
pub fn hajlasz_feasible_gradient(
    space: &PointCloudSpace,
    u: &ScalarField,
    alpha: f64,
) -> Result<ScalarField> {
    u.validate(space)?;
    let ids = space.ids(u.region);
    let values: Vec<f64> = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let mut g = 0.0f64;
            for j in 0..ids.len() {
                if i == j {
                    continue;
                }
                let diff = (u.values[i] - u.values[j]).abs();
                if diff > 0.0 {
                    g = g.max(diff / (2.0 * space.dist(ids[i], ids[j]).powf(alpha)));
                }
            }
            g
        })
        .collect();
    Ok(ScalarField {
        region: u.region,
        values,
    })
}

/// The averaged Hajlasz gradient
/// `g(z) = 2^(Q+alpha)/c_Q * sup_r mean_{B(z,r)} |u(z)-u(y)| r^(-alpha)`,
/// with the supremum taken over the breakpoint radii of the region.
pub fn hajlasz_averaged_gradient(
    space: &PointCloudSpace,
    u: &ScalarField,
    alpha: f64,
    q_exp: f64,
    c_q: f64,
) -> Result<ScalarField> {
    u.validate(space)?;
    if !(c_q > 0.0) {
        return Err(Error::InvalidParameter("c_q must be positive".into()));
    }
    let ids = space.ids(u.region);
    let nbrs = space.neighbor_lists(u.region);
    let factor = 2.0f64.powf(q_exp + alpha) / c_q;
    let values: Vec<f64> = (0..ids.len())
        .into_par_iter()
        .map(|z| {
            let row = nbrs.row(z);
            let uz = u.values[z];
            let mut num = 0.0f64;
            let mut sup = 0.0f64;
            let mut k = 0usize;
            while k < row.dist.len() {
                let d = row.dist[k];
                // Fold in the whole tie group before scoring the radius.
                while k < row.dist.len() && row.dist[k] == d {
                    let w = space.weight(ids[row.slot[k] as usize]);
                    num += w * (uz - u.values[row.slot[k] as usize]).abs();
                    k += 1;
                }
                if d > 0.0 {
                    let mean = num / row.cum_w[k - 1];
                    sup = sup.max(mean / d.powf(alpha));
                }
            }
            factor * sup
        })
        .collect();
    Ok(ScalarField {
        region: u.region,
        values,
    })
}

/// Max over ordered pairs of `|u(x)-u(y)| - d(x,y)^alpha (g(x)+g(y))`;
/// nonpositive means the couple is a valid Hajlasz pair.
pub fn verify_hajlasz(space: &PointCloudSpace, pair: &GradientPair) -> Result<f64> {
    let GradientFlavor::Hajlasz { alpha } = pair.flavor else {
        return Err(Error::InvalidParameter("pair is not flagged as Hajlasz".into()));
    };
    pair.u.validate(space)?;
    pair.g.validate(space)?;
    if pair.u.region != pair.g.region {
        return Err(Error::InvalidParameter("u and g live on different regions".into()));
    }
    let ids = space.ids(pair.u.region);
    let worst = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let mut w = f64::NEG_INFINITY;
            for j in (i + 1)..ids.len() {
                let d = space.dist(ids[i], ids[j]);
                let viol = (pair.u.values[i] - pair.u.values[j]).abs()
                    - d.powf(alpha) * (pair.g.values[i] + pair.g.values[j]);
                w = w.max(viol);
            }
            w
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(worst)
}

/// Worst Poincare-inequality violation over the test-ball family.
#[derive(Debug, Clone, Copy)]
pub struct PiViolation {
    pub max_violation: f64,
    pub worst_center: PointId,
    pub worst_radius: f64,
}

/// Dyadic test radii between twice the region spacing and the diameter.
pub(crate) fn dyadic_test_radii(space: &PointCloudSpace, region: Region) -> Vec<f64> {
    let diam = space.diam(region);
    let floor = 2.0 * space.min_spacing(region);
    let mut out = Vec::new();
    let mut r = diam;
    while r >= floor && out.len() < 40 {
        out.push(r);
        r *= 0.5;
    }
    out
}

/// Test-ball centers: the whole closure when the field lives on the
/// interior, the boundary otherwise.
fn family_centers(space: &PointCloudSpace, region: Region) -> Vec<PointId> {
    match region {
        Region::Interior => {
            let mut c = space.ids(Region::Interior).to_vec();
            c.extend_from_slice(space.ids(Region::Boundary));
            c
        }
        Region::Boundary => space.ids(Region::Boundary).to_vec(),
    }
}

/// Checks `mean_B |u - u_B| <= rad(B) (mean_{lambda B} g^q)^(1/q)` on every
/// family ball and reports the worst gap.
pub fn verify_pi(space: &PointCloudSpace, pair: &GradientPair) -> Result<PiViolation> {
    let GradientFlavor::Pi { q, lambda } = pair.flavor else {
        return Err(Error::InvalidParameter("pair is not flagged as PI".into()));
    };
    if !(q > 0.0) || !(lambda >= 1.0) {
        return Err(Error::InvalidParameter("need q > 0 and lambda >= 1".into()));
    }
    pair.u.validate(space)?;
    pair.g.validate(space)?;
    let region = pair.u.region;
    let radii = dyadic_test_radii(space, region);
    let centers = family_centers(space, region);

    let rows: Vec<(f64, PointId, f64)> = centers
        .par_iter()
        .map(|&c| {
            let mut worst = (f64::NEG_INFINITY, c, 0.0);
            for &r in &radii {
                let members =
                    ball_members(space, &Ball::at_point(c, r), region).expect("valid ball");
                if members.is_empty() {
                    continue;
                }
                let mut mass = 0.0;
                let mut mean = 0.0;
                for &id in &members {
                    let w = space.weight(id);
                    mass += w;
                    mean += w * pair.u.values[space.region_slot(id)];
                }
                mean /= mass;
                let mut lhs = 0.0;
                for &id in &members {
                    lhs += space.weight(id)
                        * (pair.u.values[space.region_slot(id)] - mean).abs();
                }
                lhs /= mass;
                let dilated = if lambda == 1.0 {
                    members
                } else {
                    ball_members(space, &Ball::at_point(c, lambda * r), region)
                        .expect("valid ball")
                };
                let mut gmass = 0.0;
                let mut gmean = 0.0;
                for &id in &dilated {
                    let w = space.weight(id);
                    gmass += w;
                    gmean += w * pair.g.values[space.region_slot(id)].powf(q);
                }
                gmean /= gmass;
                let rhs = r * gmean.powf(1.0 / q);
                let viol = lhs - rhs;
                if viol > worst.0 {
                    worst = (viol, c, r);
                }
            }
            worst
        })
        .collect();
    let mut best = PiViolation {
        max_violation: f64::NEG_INFINITY,
        worst_center: centers[0],
        worst_radius: 0.0,
    };
    for (v, c, r) in rows {
        if v > best.max_violation {
            best = PiViolation {
                max_violation: v,
                worst_center: c,
                worst_radius: r,
            };
        }
    }
    Ok(best)
}

/// Non-centered maximal transform `h = (M g^q)^(1/q)` over the test-ball
/// family (singletons included, so `h >= g` pointwise). Whenever `(u, g)`
/// passes [`verify_pi`] with dilation 1, the couple `(u, h)` satisfies the
/// infimal form `mean_B |u - u_B| <= rad(B) inf_B h` on every family ball.
pub fn infimal_pi_transform(
    space: &PointCloudSpace,
    g: &ScalarField,
    q: f64,
) -> Result<ScalarField> {
    if !(q > 0.0) {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    g.validate(space)?;
    let region = g.region;
    let ids = space.ids(region);
    let radii = dyadic_test_radii(space, region);
    let centers = family_centers(space, region);

    let mut hq: Vec<f64> = g.values.iter().map(|v| v.powf(q)).collect();
    let updates: Vec<Vec<(usize, f64)>> = centers
        .par_iter()
        .map(|&c| {
            let mut ups = Vec::new();
            for &r in &radii {
                let members =
                    ball_members(space, &Ball::at_point(c, r), region).expect("valid ball");
                if members.is_empty() {
                    continue;
                }
                let mut mass = 0.0;
                let mut mean = 0.0;
                for &id in &members {
                    let w = space.weight(id);
                    mass += w;
                    mean += w * g.values[space.region_slot(id)].powf(q);
                }
                mean /= mass;
                for &id in &members {
                    ups.push((space.region_slot(id), mean));
                }
            }
            ups
        })
        .collect();
    for ups in updates {
        for (slot, mean) in ups {
            if mean > hq[slot] {
                hq[slot] = mean;
            }
        }
    }
    let _ = ids;
    Ok(ScalarField {
        region,
        values: hq.iter().map(|v| v.powf(1.0 / q)).collect(),
    })
}

/// Discrete pointwise slope `max_{0 < d(x,y) < rho_c} |u(x)-u(y)|/d(x,y)`,
/// the upper-gradient surrogate for locally Lipschitz fields.
pub fn lip_field(space: &PointCloudSpace, u: &ScalarField, rho_c: f64) -> Result<ScalarField> {
    if !(rho_c > 0.0) {
        return Err(Error::InvalidParameter("connectivity radius must be positive".into()));
    }
    u.validate(space)?;
    let region = u.region;
    let ids = space.ids(region);
    let values: Vec<f64> = ids
        .par_iter()
        .enumerate()
        .map(|(slot, &id)| {
            let members =
                ball_members(space, &Ball::at_point(id, rho_c), region).expect("valid ball");
            let mut lip = 0.0f64;
            for &other in &members {
                if other == id {
                    continue;
                }
                let d = space.dist(id, other);
                if d > 0.0 {
                    lip = lip.max((u.values[slot] - u.values[space.region_slot(other)]).abs() / d);
                }
            }
            lip
        })
        .collect();
    Ok(ScalarField { region, values })
}
