//! Besov functionals.
//!
//! `E_p(u, t)` is piecewise constant in `t` with breakpoints exactly at the
//! pairwise distances of the region, so the scale integral of the
//! modulus-of-smoothness norm is evaluated in closed form per breakpoint
//! interval instead of by quadrature.

use rayon::prelude::*;

use crate::functionals::{lp_norm, BesovParams, BesovQ, ScalarField};
use crate::space::{ball_members, Ball, PointCloudSpace};
use crate::{Error, Result};

/// Oscillation functional: the region-integrated mass-weighted mean of
/// `|u(y) - u(z)|^p` over open balls `B(y, t)`, to the power `1/p`. Points
/// whose ball contains only themselves contribute zero through the singleton
/// mean.
pub fn ep_functional(space: &PointCloudSpace, u: &ScalarField, t: f64, p: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    u.validate(space)?;
    let region = u.region;
    let ids = space.ids(region);
    let total: f64 = ids
        .par_iter()
        .enumerate()
        .map(|(slot, &y)| {
            let members = ball_members(space, &Ball::at_point(y, t), region).expect("valid ball");
            let uy = u.values[slot];
            let mut num = 0.0;
            let mut den = 0.0;
            for &z in &members {
                let w = space.weight(z);
                num += w * (uy - u.values[space.region_slot(z)]).abs().powf(p);
                den += w;
            }
            space.weight(y) * num / den
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total.powf(1.0 / p))
}

/// Drives `emit(a, b, ep_pow_p)` over the maximal intervals `(a, b]` of
/// `(0, r_sup]` on which `E_p(u, .)^p` is constant, in increasing order.
fn sweep_intervals(
    space: &PointCloudSpace,
    u: &ScalarField,
    p: f64,
    r_sup: f64,
    mut emit: impl FnMut(f64, f64, f64),
) {
    let region = u.region;
    let ids = space.ids(region);
    let n = ids.len();
    let pairs = space.sorted_pairs(region);
    let w: Vec<f64> = ids.iter().map(|&id| space.weight(id)).collect();

    let mut num = vec![0.0f64; n];
    let mut den = w.clone();
    let mut total = 0.0f64; // sum_y w_y * num_y / den_y
    let mut prev = 0.0f64;
    let mut k = 0usize;
    let mut since_refresh = 0usize;
    while k < pairs.len() {
        let d = pairs.dist[k];
        if d > 0.0 {
            emit(prev, d.min(r_sup), total);
            prev = d;
        }
        if prev >= r_sup {
            return;
        }
        // Apply every pair at this exact distance.
        while k < pairs.len() && pairs.dist[k] == d {
            let (i, j) = (pairs.a[k] as usize, pairs.b[k] as usize);
            let osc = (u.values[i] - u.values[j]).abs().powf(p);
            total -= w[i] * num[i] / den[i] + w[j] * num[j] / den[j];
            num[i] += w[j] * osc;
            den[i] += w[j];
            num[j] += w[i] * osc;
            den[j] += w[i];
            total += w[i] * num[i] / den[i] + w[j] * num[j] / den[j];
            k += 1;
            since_refresh += 1;
        }
        // Re-sum occasionally so incremental rounding cannot accumulate.
        if since_refresh >= n.max(64) {
            total = (0..n).map(|i| w[i] * num[i] / den[i]).sum();
            since_refresh = 0;
        }
    }
    if prev < r_sup {
        total = (0..n).map(|i| w[i] * num[i] / den[i]).sum();
        emit(prev, r_sup, total);
    }
}

/// Modulus-of-smoothness Besov norm, exact per breakpoint interval.
/// Returns `(seminorm, full norm)`.
pub fn besov_norm_gks(
    space: &PointCloudSpace,
    u: &ScalarField,
    params: &BesovParams,
) -> Result<(f64, f64)> {
    u.validate(space)?;
    let BesovParams { alpha, p, q, r_sup } = *params;
    let semi = match q {
        BesovQ::Finite(q) => {
            let aq = alpha * q;
            let mut acc = 0.0f64;
            sweep_intervals(space, u, p, r_sup, |a, b, s| {
                if s <= 0.0 || b <= a {
                    return;
                }
                let eq = s.powf(q / p);
                let weight = if aq > 0.0 {
                    (a.powf(-aq) - b.powf(-aq)) / aq
                } else {
                    (b / a).ln()
                };
                acc += eq * weight;
            });
            acc.powf(1.0 / q)
        }
        BesovQ::Infinity => {
            let mut sup = 0.0f64;
            sweep_intervals(space, u, p, r_sup, |a, b, s| {
                if s <= 0.0 || b <= a {
                    return;
                }
                // E_p/t^alpha is non-increasing on the interval, so its
                // supremum sits at the left endpoint.
                let v = if alpha > 0.0 { s.powf(1.0 / p) / a.powf(alpha) } else { s.powf(1.0 / p) };
                sup = sup.max(v);
            });
            sup
        }
    };
    Ok((semi, lp_norm(space, u, p) + semi))
}

/// Pair-integral (Bourdon-Pajot) Besov norm: the double sum over distinct
/// pairs closer than `r_sup` of `|u(w)-u(z)|^p / (d^{alpha p} * mass(B(w,d)))`
/// with open-ball masses. Returns `(seminorm, full norm)`.
pub fn besov_norm_bp(
    space: &PointCloudSpace,
    u: &ScalarField,
    alpha: f64,
    p: f64,
    r_sup: f64,
) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1)")));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} below 1")));
    }
    u.validate(space)?;
    let region = u.region;
    let ids = space.ids(region);
    let nbrs = space.neighbor_lists(region);
    let ap = alpha * p;

    let partials: Vec<Result<f64>> = (0..ids.len())
        .into_par_iter()
        .map(|wslot| {
            let row = nbrs.row(wslot);
            let mw = space.weight(ids[wslot]);
            let uw = u.values[wslot];
            let mut acc = 0.0f64;
            let mut k = 0usize;
            let mut group_start_mass = 0.0f64; // open-ball mass below the current distance
            let mut prev_d = -1.0f64;
            while k < row.dist.len() {
                let d = row.dist[k];
                if d >= r_sup {
                    break;
                }
                if d > prev_d {
                    group_start_mass = if k == 0 { 0.0 } else { row.cum_w[k - 1] };
                    prev_d = d;
                }
                let zslot = row.slot[k] as usize;
                if zslot != wslot {
                    if d == 0.0 {
                        return Err(Error::DegenerateMetric(ids[wslot], ids[zslot]));
                    }
                    let mz = space.weight(ids[zslot]);
                    let osc = (uw - u.values[zslot]).abs().powf(p);
                    acc += mw * mz * osc / (d.powf(ap) * group_start_mass);
                }
                k += 1;
            }
            Ok(acc)
        })
        .collect();
    let mut total = 0.0;
    for p in partials {
        total += p?;
    }
    let semi = total.powf(1.0 / p);
    Ok((semi, lp_norm(space, u, p) + semi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{MetricSpec, PointRecord, Region};

    fn two_point_space() -> PointCloudSpace {
        PointCloudSpace::new(
            vec![
                PointRecord { coords: vec![0.0, 0.0], region: Region::Boundary, weight: 1.0 },
                PointRecord { coords: vec![1.0, 0.0], region: Region::Boundary, weight: 1.0 },
            ],
            MetricSpec::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn ep_two_points_hand_computed() {
        let space = two_point_space();
        let u = ScalarField { region: Region::Boundary, values: vec![0.0, 1.0] };
        // t <= 1: each ball is a singleton, E_p = 0.
        assert_eq!(ep_functional(&space, &u, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(ep_functional(&space, &u, 0.5, 2.0).unwrap(), 0.0);
        // t > 1: each point sees the other with mean (0 + 1)/2, summed over
        // both points: (1/2 + 1/2)^(1/2) = 1.
        let e = ep_functional(&space, &u, 1.5, 2.0).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ep_constant_field_is_zero() {
        let space = two_point_space();
        let u = ScalarField::constant(&space, Region::Boundary, 3.7);
        for t in [0.1, 1.0, 10.0] {
            assert_eq!(ep_functional(&space, &u, t, 1.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn bp_two_points_open_ball_convention() {
        let space = two_point_space();
        let u = ScalarField { region: Region::Boundary, values: vec![0.0, 1.0] };
        // alpha = 0, p = 1, R = 2: each ordered pair contributes
        // 1 / mass(B(w, 1)) = 1 since the open unit ball holds only w.
        let (semi, full) = besov_norm_bp(&space, &u, 0.0, 1.0, 2.0).unwrap();
        assert!((semi - 2.0).abs() < 1e-14);
        assert!((full - (2.0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn gks_constant_field() {
        let space = two_point_space();
        let u = ScalarField::constant(&space, Region::Boundary, 2.0);
        let params = BesovParams::new(0.5, 2.0, BesovQ::Finite(2.0), 4.0).unwrap();
        let (semi, full) = besov_norm_gks(&space, &u, &params).unwrap();
        assert_eq!(semi, 0.0);
        let lp = lp_norm(&space, &u, 2.0);
        assert!((full - lp).abs() < 1e-14);
    }
}
