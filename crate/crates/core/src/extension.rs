//! Extension operators over a Whitney cover: the linear extension of Besov
//! boundary data through patch averages and the partition of unity, and the
//! nonlinear layered extension of `L^p` boundary data through Lipschitz
//! approximations glued by distance cutoffs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::functionals::{besov_norm_gks, lip_field, lp_norm, BesovParams, BesovQ, ScalarField};
use crate::space::{ball_members, Ball, PointCloudSpace, PointId, Region};
use crate::trace::{smallest_resolvable_radius, trace_at_radius};
use crate::whitney::{boundary_patch, partition_of_unity, WhitneyCover};
use crate::{Error, Result};

/// Patch averages of the boundary field, one per cover ball.
fn patch_averages(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    f: &ScalarField,
) -> Result<Vec<f64>> {
    f.validate(space)?;
    if f.region != Region::Boundary {
        return Err(Error::InvalidParameter("extension starts from boundary data".into()));
    }
    Ok((0..cover.n_balls())
        .into_par_iter()
        .map(|bi| {
            let mut num = 0.0;
            let mut den = 0.0;
            for &q in cover.patch1(bi) {
                let w = space.weight(q);
                num += w * f.values[space.region_slot(q)];
                den += w;
            }
            num / den
        })
        .collect())
}

/// Linear extension: at every interior point, the partition-weighted
/// combination of the boundary patch averages. A convex combination, so the
/// extension obeys the maximum principle.
pub fn extend_besov(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    f: &ScalarField,
) -> Result<ScalarField> {
    let averages = patch_averages(space, cover, f)?;
    extend_with_averages(space, cover, &averages)
}

fn extend_with_averages(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    averages: &[f64],
) -> Result<ScalarField> {
    let interior = space.ids(Region::Interior);
    let values: Vec<Result<f64>> = interior
        .par_iter()
        .map(|&x| {
            let weights = partition_of_unity(space, cover, x)?;
            Ok(weights.iter().map(|&(bi, w)| w * averages[bi]).sum())
        })
        .collect();
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        out.push(v?);
    }
    Ok(ScalarField {
        region: Region::Interior,
        values: out,
    })
}

/// Both sides of the shell estimate around a boundary point: the `L^p` mass
/// of the extension on `B(z,r)` intersected with the width-`rho` collar,
/// against `min(r,rho)^vartheta` times the `L^p` mass of the data on the
/// `2^8`-expanded boundary ball.
#[allow(clippy::too_many_arguments)]
pub fn shell_estimates(
    space: &PointCloudSpace,
    f: &ScalarField,
    extension: &ScalarField,
    z: PointId,
    r: f64,
    rho: f64,
    p: f64,
    vartheta: f64,
) -> Result<(f64, f64)> {
    if space.region_of(z) != Region::Boundary {
        return Err(Error::InvalidParameter(format!("{z} is not a boundary point")));
    }
    f.validate(space)?;
    extension.validate(space)?;
    let mut lhs = 0.0;
    for x in ball_members(space, &Ball::at_point(z, r), Region::Interior)? {
        if space.dist_to_boundary(x) < rho {
            lhs += space.weight(x) * extension.values[space.region_slot(x)].abs().powf(p);
        }
    }
    let mut data = 0.0;
    for w in ball_members(space, &Ball::at_point(z, 256.0 * r), Region::Boundary)? {
        data += space.weight(w) * f.values[space.region_slot(w)].abs().powf(p);
    }
    Ok((lhs, r.min(rho).powf(vartheta) * data))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionGradientReport {
    pub lip_norm: f64,
    pub besov_norm: f64,
    /// `||Lip Ef||_p / ||f||_{B^{1-vartheta/p}_{p,p}}`.
    pub ratio: f64,
    /// Worst `Lip Ef(x) * r / osc(U*)` over cover balls, the measured
    /// constant of the pointwise slope bound.
    pub pointwise_constant: f64,
}

/// `L^p` bound for the slope of the linear extension against the diagonal
/// Besov norm of the data, plus the per-ball pointwise bound.
pub fn extension_gradient_report(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    f: &ScalarField,
    p: f64,
    vartheta: f64,
) -> Result<ExtensionGradientReport> {
    if p < 1.0_f64.max(vartheta) {
        return Err(Error::InvalidParameter(format!(
            "need p >= max(1, vartheta), got p={p}, vartheta={vartheta}"
        )));
    }
    let ef = extend_besov(space, cover, f)?;
    let rho_c = 2.0 * space.min_spacing(Region::Interior);
    let lip = lip_field(space, &ef, rho_c)?;
    let lip_norm = lp_norm(space, &lip, p);
    let alpha = 1.0 - vartheta / p;
    let r_sup = BesovParams::default_r(space, Region::Boundary);
    let (_, besov) = besov_norm_gks(space, f, &BesovParams::new(alpha, p, BesovQ::Finite(p), r_sup)?)?;

    // Pointwise bound: within each ball the slope is controlled by the mean
    // pairwise oscillation of the data over the expanded patch, divided by
    // the ball radius.
    let pointwise: Vec<f64> = (0..cover.n_balls())
        .into_par_iter()
        .map(|bi| {
            let b = &cover.balls[bi];
            let patch = boundary_patch(space, cover, bi, 64.0).expect("patch");
            let osc = mean_pairwise_oscillation(space, f, &patch);
            if osc <= 0.0 {
                return 0.0;
            }
            let mut worst = 0.0f64;
            for x in
                ball_members(space, &Ball::at_point(b.center, b.radius), Region::Interior)
                    .expect("ball")
            {
                worst = worst.max(lip.values[space.region_slot(x)] * b.radius / osc);
            }
            worst
        })
        .collect();
    let pointwise_constant = pointwise.iter().fold(0.0f64, |a, &b| a.max(b));

    Ok(ExtensionGradientReport {
        lip_norm,
        besov_norm: besov,
        ratio: if besov > 0.0 { lip_norm / besov } else { 0.0 },
        pointwise_constant,
    })
}

/// Mean over patch pairs of `|f(z)-f(w)|`, computed by sorting the patch
/// values so the double sum reduces to prefix sums.
fn mean_pairwise_oscillation(space: &PointCloudSpace, f: &ScalarField, patch: &[PointId]) -> f64 {
    let mut vals: Vec<(f64, f64)> = patch
        .iter()
        .map(|&q| (f.values[space.region_slot(q)], space.weight(q)))
        .collect();
    vals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total_w: f64 = vals.iter().map(|v| v.1).sum();
    let mut cum_w = 0.0;
    let mut cum_wf = 0.0;
    let mut acc = 0.0;
    for &(v, w) in &vals {
        // sum over earlier entries of w_i w_j (v_j - v_i), v sorted.
        acc += w * (v * cum_w - cum_wf);
        cum_w += w;
        cum_wf += w * v;
    }
    2.0 * acc / (total_w * total_w)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipApprox {
    pub field: ScalarField,
    /// Slope budget chosen by the doubling search (a power of two).
    pub slope: f64,
    /// Lipschitz constant measured by a pairwise sweep.
    pub lip: f64,
    /// `||f_k - f||_p`.
    pub err_lp: f64,
}

/// Lipschitz approximations of boundary data by infimal convolution:
/// `f_1 = 0`, and for `k >= 2` the regularization
/// `min_w (f(w) + L d(z,w))` with the smallest power-of-two `L` bringing the
/// `L^p` error under `2^-k ||f||_p`.
pub fn lipschitz_approximation(
    space: &PointCloudSpace,
    f: &ScalarField,
    p: f64,
    k_max: usize,
) -> Result<Vec<LipApprox>> {
    f.validate(space)?;
    if f.region != Region::Boundary {
        return Err(Error::InvalidParameter("approximation works on boundary data".into()));
    }
    let f_norm = lp_norm(space, f, p);
    let mut out = Vec::with_capacity(k_max);
    out.push(LipApprox {
        field: ScalarField::constant(space, Region::Boundary, 0.0),
        slope: 0.0,
        lip: 0.0,
        err_lp: f_norm,
    });
    for k in 2..=k_max {
        let target = (0.5f64).powi(k as i32) * f_norm;
        let err_at = |l: f64| -> (ScalarField, f64) {
            let field = inf_convolution(space, f, l);
            let diff = ScalarField {
                region: Region::Boundary,
                values: field
                    .values
                    .iter()
                    .zip(&f.values)
                    .map(|(a, b)| a - b)
                    .collect(),
            };
            let err = lp_norm(space, &diff, p);
            (field, err)
        };
        // The error is nonincreasing in L, so scan powers of two.
        let mut m: i32 = 0;
        let (mut field, mut err) = err_at(1.0);
        if err <= target {
            while m > -20 {
                let (f2, e2) = err_at((2.0f64).powi(m - 1));
                if e2 <= target {
                    m -= 1;
                    field = f2;
                    err = e2;
                } else {
                    break;
                }
            }
        } else {
            while m < 62 {
                m += 1;
                let (f2, e2) = err_at((2.0f64).powi(m));
                field = f2;
                err = e2;
                if err <= target {
                    break;
                }
            }
        }
        let slope = (2.0f64).powi(m);
        let lip = measured_lip(space, &field);
        out.push(LipApprox {
            field,
            slope,
            lip,
            err_lp: err,
        });
    }
    Ok(out)
}

fn inf_convolution(space: &PointCloudSpace, f: &ScalarField, l: f64) -> ScalarField {
    let ids = space.ids(Region::Boundary);
    let values: Vec<f64> = (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..ids.len() {
                best = best.min(f.values[j] + l * space.dist(ids[i], ids[j]));
            }
            best
        })
        .collect();
    ScalarField {
        region: Region::Boundary,
        values,
    }
}

/// Lipschitz constant by pairwise sweep.
pub fn measured_lip(space: &PointCloudSpace, f: &ScalarField) -> f64 {
    let ids = space.ids(f.region);
    (0..ids.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in (i + 1)..ids.len() {
                let d = space.dist(ids[i], ids[j]);
                if d > 0.0 {
                    worst = worst.max((f.values[i] - f.values[j]).abs() / d);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Layer widths for the nonlinear extension: halving, capped so that the
/// slope budget `sum_k rho_k LIP(f_{k+1})` stays below the data norm.
pub fn layer_schedule(space: &PointCloudSpace, approx: &[LipApprox], f_norm: f64) -> Vec<f64> {
    let diam = space.diam(Region::Interior).max(space.diam(Region::Boundary));
    let k_layers = approx.len() + 1;
    let mut rho = Vec::with_capacity(k_layers);
    for k in 1..=k_layers {
        let half = if k == 1 { diam / 2.0 } else { rho[k - 2] / 2.0 };
        let cap = if k < approx.len() {
            let lip_next = approx[k].lip; // LIP(f_{k+1})
            (0.5f64).powi(k as i32) * f_norm / (1.0 + lip_next)
        } else {
            0.0
        };
        rho.push(if cap > 0.0 { half.min(cap) } else { half });
    }
    rho
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerRow {
    pub k: usize,
    pub rho: f64,
    /// `LIP(f_{k+1})`.
    pub lip_next: f64,
    /// `||f_{k+1} - f_k||_p`.
    pub step_lp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub extension: ScalarField,
    pub lip_extension: ScalarField,
    /// `||F||_p / (diam^p ||f||_p)` and
    /// `||Lip F||_p / ((1 + H(bd)^(1/p)) ||f||_p)`.
    pub norm_ratio: f64,
    pub grad_ratio: f64,
    pub roundtrip_error: f64,
    pub layer_table: Vec<LayerRow>,
    pub regime_warning: Option<String>,
}

/// Nonlinear layered extension of `L^p` boundary data; intended for the
/// critical regime where the boundary codimension matches `p`.
pub fn extend_lp(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    f: &ScalarField,
    p: f64,
    k_max: usize,
) -> Result<ExtensionReport> {
    let approx = lipschitz_approximation(space, f, p, k_max)?;
    let f_norm = lp_norm(space, f, p);
    let rho = layer_schedule(space, &approx, f_norm);

    // Consecutive-difference decay guaranteed by the approximation targets.
    for k in 1..approx.len() {
        debug_assert!(
            lp_step(space, &approx[k], &approx[k - 1], p)
                <= (2.0f64).powi(2 - k as i32) * f_norm + 1e-12 * (1.0 + f_norm)
        );
    }

    // Layers below the resolvable depth hold no grid points; truncate there.
    let min_depth = space
        .ids(Region::Interior)
        .iter()
        .map(|&id| space.dist_to_boundary(id))
        .fold(f64::INFINITY, f64::min);
    let mut k_eff = approx.len();
    for (k, &r) in rho.iter().enumerate().take(approx.len()) {
        if r < min_depth {
            k_eff = (k + 1).max(2);
            break;
        }
    }

    let psi = |k: usize, depth: f64| -> f64 {
        // 1-based layer index.
        ((rho[k - 1] - depth) / (rho[k - 1] - rho[k])).clamp(0.0, 1.0)
    };

    let interior = space.ids(Region::Interior);
    let mut values = vec![0.0f64; interior.len()];
    for k in 2..=k_eff {
        let ef = extend_besov(space, cover, &approx[k - 1].field)?;
        for (slot, &id) in interior.iter().enumerate() {
            let depth = space.dist_to_boundary(id);
            let w = psi(k - 1, depth) - psi(k, depth);
            if w != 0.0 {
                values[slot] += w * ef.values[slot];
            }
        }
    }
    let extension = ScalarField {
        region: Region::Interior,
        values,
    };
    let rho_c = 2.0 * space.min_spacing(Region::Interior);
    let lip_extension = lip_field(space, &extension, rho_c)?;

    let diam = space.diam(Region::Interior).max(space.diam(Region::Boundary));
    let h_bd = space.total_mass(Region::Boundary);
    let norm_ratio = if f_norm > 0.0 {
        lp_norm(space, &extension, p) / (diam.powf(p) * f_norm)
    } else {
        0.0
    };
    let grad_ratio = if f_norm > 0.0 {
        lp_norm(space, &lip_extension, p) / ((1.0 + h_bd.powf(1.0 / p)) * f_norm)
    } else {
        0.0
    };

    let r_min = smallest_resolvable_radius(space);
    let boundary = space.ids(Region::Boundary);
    let mut rt = 0.0;
    for (slot, &z) in boundary.iter().enumerate() {
        let t = trace_at_radius(space, &extension, z, r_min)?;
        rt += space.weight(z) * (t - f.values[slot]).abs().powf(p);
    }
    let roundtrip_error = rt.powf(1.0 / p);

    let mut layer_table = Vec::new();
    for k in 1..k_eff {
        layer_table.push(LayerRow {
            k,
            rho: rho[k - 1],
            lip_next: approx[k].lip,
            step_lp: lp_step(space, &approx[k], &approx[k - 1], p),
        });
    }

    let regime_warning = {
        use crate::space::{default_probe_schedule, estimate_codim_bounds};
        match estimate_codim_bounds(space, &default_probe_schedule(space, Region::Boundary)) {
            Ok(c) if (c.theta - p).abs() > 0.2 => Some(format!(
                "estimated codimension {} is not within 0.2 of p = {p}",
                c.theta
            )),
            Ok(_) => None,
            Err(e) => Some(format!("codimension estimate failed: {e}")),
        }
    };

    Ok(ExtensionReport {
        extension,
        lip_extension,
        norm_ratio,
        grad_ratio,
        roundtrip_error,
        layer_table,
        regime_warning,
    })
}

fn lp_step(space: &PointCloudSpace, a: &LipApprox, b: &LipApprox, p: f64) -> f64 {
    let diff = ScalarField {
        region: Region::Boundary,
        values: a
            .field
            .values
            .iter()
            .zip(&b.field.values)
            .map(|(x, y)| x - y)
            .collect(),
    };
    lp_norm(space, &diff, p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtensionMode {
    Besov,
    Lp,
}

/// Extends, traces back at the smallest resolvable radius and returns the
/// boundary `L^p` distance to the original data.
pub fn roundtrip_error(
    space: &PointCloudSpace,
    cover: &WhitneyCover,
    f: &ScalarField,
    p: f64,
    mode: ExtensionMode,
) -> Result<f64> {
    let extension = match mode {
        ExtensionMode::Besov => extend_besov(space, cover, f)?,
        ExtensionMode::Lp => extend_lp(space, cover, f, p, 12)?.extension,
    };
    let r_min = smallest_resolvable_radius(space);
    let boundary = space.ids(Region::Boundary);
    let mut acc = 0.0;
    for (slot, &z) in boundary.iter().enumerate() {
        let t = trace_at_radius(space, &extension, z, r_min)?;
        acc += space.weight(z) * (t - f.values[slot]).abs().powf(p);
    }
    Ok(acc.powf(1.0 / p))
}
