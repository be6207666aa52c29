//! Boundary traces by ball averaging: the dyadic radius schedule, Cauchy
//! gaps, Besov smoothness of the trace, the weighted critical case and local
//! estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::functionals::{
    besov_norm_gks, frac_maximal, lp_norm, region_mean, BesovParams, BesovQ, ScalarField,
};
use crate::space::{
    ball_members, default_probe_schedule, estimate_codim_bounds, Ball, PointCloudSpace, PointId,
    Region,
};
use crate::{Error, Result};

/// Mass-weighted mean of the interior field over `B(z, r) cap interior`.
pub fn trace_at_radius(
    space: &PointCloudSpace,
    u: &ScalarField,
    z: PointId,
    r: f64,
) -> Result<f64> {
    if u.region != Region::Interior {
        return Err(Error::InvalidParameter("trace averages an interior field".into()));
    }
    if space.region_of(z) != Region::Boundary {
        return Err(Error::InvalidParameter(format!("{z} is not a boundary point")));
    }
    let members = ball_members(space, &Ball::at_point(z, r), Region::Interior)?;
    if members.is_empty() {
        return Err(Error::RadiusBelowResolution(z));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in &members {
        let w = space.weight(x);
        num += w * u.values[space.region_slot(x)];
        den += w;
    }
    Ok(num / den)
}

/// Max over boundary points of the distance to the nearest interior point;
/// balls at twice this radius are nonempty at every boundary point.
pub fn boundary_adjacent_spacing(space: &PointCloudSpace) -> f64 {
    space
        .ids(Region::Boundary)
        .par_iter()
        .map(|&z| {
            space
                .nearest_in_region(z, Region::Interior)
                .map(|(_, d)| d)
                .unwrap_or(f64::INFINITY)
        })
        .reduce(|| 0.0, f64::max)
}

pub fn smallest_resolvable_radius(space: &PointCloudSpace) -> f64 {
    2.0 * boundary_adjacent_spacing(space)
}

fn diam_closure(space: &PointCloudSpace) -> f64 {
    // The closure diameter is bounded by region diameters plus the gap
    // between the regions; the crude bound below is enough for a schedule
    // start at which every ball swallows the whole interior.
    let di = space.diam(Region::Interior);
    let db = space.diam(Region::Boundary);
    di + db
}

/// One trace field per dyadic radius, largest radius first. The schedule
/// starts at a radius covering the whole interior and stops above the
/// resolvable floor.
pub fn trace_schedule(space: &PointCloudSpace, k_max: usize) -> (Vec<f64>, bool) {
    let r0 = 2.0 * diam_closure(space);
    let floor = smallest_resolvable_radius(space);
    let mut radii = Vec::new();
    let mut truncated = false;
    for k in 0..=k_max {
        let r = r0 * (0.5f64).powi(k as i32);
        if r < floor {
            truncated = true;
            break;
        }
        radii.push(r);
    }
    (radii, truncated)
}

fn trace_at_all(space: &PointCloudSpace, u: &ScalarField, r: f64) -> Result<ScalarField> {
    let boundary = space.ids(Region::Boundary);
    let values: Vec<Result<f64>> = boundary
        .par_iter()
        .map(|&z| trace_at_radius(space, u, z, r))
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

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    /// Trace at the smallest resolvable dyadic radius.
    pub trace: ScalarField,
    pub radii: Vec<f64>,
    /// `L^p` boundary norms of consecutive schedule differences.
    pub cauchy_gaps: Vec<f64>,
    /// Log-log slope of the gaps against the radius; absent when every gap
    /// vanishes.
    pub fitted_rate: Option<f64>,
    /// Sup-in-scale Besov seminorms of the trace per requested smoothness.
    pub besov_seminorms: Vec<(f64, f64)>,
    /// Set when the requested schedule ran below the resolvable floor.
    pub truncated: bool,
}

pub fn trace_field(
    space: &PointCloudSpace,
    u: &ScalarField,
    p: f64,
    k_max: usize,
    seminorm_alphas: &[f64],
) -> Result<TraceReport> {
    u.validate(space)?;
    let (radii, truncated) = trace_schedule(space, k_max);
    if radii.is_empty() {
        return Err(Error::InsufficientGeometry("no resolvable trace radius".into()));
    }
    let fields: Vec<ScalarField> = radii
        .iter()
        .map(|&r| trace_at_all(space, u, r))
        .collect::<Result<_>>()?;
    let mut cauchy_gaps = Vec::new();
    for k in 1..fields.len() {
        let diff = ScalarField {
            region: Region::Boundary,
            values: fields[k]
                .values
                .iter()
                .zip(&fields[k - 1].values)
                .map(|(a, b)| a - b)
                .collect(),
        };
        cauchy_gaps.push(lp_norm(space, &diff, p));
    }
    let fitted_rate = fit_loglog(&radii[1..], &cauchy_gaps);
    let trace = fields.last().unwrap().clone();
    let r_sup = BesovParams::default_r(space, Region::Boundary);
    let mut besov_seminorms = Vec::new();
    for &alpha in seminorm_alphas {
        let (semi, _) =
            besov_norm_gks(space, &trace, &BesovParams::new(alpha, p, BesovQ::Infinity, r_sup)?)?;
        besov_seminorms.push((alpha, semi));
    }
    Ok(TraceReport {
        trace,
        radii,
        cauchy_gaps,
        fitted_rate,
        besov_seminorms,
        truncated,
    })
}

fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceBesovReport {
    pub theta: f64,
    pub smoothness: f64,
    pub seminorm_p_inf: f64,
    pub seminorm_p_p: f64,
    /// Max over boundary pairs of the trace oscillation against
    /// `d^(1-theta/p)` times the summed fractional maximal values.
    pub hajlasz_ratio: f64,
    /// Diagonal seminorm of the trace against the input norms.
    pub norm_ratio: f64,
}

pub fn trace_besov_report(
    space: &PointCloudSpace,
    u: &ScalarField,
    g: &ScalarField,
    p: f64,
    theta: f64,
) -> Result<TraceBesovReport> {
    if p <= theta {
        return Err(Error::SupercriticalTraceOnly { p, theta });
    }
    u.validate(space)?;
    g.validate(space)?;
    let smoothness = 1.0 - theta / p;
    let report = trace_field(space, u, p, 48, &[])?;
    let tu = &report.trace;
    let r_sup = BesovParams::default_r(space, Region::Boundary);
    let (semi_inf, _) =
        besov_norm_gks(space, tu, &BesovParams::new(smoothness, p, BesovQ::Infinity, r_sup)?)?;
    let (semi_pp, _) =
        besov_norm_gks(space, tu, &BesovParams::new(smoothness, p, BesovQ::Finite(p), r_sup)?)?;

    let m = frac_maximal(space, g, theta, p)?;
    let boundary = space.ids(Region::Boundary);
    let hajlasz_ratio = (0..boundary.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in (i + 1)..boundary.len() {
                let d = space.dist(boundary[i], boundary[j]);
                if d <= 0.0 {
                    continue;
                }
                let den = d.powf(smoothness) * (m.values[i] + m.values[j]);
                if den > 0.0 {
                    worst = worst.max((tu.values[i] - tu.values[j]).abs() / den);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);

    let denom = lp_norm(space, u, p) + lp_norm(space, g, p);
    Ok(TraceBesovReport {
        theta,
        smoothness,
        seminorm_p_inf: semi_inf,
        seminorm_p_p: semi_pp,
        hajlasz_ratio,
        norm_ratio: if denom > 0.0 { semi_pp / denom } else { 0.0 },
    })
}

/// Weight profile `w(t)` for the critical-codimension trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum WeightSpec {
    /// `w(t) = max(1, log(2 diam / t)^(1+eps))`.
    LogPower { eps: f64 },
    /// Piecewise-linear decreasing table of `(t, w)` samples.
    Table { ts: Vec<f64>, ws: Vec<f64> },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::LogPower { eps } => {
                if !(*eps > 0.0) {
                    return Err(Error::InvalidParameter("eps must be positive".into()));
                }
            }
            WeightSpec::Table { ts, ws } => {
                if ts.len() != ws.len() || ts.len() < 2 {
                    return Err(Error::InvalidParameter("weight table too short".into()));
                }
                if ts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("weight table abscissae not increasing".into()));
                }
                if ws.windows(2).any(|w| w[1] > w[0]) || ws.iter().any(|&w| w < 1.0) {
                    return Err(Error::NonMonotoneWeight);
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, diam: f64, t: f64) -> f64 {
        match self {
            WeightSpec::LogPower { eps } => {
                let l = (2.0 * diam / t).ln();
                if l <= 0.0 {
                    1.0
                } else {
                    l.powf(1.0 + eps).max(1.0)
                }
            }
            WeightSpec::Table { ts, ws } => {
                if t <= ts[0] {
                    return ws[0];
                }
                if t >= *ts.last().unwrap() {
                    return *ws.last().unwrap();
                }
                let k = ts.partition_point(|&x| x < t);
                let frac = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
                ws[k - 1] + frac * (ws[k] - ws[k - 1])
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedTraceReport {
    pub trace: ScalarField,
    pub gtilde_norm: f64,
    pub deviation_norm: f64,
    /// `||Tu - u_mean||_p / ||g w(dist)||_p`; zero with `exact_match` set
    /// when the weighted gradient vanishes.
    pub ratio: f64,
    pub exact_match: bool,
    pub theta_estimate: f64,
}

/// Trace in the critical regime `theta = p`, with the gradient reweighted by
/// a decreasing weight of the boundary distance.
pub fn weighted_trace(
    space: &PointCloudSpace,
    u: &ScalarField,
    g: &ScalarField,
    p: f64,
    weight: &WeightSpec,
) -> Result<WeightedTraceReport> {
    weight.validate()?;
    u.validate(space)?;
    g.validate(space)?;
    let codim = estimate_codim_bounds(space, &default_probe_schedule(space, Region::Boundary))?;
    if (codim.theta - p).abs() > 0.2 {
        return Err(Error::InvalidParameter(format!(
            "weighted trace expects codimension ~ p: estimated theta {} vs p {p}",
            codim.theta
        )));
    }
    let diam = diam_closure(space) / 2.0;
    let interior = space.ids(Region::Interior);
    let gtilde = ScalarField {
        region: Region::Interior,
        values: interior
            .iter()
            .enumerate()
            .map(|(slot, &id)| g.values[slot] * weight.eval(diam, space.dist_to_boundary(id)))
            .collect(),
    };
    let gtilde_norm = lp_norm(space, &gtilde, p);
    let report = trace_field(space, u, p, 48, &[])?;
    let u_mean = region_mean(space, u);
    let dev = report.trace.map(|v| v - u_mean);
    let deviation_norm = lp_norm(space, &dev, p);
    let exact_match = gtilde_norm == 0.0;
    Ok(WeightedTraceReport {
        trace: report.trace,
        gtilde_norm,
        deviation_norm,
        ratio: if exact_match { 0.0 } else { deviation_norm / gtilde_norm },
        exact_match,
        theta_estimate: codim.theta,
    })
}

/// Local trace estimate on a boundary-centered ball:
/// `||Tu - u_{B}||_{L^ptilde(B cap bd)} / (rad^((1/ptilde - 1/p*)(s-theta)) ||g||_{L^p(B cap int)})`.
#[allow(clippy::too_many_arguments)]
pub fn local_trace_estimate(
    space: &PointCloudSpace,
    u: &ScalarField,
    g: &ScalarField,
    p: f64,
    q: f64,
    ball: &Ball,
    p_tilde: f64,
    s: f64,
    theta: f64,
) -> Result<f64> {
    if !(theta < p && p < s) {
        return Err(Error::InvalidParameter(format!(
            "need theta < p < s, got theta={theta}, p={p}, s={s}"
        )));
    }
    if !(q < p) {
        return Err(Error::InvalidParameter("need q < p".into()));
    }
    let p_star = p * (s - theta) / (s - p);
    if !(p_tilde > p && p_tilde < p_star) {
        return Err(Error::InvalidParameter(format!(
            "need p < ptilde < p* = {p_star}"
        )));
    }
    u.validate(space)?;
    g.validate(space)?;

    let int_members = ball_members(space, ball, Region::Interior)?;
    let bd_members = ball_members(space, ball, Region::Boundary)?;
    if int_members.is_empty() || bd_members.is_empty() {
        return Err(Error::InsufficientGeometry("ball misses a region".into()));
    }
    let mut mass = 0.0;
    let mut u_mean = 0.0;
    let mut g_norm_p = 0.0;
    for &x in &int_members {
        let w = space.weight(x);
        mass += w;
        u_mean += w * u.values[space.region_slot(x)];
        g_norm_p += w * g.values[space.region_slot(x)].abs().powf(p);
    }
    u_mean /= mass;
    let g_norm = g_norm_p.powf(1.0 / p);

    let r_min = smallest_resolvable_radius(space);
    let mut num = 0.0;
    for &z in &bd_members {
        let t = trace_at_radius(space, u, z, r_min)?;
        num += space.weight(z) * (t - u_mean).abs().powf(p_tilde);
    }
    let num = num.powf(1.0 / p_tilde);
    if g_norm == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    let scale = ball.radius.powf((1.0 / p_tilde - 1.0 / p_star) * (s - theta));
    Ok(num / (scale * g_norm))
}

/// Divergence diagnostics for fields whose ball averages blow up at the
/// boundary: monotonicity of the schedule and a one-parameter fit of the
/// boundary-mean trace against `log(e/R)^eps`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub monotone_fraction: f64,
    pub fit_coefficient: f64,
    pub fit_residual: f64,
    pub no_trace: bool,
    pub schedule_means: Vec<(f64, f64)>,
}

pub fn divergence_report(
    space: &PointCloudSpace,
    u: &ScalarField,
    eps: f64,
    k_max: usize,
) -> Result<DivergenceReport> {
    u.validate(space)?;
    let (radii, _) = trace_schedule(space, k_max);
    let fields: Vec<ScalarField> = radii
        .iter()
        .map(|&r| trace_at_all(space, u, r))
        .collect::<Result<_>>()?;
    let nb = space.ids(Region::Boundary).len();
    // The log profile is a small-scale statement; radii above 1 average over
    // whole-domain geometry where the schedule may dip. Monotonicity and the
    // fit are therefore checked on the sub-unit part of the schedule.
    let mut monotone = vec![true; nb];
    for k in 1..fields.len() {
        if radii[k - 1] > 1.0 {
            continue;
        }
        for slot in 0..nb {
            if fields[k].values[slot] < fields[k - 1].values[slot] - 1e-12 {
                monotone[slot] = false;
            }
        }
    }
    let monotone_fraction = monotone.iter().filter(|&&m| m).count() as f64 / nb as f64;

    let total_h = space.total_mass(Region::Boundary);
    let mut means = Vec::new();
    for (k, f) in fields.iter().enumerate() {
        let m: f64 = space
            .ids(Region::Boundary)
            .iter()
            .enumerate()
            .map(|(slot, &z)| space.weight(z) * f.values[slot])
            .sum::<f64>()
            / total_h;
        means.push((radii[k], m));
    }
    // Fit c * log(e/R)^eps over the sub-unit part of the schedule, where the
    // profile is positive and meaningful.
    let pts: Vec<(f64, f64)> = means
        .iter()
        .filter(|(r, _)| *r <= 1.0)
        .map(|&(r, m)| ((std::f64::consts::E / r).ln().powf(eps), m))
        .collect();
    let (fit_coefficient, fit_residual) = if pts.len() >= 2 {
        let num: f64 = pts.iter().map(|(phi, m)| phi * m).sum();
        let den: f64 = pts.iter().map(|(phi, _)| phi * phi).sum();
        let c = num / den;
        let res = pts
            .iter()
            .map(|(phi, m)| ((m - c * phi) / m).abs())
            .fold(0.0f64, f64::max);
        (c, res)
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(DivergenceReport {
        monotone_fraction,
        fit_coefficient,
        fit_residual,
        no_trace: monotone_fraction >= 0.9 && fit_residual <= 0.1,
        schedule_means: means,
    })
}
