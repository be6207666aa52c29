//! Geometry and mass-primitive oracles: indexed queries against naive scans,
//! analytic masses, exponent brackets, shells and the greedy cover measure.

use metsob_core::corpus;
use metsob_core::domains::{generate, DomainKind, DomainSpec};
use metsob_core::space::{
    ball_mass, ball_members, codim_hausdorff, default_probe_schedule, estimate_codim_bounds,
    estimate_mass_exponents, io, shell_mass, Ball, MetricSpec, PointCloudSpace, PointRecord,
    Region,
};
use metsob_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn naive_members(space: &PointCloudSpace, center: usize, r: f64, region: Region) -> Vec<usize> {
    space
        .ids(region)
        .iter()
        .copied()
        .filter(|&id| space.dist(center, id) < r)
        .collect()
}

#[test]
fn open_ball_excludes_exact_radius() {
    let space = PointCloudSpace::new(
        vec![
            PointRecord { coords: vec![0.0, 0.0], region: Region::Interior, weight: 1.0 },
            PointRecord { coords: vec![1.0, 0.0], region: Region::Interior, weight: 1.0 },
        ],
        MetricSpec::Euclidean,
    )
    .unwrap();
    let got = ball_members(&space, &Ball::at_point(0, 1.0), Region::Interior).unwrap();
    assert_eq!(got, vec![0]);
    // Radius beyond the diameter captures the whole region.
    let all = ball_members(&space, &Ball::at_point(0, 2.0), Region::Interior).unwrap();
    assert_eq!(all, vec![0, 1]);
}

#[test]
fn unknown_center_is_an_error() {
    let space = corpus::random_cloud(20, 0.3, 1).unwrap();
    let err = ball_members(&space, &Ball::at_point(999, 0.5), Region::Interior).unwrap_err();
    assert!(matches!(err, Error::NoSuchPoint(999)));
}

#[test]
fn ball_members_match_naive_scan_on_random_queries() {
    let space = corpus::random_cloud(100, 0.3, 42).unwrap();
    let mut rng = corpus::rng(43);
    for _ in 0..50 {
        let center = rng.gen_range(0..100);
        let r = rng.gen_range(0.05..0.9);
        for region in [Region::Interior, Region::Boundary] {
            let got = ball_members(&space, &Ball::at_point(center, r), region).unwrap();
            assert_eq!(got, naive_members(&space, center, r, region));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn prop_indexed_queries_equal_scans(seed in 0u64..1000, r in 0.01f64..1.2, center in 0usize..80) {
        let space = corpus::random_cloud(80, 0.25, seed).unwrap();
        for region in [Region::Interior, Region::Boundary] {
            let got = ball_members(&space, &Ball::at_point(center, r), region).unwrap();
            prop_assert_eq!(got, naive_members(&space, center, r, region));
        }
    }
}

#[test]
fn ball_mass_single_weighted_point() {
    let space = PointCloudSpace::new(
        vec![
            PointRecord { coords: vec![0.0, 0.0], region: Region::Interior, weight: 2.5 },
            PointRecord { coords: vec![3.0, 0.0], region: Region::Boundary, weight: 1.0 },
        ],
        MetricSpec::Euclidean,
    )
    .unwrap();
    assert_eq!(ball_mass(&space, &Ball::at_point(0, 1.0), Region::Interior).unwrap(), 2.5);
    assert_eq!(ball_mass(&space, &Ball::at_point(0, 1.0), Region::Boundary).unwrap(), 0.0);
}

/// Area of `B((cx,cy), r) cap {0 < y < x^2 < x}` by midpoint quadrature on a
/// 2048^2 grid over the unit square.
fn cusp_ball_area_oracle(cx: f64, cy: f64, r: f64) -> f64 {
    let n = 2048usize;
    let cell = 1.0 / n as f64;
    let mut area = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) * cell;
        if (x - cx).abs() > r {
            continue;
        }
        for j in 0..n {
            let y = (j as f64 + 0.5) * cell;
            if y < x * x && (x - cx).powi(2) + (y - cy).powi(2) < r * r {
                area += cell * cell;
            }
        }
    }
    area
}

#[test]
fn cusp_ball_mass_profiles() {
    let space = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    // Tip-centered balls fill like r^3.
    for r in [0.1, 0.2, 0.4] {
        let mass = ball_mass(&space, &Ball::at_coords(vec![0.0, 0.0], r), Region::Interior).unwrap();
        let oracle = cusp_ball_area_oracle(0.0, 0.0, r);
        assert!(
            mass / r.powi(3) > oracle / r.powi(3) / 4.0 && mass / r.powi(3) < oracle / r.powi(3) * 4.0,
            "tip r={r}: mass {mass} vs oracle {oracle}"
        );
    }
    // Interior-centered balls away from the tip fill like r^2.
    let center = (0.7, 0.2);
    for r in [0.05, 0.1] {
        let mass =
            ball_mass(&space, &Ball::at_coords(vec![center.0, center.1], r), Region::Interior).unwrap();
        let oracle = cusp_ball_area_oracle(center.0, center.1, r);
        assert!(
            mass / (r * r) > oracle / (r * r) / 4.0 && mass / (r * r) < oracle / (r * r) * 4.0,
            "bulk r={r}: mass {mass} vs oracle {oracle}"
        );
    }
}

#[test]
fn square_mass_exponent_bracket() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let schedule = default_probe_schedule(&space, Region::Interior);
    let mass = estimate_mass_exponents(&space, Region::Interior, &schedule).unwrap();
    assert!(mass.s > 1.9 && mass.s < 2.1, "s = {}", mass.s);
    // Independent log-log fit over naive ball masses, restricted to balls
    // that stay inside the square where the scaling is clean.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let r_max = schedule.iter().cloned().fold(0.0f64, f64::max);
    for &z in space.ids(Region::Interior).iter().step_by(209) {
        if space.dist_to_boundary(z) <= r_max {
            continue;
        }
        for &r in &schedule {
            let m: f64 = naive_members(&space, z, r, Region::Interior)
                .iter()
                .map(|&id| space.weight(id))
                .sum();
            if m > 0.0 {
                xs.push(r.ln());
                ys.push(m.ln());
            }
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let fit = sxy / sxx;
    assert!(fit > 1.9 && fit < 2.1, "oracle fit {fit}");
    // Doubling re-check on every probe.
    for &z in space.ids(Region::Interior).iter().step_by(97) {
        for &r in &schedule {
            let m1 = ball_mass(&space, &Ball::at_point(z, r), Region::Interior).unwrap();
            let m2 = ball_mass(&space, &Ball::at_point(z, 2.0 * r), Region::Interior).unwrap();
            if m1 > 0.0 {
                assert!(m2 <= mass.c_dbl * m1 * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn weighted_square_doubling_is_stable() {
    let mut vals = Vec::new();
    for res in [32u32, 64] {
        let space = generate(&DomainSpec::new(DomainKind::WeightedSquare, res)).unwrap();
        let m = estimate_mass_exponents(
            &space,
            Region::Interior,
            &default_probe_schedule(&space, Region::Boundary),
        )
        .unwrap();
        assert!(m.c_dbl.is_finite());
        vals.push(m.c_dbl);
    }
    assert!(vals[1] <= vals[0] * 1.5, "c_dbl drifted: {vals:?}");
}

#[test]
fn degenerate_spaces_error() {
    let two = PointCloudSpace::new(
        vec![
            PointRecord { coords: vec![0.0, 0.0], region: Region::Interior, weight: 1.0 },
            PointRecord { coords: vec![1.0, 0.0], region: Region::Interior, weight: 1.0 },
        ],
        MetricSpec::Euclidean,
    )
    .unwrap();
    let err = estimate_mass_exponents(&two, Region::Interior, &[0.5, 1.0]).unwrap_err();
    assert!(matches!(err, Error::InsufficientGeometry(_)));
}

#[test]
fn codim_brackets_per_domain() {
    let square = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let c = estimate_codim_bounds(&square, &default_probe_schedule(&square, Region::Boundary)).unwrap();
    assert!((c.vartheta - 1.0).abs() <= 0.15, "square vartheta {}", c.vartheta);
    assert!((c.theta - 1.0).abs() <= 0.15, "square theta {}", c.theta);
    assert!(c.vartheta <= c.theta);

    let cusp = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    let c = estimate_codim_bounds(&cusp, &default_probe_schedule(&cusp, Region::Boundary)).unwrap();
    assert!((c.vartheta - 1.0).abs() <= 0.2, "cusp vartheta {}", c.vartheta);
    assert!((c.theta - 2.0).abs() <= 0.2, "cusp theta {}", c.theta);

    let disc = generate(&DomainSpec::new(DomainKind::WeightedDisc { eps: 0.25 }, 64)).unwrap();
    let c = estimate_codim_bounds(&disc, &default_probe_schedule(&disc, Region::Boundary)).unwrap();
    assert!((c.vartheta - 2.0).abs() <= 0.2, "disc vartheta {}", c.vartheta);
    assert!((c.theta - 2.0).abs() <= 0.2, "disc theta {}", c.theta);

    let nothing = PointCloudSpace::new(
        vec![PointRecord { coords: vec![0.0, 0.0], region: Region::Interior, weight: 1.0 }],
        MetricSpec::Euclidean,
    )
    .unwrap();
    assert!(estimate_codim_bounds(&nothing, &[0.1]).is_err());
}

#[test]
fn codim_constants_bound_their_probes() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 48)).unwrap();
    let schedule = default_probe_schedule(&space, Region::Boundary);
    let c = estimate_codim_bounds(&space, &schedule).unwrap();
    let diam_bd = space.diam(Region::Boundary);
    for &z in space.ids(Region::Boundary).iter().step_by(13) {
        for &r in &schedule {
            if r >= 2.0 * diam_bd {
                continue;
            }
            let mu_members = ball_members(&space, &Ball::at_point(z, r), Region::Interior).unwrap();
            if mu_members.len() < 4 {
                continue;
            }
            let mu: f64 = mu_members.iter().map(|&id| space.weight(id)).sum();
            let h = ball_mass(&space, &Ball::at_point(z, r), Region::Boundary).unwrap();
            if h <= 0.0 {
                continue;
            }
            assert!(h >= c.c_vartheta * mu / r.powf(c.vartheta) * (1.0 - 1e-9));
            assert!(h <= c.c_theta * mu / r.powf(c.theta) * (1.0 + 1e-9));
        }
    }
}

#[test]
fn shell_masses() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    // The whole interior sits within diam of the boundary.
    let total = space.total_mass(Region::Interior);
    assert!((shell_mass(&space, 2.0) - total).abs() < 1e-12);
    // Collar of width 0.1: analytic area 1 - 0.8^2 = 0.36, up to one grid
    // row per side (cells count by their centers).
    let m = shell_mass(&space, 0.1);
    assert!((m - 0.36).abs() < 4.5 / 64.0, "collar mass {m}");
    let h = space.total_mass(Region::Boundary);
    let ratio = m / (h * 0.1);
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
    assert_eq!(shell_mass(&space, 1e-9), 0.0);

    // Cusp: the collar is boundary-dominated, so mass/rho stays bounded
    // above while mass/rho^2 stays bounded below.
    let cusp = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    for rho in [0.05, 0.1, 0.2] {
        let m = shell_mass(&cusp, rho);
        let oracle = {
            // Quadrature for the collar area on a fine grid: distance to the
            // three boundary pieces.
            let n = 1024usize;
            let cell = 1.0 / n as f64;
            let mut area = 0.0;
            for i in 0..n {
                let x = (i as f64 + 0.5) * cell;
                for j in 0..n {
                    let y = (j as f64 + 0.5) * cell;
                    if !(y < x * x && x < 1.0) {
                        continue;
                    }
                    let d_bottom = y;
                    let d_right = 1.0 - x;
                    // Coarse distance to the parabola: sampled.
                    let mut d_par = f64::INFINITY;
                    let mut t = (x - 0.3).max(0.0);
                    while t < (x + 0.3).min(1.0) {
                        d_par = d_par.min(((x - t).powi(2) + (y - t * t).powi(2)).sqrt());
                        t += 0.002;
                    }
                    if d_bottom.min(d_right).min(d_par) < rho {
                        area += cell * cell;
                    }
                }
            }
            area
        };
        assert!(m / rho < 8.0 * oracle / rho, "upper rho={rho}");
        assert!(m / (rho * rho) > oracle / (rho * rho) / 8.0, "lower rho={rho}");
        assert!((m - oracle).abs() / oracle < 0.25, "m {m} vs oracle {oracle}");
    }
}

#[test]
fn shell_bracket_from_codim_constants() {
    // Shell mass sandwiched by the codimension bracket with slack 8.
    for kind in [DomainKind::UnitSquareLebesgue, DomainKind::WeightedDisc { eps: 0.25 }] {
        let space = generate(&DomainSpec::new(kind, 48)).unwrap();
        let c = estimate_codim_bounds(&space, &default_probe_schedule(&space, Region::Boundary)).unwrap();
        let h = space.total_mass(Region::Boundary);
        for rho in [0.1, 0.2] {
            let m = shell_mass(&space, rho);
            assert!(m <= 8.0 * h * rho.powf(c.vartheta) / c.c_vartheta, "upper {kind:?} {rho}");
            assert!(m >= h * rho.powf(c.theta) / (8.0 * c.c_theta) / 8.0, "lower {kind:?} {rho}");
        }
    }
}

#[test]
fn greedy_codim_hausdorff() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let bd = space.ids(Region::Boundary);
    // Single point: bounded by the cheapest one-ball cover.
    let z = bd[5];
    let delta = 0.2;
    let value = codim_hausdorff(&space, &[z], 1.0, delta).unwrap();
    // One-ball covers bound the greedy from above; the largest menu ball is
    // one of them.
    let bound = ball_mass(&space, &Ball::at_point(z, delta / 2.0), Region::Interior).unwrap()
        / (delta / 2.0);
    assert!(value <= bound * (1.0 + 1e-12), "value {value} bound {bound}");

    // Bottom edge with theta = 1 lands within a factor 3 of its length.
    let bottom: Vec<usize> = bd
        .iter()
        .copied()
        .filter(|&id| space.point(id)[1] == 0.0)
        .collect();
    let h_mass: f64 = bottom.iter().map(|&id| space.weight(id)).sum();
    let value = codim_hausdorff(&space, &bottom, 1.0, 0.05).unwrap();
    assert!(
        value >= h_mass / 3.0 && value <= 3.0 * h_mass,
        "greedy {value} vs edge mass {h_mass}"
    );

    // Monotone in the exponent while radii stay below 1.
    let bigger = codim_hausdorff(&space, &bottom, 1.5, 0.05).unwrap();
    assert!(bigger >= value * (1.0 - 1e-9), "{bigger} vs {value}");

    // Unresolvable scale.
    let err = codim_hausdorff(&space, &bottom, 1.0, 1e-6).unwrap_err();
    assert!(matches!(err, Error::UnresolvableScale { .. }));

    // Lower comparison against the boundary measure on every example domain.
    for (kind, theta) in [
        (DomainKind::UnitSquareLebesgue, 1.0),
        (DomainKind::CuspParabola, 2.0),
        (DomainKind::WeightedDisc { eps: 0.25 }, 2.0),
    ] {
        let space = generate(&DomainSpec::new(kind, 48)).unwrap();
        let subset: Vec<usize> = space.ids(Region::Boundary).iter().copied().step_by(2).collect();
        let h: f64 = subset.iter().map(|&id| space.weight(id)).sum();
        let v = codim_hausdorff(&space, &subset, theta, 0.1).unwrap();
        let frozen = metsob_core::constants::load_default().unwrap();
        frozen
            .check_lower("codim-hausdorff-lower", v / h)
            .unwrap_or_else(|e| panic!("{kind:?}: {e}"));
    }
}

#[test]
fn matrix_metric_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let space = corpus::random_cloud(24, 0.25, 5).unwrap();
    let n = space.n_points();
    let mut matrix = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            matrix[i * n + j] = space.dist(i, j);
        }
    }
    let pts_path = dir.path().join("pts.msp");
    let mat_path = dir.path().join("pts.msd");
    io::save_space(&space, &pts_path).unwrap();
    io::write_distance_matrix(&mat_path, n, &matrix).unwrap();
    let loaded = io::load_space_with_matrix(&pts_path, &mat_path).unwrap();
    // Ball queries agree with the Euclidean original.
    for center in [0usize, 7, 15] {
        for r in [0.2, 0.6] {
            for region in [Region::Interior, Region::Boundary] {
                assert_eq!(
                    ball_members(&loaded, &Ball::at_point(center, r), region).unwrap(),
                    ball_members(&space, &Ball::at_point(center, r), region).unwrap()
                );
            }
        }
    }
    // Coordinate centers are rejected under a matrix oracle.
    assert!(ball_members(&loaded, &Ball::at_coords(vec![0.5, 0.5], 0.2), Region::Interior).is_err());
}

#[test]
fn point_cloud_file_validates() {
    let good = "0.5 0.5 mu 1.0\n0.0 0.0 bd 0.25 # corner\n";
    let records = io::parse_points(good.as_bytes()).unwrap();
    assert_eq!(records.len(), 2);
    let bad_weight = "0.5 0.5 mu 0.0\n";
    assert!(io::parse_points(bad_weight.as_bytes()).is_err());
    let bad_region = "0.5 0.5 interior 1.0\n";
    assert!(io::parse_points(bad_region.as_bytes()).is_err());
}

#[test]
fn diameters_are_exact_max_pairwise() {
    let space = corpus::random_cloud(60, 0.4, 9).unwrap();
    for region in [Region::Interior, Region::Boundary] {
        let ids = space.ids(region);
        let mut want = 0.0f64;
        for a in 0..ids.len() {
            for b in (a + 1)..ids.len() {
                want = want.max(space.dist(ids[a], ids[b]));
            }
        }
        assert_eq!(space.diam(region), want);
    }
}
