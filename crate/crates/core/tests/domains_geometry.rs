//! Domain generators and John/uniform geometry: analytic masses, curve
//! condition checks, chains and carrots.

use metsob_core::corpus;
use metsob_core::domains::{
    build_chain, deepest_interior_point, default_c_grid, generate, john_check, uniform_check,
    verify_chain, DomainKind, DomainSpec,
};
use metsob_core::functionals::ScalarField;
use metsob_core::space::{
    ball_members, Ball, MetricSpec, PointCloudSpace, PointRecord, Region,
};
use metsob_core::Error;
use rand::Rng;

#[test]
fn generated_masses_match_analytic_values() {
    // Unit square: area one.
    let square = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let total = square.total_mass(Region::Interior);
    assert!((total - 1.0).abs() < 0.02, "square mass {total}");

    // Cusp: the region under the parabola has area 1/3.
    let cusp = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    let total = cusp.total_mass(Region::Interior);
    assert!((total - 1.0 / 3.0).abs() / (1.0 / 3.0) < 0.05, "cusp mass {total}");

    // Disc boundary: circumference 2 pi by construction.
    let disc = generate(&DomainSpec::new(DomainKind::WeightedDisc { eps: 0.25 }, 32)).unwrap();
    assert!((disc.total_mass(Region::Boundary) - std::f64::consts::TAU).abs() < 1e-9);

    // Weighted square keeps the Hausdorff boundary weights.
    let wsq = generate(&DomainSpec::new(DomainKind::WeightedSquare, 32)).unwrap();
    assert!((wsq.total_mass(Region::Boundary) - 4.0).abs() < 1e-9);
}

#[test]
fn cusp_needs_resolution_for_the_tip() {
    let err = generate(&DomainSpec::new(DomainKind::CuspParabola, 8)).unwrap_err();
    assert!(matches!(err, Error::ResolutionTooLow(_)));
    assert!(generate(&DomainSpec::new(DomainKind::CuspParabola, 16)).is_ok());
    let err = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 4)).unwrap_err();
    assert!(matches!(err, Error::ResolutionTooLow(_)));
}

fn nearest_interior_to(space: &PointCloudSpace, x: f64, y: f64) -> usize {
    *space
        .ids(Region::Interior)
        .iter()
        .min_by(|&&a, &&b| {
            let pa = space.point(a);
            let pb = space.point(b);
            let da = (pa[0] - x).powi(2) + (pa[1] - y).powi(2);
            let db = (pb[0] - x).powi(2) + (pb[1] - y).powi(2);
            da.total_cmp(&db)
        })
        .unwrap()
}

#[test]
fn square_is_john_from_the_centroid() {
    // Analytic John constant of the unit square from its centroid is
    // 1/sqrt(2) (binding at the corners along the diagonal); the grid graph
    // realizes a bit less through octile paths.
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let center = nearest_interior_to(&space, 0.5, 0.5);
    let (is_john, c) = john_check(&space, center, &default_c_grid()).unwrap();
    assert!(is_john);
    assert!(c >= 0.3, "measured John constant {c}");
    assert!(c <= 1.0 / 2.0f64.sqrt() + 0.05);
}

#[test]
fn cusp_is_john_at_this_resolution() {
    // The outward cusp degrades the constant as the grid refines; at this
    // resolution the measured value is still on the search grid.
    let space = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    let center = nearest_interior_to(&space, 0.5, 0.1);
    let (is_john, c) = john_check(&space, center, &default_c_grid()).unwrap();
    assert!(is_john, "cusp should pass at resolution 128");
    assert!(c >= 0.05, "measured {c}");
}

#[test]
fn disconnected_interior_is_reported() {
    // Two far-apart blobs of interior points.
    let mut records = Vec::new();
    for k in 0..6 {
        records.push(PointRecord {
            coords: vec![0.01 * k as f64, 0.0],
            region: Region::Interior,
            weight: 1.0,
        });
        records.push(PointRecord {
            coords: vec![5.0 + 0.01 * k as f64, 0.0],
            region: Region::Interior,
            weight: 1.0,
        });
    }
    records.push(PointRecord {
        coords: vec![2.5, 1.0],
        region: Region::Boundary,
        weight: 1.0,
    });
    let space = PointCloudSpace::new(records, MetricSpec::Euclidean).unwrap();
    let err = john_check(&space, 0, &default_c_grid()).unwrap_err();
    assert!(matches!(err, Error::NotConnected));
}

#[test]
fn square_is_uniform() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 64)).unwrap();
    let interior = space.ids(Region::Interior);
    let mut rng = corpus::rng(17);
    let pairs: Vec<(usize, usize)> = (0..50)
        .map(|_| {
            (
                interior[rng.gen_range(0..interior.len())],
                interior[rng.gen_range(0..interior.len())],
            )
        })
        .collect();
    let (is_uniform, c) = uniform_check(&space, &pairs).unwrap();
    assert!(is_uniform);
    assert!(c >= 0.2, "measured uniform constant {c}");
}

#[test]
fn identical_pair_is_vacuously_uniform() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 16)).unwrap();
    let id = space.ids(Region::Interior)[0];
    let (is_uniform, _) = uniform_check(&space, &[(id, id)]).unwrap();
    assert!(is_uniform);
}

#[test]
#[ignore = "builds a ~350k-point cusp; run with --ignored"]
fn cusp_is_not_uniform_at_fine_resolution() {
    // Near the tip any admissible curve from a point at abscissa t keeps
    // clearance at most (t + s)^2 / 2 at arclength s, so the cigar constant
    // is at most 2t; below the 0.05 search grid once t < 0.025.
    let space = generate(&DomainSpec::new(DomainKind::CuspParabola, 1024)).unwrap();
    let tip = *space
        .ids(Region::Interior)
        .iter()
        .min_by(|&&a, &&b| space.point(a)[0].total_cmp(&space.point(b)[0]))
        .unwrap();
    let far = deepest_interior_point(&space).unwrap();
    let (is_uniform, c) = uniform_check(&space, &[(tip, far)]).unwrap();
    assert!(!is_uniform, "cusp passed the cigar condition with c = {c}");
}

#[test]
fn chain_formula_and_truncation() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 32)).unwrap();
    let bd = space.ids(Region::Boundary);

    // Adjacent boundary points: geometric decay kills the chain within a
    // few balls beyond the joining one.
    let chain = build_chain(&space, bd[0], bd[1], 0.5, 1.0).unwrap();
    let tail = chain.balls.iter().filter(|b| b.k != 0).count();
    assert!(tail <= 4, "chain tail has {tail} balls");

    // The geodesic-ideal parameters give the exact radius ratio 1/2.
    let z = bd[0];
    let y = bd[2 * 32];
    let chain = build_chain(&space, z, y, 1.0, 1.0).unwrap();
    for b in chain.balls.iter().filter(|b| b.k != 0) {
        assert!((b.radius / b.t - 0.5).abs() < 1e-12);
    }
}

#[test]
fn chain_invariants_hold_for_random_boundary_pairs() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 48)).unwrap();
    let center = nearest_interior_to(&space, 0.5, 0.5);
    let (_, c_j) = john_check(&space, center, &default_c_grid()).unwrap();
    let bd = space.ids(Region::Boundary);
    let mut rng = corpus::rng(23);
    let mut checked = 0;
    for _ in 0..50 {
        let z = bd[rng.gen_range(0..bd.len())];
        let y = bd[rng.gen_range(0..bd.len())];
        if z == y {
            continue;
        }
        let chain = build_chain(&space, z, y, c_j, 1.0).unwrap();
        let check = verify_chain(&space, &chain).unwrap();
        assert!(check.containment_ok, "containment failed for ({z},{y})");
        assert!(check.sandwich_ok, "sandwich failed for ({z},{y})");
        assert!(check.carrot_ok, "carrot failed for ({z},{y})");
        checked += 1;
    }
    assert!(checked >= 40);

    // Opposite corners explicitly.
    let z = bd[0];
    let y = *bd
        .iter()
        .max_by(|&&a, &&b| {
            space.dist(z, a).total_cmp(&space.dist(z, b))
        })
        .unwrap();
    let chain = build_chain(&space, z, y, c_j, 1.0).unwrap();
    let check = verify_chain(&space, &chain).unwrap();
    assert!(check.carrot_ok && check.sandwich_ok && check.containment_ok);
}

#[test]
fn chain_averages_converge_to_the_boundary_value() {
    // Lebesgue differentiation surrogate: along the chain toward z, means
    // over balls with radius at least half the distance to z approach the
    // boundary value of a Lipschitz field at slope <= 4 L.
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 48)).unwrap();
    let center = nearest_interior_to(&space, 0.5, 0.5);
    let (_, c_j) = john_check(&space, center, &default_c_grid()).unwrap();
    let bd = space.ids(Region::Boundary);
    let u = |c: &[f64]| 0.8 * c[0] - 0.3 * c[1];
    let l = (0.8f64 * 0.8 + 0.3 * 0.3).sqrt();
    let field = ScalarField::from_fn(&space, Region::Interior, u);
    let mut rng = corpus::rng(29);
    for _ in 0..8 {
        let z = bd[rng.gen_range(0..bd.len())];
        let y = bd[rng.gen_range(0..bd.len())];
        if z == y || space.dist(z, y) < 0.3 {
            continue;
        }
        let chain = build_chain(&space, z, y, c_j, 1.0).unwrap();
        let uz = u(space.point(z));
        for b in chain.balls.iter().filter(|b| b.k > 0) {
            let d = {
                let p = space.point(z);
                ((b.coords[0] - p[0]).powi(2) + (b.coords[1] - p[1]).powi(2)).sqrt()
            };
            let r = b.radius.max(d / 2.0);
            let members =
                ball_members(&space, &Ball::at_coords(b.coords.clone(), r), Region::Interior)
                    .unwrap();
            if members.is_empty() {
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for &id in &members {
                num += space.weight(id) * field.values[space.region_slot(id)];
                den += space.weight(id);
            }
            let mean = num / den;
            assert!(
                (mean - uz).abs() <= 4.0 * l * r,
                "mean {mean} vs u(z) {uz} at r {r}"
            );
        }
    }
}
