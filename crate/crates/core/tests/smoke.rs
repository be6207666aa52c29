//! Quick end-to-end exercise of the main pipeline on small domains.

use metsob_core::domains::{generate, DomainKind, DomainSpec};
use metsob_core::functionals::{besov_norm_bp, besov_norm_gks, BesovParams, BesovQ};
use metsob_core::space::{
    default_probe_schedule, estimate_codim_bounds, estimate_mass_exponents, Region,
};
use metsob_core::whitney::{build_cover, check_cover};

#[test]
fn square_pipeline_smoke() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 32)).unwrap();
    assert_eq!(space.ids(Region::Interior).len(), 32 * 32);
    assert_eq!(space.ids(Region::Boundary).len(), 4 * 32);
    let total: f64 = space
        .ids(Region::Interior)
        .iter()
        .map(|&i| space.weight(i))
        .sum();
    assert!((total - 1.0).abs() < 1e-12, "total mass {total}");
    assert!((space.diam(Region::Boundary) - 2.0f64.sqrt()).abs() < 0.1);

    let schedule = default_probe_schedule(&space, Region::Boundary);
    let mass = estimate_mass_exponents(&space, Region::Interior, &schedule).unwrap();
    eprintln!("square: s = {}, c_dbl = {}", mass.s, mass.c_dbl);
    assert!(mass.s > 1.5 && mass.s < 2.5);

    let codim = estimate_codim_bounds(&space, &schedule).unwrap();
    eprintln!("square codim: {:?}", codim);
    assert!((codim.vartheta - 1.0).abs() < 0.3);
    assert!((codim.theta - 1.0).abs() < 0.3);

    let cover = build_cover(&space).unwrap();
    let check = check_cover(&space, &cover).unwrap();
    eprintln!(
        "cover: {} balls, overlap {}, violations {:?}",
        check.n_balls, check.max_overlap, check.violations
    );
    assert!(check.violations.is_empty());

    let u = metsob_core::functionals::ScalarField::from_fn(&space, Region::Boundary, |c| {
        (3.0 * c[0]).sin() + c[1]
    });
    let r = BesovParams::default_r(&space, Region::Boundary);
    let (gks, _) =
        besov_norm_gks(&space, &u, &BesovParams::new(0.5, 2.0, BesovQ::Finite(2.0), r).unwrap())
            .unwrap();
    let (bp, _) = besov_norm_bp(&space, &u, 0.5, 2.0, r).unwrap();
    eprintln!("besov: gks = {gks}, bp = {bp}, ratio = {}", bp / gks);
    assert!(gks > 0.0 && bp > 0.0);
    assert!(bp / gks > 0.2 && bp / gks < 5.0);
}

#[test]
fn cusp_and_disc_generate() {
    let cusp = generate(&DomainSpec::new(DomainKind::CuspParabola, 64)).unwrap();
    let area: f64 = cusp
        .ids(Region::Interior)
        .iter()
        .map(|&i| cusp.weight(i))
        .sum();
    eprintln!("cusp area = {area} (analytic 1/3)");
    assert!((area - 1.0 / 3.0).abs() / (1.0 / 3.0) < 0.05);

    let disc = generate(&DomainSpec::new(DomainKind::WeightedDisc { eps: 0.25 }, 32)).unwrap();
    let blen = disc.total_mass(Region::Boundary);
    assert!((blen - std::f64::consts::TAU).abs() < 1e-9);
    let schedule = default_probe_schedule(&disc, Region::Boundary);
    let codim = estimate_codim_bounds(&disc, &schedule).unwrap();
    eprintln!("disc codim: {:?}", codim);
    assert!((codim.vartheta - 2.0).abs() < 0.35);
    assert!((codim.theta - 2.0).abs() < 0.35);
}
