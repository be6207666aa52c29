use metsob_core::domains::{generate, DomainKind, DomainSpec};
use metsob_core::space::{default_probe_schedule, estimate_codim_bounds, estimate_mass_exponents, Region};

#[test]
fn diag_estimators() {
    for (name, kind, res) in [
        ("square64", DomainKind::UnitSquareLebesgue, 64u32),
        ("square128", DomainKind::UnitSquareLebesgue, 128),
        ("cusp128", DomainKind::CuspParabola, 128),
        ("wsquare64", DomainKind::WeightedSquare, 64),
        ("disc64", DomainKind::WeightedDisc { eps: 0.25 }, 64),
        ("sharp48", DomainKind::SharpnessDisc { n: 4, eps: 0.5 }, 48),
    ] {
        let space = generate(&DomainSpec::new(kind, res)).unwrap();
        let schedule = default_probe_schedule(&space, Region::Boundary);
        let mass = estimate_mass_exponents(&space, Region::Interior, &schedule).unwrap();
        let codim = estimate_codim_bounds(&space, &schedule).unwrap();
        eprintln!(
            "{name}: s={:.3} c_s={:.3} c_dbl={:.2} | vartheta={:.2} (c={:.3}) theta={:.2} (c={:.3})",
            mass.s, mass.c_s, mass.c_dbl, codim.vartheta, codim.c_vartheta, codim.theta, codim.c_theta
        );
    }
}

#[test]
fn diag_cusp_envelope() {
    use metsob_core::space::{ball_mass, Ball};
    let space = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    let schedule = default_probe_schedule(&space, Region::Boundary);
    let bd = space.ids(Region::Boundary);
    for &r in &schedule {
        let mut qmin: (f64, Vec<f64>) = (f64::INFINITY, vec![]);
        let mut qmax: (f64, Vec<f64>) = (0.0, vec![]);
        for &z in bd.iter().step_by(3) {
            let mu = ball_mass(&space, &Ball::at_point(z, r), Region::Interior).unwrap();
            let h = ball_mass(&space, &Ball::at_point(z, r), Region::Boundary).unwrap();
            if mu > 0.0 && h > 0.0 {
                let q = mu / h;
                if q < qmin.0 { qmin = (q, space.point(z).to_vec()); }
                if q > qmax.0 { qmax = (q, space.point(z).to_vec()); }
            }
        }
        eprintln!("r={r:.4}: qmin={:.5e} at {:?} qmax={:.5e} at {:?}", qmin.0, qmin.1, qmax.0, qmax.1);
    }
}

#[test]
fn diag_cusp_res() {
    for res in [192u32, 256] {
        let space = generate(&DomainSpec::new(DomainKind::CuspParabola, res)).unwrap();
        let schedule = default_probe_schedule(&space, Region::Boundary);
        let codim = estimate_codim_bounds(&space, &schedule).unwrap();
        eprintln!("cusp{res}: vartheta={:.2} theta={:.2}", codim.vartheta, codim.theta);
    }
}
