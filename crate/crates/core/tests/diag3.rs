use metsob_core::corpus;
use metsob_core::experiments;
use metsob_core::functionals::{besov_norm_gks, ep_functional, BesovParams, BesovQ, ScalarField};
use metsob_core::space::{PointCloudSpace, Region};

/// Independent oracle: naive E_p at geometrically spaced radii + refined
/// midpoint quadrature of the scale integral.
fn gks_quadrature_oracle(space: &PointCloudSpace, u: &ScalarField, alpha: f64, p: f64, q: f64, r_sup: f64) -> f64 {
    let naive_ep = |t: f64| -> f64 {
        let ids = space.ids(u.region);
        let mut total = 0.0;
        for (i, &y) in ids.iter().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for (j, &z) in ids.iter().enumerate() {
                if space.dist(y, z) < t {
                    let w = space.weight(z);
                    num += w * (u.values[i] - u.values[j]).abs().powf(p);
                    den += w;
                }
            }
            total += space.weight(y) * num / den;
        }
        total.powf(1.0 / p)
    };
    // Lower integration cutoff: below the min pairwise distance E_p = 0.
    let mut dmin = f64::INFINITY;
    let ids = space.ids(u.region);
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            let d = space.dist(ids[i], ids[j]);
            if d > 0.0 { dmin = dmin.min(d); }
        }
    }
    let mut prev = f64::NAN;
    let mut m = 64usize;
    loop {
        let lo = dmin.ln();
        let hi = r_sup.ln();
        let step = (hi - lo) / m as f64;
        let mut acc = 0.0;
        for k in 0..m {
            let t = (lo + (k as f64 + 0.5) * step).exp();
            let e = naive_ep(t);
            acc += (e / t.powf(alpha)).powf(q) * step;
        }
        let val = acc.powf(1.0 / q);
        if !prev.is_nan() && (val - prev).abs() <= 0.002 * prev.abs().max(1e-300) {
            return val;
        }
        prev = val;
        m *= 2;
        if m > 16384 { return val; }
    }
}

#[test]
fn diag_gks_vs_quadrature() {
    for seed in 0..5u64 {
        let space = corpus::random_cloud(50, 0.0, 100 + seed).unwrap();
        let mut rng = corpus::rng(200 + seed);
        let u = corpus::random_field(&space, Region::Interior, corpus::FieldKind::Gaussian, 1.0, &mut rng);
        let r_sup = 2.0 * space.diam(Region::Interior);
        for (alpha, p, q) in [(0.3, 2.0, 2.0), (0.5, 2.5, 1.5), (0.0, 2.0, 2.0)] {
            let (exact, _) = besov_norm_gks(&space, &u, &BesovParams::new(alpha, p, BesovQ::Finite(q), r_sup).unwrap()).unwrap();
            let oracle = gks_quadrature_oracle(&space, &u, alpha, p, q, r_sup);
            let rel = (exact - oracle).abs() / oracle;
            eprintln!("seed {seed} a={alpha} p={p} q={q}: exact {exact:.6} oracle {oracle:.6} rel {rel:.4}");
            assert!(rel < 0.02, "rel {rel}");
        }
    }
}

#[test]
fn diag_ep_matches_naive() {
    let space = corpus::random_cloud(50, 0.0, 7).unwrap();
    let mut rng = corpus::rng(8);
    let u = corpus::random_field(&space, Region::Interior, corpus::FieldKind::Gaussian, 1.0, &mut rng);
    let ids = space.ids(Region::Interior);
    for t in [0.1, 0.3, 0.7] {
        let got = ep_functional(&space, &u, t, 2.0).unwrap();
        let mut total = 0.0;
        for (i, &y) in ids.iter().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for (j, &z) in ids.iter().enumerate() {
                if space.dist(y, z) < t {
                    num += space.weight(z) * (u.values[i] - u.values[j]).powi(2);
                    den += space.weight(z);
                }
            }
            total += space.weight(y) * num / den;
        }
        let want = total.sqrt();
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn diag_e5() {
    let out = experiments::run_e5(&[32, 48, 64], 2.0, 6, 7).unwrap();
    for r in &out.rows {
        eprintln!("res {}: rt_scaled {:.3} mean_rt {:.5} norm {:.3} grad {:.3}", r.resolution, r.worst_roundtrip_scaled, r.mean_roundtrip, r.ext_norm_ratio, r.ext_grad_ratio);
    }
    eprintln!("monotone {}/{}", out.monotone_fields, out.n_fields);
}
