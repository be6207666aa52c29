use metsob_core::corpus;
use metsob_core::domains::{generate, DomainKind, DomainSpec};
use metsob_core::experiments;
use metsob_core::functionals::suite::{inequality_suite, SuiteConfig};
use metsob_core::space::Region;

#[test]
fn diag_suite_small() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 48)).unwrap();
    let fields = corpus::field_corpus(&space, Region::Boundary, 24, 7);
    let t0 = std::time::Instant::now();
    let report = inequality_suite(&space, &fields, &SuiteConfig::boundary()).unwrap();
    eprintln!("suite in {:?}", t0.elapsed());
    for r in &report.results {
        eprintln!("{:<32} exact={} worst={:.6e} pass={:?}", r.lemma, r.exact, r.worst_ratio, r.pass);
    }
    assert!(report.exact_all_pass());
}

#[test]
fn diag_e6_timing() {
    let space = generate(&DomainSpec::new(DomainKind::UnitSquareLebesgue, 128)).unwrap();
    let fields = corpus::field_corpus(&space, Region::Boundary, 200, 7);
    let t0 = std::time::Instant::now();
    let out = experiments::run_e6(&space, &fields).unwrap();
    eprintln!("e6 in {:?}; equivalence C = {:.4}", t0.elapsed(), out.equivalence_c);
    for r in &out.equivalence {
        eprintln!("  (a={}, p={}): C = {:.4} [{:.4}, {:.4}]", r.alpha, r.p, r.c, r.min_ratio, r.max_ratio);
    }
    for r in &out.suite.results {
        eprintln!("{:<32} exact={} worst={:.6e} pass={:?}", r.lemma, r.exact, r.worst_ratio, r.pass);
    }
}
