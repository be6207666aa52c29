use metsob_core::domains::{generate, DomainKind, DomainSpec, InteriorGraph, deepest_interior_point};
use metsob_core::space::Region;

#[test]
fn dbg_john_cusp() {
    let space = generate(&DomainSpec::new(DomainKind::CuspParabola, 128)).unwrap();
    let center = *space.ids(Region::Interior).iter().min_by(|&&a, &&b| {
        let pa = space.point(a); let pb = space.point(b);
        let da = (pa[0]-0.5).powi(2) + (pa[1]-0.1).powi(2);
        let db = (pb[0]-0.5).powi(2) + (pb[1]-0.1).powi(2);
        da.total_cmp(&db)
    }).unwrap();
    eprintln!("center coords {:?} clearance {}", space.point(center), space.dist_to_boundary(center));
    let graph = InteriorGraph::build(&space).unwrap();
    let source = space.region_slot(center);
    let (arc, parent) = graph.dijkstra(source);
    // manually compute overall and argmin
    let n = graph.n();
    let mut worst = (f64::INFINITY, 0usize, 0usize);
    for x in 0..n {
        // walk ancestors
        let mut v = x;
        loop {
            let t = arc[x] - arc[v];
            if t > 0.0 {
                let ratio = space.dist_to_boundary(graph.id(v)) / t;
                if ratio < worst.0 { worst = (ratio, x, v); }
            }
            if parent[v] == u32::MAX { break; }
            v = parent[v] as usize;
        }
    }
    eprintln!("worst ratio {} at x={:?} v={:?}", worst.0, space.point(graph.id(worst.1)), space.point(graph.id(worst.2)));
    eprintln!("arc(x) = {}, arc(v) = {}, clearance(v) = {}", arc[worst.1], arc[worst.2], space.dist_to_boundary(graph.id(worst.2)));
    let deep = deepest_interior_point(&space).unwrap();
    eprintln!("deepest point {:?} clearance {}", space.point(deep), space.dist_to_boundary(deep));
}
