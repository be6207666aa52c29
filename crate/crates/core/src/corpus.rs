//! Seeded random fields and spaces for corpora and oracle tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::functionals::ScalarField;
use crate::space::{MetricSpec, PointCloudSpace, PointRecord, Region};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Independent standard normals.
    Gaussian,
    /// A handful of random plane waves.
    Fourier,
    /// Lower envelope of cones over random anchors (1-Lipschitz times the
    /// requested scale).
    Lipschitz,
    /// Indicator bump of a random metric ball.
    Step,
}

pub fn random_field(
    space: &PointCloudSpace,
    region: Region,
    kind: FieldKind,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> ScalarField {
    let ids = space.ids(region);
    match kind {
        FieldKind::Gaussian => {
            let values = (0..ids.len())
                .map(|_| scale * normal(rng))
                .collect();
            ScalarField { region, values }
        }
        FieldKind::Fourier => {
            let modes: Vec<(f64, f64, f64, f64)> = (0..6)
                .map(|_| {
                    (
                        rng.gen_range(1.0..8.0),
                        rng.gen_range(1.0..8.0),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                        normal(rng),
                    )
                })
                .collect();
            ScalarField {
                region,
                values: ids
                    .iter()
                    .map(|&id| {
                        let p = space.point(id);
                        scale
                            * modes
                                .iter()
                                .map(|&(kx, ky, phase, amp)| {
                                    amp * (kx * p[0] + ky * p.get(1).copied().unwrap_or(0.0)
                                        + phase)
                                        .sin()
                                })
                                .sum::<f64>()
                    })
                    .collect(),
            }
        }
        FieldKind::Lipschitz => mcshane_field(space, region, scale, 8, rng),
        FieldKind::Step => {
            let center = ids[rng.gen_range(0..ids.len())];
            let radius = rng.gen_range(0.1..0.6) * space.diam(region);
            ScalarField {
                region,
                values: ids
                    .iter()
                    .map(|&id| {
                        if space.dist(center, id) < radius {
                            scale
                        } else {
                            -scale
                        }
                    })
                    .collect(),
            }
        }
    }
}

/// Lower envelope of `L`-slope cones with random apexes and heights; exactly
/// `L`-Lipschitz with respect to the space metric.
pub fn mcshane_field(
    space: &PointCloudSpace,
    region: Region,
    l: f64,
    anchors: usize,
    rng: &mut ChaCha8Rng,
) -> ScalarField {
    let ids = space.ids(region);
    let picks: Vec<(usize, f64)> = (0..anchors)
        .map(|_| (rng.gen_range(0..ids.len()), rng.gen_range(-1.0..1.0)))
        .collect();
    ScalarField {
        region,
        values: ids
            .iter()
            .map(|&id| {
                picks
                    .iter()
                    .map(|&(a, v)| v + l * space.dist(ids[a], id))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    }
}

/// Fixed corpus mix: cycles Gaussian, Fourier, Lipschitz and Step fields.
pub fn field_corpus(
    space: &PointCloudSpace,
    region: Region,
    count: usize,
    seed: u64,
) -> Vec<ScalarField> {
    let mut rng = rng(seed);
    (0..count)
        .map(|k| {
            let kind = match k % 4 {
                0 => FieldKind::Gaussian,
                1 => FieldKind::Fourier,
                2 => FieldKind::Lipschitz,
                _ => FieldKind::Step,
            };
            random_field(space, region, kind, 1.0, &mut rng)
        })
        .collect()
}

/// Uniformly random weighted cloud on the unit square with a random
/// interior/boundary split; the oracle-test workhorse.
pub fn random_cloud(n: usize, boundary_fraction: f64, seed: u64) -> Result<PointCloudSpace> {
    let mut rng = rng(seed);
    let records: Vec<PointRecord> = (0..n)
        .map(|_| {
            let region = if rng.gen::<f64>() < boundary_fraction {
                Region::Boundary
            } else {
                Region::Interior
            };
            PointRecord {
                coords: vec![rng.gen::<f64>(), rng.gen::<f64>()],
                region,
                weight: rng.gen_range(0.5..1.5),
            }
        })
        .collect();
    PointCloudSpace::new(records, MetricSpec::Euclidean)
}

/// Random nonnegative matrix with column sums at most `col_sum_max`.
pub fn random_matrix(
    rows: usize,
    cols: usize,
    col_sum_max: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0f64; cols]; rows];
    for k in 0..cols {
        let raw: Vec<f64> = (0..rows).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
        let total: f64 = raw.iter().sum();
        let target = rng.gen_range(0.2..1.0) * col_sum_max;
        for (j, v) in raw.iter().enumerate() {
            a[j][k] = v / total * target;
        }
    }
    a
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u: f64 = rng.gen_range(1e-12..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}
