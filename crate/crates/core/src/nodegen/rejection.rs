//! Rejection sampling in a bounding box with boundary projection and
//! thinning.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hash::SpatialHash;
use super::{halton, Generator, NodeSet};
use crate::error::{Error, Result};
use crate::geometry::{norm, DomainModel, Point};

/// Distribution of the initial samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingMode {
    Grid,
    Halton,
    Random,
}

impl SamplingMode {
    pub fn name(self) -> &'static str {
        match self {
            SamplingMode::Grid => "grid",
            SamplingMode::Halton => "halton",
            SamplingMode::Random => "random",
        }
    }

    fn generator(self) -> Generator {
        match self {
            SamplingMode::Grid => Generator::CartesianGrid,
            SamplingMode::Halton => Generator::Halton,
            SamplingMode::Random => Generator::Random,
        }
    }
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(SamplingMode::Grid),
            "halton" => Ok(SamplingMode::Halton),
            "random" => Ok(SamplingMode::Random),
            _ => Err(Error::Parse(format!("unknown sampling mode `{s}`"))),
        }
    }
}

pub(crate) fn check_spacing(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::structural(format!("spacing must be positive and finite, got {h}")))
    }
}

fn samples(d: &DomainModel, h: f64, mode: SamplingMode, seed: u64) -> Vec<Point> {
    let dim = d.dim();
    let bbox = d.bounding_box();
    let n_h = (bbox.measure(dim) / h.powi(dim as i32)).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5245_4a45_4354_0000);
    match mode {
        SamplingMode::Halton => halton(seed, n_h, dim, &bbox),
        SamplingMode::Random => (0..n_h)
            .map(|_| {
                let mut p = [0.0; 3];
                for k in 0..dim {
                    p[k] = rng.random_range(bbox.lo[k]..bbox.hi[k]);
                }
                p
            })
            .collect(),
        SamplingMode::Grid => {
            let mut shift = [0.0; 3];
            let mut counts = [1usize; 3];
            for k in 0..dim {
                shift[k] = rng.random::<f64>() * h;
                counts[k] = ((bbox.side(k) - shift[k]) / h).floor().max(-1.0) as usize + 1;
            }
            let mut out = Vec::with_capacity(counts.iter().product());
            for k2 in 0..counts[2] {
                for k1 in 0..counts[1] {
                    for k0 in 0..counts[0] {
                        let mut p = [0.0; 3];
                        for (k, i) in [k0, k1, k2].into_iter().enumerate().take(dim) {
                            p[k] = bbox.lo[k] + shift[k] + i as f64 * h;
                        }
                        out.push(p);
                    }
                }
            }
            out
        }
    }
}

/// Projected and thinned boundary samples, in sample order.
pub(crate) fn sampled_boundary(
    d: &DomainModel,
    h: f64,
    pts: &[Point],
) -> Result<(Vec<Point>, Vec<Point>)> {
    let mut hash = SpatialHash::new(h, d.dim());
    let (mut z, mut nu) = (Vec::new(), Vec::new());
    for &p in pts {
        if d.implicit().distance_estimate(p) >= h {
            continue;
        }
        let Some(q) = d.project_to_boundary(p) else { continue };
        if hash.any_within(q, h) {
            continue;
        }
        let Ok(n) = d.normal_at(q) else { continue };
        hash.insert(q);
        z.push(q);
        nu.push(n);
    }
    Ok((z, nu))
}

/// Samples `round(|H| h^{-d})` points in the padded bounding box `H`,
/// keeps those inside `Ω` farther than `h` from the boundary (first-order
/// estimate `|φ|/|∇φ|`), and projects those within `h` of the boundary
/// onto `φ = 0`. Projected points are thinned in sample order so that
/// no two are closer than `h`. The result is a closed set.
pub fn rejection_sample(d: &DomainModel, h: f64, mode: SamplingMode, seed: u64) -> Result<NodeSet> {
    check_spacing(h)?;
    let dim = d.dim();
    let pts = samples(d, h, mode, seed);
    let mut interior = Vec::new();
    for &p in &pts {
        let (v, g) = d.implicit().phi_and_grad(p);
        let gn = norm(g);
        if !(gn > 0.0) || !gn.is_finite() {
            if v < 0.0 {
                return Err(Error::structural(format!("level-set gradient unavailable at {p:?}")));
            }
            continue;
        }
        if v < 0.0 && v.abs() / gn > h {
            interior.push(p);
        }
    }
    let (boundary, normals) = sampled_boundary(d, h, &pts)?;
    let degenerate = boundary.len() < 2 * dim || interior.is_empty();
    Ok(NodeSet {
        dim,
        interior,
        boundary,
        normals,
        h,
        seed,
        closed: true,
        generator: mode.generator(),
        degenerate,
    })
}
