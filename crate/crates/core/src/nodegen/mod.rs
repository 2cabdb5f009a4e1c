//! Scattered node generation: boundary nodes with normals, interior
//! nodes, and the discretization set `X`.

mod front;
mod halton;
mod hash;
mod kdtree;
mod rejection;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

pub use front::{advancing_front, make_x, X_SPACING_RATIO};
pub use halton::{halton, radical_inverse};
pub use kdtree::NeighborIndex;
pub use rejection::{rejection_sample, SamplingMode};

use crate::error::{Error, Result};
use crate::geometry::{dist, norm, DomainModel, Point};

/// Tolerance on `|φ(z)|` for boundary nodes.
pub const BOUNDARY_PHI_TOL: f64 = 1e-10;

/// How a node set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    AdvancingFront,
    CartesianGrid,
    Halton,
    Random,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::AdvancingFront => "advancing-front",
            Generator::CartesianGrid => "grid",
            Generator::Halton => "halton",
            Generator::Random => "random",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Generator::AdvancingFront, Generator::CartesianGrid, Generator::Halton, Generator::Random]
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown generator `{s}`")))
    }
}

/// Interior nodes, boundary nodes with unit outward normals, and the
/// parameters they were generated with.
///
/// The quadrature node set `Y` is `interior` for open sets and
/// `interior ++ boundary` for closed sets.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub dim: usize,
    pub interior: Vec<Point>,
    pub boundary: Vec<Point>,
    pub normals: Vec<Point>,
    pub h: f64,
    pub seed: u64,
    pub closed: bool,
    pub generator: Generator,
    /// Set when `h` is too coarse for the domain to produce a usable set.
    pub degenerate: bool,
}

impl NodeSet {
    /// Quadrature nodes `Y`.
    pub fn y(&self) -> Vec<Point> {
        let mut y = self.interior.clone();
        if self.closed {
            y.extend_from_slice(&self.boundary);
        }
        y
    }

    pub fn n_y(&self) -> usize {
        self.interior.len() + if self.closed { self.boundary.len() } else { 0 }
    }

    pub fn n_z(&self) -> usize {
        self.boundary.len()
    }

    /// Interior followed by boundary points, regardless of `closed`.
    pub fn all_points(&self) -> Vec<Point> {
        let mut v = self.interior.clone();
        v.extend_from_slice(&self.boundary);
        v
    }

    pub fn with_closed(mut self, closed: bool) -> Self {
        self.closed = closed;
        self
    }

    /// Packing spacing `(|Ω| / N_Y)^{1/d}`.
    pub fn packing_spacing(&self, measure: f64) -> f64 {
        (measure / self.n_y() as f64).powf(1.0 / self.dim as f64)
    }

    /// Checks the node-set invariants against `domain`: interior points
    /// inside, boundary points on `φ = 0` with unit normals, and boundary
    /// points at least `h / 2` apart.
    pub fn validate(&self, domain: &DomainModel) -> Result<()> {
        if self.boundary.len() != self.normals.len() {
            return Err(Error::structural("boundary and normal counts differ"));
        }
        if let Some(p) = self.interior.iter().find(|&&p| !domain.inside(p)) {
            return Err(Error::data(format!("interior node {p:?} is outside the domain")));
        }
        for (z, n) in self.boundary.iter().zip(&self.normals) {
            if domain.phi(*z).abs() > BOUNDARY_PHI_TOL {
                return Err(Error::data(format!("boundary node {z:?} is off the boundary")));
            }
            if (norm(*n) - 1.0).abs() > 1e-12 {
                return Err(Error::data(format!("normal at {z:?} is not unit length")));
            }
        }
        if self.boundary.len() > 1 {
            let idx = NeighborIndex::new(self.boundary.clone(), self.dim);
            for (i, z) in self.boundary.iter().enumerate() {
                let nb = idx.knn(*z, 2)?;
                let j = if nb[0] == i { nb[1] } else { nb[0] };
                if dist(*z, self.boundary[j]) < 0.5 * self.h {
                    return Err(Error::data(format!("boundary nodes {i} and {j} are closer than h/2")));
                }
            }
        }
        Ok(())
    }

    /// Writes the node file: a `dim,closed|open` header, a `#` metadata
    /// line, then one row per node.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{},{}", self.dim, if self.closed { "closed" } else { "open" })?;
        writeln!(
            w,
            "# h={:.16e} seed={} generator={} degenerate={}",
            self.h, self.seed, self.generator, self.degenerate
        )?;
        let coords = |p: &Point| p[..self.dim].iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
        for p in &self.interior {
            writeln!(w, "{},interior", coords(p))?;
        }
        for (p, n) in self.boundary.iter().zip(&self.normals) {
            writeln!(w, "{},boundary,{}", coords(p), coords(n))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty node file".into()))??;
        let (dim, closed) = match header.trim().split_once(',') {
            Some((d, c)) => {
                let dim: usize = d.parse().map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?;
                let closed = match c {
                    "closed" => true,
                    "open" => false,
                    _ => return Err(Error::Parse(format!("bad closure flag `{c}`"))),
                };
                (dim, closed)
            }
            None => return Err(Error::Parse(format!("bad header `{header}`"))),
        };
        if !(dim == 2 || dim == 3) {
            return Err(Error::Parse(format!("dimension {dim} is not 2 or 3")));
        }
        let mut set = NodeSet {
            dim,
            interior: Vec::new(),
            boundary: Vec::new(),
            normals: Vec::new(),
            h: f64::NAN,
            seed: 0,
            closed,
            generator: Generator::AdvancingFront,
            degenerate: false,
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("h", v)) => set.h = num(v)?,
                        Some(("seed", v)) => {
                            set.seed = v.parse().map_err(|_| Error::Parse(format!("bad seed `{v}`")))?
                        }
                        Some(("generator", v)) => set.generator = v.parse()?,
                        Some(("degenerate", v)) => set.degenerate = v == "true",
                        _ => {}
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = num(fields.get(k).ok_or_else(|| Error::Parse(format!("short row {}", lineno + 2)))?)?;
            }
            match (fields.get(dim).copied(), fields.len()) {
                (Some("interior"), n) if n == dim + 1 => set.interior.push(p),
                (Some("boundary"), n) if n == 2 * dim + 1 => {
                    let mut nu = [0.0; 3];
                    for k in 0..dim {
                        nu[k] = num(fields[dim + 1 + k])?;
                    }
                    set.boundary.push(p);
                    set.normals.push(nu);
                }
                _ => return Err(Error::Parse(format!("malformed row {}: `{line}`", lineno + 2))),
            }
        }
        if !(set.h > 0.0) {
            return Err(Error::Parse("missing or invalid spacing h".into()));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let set = NodeSet {
            dim: 2,
            interior: vec![[0.1, 1.0 / 3.0, 0.0], [-2.5e-7, 0.7, 0.0]],
            boundary: vec![[1.0, 0.0, 0.0]],
            normals: vec![[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2, 0.0]],
            h: 0.1,
            seed: 42,
            closed: true,
            generator: Generator::Halton,
            degenerate: false,
        };
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = NodeSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let bad = "2,closed\n# h=0.1\n0.1,0.2,boundary,1\n";
        assert!(matches!(NodeSet::read_csv(bad.as_bytes()), Err(Error::Parse(_))));
        assert!(NodeSet::read_csv("4,open\n".as_bytes()).is_err());
    }
}
