//! Plain-text `key = value` study configuration.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::geometry::{Builtin, Point};
use crate::mfd::Operator;
use crate::quadrature::{ConstraintKind, Method, SolverChoice};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Builtin,
    pub method: Method,
    pub q_list: Vec<usize>,
    /// Strictly decreasing.
    pub h_list: Vec<f64>,
    /// Seeds `1..=seeds` are used.
    pub seeds: u64,
    pub constraint: ConstraintKind,
    pub solver: SolverChoice,
    pub operator: Operator,
    /// Runge center; the domain default when absent.
    pub x_r: Option<Point>,
    /// Spacing of a self-computed reference for domains without a
    /// parametric boundary.
    pub reference_h: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A configuration with one seed, the domain's default constraint and
    /// automatic solver choice.
    pub fn new(domain: Builtin, method: Method, q_list: Vec<usize>, h_list: Vec<f64>) -> Self {
        let constraint = default_constraint(domain);
        Self {
            domain,
            method,
            q_list,
            h_list,
            seeds: 1,
            constraint,
            solver: SolverChoice::Auto,
            operator: Operator::Divergence,
            x_r: None,
            reference_h: None,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_list.is_empty() || self.h_list.is_empty() {
            return Err(Error::Parse("q_list and h_list must not be empty".into()));
        }
        if let Some(&q) = self.q_list.iter().find(|&&q| q < 2) {
            return Err(Error::Parse(format!("q must be at least 2, got {q}")));
        }
        if self.h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Parse("spacings must be positive".into()));
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parse("h_list must be strictly decreasing".into()));
        }
        if self.seeds < 1 {
            return Err(Error::Parse("seeds must be at least 1".into()));
        }
        if let Some(h) = self.reference_h {
            if !(h > 0.0) {
                return Err(Error::Parse("reference_h must be positive".into()));
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut domain = None;
        let mut method = None;
        let mut q_list = None;
        let mut h_list = None;
        let mut rest: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "domain" => domain = Some(v.parse::<Builtin>()?),
                "method" => method = Some(v.parse::<Method>()?),
                "q_list" | "q" => q_list = Some(parse_list::<usize>(v, k)?),
                "h_list" | "h" => h_list = Some(parse_list::<f64>(v, k)?),
                _ => rest.push((k.to_string(), v.to_string())),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing key `{k}`"));
        let mut cfg = ExperimentConfig::new(
            domain.ok_or_else(|| missing("domain"))?,
            method.ok_or_else(|| missing("method"))?,
            q_list.ok_or_else(|| missing("q_list"))?,
            h_list.ok_or_else(|| missing("h_list"))?,
        );
        for (k, v) in rest {
            match k.as_str() {
                "seeds" => cfg.seeds = v.parse().map_err(|_| Error::Parse(format!("bad seeds `{v}`")))?,
                "constraint" => cfg.constraint = v.parse()?,
                "solver" => cfg.solver = v.parse()?,
                "operator" => cfg.operator = v.parse()?,
                "x_r" => {
                    let c = parse_list::<f64>(&v, "x_r")?;
                    if c.len() != cfg.domain.dim() {
                        return Err(Error::Parse(format!("x_r needs {} coordinates", cfg.domain.dim())));
                    }
                    let mut p = [0.0; 3];
                    p[..c.len()].copy_from_slice(&c);
                    cfg.x_r = Some(p);
                }
                "reference_h" => {
                    cfg.reference_h = Some(v.parse().map_err(|_| Error::Parse(format!("bad reference_h `{v}`")))?)
                }
                "out" => cfg.out = Some(PathBuf::from(v)),
                _ => return Err(Error::Parse(format!("unknown key `{k}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `boundary` when `|∂Ω|` is known, otherwise `fundamental`.
pub fn default_constraint(domain: Builtin) -> ConstraintKind {
    if domain.model().measure_boundary().is_some() {
        ConstraintKind::BoundaryConstant
    } else {
        ConstraintKind::FundamentalSolution
    }
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad value `{}` for `{key}`", t.trim()))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ExperimentConfig::parse(
            "# sector study\ndomain = disk-sector\nmethod = mfd\nq_list = 4, 5\nh_list = 0.1, 0.05\nseeds = 4\n\
             constraint = boundary\nsolver = qr\nout = study.csv\n",
        )
        .unwrap();
        assert_eq!(cfg.domain, Builtin::DiskSector);
        assert_eq!(cfg.q_list, vec![4, 5]);
        assert_eq!(cfg.h_list, vec![0.1, 0.05]);
        assert_eq!(cfg.seeds, 4);
        assert_eq!(cfg.solver, SolverChoice::Qr);
        assert_eq!(cfg.out, Some(PathBuf::from("study.csv")));
    }

    #[test]
    fn rejects_bad_ladders_and_keys() {
        let base = "domain = ellipse\nmethod = bsp\nq_list = 4\n";
        assert!(ExperimentConfig::parse(&format!("{base}h_list = 0.05, 0.1\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}h_list = 0.1\nseeds = 0\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}h_list = 0.1\ncolour = red\n")).is_err());
        assert!(ExperimentConfig::parse("method = bsp\nq_list = 4\nh_list = 0.1\n").is_err());
    }

    #[test]
    fn default_constraint_follows_known_measures() {
        assert_eq!(default_constraint(Builtin::Torus), ConstraintKind::BoundaryConstant);
        assert_eq!(default_constraint(Builtin::DecoTetrahedron), ConstraintKind::FundamentalSolution);
    }
}
