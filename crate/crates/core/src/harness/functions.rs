//! Test integrands.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Builtin, Point};
use crate::quadrature::fundamental_ghat;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionKind {
    /// `1 / (1 + 25‖x − c‖²)`.
    Runge(Point),
    /// Franke's function on `[0,1]²`, composed with `x ↦ (x + 1)/2`.
    Franke2D,
    /// Renka's 3D extension of Franke's function, composed likewise.
    Renka3D,
    Constant(f64),
    /// Normal derivative of the fundamental solution with source `x0`;
    /// needs the outward normal at the evaluation point.
    FundamentalGhat(Point),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub kind: FunctionKind,
    pub dim: usize,
}

impl TestFunction {
    pub fn runge(center: Point, dim: usize) -> Self {
        Self { kind: FunctionKind::Runge(center), dim }
    }

    /// Franke in 2D, Renka in 3D.
    pub fn franke(dim: usize) -> Self {
        let kind = if dim == 2 { FunctionKind::Franke2D } else { FunctionKind::Renka3D };
        Self { kind, dim }
    }

    pub fn constant(c: f64, dim: usize) -> Self {
        Self { kind: FunctionKind::Constant(c), dim }
    }

    pub fn fundamental(x0: Point, dim: usize) -> Self {
        Self { kind: FunctionKind::FundamentalGhat(x0), dim }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FunctionKind::Runge(_) => "runge",
            FunctionKind::Franke2D => "franke",
            FunctionKind::Renka3D => "renka",
            FunctionKind::Constant(_) => "constant",
            FunctionKind::FundamentalGhat(_) => "fundamental",
        }
    }

    pub fn needs_normal(&self) -> bool {
        matches!(self.kind, FunctionKind::FundamentalGhat(_))
    }

    /// Value at `p`; `normal` is only read by [`FunctionKind::FundamentalGhat`].
    pub fn eval_at(&self, p: Point, normal: Option<Point>) -> Result<f64> {
        Ok(match self.kind {
            FunctionKind::Runge(c) => {
                let r2: f64 = (0..self.dim).map(|k| (p[k] - c[k]).powi(2)).sum();
                1.0 / (1.0 + 25.0 * r2)
            }
            FunctionKind::Franke2D => franke(0.5 * (p[0] + 1.0), 0.5 * (p[1] + 1.0)),
            FunctionKind::Renka3D => renka(0.5 * (p[0] + 1.0), 0.5 * (p[1] + 1.0), 0.5 * (p[2] + 1.0)),
            FunctionKind::Constant(c) => c,
            FunctionKind::FundamentalGhat(x0) => {
                let nu = normal.ok_or_else(|| Error::structural("the fundamental-solution trace needs a normal"))?;
                fundamental_ghat(self.dim, x0, p, nu)?
            }
        })
    }

    /// Value at `p` for functions that do not need a normal.
    pub fn eval(&self, p: Point) -> Result<f64> {
        self.eval_at(p, None)
    }

    pub fn sample(&self, points: &[Point]) -> Result<Vec<f64>> {
        points.iter().map(|&p| self.eval(p)).collect()
    }

    pub fn sample_boundary(&self, points: &[Point], normals: &[Point]) -> Result<Vec<f64>> {
        points.iter().zip(normals).map(|(&p, &n)| self.eval_at(p, Some(n))).collect()
    }
}

pub fn franke(x: f64, y: f64) -> f64 {
    0.75 * (-((9.0 * x - 2.0).powi(2) + (9.0 * y - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(9.0 * x + 1.0).powi(2) / 49.0 - (9.0 * y + 1.0) / 10.0).exp()
        + 0.5 * (-((9.0 * x - 7.0).powi(2) + (9.0 * y - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(9.0 * x - 4.0).powi(2) - (9.0 * y - 7.0).powi(2)).exp()
}

pub fn renka(x: f64, y: f64, z: f64) -> f64 {
    0.75 * (-((9.0 * x - 2.0).powi(2) + (9.0 * y - 2.0).powi(2) + (9.0 * z - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(9.0 * x + 1.0).powi(2) / 49.0 - (9.0 * y + 1.0) / 10.0 - (9.0 * z + 1.0) / 10.0).exp()
        + 0.5 * (-((9.0 * x - 7.0).powi(2) + (9.0 * y - 3.0).powi(2) + (9.0 * z - 5.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(9.0 * x - 4.0).powi(2) - (9.0 * y - 7.0).powi(2) - (9.0 * z - 5.0).powi(2)).exp()
}

/// Default Runge center for each built-in domain.
pub fn runge_center(b: Builtin) -> Point {
    match b {
        Builtin::DiskSector => [(0.75 * PI).cos() / 2.0, (0.75 * PI).sin() / 2.0, 0.0],
        Builtin::LShape3D => [0.5, 0.5, 0.0],
        Builtin::Torus => [1.0, 0.0, 0.0],
        _ => [0.0; 3],
    }
}
