//! High-accuracy reference integrals over the parametric boundary.
//!
//! Boundary integrals are integrated patch by patch in parameter space.
//! Interior integrals use the divergence theorem with the field
//! `F(x) = (∫_{x₀}^{x₁} f(t, x₂, x₃) dt, 0, 0)`, so that
//! `∫_Ω f = Σ_patches ∫ ν₁ F₁ dσ`.

use std::cell::RefCell;

use super::functions::TestFunction;
use crate::error::{Error, Result};
use crate::geometry::{DomainModel, ParametricPatch};
use crate::integrate::{integrate_1d, integrate_2d, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Interior,
    Boundary,
}

/// Tolerances of the reference computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTolerance {
    /// Outer integration over the patches.
    pub outer: Tolerance,
    /// Inner line integrals defining `F₁`.
    pub inner: Tolerance,
}

impl Default for ReferenceTolerance {
    fn default() -> Self {
        Self { outer: Tolerance::new(1e-13, 1e-13), inner: Tolerance::new(1e-14, 1e-14) }
    }
}

impl ReferenceTolerance {
    pub fn with_depth(self, depth: u32) -> Self {
        Self { outer: self.outer.with_depth(depth), inner: self.inner.with_depth(depth) }
    }
}

pub fn reference_integral(d: &DomainModel, f: &TestFunction, target: Target) -> Result<f64> {
    reference_integral_with(d, f, target, ReferenceTolerance::default())
}

pub fn reference_integral_with(d: &DomainModel, f: &TestFunction, target: Target, tol: ReferenceTolerance) -> Result<f64> {
    if d.patches().is_empty() {
        return Err(Error::Geometry(format!("domain `{}` has no parametric boundary", d.name())));
    }
    if f.dim != d.dim() {
        return Err(Error::structural("test function and domain dimensions differ"));
    }
    if target == Target::Interior && f.needs_normal() {
        return Err(Error::structural("interior integrand cannot depend on a normal"));
    }
    let x0 = d.bounding_box().lo[0];
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |patch: &ParametricPatch, s: &[f64]| -> f64 {
        let p = patch.point(s);
        let n = patch.normal(s);
        let da = patch.area_element(s);
        let value = match target {
            Target::Boundary => f.eval_at(p, Some(n)),
            Target::Interior => {
                if n[0] == 0.0 {
                    return 0.0;
                }
                integrate_1d(
                    |t| {
                        let mut q = p;
                        q[0] = t;
                        f.eval(q).unwrap_or(f64::NAN)
                    },
                    x0,
                    p[0],
                    tol.inner,
                )
                .map(|v| v * n[0])
            }
        };
        match value {
            Ok(v) => v * da,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut total = 0.0;
    for patch in d.patches() {
        let part = match patch.param_dim() {
            1 => integrate_1d(|s| integrand(patch, &[s]), patch.param[0][0], patch.param[0][1], tol.outer),
            _ => integrate_2d(|s, t| integrand(patch, &[s, t]), patch.param[0], patch.param[1], tol.outer),
        };
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        total += part?;
    }
    Ok(total)
}
