//! Adaptive 8-point Gauss-Legendre quadrature with recursive bisection.
//!
//! The integrand returns `N` components at once so that several integrals
//! share one node set. An interval is accepted once the two-halves estimate
//! differs from the whole-interval estimate by less than `tol` in every
//! component.

use crate::error::{EngineError, Result};

/// Positive nodes of the 8-point rule on [-1, 1]; the rule is symmetric.
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEPTH: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: DEFAULT_TOL,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

impl QuadOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(EngineError::InvalidConfig("quadrature tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate<const N: usize> {
    pub value: [f64; N],
    /// Sum over accepted intervals of the largest component change.
    pub error: f64,
    pub n_evals: usize,
}

/// Nodes and weights mapped to `[a, b]`, in increasing node order.
pub fn gauss_legendre_8(a: f64, b: f64) -> [(f64, f64); 8] {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 8];
    for i in 0..4 {
        out[3 - i] = (mid - half * GL8_NODES[i], half * GL8_WEIGHTS[i]);
        out[4 + i] = (mid + half * GL8_NODES[i], half * GL8_WEIGHTS[i]);
    }
    out
}

fn fixed<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<[f64; N]>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let mut acc = [0.0; N];
    for (x, w) in gauss_legendre_8(a, b) {
        let y = f(x)?;
        for k in 0..N {
            acc[k] += w * y[k];
        }
    }
    Ok(acc)
}

fn refine<const N: usize, F>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: [f64; N],
    depth: u32,
    opts: &QuadOptions,
    out: &mut QuadEstimate<N>,
) -> Result<()>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let mid = 0.5 * (a + b);
    let left = fixed(f, a, mid)?;
    let right = fixed(f, mid, b)?;
    out.n_evals += 16;
    let mut change: f64 = 0.0;
    let mut converged = true;
    let mut halves = [0.0; N];
    for (k, h) in halves.iter_mut().enumerate() {
        *h = left[k] + right[k];
        let diff = (*h - whole[k]).abs();
        let floor = 64.0 * f64::EPSILON * h.abs();
        converged &= diff < opts.tol || diff <= floor;
        change = change.max(diff);
    }
    if converged {
        for (v, h) in out.value.iter_mut().zip(halves) {
            *v += h;
        }
        out.error += change;
        return Ok(());
    }
    if depth >= opts.max_depth {
        return Err(EngineError::QuadratureNonConvergence {
            start: a,
            end: b,
            max_depth: opts.max_depth,
        });
    }
    refine(f, a, mid, left, depth + 1, opts, out)?;
    refine(f, mid, b, right, depth + 1, opts, out)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<const N: usize, F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadEstimate<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    opts.validate()?;
    let mut out = QuadEstimate {
        value: [0.0; N],
        error: 0.0,
        n_evals: 8,
    };
    let whole = fixed(&mut f, a, b)?;
    refine(&mut f, a, b, whole, 0, opts, &mut out)?;
    Ok(out)
}
