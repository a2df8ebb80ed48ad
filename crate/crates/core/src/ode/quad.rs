//! Adaptive Simpson quadrature for vector-valued integrands.
//!
//! Every real component carries its own error test; a panel is refined until
//! all components pass. Sharing the refinement keeps each integrand call
//! (one matrix inverse per node) useful to every component.

use crate::error::{Error, Result};

pub const MAX_DEPTH: u32 = 30;
// Panels are always split this many times before the error test is trusted,
// so integrands vanishing at the first three nodes are not mistaken for zero.
const MIN_DEPTH: u32 = 3;

struct Panel {
    a: f64,
    b: f64,
    fa: Vec<f64>,
    fm: Vec<f64>,
    fb: Vec<f64>,
    whole: Vec<f64>,
}

fn simpson(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let w = (b - a) / 6.0;
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((x, y), z)| w * (x + 4.0 * y + z))
        .collect()
}

/// `∫_a^b f`, componentwise, to absolute tolerance `tol` per component.
pub fn adaptive_simpson<F>(mut f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a)?, f(m)?, f(b)?);
    let whole = simpson(a, b, &fa, &fm, &fb);
    let panel = Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
    };
    refine(&mut f, panel, tol, 0, max_depth)
}

fn refine<F>(f: &mut F, p: Panel, tol: f64, depth: u32, max_depth: u32) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = simpson(p.a, m, &p.fa, &flm, &p.fm);
    let right = simpson(m, p.b, &p.fm, &frm, &p.fb);

    let mut converged = depth >= MIN_DEPTH;
    let mut out = Vec::with_capacity(left.len());
    for ((l, r), w) in left.iter().zip(&right).zip(&p.whole) {
        let s2 = l + r;
        let diff = s2 - w;
        // Second clause: differences at roundoff level of the value itself.
        if diff.abs() > 15.0 * tol && diff.abs() > 64.0 * f64::EPSILON * s2.abs() {
            converged = false;
        }
        out.push(s2 + diff / 15.0);
    }
    if converged {
        return Ok(out);
    }
    if depth >= max_depth {
        return Err(Error::Quadrature {
            a: p.a,
            b: p.b,
            depth: max_depth,
        });
    }
    let lp = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: flm,
        fb: p.fm.clone(),
        whole: left,
    };
    let rp = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    let mut l = refine(f, lp, tol / 2.0, depth + 1, max_depth)?;
    let r = refine(f, rp, tol / 2.0, depth + 1, max_depth)?;
    for (x, y) in l.iter_mut().zip(r) {
        *x += y;
    }
    Ok(l)
}
