use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, dot, norm, sub};
use crate::operators::LinearMap;

#[derive(Clone, Debug)]
pub struct PcgOptions {
    /// Stop when `‖r‖₂ / ‖rhs‖₂ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Polak–Ribière β, tolerant of preconditioners that vary between calls.
    pub flexible: bool,
    /// Exact solution; when present the A-norm error is recorded per step.
    pub reference: Option<Vec<f64>>,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000, flexible: false, reference: None }
    }
}

impl PcgOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct PcgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual before the first step and after every step.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// A-norm errors against `PcgOptions::reference`, same indexing.
    pub energy_errors: Vec<f64>,
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn pcg(a: &dyn LinearMap, b: &dyn LinearMap, rhs: &[f64], opts: &PcgOptions) -> Result<PcgOutcome> {
    let n = rhs.len();
    if a.dim_in() != n || a.dim_out() != n || b.dim_in() != n || b.dim_out() != n {
        return Err(Error::Dimension(format!(
            "pcg: operator {}x{}, preconditioner {}x{}, rhs {}",
            a.dim_out(),
            a.dim_in(),
            b.dim_out(),
            b.dim_in(),
            n
        )));
    }
    let mut x = vec![0.0; n];
    let bnorm = norm(rhs);
    let energy_error = |x: &[f64]| {
        opts.reference.as_ref().map(|xs| {
            let e = sub(xs, x);
            dot(&e, &a.apply(&e)).max(0.0).sqrt()
        })
    };
    let mut out = PcgOutcome {
        solution: Vec::new(),
        iterations: 0,
        residual_history: vec![if bnorm == 0.0 { 0.0 } else { 1.0 }],
        converged: bnorm == 0.0,
        energy_errors: energy_error(&x).into_iter().collect(),
    };
    if bnorm == 0.0 {
        out.solution = x;
        return Ok(out);
    }
    let mut r = rhs.to_vec();
    let mut z = b.apply(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        let ap = a.apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Indefinite(pap, it));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        let r_old = if opts.flexible { Some(r.clone()) } else { None };
        axpy(-alpha, &ap, &mut r);
        let rel = norm(&r) / bnorm;
        out.residual_history.push(rel);
        out.energy_errors.extend(energy_error(&x));
        out.iterations = it;
        if rel <= opts.tol {
            out.converged = true;
            break;
        }
        z = b.apply(&r);
        let rz_new = dot(&r, &z);
        let beta = match &r_old {
            Some(ro) => (rz_new - dot(&z, ro)) / rz,
            None => rz_new / rz,
        };
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    out.solution = x;
    Ok(out)
}
