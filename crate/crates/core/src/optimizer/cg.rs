use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
    /// `false` if the iteration cap was hit; `x` is then the best iterate.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for a symmetric positive-definite operator given by
/// its action `apply(v, out)`.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgResult> {
    preconditioned_cg(apply, None, b, x0, tol, max_iter)
}

/// Conjugate gradients with an optional diagonal (Jacobi) preconditioner,
/// given as the inverse diagonal. Convergence is judged on the unpreconditioned
/// residual `‖b − Ax‖ / ‖b‖`.
pub fn preconditioned_cg(
    apply: impl Fn(&[f64], &mut [f64]),
    inv_diag: Option<&[f64]>,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgResult> {
    let n = b.len();
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite right-hand side".into()));
    }
    if let Some(m) = inv_diag {
        if m.len() != n || m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Solver("preconditioner must be positive and finite".into()));
        }
    }
    let precond = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(m) => {
            for k in 0..n {
                z[k] = m[k] * r[k];
            }
        }
        None => z.copy_from_slice(r),
    };
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok(CgResult {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n && x0.iter().all(|v| v.is_finite()) => x0.to_vec(),
        _ => vec![0.0; n],
    };
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    // A poor warm start is worse than none.
    if dot(&r, &r).sqrt() > bnorm {
        x.fill(0.0);
        r.copy_from_slice(b);
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / bnorm;
    let mut best = (res, x.clone());
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while it < max_iter && res > tol {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::Solver("non-finite operator action".into()));
        }
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        it += 1;
        res = dot(&r, &r).sqrt() / bnorm;
        if res < best.0 {
            best = (res, x.clone());
        }
    }
    let converged = res <= tol;
    let (relative_residual, x) = if converged { (res, x) } else { best };
    Ok(CgResult {
        x,
        iterations: it,
        relative_residual,
        converged,
    })
}
