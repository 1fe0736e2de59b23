use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fix_phase, hamiltonian_matrix, GroundState, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonians::Hamiltonian;

const MAX_STEPS: usize = 400;
const TOL: f64 = 1e-13;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lanczos with full reorthogonalization from a fixed pseudo-random start.
pub fn lanczos_ground_state(h: &Hamiltonian, basis: SectorBasis) -> Result<GroundState> {
    let m = hamiltonian_matrix(h, &basis)?;
    let dim = m.dim;
    if dim == 0 {
        return Err(Error::Hamiltonian("empty sector".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_705);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let n0 = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n0);

    let mut q: Vec<Vec<f64>> = vec![v];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut result = None;
    for k in 0..MAX_STEPS.min(dim) {
        m.matvec(&q[k], &mut w);
        let a = dot(&w, &q[k]);
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c = dot(&w, qi);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        let steps = alpha.len();
        let last = b < 1e-14 || k + 1 == MAX_STEPS.min(dim);
        if steps % 5 != 0 && !last {
            beta.push(b);
            q.push(w.iter().map(|x| x / b).collect());
            continue;
        }
        let t = DMatrix::from_fn(steps, steps, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imin, &e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        let residual = b * eig.eigenvectors[(steps - 1, imin)].abs();
        let y: Vec<f64> = eig.eigenvectors.column(imin).iter().copied().collect();
        if residual < TOL * e.abs().max(1.0) || last {
            result = Some((e, y));
            break;
        }
        beta.push(b);
        q.push(w.iter().map(|x| x / b).collect());
    }
    let (energy, y) = result.expect("loop always sets a result");
    let mut vector = vec![0.0; dim];
    for (c, qi) in y.iter().zip(&q) {
        vector.iter_mut().zip(qi).for_each(|(x, v)| *x += c * v);
    }
    fix_phase(&mut vector);
    Ok(GroundState { energy, vector, basis })
}
