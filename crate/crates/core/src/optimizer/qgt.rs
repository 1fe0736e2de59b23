use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use super::SHIFT_EPS;
use crate::ansatz::LogDerivatives;

/// Largest parameter count for which `S` is assembled densely.
pub const DENSE_MAX_PARAMS: usize = 6000;

/// Largest sample-row count for the direct sample-space solve.
pub const SAMPLE_SPACE_MAX_ROWS: usize = 6000;

/// Dot product with independent partial sums, which vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// `(1−ε)S + ε diag(√v + 1e-8)`, dense or as products with the sample matrix.
pub enum RegularizedS<'a> {
    Dense(DMatrix<f64>),
    SampleSpace {
        qgt: &'a QgtEstimate,
        diag: Vec<f64>,
        eps: f64,
    },
}

impl RegularizedS<'_> {
    /// Inverse of the operator's diagonal.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        match self {
            RegularizedS::Dense(m) => m.diagonal().iter().map(|d| 1.0 / d).collect(),
            RegularizedS::SampleSpace { qgt, diag, eps } => {
                let p = qgt.n_params;
                let mut s = vec![0.0; p];
                for row in qgt.y.chunks_exact(p) {
                    for (a, y) in s.iter_mut().zip(row) {
                        *a += y * y;
                    }
                }
                s.iter().zip(diag).map(|(a, d)| 1.0 / ((1.0 - eps) * a + d)).collect()
            }
        }
    }

    /// Exact solution by Cholesky factorization. The matrix-free form is
    /// solved in sample space with the Woodbury identity when it has at most
    /// [`SAMPLE_SPACE_MAX_ROWS`] rows. `None` if neither applies or the
    /// factorization fails.
    pub fn solve_direct(&self, b: &[f64]) -> Option<Vec<f64>> {
        let x = match self {
            RegularizedS::Dense(m) => Cholesky::new(m.clone())?.solve(&DVector::from_column_slice(b)),
            RegularizedS::SampleSpace { qgt, diag, eps } => {
                let (rows, p) = (qgt.rows, qgt.n_params);
                if rows > SAMPLE_SPACE_MAX_ROWS || diag.iter().any(|d| !(*d > 0.0)) {
                    return None;
                }
                // With Z = √(1−ε) Y D^{-1/2}: A = D^{1/2} (I + ZᵀZ) D^{1/2} and
                // (I + ZᵀZ)⁻¹ = I − Zᵀ (I + ZZᵀ)⁻¹ Z.
                let d_isqrt: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
                let scale = (1.0 - eps).sqrt();
                let mut zt = DMatrix::from_column_slice(p, rows, &qgt.y);
                for mut col in zt.column_iter_mut() {
                    for (z, d) in col.iter_mut().zip(&d_isqrt) {
                        *z *= scale * d;
                    }
                }
                let z = zt.transpose();
                let mut k = &z * &zt;
                for i in 0..rows {
                    k[(i, i)] += 1.0;
                }
                let c = DVector::from_iterator(p, b.iter().zip(&d_isqrt).map(|(b, d)| b * d));
                let w = Cholesky::new(k)?.solve(&(&z * &c));
                let mut u = c - zt * w;
                for (u, d) in u.iter_mut().zip(&d_isqrt) {
                    *u *= d;
                }
                u
            }
        };
        x.iter().all(|v| v.is_finite()).then(|| x.as_slice().to_vec())
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self {
            RegularizedS::Dense(m) => {
                let n = x.len();
                out.fill(0.0);
                // Symmetric, so column j times x_j accumulates row-wise as well.
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        let col = &m.as_slice()[j * n..(j + 1) * n];
                        for (o, c) in out.iter_mut().zip(col) {
                            *o += xj * c;
                        }
                    }
                }
            }
            RegularizedS::SampleSpace { qgt, diag, eps } => {
                qgt.apply_s(x, out);
                for k in 0..out.len() {
                    out[k] = (1.0 - eps) * out[k] + diag[k] * x[k];
                }
            }
        }
    }
}

/// Sample data defining `S` and `g`. Complex log-derivatives contribute two
/// real rows each (real and imaginary part), so `S = Yᵀ Y = Re⟨ΔO* ΔOᵀ⟩`.
#[derive(Debug, Clone)]
pub struct QgtEstimate {
    rows: usize,
    n_params: usize,
    /// Row-major `rows × n_params`, centered and scaled by `√w`.
    y: Vec<f64>,
    /// `⟨O_k⟩`.
    pub mean_o: Vec<Complex64>,
    /// `g_k = Re(⟨O_k* E_loc⟩ − ⟨O_k*⟩⟨E_loc⟩)`.
    pub gradient: Vec<f64>,
    /// `⟨E_loc⟩`.
    pub energy: Complex64,
}

/// `weights` need not be normalized.
pub fn accumulate_qgt(weights: &[f64], o: &[LogDerivatives], eloc: &[Complex64]) -> QgtEstimate {
    assert_eq!(weights.len(), o.len());
    assert_eq!(weights.len(), eloc.len());
    let wsum: f64 = weights.iter().sum();
    let p = o.first().map_or(0, LogDerivatives::len);
    let complex = matches!(o.first(), Some(LogDerivatives::Complex(_)));

    let mut mean_o = vec![Complex64::new(0.0, 0.0); p];
    let mut energy = Complex64::new(0.0, 0.0);
    for ((w, ok), e) in weights.iter().zip(o).zip(eloc) {
        let w = w / wsum;
        energy += w * e;
        for (k, m) in mean_o.iter_mut().enumerate() {
            *m += w * ok.get(k);
        }
    }

    let rows_per = if complex { 2 } else { 1 };
    let rows = rows_per * o.len();
    let mut y = vec![0.0; rows * p];
    let mut gradient = vec![0.0; p];
    for (s, ((w, ok), e)) in weights.iter().zip(o).zip(eloc).enumerate() {
        let sw = (w / wsum).sqrt();
        let de = e - energy;
        let base = s * rows_per * p;
        match ok {
            LogDerivatives::Real(v) => {
                for k in 0..p {
                    let d = v[k] - mean_o[k].re;
                    y[base + k] = sw * d;
                    gradient[k] += sw * sw * d * de.re;
                }
            }
            LogDerivatives::Complex(v) => {
                for k in 0..p {
                    let d = v[k] - mean_o[k];
                    y[base + k] = sw * d.re;
                    y[base + p + k] = sw * d.im;
                    gradient[k] += sw * sw * (d.re * de.re + d.im * de.im);
                }
            }
        }
    }
    QgtEstimate {
        rows,
        n_params: p,
        y,
        mean_o,
        gradient,
        energy,
    }
}

impl QgtEstimate {
    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// `out = S v`.
    pub fn apply_s(&self, v: &[f64], out: &mut [f64]) {
        let p = self.n_params;
        out.fill(0.0);
        for r in 0..self.rows {
            let row = &self.y[r * p..(r + 1) * p];
            let t = dot(row, v);
            if t != 0.0 {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += t * a;
                }
            }
        }
    }

    /// `out = ((1−ε)S + ε diag(√v + 1e-8)) x`.
    pub fn apply_regularized(&self, v: &[f64], eps: f64, x: &[f64], out: &mut [f64]) {
        self.apply_s(x, out);
        for k in 0..self.n_params {
            out[k] = (1.0 - eps) * out[k] + eps * (v[k].sqrt() + SHIFT_EPS) * x[k];
        }
    }

    /// The regularized `S` as an operator: a dense `P × P` matrix when there
    /// are at least as many sample rows as parameters, else products with the
    /// sample matrix.
    pub fn regularized_operator(&self, v: &[f64], eps: f64) -> RegularizedS<'_> {
        let p = self.n_params;
        if p <= DENSE_MAX_PARAMS && p <= self.rows {
            RegularizedS::Dense(regularize(&self.dense_s(), v, eps))
        } else {
            RegularizedS::SampleSpace {
                qgt: self,
                diag: v.iter().map(|vk| eps * (vk.sqrt() + SHIFT_EPS)).collect(),
                eps,
            }
        }
    }

    pub fn dense_s(&self) -> DMatrix<f64> {
        let p = self.n_params;
        // Column-major `p × rows` view of the row-major samples is `Yᵀ`.
        let yt = DMatrix::from_column_slice(p, self.rows, &self.y);
        &yt * yt.transpose()
    }
}

/// `(1−ε)S + ε diag(√v + 1e-8)`.
pub fn regularize(s: &DMatrix<f64>, v: &[f64], eps: f64) -> DMatrix<f64> {
    let mut out = s * (1.0 - eps);
    if eps != 0.0 {
        for k in 0..v.len() {
            out[(k, k)] += eps * (v[k].sqrt() + SHIFT_EPS);
        }
    }
    out
}
