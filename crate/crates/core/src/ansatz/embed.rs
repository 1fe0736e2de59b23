use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dtype, GpsModel, GpsVariant, ModelSpec};
use crate::error::{Error, Result};
use crate::hilbert::{Boundary, Configuration, Lattice, LocalSpace, SiteOrdering};
use crate::scalar::logsumexp;

/// Local amplitudes `c^i_x` of a product state `Π_i c^i_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStateTable {
    c: Vec<Vec<Complex64>>,
}

impl ProductStateTable {
    pub fn new(c: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = c.first().map(Vec::len).unwrap_or(0);
        LocalSpace::from_dim(d)?;
        for (i, row) in c.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Model(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            if row.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::Model(format!("row {i} of the product state is zero")));
            }
        }
        Ok(ProductStateTable { c })
    }

    /// Random complex table with unit-norm rows.
    pub fn random_normalized(n: usize, d: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..n)
            .map(|_| {
                let row: Vec<Complex64> = (0..d)
                    .map(|_| Complex64::from_polar(rng.gen_range(0.1..1.0), rng.gen_range(-3.0..3.0)))
                    .collect();
                let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                row.into_iter().map(|z| z / norm).collect()
            })
            .collect();
        Self::new(c)
    }

    pub fn n_sites(&self) -> usize {
        self.c.len()
    }

    pub fn local_dim(&self) -> usize {
        self.c[0].len()
    }

    pub fn entry(&self, site: usize, state: u8) -> Complex64 {
        self.c[site][state as usize]
    }

    pub fn amplitude(&self, x: &Configuration) -> Complex64 {
        x.as_slice()
            .iter()
            .enumerate()
            .map(|(i, &s)| self.c[i][s as usize])
            .product()
    }

    /// Same state with every row scaled to unit norm.
    pub fn normalized(&self) -> Self {
        let c = self
            .c
            .iter()
            .map(|row| {
                let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                row.iter().map(|z| z / norm).collect()
            })
            .collect();
        ProductStateTable { c }
    }

    /// Entry-wise logarithm. Zero entries map to `−100·max(|max log|, 1)`.
    fn logs(&self) -> Vec<Vec<Complex64>> {
        let max_log = self
            .c
            .iter()
            .flatten()
            .filter(|z| z.norm_sqr() > 0.0)
            .map(|z| z.norm().ln().abs())
            .fold(0.0f64, f64::max);
        let floor = -100.0 * max_log.max(1.0);
        self.c
            .iter()
            .map(|row| {
                row.iter()
                    .map(|z| {
                        if z.norm_sqr() > 0.0 {
                            z.ln()
                        } else {
                            Complex64::new(floor, 0.0)
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedVariant {
    /// AR-GPS with one tensor per conditional, `M = 1`.
    Full,
    /// AR-GPS with a single tensor shared by all conditionals, `M = N`.
    WeightSharing,
}

/// Autoregressive GPS whose conditionals all read the same `(D, M, N)` tensor.
/// Kept for the product-state representability check only.
#[derive(Debug, Clone)]
pub struct WeightSharingArGps {
    n: usize,
    d: usize,
    m: usize,
    eps: Vec<Complex64>,
}

impl WeightSharingArGps {
    pub fn new(n: usize, d: usize, m: usize, eps: Vec<Complex64>) -> Result<Self> {
        if eps.len() != n * m * d {
            return Err(Error::Model(format!(
                "expected {} parameters, got {}",
                n * m * d,
                eps.len()
            )));
        }
        Ok(WeightSharingArGps { n, d, m, eps })
    }

    pub fn support(&self) -> usize {
        self.m
    }

    fn eps(&self, j: usize, m: usize, s: u8) -> Complex64 {
        self.eps[(j * self.m + m) * self.d + s as usize]
    }

    pub fn conditional_logs(&self, x: &Configuration, i: usize) -> Vec<Complex64> {
        (0..self.d as u8)
            .map(|s| {
                (0..self.m)
                    .map(|m| (0..i).fold(self.eps(i, m, s), |acc, j| acc * self.eps(j, m, x[j])))
                    .sum()
            })
            .collect()
    }

    pub fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        (0..self.n)
            .map(|i| {
                let z = self.conditional_logs(x, i);
                let norm = 0.5 * logsumexp(z.iter().map(|v| 2.0 * v.re));
                z[x[i] as usize] - norm
            })
            .sum()
    }
}

#[derive(Debug, Clone)]
pub enum EmbeddedState {
    Full(GpsModel),
    WeightSharing(WeightSharingArGps),
}

impl EmbeddedState {
    pub fn log_amplitude(&self, x: &Configuration) -> Complex64 {
        match self {
            EmbeddedState::Full(m) => m.log_amplitude(x),
            EmbeddedState::WeightSharing(m) => m.log_amplitude(x),
        }
    }

    pub fn support(&self) -> usize {
        match self {
            EmbeddedState::Full(m) => m.support(),
            EmbeddedState::WeightSharing(m) => m.support(),
        }
    }
}

/// Exact AR-GPS representation of a product state. The amplitudes equal
/// `Π_i c^i_{x_i}` up to the normalization of each row.
pub fn product_state_embed(table: &ProductStateTable, variant: EmbedVariant) -> Result<EmbeddedState> {
    let n = table.n_sites();
    let d = table.local_dim();
    let logs = table.logs();
    match variant {
        EmbedVariant::Full => {
            let positive = table.c.iter().flatten().all(|z| z.im == 0.0 && z.re > 0.0);
            let dtype = if positive { Dtype::Real } else { Dtype::Complex };
            let spec = ModelSpec::new(
                GpsVariant::AR_GPS,
                LocalSpace::from_dim(d)?,
                Lattice::chain(n, Boundary::Open)?,
                1,
            )?
            .with_dtype(dtype)
            .with_ordering(SiteOrdering::identity(n));
            let mut own = vec![None; GpsModel::masked_block(n - 1, n - 1) + 1];
            for i in 0..n {
                own[GpsModel::masked_block(i, i)] = Some(i);
            }
            // M = 1 so the flat index is block·D + s.
            let model = GpsModel::from_fn(spec, |k| match own[k / d] {
                Some(i) => logs[i][k % d],
                None => Complex64::new(1.0, 0.0),
            })?;
            Ok(EmbeddedState::Full(model))
        }
        EmbedVariant::WeightSharing => {
            let m = n;
            let mut eps = vec![Complex64::new(0.0, 0.0); n * m * d];
            for j in 0..n {
                for mm in 0..m {
                    for s in 0..d {
                        eps[(j * m + mm) * d + s] = if j == mm {
                            logs[j][s]
                        } else if j < mm {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                    }
                }
            }
            Ok(EmbeddedState::WeightSharing(WeightSharingArGps::new(n, d, m, eps)?))
        }
    }
}
