use num_complex::Complex64;

use super::{GpsModel, Params, NO_SLOT};
use crate::hilbert::Configuration;
use crate::scalar::Scalar;

/// `O_k(x) = ∂ log ψ(x) / ∂θ_k` with respect to the real parametrization of
/// [`GpsModel::real_params`].
#[derive(Debug, Clone, PartialEq)]
pub enum LogDerivatives {
    Real(Vec<f64>),
    /// Complex models: entries `2k` and `2k+1` are the derivatives along
    /// `Re ε_k` and `Im ε_k`.
    Complex(Vec<Complex64>),
}

impl LogDerivatives {
    pub fn len(&self) -> usize {
        match self {
            LogDerivatives::Real(v) => v.len(),
            LogDerivatives::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, k: usize) -> Complex64 {
        match self {
            LogDerivatives::Real(v) => Complex64::new(v[k], 0.0),
            LogDerivatives::Complex(v) => v[k],
        }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.get(k)).collect()
    }
}

impl GpsModel {
    /// Gradient of `log ψ(x)`. Undefined (non-finite) outside the gauge sector.
    pub fn log_derivatives(&self, x: &Configuration) -> LogDerivatives {
        self.check_config(x);
        match &self.params {
            Params::Real(eps) => {
                let (hol, corr) = self.derivative_parts(eps, x);
                LogDerivatives::Real(hol.iter().zip(&corr).map(|(h, c)| h - c).collect())
            }
            Params::Complex(eps) => {
                // For a direction t along Re ε_k the derivative is `hol − Re(corr)`,
                // along Im ε_k it is `i·hol + Im(corr)`.
                let (hol, corr) = self.derivative_parts(eps, x);
                let mut out = Vec::with_capacity(2 * hol.len());
                for (h, c) in hol.iter().zip(&corr) {
                    out.push(h - c.re);
                    out.push(Complex64::i() * h + c.im);
                }
                LogDerivatives::Complex(out)
            }
        }
    }

    /// Holomorphic derivative of the unnormalized part and the expectation of
    /// the derivative of the exponent under each conditional.
    fn derivative_parts<T: Scalar>(&self, eps: &[T], x: &Configuration) -> (Vec<T>, Vec<T>) {
        let lay = self.layout();
        let (m, d) = (lay.m, lay.d);
        let np = lay.n_params();
        let xp = self.position_states(x);
        let mut hol = vec![T::zero(); np];
        let mut corr = vec![T::zero(); np];
        let mut partial = vec![T::zero(); m];
        let mut prefix = Vec::new();
        let mut counts = (0, 0);

        for c in 0..lay.n_corr {
            let factors = lay.starts[c]..lay.starts[c + 1];
            let len = factors.len();
            lay.partial(eps, &xp, c, &mut partial);
            let has_self = lay.self_block[c] != NO_SLOT;
            let xs = if has_self { xp[c] } else { 0 };

            let mut probs = [0.0f64; 4];
            if lay.normalized {
                let mut z = [T::zero(); 4];
                lay.self_logs(eps, c, &partial, &mut z);
                let allowed = self.allowed(c, counts);
                let logs: Vec<f64> = (0..d)
                    .map(|s| if allowed[s] { 2.0 * z[s].re() } else { f64::NEG_INFINITY })
                    .collect();
                let lse = crate::scalar::logsumexp(logs.iter().copied());
                for s in 0..d {
                    probs[s] = (logs[s] - lse).exp();
                }
            }

            let self_base = if has_self {
                lay.self_block[c] as usize * m * d
            } else {
                0
            };
            for mm in 0..m {
                // exclusive products of the non-self factors
                prefix.clear();
                let mut acc = T::one();
                for f in factors.clone() {
                    prefix.push(acc);
                    let k = (lay.fblock[f] as usize * m + mm) * d + xp[lay.fpos[f] as usize] as usize;
                    acc *= eps[k];
                }
                let own = if has_self {
                    eps[self_base + mm * d + xs as usize]
                } else {
                    T::one()
                };
                let q = if lay.normalized {
                    let mut q = T::zero();
                    for s in 0..d {
                        q += eps[self_base + mm * d + s].scale(probs[s]);
                    }
                    q
                } else {
                    T::zero()
                };
                let mut suffix = T::one();
                for (l, f) in factors.clone().enumerate().rev() {
                    let excl = prefix[l] * suffix;
                    let k = (lay.fblock[f] as usize * m + mm) * d + xp[lay.fpos[f] as usize] as usize;
                    hol[k] += own * excl;
                    if lay.normalized {
                        corr[k] += q * excl;
                    }
                    suffix *= eps[k];
                }
                debug_assert_eq!(prefix.len(), len);
                if has_self {
                    hol[self_base + mm * d + xs as usize] += partial[mm];
                    if lay.normalized {
                        for s in 0..d {
                            corr[self_base + mm * d + s] += partial[mm].scale(probs[s]);
                        }
                    }
                }
            }
            if has_self {
                counts = self.add_counts(counts, xs);
            }
        }
        (hol, corr)
    }
}
