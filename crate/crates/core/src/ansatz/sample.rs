use num_complex::Complex64;
use rand::Rng;

use super::{with_params, GpsModel};
use crate::hilbert::Configuration;
use crate::scalar::{logsumexp, Scalar};

impl GpsModel {
    /// Left-to-right ancestral sampling from the normalized conditionals,
    /// building the prefix products incrementally. Caller checks the variant.
    pub(crate) fn sample_autoregressive<R: Rng + ?Sized>(&self, rng: &mut R) -> (Configuration, Complex64) {
        with_params!(self, |eps| self.sample_generic(eps, rng))
    }

    fn sample_generic<T: Scalar, R: Rng + ?Sized>(&self, eps: &[T], rng: &mut R) -> (Configuration, Complex64) {
        let lay = self.layout();
        let (n, d) = (lay.n, lay.d);
        let mut xp = vec![0u8; n];
        let mut partial = vec![T::zero(); lay.m];
        let mut z = [T::zero(); 4];
        let mut counts = (0, 0);
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..n {
            lay.partial(eps, &xp, i, &mut partial);
            lay.self_logs(eps, i, &partial, &mut z);
            let allowed = self.allowed(i, counts);
            let mut logs = [f64::NEG_INFINITY; 4];
            for s in 0..d {
                if allowed[s] {
                    logs[s] = 2.0 * z[s].re();
                }
            }
            let lse = logsumexp(logs[..d].iter().copied());
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = None;
            for s in 0..d {
                if !allowed[s] {
                    continue;
                }
                acc += (logs[s] - lse).exp();
                pick = Some(s);
                if u < acc {
                    break;
                }
            }
            let s = pick.expect("gauge leaves no admissible state") as u8;
            xp[i] = s;
            total += z[s as usize].to_c64() - 0.5 * lse;
            counts = self.add_counts(counts, s);
        }
        let mut sites = vec![0u8; n];
        for (p, &s) in xp.iter().enumerate() {
            sites[self.ordering().site(p)] = s;
        }
        (Configuration::from_vec_unchecked(sites), total)
    }
}
