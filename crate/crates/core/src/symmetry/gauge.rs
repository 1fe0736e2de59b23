use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Configuration, LocalSpace};

/// Conserved quantity enforced by zeroing conditionals during sequential
/// generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaugeConstraint {
    /// Total `2·S_z` of a spin-1/2 system.
    Magnetization { two_sz: i64 },
    /// Fixed numbers of ↑ and ↓ electrons.
    Electrons { n_up: usize, n_down: usize },
}

impl GaugeConstraint {
    pub fn magnetization(two_sz: i64) -> Self {
        GaugeConstraint::Magnetization { two_sz }
    }

    pub fn electrons(n_up: usize, n_down: usize) -> Self {
        GaugeConstraint::Electrons { n_up, n_down }
    }

    /// Required `(↑, ↓)` totals on `n` sites. For spins the second entry is
    /// the number of down spins.
    pub fn targets(&self, n: usize) -> Result<(usize, usize)> {
        match *self {
            GaugeConstraint::Magnetization { two_sz } => {
                let up2 = n as i64 + two_sz;
                if up2 < 0 || up2 % 2 != 0 || up2 / 2 > n as i64 {
                    return Err(Error::Gauge(format!("2·Sz = {two_sz} is not reachable with {n} spins")));
                }
                let up = (up2 / 2) as usize;
                Ok((up, n - up))
            }
            GaugeConstraint::Electrons { n_up, n_down } => {
                if n_up > n || n_down > n {
                    return Err(Error::Gauge(format!(
                        "{n_up}↑ + {n_down}↓ electrons do not fit on {n} sites"
                    )));
                }
                Ok((n_up, n_down))
            }
        }
    }

    pub fn check(&self, n: usize, local: LocalSpace) -> Result<()> {
        match (self, local) {
            (GaugeConstraint::Magnetization { .. }, LocalSpace::Spin)
            | (GaugeConstraint::Electrons { .. }, LocalSpace::Fermion) => self.targets(n).map(|_| ()),
            _ => Err(Error::Gauge(format!(
                "{self:?} does not apply to a {local:?} local space"
            ))),
        }
    }

    /// Whether placing `state` at position `pos`, after a prefix carrying
    /// `counts = (↑, ↓)`, can still be completed to a constrained configuration.
    #[inline]
    pub fn allows(&self, local: LocalSpace, n: usize, pos: usize, counts: (usize, usize), state: u8) -> bool {
        let remaining = n - pos - 1;
        let (a, b) = local.counts(state);
        match *self {
            GaugeConstraint::Magnetization { two_sz } => {
                let target = (n as i64 + two_sz) / 2;
                let up = counts.0 as i64 + a as i64;
                up <= target && target - up <= remaining as i64
            }
            GaugeConstraint::Electrons { n_up, n_down } => {
                let up = counts.0 + a as usize;
                let dn = counts.1 + b as usize;
                up <= n_up && n_up - up <= remaining && dn <= n_down && n_down - dn <= remaining
            }
        }
    }

    pub fn is_satisfied(&self, x: &Configuration, local: LocalSpace) -> bool {
        let Ok((up, down)) = self.targets(x.len()) else {
            return false;
        };
        let (u, d) = x.particle_counts(local);
        match self {
            GaugeConstraint::Magnetization { .. } => u == up,
            GaugeConstraint::Electrons { .. } => u == up && d == down,
        }
    }
}

/// Local states allowed at position `i` given the already assigned `prefix`
/// (`prefix.len() == i`), in generation order. At least one entry is true for
/// any prefix reachable from the first position.
pub fn gauge_mask(
    prefix: &[u8],
    i: usize,
    n: usize,
    local: LocalSpace,
    constraint: &GaugeConstraint,
) -> Result<Vec<bool>> {
    if prefix.len() != i || i >= n {
        return Err(Error::Gauge(format!(
            "prefix of length {} does not end before position {i} of {n}",
            prefix.len()
        )));
    }
    constraint.check(n, local)?;
    let counts = prefix.iter().fold((0usize, 0usize), |(u, d), &s| {
        let (a, b) = local.counts(s);
        (u + a as usize, d + b as usize)
    });
    let mask: Vec<bool> = (0..local.dim() as u8)
        .map(|s| constraint.allows(local, n, i, counts, s))
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::Gauge(format!(
            "prefix {prefix:?} cannot be completed under {constraint:?}"
        )));
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{DOUBLE, EMPTY, SPIN_DOWN, SPIN_UP};

    #[test]
    fn magnetization_forces_down() {
        let c = GaugeConstraint::magnetization(0);
        let mask = gauge_mask(&[SPIN_UP, SPIN_UP], 2, 4, LocalSpace::Spin, &c).unwrap();
        assert_eq!(mask, vec![true, false]);
        assert!(mask[SPIN_DOWN as usize]);
    }

    #[test]
    fn electrons_force_empty() {
        let c = GaugeConstraint::electrons(1, 1);
        let mask = gauge_mask(&[DOUBLE], 1, 2, LocalSpace::Fermion, &c).unwrap();
        assert_eq!(mask, vec![true, false, false, false]);
        assert!(mask[EMPTY as usize]);
    }

    #[test]
    fn infeasible_prefix_is_error() {
        let c = GaugeConstraint::magnetization(0);
        assert!(gauge_mask(&[SPIN_UP, SPIN_UP, SPIN_UP], 3, 4, LocalSpace::Spin, &c).is_err());
    }

    #[test]
    fn unreachable_targets() {
        assert!(GaugeConstraint::magnetization(1).targets(4).is_err());
        assert!(GaugeConstraint::electrons(5, 0).targets(4).is_err());
        assert!(GaugeConstraint::electrons(1, 1).check(2, LocalSpace::Spin).is_err());
    }
}
