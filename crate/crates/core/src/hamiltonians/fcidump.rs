use std::path::Path;

use super::AbInitioIntegrals;
use crate::error::{Error, Result};

/// Tolerance for two entries that address the same symmetry-equivalent integral.
const DUPLICATE_TOL: f64 = 1e-10;

/// Reads an FCIDUMP file: a `&FCI NORB=…, NELEC=…, MS2=…` namelist header
/// ending in `&END` (or `/`), then lines `value i j k l` with 1-based indices.
/// `k = l = 0` marks a one-body integral `h_ij`, all-zero indices the core energy.
pub fn parse_fcidump(path: impl AsRef<Path>) -> Result<AbInitioIntegrals> {
    parse_fcidump_str(&std::fs::read_to_string(path)?)
}

pub(crate) fn parse_fcidump_str(text: &str) -> Result<AbInitioIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let err = |line: usize, msg: &str| Error::Fcidump {
        line: line + 1,
        msg: msg.to_string(),
    };
    let mut header = String::new();
    let mut body_start = None;
    for (no, l) in lines.iter().enumerate() {
        let t = l.trim();
        if no == 0 && !t.to_ascii_uppercase().starts_with("&FCI") {
            return Err(err(no, "header must start with &FCI"));
        }
        let upper = t.to_ascii_uppercase();
        if upper.starts_with("&END") || upper == "/" {
            body_start = Some(no + 1);
            break;
        }
        header.push_str(t.trim_start_matches("&FCI").trim_start_matches("&fci"));
        header.push(' ');
    }
    let body_start = body_start.ok_or_else(|| err(0, "header is not terminated by &END"))?;

    let field = |name: &str| -> Result<Option<i64>> {
        let upper = header.to_ascii_uppercase();
        let Some(pos) = upper
            .match_indices(name)
            .find(|(p, _)| {
                let before = upper[..*p].chars().last();
                !matches!(before, Some(c) if c.is_ascii_alphanumeric())
                    && upper[p + name.len()..].trim_start().starts_with('=')
            })
            .map(|(p, _)| p)
        else {
            return Ok(None);
        };
        let rest = upper[pos + name.len()..]
            .trim_start()
            .trim_start_matches('=')
            .trim_start();
        let token: String = rest
            .chars()
            .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
            .collect();
        token
            .parse::<i64>()
            .map(Some)
            .map_err(|_| err(0, &format!("malformed {name} field")))
    };
    let norb = field("NORB")?.ok_or_else(|| err(0, "missing NORB"))?;
    let nelec = field("NELEC")?.ok_or_else(|| err(0, "missing NELEC"))?;
    let ms2 = field("MS2")?.unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(err(0, "NORB must be positive and NELEC non-negative"));
    }
    let n = norb as usize;
    if n > 64 {
        return Err(err(0, "more than 64 orbitals are not supported"));
    }

    let mut h1: Vec<Option<f64>> = vec![None; n * n];
    let mut h2: Vec<Option<f64>> = vec![None; n.pow(4)];
    let mut e_core: Option<f64> = None;
    let put = |slot: &mut Option<f64>, v: f64, no: usize| -> Result<()> {
        match slot {
            Some(old) if (*old - v).abs() > DUPLICATE_TOL * old.abs().max(1.0) => {
                Err(err(no, &format!("conflicting duplicate entry ({old} vs {v})")))
            }
            _ => {
                *slot = Some(v);
                Ok(())
            }
        }
    };

    for (no, l) in lines.iter().enumerate().skip(body_start) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(err(no, "expected `value i j k l`"));
        }
        let v: f64 = fields[0]
            .replace(['D', 'd'], "e")
            .parse()
            .map_err(|_| err(no, "bad integral value"))?;
        let mut idx = [0usize; 4];
        for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
            let k: usize = f.parse().map_err(|_| err(no, "bad orbital index"))?;
            if k > n {
                return Err(err(no, &format!("index {k} exceeds NORB={n}")));
            }
            *slot = k;
        }
        match idx {
            [0, 0, 0, 0] => put(&mut e_core, v, no)?,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                let (i, j) = (i - 1, j - 1);
                put(&mut h1[i * n + j], v, no)?;
                put(&mut h1[j * n + i], v, no)?;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                for (a, b, c, d) in [
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ] {
                    put(&mut h2[((a * n + b) * n + c) * n + d], v, no)?;
                }
            }
            _ => return Err(err(no, "invalid index pattern")),
        }
    }

    AbInitioIntegrals::new(
        n,
        nelec as usize,
        ms2,
        h1.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
        h2.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
        e_core.unwrap_or(0.0),
    )
}
