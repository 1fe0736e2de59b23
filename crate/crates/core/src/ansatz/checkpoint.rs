//! Plain-text checkpoints.
//!
//! ```text
//! gpsvmc-checkpoint 1
//! variant ar-filter-gps
//! support 4
//! sites 16
//! local_dim 2
//! dtype real
//! lattice 4x4
//! boundary periodic,periodic
//! ordering 0 1 2 3 7 6 5 4 ...
//! gauge magnetization 0
//! filter_range none
//! seed 7
//! iteration 120
//! [params] 512
//! 0 1.0003e0
//! ...
//! [sr_v] 512
//! ...
//! [sr_prev] 512
//! ...
//! [chains] 4
//! 0101101001011010
//! ```
//!
//! Parameter lines hold the canonical index and the value (`re im` for complex
//! models). Floats use Rust's shortest round-trip formatting, so a save/load
//! cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::{Dtype, GpsModel, GpsVariant, ModelSpec, Params};
use crate::error::{Error, Result};
use crate::hilbert::{Boundary, Configuration, Lattice, LocalSpace, SiteOrdering};
use crate::symmetry::GaugeConstraint;

const MAGIC: &str = "gpsvmc-checkpoint 1";

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: GpsModel,
    pub seed: u64,
    /// Number of completed optimization steps.
    pub iteration: usize,
    /// Moving average of squared gradients.
    pub sr_v: Vec<f64>,
    /// Previous linear-solver solution, used as warm start.
    pub sr_prev: Vec<f64>,
    /// Persistent Metropolis chain states.
    pub chains: Vec<Configuration>,
}

impl Checkpoint {
    pub fn new(model: GpsModel, seed: u64) -> Self {
        Checkpoint {
            model,
            seed,
            iteration: 0,
            sr_v: Vec::new(),
            sr_prev: Vec::new(),
            chains: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let spec = self.model.spec();
        let mut out = String::new();
        let lattice = &spec.lattice;
        let join = |v: &[String], sep: &str| v.join(sep);
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "variant {}", spec.variant).unwrap();
        writeln!(out, "support {}", spec.support).unwrap();
        writeln!(out, "sites {}", lattice.n_sites()).unwrap();
        writeln!(out, "local_dim {}", spec.local.dim()).unwrap();
        writeln!(out, "dtype {}", spec.dtype).unwrap();
        let dims: Vec<String> = lattice.dims().iter().map(|d| d.to_string()).collect();
        writeln!(out, "lattice {}", join(&dims, "x")).unwrap();
        let bcs: Vec<String> = lattice.boundary().iter().map(|b| b.to_string()).collect();
        writeln!(out, "boundary {}", join(&bcs, ",")).unwrap();
        let ord: Vec<String> = spec.ordering.sequence().iter().map(|s| s.to_string()).collect();
        writeln!(out, "ordering {}", join(&ord, " ")).unwrap();
        match spec.gauge {
            None => writeln!(out, "gauge none"),
            Some(GaugeConstraint::Magnetization { two_sz }) => {
                writeln!(out, "gauge magnetization {two_sz}")
            }
            Some(GaugeConstraint::Electrons { n_up, n_down }) => {
                writeln!(out, "gauge electrons {n_up} {n_down}")
            }
        }
        .unwrap();
        match spec.filter_range {
            None => writeln!(out, "filter_range none"),
            Some(r) => writeln!(out, "filter_range {r:e}"),
        }
        .unwrap();
        writeln!(out, "seed {}", self.seed).unwrap();
        writeln!(out, "iteration {}", self.iteration).unwrap();

        match self.model.params() {
            Params::Real(p) => {
                writeln!(out, "[params] {}", p.len()).unwrap();
                for (k, v) in p.iter().enumerate() {
                    writeln!(out, "{k} {v:e}").unwrap();
                }
            }
            Params::Complex(p) => {
                writeln!(out, "[params] {}", p.len()).unwrap();
                for (k, v) in p.iter().enumerate() {
                    writeln!(out, "{k} {:e} {:e}", v.re, v.im).unwrap();
                }
            }
        }
        for (name, vals) in [("sr_v", &self.sr_v), ("sr_prev", &self.sr_prev)] {
            writeln!(out, "[{name}] {}", vals.len()).unwrap();
            for v in vals.iter() {
                writeln!(out, "{v:e}").unwrap();
            }
        }
        writeln!(out, "[chains] {}", self.chains.len()).unwrap();
        for c in &self.chains {
            writeln!(out, "{c}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        let bad = |line: usize, msg: &str| Error::Checkpoint(format!("line {}: {msg}", line + 1));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(Error::Checkpoint("missing checkpoint header".into())),
        }
        let mut header = std::collections::HashMap::new();
        while let Some((_, l)) = lines.peek() {
            if l.starts_with('[') {
                break;
            }
            let (no, l) = lines.next().unwrap();
            let l = l.trim();
            if l.is_empty() {
                continue;
            }
            let (key, val) = l.split_once(' ').ok_or_else(|| bad(no, "expected `key value`"))?;
            header.insert(key.to_string(), val.trim().to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Checkpoint(format!("missing header field `{k}`")))
        };
        let num = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::Checkpoint(format!("field `{k}` is not an integer")))
        };

        let variant: GpsVariant = get("variant")?.parse()?;
        let support = num("support")?;
        let sites = num("sites")?;
        let local = LocalSpace::from_dim(num("local_dim")?)?;
        let dtype: Dtype = get("dtype")?.parse()?;
        let dims = get("lattice")?
            .split('x')
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Checkpoint("bad lattice dims".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let bcs = get("boundary")?
            .split(',')
            .map(|s| s.parse::<Boundary>())
            .collect::<Result<Vec<_>>>()?;
        let lattice = Lattice::new(dims, bcs)?;
        if lattice.n_sites() != sites {
            return Err(Error::Checkpoint("site count does not match lattice".into()));
        }
        let ordering = SiteOrdering::from_sequence(
            get("ordering")?
                .split_whitespace()
                .map(|s| s.parse::<usize>().map_err(|_| Error::Checkpoint("bad ordering".into())))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let gauge_words: Vec<&str> = get("gauge")?.split_whitespace().collect();
        let int = |s: &str| s.parse::<i64>().map_err(|_| Error::Checkpoint("bad gauge".into()));
        let gauge = match gauge_words.as_slice() {
            ["none"] => None,
            ["magnetization", v] => Some(GaugeConstraint::magnetization(int(v)?)),
            ["electrons", u, d] => Some(GaugeConstraint::electrons(int(u)? as usize, int(d)? as usize)),
            _ => return Err(Error::Checkpoint("bad gauge".into())),
        };
        let filter_range = match get("filter_range")? {
            "none" => None,
            r => Some(
                r.parse::<f64>()
                    .map_err(|_| Error::Checkpoint("bad filter_range".into()))?,
            ),
        };
        let seed = get("seed")?
            .parse::<u64>()
            .map_err(|_| Error::Checkpoint("bad seed".into()))?;
        let iteration = num("iteration")?;

        let spec = ModelSpec {
            variant,
            local,
            lattice,
            ordering,
            support,
            dtype,
            gauge,
            filter_range,
        };

        let mut section = |name: &str| -> Result<Vec<(usize, String)>> {
            let (no, l) = lines
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("missing section [{name}]")))?;
            let rest = l
                .trim()
                .strip_prefix(&format!("[{name}]"))
                .ok_or_else(|| bad(no, &format!("expected section [{name}]")))?;
            let count: usize = rest.trim().parse().map_err(|_| bad(no, "bad section length"))?;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let (no, l) = lines.next().ok_or_else(|| bad(no, "section truncated"))?;
                out.push((no, l.trim().to_string()));
            }
            Ok(out)
        };
        let float = |no: usize, s: &str| s.parse::<f64>().map_err(|_| bad(no, "bad float"));

        let raw = section("params")?;
        let params = match dtype {
            Dtype::Real => {
                let mut p = vec![0.0; raw.len()];
                for (k, (no, l)) in raw.iter().enumerate() {
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() != 2 || f[0] != k.to_string() {
                        return Err(bad(*no, "expected `index value`"));
                    }
                    p[k] = float(*no, f[1])?;
                }
                Params::Real(p)
            }
            Dtype::Complex => {
                let mut p = vec![Complex64::new(0.0, 0.0); raw.len()];
                for (k, (no, l)) in raw.iter().enumerate() {
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() != 3 || f[0] != k.to_string() {
                        return Err(bad(*no, "expected `index re im`"));
                    }
                    p[k] = Complex64::new(float(*no, f[1])?, float(*no, f[2])?);
                }
                Params::Complex(p)
            }
        };
        let sr_v = section("sr_v")?
            .iter()
            .map(|(no, l)| float(*no, l))
            .collect::<Result<Vec<_>>>()?;
        let sr_prev = section("sr_prev")?
            .iter()
            .map(|(no, l)| float(*no, l))
            .collect::<Result<Vec<_>>>()?;
        let chains = section("chains")?
            .iter()
            .map(|(no, l)| {
                let states = l
                    .chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as u8)
                            .ok_or_else(|| bad(*no, "bad chain state"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Configuration::new(states, local)
            })
            .collect::<Result<Vec<_>>>()?;

        let model = GpsModel::new(spec, params)?;
        Ok(Checkpoint {
            model,
            seed,
            iteration,
            sr_v,
            sr_prev,
            chains,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
