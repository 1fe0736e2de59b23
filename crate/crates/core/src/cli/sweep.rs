use std::fmt::Write as _;
use std::path::Path;

use super::{parameter_count, run_vmc_config, RunConfig};
use crate::error::{Error, Result};

pub const SWEEP_HEADER: &str = "variant,M,n_params,seed,final_energy,relative_error,status";

/// One grid dimension: a config field and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub key: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: String,
    pub support: usize,
    pub n_params: Option<usize>,
    pub seed: u64,
    pub final_energy: Option<f64>,
    pub relative_error: Option<f64>,
    /// `ok`, or the error message of a failed point.
    pub status: String,
}

impl SweepRow {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},\"{}\"",
            self.variant,
            self.support,
            opt(self.n_params.map(|v| v.to_string())),
            self.seed,
            opt(self.final_energy.map(|v| v.to_string())),
            opt(self.relative_error.map(|v| v.to_string())),
            self.status.replace('"', "'")
        )
    }
}

/// `M=1,2;variant=ar-gps,masked-gps;seed=1,2,3`. Besides the shorthands
/// `M`, `variant`, `seed` and `dtype`, any `section.field` path is accepted.
pub fn parse_grid(spec: &str) -> Result<Vec<GridAxis>> {
    let mut axes = Vec::new();
    for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, vals) = part
            .split_once('=')
            .ok_or_else(|| Error::config("--grid", format!("expected `key=v1,v2`, got `{part}`")))?;
        let values: Vec<toml::Value> = vals.split(',').map(|v| scalar(v.trim())).collect();
        if values.is_empty() || vals.trim().is_empty() {
            return Err(Error::config("--grid", format!("no values for `{key}`")));
        }
        axes.push(GridAxis {
            key: key.trim().to_string(),
            values,
        });
    }
    if axes.is_empty() {
        return Err(Error::config("--grid", "empty grid"));
    }
    Ok(axes)
}

fn scalar(s: &str) -> toml::Value {
    if let Ok(i) = s.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = s.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(s.to_string())
    }
}

fn paths(key: &str) -> Result<Vec<(&str, &str)>> {
    Ok(match key {
        "M" | "support" => vec![("model", "support")],
        "variant" => vec![("model", "variant")],
        "dtype" => vec![("model", "dtype")],
        "seed" => vec![("sampling", "seed"), ("model", "init_seed")],
        other => match other.split_once('.') {
            Some(p) => vec![p],
            None => return Err(Error::config("--grid", format!("unknown grid key `{other}`"))),
        },
    })
}

fn set(value: &mut toml::Value, key: &str, v: &toml::Value) -> Result<()> {
    for (section, field) in paths(key)? {
        let table = value
            .as_table_mut()
            .ok_or_else(|| Error::config("<file>", "not a table"))?
            .entry(section)
            .or_insert_with(|| toml::Value::Table(Default::default()))
            .as_table_mut()
            .ok_or_else(|| Error::config(section, "not a table"))?;
        table.insert(field.to_string(), v.clone());
    }
    Ok(())
}

fn label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every point of the grid; failed points are recorded and skipped.
/// Each point writes to `<output.dir>/<key>=<value>_...`, and the summary goes
/// to `<output.dir>/sweep.csv`.
pub fn run_sweep(config: impl AsRef<Path>, grid: &str) -> Result<Vec<SweepRow>> {
    let path = config.as_ref();
    let text = std::fs::read_to_string(path)?;
    let base: toml::Value = toml::from_str(&text).map_err(|e| Error::config("<file>", e.message()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    run_sweep_config(base, &base_dir, &parse_grid(grid)?)
}

pub fn run_sweep_config(base: toml::Value, base_dir: &Path, axes: &[GridAxis]) -> Result<Vec<SweepRow>> {
    let template = {
        let mut c = RunConfig::from_value(base.clone())?;
        c.base_dir = base_dir.to_path_buf();
        c
    };
    let out_dir = template.output_dir();
    std::fs::create_dir_all(&out_dir)?;

    let total: usize = axes.iter().map(|a| a.values.len()).product();
    let mut rows = Vec::with_capacity(total);
    for point in 0..total {
        let mut value = base.clone();
        let mut rem = point;
        let mut name = Vec::new();
        for axis in axes.iter().rev() {
            let v = &axis.values[rem % axis.values.len()];
            rem /= axis.values.len();
            set(&mut value, &axis.key, v)?;
            name.push(format!("{}={}", axis.key, label(v)));
        }
        name.reverse();
        let sub = out_dir.join(name.join("_"));
        set(
            &mut value,
            "output.dir",
            &toml::Value::String(sub.to_string_lossy().into_owned()),
        )?;
        rows.push(run_point(value, base_dir));
    }

    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        writeln!(csv, "{}", r.csv_row()).unwrap();
    }
    std::fs::write(out_dir.join("sweep.csv"), csv)?;
    Ok(rows)
}

fn run_point(value: toml::Value, base_dir: &Path) -> SweepRow {
    let model = value.get("model");
    let get_str = |k: &str| model.and_then(|m| m.get(k)).map(label).unwrap_or_default();
    let mut row = SweepRow {
        variant: get_str("variant"),
        support: get_str("support").parse().unwrap_or(0),
        n_params: None,
        seed: value
            .get("sampling")
            .and_then(|s| s.get("seed"))
            .and_then(|s| s.as_integer())
            .map(|s| s as u64)
            .unwrap_or(1),
        final_energy: None,
        relative_error: None,
        status: "ok".into(),
    };
    let result = RunConfig::from_value(value).and_then(|mut cfg| {
        cfg.base_dir = base_dir.to_path_buf();
        row.n_params = Some(parameter_count(&cfg)?);
        run_vmc_config(&cfg)
    });
    match result {
        Ok(s) => {
            row.final_energy = Some(s.final_energy);
            row.relative_error = s.relative_error;
        }
        Err(e) => row.status = e.to_string(),
    }
    row
}
