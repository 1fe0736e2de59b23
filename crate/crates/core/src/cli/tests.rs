use std::path::Path;

use super::*;
use crate::error::Error;

fn chain_config(dir: &Path, extra: &str) -> RunConfig {
    let text = format!(
        r#"
[system]
kind = "heisenberg"
lattice = [4]

[model]
variant = "ar-gps"
support = 2
init_scale = 0.1

[symmetry]
marshall = true

[sampling]
n_samples = 64
seed = 5

[optimizer]
n_iterations = 6

[output]
dir = "{}"
timing = false
workers = 1
checkpoint_every = 3
{extra}
"#,
        dir.display()
    );
    RunConfig::from_toml_str(&text).unwrap()
}

fn field_of(e: Error) -> String {
    match e {
        Error::Config { field, .. } => field,
        other => panic!("expected a config error, got {other}"),
    }
}

fn parse(text: &str) -> Result<RunConfig> {
    RunConfig::from_toml_str(text)
}

#[test]
fn validation_names_the_offending_fields() {
    let base = "[system]\nkind = \"heisenberg\"\nlattice = [4]\n";
    let e = parse(&format!("{base}[model]\nvariant = \"masked-gps\"\nsupport = 2\n")).unwrap_err();
    let f = field_of(e);
    assert!(f.contains("sampling.sampler") && f.contains("model.variant"), "{f}");

    let e = parse(&format!(
        "{base}[model]\nvariant = \"ar-gps\"\nsupport = 2\n[symmetry]\ngroup = \"z2\"\nkind = \"projective\"\n"
    ))
    .unwrap_err();
    assert!(field_of(e).contains("symmetry.kind"));

    let e = parse(
        "[system]\nkind = \"hubbard\"\nlattice = [4]\n[model]\nvariant = \"ar-gps\"\nsupport = 2\n[symmetry]\nmarshall = true\n",
    )
    .unwrap_err();
    assert_eq!(field_of(e), "symmetry.marshall");

    let e = parse("[system]\nkind = \"abinitio\"\n[model]\nvariant = \"ar-gps\"\nsupport = 2\n").unwrap_err();
    assert_eq!(field_of(e), "system.fcidump");

    let e = parse(&format!("{base}[model]\nvariant = \"ar-gps\"\nsupport = 0\n")).unwrap_err();
    assert_eq!(field_of(e), "model.support");

    let e = parse(&format!(
        "{base}[model]\nvariant = \"ar-gps\"\nsupport = 2\nsuport = 3\n"
    ))
    .unwrap_err();
    assert!(e.to_string().contains("suport"), "{e}");

    let e = parse(&format!(
        "{base}[model]\nvariant = \"ar-gps\"\nsupport = 2\n[optimizer]\neta = -1.0\n"
    ))
    .unwrap_err();
    assert!(e.to_string().contains("eta"), "{e}");

    assert!(parse(&format!(
        "{base}[model]\nvariant = \"masked-gps\"\nsupport = 2\n[sampling]\nsampler = \"metropolis\"\n"
    ))
    .is_ok());
}

#[test]
fn defaults_follow_the_system_kind() {
    let cfg =
        parse("[system]\nkind = \"heisenberg\"\nlattice = [2, 2]\n[model]\nvariant = \"ar-filter-gps\"\nsupport = 4\n")
            .unwrap();
    assert_eq!(cfg.n_samples(), 4096);
    assert_eq!(cfg.sr_config(), crate::optimizer::SrConfig::lattice());
    assert_eq!(cfg.sampling.sampler, SamplerKind::Direct);
    let sys = build_system(&cfg).unwrap();
    assert_eq!(sys.key, "heisenberg/2x2/periodic,periodic/J=1/2sz=0");
}

#[test]
fn trace_has_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_vmc_config(&chain_config(dir.path(), "")).unwrap();
    let text = std::fs::read_to_string(&summary.trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "iter,energy,stderr,aux,solver_iters,wall_ms");
    assert_eq!(lines.len(), 7);
    for (k, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[0], k.to_string());
        assert_eq!(fields[5], "0");
    }
    assert_eq!(summary.iterations, 6);
    assert!(summary.checkpoint.exists());
    assert!(summary.reference.is_none());
    assert!(summary.line().contains("6 iterations"));
}

#[test]
fn identical_configs_give_identical_traces() {
    for sampler in ["direct", "metropolis"] {
        let extra = format!("\n[sampling]\nsampler = \"{sampler}\"\nn_samples = 64\nseed = 5\nn_chains = 4\n");
        let traces: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let mut cfg = chain_config(dir.path(), "");
                cfg.sampling = RunConfig::from_toml_str(&format!(
                    "[system]\nkind = \"heisenberg\"\nlattice = [4]\n[model]\nvariant = \"ar-gps\"\nsupport = 2\n{extra}"
                ))
                .unwrap()
                .sampling;
                let s = run_vmc_config(&cfg).unwrap();
                std::fs::read(s.trace).unwrap()
            })
            .collect();
        assert_eq!(traces[0], traces[1], "{sampler}");
    }
}

#[test]
fn resume_reproduces_the_uninterrupted_run() {
    for sampler in [SamplerKind::Direct, SamplerKind::Metropolis] {
        let full_dir = tempfile::tempdir().unwrap();
        let mut full = chain_config(full_dir.path(), "");
        full.sampling.sampler = sampler;
        full.sampling.n_chains = 4;
        let reference = std::fs::read(run_vmc_config(&full).unwrap().trace).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let mut first = chain_config(dir.path(), "");
        first.sampling = full.sampling.clone();
        first.optimizer.n_iterations = Some(3);
        run_vmc_config(&first).unwrap();
        let mut second = first.clone();
        second.optimizer.n_iterations = Some(6);
        second.output.resume = true;
        let s = run_vmc_config(&second).unwrap();
        assert_eq!(s.iterations, 6);
        assert_eq!(std::fs::read(s.trace).unwrap(), reference, "{sampler:?}");
    }
}

#[test]
fn resume_rejects_a_different_model() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = chain_config(dir.path(), "");
    cfg.optimizer.n_iterations = Some(1);
    run_vmc_config(&cfg).unwrap();
    cfg.model.support = 3;
    cfg.output.resume = true;
    assert!(matches!(run_vmc_config(&cfg), Err(Error::Checkpoint(_))));
}

#[test]
fn sweep_rows_carry_table_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "[system]\nkind = \"heisenberg\"\nlattice = [4]\n[model]\nvariant = \"ar-gps\"\nsupport = 1\n\
         [sampling]\nn_samples = 32\n[optimizer]\nn_iterations = 2\n[output]\ndir = \"{}\"\ntiming = false\n",
        dir.path().display()
    );
    let base: toml::Value = toml::from_str(&text).unwrap();
    let rows = run_sweep_config(base.clone(), dir.path(), &parse_grid("M=1,2").unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, m) in rows.iter().zip([1, 2]) {
        assert_eq!(row.status, "ok");
        assert_eq!(row.support, m);
        // D·M·N(N+1)/2 with D = 2, N = 4
        assert_eq!(row.n_params, Some(2 * m * 10));
    }
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));

    let rows = run_sweep_config(
        base,
        dir.path(),
        &parse_grid("M=1;variant=ar-filter-gps,masked-gps").unwrap(),
    )
    .unwrap();
    assert_eq!(rows[0].status, "ok");
    assert_eq!(rows[0].n_params, Some(2 * 4));
    assert!(rows[1].status.contains("direct sampling"), "{}", rows[1].status);
}

#[test]
fn grid_parsing() {
    let axes = parse_grid("M=1,2; variant=ar-gps ;optimizer.eta=0.1").unwrap();
    assert_eq!(axes.len(), 3);
    assert_eq!(axes[0].values, vec![toml::Value::Integer(1), toml::Value::Integer(2)]);
    assert_eq!(axes[1].values, vec![toml::Value::String("ar-gps".into())]);
    assert_eq!(axes[2].values, vec![toml::Value::Float(0.1)]);
    assert!(parse_grid("").is_err());
    assert!(parse_grid("M").is_err());
    assert!(parse_grid("M=").is_err());
}

#[test]
fn ed_row_quotes_the_key() {
    let cfg = parse(
        "[system]\nkind = \"hubbard\"\nlattice = [2]\nboundary = [\"open\"]\nu = 4.0\n[model]\nvariant = \"ar-gps\"\nsupport = 1\n",
    )
    .unwrap();
    let r = ed_config(&cfg).unwrap();
    assert!((r.energy - (2.0 - 8f64.sqrt())).abs() < 1e-12);
    assert_eq!(r.sector_dim, 4);
    assert_eq!(
        r.csv_row(),
        "\"hubbard/2/open/t=1/U=4/n=1,1\",-0.828427124746,\"exact diagonalization, sector dimension 4\""
    );
}

#[test]
fn sample_histogram_matches_born_weights() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = chain_config(dir.path(), "");
    let h = sample_config(&cfg, 20_000).unwrap();
    assert_eq!(h.n_samples, 20_000);
    let exact = h.exact.as_ref().unwrap();
    assert_eq!(exact.len(), 6);
    assert!((exact.values().sum::<f64>() - 1.0).abs() < 1e-10);
    assert!(h.tv_distance().unwrap() < 0.02);
    assert_eq!(h.to_csv().lines().count(), 7);
    assert!(sample_config(&cfg, 0).is_err());
}

#[test]
fn configured_worker_count_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = chain_config(dir.path(), "");
    assert_eq!(with_workers(&cfg, || Ok(rayon::current_num_threads())).unwrap(), 1);
}
