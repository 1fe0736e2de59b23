// A run described by a TOML config, as the `gpsvmc run` command does it.

use gpsvmc::cli::{run_vmc_config, RunConfig};

const CONFIG: &str = r#"
[system]
kind = "hubbard"
lattice = [6]
boundary = ["open"]
u = 4.0

[model]
variant = "ar-filter-gps"
support = 8
dtype = "complex"

[sampling]
n_samples = 512

[optimizer]
n_iterations = 60

[output]
timing = false
checkpoint_every = 0
"#;

pub fn run_example() -> gpsvmc::Result<()> {
    let dir = std::env::temp_dir().join(format!("gpsvmc-example-{}", std::process::id()));
    let text = format!("{CONFIG}dir = {:?}\n", dir.display().to_string());
    let summary = run_vmc_config(&RunConfig::from_toml_str(&text)?)?;
    println!("{summary:#?}");
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
