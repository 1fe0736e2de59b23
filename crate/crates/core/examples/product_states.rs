// Any product state is an AR-GPS with M = 1, or a weight-shared AR-GPS
// with M = N.

use gpsvmc::ansatz::{product_state_embed, EmbedVariant, ProductStateTable};
use gpsvmc::hilbert::enumerate_sector;

pub fn run_example() -> gpsvmc::Result<()> {
    let table = ProductStateTable::random_normalized(5, 4, 3)?;
    for variant in [EmbedVariant::Full, EmbedVariant::WeightSharing] {
        let model = product_state_embed(&table, variant)?;
        let worst = enumerate_sector(5, 4, None)?
            .iter()
            .map(|x| (model.log_amplitude(x).exp() - table.amplitude(x)).norm())
            .fold(0.0, f64::max);
        println!(
            "{variant:?}: support {}, max amplitude error {worst:.1e}",
            model.support()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> gpsvmc::Result<()> {
    run_example()
}
