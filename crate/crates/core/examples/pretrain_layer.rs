// Trains one convolutional layer with EPLS on contrast-normalized patches
// and prints the epoch trace.

use featlearn::imageio::{extract_patches, normalize_patches, synth_dataset, SynthSpec, DEFAULT_NORMALIZATION_EPS};
use featlearn::trainer::{pretrain_layer, TrainSchedule};
use featlearn::LayerSpec;

pub fn run() -> featlearn::Result<()> {
    let (image, _) = synth_dataset(&SynthSpec::acceptance_default(), 1)?;
    let patches = normalize_patches(&extract_patches(&[image], 5, 4096, 7)?, DEFAULT_NORMALIZATION_EPS);

    let layer = LayerSpec::new(32, 5);
    let (filters, reports) = pretrain_layer(&patches, &layer, &TrainSchedule::new(patches.len(), 3))?;
    for r in &reports {
        let busiest = r.selections.iter().max().copied().unwrap_or(0);
        println!(
            "epoch {:>2}  error {:.4}  batch {:>4}  mean rate {:.2e}  busiest output {busiest}",
            r.epoch, r.mean_error, r.batch_size, r.learning_rate.mean
        );
    }
    let (first, last) = (reports[0].mean_error, reports[reports.len() - 1].mean_error);
    println!(
        "{} filters of length {}; error down {:.0}%",
        filters.outputs(),
        filters.input_dim(),
        100.0 * (1.0 - last / first)
    );
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
