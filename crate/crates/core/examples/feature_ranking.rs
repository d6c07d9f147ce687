// Ranks learned features by mutual information with the labels and
// renders the three most informative ones as grayscale images.

use featlearn::imageio::{encode_feature_ppm, synth_dataset, SynthSpec};
use featlearn::metrics::{rank_features, DEFAULT_MI_BINS};
use featlearn::network::{extract_features, Mode};
use featlearn::trainer::{pretrain_network, TrainSchedule};
use featlearn::{ArchitectureSpec, LayerSpec};

pub fn run() -> featlearn::Result<()> {
    let (image, labels) = synth_dataset(&SynthSpec::acceptance_default(), 8)?;
    let arch = ArchitectureSpec::new(image.channels(), vec![LayerSpec::new(16, 5)]);
    let net = pretrain_network(std::slice::from_ref(&image), &arch, &[TrainSchedule::new(4096, 2)])?;
    let features = extract_features(&image, &arch, &net.filters, Mode::Pixel)?
        .into_map()
        .expect("pixel mode yields a map");

    let scores = rank_features(features.pixel_matrix(), labels.labels(), DEFAULT_MI_BINS)?;
    for s in &scores {
        println!("feature {:>2}  MI {:.3} nats", s.index, s.mutual_information);
    }

    let dir = std::env::temp_dir().join("featlearn-ranking-example");
    std::fs::create_dir_all(&dir).map_err(|e| featlearn::Error::io(&dir, e))?;
    for s in scores.iter().take(3) {
        let path = dir.join(format!("feature_{}.ppm", s.index));
        std::fs::write(&path, encode_feature_ppm(&features, s.index)?).map_err(|e| featlearn::Error::io(&path, e))?;
    }
    println!("top features rendered to {}", dir.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
