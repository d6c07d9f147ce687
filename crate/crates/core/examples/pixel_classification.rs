// Pixel classification on the texture task, where single-pixel spectra
// carry no class information. A 1-NN classifier on raw pixels is compared
// with the same classifier on one- and two-layer EPLS features, using 5%
// of the labels for training.

use featlearn::cli::{evaluate_features, ClassifierConfig};
use featlearn::imageio::{synth_dataset, SynthSpec};
use featlearn::network::{extract_features, Mode};
use featlearn::trainer::{pretrain_network, TrainSchedule};
use featlearn::{ArchitectureSpec, FeatureMap, LayerSpec, Pooling};
use ndarray::ArrayView2;

fn kappa(x: ArrayView2<'_, f64>, y: &[u16]) -> featlearn::Result<f64> {
    Ok(evaluate_features(x, y, &ClassifierConfig::Knn1, 0.05, 0)?.evaluation.kappa)
}

fn learned(image: &FeatureMap, layers: Vec<LayerSpec>) -> featlearn::Result<FeatureMap> {
    let arch = ArchitectureSpec::new(image.channels(), layers);
    let schedules: Vec<_> = (0..arch.len()).map(|l| TrainSchedule::new(4096, l as u64)).collect();
    let net = pretrain_network(std::slice::from_ref(image), &arch, &schedules)?;
    // pixel mode upsamples the top layer back to the input grid
    Ok(extract_features(image, &arch, &net.filters, Mode::Pixel)?
        .into_map()
        .expect("pixel mode yields a map"))
}

pub fn run() -> featlearn::Result<()> {
    let (image, labels) = synth_dataset(&SynthSpec::texture_task(), 11)?;
    let y = labels.labels();
    println!("raw spectra      kappa {:.3}", kappa(image.pixel_matrix(), y)?);

    let one = learned(&image, vec![LayerSpec::new(32, 5)])?;
    println!("1 layer (r=5)    kappa {:.3}", kappa(one.pixel_matrix(), y)?);

    let two = learned(
        &image,
        vec![LayerSpec::new(32, 3).with_pooling(Pooling::Max(2)), LayerSpec::new(32, 3)],
    )?;
    println!("2 layers (r=3)   kappa {:.3}", kappa(two.pixel_matrix(), y)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
