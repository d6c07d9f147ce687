// Scene classification: the labeled image is cut into single-class tiles,
// each tile is encoded by a trained network followed by sum pooling over
// its four quadrants, and a one-vs-rest linear SVM with cross-validated C
// is trained on half the scenes.

use featlearn::classify::{cv_select_c, svm_predict, svm_train, LabeledFeatures, DEFAULT_C_GRID};
use featlearn::cli::stratified_split;
use featlearn::imageio::{synth_dataset, tile_scenes, SynthSpec};
use featlearn::metrics::{confusion, kappa, overall_accuracy};
use featlearn::network::{extract_features, Mode};
use featlearn::trainer::{pretrain_network, TrainSchedule};
use featlearn::{ArchitectureSpec, LayerSpec, Pooling};
use ndarray::Array2;

pub fn run() -> featlearn::Result<()> {
    let (image, labels) = synth_dataset(&SynthSpec::acceptance_default(), 3)?;
    let arch = ArchitectureSpec::new(image.channels(), vec![LayerSpec::new(16, 5).with_pooling(Pooling::Max(2))]);
    let net = pretrain_network(std::slice::from_ref(&image), &arch, &[TrainSchedule::new(4096, 0)])?;

    let scenes = tile_scenes(&image, &labels, 16)?;
    let rows: Vec<Vec<f64>> = scenes
        .iter()
        .map(|(tile, _)| Ok(extract_features(tile, &arch, &net.filters, Mode::Scene)?.into_vector().expect("vector")))
        .collect::<featlearn::Result<_>>()?;
    let y: Vec<u16> = scenes.iter().map(|s| s.1).collect();
    let x = Array2::from_shape_vec((rows.len(), rows[0].len()), rows.concat()).expect("equal lengths");
    println!("{} scenes, {} features each", x.nrows(), x.ncols());

    let all = LabeledFeatures::new(x, y)?;
    let (train_idx, test_idx) = stratified_split(all.y(), 0.5, 7)?;
    let (train, test) = (all.subset(&train_idx)?, all.subset(&test_idx)?);
    let cv = cv_select_c(&train, &DEFAULT_C_GRID, 3, 7)?;
    for (c, acc) in &cv.scores {
        println!("  C = {c:<6} cv accuracy {acc:.3}");
    }
    let model = svm_train(&train, cv.best_c, 7)?;
    let m = confusion(test.y(), &svm_predict(&model, test.x())?, 4)?;
    println!("C = {}: OA {:.3}, kappa {:.3}", cv.best_c, overall_accuracy(&m)?, kappa(&m)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
