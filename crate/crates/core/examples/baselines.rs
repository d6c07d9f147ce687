// PCA, RBF kernel PCA and OMP-1 fitted on the pixels of the default scene,
// each scored with the same 1-NN evaluation.

use featlearn::baselines::{kpca_fit_subsampled, kpca_transform, omp1_encode, omp1_fit, pca_fit, pca_transform};
use featlearn::cli::{evaluate_features, ClassifierConfig};
use featlearn::imageio::{synth_dataset, SynthSpec};
use ndarray::ArrayView2;

fn kappa(x: ArrayView2<'_, f64>, y: &[u16]) -> featlearn::Result<f64> {
    Ok(evaluate_features(x, y, &ClassifierConfig::Knn1, 0.05, 0)?.evaluation.kappa)
}

pub fn run() -> featlearn::Result<()> {
    let (image, labels) = synth_dataset(&SynthSpec::acceptance_default(), 5)?;
    let (x, y) = (image.pixel_matrix(), labels.labels());

    let pca = pca_fit(x, 4)?;
    println!("PCA   eigenvalues {:.3}", pca.eigenvalues);
    println!("PCA   4 features  kappa {:.3}", kappa(pca_transform(&pca, x)?.view(), y)?);

    // the lengthscale defaults to the mean distance between fitting samples
    let kpca = kpca_fit_subsampled(x, 4, None, 500, 1)?;
    println!("kPCA  lengthscale {:.3}", kpca.lengthscale);
    println!("kPCA  4 features  kappa {:.3}", kappa(kpca_transform(&kpca, x)?.view(), y)?);

    let omp = omp1_fit(x, 16, 10, 1)?;
    println!("OMP-1 error trace {:.1?}", omp.training_error);
    println!("OMP-1 dead atoms before re-seeding, per epoch {:?}", omp.dead_before_reseed);
    println!("OMP-1 16 atoms    kappa {:.3}", kappa(omp1_encode(&omp.model, x)?.view(), y)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
