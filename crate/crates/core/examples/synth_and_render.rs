// Generates the default synthetic scene, writes it in the raster formats
// and renders the ground truth as a PPM map.
//
// ```text
// cargo run --release --example synth_and_render
// ```

use featlearn::imageio::{read_labels, read_raster, render_map, synth_dataset, write_labels, write_raster, SynthSpec};

pub fn run() -> featlearn::Result<()> {
    let spec = SynthSpec::acceptance_default();
    let (image, labels) = synth_dataset(&spec, 42)?;
    println!(
        "{}x{} image, {} bands, {} classes",
        image.rows(),
        image.cols(),
        image.channels(),
        labels.num_classes()
    );
    for region in spec.regions().iter().take(4) {
        println!("  rows {:?} cols {:?} -> class {}", region.rows, region.cols, region.class);
    }

    let dir = std::env::temp_dir().join("featlearn-synth-example");
    std::fs::create_dir_all(&dir).map_err(|e| featlearn::Error::io(&dir, e))?;
    write_raster(&image, dir.join("scene.ersf"))?;
    write_labels(&labels, dir.join("scene.ersl"))?;
    render_map(&labels, dir.join("truth.ppm"))?;

    // values are stored as f32
    let back = read_raster(dir.join("scene.ersf"))?;
    let worst = back
        .as_slice()
        .iter()
        .zip(image.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert_eq!(read_labels(dir.join("scene.ersl"))?, labels);
    println!("round-trip error {worst:.1e}; files in {}", dir.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
