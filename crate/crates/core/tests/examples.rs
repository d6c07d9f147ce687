#[allow(dead_code)]
mod synth_and_render {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/synth_and_render.rs"));
}

#[test]
fn synth_and_render_example_runs() {
    synth_and_render::run().expect("synth_and_render example should run");
}

#[allow(dead_code)]
mod epls_targets {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/epls_targets.rs"));
}

#[test]
fn epls_targets_example_runs() {
    epls_targets::run().expect("epls_targets example should run");
}

#[allow(dead_code)]
mod pretrain_layer {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pretrain_layer.rs"));
}

#[test]
fn pretrain_layer_example_runs() {
    pretrain_layer::run().expect("pretrain_layer example should run");
}

#[allow(dead_code)]
mod pixel_classification {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pixel_classification.rs"));
}

#[test]
fn pixel_classification_example_runs() {
    pixel_classification::run().expect("pixel_classification example should run");
}

#[allow(dead_code)]
mod baselines {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/baselines.rs"));
}

#[test]
fn baselines_example_runs() {
    baselines::run().expect("baselines example should run");
}

#[allow(dead_code)]
mod scene_svm {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scene_svm.rs"));
}

#[test]
fn scene_svm_example_runs() {
    scene_svm::run().expect("scene_svm example should run");
}

#[allow(dead_code)]
mod feature_ranking {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/feature_ranking.rs"));
}

#[test]
fn feature_ranking_example_runs() {
    feature_ranking::run().expect("feature_ranking example should run");
}

#[allow(dead_code)]
mod config_pipeline {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config_pipeline.rs"));
}

#[test]
fn config_pipeline_example_runs() {
    config_pipeline::run().expect("config_pipeline example should run");
}
