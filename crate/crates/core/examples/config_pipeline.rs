// The CLI pipeline driven from code: the same JSON config the `featlearn`
// binary reads, executed command by command in a scratch directory.

use featlearn::cli::{Command, Invocation, PipelineConfig};

const CONFIG: &str = r#"{
  "seed": 4,
  "dataset": {
    "synth": {
      "rows": 64, "cols": 64, "channels": 4, "noise_sigma": 0.05, "grid_rows": 2, "grid_cols": 2,
      "classes": [
        {"kind": "spectral", "signature": [0.2, 0.4, 0.6, 0.8]},
        {"kind": "texture", "pattern": {"type": "checkerboard", "size": 2},
         "first": [0.2, 0.4, 0.6, 0.8], "second": [0.8, 0.6, 0.4, 0.2]}
      ]
    }
  },
  "architecture": {"layers": [{"outputs": 8, "receptive_field": 3}]},
  "schedule": [{"patches": 2000}],
  "outputs": {"map": "map.ppm"}
}"#;

pub fn run() -> featlearn::Result<()> {
    let config: PipelineConfig = serde_json::from_str(CONFIG)?;
    let dir = std::env::temp_dir().join("featlearn-pipeline-example");
    let inv = Invocation::new(config, &dir);
    for command in [Command::Synth, Command::Train, Command::Classify, Command::Rank] {
        let summary = inv.execute(command)?;
        let text = serde_json::to_string(&summary)?;
        println!("{:<8} {}", command.name(), &text[..text.len().min(140)]);
    }
    println!("outputs in {}", dir.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
