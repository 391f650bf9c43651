//! Runs a configuration file the way the ACE binary does and prints the last
//! output row. Defaults to `configs/rabi.param`. Paths in the file, outputs
//! included, are resolved relative to the file.

use std::path::PathBuf;

use ace_core::cli::{run, RunPlan};
use ace_core::config::parse_config_file;

fn main() -> ace_core::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/rabi.param"));
    let map = parse_config_file(&path)?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    let plan = RunPlan::from_map_in(&map, &base)?;
    let summary = run(&plan)?;
    for (label, blocks, bond) in &summary.pts {
        println!("PT {label}: {blocks} blocks, max bond {bond}");
    }
    for f in &summary.written {
        println!("wrote {}", f.display());
    }
    if let Some(r) = summary.records.last() {
        let values: Vec<String> = r.values.iter().map(|v| format!("{:.6}", v.re)).collect();
        println!("t = {}: {}", r.t, values.join(" "));
    }
    Ok(())
}
