//! A resumable parameter sweep over embedding variants.
//!
//! cargo run --release --example sweep -- [grid.toml] [out_dir]

use std::path::PathBuf;

use jsteg::commands::{cmd_sweep, SweepGrid};

const DEFAULT_GRID: &str = r#"
modes = ["sym", "si", "oracle-esi", "esi"]
payloads = [0.4]
deltas = [0.0, 0.05, 0.5]
etas = [0.65]
seeds = [1, 2]

[corpus]
count = 80
size = 64
"#;

fn main() -> jsteg::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let grid = match args.next() {
        Some(p) => SweepGrid::from_toml(&std::fs::read_to_string(p)?)?,
        None => SweepGrid::from_toml(DEFAULT_GRID)?,
    };
    let out = args.next().map_or_else(|| std::env::temp_dir().join("jsteg-sweep"), PathBuf::from);
    let summary = cmd_sweep(&grid, &out, false)?;
    print!("{}", std::fs::read_to_string(&summary.table)?);
    println!("cells in {}", out.join("cells").display());
    Ok(())
}
