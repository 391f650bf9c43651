use std::fmt::Write as _;
use std::path::Path;

use crate::config::from_args;
use crate::ptmpo::read_pt;
use crate::{Error, Result};

/// One line per block (`step dim_in dim_out entries`) and a summary line.
pub fn analyze(path: &Path) -> Result<String> {
    let pt = read_pt(path)?;
    let mut s = String::new();
    let _ = writeln!(s, "# dim {} dt {} blocks {}", pt.dim, pt.dt, pt.len());
    if let Some(k) = pt.repeat_from {
        let _ = writeln!(s, "# periodic: blocks {k}..{} repeat", pt.len());
    }
    let _ = writeln!(s, "# step dim_in dim_out outer_entries");
    for (l, b) in pt.chain.blocks.iter().enumerate() {
        let _ = writeln!(s, "{l} {} {} {}", b.dim_in, b.dim_out, b.entry_count());
    }
    let _ = writeln!(s, "max bond dimension: {}", pt.max_bond());
    Ok(s)
}

/// Entry point of `PTB_analyze -read_PT FILE`.
pub fn main_ptb_analyze(args: &[String]) -> i32 {
    let go = || -> Result<String> {
        let map = from_args(args)?;
        let file = map.get_string("read_PT")?.ok_or_else(|| Error::Usage("usage: PTB_analyze -read_PT FILE".into()))?;
        analyze(Path::new(&file))
    };
    match go() {
        Ok(s) => {
            print!("{s}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
