//! The `ACE`, `PTB_analyze` and `readexpression` front ends.

mod analyze;
mod plan;
mod readexpr;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

pub use analyze::{analyze, main_ptb_analyze};
pub use plan::{Method, PtInput, RunPlan};
pub use readexpr::main_readexpression;

use crate::config::from_args;
use crate::methods::{ace_from_bath, ace_sequential, ace_tree, discretize_continuum, gaussian_kernels, gaussian_pt, GaussianMethod, SingleModeSpec};
use crate::propagate::{propagate, write_output, Record};
use crate::ptmpo::{expand_outer, read_pt, stack, write_pt, ProcessTensor};
use crate::{Error, Result};

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub records: Vec<Record>,
    /// `(label, blocks, max bond)` for every PT used or generated.
    pub pts: Vec<(String, usize, usize)>,
    pub written: Vec<PathBuf>,
}

fn combine_modes(plan: &RunPlan, modes: &[SingleModeSpec]) -> Result<ProcessTensor> {
    Ok(if plan.tree { ace_tree(modes, &plan.grid, &plan.schedule)? } else { ace_sequential(modes, &plan.grid, &plan.schedule)? })
}

/// PT generated from the environment specification, if any.
fn generate(plan: &RunPlan) -> Result<Vec<ProcessTensor>> {
    let d = plan.propagation.system.dim;
    let mut out = Vec::new();
    let gaussian = plan.method.is_gaussian();
    if gaussian {
        let g = plan.gaussian.as_ref().ok_or_else(|| Error::Usage("Gaussian methods need a Boson spectral density".into()))?;
        let n_mem = plan.n_mem.unwrap_or(plan.grid.n).max(1);
        let (n_mem, method) = match plan.method {
            Method::GaussianPeriodic => {
                let m = plan.n_mem.ok_or_else(|| Error::Usage("use_Gaussian_periodic needs t_mem or n_mem".into()))?;
                (m, GaussianMethod::Periodic)
            }
            Method::GaussianDnc => (n_mem.min(plan.grid.n.max(1)), GaussianMethod::DivideAndConquer),
            _ => (n_mem.min(plan.grid.n.max(1)), GaussianMethod::Jp),
        };
        let kernel = gaussian_kernels(&g.bath, plan.grid.dt, n_mem)?;
        out.push(gaussian_pt(&g.sys_op, &kernel, plan.grid.n, &plan.schedule.compression, method, true)?);
    }
    let mut modes = plan.single_modes.clone();
    let boson = plan.boson.as_ref().filter(|_| !gaussian);
    if modes.is_empty() && plan.fermion.is_none() {
        if let Some(b) = boson {
            out.push(ace_from_bath(b, &plan.grid, &plan.schedule, plan.tree, true)?);
        }
    } else {
        for b in boson.into_iter().chain(plan.fermion.as_ref()) {
            if b.sys_op.nrows() != d {
                return Err(Error::Usage(format!("bath coupling operator has dimension {}, system has {d}", b.sys_op.nrows())));
            }
            modes.extend(discretize_continuum(b, &b.sys_op)?);
        }
        if !modes.is_empty() {
            out.push(combine_modes(plan, &modes)?);
        }
    }
    Ok(out)
}

/// Executes a plan: load and generate PTs, write them, propagate.
pub fn run(plan: &RunPlan) -> Result<RunSummary> {
    let mut summary = RunSummary::default();
    let mut pts: Vec<(String, ProcessTensor)> = Vec::new();
    for input in &plan.add_pt {
        let mut pt = read_pt(&input.path)?;
        if input.left > 1 || input.right > 1 {
            pt = expand_outer(&pt, input.left, input.right)?;
        }
        pts.push((input.path.display().to_string(), pt));
    }
    let mut generated = generate(plan)?;
    if let Some(path) = &plan.initial_pt {
        let initial = read_pt(path)?;
        let last = plan.schedule.at(1, 1);
        generated = match generated.len() {
            0 => vec![initial],
            _ => generated.into_iter().map(|g| stack(&initial, &g, &last)).collect::<std::result::Result<_, _>>()?,
        };
    }
    if generated.len() > 1 && generated.iter().all(|p| p.repeat_from.is_none()) {
        let c = plan.schedule.at(1, 1);
        let mut it = generated.into_iter();
        let mut acc = it.next().expect("len > 1");
        for g in it {
            acc = stack(&acc, &g, &c)?;
        }
        generated = vec![acc];
    }
    if let Some(path) = &plan.write_pt {
        match generated.as_slice() {
            [pt] => summary.written = write_pt(pt, path, plan.buffer_blocksize)?,
            [] => return Err(Error::Usage("write_PT given but no PT was generated".into())),
            _ => return Err(Error::Usage("write_PT needs a single generated PT; periodic PTs cannot be merged".into())),
        }
    }
    for (k, pt) in generated.into_iter().enumerate() {
        pts.push((format!("generated {k}"), pt));
    }
    for (label, pt) in &pts {
        summary.pts.push((label.clone(), pt.len(), pt.max_bond()));
    }
    if plan.outfile.is_none() && !plan.outputs.is_empty() {
        log::warn!("add_Output given without outfile; skipping propagation");
    }
    if let Some(out) = &plan.outfile {
        let refs: Vec<&ProcessTensor> = pts.iter().map(|(_, p)| p).collect();
        let obs: Vec<_> = plan.outputs.iter().map(|(_, m)| m.clone()).collect();
        let (records, _) = propagate(&plan.propagation, &refs, &plan.events, &obs)?;
        let names: Vec<String> = plan.outputs.iter().map(|(n, _)| n.clone()).collect();
        let file = File::create(out).map_err(Error::Io)?;
        let mut w = BufWriter::new(file);
        write_output(&mut w, &names, &records, plan.precision)?;
        summary.records = records;
    }
    Ok(summary)
}

/// Entry point of the `ACE` binary.
pub fn main_ace(args: &[String]) -> i32 {
    let go = || -> Result<RunSummary> {
        let map = from_args(args)?;
        for unknown in map.unknown_commands() {
            log::warn!("unknown command '{unknown}' ignored");
        }
        let plan = RunPlan::from_map(&map)?;
        run(&plan)
    };
    match go() {
        Ok(summary) => {
            for (label, blocks, bond) in &summary.pts {
                println!("PT {label}: {blocks} blocks, max inner bond {bond}");
            }
            for p in &summary.written {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
