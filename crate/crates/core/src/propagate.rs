//! Time stepping of the reduced density matrix through process tensors.

use std::io::Write;

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, Array4, ArrayD, Axis, IxDyn};

use crate::ptmpo::ProcessTensor;
use crate::system::{left_superop, right_superop, SystemError, SystemLiouvillian};
use crate::tensor::{is_hermitian, unvectorize, vectorize};
use crate::{ComplexMatrix, C64};

#[derive(Debug, thiserror::Error)]
pub enum PropagateError {
    #[error("initial state: {0}")]
    InitialState(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("process tensor {index}: {msg}")]
    Grid { index: usize, msg: String },
    #[error("operator event at t = {0} ps lies outside the time grid")]
    EventTime(f64),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

/// Trotter ordering of the system propagator and the PT contractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrotterOrder {
    /// `M(dt/2)·PTs·M(dt/2)`.
    #[default]
    Symmetric,
    /// `PTs·M`.
    Asymmetric,
    /// `PTs·M` on even steps, `M·PTs` with reversed PT order on odd steps.
    Alternate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Operator applied to the density matrix at a grid point, after that
/// point's output has been recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorEvent {
    pub time: f64,
    pub side: Side,
    pub op: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub system: SystemLiouvillian,
    pub rho0: ComplexMatrix,
    pub ta: f64,
    pub dt: f64,
    pub n: usize,
    pub order: TrotterOrder,
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub values: Vec<C64>,
    pub trace: C64,
}

/// Grid index of time `t`, ties rounding to the later point.
pub fn snap_to_grid(t: f64, ta: f64, dt: f64) -> i64 {
    ((t - ta) / dt + 0.5).floor() as i64
}

fn check_initial(rho: &ComplexMatrix, d: usize) -> Result<(), PropagateError> {
    if rho.dim() != (d, d) {
        return Err(PropagateError::Dimension(format!("initial state is {:?}, system dimension {d}", rho.dim())));
    }
    let tr: C64 = rho.diag().sum();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(PropagateError::InitialState(format!("trace is {tr}, expected 1")));
    }
    if !is_hermitian(rho, 1e-8) {
        return Err(PropagateError::InitialState("not Hermitian".into()));
    }
    Ok(())
}

/// Joint state: system Liouville index followed by one inner bond per PT.
struct State {
    t: ArrayD<C64>,
}

impl State {
    fn new(rho: &ComplexMatrix, m: usize) -> Self {
        let v = vectorize(rho);
        let mut shape = vec![v.len()];
        shape.extend(std::iter::repeat(1).take(m));
        State { t: v.into_shape_with_order(IxDyn(&shape)).expect("bond dims are 1") }
    }

    fn d2(&self) -> usize {
        self.t.shape()[0]
    }

    fn rest(&self) -> usize {
        self.t.len() / self.d2()
    }

    /// Multiplies a `D² × D²` superoperator onto the system index.
    fn apply_system(&mut self, m: &ComplexMatrix) {
        let shape = self.t.shape().to_vec();
        let flat = m.dot(&self.t.view().into_shape_with_order((self.d2(), self.rest())).expect("contiguous"));
        self.t = flat.into_shape_with_order(IxDyn(&shape)).expect("same size");
    }

    /// Contracts one PT block into bond `k`.
    fn apply_block(&mut self, pt: &ProcessTensor, step: usize, k: usize) {
        let block = pt.block(step);
        let shape = self.t.shape().to_vec();
        let d2 = shape[0];
        let chi_in = shape[k + 1];
        let a: usize = shape[1..k + 1].iter().product();
        let b: usize = shape[k + 2..].iter().product();
        let src = self.t.view().into_shape_with_order((d2, a, chi_in, b)).expect("contiguous");
        let mut dst = Array4::<C64>::zeros((d2, a, block.dim_out, b));
        let one = C64::new(1.0, 0.0);
        for (beta, q) in block.entries() {
            let (alpha, alpha_in) = (beta as usize / d2, beta as usize % d2);
            for ai in 0..a {
                let x = src.slice(s![alpha_in, ai, .., ..]);
                let mut y = dst.slice_mut(s![alpha, ai, .., ..]);
                general_mat_mul(one, q, &x, one, &mut y);
            }
        }
        let mut new_shape = shape;
        new_shape[k + 1] = block.dim_out;
        self.t = dst.into_shape_with_order(IxDyn(&new_shape)).expect("same size");
    }

    /// Reduced density matrix after contracting every bond with its closure.
    fn reduced(&self, pts: &[&ProcessTensor], step: Option<usize>) -> Array1<C64> {
        let mut t = self.t.clone();
        for (k, pt) in pts.iter().enumerate().rev() {
            let q = match step {
                Some(l) => pt.closure(l).clone(),
                None => Array1::from_elem(1, C64::new(1.0, 0.0)),
            };
            t = t.map_axis(Axis(k + 1), |lane| lane.dot(&q));
        }
        t.into_shape_with_order(self.d2()).expect("single axis left")
    }
}

/// `Tr(Aρ)` for row-major vectorized `ρ`.
pub fn expectation(a: &ComplexMatrix, rho: &ComplexMatrix) -> C64 {
    a.dot(rho).diag().sum()
}

/// Propagates `setup.rho0` through the PTs, recording `Tr(Aρ(t))` for every
/// observable at each grid point, and returns the rows together with the
/// final reduced density matrix.
pub fn propagate(
    setup: &Propagation,
    pts: &[&ProcessTensor],
    events: &[OperatorEvent],
    observables: &[ComplexMatrix],
) -> Result<(Vec<Record>, ComplexMatrix), PropagateError> {
    let d = setup.system.dim;
    check_initial(&setup.rho0, d)?;
    if setup.dt <= 0.0 || !setup.dt.is_finite() {
        return Err(PropagateError::TimeStep(setup.dt));
    }
    for (index, pt) in pts.iter().enumerate() {
        if pt.dim != d {
            return Err(PropagateError::Grid { index, msg: format!("system dimension {} vs {d}", pt.dim) });
        }
        if (pt.dt - setup.dt).abs() > 1e-10 * setup.dt {
            return Err(PropagateError::Grid { index, msg: format!("time step {} vs {}", pt.dt, setup.dt) });
        }
        if let Some(max) = pt.max_steps() {
            if max < setup.n {
                return Err(PropagateError::Grid { index, msg: format!("covers {max} steps, {} requested", setup.n) });
            }
        }
    }
    for o in observables {
        if o.dim() != (d, d) {
            return Err(PropagateError::Dimension(format!("observable is {:?}, system dimension {d}", o.dim())));
        }
    }
    let mut scheduled: Vec<Vec<ComplexMatrix>> = vec![Vec::new(); setup.n + 1];
    for e in events {
        let k = snap_to_grid(e.time, setup.ta, setup.dt);
        if k < 0 || k as usize > setup.n {
            return Err(PropagateError::EventTime(e.time));
        }
        if e.op.dim() != (d, d) {
            return Err(PropagateError::Dimension(format!("event operator is {:?}, system dimension {d}", e.op.dim())));
        }
        scheduled[k as usize].push(match e.side {
            Side::Left => left_superop(&e.op),
            Side::Right => right_superop(&e.op),
        });
    }

    let sys = &setup.system;
    let frozen = !sys.is_time_dependent();
    let (half, full) = if frozen {
        (Some(sys.step_propagator(setup.ta, 0.5 * setup.dt)?), Some(sys.step_propagator(setup.ta, setup.dt)?))
    } else {
        (None, None)
    };
    let prop = |t: f64, dt: f64, cached: &Option<ComplexMatrix>| -> Result<ComplexMatrix, SystemError> {
        match cached {
            Some(m) => Ok(m.clone()),
            None => sys.step_propagator(t, dt),
        }
    };

    let mut state = State::new(&setup.rho0, pts.len());
    let mut records = Vec::with_capacity(setup.n + 1);
    let record = |state: &State, step: Option<usize>, t: f64, records: &mut Vec<Record>| -> ComplexMatrix {
        let rho = unvectorize(&state.reduced(pts, step), d);
        let values = observables.iter().map(|a| expectation(a, &rho)).collect();
        records.push(Record { t, values, trace: rho.diag().sum() });
        rho
    };
    let mut rho = record(&state, None, setup.ta, &mut records);
    for m in &scheduled[0] {
        state.apply_system(m);
    }
    for l in 0..setup.n {
        let t = setup.ta + l as f64 * setup.dt;
        match setup.order {
            TrotterOrder::Symmetric => {
                state.apply_system(&prop(t, 0.5 * setup.dt, &half)?);
                for (k, pt) in pts.iter().enumerate() {
                    state.apply_block(pt, l, k);
                }
                state.apply_system(&prop(t + 0.5 * setup.dt, 0.5 * setup.dt, &half)?);
            }
            TrotterOrder::Asymmetric => {
                state.apply_system(&prop(t, setup.dt, &full)?);
                for (k, pt) in pts.iter().enumerate() {
                    state.apply_block(pt, l, k);
                }
            }
            TrotterOrder::Alternate if l % 2 == 0 => {
                state.apply_system(&prop(t, setup.dt, &full)?);
                for (k, pt) in pts.iter().enumerate() {
                    state.apply_block(pt, l, k);
                }
            }
            TrotterOrder::Alternate => {
                for (k, pt) in pts.iter().enumerate().rev() {
                    state.apply_block(pt, l, k);
                }
                state.apply_system(&prop(t, setup.dt, &full)?);
            }
        }
        let tn = setup.ta + (l + 1) as f64 * setup.dt;
        rho = record(&state, Some(l), tn, &mut records);
        let tr = records.last().expect("just pushed").trace;
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-6 && scheduled[..=l].iter().all(|v| v.is_empty()) {
            log::debug!("trace deviation {:.3e} at t = {tn}", (tr - 1.0).norm());
        }
        for m in &scheduled[l + 1] {
            state.apply_system(m);
        }
    }
    Ok((records, rho))
}

/// `Tr(Aρ)` for each observable.
pub fn extract_observables(rho: &ComplexMatrix, observables: &[ComplexMatrix]) -> Vec<C64> {
    observables.iter().map(|a| expectation(a, rho)).collect()
}

/// C-style `%.{precision}g` formatting.
pub fn format_g(x: f64, precision: usize) -> String {
    let p = precision.max(1);
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, e) = sci.split_once('e').expect("exponent present");
    let e: i32 = e.parse().expect("integer exponent");
    if e < -4 || e >= p as i32 {
        let mant = trim_zeros(mant);
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (p as i32 - 1 - e).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes rows as `t Re Im Re Im …` with a `#` header.
pub fn write_output(out: &mut impl Write, names: &[String], records: &[Record], precision: usize) -> Result<(), PropagateError> {
    write!(out, "# t")?;
    for n in names {
        write!(out, " Re({n}) Im({n})")?;
    }
    writeln!(out)?;
    for r in records {
        write!(out, "{}", format_g(r.t, precision))?;
        for v in &r.values {
            write!(out, " {} {}", format_g(v.re, precision), format_g(v.im, precision))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Matrix of `Re` columns for convenient post-processing.
pub fn real_columns(records: &[Record]) -> Array2<f64> {
    let cols = records.first().map_or(0, |r| r.values.len());
    Array2::from_shape_fn((records.len(), cols), |(i, j)| records[i].values[j].re)
}
