use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::config::{parse_config_file, parse_count, parse_matrix, parse_scalar, ConfigError, Entry, ParameterMap};
use crate::expr::eval_str;
use crate::methods::{
    recommended_modes, spectral_from_file, Bath, Coupling, GaussianBath, Grid, ModeKind, Schedule, SingleModeSpec,
    SpectralDensity,
};
use crate::propagate::{OperatorEvent, Propagation, Side, TrotterOrder};
use crate::ptmpo::Compression;
use crate::system::{left_superop, pulse_from_file, right_superop, Envelope, SystemLiouvillian};
use crate::{ComplexMatrix, Error, Result, C64};

const DEFAULT_PRECISION: usize = 8;

/// PT generation scheme, by precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    None,
    AceSequential,
    AceTree,
    GaussianJp,
    GaussianDnc,
    GaussianPeriodic,
}

impl Method {
    pub fn is_gaussian(self) -> bool {
        matches!(self, Method::GaussianJp | Method::GaussianDnc | Method::GaussianPeriodic)
    }
}

/// A PT file to load, with optional outer-bond expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PtInput {
    pub path: PathBuf,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone)]
pub struct GaussianSpec {
    pub bath: GaussianBath,
    pub sys_op: ComplexMatrix,
}

/// Everything a run needs, resolved from a parameter map.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub method: Method,
    pub tree: bool,
    pub grid: Grid,
    pub schedule: Schedule,
    pub n_mem: Option<usize>,
    pub add_pt: Vec<PtInput>,
    pub initial_pt: Option<PathBuf>,
    pub write_pt: Option<PathBuf>,
    pub buffer_blocksize: Option<usize>,
    pub single_modes: Vec<SingleModeSpec>,
    pub boson: Option<Bath>,
    pub fermion: Option<Bath>,
    pub gaussian: Option<GaussianSpec>,
    pub propagation: Propagation,
    pub events: Vec<OperatorEvent>,
    pub outputs: Vec<(String, ComplexMatrix)>,
    pub outfile: Option<PathBuf>,
    pub precision: usize,
}

fn arg<'a>(e: &'a Entry, i: usize) -> Result<&'a str> {
    e.args.get(i).map(String::as_str).ok_or_else(|| ConfigError::MissingArgument { command: e.command.clone(), index: i + 1 }.into())
}

fn scalar(e: &Entry, i: usize) -> Result<f64> {
    Ok(parse_scalar(&e.command, arg(e, i)?)?)
}

fn matrix(e: &Entry, i: usize) -> Result<ComplexMatrix> {
    Ok(parse_matrix(&e.command, arg(e, i)?)?)
}

fn pulse(e: &Entry, base: &Path) -> Result<(Envelope, ComplexMatrix)> {
    match arg(e, 0)? {
        "Gauss" => Ok((
            Envelope::Gauss { t_c: scalar(e, 1)?, fwhm: scalar(e, 2)?, area: scalar(e, 3)?, detuning: scalar(e, 4)? },
            matrix(e, 5)?,
        )),
        "file" => Ok((pulse_from_file(&base.join(arg(e, 1)?))?, matrix(e, 2)?)),
        other => Err(Error::Usage(format!("unknown pulse type '{other}' (expected Gauss or file)"))),
    }
}

/// System Hamiltonian, pulses, Lindblad terms and operator insertions of a
/// (sub-)configuration on a space of dimension `dim`.
fn system_from_map(map: &ParameterMap, dim: usize, base: &Path) -> Result<(SystemLiouvillian, Vec<OperatorEvent>)> {
    let mut sys = SystemLiouvillian::new(dim);
    let mut events = Vec::new();
    for e in map.entries() {
        match e.command.as_str() {
            "add_Hamiltonian" => sys.add_hamiltonian(&matrix(e, 0)?)?,
            "add_Pulse" => {
                let (env, op) = pulse(e, base)?;
                sys.add_pulse(env, op)?;
            }
            "add_Lindblad" => sys.add_lindblad(scalar(e, 0)?, matrix(e, 1)?)?,
            "apply_Operator_left" | "apply_Operator_right" => {
                let side = if e.command.ends_with("left") { Side::Left } else { Side::Right };
                events.push(OperatorEvent { time: scalar(e, 0)?, side, op: matrix(e, 1)? });
            }
            _ => {}
        }
    }
    Ok((sys, events))
}

fn system_dim(map: &ParameterMap) -> Result<usize> {
    if let Some(m) = map.get_matrix("initial")? {
        return Ok(m.nrows());
    }
    for cmd in ["add_Hamiltonian", "add_Lindblad", "add_Output"] {
        if let Some(e) = map.all(cmd).next() {
            let i = if cmd == "add_Lindblad" { 1 } else { 0 };
            return Ok(matrix(e, i)?.nrows());
        }
    }
    if let Some(e) = map.all("add_single_mode").next() {
        let h = matrix(e, 0)?;
        let r = matrix(e, 1)?;
        return Ok(h.nrows() / r.nrows().max(1));
    }
    Ok(2)
}

fn single_mode_from_file(e: &Entry, d: usize, base: &Path) -> Result<SingleModeSpec> {
    let path = base.join(arg(e, 0)?);
    let rho = matrix(e, 1)?;
    let sub = parse_config_file(&path)?;
    let dim = d * rho.nrows();
    let (generator, events) = system_from_map(&sub, dim, path.parent().unwrap_or(Path::new(".")))?;
    let mut spec = SingleModeSpec::new(d, generator, rho)?;
    spec.insertions = events
        .into_iter()
        .map(|ev| {
            let op = match ev.side {
                Side::Left => left_superop(&ev.op),
                Side::Right => right_superop(&ev.op),
            };
            (ev.time, op)
        })
        .collect();
    Ok(spec)
}

fn spectral(map: &ParameterMap, p: &str, base: &Path) -> Result<Option<Coupling>> {
    let file = map.get_string(&format!("{p}_J_from_file"))?;
    let kind = map.get_string(&format!("{p}_J_type"))?;
    let g = map.get_f64_opt(&format!("{p}_g"))?;
    let rate = map.get_f64_opt(&format!("{p}_rate"))?;
    let given = [file.is_some(), kind.is_some(), g.is_some(), rate.is_some()].iter().filter(|&&x| x).count();
    if given > 1 {
        log::warn!("several couplings given for the {p} bath; using the first of {p}_J_from_file, {p}_J_type, {p}_rate, {p}_g");
    }
    if let Some(f) = file {
        return Ok(Some(Coupling::Density(spectral_from_file(&base.join(f))?)));
    }
    if let Some(k) = kind {
        return match k.as_str() {
            "QDPhonon" => {
                let a_e = map.get_f64(&format!("{p}_J_a_e"), 4.0)?;
                let a_h = map.get_f64(&format!("{p}_J_a_h"), a_e / 1.15)?;
                Ok(Some(Coupling::Density(SpectralDensity::QdPhonon { a_e, a_h })))
            }
            other => Err(Error::Usage(format!("unknown {p}_J_type '{other}' (supported: QDPhonon)"))),
        };
    }
    if let Some(r) = rate {
        return Ok(Some(Bath::rate_coupling(r)));
    }
    Ok(g.map(Coupling::Constant))
}

fn bath(map: &ParameterMap, p: &str, grid: &Grid, te: f64, base: &Path) -> Result<Option<Bath>> {
    let coupling = spectral(map, p, base)?;
    let n_modes = map.get_usize_opt(&format!("{p}_N_modes"))?;
    let coupling = match (coupling, n_modes) {
        (None, None) => return Ok(None),
        (None, Some(_)) => return Err(Error::Usage(format!("{p}_N_modes given without a coupling ({p}_g, {p}_rate, {p}_J_from_file or {p}_J_type)"))),
        (Some(c), _) => c,
    };
    let fermion = p == "Fermion";
    let omega_min = map.get_f64(&format!("{p}_omega_min"), 0.0)?;
    let omega_max = map.get_f64(&format!("{p}_omega_max"), 0.0)?;
    let n_modes = match n_modes {
        Some(n) => n,
        None => {
            let n = recommended_modes(omega_min, omega_max, grid.ta, te);
            // Gaussian methods never discretize the bath.
            let gaussian = ["use_Gaussian", "use_Gaussian_periodic", "use_Gaussian_divide_and_conquer"]
                .iter()
                .any(|k| map.get_bool(k, false).unwrap_or(false));
            if !gaussian {
                log::warn!("{p}_N_modes not set; using the recommended {n} modes");
            }
            n
        }
    };
    let sys_op = match map.get_matrix(&format!("{p}_SysOp"))? {
        Some(m) => m,
        None => eval_str(if fermion { "{|0><1|_2}" } else { "{|1><1|_2}" }).expect("valid literal"),
    };
    let kind = if fermion {
        let e_fermi = match map.get_f64_opt("Fermion_EFermi")? {
            Some(x) => x,
            None => map.get_f64("Fermion_E_Fermi", -1e6)?,
        };
        ModeKind::Fermion { e_fermi }
    } else {
        ModeKind::Boson { levels: map.get_usize("Boson_M", 2)? }
    };
    Ok(Some(Bath {
        kind,
        n_modes,
        sys_op,
        coupling,
        omega_min,
        omega_max,
        temperature: map.get_f64(&format!("{p}_temperature"), 0.0)?,
        subtract_polaron_shift: map.get_bool(&format!("{p}_subtract_polaron_shift"), !fermion)?,
    }))
}

impl RunPlan {
    /// Resolves a parameter map. Relative file names are taken relative to
    /// the working directory.
    pub fn from_map(map: &ParameterMap) -> Result<Self> {
        Self::from_map_in(map, Path::new(""))
    }

    pub fn from_map_in(map: &ParameterMap, base: &Path) -> Result<Self> {
        let dt = map.get_f64("dt", 0.01)?;
        let ta = map.get_f64("ta", 0.0)?;
        let te = map.get_f64("te", 10.0)?;
        let grid = Grid::new(ta, te, dt)?;
        let d = system_dim(map)?;
        let (system, events) = system_from_map(map, d, base)?;
        let rho0 = match map.get_matrix("initial")? {
            Some(m) => m,
            None => {
                let mut m = Array2::zeros((d, d));
                m[[0, 0]] = C64::new(1.0, 0.0);
                m
            }
        };
        let order = if map.get_bool("propagate_alternate", false)? {
            TrotterOrder::Alternate
        } else if map.get_bool("use_symmetric_Trotter", true)? {
            TrotterOrder::Symmetric
        } else {
            TrotterOrder::Asymmetric
        };
        let threshold = map.get_f64("threshold", 0.0)?;
        let compression = Compression {
            threshold,
            forward_ratio: map.get_f64("forward_threshold_ratio", 1.0)?,
            backward_ratio: map.get_f64("backward_threshold_ratio", 1.0)?,
            select_ratio: map.get_f64("select_threshold_ratio", 1.0)?,
        };
        let schedule = Schedule {
            compression,
            range_factor: map.get_f64("threshold_range_factor", 1.0)?,
            final_sweeps: map.get_usize("final_sweep_n", 0)?,
            final_threshold: map.get_f64_opt("final_sweep_threshold")?,
        };
        let n_mem = match map.get_usize_opt("n_mem")? {
            Some(n) => Some(n),
            None => map.get_f64_opt("t_mem")?.map(|t| (t / dt).round() as usize),
        };

        let mut add_pt = Vec::new();
        for e in map.all("add_PT") {
            let count = |i: usize| -> Result<usize> {
                match e.args.get(i) {
                    Some(s) => Ok(parse_count(&e.command, s)?),
                    None => Ok(1),
                }
            };
            add_pt.push(PtInput { path: base.join(arg(e, 0)?), left: count(1)?, right: count(2)? });
        }
        if map.all("initial_PT").count() > 1 {
            return Err(Error::Usage("initial_PT can be given at most once".into()));
        }
        let initial_pt = map.get_string("initial_PT")?.map(|s| base.join(s));

        let mut single_modes = Vec::new();
        for e in map.entries() {
            match e.command.as_str() {
                "add_single_mode" => single_modes.push(SingleModeSpec::from_hamiltonian(d, &matrix(e, 0)?, matrix(e, 1)?)?),
                "add_single_mode_from_file" => single_modes.push(single_mode_from_file(e, d, base)?),
                _ => {}
            }
        }
        let boson = bath(map, "Boson", &grid, te, base)?;
        let fermion = bath(map, "Fermion", &grid, te, base)?;

        let flags = [
            (map.get_bool("use_Gaussian_periodic", false)?, Method::GaussianPeriodic),
            (map.get_bool("use_Gaussian_divide_and_conquer", false)?, Method::GaussianDnc),
            (map.get_bool("use_Gaussian", false)?, Method::GaussianJp),
        ];
        let chosen: Vec<Method> = flags.iter().filter(|f| f.0).map(|f| f.1).collect();
        if chosen.len() > 1 {
            log::warn!("several Gaussian methods selected; using {:?}", chosen[0]);
        }
        let tree = map.get_bool("use_combine_tree", false)?;
        let has_modes = !single_modes.is_empty() || boson.is_some() || fermion.is_some();
        let method = match chosen.first() {
            Some(&m) => m,
            None if has_modes && tree => Method::AceTree,
            None if has_modes => Method::AceSequential,
            None => Method::None,
        };
        let gaussian = match (&boson, method.is_gaussian()) {
            (Some(b), true) => {
                let j = match &b.coupling {
                    Coupling::Density(j) => j.clone(),
                    Coupling::Constant(_) => {
                        return Err(Error::Usage("Gaussian methods need a spectral density, not Boson_g".into()));
                    }
                };
                Some(GaussianSpec {
                    bath: GaussianBath {
                        j,
                        temperature: b.temperature,
                        omega_min: b.omega_min,
                        omega_max: b.omega_max,
                        subtract_polaron_shift: b.subtract_polaron_shift,
                    },
                    sys_op: b.sys_op.clone(),
                })
            }
            _ => None,
        };

        let mut outputs = Vec::new();
        for e in map.all("add_Output") {
            outputs.push((arg(e, 0)?.to_string(), matrix(e, 0)?));
        }
        Ok(RunPlan {
            method,
            tree,
            grid,
            schedule,
            n_mem,
            add_pt,
            initial_pt,
            write_pt: map.get_string("write_PT")?.map(|s| base.join(s)),
            buffer_blocksize: map.get_usize_opt("buffer_blocksize")?.filter(|&b| b > 0),
            single_modes,
            boson,
            fermion,
            gaussian,
            propagation: Propagation { system, rho0, ta, dt, n: grid.n, order },
            events,
            outputs,
            outfile: map.get_string("outfile")?.map(|s| base.join(s)),
            precision: map.get_usize("set_precision", DEFAULT_PRECISION)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Origin;

    fn plan(text: &str) -> RunPlan {
        RunPlan::from_map(&ParameterMap::parse_str(text, Origin::File).unwrap()).unwrap()
    }

    #[test]
    fn defaults() {
        let p = plan("");
        assert_eq!(p.method, Method::None);
        assert_eq!(p.grid.n, 1000);
        assert_eq!(p.propagation.order, TrotterOrder::Symmetric);
        assert_eq!(p.precision, 8);
        assert_eq!(p.propagation.system.dim, 2);
    }

    #[test]
    fn method_precedence() {
        let p = plan("use_Gaussian true\nuse_Gaussian_divide_and_conquer true\nBoson_rate 1\nBoson_omega_max 10\n");
        assert_eq!(p.method, Method::GaussianDnc);
        let p = plan("use_combine_tree true\nadd_single_mode {Id_4} {|0><0|_2}\n");
        assert_eq!(p.method, Method::AceTree);
        assert_eq!(plan("add_single_mode {Id_4} {|0><0|_2}\n").method, Method::AceSequential);
    }

    #[test]
    fn fermion_bath() {
        let p = plan("Fermion_N_modes 10\nFermion_rate 1\nFermion_omega_min -10\nFermion_omega_max 10\nFermion_E_Fermi 0");
        let b = p.fermion.unwrap();
        assert_eq!(b.kind, ModeKind::Fermion { e_fermi: 0.0 });
        assert!(!b.subtract_polaron_shift);
        assert!(p.boson.is_none());
    }

    #[test]
    fn memory_from_time() {
        let p = plan("dt 0.1\nt_mem 6.4\n");
        assert_eq!(p.n_mem, Some(64));
        assert_eq!(plan("dt 0.1\nt_mem 6.4\nn_mem 8").n_mem, Some(8));
    }

    #[test]
    fn gaussian_needs_density() {
        let map = ParameterMap::parse_str("use_Gaussian true\nBoson_g 1\nBoson_omega_max 1", Origin::File).unwrap();
        assert!(RunPlan::from_map(&map).is_err());
    }
}
