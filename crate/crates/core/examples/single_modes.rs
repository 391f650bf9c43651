//! Two Jaynes–Cummings modes combined with ACE, checked against a brute-force
//! propagation of system plus both modes.

use ace_core::expr::eval_str;
use ace_core::methods::{ace_sequential, ace_tree, Grid, Schedule, SingleModeSpec};
use ace_core::oracle::{dense_propagate, DenseMode, DenseSetup, EnvSplitting};
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let (dt, n) = (0.05, 200);
    let mut system = SystemLiouvillian::new(2);
    system.add_hamiltonian(&eval_str("{hbar*0.5*(|0><1|_2+|1><0|_2)}")?)?;
    let rho0 = eval_str("{|1><1|_2}")?;
    let mut specs = Vec::new();
    for (g, w) in [(0.3, 0.5), (0.4, -0.3)] {
        let h = eval_str(&format!("{{hbar*{g}*(|1><0|_2 otimes |0><1|_2 + |0><1|_2 otimes |1><0|_2) + hbar*{w}*Id_2 otimes |1><1|_2}}"))?;
        specs.push(SingleModeSpec::from_hamiltonian(2, &h, eval_str("{|0><0|_2}")?)?);
    }
    let grid = Grid { ta: 0.0, dt, n };
    let schedule = Schedule::new(1e-10);
    let dense = dense_propagate(&DenseSetup {
        system: system.clone(),
        rho0: rho0.clone(),
        modes: specs.iter().map(|s| DenseMode { hamiltonian: s.generator.hamiltonian(0.0), rho: s.rho_env.clone() }).collect(),
        ta: 0.0,
        dt,
        n,
        order: TrotterOrder::Symmetric,
        splitting: EnvSplitting::PerMode,
    })?;
    let setup = Propagation { system, rho0, ta: 0.0, dt, n, order: TrotterOrder::Symmetric };
    // Tr(|i><j| ρ) = ρ_ji, so these four observables give the whole matrix.
    let elements: Vec<_> = ["|0><0|_2", "|1><0|_2", "|0><1|_2", "|1><1|_2"].iter().map(|e| eval_str(&format!("{{{e}}}"))).collect::<Result<_, _>>()?;
    for (name, pt) in [("sequential", ace_sequential(&specs, &grid, &schedule)?), ("tree", ace_tree(&specs, &grid, &schedule)?)] {
        let (records, _) = propagate(&setup, &[&pt], &[], &elements)?;
        let worst = records
            .iter()
            .zip(&dense)
            .flat_map(|(r, want)| r.values.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max);
        println!("{name:>10}: max bond {:3}, max deviation from dense {worst:.2e}, n_e(t={}) = {:.6}", pt.max_bond(), n as f64 * dt, records[n].values[3].re);
    }
    println!("     dense: n_e(t={}) = {:.6}", n as f64 * dt, dense[n][[1, 1]].re);
    Ok(())
}
