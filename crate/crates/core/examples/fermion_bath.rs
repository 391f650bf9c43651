//! Resonant level model: a level at the Fermi energy coupled to a flat band
//! of discretized fermionic modes. The occupation relaxes as
//! (1 + e^{−Γt})/2.

use ace_core::expr::eval_str;
use ace_core::methods::{ace_from_bath, Bath, Grid, ModeKind, Schedule};
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let rate = 0.1;
    let bath = Bath {
        kind: ModeKind::Fermion { e_fermi: 0.0 },
        n_modes: 16,
        sys_op: eval_str("{|0><1|_2}")?,
        coupling: Bath::rate_coupling(rate),
        omega_min: -5.0,
        omega_max: 5.0,
        temperature: 0.0,
        subtract_polaron_shift: false,
    };
    let grid = Grid::new(0.0, 10.0, 0.1)?;
    let pt = ace_from_bath(&bath, &grid, &Schedule::new(1e-5), true, true)?;
    println!("# PT: {} blocks, max bond {}", pt.len(), pt.max_bond());
    let setup = Propagation {
        system: SystemLiouvillian::new(2),
        rho0: eval_str("{|1><1|_2}")?,
        ta: grid.ta,
        dt: grid.dt,
        n: grid.n,
        order: TrotterOrder::Symmetric,
    };
    let (records, _) = propagate(&setup, &[&pt], &[], &[eval_str("{|1><1|_2}")?])?;
    println!("# t  n  (1+exp(-rate t))/2");
    for r in records.iter().step_by(10) {
        println!("{:5.1} {:.6} {:.6}", r.t, r.values[0].re, 0.5 * (1.0 + (-rate * r.t).exp()));
    }
    Ok(())
}
