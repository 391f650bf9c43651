//! Resonantly driven two-level system, with and without radiative decay.
//! The closed case is compared with n_e(t) = sin²(Ωt/2).

use ace_core::expr::eval_str;
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let omega = 1.0;
    let n_e = eval_str("{|1><1|_2}")?;
    for gamma in [0.0, 0.2] {
        let mut system = SystemLiouvillian::new(2);
        system.add_hamiltonian(&eval_str(&format!("{{hbar*{omega}/2*(|0><1|_2+|1><0|_2)}}"))?)?;
        if gamma > 0.0 {
            system.add_lindblad(gamma, eval_str("{|0><1|_2}")?)?;
        }
        let setup = Propagation { system, rho0: eval_str("{|0><0|_2}")?, ta: 0.0, dt: 0.01, n: 2000, order: TrotterOrder::Symmetric };
        let (records, _) = propagate(&setup, &[], &[], &[n_e.clone()])?;
        println!("# gamma = {gamma} ps^-1");
        println!("# t  n_e  sin^2(t/2)");
        for r in records.iter().step_by(200) {
            println!("{:6.2} {:.8} {:.8}", r.t, r.values[0].re, (0.5 * omega * r.t).sin().powi(2));
        }
    }
    Ok(())
}
