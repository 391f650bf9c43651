//! Long-time Rabi oscillations of a quantum dot under phonon influence,
//! using a periodic process tensor: memory truncated after t_mem and the
//! last block repeated indefinitely.

use ace_core::expr::eval_str;
use ace_core::methods::{gaussian_kernels, gaussian_periodic, GaussianBath, SpectralDensity};
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::ptmpo::Compression;
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let bath = GaussianBath {
        j: SpectralDensity::qd_phonon_default(),
        temperature: 4.0,
        omega_min: 0.0,
        omega_max: 10.0,
        subtract_polaron_shift: true,
    };
    let (dt, n_mem) = (0.1, 32);
    let kernel = gaussian_kernels(&bath, dt, n_mem)?;
    let pt = gaussian_periodic(&[0.0, 1.0], &kernel, &Compression::new(1e-8))?;
    println!("# periodic PT: {} stored blocks, max bond {}", pt.len(), pt.max_bond());
    let mut system = SystemLiouvillian::new(2);
    system.add_hamiltonian(&eval_str("{hbar*1.0/2*(|0><1|_2+|1><0|_2)}")?)?;
    let n = 2000;
    let setup = Propagation { system, rho0: eval_str("{|0><0|_2}")?, ta: 0.0, dt, n, order: TrotterOrder::Symmetric };
    let (records, _) = propagate(&setup, &[&pt], &[], &[eval_str("{|1><1|_2}")?])?;
    println!("# t  n_e");
    for r in records.iter().step_by(50) {
        println!("{:6.1} {:.6}", r.t, r.values[0].re);
    }
    Ok(())
}
