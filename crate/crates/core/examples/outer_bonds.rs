//! Reuses a phonon process tensor built for a two-level dot in a larger
//! problem, the dot coupled to a lossy cavity mode. The coupling operator
//! |e><e| ⊗ Id_3 has two distinct eigenvalues, so the PT is generated on two
//! levels and expanded afterwards.

use ace_core::expr::eval_str;
use ace_core::methods::{gaussian_dnc, gaussian_kernels, gaussian_pt, GaussianBath, GaussianMethod, SpectralDensity};
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::ptmpo::{expand_outer, Compression};
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let bath = GaussianBath {
        j: SpectralDensity::qd_phonon_default(),
        temperature: 4.0,
        omega_min: 0.0,
        omega_max: 10.0,
        subtract_polaron_shift: true,
    };
    let (dt, n) = (0.1, 100);
    let kernel = gaussian_kernels(&bath, dt, 32)?;
    let c = Compression::new(1e-8);

    // Dot on the left, cavity (3 photon levels) on the right of the tensor product.
    let small = gaussian_dnc(&[0.0, 1.0], &kernel, n, &c)?;
    let by_product = expand_outer(&small, 1, 3)?;
    let by_degeneracy = gaussian_pt(&eval_str("{|1><1|_2 otimes Id_3}")?, &kernel, n, &c, GaussianMethod::DivideAndConquer, true)?;
    println!("# two-level PT: dim {}, bond {}; expanded: dim {}, bond {}", small.dim, small.max_bond(), by_product.dim, by_product.max_bond());

    let mut system = SystemLiouvillian::new(6);
    system.add_hamiltonian(&eval_str("{hbar*0.5*(|1><0|_2 otimes b_3 + |0><1|_2 otimes bdagger_3) + hbar*0.5*(|0><1|_2+|1><0|_2) otimes Id_3}")?)?;
    system.add_lindblad(0.1, eval_str("{Id_2 otimes b_3}")?)?;
    let setup = Propagation { system, rho0: eval_str("{|0><0|_2 otimes |0><0|_3}")?, ta: 0.0, dt, n, order: TrotterOrder::Symmetric };
    let observables = [eval_str("{|1><1|_2 otimes Id_3}")?, eval_str("{Id_2 otimes bdagger_3*b_3}")?];
    let (a, _) = propagate(&setup, &[&by_product], &[], &observables)?;
    let (b, _) = propagate(&setup, &[&by_degeneracy], &[], &observables)?;
    println!("# t  n_dot  n_photon  |difference between the two expansions|");
    for (ra, rb) in a.iter().zip(&b).step_by(10) {
        let diff = ra.values.iter().zip(&rb.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        println!("{:5.1} {:.6} {:.6} {diff:.1e}", ra.t, ra.values[0].re, ra.values[1].re);
    }
    Ok(())
}
