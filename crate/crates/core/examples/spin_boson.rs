//! Pure dephasing by an Ohmic phonon bath. The process tensor is built with
//! the Gaussian JP and divide-and-conquer schemes and compared with the
//! exact independent-boson coherence.

use std::time::Instant;

use ace_core::expr::eval_str;
use ace_core::methods::{gaussian_dnc, gaussian_jp, gaussian_kernels, GaussianBath, SpectralDensity};
use ace_core::oracle::independent_boson_coherence;
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::ptmpo::Compression;
use ace_core::system::SystemLiouvillian;

fn main() -> ace_core::Result<()> {
    let (alpha, wc, temperature) = (0.2, 3.0, 20.0);
    let j = move |w: f64| alpha * w * (-w / wc).exp();
    let bath = GaussianBath { j: SpectralDensity::custom(j), temperature, omega_min: 0.0, omega_max: 40.0, subtract_polaron_shift: true };
    let (dt, n) = (0.05, 40);
    let kernel = gaussian_kernels(&bath, dt, n)?;
    let c = Compression::new(1e-8);
    let setup = Propagation {
        system: SystemLiouvillian::new(2),
        rho0: eval_str("{0.5*(|0><0|_2+|1><1|_2+|0><1|_2+|1><0|_2)}")?,
        ta: 0.0,
        dt,
        n,
        order: TrotterOrder::Symmetric,
    };
    let coherence = eval_str("{|0><1|_2}")?;
    let exact: Vec<f64> = (0..=n)
        .map(|l| independent_boson_coherence(&j, temperature, 0.0, 40.0, l as f64 * dt, true).map(|c| c.re))
        .collect::<Result<_, _>>()?;
    for name in ["JP", "DnC"] {
        let start = Instant::now();
        let pt = if name == "JP" { gaussian_jp(&[0.0, 1.0], &kernel, n, &c)? } else { gaussian_dnc(&[0.0, 1.0], &kernel, n, &c)? };
        let elapsed = start.elapsed().as_secs_f64();
        let (records, _) = propagate(&setup, &[&pt], &[], &[coherence.clone()])?;
        let err = records.iter().zip(&exact).map(|(r, e)| (2.0 * r.values[0].re - e).abs()).fold(0.0, f64::max);
        println!("{name:>4}: {elapsed:.2}s, max bond {}, max error vs exact {err:.2e}", pt.max_bond());
    }
    println!("# t  2 Re rho_10 (exact)");
    for (l, e) in exact.iter().enumerate().step_by(8) {
        println!("{:5.2} {e:.6}", l as f64 * dt);
    }
    Ok(())
}
