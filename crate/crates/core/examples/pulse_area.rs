//! Excitation by Gaussian pulses of increasing area. The final occupation
//! follows sin²(A/2).

use std::f64::consts::PI;

use ace_core::expr::eval_str;
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::system::{Envelope, SystemLiouvillian};

fn main() -> ace_core::Result<()> {
    let n_e = eval_str("{|1><1|_2}")?;
    println!("# area/pi  final n_e  sin^2(A/2)");
    for k in 0..=8 {
        let area = k as f64 * 0.5 * PI;
        let mut system = SystemLiouvillian::new(2);
        system.add_pulse(Envelope::Gauss { t_c: 10.0, fwhm: 4.0, area, detuning: 0.0 }, eval_str("{hbar/2*|1><0|_2}")?)?;
        let setup = Propagation { system, rho0: eval_str("{|0><0|_2}")?, ta: 0.0, dt: 0.01, n: 2000, order: TrotterOrder::Symmetric };
        let (records, _) = propagate(&setup, &[], &[], &[n_e.clone()])?;
        let last = records.last().map(|r| r.values[0].re).unwrap_or(f64::NAN);
        println!("{:4.1} {:.6} {:.6}", area / PI, last, (0.5 * area).sin().powi(2));
    }
    Ok(())
}
