//! Resonance fluorescence spectrum of a driven, damped two-level system.
//! σ⁻ is applied once the system is stationary and the Fourier transform
//! of ⟨σ⁺(τ)σ⁻⟩ shows the Mollow triplet at 0 and ±Ω.

use std::f64::consts::PI;

use ace_core::expr::eval_str;
use ace_core::propagate::{propagate, OperatorEvent, Propagation, Side, TrotterOrder};
use ace_core::system::SystemLiouvillian;
use ace_core::C64;
use rustfft::FftPlanner;

fn main() -> ace_core::Result<()> {
    let (omega, gamma, dt, t_event, samples) = (0.5, 0.02, 0.1, 500.0, 8192usize);
    let mut system = SystemLiouvillian::new(2);
    system.add_hamiltonian(&eval_str(&format!("{{hbar*{omega}/2*(|0><1|_2+|1><0|_2)}}"))?)?;
    system.add_lindblad(gamma, eval_str("{|0><1|_2}")?)?;
    let n = (t_event / dt) as usize + samples;
    let setup = Propagation { system, rho0: eval_str("{|0><0|_2}")?, ta: 0.0, dt, n, order: TrotterOrder::Symmetric };
    let events = [OperatorEvent { time: t_event, side: Side::Left, op: eval_str("{|0><1|_2}")? }];
    let (records, _) = propagate(&setup, &[], &events, &[eval_str("{|1><0|_2}")?])?;

    let start = (t_event / dt).round() as usize + 1;
    let stationary = records[n].values[0];
    let mut buf: Vec<C64> = records[start..start + samples].iter().map(|r| r.values[0] - stationary).collect();
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);
    let bin = 2.0 * PI / (samples as f64 * dt);
    println!("# omega (ps^-1)  S(omega)");
    for k in 0..samples {
        let shifted = (k + samples / 2) % samples;
        let w = (k as f64 - (samples / 2) as f64) * bin;
        if w.abs() <= 1.0 {
            println!("{w:9.5} {:.6e}", buf[shifted].re);
        }
    }
    Ok(())
}
