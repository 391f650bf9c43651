use ace_core::expr::eval_str;
use ace_core::methods::{
    gaussian_kernels, gaussian_pt, GaussianBath, GaussianKernel, GaussianMethod, SpectralDensity,
};
use ace_core::oracle::path_sum;
use ace_core::propagate::{propagate, Propagation, TrotterOrder};
use ace_core::ptmpo::{Compression, ProcessTensor};
use ace_core::system::SystemLiouvillian;
use ace_core::tensor::{max_abs_diff, reset_svd_count, svd_count};
use ace_core::{ComplexMatrix, C64};

fn m(s: &str) -> ComplexMatrix {
    eval_str(s).unwrap()
}

fn ohmic(alpha: f64, t: f64) -> GaussianBath {
    GaussianBath {
        j: SpectralDensity::custom(move |w| alpha * w * (-w / 3.0).exp()),
        temperature: t,
        omega_min: 0.0,
        omega_max: 60.0,
        subtract_polaron_shift: true,
    }
}

fn driven(omega: f64) -> SystemLiouvillian {
    let mut sys = SystemLiouvillian::new(2);
    sys.add_hamiltonian(&m(&format!("{{hbar*{omega}/2*(|0><1|_2+|1><0|_2)}}"))).unwrap();
    sys
}

fn run(sys: &SystemLiouvillian, rho0: &ComplexMatrix, pts: &[&ProcessTensor], dt: f64, n: usize) -> Vec<ComplexMatrix> {
    let setup = Propagation { system: sys.clone(), rho0: rho0.clone(), ta: 0.0, dt, n, order: TrotterOrder::Symmetric };
    let obs: Vec<ComplexMatrix> = (0..4).map(|k| m(&format!("{{|{}><{}|_2}}", k % 2, k / 2))).collect();
    let (rec, _) = propagate(&setup, pts, &[], &obs).unwrap();
    rec.iter()
        .map(|r| ComplexMatrix::from_shape_fn((2, 2), |(i, j)| r.values[i * 2 + j]))
        .collect()
}

fn max_diff(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}

#[test]
fn jp_matches_path_sum() {
    let dt = 0.1;
    let n = 6;
    let kernel = gaussian_kernels(&ohmic(0.2, 20.0), dt, n).unwrap();
    let sys = driven(2.0);
    let rho0 = m("{|0><0|_2}");
    let pt = gaussian_pt(&m("{|1><1|_2}"), &kernel, n, &Compression::default(), GaussianMethod::Jp, true).unwrap();
    let got = run(&sys, &rho0, &[&pt], dt, n);
    let want = path_sum(&sys, &rho0, &[0.0, 1.0], &kernel.eta, 0.0, dt, n, TrotterOrder::Symmetric).unwrap();
    let err = max_diff(&got, &want);
    assert!(err < 1e-10, "{err}");
    assert!((got[n][[1, 1]] - want[n][[1, 1]]).norm() < 1e-10);
}

#[test]
fn jp_memory_truncation_matches_path_sum() {
    let dt = 0.1;
    let kernel = gaussian_kernels(&ohmic(0.3, 0.0), dt, 3).unwrap();
    let sys = driven(1.5);
    let rho0 = m("{|1><1|_2}");
    for method in [GaussianMethod::Jp, GaussianMethod::DivideAndConquer] {
        let pt = gaussian_pt(&m("{|1><1|_2}"), &kernel, 7, &Compression::default(), method, false).unwrap();
        let got = run(&sys, &rho0, &[&pt], dt, 7);
        let want = path_sum(&sys, &rho0, &[0.0, 1.0], &kernel.eta, 0.0, dt, 7, TrotterOrder::Symmetric).unwrap();
        assert!(max_diff(&got, &want) < 1e-10, "{method:?}");
    }
}

#[test]
fn dnc_equals_jp_exactly() {
    let dt = 0.05;
    let n = 8;
    let kernel = gaussian_kernels(&ohmic(0.2, 4.0), dt, n).unwrap();
    let op = m("{|1><1|_2}");
    let jp = gaussian_pt(&op, &kernel, n, &Compression::default(), GaussianMethod::Jp, true).unwrap();
    let dnc = gaussian_pt(&op, &kernel, n, &Compression::default(), GaussianMethod::DivideAndConquer, true).unwrap();
    let sys = driven(3.0);
    let rho0 = m("{|0><0|_2}");
    let err = max_diff(&run(&sys, &rho0, &[&jp], dt, n), &run(&sys, &rho0, &[&dnc], dt, n));
    assert!(err < 1e-10, "{err}");
}

#[test]
fn zero_density_gives_trivial_pt() {
    let bath = GaussianBath { j: SpectralDensity::Flat(0.0), ..ohmic(0.0, 0.0) };
    let kernel = gaussian_kernels(&bath, 0.1, 5).unwrap();
    let pt = gaussian_pt(&m("{|1><1|_2}"), &kernel, 5, &Compression::new(1e-10), GaussianMethod::Jp, true).unwrap();
    assert_eq!(pt.max_bond(), 1);
    let sys = driven(1.0);
    let rho0 = m("{|0><0|_2}");
    assert!(max_diff(&run(&sys, &rho0, &[&pt], 0.1, 5), &run(&sys, &rho0, &[], 0.1, 5)) < 1e-12);
}

#[test]
fn periodic_matches_truncated_jp() {
    let dt = 0.1;
    let n_mem = 8;
    let kernel = gaussian_kernels(&ohmic(0.1, 4.0), dt, n_mem).unwrap();
    let op = m("{|1><1|_2}");
    let c = Compression::new(1e-10);
    let n = 4 * n_mem;
    let jp = gaussian_pt(&op, &kernel, n, &c, GaussianMethod::Jp, true).unwrap();
    let per = gaussian_pt(&op, &kernel, n, &c, GaussianMethod::Periodic, true).unwrap();
    assert_eq!(per.repeat_from, Some(n_mem));
    assert_eq!(per.len(), 2 * n_mem);
    let sys = driven(2.0);
    let rho0 = m("{|0><0|_2}");
    let err = max_diff(&run(&sys, &rho0, &[&jp], dt, n), &run(&sys, &rho0, &[&per], dt, n));
    assert!(err < 1e-6, "{err}");
    // Far beyond the lead-in the block count stays fixed.
    let long = run(&sys, &rho0, &[&per], dt, 40 * n_mem);
    assert!((long.last().unwrap().diag().sum() - C64::new(1.0, 0.0)).norm() < 1e-6);
}

#[test]
fn dnc_svd_count_is_quasi_linear() {
    let dt = 0.05;
    let op = m("{|1><1|_2}");
    let c = Compression::new(1e-8);
    let count = |n: usize| {
        let kernel = gaussian_kernels(&ohmic(0.1, 0.0), dt, n).unwrap();
        reset_svd_count();
        gaussian_pt(&op, &kernel, n, &c, GaussianMethod::DivideAndConquer, true).unwrap();
        svd_count()
    };
    let (a, b) = (count(32), count(64));
    assert!((b as f64) / (a as f64) < 2.6, "{a} -> {b}");
}

#[test]
fn kernel_constant_correlation() {
    let k: GaussianKernel = gaussian_kernels(
        &GaussianBath {
            j: SpectralDensity::Flat(1e3),
            temperature: 0.0,
            omega_min: 0.0,
            omega_max: 1e-6,
            subtract_polaron_shift: false,
        },
        0.2,
        2,
    )
    .unwrap();
    assert!((k.eta[0].re - 1e-3 * 0.02).abs() < 1e-9);
    assert!((k.eta[1].re - 1e-3 * 0.04).abs() < 1e-9);
}
