//! Writes a process tensor to disk, split over several files, reads it back
//! and prints the per-step bond summary.

use ace_core::cli::analyze;
use ace_core::methods::{gaussian_jp, gaussian_kernels, GaussianBath, SpectralDensity};
use ace_core::ptmpo::{read_pt, write_pt, Compression};

fn main() -> ace_core::Result<()> {
    let bath = GaussianBath {
        j: SpectralDensity::custom(|w| 0.1 * w * (-w / 3.0).exp()),
        temperature: 10.0,
        omega_min: 0.0,
        omega_max: 40.0,
        subtract_polaron_shift: true,
    };
    let kernel = gaussian_kernels(&bath, 0.1, 20)?;
    let pt = gaussian_jp(&[0.0, 1.0], &kernel, 20, &Compression::new(1e-8))?;

    let dir = tempfile::tempdir()?;
    let base = dir.path().join("ohmic.pt");
    let files = write_pt(&pt, &base, Some(8))?;
    for f in &files {
        println!("wrote {} ({} bytes)", f.display(), std::fs::metadata(f)?.len());
    }
    let back = read_pt(&base)?;
    println!("read back {} blocks, bonds identical: {}", back.len(), back.bond_dims() == pt.bond_dims());
    print!("{}", analyze(&base)?);
    Ok(())
}
