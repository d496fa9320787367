//! Regenerates the synthetic inputs in `examples/data/`.
//!
//! ```text
//! cargo run -p cross-symmetry --example make_datasets
//! ```

use std::error::Error;
use std::path::Path;

use cross_symmetry::app::io::fmt_f64;
use cross_symmetry::fitkit::synth_dataset;
use cross_symmetry::thermo::{InverseCapture, NucleusSpec};
use cross_symmetry::xsection::{AngularModel, ChannelConfig, ShapeParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const ANGULAR_NOISE: f64 = 0.01;
const ANGULAR_SEED: u64 = 2024;
const SPECTRUM_NOISE: f64 = 0.05;
const SPECTRUM_SEED: u64 = 55;
const TEMPERATURE: f64 = 0.55;

fn angular(dir: &Path) -> Result<(), Box<dyn Error>> {
    let model = AngularModel::new(&ChannelConfig::default())?;
    let params = ShapeParams::new(0.082, 0.47, 0.37, 0.11)?;
    let thetas: Vec<f64> = (0..10).map(|i| 20.0 + 15.5 * f64::from(i)).collect();
    let labels = ["4-6MeV", "6-8MeV", "8-10MeV"];
    let norms = [1.0, 0.8, 0.6];
    let sets = synth_dataset(&params, &norms, &thetas, ANGULAR_NOISE, ANGULAR_SEED, &model)?;
    let mut w = csv::Writer::from_path(dir.join("angular_reference.csv"))?;
    w.write_record(["bin_label", "theta_deg", "yield", "err"])?;
    for (label, set) in labels.iter().zip(&sets) {
        for p in set.points() {
            w.write_record([label.to_string(), fmt_f64(p.theta_deg), fmt_f64(p.value), fmt_f64(p.err)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn spectrum(dir: &Path) -> Result<(), Box<dyn Error>> {
    // Residual of 209Bi(γ,p).
    let lead = NucleusSpec::new(208, 82, 6.3)?;
    let capture = InverseCapture::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SPECTRUM_SEED);
    let mut w = csv::Writer::from_path(dir.join("spectrum_t055.csv"))?;
    w.write_record(["eps_mev", "counts", "err"])?;
    for i in 1..=20 {
        let eps = 0.4 * f64::from(i);
        let truth = 1e8 * eps * capture.sigma(&lead, eps)? * (-eps / TEMPERATURE).exp();
        let z: f64 = StandardNormal.sample(&mut rng);
        let counts = truth * (1.0 + SPECTRUM_NOISE * z);
        w.write_record([fmt_f64(eps), fmt_f64(counts), fmt_f64(SPECTRUM_NOISE * truth)])?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    std::fs::create_dir_all(&dir)?;
    angular(&dir)?;
    spectrum(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
