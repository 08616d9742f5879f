//! Example model files, generated from the constructors on demand.

use std::path::{Path, PathBuf};

use num_complex::Complex;

use lightcone_core::locality::{kentian_micro_model, FiniteHVModel};
use lightcone_core::models::{singlet_hv_model, BellSettings};
use lightcone_core::toyqm::{build, ToyConfig};

use crate::{local_model, write_file, Bundled, CliError};

pub fn file_name(b: Bundled) -> &'static str {
    match b {
        Bundled::Singlet => "singlet.json",
        Bundled::KentBellMicro => "kent_bell_micro.json",
        Bundled::Local => "local.json",
    }
}

/// Bell universe used for the bundled micro model (`a = 0.6`).
pub fn kent_bell_config() -> ToyConfig<f64> {
    ToyConfig::bell(
        Complex::new(0.6, 0.0),
        Complex::new(0.8, 0.0),
        [0.0, 4.0, 100.0, 104.0],
        5.0,
        5.0,
        300.0,
        1.0,
    )
}

pub fn model(b: Bundled) -> Result<FiniteHVModel<f64>, CliError> {
    let settings = BellSettings::canonical();
    match b {
        Bundled::Singlet => Ok(singlet_hv_model(&settings)),
        Bundled::KentBellMicro => Ok(kentian_micro_model(&build(&kent_bell_config())?)?),
        Bundled::Local => local_model(&settings),
    }
}

/// Writes all three files into `dir` and returns their paths.
pub fn write_all(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths = Vec::new();
    for b in [Bundled::Singlet, Bundled::KentBellMicro, Bundled::Local] {
        let path = dir.join(file_name(b));
        let mut text = serde_json::to_string_pretty(&model(b)?).expect("models serialize");
        text.push('\n');
        write_file(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}
