//! CSV writers. Floats are written in `{:.16e}`; absent values and
//! saturated integers are left empty.

use std::fs;
use std::path::{Path, PathBuf};

use csv::Writer;
use geofix::Point64;

use crate::HarnessError;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// `u64::MAX` stands for "no finite value".
pub fn int(n: u64) -> String {
    if n == u64::MAX {
        String::new()
    } else {
        n.to_string()
    }
}

pub fn opt_int(n: Option<u64>) -> String {
    n.map(int).unwrap_or_default()
}

/// Column names for the coordinates of a point shaped like `p`.
pub fn coord_header(p: &Point64) -> Vec<String> {
    match p {
        Point64::Vector(v) => (0..v.len()).map(|i| format!("c{i}")).collect(),
        Point64::Tree(_) => vec!["ray".into(), "s".into()],
    }
}

pub fn coords(p: &Point64) -> Vec<String> {
    match p {
        Point64::Vector(v) => v.iter().map(|&x| float(x)).collect(),
        Point64::Tree(t) => vec![t.ray.to_string(), float(t.s)],
    }
}

/// Output directory, created on demand.
#[derive(Clone, Debug)]
pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(path)?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn writer(&self, name: &str) -> Result<Writer<fs::File>, HarnessError> {
        Ok(Writer::from_path(self.0.join(name))?)
    }
}

/// Keeps certificate names usable as file names.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}
