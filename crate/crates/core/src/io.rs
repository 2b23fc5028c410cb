//! Model files, deterministic JSON, and atomic output.
//!
//! A model file is a JSON object:
//!
//! ```json
//! {
//!   "lambda": [[0, 1], [0, 1.4142135623730951]],
//!   "mode": "thm1",
//!   "hamiltonian": "x1^2 x2 + 2 x1 y1 x2 + y1^2 x2",
//!   "radii": [1, 1]
//! }
//! ```
//!
//! The Hamiltonian is a text literal or a polynomial JSON object; `mode` and
//! `radii` are optional. When the Hamiltonian has no quadratic
//! part, `sum lambda_l x_l y_l` is added.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{parse_polynomial, GradedSeries, PolydiskGeometry, Polynomial};
use crate::resonance::{Mode, Spectrum};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSource {
    Text(String),
    Json(Polynomial),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub lambda: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub hamiltonian: HamiltonianSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

/// A validated model ready for normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub spectrum: Spectrum,
    pub hamiltonian: GradedSeries,
    pub radii: Option<Vec<f64>>,
}

impl Model {
    pub fn geometry(&self) -> Result<PolydiskGeometry> {
        match &self.radii {
            Some(r) => PolydiskGeometry::new(r.clone()),
            None => Ok(PolydiskGeometry::unit(self.spectrum.n())),
        }
    }
}

impl ModelFile {
    /// Validates and converts; `mode` overrides the file's mode, default `thm1`.
    pub fn into_model(self, mode: Option<Mode>) -> Result<Model> {
        let lambda: Vec<Complex64> = self.lambda.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let n = lambda.len();
        let spectrum = Spectrum::new(lambda, mode.or(self.mode).unwrap_or(Mode::LyapunovManifold))?;
        let poly = match self.hamiltonian {
            HamiltonianSource::Text(src) => parse_polynomial(&src, Some(n))?,
            HamiltonianSource::Json(p) => p,
        };
        if poly.n() != n {
            return Err(Error::DimensionMismatch { left: poly.n(), right: n });
        }
        let trunc = poly.degree().unwrap_or(0).max(2);
        let mut hamiltonian = GradedSeries::from_polynomial(&poly, trunc);
        if hamiltonian.part(2).is_none() {
            hamiltonian.add_polynomial(&Polynomial::diagonal_quadratic(&spectrum.lambda));
        }
        if let Some(r) = &self.radii {
            if r.len() != n {
                return Err(Error::DimensionMismatch { left: r.len(), right: n });
            }
            PolydiskGeometry::new(r.clone())?;
        }
        Ok(Model {
            spectrum,
            hamiltonian,
            radii: self.radii,
        })
    }
}

/// Two oscillators `lambda = (i, i sqrt 2)` coupled by `(x1 + y1)^2 (x2 + y2)` on the unit polydisk.
pub fn reference_model() -> Model {
    parse_model(
        r#"{"lambda": [[0, 1], [0, 1.4142135623730951]], "radii": [1, 1],
            "hamiltonian": "x1^2 x2 + 2 x1 y1 x2 + y1^2 x2 + x1^2 y2 + 2 x1 y1 y2 + y1^2 y2"}"#,
        None,
    )
    .expect("the reference model is well formed")
}

pub fn parse_model(src: &str, mode: Option<Mode>) -> Result<Model> {
    serde_json::from_str::<ModelFile>(src)?.into_model(mode)
}

pub fn load_model(path: &Path, mode: Option<Mode>) -> Result<Model> {
    parse_model(&fs::read_to_string(path)?, mode)
}

/// Pretty JSON with object keys in sorted order and shortest round-trip floats.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("'{}' is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODEL: &str = r#"{"lambda": [[0, 1], [0, 1.4142135623730951]], "hamiltonian": "x1^2 x2 + 2 x1 y1 x2 + y1^2 x2 + x1^2 y2 + 2 x1 y1 y2 + y1^2 y2"}"#;

    #[test]
    fn parses_text_model_and_inserts_quadratic() {
        let m = parse_model(MODEL, None).unwrap();
        assert_eq!(m.spectrum.mode, Mode::LyapunovManifold);
        assert_eq!(m.hamiltonian.part(2).unwrap(), &Polynomial::diagonal_quadratic(&m.spectrum.lambda));
        assert_eq!(m.hamiltonian.part(3).unwrap().len(), 6);
        assert_eq!(parse_model(MODEL, Some(Mode::Birkhoff)).unwrap().spectrum.mode, Mode::Birkhoff);
    }

    #[test]
    fn json_polynomial_and_errors() {
        let p = parse_polynomial("x1^3", Some(1)).unwrap();
        let src = format!(r#"{{"lambda": [[0, 1]], "hamiltonian": {}, "radii": [0.5]}}"#, serde_json::to_string(&p).unwrap());
        let m = parse_model(&src, None).unwrap();
        assert_eq!(m.geometry().unwrap().lambda(), 0.5);
        assert!(matches!(parse_model("{\"lambda\": [[0, 1]],\n \"hamiltonian\": 3}", None), Err(Error::Json(_))));
        assert!(parse_model(r#"{"lambda": [[0, 1]], "hamiltonian": "x2^3"}"#, None).is_err());
        assert!(parse_model(r#"{"lambda": [[0, 1]], "hamiltonian": "x1^3", "extra": 1}"#, None).is_err());
    }

    #[test]
    fn sorted_and_atomic() {
        #[derive(Serialize)]
        struct S {
            zeta: f64,
            alpha: f64,
        }
        let s = to_sorted_json(&S { zeta: 0.1, alpha: 1.0 / 3.0 }).unwrap();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("0.3333333333333333"));
        let dir = std::env::temp_dir().join(format!("lyapnorm-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("out.json");
        write_atomic(&path, s.as_bytes()).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), s);
        fs::remove_dir_all(&dir).unwrap();
    }
}
