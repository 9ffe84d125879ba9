//! JSON documents for matrix families and ODE families.
//!
//! A family is stored as
//!
//! ```json
//! {"variable": "rho", "dim": 2,
//!  "coefficients": [{"power": 0, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}],
//!  "meta": {}}
//! ```
//!
//! with complex entries as `[re, im]` pairs. Powers missing from the list are
//! zero coefficients; the series order is the largest power listed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::series::MatrixSeries;
use crate::wkb::OdeFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub power: usize,
    pub matrix: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDocument {
    #[serde(default = "default_variable")]
    pub variable: String,
    pub dim: usize,
    pub coefficients: Vec<CoefficientEntry>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

fn default_variable() -> String {
    "rho".into()
}

impl FamilyDocument {
    /// Every coefficient `0..=order` of `series`, zeros included, so that
    /// the order survives a round trip.
    pub fn from_series(series: &MatrixSeries, variable: &str) -> Self {
        Self {
            variable: variable.into(),
            dim: series.dim(),
            coefficients: entries_from_series(series),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: serde_json::Value) -> Self {
        self.meta.insert(key.into(), value);
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_entries(&self.coefficients, self.dim)
    }

    pub fn to_series(&self) -> Result<MatrixSeries> {
        series_from_entries(&self.coefficients, self.dim)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("family document: {e}")))?;
        doc.validate()?;
        Ok(doc)
    }
}

pub fn entries_from_series(series: &MatrixSeries) -> Vec<CoefficientEntry> {
    series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(power, c)| CoefficientEntry {
            power,
            matrix: c.rows(),
        })
        .collect()
}

pub fn validate_entries(entries: &[CoefficientEntry], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        if !seen.insert(e.power) {
            return Err(Error::InvalidInput(format!("power {} listed twice", e.power)));
        }
        if e.matrix.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.matrix.len(),
            });
        }
        for row in &e.matrix {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite entry in coefficient {}", e.power)));
            }
        }
    }
    if !seen.contains(&0) {
        return Err(Error::InvalidInput("coefficient of power 0 is missing".into()));
    }
    Ok(())
}

pub fn series_from_entries(entries: &[CoefficientEntry], dim: usize) -> Result<MatrixSeries> {
    validate_entries(entries, dim)?;
    let order = entries.iter().map(|e| e.power).max().unwrap_or(0);
    let mut coeffs = vec![ComplexMatrix::zeros(dim); order + 1];
    for e in entries {
        coeffs[e.power] = ComplexMatrix::from_rows(&e.matrix)?;
    }
    MatrixSeries::new(coeffs)
}

/// Family `A(t) = sum_k t^{-k} A_k` with its base time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeDocument {
    #[serde(flatten)]
    pub family: FamilyDocument,
    pub t0: f64,
    /// Whether `A_0` is skew-Hermitian; detected when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skew: Option<bool>,
}

impl OdeDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("ODE document: {e}")))?;
        doc.family.validate()?;
        Ok(doc)
    }

    pub fn to_family(&self) -> Result<OdeFamily> {
        let series = self.family.to_series()?;
        match self.skew {
            Some(skew) => OdeFamily::new(series, self.t0, skew),
            None => OdeFamily::detect(series, self.t0),
        }
    }
}

/// Serialises with a fixed field order; floats use the shortest
/// representation that parses back to the same value.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents contain only finite-safe types")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample() -> MatrixSeries {
        MatrixSeries::new(vec![
            ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]).unwrap(),
            ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.1)], vec![c(1.0 / 3.0, 0.0), c(0.0, 0.0)]]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn parses_pairs() {
        let text = r#"{"dim": 2, "coefficients": [
            {"power": 0, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
            {"power": 2, "matrix": [[[0, 0], [0, 1]], [[0, -1], [0, 0]]]}]}"#;
        let doc = FamilyDocument::from_json(text).unwrap();
        assert_eq!(doc.variable, "rho");
        let s = doc.to_series().unwrap();
        assert_eq!(s.order(), 2);
        assert_eq!(s.coeff(1), &ComplexMatrix::zeros(2));
        assert_eq!(s.coeff(2)[(0, 1)], c(0.0, 1.0));
    }

    #[test]
    fn validation_errors() {
        let dup = r#"{"dim": 1, "coefficients": [{"power": 0, "matrix": [[[1, 0]]]}, {"power": 0, "matrix": [[[1, 0]]]}]}"#;
        assert!(matches!(FamilyDocument::from_json(dup), Err(Error::InvalidInput(_))));
        let no_zero = r#"{"dim": 1, "coefficients": [{"power": 1, "matrix": [[[1, 0]]]}]}"#;
        assert!(matches!(FamilyDocument::from_json(no_zero), Err(Error::InvalidInput(_))));
        let ragged = r#"{"dim": 2, "coefficients": [{"power": 0, "matrix": [[[1, 0], [0, 0]], [[1, 0]]]}]}"#;
        assert!(matches!(FamilyDocument::from_json(ragged), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(FamilyDocument::from_json("{"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ode_document_flattened() {
        let text = r#"{"dim": 1, "t0": 5.0, "coefficients": [{"power": 0, "matrix": [[[0, 1]]]}]}"#;
        let doc = OdeDocument::from_json(text).unwrap();
        assert_eq!(doc.t0, 5.0);
        assert!(doc.to_family().unwrap().skew_leading());
    }

    #[test]
    fn deterministic_output() {
        let doc = FamilyDocument::from_series(&sample(), "rho").with_meta("source", serde_json::json!("test"));
        assert_eq!(to_json_pretty(&doc), to_json_pretty(&doc.clone()));
    }

    proptest! {
        #[test]
        fn round_trip_bit_exact(values in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 18)) {
            let mats: Vec<ComplexMatrix> = values
                .chunks(6)
                .map(|ch| ComplexMatrix::from_fn(2, |i, j| {
                    let k = 2 * i + j;
                    C64::new(ch[k % 6], ch[(k + 3) % 6])
                }))
                .collect();
            let s = MatrixSeries::new(mats).unwrap();
            let text = to_json_pretty(&FamilyDocument::from_series(&s, "rho"));
            let back = FamilyDocument::from_json(&text).unwrap().to_series().unwrap();
            for k in 0..=s.order() {
                for i in 0..2 {
                    for j in 0..2 {
                        let (a, b) = (s.coeff(k)[(i, j)], back.coeff(k)[(i, j)]);
                        prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                        prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
                    }
                }
            }
        }
    }
}
