//! JSON schemas for masks, frames, and polynomial coefficient lists.
//!
//! Polynomials serialize as arrays of `{"exp": [...], "re": x, "im": y}`
//! sorted lexicographically by exponent; masks carry only the integer
//! dilation matrix, the group data is rebuilt deterministically on load.

use crate::isotypical::Mask;
use crate::lattice::{DilationContext, IntMatrix};
use crate::laurent::{LaurentPoly, MultiIndex};
use crate::verify::{FrameSystem, VerificationReport};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const FORMAT_VERSION: &str = "uepframe/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("unsupported format version '{0}', expected '{FORMAT_VERSION}'")]
    Version(String),
    #[error("term {index} has exponent of length {found}, expected {expected}")]
    TermDimension {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("duplicate exponent {0:?}")]
    DuplicateExponent(Vec<i64>),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Mask(#[from] crate::isotypical::MaskError),
    #[error(transparent)]
    Frame(#[from] crate::verify::FrameError),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

pub fn poly_to_terms(p: &LaurentPoly) -> Vec<TermJson> {
    p.terms()
        .map(|(e, c)| TermJson {
            exp: e.0.clone(),
            re: c.re,
            im: c.im,
        })
        .collect()
}

pub fn terms_to_poly(dim: usize, terms: &[TermJson]) -> Result<LaurentPoly, FormatError> {
    let mut seen = std::collections::BTreeSet::new();
    for (index, t) in terms.iter().enumerate() {
        if t.exp.len() != dim {
            return Err(FormatError::TermDimension {
                index,
                found: t.exp.len(),
                expected: dim,
            });
        }
        if !seen.insert(t.exp.clone()) {
            return Err(FormatError::DuplicateExponent(t.exp.clone()));
        }
    }
    Ok(LaurentPoly::from_terms(
        dim,
        terms.iter().map(|t| {
            (
                MultiIndex(t.exp.clone()),
                Complex64::new(t.re, t.im),
            )
        }),
    ))
}

/// On-disk mask: dimension, row-major dilation matrix, and coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaskFile {
    pub version: String,
    pub dim: usize,
    pub m: Vec<Vec<i64>>,
    pub coefficients: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl MaskFile {
    pub fn from_mask(mask: &Mask, meta: BTreeMap<String, serde_json::Value>) -> Self {
        MaskFile {
            version: FORMAT_VERSION.to_string(),
            dim: mask.dim(),
            m: mask.ctx().matrix().rows.clone(),
            coefficients: poly_to_terms(mask.poly()),
            meta,
        }
    }

    pub fn to_mask(&self) -> Result<Mask, FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Version(self.version.clone()));
        }
        let ctx = DilationContext::build(IntMatrix::new(self.m.clone())?)?;
        let p = terms_to_poly(self.dim, &self.coefficients)?;
        Ok(Mask::new(ctx, p)?)
    }
}

/// On-disk frame: mask, generators, and the verification report. The report
/// is advisory on input; verification always regenerates it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameFile {
    pub mask: MaskFile,
    pub generators: Vec<Vec<TermJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
}

impl FrameFile {
    pub fn from_frame(frame: &FrameSystem, report: VerificationReport) -> Self {
        FrameFile {
            mask: MaskFile::from_mask(frame.mask(), BTreeMap::new()),
            generators: frame.generators().iter().map(poly_to_terms).collect(),
            report: Some(report),
        }
    }

    pub fn to_frame(&self) -> Result<FrameSystem, FormatError> {
        let mask = self.mask.to_mask()?;
        let generators = self
            .generators
            .iter()
            .map(|g| terms_to_poly(self.mask.dim, g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FrameSystem::new(mask, generators)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::verify::verify_frame;
    use rand::{Rng, SeedableRng};

    #[test]
    fn mask_roundtrip_is_coefficient_identical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let mut terms = Vec::new();
            for _ in 0..10 {
                terms.push((
                    MultiIndex(vec![rng.gen_range(-5..=5), rng.gen_range(-5..=5)]),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                ));
            }
            let p = LaurentPoly::from_terms(2, terms);
            let ctx = DilationContext::build(IntMatrix::identity_scaled(2, 2)).unwrap();
            let mask = Mask::new_unnormalized(ctx, p).unwrap();
            let file = MaskFile::from_mask(&mask, BTreeMap::new());
            let json = serde_json::to_string(&file).unwrap();
            let parsed: MaskFile = serde_json::from_str(&json).unwrap();
            // bypass normalization on reload for the random poly
            let q = terms_to_poly(parsed.dim, &parsed.coefficients).unwrap();
            assert_eq!(&q, mask.poly());
        }
    }

    #[test]
    fn catalog_masks_roundtrip() {
        for e in catalog::entries() {
            let mask = catalog::get(e.name, &BTreeMap::new()).unwrap();
            let file = MaskFile::from_mask(&mask, BTreeMap::new());
            let json = serde_json::to_string_pretty(&file).unwrap();
            let parsed: MaskFile = serde_json::from_str(&json).unwrap();
            let back = parsed.to_mask().unwrap();
            assert_eq!(back.poly(), mask.poly(), "{}", e.name);
            assert_eq!(back.ctx().matrix(), mask.ctx().matrix());
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let mask = catalog::daubechies4().unwrap();
        let mut file = MaskFile::from_mask(&mask, BTreeMap::new());
        file.version = "uepframe/0".to_string();
        assert!(matches!(file.to_mask(), Err(FormatError::Version(_))));
    }

    #[test]
    fn duplicate_exponent_rejected() {
        let terms = vec![
            TermJson {
                exp: vec![0],
                re: 0.5,
                im: 0.0,
            },
            TermJson {
                exp: vec![0],
                re: 0.5,
                im: 0.0,
            },
        ];
        assert!(matches!(
            terms_to_poly(1, &terms),
            Err(FormatError::DuplicateExponent(_))
        ));
    }

    #[test]
    fn frame_file_roundtrip_reproduces_report() {
        let mask = catalog::boxspline111().unwrap();
        let frame =
            crate::sos_frame::construct_from_sos(&mask, &crate::sos_frame::boxspline111_certificate())
                .unwrap();
        let report = verify_frame(&frame, 1e-9);
        let file = FrameFile::from_frame(&frame, report.clone());
        let json = serde_json::to_string(&file).unwrap();
        let parsed: FrameFile = serde_json::from_str(&json).unwrap();
        let back = parsed.to_frame().unwrap();
        let fresh = verify_frame(&back, parsed.report.as_ref().unwrap().tolerance);
        assert_eq!(fresh.passed, report.passed);
        assert_eq!(back.len(), frame.len());
    }

    #[test]
    fn serialization_is_deterministic_and_sorted() {
        let mask = catalog::butterfly().unwrap();
        let a = serde_json::to_string(&MaskFile::from_mask(&mask, BTreeMap::new())).unwrap();
        let b = serde_json::to_string(&MaskFile::from_mask(&mask, BTreeMap::new())).unwrap();
        assert_eq!(a, b);
        let file = MaskFile::from_mask(&mask, BTreeMap::new());
        let exps: Vec<&Vec<i64>> = file.coefficients.iter().map(|t| &t.exp).collect();
        let mut sorted = exps.clone();
        sorted.sort();
        assert_eq!(exps, sorted);
    }
}
