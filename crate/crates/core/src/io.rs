//! Serialization of covariance matrices and certificates.
//!
//! One self-describing, versioned JSON format per object. Matrix entries are
//! written with serde_json's shortest-round-trip float encoding, so a
//! save/load cycle reproduces every `f64` bit-exactly. Certificates embed
//! the input they talk about plus all witness data, and re-validate from the
//! file alone with no access to the solver that produced them.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::min_eig_sym;
use crate::passive::{AbsSepCert, AbsSepVerdict};
use crate::scalar::Scalar;
use crate::sep::{
    validate_dual_functional, validate_product_witness, DualFunctional, SeparabilityCert,
    Verdict, Witness,
};
use crate::symplectic::{is_qcm, CoordOrdering, ModeLayout, Qcm, Validity};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

impl Metadata {
    pub fn is_empty(&self) -> bool {
        self.label.is_none() && self.seed.is_none() && self.generator.is_none()
    }
}

/// On-disk form of a covariance matrix with its mode partition.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QcmFile {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    /// `"mode_wise"` or `"position_momentum"`.
    pub ordering: String,
    /// Row-major, length `(2(m+n))^2`.
    pub matrix: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

fn ordering_to_str(o: CoordOrdering) -> &'static str {
    match o {
        CoordOrdering::ModeWise => "mode_wise",
        CoordOrdering::PositionMomentum => "position_momentum",
    }
}

fn ordering_from_str(s: &str) -> Result<CoordOrdering> {
    match s {
        "mode_wise" => Ok(CoordOrdering::ModeWise),
        "position_momentum" => Ok(CoordOrdering::PositionMomentum),
        other => Err(Error::domain(format!("unknown ordering `{other}`"))),
    }
}

/// Map a serde_json error position to a byte offset in the source text.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0usize;
    for (i, l) in text.split('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len() + 1;
    }
    text.len()
}

fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    Error::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl QcmFile {
    pub fn from_qcm<T: Scalar>(v: &Qcm<T>, metadata: Option<Metadata>) -> Self {
        QcmFile {
            schema_version: SCHEMA_VERSION,
            m: v.layout().m,
            n: v.layout().n,
            ordering: ordering_to_str(v.layout().ordering).to_string(),
            matrix: v
                .mat()
                .row_iter()
                .flat_map(|r| {
                    r.iter()
                        .map(|x| x.to_f64().unwrap_or(f64::NAN))
                        .collect::<Vec<_>>()
                })
                .collect(),
            metadata,
        }
    }

    pub fn layout(&self) -> Result<ModeLayout> {
        ModeLayout::new(self.m, self.n, ordering_from_str(&self.ordering)?)
    }

    /// Raw matrix (symmetrized on conversion happens in `Qcm::new`; here the
    /// stored entries are returned as-is).
    pub fn to_matrix<T: Scalar>(&self) -> Result<DMatrix<T>> {
        let layout = self.layout()?;
        let d = layout.dim();
        if self.matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: self.matrix.len(),
            });
        }
        Ok(DMatrix::from_fn(d, d, |i, j| {
            T::from_f64(self.matrix[i * d + j]).expect("finite entry")
        }))
    }

    pub fn to_qcm<T: Scalar>(&self, tol: &Tolerances<T>) -> Result<Qcm<T>> {
        Qcm::new(self.layout()?, self.to_matrix()?, tol)
    }

    /// Heisenberg check of the stored matrix (warn-only at load time, since
    /// invalid matrices are legitimate negative-test inputs).
    pub fn validity<T: Scalar>(&self, tol: &Tolerances<T>) -> Result<Validity<T>> {
        is_qcm(&self.to_matrix::<T>()?, &self.layout()?, tol)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        let layout = self.layout()?;
        let d = layout.dim();
        if self.matrix.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: self.matrix.len(),
            });
        }
        if self.matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("matrix contains a non-finite entry"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: QcmFile = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// SHA-256 of the canonical (compact) encoding of the physical payload.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            schema_version: u32,
            m: usize,
            n: usize,
            ordering: &'a str,
            matrix: &'a [f64],
        }
        let canon = serde_json::to_string(&Canonical {
            schema_version: self.schema_version,
            m: self.m,
            n: self.n,
            ordering: &self.ordering,
            matrix: &self.matrix,
        })
        .expect("serializable");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        hex::encode(hasher.finalize())
    }
}

pub fn load_qcm(path: &Path) -> Result<QcmFile> {
    let text = std::fs::read_to_string(path)?;
    QcmFile::parse(&text)
}

pub fn read_qcm(reader: &mut dyn Read) -> Result<QcmFile> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    QcmFile::parse(&text)
}

pub fn save_qcm(file: &QcmFile, path: &Path) -> Result<()> {
    std::fs::write(path, file.to_json() + "\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixData {
    pub dim: usize,
    /// Row-major.
    pub data: Vec<f64>,
}

impl MatrixData {
    pub fn from_mat<T: Scalar>(m: &DMatrix<T>) -> Self {
        MatrixData {
            dim: m.nrows(),
            data: m
                .row_iter()
                .flat_map(|r| {
                    r.iter()
                        .map(|x| x.to_f64().unwrap_or(f64::NAN))
                        .collect::<Vec<_>>()
                })
                .collect(),
        }
    }

    pub fn to_mat(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.dim * self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim * self.dim,
                got: self.data.len(),
            });
        }
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.data[i * self.dim + j]
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct WitnessData {
    /// Product witness blocks, one per group (mode-wise, party-local).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_pt_symplectic_eig: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violating_cut: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_v1: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_v2: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_upper: Option<f64>,
    /// Absolute-separability data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TolerancesData {
    pub psd: f64,
    pub alg: f64,
    pub verdict: f64,
}

impl TolerancesData {
    pub fn from_tol<T: Scalar>(tol: &Tolerances<T>) -> Self {
        TolerancesData {
            psd: tol.psd.to_f64().unwrap_or(f64::NAN),
            alg: tol.alg.to_f64().unwrap_or(f64::NAN),
            verdict: tol.verdict.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn to_tol(&self) -> Tolerances<f64> {
        Tolerances {
            psd: self.psd,
            alg: self.alg,
            verdict: self.verdict,
        }
    }
}

/// Self-contained certificate: verdict, witnesses, margins, the tolerances
/// used, the tool version and the input (echoed plus digested).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertFile {
    pub schema_version: u32,
    /// `"separability"` or `"absolute_separability"`.
    pub kind: String,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<usize>>,
    pub witness: WitnessData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distillable: Option<bool>,
    pub tolerances: TolerancesData,
    pub tool_version: String,
    pub input_digest: String,
    pub input: QcmFile,
}

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

impl CertFile {
    pub fn from_separability<T: Scalar>(
        input: &QcmFile,
        cert: &SeparabilityCert<T>,
        tol: &Tolerances<T>,
    ) -> Self {
        let mut w = WitnessData::default();
        match &cert.witness {
            Witness::Product { gammas } => {
                w.gammas = Some(gammas.iter().map(MatrixData::from_mat).collect());
            }
            Witness::PptViolation {
                min_symplectic_eig,
                cut,
            } => {
                w.min_pt_symplectic_eig = Some(min_symplectic_eig.to_f64().unwrap_or(f64::NAN));
                w.violating_cut = *cut;
            }
            Witness::DualInfeasibility { value, functional } => {
                w.dual_value = Some(value.to_f64().unwrap_or(f64::NAN));
                w.dual_v1 = Some(MatrixData::from_mat(&functional.v1));
                w.dual_v2 = Some(MatrixData::from_mat(&functional.v2));
                w.dual_level = Some(functional.level.to_f64().unwrap_or(f64::NAN));
                w.dual_eps = Some(functional.eps.to_f64().unwrap_or(f64::NAN));
            }
            Witness::Margin { lower, upper } => {
                w.margin_lower = Some(lower.to_f64().unwrap_or(f64::NAN));
                w.margin_upper = Some(upper.to_f64().unwrap_or(f64::NAN));
            }
        }
        CertFile {
            schema_version: SCHEMA_VERSION,
            kind: "separability".to_string(),
            verdict: match cert.verdict {
                Verdict::Separable => "separable",
                Verdict::Entangled => "entangled",
                Verdict::Inconclusive => "inconclusive",
            }
            .to_string(),
            route: Some(cert.route.as_str().to_string()),
            groups: Some(cert.groups.clone()),
            witness: w,
            margin: cert.margin.map(|m| m.to_f64().unwrap_or(f64::NAN)),
            distillable: cert.distillable,
            tolerances: TolerancesData::from_tol(tol),
            tool_version: tool_version(),
            input_digest: input.digest(),
            input: input.clone(),
        }
    }

    pub fn from_abs_sep<T: Scalar>(
        input: &QcmFile,
        cert: &AbsSepCert<T>,
        tol: &Tolerances<T>,
    ) -> Self {
        let mut w = WitnessData {
            lambda1: Some(cert.lambda1.to_f64().unwrap_or(f64::NAN)),
            lambda2: Some(cert.lambda2.to_f64().unwrap_or(f64::NAN)),
            ..WitnessData::default()
        };
        if let (Some(ga), Some(gb)) = (&cert.gamma_a, &cert.gamma_b) {
            w.gammas = Some(vec![MatrixData::from_mat(ga), MatrixData::from_mat(gb)]);
        }
        CertFile {
            schema_version: SCHEMA_VERSION,
            kind: "absolute_separability".to_string(),
            verdict: match cert.verdict {
                AbsSepVerdict::AbsolutelySeparable => "absolutely_separable",
                AbsSepVerdict::NotAbsolute => "not_absolute",
            }
            .to_string(),
            route: None,
            groups: Some(vec![input.m, input.n]),
            witness: w,
            margin: None,
            distillable: None,
            tolerances: TolerancesData::from_tol(tol),
            tool_version: tool_version(),
            input_digest: input.digest(),
            input: input.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: CertFile = serde_json::from_str(text).map_err(|e| parse_error(text, &e))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema {
                found: file.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        file.input.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub fn load_cert(path: &Path) -> Result<CertFile> {
    let text = std::fs::read_to_string(path)?;
    CertFile::parse(&text)
}

pub fn save_cert(cert: &CertFile, path: &Path) -> Result<()> {
    std::fs::write(path, cert.to_json() + "\n")?;
    Ok(())
}

/// Outcome of re-checking a certificate from its file alone.
#[derive(Debug, Clone)]
pub struct Revalidation {
    pub digest_ok: bool,
    pub witness_ok: bool,
    pub messages: Vec<String>,
}

impl Revalidation {
    pub fn ok(&self) -> bool {
        self.digest_ok && self.witness_ok
    }
}

/// Re-validate a certificate with no access to any solver: recompute the
/// input digest, rebuild the state, and re-check the stored witness
/// (product inequality, partial-transpose spectrum, separating functional,
/// or eigenvalue data) at the stored tolerances.
pub fn revalidate_cert(cert: &CertFile) -> Result<Revalidation> {
    let tol = cert.tolerances.to_tol();
    let mut messages = Vec::new();
    let digest_ok = cert.input.digest() == cert.input_digest;
    if !digest_ok {
        messages.push("input digest mismatch".to_string());
    }
    let v: Qcm<f64> = cert.input.to_qcm(&tol)?;
    let groups = cert
        .groups
        .clone()
        .unwrap_or_else(|| vec![cert.input.m, cert.input.n]);
    let witness_ok = match (cert.kind.as_str(), cert.verdict.as_str()) {
        ("separability", "separable") | ("absolute_separability", "absolutely_separable") => {
            match &cert.witness.gammas {
                Some(gammas) => {
                    let mats: Vec<DMatrix<f64>> = gammas
                        .iter()
                        .map(|g| g.to_mat())
                        .collect::<Result<_>>()?;
                    let check = validate_product_witness(&v, &mats, &groups, &tol)?;
                    if !check.ok {
                        messages.push(format!(
                            "product witness failed (min eig {:.3e})",
                            check.min_eig
                        ));
                    }
                    check.ok
                }
                None => {
                    messages.push("separable verdict without witness blocks".to_string());
                    false
                }
            }
        }
        ("separability", "entangled") => {
            if let Some(stored) = cert.witness.min_pt_symplectic_eig {
                // Recompute the partial-transpose spectrum across the
                // recorded cut.
                let min_nu = pt_min_symplectic(&v, &groups, cert.witness.violating_cut, &tol)?;
                let ok = min_nu < 1.0 - tol.verdict;
                if !ok {
                    messages.push(format!(
                        "recomputed PT symplectic eigenvalue {min_nu:.6} does not violate PPT"
                    ));
                } else if (min_nu - stored).abs() > 1e-6 * stored.max(1.0) {
                    messages.push(format!(
                        "stored witness {stored:.6} differs from recomputed {min_nu:.6}"
                    ));
                }
                ok
            } else if let (Some(v1), Some(v2), Some(level), Some(eps)) = (
                &cert.witness.dual_v1,
                &cert.witness.dual_v2,
                cert.witness.dual_level,
                cert.witness.dual_eps,
            ) {
                let f = DualFunctional {
                    v1: v1.to_mat()?,
                    v2: v2.to_mat()?,
                    level,
                    eps,
                };
                let ok = validate_dual_functional(&v, &groups, &f, &tol)?;
                if !ok {
                    messages.push("separating functional failed re-verification".to_string());
                }
                ok
            } else {
                messages.push("entangled verdict without witness data".to_string());
                false
            }
        }
        ("absolute_separability", "not_absolute") => {
            match (cert.witness.lambda1, cert.witness.lambda2) {
                (Some(l1), Some(l2)) => {
                    let eig = crate::linalg::sym_eigen(v.mat()).values;
                    let ok = eig[0] * eig[1] < 1.0 - tol.verdict
                        && (eig[0] - l1).abs() <= 1e-9 * l1.abs().max(1.0)
                        && (eig[1] - l2).abs() <= 1e-9 * l2.abs().max(1.0);
                    if !ok {
                        messages.push("eigenvalue data does not match the state".to_string());
                    }
                    ok
                }
                _ => false,
            }
        }
        (_, "inconclusive") => true,
        (kind, verdict) => {
            messages.push(format!("unknown certificate kind/verdict: {kind}/{verdict}"));
            false
        }
    };
    Ok(Revalidation {
        digest_ok,
        witness_ok,
        messages,
    })
}

fn pt_min_symplectic(
    v: &Qcm<f64>,
    groups: &[usize],
    cut: Option<usize>,
    tol: &Tolerances<f64>,
) -> Result<f64> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let modes = v.layout().modes();
    let (first, count) = match cut {
        None => (0usize, groups.first().copied().unwrap_or(v.layout().m)),
        Some(i) => {
            let off: usize = groups.iter().take(i).sum();
            (off, groups[i])
        }
    };
    // Move the cut's modes to the front, split, transpose, and read the
    // smallest symplectic eigenvalue.
    let order: Vec<usize> = (first..first + count)
        .chain((0..modes).filter(|j| *j < first || *j >= first + count))
        .collect();
    let idx: Vec<usize> = order.iter().flat_map(|&j| [2 * j, 2 * j + 1]).collect();
    let d = v.dim();
    let mat = DMatrix::from_fn(d, d, |i, j| v.mat()[(idx[i], idx[j])]);
    let q = Qcm::new(ModeLayout::mode_wise(count, modes - count)?, mat, tol)?;
    let spec = q.partial_transpose().symplectic_spectrum(tol)?;
    Ok(*spec.last().expect("modes >= 1"))
}

/// Minimum eigenvalue of `V - (+) gammas`, exposed for report printing.
pub fn witness_min_eig(v: &Qcm<f64>, gammas: &[DMatrix<f64>]) -> Result<f64> {
    let mut stacked: Option<DMatrix<f64>> = None;
    for g in gammas {
        stacked = Some(match stacked {
            None => g.clone(),
            Some(acc) => crate::symplectic::direct_sum_mat(&acc, g),
        });
    }
    let stacked = stacked.ok_or_else(|| Error::domain("no witness blocks"))?;
    Ok(min_eig_sym(
        &(v.to_ordering(CoordOrdering::ModeWise).mat() - stacked),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::passive::absolute_separability;
    use crate::sep::separability_1vn;
    use crate::symplectic::{random_qcm, thermal, tmsv, Purity};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn qcm_round_trip_is_bit_exact() {
        let v = random_qcm::<f64>(
            42,
            ModeLayout::mode_wise(1, 1).unwrap(),
            Purity::Mixed { nu_max: 3.0 },
            1.2,
        );
        let file = QcmFile::from_qcm(&v, None);
        let text = file.to_json();
        let back = QcmFile::parse(&text).unwrap();
        assert_eq!(file, back);
        let v2: Qcm<f64> = back.to_qcm(&tol()).unwrap();
        assert_eq!(v.mat(), v2.mat());
        assert_eq!(file.digest(), back.digest());
    }

    #[test]
    fn identity_round_trip() {
        let v = thermal(1.0f64, 2).unwrap().with_split(1, 1).unwrap();
        let file = QcmFile::from_qcm(&v, None);
        let back = QcmFile::parse(&file.to_json()).unwrap();
        assert_eq!(back.to_qcm::<f64>(&tol()).unwrap().mat(), v.mat());
    }

    #[test]
    fn truncated_file_reports_offset() {
        let v = tmsv(0.4f64);
        let text = QcmFile::from_qcm(&v, None).to_json();
        let truncated = &text[..text.len() / 2];
        match QcmFile::parse(truncated) {
            Err(Error::Parse { offset, .. }) => {
                assert!(offset > 0 && offset <= truncated.len() + 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unsupported_schema_version() {
        let v = tmsv(0.4f64);
        let mut file = QcmFile::from_qcm(&v, None);
        file.schema_version = 99;
        let text = file.to_json();
        match QcmFile::parse(&text) {
            Err(Error::UnsupportedSchema { found, .. }) => assert_eq!(found, 99),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let v = tmsv(0.4f64);
        let mut file = QcmFile::from_qcm(&v, None);
        file.matrix.pop();
        assert!(matches!(
            QcmFile::parse(&file.to_json()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_matrices_load_with_warning_semantics() {
        // 0.5 * identity is loadable; the validity check flags it.
        let file = QcmFile {
            schema_version: SCHEMA_VERSION,
            m: 1,
            n: 1,
            ordering: "mode_wise".to_string(),
            matrix: {
                let mut m = vec![0.0; 16];
                for i in 0..4 {
                    m[i * 4 + i] = 0.5;
                }
                m
            },
            metadata: None,
        };
        let parsed = QcmFile::parse(&file.to_json()).unwrap();
        assert!(!parsed.validity::<f64>(&tol()).unwrap().valid);
        assert!(parsed.to_qcm::<f64>(&tol()).is_ok());
    }

    #[test]
    fn separability_cert_round_trip_and_revalidation() {
        let cfgv = SolverConfig::default();
        // separable instance
        let v = thermal(1.5f64, 3).unwrap().with_split(1, 2).unwrap();
        let file = QcmFile::from_qcm(&v, None);
        let cert = separability_1vn(&v, &cfgv).unwrap();
        let cf = CertFile::from_separability(&file, &cert, &cfgv.tol);
        let parsed = CertFile::parse(&cf.to_json()).unwrap();
        let reval = revalidate_cert(&parsed).unwrap();
        assert!(reval.ok(), "messages: {:?}", reval.messages);

        // entangled instance
        let v = tmsv(0.8f64);
        let file = QcmFile::from_qcm(&v, None);
        let cert = separability_1vn(&v, &cfgv).unwrap();
        let cf = CertFile::from_separability(&file, &cert, &cfgv.tol);
        let reval = revalidate_cert(&CertFile::parse(&cf.to_json()).unwrap()).unwrap();
        assert!(reval.ok(), "messages: {:?}", reval.messages);
    }

    #[test]
    fn tampered_cert_fails_revalidation() {
        let cfgv = SolverConfig::default();
        let v = thermal(1.5f64, 2).unwrap().with_split(1, 1).unwrap();
        let file = QcmFile::from_qcm(&v, None);
        let cert = separability_1vn(&v, &cfgv).unwrap();
        let mut cf = CertFile::from_separability(&file, &cert, &cfgv.tol);
        // tamper with the input matrix: digest must catch it
        cf.input.matrix[0] += 1.0;
        let reval = revalidate_cert(&cf).unwrap();
        assert!(!reval.digest_ok);

        // tamper with a witness block: the inequality must catch it
        let mut cf2 = CertFile::from_separability(&file, &cert, &cfgv.tol);
        if let Some(gammas) = &mut cf2.witness.gammas {
            gammas[0].data[0] += 10.0;
        }
        let reval = revalidate_cert(&cf2).unwrap();
        assert!(!reval.witness_ok);
    }

    #[test]
    fn abs_sep_cert_round_trip() {
        let v = thermal(1.5f64, 2).unwrap().with_split(1, 1).unwrap();
        let file = QcmFile::from_qcm(&v, None);
        let cert = absolute_separability(&v, &tol()).unwrap();
        let cf = CertFile::from_abs_sep(&file, &cert, &tol());
        let reval = revalidate_cert(&CertFile::parse(&cf.to_json()).unwrap()).unwrap();
        assert!(reval.ok(), "messages: {:?}", reval.messages);

        let v = tmsv(0.9f64);
        let file = QcmFile::from_qcm(&v, None);
        let cert = absolute_separability(&v, &tol()).unwrap();
        let cf = CertFile::from_abs_sep(&file, &cert, &tol());
        let reval = revalidate_cert(&CertFile::parse(&cf.to_json()).unwrap()).unwrap();
        assert!(reval.ok(), "messages: {:?}", reval.messages);
    }
}
