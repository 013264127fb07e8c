//! JSON certificates recording a structure together with its verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checker::{Certificate, Overall, Verdict};
use crate::structures::{ClosureReport, Structure};
use crate::terms::Signature;

use super::model::{parse_model_as, print_model, ModelBackend};
use super::ParseError;

pub const CERTIFICATE_FORMAT: &str = "semdis-certificate/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseEntry {
    pub index: usize,
    pub provenance: String,
    pub clause: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationEntry {
    pub index: usize,
    pub obligation: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub format: String,
    /// SHA-256 of each input document, keyed by role.
    pub inputs: BTreeMap<String, String>,
    pub signature: Signature,
    pub clauses: Vec<ClauseEntry>,
    pub obligations: Vec<ObligationEntry>,
    /// `finite` or `symbolic`.
    pub backend: String,
    /// The structure in model-document syntax.
    pub structure: String,
    pub closure: ClosureReport,
    pub overall: Overall,
}

impl CertificateDocument {
    pub fn from_certificate(cert: &Certificate, inputs: &[(&str, &str)]) -> Self {
        let sig = &cert.theory.signature;
        let sorted = !sig.is_single_sorted();
        CertificateDocument {
            format: CERTIFICATE_FORMAT.into(),
            inputs: inputs
                .iter()
                .map(|(role, text)| (role.to_string(), digest(text)))
                .collect(),
            signature: sig.clone(),
            clauses: cert
                .theory
                .clauses
                .iter()
                .zip(&cert.clause_verdicts)
                .enumerate()
                .map(|(i, (tc, v))| ClauseEntry {
                    index: i + 1,
                    provenance: tc.provenance.to_string(),
                    clause: tc.clause.display_sorted(sorted).to_string(),
                    verdict: v.clone(),
                })
                .collect(),
            obligations: cert
                .obligations
                .iter()
                .zip(&cert.obligation_verdicts)
                .enumerate()
                .map(|(i, (o, v))| ObligationEntry {
                    index: i + 1,
                    obligation: o.to_string(),
                    verdict: v.clone(),
                })
                .collect(),
            backend: if cert.structure.is_finite() { "finite" } else { "symbolic" }.into(),
            structure: print_model(&cert.structure),
            closure: cert.closure.clone(),
            overall: cert.overall,
        }
    }

    /// Re-reads the embedded structure.
    pub fn structure(&self) -> Result<Structure, ParseError> {
        let backend = if self.backend == "finite" {
            ModelBackend::Finite
        } else {
            ModelBackend::Symbolic
        };
        parse_model_as(&self.structure, &self.signature, backend)
    }
}

/// Lower-case hex SHA-256 of `text`.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Deterministic pretty-printed JSON.
pub fn serialize_certificate(cert: &Certificate, inputs: &[(&str, &str)]) -> String {
    let doc = CertificateDocument::from_certificate(cert, inputs);
    let mut s = serde_json::to_string_pretty(&doc).expect("certificate documents always serialize");
    s.push('\n');
    s
}

pub fn parse_certificate(text: &str) -> Result<CertificateDocument, serde_json::Error> {
    serde_json::from_str(text)
}
