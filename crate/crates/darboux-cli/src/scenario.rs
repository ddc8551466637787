//! Scenario files: one JSON object holding the determining data, the
//! coefficient family, and run settings.
//!
//! Complex scalars are two-element `[re, im]` arrays and matrices are lists
//! of rows. The digest is a SHA-256 over the canonical re-serialization, so
//! whitespace and key order in the source file do not change it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use darboux_core::{
    BoxDomain, ComplexMatrix, CoreError, GbdtTriple, HamiltonianFamily, ProjectorClosedForm,
    SignatureClosedForm, TimeGrid, Tolerances,
};

/// How the determining data is given: directly, or through one of the two
/// closed-form constructions that derive the initial state from
/// displacement equations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleSpec {
    /// The matrices A, S(0), Pi(0) and the coupling constants, verbatim.
    Explicit {
        a: ComplexMatrix,
        s0: ComplexMatrix,
        pi0: ComplexMatrix,
        c: Vec<f64>,
    },
    /// Two column blocks whose widths split the signal space; pairs with
    /// the constant-signature family.
    Signature {
        a: ComplexMatrix,
        theta1: ComplexMatrix,
        theta2: ComplexMatrix,
        c: Vec<f64>,
    },
    /// Pi(0) plus a square orthonormal mixing matrix; pairs with the
    /// orthoprojector family.
    Projector {
        a: ComplexMatrix,
        pi0: ComplexMatrix,
        beta: ComplexMatrix,
        c: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub triple: TripleSpec,
    pub family: HamiltonianFamily,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_domain: Option<BoxDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_vector: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

/// A scenario after validation: constructed triple, checked family, and
/// effective settings.
#[derive(Debug)]
pub struct ResolvedScenario {
    pub triple: GbdtTriple,
    pub family: HamiltonianFamily,
    pub grid: TimeGrid,
    pub box_domain: BoxDomain,
    pub h_vector: Option<ComplexMatrix>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub digest: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CoreError> {
        let text = fs::read_to_string(path).map_err(|e| CoreError::Scenario {
            context: format!("reading {}: {e}", path.display()),
        })?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        Ok(scenario)
    }

    /// Content hash of the canonical serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serialization");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        format!("{:x}", hasher.finalize())
    }

    /// Effective tolerances: defaults, then file overrides, then flags.
    pub fn tolerances(&self, flag_overrides: &[(String, f64)]) -> Result<Tolerances, CoreError> {
        let mut tol = Tolerances::default();
        for (name, value) in &self.tolerances {
            tol.set(name, *value)?;
        }
        for (name, value) in flag_overrides {
            tol.set(name, *value)?;
        }
        Ok(tol)
    }

    /// Construct the triple the scenario names. Closed-form variants derive
    /// S(0); the explicit variant passes its data through admission untouched.
    pub fn build_triple(&self, tol: &Tolerances) -> Result<GbdtTriple, CoreError> {
        match &self.triple {
            TripleSpec::Explicit { a, s0, pi0, c } => {
                GbdtTriple::new(a.clone(), s0.clone(), pi0.clone(), c.clone(), tol)
            }
            TripleSpec::Signature {
                a,
                theta1,
                theta2,
                c,
            } => Ok(SignatureClosedForm::new(
                a.clone(),
                theta1.clone(),
                theta2.clone(),
                c.clone(),
                tol,
            )?
            .triple()
            .clone()),
            TripleSpec::Projector { a, pi0, beta, c } => {
                Ok(
                    ProjectorClosedForm::new(a.clone(), pi0.clone(), beta.clone(), c.clone(), tol)?
                        .triple()
                        .clone(),
                )
            }
        }
    }

    pub fn resolve(
        &self,
        flag_overrides: &[(String, f64)],
        seed_override: Option<u64>,
    ) -> Result<ResolvedScenario, CoreError> {
        let tolerances = self.tolerances(flag_overrides)?;
        let triple = self.build_triple(&tolerances)?;
        self.family.validate(triple.m(), triple.r(), &tolerances)?;
        self.time.validate()?;
        let box_domain = match &self.box_domain {
            Some(b) => b.clone(),
            None => BoxDomain::unit(triple.r()),
        };
        box_domain.validate(triple.r())?;
        if let Some(h) = &self.h_vector {
            if h.rows() != triple.n() || h.cols() != 1 {
                return Err(CoreError::DimensionMismatch {
                    context: format!(
                        "h_vector is {}x{}, expected {}x1",
                        h.rows(),
                        h.cols(),
                        triple.n()
                    ),
                });
            }
            h.ensure_finite()?;
        }
        Ok(ResolvedScenario {
            triple,
            family: self.family.clone(),
            grid: self.time.clone(),
            box_domain,
            h_vector: self.h_vector.clone(),
            tolerances,
            seed: seed_override.unwrap_or(self.seed),
            digest: self.digest(),
        })
    }
}
