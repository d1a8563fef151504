//! The flat JSON experiment description and its validation.

use std::path::Path;

use quartdiv_core::arith::MultiplicativeFn;
use quartdiv_core::densities::{DEFAULT_NU_MAX, DEFAULT_PRIME_CUTOFF};
use quartdiv_core::fixtures;
use quartdiv_core::forms::FormTriple;
use quartdiv_core::geometry::{validate_h3, ConvexPolygonRegion, Polytope};
use quartdiv_core::lattice::TripleIndex;
use quartdiv_core::sums::{SumKind, DEFAULT_X_BUDGET};
use quartdiv_core::verify::Scale;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Every field is optional; each command reads the ones it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name of a bundled fixture supplying forms and region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forms: Option<FormTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<ConvexPolygonRegion>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Polytope>,
    #[serde(rename = "V_prime", default, skip_serializing_if = "Option::is_none")]
    pub v_prime: Option<Polytope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<TripleIndex>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub big_d: Option<TripleIndex>,
    /// Moduli for `rho` and `delta`; defaults to `d` and `D`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<TripleIndex>>,
    /// Primes for `sigma`; defaults to 2, 3, 5, 7 and the bad primes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primes: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_list: Option<Vec<u64>>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MultiplicativeFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<SumKind>>,
    /// Restrict `T` to `gcd(x1, x2) = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coprime: Option<bool>,
    /// Whether `sum` computes main terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub main: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime_cutoff: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accelerate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_budget: Option<u64>,
    /// Monte Carlo samples and seed for the archimedean density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Exponent in the prefix bound on `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    /// Box `(V1, V2, V3)` of moduli for the discrepancy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lod_v: Option<[u64; 3]>,
    /// Exponent `c` in the lower limit `sqrt(X') / (log X)^c` of `M(X; V)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}:{m}", path.display())),
            other => other,
        })
    }

    /// Parses JSON, reporting `line:column: message` on failure.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("{}:{}: {e}", e.line(), e.column())))
    }

    /// SHA-256 of the canonical JSON, excluding the worker count.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn prime_cutoff(&self) -> u64 {
        self.prime_cutoff.unwrap_or(DEFAULT_PRIME_CUTOFF)
    }

    pub fn nu_max(&self) -> u32 {
        self.nu_max.unwrap_or(DEFAULT_NU_MAX)
    }

    pub fn accelerate(&self) -> bool {
        self.accelerate.unwrap_or(true)
    }

    pub fn x_budget(&self) -> u64 {
        self.x_budget.unwrap_or(DEFAULT_X_BUDGET)
    }

    pub fn samples(&self) -> u64 {
        self.samples.unwrap_or(1_000_000)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(1).max(1)
    }

    pub fn d(&self) -> TripleIndex {
        self.d.unwrap_or_else(TripleIndex::unit)
    }

    pub fn big_d(&self) -> TripleIndex {
        self.big_d.unwrap_or_else(TripleIndex::unit)
    }

    pub fn h(&self) -> MultiplicativeFn {
        self.h.clone().unwrap_or_else(MultiplicativeFn::unit)
    }

    pub fn x_list(&self) -> Result<&[u64], CliError> {
        match self.x_list.as_deref() {
            Some(xs) if !xs.is_empty() => Ok(xs),
            _ => Err(CliError::Config("x_list is empty; give it in the config or with --x-list".into())),
        }
    }

    /// Forms and region, checked against the positivity hypothesis.
    ///
    /// Explicit `forms` and `region` win over `fixture`; with neither, the
    /// unit fixture is used.
    pub fn problem(&self) -> Result<(String, FormTriple, ConvexPolygonRegion), CliError> {
        let fixture = match &self.fixture {
            Some(name) => Some(
                fixtures::by_name(name).ok_or_else(|| CliError::Config(format!("unknown fixture {name:?}")))?,
            ),
            None => None,
        };
        let base = fixture.clone().unwrap_or_else(fixtures::unit);
        let name = match (&self.forms, &fixture) {
            (Some(_), _) => "config".to_string(),
            (None, Some(f)) => f.name.to_string(),
            (None, None) => base.name.to_string(),
        };
        let forms = self.forms.unwrap_or(base.forms);
        let region = self.region.clone().unwrap_or(base.region);
        let h3 = validate_h3(&region, &forms);
        if !h3.accepted() {
            let form = h3.form.unwrap_or("a form");
            return Err(CliError::Config(format!(
                "hypothesis H3 violated: {form} is not positive on the region (witness {:?})",
                h3.witness
            )));
        }
        Ok((name, forms, region))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_carry_positions() {
        let e = ExperimentConfig::parse("{\n  \"x_list\": [1, 2,]\n}").unwrap_err();
        let CliError::Config(m) = e else { panic!() };
        assert!(m.starts_with("2:"), "{m}");
        assert!(ExperimentConfig::parse("{\"nope\": 1}").is_err());
        // a reducible quadratic form is rejected while parsing
        let e = ExperimentConfig::parse(r#"{"forms": {"L1": [1, 0], "L2": [0, 1], "Q": [1, 0, -1]}}"#);
        assert!(matches!(e, Err(CliError::Config(m)) if m.contains("H2")));
    }

    #[test]
    fn hash_ignores_workers_only() {
        let a = ExperimentConfig::parse(r#"{"x_list": [10], "workers": 1}"#).unwrap();
        let b = ExperimentConfig::parse(r#"{"x_list": [10], "workers": 4}"#).unwrap();
        let c = ExperimentConfig::parse(r#"{"x_list": [20]}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn negative_forms_fail_h3() {
        let c = ExperimentConfig::parse(r#"{"forms": {"L1": [-1, 0], "L2": [0, 1], "Q": [1, 1, 0]}}"#).unwrap();
        assert!(matches!(c.problem(), Err(CliError::Config(m)) if m.contains("H3")));
        let (name, _, _) = ExperimentConfig::default().problem().unwrap();
        assert_eq!(name, "unit");
    }
}
