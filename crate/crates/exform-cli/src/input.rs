//! JSON input schema and builders for library objects.
//!
//! ```json
//! {
//!   "n": 2,
//!   "domain": {"n": 2, "r": 1.0, "shape": "half-ball"},
//!   "metric": [["1", "0"], ["0", "1"]],
//!   "form": {"degree": 1, "coeffs": {"1": "2 * x1", "2": "-2 * x2"}},
//!   "boundary_tag": "normal-zero"
//! }
//! ```
//!
//! `adapt-chart` additionally reads `boundary_patch`, `radius`, and the
//! ambient metric; patches default to the flat hyperplane {x_n = 0}.

use std::collections::BTreeMap;

use serde::Deserialize;

use exform::chart::BoundaryPatch;
use exform::domain::ChartDomain;
use exform::expr::parse_expression;
use exform::field::{BoundaryTag, FormField, MetricField, ScalarField};
use exform::index::MultiIndex;
use exform::Error;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub n: usize,
    pub domain: ChartDomain,
    #[serde(default)]
    pub metric: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub form: Option<FormSpec>,
    #[serde(default)]
    pub boundary_tag: Option<String>,
    #[serde(default)]
    pub boundary_patch: Option<PatchSpec>,
    #[serde(default)]
    pub radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub degree: usize,
    /// Multi-index label ("1,3") → coefficient expression.
    pub coeffs: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    /// n component expressions in the n−1 parameter variables x1..x(n−1).
    pub sigma: Vec<String>,
    /// Base parameter value (the chart is centered at σ(base)).
    pub base: Vec<f64>,
    /// Radius of the parameter ball.
    pub param_radius: f64,
}

impl InputSpec {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let spec: InputSpec =
            serde_json::from_str(&text).map_err(|e| format!("malformed input JSON: {e}"))?;
        if spec.domain.n != spec.n {
            return Err(format!(
                "domain dimension {} does not match n = {}",
                spec.domain.n, spec.n
            ));
        }
        Ok(spec)
    }

    pub fn tag(&self) -> Result<BoundaryTag, String> {
        match self.boundary_tag.as_deref() {
            None => Ok(BoundaryTag::None),
            Some("normal-zero") => Ok(BoundaryTag::NormalPartZero),
            Some("tangential-zero") => Ok(BoundaryTag::TangentialPartZero),
            Some(other) => Err(format!(
                "unknown boundary_tag {other:?}; expected \"normal-zero\" or \"tangential-zero\""
            )),
        }
    }

    pub fn metric(&self) -> Result<MetricField, String> {
        let rows = self
            .metric
            .as_ref()
            .ok_or("input is missing the \"metric\" field")?;
        if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
            return Err(format!("metric must be an {0}x{0} array of expressions", self.n));
        }
        let exprs = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_expression(s, self.n).map_err(|e| e.to_string()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MetricField::from_matrix(self.n, self.domain.clone(), &exprs).map_err(|e| e.to_string())
    }

    pub fn form(&self) -> Result<FormField, String> {
        let spec = self
            .form
            .as_ref()
            .ok_or("input is missing the \"form\" field")?;
        let coeffs = spec
            .coeffs
            .iter()
            .map(|(label, text)| {
                let entries = label
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("bad multi-index label {label:?}"))?;
                let idx = MultiIndex::new(entries, self.n).map_err(|e| e.to_string())?;
                if idx.degree() != spec.degree {
                    return Err(format!(
                        "index {label:?} has degree {} but the form is declared degree {}",
                        idx.degree(),
                        spec.degree
                    ));
                }
                let e = parse_expression(text, self.n).map_err(|e| e.to_string())?;
                Ok((idx, e))
            })
            .collect::<Result<Vec<_>, String>>()?;
        FormField::from_coeffs(self.n, spec.degree, self.domain.clone(), &coeffs, self.tag()?)
            .map_err(|e| e.to_string())
    }

    pub fn patch(&self) -> Result<BoundaryPatch, String> {
        match &self.boundary_patch {
            None => Ok(BoundaryPatch::flat(self.n, self.domain.r)),
            Some(p) => {
                if p.sigma.len() != self.n {
                    return Err(format!(
                        "boundary patch needs {} component expressions, got {}",
                        self.n,
                        p.sigma.len()
                    ));
                }
                let pd = ChartDomain::ball(self.n - 1, p.param_radius);
                let sigma = p
                    .sigma
                    .iter()
                    .map(|s| {
                        Ok(ScalarField::new(
                            parse_expression(s, self.n - 1).map_err(|e: Error| e.to_string())?,
                            pd.clone(),
                        ))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                BoundaryPatch::new(sigma, p.base.clone()).map_err(|e| e.to_string())
            }
        }
    }
}
