//! Normal-jet recovery at a boundary point.
//!
//! For a closed and coclosed k-form γ with vanishing normal part, every
//! derivative at a boundary point is determined by the tangential data
//! alone: derivatives with no normal component are read off the boundary
//! restriction (coefficients containing the normal index vanish there
//! identically), and each higher normal layer is recovered from the two
//! PDE relations — coclosure (δγ = 0) yields ∂ₙ of the n-containing
//! coefficients, closure (dγ = 0) yields ∂ₙ of the n-free ones.
//!
//! Everything runs in exact rational arithmetic: the recovery is pure
//! algebra once the inputs are rational polynomials, and the model metric
//! in the adapted chart is Euclidean.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{BoundaryTag, FormField, MetricField};
use crate::poly::{rational_to_f64, PolyForm};

/// How a jet entry was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Read from the boundary restriction (or forced to zero by the
    /// vanishing normal part); no normal derivative involved.
    GivenTangential,
    /// Normal derivative of an n-containing coefficient, solved from δγ = 0.
    RecoveredViaCoclosure,
    /// Normal derivative of an n-free coefficient, solved from dγ = 0.
    RecoveredViaClosure,
}

/// One entry (∂^α γ_I)(p) with exact value and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetEntry {
    pub index: String,
    pub alpha: Vec<u32>,
    /// Exact rational value, printed as `num/den`.
    pub value: String,
    pub value_f64: f64,
    pub provenance: Provenance,
}

/// Complete table of derivatives up to total order M at a boundary point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetTable {
    pub point: Vec<f64>,
    pub max_order: usize,
    pub entries: Vec<JetEntry>,
    #[serde(skip)]
    values: BTreeMap<(Vec<u32>, usize), BigRational>,
}

impl JetTable {
    /// Exact value of (∂^α γ_I)(p); the table is complete up to max_order.
    pub fn value(&self, alpha: &[u32], coeff_pos: usize) -> Option<&BigRational> {
        self.values.get(&(alpha.to_vec(), coeff_pos))
    }

    /// Smallest total order with a nonvanishing entry, with a witness.
    pub fn first_nonvanishing(&self) -> Option<(usize, &JetEntry)> {
        self.entries
            .iter()
            .filter(|e| e.value != "0")
            .map(|e| (e.alpha.iter().sum::<u32>() as usize, e))
            .min_by_key(|(order, _)| *order)
    }
}

fn require_euclidean(g: &MetricField) -> Result<()> {
    let n = g.n();
    for i in 1..=n {
        for j in 1..=n {
            let want = if i == j { 1.0 } else { 0.0 };
            match g.entry(i, j) {
                Expr::Const(c) if *c == want => {}
                _ => {
                    return Err(Error::Invalid(
                        "exact jet recovery requires the Euclidean model metric of the adapted chart"
                            .into(),
                    ))
                }
            }
        }
    }
    Ok(())
}

/// All exponent vectors of length n with the given coordinate sum.
fn exponents_with_sum(n: usize, total: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in exponents_with_sum(n - 1, total - first) {
            let mut e = vec![first];
            e.append(&mut rest);
            out.push(e);
        }
    }
    out
}

/// Recover the full jet table of γ at the boundary point p up to total
/// order M. Inputs must be exact: rational-polynomial coefficients,
/// Euclidean model metric, normal-part-zero tag, dγ = 0 and δγ = 0 as
/// polynomial identities.
pub fn normal_jet_recovery(
    gamma: &FormField,
    g: &MetricField,
    p: &[f64],
    max_order: usize,
) -> Result<JetTable> {
    let n = gamma.n();
    require_euclidean(g)?;
    if gamma.tag != BoundaryTag::NormalPartZero {
        return Err(Error::MissingBoundaryTag {
            expected: "normal-part-zero",
        });
    }
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            op: "normal_jet_recovery",
            expect: n,
            got: p.len(),
        });
    }
    if p[n - 1] != 0.0 {
        return Err(Error::Invalid("jet base point must lie on the boundary".into()));
    }
    let pf = PolyForm::from_form(gamma)?;
    // translate so the base point becomes the origin (exact: f64 → rational)
    let shift: Vec<BigRational> = p
        .iter()
        .map(|x| {
            BigRational::from_float(*x).ok_or(Error::NonPolynomial {
                reason: format!("base coordinate {x} is not finite"),
            })
        })
        .collect::<Result<_>>()?;
    let pf = pf.translate(&shift);
    jet_table_at_origin(&pf, p, max_order)
}

fn jet_table_at_origin(pf: &PolyForm, point: &[f64], max_order: usize) -> Result<JetTable> {
    let n = pf.n();
    let k = pf.degree();

    // exact preconditions: trace, closure, coclosure
    for (idx, c) in pf.indices().iter().zip(pf.coeffs()) {
        if idx.contains_n() && !c.restrict_var(n).is_zero() {
            return Err(Error::NormalPartNonzero {
                index: idx.label(),
                point: point.to_vec(),
                value: rational_to_f64(&c.restrict_var(n).constant_term()),
            });
        }
    }
    let d = pf.exterior_derivative()?;
    for (idx, c) in d.indices().iter().zip(d.coeffs()) {
        if !c.is_zero() {
            return Err(Error::NotClosed { index: idx.label() });
        }
    }
    let delta = pf.euclidean_coclosure()?;
    for (idx, c) in delta.indices().iter().zip(delta.coeffs()) {
        if !c.is_zero() {
            return Err(Error::NotCoclosed { index: idx.label() });
        }
    }

    let mut values: BTreeMap<(Vec<u32>, usize), BigRational> = BTreeMap::new();
    let mut provenance: BTreeMap<(Vec<u32>, usize), Provenance> = BTreeMap::new();

    // layer 0 (αₙ = 0): tangential data only. n-containing coefficients
    // vanish on the boundary; n-free ones are differentiated within it.
    // layer m ≥ 1: ∂^α = ∂^{α−eₙ}∂ₙ, with ∂ₙγ_I replaced through the
    // matching PDE relation, landing on entries of the previous layer.
    for layer in 0..=max_order as u32 {
        for tang_order in 0..=(max_order as u32 - layer) {
            for alpha_hat in exponents_with_sum(n - 1, tang_order) {
                let mut alpha = alpha_hat.clone();
                alpha.push(layer);
                for (pos, idx) in pf.indices().iter().enumerate() {
                    let key = (alpha.clone(), pos);
                    let (value, prov) = if layer == 0 {
                        if idx.contains_n() {
                            (BigRational::zero(), Provenance::GivenTangential)
                        } else {
                            let restricted = pf.coeffs()[pos].restrict_var(n);
                            (
                                restricted.partial_multi(&alpha).constant_term(),
                                Provenance::GivenTangential,
                            )
                        }
                    } else {
                        let mut beta = alpha.clone();
                        beta[n - 1] -= 1;
                        if idx.contains_n() {
                            // δγ = 0: Σ_{j∉J} σ_j ∂_j γ_{J∪{j}} = 0 for
                            // J = I∖{n}; solve for the j = n term
                            let j_idx = idx.with_removed(k - 1);
                            let (_, sign_n) = j_idx.insert_index(n).expect("n absent from J");
                            let mut acc = BigRational::zero();
                            for j in 1..=n - 1 {
                                if let Some((_, sign_j)) = j_idx.insert_index(j) {
                                    let other = j_idx.with_inserted(j);
                                    let other_pos = pf
                                        .indices()
                                        .iter()
                                        .position(|i| *i == other)
                                        .expect("degree-k index");
                                    let mut shifted = beta.clone();
                                    shifted[j - 1] += 1;
                                    let v = values
                                        .get(&(shifted, other_pos))
                                        .expect("previous layer filled");
                                    let signed = if sign_j > 0 { v.clone() } else { -v };
                                    acc += signed;
                                }
                            }
                            let value = if sign_n > 0 { -acc } else { acc };
                            (value, Provenance::RecoveredViaCoclosure)
                        } else {
                            // dγ = 0 on K = I∪{n}: Σ_a (−1)^a ∂_{K_a} γ_{K∖K_a} = 0;
                            // the a = k term is ±∂ₙγ_I, solve for it
                            let big = idx.with_inserted(n);
                            let sign_n = if k % 2 == 0 { 1 } else { -1 };
                            let mut acc = BigRational::zero();
                            for (a, &dir) in big.entries().iter().enumerate().take(k) {
                                let small = big.with_removed(a);
                                let small_pos = pf
                                    .indices()
                                    .iter()
                                    .position(|i| *i == small)
                                    .expect("degree-k index");
                                let mut shifted = beta.clone();
                                shifted[dir - 1] += 1;
                                let v = values
                                    .get(&(shifted, small_pos))
                                    .expect("previous layer filled");
                                let signed = if a % 2 == 0 { v.clone() } else { -v };
                                acc += signed;
                            }
                            let value = if sign_n > 0 { -acc } else { acc };
                            (value, Provenance::RecoveredViaClosure)
                        }
                    };
                    values.insert(key.clone(), value);
                    provenance.insert(key, prov);
                }
            }
        }
    }

    let entries = values
        .iter()
        .map(|((alpha, pos), v)| JetEntry {
            index: pf.indices()[*pos].label(),
            alpha: alpha.clone(),
            value: v.to_string(),
            value_f64: rational_to_f64(v),
            provenance: provenance[&(alpha.clone(), *pos)],
        })
        .collect();

    Ok(JetTable {
        point: point.to_vec(),
        max_order,
        entries,
        values,
    })
}

/// Outcome of probing for a zero of infinite order at a boundary point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrderVerdict {
    /// Some derivative of total order ≤ M is nonzero.
    FiniteOrder {
        order: usize,
        witness_index: String,
        witness_alpha: Vec<u32>,
        witness_value: String,
    },
    /// Every derivative up to M vanishes; if the zero is truly of infinite
    /// order the unique-continuation theorem forces γ ≡ 0.
    AllVanish { max_order: usize },
}

pub fn infinite_order_probe(
    gamma: &FormField,
    g: &MetricField,
    p: &[f64],
    max_order: usize,
) -> Result<(JetTable, OrderVerdict)> {
    let table = normal_jet_recovery(gamma, g, p, max_order)?;
    let verdict = match table.first_nonvanishing() {
        Some((order, e)) => OrderVerdict::FiniteOrder {
            order,
            witness_index: e.index.clone(),
            witness_alpha: e.alpha.clone(),
            witness_value: e.value.clone(),
        },
        None => OrderVerdict::AllVanish { max_order },
    };
    Ok((table, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ChartDomain;
    use crate::expr::parse_expression;
    use crate::index::MultiIndex;

    fn half(n: usize) -> ChartDomain {
        ChartDomain::half_ball(n, 1.0)
    }

    fn euclid(n: usize) -> MetricField {
        MetricField::euclidean(n, half(n))
    }

    fn cubic_form() -> FormField {
        // γ = d(x1³ − 3x1x2²) = (3x1² − 3x2²)dx1 − 6x1x2·dx2
        FormField::from_coeffs(
            2,
            1,
            half(2),
            &[
                (
                    MultiIndex::new(vec![1], 2).unwrap(),
                    parse_expression("3 * x1^2 - 3 * x2^2", 2).unwrap(),
                ),
                (
                    MultiIndex::new(vec![2], 2).unwrap(),
                    parse_expression("-6 * x1 * x2", 2).unwrap(),
                ),
            ],
            BoundaryTag::NormalPartZero,
        )
        .unwrap()
    }

    #[test]
    fn cubic_jets_and_order() {
        let (table, verdict) =
            infinite_order_probe(&cubic_form(), &euclid(2), &[0.0, 0.0], 3).unwrap();
        // order ≤ 1 jets vanish
        for e in &table.entries {
            if e.alpha.iter().sum::<u32>() <= 1 {
                assert_eq!(e.value, "0", "∂^{:?} γ_{}", e.alpha, e.index);
            }
        }
        // recovered layer: ∂₂γ₂(0) = 0 via coclosure, ∂₂γ₁(0) = 0 via closure
        let e = table
            .entries
            .iter()
            .find(|e| e.alpha == vec![0, 1] && e.index == "2")
            .unwrap();
        assert_eq!(e.value, "0");
        assert_eq!(e.provenance, Provenance::RecoveredViaCoclosure);
        let e = table
            .entries
            .iter()
            .find(|e| e.alpha == vec![0, 1] && e.index == "1")
            .unwrap();
        assert_eq!(e.value, "0");
        assert_eq!(e.provenance, Provenance::RecoveredViaClosure);
        // first nonvanishing order 2, witnessed by ∂₁²γ₁(0) = 6
        match verdict {
            OrderVerdict::FiniteOrder { order, .. } => assert_eq!(order, 2),
            other => panic!("expected finite order, got {other:?}"),
        }
        let e = table
            .entries
            .iter()
            .find(|e| e.alpha == vec![2, 0] && e.index == "1")
            .unwrap();
        assert_eq!(e.value, "6");
    }

    #[test]
    fn recovered_table_matches_direct_differentiation() {
        // oracle: differentiate the polynomial coefficients directly
        let gamma = cubic_form();
        let table = normal_jet_recovery(&gamma, &euclid(2), &[0.0, 0.0], 4).unwrap();
        let pf = PolyForm::from_form(&gamma).unwrap();
        for e in &table.entries {
            let pos = pf.indices().iter().position(|i| i.label() == e.index).unwrap();
            let direct = pf.coeffs()[pos].partial_multi(&e.alpha).constant_term();
            assert_eq!(e.value, direct.to_string(), "∂^{:?} γ_{}", e.alpha, e.index);
        }
    }

    #[test]
    fn off_origin_base_point() {
        // jets of the cubic at the boundary point (1/2, 0)
        let gamma = cubic_form();
        let p = [0.5, 0.0];
        let table = normal_jet_recovery(&gamma, &euclid(2), &p, 3).unwrap();
        let pf = PolyForm::from_form(&gamma).unwrap();
        let shift: Vec<BigRational> =
            p.iter().map(|x| BigRational::from_float(*x).unwrap()).collect();
        for e in &table.entries {
            let pos = pf.indices().iter().position(|i| i.label() == e.index).unwrap();
            let direct = pf.coeffs()[pos]
                .translate(&shift)
                .partial_multi(&e.alpha)
                .constant_term();
            assert_eq!(e.value, direct.to_string());
        }
        // γ₁(1/2, 0) = 3/4 ≠ 0: order 0 zero... i.e. not a zero at all
        match infinite_order_probe(&gamma, &euclid(2), &p, 3).unwrap().1 {
            OrderVerdict::FiniteOrder { order, .. } => assert_eq!(order, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refusals() {
        // constant dx2 has nonvanishing trace of the normal part
        let omega = FormField::from_coeffs(
            2,
            1,
            half(2),
            &[(MultiIndex::new(vec![2], 2).unwrap(), Expr::one())],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        assert!(matches!(
            normal_jet_recovery(&omega, &euclid(2), &[0.0, 0.0], 2),
            Err(Error::NormalPartNonzero { .. })
        ));

        // not closed: γ = x2²·dx1
        let omega = FormField::from_coeffs(
            2,
            1,
            half(2),
            &[(
                MultiIndex::new(vec![1], 2).unwrap(),
                parse_expression("x2^2", 2).unwrap(),
            )],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        assert!(matches!(
            normal_jet_recovery(&omega, &euclid(2), &[0.0, 0.0], 2),
            Err(Error::NotClosed { .. })
        ));

        // not coclosed: γ = x1·dx1
        let omega = FormField::from_coeffs(
            2,
            1,
            half(2),
            &[(
                MultiIndex::new(vec![1], 2).unwrap(),
                parse_expression("x1", 2).unwrap(),
            )],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        assert!(matches!(
            normal_jet_recovery(&omega, &euclid(2), &[0.0, 0.0], 2),
            Err(Error::NotCoclosed { .. })
        ));

        // non-Euclidean metric is refused on the exact path
        let g = MetricField::from_upper_triangle(
            2,
            half(2),
            &[vec![Expr::constant(2.0), Expr::zero()], vec![Expr::one()]],
        )
        .unwrap();
        assert!(normal_jet_recovery(&cubic_form(), &g, &[0.0, 0.0], 2).is_err());

        // untagged input
        let omega = cubic_form().with_tag(BoundaryTag::None);
        assert!(matches!(
            normal_jet_recovery(&omega, &euclid(2), &[0.0, 0.0], 2),
            Err(Error::MissingBoundaryTag { .. })
        ));

        // interior base point
        assert!(normal_jet_recovery(&cubic_form(), &euclid(2), &[0.0, 0.5], 2).is_err());
    }

    #[test]
    fn zero_form_all_vanish() {
        let omega = FormField::zero(2, 1, half(2))
            .unwrap()
            .with_tag(BoundaryTag::NormalPartZero);
        let (_, verdict) = infinite_order_probe(&omega, &euclid(2), &[0.0, 0.0], 4).unwrap();
        assert!(matches!(verdict, OrderVerdict::AllVanish { max_order: 4 }));
    }

    #[test]
    fn half_disk_gradient_has_order_one() {
        // γ = dh, h = x1² − x2²: first nonvanishing order 1 via ∂₁γ₁(0) = 2
        let gamma = FormField::from_coeffs(
            2,
            1,
            half(2),
            &[
                (
                    MultiIndex::new(vec![1], 2).unwrap(),
                    parse_expression("2 * x1", 2).unwrap(),
                ),
                (
                    MultiIndex::new(vec![2], 2).unwrap(),
                    parse_expression("-2 * x2", 2).unwrap(),
                ),
            ],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        let (table, verdict) =
            infinite_order_probe(&gamma, &euclid(2), &[0.0, 0.0], 3).unwrap();
        match verdict {
            OrderVerdict::FiniteOrder { order, .. } => assert_eq!(order, 1),
            other => panic!("{other:?}"),
        }
        // the recovered normal derivative ∂₂γ₂(0) = −2 comes from coclosure
        let e = table
            .entries
            .iter()
            .find(|e| e.alpha == vec![0, 1] && e.index == "2")
            .unwrap();
        assert_eq!(e.value, "-2");
        assert_eq!(e.provenance, Provenance::RecoveredViaCoclosure);
    }

    #[test]
    fn three_dimensional_two_form() {
        // 2-form in n = 3 exercising both relations with k = 2:
        // γ = ⋆dh for the harmonic potential h = x1x3, i.e.
        // γ = x1·dx1∧dx2 + x3·dx2∧dx3; closed, coclosed, and the
        // n-containing coefficient x3 vanishes on the boundary
        let gamma = FormField::from_coeffs(
            3,
            2,
            half(3),
            &[
                (
                    MultiIndex::new(vec![1, 2], 3).unwrap(),
                    parse_expression("x1", 3).unwrap(),
                ),
                (
                    MultiIndex::new(vec![2, 3], 3).unwrap(),
                    parse_expression("x3", 3).unwrap(),
                ),
            ],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        let table = normal_jet_recovery(&gamma, &euclid(3), &[0.0, 0.0, 0.0], 3).unwrap();
        let pf = PolyForm::from_form(&gamma).unwrap();
        for e in &table.entries {
            let pos = pf.indices().iter().position(|i| i.label() == e.index).unwrap();
            let direct = pf.coeffs()[pos].partial_multi(&e.alpha).constant_term();
            assert_eq!(e.value, direct.to_string(), "∂^{:?} γ_{}", e.alpha, e.index);
        }
    }
}
