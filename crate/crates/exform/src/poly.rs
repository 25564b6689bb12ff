//! Exact multivariate polynomials over the rationals.
//!
//! The jet-recovery induction is pure algebra, so where the inputs are
//! polynomials with rational coefficients we run it exactly and sidestep
//! floating-point thresholds entirely. Conversion from the expression tree
//! is exact: every f64 constant is a dyadic rational.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{BoundaryTag, FormField};
use crate::index::{enumerate_multi_indices, MultiIndex};

/// Polynomial in n variables: monomial exponent vector → coefficient.
/// Zero coefficients are never stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl RatPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn from_integer(n: usize, c: i64) -> Self {
        Self::constant(n, BigRational::from_integer(BigInt::from(c)))
    }

    /// The variable x_i (1-based).
    pub fn var(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let mut e = vec![0u32; n];
        e[i - 1] = 1;
        let mut p = Self::zero(n);
        p.terms.insert(e, BigRational::one());
        Ok(p)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    fn insert(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, m: u32) -> Self {
        let mut out = Self::constant(self.n, BigRational::one());
        for _ in 0..m {
            out = out.mul(self);
        }
        out
    }

    /// ∂/∂x_i (1-based).
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let k = e[i - 1];
            if k == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i - 1] -= 1;
            out.insert(f, c * BigRational::from_integer(BigInt::from(k)));
        }
        out
    }

    /// ∂^α for a full exponent vector α.
    pub fn partial_multi(&self, alpha: &[u32]) -> Self {
        let mut out = self.clone();
        for (i, &m) in alpha.iter().enumerate() {
            for _ in 0..m {
                out = out.partial(i + 1);
            }
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, p: &[BigRational]) -> BigRational {
        let mut out = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term *= &p[i];
                }
            }
            out += term;
        }
        out
    }

    /// Constant term, i.e. the value at the origin.
    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&vec![0u32; self.n])
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Substitute x_i := 0.
    pub fn restrict_var(&self, i: usize) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[i - 1] == 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Exact translation x ↦ x + p (binomial expansion per variable).
    pub fn translate(&self, p: &[BigRational]) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                let shifted = Self::var(self.n, i + 1)
                    .unwrap()
                    .add(&Self::constant(self.n, p[i].clone()));
                term = term.mul(&shifted.pow(k));
            }
            out = out.add(&term);
        }
        out
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = rational_to_f64(c);
                e.iter()
                    .enumerate()
                    .fold(c, |acc, (i, &k)| acc * p[i].powi(k as i32))
            })
            .sum()
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion from the expression tree. Every finite f64 is a dyadic
/// rational, so constants convert without loss; non-polynomial nodes are
/// rejected.
pub fn expr_to_poly(e: &Expr, n: usize) -> Result<RatPoly> {
    Ok(match e {
        Expr::Const(c) => {
            if !c.is_finite() {
                return Err(Error::NonPolynomial {
                    reason: format!("non-finite constant {c}"),
                });
            }
            RatPoly::constant(
                n,
                BigRational::from_float(*c).ok_or(Error::NonPolynomial {
                    reason: format!("constant {c} has no rational value"),
                })?,
            )
        }
        Expr::Var(i) => RatPoly::var(n, *i)?,
        Expr::Add(a, b) => expr_to_poly(a, n)?.add(&expr_to_poly(b, n)?),
        Expr::Sub(a, b) => expr_to_poly(a, n)?.sub(&expr_to_poly(b, n)?),
        Expr::Mul(a, b) => expr_to_poly(a, n)?.mul(&expr_to_poly(b, n)?),
        Expr::Neg(a) => expr_to_poly(a, n)?.neg(),
        Expr::Pow(a, m) => {
            if *m < 0 {
                return Err(Error::NonPolynomial {
                    reason: "negative power".into(),
                });
            }
            expr_to_poly(a, n)?.pow(*m as u32)
        }
        Expr::Div(a, b) => {
            let denom = expr_to_poly(b, n)?;
            let mut t = denom.terms();
            match (t.next(), t.next()) {
                (Some((e, c)), None) if e.iter().all(|&k| k == 0) => {
                    expr_to_poly(a, n)?.scale(&(BigRational::one() / c))
                }
                (None, _) => {
                    return Err(Error::NonPolynomial {
                        reason: "division by zero polynomial".into(),
                    })
                }
                _ => {
                    return Err(Error::NonPolynomial {
                        reason: "division by a non-constant".into(),
                    })
                }
            }
        }
        Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) | Expr::Sqrt(_) => {
            return Err(Error::NonPolynomial {
                reason: "transcendental node".into(),
            })
        }
        Expr::Abs(_) | Expr::Sgn(_) => {
            return Err(Error::NonPolynomial {
                reason: "interface node".into(),
            })
        }
    })
}

/// A k-form whose coefficients are exact rational polynomials.
#[derive(Debug, Clone)]
pub struct PolyForm {
    n: usize,
    k: usize,
    indices: Vec<MultiIndex>,
    coeffs: Vec<RatPoly>,
    pub tag: BoundaryTag,
}

impl PolyForm {
    pub fn from_form(omega: &FormField) -> Result<Self> {
        let n = omega.n();
        let coeffs = omega
            .coeffs()
            .iter()
            .map(|c| expr_to_poly(&c.expr, n))
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            k: omega.degree(),
            indices: omega.indices().to_vec(),
            coeffs,
            tag: omega.tag,
        })
    }

    pub fn from_coeffs(
        n: usize,
        k: usize,
        sparse: &[(MultiIndex, RatPoly)],
        tag: BoundaryTag,
    ) -> Result<Self> {
        let indices = enumerate_multi_indices(n, k)?;
        let mut coeffs = vec![RatPoly::zero(n); indices.len()];
        for (idx, p) in sparse {
            let pos = indices
                .iter()
                .position(|i| i == idx)
                .ok_or(Error::Invalid(format!("index {idx} not of degree {k}")))?;
            coeffs[pos] = p.clone();
        }
        Ok(Self {
            n,
            k,
            indices,
            coeffs,
            tag,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[RatPoly] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &MultiIndex) -> &RatPoly {
        let pos = self
            .indices
            .iter()
            .position(|i| i == idx)
            .expect("index of matching degree");
        &self.coeffs[pos]
    }

    /// Exterior derivative, same sign convention as the floating-point path:
    /// (dγ)_K = Σ_a (−1)^a ∂_{K_a} γ_{K∖K_a}.
    pub fn exterior_derivative(&self) -> Result<PolyForm> {
        if self.k == self.n {
            return PolyForm::from_coeffs(self.n, self.k + 1, &[], BoundaryTag::None);
        }
        let out_indices = enumerate_multi_indices(self.n, self.k + 1)?;
        let coeffs = out_indices
            .iter()
            .map(|big| {
                let mut acc = RatPoly::zero(self.n);
                for (a, &dir) in big.entries().iter().enumerate() {
                    let term = self.coeff(&big.with_removed(a)).partial(dir);
                    acc = if a % 2 == 0 {
                        acc.add(&term)
                    } else {
                        acc.sub(&term)
                    };
                }
                acc
            })
            .collect();
        Ok(PolyForm {
            n: self.n,
            k: self.k + 1,
            indices: out_indices,
            coeffs,
            tag: BoundaryTag::None,
        })
    }

    /// Euclidean-metric codifferential components, up to overall sign:
    /// for each (k−1)-index J, Σ_{j∉J} σ_j ∂_j γ_{J∪{j}} with σ_j the sign
    /// of sorting j into J. Exactly zero iff δγ = 0.
    pub fn euclidean_coclosure(&self) -> Result<PolyForm> {
        if self.k == 0 {
            return PolyForm::from_coeffs(self.n, 0, &[], BoundaryTag::None);
        }
        let out_indices = enumerate_multi_indices(self.n, self.k - 1)?;
        let coeffs = out_indices
            .iter()
            .map(|j_idx| {
                let mut acc = RatPoly::zero(self.n);
                for j in 1..=self.n {
                    if let Some((_, sign)) = j_idx.insert_index(j) {
                        let term = self.coeff(&j_idx.with_inserted(j)).partial(j);
                        acc = if sign > 0 {
                            acc.add(&term)
                        } else {
                            acc.sub(&term)
                        };
                    }
                }
                acc
            })
            .collect();
        Ok(PolyForm {
            n: self.n,
            k: self.k - 1,
            indices: out_indices,
            coeffs,
            tag: BoundaryTag::None,
        })
    }

    /// Translate every coefficient by p (exact).
    pub fn translate(&self, p: &[BigRational]) -> PolyForm {
        PolyForm {
            n: self.n,
            k: self.k,
            indices: self.indices.clone(),
            coeffs: self.coeffs.iter().map(|c| c.translate(p)).collect(),
            tag: self.tag,
        }
    }
}
