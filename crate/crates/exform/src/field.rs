//! Scalar fields, metric fields and k-form fields on chart domains.

use crate::domain::ChartDomain;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::index::{enumerate_multi_indices, MultiIndex};

/// Smoothness classification of a field across the interface {x_n = 0}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Smooth,
    PiecewiseAcrossInterface,
}

/// An exactly differentiable scalar field: an expression tree restricted to
/// a chart domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub expr: Expr,
    pub domain: ChartDomain,
}

impl ScalarField {
    pub fn new(expr: Expr, domain: ChartDomain) -> Self {
        Self { expr, domain }
    }

    pub fn constant(c: f64, domain: ChartDomain) -> Self {
        Self::new(Expr::constant(c), domain)
    }

    pub fn zero(domain: ChartDomain) -> Self {
        Self::constant(0.0, domain)
    }

    /// Piecewise tag is set iff the tree contains an abs/sgn node.
    pub fn smoothness(&self) -> Smoothness {
        if self.expr.has_interface_node() {
            Smoothness::PiecewiseAcrossInterface
        } else {
            Smoothness::Smooth
        }
    }

    /// Evaluate at a point of the domain.
    pub fn evaluate(&self, p: &[f64]) -> Result<f64> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain { point: p.to_vec() });
        }
        self.expr.eval(p)
    }

    /// Evaluate without the domain-membership check.
    pub fn eval_unchecked(&self, p: &[f64]) -> Result<f64> {
        self.expr.eval(p)
    }

    /// Exact symbolic partial derivative ∂/∂x_i. For piecewise fields and
    /// i = n the result is classical off the interface, upper-sided on it.
    pub fn partial(&self, i: usize) -> ScalarField {
        ScalarField::new(self.expr.partial(i), self.domain.clone())
    }

    /// Iterated partials for a multi-order α (1-based directions with
    /// multiplicities given by `alpha[i-1]`).
    pub fn partial_multi(&self, alpha: &[usize]) -> ScalarField {
        let mut e = self.expr.clone();
        for (dir0, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                e = e.partial(dir0 + 1);
            }
        }
        ScalarField::new(e, self.domain.clone())
    }

    /// Reflection composition: x ↦ f(x′, |xⁿ|), times sgn(xⁿ) when `flip`.
    /// Extends a field on a half domain to the reflected full domain.
    pub fn compose_reflection(&self, flip: bool) -> Result<ScalarField> {
        if !self.domain.has_interface() {
            return Err(Error::NoInterface);
        }
        let n = self.domain.n;
        let mut e = self.expr.reflect_argument(n);
        if flip {
            e = Expr::mul(Expr::Sgn(n), e);
        }
        Ok(ScalarField::new(e, self.domain.reflected_full()))
    }

    /// Central difference (f(p+h·e_i) − f(p−h·e_i)) / 2h. Signals which side
    /// of the stencil leaves the domain.
    pub fn finite_diff_partial(&self, i: usize, p: &[f64], h: f64) -> Result<f64> {
        let mut plus = p.to_vec();
        plus[i - 1] += h;
        let mut minus = p.to_vec();
        minus[i - 1] -= h;
        if !self.domain.contains(&plus) {
            return Err(Error::StencilOutsideDomain {
                point: p.to_vec(),
                side: "forward",
            });
        }
        if !self.domain.contains(&minus) {
            return Err(Error::StencilOutsideDomain {
                point: p.to_vec(),
                side: "backward",
            });
        }
        Ok((self.expr.eval(&plus)? - self.expr.eval(&minus)?) / (2.0 * h))
    }

    /// One-sided difference quotient (f(p ± h·e_i) − f(p)) / ±h.
    pub fn one_sided_diff(&self, i: usize, p: &[f64], h: f64, forward: bool) -> Result<f64> {
        let mut q = p.to_vec();
        let h = if forward { h } else { -h };
        q[i - 1] += h;
        Ok((self.expr.eval(&q)? - self.expr.eval(p)?) / h)
    }
}

/// Boundary-condition tag on a form field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryTag {
    #[default]
    None,
    /// n(ω) = 0: coefficients containing index n vanish on {x_n = 0}.
    NormalPartZero,
    /// t(ω) = 0: coefficients free of index n vanish on {x_n = 0}.
    TangentialPartZero,
}

/// A symmetric positive-definite matrix of scalar fields, with cached
/// symbolic determinant and adjugate-based inverse entries.
#[derive(Debug, Clone)]
pub struct MetricField {
    n: usize,
    domain: ChartDomain,
    entries: Vec<Expr>, // row-major n×n, symmetric by construction
    det: Expr,
    inverse: Vec<Expr>, // row-major n×n
}

fn det_expr(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = Expr::zero();
            for j in 0..n {
                let minor: Vec<Vec<Expr>> = (1..n)
                    .map(|r| {
                        (0..n)
                            .filter(|c| *c != j)
                            .map(|c| m[r][c].clone())
                            .collect()
                    })
                    .collect();
                let term = Expr::mul(m[0][j].clone(), det_expr(&minor));
                acc = if j % 2 == 0 {
                    Expr::add(acc, term)
                } else {
                    Expr::sub(acc, term)
                };
            }
            acc
        }
    }
}

impl MetricField {
    /// Build from the upper triangle (inclusive of the diagonal), given
    /// row-major as `upper[i][j - i]` for j ≥ i, 0-based. Symmetry holds by
    /// construction.
    pub fn from_upper_triangle(n: usize, domain: ChartDomain, upper: &[Vec<Expr>]) -> Result<Self> {
        if upper.len() != n || upper.iter().enumerate().any(|(i, r)| r.len() != n - i) {
            return Err(Error::Invalid(
                "upper triangle must have rows of length n - i".into(),
            ));
        }
        let mut full = vec![vec![Expr::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                full[i][j] = upper[i][j - i].clone();
                full[j][i] = upper[i][j - i].clone();
            }
        }
        Self::from_matrix(n, domain, &full)
    }

    /// Build from a full matrix; entries must be structurally symmetric.
    pub fn from_matrix(n: usize, domain: ChartDomain, m: &[Vec<Expr>]) -> Result<Self> {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("metric matrix must be n×n".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if m[i][j] != m[j][i] {
                    return Err(Error::Invalid(format!(
                        "metric entries g_{}{} and g_{}{} differ structurally",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        let det = det_expr(m);
        // adjugate / det
        let mut inverse = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<Expr>> = (0..n)
                    .filter(|r| *r != j)
                    .map(|r| {
                        (0..n)
                            .filter(|c| *c != i)
                            .map(|c| m[r][c].clone())
                            .collect()
                    })
                    .collect();
                let mut cof = det_expr(&minor);
                if (i + j) % 2 == 1 {
                    cof = Expr::neg(cof);
                }
                inverse[i * n + j] = Expr::div(cof, det.clone());
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in m {
            entries.extend(row.iter().cloned());
        }
        Ok(Self {
            n,
            domain,
            entries,
            det,
            inverse,
        })
    }

    pub fn euclidean(n: usize, domain: ChartDomain) -> Self {
        let m: Vec<Vec<Expr>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                    .collect()
            })
            .collect();
        Self::from_matrix(n, domain, &m).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    /// g_ij, 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[(i - 1) * self.n + (j - 1)]
    }

    /// g^ij, 1-based indices.
    pub fn inverse_entry(&self, i: usize, j: usize) -> &Expr {
        &self.inverse[(i - 1) * self.n + (j - 1)]
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    pub fn sqrt_det(&self) -> Expr {
        Expr::sqrt(self.det.clone())
    }

    pub fn eval_matrix(&self, p: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entries[i * self.n + j].eval(p)?;
            }
        }
        Ok(m)
    }

    pub fn eval_inverse(&self, p: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.inverse[i * self.n + j].eval(p)?;
            }
        }
        Ok(m)
    }

    /// Leading principal minors at a point, 1×1 up to n×n.
    pub fn leading_minors(&self, p: &[f64]) -> Result<Vec<f64>> {
        let m = self.eval_matrix(p)?;
        Ok((1..=self.n)
            .map(|k| m.view((0, 0), (k, k)).clone_owned().determinant())
            .collect())
    }

    /// Sylvester check at a point: all leading principal minors positive.
    pub fn is_spd_at(&self, p: &[f64]) -> Result<bool> {
        Ok(self.leading_minors(p)?.iter().all(|m| *m > 0.0))
    }

    /// Whether g_jn = δ_jn holds on the given boundary points within `tol`.
    /// Returns the worst offending (j, point, deviation) on failure.
    pub fn check_adapted_on(
        &self,
        boundary_points: &[Vec<f64>],
        tol: f64,
    ) -> Result<std::result::Result<(), (usize, Vec<f64>, f64)>> {
        let n = self.n;
        let mut worst: Option<(usize, Vec<f64>, f64)> = None;
        for p in boundary_points {
            for j in 1..=n {
                let target = if j == n { 1.0 } else { 0.0 };
                let dev = (self.entry(j, n).eval(p)? - target).abs();
                if dev > tol && worst.as_ref().map_or(true, |w| dev > w.2) {
                    worst = Some((j, p.clone(), dev));
                }
            }
        }
        Ok(match worst {
            Some(w) => Err(w),
            None => Ok(()),
        })
    }
}

/// A degree-k form as a full table of coefficients over the increasing
/// multi-indices of dimension n (zero fields explicit).
#[derive(Debug, Clone)]
pub struct FormField {
    n: usize,
    k: usize,
    domain: ChartDomain,
    indices: Vec<MultiIndex>,
    coeffs: Vec<ScalarField>,
    pub tag: BoundaryTag,
}

impl FormField {
    pub fn zero(n: usize, k: usize, domain: ChartDomain) -> Result<Self> {
        let indices = enumerate_multi_indices(n, k)?;
        let coeffs = indices
            .iter()
            .map(|_| ScalarField::zero(domain.clone()))
            .collect();
        Ok(Self {
            n,
            k,
            domain,
            indices,
            coeffs,
            tag: BoundaryTag::None,
        })
    }

    /// The zero (n+1)-form: the image of d on top forms, with an empty
    /// coefficient set.
    pub fn zero_above_top(n: usize, domain: ChartDomain) -> Self {
        Self {
            n,
            k: n + 1,
            domain,
            indices: vec![],
            coeffs: vec![],
            tag: BoundaryTag::None,
        }
    }

    /// Build from a sparse association; missing coefficients are zero.
    pub fn from_coeffs(
        n: usize,
        k: usize,
        domain: ChartDomain,
        assoc: &[(MultiIndex, Expr)],
        tag: BoundaryTag,
    ) -> Result<Self> {
        let mut form = Self::zero(n, k, domain.clone())?;
        form.tag = tag;
        for (idx, e) in assoc {
            if idx.degree() != k || idx.ambient_dim() != n {
                return Err(Error::Invalid(format!(
                    "coefficient index {idx} does not fit a {k}-form in dimension {n}"
                )));
            }
            let pos = form
                .indices
                .iter()
                .position(|i| i == idx)
                .expect("index enumeration is complete");
            form.coeffs[pos] = ScalarField::new(e.clone(), domain.clone());
        }
        Ok(form)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn coeffs(&self) -> &[ScalarField] {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &MultiIndex) -> &ScalarField {
        let pos = self
            .indices
            .iter()
            .position(|i| i == idx)
            .expect("valid multi-index");
        &self.coeffs[pos]
    }

    pub fn coeff_at(&self, pos: usize) -> &ScalarField {
        &self.coeffs[pos]
    }

    pub fn set_coeff(&mut self, idx: &MultiIndex, f: ScalarField) {
        let pos = self
            .indices
            .iter()
            .position(|i| i == idx)
            .expect("valid multi-index");
        self.coeffs[pos] = f;
    }

    /// Evaluate all coefficients at a point (in index enumeration order).
    pub fn eval_coeffs(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.coeffs.iter().map(|c| c.eval_unchecked(p)).collect()
    }

    pub fn with_tag(mut self, tag: BoundaryTag) -> Self {
        self.tag = tag;
        self
    }

    /// Check the tagged boundary condition on a boundary sample grid.
    /// For `NormalPartZero` this is exactly the trace condition: every
    /// coefficient whose index contains n vanishes on {x_n = 0}.
    pub fn check_boundary_tag(&self, per_axis: usize, tol: f64) -> Result<()> {
        let want_n = match self.tag {
            BoundaryTag::None => return Ok(()),
            BoundaryTag::NormalPartZero => true,
            BoundaryTag::TangentialPartZero => false,
        };
        let grid = self.domain().boundary_grid(per_axis);
        if grid.is_empty() {
            return Err(Error::NoInterface);
        }
        for (idx, c) in self.indices.iter().zip(&self.coeffs) {
            if idx.contains_n() != want_n {
                continue;
            }
            for p in &grid {
                let v = c.eval_unchecked(p)?;
                if v.abs() > tol {
                    return Err(Error::NormalPartNonzero {
                        index: idx.label(),
                        point: p.clone(),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// Map every coefficient through `f`, keeping indices and tag.
    pub fn map_coeffs(&self, mut f: impl FnMut(&MultiIndex, &ScalarField) -> ScalarField) -> Self {
        let coeffs = self
            .indices
            .iter()
            .zip(&self.coeffs)
            .map(|(i, c)| f(i, c))
            .collect();
        Self {
            n: self.n,
            k: self.k,
            domain: self.domain.clone(),
            indices: self.indices.clone(),
            coeffs,
            tag: self.tag,
        }
    }

    /// Rebuild with the same index table but new coefficients and domain.
    pub(crate) fn with_parts(
        n: usize,
        k: usize,
        domain: ChartDomain,
        indices: Vec<MultiIndex>,
        coeffs: Vec<ScalarField>,
        tag: BoundaryTag,
    ) -> Self {
        Self {
            n,
            k,
            domain,
            indices,
            coeffs,
            tag,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn half_plane() -> ChartDomain {
        ChartDomain::half_ball(2, 1.0)
    }

    #[test]
    fn evaluate_respects_domain() {
        let f = ScalarField::new(parse_expression("x1^2 + x2", 2).unwrap(), half_plane());
        assert_eq!(f.evaluate(&[0.5, 0.25]).unwrap(), 0.5f64.powi(2) + 0.25);
        assert!(matches!(
            f.evaluate(&[0.5, -0.25]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn compose_reflection_even_and_odd() {
        // f = x2, flip=false → abs(x2)
        let f = ScalarField::new(Expr::var(2), half_plane());
        let even = f.compose_reflection(false).unwrap();
        assert_eq!(even.eval_unchecked(&[0.0, -0.5]).unwrap(), 0.5);
        assert_eq!(even.smoothness(), Smoothness::PiecewiseAcrossInterface);

        // f = x1, flip=true → sgn(x2)·x1
        let f = ScalarField::new(Expr::var(1), half_plane());
        let odd = f.compose_reflection(true).unwrap();
        assert_eq!(odd.eval_unchecked(&[0.3, -0.5]).unwrap(), -0.3);
        assert_eq!(odd.eval_unchecked(&[0.3, 0.5]).unwrap(), 0.3);
    }

    #[test]
    fn reflection_mirror_symmetry_random_offsets() {
        // evaluate at (x′,t) vs (x′,−t) up to the flip sign
        let f = ScalarField::new(
            parse_expression("sin(x1) + x2^2*x1 - 0.5*x2", 2).unwrap(),
            half_plane(),
        );
        for flip in [false, true] {
            let ext = f.compose_reflection(flip).unwrap();
            for i in 0..50 {
                let x1 = -0.5 + 0.02 * i as f64;
                let t = 0.01 + 0.015 * i as f64 / 2.0;
                let up = ext.eval_unchecked(&[x1, t]).unwrap();
                let down = ext.eval_unchecked(&[x1, -t]).unwrap();
                let sign = if flip { -1.0 } else { 1.0 };
                assert!((up - sign * down).abs() < 1e-14);
                // restriction to the upper half agrees with f exactly
                assert!((up - f.eval_unchecked(&[x1, t]).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn finite_difference_examples() {
        let f = ScalarField::new(parse_expression("x1^2", 2).unwrap(), half_plane());
        let d = f.finite_diff_partial(1, &[0.5, 0.1], 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-7);

        let f = ScalarField::new(parse_expression("sin(x1)", 2).unwrap(), half_plane());
        let d = f.finite_diff_partial(1, &[0.0, 0.1], 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-8);

        // one-sided slope of |x2| from above is +1
        let f = ScalarField::new(Expr::Abs(2), ChartDomain::ball(2, 1.0));
        let d = f.one_sided_diff(2, &[0.0, 0.0], 1e-5, true).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        // stencil leaving the half-plane is reported with its side
        let f = ScalarField::new(Expr::var(2), half_plane());
        assert!(matches!(
            f.finite_diff_partial(2, &[0.0, 0.0], 1e-4),
            Err(Error::StencilOutsideDomain {
                side: "backward",
                ..
            })
        ));
    }

    #[test]
    fn partial_vs_finite_difference_on_reflected_field() {
        // ∂₂(sgn(x2)·g(x1,|x2|)) = ∂₂g(x1,|x2|) off the interface
        let g = ScalarField::new(
            parse_expression("x1*x2^2 + sin(x2)*x1^2", 2).unwrap(),
            half_plane(),
        );
        let ext = g.compose_reflection(true).unwrap();
        let d2 = ext.partial(2);
        for i in 0..20 {
            let x1 = -0.4 + 0.04 * i as f64;
            let t = if i % 2 == 0 { 0.11 + 0.01 * i as f64 } else { -(0.11 + 0.01 * i as f64) };
            let p = [x1, t];
            let exact = d2.eval_unchecked(&p).unwrap();
            let fd = ext.finite_diff_partial(2, &p, 1e-5).unwrap();
            let denom = exact.abs().max(1.0);
            assert!(
                ((exact - fd) / denom).abs() <= 1e-6,
                "mismatch at {p:?}: {exact} vs {fd}"
            );
        }
    }

    #[test]
    fn metric_inverse_and_minors() {
        let domain = ChartDomain::ball(2, 1.0);
        let g = MetricField::from_upper_triangle(
            2,
            domain,
            &[
                vec![
                    parse_expression("1 + x1^2", 2).unwrap(),
                    parse_expression("x2", 2).unwrap(),
                ],
                vec![Expr::one()],
            ],
        )
        .unwrap();
        let p = [0.3, 0.2];
        let m = g.eval_matrix(&p).unwrap();
        let inv = g.eval_inverse(&p).unwrap();
        let prod = &m * &inv;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-12);
            }
        }
        assert!(g.is_spd_at(&p).unwrap());
    }

    #[test]
    fn metric_symmetry_enforced() {
        let domain = ChartDomain::ball(2, 1.0);
        let m = vec![
            vec![Expr::one(), Expr::var(1)],
            vec![Expr::var(2), Expr::one()],
        ];
        assert!(MetricField::from_matrix(2, domain, &m).is_err());
    }

    #[test]
    fn boundary_tag_check() {
        let domain = half_plane();
        let idx2 = MultiIndex::new(vec![2], 2).unwrap();
        // ω = x2·dx2 satisfies n(ω)=0 on the boundary
        let ok = FormField::from_coeffs(
            2,
            1,
            domain.clone(),
            &[(idx2.clone(), Expr::var(2))],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        ok.check_boundary_tag(9, 1e-10).unwrap();

        // ω = dx2 violates it
        let bad = FormField::from_coeffs(
            2,
            1,
            domain,
            &[(idx2, Expr::one())],
            BoundaryTag::NormalPartZero,
        )
        .unwrap();
        assert!(matches!(
            bad.check_boundary_tag(9, 1e-10),
            Err(Error::NormalPartNonzero { .. })
        ));
    }
}
