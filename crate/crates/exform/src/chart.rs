//! Boundary-adapted charts.
//!
//! Given a boundary patch σ and an ambient metric, the adapted chart is
//! Φ(y′, t) = σ(ρ(y′)) + t·ν(ρ(y′)), where ρ is the affine reparametrization
//! that makes the tangent frame g-orthonormal at the base point and ν is the
//! inward unit normal. Straight normal lines (rather than geodesic flow) are
//! enough: the chart only needs its three defining properties — identity
//! metric at the base point, base point at the origin, and g_jn = δ_jn along
//! the boundary — and the last two hold exactly at t = 0 for any normal
//! flowout.

use nalgebra::{DMatrix, DVector};

use crate::calculus::det_of;
use crate::domain::ChartDomain;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{FormField, MetricField, ScalarField};
use crate::index::enumerate_multi_indices;
use crate::quad;
use crate::report::IdentityReport;

/// Local parametrization of a boundary piece: n component fields over an
/// (n−1)-dimensional parameter domain, plus the parameter of the base point.
#[derive(Debug, Clone)]
pub struct BoundaryPatch {
    pub sigma: Vec<ScalarField>,
    pub base: Vec<f64>,
}

impl BoundaryPatch {
    pub fn new(sigma: Vec<ScalarField>, base: Vec<f64>) -> Result<Self> {
        let n = sigma.len();
        if n < 2 {
            return Err(Error::Invalid(
                "boundary patch needs ambient dimension at least 2".into(),
            ));
        }
        for c in &sigma {
            if c.domain.n != n - 1 {
                return Err(Error::DimensionMismatch {
                    op: "boundary patch parameter domain",
                    expect: n - 1,
                    got: c.domain.n,
                });
            }
        }
        if base.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                op: "boundary patch base parameter",
                expect: n - 1,
                got: base.len(),
            });
        }
        Ok(Self { sigma, base })
    }

    /// Flat patch: the coordinate plane {xⁿ = 0} with σ(y′) = (y′, 0).
    pub fn flat(n: usize, r: f64) -> Self {
        let d = ChartDomain::ball(n - 1, r);
        let mut sigma: Vec<ScalarField> = (1..n)
            .map(|i| ScalarField::new(Expr::var(i), d.clone()))
            .collect();
        sigma.push(ScalarField::zero(d));
        Self {
            sigma,
            base: vec![0.0; n - 1],
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn point(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.sigma.iter().map(|c| c.eval_unchecked(q)).collect()
    }

    /// n × (n−1) Jacobian ∂σ^i/∂q_j at q, from symbolic partials.
    pub fn jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.ambient_dim();
        let mut j = DMatrix::zeros(n, n - 1);
        for (i, c) in self.sigma.iter().enumerate() {
            for a in 1..n {
                j[(i, a - 1)] = c.partial(a).eval_unchecked(q)?;
            }
        }
        Ok(j)
    }

    /// Immersion check: smallest singular value of the tangent Jacobian
    /// stays above `tol` at every sampled parameter.
    pub fn check_immersion(&self, samples: &[Vec<f64>], tol: f64) -> Result<()> {
        for q in samples {
            let j = self.jacobian(q)?;
            let svals = j.svd(false, false).singular_values;
            if svals.iter().any(|s| *s < tol) {
                return Err(Error::RankDeficientTangent { parameter: q.clone() });
            }
        }
        Ok(())
    }
}

/// Inward unit normal at σ(q): the g-unit vector g-orthogonal to the
/// tangent space, oriented toward positive last ambient coordinate
/// (falling back to the first nonzero component when that vanishes).
pub fn inward_unit_normal(g: &MetricField, patch: &BoundaryPatch, q: &[f64]) -> Result<Vec<f64>> {
    let n = patch.ambient_dim();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            op: "inward_unit_normal",
            expect: n,
            got: g.n(),
        });
    }
    let p = patch.point(q)?;
    let tangents = patch.jacobian(q)?;
    if tangents
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .any(|s| *s < 1e-10)
    {
        return Err(Error::RankDeficientTangent { parameter: q.to_vec() });
    }
    let gm = g.eval_matrix(&p)?;
    // rows: (T_j)ᵀ G; the normal spans the one-dimensional null space,
    // given exactly by the signed maximal minors (generalized cross product)
    let system = tangents.transpose() * &gm;
    let mut raw = DVector::zeros(n);
    for i in 0..n {
        let minor = system.clone().remove_column(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        raw[i] = sign * minor.determinant();
    }
    if raw.amax() < 1e-12 {
        return Err(Error::RankDeficientTangent { parameter: q.to_vec() });
    }
    let nu = &raw / raw.amax();
    let norm2 = (nu.transpose() * &gm * &nu)[(0, 0)];
    if norm2 <= 0.0 {
        return Err(Error::MetricDegenerate {
            point: p,
            det: norm2,
        });
    }
    let mut nu: Vec<f64> = (nu / norm2.sqrt()).iter().copied().collect();
    let pivot = if nu[n - 1].abs() > 1e-12 {
        n - 1
    } else {
        (0..n).find(|i| nu[*i].abs() > 1e-12).unwrap_or(n - 1)
    };
    if nu[pivot] < 0.0 {
        for x in &mut nu {
            *x = -*x;
        }
    }
    Ok(nu)
}

/// The chart Φ(y′, t) = σ(ρ(y′)) + t·ν(ρ(y′)) with ρ(y′) = q₀ + B·y′.
#[derive(Debug, Clone)]
pub struct AdaptedChart {
    pub metric: MetricField,
    pub patch: BoundaryPatch,
    /// Reparametrization matrix making the t = 0 tangent frame g-orthonormal.
    basis: DMatrix<f64>,
    pub base_point: Vec<f64>,
    pub radius: f64,
}

impl AdaptedChart {
    fn param_of(&self, y_prime: &[f64]) -> Vec<f64> {
        let m = self.patch.ambient_dim() - 1;
        (0..m)
            .map(|a| {
                self.patch.base[a]
                    + (0..m).map(|b| self.basis[(a, b)] * y_prime[b]).sum::<f64>()
            })
            .collect()
    }

    fn normal_at(&self, q: &[f64]) -> Result<Vec<f64>> {
        inward_unit_normal(&self.metric, &self.patch, q)
    }

    /// Forward map. y = (y′, t) with t the normal coordinate.
    pub fn map(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.patch.ambient_dim();
        let q = self.param_of(&y[..n - 1]);
        let s = self.patch.point(&q)?;
        let nu = self.normal_at(&q)?;
        Ok((0..n).map(|i| s[i] + y[n - 1] * nu[i]).collect())
    }

    /// Jacobian of Φ at y. The tangential σ-derivatives are symbolic; the
    /// t·∂ν term uses central differences, so at t = 0 the Jacobian is exact.
    pub fn jacobian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.patch.ambient_dim();
        let t = y[n - 1];
        let q = self.param_of(&y[..n - 1]);
        let sig_jac = self.patch.jacobian(&q)?;
        let mut j = DMatrix::zeros(n, n);
        for col in 0..n - 1 {
            for i in 0..n {
                let mut entry = (0..n - 1)
                    .map(|a| sig_jac[(i, a)] * self.basis[(a, col)])
                    .sum::<f64>();
                if t != 0.0 {
                    let h = 1e-6;
                    let mut yp = y.to_vec();
                    yp[col] += h;
                    let mut ym = y.to_vec();
                    ym[col] -= h;
                    let np = self.normal_at(&self.param_of(&yp[..n - 1]))?;
                    let nm = self.normal_at(&self.param_of(&ym[..n - 1]))?;
                    entry += t * (np[i] - nm[i]) / (2.0 * h);
                }
                j[(i, col)] = entry;
            }
        }
        let nu = self.normal_at(&q)?;
        for i in 0..n {
            j[(i, n - 1)] = nu[i];
        }
        Ok(j)
    }

    /// Pulled-back metric (Φ*g)(y) = J(y)ᵀ g(Φ(y)) J(y), tabulated numerically.
    pub fn pulled_metric_at(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let p = self.map(y)?;
        let j = self.jacobian(y)?;
        let gm = self.metric.eval_matrix(&p)?;
        Ok(j.transpose() * gm * j)
    }

    /// Verify the three defining properties: identity metric at the origin,
    /// base point at the origin, and g_jn = δ_jn on a boundary sample grid.
    pub fn verify_properties(&self, per_axis: usize, tol: f64) -> Result<Vec<IdentityReport>> {
        let n = self.patch.ambient_dim();
        let origin = vec![0.0; n];

        let g0 = self.pulled_metric_at(&origin)?;
        let mut e1 = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { 1.0 } else { 0.0 };
                e1 = e1.max((g0[(i, j)] - d).abs());
            }
        }

        let phi0 = self.map(&origin)?;
        let e2 = phi0
            .iter()
            .zip(&self.base_point)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);

        let mut e3 = 0.0f64;
        let mut worst = origin.clone();
        let half_width = self.radius / ((n - 1) as f64).sqrt();
        for pt in boundary_param_grid(n - 1, half_width, per_axis) {
            let mut y = pt.clone();
            y.push(0.0);
            let gm = self.pulled_metric_at(&y)?;
            for j in 0..n {
                let d = if j == n - 1 { 1.0 } else { 0.0 };
                let dev = (gm[(j, n - 1)] - d).abs();
                if dev > e3 {
                    e3 = dev;
                    worst = y.clone();
                }
            }
        }

        Ok(vec![
            IdentityReport::new("g(p) = identity", origin.clone(), e1, tol),
            IdentityReport::new("chart maps origin to base point", origin, e2, tol),
            IdentityReport::new("g_jn = delta_jn on boundary", worst, e3, tol),
        ])
    }
}

fn boundary_param_grid(dim: usize, half_width: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let steps: Vec<f64> = (0..per_axis)
        .map(|i| {
            if per_axis == 1 {
                0.0
            } else {
                -half_width + 2.0 * half_width * i as f64 / (per_axis - 1) as f64
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        out.push(idx.iter().map(|&i| steps[i]).collect());
        let mut a = 0;
        loop {
            if a == dim {
                return out;
            }
            idx[a] += 1;
            if idx[a] < per_axis {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Build the adapted chart at the patch's base parameter: orthonormalize
/// the tangent frame at p against g (Cholesky of TᵀGT, normal direction
/// fixed last) and check sampled injectivity up to the requested radius.
pub fn build_adapted_chart(
    g: &MetricField,
    patch: &BoundaryPatch,
    r: f64,
) -> Result<AdaptedChart> {
    let n = patch.ambient_dim();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            op: "build_adapted_chart",
            expect: n,
            got: g.n(),
        });
    }
    let q0 = patch.base.clone();
    let p = patch.point(&q0)?;
    if !g.is_spd_at(&p)? {
        return Err(Error::MetricDegenerate {
            point: p,
            det: g.det().eval(&patch.point(&q0)?)?,
        });
    }
    let tangents = patch.jacobian(&q0)?;
    let gm = g.eval_matrix(&p)?;
    let gram = tangents.transpose() * &gm * &tangents;
    let chol = gram
        .cholesky()
        .ok_or(Error::RankDeficientTangent { parameter: q0.clone() })?;
    // B = L^{-T}: columns of T·B are G-orthonormal
    let basis = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or(Error::RankDeficientTangent { parameter: q0.clone() })?;
    let chart = AdaptedChart {
        metric: g.clone(),
        patch: patch.clone(),
        basis,
        base_point: p,
        radius: r,
    };
    // sampled injectivity: bisect down from the requested radius
    if injective_on(&chart, r)? {
        return Ok(chart);
    }
    let mut lo = 0.0f64;
    let mut hi = r;
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        if injective_on(&chart, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::RadiusTooLarge {
        requested: r,
        suggested: lo,
    })
}

fn injective_on(chart: &AdaptedChart, r: f64) -> Result<bool> {
    let n = chart.patch.ambient_dim();
    let samples: Vec<Vec<f64>> = quad::unit_ball_points(n, 96, 2718, 0, true)
        .into_iter()
        .map(|u| u.iter().map(|x| r * x).collect())
        .collect();
    let mut images = Vec::with_capacity(samples.len());
    let mut det_sign = 0.0f64;
    for y in &samples {
        let j = chart.jacobian(y)?;
        let det = j.determinant();
        if det.abs() < 1e-10 {
            return Ok(false);
        }
        // a sign change means the map folds somewhere inside the ball
        if det_sign == 0.0 {
            det_sign = det.signum();
        } else if det.signum() != det_sign {
            return Ok(false);
        }
        images.push(chart.map(y)?);
    }
    for a in 0..samples.len() {
        for b in a + 1..samples.len() {
            let dy: f64 = samples[a]
                .iter()
                .zip(&samples[b])
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt();
            if dy < r / 4.0 {
                continue;
            }
            let dx: f64 = images[a]
                .iter()
                .zip(&images[b])
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt();
            if dx < 1e-6 * dy {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Simultaneous substitution x_i := subs[i−1] in e. Interface nodes (abs,
/// sgn) do not compose symbolically and are rejected.
pub fn compose(e: &Expr, subs: &[Expr]) -> Result<Expr> {
    Ok(match e {
        Expr::Const(c) => Expr::constant(*c),
        Expr::Var(i) => subs
            .get(i - 1)
            .cloned()
            .ok_or(Error::IndexOutOfRange {
                index: *i,
                n: subs.len(),
            })?,
        Expr::Add(a, b) => Expr::add(compose(a, subs)?, compose(b, subs)?),
        Expr::Sub(a, b) => Expr::sub(compose(a, subs)?, compose(b, subs)?),
        Expr::Mul(a, b) => Expr::mul(compose(a, subs)?, compose(b, subs)?),
        Expr::Div(a, b) => Expr::div(compose(a, subs)?, compose(b, subs)?),
        Expr::Pow(a, m) => Expr::pow(compose(a, subs)?, *m),
        Expr::Neg(a) => Expr::neg(compose(a, subs)?),
        Expr::Sin(a) => Expr::sin(compose(a, subs)?),
        Expr::Cos(a) => Expr::cos(compose(a, subs)?),
        Expr::Exp(a) => Expr::exp(compose(a, subs)?),
        Expr::Sqrt(a) => Expr::sqrt(compose(a, subs)?),
        Expr::Abs(_) | Expr::Sgn(_) => {
            return Err(Error::Invalid(
                "cannot compose through abs/sgn interface nodes".into(),
            ))
        }
    })
}

/// Symbolic Jacobian ∂φ^i/∂y_j of a chart given by expressions.
fn symbolic_jacobian(phi: &[Expr], m: usize) -> Vec<Vec<Expr>> {
    phi.iter()
        .map(|c| (1..=m).map(|j| c.partial(j)).collect())
        .collect()
}

/// Pullback of a metric through a symbolic chart φ: (φ*g)_ab =
/// Σ_ij g_ij∘φ · ∂_aφ^i · ∂_bφ^j.
pub fn pullback_metric(phi: &[Expr], domain: ChartDomain, g: &MetricField) -> Result<MetricField> {
    let n = g.n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            op: "pullback_metric",
            expect: n,
            got: phi.len(),
        });
    }
    let m = domain.n;
    let jac = symbolic_jacobian(phi, m);
    let mut rows = vec![vec![Expr::zero(); m]; m];
    for a in 0..m {
        for b in a..m {
            let mut s = Expr::zero();
            for i in 0..n {
                for j in 0..n {
                    let gij = compose(g.entry(i + 1, j + 1), phi)?;
                    s = Expr::add(
                        s,
                        Expr::mul(gij, Expr::mul(jac[i][a].clone(), jac[j][b].clone())),
                    );
                }
            }
            rows[a][b] = s.clone();
            rows[b][a] = s;
        }
    }
    MetricField::from_matrix(m, domain, &rows)
}

/// Pullback of a k-form through a symbolic chart: (φ#ω)_A =
/// Σ_I ω_I∘φ · det(∂φ^{I}/∂y^{A}).
pub fn pullback_form(phi: &[Expr], domain: ChartDomain, omega: &FormField) -> Result<FormField> {
    let n = omega.n();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            op: "pullback_form",
            expect: n,
            got: phi.len(),
        });
    }
    let m = domain.n;
    let k = omega.degree();
    if k > m {
        return Ok(FormField::zero_above_top(m, domain));
    }
    let jac = symbolic_jacobian(phi, m);
    let mut coeffs = Vec::new();
    for a_idx in enumerate_multi_indices(m, k)? {
        let mut s = Expr::zero();
        for (i_idx, c) in omega.indices().iter().zip(omega.coeffs()) {
            let minor: Vec<Vec<Expr>> = i_idx
                .entries()
                .iter()
                .map(|&i| {
                    a_idx
                        .entries()
                        .iter()
                        .map(|&a| jac[i - 1][a - 1].clone())
                        .collect()
                })
                .collect();
            let det = det_of(&minor);
            if det.is_const_zero() {
                continue;
            }
            s = Expr::add(s, Expr::mul(compose(&c.expr, phi)?, det));
        }
        coeffs.push((a_idx, s));
    }
    FormField::from_coeffs(m, k, domain, &coeffs, crate::field::BoundaryTag::None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::exterior_derivative;
    use crate::field::BoundaryTag;
    use crate::index::MultiIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euclid(n: usize) -> MetricField {
        MetricField::euclidean(n, ChartDomain::ball(n, 10.0))
    }

    #[test]
    fn normal_on_flat_boundary() {
        let patch = BoundaryPatch::flat(2, 1.0);
        let nu = inward_unit_normal(&euclid(2), &patch, &[0.0]).unwrap();
        assert!((nu[0]).abs() < 1e-12 && (nu[1] - 1.0).abs() < 1e-12);

        // g = diag(1,4): unit normal scales to (0, 1/2)
        let d = ChartDomain::ball(2, 10.0);
        let g = MetricField::from_upper_triangle(
            2,
            d,
            &[
                vec![Expr::one(), Expr::zero()],
                vec![Expr::constant(4.0)],
            ],
        )
        .unwrap();
        let nu = inward_unit_normal(&g, &patch, &[0.3]).unwrap();
        assert!((nu[0]).abs() < 1e-12 && (nu[1] - 0.5).abs() < 1e-12);
    }

    fn random_spd(n: usize, seed: u64) -> MetricField {
        let d = ChartDomain::ball(n, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for i in 0..n {
            let mut row = Vec::new();
            for j in i..n {
                let base = if i == j { Expr::one() } else { Expr::zero() };
                let bump = Expr::mul(
                    Expr::constant(rng.gen_range(-0.05..0.05)),
                    Expr::var(1 + (i + j) % n),
                );
                row.push(Expr::add(base, bump));
            }
            rows.push(row);
        }
        MetricField::from_upper_triangle(n, d, &rows).unwrap()
    }

    #[test]
    fn normal_defining_equations_random_metrics() {
        for seed in 0..5u64 {
            let n = 3;
            let g = random_spd(n, seed);
            let patch = BoundaryPatch::flat(n, 1.0);
            let q = [0.2, -0.1];
            let nu = inward_unit_normal(&g, &patch, &q).unwrap();
            let p = patch.point(&q).unwrap();
            let gm = g.eval_matrix(&p).unwrap();
            let t = patch.jacobian(&q).unwrap();
            let nu_v = DVector::from_vec(nu.clone());
            let orth = t.transpose() * &gm * &nu_v;
            assert!(orth.iter().all(|x| x.abs() < 1e-10));
            let norm = (nu_v.transpose() * &gm * &nu_v)[(0, 0)];
            assert!((norm - 1.0).abs() < 1e-10);
            assert!(nu[n - 1] > 0.0);
        }
    }

    #[test]
    fn flat_euclidean_chart_is_identity() {
        let chart = build_adapted_chart(&euclid(3), &BoundaryPatch::flat(3, 1.0), 0.5).unwrap();
        for y in [
            vec![0.0, 0.0, 0.0],
            vec![0.2, -0.1, 0.3],
            vec![-0.3, 0.25, 0.05],
        ] {
            let p = chart.map(&y).unwrap();
            for (a, b) in p.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let reports = chart.verify_properties(5, 1e-10).unwrap();
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn bumped_metric_flat_boundary_properties() {
        // δ plus an off-diagonal bump vanishing at the base point
        let d = ChartDomain::ball(2, 10.0);
        let g = MetricField::from_upper_triangle(
            2,
            d,
            &[
                vec![Expr::one(), Expr::mul(Expr::constant(0.1), Expr::var(1))],
                vec![Expr::one()],
            ],
        )
        .unwrap();
        let chart = build_adapted_chart(&g, &BoundaryPatch::flat(2, 1.0), 0.4).unwrap();
        let reports = chart.verify_properties(21, 1e-8).unwrap();
        for r in &reports {
            assert!(r.pass, "{}: {}", r.identity, r.worst_error);
        }
    }

    #[test]
    fn curved_boundary_euclidean_chart() {
        // boundary x2 = 0.1·x1²
        let pd = ChartDomain::ball(1, 1.0);
        let patch = BoundaryPatch::new(
            vec![
                ScalarField::new(Expr::var(1), pd.clone()),
                ScalarField::new(
                    Expr::mul(Expr::constant(0.1), Expr::pow(Expr::var(1), 2)),
                    pd,
                ),
            ],
            vec![0.0],
        )
        .unwrap();
        let chart = build_adapted_chart(&euclid(2), &patch, 0.4).unwrap();
        let reports = chart.verify_properties(21, 1e-8).unwrap();
        for r in &reports {
            assert!(r.pass, "{}: {}", r.identity, r.worst_error);
        }
    }

    #[test]
    fn focusing_normals_shrink_radius() {
        // unit circle: inward normals all cross at the center, so a chart of
        // radius beyond 1 cannot be injective
        let pd = ChartDomain::ball(1, 3.0);
        let patch = BoundaryPatch::new(
            vec![
                ScalarField::new(Expr::neg(Expr::sin(Expr::var(1))), pd.clone()),
                ScalarField::new(Expr::neg(Expr::cos(Expr::var(1))), pd),
            ],
            vec![0.0],
        )
        .unwrap();
        match build_adapted_chart(&euclid(2), &patch, 1.5) {
            Err(Error::RadiusTooLarge { suggested, .. }) => {
                assert!(suggested > 0.0 && suggested < 1.5);
            }
            other => panic!("expected RadiusTooLarge, got {other:?}"),
        }
        // a comfortably small radius is accepted
        build_adapted_chart(&euclid(2), &patch, 0.3).unwrap();
    }

    #[test]
    fn rank_deficient_patch_is_rejected() {
        let pd = ChartDomain::ball(1, 1.0);
        let patch = BoundaryPatch::new(
            vec![
                ScalarField::constant(1.0, pd.clone()),
                ScalarField::constant(2.0, pd),
            ],
            vec![0.0],
        )
        .unwrap();
        assert!(matches!(
            inward_unit_normal(&euclid(2), &patch, &[0.0]),
            Err(Error::RankDeficientTangent { .. })
        ));
    }

    fn identity_chart(n: usize) -> Vec<Expr> {
        (1..=n).map(Expr::var).collect()
    }

    #[test]
    fn pullback_metric_identity_and_linear() {
        let g = random_spd(2, 3);
        let d = ChartDomain::ball(2, 10.0);
        let pulled = pullback_metric(&identity_chart(2), d.clone(), &g).unwrap();
        for p in [[0.3, -0.2], [0.0, 0.5]] {
            let a = g.eval_matrix(&p).unwrap();
            let b = pulled.eval_matrix(&p).unwrap();
            assert!((a - b).abs().max() < 1e-12);
        }

        // linear chart A: pulled metric = Aᵀ g A at matching points
        let a = [[1.0, 2.0], [0.0, 1.0]];
        let phi: Vec<Expr> = (0..2)
            .map(|i| {
                Expr::add(
                    Expr::mul(Expr::constant(a[i][0]), Expr::var(1)),
                    Expr::mul(Expr::constant(a[i][1]), Expr::var(2)),
                )
            })
            .collect();
        let pulled = pullback_metric(&phi, d, &g).unwrap();
        let y = [0.2, 0.1];
        let x = [a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]];
        let gm = g.eval_matrix(&x).unwrap();
        let am = DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]);
        let expect = am.transpose() * gm * am;
        let got = pulled.eval_matrix(&y).unwrap();
        assert!((expect - got).abs().max() < 1e-12);
    }

    #[test]
    fn pullback_metric_stays_spd() {
        let g = random_spd(3, 9);
        let phi = vec![
            Expr::add(Expr::var(1), Expr::mul(Expr::constant(0.1), Expr::sin(Expr::var(2)))),
            Expr::var(2),
            Expr::add(Expr::var(3), Expr::mul(Expr::constant(0.1), Expr::var(1))),
        ];
        let pulled = pullback_metric(&phi, ChartDomain::ball(3, 1.0), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            assert!(pulled.is_spd_at(&p).unwrap());
        }
    }

    #[test]
    fn pullback_form_rotation() {
        // rotation by θ on dx1 → cos θ·dy1 − sin θ·dy2
        let th = 0.7f64;
        let phi = vec![
            Expr::sub(
                Expr::mul(Expr::constant(th.cos()), Expr::var(1)),
                Expr::mul(Expr::constant(th.sin()), Expr::var(2)),
            ),
            Expr::add(
                Expr::mul(Expr::constant(th.sin()), Expr::var(1)),
                Expr::mul(Expr::constant(th.cos()), Expr::var(2)),
            ),
        ];
        let d = ChartDomain::ball(2, 1.0);
        let dx1 = FormField::from_coeffs(
            2,
            1,
            d.clone(),
            &[(MultiIndex::new(vec![1], 2).unwrap(), Expr::one())],
            BoundaryTag::None,
        )
        .unwrap();
        let pulled = pullback_form(&phi, d, &dx1).unwrap();
        let v = pulled.eval_coeffs(&[0.1, 0.2]).unwrap();
        assert!((v[0] - th.cos()).abs() < 1e-12);
        assert!((v[1] + th.sin()).abs() < 1e-12);
    }

    #[test]
    fn pullback_commutes_with_d() {
        let phi = vec![
            Expr::add(Expr::var(1), Expr::mul(Expr::constant(0.2), Expr::pow(Expr::var(2), 2))),
            Expr::mul(Expr::var(2), Expr::add(Expr::one(), Expr::mul(Expr::constant(0.1), Expr::var(1)))),
        ];
        let d = ChartDomain::ball(2, 1.0);
        let omega = FormField::from_coeffs(
            2,
            1,
            d.clone(),
            &[
                (
                    MultiIndex::new(vec![1], 2).unwrap(),
                    Expr::mul(Expr::var(1), Expr::var(2)),
                ),
                (MultiIndex::new(vec![2], 2).unwrap(), Expr::sin(Expr::var(1))),
            ],
            BoundaryTag::None,
        )
        .unwrap();
        let lhs = exterior_derivative(&pullback_form(&phi, d.clone(), &omega).unwrap()).unwrap();
        let rhs = pullback_form(&phi, d, &exterior_derivative(&omega).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.6..0.6)).collect();
            let a = lhs.eval_coeffs(&p).unwrap();
            let b = rhs.eval_coeffs(&p).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y} at {p:?}");
            }
        }
    }

    #[test]
    fn pullback_functoriality_on_linear_charts() {
        // (ψ∘φ)* g = φ*(ψ* g) for linear charts, exactly
        let g = random_spd(2, 21);
        let a = [[1.0, 0.5], [-0.25, 1.0]];
        let b = [[0.8, 0.0], [0.3, 1.2]];
        let lin = |m: &[[f64; 2]; 2]| -> Vec<Expr> {
            (0..2)
                .map(|i| {
                    Expr::add(
                        Expr::mul(Expr::constant(m[i][0]), Expr::var(1)),
                        Expr::mul(Expr::constant(m[i][1]), Expr::var(2)),
                    )
                })
                .collect()
        };
        // composition a∘b
        let mut ab = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                ab[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let d = ChartDomain::ball(2, 10.0);
        let step = pullback_metric(&lin(&b), d.clone(), &pullback_metric(&lin(&a), d.clone(), &g).unwrap())
            .unwrap();
        let direct = pullback_metric(&lin(&ab), d, &g).unwrap();
        for p in [[0.1, 0.2], [-0.3, 0.05]] {
            let x = step.eval_matrix(&p).unwrap();
            let y = direct.eval_matrix(&p).unwrap();
            assert!((x - y).abs().max() < 1e-12);
        }
    }
}
