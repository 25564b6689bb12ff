//! Metric exterior calculus in a chart: d, ⋆, δ, fiber norms, boundary
//! decomposition and residual scans.
//!
//! Sign conventions: the Hodge star uses (⋆ω)_J = √(det g) · ε_{I,J} · ω^I
//! with I the increasing complement of J, and the codifferential is fixed as
//! δ = (−1)^{n(k+1)+1} ⋆d⋆ (Riemannian). All verifiers compare norms, never
//! signed coefficients, so they are insensitive to the convention.

use crate::domain::ChartDomain;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::{BoundaryTag, FormField, MetricField, ScalarField};
use crate::index::{enumerate_multi_indices, MultiIndex};
use crate::par;
use crate::report::{HarmonicityReport, IdentityReport, ResidualReport};

/// Exterior derivative: (dω)_K = Σ_a (−1)^a ∂_{K_a} ω_{K∖K_a}.
pub fn exterior_derivative(omega: &FormField) -> Result<FormField> {
    let n = omega.n();
    let k = omega.degree();
    if k == n {
        return Ok(FormField::zero_above_top(n, omega.domain().clone()));
    }
    let out_indices = enumerate_multi_indices(n, k + 1)?;
    let domain = omega.domain().clone();
    let coeffs: Vec<ScalarField> = out_indices
        .iter()
        .map(|big| {
            let mut acc = Expr::zero();
            for (a, &dir) in big.entries().iter().enumerate() {
                let small = big.with_removed(a);
                let term = omega.coeff(&small).expr.partial(dir);
                acc = if a % 2 == 0 {
                    Expr::add(acc, term)
                } else {
                    Expr::sub(acc, term)
                };
            }
            ScalarField::new(acc, domain.clone())
        })
        .collect();
    Ok(FormField::with_parts(
        n,
        k + 1,
        domain,
        out_indices,
        coeffs,
        BoundaryTag::None,
    ))
}

/// Index-raised coefficient ω^I = Σ_L det(g^{i_a l_b}) ω_L over increasing L.
fn raised_coeff(omega: &FormField, g: &MetricField, upper: &MultiIndex) -> Expr {
    let k = omega.degree();
    if k == 0 {
        return omega.coeffs()[0].expr.clone();
    }
    let mut acc = Expr::zero();
    for (low, coeff) in omega.indices().iter().zip(omega.coeffs()) {
        if coeff.expr.is_const_zero() {
            continue;
        }
        // det of the k×k block (g^{I_a L_b})_{a,b}
        let block: Vec<Vec<Expr>> = upper
            .entries()
            .iter()
            .map(|&i| {
                low.entries()
                    .iter()
                    .map(|&l| g.inverse_entry(i, l).clone())
                    .collect()
            })
            .collect();
        acc = Expr::add(acc, Expr::mul(det_of(&block), coeff.expr.clone()));
    }
    acc
}

pub(crate) fn det_of(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => Expr::sub(
            Expr::mul(m[0][0].clone(), m[1][1].clone()),
            Expr::mul(m[0][1].clone(), m[1][0].clone()),
        ),
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
                let term = Expr::mul(m[0][j].clone(), det_of(&minor));
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

/// Hodge star: (⋆ω)_J = √(det g) · ε_{I,J} · ω^I with I = complement(J).
pub fn hodge_star(omega: &FormField, g: &MetricField) -> Result<FormField> {
    let n = omega.n();
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            op: "hodge_star",
            expect: n,
            got: g.n(),
        });
    }
    let k = omega.degree();
    let out_indices = enumerate_multi_indices(n, n - k)?;
    let domain = omega.domain().clone();
    let sqrt_det = g.sqrt_det();
    let coeffs: Vec<ScalarField> = out_indices
        .iter()
        .map(|big_j| {
            let (i, _) = big_j.complement_with_sign();
            // need ε_{I,J}, the sign of (I ‖ J)
            let (_, eps) = i.complement_with_sign();
            let raised = raised_coeff(omega, g, &i);
            let mut e = Expr::mul(sqrt_det.clone(), raised);
            if eps < 0 {
                e = Expr::neg(e);
            }
            ScalarField::new(e, domain.clone())
        })
        .collect();
    Ok(FormField::with_parts(
        n,
        n - k,
        domain,
        out_indices,
        coeffs,
        BoundaryTag::None,
    ))
}

/// Codifferential δ = (−1)^{n(k+1)+1} ⋆d⋆ on k-forms; zero on 0-forms.
pub fn codifferential(omega: &FormField, g: &MetricField) -> Result<FormField> {
    let n = omega.n();
    let k = omega.degree();
    if k == 0 {
        return FormField::zero(n, 0, omega.domain().clone());
    }
    let starred = hodge_star(omega, g)?;
    let d_starred = exterior_derivative(&starred)?;
    let back = hodge_star(&d_starred, g)?;
    let sign = if (n * (k + 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(back.map_coeffs(|_, c| {
        ScalarField::new(Expr::mul(Expr::constant(sign), c.expr.clone()), c.domain.clone())
    }))
}

/// Squared fiber norm |ω|²_g at a point: Σ_{I,J} ω_I ω_J det(g^{I_a J_b}).
pub fn fiber_norm_sq(omega: &FormField, g: &MetricField, p: &[f64]) -> Result<f64> {
    let det = g.det().eval(p)?;
    if det <= 0.0 {
        return Err(Error::MetricDegenerate {
            point: p.to_vec(),
            det,
        });
    }
    if omega.degree() == 0 {
        let v = omega.coeffs()[0].eval_unchecked(p)?;
        return Ok(v * v);
    }
    let ginv = g.eval_inverse(p)?;
    let vals = omega.eval_coeffs(p)?;
    let k = omega.degree();
    let idxs = omega.indices();
    let mut acc = 0.0;
    for (a, ia) in idxs.iter().enumerate() {
        if vals[a] == 0.0 {
            continue;
        }
        for (b, ib) in idxs.iter().enumerate() {
            if vals[b] == 0.0 {
                continue;
            }
            let mut block = nalgebra::DMatrix::zeros(k, k);
            for (r, &i) in ia.entries().iter().enumerate() {
                for (c, &j) in ib.entries().iter().enumerate() {
                    block[(r, c)] = ginv[(i - 1, j - 1)];
                }
            }
            acc += vals[a] * vals[b] * block.determinant();
        }
    }
    Ok(acc)
}

/// Normal part in an adapted chart: keep exactly the coefficients whose
/// multi-index contains n, zero the rest.
pub fn normal_part(omega: &FormField) -> FormField {
    omega.map_coeffs(|idx, c| {
        if idx.contains_n() {
            c.clone()
        } else {
            ScalarField::zero(c.domain.clone())
        }
    })
}

/// Tangential part in an adapted chart: keep the coefficients free of n.
pub fn tangential_part(omega: &FormField) -> FormField {
    omega.map_coeffs(|idx, c| {
        if idx.contains_n() {
            ScalarField::zero(c.domain.clone())
        } else {
            c.clone()
        }
    })
}

/// Boundary coefficient table: values of each coefficient at the given
/// boundary points (x_n substituted by 0 is implicit in the points).
pub fn boundary_table(omega: &FormField, points: &[Vec<f64>]) -> Result<Vec<(String, Vec<f64>)>> {
    omega
        .indices()
        .iter()
        .zip(omega.coeffs())
        .map(|(idx, c)| {
            let vals: Result<Vec<f64>> = points.iter().map(|p| c.eval_unchecked(p)).collect();
            Ok((idx.label(), vals?))
        })
        .collect()
}

/// Pullback ι#ω to the (n−1)-dimensional boundary: keep coefficients with
/// n ∉ I, substitute x_n = 0, reinterpret in dimension n−1.
pub fn tangential_restrict(omega: &FormField) -> Result<FormField> {
    let n = omega.n();
    let k = omega.degree();
    if !omega.domain().has_interface() {
        return Err(Error::NoInterface);
    }
    let m = n - 1;
    if k > m {
        // a top-degree form pulls back to zero on the boundary
        return Ok(FormField::zero_above_top(m, lower_domain(omega.domain())));
    }
    let out_indices = enumerate_multi_indices(m, k)?;
    let domain = lower_domain(omega.domain());
    let coeffs: Vec<ScalarField> = out_indices
        .iter()
        .map(|idx| {
            let src = MultiIndex::new(idx.entries().to_vec(), n).expect("entries < n");
            let e = omega.coeff(&src).expr.restrict_to_interface(n);
            ScalarField::new(e, domain.clone())
        })
        .collect();
    Ok(FormField::with_parts(
        m,
        k,
        domain,
        out_indices,
        coeffs,
        BoundaryTag::None,
    ))
}

fn lower_domain(d: &ChartDomain) -> ChartDomain {
    use crate::domain::Shape;
    match &d.shape {
        Shape::HalfBall => ChartDomain::ball(d.n - 1, d.r),
        Shape::FaceBox { lo, hi } => {
            if d.n == 2 {
                ChartDomain::ball(1, hi[0] - lo[0])
            } else {
                ChartDomain::face_box(lo[..d.n - 1].to_vec(), hi[..d.n - 1].to_vec())
            }
        }
        _ => ChartDomain::ball(d.n.saturating_sub(1).max(1), d.r),
    }
}

/// ⋆t(ω) = n(⋆ω) as boundary tables, in an adapted chart.
pub fn verify_star_boundary_duality(
    omega: &FormField,
    g: &MetricField,
    per_axis: usize,
    tol: f64,
) -> Result<IdentityReport> {
    let grid = omega.domain().boundary_grid(per_axis);
    if grid.is_empty() {
        return Err(Error::NoInterface);
    }
    let lhs = hodge_star(&tangential_part(omega), g)?;
    let rhs = normal_part(&hodge_star(omega, g)?);
    let mut worst = 0.0;
    let mut worst_point = grid[0].clone();
    for p in &grid {
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            let e = (a.eval_unchecked(p)? - b.eval_unchecked(p)?).abs();
            if e > worst {
                worst = e;
                worst_point = p.clone();
            }
        }
    }
    Ok(IdentityReport::new(
        "star-tangential-equals-normal-of-star",
        worst_point,
        worst,
        tol,
    ))
}

/// Max over samples of |δω|²_g + |dω|²_g − C·|ω|²_g, with the attaining
/// point. Satisfied iff the max is at most `tol`.
pub fn structural_inequality_residual(
    omega: &FormField,
    g: &MetricField,
    constant: f64,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<ResidualReport> {
    let d = exterior_derivative(omega)?;
    let delta = codifferential(omega, g)?;
    let residuals = par::map_collect(samples, |p| -> Result<f64> {
        Ok(fiber_norm_sq(&delta, g, p)? + fiber_norm_sq(&d, g, p)?
            - constant * fiber_norm_sq(omega, g, p)?)
    });
    let residuals: Vec<f64> = residuals.into_iter().collect::<Result<_>>()?;
    let worst = par::argmax(&residuals).ok_or_else(|| Error::Invalid("empty sample set".into()))?;
    Ok(ResidualReport {
        constant,
        max_residual: residuals[worst],
        worst_point: samples[worst].clone(),
        tolerance: tol,
        satisfied: residuals[worst] <= tol,
    })
}

/// Smallest C for which the structural inequality holds on the sample set:
/// max of (|δω|² + |dω|²) / |ω|² over samples where |ω|² exceeds `floor`.
pub fn fit_structural_constant(
    omega: &FormField,
    g: &MetricField,
    samples: &[Vec<f64>],
    floor: f64,
) -> Result<f64> {
    let d = exterior_derivative(omega)?;
    let delta = codifferential(omega, g)?;
    let ratios = par::map_collect(samples, |p| -> Result<f64> {
        let denom = fiber_norm_sq(omega, g, p)?;
        if denom <= floor {
            return Ok(f64::NEG_INFINITY);
        }
        Ok((fiber_norm_sq(&delta, g, p)? + fiber_norm_sq(&d, g, p)?) / denom)
    });
    let ratios: Vec<f64> = ratios.into_iter().collect::<Result<_>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Residual pair (max |dγ|_g, max |δγ|_g) over the sample set.
pub fn harmonicity_residual(
    gamma: &FormField,
    g: &MetricField,
    samples: &[Vec<f64>],
) -> Result<HarmonicityReport> {
    let d = exterior_derivative(gamma)?;
    let delta = codifferential(gamma, g)?;
    let norms = par::map_collect(samples, |p| -> Result<(f64, f64)> {
        Ok((
            fiber_norm_sq(&d, g, p)?.max(0.0).sqrt(),
            fiber_norm_sq(&delta, g, p)?.max(0.0).sqrt(),
        ))
    });
    let norms: Vec<(f64, f64)> = norms.into_iter().collect::<Result<_>>()?;
    let dvals: Vec<f64> = norms.iter().map(|x| x.0).collect();
    let dels: Vec<f64> = norms.iter().map(|x| x.1).collect();
    let wd = par::argmax(&dvals).ok_or_else(|| Error::Invalid("empty sample set".into()))?;
    let wdel = par::argmax(&dels).ok_or_else(|| Error::Invalid("empty sample set".into()))?;
    Ok(HarmonicityReport {
        max_d_norm: dvals[wd],
        worst_d_point: samples[wd].clone(),
        max_delta_norm: dels[wdel],
        worst_delta_point: samples[wdel].clone(),
    })
}
