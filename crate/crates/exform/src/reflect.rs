//! Sign-flip reflection across the interface {xⁿ = 0}.
//!
//! A metric on the upper half-ball with g_jn = δ_jn on the interface
//! extends to the full ball by g̃_ij(x′, xⁿ) = ±g_ij(x′, |xⁿ|), flipping
//! the sign exactly when one of i, j equals n. A form with vanishing normal
//! part extends by flipping the n-containing coefficients. The verifiers in
//! this module check everything the construction promises: positive
//! definiteness, the determinant and inverse sign patterns, the mirrored
//! derivative identities for d and d⋆, norm and inequality transfer, and
//! the integral-doubling identity.

use serde::{Deserialize, Serialize};

use crate::calculus::{
    codifferential, exterior_derivative, fiber_norm_sq, hodge_star, structural_inequality_residual,
};
use crate::error::{Error, Result};
use crate::field::{BoundaryTag, FormField, MetricField};
use crate::quad::{self, QuadConfig};
use crate::report::IdentityReport;

/// Extension of an adapted half-ball metric to the full ball.
#[derive(Debug, Clone)]
pub struct ReflectedMetric {
    pub source: MetricField,
    pub extended: MetricField,
}

/// Extension of a normal-part-zero half-ball form to the full ball.
#[derive(Debug, Clone)]
pub struct ReflectedForm {
    pub source: FormField,
    pub extended: FormField,
}

/// Boundary sample density used for the adaptedness / trace preconditions.
const PRECONDITION_GRID: usize = 17;

/// Reflect a metric across the interface. Refuses metrics that are not
/// boundary-adapted: without g_jn = δ_jn on {xⁿ = 0} the extension would be
/// a discontinuous tensor.
pub fn reflect_metric(g: &MetricField) -> Result<ReflectedMetric> {
    let n = g.n();
    if !g.domain().has_interface() {
        return Err(Error::NoInterface);
    }
    let grid = g.domain().boundary_grid(PRECONDITION_GRID);
    if let Err((j, point, deviation)) = g.check_adapted_on(&grid, 1e-10)? {
        return Err(Error::NotAdapted {
            i: j,
            n,
            point,
            deviation,
        });
    }
    let mut rows = vec![vec![crate::expr::Expr::zero(); n]; n];
    for i in 1..=n {
        for j in i..=n {
            let flip = (i == n) ^ (j == n);
            let f = crate::field::ScalarField::new(g.entry(i, j).clone(), g.domain().clone())
                .compose_reflection(flip)?;
            rows[i - 1][j - 1] = f.expr.clone();
            rows[j - 1][i - 1] = f.expr;
        }
    }
    let extended = MetricField::from_matrix(n, g.domain().reflected_full(), &rows)?;
    Ok(ReflectedMetric {
        source: g.clone(),
        extended,
    })
}

/// Reflect a normal-part-zero form: n-containing coefficients extend oddly
/// (with a sign flip), the rest evenly. The trace condition n(ω) = 0 is
/// verified on the boundary grid first; without it the traces of the two
/// one-sided restrictions would not match.
pub fn reflect_form(omega: &FormField) -> Result<ReflectedForm> {
    if !omega.domain().has_interface() {
        return Err(Error::NoInterface);
    }
    if omega.tag != BoundaryTag::NormalPartZero {
        return Err(Error::MissingBoundaryTag {
            expected: "normal-part-zero",
        });
    }
    omega.check_boundary_tag(PRECONDITION_GRID, 1e-10)?;
    let full = omega.domain().reflected_full();
    let coeffs: Vec<_> = omega
        .indices()
        .iter()
        .zip(omega.coeffs())
        .map(|(idx, c)| {
            Ok((
                idx.clone(),
                c.compose_reflection(idx.contains_n())?.expr,
            ))
        })
        .collect::<Result<_>>()?;
    let extended = FormField::from_coeffs(omega.n(), omega.degree(), full, &coeffs, BoundaryTag::None)?;
    Ok(ReflectedForm {
        source: omega.clone(),
        extended,
    })
}

/// Convenience path for tangential-part-zero forms: t(ω) = 0 means
/// n(⋆ω) = 0, so star first, then reflect.
pub fn reflect_form_via_star(omega: &FormField, g: &MetricField) -> Result<ReflectedForm> {
    if omega.tag != BoundaryTag::TangentialPartZero {
        return Err(Error::MissingBoundaryTag {
            expected: "tangential-part-zero",
        });
    }
    let starred = hodge_star(omega, g)?.with_tag(BoundaryTag::NormalPartZero);
    starred.check_boundary_tag(PRECONDITION_GRID, 1e-10)?;
    reflect_form(&starred)
}

/// Quasi-random points in the open upper half-ball with xⁿ ≥ band, each
/// paired with its mirror image. Both pipelines then see identical |xⁿ|.
pub fn mirrored_pairs(n: usize, r: f64, count: usize, seed: u64, band: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::with_capacity(count);
    let mut rep = 0u64;
    while out.len() < count {
        for u in quad::unit_ball_points(n, count, seed, rep, true) {
            let p: Vec<f64> = u.iter().map(|x| 0.95 * r * x).collect();
            if p[n - 1] < band {
                continue;
            }
            let mut m = p.clone();
            m[n - 1] = -m[n - 1];
            out.push((p, m));
            if out.len() == count {
                break;
            }
        }
        rep += 1;
    }
    out
}

fn full_ball_samples(n: usize, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    quad::unit_ball_points(n, count, seed, 0, false)
        .into_iter()
        .map(|u| u.iter().map(|x| 0.95 * r * x).collect())
        .collect()
}

/// Sylvester check on the full ball: every leading principal minor of g̃ is
/// positive, the first n−1 minors match those of the source at (x′, |xⁿ|),
/// and det g̃(x′, xⁿ) = det g(x′, |xⁿ|).
pub fn verify_metric_positive_definite(
    rm: &ReflectedMetric,
    count: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let n = rm.source.n();
    let r = rm.extended.domain().r;
    let samples = full_ball_samples(n, r, count, seed);
    let mut min_minor = f64::INFINITY;
    let mut worst_minor_pt = vec![0.0; n];
    let mut minor_err = 0.0f64;
    let mut minor_err_pt = vec![0.0; n];
    let mut det_err = 0.0f64;
    let mut det_err_pt = vec![0.0; n];
    for p in &samples {
        let minors = rm.extended.leading_minors(p)?;
        let mut q = p.clone();
        q[n - 1] = q[n - 1].abs();
        let src_minors = rm.source.leading_minors(&q)?;
        for (k, m) in minors.iter().enumerate() {
            if *m < min_minor {
                min_minor = *m;
                worst_minor_pt = p.clone();
            }
            // the sign flips sit in one row and one column, so they cancel
            // in the first n−1 minors and in the full determinant
            let dev = (m - src_minors[k]).abs();
            if k < n - 1 && dev > minor_err {
                minor_err = dev;
                minor_err_pt = p.clone();
            }
            if k == n - 1 && dev > det_err {
                det_err = dev;
                det_err_pt = p.clone();
            }
        }
    }
    Ok(vec![
        IdentityReport::new(
            "leading minors of reflected metric positive",
            worst_minor_pt,
            if min_minor > 0.0 { 0.0 } else { -min_minor },
            0.0,
        ),
        IdentityReport::new(
            "leading minors match source at mirrored argument",
            minor_err_pt,
            minor_err,
            1e-12,
        ),
        IdentityReport::new("det g~(x', xn) = det g(x', |xn|)", det_err_pt, det_err, 1e-12),
    ])
}

/// Determinant identity plus the inverse sign pattern: g̃^ij(x′, xⁿ) equals
/// ±g^ij(x′, |xⁿ|) with the flip exactly when one index is n, comparing the
/// numerically inverted extension against the sign-patterned source inverse.
pub fn verify_det_and_inverse_identities(
    rm: &ReflectedMetric,
    count: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let n = rm.source.n();
    let r = rm.extended.domain().r;
    let samples = full_ball_samples(n, r, count, seed);
    let mut det_err = 0.0f64;
    let mut det_pt = vec![0.0; n];
    let mut inv_err = 0.0f64;
    let mut inv_pt = vec![0.0; n];
    for p in &samples {
        let mut q = p.clone();
        q[n - 1] = q[n - 1].abs();
        let da = rm.extended.det().eval(p)?;
        let db = rm.source.det().eval(&q)?;
        if (da - db).abs() > det_err {
            det_err = (da - db).abs();
            det_pt = p.clone();
        }
        let inv_ext = rm
            .extended
            .eval_matrix(p)?
            .try_inverse()
            .ok_or(Error::MetricDegenerate {
                point: p.clone(),
                det: da,
            })?;
        let inv_src = rm.source.eval_inverse(&q)?;
        let below = p[n - 1] < 0.0;
        for i in 0..n {
            for j in 0..n {
                // the flip carries sgn(xⁿ): above the interface g̃ = g
                let sign = if below && ((i == n - 1) ^ (j == n - 1)) {
                    -1.0
                } else {
                    1.0
                };
                let expect = sign * inv_src[(i, j)];
                let scale = expect.abs().max(1.0);
                let dev = (inv_ext[(i, j)] - expect).abs() / scale;
                if dev > inv_err {
                    inv_err = dev;
                    inv_pt = p.clone();
                }
            }
        }
    }
    Ok(vec![
        IdentityReport::new("det identity", det_pt, det_err, 1e-12),
        IdentityReport::new("inverse sign pattern", inv_pt, inv_err, 1e-10),
    ])
}

/// Mirrored derivative identities, checked off the interface band where the
/// extension is classically smooth:
/// (a) (dω̃)_I(x′, −t) = ±(dω)_I(x′, t), flip iff n ∈ I;
/// (b) (d⋆̃ω̃)_J(x′, −t) = ±(d⋆ω)_J(x′, t), flip iff n ∉ J (reversed).
/// The two sides run through fully independent pipelines: reflected objects
/// on one side, mirrored source evaluations on the other.
pub fn verify_derivative_identities(
    rf: &ReflectedForm,
    rm: &ReflectedMetric,
    pair_count: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let n = rf.source.n();
    let r = rf.extended.domain().r;
    let band = 1e-3 * r;
    let pairs = mirrored_pairs(n, r, pair_count, seed, band);

    let d_ext = exterior_derivative(&rf.extended)?;
    let d_src = exterior_derivative(&rf.source)?;
    let mut d_err = 0.0f64;
    let mut d_pt = vec![0.0; n];
    for (up, down) in &pairs {
        for (idx, c_ext) in d_ext.indices().iter().zip(d_ext.coeffs()) {
            let sign = if idx.contains_n() { -1.0 } else { 1.0 };
            let lhs = c_ext.eval_unchecked(down)?;
            let rhs = sign * d_src.coeff(idx).eval_unchecked(up)?;
            let dev = (lhs - rhs).abs();
            if dev > d_err {
                d_err = dev;
                d_pt = down.clone();
            }
        }
    }

    let dstar_ext = exterior_derivative(&hodge_star(&rf.extended, &rm.extended)?)?;
    let dstar_src = exterior_derivative(&hodge_star(&rf.source, &rm.source)?)?;
    let mut s_err = 0.0f64;
    let mut s_pt = vec![0.0; n];
    for (up, down) in &pairs {
        for (idx, c_ext) in dstar_ext.indices().iter().zip(dstar_ext.coeffs()) {
            let sign = if idx.contains_n() { 1.0 } else { -1.0 };
            let lhs = c_ext.eval_unchecked(down)?;
            let rhs = sign * dstar_src.coeff(idx).eval_unchecked(up)?;
            let dev = (lhs - rhs).abs();
            if dev > s_err {
                s_err = dev;
                s_pt = down.clone();
            }
        }
    }

    Ok(vec![
        IdentityReport::new("mirrored d identity", d_pt, d_err, 1e-8),
        IdentityReport::new("mirrored d-star identity (reversed signs)", s_pt, s_err, 1e-8),
    ])
}

/// Norm transfer |dω̃|²(x′, xⁿ) = |dω|²(x′, |xⁿ|), |δ̃ω̃|² = |δω|², and
/// equality of the structural-inequality residual at mirrored points.
pub fn verify_norm_and_inequality_transfer(
    rf: &ReflectedForm,
    rm: &ReflectedMetric,
    constant: f64,
    pair_count: usize,
    seed: u64,
) -> Result<Vec<IdentityReport>> {
    let n = rf.source.n();
    let r = rf.extended.domain().r;
    let band = 1e-3 * r;
    let pairs = mirrored_pairs(n, r, pair_count, seed, band);

    let d_ext = exterior_derivative(&rf.extended)?;
    let d_src = exterior_derivative(&rf.source)?;
    let del_ext = codifferential(&rf.extended, &rm.extended)?;
    let del_src = codifferential(&rf.source, &rm.source)?;

    let mut norm_err = 0.0f64;
    let mut norm_pt = vec![0.0; n];
    let mut res_err = 0.0f64;
    let mut res_pt = vec![0.0; n];
    for (up, down) in &pairs {
        let d_a = fiber_norm_sq(&d_ext, &rm.extended, down)?;
        let d_b = fiber_norm_sq(&d_src, &rm.source, up)?;
        let del_a = fiber_norm_sq(&del_ext, &rm.extended, down)?;
        let del_b = fiber_norm_sq(&del_src, &rm.source, up)?;
        let scale = d_b.abs().max(del_b.abs()).max(1.0);
        let dev = ((d_a - d_b).abs().max((del_a - del_b).abs())) / scale;
        if dev > norm_err {
            norm_err = dev;
            norm_pt = down.clone();
        }
        let w_a = fiber_norm_sq(&rf.extended, &rm.extended, down)?;
        let w_b = fiber_norm_sq(&rf.source, &rm.source, up)?;
        let r_a = del_a + d_a - constant * w_a;
        let r_b = del_b + d_b - constant * w_b;
        let dev = (r_a - r_b).abs() / scale;
        if dev > res_err {
            res_err = dev;
            res_pt = down.clone();
        }
    }
    Ok(vec![
        IdentityReport::new("norm transfer for d and delta", norm_pt, norm_err, 1e-8),
        IdentityReport::new("structural residual transfer", res_pt, res_err, 1e-8),
    ])
}

/// Residual of the structural inequality for the extended pair on the full
/// ball (used after a constant has been fitted on the half-ball).
pub fn extended_inequality_residual(
    rf: &ReflectedForm,
    rm: &ReflectedMetric,
    constant: f64,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<crate::report::ResidualReport> {
    let n = rf.source.n();
    let r = rf.extended.domain().r;
    let band = 1e-3 * r;
    let samples: Vec<Vec<f64>> = full_ball_samples(n, r, count, seed)
        .into_iter()
        .filter(|p| p[n - 1].abs() >= band)
        .collect();
    structural_inequality_residual(&rf.extended, &rm.extended, constant, &samples, tol)
}

/// Integral doubling per coefficient: ∫_{B_r} |ω̃_I| = 2·∫_{B_r ∩ ℍⁿ} |ω_I|.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingReport {
    pub coefficients: Vec<DoublingEntry>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingEntry {
    pub index: String,
    pub full_integral: f64,
    pub half_integral: f64,
    pub ratio: f64,
    pub sigma: f64,
}

pub fn verify_integral_doubling(rf: &ReflectedForm, cfg: &QuadConfig) -> Result<DoublingReport> {
    let n = rf.source.n();
    let r = rf.extended.domain().r;
    let origin = vec![0.0; n];
    let mut pass = true;
    let mut coefficients = Vec::new();
    for (idx, src) in rf.source.indices().iter().zip(rf.source.coeffs()) {
        let ext = rf.extended.coeff(idx);
        let full = quad::integral_over_ball(n, &origin, r, false, cfg, |x| {
            Ok(ext.eval_unchecked(x)?.abs())
        })?;
        let half = quad::integral_over_ball(n, &origin, r, true, cfg, |x| {
            Ok(src.eval_unchecked(x)?.abs())
        })?;
        if half.value.abs() < 1e-13 && full.value.abs() < 1e-13 {
            coefficients.push(DoublingEntry {
                index: idx.label(),
                full_integral: full.value,
                half_integral: half.value,
                ratio: 2.0,
                sigma: 0.0,
            });
            continue;
        }
        let ratio = full.value / half.value;
        let sigma = ratio
            * ((full.std_err / full.value).powi(2) + (half.std_err / half.value).powi(2)).sqrt();
        if (ratio - 2.0).abs() > (3.0 * sigma).max(2.0 * 1e-4) {
            pass = false;
        }
        coefficients.push(DoublingEntry {
            index: idx.label(),
            full_integral: full.value,
            half_integral: half.value,
            ratio,
            sigma,
        });
    }
    Ok(DoublingReport { coefficients, pass })
}

/// One-sided normal difference quotients of every extended coefficient at a
/// boundary point. A smooth source with nonvanishing ∂ₙ of an n-free
/// coefficient produces mismatched quotients here: the extension is
/// Lipschitz but genuinely not C¹.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinkReport {
    pub point: Vec<f64>,
    pub step: f64,
    pub coefficients: Vec<KinkEntry>,
    /// Largest |forward − backward| across coefficients.
    pub max_jump: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinkEntry {
    pub index: String,
    pub forward: f64,
    pub backward: f64,
}

pub fn interface_kink(rf: &ReflectedForm, point: &[f64], h: f64) -> Result<KinkReport> {
    let n = rf.source.n();
    let mut coefficients = Vec::new();
    let mut max_jump = 0.0f64;
    for (idx, c) in rf.extended.indices().iter().zip(rf.extended.coeffs()) {
        let forward = c.one_sided_diff(n, point, h, true)?;
        let backward = c.one_sided_diff(n, point, h, false)?;
        max_jump = max_jump.max((forward - backward).abs());
        coefficients.push(KinkEntry {
            index: idx.label(),
            forward,
            backward,
        });
    }
    Ok(KinkReport {
        point: point.to_vec(),
        step: h,
        coefficients,
        max_jump,
    })
}
