//! Zero sets of Beltrami fields and harmonic boundary forms.
//!
//! A small catalogue of closed-form witnesses, a grid-scan + shrinking-box
//! zero extractor, and a box-counting dimension estimator that stands in
//! for Hausdorff dimension on the finite unions of curves and points the
//! catalogue produces.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::calculus::{codifferential, exterior_derivative, fiber_norm_sq, hodge_star};
use crate::domain::ChartDomain;
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::field::{BoundaryTag, FormField, MetricField, ScalarField};
use crate::index::MultiIndex;
use crate::order::fit_slope;
use crate::par;

/// Lowered 1-form X♭ with (X♭)_i = Σ_j g_ij X^j.
pub fn musical_flat(x: &[ScalarField], g: &MetricField) -> Result<FormField> {
    let n = g.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            op: "musical_flat",
            expect: n,
            got: x.len(),
        });
    }
    let coeffs: Vec<(MultiIndex, Expr)> = (1..=n)
        .map(|i| {
            let mut acc = Expr::zero();
            for j in 1..=n {
                acc = Expr::add(acc, Expr::mul(g.entry(i, j).clone(), x[j - 1].expr.clone()));
            }
            Ok((MultiIndex::new(vec![i], n)?, acc))
        })
        .collect::<Result<_>>()?;
    FormField::from_coeffs(n, 1, g.domain().clone(), &coeffs, BoundaryTag::None)
}

/// Raised vector field (ω♯)^i = Σ_j g^ij ω_j.
pub fn musical_sharp(omega: &FormField, g: &MetricField) -> Result<Vec<ScalarField>> {
    let n = g.n();
    if omega.degree() != 1 {
        return Err(Error::DegreeOutOfRange {
            n,
            k: omega.degree() as isize,
        });
    }
    Ok((1..=n)
        .map(|i| {
            let mut acc = Expr::zero();
            for (idx, c) in omega.indices().iter().zip(omega.coeffs()) {
                let j = idx.entries()[0];
                acc = Expr::add(acc, Expr::mul(g.inverse_entry(i, j).clone(), c.expr.clone()));
            }
            ScalarField::new(acc, g.domain().clone())
        })
        .collect())
}

/// Lowering, curl, and divergence of a vector field assembled from the
/// exterior-calculus operators: curl X = (⋆dX♭)♯ and div X = −δX♭.
#[derive(Debug, Clone)]
pub struct VectorCalc {
    pub flat: FormField,
    pub curl: Vec<ScalarField>,
    pub div: ScalarField,
}

pub fn musical_and_curl(x: &[ScalarField], g: &MetricField) -> Result<VectorCalc> {
    let n = g.n();
    if n != 3 {
        return Err(Error::DimensionMismatch {
            op: "curl",
            expect: 3,
            got: n,
        });
    }
    let flat = musical_flat(x, g)?;
    let curl = musical_sharp(&hodge_star(&exterior_derivative(&flat)?, g)?, g)?;
    let minus_div = codifferential(&flat, g)?;
    let div = ScalarField::new(
        Expr::neg(minus_div.coeff_at(0).expr.clone()),
        g.domain().clone(),
    );
    Ok(VectorCalc { flat, curl, div })
}

/// A named closed-form witness with its expected zero-set behavior.
#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    pub name: String,
    pub description: String,
    pub metric: MetricField,
    /// The 1-form under study (X♭ for vector-field entries).
    pub gamma: FormField,
    /// Present for Beltrami entries, with the eigenvalue λ.
    pub vector_field: Option<Vec<ScalarField>>,
    pub lambda: Option<f64>,
    pub zero_free: bool,
    pub expected_dimension: Option<f64>,
}

impl CatalogueEntry {
    /// Max residual over the standard grid: |curl X − λX|, |div X| for
    /// Beltrami entries; |dγ|, |δγ| for harmonic ones. Boundary-tagged
    /// forms additionally pass their trace check.
    pub fn verify(&self, per_axis: usize) -> Result<f64> {
        let grid = self.metric.domain().interior_grid(per_axis);
        let mut worst = 0.0f64;
        if let (Some(x), Some(lambda)) = (&self.vector_field, self.lambda) {
            let calc = musical_and_curl(x, &self.metric)?;
            for p in &grid {
                let mut r2 = 0.0;
                for i in 0..3 {
                    let d = calc.curl[i].eval_unchecked(p)? - lambda * x[i].eval_unchecked(p)?;
                    r2 += d * d;
                }
                worst = worst.max(r2.sqrt()).max(calc.div.eval_unchecked(p)?.abs());
            }
        } else {
            let d = exterior_derivative(&self.gamma)?;
            let delta = codifferential(&self.gamma, &self.metric)?;
            for p in &grid {
                let dn = fiber_norm_sq(&d, &self.metric, p)?.max(0.0).sqrt();
                let deln = fiber_norm_sq(&delta, &self.metric, p)?.max(0.0).sqrt();
                worst = worst.max(dn).max(deln);
            }
        }
        if self.gamma.tag != BoundaryTag::None {
            self.gamma.check_boundary_tag(per_axis, 1e-10)?;
        }
        Ok(worst)
    }
}

fn scalars(domain: &ChartDomain, exprs: &[&str]) -> Result<Vec<ScalarField>> {
    exprs
        .iter()
        .map(|s| Ok(ScalarField::new(parse_expression(s, domain.n)?, domain.clone())))
        .collect()
}

fn one_form(domain: &ChartDomain, coeffs: &[&str], tag: BoundaryTag) -> Result<FormField> {
    let n = domain.n;
    let sparse: Vec<(MultiIndex, Expr)> = coeffs
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((MultiIndex::new(vec![i + 1], n)?, parse_expression(s, n)?)))
        .collect::<Result<_>>()?;
    FormField::from_coeffs(n, 1, domain.clone(), &sparse, tag)
}

/// The bundled witnesses. Every entry re-verifies its residuals (tolerance
/// 1e−9 on a 21-per-axis grid) before being handed out.
pub fn catalogue() -> Result<Vec<CatalogueEntry>> {
    let tau = std::f64::consts::TAU;
    let mut entries = Vec::new();

    // (a) ABC-type eigenfield, A = B = 1, C = 0, on the flat 3-torus:
    // X = (sin x3, sin x1 + cos x3, cos x1), curl X = X, div X = 0.
    // Zeros: the two circles {(π/2, y, π)} and {(3π/2, y, 0)}.
    {
        let d = ChartDomain::torus(3, vec![tau, tau, tau]);
        let x = scalars(&d, &["sin(x3)", "sin(x1) + cos(x3)", "cos(x1)"])?;
        let g = MetricField::euclidean(3, d.clone());
        let gamma = musical_flat(&x, &g)?;
        entries.push(CatalogueEntry {
            name: "abc-torus".into(),
            description: "curl eigenfield (sin x3, sin x1 + cos x3, cos x1) on the flat 3-torus; \
                          zero set is two circles"
                .into(),
            metric: g,
            gamma,
            vector_field: Some(x),
            lambda: Some(1.0),
            zero_free: false,
            expected_dimension: Some(1.0),
        });
    }

    // (b) slab eigenfield (sin x3, cos x3, 0) on 0 ≤ x3 ≤ π: curl X = X,
    // tangent to both faces, |X| ≡ 1 so zero-free. Doubles as the
    // reflection C¹-failure witness: ∂₃ of the first coefficient is 1 at
    // the interface, so the even extension sin|x3| has a corner.
    {
        let d = ChartDomain::face_box(vec![0.0, 0.0, 0.0], vec![tau, tau, std::f64::consts::PI]);
        let x = scalars(&d, &["sin(x3)", "cos(x3)", "0"])?;
        let g = MetricField::euclidean(3, d.clone());
        let gamma = one_form(&d, &["sin(x3)", "cos(x3)", "0"], BoundaryTag::NormalPartZero)?;
        entries.push(CatalogueEntry {
            name: "slab".into(),
            description: "zero-free curl eigenfield (sin x3, cos x3, 0) on a slab, tangent to \
                          both faces"
                .into(),
            metric: g,
            gamma,
            vector_field: Some(x),
            lambda: Some(1.0),
            zero_free: true,
            expected_dimension: None,
        });
    }

    // (c) γ = dh, h = x1² − x2², on the half-disk: harmonic with vanishing
    // normal part on the straight edge; single boundary zero at the origin.
    {
        let d = ChartDomain::half_ball(2, 1.0);
        let gamma = one_form(&d, &["2 * x1", "-2 * x2"], BoundaryTag::NormalPartZero)?;
        entries.push(CatalogueEntry {
            name: "half-disk".into(),
            description: "harmonic 1-form d(x1^2 - x2^2) on the half-disk; one boundary zero at \
                          the origin"
                .into(),
            metric: MetricField::euclidean(2, d),
            gamma,
            vector_field: None,
            lambda: None,
            zero_free: false,
            expected_dimension: Some(0.0),
        });
    }

    // (d) angular form (−x2 dx1 + x1 dx2)/(x1² + x2²) on an annulus:
    // harmonic and zero-free (|γ| = 1/|x|).
    {
        let d = ChartDomain::shell(2, 0.5, 1.5);
        let gamma = one_form(
            &d,
            &["-x2 / (x1^2 + x2^2)", "x1 / (x1^2 + x2^2)"],
            BoundaryTag::None,
        )?;
        entries.push(CatalogueEntry {
            name: "annulus".into(),
            description: "zero-free harmonic angular form on the annulus 0.5 <= |x| <= 1.5".into(),
            metric: MetricField::euclidean(2, d),
            gamma,
            vector_field: None,
            lambda: None,
            zero_free: true,
            expected_dimension: None,
        });
    }

    // (e) cubic γ = d(x1³ − 3x1x2²) on the half-disk: the jet-recovery
    // demonstration input with a boundary zero of order exactly 2.
    {
        let d = ChartDomain::half_ball(2, 1.0);
        let gamma = one_form(
            &d,
            &["3 * x1^2 - 3 * x2^2", "-6 * x1 * x2"],
            BoundaryTag::NormalPartZero,
        )?;
        entries.push(CatalogueEntry {
            name: "cubic".into(),
            description: "harmonic cubic d(x1^3 - 3 x1 x2^2) on the half-disk; boundary zero of \
                          order 2 at the origin"
                .into(),
            metric: MetricField::euclidean(2, d),
            gamma,
            vector_field: None,
            lambda: None,
            zero_free: false,
            expected_dimension: Some(0.0),
        });
    }

    for e in &entries {
        let worst = e.verify(21)?;
        if worst > 1e-9 {
            return Err(Error::Invalid(format!(
                "catalogue entry {} fails its residual check: {worst:.3e}",
                e.name
            )));
        }
    }
    Ok(entries)
}

pub fn catalogue_entry(name: &str) -> Result<CatalogueEntry> {
    catalogue()?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Invalid(format!("no catalogue entry named {name}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointLabel {
    Interior,
    Boundary,
}

/// Refined zero set: every stored point re-evaluates below the tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZeroCloud {
    pub points: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub labels: Vec<PointLabel>,
    pub tolerance: f64,
    pub grid_per_axis: usize,
}

impl ZeroCloud {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, Vec::len);
        let mut out: String = (1..=n)
            .map(|i| format!("x{i},"))
            .chain(["norm,label\n".to_string()])
            .collect();
        for ((p, norm), label) in self.points.iter().zip(&self.norms).zip(&self.labels) {
            for x in p {
                out.push_str(&format!("{x},"));
            }
            let l = match label {
                PointLabel::Interior => "interior",
                PointLabel::Boundary => "boundary",
            };
            out.push_str(&format!("{norm},{l}\n"));
        }
        out
    }

    /// Idempotence check: each stored point still evaluates below tolerance.
    pub fn reverify(&self, omega: &FormField, g: &MetricField) -> Result<bool> {
        for p in &self.points {
            if fiber_norm_sq(omega, g, p)?.max(0.0).sqrt() > self.tolerance {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn grid_spacing(domain: &ChartDomain, per_axis: usize) -> f64 {
    let span = match &domain.shape {
        crate::domain::Shape::TorusBox { lengths } => {
            lengths.iter().cloned().fold(0.0, f64::max)
        }
        crate::domain::Shape::FaceBox { lo, hi } => lo
            .iter()
            .zip(hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max),
        _ => 2.0 * domain.r,
    };
    span / (per_axis.max(2) - 1) as f64
}

/// Extract the zero set of ω: coarse fiber-norm scan over the grid, then a
/// shrinking-box descent around each candidate, keeping points whose norm
/// drops below `tol`. Points on the interface are labeled boundary.
pub fn zero_cloud(
    omega: &FormField,
    g: &MetricField,
    per_axis: usize,
    tol: f64,
) -> Result<ZeroCloud> {
    let domain = omega.domain();
    let n = domain.n;
    let mut grid = domain.interior_grid(per_axis);
    grid.extend(domain.boundary_grid(per_axis));
    let h = grid_spacing(domain, per_axis);

    let norms = par::map_collect(&grid, |p| fiber_norm_sq(omega, g, p));
    let norms: Vec<f64> = norms.into_iter().collect::<Result<_>>()?;
    // a zero with O(1) gradient pulls the norm below ~2h within one cell
    let slack = 2.0 * h;
    let candidates: Vec<Vec<f64>> = grid
        .into_iter()
        .zip(&norms)
        .filter(|(_, v)| v.max(0.0).sqrt() < slack)
        .map(|(p, _)| p)
        .collect();

    let refined = par::map_collect(&candidates, |c| refine_zero(omega, g, c, h));
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in refined {
        if let Some((p, v)) = r? {
            if v <= tol {
                found.push((p, v));
            }
        }
    }
    // merge duplicates: keep the best point per h/2-cluster
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut kept_norms = Vec::new();
    for (p, v) in found {
        let dup = points.iter().any(|q| {
            p.iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                < h / 2.0
        });
        if !dup {
            points.push(p);
            kept_norms.push(v);
        }
    }
    let labels = points
        .iter()
        .map(|p| {
            if domain.has_interface() && p[n - 1].abs() < 1e-7 {
                PointLabel::Boundary
            } else {
                PointLabel::Interior
            }
        })
        .collect();
    Ok(ZeroCloud {
        points,
        norms: kept_norms,
        labels,
        tolerance: tol,
        grid_per_axis: per_axis,
    })
}

/// Shrinking-box descent on the fiber norm from `center` with initial
/// half-width `h`. Returns the best point and its norm.
fn refine_zero(
    omega: &FormField,
    g: &MetricField,
    center: &[f64],
    h: f64,
) -> Result<Option<(Vec<f64>, f64)>> {
    let domain = omega.domain();
    let n = domain.n;
    let mut center = center.to_vec();
    let mut best = fiber_norm_sq(omega, g, &center)?.max(0.0).sqrt();
    let mut w = h;
    while w > 1e-12 {
        let mut improved_center = center.clone();
        // 3ⁿ box corners and faces, skipping points outside the domain
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = (0..n)
                .map(|a| center[a] + (idx[a] as f64 - 1.0) * w)
                .collect();
            if domain.contains(&p) || on_closure(domain, &p) {
                let v = fiber_norm_sq(omega, g, &p)?.max(0.0).sqrt();
                if v < best {
                    best = v;
                    improved_center = p;
                }
            }
            let mut a = 0;
            loop {
                if a == n {
                    break;
                }
                idx[a] += 1;
                if idx[a] < 3 {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == n {
                break;
            }
        }
        center = improved_center;
        w *= 0.6;
    }
    Ok(Some((center, best)))
}

/// Closure membership for refinement: half domains include their interface.
fn on_closure(domain: &ChartDomain, p: &[f64]) -> bool {
    let mut q = p.to_vec();
    if domain.has_interface() && q[domain.n - 1].abs() < 1e-15 {
        q[domain.n - 1] = 0.0;
    }
    domain.contains(&q)
}

/// Box-counting report: counts of occupied ε-boxes per scale and the
/// fitted dimension (slope of log N against log 1/ε).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxCountReport {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub dimension: f64,
    pub band: f64,
}

impl BoxCountReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,count\n");
        for (s, c) in self.scales.iter().zip(&self.counts) {
            out.push_str(&format!("{s},{c}\n"));
        }
        out
    }
}

pub fn box_dimension(cloud: &ZeroCloud, scales: &[f64]) -> Result<BoxCountReport> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let span = scales.iter().cloned().fold(f64::MIN, f64::max)
        / scales.iter().cloned().fold(f64::MAX, f64::min);
    if scales.len() < 4 || span < 10f64.powf(1.5) - 1e-9 {
        return Err(Error::BadScaleGrid {
            need: 4,
            decades: 1.5,
            got: scales.len(),
        });
    }
    let mut counts = Vec::with_capacity(scales.len());
    for &eps in scales {
        let mut boxes: HashSet<Vec<i64>> = HashSet::new();
        for p in &cloud.points {
            boxes.insert(p.iter().map(|x| (x / eps).floor() as i64).collect());
        }
        counts.push(boxes.len());
    }
    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (*c as f64).ln()).collect();
    let (dimension, band) = fit_slope(&xs, &ys);
    Ok(BoxCountReport {
        scales: scales.to_vec(),
        counts,
        dimension,
        band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curl_and_div_match_classical_formulas() {
        // oracle: componentwise curl and divergence in Cartesian coordinates
        let d = ChartDomain::ball(3, 2.0);
        let g = MetricField::euclidean(3, d.clone());
        let x = scalars(
            &d,
            &["x2 * x3", "sin(x1) + x3^2", "x1 * x2 * x3"],
        )
        .unwrap();
        let calc = musical_and_curl(&x, &g).unwrap();
        let pts: [[f64; 3]; 3] = [[0.3, -0.5, 0.7], [0.1, 0.2, -0.4], [1.0, 0.5, 0.25]];
        for p in pts {
            let (x1, x2, x3) = (p[0], p[1], p[2]);
            // curl = (∂2 X3 − ∂3 X2, ∂3 X1 − ∂1 X3, ∂1 X2 − ∂2 X1)
            let expect = [
                x1 * x3 - 2.0 * x3,
                x2 - x2 * x3,
                x1.cos() - x3,
            ];
            for i in 0..3 {
                let got = calc.curl[i].eval_unchecked(&p).unwrap();
                assert!((got - expect[i]).abs() < 1e-12, "curl[{i}]: {got} vs {}", expect[i]);
            }
            // div = ∂1 X1 + ∂2 X2 + ∂3 X3
            let div = calc.div.eval_unchecked(&p).unwrap();
            assert!((div - x1 * x2).abs() < 1e-12);
        }

        // constant field: curl = 0, div = 0
        let x = scalars(&d, &["1", "0", "0"]).unwrap();
        let calc = musical_and_curl(&x, &g).unwrap();
        for i in 0..3 {
            assert!(calc.curl[i].expr.is_const_zero());
        }
        assert!(calc.div.eval_unchecked(&[0.1, 0.2, 0.3]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn curl_requires_three_dimensions() {
        let d = ChartDomain::ball(2, 1.0);
        let g = MetricField::euclidean(2, d.clone());
        let x = scalars(&d, &["x2", "x1"]).unwrap();
        assert!(matches!(
            musical_and_curl(&x, &g),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn catalogue_loads_and_verifies() {
        let entries = catalogue().unwrap();
        let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(
            names,
            ["abc-torus", "slab", "half-disk", "annulus", "cubic"]
        );
    }

    #[test]
    fn abc_zero_circles() {
        let e = catalogue_entry("abc-torus").unwrap();
        let pi = std::f64::consts::PI;
        // hand-solved zeros: sin x3 = 0, cos x1 = 0, sin x1 + cos x3 = 0
        for y in [0.0, 1.0, 4.0] {
            let p = [pi / 2.0, y, pi];
            assert!(fiber_norm_sq(&e.gamma, &e.metric, &p).unwrap().sqrt() < 1e-9);
            let p = [3.0 * pi / 2.0, y, 0.0];
            assert!(fiber_norm_sq(&e.gamma, &e.metric, &p).unwrap().sqrt() < 1e-9);
        }
    }

    #[test]
    fn slab_is_zero_free_with_unit_norm() {
        let e = catalogue_entry("slab").unwrap();
        for p in e.metric.domain().interior_grid(7) {
            let v = fiber_norm_sq(&e.gamma, &e.metric, &p).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        let cloud = zero_cloud(&e.gamma, &e.metric, 9, 1e-7).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn half_disk_zero_is_one_boundary_point() {
        let e = catalogue_entry("half-disk").unwrap();
        let cloud = zero_cloud(&e.gamma, &e.metric, 21, 1e-7).unwrap();
        assert_eq!(cloud.points.len(), 1, "{:?}", cloud.points);
        let p = &cloud.points[0];
        assert!(p.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-6);
        assert_eq!(cloud.labels[0], PointLabel::Boundary);
        assert!(cloud.reverify(&e.gamma, &e.metric).unwrap());
    }

    #[test]
    fn annulus_is_zero_free() {
        let e = catalogue_entry("annulus").unwrap();
        let cloud = zero_cloud(&e.gamma, &e.metric, 15, 1e-7).unwrap();
        assert!(cloud.is_empty());
    }

    fn synthetic_cloud(points: Vec<Vec<f64>>) -> ZeroCloud {
        let n = points.len();
        ZeroCloud {
            points,
            norms: vec![0.0; n],
            labels: vec![PointLabel::Interior; n],
            tolerance: 1e-7,
            grid_per_axis: 0,
        }
    }

    #[test]
    fn dimension_calibration() {
        let scales = [0.2, 0.1, 0.05, 0.02, 0.01, 0.005];
        // 1000 points on a segment → d̂ ≈ 1
        let seg = synthetic_cloud(
            (0..1000)
                .map(|i| vec![i as f64 / 999.0, 0.0])
                .collect(),
        );
        let rep = box_dimension(&seg, &scales).unwrap();
        assert!((rep.dimension - 1.0).abs() < 0.1, "{}", rep.dimension);

        // single point → d̂ = 0
        let pt = synthetic_cloud(vec![vec![0.3, 0.4]]);
        let rep = box_dimension(&pt, &scales).unwrap();
        assert!(rep.dimension.abs() < 0.05);

        // filled square sample → d̂ ≈ 2
        let mut pts = Vec::new();
        for i in 0..300 {
            for j in 0..300 {
                pts.push(vec![i as f64 / 299.0, j as f64 / 299.0]);
            }
        }
        let sq = synthetic_cloud(pts);
        let rep = box_dimension(&sq, &scales).unwrap();
        assert!((rep.dimension - 2.0).abs() < 0.15, "{}", rep.dimension);
    }

    #[test]
    fn dimension_input_validation() {
        let pt = synthetic_cloud(vec![vec![0.0, 0.0]]);
        // too few scales
        assert!(matches!(
            box_dimension(&pt, &[0.1, 0.05, 0.02]),
            Err(Error::BadScaleGrid { .. })
        ));
        // insufficient span
        assert!(matches!(
            box_dimension(&pt, &[0.1, 0.08, 0.06, 0.04]),
            Err(Error::BadScaleGrid { .. })
        ));
        // empty cloud
        let empty = synthetic_cloud(vec![]);
        assert!(matches!(
            box_dimension(&empty, &[0.2, 0.1, 0.05, 0.005]),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn csv_outputs() {
        let pt = synthetic_cloud(vec![vec![0.25, 0.5]]);
        assert!(pt.to_csv().starts_with("x1,x2,norm,label\n"));
        let rep = box_dimension(&pt, &[0.2, 0.1, 0.05, 0.005]).unwrap();
        assert!(rep.to_csv().starts_with("scale,count\n"));
        assert_eq!(rep.counts, vec![1, 1, 1, 1]);
    }
}
