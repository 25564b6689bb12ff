//! Vanishing order in 1-mean.
//!
//! The order of a zero at p is probed through averaged integrals
//! A(r) = ⨍_{B_r(p) ∩ ℍⁿ} |f| dx over a shrinking radii grid: the fitted
//! slope of log A against log r estimates the largest m with A(r)/r^m
//! bounded. "Infinite order" is not machine-decidable; coefficients whose
//! averages sit below a floor are reported as numerically zero instead of
//! carrying an exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FormField, ScalarField};
use crate::quad::{self, Estimate, QuadConfig};

pub const ZERO_FLOOR: f64 = 1e-13;

/// Verdict for one coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrderVerdict {
    Exponent { m_hat: f64, band: f64 },
    NumericallyZero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientOrder {
    pub index: String,
    pub averages: Vec<f64>,
    pub verdict: OrderVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderReport {
    pub point: Vec<f64>,
    pub radii: Vec<f64>,
    pub half_ball: bool,
    pub coefficients: Vec<CoefficientOrder>,
    /// Minimum fitted exponent across coefficients, or numerically zero
    /// when every coefficient sits below the floor.
    pub overall: OrderVerdict,
}

impl OrderReport {
    /// Long-format CSV: coefficient, log r, log A.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("coefficient,log_r,log_a\n");
        for c in &self.coefficients {
            for (r, a) in self.radii.iter().zip(&c.averages) {
                if *a > 0.0 {
                    out.push_str(&format!("{},{},{}\n", c.index, r.ln(), a.ln()));
                }
            }
        }
        out
    }
}

/// Averaged integral ⨍ |f| over B_r(p), restricted to the upper half when
/// `half`. Lebesgue measure in chart coordinates.
pub fn averaged_halfball_integral(
    f: &ScalarField,
    p: &[f64],
    r: f64,
    half: bool,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    check_ball_inside(f, p, r, half)?;
    quad::average_over_ball(f.domain.n, p, r, half, cfg, |x| {
        Ok(f.eval_unchecked(x)?.abs())
    })
}

fn check_ball_inside(f: &ScalarField, p: &[f64], r: f64, half: bool) -> Result<()> {
    use crate::domain::Shape;
    let d = &f.domain;
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ok = match &d.shape {
        Shape::Ball => norm + r <= d.r,
        Shape::HalfBall => norm + r <= d.r && (half || p[d.n - 1] >= r),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutsideDomain { point: p.to_vec() })
    }
}

/// Least-squares slope of y against x with a residual-based standard error.
pub fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - (intercept + slope * a);
            e * e
        })
        .sum();
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let se = (ss_res / dof / sxx).sqrt();
    (slope, se)
}

/// Per-coefficient vanishing-order estimate at p over the radii grid.
/// Chooses half-ball averaging automatically when p lies on the interface
/// of a half domain.
pub fn estimate_order_1mean(
    omega: &FormField,
    p: &[f64],
    radii: &[f64],
    cfg: &QuadConfig,
) -> Result<OrderReport> {
    if radii.len() < 4 {
        return Err(Error::BadScaleGrid {
            need: 4,
            decades: 0.0,
            got: radii.len(),
        });
    }
    for w in radii.windows(2) {
        if w[0] <= w[1] {
            return Err(Error::Invalid("radii must be strictly decreasing".into()));
        }
    }
    let n = omega.n();
    let half = omega.domain().has_interface() && p[n - 1] == 0.0;
    let mut coefficients = Vec::new();
    for (idx, c) in omega.indices().iter().zip(omega.coeffs()) {
        let averages: Vec<f64> = radii
            .iter()
            .map(|&r| Ok(averaged_halfball_integral(c, p, r, half, cfg)?.value))
            .collect::<Result<_>>()?;
        let verdict = if averages.iter().all(|a| *a < ZERO_FLOOR) {
            OrderVerdict::NumericallyZero
        } else {
            let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let ys: Vec<f64> = averages.iter().map(|a| a.max(ZERO_FLOOR).ln()).collect();
            let (m_hat, band) = fit_slope(&xs, &ys);
            OrderVerdict::Exponent { m_hat, band }
        };
        coefficients.push(CoefficientOrder {
            index: idx.label(),
            averages,
            verdict,
        });
    }
    let mut min_exp: Option<(f64, f64)> = None;
    for c in &coefficients {
        if let OrderVerdict::Exponent { m_hat, band } = c.verdict {
            if min_exp.map_or(true, |(m, _)| m_hat < m) {
                min_exp = Some((m_hat, band));
            }
        }
    }
    let overall = match min_exp {
        Some((m_hat, band)) => OrderVerdict::Exponent { m_hat, band },
        None => OrderVerdict::NumericallyZero,
    };
    Ok(OrderReport {
        point: p.to_vec(),
        radii: radii.to_vec(),
        half_ball: half,
        coefficients,
        overall,
    })
}

/// Order-transfer check for a reflected form at the origin: the full-ball
/// average of |ω̃_I| must equal the half-ball average of |ω_I| per radius
/// (the doubled integral cancels against the doubled volume), and the
/// fitted exponents must agree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderTransferReport {
    pub radii: Vec<f64>,
    /// Per coefficient: label, per-radius ratios, half/full exponents.
    pub coefficients: Vec<OrderTransferCoefficient>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderTransferCoefficient {
    pub index: String,
    pub ratios: Vec<f64>,
    pub ratio_sigmas: Vec<f64>,
    pub half_verdict: OrderVerdict,
    pub full_verdict: OrderVerdict,
}

pub fn compare_orders_under_reflection(
    source: &FormField,
    reflected: &FormField,
    radii: &[f64],
    cfg: &QuadConfig,
    exponent_tol: f64,
) -> Result<OrderTransferReport> {
    let origin = vec![0.0; source.n()];
    let half_report = estimate_order_1mean(source, &origin, radii, cfg)?;
    let full_report = estimate_order_1mean(reflected, &origin, radii, cfg)?;
    let mut pass = true;
    let mut coefficients = Vec::new();
    for ((idx, ch), cf) in source
        .indices()
        .iter()
        .zip(&half_report.coefficients)
        .zip(&full_report.coefficients)
    {
        let src_coeff = source.coeff(idx);
        let refl_coeff = reflected.coeff(idx);
        let mut ratios = Vec::new();
        let mut sigmas = Vec::new();
        for &r in radii {
            let h = averaged_halfball_integral(src_coeff, &origin, r, true, cfg)?;
            let f = averaged_halfball_integral(refl_coeff, &origin, r, false, cfg)?;
            if h.value < ZERO_FLOOR {
                ratios.push(1.0);
                sigmas.push(0.0);
                continue;
            }
            let ratio = f.value / h.value;
            let sigma = ratio * ((f.std_err / f.value).powi(2) + (h.std_err / h.value).powi(2)).sqrt();
            if (ratio - 1.0).abs() > 3.0 * sigma.max(1e-6) {
                pass = false;
            }
            ratios.push(ratio);
            sigmas.push(sigma);
        }
        match (&ch.verdict, &cf.verdict) {
            (
                OrderVerdict::Exponent { m_hat: a, .. },
                OrderVerdict::Exponent { m_hat: b, .. },
            ) => {
                if (a - b).abs() > exponent_tol {
                    pass = false;
                }
            }
            (OrderVerdict::NumericallyZero, OrderVerdict::NumericallyZero) => {}
            _ => pass = false,
        }
        coefficients.push(OrderTransferCoefficient {
            index: idx.label(),
            ratios,
            ratio_sigmas: sigmas,
            half_verdict: ch.verdict.clone(),
            full_verdict: cf.verdict.clone(),
        });
    }
    Ok(OrderTransferReport {
        radii: radii.to_vec(),
        coefficients,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ChartDomain;
    use crate::expr::Expr;
    use crate::field::BoundaryTag;
    use crate::index::MultiIndex;

    fn cfg() -> QuadConfig {
        QuadConfig {
            nodes: 20_000,
            seed: 11,
            replicates: 4,
        }
    }

    fn radii() -> Vec<f64> {
        vec![0.4, 0.2, 0.1, 0.05, 0.025]
    }

    fn radius_power(n: usize, m: i32) -> Expr {
        let mut s = Expr::zero();
        for i in 1..=n {
            s = Expr::add(s, Expr::pow(Expr::var(i), 2));
        }
        Expr::pow(Expr::sqrt(s), m)
    }

    fn scalar_one_form(n: usize, e: Expr) -> FormField {
        FormField::from_coeffs(
            n,
            1,
            ChartDomain::ball(n, 1.0),
            &[(MultiIndex::new(vec![1], n).unwrap(), e)],
            BoundaryTag::None,
        )
        .unwrap()
    }

    #[test]
    fn averaged_integral_examples() {
        let d = ChartDomain::ball(2, 1.0);
        let one = ScalarField::constant(1.0, d.clone());
        let e = averaged_halfball_integral(&one, &[0.0, 0.0], 0.3, false, &cfg()).unwrap();
        assert_eq!(e.value, 1.0);

        let abs = ScalarField::new(radius_power(2, 1), d.clone());
        let r = 0.5;
        let e = averaged_halfball_integral(&abs, &[0.0, 0.0], r, false, &cfg()).unwrap();
        assert!((e.value - 2.0 / 3.0 * r).abs() < 5e-3);

        let x2 = ScalarField::new(Expr::var(2), ChartDomain::half_ball(2, 1.0));
        let e = averaged_halfball_integral(&x2, &[0.0, 0.0], r, true, &cfg()).unwrap();
        assert!((e.value - 4.0 * r / (3.0 * std::f64::consts::PI)).abs() < 5e-3);

        // ball exiting the domain is an error
        assert!(averaged_halfball_integral(&one, &[0.9, 0.0], 0.3, false, &cfg()).is_err());
    }

    #[test]
    fn monotone_exponent_calibration() {
        // m̂ within ±0.05 of m for |x|^m, m = 0..4
        for m in 0..=4 {
            let omega = scalar_one_form(2, radius_power(2, m));
            let rep = estimate_order_1mean(&omega, &[0.0, 0.0], &radii(), &cfg()).unwrap();
            match rep.overall {
                OrderVerdict::Exponent { m_hat, .. } => {
                    assert!(
                        (m_hat - m as f64).abs() <= 0.05,
                        "m={m}: fitted {m_hat}"
                    );
                }
                _ => panic!("expected exponent"),
            }
        }
    }

    #[test]
    fn homogeneous_quadratic_coefficient() {
        let e = Expr::add(Expr::pow(Expr::var(1), 2), Expr::pow(Expr::var(2), 2));
        let omega = scalar_one_form(2, e);
        let rep = estimate_order_1mean(&omega, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        match rep.coefficients[0].verdict {
            OrderVerdict::Exponent { m_hat, .. } => assert!((m_hat - 2.0).abs() < 0.05),
            _ => panic!("expected exponent"),
        }
    }

    #[test]
    fn constant_and_zero_verdicts() {
        let omega = scalar_one_form(2, Expr::one());
        let rep = estimate_order_1mean(&omega, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        match rep.coefficients[0].verdict {
            OrderVerdict::Exponent { m_hat, .. } => assert!(m_hat.abs() < 0.05),
            _ => panic!("expected exponent"),
        }

        let omega = FormField::zero(2, 1, ChartDomain::ball(2, 1.0)).unwrap();
        let rep = estimate_order_1mean(&omega, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        assert!(matches!(rep.overall, OrderVerdict::NumericallyZero));
    }

    #[test]
    fn homogeneity_scaling_leaves_exponent() {
        let base = scalar_one_form(2, radius_power(2, 2));
        let scaled = base.map_coeffs(|_, c| {
            ScalarField::new(Expr::mul(Expr::constant(37.5), c.expr.clone()), c.domain.clone())
        });
        let ra = estimate_order_1mean(&base, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        let rb = estimate_order_1mean(&scaled, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        match (&ra.overall, &rb.overall) {
            (
                OrderVerdict::Exponent { m_hat: a, .. },
                OrderVerdict::Exponent { m_hat: b, .. },
            ) => assert!((a - b).abs() < 1e-10),
            _ => panic!("expected exponents"),
        }
    }

    #[test]
    fn boundary_and_interior_exponents_agree_for_even_fields() {
        // even in x2: half-ball and full-ball averages share the exponent
        let e = Expr::add(Expr::pow(Expr::var(1), 2), Expr::pow(Expr::var(2), 2));
        let full = scalar_one_form(2, e.clone());
        let half = FormField::from_coeffs(
            2,
            1,
            ChartDomain::half_ball(2, 1.0),
            &[(MultiIndex::new(vec![1], 2).unwrap(), e)],
            BoundaryTag::None,
        )
        .unwrap();
        let ra = estimate_order_1mean(&full, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        let rb = estimate_order_1mean(&half, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        assert!(rb.half_ball);
        match (&ra.overall, &rb.overall) {
            (
                OrderVerdict::Exponent { m_hat: a, .. },
                OrderVerdict::Exponent { m_hat: b, .. },
            ) => assert!((a - b).abs() < 0.05),
            _ => panic!("expected exponents"),
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let omega = scalar_one_form(2, radius_power(2, 1));
        let rep = estimate_order_1mean(&omega, &[0.0, 0.0], &radii(), &cfg()).unwrap();
        let csv = rep.to_csv();
        assert!(csv.starts_with("coefficient,log_r,log_a\n"));
        assert!(csv.lines().count() > 5);
    }
}
