//! Chart domains: balls, half-balls, periodic boxes, boxes with one
//! boundary face, and spherical shells. The reflection interface, when the
//! shape has one, is always the hyperplane {x_n = 0}.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Shape {
    /// Open ball B_r around the origin.
    Ball,
    /// B_r ∩ {x_n ≥ 0}.
    HalfBall,
    /// Periodic box [0, L_i) in each coordinate.
    TorusBox { lengths: Vec<f64> },
    /// Axis-aligned box with one boundary face on {x_n = lo_n}.
    FaceBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Shell inner ≤ |x| ≤ r (used for fields singular at the origin).
    Shell { inner: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub n: usize,
    pub r: f64,
    #[serde(flatten)]
    pub shape: Shape,
}

impl ChartDomain {
    pub fn ball(n: usize, r: f64) -> Self {
        Self {
            n,
            r,
            shape: Shape::Ball,
        }
    }

    pub fn half_ball(n: usize, r: f64) -> Self {
        Self {
            n,
            r,
            shape: Shape::HalfBall,
        }
    }

    pub fn torus(n: usize, lengths: Vec<f64>) -> Self {
        let r = lengths.iter().cloned().fold(0.0, f64::max);
        Self {
            n,
            r,
            shape: Shape::TorusBox { lengths },
        }
    }

    pub fn face_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = lo.len();
        let r = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        Self {
            n,
            r,
            shape: Shape::FaceBox { lo, hi },
        }
    }

    pub fn shell(n: usize, inner: f64, outer: f64) -> Self {
        Self {
            n,
            r: outer,
            shape: Shape::Shell { inner },
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.n {
            return false;
        }
        let norm2: f64 = p.iter().map(|x| x * x).sum();
        match &self.shape {
            Shape::Ball => norm2 < self.r * self.r,
            Shape::HalfBall => norm2 < self.r * self.r && p[self.n - 1] >= 0.0,
            Shape::TorusBox { lengths } => {
                p.iter().zip(lengths).all(|(x, l)| *x >= 0.0 && *x < *l)
            }
            Shape::FaceBox { lo, hi } => p
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (a, b))| *x >= *a && *x <= *b),
            Shape::Shell { inner } => norm2 >= inner * inner && norm2 <= self.r * self.r,
        }
    }

    /// Whether the shape carries the reflection interface {x_n = 0}.
    pub fn has_interface(&self) -> bool {
        match &self.shape {
            Shape::HalfBall => true,
            Shape::FaceBox { lo, .. } => lo[self.n - 1] == 0.0,
            _ => false,
        }
    }

    /// The full-ball (or symmetric box) domain obtained by reflecting across
    /// {x_n = 0}. Only meaningful when `has_interface()`.
    pub fn reflected_full(&self) -> ChartDomain {
        match &self.shape {
            Shape::HalfBall => ChartDomain::ball(self.n, self.r),
            Shape::FaceBox { lo, hi } => {
                let mut lo = lo.clone();
                lo[self.n - 1] = -hi[self.n - 1];
                ChartDomain::face_box_full(lo, hi.clone())
            }
            _ => self.clone(),
        }
    }

    fn face_box_full(lo: Vec<f64>, hi: Vec<f64>) -> ChartDomain {
        let n = lo.len();
        let r = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        ChartDomain {
            n,
            r,
            shape: Shape::FaceBox { lo, hi },
        }
    }

    /// Regular grid of points on the interface {x_n = 0}, `per_axis` points
    /// per tangential axis, staying strictly inside the domain.
    pub fn boundary_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        if !self.has_interface() {
            return vec![];
        }
        let n = self.n;
        let (los, his): (Vec<f64>, Vec<f64>) = match &self.shape {
            Shape::HalfBall => {
                let s = self.r * 0.95;
                (vec![-s; n - 1], vec![s; n - 1])
            }
            Shape::FaceBox { lo, hi } => (
                lo[..n - 1].to_vec(),
                hi[..n - 1].to_vec(),
            ),
            _ => unreachable!(),
        };
        let mut out = Vec::new();
        let mut idx = vec![0usize; n - 1];
        loop {
            let mut p: Vec<f64> = (0..n - 1)
                .map(|a| {
                    if per_axis == 1 {
                        0.5 * (los[a] + his[a])
                    } else {
                        los[a] + (his[a] - los[a]) * idx[a] as f64 / (per_axis - 1) as f64
                    }
                })
                .collect();
            p.push(0.0);
            if self.contains(&p) {
                out.push(p);
            }
            // odometer increment
            let mut a = 0;
            loop {
                if a == n - 1 {
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

    /// Regular grid over the whole domain, `per_axis` points per axis.
    pub fn interior_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let n = self.n;
        let (los, his): (Vec<f64>, Vec<f64>) = match &self.shape {
            Shape::Ball => (vec![-self.r * 0.95; n], vec![self.r * 0.95; n]),
            Shape::HalfBall => {
                let mut lo = vec![-self.r * 0.95; n];
                lo[n - 1] = 0.0;
                (lo, vec![self.r * 0.95; n])
            }
            Shape::TorusBox { lengths } => (
                vec![0.0; n],
                lengths.iter().map(|l| l * (1.0 - 1e-9)).collect(),
            ),
            Shape::FaceBox { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Shell { .. } => (vec![-self.r; n], vec![self.r; n]),
        };
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = (0..n)
                .map(|a| {
                    if per_axis == 1 {
                        0.5 * (los[a] + his[a])
                    } else {
                        los[a] + (his[a] - los[a]) * idx[a] as f64 / (per_axis - 1) as f64
                    }
                })
                .collect();
            if self.contains(&p) {
                out.push(p);
            }
            let mut a = 0;
            loop {
                if a == n {
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
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let d = ChartDomain::half_ball(2, 1.0);
        assert!(d.contains(&[0.3, 0.2]));
        assert!(d.contains(&[0.3, 0.0]));
        assert!(!d.contains(&[0.3, -0.1]));
        assert!(!d.contains(&[1.2, 0.0]));
        assert!(d.has_interface());
        assert!(!ChartDomain::ball(2, 1.0).has_interface());
    }

    #[test]
    fn torus_and_shell() {
        let t = ChartDomain::torus(3, vec![6.28, 6.28, 6.28]);
        assert!(t.contains(&[0.0, 1.0, 6.0]));
        assert!(!t.contains(&[-0.1, 1.0, 1.0]));
        let s = ChartDomain::shell(2, 0.5, 1.5);
        assert!(s.contains(&[1.0, 0.0]));
        assert!(!s.contains(&[0.1, 0.1]));
    }

    #[test]
    fn boundary_grid_lies_on_interface() {
        let d = ChartDomain::half_ball(3, 1.0);
        let g = d.boundary_grid(5);
        assert!(!g.is_empty());
        for p in &g {
            assert_eq!(p[2], 0.0);
            assert!(d.contains(p));
        }
    }

    #[test]
    fn reflected_full_domain() {
        let d = ChartDomain::half_ball(2, 1.0);
        let f = d.reflected_full();
        assert!(f.contains(&[0.3, -0.5]));
        let b = ChartDomain::face_box(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 0.5]);
        assert!(b.has_interface());
        let fb = b.reflected_full();
        assert!(fb.contains(&[0.5, 0.5, -0.4]));
    }
}
