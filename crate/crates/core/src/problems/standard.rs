//! ZDT and DTLZ problems plus a convex two-objective toy.

use std::f64::consts::PI;

use super::fronts::{curve_front, surface_front};
use crate::error::{Error, Result};
use crate::mop::Bounds;
use crate::problem::MopProblem;

// the sqrt-type ZDT derivatives blow up at x1 = 0
const ZDT_X1_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zdt {
    One,
    Two,
    Three,
}

impl Zdt {
    fn h(self, f1: f64, g: f64) -> f64 {
        let r = f1 / g;
        match self {
            Zdt::One => 1.0 - r.sqrt(),
            Zdt::Two => 1.0 - r * r,
            Zdt::Three => 1.0 - r.sqrt() - r * (10.0 * PI * f1).sin(),
        }
    }

    // (d f2 / d x1, d f2 / d g) with f2 = g * h(x1, g)
    fn partials(self, x1: f64, g: f64) -> (f64, f64) {
        match self {
            Zdt::One => {
                let x = x1.max(ZDT_X1_FLOOR);
                (-0.5 * (g / x).sqrt(), 1.0 - 0.5 * (x1 / g).sqrt())
            }
            Zdt::Two => (-2.0 * x1 / g, 1.0 + (x1 / g).powi(2)),
            Zdt::Three => {
                let x = x1.max(ZDT_X1_FLOOR);
                let w = 10.0 * PI * x1;
                (
                    -0.5 * (g / x).sqrt() - w.sin() - w * w.cos(),
                    1.0 - 0.5 * (x1 / g).sqrt(),
                )
            }
        }
    }
}

pub fn zdt(kind: Zdt, n: usize) -> Result<MopProblem> {
    if n < 2 {
        return Err(Error::Parameter("ZDT needs n >= 2".into()));
    }
    let name = match kind {
        Zdt::One => "ZDT1",
        Zdt::Two => "ZDT2",
        Zdt::Three => "ZDT3",
    };
    let scale = 9.0 / (n - 1) as f64;
    let g_of = move |y: &[f64]| 1.0 + scale * y[1..].iter().sum::<f64>();
    MopProblem::builder(name, Bounds::uniform(n, 0.0, 1.0)?, 2)
        .objectives(move |y| {
            let g = g_of(y);
            vec![y[0], g * kind.h(y[0], g)]
        })
        .jacobian(move |y| {
            let (d1, dg) = kind.partials(y[0], g_of(y));
            let mut r1 = vec![0.0; y.len()];
            r1[0] = 1.0;
            let mut r2 = vec![d1];
            r2.extend(std::iter::repeat(dg * scale).take(y.len() - 1));
            vec![r1, r2]
        })
        .front_sampler(move |count| curve_front(count, |t| vec![t, kind.h(t, 1.0)]))
        .build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtlz {
    One,
    Two,
}

impl Dtlz {
    fn g(self, tail: &[f64]) -> f64 {
        match self {
            Dtlz::One => {
                let s: f64 = tail
                    .iter()
                    .map(|x| (x - 0.5).powi(2) - (20.0 * PI * (x - 0.5)).cos())
                    .sum();
                100.0 * (tail.len() as f64 + s)
            }
            Dtlz::Two => tail.iter().map(|x| (x - 0.5).powi(2)).sum(),
        }
    }

    fn dg(self, x: f64) -> f64 {
        match self {
            Dtlz::One => 100.0 * (2.0 * (x - 0.5) + 20.0 * PI * (20.0 * PI * (x - 0.5)).sin()),
            Dtlz::Two => 2.0 * (x - 0.5),
        }
    }

    // factor applied to x_j for every objective that uses its "first" form,
    // and the complementary factor used once per objective
    fn pair(self, x: f64) -> (f64, f64, f64, f64) {
        match self {
            Dtlz::One => (x, 1.0, 1.0 - x, -1.0),
            Dtlz::Two => {
                let a = 0.5 * PI * x;
                (a.cos(), -0.5 * PI * a.sin(), a.sin(), 0.5 * PI * a.cos())
            }
        }
    }

    fn scale(self) -> f64 {
        match self {
            Dtlz::One => 0.5,
            Dtlz::Two => 1.0,
        }
    }

    // position factors h_i(x_0..x_{m-2}) and their derivatives dh_i/dx_j
    fn position(self, x: &[f64], m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut h = vec![self.scale(); m];
        let mut dh = vec![vec![0.0; m - 1]; m];
        for i in 0..m {
            // objective i uses the first form for x_0..x_{m-2-i}, then the
            // complementary form for x_{m-1-i} when i > 0
            let first = m - 1 - i;
            let mut factors: Vec<(usize, f64, f64)> = Vec::with_capacity(m);
            for (j, xj) in x.iter().enumerate().take(first) {
                let (v, d, _, _) = self.pair(*xj);
                factors.push((j, v, d));
            }
            if i > 0 {
                let j = m - 1 - i;
                let (_, _, v, d) = self.pair(x[j]);
                factors.push((j, v, d));
            }
            let prod: f64 = factors.iter().map(|f| f.1).product();
            h[i] *= prod;
            for (k, &(j, _, d)) in factors.iter().enumerate() {
                let others: f64 = factors
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| *q != k)
                    .map(|(_, f)| f.1)
                    .product();
                dh[i][j] = self.scale() * d * others;
            }
        }
        (h, dh)
    }
}

/// DTLZ1 or DTLZ2 with `m` objectives and `n >= m` variables.
pub fn dtlz(kind: Dtlz, name: &str, m: usize, n: usize) -> Result<MopProblem> {
    if m < 2 || n < m {
        return Err(Error::Parameter(format!("DTLZ needs 2 <= m <= n, got m={m}, n={n}")));
    }
    let mut builder = MopProblem::builder(name, Bounds::uniform(n, 0.0, 1.0)?, m)
        .objectives(move |y| {
            let g = kind.g(&y[m - 1..]);
            let (h, _) = kind.position(&y[..m - 1], m);
            h.into_iter().map(|v| (1.0 + g) * v).collect()
        })
        .jacobian(move |y| {
            let g = kind.g(&y[m - 1..]);
            let (h, dh) = kind.position(&y[..m - 1], m);
            (0..m)
                .map(|i| {
                    let mut row: Vec<f64> = dh[i].iter().map(|d| (1.0 + g) * d).collect();
                    row.extend(y[m - 1..].iter().map(|x| h[i] * kind.dg(*x)));
                    row
                })
                .collect()
        });
    builder = match (kind, m) {
        (Dtlz::One, 2) => builder.front_sampler(|c| curve_front(c, |t| vec![0.5 * t, 0.5 * (1.0 - t)])),
        (Dtlz::Two, 2) => builder.front_sampler(|c| {
            curve_front(c, |t| {
                let a = 0.5 * PI * t;
                vec![a.cos(), a.sin()]
            })
        }),
        (Dtlz::One, 3) => builder.front_sampler(|c| {
            surface_front(c, |w| w.iter().map(|v| 0.5 * v).collect())
        }),
        (Dtlz::Two, 3) => builder.front_sampler(|c| {
            surface_front(c, |w| {
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                w.iter().map(|v| v / norm).collect()
            })
        }),
        _ => builder,
    };
    builder.build()
}

/// `f1 = |y - a|^2`, `f2 = |y - b|^2`; the efficient set is the segment `[a, b]`.
pub fn convex_toy(name: &str, a: Vec<f64>, b: Vec<f64>, bounds: Bounds) -> Result<MopProblem> {
    if a.len() != bounds.dim() || b.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            expected: bounds.dim(),
            got: a.len().max(b.len()),
        });
    }
    if !bounds.contains(&a) || !bounds.contains(&b) {
        return Err(Error::Parameter("toy anchors must lie inside the box".into()));
    }
    let dist2: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum();
    let (a2, b2) = (a.clone(), b.clone());
    MopProblem::builder(name, bounds, 2)
        .objectives(move |y| {
            let f1 = y.iter().zip(&a).map(|(v, c)| (v - c).powi(2)).sum();
            let f2 = y.iter().zip(&b).map(|(v, c)| (v - c).powi(2)).sum();
            vec![f1, f2]
        })
        .jacobian(move |y| {
            vec![
                y.iter().zip(&a2).map(|(v, c)| 2.0 * (v - c)).collect(),
                y.iter().zip(&b2).map(|(v, c)| 2.0 * (v - c)).collect(),
            ]
        })
        .front_sampler(move |count| {
            curve_front(count, |t| vec![t * t * dist2, (1.0 - t).powi(2) * dist2])
        })
        .build()
}
