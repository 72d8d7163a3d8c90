//! The P1-P6 family of non-convex test problems.
//!
//! For P2-P6 every objective except the first is increasing in the tail
//! function `g`, so the global front is traced by the first coordinate with
//! `g` at its minimum. P1 becomes convex after substituting `u_i = y_i^2`, so
//! its front is traced exactly by weighted sums in `u`.

use std::f64::consts::PI;

use super::fronts::{curve_front, subsample, nondominated};
use crate::error::Result;
use crate::mop::Bounds;
use crate::problem::MopProblem;

const P1_C: [f64; 5] = [1.0, -1.0, 2.0, -3.0, 0.0];

pub fn p1() -> Result<MopProblem> {
    MopProblem::builder("P1", Bounds::uniform(5, -1.0, 1.0)?, 2)
        .objectives(|y| {
            let f1 = (0..5).map(|i| P1_C[i] * y[i] * y[i]).sum();
            let f2 = y.iter().map(|v| v.powi(4) - v * v).sum();
            vec![f1, f2]
        })
        .jacobian(|y| {
            vec![
                (0..5).map(|i| 2.0 * P1_C[i] * y[i]).collect(),
                y.iter().map(|v| 4.0 * v.powi(3) - 2.0 * v).collect(),
            ]
        })
        .front_sampler(p1_front)
        .build()
}

// minimizers of w*f1 + f2 over u in [0,1]^5; w = 1 already saturates every u_i
fn p1_front(count: usize) -> Vec<Vec<f64>> {
    let dense = 20_000usize.max(40 * count);
    let pts = (0..dense)
        .map(|k| {
            let w = k as f64 / (dense - 1) as f64;
            let u: Vec<f64> = P1_C.iter().map(|c| ((1.0 - w * c) / 2.0).clamp(0.0, 1.0)).collect();
            let f1 = (0..5).map(|i| P1_C[i] * u[i]).sum();
            let f2 = u.iter().map(|v| v * v - v).sum();
            vec![f1, f2]
        })
        .collect();
    subsample(nondominated(pts), count)
}

fn tail_sq(y: &[f64]) -> f64 {
    y[1..].iter().map(|v| (v - 0.5).powi(2)).sum()
}

pub fn p2() -> Result<MopProblem> {
    MopProblem::builder("P2", Bounds::uniform(40, 0.0, 1.0)?, 2)
        .objectives(|y| {
            let s = 1.0 + tail_sq(y);
            let a = 0.5 * PI * y[0];
            vec![s * a.cos(), s * a.sin()]
        })
        .jacobian(|y| {
            let s = 1.0 + tail_sq(y);
            let a = 0.5 * PI * y[0];
            let mut r1 = vec![-s * 0.5 * PI * a.sin()];
            let mut r2 = vec![s * 0.5 * PI * a.cos()];
            for v in &y[1..] {
                r1.push(2.0 * (v - 0.5) * a.cos());
                r2.push(2.0 * (v - 0.5) * a.sin());
            }
            vec![r1, r2]
        })
        .front_sampler(|count| {
            curve_front(count, |t| {
                let a = 0.5 * PI * t;
                vec![a.cos(), a.sin()]
            })
        })
        .build()
}

fn p3_core(t: f64) -> (f64, f64) {
    let w = 10.0 * PI * t;
    (t * (1.0 + 0.2 * w.sin()), (1.0 - t) * (1.0 + 0.2 * w.cos()))
}

pub fn p3() -> Result<MopProblem> {
    MopProblem::builder("P3", Bounds::uniform(7, 0.0, 1.0)?, 2)
        .objectives(|y| {
            let s = 1.0 + tail_sq(y);
            let (a, b) = p3_core(y[0]);
            vec![s * a, s * b]
        })
        .jacobian(|y| {
            let s = 1.0 + tail_sq(y);
            let t = y[0];
            let w = 10.0 * PI * t;
            let (a, b) = p3_core(t);
            let mut r1 = vec![s * (1.0 + 0.2 * w.sin() + 2.0 * PI * t * w.cos())];
            let mut r2 = vec![s * (-(1.0 + 0.2 * w.cos()) - 2.0 * PI * (1.0 - t) * w.sin())];
            for v in &y[1..] {
                r1.push(2.0 * (v - 0.5) * a);
                r2.push(2.0 * (v - 0.5) * b);
            }
            vec![r1, r2]
        })
        .front_sampler(|count| {
            curve_front(count, |t| {
                let (a, b) = p3_core(t);
                vec![a, b]
            })
        })
        .build()
}

fn p4_f2(t: f64, g: f64) -> f64 {
    g - t * t / g - 0.3 * t * g * (10.0 * PI * t).sin()
}

/// P4 with `n >= 2` variables.
pub fn p4(name: &str, n: usize) -> Result<MopProblem> {
    let scale = 4.0 / (n - 1) as f64;
    let g_of = move |y: &[f64]| 1.0 + scale * y[1..].iter().map(|v| v * v).sum::<f64>();
    MopProblem::builder(name, Bounds::uniform(n, 0.0, 1.0)?, 2)
        .objectives(move |y| vec![y[0], p4_f2(y[0], g_of(y))])
        .jacobian(move |y| {
            let t = y[0];
            let g = g_of(y);
            let w = 10.0 * PI * t;
            let mut r1 = vec![0.0; y.len()];
            r1[0] = 1.0;
            let dg = 1.0 + t * t / (g * g) - 0.3 * t * w.sin();
            let mut r2 = vec![-2.0 * t / g - 0.3 * g * (w.sin() + 10.0 * PI * t * w.cos())];
            r2.extend(y[1..].iter().map(|v| dg * 2.0 * scale * v));
            vec![r1, r2]
        })
        .front_sampler(|count| curve_front(count, |t| vec![t, p4_f2(t, 1.0)]))
        .build()
}

fn p5_f2(t: f64, g: f64) -> f64 {
    g - t - 0.4 * g * (-5.0 * t).exp() * (8.0 * PI * t).sin()
}

/// P5 with `n >= 2` variables.
pub fn p5(name: &str, n: usize) -> Result<MopProblem> {
    let scale = 3.0 / (n - 1) as f64;
    let g_of = move |y: &[f64]| 1.0 + scale * y[1..].iter().sum::<f64>();
    MopProblem::builder(name, Bounds::uniform(n, 0.0, 1.0)?, 2)
        .objectives(move |y| vec![y[0], p5_f2(y[0], g_of(y))])
        .jacobian(move |y| {
            let t = y[0];
            let g = g_of(y);
            let e = (-5.0 * t).exp();
            let w = 8.0 * PI * t;
            let mut r1 = vec![0.0; y.len()];
            r1[0] = 1.0;
            let dg = 1.0 - 0.4 * e * w.sin();
            let mut r2 = vec![-1.0 - 0.4 * g * e * (-5.0 * w.sin() + 8.0 * PI * w.cos())];
            r2.extend(std::iter::repeat(dg * scale).take(y.len() - 1));
            vec![r1, r2]
        })
        .front_sampler(|count| curve_front(count, |t| vec![t, p5_f2(t, 1.0)]))
        .build()
}

// weight of coordinate i (0-based) in the P6 tail: 1-based even indices get 10,
// odd indices from 3 on get 5
fn p6_weight(i: usize) -> f64 {
    if i == 0 {
        0.0
    } else if i % 2 == 1 {
        10.0
    } else {
        5.0
    }
}

fn p6_values(t: f64, g: f64) -> Vec<f64> {
    let base = g - t * t / g;
    vec![
        t,
        base - t * (8.0 * PI * t).sin(),
        base - t * (12.0 * PI * t).cos(),
    ]
}

/// P6 with `n >= 3` variables and three objectives.
pub fn p6(name: &str, n: usize) -> Result<MopProblem> {
    let g_of = |y: &[f64]| 1.0 + y.iter().enumerate().map(|(i, v)| p6_weight(i) * v).sum::<f64>();
    MopProblem::builder(name, Bounds::uniform(n, 0.0, 1.0)?, 3)
        .objectives(move |y| p6_values(y[0], g_of(y)))
        .jacobian(move |y| {
            let t = y[0];
            let g = g_of(y);
            let dg = 1.0 + t * t / (g * g);
            let a = 8.0 * PI * t;
            let b = 12.0 * PI * t;
            let mut r1 = vec![0.0; y.len()];
            r1[0] = 1.0;
            let mut r2 = vec![-2.0 * t / g - a.sin() - 8.0 * PI * t * a.cos()];
            let mut r3 = vec![-2.0 * t / g - b.cos() + 12.0 * PI * t * b.sin()];
            for i in 1..y.len() {
                r2.push(dg * p6_weight(i));
                r3.push(dg * p6_weight(i));
            }
            vec![r1, r2, r3]
        })
        .front_sampler(|count| {
            // O(k^2) filter in three objectives, so keep the curve moderate
            let dense = 4000usize.max(4 * count);
            let pts = (0..dense)
                .map(|i| p6_values(i as f64 / (dense - 1) as f64, 1.0))
                .collect();
            subsample(nondominated(pts), count)
        })
        .build()
}

/// Tail function of P4, exposed for property tests.
pub fn p4_g(y: &[f64]) -> f64 {
    let n = y.len();
    1.0 + 4.0 / (n - 1) as f64 * y[1..].iter().map(|v| v * v).sum::<f64>()
}

/// Tail function of P5.
pub fn p5_g(y: &[f64]) -> f64 {
    let n = y.len();
    1.0 + 3.0 / (n - 1) as f64 * y[1..].iter().sum::<f64>()
}

/// Tail function of P6.
pub fn p6_g(y: &[f64]) -> f64 {
    1.0 + y.iter().enumerate().map(|(i, v)| p6_weight(i) * v).sum::<f64>()
}
