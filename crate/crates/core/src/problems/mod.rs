//! Registry of shipped benchmark problems.
//!
//! Every problem carries an analytic Jacobian and a true-front sampler. New
//! problems can be built directly with [`MopProblem::builder`].

mod suite;
mod fronts;
mod standard;

pub use suite::{p1, p2, p3, p4, p4_g, p5, p5_g, p6, p6_g};
pub use standard::{convex_toy, dtlz, zdt, Dtlz, Zdt};

use crate::error::{Error, Result};
use crate::mop::Bounds;
use crate::problem::MopProblem;

/// Registered names with their `(m, n)`.
pub const PROBLEMS: &[(&str, usize, usize)] = &[
    ("P1", 2, 5),
    ("P2", 2, 40),
    ("P3", 2, 7),
    ("P4a", 2, 2),
    ("P4b", 2, 50),
    ("P4c", 2, 100),
    ("P4d", 2, 150),
    ("P5a", 2, 2),
    ("P5b", 2, 50),
    ("P5c", 2, 100),
    ("P5d", 2, 150),
    ("P6a", 3, 7),
    ("P6b", 3, 50),
    ("P6c", 3, 100),
    ("P6d", 3, 150),
    ("ZDT1", 2, 30),
    ("ZDT2", 2, 30),
    ("ZDT3", 2, 30),
    ("DTLZ1", 3, 7),
    ("DTLZ1n2", 2, 2),
    ("DTLZ2", 3, 12),
    ("DTLZ2n2", 2, 2),
    ("TOY", 2, 2),
];

pub fn problem_names() -> Vec<String> {
    PROBLEMS.iter().map(|(name, _, _)| name.to_string()).collect()
}

/// Fresh instance of a registered problem.
pub fn get_problem(name: &str) -> Result<MopProblem> {
    let n = match PROBLEMS.iter().find(|(p, _, _)| *p == name) {
        Some(&(_, _, n)) => n,
        None => {
            return Err(Error::UnknownProblem {
                name: name.to_string(),
                available: problem_names(),
            })
        }
    };
    match name {
        "P1" => p1(),
        "P2" => p2(),
        "P3" => p3(),
        _ if name.starts_with("P4") => p4(name, n),
        _ if name.starts_with("P5") => p5(name, n),
        _ if name.starts_with("P6") => p6(name, n),
        "ZDT1" => zdt(Zdt::One, n),
        "ZDT2" => zdt(Zdt::Two, n),
        "ZDT3" => zdt(Zdt::Three, n),
        "DTLZ1" => dtlz(Dtlz::One, name, 3, n),
        "DTLZ1n2" => dtlz(Dtlz::One, name, 2, n),
        "DTLZ2" => dtlz(Dtlz::Two, name, 3, n),
        "DTLZ2n2" => dtlz(Dtlz::Two, name, 2, n),
        "TOY" => convex_toy(
            name,
            vec![-1.0, 0.0],
            vec![1.0, 0.5],
            Bounds::uniform(2, -2.0, 2.0)?,
        ),
        _ => unreachable!("registry table and constructor list disagree"),
    }
}
