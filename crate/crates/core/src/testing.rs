pub use crate::fixtures::{w1, w2};
use crate::pattern::{MissingnessPattern, PatternSet};
use crate::space::ModelSpace;

pub fn p(s: &str) -> MissingnessPattern {
    s.parse().unwrap()
}

pub fn binary_space(d: usize, pats: &[&str]) -> ModelSpace {
    ModelSpace::binary(d, PatternSet::new(pats.iter().map(|s| p(s)).collect()).unwrap()).unwrap()
}

#[track_caller]
pub fn within(got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "got {got}, want {want} (tol {tol})"
    );
}
