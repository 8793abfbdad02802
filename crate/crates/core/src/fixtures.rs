//! Reference models and seeded random model generators.
//!
//! `w1` is MAR: uniform `f` on two binary variables with patterns
//! `{11, 10}` and `g(10 | y) = 0.5` if `y1 = 0` else `0.2`.
//! `w2` is MNAR: same `f`, `g(10 | y) = 0.5` if `y2 = 0` else `0.2`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::density::{compose_selection, FullDensity, SelectionModel, DEFAULT_TOLERANCE};
use crate::pattern::{MissingnessPattern, PatternSet};
use crate::space::{project_ot, ModelSpace, Outcome};

fn two_pattern_space() -> ModelSpace {
    let ps = PatternSet::new(vec![
        MissingnessPattern::all_observed(2),
        "10".parse().expect("literal"),
    ])
    .expect("distinct");
    ModelSpace::binary(2, ps).expect("valid space")
}

fn w_model(dependent_coord: usize) -> FullDensity {
    let space = two_pattern_space();
    let sm = SelectionModel::from_fns(
        &space,
        |_| 0.25,
        |r, y| {
            let incomplete = if y.0[dependent_coord] == 0 { 0.5 } else { 0.2 };
            if r.is_all_observed() {
                1.0 - incomplete
            } else {
                incomplete
            }
        },
    );
    compose_selection(space, &sm, DEFAULT_TOLERANCE).expect("valid model")
}

/// The MAR reference model.
pub fn w1() -> FullDensity {
    w_model(0)
}

/// The MNAR reference model.
pub fn w2() -> FullDensity {
    w_model(1)
}

/// Binary space on `d` coordinates whose pattern set is the all-ones
/// pattern plus `k - 1` distinct others drawn at random.
pub fn random_pattern_space(rng: &mut impl Rng, d: usize, k: usize) -> ModelSpace {
    let total = 1usize << d;
    assert!(k >= 1 && k <= total, "k = {k} out of range for d = {d}");
    let mut patterns = vec![MissingnessPattern::all_observed(d)];
    // masks 0 .. total-2 are every pattern but all-ones
    patterns.extend(
        sample(rng, total - 1, k - 1)
            .into_iter()
            .map(|m| MissingnessPattern::from_mask(d, m as u64).expect("d within range")),
    );
    ModelSpace::binary(d, PatternSet::new(patterns).expect("distinct")).expect("valid space")
}

/// Random `d ∈ 1..=max_d` and `k ∈ 1..=min(max_k, 2^d)`.
pub fn random_shape(rng: &mut impl Rng, max_d: usize, max_k: usize) -> (usize, usize) {
    let d = rng.random_range(1..=max_d);
    let k = rng.random_range(1..=max_k.min(1 << d));
    (d, k)
}

/// A strictly positive density with arbitrary (generally MNAR) dependence.
pub fn random_positive_model(rng: &mut impl Rng, space: ModelSpace) -> FullDensity {
    let raw: Vec<f64> = (0..space.omega_size())
        .map(|_| rng.random_range(0.05..1.0))
        .collect();
    let total: f64 = raw.iter().sum();
    FullDensity::new(space, raw.into_iter().map(|v| v / total).collect(), DEFAULT_TOLERANCE)
        .expect("normalized")
}

/// A strictly positive everywhere-MAR density: each incomplete pattern's
/// mechanism is a function of the coordinates it observes, and the
/// complete-case pattern (always at index 0) takes the remaining mass.
pub fn random_mar_model(rng: &mut impl Rng, space: ModelSpace) -> FullDensity {
    assert!(space.patterns().patterns()[0].is_all_observed());
    let k = space.k();
    let f_raw: Vec<f64> = (0..space.y_size()).map(|_| rng.random_range(0.05..1.0)).collect();
    let f_total: f64 = f_raw.iter().sum();
    let f: Vec<f64> = f_raw.iter().map(|v| v / f_total).collect();

    // one table per incomplete pattern, indexed by its observed sub-vector
    let cap = 0.95 / (k.max(2) - 1) as f64;
    let tables: Vec<Vec<(Vec<usize>, f64)>> = space.patterns().patterns()[1..]
        .iter()
        .map(|r| {
            space
                .assignments(&r.observed_coords())
                .into_iter()
                .map(|codes| (codes, rng.random_range(0.02..cap)))
                .collect()
        })
        .collect();
    let lookup = |j: usize, y: &Outcome| -> f64 {
        let r = space.patterns().patterns()[j];
        let ob = project_ot(y, &r).expect("same width");
        tables[j - 1]
            .iter()
            .find(|(codes, _)| *codes == ob.codes)
            .map(|(_, v)| *v)
            .expect("every sub-vector tabulated")
    };
    let sm = SelectionModel::from_fns(
        &space,
        |y| f[space.outcome_index(y)],
        |r, y| {
            let j = space.pattern_index(r).expect("member");
            if j == 0 {
                1.0 - (1..k).map(|i| lookup(i, y)).sum::<f64>()
            } else {
                lookup(j, y)
            }
        },
    );
    compose_selection(space.clone(), &sm, DEFAULT_TOLERANCE).expect("valid model")
}

/// Deterministic generator for model batches.
pub fn model_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
