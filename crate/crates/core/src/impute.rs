//! Seeded imputation chains under the two conditional semantics.
//!
//! * `F` mode draws the missing values from `f⁽ᶠ⁾` over the observed data
//!   event of the realized data, so the pattern never changes.
//! * `T` mode draws a completion from `f⁽ᵀ⁾` over `𝒴` and then a fresh
//!   pattern from the mechanism `g(· | y*)`.
//!
//! Every draw maps a uniform variate in `[0, 1)` through the inverse CDF of
//! a finite distribution listed in canonical order. `F` uses one variate per
//! step, `T` uses two (value, then pattern).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{
    factor_selection, formal_conditional, marginal_f, temporal_conditional, DensityError,
    FullDensity,
};
use crate::pattern::MissingnessPattern;
use crate::space::{project_ob, project_ot, FullPoint, Outcome, SpaceError};

/// Recorded in chain metadata so runs can be reproduced elsewhere.
pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64/stream0; f64 = 53-bit mantissa in [0,1)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("realized data {0} has zero probability under the model")]
    ImpossibleRealization(String),
    #[error("chain visits {0}, which the reference table does not cover")]
    SupportMismatch(String),
    #[error("unknown imputation mode {0:?}: expected F or T")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    F,
    T,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::F => "F",
            Mode::T => "T",
        })
    }
}

impl FromStr for Mode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F" | "f" => Ok(Mode::F),
            "T" | "t" => Ok(Mode::T),
            _ => Err(SimError::UnknownMode(s.into())),
        }
    }
}

/// The realized `(ỹ, r̃)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizedData {
    pub y_tilde: Outcome,
    pub r_tilde: MissingnessPattern,
}

impl RealizedData {
    pub fn new(
        h: &FullDensity,
        y_tilde: Outcome,
        r_tilde: MissingnessPattern,
    ) -> Result<Self, SimError> {
        let point = FullPoint {
            y: y_tilde,
            r: r_tilde,
        };
        h.space().check_point(&point)?;
        if h.prob(&point) <= 0.0 {
            return Err(SimError::ImpossibleRealization(format!(
                "y={} r={}",
                h.space().format_outcome(&point.y),
                point.r
            )));
        }
        Ok(Self {
            y_tilde: point.y,
            r_tilde: point.r,
        })
    }

    pub fn point(&self) -> FullPoint {
        FullPoint {
            y: self.y_tilde.clone(),
            r: self.r_tilde,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputationChain {
    pub mode: Mode,
    pub seed: u64,
    pub m: usize,
    pub rng: &'static str,
    pub realized: RealizedData,
    pub draws: Vec<FullPoint>,
}

/// Index `i` of the first cumulative probability exceeding `u`. Rounding at
/// the top end falls back to the last entry with positive mass.
pub fn inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("distribution has positive mass")
}

fn chain_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `m` draws of `y^{mi(r̃)}` from `f⁽ᶠ⁾(· | ỹ^{ob(r̃)})`, each completed as
/// `(ỹ^{ob(r̃)}, y⁽ᵗ⁾_mi, r̃)`.
pub fn impute_f(
    h: &FullDensity,
    real: &RealizedData,
    m: usize,
    seed: u64,
) -> Result<ImputationChain, SimError> {
    let space = h.space();
    let event = space.observed_event(&real.point())?;
    let cond = formal_conditional(space, &marginal_f(h), &event)?;
    let mut rng = chain_rng(seed);
    let draws = (0..m)
        .map(|_| {
            let u: f64 = rng.random();
            cond.members[inverse_cdf(&cond.probs, u)].clone()
        })
        .collect();
    Ok(ImputationChain {
        mode: Mode::F,
        seed,
        m,
        rng: RNG_ALGORITHM,
        realized: real.clone(),
        draws,
    })
}

/// `m` steps of: draw `y*` from `f⁽ᵀ⁾(· | ỹ^{ot(r̃)})`, then `r⁽ᵗ⁾` from
/// `g(· | y*)`.
pub fn impute_t(
    h: &FullDensity,
    real: &RealizedData,
    m: usize,
    seed: u64,
) -> Result<ImputationChain, SimError> {
    let space = h.space();
    let sm = factor_selection(h)?;
    let given = project_ot(&real.y_tilde, &real.r_tilde)?;
    let cond = temporal_conditional(space, &sm.f, &real.r_tilde, &given)?;
    let k = space.k();
    let mut rng = chain_rng(seed);
    let draws = (0..m)
        .map(|_| {
            let u_value: f64 = rng.random();
            let u_pattern: f64 = rng.random();
            let y = cond.support[inverse_cdf(&cond.probs, u_value)].clone();
            let yi = space.outcome_index(&y);
            let row: Vec<f64> = (0..k).map(|j| sm.mechanism(yi, j)).collect();
            let r = space.patterns().patterns()[inverse_cdf(&row, u_pattern)];
            FullPoint { y, r }
        })
        .collect();
    Ok(ImputationChain {
        mode: Mode::T,
        seed,
        m,
        rng: RNG_ALGORITHM,
        realized: real.clone(),
        draws,
    })
}

pub fn impute(
    h: &FullDensity,
    real: &RealizedData,
    mode: Mode,
    m: usize,
    seed: u64,
) -> Result<ImputationChain, SimError> {
    match mode {
        Mode::F => impute_f(h, real, m, seed),
        Mode::T => impute_t(h, real, m, seed),
    }
}

impl ImputationChain {
    /// F-shape: every draw keeps `r̃` and `ỹ^{ob(r̃)}`.
    pub fn has_formal_shape(&self) -> bool {
        let ob = project_ob(&self.realized.point());
        self.draws
            .iter()
            .all(|d| d.r == self.realized.r_tilde && project_ob(d) == ob)
    }

    /// T-shape: every draw keeps `ỹ^{ot(r̃)}`; the pattern is free.
    pub fn has_temporal_shape(&self) -> bool {
        let r = self.realized.r_tilde;
        let ot = project_ot(&self.realized.y_tilde, &r).expect("same width");
        self.draws
            .iter()
            .all(|d| project_ot(&d.y, &r).is_ok_and(|x| x == ot))
    }

    pub fn distinct_patterns(&self) -> Vec<MissingnessPattern> {
        let mut ps: Vec<_> = self.draws.iter().map(|d| d.r).collect();
        ps.sort();
        ps.dedup();
        ps
    }
}

/// Relative frequency of each key over the chain's draws.
pub fn empirical_table<K: Ord>(
    chain: &ImputationChain,
    key: impl Fn(&FullPoint) -> K,
) -> BTreeMap<K, f64> {
    let mut counts = BTreeMap::new();
    for d in &chain.draws {
        *counts.entry(key(d)).or_insert(0usize) += 1;
    }
    let n = chain.draws.len() as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

/// Total variation `½ Σ |empirical − exact|` between the chain's
/// distribution of `key` and `exact`.
pub fn empirical_tv<K: Ord + fmt::Debug>(
    chain: &ImputationChain,
    key: impl Fn(&FullPoint) -> K,
    exact: &BTreeMap<K, f64>,
) -> Result<f64, SimError> {
    let emp = empirical_table(chain, key);
    if let Some(k) = emp.keys().find(|k| !exact.contains_key(*k)) {
        return Err(SimError::SupportMismatch(format!("{k:?}")));
    }
    Ok(0.5
        * exact
            .iter()
            .map(|(k, p)| (emp.get(k).copied().unwrap_or(0.0) - p).abs())
            .sum::<f64>())
}

/// Exact law of an `F` chain's draws: `f⁽ᶠ⁾` over the event members.
pub fn exact_formal_law(
    h: &FullDensity,
    real: &RealizedData,
) -> Result<BTreeMap<FullPoint, f64>, SimError> {
    let space = h.space();
    let event = space.observed_event(&real.point())?;
    let cond = formal_conditional(space, &marginal_f(h), &event)?;
    Ok(cond.members.into_iter().zip(cond.probs).collect())
}

/// Exact law of a `T` chain's draws: `f⁽ᵀ⁾(y* | ỹ^{ot}) g(r | y*)`.
pub fn exact_temporal_law(
    h: &FullDensity,
    real: &RealizedData,
) -> Result<BTreeMap<FullPoint, f64>, SimError> {
    let space = h.space();
    let sm = factor_selection(h)?;
    let given = project_ot(&real.y_tilde, &real.r_tilde)?;
    let cond = temporal_conditional(space, &sm.f, &real.r_tilde, &given)?;
    let mut out = BTreeMap::new();
    for (y, py) in cond.support.iter().zip(&cond.probs) {
        let yi = space.outcome_index(y);
        for (j, r) in space.patterns().iter().enumerate() {
            out.insert(FullPoint { y: y.clone(), r: *r }, py * sm.mechanism(yi, j));
        }
    }
    Ok(out)
}

/// Pushes a law forward through `key`.
pub fn marginalize<K: Ord>(
    law: &BTreeMap<FullPoint, f64>,
    key: impl Fn(&FullPoint) -> K,
) -> BTreeMap<K, f64> {
    let mut out = BTreeMap::new();
    for (p, v) in law {
        *out.entry(key(p)).or_insert(0.0) += v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{binary_space, p, w1, w2, within};

    fn real(h: &FullDensity, y: &[usize], r: &str) -> RealizedData {
        RealizedData::new(h, Outcome(y.to_vec()), p(r)).unwrap()
    }

    #[test]
    fn inverse_cdf_edges() {
        let probs = [0.25, 0.0, 0.75];
        assert_eq!(inverse_cdf(&probs, 0.0), 0);
        assert_eq!(inverse_cdf(&probs, 0.2499), 0);
        assert_eq!(inverse_cdf(&probs, 0.25), 2);
        assert_eq!(inverse_cdf(&probs, 0.999_999_999), 2);
        assert_eq!(inverse_cdf(&[0.5, 0.5 - 1e-17, 0.0], 0.999_999_999_999_999_9), 1);
    }

    #[test]
    fn f_chain_on_w1() {
        let h = w1();
        let rd = real(&h, &[0, 1], "10");
        let chain = impute_f(&h, &rd, 100_000, 42).unwrap();
        assert!(chain.has_formal_shape());
        assert_eq!(chain.distinct_patterns(), vec![p("10")]);
        let freq = empirical_table(&chain, |d| d.y.0[1]);
        assert!((freq[&1] - 0.5).abs() < 0.01, "{freq:?}");
        let tv = empirical_tv(&chain, |d| d.clone(), &exact_formal_law(&h, &rd).unwrap()).unwrap();
        assert!(tv < 0.01);
    }

    #[test]
    fn f_chain_edge_cases() {
        let h = w2();
        let complete = real(&h, &[1, 0], "11");
        let chain = impute_f(&h, &complete, 50, 3).unwrap();
        assert!(chain.draws.iter().all(|d| *d == complete.point()));

        let empty = impute_f(&h, &complete, 0, 3).unwrap();
        assert!(empty.draws.is_empty());
        assert_eq!((empty.m, empty.seed, empty.mode), (0, 3, Mode::F));
    }

    #[test]
    fn t_chain_on_w1() {
        let h = w1();
        let rd = real(&h, &[0, 1], "10");
        let chain = impute_t(&h, &rd, 100_000, 42).unwrap();
        assert!(chain.has_temporal_shape());
        let law = marginalize(&exact_temporal_law(&h, &rd).unwrap(), |q| q.r);
        within(law[&p("11")], 0.5, 1e-15);
        within(law[&p("10")], 0.5, 1e-15);
        let tv = empirical_tv(&chain, |d| d.r, &law).unwrap();
        assert!(tv < 0.01, "tv {tv}");
        assert_eq!(chain.distinct_patterns().len(), 2);
    }

    #[test]
    fn t_chain_under_mcar_follows_the_constant_mechanism() {
        let space = binary_space(2, &["11", "10", "00"]);
        let g = [0.6, 0.3, 0.1];
        let h = FullDensity::from_fn(space.clone(), 1e-12, |pt| {
            [0.1, 0.2, 0.3, 0.4][pt.y.0[0] * 2 + pt.y.0[1]]
                * g[space.pattern_index(&pt.r).unwrap()]
        })
        .unwrap();
        let rd = real(&h, &[1, 0], "10");
        let chain = impute_t(&h, &rd, 50_000, 11).unwrap();
        let emp = empirical_table(&chain, |d| d.r);
        for (j, r) in space.patterns().iter().enumerate() {
            assert!((emp[r] - g[j]).abs() < 0.01);
        }
    }

    #[test]
    fn tv_against_wrong_table() {
        let h = w2();
        let rd = real(&h, &[0, 1], "10");
        let exact = exact_temporal_law(&h, &rd).unwrap();
        // swap the 0.5 / 0.2 mechanism values
        let swapped: BTreeMap<FullPoint, f64> = exact
            .keys()
            .map(|q| {
                let y2 = q.y.0[1];
                let inc = if y2 == 0 { 0.2 } else { 0.5 };
                let g = if q.r.is_all_observed() { 1.0 - inc } else { inc };
                (q.clone(), 0.5 * g)
            })
            .collect();
        let exact_tv: f64 = 0.5 * exact.iter().map(|(k, v)| (v - swapped[k]).abs()).sum::<f64>();
        within(exact_tv, 0.3, 1e-12);

        let chain = impute_t(&h, &rd, 100_000, 5).unwrap();
        let own = empirical_table(&chain, |d| d.clone());
        assert_eq!(empirical_tv(&chain, |d| d.clone(), &own).unwrap(), 0.0);
        let tv = empirical_tv(&chain, |d| d.clone(), &swapped).unwrap();
        assert!((tv - 0.3).abs() < 0.01, "tv {tv}");
    }

    #[test]
    fn tv_support_mismatch() {
        let h = w1();
        let rd = real(&h, &[0, 1], "10");
        let chain = impute_f(&h, &rd, 10, 1).unwrap();
        let only_one: BTreeMap<usize, f64> = [(0usize, 1.0)].into_iter().collect();
        assert!(matches!(
            empirical_tv(&chain, |d| d.y.0[1], &only_one),
            Err(SimError::SupportMismatch(_))
        ));
    }

    #[test]
    fn seeds_are_deterministic() {
        let h = w2();
        let rd = real(&h, &[0, 0], "10");
        for mode in [Mode::F, Mode::T] {
            let a = impute(&h, &rd, mode, 1000, 7).unwrap();
            let b = impute(&h, &rd, mode, 1000, 7).unwrap();
            let c = impute(&h, &rd, mode, 1000, 8).unwrap();
            assert_eq!(a, b);
            assert_ne!(a.draws, c.draws);
        }
    }

    #[test]
    fn errors() {
        let space = binary_space(2, &["11", "10"]);
        let h = FullDensity::from_fn(space, 1e-12, |pt| {
            if pt.r.is_all_observed() && pt.y.0[0] == 0 {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(matches!(
            RealizedData::new(&h, Outcome(vec![0, 0]), p("10")),
            Err(SimError::ImpossibleRealization(_))
        ));
        let rd = real(&h, &[0, 1], "11");
        // f(y) = 0 for y1 = 1: the mechanism is undefined there
        assert!(matches!(
            impute_t(&h, &rd, 5, 1),
            Err(SimError::Density(DensityError::ZeroMarginal(_)))
        ));
        assert!("X".parse::<Mode>().is_err());
    }
}
