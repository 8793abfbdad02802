//! Full densities `h` on `Ω` and everything derived from them: the selection
//! and pattern-mixture factorizations, the marginal of `Y`, the observed-data
//! density on `Ω_ob`, the temporal and formal conditionals, and the MAR
//! predicate.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::pattern::MissingnessPattern;
use crate::space::{
    project_mt, project_ot, FullPoint, ModelSpace, ObPoint, ObservedDataEvent, Outcome,
    SpaceError, SubVector,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid density:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),
    #[error("missingness mechanism undefined at y={0}: marginal f(y) is zero")]
    ZeroMarginal(String),
    #[error("conditional undefined: zero conditioning mass at {0}")]
    UndefinedConditional(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_table(
    values: &[f64],
    tol: f64,
    location: impl Fn(usize) -> String,
    what: &str,
    out: &mut Vec<Violation>,
) {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 || v > 1.0 + tol {
            out.push(Violation {
                location: location(i),
                message: format!("probability {v} outside [0, 1]"),
            });
        }
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > tol {
        out.push(Violation {
            location: what.to_string(),
            message: format!("sums to {total}, expected 1"),
        });
    }
}

/// A probability table `h` on `Ω`, indexed in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDensity {
    space: ModelSpace,
    table: Vec<f64>,
}

impl FullDensity {
    pub fn new(space: ModelSpace, table: Vec<f64>, tol: f64) -> Result<Self, DensityError> {
        if table.len() != space.omega_size() {
            return Err(DensityError::Validation(vec![Violation {
                location: "h".into(),
                message: format!(
                    "table has {} entries, Ω has {}",
                    table.len(),
                    space.omega_size()
                ),
            }]));
        }
        let mut violations = Vec::new();
        check_table(
            &table,
            tol,
            |i| {
                let p = space.point_at(i);
                format!("h[y={}, r={}]", space.format_outcome(&p.y), p.r)
            },
            "h",
            &mut violations,
        );
        if !violations.is_empty() {
            return Err(DensityError::Validation(violations));
        }
        Ok(Self { space, table })
    }

    pub fn from_fn(
        space: ModelSpace,
        tol: f64,
        mut h: impl FnMut(&FullPoint) -> f64,
    ) -> Result<Self, DensityError> {
        let table = space.enumerate_omega().map(|p| h(&p)).collect();
        Self::new(space, table, tol)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `h(y, r)`; zero for points outside `Ω`.
    pub fn prob(&self, p: &FullPoint) -> f64 {
        self.space
            .point_index(p)
            .map_or(0.0, |i| self.table[i])
    }

    pub(crate) fn prob_at(&self, y_index: usize, pattern_index: usize) -> f64 {
        self.table[pattern_index * self.space.y_size() + y_index]
    }

    pub fn event_mass(&self, e: &ObservedDataEvent) -> f64 {
        e.members.iter().map(|m| self.prob(m)).sum()
    }

    /// `p(r_j)`.
    pub fn pattern_mass(&self, pattern_index: usize) -> f64 {
        let n = self.space.y_size();
        self.table[pattern_index * n..(pattern_index + 1) * n].iter().sum()
    }
}

/// A density over `𝒴` alone, indexed in canonical outcome order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct OutcomeDensity(pub Vec<f64>);

impl OutcomeDensity {
    pub fn at(&self, space: &ModelSpace, y: &Outcome) -> f64 {
        self.0[space.outcome_index(y)]
    }

    /// Marginal mass of the outcomes that agree with `given`.
    pub fn marginal(&self, space: &ModelSpace, given: &SubVector) -> f64 {
        space
            .completions(given)
            .iter()
            .map(|y| self.at(space, y))
            .sum()
    }
}

/// `h(y, r) = f(y) g(r | y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionModel {
    /// `f(y)` by outcome index.
    pub f: OutcomeDensity,
    /// `g(r_j | y)` at `y_index * k + j`.
    pub g: Vec<f64>,
    k: usize,
}

impl SelectionModel {
    pub fn new(f: Vec<f64>, g: Vec<f64>, k: usize) -> Self {
        Self {
            f: OutcomeDensity(f),
            g,
            k,
        }
    }

    /// Builds the tables from closures over the space.
    pub fn from_fns(
        space: &ModelSpace,
        f: impl Fn(&Outcome) -> f64,
        g: impl Fn(&MissingnessPattern, &Outcome) -> f64,
    ) -> Self {
        let mut fs = Vec::with_capacity(space.y_size());
        let mut gs = Vec::with_capacity(space.y_size() * space.k());
        for y in space.outcomes() {
            fs.push(f(&y));
            gs.extend(space.patterns().iter().map(|r| g(r, &y)));
        }
        Self::new(fs, gs, space.k())
    }

    pub fn mechanism(&self, y_index: usize, pattern_index: usize) -> f64 {
        self.g[y_index * self.k + pattern_index]
    }

    pub fn validate(&self, space: &ModelSpace, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.f.0.len() != space.y_size() || self.g.len() != space.y_size() * space.k() {
            out.push(Violation {
                location: "selection".into(),
                message: "factor tables do not match the model space".into(),
            });
            return out;
        }
        check_table(
            &self.f.0,
            tol,
            |i| format!("f[y={}]", space.format_outcome(&space.outcome_at(i))),
            "f",
            &mut out,
        );
        for (i, row) in self.g.chunks(self.k).enumerate() {
            let y = space.format_outcome(&space.outcome_at(i));
            check_table(
                row,
                tol,
                |j| format!("g[r={} | y={y}]", space.patterns().patterns()[j]),
                &format!("g[· | y={y}]"),
                &mut out,
            );
        }
        out
    }
}

/// `h(y, r) = p(r) p(y | r)`. Components are `None` where `p(r) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternMixture {
    pub pr: Vec<f64>,
    pub components: Vec<Option<OutcomeDensity>>,
}

impl PatternMixture {
    /// Patterns whose component was omitted for having zero probability.
    pub fn omitted(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_none())
            .map(|(j, _)| j)
            .collect()
    }

    pub fn validate(&self, space: &ModelSpace, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.pr.len() != space.k() || self.components.len() != space.k() {
            out.push(Violation {
                location: "pattern_mixture".into(),
                message: "factor tables do not match the model space".into(),
            });
            return out;
        }
        check_table(
            &self.pr,
            tol,
            |j| format!("p[r={}]", space.patterns().patterns()[j]),
            "p(r)",
            &mut out,
        );
        for (j, comp) in self.components.iter().enumerate() {
            let r = space.patterns().patterns()[j];
            match comp {
                Some(c) if c.0.len() != space.y_size() => out.push(Violation {
                    location: format!("p[· | r={r}]"),
                    message: "component does not cover 𝒴".into(),
                }),
                Some(c) => check_table(
                    &c.0,
                    tol,
                    |i| format!("p[y={} | r={r}]", space.format_outcome(&space.outcome_at(i))),
                    &format!("p[· | r={r}]"),
                    &mut out,
                ),
                None if self.pr[j] > 0.0 => out.push(Violation {
                    location: format!("p[· | r={r}]"),
                    message: "missing component for a pattern with positive probability".into(),
                }),
                None => {}
            }
        }
        out
    }
}

pub fn compose_selection(
    space: ModelSpace,
    sm: &SelectionModel,
    tol: f64,
) -> Result<FullDensity, DensityError> {
    let violations = sm.validate(&space, tol);
    if !violations.is_empty() {
        return Err(DensityError::Validation(violations));
    }
    let n = space.y_size();
    let table = (0..space.omega_size())
        .map(|i| {
            let (j, yi) = (i / n, i % n);
            sm.f.0[yi] * sm.mechanism(yi, j)
        })
        .collect();
    FullDensity::new(space, table, tol)
}

pub fn compose_pattern_mixture(
    space: ModelSpace,
    pm: &PatternMixture,
    tol: f64,
) -> Result<FullDensity, DensityError> {
    let violations = pm.validate(&space, tol);
    if !violations.is_empty() {
        return Err(DensityError::Validation(violations));
    }
    let n = space.y_size();
    let table = (0..space.omega_size())
        .map(|i| {
            let (j, yi) = (i / n, i % n);
            match &pm.components[j] {
                Some(c) if pm.pr[j] > 0.0 => pm.pr[j] * c.0[yi],
                _ => 0.0,
            }
        })
        .collect();
    FullDensity::new(space, table, tol)
}

/// `f(y) = Σ_r h(y, r)` and `g(r | y) = h(y, r) / f(y)`.
pub fn factor_selection(h: &FullDensity) -> Result<SelectionModel, DensityError> {
    let space = h.space();
    let k = space.k();
    let f = marginal_f(h);
    let mut g = Vec::with_capacity(space.y_size() * k);
    for (yi, &fy) in f.0.iter().enumerate() {
        if fy <= 0.0 {
            return Err(DensityError::ZeroMarginal(
                space.format_outcome(&space.outcome_at(yi)),
            ));
        }
        g.extend((0..k).map(|j| h.prob_at(yi, j) / fy));
    }
    Ok(SelectionModel { f, g, k })
}

/// `p(r) = Σ_y h(y, r)` and `p(y | r) = h(y, r) / p(r)`; components with
/// `p(r) = 0` are left out and listed by [`PatternMixture::omitted`].
pub fn factor_pattern_mixture(h: &FullDensity) -> PatternMixture {
    let space = h.space();
    let n = space.y_size();
    let pr: Vec<f64> = (0..space.k()).map(|j| h.pattern_mass(j)).collect();
    let components = pr
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            (p > 0.0).then(|| OutcomeDensity((0..n).map(|yi| h.prob_at(yi, j) / p).collect()))
        })
        .collect();
    PatternMixture { pr, components }
}

/// `f(y) = Σ_j h(y, r_j)`.
pub fn marginal_f(h: &FullDensity) -> OutcomeDensity {
    let space = h.space();
    OutcomeDensity(
        (0..space.y_size())
            .map(|yi| (0..space.k()).map(|j| h.prob_at(yi, j)).sum())
            .collect(),
    )
}

/// A density on `Ω_ob`, keyed by (pattern index, observed sub-vector).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedDensity(pub BTreeMap<ObPoint, f64>);

impl ObservedDensity {
    pub fn get(&self, key: &ObPoint) -> Option<f64> {
        self.0.get(key).copied()
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }
}

/// `h(y^{ob(r)}, r)`: the mass of each observed data event.
pub fn observed_data_density(h: &FullDensity) -> ObservedDensity {
    let space = h.space();
    let mut out = BTreeMap::new();
    for (j, r) in space.patterns().iter().enumerate() {
        for e in space.event_partition(r).expect("member pattern") {
            out.insert(
                ObPoint {
                    pattern_index: j,
                    r: *r,
                    observed: e.observed.clone(),
                },
                h.event_mass(&e),
            );
        }
    }
    ObservedDensity(out)
}

/// Where a conditional's arguments live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionalDomain {
    /// Values of the data projection `π_Y`: points of `𝒴`.
    #[serde(rename = "range-of-π_Y")]
    RangeOfProjection,
    /// Members of an observed data event: points of `Ω`.
    #[serde(rename = "event-in-Ω")]
    EventInOmega,
}

impl fmt::Display for ConditionalDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RangeOfProjection => "range-of-π_Y",
            Self::EventInOmega => "event-in-Ω",
        })
    }
}

/// `f⁽ᵀ⁾(y^{mt(r)} | y^{ot(r)})`: a distribution over outcomes in `𝒴`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalConditional {
    pub extraction: MissingnessPattern,
    pub given: SubVector,
    pub support: Vec<Outcome>,
    pub probs: Vec<f64>,
}

impl TemporalConditional {
    pub fn domain(&self) -> ConditionalDomain {
        ConditionalDomain::RangeOfProjection
    }

    /// Probability of the completion with temporally-missing part `mt`.
    pub fn value_at(&self, mt: &SubVector) -> Option<f64> {
        self.support
            .iter()
            .position(|y| mt.matches(y))
            .map(|i| self.probs[i])
    }

    pub fn mt_values(&self) -> Vec<SubVector> {
        self.support
            .iter()
            .map(|y| project_mt(y, &self.extraction).expect("same width"))
            .collect()
    }
}

/// A distribution over the members of an observed data event: `f⁽ᶠ⁾` or
/// `p(y^{mi(r)} | y^{ob(r)}, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventConditional {
    pub r: MissingnessPattern,
    pub observed: SubVector,
    pub members: Vec<FullPoint>,
    pub probs: Vec<f64>,
}

impl EventConditional {
    pub fn domain(&self) -> ConditionalDomain {
        ConditionalDomain::EventInOmega
    }

    pub fn value_at(&self, p: &FullPoint) -> Option<f64> {
        self.members
            .iter()
            .position(|m| m == p)
            .map(|i| self.probs[i])
    }
}

/// `f⁽ᵀ⁾`: conditions `f` on `y^{ot(r)} = given` over all of `𝒴`.
pub fn temporal_conditional(
    space: &ModelSpace,
    f: &OutcomeDensity,
    r: &MissingnessPattern,
    given: &SubVector,
) -> Result<TemporalConditional, DensityError> {
    if r.len() != space.d() {
        return Err(SpaceError::OutcomeLength {
            got: r.len(),
            expected: space.d(),
        }
        .into());
    }
    if given.coords != r.observed_coords() {
        return Err(SpaceError::OutcomeLength {
            got: given.len(),
            expected: r.observed_count(),
        }
        .into());
    }
    let support = space.completions(given);
    let weights: Vec<f64> = support.iter().map(|y| f.at(space, y)).collect();
    let mass: f64 = weights.iter().sum();
    if mass <= 0.0 {
        return Err(DensityError::UndefinedConditional(format!(
            "y^ot({r}) = {}",
            space.format_sub_vector(given)
        )));
    }
    Ok(TemporalConditional {
        extraction: *r,
        given: given.clone(),
        probs: weights.iter().map(|w| w / mass).collect(),
        support,
    })
}

/// `f⁽ᶠ⁾`: the marginal `f` restricted to the members of `e`, normalized.
pub fn formal_conditional(
    space: &ModelSpace,
    f: &OutcomeDensity,
    e: &ObservedDataEvent,
) -> Result<EventConditional, DensityError> {
    let weights: Vec<f64> = e.members.iter().map(|m| f.at(space, &m.y)).collect();
    normalize_over_event(space, e, weights)
}

/// `p(y^{mi(r)} | y^{ob(r)}, r) = h(y, r) / h(e)`.
pub fn missing_given_observed(
    h: &FullDensity,
    e: &ObservedDataEvent,
) -> Result<EventConditional, DensityError> {
    let weights: Vec<f64> = e.members.iter().map(|m| h.prob(m)).collect();
    normalize_over_event(h.space(), e, weights)
}

fn normalize_over_event(
    space: &ModelSpace,
    e: &ObservedDataEvent,
    weights: Vec<f64>,
) -> Result<EventConditional, DensityError> {
    let mass: f64 = weights.iter().sum();
    if mass <= 0.0 {
        return Err(DensityError::UndefinedConditional(space.format_event(e)));
    }
    Ok(EventConditional {
        r: e.r,
        observed: e.observed.clone(),
        members: e.members.clone(),
        probs: weights.iter().map(|w| w / mass).collect(),
    })
}

/// Maps an event member to the matching point of `f⁽ᵀ⁾`'s support: the
/// bijection `π_Y` restricted to the event.
pub fn temporal_key(p: &FullPoint, extraction: &MissingnessPattern) -> (SubVector, SubVector) {
    (
        project_ot(&p.y, extraction).expect("same width"),
        project_mt(&p.y, extraction).expect("same width"),
    )
}

/// Spread of `g(r | y*)` over the members of `e`.
pub fn mechanism_spread(space: &ModelSpace, g: &SelectionModel, e: &ObservedDataEvent) -> f64 {
    let j = match space.pattern_index(&e.r) {
        Ok(j) => j,
        Err(_) => return 0.0,
    };
    let values = e
        .members
        .iter()
        .map(|m| g.mechanism(space.outcome_index(&m.y), j));
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

/// MAR with respect to `e`: `g(r | y*)` is constant over the event.
pub fn is_mar_at(space: &ModelSpace, g: &SelectionModel, e: &ObservedDataEvent, tol: f64) -> bool {
    mechanism_spread(space, g, e) <= tol
}

/// A finite model family `ℳ`, each member tagged with an opaque label.
#[derive(Debug, Clone)]
pub struct ModelFamily {
    members: Vec<(String, FullDensity)>,
}

impl ModelFamily {
    pub fn new(members: Vec<(String, FullDensity)>) -> Result<Self, DensityError> {
        let Some((_, first)) = members.first() else {
            return Err(DensityError::Validation(vec![Violation {
                location: "family".into(),
                message: "model family is empty".into(),
            }]));
        };
        if let Some((label, _)) = members.iter().find(|(_, h)| h.space() != first.space()) {
            return Err(DensityError::Validation(vec![Violation {
                location: format!("family[{label}]"),
                message: "member does not share the family's model space".into(),
            }]));
        }
        Ok(Self { members })
    }

    pub fn singleton(h: FullDensity) -> Self {
        Self {
            members: vec![("h".into(), h)],
        }
    }

    pub fn members(&self) -> &[(String, FullDensity)] {
        &self.members
    }
}

/// Everywhere MAR: MAR at every observed data event, for every member.
pub fn is_mar_everywhere(fam: &ModelFamily, tol: f64) -> Result<bool, DensityError> {
    for (_, h) in fam.members() {
        let space = h.space();
        let g = factor_selection(h)?;
        if !space.all_events().iter().all(|e| is_mar_at(space, &g, e, tol)) {
            return Ok(false);
        }
    }
    Ok(true)
}
