//! Numerical verification of the density identities relating the selection
//! and pattern-mixture views of a model.
//!
//! Each check reports its maximum absolute deviation rather than a bare
//! boolean, plus witnesses for every point that exceeded the tolerance.

use std::fmt;

use serde::Serialize;

use crate::density::{
    factor_pattern_mixture, formal_conditional, marginal_f, mechanism_spread,
    missing_given_observed, observed_data_density, temporal_conditional, temporal_key,
    FullDensity, ObservedDensity,
};
use crate::pattern::MissingnessPattern;
use crate::space::{
    project_ot, reassemble, FullPoint, ModelSpace, ObservedDataEvent, SpaceError, SubVector,
};

/// Witnesses kept per report; deviations beyond this are still counted.
const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Inapplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub location: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub name: String,
    pub status: Status,
    pub max_abs_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub scope: String,
    pub status: Status,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub steps: Vec<StepReport>,
    pub witnesses: Vec<Witness>,
    /// Quantities reported for information only; they never affect `status`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<StepReport>,
}

impl IdentityReport {
    fn inapplicable(identity: &str, scope: String, tol: f64, reason: String) -> Self {
        Self {
            identity: identity.into(),
            scope,
            status: Status::Inapplicable,
            max_abs_deviation: 0.0,
            tolerance: tol,
            steps: vec![StepReport {
                name: "preconditions".into(),
                status: Status::Inapplicable,
                max_abs_deviation: 0.0,
                note: Some(reason),
            }],
            witnesses: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn step(&self, name: &str) -> Option<&StepReport> {
        self.steps.iter().find(|s| s.name == name)
    }
}

/// Accumulates comparisons for one report.
struct Checker {
    identity: String,
    scope: String,
    tol: f64,
    steps: Vec<StepReport>,
    witnesses: Vec<Witness>,
    diagnostics: Vec<StepReport>,
    current: Option<(String, f64, Option<String>)>,
}

impl Checker {
    fn new(identity: &str, scope: String, tol: f64) -> Self {
        Self {
            identity: identity.into(),
            scope,
            tol,
            steps: Vec::new(),
            witnesses: Vec::new(),
            diagnostics: Vec::new(),
            current: None,
        }
    }

    fn step(&mut self, name: &str) {
        self.finish_step();
        self.current = Some((name.into(), 0.0, None));
    }

    fn note(&mut self, note: impl Into<String>) {
        if let Some((_, _, n)) = &mut self.current {
            *n = Some(note.into());
        }
    }

    fn compare(&mut self, location: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        let dev = (lhs - rhs).abs();
        let (name, max, _) = self.current.as_mut().expect("step started");
        if dev.is_nan() || dev > *max {
            *max = if dev.is_nan() { f64::INFINITY } else { dev };
        }
        if (dev.is_nan() || dev > self.tol) && self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness {
                location: format!("{name}: {}", location()),
                lhs,
                rhs,
            });
        }
    }

    fn skip(&mut self, name: &str, reason: String) {
        self.finish_step();
        self.steps.push(StepReport {
            name: name.into(),
            status: Status::Inapplicable,
            max_abs_deviation: 0.0,
            note: Some(reason),
        });
    }

    fn diagnostic(&mut self, name: &str, deviation: f64, note: &str) {
        self.diagnostics.push(StepReport {
            name: name.into(),
            status: if deviation <= self.tol {
                Status::Pass
            } else {
                Status::Fail
            },
            max_abs_deviation: deviation,
            note: Some(note.into()),
        });
    }

    fn finish_step(&mut self) {
        if let Some((name, max, note)) = self.current.take() {
            self.steps.push(StepReport {
                name,
                status: if max <= self.tol {
                    Status::Pass
                } else {
                    Status::Fail
                },
                max_abs_deviation: max,
                note,
            });
        }
    }

    fn finish(mut self) -> IdentityReport {
        self.finish_step();
        let evaluated = self.steps.iter().filter(|s| s.status != Status::Inapplicable);
        let max = evaluated.clone().map(|s| s.max_abs_deviation).fold(0.0, f64::max);
        let status = if evaluated.clone().count() == 0 {
            Status::Inapplicable
        } else if max <= self.tol {
            Status::Pass
        } else {
            Status::Fail
        };
        IdentityReport {
            identity: self.identity,
            scope: self.scope,
            status,
            max_abs_deviation: max,
            tolerance: self.tol,
            steps: self.steps,
            witnesses: self.witnesses,
            diagnostics: self.diagnostics,
        }
    }
}

/// Computes the observed-data density four ways and checks they agree on
/// every point of `Ω_ob`:
///
/// * raw sums of `h` over each observed data event;
/// * the selection-model integral of `f(y) g(r | y)` over `y^{mi(r)}`;
/// * restricting to `Ω_j` and marginalizing: `p(r_j) p(y^{ob(r_j)} | r_j)`;
/// * marginalizing over all of `Ω` first, giving `k` tables
///   `h(y^{ot(r_j)}, r)` on `𝒴^{ot(r_j)} × ℛ`, then restricting table `j`
///   to `Ω_j`. Only that slice of each table is compared.
pub fn verify_obs_density_paths(h: &FullDensity, tol: f64) -> IdentityReport {
    let space = h.space();
    let mut c = Checker::new("observed-density-paths", "Ω_ob".into(), tol);
    let event_sums = observed_data_density(h);

    c.step("total-mass");
    c.compare(|| "Σ over Ω_ob".into(), event_sums.total(), 1.0);

    // selection-model integral, with g(r|y) = h(y,r)/f(y) wherever f(y) > 0
    c.step("selection-integral");
    let f = marginal_f(h);
    for (key, &want) in &event_sums.0 {
        let r = key.r;
        let mi = r.missing_coords();
        let got: f64 = space
            .assignments(&mi)
            .into_iter()
            .map(|codes| {
                let y = reassemble(&key.observed, &SubVector {
                    coords: mi.clone(),
                    codes,
                })
                .expect("complementary coordinates");
                let fy = f.at(space, &y);
                if fy > 0.0 {
                    fy * (h.prob(&FullPoint { y, r }) / fy)
                } else {
                    0.0
                }
            })
            .sum();
        c.compare(|| obs_location(space, &key.observed, &r), got, want);
    }

    let pm = factor_pattern_mixture(h);
    c.step("restrict-then-marginalize");
    for (key, &want) in &event_sums.0 {
        let j = key.pattern_index;
        let got = match &pm.components[j] {
            Some(comp) => pm.pr[j] * comp.marginal(space, &key.observed),
            None => 0.0,
        };
        c.compare(|| obs_location(space, &key.observed, &key.r), got, want);
    }

    c.step("marginalize-then-restrict");
    let mut omitted = 0;
    for (j, rj) in space.patterns().iter().enumerate() {
        let table = temporal_marginal_table(space, &pm.pr, &pm.components, rj);
        let total: f64 = table.iter().map(|(_, _, v)| v).sum();
        c.compare(|| format!("Σ h(y^ot({rj}), r)"), total, 1.0);
        for (ot, i, v) in &table {
            if *i != j {
                omitted += 1;
                continue;
            }
            let key = crate::space::ObPoint {
                pattern_index: j,
                r: *rj,
                observed: ot.clone(),
            };
            let want = event_sums.get(&key).unwrap_or(f64::NAN);
            c.compare(|| obs_location(space, ot, rj), *v, want);
        }
    }
    c.note(format!(
        "{omitted} entries of the intermediate tables lie outside their own Ω_j and are not compared"
    ));
    c.finish()
}

/// `h(y^{ot(r_j)}, r_i) = p(r_i) p(y^{ot(r_j)} | r_i)` for every value of the
/// `r_j`-observed coordinates and every pattern `r_i`.
fn temporal_marginal_table(
    space: &ModelSpace,
    pr: &[f64],
    components: &[Option<crate::density::OutcomeDensity>],
    extraction: &MissingnessPattern,
) -> Vec<(SubVector, usize, f64)> {
    let coords = extraction.observed_coords();
    let mut out = Vec::new();
    for codes in space.assignments(&coords) {
        let ot = SubVector {
            coords: coords.clone(),
            codes,
        };
        for (i, comp) in components.iter().enumerate() {
            let v = comp
                .as_ref()
                .map_or(0.0, |c| pr[i] * c.marginal(space, &ot));
            out.push((ot.clone(), i, v));
        }
    }
    out
}

fn obs_location(space: &ModelSpace, ob: &SubVector, r: &MissingnessPattern) -> String {
    format!("{} | r={r}", space.format_sub_vector(ob))
}

fn member_location(space: &ModelSpace, m: &FullPoint) -> String {
    format!("y={} r={}", space.format_outcome(&m.y), m.r)
}

/// Per-member factors of an event shared by the MAR checks.
struct EventFactors {
    mass: f64,
    pattern_prob: f64,
    f: Vec<f64>,
    g: Vec<f64>,
    joint: Vec<f64>,
}

fn event_factors(h: &FullDensity, e: &ObservedDataEvent) -> Result<EventFactors, String> {
    let space = h.space();
    let j = space
        .pattern_index(&e.r)
        .map_err(|err| err.to_string())?;
    let marginal = marginal_f(h);
    let joint: Vec<f64> = e.members.iter().map(|m| h.prob(m)).collect();
    let mass: f64 = joint.iter().sum();
    if mass <= 0.0 {
        return Err("observed data event has zero probability".into());
    }
    let f: Vec<f64> = e.members.iter().map(|m| marginal.at(space, &m.y)).collect();
    if let Some(i) = f.iter().position(|&v| v <= 0.0) {
        return Err(format!(
            "f(y) = 0 at y={}: mechanism undefined",
            space.format_outcome(&e.members[i].y)
        ));
    }
    let g = joint.iter().zip(&f).map(|(hv, fv)| hv / fv).collect();
    Ok(EventFactors {
        mass,
        pattern_prob: h.pattern_mass(j),
        f,
        g,
        joint,
    })
}

/// Checks, on one observed data event, the chain from the two joint
/// factorizations to the MAR identity
/// `p(y^{mi(r)} | y^{ob(r)}, r) = f⁽ᶠ⁾(y^{mi(r)} | y^{ob(r)})`.
///
/// Steps `observed-component` and `missing-given-observed` are only implied
/// when the mechanism is MAR on the event; they are evaluated regardless so
/// that MNAR deviations are visible.
pub fn verify_mar_identity(h: &FullDensity, e: &ObservedDataEvent, tol: f64) -> IdentityReport {
    const NAME: &str = "mar-identity";
    let space = h.space();
    let scope = space.format_event(e);
    let ef = match event_factors(h, e) {
        Ok(ef) => ef,
        Err(reason) => return IdentityReport::inapplicable(NAME, scope, tol, reason),
    };
    let mut c = Checker::new(NAME, scope, tol);
    let pr = ef.pattern_prob;

    c.step("joint-factorizations");
    for (i, m) in e.members.iter().enumerate() {
        let p_y_given_r = ef.joint[i] / pr;
        c.compare(|| member_location(space, m), pr * p_y_given_r, ef.f[i] * ef.g[i]);
    }

    // p(mi | ob, r) = f(mi | ob) f(ob) g(r|y) / (p(r) p(ob | r))
    let f_ob: f64 = ef.f.iter().sum();
    let p_ob_given_r = ef.mass / pr;
    c.step("conditional-rearrangement");
    for (i, m) in e.members.iter().enumerate() {
        let lhs = ef.joint[i] / ef.mass;
        let rhs = (ef.f[i] / f_ob) * f_ob * ef.g[i] / (pr * p_ob_given_r);
        c.compare(|| member_location(space, m), lhs, rhs);
    }

    let mar = ef.g.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - ef.g.iter().fold(f64::INFINITY, |a, &b| a.min(b))
        <= tol;
    let not_mar = "mechanism is not MAR on this event; step not implied";

    c.step("observed-component");
    for (i, m) in e.members.iter().enumerate() {
        c.compare(|| member_location(space, m), p_ob_given_r, f_ob * ef.g[i] / pr);
    }
    if !mar {
        c.note(not_mar);
    }

    c.step("missing-given-observed");
    let marginal = marginal_f(h);
    match (
        missing_given_observed(h, e),
        formal_conditional(space, &marginal, e),
    ) {
        (Ok(lhs), Ok(rhs)) => {
            for (i, m) in e.members.iter().enumerate() {
                c.compare(|| member_location(space, m), lhs.probs[i], rhs.probs[i]);
            }
            if !mar {
                c.note(not_mar);
            }
        }
        (Err(err), _) | (_, Err(err)) => c.skip("missing-given-observed", err.to_string()),
    }
    c.finish()
}

/// Relation of one mixture component to the extraction pattern `r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentClass {
    pub pattern: MissingnessPattern,
    /// `r_j ≤ₚ r`: every `y^{mt(r)}` entry is formally missing under `r_j`.
    pub mt_all_formally_missing: bool,
    /// `r ≤ₚ r_j`: every `y^{ot(r)}` entry is formally observed under `r_j`.
    pub ot_all_formally_observed: bool,
    pub fully_consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub extraction: MissingnessPattern,
    pub components: Vec<ComponentClass>,
    pub fully_consistent_count: usize,
    /// Some component labels part of `y^{ot(r)}` formally missing.
    pub ot_mixed: bool,
    /// Some component labels part of `y^{mt(r)}` formally observed.
    pub mt_mixed: bool,
}

impl Classification {
    /// Exactly one consistent component, and with two or more patterns at
    /// least one of `y^{ot(r)}`, `y^{mt(r)}` mixes formally observed and
    /// formally missing data.
    pub fn holds(&self) -> bool {
        self.fully_consistent_count == 1
            && (self.components.len() < 2 || self.ot_mixed || self.mt_mixed)
    }
}

/// Classifies each pattern-mixture component against extraction pattern `r`.
pub fn classify_mixture_components(
    space: &ModelSpace,
    r: &MissingnessPattern,
) -> Result<Classification, SpaceError> {
    space.pattern_index(r)?;
    let components: Vec<ComponentClass> = space
        .patterns()
        .iter()
        .map(|rj| {
            let mt = rj.leq_p(r).expect("same width");
            let ot = r.leq_p(rj).expect("same width");
            ComponentClass {
                pattern: *rj,
                mt_all_formally_missing: mt,
                ot_all_formally_observed: ot,
                fully_consistent: rj == r,
            }
        })
        .collect();
    Ok(Classification {
        extraction: *r,
        fully_consistent_count: components.iter().filter(|c| c.fully_consistent).count(),
        ot_mixed: components.iter().any(|c| !c.ot_all_formally_observed),
        mt_mixed: components.iter().any(|c| !c.mt_all_formally_missing),
        components,
    })
}

/// Checks the decomposition of `f⁽ᵀ⁾(y^{mt(r)} | y^{ot(r)})` into the
/// event's own component and the other pattern-mixture components, and the
/// resulting expression of `p(y^{mi(r)} | y^{ob(r)}, r)` with the `r`
/// component removed.
///
/// Inside every foreign component the temporal conditional uses the fixed
/// extraction pattern `r`. The mixture weights are the component
/// probabilities conditional on `y^{ot(r)}`; the same expression with
/// unconditional weights `p(r_j)` is reported as a diagnostic.
pub fn verify_marginal_removed(
    h: &FullDensity,
    e: &ObservedDataEvent,
    tol: f64,
) -> IdentityReport {
    const NAME: &str = "marginal-removed";
    let space = h.space();
    let scope = space.format_event(e);
    let ef = match event_factors(h, e) {
        Ok(ef) => ef,
        Err(reason) => return IdentityReport::inapplicable(NAME, scope, tol, reason),
    };
    let spread = ef.g.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - ef.g.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if spread > tol {
        return IdentityReport::inapplicable(
            NAME,
            scope,
            tol,
            format!("mechanism is not MAR on this event (spread {spread:.3e})"),
        );
    }
    if ef.pattern_prob >= 1.0 - tol {
        return IdentityReport::inapplicable(NAME, scope, tol, "p(r) = 1".into());
    }

    let r = e.r;
    let own = space.pattern_index(&r).expect("checked");
    // virtual relabeling: the event's pattern goes last
    let order: Vec<usize> = (0..space.k()).filter(|&j| j != own).chain([own]).collect();
    let f = marginal_f(h);
    let f_ot: f64 = ef.f.iter().sum();
    let p_mi = missing_given_observed(h, e).expect("positive mass");
    let f_formal = formal_conditional(space, &f, e).expect("positive mass");
    let f_temporal = temporal_conditional(space, &f, &r, &e.observed).expect("positive mass");

    let mut c = Checker::new(NAME, scope, tol);
    c.step("temporal-formal-values");
    for (i, m) in e.members.iter().enumerate() {
        let (_, mt) = temporal_key(m, &r);
        let ft = f_temporal.value_at(&mt).unwrap_or(f64::NAN);
        c.compare(|| member_location(space, m), ft, f_formal.probs[i]);
        c.compare(|| member_location(space, m), f_formal.probs[i], p_mi.probs[i]);
    }
    c.note(format!(
        "values compared across domains {} and {}",
        f_temporal.domain(),
        f_formal.domain()
    ));

    // Per foreign component: slice mass h(y^{ot(r)}, r_j) and the temporal
    // conditional p(y^{mt(r)} | y^{ot(r)}, r_j) at each member's y.
    let support = &f_temporal.support;
    let foreign: Vec<(usize, f64, Vec<f64>)> = order[..order.len() - 1]
        .iter()
        .map(|&j| {
            let rj = space.patterns().patterns()[j];
            let joint: Vec<f64> = support
                .iter()
                .map(|y| h.prob(&FullPoint { y: y.clone(), r: rj }))
                .collect();
            let slice: f64 = joint.iter().sum();
            let cond = joint
                .iter()
                .map(|v| if slice > 0.0 { v / slice } else { 0.0 })
                .collect();
            (j, slice, cond)
        })
        .collect();
    let member_pos: Vec<usize> = e
        .members
        .iter()
        .map(|m| support.iter().position(|y| *y == m.y).expect("same completions"))
        .collect();

    let own_weight = ef.mass / f_ot;
    c.step("conditioned-mixture");
    for (i, m) in e.members.iter().enumerate() {
        let rhs = own_weight * p_mi.probs[i]
            + foreign
                .iter()
                .map(|(_, slice, cond)| (slice / f_ot) * cond[member_pos[i]])
                .sum::<f64>();
        c.compare(|| member_location(space, m), f_temporal.probs[member_pos[i]], rhs);
    }

    if own_weight >= 1.0 - tol {
        c.skip(
            "component-removed",
            "p(r | y^ot(r)) = 1: no other component has mass on this slice".into(),
        );
    } else {
        c.step("component-removed");
        for (i, m) in e.members.iter().enumerate() {
            let rhs = foreign
                .iter()
                .map(|(_, slice, cond)| (slice / f_ot) * cond[member_pos[i]])
                .sum::<f64>()
                / (1.0 - own_weight);
            c.compare(|| member_location(space, m), p_mi.probs[i], rhs);
        }
    }
    c.finish_step();

    let pr = ef.pattern_prob;
    let literal = e
        .members
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let rhs = foreign
                .iter()
                .map(|(j, _, cond)| h.pattern_mass(*j) * cond[member_pos[i]])
                .sum::<f64>()
                / (1.0 - pr);
            (p_mi.probs[i] - rhs).abs()
        })
        .fold(0.0, f64::max);
    c.diagnostic(
        "unconditional-weights",
        literal,
        "same expression weighted by p(r_j) instead of p(r_j | y^ot(r)); exact only when the weights coincide",
    );
    let labels: Vec<String> = order
        .iter()
        .map(|&j| space.patterns().patterns()[j].to_string())
        .collect();
    c.diagnostics.push(StepReport {
        name: "relabeling".into(),
        status: Status::Pass,
        max_abs_deviation: 0.0,
        note: Some(format!("component order {}", labels.join(", "))),
    });
    c.finish()
}

/// The event with the largest deviation between `p(y^{mi} | y^{ob}, r)` and
/// `f⁽ᶠ⁾`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarViolation {
    pub event: ObservedDataEvent,
    pub deviation: f64,
    pub mechanism_spread: f64,
}

/// Scans every positive-mass observed data event and returns the worst
/// departure from the MAR identity, or `None` when none exceeds `tol`.
pub fn find_mar_violation(h: &FullDensity, tol: f64) -> Option<MarViolation> {
    let space = h.space();
    let f = marginal_f(h);
    let mut worst: Option<MarViolation> = None;
    for e in space.all_events() {
        let (Ok(lhs), Ok(rhs)) = (missing_given_observed(h, &e), formal_conditional(space, &f, &e))
        else {
            continue;
        };
        let dev = lhs
            .probs
            .iter()
            .zip(&rhs.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > tol && worst.as_ref().is_none_or(|w| dev > w.deviation) {
            let spread = crate::density::factor_selection(h)
                .map(|g| mechanism_spread(space, &g, &e))
                .unwrap_or(f64::NAN);
            worst = Some(MarViolation {
                event: e,
                deviation: dev,
                mechanism_spread: spread,
            });
        }
    }
    worst
}

/// All verifications for one model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationBundle {
    pub observed_density: IdentityReport,
    pub mar_identity: Vec<IdentityReport>,
    pub marginal_removed: Vec<IdentityReport>,
    pub classification: Vec<Classification>,
}

impl VerificationBundle {
    pub fn reports(&self) -> impl Iterator<Item = &IdentityReport> {
        std::iter::once(&self.observed_density)
            .chain(&self.mar_identity)
            .chain(&self.marginal_removed)
    }

    pub fn passed(&self) -> bool {
        self.reports().all(IdentityReport::passed)
            && self.classification.iter().all(Classification::holds)
    }
}

pub fn verify_model(h: &FullDensity, tol: f64) -> VerificationBundle {
    let space = h.space();
    let events = space.all_events();
    VerificationBundle {
        observed_density: verify_obs_density_paths(h, tol),
        mar_identity: events.iter().map(|e| verify_mar_identity(h, e, tol)).collect(),
        marginal_removed: events
            .iter()
            .map(|e| verify_marginal_removed(h, e, tol))
            .collect(),
        classification: space
            .patterns()
            .iter()
            .map(|r| classify_mixture_components(space, r).expect("member pattern"))
            .collect(),
    }
}

/// The observed-data density recomputed from `ot`-projections of every
/// outcome, independent of event enumeration.
pub fn observed_density_by_projection(h: &FullDensity) -> ObservedDensity {
    let space = h.space();
    let mut out = std::collections::BTreeMap::new();
    for p in space.enumerate_omega() {
        let j = space.pattern_index(&p.r).expect("member");
        let key = crate::space::ObPoint {
            pattern_index: j,
            r: p.r,
            observed: project_ot(&p.y, &p.r).expect("same width"),
        };
        *out.entry(key).or_insert(0.0) += h.prob(&p);
    }
    ObservedDensity(out)
}
