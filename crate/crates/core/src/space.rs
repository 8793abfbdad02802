//! Finite data domains, the full sample space `Ω = 𝒴 × ℛ`, the four
//! projection families and observed-data events.
//!
//! Outcomes are stored as value codes (indices into each coordinate's
//! domain). Canonical order everywhere is pattern-major, then lexicographic
//! in `y` with coordinate 0 most significant.
//!
//! `ob`/`mi` projections take a [`FullPoint`] only: they split coordinates
//! by the point's own pattern (formal missingness). `ot`/`mt` take an
//! outcome plus an arbitrary extraction pattern (temporal missingness).

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::pattern::{MissingnessPattern, PatternError, PatternSet, DEFAULT_MAX_COORDINATES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("domain of variable {0:?} is empty")]
    EmptyDomain(String),
    #[error("domain of variable {name:?} repeats value {value:?}")]
    DuplicateValue { name: String, value: String },
    #[error("{d} coordinates exceeds the configured cap of {cap}")]
    TooManyCoordinates { d: usize, cap: usize },
    #[error("patterns have length {patterns} but there are {d} variables")]
    PatternWidth { patterns: usize, d: usize },
    #[error("pattern {0} is not a member of the pattern set")]
    UnknownPattern(MissingnessPattern),
    #[error("outcome has {got} coordinates, expected {expected}")]
    OutcomeLength { got: usize, expected: usize },
    #[error("value code {code} out of range for coordinate {coord}")]
    ValueOutOfDomain { coord: usize, code: usize },
    #[error("value {value:?} is not in the domain of variable {name:?}")]
    UnknownValue { name: String, value: String },
    #[error("sub-vectors do not partition the coordinates")]
    Reassembly,
}

/// Admissible values for one coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableDomain {
    pub name: String,
    pub values: Vec<String>,
}

impl VariableDomain {
    pub fn new(name: impl Into<String>, values: Vec<String>) -> Result<Self, SpaceError> {
        let name = name.into();
        if values.is_empty() {
            return Err(SpaceError::EmptyDomain(name));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(SpaceError::DuplicateValue {
                    name,
                    value: v.clone(),
                });
            }
        }
        Ok(Self { name, values })
    }

    /// A domain with values `"0"`, `"1"`, …, `size-1`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self, SpaceError> {
        Self::new(name, (0..size).map(|v| v.to_string()).collect())
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn code_of(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// A data vector `y ∈ 𝒴`, as value codes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Outcome(pub Vec<usize>);

impl Outcome {
    pub fn codes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<usize>> for Outcome {
    fn from(v: Vec<usize>) -> Self {
        Outcome(v)
    }
}

/// A point `(y, r)` of `Ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FullPoint {
    pub y: Outcome,
    pub r: MissingnessPattern,
}

impl FullPoint {
    pub fn new(y: impl Into<Outcome>, r: MissingnessPattern) -> Self {
        Self { y: y.into(), r }
    }
}

/// Selected coordinates of an outcome. The source coordinate indices travel
/// with the values so that sub-vectors can be put back together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SubVector {
    pub coords: Vec<usize>,
    pub codes: Vec<usize>,
}

impl SubVector {
    pub fn empty() -> Self {
        Self {
            coords: Vec::new(),
            codes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    fn extract(y: &Outcome, coords: Vec<usize>) -> Self {
        let codes = coords.iter().map(|&c| y.0[c]).collect();
        Self { coords, codes }
    }

    /// True when `y` agrees with this sub-vector on its coordinates.
    pub fn matches(&self, y: &Outcome) -> bool {
        self.coords
            .iter()
            .zip(&self.codes)
            .all(|(&c, &v)| y.0.get(c) == Some(&v))
    }
}

/// `y^{ob(r)}` for a full point, using the point's own pattern.
pub fn project_ob(p: &FullPoint) -> SubVector {
    SubVector::extract(&p.y, p.r.observed_coords())
}

/// `y^{mi(r)}` for a full point, using the point's own pattern.
pub fn project_mi(p: &FullPoint) -> SubVector {
    SubVector::extract(&p.y, p.r.missing_coords())
}

/// `y^{ot(r)}`: the coordinates `r` marks observed, for any outcome.
pub fn project_ot(y: &Outcome, r: &MissingnessPattern) -> Result<SubVector, SpaceError> {
    check_outcome_len(y, r)?;
    Ok(SubVector::extract(y, r.observed_coords()))
}

/// `y^{mt(r)}`: the coordinates `r` marks missing, for any outcome.
pub fn project_mt(y: &Outcome, r: &MissingnessPattern) -> Result<SubVector, SpaceError> {
    check_outcome_len(y, r)?;
    Ok(SubVector::extract(y, r.missing_coords()))
}

fn check_outcome_len(y: &Outcome, r: &MissingnessPattern) -> Result<(), SpaceError> {
    if y.len() != r.len() {
        return Err(SpaceError::OutcomeLength {
            got: y.len(),
            expected: r.len(),
        });
    }
    Ok(())
}

/// Inverse of splitting `y` into two complementary sub-vectors.
pub fn reassemble(a: &SubVector, b: &SubVector) -> Result<Outcome, SpaceError> {
    let d = a.len() + b.len();
    let mut out = vec![None; d];
    for (&c, &v) in a.coords.iter().zip(&a.codes).chain(b.coords.iter().zip(&b.codes)) {
        match out.get_mut(c) {
            Some(slot @ None) => *slot = Some(v),
            _ => return Err(SpaceError::Reassembly),
        }
    }
    out.into_iter()
        .collect::<Option<Vec<_>>>()
        .map(Outcome)
        .ok_or(SpaceError::Reassembly)
}

/// The observed data event `Ω_{(y,r)}`: every `(y*, r)` whose observed
/// coordinates under `r` equal `observed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObservedDataEvent {
    pub observed: SubVector,
    pub r: MissingnessPattern,
    pub members: Vec<FullPoint>,
}

impl ObservedDataEvent {
    pub fn contains(&self, p: &FullPoint) -> bool {
        p.r == self.r && self.observed.matches(&p.y)
    }
}

/// A point of `Ω_ob`, keyed by pattern index and observed sub-vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ObPoint {
    pub pattern_index: usize,
    pub r: MissingnessPattern,
    pub observed: SubVector,
}

/// Variable domains plus a pattern set: the space `Ω = 𝒴 × ℛ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelSpace {
    domains: Vec<VariableDomain>,
    patterns: PatternSet,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl ModelSpace {
    pub fn new(domains: Vec<VariableDomain>, patterns: PatternSet) -> Result<Self, SpaceError> {
        Self::with_cap(domains, patterns, DEFAULT_MAX_COORDINATES)
    }

    pub fn with_cap(
        domains: Vec<VariableDomain>,
        patterns: PatternSet,
        max_coordinates: usize,
    ) -> Result<Self, SpaceError> {
        let d = domains.len();
        if d > max_coordinates {
            return Err(SpaceError::TooManyCoordinates {
                d,
                cap: max_coordinates,
            });
        }
        if patterns.width() != d {
            return Err(SpaceError::PatternWidth {
                patterns: patterns.width(),
                d,
            });
        }
        let mut strides = vec![1; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * domains[i + 1].size();
        }
        Ok(Self {
            domains,
            patterns,
            strides,
        })
    }

    /// Binary variables `y1 … yd` over the given patterns.
    pub fn binary(d: usize, patterns: PatternSet) -> Result<Self, SpaceError> {
        let domains = (1..=d)
            .map(|i| VariableDomain::indexed(format!("y{i}"), 2))
            .collect::<Result<_, _>>()?;
        Self::new(domains, patterns)
    }

    pub fn d(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[VariableDomain] {
        &self.domains
    }

    pub fn patterns(&self) -> &PatternSet {
        &self.patterns
    }

    pub fn k(&self) -> usize {
        self.patterns.k()
    }

    /// `|𝒴|`.
    pub fn y_size(&self) -> usize {
        self.domains.iter().map(VariableDomain::size).product()
    }

    /// `|Ω| = |𝒴|·k`.
    pub fn omega_size(&self) -> usize {
        self.y_size() * self.k()
    }

    pub fn pattern_index(&self, r: &MissingnessPattern) -> Result<usize, SpaceError> {
        self.patterns
            .index_of(r)
            .ok_or(SpaceError::UnknownPattern(*r))
    }

    pub fn check_outcome(&self, y: &Outcome) -> Result<(), SpaceError> {
        if y.len() != self.d() {
            return Err(SpaceError::OutcomeLength {
                got: y.len(),
                expected: self.d(),
            });
        }
        for (coord, (&code, dom)) in y.0.iter().zip(&self.domains).enumerate() {
            if code >= dom.size() {
                return Err(SpaceError::ValueOutOfDomain { coord, code });
            }
        }
        Ok(())
    }

    pub fn check_point(&self, p: &FullPoint) -> Result<(), SpaceError> {
        self.check_outcome(&p.y)?;
        self.pattern_index(&p.r).map(|_| ())
    }

    /// Position of `y` in canonical order. Assumes `y` is valid.
    pub fn outcome_index(&self, y: &Outcome) -> usize {
        y.0.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn outcome_at(&self, mut index: usize) -> Outcome {
        Outcome(
            self.strides
                .iter()
                .map(|s| {
                    let c = index / s;
                    index %= s;
                    c
                })
                .collect(),
        )
    }

    /// Position of `(y, r)` in canonical order, or `None` if `r ∉ ℛ`.
    pub fn point_index(&self, p: &FullPoint) -> Option<usize> {
        let j = self.patterns.index_of(&p.r)?;
        Some(j * self.y_size() + self.outcome_index(&p.y))
    }

    pub fn point_at(&self, index: usize) -> FullPoint {
        let n = self.y_size();
        FullPoint {
            y: self.outcome_at(index % n),
            r: self.patterns.patterns()[index / n],
        }
    }

    /// Every `y ∈ 𝒴` in lexicographic order.
    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        (0..self.y_size()).map(|i| self.outcome_at(i))
    }

    /// Every `(y, r) ∈ Ω` exactly once, pattern-major.
    pub fn enumerate_omega(&self) -> impl Iterator<Item = FullPoint> + '_ {
        (0..self.omega_size()).map(|i| self.point_at(i))
    }

    /// Every point of `Ω_ob = ⋃_j 𝒴^{ot(r_j)} × {r_j}` exactly once.
    pub fn enumerate_omega_ob(&self) -> Vec<ObPoint> {
        self.patterns
            .iter()
            .enumerate()
            .flat_map(|(j, r)| {
                let coords = r.observed_coords();
                self.assignments(&coords)
                    .into_iter()
                    .map(move |codes| ObPoint {
                        pattern_index: j,
                        r: *r,
                        observed: SubVector {
                            coords: coords.clone(),
                            codes,
                        },
                    })
            })
            .collect()
    }

    /// All value assignments to `coords`, lexicographic with the first
    /// coordinate most significant.
    pub fn assignments(&self, coords: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(coords.len())];
        for &c in coords {
            let size = self.domains[c].size();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..size).map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Outcomes `y` with `y^{ot(r)} = given`, in canonical order: the image
    /// under `π_Y` of the corresponding observed data event.
    pub fn completions(&self, given: &SubVector) -> Vec<Outcome> {
        let free: Vec<usize> = (0..self.d())
            .filter(|c| !given.coords.contains(c))
            .collect();
        self.assignments(&free)
            .into_iter()
            .map(|codes| {
                reassemble(given, &SubVector {
                    coords: free.clone(),
                    codes,
                })
                .expect("complementary coordinates")
            })
            .collect()
    }

    fn event_from(&self, observed: SubVector, r: MissingnessPattern) -> ObservedDataEvent {
        let members = self
            .completions(&observed)
            .into_iter()
            .map(|y| FullPoint { y, r })
            .collect();
        ObservedDataEvent {
            observed,
            r,
            members,
        }
    }

    /// `Ω_{(y,r)}` for a valid full point.
    pub fn observed_event(&self, p: &FullPoint) -> Result<ObservedDataEvent, SpaceError> {
        self.check_point(p)?;
        Ok(self.event_from(project_ob(p), p.r))
    }

    /// The event of `Ω_ob` point `(observed, r)`.
    pub fn event_for(
        &self,
        r: &MissingnessPattern,
        observed: &SubVector,
    ) -> Result<ObservedDataEvent, SpaceError> {
        self.pattern_index(r)?;
        if observed.coords != r.observed_coords() {
            return Err(SpaceError::OutcomeLength {
                got: observed.len(),
                expected: r.observed_count(),
            });
        }
        for (&c, &v) in observed.coords.iter().zip(&observed.codes) {
            if v >= self.domains[c].size() {
                return Err(SpaceError::ValueOutOfDomain { coord: c, code: v });
            }
        }
        Ok(self.event_from(observed.clone(), *r))
    }

    /// The observed data events partitioning `Ω_r`, in canonical order.
    pub fn event_partition(
        &self,
        r: &MissingnessPattern,
    ) -> Result<Vec<ObservedDataEvent>, SpaceError> {
        self.pattern_index(r)?;
        let coords = r.observed_coords();
        Ok(self
            .assignments(&coords)
            .into_iter()
            .map(|codes| {
                self.event_from(
                    SubVector {
                        coords: coords.clone(),
                        codes,
                    },
                    *r,
                )
            })
            .collect())
    }

    /// Every observed data event of every pattern, pattern-major.
    pub fn all_events(&self) -> Vec<ObservedDataEvent> {
        self.patterns
            .iter()
            .flat_map(|r| self.event_partition(r).expect("member pattern"))
            .collect()
    }

    pub fn value_label(&self, coord: usize, code: usize) -> &str {
        &self.domains[coord].values[code]
    }

    pub fn outcome_labels(&self, y: &Outcome) -> Vec<String> {
        y.0.iter()
            .enumerate()
            .map(|(c, &v)| self.value_label(c, v).to_string())
            .collect()
    }

    /// Renders a sub-vector as `name=value` pairs, e.g. `(y1=0)`.
    pub fn format_sub_vector(&self, s: &SubVector) -> String {
        let parts: Vec<String> = s
            .coords
            .iter()
            .zip(&s.codes)
            .map(|(&c, &v)| format!("{}={}", self.domains[c].name, self.value_label(c, v)))
            .collect();
        format!("({})", parts.join(", "))
    }

    pub fn format_outcome(&self, y: &Outcome) -> String {
        format!("({})", self.outcome_labels(y).join(","))
    }

    pub fn format_event(&self, e: &ObservedDataEvent) -> String {
        format!("{} | r={}", self.format_sub_vector(&e.observed), e.r)
    }

    /// Parses value labels into an outcome.
    pub fn parse_outcome<S: AsRef<str>>(&self, labels: &[S]) -> Result<Outcome, SpaceError> {
        if labels.len() != self.d() {
            return Err(SpaceError::OutcomeLength {
                got: labels.len(),
                expected: self.d(),
            });
        }
        labels
            .iter()
            .zip(&self.domains)
            .map(|(l, dom)| {
                dom.code_of(l.as_ref()).ok_or_else(|| SpaceError::UnknownValue {
                    name: dom.name.clone(),
                    value: l.as_ref().to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Outcome)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn p(s: &str) -> MissingnessPattern {
        s.parse().unwrap()
    }

    fn space(d: usize, pats: &[&str]) -> ModelSpace {
        ModelSpace::binary(d, PatternSet::new(pats.iter().map(|s| p(s)).collect()).unwrap()).unwrap()
    }

    fn pt(y: &[usize], r: &str) -> FullPoint {
        FullPoint::new(y.to_vec(), p(r))
    }

    #[test]
    fn formal_projections() {
        let a = pt(&[5, 7], "10");
        assert_eq!(project_ob(&a).codes, vec![5]);
        assert_eq!(project_mi(&a).codes, vec![7]);
        let full = pt(&[1, 2, 3], "111");
        assert_eq!(project_ob(&full).codes, vec![1, 2, 3]);
        assert!(project_mi(&full).is_empty());
        assert!(project_ob(&pt(&[1, 2], "00")).is_empty());
    }

    #[test]
    fn reassembly_recovers_y() {
        let s = ModelSpace::new(
            vec![
                VariableDomain::indexed("a", 3).unwrap(),
                VariableDomain::indexed("b", 2).unwrap(),
                VariableDomain::indexed("c", 2).unwrap(),
            ],
            PatternSet::full(3),
        )
        .unwrap();
        for point in s.enumerate_omega() {
            let y = reassemble(&project_ob(&point), &project_mi(&point)).unwrap();
            assert_eq!(y, point.y);
            assert_eq!(project_ob(&point), project_ot(&point.y, &point.r).unwrap());
            assert_eq!(project_mi(&point), project_mt(&point.y, &point.r).unwrap());
        }
    }

    #[test]
    fn temporal_projection_ignores_the_point_pattern() {
        // p.r = 01 but extraction pattern 10 selects y1, formally missing under p.r.
        let point = pt(&[1, 0], "01");
        let ot = project_ot(&point.y, &p("10")).unwrap();
        assert_eq!(ot.coords, vec![0]);
        assert!(!point.r.is_observed(0));
        assert_ne!(ot, project_ob(&point));
        assert!(matches!(
            project_ot(&Outcome(vec![0, 1, 0]), &p("10")),
            Err(SpaceError::OutcomeLength { .. })
        ));
    }

    #[test]
    fn observed_event_examples() {
        let s = space(2, &["11", "10", "00"]);
        let e = s.observed_event(&pt(&[0, 1], "10")).unwrap();
        assert_eq!(e.members, vec![pt(&[0, 0], "10"), pt(&[0, 1], "10")]);
        let e = s.observed_event(&pt(&[0, 1], "11")).unwrap();
        assert_eq!(e.members, vec![pt(&[0, 1], "11")]);
        let e = s.observed_event(&pt(&[1, 1], "00")).unwrap();
        assert_eq!(e.members.len(), s.y_size());
        assert!(s.observed_event(&pt(&[0, 1], "01")).is_err());
    }

    #[test]
    fn omega_sizes() {
        let s = space(2, &["11", "10"]);
        assert_eq!(s.enumerate_omega().count(), 8);
        assert_eq!(s.enumerate_omega_ob().len(), 6);
        let distinct: HashSet<_> = s.enumerate_omega().collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn omega_ob_keeps_patterns_apart() {
        let s = space(2, &["10", "01"]);
        let ob = s.enumerate_omega_ob();
        assert_eq!(ob.len(), 4);
        let keys: HashSet<_> = ob.iter().map(|o| (o.pattern_index, o.observed.codes.clone())).collect();
        assert_eq!(keys.len(), 4);
        // the bare value sub-vectors coincide across the two patterns
        let values: HashSet<_> = ob.iter().map(|o| o.observed.codes.clone()).collect();
        assert_eq!(values.len(), 2);
    }

    #[test]
    fn event_partition_covers_omega_once() {
        let s = space(2, &["11", "10", "01", "00"]);
        let e = s.event_partition(&p("10")).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|ev| ev.members.len() == 2));
        assert_eq!(s.event_partition(&p("11")).unwrap().len(), 4);

        let mut seen = HashSet::new();
        for ev in s.all_events() {
            for m in &ev.members {
                assert!(ev.contains(m));
                assert!(seen.insert(m.clone()), "point covered twice: {m:?}");
            }
        }
        assert_eq!(seen.len(), s.omega_size());

        let s2 = space(2, &["11"]);
        assert!(matches!(
            s2.event_partition(&p("10")),
            Err(SpaceError::UnknownPattern(_))
        ));
    }

    #[test]
    fn canonical_order_is_pattern_major() {
        let s = space(2, &["10", "11"]);
        let pts: Vec<_> = s.enumerate_omega().collect();
        assert_eq!(pts[0], pt(&[0, 0], "11"));
        assert_eq!(pts[1], pt(&[0, 1], "11"));
        assert_eq!(pts[4], pt(&[0, 0], "10"));
        for (i, q) in pts.iter().enumerate() {
            assert_eq!(s.point_index(q), Some(i));
        }
    }

    #[test]
    fn space_validation() {
        let too_wide = ModelSpace::with_cap(
            (0..3).map(|i| VariableDomain::indexed(format!("v{i}"), 2).unwrap()).collect(),
            PatternSet::full(3),
            2,
        );
        assert!(matches!(too_wide, Err(SpaceError::TooManyCoordinates { .. })));
        assert!(VariableDomain::new("x", vec![]).is_err());
        assert!(VariableDomain::new("x", vec!["a".into(), "a".into()]).is_err());
        assert!(matches!(
            ModelSpace::binary(3, PatternSet::full(2)),
            Err(SpaceError::PatternWidth { .. })
        ));
    }
}
