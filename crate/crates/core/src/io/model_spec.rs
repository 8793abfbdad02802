//! The model-spec document: a TOML file declaring variables, patterns and a
//! density through one of three routes.
//!
//! ```toml
//! tolerance = 1e-12            # optional
//! patterns = ["11", "10"]
//!
//! [[variables]]
//! name = "y1"
//! values = ["0", "1"]
//!
//! [[variables]]
//! name = "y2"
//! values = ["0", "1"]
//!
//! [density]
//! route = "selection"          # or "full", "pattern-mixture"
//!
//! [[density.f]]
//! y = ["0", "0"]
//! p = 0.25
//!
//! [[density.g]]
//! y = ["0", "0"]
//! p = { "11" = 0.5, "10" = 0.5 }
//! ```
//!
//! Route `full` lists `[[density.h]]` rows with `y`, `r` and `p`. Route
//! `pattern-mixture` gives `pr = { "<pattern>" = p, ... }` and
//! `[[density.components]]` rows with `r`, `y` and `p`. Rows left out have
//! probability zero, except that the selection route needs a `g` row for
//! every `y`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::density::{
    compose_pattern_mixture, compose_selection, DensityError, FullDensity, OutcomeDensity,
    PatternMixture, SelectionModel, DEFAULT_TOLERANCE,
};
use crate::pattern::{MissingnessPattern, PatternSet, DEFAULT_MAX_COORDINATES};
use crate::space::{ModelSpace, Outcome, VariableDomain};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("model spec is not valid TOML: {0}")]
    Syntax(String),
    #[error("invalid model spec:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

/// Which factorization the document declares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum DensitySpec {
    /// `h` in canonical `Ω` order.
    Full(Vec<f64>),
    Selection(SelectionModel),
    PatternMixture(PatternMixture),
}

/// A validated model-spec document.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub space: ModelSpace,
    pub tolerance: f64,
    pub density: DensitySpec,
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| SpecError::Syntax(e.to_string()))?;
        Validator::new(text).run(raw)
    }

    /// Composes the declared factors into `h`.
    pub fn build(&self) -> Result<FullDensity, SpecError> {
        let space = self.space.clone();
        let tol = self.tolerance;
        let res = match &self.density {
            DensitySpec::Full(t) => FullDensity::new(space, t.clone(), tol),
            DensitySpec::Selection(sm) => compose_selection(space, sm, tol),
            DensitySpec::PatternMixture(pm) => compose_pattern_mixture(space, pm, tol),
        };
        res.map_err(density_diagnostics)
    }

    /// Canonical text form: every field in fixed order, every row listed.
    pub fn emit(&self) -> String {
        let space = &self.space;
        let labels = |i: usize| space.outcome_labels(&space.outcome_at(i));
        let pats = space.patterns().patterns();
        let mut density = EmitDensity {
            route: "",
            h: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
            pr: BTreeMap::new(),
            components: Vec::new(),
        };
        match &self.density {
            DensitySpec::Full(t) => {
                density.route = "full";
                density.h = t
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let pt = space.point_at(i);
                        EmitRow {
                            y: space.outcome_labels(&pt.y),
                            r: Some(pt.r.to_string()),
                            p,
                        }
                    })
                    .collect();
            }
            DensitySpec::Selection(sm) => {
                density.route = "selection";
                density.f = sm
                    .f
                    .0
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| EmitRow {
                        y: labels(i),
                        r: None,
                        p,
                    })
                    .collect();
                density.g = (0..space.y_size())
                    .map(|i| EmitMechanism {
                        y: labels(i),
                        p: pats
                            .iter()
                            .enumerate()
                            .map(|(j, r)| (r.to_string(), sm.mechanism(i, j)))
                            .collect(),
                    })
                    .collect();
            }
            DensitySpec::PatternMixture(pm) => {
                density.route = "pattern-mixture";
                density.pr = pats
                    .iter()
                    .zip(&pm.pr)
                    .map(|(r, &p)| (r.to_string(), p))
                    .collect();
                for (r, comp) in pats.iter().zip(&pm.components) {
                    if let Some(c) = comp {
                        density.components.extend(c.0.iter().enumerate().map(|(i, &p)| EmitRow {
                            y: labels(i),
                            r: Some(r.to_string()),
                            p,
                        }));
                    }
                }
            }
        }
        let doc = EmitSpec {
            tolerance: self.tolerance,
            patterns: pats.iter().map(ToString::to_string).collect(),
            variables: space
                .domains()
                .iter()
                .map(|d| EmitVariable {
                    name: d.name.clone(),
                    values: d.values.clone(),
                })
                .collect(),
            density,
        };
        toml::to_string(&doc).expect("plain data serializes")
    }
}

/// Parses a document and builds its density.
pub fn parse_model(text: &str) -> Result<(ModelSpec, FullDensity), SpecError> {
    let spec = ModelSpec::parse(text)?;
    let h = spec.build()?;
    Ok((spec, h))
}

fn density_diagnostics(err: DensityError) -> SpecError {
    let diags = match err {
        DensityError::Validation(v) => v
            .into_iter()
            .map(|x| Diagnostic {
                line: None,
                field: format!("density {}", x.location),
                message: x.message,
            })
            .collect(),
        other => vec![Diagnostic {
            line: None,
            field: "density".into(),
            message: other.to_string(),
        }],
    };
    SpecError::Invalid(diags)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    tolerance: Option<f64>,
    max_coordinates: Option<usize>,
    patterns: Spanned<Vec<Spanned<String>>>,
    variables: Vec<Spanned<RawVariable>>,
    density: Spanned<RawDensity>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariable {
    name: String,
    values: Vec<RawScalar>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl RawScalar {
    fn label(&self) -> String {
        match self {
            RawScalar::Str(s) => s.clone(),
            RawScalar::Int(i) => i.to_string(),
            RawScalar::Bool(b) => b.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    route: Spanned<String>,
    h: Option<Vec<Spanned<RawRow>>>,
    f: Option<Vec<Spanned<RawRow>>>,
    g: Option<Vec<Spanned<RawMechanism>>>,
    pr: Option<Spanned<BTreeMap<String, f64>>>,
    components: Option<Vec<Spanned<RawRow>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    y: Vec<RawScalar>,
    r: Option<String>,
    p: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanism {
    y: Vec<RawScalar>,
    p: Spanned<BTreeMap<String, f64>>,
}

#[derive(Serialize)]
struct EmitSpec {
    tolerance: f64,
    patterns: Vec<String>,
    variables: Vec<EmitVariable>,
    density: EmitDensity,
}

#[derive(Serialize)]
struct EmitVariable {
    name: String,
    values: Vec<String>,
}

#[derive(Serialize)]
struct EmitDensity {
    route: &'static str,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pr: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    h: Vec<EmitRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    f: Vec<EmitRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    g: Vec<EmitMechanism>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    components: Vec<EmitRow>,
}

#[derive(Serialize)]
struct EmitRow {
    y: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<String>,
    p: f64,
}

#[derive(Serialize)]
struct EmitMechanism {
    y: Vec<String>,
    p: BTreeMap<String, f64>,
}

struct Validator<'a> {
    text: &'a str,
    diags: Vec<Diagnostic>,
}

/// Sums printed without float noise, e.g. `0.9` rather than `0.8999999999999999`.
fn shown(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl<'a> Validator<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            diags: Vec::new(),
        }
    }

    fn line(&self, span: Range<usize>) -> usize {
        self.text[..span.start.min(self.text.len())]
            .bytes()
            .filter(|&b| b == b'\n')
            .count()
            + 1
    }

    fn push(&mut self, span: Option<Range<usize>>, field: impl Into<String>, message: impl Into<String>) {
        let line = span.map(|s| self.line(s));
        self.diags.push(Diagnostic {
            line,
            field: field.into(),
            message: message.into(),
        });
    }

    fn fail(self) -> SpecError {
        SpecError::Invalid(self.diags)
    }

    fn run(mut self, raw: RawSpec) -> Result<ModelSpec, SpecError> {
        let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            self.push(None, "tolerance", "must be a non-negative number");
        }

        let mut domains = Vec::new();
        for (i, v) in raw.variables.iter().enumerate() {
            let span = v.span();
            let v = v.get_ref();
            match VariableDomain::new(v.name.clone(), v.values.iter().map(RawScalar::label).collect()) {
                Ok(d) => domains.push(d),
                Err(e) => self.push(Some(span), format!("variables[{i}]"), e.to_string()),
            }
        }
        for (i, d) in domains.iter().enumerate() {
            if domains[..i].iter().any(|o| o.name == d.name) {
                self.push(None, format!("variables[{i}]"), format!("duplicate variable name {:?}", d.name));
            }
        }

        let mut patterns = Vec::new();
        for s in raw.patterns.get_ref() {
            match s.get_ref().parse::<MissingnessPattern>() {
                Ok(p) if p.len() != raw.variables.len() => self.push(
                    Some(s.span()),
                    "patterns",
                    format!("pattern {p} has length {}, expected {}", p.len(), raw.variables.len()),
                ),
                Ok(p) if patterns.contains(&p) => {
                    self.push(Some(s.span()), "patterns", format!("duplicate pattern \"{p}\""))
                }
                Ok(p) => patterns.push(p),
                Err(e) => self.push(Some(s.span()), "patterns", e.to_string()),
            }
        }
        if patterns.is_empty() && self.diags.is_empty() {
            self.push(Some(raw.patterns.span()), "patterns", "at least one pattern is required");
        }
        if !self.diags.is_empty() {
            return Err(self.fail());
        }
        let cap = raw.max_coordinates.unwrap_or(DEFAULT_MAX_COORDINATES);
        let space = PatternSet::new(patterns)
            .map_err(crate::space::SpaceError::from)
            .and_then(|ps| ModelSpace::with_cap(domains, ps, cap));
        let space = match space {
            Ok(s) => s,
            Err(e) => {
                self.push(None, "variables", e.to_string());
                return Err(self.fail());
            }
        };

        let density_span = raw.density.span();
        let density = raw.density.into_inner();
        let route = density.route.get_ref().as_str();
        let spec = match route {
            "full" => {
                self.forbid(&density, &["f", "g", "pr", "components"], route);
                let rows = self.require(density.h, "density.h", density_span.clone());
                let table = self.point_table(&space, &rows, "density.h", None);
                DensitySpec::Full(table)
            }
            "selection" => {
                self.forbid(&density, &["h", "pr", "components"], route);
                let f_rows = self.require(density.f, "density.f", density_span.clone());
                let g_rows = self.require(density.g, "density.g", density_span.clone());
                let f = self.outcome_table(&space, &f_rows, "density.f", tolerance, Some(density_span.clone()));
                let g = self.mechanism_table(&space, &g_rows, tolerance, density_span.clone());
                DensitySpec::Selection(SelectionModel::new(f, g, space.k()))
            }
            "pattern-mixture" => {
                self.forbid(&density, &["h", "f", "g"], route);
                let pr = self.pattern_probs(&space, density.pr, tolerance, density_span.clone());
                let rows = self.require(density.components, "density.components", density_span.clone());
                let table = self.point_table(&space, &rows, "density.components", Some(tolerance));
                let n = space.y_size();
                let components = pr
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| {
                        let slice = &table[j * n..(j + 1) * n];
                        (p > 0.0 || slice.iter().any(|&v| v > 0.0))
                            .then(|| OutcomeDensity(slice.to_vec()))
                    })
                    .collect();
                DensitySpec::PatternMixture(PatternMixture { pr, components })
            }
            other => {
                self.push(
                    Some(density.route.span()),
                    "density.route",
                    format!("unknown route {other:?}: expected full, selection or pattern-mixture"),
                );
                return Err(self.fail());
            }
        };
        if !self.diags.is_empty() {
            return Err(self.fail());
        }
        Ok(ModelSpec {
            space,
            tolerance,
            density: spec,
        })
    }

    fn forbid(&mut self, d: &RawDensity, fields: &[&str], route: &str) {
        for &f in fields {
            let present = match f {
                "h" => d.h.is_some(),
                "f" => d.f.is_some(),
                "g" => d.g.is_some(),
                "pr" => d.pr.is_some(),
                _ => d.components.is_some(),
            };
            if present {
                self.push(None, format!("density.{f}"), format!("not used by route {route:?}"));
            }
        }
    }

    fn require<T>(&mut self, v: Option<Vec<T>>, field: &str, span: Range<usize>) -> Vec<T> {
        v.unwrap_or_else(|| {
            self.push(Some(span), field, "missing");
            Vec::new()
        })
    }

    fn outcome(&mut self, space: &ModelSpace, y: &[RawScalar], field: &str, span: &Range<usize>) -> Option<Outcome> {
        let labels: Vec<String> = y.iter().map(RawScalar::label).collect();
        match space.parse_outcome(&labels) {
            Ok(o) => Some(o),
            Err(e) => {
                self.push(Some(span.clone()), field, e.to_string());
                None
            }
        }
    }

    fn probability(&mut self, p: f64, field: &str, span: &Range<usize>) -> bool {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            true
        } else {
            self.push(Some(span.clone()), field, format!("probability {p} outside [0, 1]"));
            false
        }
    }

    /// Rows keyed by `(y, r)` into a table in canonical `Ω` order. With
    /// `per_pattern_tol`, each pattern's rows must sum to 1 or be absent.
    fn point_table(
        &mut self,
        space: &ModelSpace,
        rows: &[Spanned<RawRow>],
        field: &str,
        per_pattern_tol: Option<f64>,
    ) -> Vec<f64> {
        let mut table = vec![0.0; space.omega_size()];
        let mut seen = vec![false; space.omega_size()];
        let mut first_line: Vec<Option<Range<usize>>> = vec![None; space.k()];
        for (i, row) in rows.iter().enumerate() {
            let span = row.span();
            let row = row.get_ref();
            let loc = format!("{field}[{i}]");
            let Some(r_str) = &row.r else {
                self.push(Some(span), &loc, "missing pattern r");
                continue;
            };
            let r = match r_str.parse::<MissingnessPattern>() {
                Ok(r) if space.patterns().contains(&r) => r,
                _ => {
                    self.push(Some(span), &loc, format!("unknown pattern {r_str:?}"));
                    continue;
                }
            };
            let Some(y) = self.outcome(space, &row.y, &loc, &span) else {
                continue;
            };
            if !self.probability(row.p, &loc, &span) {
                continue;
            }
            let idx = space
                .point_index(&crate::space::FullPoint { y, r })
                .expect("validated");
            if std::mem::replace(&mut seen[idx], true) {
                self.push(Some(span), &loc, "duplicate row");
                continue;
            }
            let j = space.pattern_index(&r).expect("member");
            first_line[j].get_or_insert(span);
            table[idx] = row.p;
        }
        if let Some(tol) = per_pattern_tol {
            let n = space.y_size();
            for (j, r) in space.patterns().iter().enumerate() {
                let total: f64 = table[j * n..(j + 1) * n].iter().sum();
                if first_line[j].is_some() && (total - 1.0).abs() > tol {
                    self.push(first_line[j].clone(), format!("{field} r=\"{r}\""), format!("component sums to {}, expected 1", shown(total)));
                }
            }
        }
        table
    }

    fn outcome_table(
        &mut self,
        space: &ModelSpace,
        rows: &[Spanned<RawRow>],
        field: &str,
        tol: f64,
        span: Option<Range<usize>>,
    ) -> Vec<f64> {
        let mut table = vec![0.0; space.y_size()];
        let mut seen = vec![false; space.y_size()];
        for (i, row) in rows.iter().enumerate() {
            let rspan = row.span();
            let row = row.get_ref();
            let loc = format!("{field}[{i}]");
            if row.r.is_some() {
                self.push(Some(rspan.clone()), &loc, "unexpected pattern r in a marginal row");
            }
            let Some(y) = self.outcome(space, &row.y, &loc, &rspan) else {
                continue;
            };
            if !self.probability(row.p, &loc, &rspan) {
                continue;
            }
            let idx = space.outcome_index(&y);
            if std::mem::replace(&mut seen[idx], true) {
                self.push(Some(rspan), &loc, "duplicate row");
                continue;
            }
            table[idx] = row.p;
        }
        let total: f64 = table.iter().sum();
        if (total - 1.0).abs() > tol {
            self.push(span, field, format!("sums to {}, expected 1", shown(total)));
        }
        table
    }

    fn mechanism_table(
        &mut self,
        space: &ModelSpace,
        rows: &[Spanned<RawMechanism>],
        tol: f64,
        density_span: Range<usize>,
    ) -> Vec<f64> {
        let k = space.k();
        let mut g = vec![0.0; space.y_size() * k];
        let mut seen = vec![false; space.y_size()];
        for (i, row) in rows.iter().enumerate() {
            let span = row.span();
            let row = row.get_ref();
            let loc = format!("density.g[{i}]");
            let Some(y) = self.outcome(space, &row.y, &loc, &span) else {
                continue;
            };
            let yi = space.outcome_index(&y);
            if std::mem::replace(&mut seen[yi], true) {
                self.push(Some(span), &loc, "duplicate row");
                continue;
            }
            let mut total = 0.0;
            let span = row.p.span();
            for (r_str, &p) in row.p.get_ref() {
                let j = match r_str.parse::<MissingnessPattern>() {
                    Ok(r) => space.patterns().index_of(&r),
                    Err(_) => None,
                };
                let Some(j) = j else {
                    self.push(Some(span.clone()), &loc, format!("unknown pattern {r_str:?}"));
                    continue;
                };
                if self.probability(p, &loc, &span) {
                    g[yi * k + j] = p;
                    total += p;
                }
            }
            if (total - 1.0).abs() > tol {
                self.push(
                    Some(span),
                    &loc,
                    format!("g(· | y={}) sums to {}, expected 1", space.format_outcome(&y), shown(total)),
                );
            }
        }
        for (yi, _) in seen.iter().enumerate().filter(|(_, s)| !**s) {
            self.push(
                Some(density_span.clone()),
                "density.g",
                format!("no row for y={}", space.format_outcome(&space.outcome_at(yi))),
            );
        }
        g
    }

    fn pattern_probs(
        &mut self,
        space: &ModelSpace,
        pr: Option<Spanned<BTreeMap<String, f64>>>,
        tol: f64,
        density_span: Range<usize>,
    ) -> Vec<f64> {
        let mut out = vec![0.0; space.k()];
        let Some(pr) = pr else {
            self.push(Some(density_span), "density.pr", "missing");
            return out;
        };
        let span = pr.span();
        for (r_str, &p) in pr.get_ref() {
            let j = r_str
                .parse::<MissingnessPattern>()
                .ok()
                .and_then(|r| space.patterns().index_of(&r));
            match j {
                Some(j) if self.probability(p, "density.pr", &span) => out[j] = p,
                Some(_) => {}
                None => self.push(Some(span.clone()), "density.pr", format!("unknown pattern {r_str:?}")),
            }
        }
        let total: f64 = out.iter().sum();
        if (total - 1.0).abs() > tol {
            self.push(Some(span), "density.pr", format!("sums to {}, expected 1", shown(total)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{w1, within};

    pub(crate) const W1: &str = r#"
patterns = ["11", "10"]

[[variables]]
name = "y1"
values = ["0", "1"]

[[variables]]
name = "y2"
values = ["0", "1"]

[density]
route = "selection"

[[density.f]]
y = ["0", "0"]
p = 0.25
[[density.f]]
y = ["0", "1"]
p = 0.25
[[density.f]]
y = ["1", "0"]
p = 0.25
[[density.f]]
y = ["1", "1"]
p = 0.25

[[density.g]]
y = ["0", "0"]
p = { "11" = 0.5, "10" = 0.5 }
[[density.g]]
y = ["0", "1"]
p = { "11" = 0.5, "10" = 0.5 }
[[density.g]]
y = ["1", "0"]
p = { "11" = 0.8, "10" = 0.2 }
[[density.g]]
y = ["1", "1"]
p = { "11" = 0.8, "10" = 0.2 }
"#;

    fn diags(text: &str) -> Vec<Diagnostic> {
        match parse_model(text) {
            Err(SpecError::Invalid(d)) => d,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn w1_document_matches_hand_table() {
        let (spec, h) = parse_model(W1).unwrap();
        assert_eq!(spec.tolerance, DEFAULT_TOLERANCE);
        let reference = w1();
        for (a, b) in h.table().iter().zip(reference.table()) {
            within(*a, *b, 1e-15);
        }
    }

    #[test]
    fn bad_mechanism_row_is_located() {
        let text = W1.replace(
            r#"p = { "11" = 0.8, "10" = 0.2 }
[[density.g]]
y = ["1", "1"]"#,
            r#"p = { "11" = 0.7, "10" = 0.2 }
[[density.g]]
y = ["1", "1"]"#,
        );
        let d = diags(&text);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].field, "density.g[2]");
        assert_eq!(d[0].line, Some(text.lines().position(|l| l.contains("0.7")).unwrap() + 1));
        assert!(d[0].message.contains("sums to 0.9"));
    }

    #[test]
    fn duplicate_pattern_is_rejected() {
        let text = W1.replace(r#"patterns = ["11", "10"]"#, r#"patterns = ["11", "10", "10"]"#);
        let d = diags(&text);
        assert_eq!(d[0].line, Some(2));
        assert!(d[0].message.contains("duplicate pattern \"10\""));
    }

    #[test]
    fn unknown_values_and_patterns_are_located() {
        let text = W1
            .replacen(r#"y = ["0", "1"]
p = 0.25"#, r#"y = ["0", "7"]
p = 0.25"#, 1)
            .replacen(r#""10" = 0.5 }"#, r#""01" = 0.5 }"#, 1);
        let d = diags(&text);
        assert!(d.iter().any(|x| x.field == "density.f[1]" && x.message.contains("\"7\"")), "{d:?}");
        assert!(d.iter().any(|x| x.field == "density.g[0]" && x.message.contains("\"01\"")), "{d:?}");
        assert!(d.iter().all(|x| x.line.is_some()));
    }

    #[test]
    fn syntax_errors_and_bad_routes() {
        assert!(matches!(parse_model("patterns = ["), Err(SpecError::Syntax(_))));
        let d = diags(&W1.replace(r#"route = "selection""#, r#"route = "magic""#));
        assert_eq!(d[0].field, "density.route");
    }

    #[test]
    fn full_and_mixture_routes() {
        let (spec, h) = parse_model(W1).unwrap();
        let full = ModelSpec {
            density: DensitySpec::Full(h.table().to_vec()),
            ..spec.clone()
        };
        let (_, h2) = parse_model(&full.emit()).unwrap();
        assert_eq!(h.table(), h2.table());

        let pm = crate::density::factor_pattern_mixture(&h);
        let mix = ModelSpec {
            density: DensitySpec::PatternMixture(pm),
            ..spec
        };
        let (_, h3) = parse_model(&mix.emit()).unwrap();
        for (a, b) in h.table().iter().zip(h3.table()) {
            within(*a, *b, 1e-15);
        }
    }

    #[test]
    fn emit_then_parse_is_identity() {
        let (spec, _) = parse_model(W1).unwrap();
        let text = spec.emit();
        let again = ModelSpec::parse(&text).unwrap();
        assert_eq!(spec, again);
        assert_eq!(text, again.emit());
    }
}
