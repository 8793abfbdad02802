//! Report documents: one structured (JSON) form and a plain-text summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::impute::{
    empirical_table, empirical_tv, exact_formal_law, exact_temporal_law, marginalize,
    ImputationChain, Mode, SimError,
};
use crate::io::ingest::IngestSummary;
use crate::space::ModelSpace;
use crate::density::FullDensity;
use crate::verify::{Classification, IdentityReport, MarViolation, Status, VerificationBundle};

pub const TOOL: &str = "missingness";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever enumeration order changes.
pub const ORDERING: &str = "pattern-major/lexicographic-y/v1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub ordering: &'static str,
    pub command: String,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<IngestSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mar: Option<MarSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSection>,
}

impl Report {
    pub fn new(command: &str, tolerance: f64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            ordering: ORDERING,
            command: command.into(),
            tolerance,
            seed: None,
            passed: true,
            model: None,
            data: None,
            mar: None,
            identities: None,
            chain: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub variables: Vec<String>,
    pub d: usize,
    pub k: usize,
    pub y_size: usize,
    pub omega_size: usize,
    pub omega_ob_size: usize,
    pub patterns: Vec<String>,
    pub lattice_edges: Vec<(String, String)>,
    pub monotone: bool,
}

impl ModelInfo {
    pub fn new(space: &ModelSpace) -> Self {
        let pats = space.patterns();
        let name = |i: usize| pats.patterns()[i].to_string();
        Self {
            variables: space.domains().iter().map(|d| d.name.clone()).collect(),
            d: space.d(),
            k: space.k(),
            y_size: space.y_size(),
            omega_size: space.omega_size(),
            omega_ob_size: space.enumerate_omega_ob().len(),
            patterns: pats.iter().map(ToString::to_string).collect(),
            lattice_edges: pats
                .lattice_edges()
                .into_iter()
                .map(|(a, b)| (name(a), name(b)))
                .collect(),
            monotone: pats.is_chain(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationInfo {
    pub event: String,
    pub pattern: String,
    pub observed: BTreeMap<String, String>,
    pub deviation: f64,
    pub mechanism_spread: f64,
}

impl ViolationInfo {
    pub fn new(space: &ModelSpace, v: &MarViolation) -> Self {
        Self {
            event: space.format_event(&v.event),
            pattern: v.event.r.to_string(),
            observed: v
                .event
                .observed
                .coords
                .iter()
                .zip(&v.event.observed.codes)
                .map(|(&c, &x)| (space.domains()[c].name.clone(), space.value_label(c, x).into()))
                .collect(),
            deviation: v.deviation,
            mechanism_spread: v.mechanism_spread,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MarSection {
    pub everywhere_mar: bool,
    pub violation: Option<ViolationInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySection {
    pub passed: bool,
    pub counts: BTreeMap<&'static str, usize>,
    pub observed_density: IdentityReport,
    pub mar_identity: Vec<IdentityReport>,
    pub marginal_removed: Vec<IdentityReport>,
    pub classification: Vec<Classification>,
}

impl From<VerificationBundle> for IdentitySection {
    fn from(b: VerificationBundle) -> Self {
        let mut counts = BTreeMap::new();
        for r in b.reports() {
            let key = match r.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Inapplicable => "inapplicable",
            };
            *counts.entry(key).or_insert(0) += 1;
        }
        Self {
            passed: b.passed(),
            counts,
            observed_density: b.observed_density,
            mar_identity: b.mar_identity,
            marginal_removed: b.marginal_removed,
            classification: b.classification,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSection {
    pub mode: Mode,
    pub seed: u64,
    pub m: usize,
    pub rng: &'static str,
    pub realized_y_observed: BTreeMap<String, String>,
    pub realized_r: String,
    pub pattern_frequencies: BTreeMap<String, f64>,
    pub exact_pattern_law: BTreeMap<String, f64>,
    /// TV distance of the chain's `(y, r)` draws from their exact law.
    pub tv_exact: Option<f64>,
}

impl ChainSection {
    pub fn new(h: &FullDensity, chain: &ImputationChain) -> Result<Self, SimError> {
        let space = h.space();
        let law = match chain.mode {
            Mode::F => exact_formal_law(h, &chain.realized)?,
            Mode::T => exact_temporal_law(h, &chain.realized)?,
        };
        let tv = (!chain.draws.is_empty())
            .then(|| empirical_tv(chain, Clone::clone, &law))
            .transpose()?;
        let r = chain.realized.r_tilde;
        Ok(Self {
            mode: chain.mode,
            seed: chain.seed,
            m: chain.m,
            rng: chain.rng,
            realized_y_observed: r
                .observed_coords()
                .into_iter()
                .map(|c| {
                    (
                        space.domains()[c].name.clone(),
                        space.value_label(c, chain.realized.y_tilde.0[c]).into(),
                    )
                })
                .collect(),
            realized_r: r.to_string(),
            pattern_frequencies: empirical_table(chain, |d| d.r.to_string()),
            exact_pattern_law: marginalize(&law, |p| p.r.to_string()),
            tv_exact: tv,
        })
    }
}

/// Chain draws as CSV: `t`, one column per variable, `r`, `mode`, `seed`.
pub fn chain_csv(space: &ModelSpace, chain: &ImputationChain) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(space.domains().iter().map(|d| d.name.clone()));
    header.extend(["r".into(), "mode".into(), "seed".into()]);
    w.write_record(&header).expect("in-memory write");
    for (t, d) in chain.draws.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(space.outcome_labels(&d.y));
        row.extend([d.r.to_string(), chain.mode.to_string(), chain.seed.to_string()]);
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn report_line(out: &mut String, r: &IdentityReport) {
    let _ = writeln!(
        out,
        "  [{}] {} @ {}  max|dev| = {:.3e}",
        r.status, r.identity, r.scope, r.max_abs_deviation
    );
    for s in r.steps.iter().filter(|s| s.status != Status::Pass) {
        let _ = writeln!(
            out,
            "      {} {}: {:.3e}{}",
            s.status,
            s.name,
            s.max_abs_deviation,
            s.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        );
    }
}

pub fn render_text(rep: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {}: {} (tolerance {:e}, ordering {})",
        rep.tool, rep.version, rep.command, rep.tolerance, rep.ordering
    );
    if let Some(m) = &rep.model {
        let _ = writeln!(
            out,
            "model: d={} k={} |𝒴|={} |Ω|={} |Ω_ob|={} patterns [{}]",
            m.d,
            m.k,
            m.y_size,
            m.omega_size,
            m.omega_ob_size,
            m.patterns.join(", ")
        );
    }
    if let Some(d) = &rep.data {
        let _ = writeln!(out, "data: {} rows, columns [{}]", d.n_rows, d.columns.join(", "));
        for s in &d.per_pattern {
            let _ = writeln!(out, "  pattern {}  count {}  p(r) = {:.6}", s.pattern, s.count, s.frequency);
        }
        let pats = d.patterns.patterns();
        if d.lattice_edges.is_empty() {
            let _ = writeln!(out, "  lattice: no cover relations");
        }
        for &(lo, hi) in &d.lattice_edges {
            let _ = writeln!(out, "  lattice: {} <ₚ {}", pats[lo], pats[hi]);
        }
        if d.monotone {
            let _ = writeln!(out, "  monotone missingness: patterns form a chain");
        }
    }
    if let Some(mar) = &rep.mar {
        match &mar.violation {
            None => {
                let _ = writeln!(out, "MAR: holds at every observed data event");
            }
            Some(v) => {
                let _ = writeln!(
                    out,
                    "MAR: VIOLATED at {}  deviation {:.12}  mechanism spread {:.6}",
                    v.event, v.deviation, v.mechanism_spread
                );
            }
        }
    }
    if let Some(ids) = &rep.identities {
        let _ = writeln!(
            out,
            "identities: {} (pass {}, fail {}, n/a {})",
            if ids.passed { "all hold" } else { "FAILURES" },
            ids.counts.get("pass").unwrap_or(&0),
            ids.counts.get("fail").unwrap_or(&0),
            ids.counts.get("inapplicable").unwrap_or(&0)
        );
        report_line(&mut out, &ids.observed_density);
        for r in ids.mar_identity.iter().chain(&ids.marginal_removed) {
            if r.status == Status::Fail {
                report_line(&mut out, r);
            }
        }
        for c in &ids.classification {
            let _ = writeln!(
                out,
                "  classification r={}: consistent={} ot-mixed={} mt-mixed={}",
                c.extraction, c.fully_consistent_count, c.ot_mixed, c.mt_mixed
            );
        }
    }
    if let Some(c) = &rep.chain {
        let _ = writeln!(
            out,
            "chain: mode {} m={} seed={} realized r={}",
            c.mode, c.m, c.seed, c.realized_r
        );
        for (r, f) in &c.pattern_frequencies {
            let exact = c.exact_pattern_law.get(r).copied().unwrap_or(0.0);
            let _ = writeln!(out, "  r={r}: empirical {f:.6}  exact {exact:.6}");
        }
        if let Some(tv) = c.tv_exact {
            let _ = writeln!(out, "  TV(empirical, exact) = {tv:.6}");
        }
    }
    let _ = writeln!(out, "result: {}", if rep.passed { "PASS" } else { "FAIL" });
    out
}
