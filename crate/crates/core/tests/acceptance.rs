//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use missingness::density::{
    compose_pattern_mixture, compose_selection, factor_pattern_mixture, factor_selection,
    is_mar_everywhere, observed_data_density, FullDensity, ModelFamily,
};
use missingness::fixtures::{
    model_rng, random_mar_model, random_pattern_space, random_positive_model, random_shape, w1,
    w2,
};
use missingness::impute::{
    empirical_table, empirical_tv, exact_formal_law, exact_temporal_law, impute, marginalize,
    Mode, RealizedData,
};
use missingness::io::ingest::{ingest_csv, IngestOptions};
use missingness::io::model_spec::parse_model;
use missingness::io::report::chain_csv;
use missingness::pattern::{MissingnessPattern, PatternSet};
use missingness::space::{ModelSpace, Outcome};
use missingness::verify::{
    classify_mixture_components, find_mar_violation, observed_density_by_projection,
    verify_mar_identity, verify_marginal_removed, verify_obs_density_paths, Status,
};

type Verdict = Result<String, String>;
type Criterion<'a> = (&'static str, u64, Box<dyn Fn() -> Verdict + 'a>);

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn positive_models() -> Vec<FullDensity> {
    let mut rng = model_rng(0x5eed_0002);
    (0..100)
        .map(|_| {
            let (d, k) = random_shape(&mut rng, 3, 4);
            let space = random_pattern_space(&mut rng, d, k);
            random_positive_model(&mut rng, space)
        })
        .collect()
}

fn mar_models() -> Vec<FullDensity> {
    let mut rng = model_rng(0x5eed_0004);
    (0..50)
        .map(|_| {
            let (d, k) = random_shape(&mut rng, 3, 4);
            let space = random_pattern_space(&mut rng, d, k);
            random_mar_model(&mut rng, space)
        })
        .collect()
}

fn order_laws() -> Verdict {
    let mut checked = 0usize;
    for d in 2..=4 {
        let all: Vec<_> = MissingnessPattern::enumerate_all(d).collect();
        ensure(all.len() == 1 << d, || format!("d={d}: {} patterns", all.len()))?;
        let leq = |a: &MissingnessPattern, b: &MissingnessPattern| a.leq_p(b).unwrap();
        for a in &all {
            ensure(leq(a, a), || format!("reflexivity fails at {a}"))?;
            for b in &all {
                // subset test on the raw masks
                let subset = a.mask() & !b.mask() == 0;
                ensure(leq(a, b) == subset, || format!("{a} ≤ₚ {b} disagrees with subset test"))?;
                ensure(!(leq(a, b) && leq(b, a)) || a == b, || format!("anti-symmetry fails at {a}, {b}"))?;
                for c in &all {
                    checked += 1;
                    ensure(!(leq(a, b) && leq(b, c)) || leq(a, c), || {
                        format!("transitivity fails at {a}, {b}, {c}")
                    })?;
                }
            }
        }
    }
    Ok(format!("{checked} triples"))
}

fn round_trips(models: &[FullDensity]) -> Verdict {
    let mut worst = 0.0f64;
    for (i, h) in models.iter().enumerate() {
        let sm = factor_selection(h).map_err(|e| format!("model {i}: {e}"))?;
        let back = compose_selection(h.space().clone(), &sm, 1e-12).map_err(|e| format!("model {i}: {e}"))?;
        let dev_sel = max_abs_diff(back.table(), h.table());
        let pm = factor_pattern_mixture(h);
        let back = compose_pattern_mixture(h.space().clone(), &pm, 1e-12).map_err(|e| format!("model {i}: {e}"))?;
        let dev_pm = max_abs_diff(back.table(), h.table());
        worst = worst.max(dev_sel).max(dev_pm);
        ensure(dev_sel <= 1e-12 && dev_pm <= 1e-12, || {
            format!("model {i}: selection {dev_sel:e}, pattern-mixture {dev_pm:e}")
        })?;
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn observed_density_paths(models: &[FullDensity]) -> Verdict {
    let mut worst = 0.0f64;
    for (i, h) in models.iter().enumerate() {
        let space = h.space();
        // oracle: walk the table once, keyed by (pattern, observed codes)
        let mut oracle: BTreeMap<(usize, Vec<usize>), f64> = BTreeMap::new();
        for (idx, &v) in h.table().iter().enumerate() {
            let p = space.point_at(idx);
            let j = space.pattern_index(&p.r).unwrap();
            let ob: Vec<usize> = (0..space.d()).filter(|&c| p.r.is_observed(c)).map(|c| p.y.0[c]).collect();
            *oracle.entry((j, ob)).or_insert(0.0) += v;
        }
        let by_event = observed_data_density(h);
        let by_projection = observed_density_by_projection(h);
        ensure(by_event.0.len() == oracle.len() && by_projection.0.len() == oracle.len(), || {
            format!("model {i}: Ω_ob sizes {} / {} vs oracle {}", by_event.0.len(), by_projection.0.len(), oracle.len())
        })?;
        for (pt, v) in &by_event.0 {
            let want = oracle[&(pt.pattern_index, pt.observed.codes.clone())];
            let other = by_projection.get(pt).unwrap_or(f64::NAN);
            let dev = (v - want).abs().max((other - want).abs());
            let dev = if dev.is_nan() { f64::INFINITY } else { dev };
            worst = worst.max(dev);
            ensure(dev <= 1e-12, || format!("model {i}: point {pt:?} deviates by {dev:e}"))?;
        }
        let total: f64 = oracle.values().sum();
        ensure((by_event.total() - 1.0).abs() <= 1e-12 && (total - 1.0).abs() <= 1e-12, || {
            format!("model {i}: total mass {}", by_event.total())
        })?;
        let rep = verify_obs_density_paths(h, 1e-12);
        ensure(rep.status == Status::Pass, || format!("model {i}: {rep:?}"))?;
        worst = worst.max(rep.max_abs_deviation);
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn mar_identity(models: &[FullDensity]) -> Verdict {
    let (mut checked, mut worst) = (0usize, 0.0f64);
    for (i, h) in models.iter().enumerate() {
        let everywhere = is_mar_everywhere(&ModelFamily::singleton(h.clone()), 1e-12)
            .map_err(|e| format!("model {i}: {e}"))?;
        ensure(everywhere, || format!("model {i}: generator produced a non-MAR model"))?;
        for e in h.space().all_events() {
            let mass = h.event_mass(&e);
            let rep = verify_mar_identity(h, &e, 1e-12);
            if mass > 0.0 {
                checked += 1;
                ensure(rep.status == Status::Pass, || {
                    format!("model {i}, event {}: {rep:?}", h.space().format_event(&e))
                })?;
                worst = worst.max(rep.max_abs_deviation);
            }
        }
    }
    Ok(format!("{checked} events, max deviation {worst:.2e}"))
}

fn mnar_counterexample() -> Verdict {
    let want = (0.5f64 / 0.7 - 0.5).abs();
    ensure((want - 3.0 / 14.0).abs() < 1e-15, || "hand value".into())?;
    let v = find_mar_violation(&w2(), 1e-12).ok_or("no violation found on W2")?;
    ensure((v.deviation - want).abs() <= 1e-12, || format!("deviation {} vs {want}", v.deviation))?;

    // the fixture file is the same model
    let text = std::fs::read_to_string(fixture("w2.toml")).map_err(|e| e.to_string())?;
    let (_, from_file) = parse_model(&text).map_err(|e| e.to_string())?;
    ensure(max_abs_diff(from_file.table(), w2().table()) == 0.0, || "w2.toml differs from W2".into())?;

    let out = Command::new(env!("CARGO_BIN_EXE_missingness"))
        .args(["check-mar", "--model"])
        .arg(fixture("w2.toml"))
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.code() == Some(1), || format!("check-mar exit {:?}", out.status.code()))?;
    ensure(stdout.contains("0.214285714286"), || format!("deviation not reported:\n{stdout}"))?;
    Ok(format!("deviation {:.15}, check-mar exit 1", v.deviation))
}

fn classification() -> Verdict {
    let (mut sets, mut extractions) = (0usize, 0usize);
    for d in 2..=3usize {
        let all: Vec<_> = MissingnessPattern::enumerate_all(d).collect();
        for subset in 1u32..(1 << all.len()) {
            if subset.count_ones() < 2 {
                continue;
            }
            let chosen: Vec<_> = (0..all.len()).filter(|i| subset >> i & 1 == 1).map(|i| all[i]).collect();
            let space = ModelSpace::binary(d, PatternSet::new(chosen.clone()).unwrap()).unwrap();
            sets += 1;
            for r in &chosen {
                extractions += 1;
                let c = classify_mixture_components(&space, r).map_err(|e| e.to_string())?;
                let consistent = c.components.iter().filter(|x| x.fully_consistent).count();
                ensure(consistent == 1 && c.fully_consistent_count == 1, || {
                    format!("{chosen:?} r={r}: {consistent} consistent components")
                })?;
                for comp in &c.components {
                    let (rj, rm) = (comp.pattern.mask(), r.mask());
                    ensure(comp.mt_all_formally_missing == (rj & !rm == 0), || format!("mt flag at r={r}, r_j={}", comp.pattern))?;
                    ensure(comp.ot_all_formally_observed == (rm & !rj == 0), || format!("ot flag at r={r}, r_j={}", comp.pattern))?;
                }
                let mt_count = chosen.iter().filter(|rj| rj.mask() & !r.mask() == 0).count();
                let ot_count = chosen.iter().filter(|rj| r.mask() & !rj.mask() == 0).count();
                ensure(c.mt_mixed == (mt_count < chosen.len()) && c.ot_mixed == (ot_count < chosen.len()), || {
                    format!("{chosen:?} r={r}: mixed flags {} {}", c.mt_mixed, c.ot_mixed)
                })?;
                ensure(c.holds(), || format!("{chosen:?} r={r}: classification does not hold"))?;
            }
        }
    }
    Ok(format!("{sets} pattern sets, {extractions} extractions"))
}

fn marginal_removed(models: &[FullDensity]) -> Verdict {
    let (mut applicable, mut worst) = (0usize, 0.0f64);
    for (i, h) in models.iter().enumerate() {
        for e in h.space().all_events() {
            let rep = verify_marginal_removed(h, &e, 1e-10);
            match rep.status {
                Status::Fail => {
                    return Err(format!("model {i}, event {}: {rep:?}", h.space().format_event(&e)))
                }
                Status::Pass => {
                    applicable += 1;
                    worst = worst.max(rep.max_abs_deviation);
                }
                Status::Inapplicable => {}
            }
        }
    }
    ensure(applicable > 0, || "no applicable events".into())?;
    Ok(format!("{applicable} applicable events, max deviation {worst:.2e}"))
}

fn chains() -> Verdict {
    const M: usize = 100_000;
    let h = w1();
    let space = h.space();
    let real = RealizedData::new(&h, Outcome(vec![0, 0]), "10".parse().unwrap()).map_err(|e| e.to_string())?;

    let f = impute(&h, &real, Mode::F, M, 11).map_err(|e| e.to_string())?;
    ensure(f.has_formal_shape() && f.distinct_patterns().len() == 1, || "F chain changed pattern".into())?;
    let y2 = empirical_table(&f, |p| p.y.0[1]);
    let hand = BTreeMap::from([(0usize, 0.5), (1, 0.5)]);
    let tv_hand = 0.5 * hand.iter().map(|(k, p)| (y2.get(k).unwrap_or(&0.0) - p).abs()).sum::<f64>();
    let tv_f = empirical_tv(&f, Clone::clone, &exact_formal_law(&h, &real).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(tv_f < 0.02 && tv_hand < 0.02, || format!("F TV {tv_f}, vs (0.5, 0.5) {tv_hand}"))?;

    let t = impute(&h, &real, Mode::T, M, 11).map_err(|e| e.to_string())?;
    let law = exact_temporal_law(&h, &real).map_err(|e| e.to_string())?;
    let pattern_law = marginalize(&law, |p| p.r);
    let tv_t = empirical_tv(&t, |p| p.r, &pattern_law).map_err(|e| e.to_string())?;
    ensure(tv_t < 0.02, || format!("T pattern TV {tv_t}"))?;

    let again_f = impute(&h, &real, Mode::F, M, 11).map_err(|e| e.to_string())?;
    let again_t = impute(&h, &real, Mode::T, M, 11).map_err(|e| e.to_string())?;
    ensure(chain_csv(space, &f) == chain_csv(space, &again_f), || "F chain not reproducible".into())?;
    ensure(chain_csv(space, &t) == chain_csv(space, &again_t), || "T chain not reproducible".into())?;
    Ok(format!("F TV {tv_f:.4}, T pattern TV {tv_t:.4}"))
}

fn ingestion() -> Verdict {
    let s = ingest_csv(&fixture("monotone.csv"), &IngestOptions::default(), None).map_err(|e| e.to_string())?;
    let names: Vec<String> = s.patterns.iter().map(ToString::to_string).collect();
    ensure(names == ["111", "110", "100"], || format!("patterns {names:?}"))?;
    ensure(s.lattice_edges == [(1, 0), (2, 1)], || format!("edges {:?}", s.lattice_edges))?;
    ensure(s.monotone, || "not monotone".into())?;
    ensure(s.empirical_pr().iter().all(|(_, p)| *p == 1.0 / 3.0), || format!("p(r) {:?}", s.empirical_pr()))?;
    Ok("lattice 100 < 110 < 111, p(r) = 1/3 each".into())
}

fn main() -> ExitCode {
    let positive = positive_models();
    let mar = mar_models();
    let criteria: Vec<Criterion> = vec![
        ("partial-order laws", 1, Box::new(order_laws)),
        ("factorization round-trips", 5, Box::new(|| round_trips(&positive))),
        ("observed-data density coherence", 5, Box::new(|| observed_density_paths(&positive))),
        ("MAR implies identity", 10, Box::new(|| mar_identity(&mar))),
        ("MNAR counterexample", 1, Box::new(mnar_counterexample)),
        ("mixture component classification", 2, Box::new(classification)),
        ("marginal-removed identity", 10, Box::new(|| marginal_removed(&mar))),
        ("chain semantics", 10, Box::new(chains)),
        ("ingestion", 1, Box::new(ingestion)),
    ];
    let mut failures = 0;
    for (n, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let line = match (&result, over) {
            (Ok(detail), false) => format!("PASS  {}. {name}: {detail} ({elapsed:.2?})", n + 1),
            (Ok(detail), true) => format!("FAIL  {}. {name}: {detail}, but took {elapsed:.2?} (budget {budget}s)", n + 1),
            (Err(why), _) => format!("FAIL  {}. {name}: {why} ({elapsed:.2?})", n + 1),
        };
        if result.is_err() || over {
            failures += 1;
        }
        println!("{line}");
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
