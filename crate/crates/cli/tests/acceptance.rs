//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use metarate::bounds::{fmcp_bound, phi_i, phi_km, psi_km, BoundLimits};
use metarate::corpus::{generate_corpus, generate_corpus_with_horizon, Profile};
use metarate::functions::PwlFunction;
use metarate::iterations::{run_iteration, Scheme};
use metarate::numerics::{Nat, PosRational};
use metarate::oracle::bullets::{ishikawa_bullets, km_bullets, psi_bullets};
use metarate::oracle::{CheckStatus, Extras, Outcome, Theorem};
use metarate::report::{Report, ReportEntry, Status};
use metarate::runner::{run_scenarios, RunOptions};
use metarate::scenario::{Caps, Scenario, ScenarioFile};
use metarate::schedules::{CounterFunc, Modulus, ParamSchedule, Rate};

const SEED: u64 = 20_240_601;

struct Outcomes {
    lines: Vec<(u32, bool, String)>,
}

impl Outcomes {
    fn record(&mut self, n: u32, f: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(d)) => (true, d),
            Ok(Err(d)) => (false, d),
            Err(p) => (false, format!("panicked: {}", panic_text(&p))),
        };
        let line = format!(
            "criterion {n}: {} ({:.1}s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        println!("{line}");
        self.lines.push((n, ok, line));
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn half() -> PosRational {
    PosRational::frac(1, 2)
}

fn nat(n: u64) -> Nat {
    Nat::from(n)
}

fn criterion_1() -> Result<String, String> {
    let start = Instant::now();
    let lim = BoundLimits::default();
    let id = Modulus::identity();
    let km = phi_km(&half(), &CounterFunc::constant(0), &id, &Rate::Harmonic, &lim).map_err(|e| e.to_string())?;
    let ish = phi_i(&half(), &CounterFunc::constant(0), &id, &Rate::Zero, &Rate::Zero, &lim).map_err(|e| e.to_string())?;
    let psi = psi_km(&half(), &CounterFunc::constant(1), &half(), &lim).map_err(|e| e.to_string())?;
    let fm = fmcp_bound(&half(), &CounterFunc::affine(1, 1), &lim).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let got = [km.phi.clone(), ish.phi.clone(), psi.psi.clone(), fm.clone()];
    let want = [nat(336), nat(288), nat(54), nat(3)];
    ensure(got == want, || format!("got {got:?}, want {want:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("Φ_KM = 336, Φ_I = 288, Ψ = 54, g̃^(2)(0) = 3 in {elapsed:?}"))
}

/// Bullet facts on the fixture traces, for criterion 6.
fn fixture_bullets() -> Result<(usize, Vec<String>), String> {
    let lim = BoundLimits::default();
    let id = Modulus::identity();
    let g0 = CounterFunc::constant(0);
    let g1 = CounterFunc::constant(1);
    let e = |e: metarate::Error| e.to_string();
    let km = phi_km(&half(), &g0, &id, &Rate::Harmonic, &lim).map_err(e)?;
    let ish = phi_i(&half(), &g0, &id, &Rate::Zero, &Rate::Zero, &lim).map_err(e)?;
    let psi = psi_km(&half(), &g1, &half(), &lim).map_err(e)?;
    let reports = [
        km_bullets(&km, &half(), &g0, &id, &Rate::Harmonic).map_err(e)?,
        ishikawa_bullets(&ish, &half(), &g0, &id, &Rate::Zero, &Rate::Zero).map_err(e)?,
        psi_bullets(&psi, &half(), &g1, &half()).map_err(e)?,
    ];
    let checked = reports.iter().map(|r| r.checked).sum::<u64>() as usize;
    Ok((checked, reports.into_iter().flat_map(|r| r.violations).collect()))
}

fn run(file: &ScenarioFile, extras: Extras) -> Report {
    let options = RunOptions {
        extras,
        ..RunOptions::default()
    };
    run_scenarios(file, &options).expect("corpus validates")
}

/// Every certified, feasible scenario is sound; nothing failed.
fn soundness(report: &Report) -> Result<String, String> {
    let s = report.summary;
    if let Some(e) = report.scenarios.iter().find(|e| e.status == Status::Failed) {
        return Err(format!("{} failed: {}", e.id, describe(e)));
    }
    for e in report.scenarios.iter().filter(|e| e.status == Status::Sound) {
        let (b, n) = (e.bound.as_ref().ok_or("sound entry without bound")?, e.least_n.ok_or("sound entry without N")?);
        ensure(nat(n) <= *b && e.sound == Some(true), || format!("{}: least N {n} vs bound {b}", e.id))?;
        ensure(e.check.as_ref().and_then(|c| c.witnesses_valid) == Some(true), || format!("{}: witnesses", e.id))?;
    }
    ensure(s.sound > 0, || "no scenario was checked".into())?;
    Ok(format!(
        "{} scenarios: {} sound, {} skipped, {} bound-only, 0 failed",
        s.total, s.sound, s.skipped, s.bound_only
    ))
}

fn describe(e: &ReportEntry) -> String {
    match (&e.error, &e.check) {
        (Some(err), _) => err.clone(),
        (None, Some(c)) => format!("{:?}", c.outcome),
        _ => "no detail".into(),
    }
}

fn criterion_2(out: &mut Vec<Report>) -> Result<String, String> {
    let start = Instant::now();
    let file = generate_corpus(SEED, 200, Some(Theorem::Km), Profile::Desk).map_err(|e| e.to_string())?;
    for s in &file.scenarios {
        ensure(matches!(s.t, Some(ParamSchedule::Harmonic)), || format!("{}: t not harmonic", s.id))?;
        ensure(s.f.lipschitz_constant() <= PosRational::frac(8, 1), || format!("{}: L > 8", s.id))?;
    }
    let report = run(&file, Extras::default());
    let verdict = soundness(&report);
    out.push(report);
    let line = verdict?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("{line}; took {elapsed:?}"))?;
    Ok(line)
}

fn is_zero_q(s: &Scenario) -> bool {
    matches!(&s.s, Some(ParamSchedule::Constant { value }) if value.is_zero())
}

fn criterion_3(out: &mut Vec<Report>) -> Result<String, String> {
    let start = Instant::now();
    let file = generate_corpus(SEED, 100, Some(Theorem::Ishikawa), Profile::Desk).map_err(|e| e.to_string())?;
    let report = run(&file, Extras::default());
    let verdict = soundness(&report);
    out.push(report);
    let line = verdict?;
    let mut compared = 0;
    for s in file.scenarios.iter().filter(|s| is_zero_q(s)) {
        let t = s.t.as_ref().expect("ishikawa scenarios carry t");
        let ish = run_iteration(Scheme::Ishikawa, &s.f, t, s.s.as_ref(), &s.x0, 2000).map_err(|e| e.to_string())?;
        let km = run_iteration(Scheme::Km, &s.f, t, None, &s.x0, 2000).map_err(|e| e.to_string())?;
        ensure(ish.xs == km.xs, || format!("{}: s = 0 run differs from the km run", s.id))?;
        compared += 1;
    }
    ensure(compared > 0, || "no s = 0 scenarios drawn".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("{line}; took {elapsed:?}"))?;
    Ok(format!("{line}; {compared} s = 0 runs equal their km runs over 2000 points"))
}

fn criterion_4(out: &mut Vec<Report>) -> Result<String, String> {
    let file = generate_corpus(SEED, 200, Some(Theorem::Lipschitz), Profile::Desk).map_err(|e| e.to_string())?;
    let report = run(&file, Extras::default());
    let verdict = soundness(&report);
    let mut pairs = 0;
    let mut lemma_err = None;
    for e in &report.scenarios {
        let Some(dl3) = e.check.as_ref().and_then(|c| c.lemmas.as_ref()).map(|l| &l.dl3) else {
            if e.status == Status::Sound {
                lemma_err.get_or_insert(format!("{}: sound without a lemma report", e.id));
            }
            continue;
        };
        pairs += dl3.pairs_checked;
        if !dl3.passed() || dl3.pairs_skipped > 0 {
            lemma_err.get_or_insert(format!("{}: {:?}, {} pairs outside the step bound", e.id, dl3.violations, dl3.pairs_skipped));
        }
    }
    out.push(report);
    let line = verdict?;
    if let Some(err) = lemma_err {
        return Err(err);
    }
    Ok(format!("{line}; {pairs} switching pairs pass both clauses"))
}

fn criterion_5() -> Result<String, String> {
    let file = generate_corpus(SEED, 100, Some(Theorem::Fmcp), Profile::Desk).map_err(|e| e.to_string())?;
    for s in &file.scenarios {
        ensure(s.f.is_nondecreasing(), || format!("{}: map not monotone", s.id))?;
    }
    let report = run(&file, Extras::default());
    let line = soundness(&report)?;
    for e in &report.scenarios {
        let c = e.check.as_ref().ok_or_else(|| format!("{}: no check", e.id))?;
        let mono = c.hypotheses.iter().find(|h| h.name == "monotone");
        ensure(
            mono.is_some_and(|h| h.status != CheckStatus::Failed) || e.status == Status::BoundOnly,
            || format!("{}: run not monotone", e.id),
        )?;
    }
    Ok(line)
}

fn criterion_6(reports: &[Report]) -> Result<String, String> {
    let (mut checked, mut violations) = fixture_bullets()?;
    let mut traces = 3;
    for e in reports.iter().flat_map(|r| &r.scenarios) {
        if let Some(b) = e.check.as_ref().and_then(|c| c.bullets.as_ref()) {
            traces += 1;
            checked += b.checked as usize;
            violations.extend(b.violations.iter().map(|v| format!("{}: {v}", e.id)));
        }
    }
    ensure(reports.len() == 3, || "corpora from criteria 2–4 missing".into())?;
    ensure(violations.is_empty(), || format!("{} violations, first {}", violations.len(), violations[0]))?;
    Ok(format!("{checked} facts on {traces} traces, 0 violations"))
}

fn criterion_7() -> Result<String, String> {
    let file = generate_corpus_with_horizon(SEED, 50, None, Profile::Desk, 1000).map_err(|e| e.to_string())?;
    let options = RunOptions {
        overrides: Caps {
            horizon: Some(1000),
            search: Some(400),
            ..Caps::default()
        },
        extras: Extras {
            pairwise: true,
            keep_run: false,
        },
        ..RunOptions::default()
    };
    let report = run_scenarios(&file, &options).map_err(|e| e.to_string())?;
    let mut agreed = 0;
    for e in &report.scenarios {
        let c = e.check.as_ref().ok_or_else(|| format!("{}: {}", e.id, describe(e)))?;
        ensure(c.search.is_some(), || format!("{}: no search ran ({:?})", e.id, c.outcome))?;
        ensure(c.pairwise_agrees == Some(true), || format!("{}: checkers disagree", e.id))?;
        agreed += 1;
    }
    ensure(agreed == 50, || format!("only {agreed} scenarios"))?;
    Ok(format!("{agreed} scenarios, horizon 1000, identical least N"))
}

fn criterion_8() -> Result<String, String> {
    let text = r#"{
  "version": 1,
  "scenarios": [
    {
      "id": "picard-oscillator",
      "theorem": "lipschitz",
      "scheme": "picard",
      "f": [[0, 1, 1, 1], [1, 1, 0, 1]],
      "x0": "0/1",
      "epsilon": "1/2",
      "g": {"kind": "constant", "value": "1"},
      "delta": "1/2",
      "caps": {"search": 5000}
    }
  ]
}"#;
    let file = ScenarioFile::parse(text).map_err(|e| e.to_string())?;
    ensure(file.scenarios[0].f == PwlFunction::reflection(), || "not the reflection".into())?;
    let report = run(&file, Extras { pairwise: true, keep_run: false });
    let e = &report.scenarios[0];
    ensure(e.status == Status::Skipped, || format!("status {:?}", e.status))?;
    let c = e.check.as_ref().ok_or("no check")?;
    ensure(c.outcome == Outcome::Skipped { hypothesis: "step-size".into() }, || format!("{:?}", c.outcome))?;
    let s = c.search.as_ref().ok_or("no probe search")?;
    ensure(s.least_n.is_none() && s.search_cap == 5000, || format!("{s:?}"))?;
    ensure(c.witnesses_valid == Some(true) && c.pairwise_agrees == Some(true), || "witnesses".into())?;
    ensure(report.accepted(), || "a skip must not fail the run".into())?;
    Ok("skipped (step-size); no metastable N up to 5000".into())
}

fn metarate(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_metarate"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("metarate {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    Ok(out.stdout)
}

fn criterion_9() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = metarate(&["gen", "--seed", "1", "--count", "50"])?;
    let b = metarate(&["gen", "--seed", "1", "--count", "50"])?;
    ensure(a == b, || "gen output differs between runs".into())?;
    let path = dir.path().join("corpus.json");
    std::fs::write(&path, &a).map_err(|e| e.to_string())?;
    let p = path.to_str().ok_or("temp path not UTF-8")?;
    let r1 = metarate(&["verify", p, "--jobs", "1"])?;
    let r2 = metarate(&["verify", p, "--jobs", "1"])?;
    ensure(r1 == r2, || "verify reports differ between runs".into())?;
    let report: Report = serde_json::from_slice(&r1).map_err(|e| e.to_string())?;
    ensure(report.summary.total == 50, || format!("{} entries", report.summary.total))?;
    Ok(format!("gen: {} bytes twice; verify: {} bytes twice", a.len(), r1.len()))
}

fn main() -> ExitCode {
    let mut o = Outcomes { lines: Vec::new() };
    let mut reports = Vec::new();
    o.record(1, criterion_1);
    o.record(2, || criterion_2(&mut reports));
    o.record(3, || criterion_3(&mut reports));
    o.record(4, || criterion_4(&mut reports));
    o.record(5, criterion_5);
    o.record(6, || criterion_6(&reports));
    o.record(7, criterion_7);
    o.record(8, criterion_8);
    o.record(9, criterion_9);
    let failed: Vec<u32> = o.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    println!();
    for (_, _, line) in &o.lines {
        println!("{line}");
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", o.lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
