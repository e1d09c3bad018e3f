//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that the criterion lines are always
//! printed, and exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use biharm_core::algebra::{poly, sym, Rat};
use biharm_core::certificate::{TraceBundle, Verdict};
use biharm_core::closure::derive_case1;
use biharm_core::elimination::{
    case1_contradiction, case1_obstruction, check_closure, flow_differentiate, FlowSystem, PUBLISHED_OBSTRUCTION,
};
use biharm_core::ode::{invariant_drift, residual_falsify, FalsifyConfig, IntegrateConfig};
use biharm_core::pipeline::{fd_convergence, run_case1, run_case2, run_numeric, NumericConfig, MINIMAL_ONLY};
use biharm_core::Poly;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biharm"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("biharm-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).expect("scratch directory");
    d
}

fn case2_end_to_end() -> Outcome {
    let t = Instant::now();
    let out = bin().args(["verify", "case2", "--format", "json"]).output().map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(10))?;
    ensure(out.status.code() == Some(0), format!("exit {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let case = &v["cases"][0];
    ensure(case["verdict"] == MINIMAL_ONLY, format!("verdict {}", case["verdict"]))?;
    ensure(case["residual"] == "6*kappa^3", format!("residual {}", case["residual"]))?;
    let flow: Vec<&str> = case["flow"].as_array().ok_or("no flow")?.iter().filter_map(|x| x.as_str()).collect();
    ensure(flow.contains(&"e4(kappa) = -2*kappa*tau"), format!("flow {flow:?}"))?;
    ensure(flow.contains(&"e4(tau) = kappa^2 - tau^2"), format!("flow {flow:?}"))?;
    let run = run_case2().map_err(|e| e.to_string())?;
    let cat = &run.certificates[0];
    let tau = cat.step("tau1=tau2=tau3=tau").ok_or("no tau step")?;
    ensure(tau.verdict == Verdict::Certified, "tau1 = tau2 = tau3 = tau not certified")?;
    Ok(format!("residual 6*kappa^3, verdict {MINIMAL_ONLY}, exit 0, {:?}", t.elapsed()))
}

fn case1_catalog() -> Outcome {
    let t = Instant::now();
    let d = derive_case1().map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(60))?;
    ensure(d.certificate.passed(), format!("failed steps: {:?}", d.certificate.failures()))?;
    let certified = d.certificate.steps.iter().filter(|s| s.verdict == Verdict::Certified).count();
    for dir in ["e3", "e2"] {
        let id = format!("transversal-{dir}");
        let step = d.certificate.step(&id).ok_or(format!("no {id}"))?;
        ensure(step.verdict == Verdict::Certified, format!("{id} not certified"))?;
        let branch = d.branches.iter().find(|c| c.name.ends_with(&id)).ok_or(format!("no {id} certificate"))?;
        ensure(branch.passed(), format!("{id} branch failed"))?;
        ensure(branch.steps.last().map(|s| s.verdict) == Some(Verdict::Closed), format!("{id} branch not closed"))?;
    }
    let diffs = d.certificate.diffs().len();
    Ok(format!(
        "{certified} steps certified, {diffs} recorded diff(s), e3 and e2 branches closed, {:?}",
        t.elapsed()
    ))
}

fn flow_closure() -> Outcome {
    let d = derive_case1().map_err(|e| e.to_string())?;
    let sys = FlowSystem::case1(&d.catalog).map_err(|e| e.to_string())?;
    let i1 = poly("xi*eta - k1*k3");
    let d1 = flow_differentiate(&i1, &sys).map_err(|e| e.to_string())?;
    let expected = &poly("eta - xi") * &i1;
    ensure(d1 == expected, format!("d(I1)/dt = {d1}"))?;
    let i2 = poly("2*k1 + k3 + 3*k4");
    let d2 = sys.field_derivative(&i2).map_err(|e| e.to_string())?;
    ensure(d2.is_zero(), format!("d(I2)/dt = {d2}"))?;
    let (_, cert) = check_closure(&sys).map_err(|e| e.to_string())?;
    ensure(cert.passed(), "closure certificate failed")?;
    Ok("d(I1)/dt = (eta - xi)*I1 and d(I2)/dt = 0 identically".into())
}

fn obstruction() -> Outcome {
    let t = Instant::now();
    let d = derive_case1().map_err(|e| e.to_string())?;
    let sys = FlowSystem::case1(&d.catalog).map_err(|e| e.to_string())?;
    let (obs, cert) = case1_obstruction(&sys).map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(600))?;
    let syms = obs.eliminant.symbols();
    ensure(syms.len() == 1 && syms.contains(&sym::a()), format!("eliminant in {syms:?}"))?;
    ensure(cert.passed(), format!("failed steps: {:?}", cert.failures()))?;
    let published = poly(PUBLISHED_OBSTRUCTION);
    let at0 = published.eval_rational(&Rat::zero()).map_err(|e| e.to_string())?;
    let at_m1 = published.eval_rational(&Rat::from_int(-1)).map_err(|e| e.to_string())?;
    ensure(at0 == Rat::from_int(-42840), format!("P(0) = {at0}"))?;
    ensure(at_m1 == Rat::from_int(-38587), format!("P(-1) = {at_m1}"))?;
    let cmp = cert.step("published-obstruction").ok_or("no comparison step")?;
    let exact = obs.published_divides;
    ensure(
        exact || cmp.verdict == Verdict::Diff,
        "comparison neither matches nor is a recorded diff",
    )?;
    ensure(obs.orders_agree, "the two elimination orders disagree")?;
    let replay = cert.step("published-replay").ok_or("no replay step")?;
    Ok(format!(
        "eliminant degree {} in a (k4^{} removed); published divides: {exact}; certified diff recorded; orders agree; P(0) = -42840, P(-1) = -38587; replay: {}; {:?}",
        obs.eliminant.degree_in(&sym::a()),
        obs.k4_power,
        replay.note.as_deref().unwrap_or("-"),
        t.elapsed()
    ))
}

fn contradiction() -> Outcome {
    let t = Instant::now();
    let d = derive_case1().map_err(|e| e.to_string())?;
    let sys = FlowSystem::case1(&d.catalog).map_err(|e| e.to_string())?;
    let (obs, _) = case1_obstruction(&sys).map_err(|e| e.to_string())?;
    let cert = case1_contradiction(&obs).map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(600))?;
    ensure(cert.passed(), format!("failed steps: {:?}", cert.failures()))?;
    ensure(cert.conclusion == MINIMAL_ONLY, format!("conclusion {}", cert.conclusion))?;
    let m1 = cert.step("candidate a = -1").ok_or("a = -1 is not a companion candidate")?;
    ensure(m1.obtained.contains("k1 - k3"), format!("a = -1 excluded by: {}", m1.obtained))?;
    let cands = cert.step("candidates").ok_or("no candidates")?;
    let gcd = cert.step("gcd(core, candidates)").ok_or("no gcd step")?;
    ensure(gcd.obtained == "1", format!("core shares a root with the candidates: {}", gcd.obtained))?;
    let verdict = cert.step("verdict").ok_or("no verdict")?;
    ensure(verdict.verdict == Verdict::Closed, "verdict not closed")?;
    ensure(!obs.core_roots.roots.is_empty(), "no Sturm isolation recorded")?;
    Ok(format!(
        "companion candidates {{{}}}, a = -1 violates k1 - k3; core has {} Sturm-isolated real roots, none admissible; {:?}",
        cands.obtained,
        obs.core_roots.roots.len(),
        t.elapsed()
    ))
}

fn numeric_invariants() -> Outcome {
    let run = run_case1().map_err(|e| e.to_string())?;
    let lab = run.lab().map_err(|e| e.to_string())?;
    let cfg = IntegrateConfig { t_max: 1.0, step: 1e-3, ..IntegrateConfig::default() };
    let rep = invariant_drift(&lab, 100, NumericConfig::default().seed, 1.0, &cfg).map_err(|e| e.to_string())?;
    ensure(rep.trajectories == 100, format!("{} trajectories", rep.trajectories))?;
    ensure(rep.max_i2_drift < 1e-10, format!("I2 drift {:e}", rep.max_i2_drift))?;
    ensure(rep.max_i1_in_box < 1e-9, format!("|I1| {:e} inside the box", rep.max_i1_in_box))?;
    let c2 = run_numeric(&run_case2().map_err(|e| e.to_string())?, &NumericConfig::default()).map_err(|e| e.to_string())?;
    let cf = c2.closed_form.ok_or("no closed-form comparison")?;
    ensure(cf.max_error < 1e-8, format!("Case II error {:e}", cf.max_error))?;
    Ok(format!(
        "100 trajectories: max |I2 drift| {:e}; max |I1| {:e} while |x| <= 1 ({} leave the box; whole-run max {:e}, relative {:e}); Case II error {:e}",
        rep.max_i2_drift, rep.max_i1_in_box, rep.left_box, rep.max_i1, rep.max_i1_relative, cf.max_error
    ))
}

fn residual_falsification() -> Outcome {
    let run = run_case1().map_err(|e| e.to_string())?;
    let lab = run.lab().map_err(|e| e.to_string())?;
    let rep = residual_falsify(&lab, &FalsifyConfig { samples: 100, ..FalsifyConfig::default() }).map_err(|e| e.to_string())?;
    ensure(rep.admissible >= 100, format!("only {} admissible samples", rep.admissible))?;
    ensure(rep.persistent_counterexamples == 0, format!("{} persistent counterexamples", rep.persistent_counterexamples))?;
    ensure(rep.outcomes.iter().all(|o| o.escape_time.is_some() || o.halt.is_some()), "an unflagged sample never escaped")?;
    ensure(rep.a_minus_one.margin_violations == rep.a_minus_one.tested, "a = -1 locus without margin violation")?;
    Ok(format!(
        "{} samples, {} escape times (min {:?}, median {:?}), {} flagged, 0 persistent; a = -1 locus violates {}",
        rep.admissible,
        rep.escape_times.len(),
        rep.min_escape,
        rep.median_escape,
        rep.flagged,
        rep.a_minus_one.violated_margin.as_deref().unwrap_or("-")
    ))
}

fn finite_differences() -> Outcome {
    let run = run_case1().map_err(|e| e.to_string())?;
    let lab = run.lab().map_err(|e| e.to_string())?;
    let fd = fd_convergence(&run, &lab, &NumericConfig { fd_points: 20, ..NumericConfig::default() }).map_err(|e| e.to_string())?;
    ensure(fd.points == 20, format!("{} states", fd.points))?;
    ensure(fd.passed(), format!("ratios {:?}, formula gap {:e}", fd.ratios, fd.max_formula_gap))?;
    Ok(format!(
        "20 states, halving h = {} gives ratios in [{:.4}, {:.4}], exact derivative matches the trace-flow formula to {:e}",
        fd.h, fd.min_ratio, fd.max_ratio, fd.max_formula_gap
    ))
}

fn replay_and_tamper() -> Outcome {
    let dir = scratch("replay");
    let trace = dir.join("trace.json");
    let out = bin().args(["verify", "both", "--emit-trace"]).arg(&trace).output().map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), format!("verify exit {:?}", out.status.code()))?;
    let out = bin().args(["replay", "--format", "json"]).arg(&trace).output().map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), format!("replay exit {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    for c in ["case1", "case2"] {
        ensure(v["replay"]["verdicts"][c] == MINIMAL_ONLY, format!("{c} replay verdict {}", v["replay"]["verdicts"][c]))?;
    }
    // Tamper with one coefficient of a recorded resultant.
    let text = std::fs::read_to_string(&trace).map_err(|e| e.to_string())?;
    let mut bundle = TraceBundle::from_json(&text).map_err(|e| e.to_string())?;
    let (ci, si) = bundle
        .certificates
        .iter()
        .enumerate()
        .find_map(|(ci, c)| c.steps.iter().position(|s| s.operation == "resultant").map(|si| (ci, si)))
        .ok_or("no resultant step")?;
    let step = &mut bundle.certificates[ci].steps[si];
    let target = step.id.clone();
    let p = Poly::parse(&step.obtained).map_err(|e| e.to_string())?;
    step.obtained = (&p + &Poly::var(sym::a())).to_string();
    let tampered = dir.join("tampered.json");
    std::fs::write(&tampered, bundle.to_json()).map_err(|e| e.to_string())?;
    let out = bin().args(["replay", "--format", "json"]).arg(&tampered).output().map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(6), format!("tampered replay exit {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let hits = v["replay"]["mismatches"].as_array().ok_or("no mismatches")?;
    ensure(hits.iter().any(|m| m["step"] == target.as_str()), format!("tamper at {target} not reported"))?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("both verdicts replay; tampered step {target} detected (exit 6)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Case II end-to-end (exact)", case2_end_to_end),
        ("Case I catalog (exact)", case1_catalog),
        ("flow closure of the first integrals (exact)", flow_closure),
        ("obstruction reproduction", obstruction),
        ("Case I contradiction certificate", contradiction),
        ("numeric invariants", numeric_invariants),
        ("residual falsification", residual_falsification),
        ("finite-difference cross-check", finite_differences),
        ("determinism and replay", replay_and_tamper),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name} — {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} — {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
