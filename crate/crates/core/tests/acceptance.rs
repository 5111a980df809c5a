//! Acceptance criteria, one line of output each.
//!
//! Criteria listed in `EXPECTED_FAILURES` are checked exactly like the
//! others and still print FAIL; they only stop counting against the exit
//! status. If one of them starts passing, the run fails so the list gets
//! revisited.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use scra::analysis::{
    alpha_star, avg_r_res_lower, beta_star, beta_star_sic, optimal_k, s_exact, s_sic_exact, upper_bound_net,
    SchemeParams, SlotRecursion,
};
use scra::channel::plnc_rate;
use scra::protocol::{
    draw_active, run_audited, simulate, trial_rng, Audit, ContentionTranscript, Population, ProtocolConfig, Workload,
};
use scra::sigcode::{build_codebook, DecodeKind, UserId};

type Outcome = Result<String, String>;

/// Criteria that cannot hold as stated; see the project notes.
const EXPECTED_FAILURES: &[u32] = &[2, 10];

const M_LARGE: u64 = 1031;

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_one() -> Outcome {
    let expected = [(1, 2.0, 3.0), (2, 1.5, 1.889), (4, 1.25, 1.427), (8, 1.125, 1.223), (16, 1.063, 1.118)];
    for (k, a, b) in expected {
        let got = (round3(alpha_star(k)), round3(beta_star(k)));
        ensure(got == (a, b), || format!("K={k}: got {got:?}, want ({a}, {b})"))?;
    }
    Ok("alpha*, beta* match for K in {1,2,4,8,16}".into())
}

fn table_two() -> Outcome {
    let expected = [(1, 1.5), (2, 1.111), (4, 1.036), (8, 1.013)];
    let mut bad = Vec::new();
    for (k, b) in expected {
        let got = round3(beta_star_sic(k));
        if got != b {
            bad.push(format!("K={k}: {got} != {b}"));
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("beta*_SIC matches for K in {1,2,4,8}".into())
}

const SANDWICH_KS: [u32; 5] = [1, 2, 4, 8, 16];
const SANDWICH_L_MAX: u64 = 500;

fn slack(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

fn sandwich() -> Outcome {
    for k in SANDWICH_KS {
        let mut rec = SlotRecursion::new(k, false);
        for l in 1..=SANDWICH_L_MAX {
            let s = rec.get(l);
            let lf = l as f64;
            if l <= k as u64 {
                ensure(s == lf, || format!("K={k} L={l}: S={s}, want {l}"))?;
            } else {
                let (lo, hi) = (alpha_star(k) * lf - 1.0, beta_star(k) * lf - 1.0);
                ensure(lo <= s + slack(s) && s <= hi + slack(s), || format!("K={k} L={l}: {lo} <= {s} <= {hi} fails"))?;
            }
        }
    }
    Ok(format!("K in {SANDWICH_KS:?}, L <= {SANDWICH_L_MAX}"))
}

fn sic_sandwich() -> Outcome {
    for k in SANDWICH_KS {
        let mut basic = SlotRecursion::new(k, false);
        let mut sic = SlotRecursion::new(k, true);
        for l in 1..=SANDWICH_L_MAX {
            let (s, t, lf) = (basic.get(l), sic.get(l), l as f64);
            let hi = beta_star_sic(k) * lf;
            ensure(lf <= t + slack(t) && t <= hi + slack(t), || format!("K={k} L={l}: {lf} <= {t} <= {hi} fails"))?;
            ensure(t <= s + slack(s), || format!("K={k} L={l}: S_SIC={t} > S={s}"))?;
        }
    }
    Ok(format!("K in {SANDWICH_KS:?}, L <= {SANDWICH_L_MAX}; SIC <= basic"))
}

fn simulation_agreement() -> Outcome {
    const TRIALS: u64 = 10_000;
    let mut worst: f64 = 0.0;
    for k in [1u32, 2, 4] {
        let cb = build_codebook(31, k).map_err(|e| e.to_string())?;
        for l in [2u32, 3, 5, 10, 20, 30] {
            for sic in [false, true] {
                let cfg = ProtocolConfig::new(&cb, sic, 2, 20_240_601);
                let s = simulate(&cfg, Workload::Fixed(l), TRIALS).map_err(|e| e.to_string())?;
                let theory = if sic { s_sic_exact(l as u64, k) } else { s_exact(l as u64, k) };
                let se = s.slots.std_error();
                let z = if se > 0.0 {
                    (s.slots.mean() - theory) / se
                } else if (s.slots.mean() - theory).abs() < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                ensure(z.abs() <= 3.0, || {
                    format!("K={k} L={l} sic={sic}: mean {} vs {theory}, z={z:.2}", s.slots.mean())
                })?;
                worst = worst.max(z.abs());
            }
        }
    }
    Ok(format!("36 cells x {TRIALS} trials, max |z| = {worst:.2}"))
}

fn all_subsets(m: u32) -> impl Iterator<Item = Vec<UserId>> {
    (1u32..(1 << m)).map(move |mask| (1..=m).filter(|u| mask >> (u - 1) & 1 == 1).map(UserId).collect())
}

fn exhaustive_signatures() -> Outcome {
    let mut checked = 0u64;
    for m in [5u32, 7, 11, 13] {
        for k in (1..=3).filter(|&k| k <= m / 2) {
            let cb = build_codebook(m, k).map_err(|e| e.to_string())?;
            for set in all_subsets(m) {
                let w = cb.sum_signatures(&set).map_err(|e| e.to_string())?;
                let out = cb.decode_sum(&w).map_err(|e| format!("M={m} K={k} {set:?}: {e}"))?;
                ensure(out.multiplicity as usize == set.len(), || format!("M={m} K={k} {set:?}: multiplicity"))?;
                if set.len() <= k as usize {
                    ensure(out.kind == DecodeKind::Resolved(set.clone()), || {
                        format!("M={m} K={k} {set:?}: decoded {:?}", out.kind)
                    })?;
                } else {
                    ensure(out.kind == DecodeKind::Collision, || format!("M={m} K={k} {set:?}: not a collision"))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} subsets, zero failures"))
}

fn strip(t: &ContentionTranscript) -> Vec<String> {
    t.slots.iter().map(|s| format!("{:?}|{}|{:?}|{:?}", s.kind, s.observed, s.outcome, s.feedback)).collect()
}

fn end_to_end() -> Outcome {
    const RUNS: u64 = 1_000;
    let cb = build_codebook(M_LARGE as u32, 8).map_err(|e| e.to_string())?;
    let p = 6.0 / M_LARGE as f64;
    let cfg = ProtocolConfig::new(&cb, false, 3, 7);
    let mut users = 0usize;
    for trial in 0..RUNS {
        let mut rng = trial_rng(cfg.seed, trial);
        let active = draw_active(M_LARGE as u32, Workload::Bernoulli(p), &mut rng).map_err(|e| e.to_string())?;
        let reference = Population::new(&cb, &active, 3, &mut rng.clone()).map_err(|e| e.to_string())?;
        for sic in [false, true] {
            let recorded =
                run_audited(&cfg, sic, &active, &mut rng.clone(), Audit::Record).map_err(|e| e.to_string())?;
            let blind =
                run_audited(&cfg, sic, &active, &mut rng.clone(), Audit::Sentinel).map_err(|e| e.to_string())?;
            ensure(recorded.resolved.len() == active.len(), || format!("trial {trial}: users missing"))?;
            for (u, payload) in reference.payloads() {
                ensure(recorded.resolved.get(&u) == Some(payload), || {
                    format!("trial {trial} sic={sic}: payload of user {u} differs")
                })?;
            }
            ensure(blind.slots.iter().all(|s| s.group.is_empty()), || "sentinel leaked group".into())?;
            ensure(strip(&recorded) == strip(&blind) && recorded.resolved == blind.resolved, || {
                format!("trial {trial} sic={sic}: withholding ground truth changed the run")
            })?;
        }
        users += active.len();
    }
    Ok(format!("{RUNS} runs x 2 schemes, {users} users recovered per scheme, sentinel identical"))
}

/// `P(Binomial(n, p) >= k)`, summed upward from `(1 - p)^n`.
fn binomial_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    let ratio = p / (1.0 - p);
    let mut term = (n as f64 * (-p).ln_1p()).exp();
    let mut below = 0.0;
    for j in 0..k {
        below += term;
        term *= (n - j) as f64 / (j + 1) as f64 * ratio;
    }
    let mut above = 0.0;
    for j in k..=n {
        above += term;
        if term < 1e-30 * above {
            break;
        }
        term *= (n - j) as f64 / (j + 1) as f64 * ratio;
    }
    if above < 0.5 {
        above
    } else {
        1.0 - below
    }
}

fn throughput_in_k() -> Outcome {
    let mut first_above = Vec::new();
    for pm in [3.0, 6.0, 12.0] {
        let mut prev = f64::NEG_INFINITY;
        let mut hit = None;
        for k in 1..=M_LARGE as u32 {
            let params = SchemeParams::with_mean(M_LARGE, k, pm, 100.0, 1e4, false).map_err(|e| e.to_string())?;
            let v = avg_r_res_lower(&params).map_err(|e| e.to_string())?;
            ensure(v >= prev, || format!("pM={pm}: decreases at K={k}"))?;
            if k <= 64 {
                let p = pm / M_LARGE as f64;
                let b = beta_star(k);
                let q0 = (M_LARGE as f64 * (-p).ln_1p()).exp();
                let oracle = 1.0 - (b - 1.0) / (b * (1.0 - q0)) * binomial_upper_tail(M_LARGE, p, k as u64 + 1);
                ensure(((v - oracle) / oracle).abs() <= 1e-9, || format!("pM={pm} K={k}: {v} vs oracle {oracle}"))?;
            }
            if v > 0.9 && hit.is_none() {
                hit = Some(k);
            }
            prev = v;
        }
        ensure(hit.is_some_and(|k| k <= 64), || format!("pM={pm}: never above 0.9 for K <= 64"))?;
        ensure(prev == 1.0, || format!("pM={pm}: value {prev} at K=M"))?;
        first_above.push((pm, hit.unwrap()));
    }
    Ok(format!("monotone, oracle within 1e-9; first K above 0.9: {first_above:?}; 1 at K=M"))
}

fn d_grid() -> Vec<f64> {
    let n = 41;
    (0..n)
        .map(|i| match i {
            0 => 1e2,
            40 => 1e6,
            i => 10f64.powf(2.0 + 4.0 * i as f64 / (n - 1) as f64),
        })
        .collect()
}

fn net_rate_ordering() -> Outcome {
    let limit = plnc_rate(100.0).map_err(|e| e.to_string())?;
    let base = SchemeParams::with_mean(M_LARGE, 1, 3.0, 100.0, 1e2, false).map_err(|e| e.to_string())?;
    let upper = upper_bound_net(&base, false).map_err(|e| e.to_string())?;
    ensure(upper <= 4.1178, || format!("full-knowledge bound {upper} above 4.1178"))?;
    let range = 1..=(M_LARGE / 2) as u32;
    let mut prev_gap = f64::INFINITY;
    let mut last = 0.0;
    for d in d_grid() {
        let basic = SchemeParams { payload_bits: d, ..base };
        let sic = SchemeParams { sic: true, ..basic };
        let (_, v) = optimal_k(&basic, range.clone()).map_err(|e| e.to_string())?;
        let (_, w) = optimal_k(&sic, range.clone()).map_err(|e| e.to_string())?;
        ensure(v <= limit && v <= upper, || format!("D={d}: {v} above {limit} or {upper}"))?;
        ensure(w >= v, || format!("D={d}: SIC {w} below basic {v}"))?;
        let gap = w - v;
        ensure(gap <= prev_gap, || format!("D={d}: gap grows from {prev_gap} to {gap}"))?;
        prev_gap = gap;
        last = v;
    }
    ensure(last >= 0.95 * limit, || format!("value at D=1e6 is {last}"))?;
    Ok(format!("upper={upper:.4}, R_net(K*) at D=1e6 = {last:.4} ({:.1}% of limit)", 100.0 * last / limit))
}

fn optimal_k_trend() -> Outcome {
    let pms = [1.0, 3.0, 6.0, 12.0];
    let range = 1..=(M_LARGE / 2) as u32;
    let mut rows = Vec::new();
    for d in d_grid() {
        let mut row = Vec::new();
        for pm in pms {
            let params = SchemeParams::with_mean(M_LARGE, 1, pm, 100.0, d, false).map_err(|e| e.to_string())?;
            row.push(optimal_k(&params, range.clone()).map_err(|e| e.to_string())?.0);
        }
        rows.push((d, row));
    }
    let mut problems = Vec::new();
    for (i, pm) in pms.iter().enumerate() {
        if let Some(w) = rows.windows(2).find(|w| w[1].1[i] < w[0].1[i]) {
            problems.push(format!("pM={pm}: K* drops at D={:.0}", w[1].0));
        }
    }
    for (d, row) in &rows {
        if let Some(i) = (1..row.len()).find(|&i| row[i] < row[i - 1]) {
            problems.push(format!("D={d:.0}: K*={:?} for pM={pms:?} (pM={} below pM={})", row, pms[i], pms[i - 1]));
        }
    }
    ensure(problems.is_empty(), || {
        let n = problems.len();
        problems.truncate(3);
        format!("{n} violations, e.g. {}", problems.join("; "))
    })?;
    Ok("K* nondecreasing in D and in pM on 1e2..1e6".into())
}

fn run_cli(args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scra"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .env_remove("SCRA_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let invocations: [&[&str]; 4] = [
        &["simulate", "--M", "31", "--K", "2", "--pM", "6", "--trials", "2000", "--seed", "42"],
        &["simulate", "--M", "31", "--K", "4", "--L", "20", "--trials", "2000", "--seed", "42", "--sic"],
        &["figure", "--figure", "Rtotal_inD_SIC", "--D-range", "1e2:1e6:9"],
        &["figure", "--figure", "SinL"],
    ];
    for args in invocations {
        let a = run_cli(args, "1")?;
        let b = run_cli(args, "4")?;
        let c = run_cli(args, "4")?;
        ensure(a == b && b == c, || format!("{args:?}: output differs between runs"))?;
    }
    Ok("simulate and figure byte-identical across reruns and thread counts".into())
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "alpha*, beta* table", budget: Duration::from_secs(1), check: table_one },
        Criterion { id: 2, title: "SIC beta* table", budget: Duration::from_secs(1), check: table_two },
        Criterion { id: 3, title: "slot-count sandwich", budget: Duration::from_secs(10), check: sandwich },
        Criterion { id: 4, title: "SIC sandwich and dominance", budget: Duration::from_secs(10), check: sic_sandwich },
        Criterion {
            id: 5,
            title: "simulation vs recursion",
            budget: Duration::from_secs(300),
            check: simulation_agreement,
        },
        Criterion {
            id: 6,
            title: "exhaustive signature decoding",
            budget: Duration::from_secs(60),
            check: exhaustive_signatures,
        },
        Criterion {
            id: 7,
            title: "end-to-end recovery at M=1031",
            budget: Duration::from_secs(300),
            check: end_to_end,
        },
        Criterion { id: 8, title: "throughput bound in K", budget: Duration::from_secs(60), check: throughput_in_k },
        Criterion { id: 9, title: "net-rate ordering in D", budget: Duration::from_secs(60), check: net_rate_ordering },
        Criterion { id: 10, title: "optimal K trend", budget: Duration::from_secs(60), check: optimal_k_trend },
        Criterion { id: 11, title: "CLI determinism", budget: Duration::from_secs(120), check: determinism },
    ];

    let mut unexpected = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > c.budget => Err(format!("{detail}; took {took:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        let expected_fail = EXPECTED_FAILURES.contains(&c.id);
        let (status, note) = match (&result, expected_fail) {
            (Ok(_), false) => ("PASS", ""),
            (Err(_), true) => ("FAIL", " [expected]"),
            (Ok(_), true) => {
                unexpected += 1;
                ("PASS", " [listed as expected failure]")
            }
            (Err(_), false) => {
                unexpected += 1;
                ("FAIL", "")
            }
        };
        let detail = match &result {
            Ok(d) | Err(d) => d,
        };
        println!("criterion {:>2} {status}{note} {} ({:.2}s): {detail}", c.id, c.title, took.as_secs_f64());
    }
    println!(
        "acceptance: {} criteria, {} expected failures, {unexpected} unexpected results",
        criteria.len(),
        EXPECTED_FAILURES.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
