//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//! Every comparison is exact; the only tolerance is the wall-clock budget below.

mod common;

use std::process::{Command, Stdio};
use std::io::Write;
use std::time::{Duration, Instant};

use common::*;
use paritylab::contracts::{Contract, Indemnity, PremiumPrinciple};
use paritylab::dual::{
    classify, dual_utility, find_violation, four_point_pair, prefers, star_shaped_at, WeightingFunction,
    DEFAULT_MAX_DEN,
};
use paritylab::orders::{
    apply_all, apply_mps, classify_mps, cx_le, cx_le_oracle, decompose_cx, decompose_handle, gen_dominated_pair,
    lhcx_le, mono_le, rhcx_le, MpsStep, PairKind, Side,
};
use paritylab::space::equal_in_dist;
use paritylab::witness::{
    counterexample_monotone, verify_chain, witness_handle, witness_mps, witness_weak, ContractFamily, Grid,
    HandleSpread, WitnessChain, WitnessError, WitnessOptions,
};
use paritylab::{AtomicRV, Rat};
use rand::Rng;

/// Criterion 1 wall-clock budget.
const CX_BUDGET: Duration = Duration::from_secs(10);
const RANDOM_PAIRS: u64 = 1000;
const CONSTRUCTED_PAIRS: u64 = 500;
const HANDLE_PAIRS: u64 = 500;
const WITNESS_INSTANCES: u64 = 200;
const H_GRID: usize = 120;
const PAIRS_PER_H: u64 = 200;
const MONO_CONTRACTS: u64 = 60;
const BASELINE_DRAWS: u64 = 1000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, ok_detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: ok_detail }
    } else {
        let n = failures.len();
        let mut shown: Vec<String> = failures.into_iter().take(3).collect();
        if n > 3 {
            shown.push(format!("... {} more", n - 3));
        }
        Outcome { pass: false, detail: format!("{n} failure(s): {}", shown.join("; ")) }
    }
}

/// Stop-loss comparison written out independently of the library checkers.
fn stop_loss_oracle(x: &AtomicRV, y: &AtomicRV) -> bool {
    if x.mean() != y.mean() {
        return false;
    }
    let sl = |v: &AtomicRV, t: &Rat| {
        let s: Rat = v.atoms().iter().map(|a| (a - t).pos()).sum();
        s / Rat::int(v.len() as i64)
    };
    let mut ts: Vec<Rat> = x.atoms().iter().chain(y.atoms()).cloned().collect();
    ts.sort();
    ts.dedup();
    ts.iter().all(|t| sl(x, t) <= sl(y, t))
}

fn random_pair(seed: u64) -> (AtomicRV, AtomicRV) {
    let mut g = rng(seed);
    let n = g.gen_range(1..=8);
    let m = g.gen_range(1..=8);
    let x = rand_rv(&mut g, n);
    let y = rand_rv(&mut g, m);
    // every other pair is shifted to a common mean so the comparison is not decided by means alone
    if seed.is_multiple_of(2) {
        let y = y.shift(&(x.mean() - y.mean()));
        (x, y)
    } else {
        (x, y)
    }
}

fn kind_for(i: u64) -> PairKind {
    [PairKind::Cx, PairKind::LeftHandle, PairKind::RightHandle, PairKind::Monotone][(i % 4) as usize]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut holds = 0;
    let pairs = (0..RANDOM_PAIRS)
        .map(random_pair)
        .chain((0..CONSTRUCTED_PAIRS).map(|i| gen_dominated_pair(10_000 + i, kind_for(i))));
    for (i, (x, y)) in pairs.enumerate() {
        let a = cx_le(&x, &y);
        let b = cx_le_oracle(&x, &y);
        let c = stop_loss_oracle(&x, &y);
        let dec = decompose_cx(&x, &y);
        if a != b || a != c || a != dec.is_ok() {
            failures.push(format!("pair {i}: cx_le {a}, majorization {b}, stop-loss {c}, decompose {}", dec.is_ok()));
            continue;
        }
        if i as u64 >= RANDOM_PAIRS && !a {
            failures.push(format!("constructed pair {i} rejected"));
        }
        if let Ok(d) = dec {
            holds += 1;
            match apply_all(&d.carrier, &d.steps) {
                Ok(cs) if equal_in_dist(cs.last().unwrap(), &y) => {}
                _ => failures.push(format!("pair {i}: decomposition misses the target")),
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= CX_BUDGET {
        failures.push(format!("took {elapsed:?}, budget {CX_BUDGET:?}"));
    }
    outcome(
        failures,
        format!("{} pairs, {holds} dominated, all four verdicts agree, {elapsed:.2?}", RANDOM_PAIRS + CONSTRUCTED_PAIRS),
    )
}

fn steps_classify(carrier: &AtomicRV, steps: &[MpsStep], side: Side) -> Result<AtomicRV, String> {
    let mut cur = carrier.clone();
    for (k, s) in steps.iter().enumerate() {
        let kind = classify_mps(&cur, s).map_err(|e| format!("step {k}: {e}"))?;
        let ok = match side {
            Side::Left => kind.left_handle,
            Side::Right => kind.right_handle,
        };
        if !ok {
            return Err(format!("step {k} is not a {side:?}-handle spread"));
        }
        cur = apply_mps(&cur, s).map_err(|e| e.to_string())?;
    }
    Ok(cur)
}

fn criterion_2() -> Outcome {
    let mut failures = Vec::new();
    let mut duality_checked = 0;
    let check_duality = |x: &AtomicRV, y: &AtomicRV, failures: &mut Vec<String>, n: &mut usize| {
        *n += 1;
        if lhcx_le(x, y) != rhcx_le(&x.negate(), &y.negate()) {
            failures.push("duality broken".into());
        }
    };
    for (side, kind) in [(Side::Left, PairKind::LeftHandle), (Side::Right, PairKind::RightHandle)] {
        for i in 0..HANDLE_PAIRS {
            let (x, y) = gen_dominated_pair(20_000 + i, kind);
            let holds = match side {
                Side::Left => lhcx_le(&x, &y),
                Side::Right => rhcx_le(&x, &y),
            };
            if !holds {
                failures.push(format!("{side:?} pair {i} rejected by the checker"));
            }
            match decompose_handle(&x, &y, side).map_err(|e| e.0).and_then(|d| steps_classify(&d.carrier, &d.steps, side)) {
                Ok(end) if equal_in_dist(&end, &y) => {}
                Ok(_) => failures.push(format!("{side:?} pair {i}: steps miss the target")),
                Err(e) => failures.push(format!("{side:?} pair {i}: {e}")),
            }
            check_duality(&x, &y, &mut failures, &mut duality_checked);
        }
        // random pairs the checker rejects
        let mut rejected = 0;
        let mut seed = 30_000;
        while rejected < HANDLE_PAIRS {
            seed += 1;
            let (x, y) = random_pair(2 * seed);
            let holds = match side {
                Side::Left => lhcx_le(&x, &y),
                Side::Right => rhcx_le(&x, &y),
            };
            check_duality(&x, &y, &mut failures, &mut duality_checked);
            if holds {
                continue;
            }
            rejected += 1;
            if decompose_handle(&x, &y, side).is_ok() {
                failures.push(format!("{side:?} seed {seed}: decomposer accepts a rejected pair"));
            }
        }
    }
    outcome(
        failures,
        format!("{} dominated and {} rejected pairs per side, duality on {duality_checked}", HANDLE_PAIRS, HANDLE_PAIRS),
    )
}

fn chain_ok(ch: &WitnessChain) -> Result<(), String> {
    let rep = verify_chain(ch);
    if !rep.pass {
        return Err(rep.failures.join(", "));
    }
    if rep.links.iter().any(|l| !l.residual.as_ref().is_some_and(|r| r.iter().all(Rat::is_zero))) {
        return Err("nonzero residual".into());
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut counts: std::collections::BTreeMap<&'static str, u64> = Default::default();
    let opts = WitnessOptions::default();
    for i in 0..WITNESS_INSTANCES {
        let mut g = rng(40_000 + i);
        let spec = rand_spread(&mut g);
        for fam in spread_families(&mut g, &spec) {
            match witness_mps(&spec, &fam, &opts).map_err(|e| e.to_string()).and_then(|ch| {
                chain_ok(&ch)?;
                if ch.target != spec.target() {
                    return Err("wrong target".into());
                }
                Ok(())
            }) {
                Ok(()) => *counts.entry(fam.name()).or_default() += 1,
                Err(e) => failures.push(format!("{} instance {i}: {e}", fam.name())),
            }
        }
        for side in [Side::Right, Side::Left] {
            let hs = rand_handle(&mut g, side);
            for priced in [false, true] {
                let fam = handle_family(&mut g, &hs, priced);
                let res = witness_handle(&hs, &fam, &opts).map_err(|e| e.to_string()).and_then(|ch| {
                    chain_ok(&ch)?;
                    let dominated = match side {
                        Side::Right => rhcx_le(&hs.x, &ch.target),
                        Side::Left => lhcx_le(&hs.x, &ch.target),
                    };
                    if !dominated {
                        return Err("target not handle-dominated".into());
                    }
                    Ok(())
                });
                match res {
                    Ok(()) => *counts.entry(fam.name()).or_default() += 1,
                    Err(e) => failures.push(format!("{} instance {i}: {e}", fam.name())),
                }
            }
        }
        let n = g.gen_range(1..=8);
        let x = rand_rv(&mut g, n);
        let den = den_lcm(x.atoms()) * num_bigint::BigInt::from(n as i64);
        for fam in [
            ContractFamily::Full { premium_grid: lattice(&den) },
            ContractFamily::FullPriced { rho: rand_rho(&mut g) },
        ] {
            let res = witness_weak(&x, &fam).map_err(|e| e.to_string()).and_then(|ch| {
                chain_ok(&ch)?;
                if ch.links.iter().any(|l| !l.start().is_constant()) {
                    return Err("insured position not degenerate".into());
                }
                Ok(())
            });
            match res {
                Ok(()) => *counts.entry(fam.name()).or_default() += 1,
                Err(e) => failures.push(format!("{} instance {i}: {e}", fam.name())),
            }
        }
    }
    let short: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c < WITNESS_INSTANCES)
        .map(|(k, c)| format!("{k} only {c}"))
        .collect();
    failures.extend(short);
    outcome(failures, format!("{} families x {WITNESS_INSTANCES} instances, all residuals zero", counts.len()))
}

fn criterion_4() -> Outcome {
    let hs = HandleSpread { x: rv(&[0, 2]), step: MpsStep::simple(0, 1, Rat::one()), side: Side::Right };
    let fam = ContractFamily::DeductibleOnly { premium: Rat::one(), theta_grid: Grid::points(vec![Rat::int(2)]) };
    let mut failures = Vec::new();
    match witness_handle(&hs, &fam, &WitnessOptions::default()) {
        Ok(ch) if ch.links.len() == 1 => {
            let l = &ch.links[0];
            let checks = [
                ("z", l.z.clone(), rv(&[-1, 2])),
                ("w", l.w.clone(), rv(&[2, -1])),
                ("z+C(z)", l.start(), rv(&[0, 2])),
                ("z+C(w)", l.end(), rv(&[-1, 3])),
            ];
            for (name, got, want) in checks {
                if got != want {
                    failures.push(format!("{name} = {:?}, expected {:?}", got.atoms(), want.atoms()));
                }
            }
            if let Err(e) = chain_ok(&ch) {
                failures.push(e);
            }
        }
        other => failures.push(format!("unexpected result {other:?}")),
    }
    outcome(failures, "z=(-1,2), w=(2,-1), z+C(z)=(0,2), z+C(w)=(-1,3)".into())
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let hs = h_grid(H_GRID, 50_000);
    let right: Vec<_> = (0..PAIRS_PER_H).map(|i| gen_dominated_pair(60_000 + i, PairKind::RightHandle)).collect();
    let left: Vec<_> = (0..PAIRS_PER_H).map(|i| gen_dominated_pair(70_000 + i, PairKind::LeftHandle)).collect();
    let (mut star_right, mut star_left) = (0, 0);
    for (k, h) in hs.iter().enumerate() {
        for (side, pairs, a) in [(Side::Right, &right, Rat::one()), (Side::Left, &left, Rat::zero())] {
            let star = star_shaped_at(h, &a);
            let found = find_violation(h, side, DEFAULT_MAX_DEN);
            if star {
                match side {
                    Side::Right => star_right += 1,
                    Side::Left => star_left += 1,
                }
                if let Some(bad) = pairs.iter().position(|(x, y)| !prefers(h, x, y)) {
                    failures.push(format!("h #{k} star-shaped on {side:?} but pair {bad} is dispreferred"));
                }
                if found.is_some() {
                    failures.push(format!("h #{k}: violation reported on the star-shaped {side:?} side"));
                }
            } else {
                match found {
                    None => failures.push(format!("h #{k}: no {side:?} violation found")),
                    Some(v) => {
                        let dominated = match side {
                            Side::Right => rhcx_le(&v.x, &v.y),
                            Side::Left => lhcx_le(&v.x, &v.y),
                        };
                        if !dominated || prefers(h, &v.x, &v.y) {
                            failures.push(format!("h #{k}: {side:?} violation does not re-check"));
                        }
                    }
                }
            }
        }
    }
    let quarter = Rat::new(1, 4);
    let (x, y) = four_point_pair(&[quarter.clone(), quarter.clone(), quarter.clone(), quarter]);
    let h = min2p();
    let (ux, uy) = (dual_utility(&h, &x.negate()), dual_utility(&h, &y.negate()));
    if ux != Rat::new(5, 2) || uy != Rat::new(21, 8) {
        failures.push(format!("worked instance gives {ux} vs {uy}"));
    }
    outcome(
        failures,
        format!(
            "{} h x {PAIRS_PER_H} pairs per side ({star_right} star at 1, {star_left} star at 0); U(-X)=5/2, U(-Y)=21/8",
            hs.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut failures = Vec::new();
    let hs = h_grid(H_GRID, 50_000);
    for (k, h) in hs.iter().enumerate() {
        let c = classify(h);
        let implications = [
            ("strong => dual_handle", !c.strong || c.dual_handle),
            ("dual_handle => right", !c.dual_handle || c.right_handle),
            ("dual_handle => left", !c.dual_handle || c.left_handle),
            ("right => weak", !c.right_handle || c.weak),
            ("left => weak", !c.left_handle || c.weak),
            ("dual_handle => dual_superadditive", !c.dual_handle || c.dual_superadditive),
        ];
        for (name, ok) in implications {
            if !ok {
                failures.push(format!("h #{k}: {name}"));
            }
        }
    }
    let c = classify(&exhibit_h());
    if !(c.right_handle && c.left_handle && !c.strong) {
        failures.push(format!("exhibit classifies as {c:?}"));
    }
    outcome(failures, format!("{} h, zero exceptions; exhibit right and left but not strong", hs.len()))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let mut g = rng(80_000);
    let mut kinds = std::collections::BTreeSet::new();
    for i in 0..MONO_CONTRACTS {
        let p = rand_rat(&mut g, 6, 4);
        let (kind, ind) = match i % 4 {
            0 => ("proportional", Indemnity::Proportional { alpha: Rat::new(g.gen_range(1..=7), 8) }),
            1 => ("deductible", Indemnity::Deductible { d: p }),
            2 => ("limit", Indemnity::Limit { lambda: p }),
            _ => ("deductible_limit", Indemnity::DeductibleLimit { d: p, lambda: rand_pos(&mut g, 6, 4) }),
        };
        kinds.insert(kind);
        let c = if g.gen_bool(0.5) {
            Contract::standard(ind, rand_rat(&mut g, 5, 3))
        } else {
            Contract::priced(ind, rand_rho(&mut g))
        };
        match counterexample_monotone(&c) {
            Ok(cert) => {
                if !equal_in_dist(&cert.z, &cert.w) || mono_le(&cert.x_star, &cert.y_star) {
                    failures.push(format!("contract {i} ({kind}): certificate does not re-check"));
                }
                if cert.x_star != cert.z.add(&c.payoff(&cert.z)) || cert.y_star != cert.z.add(&c.payoff(&cert.w)) {
                    failures.push(format!("contract {i} ({kind}): positions inconsistent"));
                }
            }
            Err(e) => failures.push(format!("contract {i} ({kind}): {e}")),
        }
    }
    let full = Contract::standard(Indemnity::Full, Rat::zero());
    if counterexample_monotone(&full) != Err(WitnessError::IsFullIndemnity) {
        failures.push("full indemnity not rejected".into());
    }
    let half = Contract::standard(Indemnity::Proportional { alpha: Rat::new(1, 2) }, Rat::zero());
    match counterexample_monotone(&half) {
        Ok(cert) => {
            let xs = cert.x_star.sorted_values();
            let ys = cert.y_star.sorted_values();
            if xs != vec![r(0, 1), r(1, 2), r(1, 1)] || ys != vec![r(0, 1), r(0, 1), r(3, 2)] {
                failures.push(format!("worked instance gives {xs:?} and {ys:?}"));
            }
        }
        Err(e) => failures.push(format!("worked instance: {e}")),
    }
    outcome(
        failures,
        format!("{MONO_CONTRACTS} contracts over {kinds:?}; full rejected; alpha=1/2 gives (0,1/2,1) vs (0,0,3/2)"),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let id = WeightingFunction::identity();
    let rho = PremiumPrinciple::Distortion { g: id.clone() };
    for i in 0..BASELINE_DRAWS {
        let mut g = rng(90_000 + i);
        let n = g.gen_range(1..=8);
        let z = rand_rv(&mut g, n);
        if dual_utility(&id, &z) != z.mean() || rho.eval(&z) != z.mean() {
            failures.push(format!("draw {i}"));
        }
    }
    outcome(failures, format!("{BASELINE_DRAWS} draws, exact"))
}

fn cli(args: &[&str], stdin: Option<&[u8]>) -> (Option<i32>, Vec<u8>) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_paritylab"))
        .args(args)
        .env_remove("PARITYLAB_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("binary runs");
    let mut pipe = child.stdin.take().unwrap();
    if let Some(b) = stdin {
        pipe.write_all(b).unwrap();
    }
    drop(pipe);
    let out = child.wait_with_output().unwrap();
    (out.status.code(), out.stdout)
}

fn criterion_9() -> Outcome {
    let mut failures = Vec::new();
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let put = |name: &str, v: &serde_json::Value| {
        let p = dir.join(name);
        std::fs::write(&p, v.to_string()).unwrap();
        p.to_string_lossy().into_owned()
    };
    let mut runs = 0;
    for i in 0..20u64 {
        let mut g = rng(95_000 + i);
        let spec = rand_spread(&mut g);
        let sp = put(&format!("spread{i}.json"), &serde_json::to_value(&spec).unwrap());
        let fams = spread_families(&mut g, &spec);
        let hs = rand_handle(&mut g, if i % 2 == 0 { Side::Right } else { Side::Left });
        let hp = put(&format!("handle{i}.json"), &serde_json::to_value(&hs).unwrap());
        let hf = handle_family(&mut g, &hs, i % 4 < 2);
        let mut jobs: Vec<(String, String, &str)> = fams
            .iter()
            .map(|f| (put(&format!("fam{i}_{}.json", f.name()), &serde_json::to_value(f).unwrap()), sp.clone(), "--spread"))
            .collect();
        jobs.push((put(&format!("hfam{i}.json"), &serde_json::to_value(&hf).unwrap()), hp, "--handle"));
        let (x, y) = gen_dominated_pair(96_000 + i, PairKind::Cx);
        let pair = put(&format!("pair{i}.json"), &serde_json::json!({"x": x, "y": y}));
        let dl = ContractFamily::DlFixedD {
            d0: Rat::zero(),
            lambda0: Rat::one(),
            premium_grid: lattice(&num_bigint::BigInt::from(27720 * 4)),
        };
        jobs.push((put(&format!("dl{i}.json"), &serde_json::to_value(&dl).unwrap()), pair, "--pair"));
        for (fam, input, flag) in jobs {
            runs += 1;
            let (code, out) = cli(&["witness", "--family-file", &fam, flag, &input], None);
            if code != Some(0) {
                failures.push(format!("witness {flag} {fam} exited {code:?}"));
                continue;
            }
            let (vcode, vout) = cli(&["verify-chain", "--chain", "-"], Some(&out));
            let pass = serde_json::from_slice::<serde_json::Value>(&vout).map(|v| v["pass"] == true).unwrap_or(false);
            if vcode != Some(0) || !pass {
                failures.push(format!("verify-chain rejected witness from {fam}"));
            }
        }
    }
    let mut gens = 0;
    for seed in [0u64, 1, 7, 12345, u64::MAX] {
        for kind in ["cx", "left-handle", "right-handle", "monotone", "random"] {
            gens += 1;
            let s = seed.to_string();
            let a = cli(&["gen", "--seed", &s, "--kind", kind, "--count", "4"], None);
            let b = cli(&["gen", "--seed", &s, "--kind", kind, "--count", "4"], None);
            if a.0 != Some(0) || a != b {
                failures.push(format!("gen --seed {seed} --kind {kind} not byte-identical"));
            }
        }
    }
    outcome(failures, format!("{runs} witness outputs re-verified, {gens} gen invocations byte-identical"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence (convex order)", criterion_1),
        ("handle characterization vs construction", criterion_2),
        ("witness soundness", criterion_3),
        ("two-point deductible instance", criterion_4),
        ("dual-utility soundness", criterion_5),
        ("classification lattice", criterion_6),
        ("monotone impossibility", criterion_7),
        ("identity baselines", criterion_8),
        ("cli round trip", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|w| *w == n.to_string()) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} [{name}]: {verdict} ({}) [{:.1?}]", o.detail, t.elapsed());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
