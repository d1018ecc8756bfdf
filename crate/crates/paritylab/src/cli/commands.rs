use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::input::{decode, grid_arg, json_arg, load, load_pair, load_rv, rat_arg};
use super::{CliError, Command, FamilyArgs, GenKind, OrderArg, PairArgs};
use crate::contracts::Contract;
use crate::dual::{classify, dual_utility, find_violation, prefers, slope_condition_at_one, star_shaped_at, WeightingFunction};
use crate::orders::{
    cx_counterexample, decompose_cx, decompose_handle, gen_dominated_pair_with, GenParams, gen_random_rv, lhcx_counterexample,
    lhcx_le, mono_counterexample, rhcx_counterexample, rhcx_le, Side,
};
use crate::rational::Rat;
use crate::space::{equal_in_dist, AtomicRV};
use crate::witness::{
    counterexample_monotone, verify_chain, witness_cx_chain, witness_handle, witness_mps, witness_weak, ContractFamily,
    HandleSpread, SpreadSpec, WitnessChain, WitnessError, WitnessOptions,
};

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn dispatch(cmd: &Command) -> Result<Value, CliError> {
    match cmd {
        Command::CheckOrder { order, pair } => check_order(*order, pair),
        Command::Decompose { pair, side } => decompose(pair, side.map(Side::from)),
        Command::Witness { family, pair, spread, handle, weak, max_links } => {
            witness(family, pair, spread.as_deref(), handle.as_deref(), weak.as_deref(), *max_links)
        }
        Command::VerifyChain { chain } => {
            let chain: WitnessChain = load(chain)?;
            Ok(to_value(&verify_chain(&chain)))
        }
        Command::ClassifyH { h } => {
            let h: WeightingFunction = load(h)?;
            let mut v = to_value(&classify(&h));
            let o = v.as_object_mut().expect("flags are an object");
            o.insert("convex".into(), json!(h.is_convex()));
            o.insert("star_shaped_at_zero".into(), json!(star_shaped_at(&h, &Rat::zero())));
            o.insert("star_shaped_at_one".into(), json!(star_shaped_at(&h, &Rat::one())));
            o.insert("slope_condition_at_one".into(), json!(slope_condition_at_one(&h)));
            Ok(v)
        }
        Command::EvalUtility { h, z, pair } => {
            let h: WeightingFunction = load(h)?;
            if let Some(z) = z {
                let z = load_rv(z)?;
                return Ok(json!({"utility": dual_utility(&h, &z)}));
            }
            let (x, y) = read_pair(pair)?;
            Ok(json!({
                "u_neg_x": dual_utility(&h, &x.negate()),
                "u_neg_y": dual_utility(&h, &y.negate()),
                "prefers": prefers(&h, &x, &y),
            }))
        }
        Command::FindViolation { h, side, max_den } => {
            if *max_den < 1 {
                return Err(CliError::Usage("--max-den must be at least 1".into()));
            }
            let h: WeightingFunction = load(h)?;
            let side = Side::from(*side);
            let found = find_violation(&h, side, *max_den);
            let recheck = found.as_ref().map(|v| {
                let dominated = match side {
                    Side::Right => rhcx_le(&v.x, &v.y),
                    Side::Left => lhcx_le(&v.x, &v.y),
                };
                json!({"dominated": dominated, "prefers": prefers(&h, &v.x, &v.y)})
            });
            Ok(json!({
                "side": side,
                "max_den": max_den,
                "found": found.is_some(),
                "violation": found,
                "recheck": recheck,
            }))
        }
        Command::CounterexampleMonotone { contract } => {
            let c: Contract = load(contract)?;
            counterexample_monotone(&c).map(|cert| to_value(&cert)).map_err(witness_error)
        }
        Command::Gen { seed, kind, count, min_atoms, max_atoms, value_bound, denom_bound, max_steps } => {
            let params = GenParams {
                min_atoms: *min_atoms,
                max_atoms: *max_atoms,
                value_bound: *value_bound,
                denom_bound: *denom_bound,
                max_steps: *max_steps,
            };
            gen(*seed, *kind, *count, &params)
        }
    }
}

fn read_pair(p: &PairArgs) -> Result<(AtomicRV, AtomicRV), CliError> {
    match (&p.x, &p.y, &p.pair) {
        (Some(x), Some(y), None) => Ok((load_rv(x)?, load_rv(y)?)),
        (None, None, Some(f)) => load_pair(f),
        _ => Err(CliError::Usage("give --x and --y, or --pair".into())),
    }
}

fn check_order(order: OrderArg, pair: &PairArgs) -> Result<Value, CliError> {
    let (x, y) = read_pair(pair)?;
    let (name, report) = match order {
        OrderArg::Cx => match cx_counterexample(&x, &y) {
            None => ("cx", certified(decompose_cx(&x, &y).ok())),
            Some(f) => ("cx", refuted(to_value(&f))),
        },
        OrderArg::Lhcx => match lhcx_counterexample(&x, &y) {
            None => ("lhcx", certified(decompose_handle(&x, &y, Side::Left).ok())),
            Some(f) => ("lhcx", refuted(to_value(&f))),
        },
        OrderArg::Rhcx => match rhcx_counterexample(&x, &y) {
            None => ("rhcx", certified(decompose_handle(&x, &y, Side::Right).ok())),
            Some(f) => ("rhcx", refuted(to_value(&f))),
        },
        OrderArg::Mono => match mono_counterexample(&x, &y) {
            None => {
                let (xs, ys) = (x.sorted_values(), y.sorted_values());
                ("mono", json!({"holds": true, "certificate": {"sorted_x": xs, "sorted_y": ys}}))
            }
            Some(f) => ("mono", refuted(to_value(&f))),
        },
    };
    let mut out = Map::new();
    out.insert("order".into(), json!(name));
    if let Value::Object(o) = report {
        out.extend(o);
    }
    Ok(Value::Object(out))
}

fn certified<T: serde::Serialize>(dec: Option<T>) -> Value {
    json!({"holds": true, "certificate": dec.map(|d| to_value(&d))})
}

fn refuted(f: Value) -> Value {
    json!({"holds": false, "counterexample": f})
}

fn decompose(pair: &PairArgs, side: Option<Side>) -> Result<Value, CliError> {
    let (x, y) = read_pair(pair)?;
    let dec = match side {
        None => decompose_cx(&x, &y),
        Some(s) => decompose_handle(&x, &y, s),
    }
    .map_err(|e| CliError::Infeasible { code: "not_comparable".into(), message: e.0 })?;
    let mut v = to_value(&dec);
    v.as_object_mut()
        .expect("decomposition is an object")
        .insert("endpoint_matches".into(), json!(equal_in_dist(&dec.endpoint(), &y)));
    Ok(v)
}

fn witness_error(e: WitnessError) -> CliError {
    let code = match &e {
        WitnessError::GridMiss { .. } => "grid_miss",
        WitnessError::RangePropertyFails => "range_property_fails",
        WitnessError::InfeasibleSplit { .. } => "infeasible_split",
        WitnessError::NotHandleSpread(_) => "not_handle_spread",
        WitnessError::NotComparable(_) => "not_comparable",
        WitnessError::DegenerateSpread => "degenerate_spread",
        WitnessError::IsFullIndemnity => "is_full_indemnity",
        WitnessError::NotLipschitz => "not_lipschitz",
        WitnessError::InvalidIndemnity => "invalid_indemnity",
        WitnessError::NotFound => "not_found",
        WitnessError::Contract(_) => "contract",
        WitnessError::Internal(_) => "internal",
        WitnessError::InvalidSpread(m) => return CliError::Schema { path: "spread".into(), message: m.clone() },
        WitnessError::InvalidFamily(m) => return CliError::Schema { path: "family".into(), message: m.clone() },
        WitnessError::UnsupportedFamily(m) => return CliError::Usage(m.clone()),
    };
    CliError::Infeasible { code: code.into(), message: e.to_string() }
}

fn build_family(f: &FamilyArgs) -> Result<ContractFamily, CliError> {
    let name = match (&f.family, &f.family_file) {
        (_, Some(file)) => {
            let v = json_arg(file, "family-file")?;
            return decode(v, file);
        }
        (Some(n), None) => n.replace('-', "_"),
        (None, None) => return Err(CliError::Usage("--family or --family-file is required".into())),
    };
    let mut o = Map::new();
    o.insert("family".into(), json!(name));
    let rats = [
        ("alpha0", &f.alpha0),
        ("pi0", &f.pi0),
        ("d0", &f.d0),
        ("lambda0", &f.lambda0),
        ("tau0", &f.tau0),
        ("kappa0", &f.kappa0),
        ("lambda", &f.lambda),
        ("premium", &f.premium),
    ];
    for (key, val) in rats {
        if let Some(s) = val {
            o.insert(key.into(), json!(rat_arg(s, key)?.to_string()));
        }
    }
    let grids = [
        ("premium_grid", &f.premium_grid),
        ("d_grid", &f.d_grid),
        ("tau_grid", &f.tau_grid),
        ("theta_grid", &f.theta_grid),
        ("zeta_grid", &f.zeta_grid),
    ];
    for (key, val) in grids {
        if let Some(s) = val {
            o.insert(key.into(), grid_arg(s, &key.replace('_', "-"))?);
        }
    }
    if let Some(r) = &f.rho {
        o.insert("rho".into(), json_arg(r, "rho")?);
    }
    decode(Value::Object(o), "family")
}

fn witness(
    f: &FamilyArgs,
    pair: &PairArgs,
    spread: Option<&str>,
    handle: Option<&str>,
    weak: Option<&str>,
    max_links: usize,
) -> Result<Value, CliError> {
    let fam = build_family(f)?;
    let opts = WitnessOptions { max_links };
    let chain = if let Some(s) = spread {
        let spec: SpreadSpec = load(s)?;
        witness_mps(&spec, &fam, &opts)
    } else if let Some(h) = handle {
        let hs: HandleSpread = load(h)?;
        witness_handle(&hs, &fam, &opts)
    } else if let Some(w) = weak {
        witness_weak(&load_rv(w)?, &fam)
    } else {
        let (x, y) = read_pair(pair)?;
        witness_cx_chain(&x, &y, &fam, &opts)
    }
    .map_err(witness_error)?;
    Ok(to_value(&chain))
}

fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var("PARITYLAB_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("PARITYLAB_SEED is not a u64: {s:?}"))),
        Err(_) => Ok(0),
    }
}

fn gen_pair(seed: u64, kind: GenKind, p: &GenParams) -> Value {
    let (x, y) = match kind.pair_kind() {
        Some(k) => gen_dominated_pair_with(seed, k, p),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(p.min_atoms..=p.max_atoms);
            let m = rng.gen_range(p.min_atoms..=p.max_atoms);
            let (sx, sy): (u64, u64) = (rng.gen(), rng.gen());
            (gen_random_rv(sx, n, p.value_bound, p.denom_bound), gen_random_rv(sy, m, p.value_bound, p.denom_bound))
        }
    };
    let kind_name = to_value(&kind.pair_kind()).as_str().unwrap_or("random").to_string();
    json!({"seed": seed, "kind": kind_name, "x": x, "y": y})
}

fn gen(seed: Option<u64>, kind: GenKind, count: Option<usize>, p: &GenParams) -> Result<Value, CliError> {
    if p.min_atoms == 0 || p.min_atoms > p.max_atoms {
        return Err(CliError::Usage("need 1 <= --min-atoms <= --max-atoms".into()));
    }
    if p.value_bound < 1 || p.denom_bound < 1 {
        return Err(CliError::Usage("--value-bound and --denom-bound must be positive".into()));
    }
    let seed = match seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    Ok(match count {
        None => gen_pair(seed, kind, p),
        Some(c) => {
            let pairs: Vec<Value> = (0..c as u64).map(|i| gen_pair(seed.wrapping_add(i), kind, p)).collect();
            json!({"pairs": pairs})
        }
    })
}
