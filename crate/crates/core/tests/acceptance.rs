//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints exactly one PASS/FAIL line, plus INFO lines for numbers
//! we report but do not assert.

// `!(x < y)` is deliberate: NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use uss_core::hashing::{HashFamily, HashKey, KeyId};
use uss_core::keystore::{time_to_ready, KeyNetwork, LinkId, NetworkConfig, SIGNER};
use uss_core::protocol::{distribute, group_mismatches, recipient_user, verify, GroupMismatches};
use uss_core::secparams::{
    compute_dr, compute_lmax, consumption, make_s_levels, p_forge, solve_k, CountingMode, Level,
    ParamInputs, ProtocolParams, SLevelSpec, TailMode,
};
use uss_core::simlab::{
    attack_forge, attack_repudiation, expected_mismatch_fraction, random_message, run_honest,
    sweep_error_tolerance, ForgeSpec, RepudiationSpec, DEFAULT_MARGIN,
};
use uss_core::BitString;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "parameter reproduction", parameter_reproduction),
        (2, "honest completeness", honest_completeness),
        (3, "accounting equality", accounting_equality),
        (4, "hash family bound", hash_family_bound),
        (5, "forging oracle match", forging_oracle),
        (6, "repudiation bound", repudiation_bound),
        (7, "error tolerance shape", error_tolerance_shape),
        (8, "threshold arithmetic", threshold_arithmetic),
        (9, "informational paper numbers", informational),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name} ({secs:.2} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name} ({secs:.2} s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn experiment(k: u64) -> ProtocolParams {
    ParamInputs {
        k: Some(k),
        ..ParamInputs::default()
    }
    .resolve()
    .expect("experiment parameters resolve")
}

fn within_budget(start: Instant, budget: Duration) -> Outcome {
    let took = start.elapsed();
    ensure!(took < budget, "took {took:?}, budget {budget:?}");
    Ok(String::new())
}

/// `C(n, j)` as f64, fine for the small `n` used here.
fn choose(n: u64, j: u64) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P[Bin(n, p) <= m]` by direct summation.
fn binom_cdf(n: u64, p: f64, m: u64) -> f64 {
    (0..=m.min(n))
        .map(|j| choose(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32))
        .sum()
}

fn ceil_log2(x: u64) -> u32 {
    let mut bits = 0;
    while (1u64 << bits) < x {
        bits += 1;
    }
    bits.max(1)
}

fn parameter_reproduction() -> Outcome {
    let spec = SLevelSpec {
        eps1: 0.005,
        eps2: 0.001,
    };
    let s = make_s_levels(1, spec).map_err(|e| e.to_string())?;
    let got: Vec<(Level, f64)> = s.iter().collect();
    let want = [(-1, 0.499), (0, 0.252), (1, 0.005)];
    for ((l, v), (wl, wv)) in got.iter().zip(want) {
        ensure!(*l == wl && (v - wv).abs() < 1e-15, "s_{l} = {v}, want {wv}");
    }
    ensure!(got.len() == 3, "expected three levels, got {got:?}");
    let d_r = compute_dr(1, 7).map_err(|e| e.to_string())?;
    ensure!(d_r == 1.0 / 7.0, "d_R = {d_r}");
    ensure!(compute_lmax(7) == 1, "l_max(7) = {}", compute_lmax(7));

    let start = Instant::now();
    let k = solve_k(1e-10, 7, 1, spec, TailMode::Squared).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "solver took {elapsed:?}");

    // Oracle: scan k upward over the non-transferability bound at every level.
    let n_p = 15.0; // honest pairs among 6 = ⌊7(1 - 1/7)⌋ honest recipients
    let gap: f64 = 0.247;
    let oracle = (1u64..)
        .find(|&k| {
            (0..=1).all(|l| {
                let delta = 0.5 + (l as f64 + 1.0) / 7.0;
                n_p * (7.0 * (delta - 1.0 / 7.0) + 1.0) * (-gap * gap * k as f64 / 2.0).exp() <= 1e-10
            })
        })
        .unwrap();
    ensure!(k == oracle, "solve_k = {k}, scan oracle = {oracle}");
    ensure!(k == 900, "solve_k = {k}, want 900");
    let rel = (906.0 - k as f64) / 906.0;
    ensure!(rel.abs() < 0.01, "relative gap to 906 is {rel}");
    Ok(format!(
        "s = {{0.005, 0.252, 0.499}}, d_R = 1/7, k = {k} vs published 906 ({:.2}% below; solver binds on l = 1), solve in {elapsed:?}",
        rel * 100.0
    ))
}

fn honest_completeness() -> Outcome {
    let start = Instant::now();
    let params = experiment(906);
    ensure!(params.tag_len_bits == 8 && params.l_max == 1, "unexpected params {params:?}");
    let mut accepted = 0;
    let mut chains = 0;
    for run in 0..100u64 {
        let cfg = NetworkConfig::uniform(8, 1000.0, 0xC0FFEE + run);
        let out = run_honest(&params, &cfg).map_err(|e| e.to_string())?;
        for r in &out.reports {
            ensure!(r.level_requested == 1, "run {run}: level {}", r.level_requested);
            ensure!(
                r.mismatches.values().all(|&m| m == 0),
                "run {run}: recipient {} saw mismatches {:?}",
                r.recipient,
                r.mismatches
            );
            accepted += r.accepted as u32;
        }
        let levels: Vec<Level> = out.chain.iter().map(|r| r.level_requested).collect();
        ensure!(levels.starts_with(&[1, 0]), "run {run}: chain levels {levels:?}");
        ensure!(out.chain.iter().all(|r| r.accepted), "run {run}: chain rejected");
        chains += 1;
    }
    ensure!(accepted == 700, "{accepted}/700 acceptances");
    within_budget(start, Duration::from_secs(120))?;
    Ok(format!("700/700 accepted at level 1, zero mismatches, {chains}/100 chains 1 → 0 → -1 accepted"))
}

fn accounting_equality() -> Outcome {
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC0);
    let mut checked_links = 0;
    for tuple in 0..50 {
        let n = rng.gen_range(2..=8u32);
        let k = rng.gen_range(1..=1000u64);
        let a = rng.gen_range(1..=16u32);
        let t = rng.gen_range(1..=a);
        let params = ParamInputs {
            n,
            a,
            t: Some(t),
            k: Some(k),
            ..ParamInputs::default()
        }
        .resolve()
        .map_err(|e| format!("tuple {tuple}: {e}"))?;
        let cfg = NetworkConfig::uniform(n + 1, 1.0, rng.gen());
        let mut net = KeyNetwork::new(&cfg).map_err(|e| e.to_string())?;
        distribute(&mut net, &params).map_err(|e| e.to_string())?;
        let used = net.total_consumed();

        let key_len = (a + t) as u64;
        let id = ceil_log2(n as u64 * k) as u64;
        let mut total = 0;
        for (link, bits) in &used {
            let want = if link.lo == SIGNER {
                n as u64 * k * key_len
            } else {
                2 * k * (key_len + id)
            };
            ensure!(*bits == want, "tuple {tuple} (n={n} k={k} a={a} t={t}): link {link} used {bits}, want {want}");
            total += bits;
            checked_links += 1;
        }
        let formula = consumption(&params, CountingMode::Accounting).total_bits;
        let direct = (n * n) as u64 * k * key_len + (n * (n - 1)) as u64 * k * (key_len + id);
        ensure!(
            total == formula && formula == direct,
            "tuple {tuple}: store total {total}, formula {formula}, direct {direct}"
        );
    }
    Ok(format!("50 tuples, {checked_links} links exact"))
}

fn hash_family_bound() -> Outcome {
    const SAMPLES: usize = 100_000;
    let family = HashFamily::new(16, 8).map_err(|e| e.to_string())?;
    let m1 = BitString::from_u64(0x1234, 16);
    let m2 = BitString::from_u64(0xBEEF, 16);
    let mut rng = ChaCha12Rng::seed_from_u64(0x4A5B);
    let mut cells = vec![0u32; 1 << 16];
    let mut collisions = 0u64;
    let mut marginal = 0u64;
    for _ in 0..SAMPLES {
        let key = HashKey::random(&mut rng, 16, 8);
        let y1 = family.tag(&key, &m1).map_err(|e| e.to_string())?.0.to_u64().expect("8-bit tag");
        let y2 = family.tag(&key, &m2).map_err(|e| e.to_string())?.0.to_u64().expect("8-bit tag");
        collisions += (y1 == y2) as u64;
        marginal += (y1 == 0x5A) as u64;
        cells[(y1 << 8 | y2) as usize] += 1;
    }
    let n = SAMPLES as f64;
    let sigma = |p: f64| (p * (1.0 - p) / n).sqrt();

    let p8 = 2f64.powi(-8);
    let coll = collisions as f64 / n;
    ensure!((coll - p8).abs() <= 3.0 * sigma(p8), "collision frequency {coll} vs 2^-8 ± {}", 3.0 * sigma(p8));
    let marg = marginal as f64 / n;
    ensure!((marg - p8).abs() <= 3.0 * sigma(p8), "marginal frequency {marg}");

    // Mean probability of the cell a random key lands in, unbiased.
    let bound = 2f64.powi(1 - 16);
    let pair_mass: f64 = cells.iter().map(|&c| c as f64 * (c as f64 - 1.0)).sum::<f64>() / (n * (n - 1.0));
    ensure!(pair_mass < bound, "mean joint cell probability {pair_mass} >= 2^-15");
    // A fixed spread of individual cells, each within 3σ of the bound.
    let mut worst = 0.0f64;
    for i in 0..64u64 {
        let cell = ((i * 37 + 11) % 256) << 8 | ((i * 101 + 7) % 256);
        let f = cells[cell as usize] as f64 / n;
        worst = worst.max(f);
        ensure!(f <= bound + 3.0 * sigma(bound), "cell {cell:#06x} frequency {f}");
    }
    Ok(format!(
        "collision {coll:.6} (2^-8 = {p8:.6}), mean joint cell {pair_mass:.3e} < 2^-15 = {bound:.3e}, max of 64 fixed cells {worst:.3e}"
    ))
}

fn forging_oracle() -> Outcome {
    const TRIALS: u64 = 100_000;
    let params = ParamInputs {
        n: 3,
        a: 8,
        t: Some(1),
        k: Some(4),
        ..ParamInputs::default()
    }
    .resolve()
    .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for level in [-1, 0] {
        let spec = ForgeSpec {
            forger: 0,
            colluders: vec![],
            target: 1,
            level,
            trials: TRIALS,
            seed: 0xF0 + (level + 1) as u64,
        };
        let out = attack_forge(&spec, &params).map_err(|e| e.to_string())?;

        // Oracle: each of the two groups the forger cannot compute passes
        // when at most m of 4 one-bit guesses are wrong (m/4 < s strictly);
        // the group built from the forger's own keys always passes.
        let s = params.s(level);
        let m = (0..=4u64).filter(|&j| (j as f64) / 4.0 < s).max().unwrap();
        let g = binom_cdf(4, 0.5, m);
        let delta = 0.5 + (level as f64 + 1.0) * params.d_r;
        let need = (0..=3u32).find(|&j| j as f64 / 3.0 > delta).unwrap();
        let exact: f64 = (0..=2u64)
            .filter(|&x| 1 + x as u32 >= need)
            .map(|x| choose(2, x) * g.powi(x as i32) * (1.0 - g).powi(2 - x as i32))
            .sum();

        let rate = out.estimate.rate;
        let sigma = out.estimate.sigma_at(exact);
        ensure!(
            (rate - exact).abs() <= 3.0 * sigma,
            "level {level}: empirical {rate} vs exact {exact} (3σ = {})",
            3.0 * sigma
        );
        ensure!((out.p_t - g).abs() < 1e-12, "level {level}: p_t {} vs oracle {g}", out.p_t);
        let forge_bound = (9.0 * (1.0 - params.d_r).powi(2) * g).min(1.0);
        ensure!(
            (out.forge_bound - forge_bound).abs() < 1e-12 && p_forge(3, params.d_r, g) == out.forge_bound,
            "level {level}: forge bound {} vs {forge_bound}",
            out.forge_bound
        );
        ensure!(
            out.forge_bound + 3.0 * sigma >= rate && out.union_bound + 3.0 * sigma >= rate,
            "level {level}: bounds {} / {} below empirical {rate}",
            out.forge_bound,
            out.union_bound
        );
        lines.push(format!(
            "level {level}: {rate:.4} vs exact {exact:.4} (p_t = {g}, P(Forge) = {:.4})",
            out.forge_bound
        ));
    }
    Ok(lines.join("; "))
}

fn repudiation_bound() -> Outcome {
    const TRIALS: u64 = 10_000;
    let start = Instant::now();
    let mut strategies: Vec<(String, Vec<f64>)> = [0.25, 0.3, 0.35, 0.375, 0.4, 0.45, 0.5]
        .iter()
        .map(|&g| (format!("γ={g}"), vec![g; 7]))
        .collect();
    strategies.push(("half 0 / half 0.5".into(), vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 0.5]));
    strategies.push(("one block 1.0".into(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
    strategies.push(("ramp".into(), (0..7).map(|i| 0.1 * i as f64).collect()));

    let mut report = Vec::new();
    for k in [10, 20, 30] {
        let params = experiment(k);
        let mut best = (String::new(), -1.0, 0.0);
        for (seed, (name, gammas)) in strategies.iter().enumerate() {
            let spec = RepudiationSpec {
                gammas: gammas.clone(),
                trials: TRIALS,
                seed: k * 100 + seed as u64,
            };
            let out = attack_repudiation(&spec, &params).map_err(|e| e.to_string())?;
            ensure!(
                out.within_bound(),
                "k={k} {name}: rate {} exceeds bound {} + 3σ",
                out.estimate.rate,
                out.analytic_bound
            );
            if out.estimate.rate > best.1 {
                best = (name.clone(), out.estimate.rate, out.analytic_bound);
            }
        }
        report.push(format!("k={k}: best {} rate {:.4} ≤ bound {:.3}", best.0, best.1, best.2));
    }
    within_budget(start, Duration::from_secs(600))?;
    Ok(report.join("; "))
}

/// Binomial-tail prediction of the fraction of recipients accepting at
/// `l_max` when every key mismatches independently with probability `e(q)`.
fn predicted_pass(q: f64, params: &ProtocolParams) -> f64 {
    let e = expected_mismatch_fraction(q, params.msg_len_bits, params.tag_len_bits);
    let k = params.k;
    let s = params.s(params.l_max as Level);
    let m = (0..=k).take_while(|&j| (j as f64) < s * k as f64).last();
    let g = match m {
        Some(m) => binom_cdf(k, e, m),
        None => 0.0,
    };
    let n = params.n_recipients as u64;
    let delta = 0.5 + (params.l_max as f64 + 1.0) * params.d_r;
    let need = (0..=n).find(|&j| j as f64 / n as f64 > delta).unwrap();
    (need..=n)
        .map(|j| choose(n, j) * g.powi(j as i32) * (1.0 - g).powi((n - j) as i32))
        .sum()
}

fn error_tolerance_shape() -> Outcome {
    let params = experiment(906);
    let qs = [0.0, 1e-4, 2e-4, 3e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2];
    let curve = sweep_error_tolerance(&qs, &params, DEFAULT_MARGIN, 100, 0xE7).map_err(|e| e.to_string())?;
    let rows = &curve.rows;
    let oracle: Vec<f64> = qs.iter().map(|&q| predicted_pass(q, &params)).collect();
    ensure!(oracle[0] == 1.0, "oracle at q = 0 is {}", oracle[0]);
    ensure!(oracle[qs.len() - 1] < 0.01, "oracle at q = 0.01 is {}", oracle[qs.len() - 1]);
    ensure!(rows[0].pass_rate == 1.0, "pass rate at q = 0 is {}", rows[0].pass_rate);
    let last = &rows[rows.len() - 1];
    ensure!(last.pass_rate < 0.01, "pass rate at q = 0.01 is {}", last.pass_rate);
    for w in rows.windows(2) {
        ensure!(
            w[1].pass_rate <= w[0].wilson_hi && w[1].wilson_lo <= w[0].pass_rate,
            "pass rate rises from {} at q={} to {} at q={}",
            w[0].pass_rate,
            w[0].q,
            w[1].pass_rate,
            w[1].q
        );
    }
    for (row, want) in rows.iter().zip(&oracle) {
        // e(q) treats tag mismatches as independent given a corrupted key;
        // a coarse agreement is all that is expected of the middle of the curve.
        ensure!(
            (row.pass_rate - want).abs() <= 0.1,
            "q = {}: empirical {} vs binomial tail {want}",
            row.q,
            row.pass_rate
        );
    }

    let cost_qs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.0005).collect();
    let cost = sweep_error_tolerance(&cost_qs, &params, DEFAULT_MARGIN, 1, 0xE8).map_err(|e| e.to_string())?;
    let mut steps = Vec::new();
    for w in cost.rows.windows(2) {
        ensure!(w[1].k_adjusted >= w[0].k_adjusted, "k falls at q = {}", w[1].q);
        let jump = w[1].id_bits - w[0].id_bits;
        ensure!(jump <= 1, "id width jumps by {jump} at q = {}", w[1].q);
        if jump == 1 {
            steps.push((w[1].q, w[1].id_bits));
        }
    }
    for r in &cost.rows {
        let want = ceil_log2(7 * r.k_adjusted);
        ensure!(r.id_bits == want, "q = {}: id bits {} vs ⌈log2(7k)⌉ = {want}", r.q, r.id_bits);
        let per_id_bit = 42 * r.k_adjusted;
        ensure!(
            r.share_bits == per_id_bit * (16 + r.id_bits as u64),
            "q = {}: sharing cost {} is not 42k(L + id)",
            r.q,
            r.share_bits
        );
    }
    ensure!(steps.len() >= 2, "expected at least two id-width steps, saw {steps:?}");
    let curve_txt: Vec<String> = rows.iter().map(|r| format!("{}→{:.3}", r.q, r.pass_rate)).collect();
    Ok(format!(
        "pass curve [{}]; id-width steps at {:?}",
        curve_txt.join(", "),
        steps
    ))
}

fn threshold_arithmetic() -> Outcome {
    let params = experiment(50);
    for l in -1..=1 {
        let want = 0.5 + (l as f64 + 1.0) / 7.0;
        let got = params.delta(l).map_err(|e| e.to_string())?;
        ensure!((got - want).abs() < 1e-15, "δ_{l} = {got}, want {want}");
    }
    let cases: [(u64, [bool; 3]); 3] = [
        // passing groups → acceptance at levels (-1, 0, 1)
        (6, [true, true, true]),
        (5, [true, true, false]),
        (4, [true, false, false]),
    ];

    // Directly on mismatch counts.
    for (passing, want) in cases {
        let counts: BTreeMap<u32, (u64, u64)> = (0..7u32)
            .map(|o| (o, (if (o as u64) < passing { 0 } else { 50 }, 50)))
            .collect();
        let gm = GroupMismatches { recipient: 0, counts };
        for (i, l) in (-1..=1).enumerate() {
            let r = gm.evaluate(l, &params).map_err(|e| e.to_string())?;
            ensure!(r.tests_passed as u64 == passing, "counted {} passes", r.tests_passed);
            ensure!(r.accepted == want[i], "{passing}/7 at level {l}: accepted = {}", r.accepted);
        }
    }

    // End to end: corrupt every tag in the failing groups of recipient 0.
    let mut net = KeyNetwork::new(&NetworkConfig::uniform(8, 1.0, 8)).map_err(|e| e.to_string())?;
    let (signer, recipients) = distribute(&mut net, &params).map_err(|e| e.to_string())?;
    let honest = signer.sign(&random_message(8, 8)).map_err(|e| e.to_string())?;
    let target = &recipients[0];
    let block = 7 * params.k;
    for (passing, want) in cases {
        let (msg, mut tags) = honest.clone().into_parts();
        for (&origin, group) in target.groups() {
            if (origin as u64) >= passing {
                for (slot, _) in group {
                    tags[KeyId::new(origin, *slot).canonical_index(block) as usize].0.flip(0);
                }
            }
        }
        let sig = uss_core::Signature::from_parts(msg, tags);
        let counts = group_mismatches(target, &sig, &params).map_err(|e| e.to_string())?;
        for (i, l) in (-1..=1).enumerate() {
            let r = verify(target, &sig, l, &params).map_err(|e| e.to_string())?;
            ensure!(r.accepted == want[i], "end to end {passing}/7 at level {l}: accepted = {}", r.accepted);
            ensure!(counts.evaluate(l, &params).map_err(|e| e.to_string())? == r, "report mismatch");
        }
    }
    Ok("6/7 → level 1; 5/7 → level 0 only; 4/7 → level -1 only (δ = 0.5 + (l+1)/7)".into())
}

fn informational() -> Outcome {
    let k906 = |a: u32, n: u32| {
        ParamInputs {
            n,
            a,
            k: Some(906),
            ..ParamInputs::default()
        }
        .resolve()
        .expect("resolves")
    };
    for (a, published) in [(1, 14_958u64), (8, 35_898)] {
        let p = k906(a, 7);
        let lit = consumption(&p, CountingMode::Literal).total_bits;
        let acc = consumption(&p, CountingMode::Accounting).total_bits;
        println!(
            "INFO [9] sign {a} bit(s), N = 7, k = 906: published {published}, formula N²ka + N(N-1)(a + ⌈log2 kN⌉) = {lit}, drawn from key stores = {acc} (published value is not reproducible from its own formula)"
        );
    }
    for n in [7, 8] {
        let p = ParamInputs {
            n,
            ..ParamInputs::default()
        }
        .resolve()
        .expect("resolves");
        let acc = consumption(&p, CountingMode::Accounting).total_bits;
        let lit = consumption(&p, CountingMode::Literal).total_bits;
        println!(
            "INFO [9] ~5 Mbit quoted for 8 participants at 1e-10: N = {n}, k = {}, literal {lit} bits, accounting {acc} bits",
            p.k
        );
    }
    let p = experiment(906);
    for rate in [100.0, 1000.0] {
        let est = time_to_ready(&NetworkConfig::uniform(8, rate, 0), &p).map_err(|e| e.to_string())?;
        println!(
            "INFO [9] distribution wall-clock at a uniform {rate} bit/s per link: {:.1} s (binding link {}); measured testbed times depend on per-link rates that are not published",
            est.seconds, est.binding_link
        );
    }
    let per_link = link_usage_summary(&p)?;
    println!("INFO [9] per-link bits for one distribution at k = 906: {per_link}");
    println!("INFO [9] published signature time per bit 1041 s (73 s for 3 receivers) is testbed wall-clock, not modelled");
    Ok("printed, not asserted".into())
}

fn link_usage_summary(p: &ProtocolParams) -> Result<String, String> {
    let mut net = KeyNetwork::new(&NetworkConfig::uniform(8, 1.0, 1)).map_err(|e| e.to_string())?;
    distribute(&mut net, p).map_err(|e| e.to_string())?;
    let used = net.total_consumed();
    let signer = used[&LinkId::new(SIGNER, recipient_user(0)).map_err(|e| e.to_string())?];
    let peer = used[&LinkId::new(recipient_user(0), recipient_user(1)).map_err(|e| e.to_string())?];
    Ok(format!("signer link {signer}, recipient link {peer}"))
}
