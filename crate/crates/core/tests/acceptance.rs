//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the libtest
//! harness so the lines always reach stdout; exits non-zero if any line fails.

mod common;

use std::time::{Duration, Instant};

use questgraph::automata::{cyk_member, dpda_run, fixtures, fsm_run};
use questgraph::cgsim::{
    growth_fit, lm_window_witness, s_bounds, sim_fqdp, sim_questgraph, sim_rqdp, SimReport,
};
use questgraph::compgraph::{bmcg_from_mcg, proxy_count, total_proxy_count, Mcg};
use questgraph::constructions::cfl_nfqdp::{build_parse_graph, catalan, simulate_cfl_on_nfqdp};
use questgraph::constructions::dpda_fqdp::{simulate_dpda_on_fqdp, CAPACITY as DPDA_CAPACITY};
use questgraph::constructions::lm_fsm::{fsm_from_lm, lm_from_fsm, lm_initial_context, symbol_tokens, FsmToken};
use questgraph::constructions::tm_qg::simulate_tm_on_questgraph;
use questgraph::constructions::tm_rqdp::{simulate_tm_on_rqdp, TmResp};
use questgraph::qdp::QdpMode;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{fuzz_kernel, fuzz_qdp, random_cnf, random_tm, random_tm_input, words};

type Outcome = Result<String, String>;

fn report(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
        Err(e) => (false, e),
    };
    println!(
        "[{}] {id:>2}. {title} ({:.2?}): {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    ok
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn proxy_table() -> Outcome {
    let table: [(usize, [usize; 11]); 3] = [
        (2, [0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9]),
        (3, [0, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4]),
        (4, [0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 3]),
    ];
    for (c, row) in table {
        for (i, &want) in row.iter().enumerate() {
            let got = proxy_count(i + 1, c).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("k({}) for C={c} is {got}, expected {want}", i + 1))?;
        }
    }
    Ok("33/33 table values".into())
}

fn closed_form() -> Outcome {
    let mut checked = 0;
    for c in 2..=8 {
        for n in 0..=500 {
            let (closed, brute) = total_proxy_count(n, c).map_err(|e| e.to_string())?;
            ensure(closed == brute, || format!("N={n} C={c}: closed {closed} vs sum {brute}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (N, C) pairs"))
}

fn tm_cases() -> Vec<(String, questgraph::automata::TuringMachine, String)> {
    let mut cases = Vec::new();
    for (name, tm, inputs) in fixtures::tm_fixtures() {
        for w in inputs {
            cases.push((name.to_string(), tm.clone(), w.to_string()));
        }
    }
    let mut rng = StdRng::seed_from_u64(0x7e57);
    for i in 0..120 {
        let tm = random_tm(&mut rng);
        let w = random_tm_input(&mut rng);
        cases.push((format!("random#{i}"), tm, w));
    }
    cases
}

fn tm_conformance() -> Outcome {
    let cases = tm_cases();
    for (name, tm, w) in &cases {
        let sim = simulate_tm_on_questgraph(tm, w, 500);
        ensure(sim.agrees, || {
            format!("{name} on {w:?}: {:?} vs oracle {:?}", sim.status, sim.oracle.status)
        })?;
        ensure(sim.violations.is_empty(), || format!("{name} on {w:?}: {:?}", sim.violations))?;
    }
    Ok(format!("{} runs (3 fixtures, 120 random machines)", cases.len()))
}

fn rqdp_conformance() -> Outcome {
    let cases = tm_cases();
    for (name, tm, w) in &cases {
        let sim = simulate_tm_on_rqdp(tm, w, 500);
        ensure(sim.agrees, || {
            format!("{name} on {w:?}: {:?} vs oracle {:?}", sim.status, sim.oracle.status)
        })?;
        ensure(sim.violations.is_empty(), || format!("{name} on {w:?}: {:?}", sim.violations))?;
        let n = sim.heads.len().min(sim.oracle.heads.len());
        ensure(sim.heads[..n] == sim.oracle.heads[..n], || {
            format!("{name} on {w:?}: heads {:?} vs {:?}", sim.heads, sim.oracle.heads)
        })?;
    }
    let sim = simulate_tm_on_rqdp(&fixtures::scripted_rrlrrlll_tm(), fixtures::SCRIPTED_INPUT, 100);
    let rg = sim.halt_refgraph.ok_or("scripted machine never reached its halting state")?;
    let cell = |s: &str, t: char| TmResp::Cell {
        state: Some(s.to_string()),
        symbol: t,
    };
    let want = [(0, cell("s8", 'B')), (1, cell("s8", 'B')), (2, cell("s7", 'A')), (3, cell("s6", '9'))];
    ensure(rg.len() == 4 && want.iter().all(|(k, v)| rg.get(k) == Some(v)), || {
        format!("scripted reference graph {rg:?}")
    })?;
    Ok(format!("{} runs; scripted machine: 4 references match", cases.len()))
}

fn dpda_bisimulation() -> Outcome {
    let mut runs = 0;
    let fx = fixtures::dpda_fixtures();
    ensure(fx.len() >= 5, || format!("only {} fixtures", fx.len()))?;
    for (name, d) in &fx {
        let alphabet: Vec<char> = d.input_alphabet.iter().copied().collect();
        for w in words(&alphabet, 10) {
            let sim = simulate_dpda_on_fqdp(d, &w, 200).map_err(|e| format!("{name}: {e}"))?;
            ensure(sim.agrees, || format!("{name} on {w:?}: {:?} vs {:?}", sim.status, sim.oracle))?;
            ensure(sim.max_focus_degree <= DPDA_CAPACITY, || {
                format!("{name} on {w:?}: focus degree {}", sim.max_focus_degree)
            })?;
            runs += 1;
        }
    }
    let dyck = fixtures::dyck_dpda();
    let sim = simulate_dpda_on_fqdp(&dyck, "aababb", 200).map_err(|e| e.to_string())?;
    ensure(
        sim.status == questgraph::automata::DpdaStatus::Accepted
            && dpda_run(&dyck, "aababb", 200).status == questgraph::automata::DpdaStatus::Accepted,
        || format!("aababb: {:?}", sim.status),
    )?;
    Ok(format!("{} fixtures, {runs} strings; aababb accepted", fx.len()))
}

fn cfl_acceptance() -> Outcome {
    let anbn = fixtures::anbn_grammar();
    let anbn_words: Vec<String> = words(&['a', 'b'], 8).into_iter().filter(|w| !w.is_empty()).collect();
    ensure(anbn_words.len() == 510, || format!("{} strings", anbn_words.len()))?;
    let check = |g: &questgraph::automata::CnfGrammar, w: &str, tag: &str| -> Result<(), String> {
        let sim = simulate_cfl_on_nfqdp(g, w, 1 << 24);
        let oracle = cyk_member(g, &w.chars().collect::<Vec<_>>()).member;
        ensure(sim.agrees && sim.accepted == oracle, || {
            format!("{tag} on {w:?}: agent {} vs cyk {oracle}", sim.accepted)
        })
    };
    for w in &anbn_words {
        check(&anbn, w, "a^n b^n grammar")?;
    }
    let mut rng = StdRng::seed_from_u64(0xc0f);
    let short = words(&['a', 'b'], 6);
    for i in 0..20 {
        let g = random_cnf(&mut rng);
        for w in &short {
            check(&g, w, &format!("random grammar #{i}"))?;
        }
    }
    for n in 1..=8 {
        let roots = build_parse_graph(&"a".repeat(n)).roots.len();
        ensure(roots == catalan(n - 1), || format!("n={n}: {roots} roots"))?;
    }
    Ok(format!("510 + {} strings; root counts n ≤ 8 match", 20 * short.len()))
}

fn lm_round_trip() -> Outcome {
    let fx = fixtures::fsm_fixtures();
    ensure(fx.len() >= 5, || format!("only {} FSM fixtures", fx.len()))?;
    let mut strings = 0;
    for f in &fx {
        let lm = lm_from_fsm(f);
        let back = fsm_from_lm(&lm, &lm_initial_context(f), &symbol_tokens(f), 10_000).map_err(|e| e.to_string())?;
        let alphabet: Vec<char> = f.alphabet.iter().copied().collect();
        for w in words(&alphabet, 8) {
            let chars: Vec<char> = w.chars().collect();
            let toks: Vec<_> = chars.iter().map(|&a| FsmToken::Symbol(a)).collect();
            ensure(fsm_run(&back, &toks).accepted == fsm_run(f, &chars).accepted, || {
                format!("disagreement on {w:?}")
            })?;
            strings += 1;
        }
    }
    Ok(format!("{} FSMs, {strings} strings", fx.len()))
}

fn complexity() -> Outcome {
    let sweep = [8, 16, 32, 64, 128];
    let qg: Vec<SimReport> = sweep
        .iter()
        .map(|&n| sim_questgraph(&bmcg_from_mcg(&Mcg::complete(n), 4)?))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for r in &qg {
        ensure(r.computes.iter().all(|&c| c == 1), || format!("qg N={}: a node computed twice", r.n))?;
    }
    let pts: Vec<(usize, f64)> = qg.iter().map(|r| (r.n, r.ops.raw() as f64)).collect();
    let slope = growth_fit(&pts).map_err(|e| e.to_string())?.slope;
    ensure((1.6..=2.2).contains(&slope), || format!("(a) quest graph slope {slope:.3}"))?;

    let mut ratios = Vec::new();
    for &n in &sweep {
        let r = sim_rqdp(&Mcg::complete(n), 4).map_err(|e| e.to_string())?;
        ensure(r.ops.retrieve == n * (n - 1) / 2, || format!("(b) N={n}: {} retrieves", r.ops.retrieve))?;
        ratios.push(r.ops.weighted() / ((n * n) as f64 * (n as f64).log2()));
    }
    let spread = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
    ensure(spread < 2.0, || format!("(b) weighted ratio spread {spread:.3}"))?;

    for n in 4..=14 {
        let b = bmcg_from_mcg(&Mcg::complete(n), (n - 1).max(2)).map_err(|e| e.to_string())?;
        ensure(b.proxy_total() == 0, || format!("(c) N={n} has proxies"))?;
        let r = sim_fqdp(&b, 16).map_err(|e| e.to_string())?;
        let (lo, hi) = s_bounds(n);
        let got = r.total_computes() as u128;
        ensure(lo <= got && got <= hi, || format!("(c) N={n}: {got} outside [{lo}, {hi}]"))?;
    }

    for n in 1..=30 {
        let (lo, hi) = s_bounds(n);
        ensure(lo == 1 << (n - 1) && hi == (1 << n) - 1, || format!("(d) N={n}"))?;
    }
    Ok(format!(
        "(a) slope {slope:.3}; (b) exact retrieves, ratio spread {spread:.3}; (c) 11 sizes in bounds; (d) N ≤ 30"
    ))
}

fn lm_witness() -> Outcome {
    let ns: Vec<usize> = (1..=64).collect();
    let mut found = Vec::new();
    for c in [2, 3, 4] {
        let w = lm_window_witness(&ns, c).map_err(|e| e.to_string())?;
        found.push(w.witness.ok_or(format!("no witness for C={c}"))?);
    }
    ensure(found.windows(2).all(|p| p[0] <= p[1]), || format!("witnesses {found:?} not monotone"))?;
    Ok(format!("witness N for C = 2, 3, 4: {found:?}"))
}

fn kernel_properties() -> Outcome {
    let mut sequences = 0;
    let mut actions = 0;
    for seed in 0..4_000u64 {
        fuzz_kernel(seed, 1 + (seed % 4) as usize, 40)?;
        sequences += 1;
    }
    for seed in 0..3_500u64 {
        actions += fuzz_qdp(seed, QdpMode::Fqdp, 60)?;
        actions += fuzz_qdp(seed, QdpMode::Nfqdp, 60)?;
        sequences += 2;
    }
    Ok(format!("{sequences} sequences ({actions} QDP actions)"))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        report(1, "proxy-count table", s(1), proxy_table),
        report(2, "closed-form proxy total", s(5), closed_form),
        report(3, "TM on Quest Graph", s(30), tm_conformance),
        report(4, "TM on RQDP", s(30), rqdp_conformance),
        report(5, "DPDA bisimulation", s(60), dpda_bisimulation),
        report(6, "CFL acceptance", s(60), cfl_acceptance),
        report(7, "LM/FSM round trip", s(10), lm_round_trip),
        report(8, "complexity hierarchy", s(120), complexity),
        report(9, "LM window witness", s(10), lm_witness),
        report(10, "kernel properties", s(60), kernel_properties),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
