use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use questgraph::automata::{fsm_run, DpdaStatus, TmStatus};
use questgraph::cgsim::{growth_fit, run_variant, SimReport, Variant};
use questgraph::compgraph::{bmcg_from_mcg, mcg_from_dag, proxy_count, total_proxy_count, BmcgKind, CgError, Dag, Mcg};
use questgraph::constructions::cfl_nfqdp::simulate_cfl_on_nfqdp;
use questgraph::constructions::dpda_fqdp::simulate_dpda_on_fqdp;
use questgraph::constructions::lm_fsm::{fsm_from_lm, lm_accepts, lm_from_fsm, lm_initial_context, FsmToken};
use questgraph::constructions::tm_qg::simulate_tm_on_questgraph;
use questgraph::constructions::tm_rqdp::{simulate_tm_on_rqdp, TmNodeKind};
use questgraph::qdp::QdpHalt;

use crate::dot::{graph_dot, qdp_dot};
use crate::machine_file::{Machine, MachineFile};

pub const EXIT_AGREE: i32 = 0;
pub const EXIT_DISAGREE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub const BUDGET_ENV: &str = "QUESTGRAPH_BUDGET";
pub const DEFAULT_BUDGET: usize = 10_000;

/// Flag value, else the environment override, else the default.
pub fn resolve_budget(flag: Option<usize>) -> Result<usize> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BUDGET_ENV}={v:?} is not a step count")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Budget,
}

impl Verdict {
    fn word(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Budget => "budget exhausted",
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

impl From<TmStatus> for Verdict {
    fn from(s: TmStatus) -> Self {
        match s {
            TmStatus::Accepted => Verdict::Accept,
            TmStatus::Rejected => Verdict::Reject,
            TmStatus::BudgetExhausted => Verdict::Budget,
        }
    }
}

impl From<DpdaStatus> for Verdict {
    fn from(s: DpdaStatus) -> Self {
        match s {
            DpdaStatus::Accepted => Verdict::Accept,
            DpdaStatus::Rejected => Verdict::Reject,
            DpdaStatus::BudgetExhausted => Verdict::Budget,
        }
    }
}

pub struct RunOutcome {
    pub construction: Verdict,
    pub oracle: Verdict,
    pub steps: usize,
    pub dot: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.construction == Verdict::Budget || self.oracle == Verdict::Budget {
            EXIT_BUDGET
        } else if self.construction == self.oracle {
            EXIT_AGREE
        } else {
            EXIT_DISAGREE
        }
    }

    pub fn summary(&self) -> String {
        let tail = match self.exit_code() {
            EXIT_AGREE => "AGREE".to_string(),
            EXIT_DISAGREE => "DISAGREE".to_string(),
            _ => format!("budget exhausted after {} steps (partial trace)", self.steps),
        };
        format!("{} / oracle: {} / {tail}", self.construction.word(), self.oracle.word())
    }
}

pub const CONSTRUCTIONS: [&str; 5] = ["tm-qg", "dpda-fqdp", "cfl-nfqdp", "tm-rqdp", "lm-fsm"];

fn label<G: std::fmt::Debug, R: std::fmt::Debug>(g: &G, r: &R) -> String {
    format!("{g:?} / {r:?}")
}

/// LM inputs are whitespace-separated tokens, or one token per character
/// when the input has no whitespace.
pub fn lm_tokens(input: &str) -> Vec<String> {
    if input.contains(char::is_whitespace) {
        input.split_whitespace().map(str::to_string).collect()
    } else {
        input.chars().map(String::from).collect()
    }
}

pub fn run_construction(construction: &str, machine: &Machine, input: &str, budget: usize) -> Result<RunOutcome> {
    let mismatch = || anyhow::anyhow!("{construction} cannot run a {} machine", machine.kind());
    Ok(match construction {
        "tm-qg" => {
            let Machine::Tm(tm) = machine else { return Err(mismatch()) };
            let sim = simulate_tm_on_questgraph(tm, input, budget);
            RunOutcome {
                construction: sim.status.into(),
                oracle: sim.oracle.status.into(),
                steps: sim.actions,
                dot: graph_dot(&sim.graph, sim.actions, |_, r| format!("{r:?}")).ok(),
            }
        }
        "dpda-fqdp" => {
            let Machine::Dpda(d) = machine else { return Err(mismatch()) };
            let sim = simulate_dpda_on_fqdp(d, input, budget)?;
            let m = &sim.run.machine;
            RunOutcome {
                construction: sim.status.into(),
                oracle: sim.oracle.into(),
                steps: sim.run.steps(),
                dot: qdp_dot(m, label, |k, _| k.to_string()).ok(),
            }
        }
        "cfl-nfqdp" => {
            let Machine::Grammar(g) = machine else { return Err(mismatch()) };
            let sim = simulate_cfl_on_nfqdp(g, input, budget);
            let construction = if sim.run.reason == QdpHalt::BudgetExhausted {
                Verdict::Budget
            } else {
                Verdict::from_bool(sim.accepted)
            };
            RunOutcome {
                construction,
                oracle: Verdict::from_bool(sim.oracle),
                steps: sim.run.steps(),
                dot: qdp_dot(&sim.run.machine, label, |k, _| k.to_string()).ok(),
            }
        }
        "tm-rqdp" => {
            let Machine::Tm(tm) = machine else { return Err(mismatch()) };
            let sim = simulate_tm_on_rqdp(tm, input, budget);
            let q = sim.machine.qdp();
            let edge = |k: &str, g: &questgraph::constructions::tm_rqdp::TmGoal| match g.kind {
                TmNodeKind::Fetch => "ret".to_string(),
                TmNodeKind::Write => "R".to_string(),
                _ => k.to_string(),
            };
            RunOutcome {
                construction: sim.status.into(),
                oracle: sim.oracle.status.into(),
                steps: q.trace().len(),
                dot: qdp_dot(q, label, edge).ok(),
            }
        }
        "lm-fsm" => match machine {
            Machine::Fsm(f) => {
                let chars: Vec<char> = input.chars().collect();
                if let Some(c) = chars.iter().find(|c| !f.alphabet.contains(c)) {
                    bail!("input symbol {c:?} is not in the FSM alphabet");
                }
                let lm = lm_from_fsm(f);
                let toks: Vec<_> = chars.iter().map(|&c| FsmToken::Symbol(c)).collect();
                RunOutcome {
                    construction: Verdict::from_bool(lm_accepts(&lm, &lm_initial_context(f), &toks)?),
                    oracle: Verdict::from_bool(fsm_run(f, &chars).accepted),
                    steps: chars.len(),
                    dot: None,
                }
            }
            Machine::Lm { table, initial_context } => {
                let toks = lm_tokens(input);
                let inputs: Vec<String> = table.vocabulary.iter().cloned().collect();
                let oracle = Verdict::from_bool(lm_accepts(table, initial_context, &toks)?);
                let construction = match fsm_from_lm(table, initial_context, &inputs, budget) {
                    Ok(fsm) => Verdict::from_bool(fsm_run(&fsm, &toks).accepted),
                    Err(questgraph::constructions::lm_fsm::LmFsmError::Overflow { .. }) => Verdict::Budget,
                    Err(e) => return Err(e.into()),
                };
                RunOutcome {
                    construction,
                    oracle,
                    steps: toks.len(),
                    dot: None,
                }
            }
            _ => return Err(mismatch()),
        },
        other => bail!("unknown construction {other:?}; expected one of {}", CONSTRUCTIONS.join(", ")),
    })
}

pub fn cmd_run(construction: &str, file: &Path, input: &str, budget: Option<usize>, trace_dot: Option<&Path>) -> Result<i32> {
    let budget = resolve_budget(budget)?;
    if !CONSTRUCTIONS.contains(&construction) {
        bail!("unknown construction {construction:?}; expected one of {}", CONSTRUCTIONS.join(", "));
    }
    let machine = MachineFile::load(file)?;
    let outcome = run_construction(construction, &machine, input, budget)?;
    println!("{}", outcome.summary());
    if let Some(path) = trace_dot {
        match &outcome.dot {
            Some(dot) => fs::write(path, dot).with_context(|| format!("cannot write {}", path.display()))?,
            None => eprintln!("warning: {construction} produced no trace to render"),
        }
    }
    Ok(outcome.exit_code())
}

pub struct BenchArgs {
    pub variants: Vec<Variant>,
    pub ns: Vec<usize>,
    pub c: usize,
    pub cap: usize,
    pub out: Option<PathBuf>,
}

/// Runs every variant at every N and writes one CSV row per completed run.
pub fn cmd_bench(args: &BenchArgs) -> Result<(i32, Vec<SimReport>)> {
    if args.ns.is_empty() {
        bail!("--N needs at least one size");
    }
    let mut reports = Vec::new();
    for &v in &args.variants {
        for &n in &args.ns {
            if v == Variant::Fqdp && n > args.cap {
                eprintln!("warning: skipping fqdp at N={n}, above --cap {}", args.cap);
                continue;
            }
            match run_variant(v, n, args.c, args.cap) {
                Ok(r) => reports.push(r),
                Err(e) => eprintln!("warning: skipping {v} at N={n}: {e}"),
            }
        }
    }
    let mut csv = format!("{}\n", SimReport::CSV_HEADER);
    for r in &reports {
        writeln!(csv, "{}", r.csv_row()).unwrap();
    }
    match &args.out {
        Some(p) => fs::write(p, &csv).with_context(|| format!("cannot write {}", p.display()))?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    let mut summary = String::from("variant  runs  slope   super-poly\n");
    for &v in &args.variants {
        let pts: Vec<(usize, f64)> = reports
            .iter()
            .filter(|r| r.variant == v)
            .map(|r| (r.n, r.ops.weighted()))
            .collect();
        match growth_fit(&pts) {
            Ok(f) => writeln!(summary, "{:<8} {:>4}  {:>6.3}  {}", v.to_string(), pts.len(), f.slope, f.super_polynomial),
            Err(_) => writeln!(summary, "{:<8} {:>4}  n/a (fit needs 5 sizes)", v.to_string(), pts.len()),
        }
        .unwrap();
    }
    eprint!("{summary}");
    Ok((EXIT_AGREE, reports))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Mcg,
    Bmcg,
}

/// Labels in order of first appearance, matching the edge-list parser's numbering.
fn first_appearance_labels(text: &str) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for line in text.lines() {
        for tok in line.split('#').next().unwrap_or("").split_whitespace() {
            if !labels.iter().any(|l| l == tok) {
                labels.push(tok.to_string());
            }
        }
    }
    labels
}

pub fn render_graph(text: &str, c: usize, emit: Emit) -> Result<String> {
    let dag = Dag::parse_edge_list(text).map_err(|e| match e {
        CgError::Cycle { from, to } => {
            let l = first_appearance_labels(text);
            anyhow::anyhow!("cycle closed by edge {} -> {}", l[from], l[to])
        }
        other => anyhow::Error::new(other),
    })?;
    let mcg = mcg_from_dag(&dag);
    let n = mcg.len();
    let (closed, brute) = total_proxy_count(n, c)?;
    let widest = proxy_count(n.saturating_sub(1), c)?;
    let mut out = String::new();
    let edges = match emit {
        Emit::Mcg => {
            for (j, i) in mcg.edges() {
                writeln!(out, "{} {}", mcg.labels[j], mcg.labels[i]).unwrap();
            }
            mcg.edge_count()
        }
        Emit::Bmcg => {
            let b = bmcg_from_mcg(&mcg, c)?;
            let names = bmcg_names(&mcg, &b.kinds);
            for (v, ins) in b.inputs.iter().enumerate() {
                for &u in ins {
                    writeln!(out, "{} {}", names[u], names[v]).unwrap();
                }
            }
            writeln!(out, "# proxies = {}", b.proxy_total()).unwrap();
            b.edge_count()
        }
    };
    writeln!(out, "# N = {n}").unwrap();
    writeln!(out, "# edges = {edges}").unwrap();
    writeln!(out, "# N+ closed form = {closed}, brute sum = {brute} (C = {c})").unwrap();
    writeln!(out, "# proxies for the widest node = {widest}").unwrap();
    Ok(out)
}

fn bmcg_names(mcg: &Mcg, kinds: &[BmcgKind]) -> Vec<String> {
    let mut seen = vec![0usize; mcg.len()];
    kinds
        .iter()
        .map(|k| match *k {
            BmcgKind::Original(p) | BmcgKind::Terminal(p) => mcg.labels[p].clone(),
            BmcgKind::Proxy(p) => {
                seen[p] += 1;
                format!("{}~p{}", mcg.labels[p], seen[p])
            }
        })
        .collect()
}

pub fn cmd_graph(path: &Path, c: usize, emit: Emit, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let rendered = render_graph(&text, c, emit)?;
    match out {
        Some(p) => fs::write(p, rendered).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{rendered}"),
    }
    Ok(EXIT_AGREE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_mcg_has_six_edges() {
        let out = render_graph("a b\nb c\nc d\n", 4, Emit::Mcg).unwrap();
        assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 6);
        assert!(out.contains("# edges = 6"));
    }

    #[test]
    fn star_needs_three_proxies_at_c2() {
        let out = render_graph("a h\nb h\nc h\nd h\ne h\n", 2, Emit::Bmcg).unwrap();
        assert!(out.contains("# proxies for the widest node = 3"), "{out}");
        assert!(out.lines().any(|l| l.contains("h~p")));
    }

    #[test]
    fn cycle_reports_back_edge() {
        let err = render_graph("a b\nb c\nc a\n", 2, Emit::Mcg).unwrap_err().to_string();
        assert!(err.contains("cycle closed by edge"), "{err}");
    }

    #[test]
    fn lm_token_splitting() {
        assert_eq!(lm_tokens("ab"), vec!["a", "b"]);
        assert_eq!(lm_tokens("x1 y2"), vec!["x1", "y2"]);
    }
}
