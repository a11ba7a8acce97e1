//! Operation-counted simulations of computation graphs under each machine
//! class, plus the closed-form bounds they are checked against.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use crate::compgraph::{bmcg_from_mcg, Bmcg, BmcgKind, CgError, Mcg};
use crate::graph::{
    run_with_selector, AgentAction, EdgePtr, HaltReason, LocalContext, NoRule, NodeId, QuestGraph,
};
use crate::qdp::{
    fqdp_run, FqdpConfig, QdpAction, QdpContext, QdpCounts, QdpHalt, QdpMode, QdpResponse,
};
use crate::reference::{rqdp_run, RqdpMachine};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    QuestGraph,
    Rqdp,
    Fqdp,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qg" | "questgraph" => Some(Variant::QuestGraph),
            "rqdp" => Some(Variant::Rqdp),
            "fqdp" => Some(Variant::Fqdp),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::QuestGraph => "qg",
            Variant::Rqdp => "rqdp",
            Variant::Fqdp => "fqdp",
        })
    }
}

/// Agent actions by kind. Retrieves also carry a log-weighted cost.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OpCounter {
    pub discover: usize,
    pub respond_move: usize,
    pub retrieve: usize,
    pub stop: usize,
    /// Sum over retrieves of log₂(max(2, active references)).
    pub retrieve_weight: f64,
}

impl OpCounter {
    pub fn raw(&self) -> usize {
        self.discover + self.respond_move + self.retrieve + self.stop
    }

    /// One unit per action, with each retrieve replaced by its log weight.
    pub fn weighted(&self) -> f64 {
        (self.raw() - self.retrieve) as f64 + self.retrieve_weight
    }

    fn from_qdp(c: QdpCounts, retrieve_weight: f64) -> Self {
        OpCounter {
            discover: c.discover_input + c.discover_subquest,
            respond_move: c.pursue + c.complete,
            retrieve: c.retrieve,
            stop: c.stop,
            retrieve_weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub variant: Variant,
    /// Nodes of the underlying MCG.
    pub n: usize,
    pub c: usize,
    pub ops: OpCounter,
    /// Compute events per node (BMCG nodes for the graph walkers, MCG nodes for RQDP).
    pub computes: Vec<usize>,
    pub halted: bool,
    pub wall_ms: f64,
}

impl SimReport {
    pub fn total_computes(&self) -> usize {
        self.computes.iter().sum()
    }

    pub const CSV_HEADER: &'static str = "variant,N,C,raw_ops,weighted_cost,wall_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3}",
            self.variant,
            self.n,
            self.c,
            self.ops.raw(),
            self.ops.weighted(),
            self.wall_ms
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] CgError),
    #[error("N = {n} exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("capacity {0} is too small for this simulation")]
    Capacity(usize),
    #[error("simulation did not halt: {0}")]
    NoHalt(String),
}

/// Symbolic node value: the index of the node that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CgResp {
    Empty,
    Pi,
    /// A dependent waiting on one of its inputs.
    Waiting,
    Done(usize),
}

impl QdpResponse for CgResp {
    fn empty() -> Self {
        CgResp::Empty
    }
    fn parent_mark() -> Self {
        CgResp::Pi
    }
}

fn original_count(b: &Bmcg) -> usize {
    b.kinds.iter().filter(|k| !matches!(k, BmcgKind::Proxy(_))).count()
}

/// Neighbours in context order: incomplete inputs, waiting dependents (most
/// recent first), then complete inputs. Once no input is pending, the dependent
/// to return to is always in view.
fn dependency_selector(g: &QuestGraph<usize, CgResp>, focus: NodeId, cap: usize) -> Vec<NodeId> {
    let me = g.node(focus).goal;
    let mut pending = Vec::new();
    let mut done = Vec::new();
    let mut waiting = Vec::new();
    for &u in g.neighbors(focus) {
        let n = g.node(u);
        match (n.goal < me, &n.response) {
            (true, CgResp::Empty) => pending.push(u),
            (true, _) => done.push(u),
            (false, CgResp::Waiting) => waiting.push(u),
            (false, _) => {}
        }
    }
    waiting.sort_by_key(|&u| std::cmp::Reverse(g.node(u).updated_at));
    pending.into_iter().chain(waiting).chain(done).take(cap).collect()
}

fn dependency_agent(ctx: &LocalContext<usize, CgResp>) -> Result<AgentAction<usize, CgResp>, NoRule> {
    let me = ctx.focus.goal;
    if let CgResp::Done(_) = ctx.focus.response {
        return Ok(AgentAction::Stop);
    }
    if let Some(i) = ctx
        .neighbors
        .iter()
        .position(|n| n.goal < me && n.response == CgResp::Empty)
    {
        return Ok(AgentAction::RespondMove {
            response: CgResp::Waiting,
            to: EdgePtr::Neighbor(i),
        });
    }
    let back = ctx
        .neighbors
        .iter()
        .position(|n| n.goal > me && n.response == CgResp::Waiting);
    Ok(AgentAction::RespondMove {
        response: CgResp::Done(me),
        to: back.map_or(EdgePtr::SelfLoop, EdgePtr::Neighbor),
    })
}

/// Depth-first walk of the pre-instantiated BMCG from its terminal: descend into
/// an incomplete input, compute once all inputs are done, return to the waiting
/// dependent.
pub fn sim_questgraph(bmcg: &Bmcg) -> Result<SimReport, SimError> {
    let start = Instant::now();
    let nodes: Vec<(usize, CgResp)> = (0..bmcg.len()).map(|i| (i, CgResp::Empty)).collect();
    let edges: Vec<(usize, usize)> = bmcg
        .inputs
        .iter()
        .enumerate()
        .flat_map(|(v, ins)| ins.iter().map(move |&u| (u, v)))
        .collect();
    let last = bmcg.len().checked_sub(1).ok_or(SimError::Graph(CgError::Empty))?;
    let graph = QuestGraph::new(nodes, &edges, last).map_err(|e| SimError::NoHalt(e.to_string()))?;
    let budget = 4 * bmcg.len() + 16;
    let run = run_with_selector(graph, &dependency_agent, bmcg.bound, budget, &dependency_selector);
    let mut computes = vec![0; bmcg.len()];
    for ev in &run.trace {
        if let AgentAction::RespondMove {
            response: CgResp::Done(_),
            ..
        } = ev.action
        {
            computes[ev.focus] += 1;
        }
    }
    let halted = run.reason == HaltReason::Stopped
        && run.graph.nodes().iter().all(|n| matches!(n.response, CgResp::Done(_)));
    if !halted {
        return Err(SimError::NoHalt(format!("{:?}", run.reason)));
    }
    Ok(SimReport {
        variant: Variant::QuestGraph,
        n: original_count(bmcg),
        c: bmcg.bound,
        ops: OpCounter {
            discover: run.counts.discover,
            respond_move: run.counts.respond_move,
            retrieve: 0,
            stop: run.counts.stop,
            retrieve_weight: 0.0,
        },
        computes,
        halted,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// `Scan { node, k }` checks the k-th dependency of `node`; `k == 0` is the
/// quest for the node itself.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MemoGoal {
    Scan { node: usize, k: usize },
    Fetch(usize),
}

/// One reference per graph node, named by the goal.
fn memo_tau(_: &usize, g: &MemoGoal) -> usize {
    match g {
        MemoGoal::Scan { node, .. } => *node,
        MemoGoal::Fetch(j) => *j,
    }
}

fn memo_agent<'a>(
    deps: &'a [Vec<usize>],
) -> impl Fn(&QdpContext<MemoGoal, CgResp>) -> Result<QdpAction<MemoGoal, CgResp>, NoRule> + 'a {
    move |ctx| {
        let MemoGoal::Scan { node, k } = ctx.focus.goal else {
            return Err(NoRule("focus is a fetch node".into()));
        };
        if ctx.is_root() && matches!(ctx.focus.response, CgResp::Done(_)) {
            return Ok(QdpAction::Stop);
        }
        let ds = &deps[node];
        if k == ds.len() {
            return Ok(QdpAction::CompleteQuest {
                response: CgResp::Done(node),
            });
        }
        let next = QdpAction::DiscoverSubquest {
            goal: MemoGoal::Scan { node, k: k + 1 },
        };
        match ctx.last_child() {
            None => Ok(QdpAction::Retrieve {
                goal: MemoGoal::Fetch(ds[k]),
            }),
            Some(c) => match (&c.goal, &c.response) {
                (MemoGoal::Fetch(_), CgResp::Done(_)) => Ok(next),
                (MemoGoal::Fetch(j), CgResp::Empty) => Ok(QdpAction::DiscoverSubquest {
                    goal: MemoGoal::Scan { node: *j, k: 0 },
                }),
                (MemoGoal::Scan { node: j, .. }, CgResp::Done(_)) if *j != node => Ok(next),
                (MemoGoal::Scan { .. }, r @ CgResp::Done(_)) => {
                    Ok(QdpAction::CompleteQuest { response: r.clone() })
                }
                (g, r) => Err(NoRule(format!("last child {g:?} holds {r:?}"))),
            },
        }
    }
}

/// Memoized depth-first evaluation of the node `deps.len() - 1`: every
/// dependency is retrieved once per edge and computed only on a miss.
pub fn sim_rqdp_deps(deps: &[Vec<usize>], c: usize) -> Result<SimReport, SimError> {
    if c < 4 {
        return Err(SimError::Capacity(c));
    }
    let n = deps.len();
    let root = n.checked_sub(1).ok_or(SimError::Graph(CgError::Empty))?;
    let start = Instant::now();
    let machine = RqdpMachine::new(
        QdpMode::Fqdp,
        FqdpConfig::new(3, c),
        MemoGoal::Scan { node: root, k: 0 },
        root,
        memo_tau,
    );
    let edges: usize = deps.iter().map(Vec::len).sum();
    let budget = 4 * (edges + n) + 16;
    let agent = memo_agent(deps);
    let mut no_input = |_: &MemoGoal| CgResp::Empty;
    let run = rqdp_run(machine, &agent, &mut no_input, budget);
    if run.reason != QdpHalt::Stopped {
        return Err(SimError::NoHalt(format!("{:?}", run.reason)));
    }
    let q = run.machine.qdp();
    let mut computes = vec![0; n];
    for ev in q.trace() {
        if let QdpAction::CompleteQuest { .. } = ev.action {
            if let MemoGoal::Scan { node, k } = q.goal(ev.focus) {
                if *k == deps[*node].len() {
                    computes[*node] += 1;
                }
            }
        }
    }
    Ok(SimReport {
        variant: Variant::Rqdp,
        n,
        c,
        ops: OpCounter::from_qdp(q.counts(), run.machine.weighted_retrieve_cost()),
        computes,
        halted: true,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn sim_rqdp(mcg: &Mcg, c: usize) -> Result<SimReport, SimError> {
    let deps: Vec<Vec<usize>> = (0..mcg.len()).map(|p| (0..p).collect()).collect();
    sim_rqdp_deps(&deps, c)
}

/// Dependencies of node `p` are `p - 1` and `p - 2`.
pub fn fibonacci_deps(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|p| (p.saturating_sub(2)..p).collect()).collect()
}

/// Full re-computation: every input of every node is recomputed as a fresh
/// sub-quest. Capacity is the bound plus one so the parent stays visible.
pub fn sim_fqdp(bmcg: &Bmcg, n_cap: usize) -> Result<SimReport, SimError> {
    let n = original_count(bmcg);
    if n > n_cap {
        return Err(SimError::TooLarge { n, cap: n_cap });
    }
    let root = bmcg.len().checked_sub(1).ok_or(SimError::Graph(CgError::Empty))?;
    let start = Instant::now();
    let inputs = &bmcg.inputs;
    let agent = |ctx: &QdpContext<usize, CgResp>| -> Result<QdpAction<usize, CgResp>, NoRule> {
        let v = ctx.focus.goal;
        if ctx.is_root() && matches!(ctx.focus.response, CgResp::Done(_)) {
            return Ok(QdpAction::Stop);
        }
        Ok(match inputs[v].get(ctx.child_count) {
            Some(&u) => QdpAction::DiscoverSubquest { goal: u },
            None => QdpAction::CompleteQuest {
                response: CgResp::Done(v),
            },
        })
    };
    let bound = bmcg.bound.max(bmcg.max_in_degree()).max(1);
    let config = FqdpConfig::new(bound, bound + 1);
    let budget = 3usize.saturating_mul(1usize << (n + 2).min(60)) + 64;
    let mut no_input = |_: &usize| CgResp::Empty;
    let run = fqdp_run(root, &agent, config, &mut no_input, budget);
    if run.reason != QdpHalt::Stopped {
        return Err(SimError::NoHalt(format!("{:?}", run.reason)));
    }
    let m = &run.machine;
    let mut computes = vec![0; bmcg.len()];
    for ev in m.trace() {
        if let QdpAction::CompleteQuest { .. } = ev.action {
            computes[*m.goal(ev.focus)] += 1;
        }
    }
    Ok(SimReport {
        variant: Variant::Fqdp,
        n,
        c: bmcg.bound,
        ops: OpCounter::from_qdp(m.counts(), 0.0),
        computes,
        halted: true,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Compute events on original nodes only, as the proxy-free recurrence counts them.
pub fn original_computes(bmcg: &Bmcg, report: &SimReport) -> usize {
    bmcg.kinds
        .iter()
        .zip(&report.computes)
        .filter(|(k, _)| !matches!(k, BmcgKind::Proxy(_)))
        .map(|(_, c)| c)
        .sum()
}

/// `(S⁻(n), S⁺(n))` by recurrence, asserted equal to `2^(n-1)` and `2^n - 1`.
pub fn s_bounds(n: usize) -> (u128, u128) {
    assert!((1..=127).contains(&n), "s_bounds needs 1 <= n <= 127");
    let mut lo = vec![0u128; n + 1];
    let mut hi = vec![0u128; n + 1];
    for i in 1..=n {
        lo[i] = 1 + lo[1..i].iter().sum::<u128>();
        hi[i] = i as u128 + hi[1..i].iter().sum::<u128>();
    }
    assert_eq!(lo[n], 1u128 << (n - 1));
    assert_eq!(hi[n], (1u128 << n) - 1);
    (lo[n], hi[n])
}

/// Most values held at once by a sequential evaluation of the BMCG in index
/// order: a value is live from its computation until its last consumer runs.
pub fn max_live_intermediates(bmcg: &Bmcg) -> usize {
    let n = bmcg.len();
    let mut last_use = vec![None; n];
    for (v, ins) in bmcg.inputs.iter().enumerate() {
        for &u in ins {
            last_use[u] = Some(v);
        }
    }
    let mut best = 0;
    for t in 0..n {
        let live = (0..t).filter(|&u| last_use[u].is_some_and(|l| l >= t)).count();
        best = best.max(live);
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowWitness {
    pub c: usize,
    /// `(N, max live intermediates)` for each N examined.
    pub profile: Vec<(usize, usize)>,
    /// First N whose evaluation needs more than `c` live values.
    pub witness: Option<usize>,
}

/// Searches `ns` for the first MCG size whose bounded form cannot be evaluated
/// within a window of `c` intermediate results.
pub fn lm_window_witness(ns: &[usize], c: usize) -> Result<WindowWitness, SimError> {
    let mut profile = Vec::new();
    let mut witness = None;
    for &n in ns {
        let b = bmcg_from_mcg(&Mcg::complete(n), c)?;
        let live = max_live_intermediates(&b);
        profile.push((n, live));
        if live > c && witness.is_none() {
            witness = Some(n);
        }
    }
    Ok(WindowWitness {
        c,
        profile,
        witness,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of ln(cost) on ln(N).
    pub slope: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Local slope over the last three points exceeds that over the first three by more than 0.5.
    pub super_polynomial: bool,
}

fn fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

pub fn growth_fit(points: &[(usize, f64)]) -> Result<GrowthFit, SimError> {
    if points.len() < 5 {
        return Err(SimError::NoHalt(format!(
            "growth fit needs at least 5 points, got {}",
            points.len()
        )));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, c)| ((n as f64).ln(), c.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let (slope, residual) = fit(&logs);
    let head = fit(&logs[..3]).0;
    let tail = fit(&logs[logs.len() - 3..]).0;
    Ok(GrowthFit {
        points: points.to_vec(),
        slope,
        residual,
        super_polynomial: tail - head > 0.5,
    })
}

pub fn growth_fit_reports(reports: &[SimReport]) -> Result<GrowthFit, SimError> {
    let pts: Vec<(usize, f64)> = reports.iter().map(|r| (r.n, r.ops.weighted())).collect();
    growth_fit(&pts)
}

/// Runs one variant on the complete MCG of size `n` under bound `c`.
pub fn run_variant(variant: Variant, n: usize, c: usize, fqdp_cap: usize) -> Result<SimReport, SimError> {
    let mcg = Mcg::complete(n);
    match variant {
        Variant::QuestGraph => sim_questgraph(&bmcg_from_mcg(&mcg, c)?),
        Variant::Rqdp => sim_rqdp(&mcg, c),
        Variant::Fqdp => sim_fqdp(&bmcg_from_mcg(&mcg, c)?, fqdp_cap),
    }
}
