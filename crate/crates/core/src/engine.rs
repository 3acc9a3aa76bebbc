//! Deterministic discrete-event loop over all groups.
//!
//! Events are ordered by `(time, group, agent, sequence)`; coordinator rounds
//! sort after agent events at the same instant so that simultaneous
//! completions are batched into one round. All randomness is drawn from
//! streams keyed by the master seed and the consuming entity.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::control::{
    assign_tasks, complete_task, pull_task, Agent, AgentId, ControlMode, DependencyBoard,
    Dispatch, GroupState, RoundOutcome,
};
use crate::error::{Error, Result};
use crate::maze::{explore, generate_maze, validate_solution, Maze, Solution};
use crate::seed::{self, Stream};
use crate::taskgraph::{GraphFamily, GroupId, PartitionMode, TaskGraph, TaskId};

pub const DEFAULT_MAZE_SIZE: (usize, usize) = (32, 32);
/// Cells per time unit.
pub const DEFAULT_SPEED: f64 = 800.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overheads {
    /// Coordinator time per centralized assignment.
    pub assign_delay: f64,
    /// Decentralized pull cost per agent in the group; a pull costs
    /// `pull_cost_per_agent * group_size`.
    pub pull_cost_per_agent: f64,
    /// System-level cost of splitting the task set among groups.
    pub split: f64,
    /// System-level cost of collecting group results.
    pub collect: f64,
}

impl Default for Overheads {
    fn default() -> Self {
        Overheads {
            assign_delay: 0.05,
            pull_cost_per_agent: 0.002,
            split: 0.5,
            collect: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentLayout {
    PerGroup(usize),
    /// Spread as evenly as possible; earlier groups take the remainder.
    Total(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Speeds {
    Uniform(f64),
    /// One entry per agent, in global agent order.
    PerAgent(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub graph: Arc<TaskGraph>,
    pub groups: usize,
    pub agents: AgentLayout,
    pub control: ControlMode,
    pub partition_mode: PartitionMode,
    pub maze_size: (usize, usize),
    pub speeds: Speeds,
    /// When set, inference classes are redrawn per run from the master seed.
    pub inference_q: Option<f64>,
    pub validation_fail_p: f64,
    pub overheads: Overheads,
    pub master_seed: u64,
}

impl Scenario {
    pub fn new(graph: impl Into<Arc<TaskGraph>>, groups: usize, agents: AgentLayout) -> Self {
        Scenario {
            graph: graph.into(),
            groups,
            agents,
            control: ControlMode::default(),
            partition_mode: PartitionMode::default(),
            maze_size: DEFAULT_MAZE_SIZE,
            speeds: Speeds::Uniform(DEFAULT_SPEED),
            inference_q: None,
            validation_fail_p: 0.0,
            overheads: Overheads::default(),
            master_seed: 0,
        }
    }

    pub fn with_control(mut self, control: ControlMode) -> Self {
        self.control = control;
        self
    }

    pub fn with_partition(mut self, mode: PartitionMode) -> Self {
        self.partition_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_maze(mut self, width: usize, height: usize) -> Self {
        self.maze_size = (width, height);
        self
    }

    pub fn with_speeds(mut self, speeds: Speeds) -> Self {
        self.speeds = speeds;
        self
    }

    pub fn with_inference_q(mut self, q: Option<f64>) -> Self {
        self.inference_q = q;
        self
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        match self.agents {
            AgentLayout::PerGroup(n) => vec![n; self.groups],
            AgentLayout::Total(n) => (0..self.groups)
                .map(|g| n / self.groups + usize::from(g < n % self.groups))
                .collect(),
        }
    }

    pub fn total_agents(&self) -> usize {
        self.group_sizes().iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.graph.len();
        if self.groups < 1 || self.groups > m {
            return Err(Error::invalid(format!(
                "group count {} must be in 1..={m}",
                self.groups
            )));
        }
        if self.group_sizes().contains(&0) {
            return Err(Error::invalid(
                "every group needs at least one agent (n >= l >= 1)",
            ));
        }
        let (w, h) = self.maze_size;
        if w < 2 || h < 2 {
            return Err(Error::invalid(format!("maze must be at least 2x2, got {w}x{h}")));
        }
        match &self.speeds {
            Speeds::Uniform(s) if !(*s > 0.0 && s.is_finite()) => {
                return Err(Error::invalid(format!("speed must be positive, got {s}")))
            }
            Speeds::PerAgent(v) => {
                if v.len() != self.total_agents() {
                    return Err(Error::invalid(format!(
                        "{} speeds given for {} agents",
                        v.len(),
                        self.total_agents()
                    )));
                }
                if v.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(Error::invalid("speeds must be positive"));
                }
            }
            _ => {}
        }
        if let Some(q) = self.inference_q {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::invalid(format!("inference_q {q} outside [0, 1]")));
            }
        }
        if !(0.0..1.0).contains(&self.validation_fail_p) {
            return Err(Error::invalid(format!(
                "validation_fail_p {} outside [0, 1)",
                self.validation_fail_p
            )));
        }
        let o = &self.overheads;
        if [o.assign_delay, o.pull_cost_per_agent, o.split, o.collect]
            .iter()
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::invalid("overheads must be finite and non-negative"));
        }
        Ok(())
    }

    fn speed_of(&self, agent: usize) -> f64 {
        match &self.speeds {
            Speeds::Uniform(s) => *s,
            Speeds::PerAgent(v) => v[agent],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// Coordinator handed a task to an agent.
    Assign,
    /// Agent pulled a task.
    Pull,
    /// Validated, rewarded and shared.
    Complete,
    /// Validation failed; task returns to the ready pool.
    Reject,
    /// Closed from the group knowledge base without exploration.
    Known,
    /// Agent found nothing ready.
    Wait,
    GroupDone,
}

impl EventKind {
    fn code(self) -> u64 {
        match self {
            EventKind::Assign => 1,
            EventKind::Pull => 2,
            EventKind::Complete => 3,
            EventKind::Reject => 4,
            EventKind::Known => 5,
            EventKind::Wait => 6,
            EventKind::GroupDone => 7,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Assign => "assign",
            EventKind::Pull => "pull",
            EventKind::Complete => "complete",
            EventKind::Reject => "reject",
            EventKind::Known => "known",
            EventKind::Wait => "wait",
            EventKind::GroupDone => "group-done",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub group: GroupId,
    pub agent: Option<AgentId>,
    pub task: Option<TaskId>,
    /// Free-form tail: exploration window for dispatches, reward for
    /// completions.
    pub detail: String,
}

impl EventRecord {
    /// `time kind group agent task detail`, with `-` for absent fields.
    pub fn to_line(&self, graph: &TaskGraph) -> String {
        let agent = self.agent.map_or("-".to_string(), |a| a.to_string());
        let task = self
            .task
            .map_or("-".to_string(), |t| graph.task(t).name.clone());
        let detail = if self.detail.is_empty() { "-" } else { &self.detail };
        format!(
            "{:.6} {} {} {} {} {}",
            self.time, self.kind, self.group, agent, task, detail
        )
    }
}

/// Hooks called from inside the event loop.
pub trait Observer {
    fn on_event(&mut self, _event: &EventRecord, _groups: &[GroupState]) {}
    /// Called right after a solution has been shared within `group`.
    fn on_share(&mut self, _group: &GroupState, _now: f64) {}
}

impl Observer for () {}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub et_system: f64,
    pub et_group: BTreeMap<GroupId, f64>,
    pub twt_group: BTreeMap<GroupId, f64>,
    pub twt_system: f64,
    pub tasks_assigned: BTreeMap<GroupId, usize>,
    pub tasks_completed: BTreeMap<GroupId, usize>,
    pub rewards: BTreeMap<AgentId, u64>,
    pub agent_wait: BTreeMap<AgentId, f64>,
    pub event_count: usize,
    /// FNV-1a over every event's kind, time, group, agent and task.
    pub log_digest: u64,
    /// Empty unless the run was traced.
    pub events: Vec<EventRecord>,
}

impl SimulationReport {
    pub fn max_group_et(&self) -> f64 {
        self.et_group.values().copied().fold(0.0, f64::max)
    }

    pub fn total_completed(&self) -> usize {
        self.tasks_completed.values().sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub trace: bool,
}

pub fn run_simulation(scenario: &Scenario) -> Result<SimulationReport> {
    run_simulation_with(scenario, RunOptions::default(), &mut ())
}

pub fn run_simulation_with(
    scenario: &Scenario,
    options: RunOptions,
    observer: &mut dyn Observer,
) -> Result<SimulationReport> {
    Simulation::new(scenario, options)?.run(observer)
}

#[derive(Debug, Clone, PartialEq)]
enum Pending {
    Finish(Box<Dispatch>),
    Round,
}

#[derive(Debug)]
struct QueuedEvent {
    time: f64,
    group: usize,
    /// `usize::MAX` for coordinator rounds.
    agent: usize,
    seq: u64,
    what: Pending,
}

impl QueuedEvent {
    fn key(&self) -> (f64, usize, usize, u64) {
        (self.time, self.group, self.agent, self.seq)
    }
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueuedEvent {}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueuedEvent {
    // Reversed so that `BinaryHeap` pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

/// Maze cache plus the seeded exploration policy.
struct MazeExplorer {
    master: u64,
    size: (usize, usize),
    mazes: HashMap<TaskId, Maze>,
}

impl MazeExplorer {
    fn maze(&mut self, task: TaskId) -> &Maze {
        let (w, h) = self.size;
        let master = self.master;
        self.mazes.entry(task).or_insert_with(|| {
            generate_maze(w, h, seed::derive(master, Stream::Maze, &[task.0 as u64]))
                .expect("scenario validated maze size")
        })
    }

    fn run(&mut self, task: TaskId, attempt: u32, speed: f64) -> (Solution, f64) {
        let seed = seed::derive(self.master, Stream::Explore, &[task.0 as u64, attempt as u64]);
        let maze = self.maze(task);
        explore(maze, task, speed, seed).expect("scenario validated speeds")
    }
}

struct Simulation<'a> {
    scenario: &'a Scenario,
    graph: Arc<TaskGraph>,
    options: RunOptions,
    board: DependencyBoard,
    groups: Vec<GroupState>,
    pull_cost: Vec<f64>,
    explorer: MazeExplorer,
    queue: BinaryHeap<QueuedEvent>,
    round_scheduled: Vec<bool>,
    coordinator_free_at: Vec<f64>,
    seq: u64,
    event_count: usize,
    digest: u64,
    events: Vec<EventRecord>,
    now: f64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, word: u64) -> u64 {
    for b in word.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl<'a> Simulation<'a> {
    fn new(scenario: &'a Scenario, options: RunOptions) -> Result<Self> {
        scenario.validate()?;
        let master = scenario.master_seed;
        let graph = match scenario.inference_q {
            Some(q) => Arc::new(
                scenario
                    .graph
                    .with_inference_classes(q, seed::derive(master, Stream::Classes, &[]))?,
            ),
            None => Arc::clone(&scenario.graph),
        };
        let subsets = graph.partition(
            scenario.groups,
            scenario.partition_mode,
            seed::derive(master, Stream::Partition, &[]),
        )?;
        let board = DependencyBoard::new(&graph, &subsets);
        let sizes = scenario.group_sizes();
        let mut next_agent = 0;
        let mut groups = Vec::with_capacity(subsets.len());
        for (subset, &size) in subsets.into_iter().zip(&sizes) {
            let agents = (next_agent..next_agent + size)
                .map(|i| Agent::new(AgentId(i), subset.group_id, scenario.speed_of(i)))
                .collect();
            next_agent += size;
            groups.push(GroupState::new(subset, agents, Arc::clone(&graph), &board));
        }
        let l = groups.len();
        Ok(Simulation {
            scenario,
            graph,
            options,
            board,
            pull_cost: sizes
                .iter()
                .map(|&s| scenario.overheads.pull_cost_per_agent * s as f64)
                .collect(),
            groups,
            explorer: MazeExplorer {
                master,
                size: scenario.maze_size,
                mazes: HashMap::new(),
            },
            queue: BinaryHeap::new(),
            round_scheduled: vec![false; l],
            coordinator_free_at: vec![0.0; l],
            seq: 0,
            event_count: 0,
            digest: FNV_OFFSET,
            events: Vec::new(),
            now: 0.0,
        })
    }

    fn push(&mut self, time: f64, group: usize, agent: usize, what: Pending) {
        self.seq += 1;
        self.queue.push(QueuedEvent {
            time,
            group,
            agent,
            seq: self.seq,
            what,
        });
    }

    fn record(
        &mut self,
        observer: &mut dyn Observer,
        kind: EventKind,
        group: usize,
        agent: Option<AgentId>,
        task: Option<TaskId>,
        detail: String,
    ) {
        let rec = EventRecord {
            time: self.now,
            kind,
            group: GroupId(group),
            agent,
            task,
            detail,
        };
        self.event_count += 1;
        let mut h = fnv(self.digest, kind.code());
        h = fnv(h, rec.time.to_bits());
        h = fnv(h, group as u64);
        h = fnv(h, agent.map_or(u64::MAX, |a| a.0 as u64));
        h = fnv(h, task.map_or(u64::MAX, |t| t.0 as u64));
        self.digest = h;
        observer.on_event(&rec, &self.groups);
        if self.options.trace {
            self.events.push(rec);
        }
    }

    fn run(mut self, observer: &mut dyn Observer) -> Result<SimulationReport> {
        let mut dirty: BTreeSet<usize> = (0..self.groups.len()).collect();
        self.activate(&mut dirty, observer)?;

        while let Some(ev) = self.queue.pop() {
            self.now = ev.time;
            match ev.what {
                Pending::Finish(d) => self.on_finish(ev.group, *d, &mut dirty, observer)?,
                Pending::Round => {
                    self.round_scheduled[ev.group] = false;
                    self.run_round(ev.group, &mut dirty, observer)?;
                }
            }
            self.activate(&mut dirty, observer)?;
        }

        let total = self.board.completed_count();
        if total != self.graph.len() {
            return Err(Error::Deadlock {
                time: self.now,
                completed: total,
                total: self.graph.len(),
            });
        }
        Ok(self.report())
    }

    fn validates(&mut self, task: TaskId, attempt: u32, solution: &Solution) -> bool {
        let p = self.scenario.validation_fail_p;
        let injected = p > 0.0
            && seed::rng(
                self.scenario.master_seed,
                Stream::Validation,
                &[task.0 as u64, attempt as u64],
            )
            .random_bool(p);
        !injected && validate_solution(self.explorer.maze(task), solution)
    }

    fn on_finish(
        &mut self,
        g: usize,
        d: Dispatch,
        dirty: &mut BTreeSet<usize>,
        observer: &mut dyn Observer,
    ) -> Result<()> {
        let valid = self.validates(d.task, d.attempt, &d.solution);
        let now = self.now;
        let out = complete_task(
            &mut self.groups[g],
            &mut self.board,
            d.agent,
            d.task,
            d.solution,
            now,
            |_, _, _| valid,
        )?;
        if out.validated {
            self.record(
                observer,
                EventKind::Complete,
                g,
                Some(d.agent),
                Some(d.task),
                format!("reward={}", out.reward),
            );
            observer.on_share(&self.groups[g], now);
            if out.group_finished {
                self.record(observer, EventKind::GroupDone, g, None, None, String::new());
            }
        } else {
            self.record(
                observer,
                EventKind::Reject,
                g,
                Some(d.agent),
                Some(d.task),
                format!("attempt={}", d.attempt),
            );
        }
        self.route_foreign(&out.foreign_ready, dirty);
        dirty.insert(g);
        Ok(())
    }

    fn route_foreign(&mut self, tasks: &[TaskId], dirty: &mut BTreeSet<usize>) {
        for &t in tasks {
            let owner = self.board.owner(t).0;
            self.groups[owner].mark_ready(t);
            dirty.insert(owner);
        }
    }

    /// Gives every group with both free agents and ready work a chance to
    /// dispatch, following cascades of knowledge-base completions.
    fn activate(&mut self, dirty: &mut BTreeSet<usize>, observer: &mut dyn Observer) -> Result<()> {
        while let Some(g) = dirty.pop_first() {
            match self.scenario.control {
                ControlMode::Centralized => {
                    let group = &self.groups[g];
                    if !self.round_scheduled[g]
                        && group.has_available_agent()
                        && group.has_ready_task()
                    {
                        self.round_scheduled[g] = true;
                        let at = self.now.max(self.coordinator_free_at[g]);
                        self.push(at, g, usize::MAX, Pending::Round);
                    }
                }
                ControlMode::Decentralized => self.pull_all(g, dirty, observer)?,
            }
        }
        Ok(())
    }

    fn pull_all(
        &mut self,
        g: usize,
        dirty: &mut BTreeSet<usize>,
        observer: &mut dyn Observer,
    ) -> Result<()> {
        let now = self.now;
        loop {
            let group = &self.groups[g];
            if !group.has_ready_task() {
                break;
            }
            let Some(agent) = group.agents.iter().find(|a| a.is_available()).map(|a| a.id) else {
                break;
            };
            let explorer = &mut self.explorer;
            let mut ex = |t: TaskId, attempt: u32, speed: f64| explorer.run(t, attempt, speed);
            let (dispatch, out) = pull_task(
                &mut self.groups[g],
                &mut self.board,
                &mut ex,
                agent,
                now,
                self.pull_cost[g],
            )?;
            self.absorb(g, out, EventKind::Pull, dirty, observer);
            if let Some(d) = dispatch {
                self.record(
                    observer,
                    EventKind::Pull,
                    g,
                    Some(d.agent),
                    Some(d.task),
                    format!("start={:.6} finish={:.6}", d.start, d.finish),
                );
                self.push(d.finish, g, d.agent.0, Pending::Finish(Box::new(d)));
            }
        }
        // Whoever is still free has nothing to do for now.
        let idle: Vec<AgentId> = self.groups[g]
            .agents
            .iter()
            .filter(|a| a.state == crate::control::AgentState::Idle)
            .map(|a| a.id)
            .collect();
        if !self.groups[g].is_finished() {
            for a in idle {
                let explorer = &mut self.explorer;
                let mut ex = |t: TaskId, attempt: u32, speed: f64| explorer.run(t, attempt, speed);
                let (_, out) =
                    pull_task(&mut self.groups[g], &mut self.board, &mut ex, a, now, 0.0)?;
                self.absorb(g, out, EventKind::Pull, dirty, observer);
            }
        }
        Ok(())
    }

    fn run_round(
        &mut self,
        g: usize,
        dirty: &mut BTreeSet<usize>,
        observer: &mut dyn Observer,
    ) -> Result<()> {
        let now = self.now;
        let explorer = &mut self.explorer;
        let mut ex = |t: TaskId, attempt: u32, speed: f64| explorer.run(t, attempt, speed);
        let mut out = assign_tasks(
            &mut self.groups[g],
            &mut self.board,
            &mut ex,
            now,
            self.scenario.overheads.assign_delay,
        )?;
        self.coordinator_free_at[g] = out.busy_until;
        let dispatches = std::mem::take(&mut out.dispatches);
        self.absorb(g, out, EventKind::Assign, dirty, observer);
        for d in dispatches {
            self.record(
                observer,
                EventKind::Assign,
                g,
                Some(d.agent),
                Some(d.task),
                format!("start={:.6} finish={:.6}", d.start, d.finish),
            );
            self.push(d.finish, g, d.agent.0, Pending::Finish(Box::new(d)));
        }
        Ok(())
    }

    /// Logs knowledge-base completions and waits, and routes any newly
    /// ready tasks of other groups.
    fn absorb(
        &mut self,
        g: usize,
        out: RoundOutcome,
        _via: EventKind,
        dirty: &mut BTreeSet<usize>,
        observer: &mut dyn Observer,
    ) {
        for k in &out.known {
            let reward = self.graph.task(k.task).reward;
            self.record(
                observer,
                EventKind::Known,
                g,
                Some(k.agent),
                Some(k.task),
                format!("reward={reward}"),
            );
            observer.on_share(&self.groups[g], self.now);
        }
        if !out.known.is_empty() && self.groups[g].is_finished() {
            self.record(observer, EventKind::GroupDone, g, None, None, String::new());
        }
        for &a in &out.waiting {
            self.record(observer, EventKind::Wait, g, Some(a), None, String::new());
        }
        self.route_foreign(&out.foreign_ready, dirty);
    }

    fn report(self) -> SimulationReport {
        let o = &self.scenario.overheads;
        let mut et_group = BTreeMap::new();
        let mut twt_group = BTreeMap::new();
        let mut tasks_assigned = BTreeMap::new();
        let mut tasks_completed = BTreeMap::new();
        let mut rewards = BTreeMap::new();
        let mut agent_wait = BTreeMap::new();
        for g in &self.groups {
            et_group.insert(g.id, g.finished_at().unwrap_or(0.0));
            twt_group.insert(g.id, g.agents.iter().map(|a| a.total_wait).sum::<f64>());
            tasks_assigned.insert(g.id, g.assigned.task_ids.len());
            tasks_completed.insert(g.id, g.completed.len());
            for a in &g.agents {
                rewards.insert(a.id, a.rewards_earned);
                agent_wait.insert(a.id, a.total_wait);
            }
        }
        let max_et = et_group.values().copied().fold(0.0, f64::max);
        SimulationReport {
            et_system: o.split + max_et + o.collect,
            twt_system: twt_group.values().sum(),
            et_group,
            twt_group,
            tasks_assigned,
            tasks_completed,
            rewards,
            agent_wait,
            event_count: self.event_count,
            log_digest: self.digest,
            events: self.events,
        }
    }
}

/// Completed-task counts re-derived from a traced event log.
pub fn replay_completion_counts(events: &[EventRecord]) -> BTreeMap<GroupId, usize> {
    let mut counts = BTreeMap::new();
    for e in events {
        if matches!(e.kind, EventKind::Complete | EventKind::Known) {
            *counts.entry(e.group).or_insert(0) += 1;
        }
    }
    counts
}

pub fn collect_task_distribution(
    report: &SimulationReport,
    g_k: GroupId,
    g_l: GroupId,
) -> Result<(usize, usize)> {
    let count = |g: GroupId| {
        report
            .tasks_completed
            .get(&g)
            .copied()
            .ok_or(Error::UnknownGroup(g.0))
    };
    Ok((count(g_k)?, count(g_l)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlComparison {
    pub m: usize,
    pub replication: usize,
    pub seed: u64,
    pub et_centralized: f64,
    pub et_decentralized: f64,
}

/// Runs both control modes for every task count on matched seeds. The base
/// scenario's graph is replaced by a fresh `family` graph of `m` tasks per
/// replication; replication `r` uses master seed `base.master_seed + r`.
pub fn compare_controls(
    base: &Scenario,
    family: GraphFamily,
    task_counts: &[usize],
    replications: usize,
) -> Result<Vec<ControlComparison>> {
    if task_counts.is_empty() {
        return Err(Error::invalid("task_counts must not be empty"));
    }
    let cells: Vec<(usize, usize)> = task_counts
        .iter()
        .flat_map(|&m| (0..replications).map(move |r| (m, r)))
        .collect();
    cells
        .par_iter()
        .map(|&(m, r)| {
            let seed = base.master_seed.wrapping_add(r as u64);
            let graph = Arc::new(family.generate(m, seed)?);
            let run = |control| {
                let mut s = base.clone();
                s.graph = Arc::clone(&graph);
                s.control = control;
                s.master_seed = seed;
                run_simulation(&s).map(|rep| rep.et_system)
            };
            Ok(ControlComparison {
                m,
                replication: r,
                seed,
                et_centralized: run(ControlMode::Centralized)?,
                et_decentralized: run(ControlMode::Decentralized)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgraph::{GeneratorParams, G10_GRAPH};

    fn single_task() -> TaskGraph {
        "tasks 1\ntask only reward 4 deps none class 0".parse().unwrap()
    }

    #[test]
    fn single_task_base_case() {
        let s = Scenario::new(single_task(), 1, AgentLayout::PerGroup(1)).with_seed(3);
        let rep = run_simulation(&s).unwrap();
        let maze = generate_maze(32, 32, seed::derive(3, Stream::Maze, &[0])).unwrap();
        let (_, duration) =
            explore(&maze, TaskId(0), DEFAULT_SPEED, seed::derive(3, Stream::Explore, &[0, 0]))
                .unwrap();
        let o = Overheads::default();
        let expected = o.split + o.pull_cost_per_agent + duration + o.collect;
        assert!((rep.et_system - expected).abs() < 1e-12);
        assert_eq!(rep.twt_system, 0.0);
        assert_eq!(rep.rewards[&AgentId(0)], 4);
    }

    #[test]
    fn identical_seeds_identical_reports() {
        let g = GraphFamily::Lds.generate(60, 5).unwrap();
        for control in [ControlMode::Centralized, ControlMode::Decentralized] {
            let s = Scenario::new(g.clone(), 3, AgentLayout::PerGroup(4))
                .with_control(control)
                .with_inference_q(Some(0.3))
                .with_seed(11);
            assert_eq!(run_simulation(&s).unwrap(), run_simulation(&s).unwrap());
        }
    }

    #[test]
    fn downstream_group_waits_on_chain() {
        let g: TaskGraph = "tasks 3
            task a reward 3 deps none class 0
            task b reward 2 deps a class 1
            task c reward 1 deps b class 2"
            .parse()
            .unwrap();
        let s = Scenario::new(g, 2, AgentLayout::PerGroup(1)).with_seed(1);
        let rep = run_simulation(&s).unwrap();
        assert!(rep.twt_system > 0.0);
        assert_eq!(rep.total_completed(), 3);
        assert!(rep.twt_group.values().all(|&w| w > 0.0));
    }

    #[test]
    fn trace_replays_to_report_counts() {
        let g = crate::taskgraph::load_task_graph(G10_GRAPH).unwrap();
        let s = Scenario::new(g, 2, AgentLayout::PerGroup(2))
            .with_control(ControlMode::Centralized)
            .with_seed(2);
        let rep = run_simulation_with(&s, RunOptions { trace: true }, &mut ()).unwrap();
        assert_eq!(rep.events.len(), rep.event_count);
        assert_eq!(replay_completion_counts(&rep.events), rep.tasks_completed);
        let line = rep.events[0].to_line(&s.graph);
        assert_eq!(line.split(' ').count(), 7, "{line}");
        assert!(run_simulation(&s).unwrap().events.is_empty());
    }

    #[test]
    fn validation_failures_are_retried() {
        let g = GraphFamily::Lds.generate(30, 2).unwrap();
        let mut s = Scenario::new(g.clone(), 2, AgentLayout::PerGroup(3)).with_seed(9);
        s.validation_fail_p = 0.3;
        let rep = run_simulation_with(&s, RunOptions { trace: true }, &mut ()).unwrap();
        assert_eq!(rep.total_completed(), 30);
        assert!(rep.events.iter().any(|e| e.kind == EventKind::Reject));
        assert_eq!(rep.rewards.values().sum::<u64>(), g.total_reward());
    }

    #[test]
    fn task_distribution_counts() {
        let g = GraphFamily::Lds.generate(240, 1).unwrap();
        let s = Scenario::new(g, 2, AgentLayout::PerGroup(4)).with_seed(1);
        let rep = run_simulation(&s).unwrap();
        let (a, b) = collect_task_distribution(&rep, GroupId(0), GroupId(1)).unwrap();
        assert_eq!(a + b, 240);
        assert!(matches!(
            collect_task_distribution(&rep, GroupId(0), GroupId(5)),
            Err(Error::UnknownGroup(5))
        ));

        let flat = GraphFamily::Fixed(0.0).generate(240, 1).unwrap();
        let s = Scenario::new(flat, 2, AgentLayout::PerGroup(4))
            .with_partition(PartitionMode::Independent)
            .with_seed(1);
        let rep = run_simulation(&s).unwrap();
        let (a, b) = collect_task_distribution(&rep, GroupId(0), GroupId(1)).unwrap();
        assert!(a.abs_diff(b) <= 1);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let g = GraphFamily::Lds.generate(5, 1).unwrap();
        assert!(run_simulation(&Scenario::new(g.clone(), 0, AgentLayout::PerGroup(1))).is_err());
        assert!(run_simulation(&Scenario::new(g.clone(), 6, AgentLayout::PerGroup(1))).is_err());
        assert!(run_simulation(&Scenario::new(g.clone(), 3, AgentLayout::Total(2))).is_err());
        let mut s = Scenario::new(g.clone(), 1, AgentLayout::PerGroup(2));
        s.speeds = Speeds::PerAgent(vec![1.0]);
        assert!(run_simulation(&s).is_err());
        s.speeds = Speeds::Uniform(0.0);
        assert!(run_simulation(&s).is_err());
        let mut s = Scenario::new(g, 1, AgentLayout::PerGroup(2));
        s.validation_fail_p = 1.0;
        assert!(run_simulation(&s).is_err());
    }

    #[test]
    fn total_layout_spreads_agents() {
        let g = TaskGraph::generate(
            GeneratorParams { n_tasks: 20, density: 0.0, reward_range: (1, 1) },
            0,
        )
        .unwrap();
        let s = Scenario::new(g, 4, AgentLayout::Total(50));
        assert_eq!(s.group_sizes(), [13, 13, 12, 12]);
    }

    #[test]
    fn compare_controls_single_task() {
        let base = Scenario::new(single_task(), 1, AgentLayout::PerGroup(1)).with_seed(4);
        let rows = compare_controls(&base, GraphFamily::Fixed(0.0), &[1], 2).unwrap();
        let o = Overheads::default();
        for r in rows {
            let diff = r.et_centralized - r.et_decentralized;
            assert!((diff - (o.assign_delay - o.pull_cost_per_agent)).abs() < 1e-9);
        }
        assert!(compare_controls(&base, GraphFamily::Lds, &[], 1).is_err());
    }
}
