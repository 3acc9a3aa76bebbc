//! Group-level control: centralized assignment rounds, decentralized pull,
//! and the validate/reward/update/share sequence run on every completion.
//!
//! Timing policy lives here too. A centralized coordinator issues
//! assignments one after another, each costing `assign_delay`; a
//! decentralized agent pays `pull_cost` on its own clock before exploring.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::knowledge::KnowledgeBase;
use crate::maze::Solution;
use crate::taskgraph::{GroupId, TaskGraph, TaskId, TaskSubset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ControlMode {
    Centralized,
    #[default]
    Decentralized,
}

impl FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centralized" => Ok(ControlMode::Centralized),
            "decentralized" => Ok(ControlMode::Decentralized),
            other => Err(Error::invalid(format!("unknown control mode `{other}`"))),
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::Centralized => "centralized",
            ControlMode::Decentralized => "decentralized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AgentState {
    Idle,
    /// `issued_at` is when the task reached the agent; exploration runs
    /// from `start` to `finish`.
    Exploring {
        task: TaskId,
        issued_at: f64,
        start: f64,
        finish: f64,
    },
    Waiting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub group_id: GroupId,
    pub speed: f64,
    pub state: AgentState,
    pub total_wait: f64,
    pub rewards_earned: u64,
    idle_since: f64,
}

impl Agent {
    pub fn new(id: AgentId, group_id: GroupId, speed: f64) -> Self {
        Agent {
            id,
            group_id,
            speed,
            state: AgentState::Idle,
            total_wait: 0.0,
            rewards_earned: 0,
            idle_since: 0.0,
        }
    }

    pub fn is_available(&self) -> bool {
        matches!(self.state, AgentState::Idle | AgentState::Waiting)
    }

    fn begin(&mut self, task: TaskId, issued_at: f64, start: f64, finish: f64) {
        debug_assert!(self.is_available());
        self.total_wait += issued_at - self.idle_since;
        self.state = AgentState::Exploring {
            task,
            issued_at,
            start,
            finish,
        };
    }

    fn release(&mut self, now: f64) {
        self.state = AgentState::Idle;
        self.idle_since = now;
    }

    fn wait(&mut self) {
        if self.state == AgentState::Idle {
            self.state = AgentState::Waiting;
        }
    }

    /// Closes the open waiting interval when the group runs out of work.
    fn settle(&mut self, now: f64) {
        if self.is_available() {
            self.total_wait += now - self.idle_since;
            self.idle_since = now;
            self.state = AgentState::Idle;
        }
    }
}

/// Produces an exploration for a task attempt at a given agent speed.
pub trait Explorer {
    fn explore(&mut self, task: TaskId, attempt: u32, speed: f64) -> (Solution, f64);
}

impl<F: FnMut(TaskId, u32, f64) -> (Solution, f64)> Explorer for F {
    fn explore(&mut self, task: TaskId, attempt: u32, speed: f64) -> (Solution, f64) {
        self(task, attempt, speed)
    }
}

/// System-wide record of completed tasks. Completion facts are global;
/// solutions are not.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyBoard {
    remaining: Vec<usize>,
    completed: Vec<bool>,
    owner: Vec<GroupId>,
}

impl DependencyBoard {
    pub fn new(graph: &TaskGraph, subsets: &[TaskSubset]) -> Self {
        let mut owner = vec![GroupId(usize::MAX); graph.len()];
        for s in subsets {
            for t in &s.task_ids {
                owner[t.0] = s.group_id;
            }
        }
        DependencyBoard {
            remaining: graph.tasks().iter().map(|t| t.deps.len()).collect(),
            completed: vec![false; graph.len()],
            owner,
        }
    }

    pub fn owner(&self, task: TaskId) -> GroupId {
        self.owner[task.0]
    }

    pub fn is_completed(&self, task: TaskId) -> bool {
        self.completed[task.0]
    }

    pub fn deps_satisfied(&self, task: TaskId) -> bool {
        self.remaining[task.0] == 0
    }

    pub fn completed_count(&self) -> usize {
        self.completed.iter().filter(|&&c| c).count()
    }

    /// Marks `task` complete and returns tasks whose last dependency it was.
    fn publish(&mut self, graph: &TaskGraph, task: TaskId) -> Vec<TaskId> {
        if std::mem::replace(&mut self.completed[task.0], true) {
            return Vec::new();
        }
        let mut released = Vec::new();
        for &c in graph.dependents(task) {
            self.remaining[c.0] -= 1;
            if self.remaining[c.0] == 0 {
                released.push(c);
            }
        }
        released
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Pending {
    agent: AgentId,
    attempt: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupState {
    pub id: GroupId,
    pub agents: Vec<Agent>,
    pub assigned: TaskSubset,
    pub completed: BTreeSet<TaskId>,
    pub kb: KnowledgeBase,
    graph: Arc<TaskGraph>,
    pending: BTreeMap<TaskId, Pending>,
    ready: BTreeSet<(Reverse<u64>, TaskId)>,
    attempts: BTreeMap<TaskId, u32>,
    finished_at: Option<f64>,
}

/// A task handed to an agent for exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct Dispatch {
    pub agent: AgentId,
    pub task: TaskId,
    pub attempt: u32,
    pub issued_at: f64,
    pub start: f64,
    pub finish: f64,
    pub solution: Solution,
}

/// A task closed from the knowledge base without exploration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownCompletion {
    pub agent: AgentId,
    pub task: TaskId,
    pub at: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundOutcome {
    pub dispatches: Vec<Dispatch>,
    pub known: Vec<KnownCompletion>,
    /// Tasks of other groups whose dependencies became satisfied.
    pub foreign_ready: Vec<TaskId>,
    pub waiting: Vec<AgentId>,
    /// Time at which the coordinator can start another round.
    pub busy_until: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionOutcome {
    pub validated: bool,
    pub reward: u64,
    pub foreign_ready: Vec<TaskId>,
    pub group_finished: bool,
}

impl GroupState {
    pub fn new(
        subset: TaskSubset,
        agents: Vec<Agent>,
        graph: Arc<TaskGraph>,
        board: &DependencyBoard,
    ) -> Self {
        let ready = subset
            .task_ids
            .iter()
            .filter(|&&t| board.deps_satisfied(t) && !board.is_completed(t))
            .map(|&t| (Reverse(graph.task(t).reward), t))
            .collect();
        let finished_at = subset.task_ids.is_empty().then_some(0.0);
        GroupState {
            id: subset.group_id,
            kb: KnowledgeBase::new(subset.group_id, Arc::clone(&graph)),
            agents,
            assigned: subset,
            completed: BTreeSet::new(),
            graph,
            pending: BTreeMap::new(),
            ready,
            attempts: BTreeMap::new(),
            finished_at,
        }
    }

    pub fn ready(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.ready.iter().map(|&(_, t)| t)
    }

    pub fn pending(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.pending.keys().copied()
    }

    pub fn pending_agent(&self, task: TaskId) -> Option<AgentId> {
        self.pending.get(&task).map(|p| p.agent)
    }

    pub fn finished_at(&self) -> Option<f64> {
        self.finished_at
    }

    pub fn is_finished(&self) -> bool {
        self.finished_at.is_some()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents.iter().find(|a| a.id == id)
    }

    fn agent_mut(&mut self, id: AgentId) -> Result<&mut Agent> {
        let group = self.id;
        self.agents
            .iter_mut()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::State(format!("agent {id} is not in group {group}")))
    }

    pub fn has_available_agent(&self) -> bool {
        self.agents.iter().any(Agent::is_available)
    }

    pub fn has_ready_task(&self) -> bool {
        !self.ready.is_empty()
    }

    /// Adds a task of this group whose dependencies were just satisfied.
    pub fn mark_ready(&mut self, task: TaskId) {
        debug_assert!(self.assigned.task_ids.contains(&task));
        if !self.completed.contains(&task) && !self.pending.contains_key(&task) {
            self.ready.insert((Reverse(self.graph.task(task).reward), task));
        }
    }

    fn take_best_ready(&mut self) -> Option<TaskId> {
        self.ready.pop_first().map(|(_, t)| t)
    }

    fn record_completion(
        &mut self,
        board: &mut DependencyBoard,
        agent: AgentId,
        task: TaskId,
        solution: Solution,
        now: f64,
    ) -> Result<(u64, Vec<TaskId>)> {
        let reward = self.graph.task(task).reward;
        self.agent_mut(agent)?.rewards_earned += reward;
        self.completed.insert(task);
        let graph = Arc::clone(&self.graph);
        let mut foreign = Vec::new();
        for t in board.publish(&graph, task) {
            if board.owner(t) == self.id {
                self.mark_ready(t);
            } else {
                foreign.push(t);
            }
        }
        self.kb.share(task, solution, now, agent);
        if self.completed.len() == self.assigned.task_ids.len() {
            self.finished_at = Some(now);
            for a in &mut self.agents {
                a.settle(now);
            }
        }
        Ok((reward, foreign))
    }

    /// Pops the best ready task, closing any that the knowledge base already
    /// solves. Returns the first task that still needs exploration.
    fn next_task_for(
        &mut self,
        board: &mut DependencyBoard,
        agent: AgentId,
        now: f64,
        known: &mut Vec<KnownCompletion>,
        foreign: &mut Vec<TaskId>,
    ) -> Result<Option<TaskId>> {
        while let Some(task) = self.take_best_ready() {
            match self.kb.lookup(task).cloned() {
                Some(solution) => {
                    let (_, f) = self.record_completion(board, agent, task, solution, now)?;
                    foreign.extend(f);
                    known.push(KnownCompletion { agent, task, at: now });
                }
                None => return Ok(Some(task)),
            }
        }
        Ok(None)
    }

    fn dispatch(
        &mut self,
        agent: AgentId,
        task: TaskId,
        issued_at: f64,
        start: f64,
        explorer: &mut dyn Explorer,
    ) -> Result<Dispatch> {
        let attempt = *self.attempts.get(&task).unwrap_or(&0);
        let speed = self.agent_mut(agent)?.speed;
        let (solution, duration) = explorer.explore(task, attempt, speed);
        let finish = start + duration;
        self.agent_mut(agent)?.begin(task, issued_at, start, finish);
        self.pending.insert(task, Pending { agent, attempt });
        Ok(Dispatch {
            agent,
            task,
            attempt,
            issued_at,
            start,
            finish,
            solution,
        })
    }
}

/// One coordinator round: pairs available agents with ready tasks in
/// descending reward order (ties by task id). The k-th assignment reaches its
/// agent at `now + k * assign_delay`. Tasks already known to the group close
/// at `now` and do not occupy an agent.
pub fn assign_tasks(
    group: &mut GroupState,
    board: &mut DependencyBoard,
    explorer: &mut dyn Explorer,
    now: f64,
    assign_delay: f64,
) -> Result<RoundOutcome> {
    let mut out = RoundOutcome {
        busy_until: now,
        ..RoundOutcome::default()
    };
    let mut available: Vec<AgentId> = group
        .agents
        .iter()
        .filter(|a| a.is_available())
        .map(|a| a.id)
        .collect();
    available.reverse();
    while let Some(&agent) = available.last() {
        let Some(task) =
            group.next_task_for(board, agent, now, &mut out.known, &mut out.foreign_ready)?
        else {
            break;
        };
        available.pop();
        let issued_at = now + (out.dispatches.len() + 1) as f64 * assign_delay;
        let d = group.dispatch(agent, task, issued_at, issued_at, explorer)?;
        out.busy_until = issued_at;
        out.dispatches.push(d);
    }
    if !group.is_finished() {
        for id in available.into_iter().rev() {
            group.agent_mut(id)?.wait();
            out.waiting.push(id);
        }
    }
    Ok(out)
}

/// Decentralized pull: the agent takes the best ready task itself and starts
/// exploring after `pull_cost`. Known tasks are closed along the way.
/// Returns `None` and parks the agent in `Waiting` when nothing is ready.
pub fn pull_task(
    group: &mut GroupState,
    board: &mut DependencyBoard,
    explorer: &mut dyn Explorer,
    agent: AgentId,
    now: f64,
    pull_cost: f64,
) -> Result<(Option<Dispatch>, RoundOutcome)> {
    if !group.agent_mut(agent)?.is_available() {
        return Err(Error::State(format!("agent {agent} is busy and cannot pull")));
    }
    let mut out = RoundOutcome {
        busy_until: now,
        ..RoundOutcome::default()
    };
    match group.next_task_for(board, agent, now, &mut out.known, &mut out.foreign_ready)? {
        Some(task) => {
            let d = group.dispatch(agent, task, now, now + pull_cost, explorer)?;
            Ok((Some(d), out))
        }
        None => {
            if !group.is_finished() {
                group.agent_mut(agent)?.wait();
                out.waiting.push(agent);
            }
            Ok((None, out))
        }
    }
}

/// Finishes an exploration: validates, credits the reward, clears the task
/// from every dependency set and shares the solution with the group. A failed
/// validation sends the task back to the ready pool for another attempt.
pub fn complete_task(
    group: &mut GroupState,
    board: &mut DependencyBoard,
    agent: AgentId,
    task: TaskId,
    solution: Solution,
    now: f64,
    validate: impl FnOnce(TaskId, u32, &Solution) -> bool,
) -> Result<CompletionOutcome> {
    match group.pending.get(&task) {
        Some(p) if p.agent == agent => {}
        _ => {
            return Err(Error::State(format!(
                "task #{} is not pending for agent {agent}",
                task.0
            )))
        }
    }
    let pending = group.pending.remove(&task).expect("checked above");
    group.agent_mut(agent)?.release(now);

    if !validate(task, pending.attempt, &solution) {
        *group.attempts.entry(task).or_insert(0) += 1;
        group.mark_ready(task);
        return Ok(CompletionOutcome {
            validated: false,
            reward: 0,
            foreign_ready: Vec::new(),
            group_finished: false,
        });
    }
    let (reward, foreign_ready) = group.record_completion(board, agent, task, solution, now)?;
    Ok(CompletionOutcome {
        validated: true,
        reward,
        foreign_ready,
        group_finished: group.is_finished(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::Cell;
    use crate::taskgraph::GraphFamily;

    fn fixed_explorer(duration: f64) -> impl FnMut(TaskId, u32, f64) -> (Solution, f64) {
        move |task, _, speed| {
            (
                Solution {
                    task_id: task,
                    path: vec![Cell::new(0, 0)],
                    steps_explored: 1,
                },
                duration / speed,
            )
        }
    }

    struct Fixture {
        groups: Vec<GroupState>,
        board: DependencyBoard,
    }

    fn fixture(text: &str, split: &[&[usize]], agents_per_group: usize) -> Fixture {
        let graph: Arc<TaskGraph> = Arc::new(text.parse().unwrap());
        let subsets: Vec<TaskSubset> = split
            .iter()
            .enumerate()
            .map(|(g, ids)| TaskSubset {
                group_id: GroupId(g),
                task_ids: ids.iter().map(|&i| TaskId(i)).collect(),
            })
            .collect();
        let board = DependencyBoard::new(&graph, &subsets);
        let groups = subsets
            .into_iter()
            .enumerate()
            .map(|(g, s)| {
                let agents = (0..agents_per_group)
                    .map(|i| Agent::new(AgentId(g * agents_per_group + i), GroupId(g), 1.0))
                    .collect();
                GroupState::new(s, agents, Arc::clone(&graph), &board)
            })
            .collect();
        Fixture { groups, board }
    }

    const THREE_FREE: &str = "tasks 3
        task a reward 5 deps none class 0
        task b reward 9 deps none class 1
        task c reward 1 deps none class 2";

    #[test]
    fn assigns_by_descending_reward() {
        let mut f = fixture(THREE_FREE, &[&[0, 1, 2]], 2);
        let mut ex = fixed_explorer(3.0);
        let round = assign_tasks(&mut f.groups[0], &mut f.board, &mut ex, 0.0, 0.05).unwrap();
        let pairs: Vec<_> = round.dispatches.iter().map(|d| (d.agent, d.task)).collect();
        assert_eq!(pairs, [(AgentId(0), TaskId(1)), (AgentId(1), TaskId(0))]);
        assert_eq!(round.dispatches[0].issued_at, 0.05);
        assert_eq!(round.dispatches[1].issued_at, 0.1);
        assert_eq!(round.busy_until, 0.1);
        assert_eq!(f.groups[0].ready().collect::<Vec<_>>(), [TaskId(2)]);
    }

    #[test]
    fn extra_agents_wait() {
        let mut f = fixture(
            "tasks 2\ntask a reward 1 deps none class 0\ntask b reward 1 deps a class 1",
            &[&[0, 1]],
            3,
        );
        let mut ex = fixed_explorer(1.0);
        let round = assign_tasks(&mut f.groups[0], &mut f.board, &mut ex, 0.0, 0.05).unwrap();
        assert_eq!(round.dispatches.len(), 1);
        assert_eq!(round.waiting, [AgentId(1), AgentId(2)]);
        assert_eq!(f.groups[0].agents[1].state, AgentState::Waiting);
    }

    #[test]
    fn known_task_completes_without_exploration() {
        let mut f = fixture(
            "tasks 3
             task a reward 3 deps none class 4
             task b reward 2 deps a class 9
             task c reward 1 deps a class 4",
            &[&[0, 1, 2]],
            2,
        );
        let mut ex = fixed_explorer(1.0);
        let g = &mut f.groups[0];
        let round = assign_tasks(g, &mut f.board, &mut ex, 0.0, 0.0).unwrap();
        let d = round.dispatches[0].clone();
        complete_task(g, &mut f.board, d.agent, d.task, d.solution, d.finish, |_, _, _| true).unwrap();
        let round = assign_tasks(g, &mut f.board, &mut ex, 1.0, 0.0).unwrap();
        assert_eq!(round.known, [KnownCompletion { agent: AgentId(1), task: TaskId(2), at: 1.0 }]);
        assert_eq!(round.dispatches.len(), 1);
        assert_eq!(round.dispatches[0].task, TaskId(1));
        assert!(g.completed.contains(&TaskId(2)));
    }

    #[test]
    fn pull_examples() {
        // One ready task in group 0; group 0's other task waits on group 1.
        let mut f = fixture(
            "tasks 3
             task a reward 1 deps none class 0
             task b reward 1 deps c class 1
             task c reward 1 deps none class 2",
            &[&[0, 1], &[2]],
            2,
        );
        let mut ex = fixed_explorer(1.0);
        let (first, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 0.0, 0.004).unwrap();
        let first = first.unwrap();
        assert_eq!(first.task, TaskId(0));
        assert_eq!(first.start, 0.004);
        assert!(f.groups[0].pending().any(|t| t == TaskId(0)));

        let (second, out) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(1), 0.0, 0.004).unwrap();
        assert!(second.is_none());
        assert_eq!(out.waiting, [AgentId(1)]);
        assert_eq!(f.groups[0].agents[1].state, AgentState::Waiting);

        assert!(pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 0.0, 0.004).is_err());
    }

    #[test]
    fn simultaneous_pulls_take_distinct_tasks() {
        let mut f = fixture(THREE_FREE, &[&[0, 1, 2]], 3);
        let mut ex = fixed_explorer(1.0);
        let mut got = BTreeSet::new();
        for a in 0..3 {
            let (d, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(a), 0.0, 0.006).unwrap();
            assert!(got.insert(d.unwrap().task));
        }
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn completion_credits_and_releases_dependents() {
        let mut f = fixture(
            "tasks 4
             task a reward 7 deps none class 0
             task x reward 1 deps a class 1
             task y reward 1 deps a class 2
             task z reward 1 deps a class 3",
            &[&[0], &[1, 2, 3]],
            1,
        );
        let mut ex = fixed_explorer(2.0);
        let (d, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 0.0, 0.0).unwrap();
        let d = d.unwrap();
        let out = complete_task(&mut f.groups[0], &mut f.board, d.agent, d.task, d.solution, d.finish, |_, _, _| true)
            .unwrap();
        assert!(out.validated && out.group_finished);
        assert_eq!(out.reward, 7);
        assert_eq!(f.groups[0].agents[0].rewards_earned, 7);
        assert_eq!(out.foreign_ready, [TaskId(1), TaskId(2), TaskId(3)]);
        for t in out.foreign_ready {
            f.groups[1].mark_ready(t);
        }
        assert_eq!(f.groups[1].ready().count(), 3);
    }

    #[test]
    fn failed_validation_returns_task() {
        let mut f = fixture(THREE_FREE, &[&[0, 1, 2]], 1);
        let mut ex = fixed_explorer(1.0);
        let (d, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 0.0, 0.0).unwrap();
        let d = d.unwrap();
        let out = complete_task(&mut f.groups[0], &mut f.board, d.agent, d.task, d.solution.clone(), 1.0, |_, _, _| false)
            .unwrap();
        assert!(!out.validated);
        assert_eq!(f.groups[0].agents[0].rewards_earned, 0);
        assert!(f.groups[0].ready().any(|t| t == d.task));
        let (retry, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 1.0, 0.0).unwrap();
        assert_eq!(retry.as_ref().unwrap().task, d.task);
        assert_eq!(retry.unwrap().attempt, 1);
    }

    #[test]
    fn completing_foreign_task_is_a_state_error() {
        let mut f = fixture(THREE_FREE, &[&[0, 1, 2]], 2);
        let mut ex = fixed_explorer(1.0);
        let (d, _) = pull_task(&mut f.groups[0], &mut f.board, &mut ex, AgentId(0), 0.0, 0.0).unwrap();
        let d = d.unwrap();
        let err = complete_task(&mut f.groups[0], &mut f.board, AgentId(1), d.task, d.solution, 1.0, |_, _, _| true);
        assert!(matches!(err, Err(Error::State(_))));
    }

    #[test]
    fn waiting_accrues_until_assignment() {
        let mut f = fixture(
            "tasks 2\ntask a reward 1 deps none class 0\ntask b reward 1 deps a class 1",
            &[&[0, 1]],
            2,
        );
        let mut ex = fixed_explorer(4.0);
        let g = &mut f.groups[0];
        let (d, _) = pull_task(g, &mut f.board, &mut ex, AgentId(0), 0.0, 0.0).unwrap();
        let (none, _) = pull_task(g, &mut f.board, &mut ex, AgentId(1), 0.0, 0.0).unwrap();
        assert!(none.is_none());
        let d = d.unwrap();
        complete_task(g, &mut f.board, d.agent, d.task, d.solution, 4.0, |_, _, _| true).unwrap();
        let (next, _) = pull_task(g, &mut f.board, &mut ex, AgentId(1), 4.0, 0.0).unwrap();
        assert!(next.is_some());
        assert_eq!(g.agents[1].total_wait, 4.0);
    }

    #[test]
    fn board_tracks_generated_graph() {
        let graph = Arc::new(GraphFamily::Hds.generate(40, 2).unwrap());
        let subsets = graph.partition(2, crate::taskgraph::PartitionMode::Balanced, 2).unwrap();
        let board = DependencyBoard::new(&graph, &subsets);
        let none = BTreeSet::new();
        let ready = graph.ready_tasks(&none, &none);
        for t in graph.tasks() {
            assert_eq!(board.deps_satisfied(t.id), ready.contains(&t.id));
        }
    }
}
