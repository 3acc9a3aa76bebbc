//! Task sets with rewards and dependency structure.
//!
//! Tasks are addressed by a dense [`TaskId`] (declaration order). The textual
//! name is kept for I/O only. Every tie in this crate is broken by ascending
//! `TaskId`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskId(pub usize);

impl TaskId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Inference class. Tasks sharing a class accept each other's solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub usize);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: TaskId,
    pub name: String,
    pub reward: u64,
    pub deps: BTreeSet<TaskId>,
    pub class: ClassId,
}

/// A validated, acyclic task set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    dependents: Vec<Vec<TaskId>>,
    by_name: HashMap<String, TaskId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSubset {
    pub group_id: GroupId,
    pub task_ids: BTreeSet<TaskId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartitionMode {
    /// Seeded round-robin over a reward-descending order.
    #[default]
    Balanced,
    /// Greedy cut minimisation; subset sizes stay within 10% of the mean.
    Independent,
}

impl FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" | "inter-dependency" => Ok(PartitionMode::Balanced),
            "independent" | "independency" => Ok(PartitionMode::Independent),
            other => Err(Error::invalid(format!("unknown partition mode `{other}`"))),
        }
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionMode::Balanced => "balanced",
            PartitionMode::Independent => "independent",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    pub n_tasks: usize,
    pub density: f64,
    pub reward_range: (u64, u64),
}

impl TaskGraph {
    /// Builds a graph from tasks whose `id` fields equal their position.
    pub fn new(tasks: Vec<Task>) -> Result<Self> {
        let mut by_name = HashMap::with_capacity(tasks.len());
        for (i, t) in tasks.iter().enumerate() {
            if t.id != TaskId(i) {
                return Err(Error::invalid(format!(
                    "task `{}` has id {} at position {i}",
                    t.name, t.id.0
                )));
            }
            if by_name.insert(t.name.clone(), t.id).is_some() {
                return Err(Error::invalid(format!("duplicate task `{}`", t.name)));
            }
        }
        let mut dependents = vec![Vec::new(); tasks.len()];
        for t in &tasks {
            for &d in &t.deps {
                if d == t.id {
                    return Err(Error::Cycle {
                        task: t.name.clone(),
                    });
                }
                let Some(slot) = dependents.get_mut(d.0) else {
                    return Err(Error::DanglingDep {
                        task: t.name.clone(),
                        dep: format!("#{}", d.0),
                    });
                };
                slot.push(t.id);
            }
        }
        let graph = TaskGraph {
            tasks,
            dependents,
            by_name,
        };
        graph.check_acyclic()?;
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, id: TaskId) -> &Task {
        &self.tasks[id.0]
    }

    pub fn get(&self, id: TaskId) -> Option<&Task> {
        self.tasks.get(id.0)
    }

    pub fn id_of(&self, name: &str) -> Option<TaskId> {
        self.by_name.get(name).copied()
    }

    pub fn dependents(&self, id: TaskId) -> &[TaskId] {
        &self.dependents[id.0]
    }

    pub fn edge_count(&self) -> usize {
        self.tasks.iter().map(|t| t.deps.len()).sum()
    }

    pub fn total_reward(&self) -> u64 {
        self.tasks.iter().map(|t| t.reward).sum()
    }

    pub fn max_in_degree(&self) -> usize {
        self.tasks.iter().map(|t| t.deps.len()).max().unwrap_or(0)
    }

    /// Kahn's algorithm; among ready tasks the lowest id goes first.
    pub fn topo_order(&self) -> Vec<TaskId> {
        self.try_topo_order()
            .expect("TaskGraph is acyclic by construction")
    }

    fn try_topo_order(&self) -> std::result::Result<Vec<TaskId>, TaskId> {
        let mut indeg: Vec<usize> = self.tasks.iter().map(|t| t.deps.len()).collect();
        let mut heap: BinaryHeap<Reverse<TaskId>> = indeg
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(i, _)| Reverse(TaskId(i)))
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(Reverse(t)) = heap.pop() {
            order.push(t);
            for &c in &self.dependents[t.0] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    heap.push(Reverse(c));
                }
            }
        }
        if order.len() == self.len() {
            Ok(order)
        } else {
            let stuck = indeg.iter().position(|&d| d > 0).unwrap_or(0);
            Err(TaskId(stuck))
        }
    }

    fn check_acyclic(&self) -> Result<()> {
        self.try_topo_order().map(|_| ()).map_err(|t| Error::Cycle {
            task: self.tasks[t.0].name.clone(),
        })
    }

    /// Tasks that are neither completed nor assigned and whose dependencies
    /// are all completed.
    pub fn ready_tasks(
        &self,
        completed: &BTreeSet<TaskId>,
        assigned: &BTreeSet<TaskId>,
    ) -> BTreeSet<TaskId> {
        self.tasks
            .iter()
            .filter(|t| !completed.contains(&t.id) && !assigned.contains(&t.id))
            .filter(|t| t.deps.is_subset(completed))
            .map(|t| t.id)
            .collect()
    }

    /// Returns a copy with `completed` removed from every dependency set.
    pub fn update_dependencies(&self, completed: TaskId) -> Result<TaskGraph> {
        if completed.0 >= self.len() {
            return Err(Error::UnknownTask(format!("#{}", completed.0)));
        }
        let mut next = self.clone();
        for &c in &self.dependents[completed.0] {
            next.tasks[c.0].deps.remove(&completed);
        }
        next.dependents[completed.0].clear();
        Ok(next)
    }

    /// Random DAG: tasks are placed in a seeded random order and each pair
    /// (earlier, later) becomes a dependency edge with probability `density`.
    /// Every task gets its own inference class.
    pub fn generate(params: GeneratorParams, seed: u64) -> Result<TaskGraph> {
        let GeneratorParams {
            n_tasks,
            density,
            reward_range: (lo, hi),
        } = params;
        if n_tasks == 0 {
            return Err(Error::invalid("n_tasks must be at least 1"));
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::invalid(format!("density {density} outside [0, 1]")));
        }
        if lo > hi {
            return Err(Error::invalid(format!("empty reward range [{lo}, {hi}]")));
        }
        let mut rng = seed::rng(seed, Stream::Graph, &[n_tasks as u64]);
        let mut order: Vec<usize> = (0..n_tasks).collect();
        order.shuffle(&mut rng);
        let mut deps = vec![BTreeSet::new(); n_tasks];
        for later in 1..n_tasks {
            for earlier in 0..later {
                if rng.random_bool(density) {
                    deps[order[later]].insert(TaskId(order[earlier]));
                }
            }
        }
        let tasks = deps
            .into_iter()
            .enumerate()
            .map(|(i, deps)| Task {
                id: TaskId(i),
                name: (i + 1).to_string(),
                reward: rng.random_range(lo..=hi),
                deps,
                class: ClassId(i as u32),
            })
            .collect();
        TaskGraph::new(tasks)
    }

    /// Reassigns inference classes: each task joins one of `max(1, m/10)`
    /// shared classes with probability `q`, otherwise keeps a private class.
    pub fn with_inference_classes(&self, q: f64, seed: u64) -> Result<TaskGraph> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("inference_q {q} outside [0, 1]")));
        }
        let m = self.len();
        let shared = (m / 10).max(1) as u32;
        let mut rng = seed::rng(seed, Stream::Classes, &[m as u64]);
        let mut next = self.clone();
        for t in &mut next.tasks {
            t.class = if rng.random_bool(q) {
                ClassId(rng.random_range(0..shared))
            } else {
                ClassId(shared + t.id.0 as u32)
            };
        }
        Ok(next)
    }

    /// Members of each inference class, indexed by task.
    pub fn class_members(&self, class: ClassId) -> impl Iterator<Item = TaskId> + '_ {
        self.tasks
            .iter()
            .filter(move |t| t.class == class)
            .map(|t| t.id)
    }

    pub fn partition(&self, l: usize, mode: PartitionMode, seed: u64) -> Result<Vec<TaskSubset>> {
        let m = self.len();
        if l < 1 || l > m {
            return Err(Error::invalid(format!(
                "group count {l} must be in 1..={m}"
            )));
        }
        let owner = match mode {
            PartitionMode::Balanced => self.partition_balanced(l, seed),
            PartitionMode::Independent => self.partition_independent(l),
        };
        let mut subsets: Vec<TaskSubset> = (0..l)
            .map(|g| TaskSubset {
                group_id: GroupId(g),
                task_ids: BTreeSet::new(),
            })
            .collect();
        for (t, g) in owner.into_iter().enumerate() {
            subsets[g].task_ids.insert(TaskId(t));
        }
        Ok(subsets)
    }

    fn partition_balanced(&self, l: usize, seed: u64) -> Vec<usize> {
        let mut rng = seed::rng(seed, Stream::Partition, &[l as u64]);
        let mut deal: Vec<usize> = (0..l).collect();
        deal.shuffle(&mut rng);
        let mut order: Vec<TaskId> = self.tasks.iter().map(|t| t.id).collect();
        order.sort_by_key(|&t| (Reverse(self.task(t).reward), t));
        let mut owner = vec![0; self.len()];
        for (i, t) in order.into_iter().enumerate() {
            owner[t.0] = deal[i % l];
        }
        owner
    }

    fn partition_independent(&self, l: usize) -> Vec<usize> {
        let m = self.len();
        let mean = m as f64 / l as f64;
        let lower = ((0.9 * mean).floor() as usize).max(1);
        let upper = (1.1 * mean).ceil() as usize;

        // Full subsets stop accepting tasks, so only the lower bound can
        // still need repair afterwards.
        let mut owner = vec![usize::MAX; m];
        let mut sizes = vec![0usize; l];
        for t in self.topo_order() {
            let mut votes = vec![0usize; l];
            for d in &self.task(t).deps {
                votes[owner[d.0]] += 1;
            }
            let g = (0..l)
                .filter(|&g| sizes[g] < upper)
                .min_by_key(|&g| (Reverse(votes[g]), sizes[g], g))
                .expect("l * upper >= m");
            owner[t.0] = g;
            sizes[g] += 1;
        }

        while sizes.iter().any(|&s| s > upper || s < lower) {
            let donor = (0..l).max_by_key(|&g| (sizes[g], Reverse(g))).unwrap();
            let receiver = (0..l).min_by_key(|&g| (sizes[g], g)).unwrap();
            let moved = (0..m)
                .filter(|&t| owner[t] == donor)
                .min_by_key(|&t| {
                    let (mut to_donor, mut to_receiver) = (0i64, 0i64);
                    let neighbours = self.tasks[t].deps.iter().chain(self.dependents[t].iter());
                    for n in neighbours {
                        if owner[n.0] == donor {
                            to_donor += 1;
                        } else if owner[n.0] == receiver {
                            to_receiver += 1;
                        }
                    }
                    (to_donor - to_receiver, t)
                })
                .expect("donor subset is non-empty");
            owner[moved] = receiver;
            sizes[donor] -= 1;
            sizes[receiver] += 1;
        }
        owner
    }

    /// Dependency edges whose endpoints land in different subsets.
    pub fn cut_edges(&self, subsets: &[TaskSubset]) -> usize {
        let mut owner = vec![usize::MAX; self.len()];
        for (g, s) in subsets.iter().enumerate() {
            for t in &s.task_ids {
                owner[t.0] = g;
            }
        }
        self.tasks
            .iter()
            .flat_map(|t| t.deps.iter().map(move |d| (t.id, *d)))
            .filter(|(t, d)| owner[t.0] != owner[d.0])
            .count()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("tasks {}\n", self.len());
        for t in &self.tasks {
            let deps = if t.deps.is_empty() {
                "none".to_string()
            } else {
                t.deps
                    .iter()
                    .map(|d| self.tasks[d.0].name.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            writeln!(
                out,
                "task {} reward {} deps {} class {}",
                t.name, t.reward, deps, t.class.0
            )
            .unwrap();
        }
        out
    }
}

impl FromStr for TaskGraph {
    type Err = Error;

    /// Parses the line format:
    ///
    /// ```text
    /// # comment
    /// tasks 3
    /// task a reward 1 deps none class 0
    /// task b reward 2 deps a class 1
    /// ```
    fn from_str(source: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let mut declared: Option<(usize, usize)> = None;
        let mut raw: Vec<(usize, String, u64, Vec<String>, u32)> = Vec::new();

        for (idx, line) in source.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["tasks", n] => {
                    if declared.is_some() {
                        return Err(parse_err(lineno, "duplicate `tasks` header".into()));
                    }
                    let n = n
                        .parse::<usize>()
                        .map_err(|e| parse_err(lineno, format!("task count: {e}")))?;
                    declared = Some((n, lineno));
                }
                ["task", name, "reward", reward, "deps", deps, "class", class] => {
                    if declared.is_none() {
                        return Err(parse_err(lineno, "`task` before `tasks` header".into()));
                    }
                    let reward = reward
                        .parse::<u64>()
                        .map_err(|e| parse_err(lineno, format!("reward: {e}")))?;
                    let class = class
                        .parse::<u32>()
                        .map_err(|e| parse_err(lineno, format!("class: {e}")))?;
                    let deps = if *deps == "none" {
                        Vec::new()
                    } else {
                        deps.split(',').map(str::to_string).collect()
                    };
                    if deps.iter().any(String::is_empty) {
                        return Err(parse_err(lineno, "empty dependency id".into()));
                    }
                    raw.push((lineno, name.to_string(), reward, deps, class));
                }
                _ => return Err(parse_err(lineno, format!("unrecognised line `{line}`"))),
            }
        }

        let Some((count, header_line)) = declared else {
            return Err(parse_err(0, "missing `tasks` header".into()));
        };
        if count != raw.len() {
            return Err(parse_err(
                header_line,
                format!("header declares {count} tasks, found {}", raw.len()),
            ));
        }
        let mut ids = HashMap::new();
        for (i, (lineno, name, ..)) in raw.iter().enumerate() {
            if ids.insert(name.clone(), TaskId(i)).is_some() {
                return Err(parse_err(*lineno, format!("duplicate task `{name}`")));
            }
        }
        let mut tasks = Vec::with_capacity(raw.len());
        for (i, (_, name, reward, deps, class)) in raw.into_iter().enumerate() {
            let mut dep_ids = BTreeSet::new();
            for d in deps {
                let Some(&id) = ids.get(&d) else {
                    return Err(Error::DanglingDep { task: name, dep: d });
                };
                dep_ids.insert(id);
            }
            tasks.push(Task {
                id: TaskId(i),
                name,
                reward,
                deps: dep_ids,
                class: ClassId(class),
            });
        }
        TaskGraph::new(tasks)
    }
}

/// Parses graph text; shorthand for `source.parse::<TaskGraph>()`.
pub fn load_task_graph(source: &str) -> Result<TaskGraph> {
    source.parse()
}

/// Ten-task, two-group layout with cross-group dependencies.
pub const G10_GRAPH: &str = include_str!("../graphs/g10.graph");

pub fn bundled_graph(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".graph") {
        "g10" => Some(G10_GRAPH),
        _ => None,
    }
}

/// Parametric stand-ins for the sparse and dense program graphs. The density
/// is scaled with task count so the mean in-degree matches the 18-node sparse
/// graph (density 0.1) or the 40-node dense graph (density 0.6).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    /// Less-dependent system.
    Lds,
    /// Highly-dependent system.
    Hds,
    /// Constant density, independent of size.
    Fixed(f64),
}

pub const DEFAULT_REWARD_RANGE: (u64, u64) = (1, 100);

impl GraphFamily {
    pub fn density(self, n_tasks: usize) -> f64 {
        let scaled = |reference_n: f64, reference_density: f64| {
            if n_tasks <= 1 {
                0.0
            } else {
                (reference_density * (reference_n - 1.0) / (n_tasks as f64 - 1.0)).min(1.0)
            }
        };
        match self {
            GraphFamily::Lds => scaled(18.0, 0.1),
            GraphFamily::Hds => scaled(40.0, 0.6),
            GraphFamily::Fixed(d) => d,
        }
    }

    pub fn generate(self, n_tasks: usize, seed: u64) -> Result<TaskGraph> {
        TaskGraph::generate(
            GeneratorParams {
                n_tasks,
                density: self.density(n_tasks),
                reward_range: DEFAULT_REWARD_RANGE,
            },
            seed,
        )
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lds" => Ok(GraphFamily::Lds),
            "hds" => Ok(GraphFamily::Hds),
            other => other
                .parse::<f64>()
                .map(GraphFamily::Fixed)
                .map_err(|_| Error::invalid(format!("unknown graph family `{s}`"))),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFamily::Lds => f.write_str("lds"),
            GraphFamily::Hds => f.write_str("hds"),
            GraphFamily::Fixed(d) => write!(f, "{d}"),
        }
    }
}
