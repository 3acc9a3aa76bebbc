//! Group-scoped knowledge bases.
//!
//! Every agent of a group sees the same store, so a single base per group
//! stands in for the per-agent knowledge sets. A shared solution is visible
//! to every member of the task's inference class.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::control::{Agent, AgentId};
use crate::maze::Solution;
use crate::taskgraph::{ClassId, GroupId, TaskGraph, TaskId};

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEntry {
    pub task_id: TaskId,
    pub solution: Solution,
    pub learned_at: f64,
    pub source_agent: AgentId,
    /// Group that produced the entry.
    pub group_id: GroupId,
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    group_id: GroupId,
    graph: Arc<TaskGraph>,
    entries: BTreeMap<TaskId, KnowledgeEntry>,
    /// Class -> tasks whose solutions apply to it, in learning order.
    class_index: BTreeMap<ClassId, Vec<TaskId>>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.group_id == other.group_id
            && self.entries == other.entries
            && self.class_index == other.class_index
    }
}

impl KnowledgeBase {
    pub fn new(group_id: GroupId, graph: Arc<TaskGraph>) -> Self {
        KnowledgeBase {
            group_id,
            graph,
            entries: BTreeMap::new(),
            class_index: BTreeMap::new(),
        }
    }

    pub fn group_id(&self) -> GroupId {
        self.group_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &KnowledgeEntry> {
        self.entries.values()
    }

    /// Records a validated solution. Re-sharing a task keeps the earliest
    /// entry.
    pub fn share(&mut self, task: TaskId, solution: Solution, now: f64, source: AgentId) {
        if let Some(existing) = self.entries.get(&task) {
            if existing.learned_at <= now {
                return;
            }
        }
        let fresh = self.entries.insert(
            task,
            KnowledgeEntry {
                task_id: task,
                solution,
                learned_at: now.max(0.0),
                source_agent: source,
                group_id: self.group_id,
            },
        );
        if fresh.is_none() {
            let class = self.graph.task(task).class;
            self.class_index.entry(class).or_default().push(task);
        }
    }

    /// Direct entry first, then the earliest solution shared for the task's
    /// inference class.
    pub fn lookup(&self, task: TaskId) -> Option<&Solution> {
        if let Some(e) = self.entries.get(&task) {
            return Some(&e.solution);
        }
        let class = self.graph.get(task)?.class;
        let source = self.class_index.get(&class)?.first()?;
        self.entries.get(source).map(|e| &e.solution)
    }

    /// Every solution this group can apply to `task`.
    pub fn solutions_for(&self, task: TaskId) -> Vec<&Solution> {
        let mut out: Vec<&Solution> = self.entries.get(&task).map(|e| &e.solution).into_iter().collect();
        if let Some(class) = self.graph.get(task).map(|t| t.class) {
            for src in self.class_index.get(&class).into_iter().flatten() {
                if *src != task {
                    out.push(&self.entries[src].solution);
                }
            }
        }
        out
    }

    /// Removes a class from the index without touching the entries. Only
    /// useful for fault injection.
    pub fn forget_class(&mut self, class: ClassId) {
        self.class_index.remove(&class);
    }

    /// For every entry `(t_k, s_k)` and every `t_l` in the same class, `s_k`
    /// must be applicable to `t_l` for each listed agent. Agents outside the
    /// group, or entries learned elsewhere, fail the check.
    pub fn transitivity_check(&self, group_agents: &[Agent]) -> bool {
        if group_agents.iter().any(|a| a.group_id != self.group_id) {
            return false;
        }
        self.entries.values().all(|entry| {
            entry.group_id == self.group_id
                && self
                    .graph
                    .class_members(self.graph.task(entry.task_id).class)
                    .all(|member| self.solutions_for(member).contains(&&entry.solution))
        })
    }
}

pub fn share_knowledge(
    mut kb: KnowledgeBase,
    task: TaskId,
    solution: Solution,
    now: f64,
    source: AgentId,
) -> KnowledgeBase {
    kb.share(task, solution, now, source);
    kb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::Cell;

    fn graph() -> Arc<TaskGraph> {
        Arc::new(
            "tasks 4
             task t1 reward 1 deps none class 7
             task t2 reward 1 deps none class 7
             task t3 reward 1 deps none class 7
             task t4 reward 1 deps none class 9"
                .parse()
                .unwrap(),
        )
    }

    fn sol(task: usize, x: usize) -> Solution {
        Solution {
            task_id: TaskId(task),
            path: vec![Cell::new(x, 0), Cell::new(x + 1, 0)],
            steps_explored: 2,
        }
    }

    #[test]
    fn share_and_lookup() {
        let kb = KnowledgeBase::new(GroupId(0), graph());
        assert!(kb.lookup(TaskId(0)).is_none());
        let kb = share_knowledge(kb, TaskId(0), sol(0, 1), 1.0, AgentId(0));
        assert_eq!(kb.lookup(TaskId(0)), Some(&sol(0, 1)));
        assert_eq!(kb.lookup(TaskId(1)), Some(&sol(0, 1)));
        assert_eq!(kb.lookup(TaskId(2)), Some(&sol(0, 1)));
        assert!(kb.lookup(TaskId(3)).is_none());
    }

    #[test]
    fn share_is_idempotent() {
        let once = share_knowledge(KnowledgeBase::new(GroupId(0), graph()), TaskId(0), sol(0, 1), 1.0, AgentId(0));
        let twice = share_knowledge(once.clone(), TaskId(0), sol(0, 1), 1.0, AgentId(0));
        assert_eq!(once, twice);
        let later = share_knowledge(once.clone(), TaskId(0), sol(0, 5), 3.0, AgentId(1));
        assert_eq!(later, once);
        let earlier = share_knowledge(once.clone(), TaskId(0), sol(0, 5), 0.5, AgentId(1));
        assert_eq!(earlier.entries().next().unwrap().learned_at, 0.5);
        assert_eq!(earlier.lookup(TaskId(1)), Some(&sol(0, 5)));
    }

    #[test]
    fn transitivity_holds_and_negative_control_fails() {
        let agents: Vec<Agent> = (0..3).map(|i| Agent::new(AgentId(i), GroupId(0), 1.0)).collect();
        let mut kb = KnowledgeBase::new(GroupId(0), graph());
        assert!(kb.transitivity_check(&agents));
        kb.share(TaskId(0), sol(0, 1), 1.0, AgentId(0));
        kb.share(TaskId(1), sol(1, 3), 2.0, AgentId(1));
        assert!(kb.transitivity_check(&agents));
        assert!(kb.transitivity_check(&agents[..1]));

        let outsider = [Agent::new(AgentId(9), GroupId(1), 1.0)];
        assert!(!kb.transitivity_check(&outsider));

        kb.forget_class(ClassId(7));
        assert!(!kb.transitivity_check(&agents));
    }
}
