//! Discrete-event simulation of cooperative task execution by groups of
//! agents.
//!
//! Tasks form a dependency graph and are split among groups. Each task is a
//! maze to be explored; solved mazes are shared inside the group and can be
//! reused for other tasks of the same inference class. Groups are run either
//! by a coordinator that hands out work or by agents that pull work
//! themselves.

pub mod control;
pub mod engine;
pub mod error;
pub mod knowledge;
pub mod lab;
pub mod maze;
pub mod seed;
pub mod taskgraph;

pub use control::{
    assign_tasks, complete_task, pull_task, Agent, AgentId, AgentState, ControlMode,
    DependencyBoard, Dispatch, GroupState,
};
pub use engine::{
    collect_task_distribution, compare_controls, replay_completion_counts, run_simulation,
    run_simulation_with, AgentLayout, ControlComparison, EventKind, EventRecord, Observer,
    Overheads, RunOptions, Scenario, SimulationReport, Speeds,
};
pub use error::{Error, Result};
pub use knowledge::{share_knowledge, KnowledgeBase, KnowledgeEntry};
pub use maze::{explore, generate_maze, validate_solution, Cell, Maze, Solution};
pub use taskgraph::{
    bundled_graph, load_task_graph, ClassId, GeneratorParams, GraphFamily, GroupId,
    PartitionMode, Task, TaskGraph, TaskId, TaskSubset,
};
pub use lab::{ExperimentResult, Workload};
