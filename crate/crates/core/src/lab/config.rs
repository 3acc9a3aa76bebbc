//! Scenario files.
//!
//! ```toml
//! seed = 7
//! l = 2                        # number of groups
//! control = "decentralized"    # or "centralized"
//! partition = "balanced"       # or "independent"
//! inference_q = 0.2            # optional; omit to keep the graph's classes
//! validation_fail_p = 0.0
//!
//! [graph]                      # exactly one of file, bundled, generate
//! file = "tasks.graph"         # relative to the config file
//! # bundled = "g10"
//! # generate = { tasks = 100, family = "lds", seed = 3 }
//! # generate = { tasks = 100, density = 0.05, reward_range = [1, 100] }
//!
//! [agents]                     # exactly one of per_group, total
//! per_group = 5
//!
//! [maze]
//! width = 32
//! height = 32
//!
//! [speeds]                     # exactly one of uniform, per_agent
//! uniform = 800.0
//!
//! [overheads]
//! assign_delay = 0.05
//! pull_cost_per_agent = 0.002
//! split = 0.5
//! collect = 0.5
//! ```
//!
//! Every section except `[graph]` is optional. Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::engine::{AgentLayout, Overheads, Scenario, Speeds, DEFAULT_MAZE_SIZE, DEFAULT_SPEED};
use crate::error::{Error, Result};
use crate::taskgraph::{
    bundled_graph, load_task_graph, GeneratorParams, GraphFamily, TaskGraph,
    DEFAULT_REWARD_RANGE,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    seed: u64,
    l: usize,
    control: Option<String>,
    partition: Option<String>,
    inference_q: Option<f64>,
    validation_fail_p: Option<f64>,
    graph: RawGraph,
    agents: Option<RawAgents>,
    maze: Option<RawMaze>,
    speeds: Option<RawSpeeds>,
    overheads: Option<RawOverheads>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    file: Option<PathBuf>,
    bundled: Option<String>,
    generate: Option<RawGenerator>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    tasks: usize,
    family: Option<String>,
    density: Option<f64>,
    reward_range: Option<(u64, u64)>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgents {
    per_group: Option<usize>,
    total: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaze {
    width: usize,
    height: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpeeds {
    uniform: Option<f64>,
    per_agent: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverheads {
    assign_delay: Option<f64>,
    pull_cost_per_agent: Option<f64>,
    split: Option<f64>,
    collect: Option<f64>,
}

/// Parses a scenario. Relative graph paths resolve against `base_dir`, or
/// the working directory when it is `None`.
pub fn load_scenario(source: &str, base_dir: Option<&Path>) -> Result<Scenario> {
    let table: toml::Table = source.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e
            .span()
            .map_or(0, |s| source[..s.start.min(source.len())].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    let raw: RawScenario = serde_path_to_error::deserialize(table).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(path, e.into_inner().message().to_string())
    })?;
    build(raw, base_dir)
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text, path.parent())
}

fn parse_field<T: std::str::FromStr<Err = Error>>(key: &str, value: Option<String>) -> Result<Option<T>> {
    value
        .map(|v| v.parse().map_err(|e: Error| Error::schema(key, e.to_string())))
        .transpose()
}

fn exactly_one(key: &str, present: &[(&str, bool)]) -> Result<()> {
    let names: Vec<&str> = present.iter().map(|(n, _)| *n).collect();
    match present.iter().filter(|(_, p)| *p).count() {
        1 => Ok(()),
        _ => Err(Error::schema(key, format!("set exactly one of {}", names.join(", ")))),
    }
}

fn load_graph(raw: RawGraph, seed: u64, base_dir: Option<&Path>) -> Result<TaskGraph> {
    exactly_one(
        "graph",
        &[
            ("file", raw.file.is_some()),
            ("bundled", raw.bundled.is_some()),
            ("generate", raw.generate.is_some()),
        ],
    )?;
    if let Some(file) = raw.file {
        let path = match base_dir {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file,
        };
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        return load_task_graph(&text);
    }
    if let Some(name) = raw.bundled {
        let text = bundled_graph(&name)
            .ok_or_else(|| Error::schema("graph.bundled", format!("no bundled graph `{name}`")))?;
        return load_task_graph(text);
    }
    let g = raw.generate.expect("checked above");
    let density = match (g.family, g.density) {
        (Some(f), None) => parse_field::<GraphFamily>("graph.generate.family", Some(f))?
            .expect("present")
            .density(g.tasks),
        (None, Some(d)) => d,
        _ => {
            return Err(Error::schema(
                "graph.generate",
                "set exactly one of family, density",
            ))
        }
    };
    TaskGraph::generate(
        GeneratorParams {
            n_tasks: g.tasks,
            density,
            reward_range: g.reward_range.unwrap_or(DEFAULT_REWARD_RANGE),
        },
        g.seed.unwrap_or(seed),
    )
    .map_err(|e| Error::schema("graph.generate", e.to_string()))
}

fn build(raw: RawScenario, base_dir: Option<&Path>) -> Result<Scenario> {
    let graph = load_graph(raw.graph, raw.seed, base_dir)?;
    if raw.l < 1 || raw.l > graph.len() {
        return Err(Error::schema(
            "l",
            format!("group count must be in 1..={}, got {}", graph.len(), raw.l),
        ));
    }
    let agents = match raw.agents {
        None => AgentLayout::PerGroup(1),
        Some(a) => {
            exactly_one("agents", &[("per_group", a.per_group.is_some()), ("total", a.total.is_some())])?;
            match (a.per_group, a.total) {
                (Some(n), _) => AgentLayout::PerGroup(n),
                (_, Some(n)) => AgentLayout::Total(n),
                _ => unreachable!(),
            }
        }
    };
    let speeds = match raw.speeds {
        None => Speeds::Uniform(DEFAULT_SPEED),
        Some(s) => {
            exactly_one("speeds", &[("uniform", s.uniform.is_some()), ("per_agent", s.per_agent.is_some())])?;
            match (s.uniform, s.per_agent) {
                (Some(v), _) => Speeds::Uniform(v),
                (_, Some(v)) => Speeds::PerAgent(v),
                _ => unreachable!(),
            }
        }
    };
    let defaults = Overheads::default();
    let overheads = raw.overheads.map_or(defaults, |o| Overheads {
        assign_delay: o.assign_delay.unwrap_or(defaults.assign_delay),
        pull_cost_per_agent: o.pull_cost_per_agent.unwrap_or(defaults.pull_cost_per_agent),
        split: o.split.unwrap_or(defaults.split),
        collect: o.collect.unwrap_or(defaults.collect),
    });
    let scenario = Scenario {
        graph: Arc::new(graph),
        groups: raw.l,
        agents,
        control: parse_field("control", raw.control)?.unwrap_or_default(),
        partition_mode: parse_field("partition", raw.partition)?.unwrap_or_default(),
        maze_size: raw.maze.map_or(DEFAULT_MAZE_SIZE, |m| (m.width, m.height)),
        speeds,
        inference_q: raw.inference_q,
        validation_fail_p: raw.validation_fail_p.unwrap_or(0.0),
        overheads,
        master_seed: raw.seed,
    };
    scenario
        .validate()
        .map_err(|e| Error::schema(".", e.to_string()))?;
    Ok(scenario)
}
