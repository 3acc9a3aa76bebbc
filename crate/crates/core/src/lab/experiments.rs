//! Replicated experiment designs and their default configurations.
//!
//! Replication `r` of a design runs with master seed `base.master_seed + r`.
//! Every sub-stream is hashed from the master seed, so consecutive seeds are
//! independent. Rows come back in cell order, then replication order,
//! regardless of how the work was scheduled.

use std::sync::Arc;

use rayon::prelude::*;

use crate::control::ControlMode;
use crate::engine::{self, run_simulation, AgentLayout, Scenario, SimulationReport, Speeds};
use crate::error::{Error, Result};
use crate::lab::result::ExperimentResult;
use crate::lab::theory::{
    expected_waiting_time, fully_connected_waiting, kendall_tau, monte_carlo_waiting, KendallTau,
};
use crate::seed::{self, Stream};
use crate::taskgraph::{GraphFamily, GroupId, PartitionMode, TaskGraph};

pub const DEFAULT_REPLICATIONS: usize = 20;
pub const GROUP_COUNTS: [usize; 6] = [1, 2, 4, 6, 8, 10];
pub const CONTROL_TASK_COUNTS: [usize; 7] = [20, 40, 80, 120, 160, 200, 240];

/// Where each replication's task graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Workload {
    Fixed(Arc<TaskGraph>),
    /// A fresh graph per replication, seeded by the replication seed.
    Generated { family: GraphFamily, tasks: usize },
}

impl Workload {
    pub fn graph_for(&self, seed: u64) -> Result<Arc<TaskGraph>> {
        match self {
            Workload::Fixed(g) => Ok(Arc::clone(g)),
            Workload::Generated { family, tasks } => Ok(Arc::new(family.generate(*tasks, seed)?)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Workload::Fixed(g) => format!("fixed graph of {} tasks", g.len()),
            Workload::Generated { family, tasks } => format!("{family} graphs of {tasks} tasks"),
        }
    }
}

pub fn replication_seed(master: u64, r: usize) -> u64 {
    master.wrapping_add(r as u64)
}

/// Runs `configure(base with graph and seed set)` for every (cell, replication)
/// pair in parallel.
fn replicate<C, F>(
    base: &Scenario,
    workload: &Workload,
    cells: &[C],
    seeds: usize,
    configure: F,
) -> Result<Vec<(usize, u64, SimulationReport)>>
where
    C: Sync,
    F: Fn(&C, &mut Scenario) + Sync,
{
    if seeds == 0 {
        return Err(Error::invalid("at least one replication is required"));
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..seeds).map(move |r| (c, r)))
        .collect();
    jobs.par_iter()
        .map(|&(c, r)| {
            let seed = replication_seed(base.master_seed, r);
            let mut s = base.clone();
            s.graph = workload.graph_for(seed)?;
            s.master_seed = seed;
            configure(&cells[c], &mut s);
            Ok((c, seed, run_simulation(&s)?))
        })
        .collect()
}

/// Mean system and group execution times as the number of groups varies,
/// with agents either fixed per group or fixed in total.
pub fn group_sweep(
    base: &Scenario,
    workload: &Workload,
    group_counts: &[usize],
    sizing: AgentLayout,
    seeds: usize,
) -> Result<ExperimentResult> {
    if group_counts.is_empty() {
        return Err(Error::invalid("group_counts must not be empty"));
    }
    let runs = replicate(base, workload, group_counts, seeds, |&l, s| {
        s.groups = l;
        s.agents = sizing;
    })?;
    let mut out = ExperimentResult::new(
        "group-sweep",
        ["groups", "agents", "et_system", "max_group_et", "mean_group_et", "twt_system"],
    );
    for (c, seed, rep) in runs {
        let l = group_counts[c];
        let agents = rep.rewards.len();
        let mean_group = rep.et_group.values().sum::<f64>() / l as f64;
        out.push(
            format!("l={l}"),
            seed,
            vec![l as f64, agents as f64, rep.et_system, rep.max_group_et(), mean_group, rep.twt_system],
        )?;
    }
    Ok(out)
}

/// Kendall tau between group count and system ET over every row.
pub fn group_sweep_trend(result: &ExperimentResult) -> Result<KendallTau> {
    let col = |name| {
        result
            .column(name)
            .ok_or_else(|| Error::invalid(format!("result has no `{name}` column")))
    };
    let (l, et) = (col("groups")?, col("et_system")?);
    let x: Vec<f64> = result.rows.iter().map(|r| r.values[l]).collect();
    let y: Vec<f64> = result.rows.iter().map(|r| r.values[et]).collect();
    kendall_tau(&x, &y)
}

/// Paired centralized and decentralized system ET per task count.
pub fn control_comparison(
    base: &Scenario,
    family: GraphFamily,
    task_counts: &[usize],
    seeds: usize,
) -> Result<ExperimentResult> {
    if seeds == 0 {
        return Err(Error::invalid("at least one replication is required"));
    }
    let rows = engine::compare_controls(base, family, task_counts, seeds)?;
    let mut out = ExperimentResult::new(
        "compare-controls",
        ["tasks", "et_centralized", "et_decentralized", "difference"],
    );
    for r in rows {
        out.push(
            format!("m={}", r.m),
            r.seed,
            vec![r.m as f64, r.et_centralized, r.et_decentralized, r.et_centralized - r.et_decentralized],
        )?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyStudy {
    /// {lds, hds} x {inter-dependency, independent}: ET and TWT per run.
    pub partitions: ExperimentResult,
    /// Both controls on the multi-group workload: ET, task count and TWT
    /// per group.
    pub controls: ExperimentResult,
}

impl DependencyStudy {
    /// Whether the dense workload shows lower TWT but higher ET under the
    /// independent partition, on seed means.
    pub fn hds_inversion(&self) -> Option<bool> {
        let p = &self.partitions;
        let inter = "hds/inter-dependency";
        let indep = "hds/independent";
        Some(
            p.mean(indep, "twt_system")? < p.mean(inter, "twt_system")?
                && p.mean(indep, "et_system")? > p.mean(inter, "et_system")?,
        )
    }
}

pub fn partition_study(
    base: &Scenario,
    lds: &Workload,
    hds: &Workload,
    seeds: usize,
) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new("dependency-study", ["et_system", "twt_system"]);
    for (label, workload) in [("lds", lds), ("hds", hds)] {
        let modes = [PartitionMode::Balanced, PartitionMode::Independent];
        let runs = replicate(base, workload, &modes, seeds, |&mode, s| {
            s.partition_mode = mode;
        })?;
        for (c, seed, rep) in runs {
            let placement = match modes[c] {
                PartitionMode::Balanced => "inter-dependency",
                PartitionMode::Independent => "independent",
            };
            out.push(format!("{label}/{placement}"), seed, vec![rep.et_system, rep.twt_system])?;
        }
    }
    Ok(out)
}

pub fn group_control_study(base: &Scenario, workload: &Workload, seeds: usize) -> Result<ExperimentResult> {
    let controls = [ControlMode::Centralized, ControlMode::Decentralized];
    let runs = replicate(base, workload, &controls, seeds, |&c, s| s.control = c)?;
    let mut out = ExperimentResult::new("group-controls", ["et_group", "tasks", "twt_group"]);
    for (c, seed, rep) in runs {
        for (g, et) in &rep.et_group {
            out.push(
                format!("{}/g{}", controls[c], g.0),
                seed,
                vec![*et, rep.tasks_completed[g] as f64, rep.twt_group[g]],
            )?;
        }
    }
    // Group-major order reads more naturally than run-major.
    let order: Vec<String> = out.cells().into_iter().map(String::from).collect();
    out.rows.sort_by_key(|r| order.iter().position(|c| *c == r.cell));
    Ok(out)
}

pub fn dependency_study(
    partition_base: &Scenario,
    lds: &Workload,
    hds: &Workload,
    control_base: &Scenario,
    control_workload: &Workload,
    seeds: usize,
) -> Result<DependencyStudy> {
    Ok(DependencyStudy {
        partitions: partition_study(partition_base, lds, hds, seeds)?,
        controls: group_control_study(control_base, control_workload, seeds)?,
    })
}

/// Completed-task counts of groups 0 and 1 per workload.
pub fn task_distribution(
    base: &Scenario,
    workloads: &[(&str, Workload)],
    seeds: usize,
) -> Result<ExperimentResult> {
    if base.groups < 2 {
        return Err(Error::UnknownGroup(1));
    }
    let mut out = ExperimentResult::new("task-distribution", ["count_a", "count_b", "abs_difference"]);
    for (label, workload) in workloads {
        for (_, seed, rep) in replicate(base, workload, &[()], seeds, |_, _| {})? {
            let (a, b) = engine::collect_task_distribution(&rep, GroupId(0), GroupId(1))?;
            out.push(*label, seed, vec![a as f64, b as f64, a.abs_diff(b) as f64])?;
        }
    }
    Ok(out)
}

/// System ET as the uniform agent speed varies. Carries no pass/fail
/// threshold; it shows where further speed stops paying off.
pub fn speed_sweep(base: &Scenario, workload: &Workload, speeds: &[f64], seeds: usize) -> Result<ExperimentResult> {
    if speeds.is_empty() {
        return Err(Error::invalid("speeds must not be empty"));
    }
    let runs = replicate(base, workload, speeds, seeds, |&v, s| s.speeds = Speeds::Uniform(v))?;
    let mut out = ExperimentResult::new("speed-sweep", ["speed", "et_system", "twt_system"]);
    for (c, seed, rep) in runs {
        out.push(format!("speed={}", speeds[c]), seed, vec![speeds[c], rep.et_system, rep.twt_system])?;
    }
    Ok(out)
}

/// Monte Carlo estimates of the waiting law over a grid, next to the exact
/// value. Each grid point samples from its own stream, so the z scores are
/// independent.
pub fn waiting_law_grid(
    ms: &[usize],
    ks: &[usize],
    ps: &[f64],
    trials: u64,
    seed: u64,
) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new(
        "waiting-law",
        ["m", "k", "p", "exact", "estimate", "std_error", "z"],
    );
    for &m in ms {
        for &k in ks {
            for &p in ps {
                let exact = expected_waiting_time(m, k, p)?;
                let point_seed = seed::derive(seed, Stream::MonteCarlo, &[m as u64, k as u64, p.to_bits()]);
                let est = monte_carlo_waiting(m, k, p, trials, point_seed)?;
                let z = if est.std_error > 0.0 {
                    (est.mean - exact) / est.std_error
                } else {
                    0.0
                };
                out.push(
                    format!("m={m},k={k},p={p}"),
                    seed,
                    vec![m as f64, k as f64, p, exact, est.mean, est.std_error, z],
                )?;
            }
        }
    }
    Ok(out)
}

pub fn fully_connected_table(ms: &[usize], ps: &[f64]) -> Result<ExperimentResult> {
    let mut out = ExperimentResult::new("fully-connected", ["m", "p", "exact", "proxy"]);
    for &m in ms {
        for &p in ps {
            let fc = fully_connected_waiting(m, p)?;
            out.push(format!("m={m},p={p}"), 0, vec![m as f64, p, fc.exact, fc.proxy])?;
        }
    }
    Ok(out)
}

/// A base scenario plus the workload it is meant to run on.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub base: Scenario,
    pub workload: Workload,
}

impl Preset {
    fn new(workload: Workload, groups: usize, agents: AgentLayout, seed: u64) -> Result<Self> {
        let graph = workload.graph_for(seed)?;
        Ok(Preset {
            base: Scenario::new(graph, groups, agents).with_seed(seed),
            workload,
        })
    }
}

pub mod presets {
    //! Default designs. Every preset uses the default overheads, maze size
    //! and agent speed.

    use super::*;

    /// 50 agents split over 1 to 10 groups on 500-task dense graphs.
    pub fn group_sweep_total(seed: u64) -> Result<Preset> {
        let mut p = Preset::new(
            Workload::Generated { family: GraphFamily::Hds, tasks: 500 },
            1,
            AgentLayout::Total(50),
            seed,
        )?;
        p.base.inference_q = Some(0.0);
        Ok(p)
    }

    /// 5 agents in each of 1 to 10 groups on 500-task dense graphs.
    pub fn group_sweep_per_group(seed: u64) -> Result<Preset> {
        let mut p = group_sweep_total(seed)?;
        p.base.agents = AgentLayout::PerGroup(5);
        Ok(p)
    }

    /// Two groups of 50 agents on sparse graphs; task count varies.
    pub fn control_comparison(seed: u64) -> Result<(Scenario, GraphFamily)> {
        let p = Preset::new(
            Workload::Generated { family: GraphFamily::Lds, tasks: 20 },
            2,
            AgentLayout::PerGroup(50),
            seed,
        )?;
        Ok((p.base, GraphFamily::Lds))
    }

    /// Two groups of 5 agents, 80 tasks each; returns the base and the
    /// sparse and dense workloads.
    pub fn partition_study(seed: u64) -> Result<(Scenario, Workload, Workload)> {
        let lds = Workload::Generated { family: GraphFamily::Lds, tasks: 160 };
        let hds = Workload::Generated { family: GraphFamily::Hds, tasks: 160 };
        let mut p = Preset::new(lds.clone(), 2, AgentLayout::PerGroup(5), seed)?;
        p.base.inference_q = Some(0.2);
        Ok((p.base, lds, hds))
    }

    /// Five groups of 5 agents on 90-task sparse graphs.
    pub fn group_controls(seed: u64) -> Result<Preset> {
        let mut p = Preset::new(
            Workload::Generated { family: GraphFamily::Lds, tasks: 90 },
            5,
            AgentLayout::PerGroup(5),
            seed,
        )?;
        p.base.inference_q = Some(0.2);
        Ok(p)
    }

    /// Two groups of 5 agents on 240 tasks with the independent partition;
    /// returns the base and the sparse, dense and edgeless workloads.
    pub fn task_distribution(seed: u64) -> Result<(Scenario, Vec<(&'static str, Workload)>)> {
        let workloads = vec![
            ("lds", Workload::Generated { family: GraphFamily::Lds, tasks: 240 }),
            ("hds", Workload::Generated { family: GraphFamily::Hds, tasks: 240 }),
            ("edgeless", Workload::Generated { family: GraphFamily::Fixed(0.0), tasks: 240 }),
        ];
        let mut p = Preset::new(workloads[0].1.clone(), 2, AgentLayout::PerGroup(5), seed)?;
        p.base.partition_mode = PartitionMode::Independent;
        Ok((p.base, workloads))
    }

    /// One group of 10 agents on 100-task sparse graphs.
    pub fn speed_sweep(seed: u64) -> Result<(Preset, Vec<f64>)> {
        let p = Preset::new(
            Workload::Generated { family: GraphFamily::Lds, tasks: 100 },
            1,
            AgentLayout::PerGroup(10),
            seed,
        )?;
        Ok((p, vec![100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0]))
    }
}
