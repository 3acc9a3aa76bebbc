use std::collections::BTreeSet;

use coopexec::{GeneratorParams, GraphFamily, PartitionMode, TaskGraph, TaskId};
use proptest::prelude::*;

fn graph(n: usize, density: f64, seed: u64) -> TaskGraph {
    TaskGraph::generate(
        GeneratorParams {
            n_tasks: n,
            density,
            reward_range: (1, 100),
        },
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_graphs_are_acyclic_and_reproducible(n in 1usize..80, density in 0.0f64..=1.0, seed: u64) {
        let g = graph(n, density, seed);
        let order = g.topo_order();
        prop_assert_eq!(order.len(), n);
        let mut position = vec![0; n];
        for (i, t) in order.iter().enumerate() {
            position[t.0] = i;
        }
        for t in g.tasks() {
            for d in &t.deps {
                prop_assert!(position[d.0] < position[t.id.0]);
            }
            prop_assert!((1..=100).contains(&t.reward));
        }
        prop_assert_eq!(&g, &graph(n, density, seed));
        let reparsed: TaskGraph = g.to_text().parse().unwrap();
        prop_assert_eq!(&reparsed, &g);
    }

    #[test]
    fn partitions_are_sound(n in 1usize..120, density in 0.0f64..0.3, seed: u64, l_frac in 0.0f64..1.0, independent: bool) {
        let g = graph(n, density, seed);
        let l = 1 + ((n - 1) as f64 * l_frac) as usize;
        let mode = if independent { PartitionMode::Independent } else { PartitionMode::Balanced };
        let subsets = g.partition(l, mode, seed).unwrap();
        prop_assert_eq!(subsets.len(), l);
        let mut seen = BTreeSet::new();
        for (i, s) in subsets.iter().enumerate() {
            prop_assert_eq!(s.group_id.0, i);
            for t in &s.task_ids {
                prop_assert!(seen.insert(*t), "task {:?} in two subsets", t);
            }
        }
        prop_assert_eq!(seen.len(), n);
        let sizes: Vec<usize> = subsets.iter().map(|s| s.task_ids.len()).collect();
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        match mode {
            PartitionMode::Balanced => prop_assert!(hi - lo <= 1, "{:?}", sizes),
            PartitionMode::Independent => {
                let mean = n as f64 / l as f64;
                prop_assert!(lo >= ((0.9 * mean).floor() as usize).max(1), "{:?}", sizes);
                prop_assert!(hi <= (1.1 * mean).ceil() as usize, "{:?}", sizes);
            }
        }
    }

    #[test]
    fn ready_tasks_have_completed_deps(n in 1usize..50, density in 0.0f64..0.5, seed: u64, cut in 0usize..50) {
        let g = graph(n, density, seed);
        let order = g.topo_order();
        let completed: BTreeSet<TaskId> = order.iter().take(cut.min(n)).copied().collect();
        let assigned: BTreeSet<TaskId> = order.iter().skip(cut.min(n)).take(1).copied().collect();
        let ready = g.ready_tasks(&completed, &assigned);
        for t in g.tasks() {
            let expected = !completed.contains(&t.id)
                && !assigned.contains(&t.id)
                && t.deps.is_subset(&completed);
            prop_assert_eq!(ready.contains(&t.id), expected);
        }
    }

    #[test]
    fn update_dependencies_is_idempotent(n in 2usize..40, density in 0.0f64..0.6, seed: u64, pick in 0usize..40) {
        let g = graph(n, density, seed);
        let t = TaskId(pick % n);
        let once = g.update_dependencies(t).unwrap();
        prop_assert!(once.tasks().iter().all(|task| !task.deps.contains(&t)));
        prop_assert_eq!(once.update_dependencies(t).unwrap(), once);
    }
}

#[test]
fn mean_in_degree_matches_density() {
    for (n, density) in [(18, 0.1), (40, 0.6), (100, 0.05)] {
        let total: f64 = (0..100)
            .map(|s| graph(n, density, s).edge_count() as f64 / n as f64)
            .sum();
        let mean = total / 100.0;
        let expected = density * (n as f64 - 1.0) / 2.0;
        assert!(
            (mean - expected).abs() <= 0.1 * expected,
            "n={n} density={density}: mean in-degree {mean}, expected {expected}"
        );
    }
}

#[test]
fn families_keep_reference_in_degree() {
    // Same expected in-degree as the 18-node and 40-node reference graphs.
    for n in [60, 160, 500] {
        let lds = GraphFamily::Lds.density(n) * (n as f64 - 1.0);
        let hds = GraphFamily::Hds.density(n) * (n as f64 - 1.0);
        assert!((lds - 0.1 * 17.0).abs() < 1e-9);
        assert!((hds - 0.6 * 39.0).abs() < 1e-9);
    }
}

#[test]
fn independent_partition_cuts_fewer_edges_on_sparse_graphs() {
    let mut fewer = 0;
    for seed in 0..20 {
        let g = GraphFamily::Lds.generate(160, seed).unwrap();
        let bal = g.partition(2, PartitionMode::Balanced, seed).unwrap();
        let ind = g.partition(2, PartitionMode::Independent, seed).unwrap();
        if g.cut_edges(&ind) < g.cut_edges(&bal) {
            fewer += 1;
        }
    }
    assert_eq!(fewer, 20);
}
