use proptest::prelude::*;

use whiteboard::adversary::{make_scheduler, sweep, SchedulerKind, SweepOptions};
use whiteboard::engine::{BudgetConfig, Model, Output, Simulator, Whiteboard};
use whiteboard::graph::{enumerate_graphs, is_connected, LabeledGraph};
use whiteboard::protocols;
use whiteboard::verify::Verdict;

fn graph() -> impl Strategy<Value = LabeledGraph> {
    (1usize..=9).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (Just(n), 0u64..(1u64 << pairs.min(36)))
    })
    .prop_map(|(n, mask)| LabeledGraph::from_edge_mask(n, mask).unwrap())
}

proptest! {
    #[test]
    fn file_format_round_trips(g in graph()) {
        let text = g.to_file_string();
        let back: LabeledGraph = text.parse().unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_file_string(), text);
    }

    #[test]
    fn seeded_runs_repeat(g in graph(), seed in any::<u64>()) {
        let p = protocols::bfs_freesync(1);
        let trace = || {
            let sched = make_scheduler(SchedulerKind::SeededRandom(seed)).unwrap();
            whiteboard::run(&g, &p, Model::FreeSync, &sched, BudgetConfig::default()).unwrap().trace_jsonl()
        };
        prop_assert_eq!(trace(), trace());
    }

    #[test]
    fn lifted_num_edges_agrees(g in graph(), seed in any::<u64>()) {
        let p = whiteboard::lift_to(std::sync::Arc::new(protocols::num_edges_simasync()), Model::FreeSync).unwrap();
        let sched = make_scheduler(SchedulerKind::SeededRandom(seed)).unwrap();
        let res = whiteboard::run(&g, p.as_ref(), Model::FreeSync, &sched, BudgetConfig::default()).unwrap();
        prop_assert_eq!(res.output, Output::Count(g.edge_count() as u64));
    }

    #[test]
    fn board_grows_by_prefix(g in graph(), seed in any::<u64>()) {
        let p = protocols::spanning_tree_freeasync(1);
        let sim = Simulator::new(&g, &p, Model::FreeAsync, BudgetConfig::default()).unwrap();
        let sched = make_scheduler(SchedulerKind::SeededRandom(seed)).unwrap();
        match sim.run(&sched) {
            Ok(res) => {
                prop_assert!(is_connected(&g));
                for (k, rec) in res.trace.iter().enumerate() {
                    prop_assert_eq!(rec.board_len, k + 1);
                }
                prop_assert!(sim.check_timing_laws(&res.board).is_ok());
            }
            Err(_) => prop_assert!(!is_connected(&g)),
        }
    }
}

#[test]
fn memoization_does_not_change_reports() {
    let always = |_: &Output, _: &Whiteboard| Verdict::Correct;
    for n in 1..=4 {
        for g in enumerate_graphs(n).unwrap() {
            for x in g.nodes() {
                let p = protocols::mis_simsync(x);
                let on = sweep(&g, &p, Model::SimSync, &always, SweepOptions::default()).unwrap();
                let off = sweep(
                    &g,
                    &p,
                    Model::SimSync,
                    &always,
                    SweepOptions {
                        memoize: false,
                        ..SweepOptions::default()
                    },
                )
                .unwrap();
                assert_eq!(on.distinct_outputs, off.distinct_outputs);
                assert_eq!(on.failures, off.failures);
                assert_eq!(off.schedules_explored, (1..=n as u64).product::<u64>());
            }
        }
    }
}

#[test]
fn num_edges_sweep_stays_small() {
    let g = LabeledGraph::from_edges(4, [(1, 2), (2, 3), (3, 4), (4, 1)]).unwrap();
    let p = protocols::num_edges_simasync();
    let check = |o: &Output, _: &Whiteboard| {
        if *o == Output::Count(4) {
            Verdict::Correct
        } else {
            Verdict::Incorrect(o.to_string())
        }
    };
    let r = sweep(&g, &p, Model::SimAsync, &check, SweepOptions::default()).unwrap();
    assert!(r.is_clean());
    assert!(r.schedules_explored <= 24);
    assert_eq!(r.distinct_outputs, vec![Output::Count(4)]);
}
