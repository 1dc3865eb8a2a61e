//! More responding drivers never hurt the attack: with a fixed seed, each
//! session's first `k` drivers are the same at every sweep point, so the
//! ledger only grows.

use ridematch_core::harness::{run, DriverPlacement, ExperimentConfig, Mode, Report};

fn sweep(placement: DriverPlacement, strict_lemma: bool, counts: &[usize]) -> Vec<Report> {
    counts
        .iter()
        .map(|&drivers| {
            run(&ExperimentConfig {
                mode: Mode::EndToEnd,
                l: Some(2),
                rows: 6,
                cols: 6,
                drivers,
                trials: 60,
                seed: 17,
                strict_lemma,
                placement,
                ..Default::default()
            })
            .unwrap()
        })
        .collect()
}

fn assert_monotone(reports: &[Report]) {
    for pair in reports.windows(2) {
        let (a, b) = (pair[0].summary().unwrap(), pair[1].summary().unwrap());
        assert!(b.full_recoveries >= a.full_recoveries, "{a:?} -> {b:?}");
        assert!(b.rider_recovered >= a.rider_recovered, "{a:?} -> {b:?}");
        assert!(b.mean_block_recovery >= a.mean_block_recovery, "{a:?} -> {b:?}");
        for (x, y) in pair[0].sessions_iter().zip(pair[1].sessions_iter()) {
            assert_eq!(x.rider_node, y.rider_node);
            assert!(y.blocks_recovered >= x.blocks_recovered, "session {}", x.session);
            for (bx, by) in x.blocks.iter().zip(&y.blocks) {
                assert_eq!(bx.label, by.label);
                assert!(by.lo >= bx.lo && by.hi <= bx.hi, "interval widened at {}", bx.label);
            }
        }
        assert_eq!(b.sound_sessions, b.sessions);
    }
}

#[test]
fn uniform_drivers_recovery_is_monotone() {
    let reports = sweep(DriverPlacement::UniformBlocks, true, &[1, 4, 9, 20, 34, 60]);
    assert_monotone(&reports);
    let first = reports.first().unwrap().summary().unwrap();
    let last = reports.last().unwrap().summary().unwrap();
    assert_eq!(first.full_recoveries, 0);
    assert!(last.full_recoveries > 50, "{last:?}");
}

#[test]
fn graph_drivers_recovery_is_monotone() {
    assert_monotone(&sweep(DriverPlacement::GraphNodes, false, &[1, 8, 32, 128]));
}
