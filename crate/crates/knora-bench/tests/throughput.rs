//! Performance regression gate: sustained per-test-sample selection
//! throughput on the synthetic workload (pool of 100, k = 7) must stay
//! above a floor. Override the floor with KNORA_BENCH_MIN_RATE.

use knora::selection::{Technique, TechniqueKind};
use knora_bench::measure_selection_rate;

fn min_rate() -> f64 {
    std::env::var("KNORA_BENCH_MIN_RATE")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(10_000.0)
}

#[test]
fn selection_rate_stays_above_floor() {
    let floor = min_rate();
    for kind in [
        TechniqueKind::KnoraU,
        TechniqueKind::KnoraE,
        TechniqueKind::KnoraB,
        TechniqueKind::KnoraBi,
    ] {
        let technique = Technique::plain(kind);
        let rate = measure_selection_rate(technique, 20_000).unwrap();
        println!("{}: {:.0} selections/s", technique.name(), rate);
        assert!(
            rate >= floor,
            "{} ran at {rate:.0} selections/s, below the {floor:.0} floor",
            technique.name()
        );
    }
}
