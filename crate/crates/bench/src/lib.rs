//! Fixture loops shared by the criterion benchmarks.

use ym2_core::AdmissibleLoop;

pub fn rectangle() -> AdmissibleLoop {
    AdmissibleLoop::from_vertices(vec![vec![(0.0, 1.0), (1.0, 1.0)], vec![(1.0, 2.0), (0.0, 2.0)]]).expect("valid loop")
}

pub fn triangle() -> AdmissibleLoop {
    AdmissibleLoop::from_vertices(vec![vec![(0.0, 0.5), (1.0, 0.5)], vec![(1.0, 1.5), (0.0, 0.5)]]).expect("valid loop")
}

pub fn two_lap() -> AdmissibleLoop {
    let r = vec![(0.0, 1.0), (1.0, 1.0)];
    let l = vec![(1.0, 2.0), (0.0, 2.0)];
    AdmissibleLoop::from_vertices(vec![r.clone(), l.clone(), r, l]).expect("valid loop")
}
