//! Small shared instances used across the test suites.

use crate::instance::Instance;
use crate::scalar::Real;

/// Three unit-cost facilities on a line at x = 0, 1, 2 and six clients at
/// x = 0.1, 0.2, 0.9, 1.1, 1.9, 2.1, with L = 2 and U = 3.
pub fn t1<R: Real>() -> Instance<R> {
    let facilities: Vec<(String, R, [R; 2])> = [0.0, 1.0, 2.0]
        .iter()
        .enumerate()
        .map(|(i, &x)| (format!("f{i}"), R::one(), [R::of(x), R::zero()]))
        .collect();
    let clients: Vec<(String, [R; 2])> = [0.1, 0.2, 0.9, 1.1, 1.9, 2.1]
        .iter()
        .enumerate()
        .map(|(j, &x)| (format!("c{j}"), [R::of(x), R::zero()]))
        .collect();
    Instance::from_points(&facilities, &clients, 2, 3).expect("fixture is well-formed")
}
