use nebit::lp::{solve, LinearProgram, LpStatus, DEFAULT_TOL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    x0: Vec<f64>,
    y: Vec<f64>,
}

/// Primal point `x0 ≥ 0` and dual point `y` with `Aᵀy ≤ c` by construction.
fn instance(seed: u64, m: usize, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let x0: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(0.0..3.0) } else { 0.0 }).collect();
    let b = a.iter().map(|row| row.iter().zip(&x0).map(|(a, x)| a * x).sum()).collect();
    let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c = (0..n)
        .map(|j| (0..m).map(|i| a[i][j] * y[i]).sum::<f64>() + rng.gen_range(0.0..1.0))
        .collect();
    Instance { a, b, c, x0, y }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Minimum over all basic feasible solutions, by enumerating column subsets.
fn brute_force(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<f64> {
    let (m, n) = (a.len(), c.len());
    let mut best: Option<f64> = None;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != m {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        let basis = nalgebra::DMatrix::from_fn(m, m, |i, k| a[i][cols[k]]);
        let Some(inv) = basis.try_inverse() else { continue };
        let xb = inv * nalgebra::DVector::from_column_slice(b);
        if xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let obj: f64 = cols.iter().zip(xb.iter()).map(|(&j, &v)| c[j] * v).sum();
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_point_is_feasible_and_bounded_by_duality(seed in any::<u64>(), m in 2usize..6, extra in 1usize..6) {
        let inst = instance(seed, m, m + extra);
        let lp = LinearProgram::from_dense(&inst.c, &inst.a, &inst.b).unwrap();
        let sol = solve(&lp, DEFAULT_TOL).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let bnorm = inst.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(lp.residual(&sol.x) <= DEFAULT_TOL * (1.0 + bnorm));
        prop_assert!(sol.x.iter().all(|&v| v >= -DEFAULT_TOL));
        prop_assert!((sol.objective - dot(&inst.c, &sol.x)).abs() <= 1e-9 * (1.0 + sol.objective.abs()));
        // weak duality and optimality against the constructed points
        prop_assert!(sol.objective >= dot(&inst.b, &inst.y) - 1e-8);
        prop_assert!(sol.objective <= dot(&inst.c, &inst.x0) + 1e-8);
    }

    #[test]
    fn matches_basis_enumeration(seed in any::<u64>(), m in 2usize..4, extra in 1usize..5) {
        let inst = instance(seed, m, m + extra);
        let lp = LinearProgram::from_dense(&inst.c, &inst.a, &inst.b).unwrap();
        let sol = solve(&lp, DEFAULT_TOL).unwrap();
        let oracle = brute_force(&inst.a, &inst.b, &inst.c).expect("x0 makes the program feasible");
        prop_assert!((sol.objective - oracle).abs() <= 1e-7 * (1.0 + oracle.abs()),
            "solver {} vs enumeration {}", sol.objective, oracle);
    }

    #[test]
    fn deterministic(seed in any::<u64>()) {
        let inst = instance(seed, 4, 9);
        let lp = LinearProgram::from_dense(&inst.c, &inst.a, &inst.b).unwrap();
        let first = solve(&lp, DEFAULT_TOL).unwrap();
        let second = solve(&lp, DEFAULT_TOL).unwrap();
        prop_assert_eq!(first.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        second.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(first.objective.to_bits(), second.objective.to_bits());
    }
}

#[test]
fn infeasible_detected_on_contradictory_rows() {
    // x1 + x2 = 1 and x1 + x2 = 2
    let lp = LinearProgram::from_dense(&[1.0, 1.0], &[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 2.0]).unwrap();
    assert_eq!(solve(&lp, DEFAULT_TOL).unwrap().status, LpStatus::Infeasible);
}
