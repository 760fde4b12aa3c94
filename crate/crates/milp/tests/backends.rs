use milp::{
    bb_solve, solve, BranchAndBound, HighsSolver, LinExpr, Model, Sense, SolveOptions, SolveStatus,
    Solver, VarId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    model: Model,
    vars: Vec<VarId>,
    /// Dense copy for the enumeration oracle: rows of (coefs, sense, rhs).
    rows: Vec<(Vec<f64>, Sense, f64)>,
    obj: Vec<f64>,
}

fn random_binary_instance(seed: u64, n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::new();
    let vars: Vec<_> = (0..n)
        .map(|i| model.binary(format!("x{i}")).unwrap())
        .collect();
    let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=20) as f64).collect();
    let mut rows = Vec::new();
    for r in 0..rng.gen_range(2..6) {
        let coefs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=9) as f64).collect();
        let sense = match r % 3 {
            0 | 1 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = match sense {
            Sense::Le => rng.gen_range(5..25) as f64,
            _ => rng.gen_range(-5..8) as f64,
        };
        let expr: LinExpr = vars.iter().zip(&coefs).map(|(&v, &c)| (v, c)).collect();
        model
            .add_constraint(expr, sense, rhs, format!("r{r}"))
            .unwrap();
        rows.push((coefs, sense, rhs));
    }
    model
        .set_objective(vars.iter().zip(&obj).map(|(&v, &c)| (v, c)).collect())
        .unwrap();
    Instance {
        model,
        vars,
        rows,
        obj,
    }
}

/// Exhaustive optimum over all 2^n assignments; None when infeasible.
fn enumerate(inst: &Instance) -> Option<f64> {
    let n = inst.vars.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| ((mask >> i) & 1) as f64).collect();
        let feasible = inst.rows.iter().all(|(a, s, rhs)| {
            let lhs: f64 = a.iter().zip(&x).map(|(a, x)| a * x).sum();
            match s {
                Sense::Le => lhs <= rhs + 1e-9,
                Sense::Ge => lhs >= rhs - 1e-9,
                Sense::Eq => (lhs - rhs).abs() <= 1e-9,
            }
        });
        if feasible {
            let v: f64 = inst.obj.iter().zip(&x).map(|(c, x)| c * x).sum();
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best
}

fn exact() -> SolveOptions {
    SolveOptions::default().with_gap(0.0)
}

#[test]
fn random_ten_binary_instances_match_enumeration() {
    for seed in 0..60 {
        let inst = random_binary_instance(seed, 10);
        let expected = enumerate(&inst);
        for backend in [&BranchAndBound as &dyn Solver, &HighsSolver::default()] {
            let s = backend.solve(&inst.model, &exact()).unwrap();
            match expected {
                None => assert_eq!(s.status, SolveStatus::Infeasible, "seed {seed}"),
                Some(v) => {
                    assert_eq!(
                        s.status,
                        SolveStatus::Optimal,
                        "seed {seed} {}",
                        backend.name()
                    );
                    assert!(
                        (s.objective_value - v).abs() < 1e-6,
                        "seed {seed} {}: {} vs {v}",
                        backend.name(),
                        s.objective_value
                    );
                    assert!(inst.model.check(&s.values, 1e-6).is_empty());
                }
            }
        }
    }
}

#[test]
fn trivial_examples() {
    let mut m = Model::new();
    let x = m.integer("x", -10.0, 10.0).unwrap();
    m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 3.0, "c")
        .unwrap();
    m.set_objective(LinExpr::term(x, 1.0)).unwrap();
    for s in [
        solve(&m, &SolveOptions::default()),
        bb_solve(&m, &SolveOptions::default()),
    ] {
        let s = s.unwrap();
        assert_eq!(s.value(x), 3.0);
        assert_eq!(s.objective_value, 3.0);
    }

    let mut m = Model::new();
    let x = m.continuous("x", -10.0, 10.0).unwrap();
    m.add_constraint(LinExpr::term(x, 1.0), Sense::Le, 1.0, "a")
        .unwrap();
    m.add_constraint(LinExpr::term(x, 1.0), Sense::Ge, 2.0, "b")
        .unwrap();
    for s in [
        solve(&m, &SolveOptions::default()),
        bb_solve(&m, &SolveOptions::default()),
    ] {
        assert_eq!(s.unwrap().status, SolveStatus::Infeasible);
    }
}

/// Mixed models with continuous and general integer variables.
fn mixed_instance(seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Model::new();
    let mut vars = Vec::new();
    for i in 0..rng.gen_range(3..9) {
        let v = match rng.gen_range(0..3) {
            0 => m.binary(format!("b{i}")).unwrap(),
            1 => m.integer(format!("z{i}"), -4.0, 6.0).unwrap(),
            _ => m.continuous(format!("c{i}"), -2.5, 7.5).unwrap(),
        };
        vars.push(v);
    }
    for r in 0..rng.gen_range(1..6) {
        let expr: LinExpr = vars
            .iter()
            .map(|&v| (v, rng.gen_range(-40..=40) as f64 / 10.0))
            .collect();
        let sense = [Sense::Le, Sense::Ge, Sense::Eq]
            [rng.gen_range(0..3usize) % if r == 0 { 3 } else { 2 }];
        m.add_constraint(expr, sense, rng.gen_range(-30..=30) as f64 / 4.0, "r")
            .unwrap();
    }
    m.set_objective(
        vars.iter()
            .map(|&v| (v, rng.gen_range(-50..=50) as f64 / 10.0))
            .collect(),
    )
    .unwrap();
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn branch_and_bound_agrees_with_highs(seed in 0u64..1_000_000) {
        let m = mixed_instance(seed);
        let a = BranchAndBound.solve(&m, &exact()).unwrap();
        let b = HighsSolver::default().solve(&m, &exact()).unwrap();
        prop_assert_eq!(a.status.is_success(), b.status.is_success());
        if a.status.is_success() {
            prop_assert!((a.objective_value - b.objective_value).abs() < 1e-6,
                "{} vs {}", a.objective_value, b.objective_value);
            prop_assert!(m.check(&a.values, 1e-6).is_empty());
            prop_assert!(m.check(&b.values, 1e-6).is_empty());
        }
    }
}
