use std::collections::BTreeMap;

use monotone_iter::algebra::{check_mixed_monotone, Strategy};
use monotone_iter::cone::{
    closure_check, coupled_pair_search, construct_lu_pair, grid_function_cone, multi_start, phi_condition_check,
    random_starts, self_bounded_check, solve, Bound, ClosureCheck, ConeVector, PhiGrid, PhiSpec, SolveOptions,
};
use monotone_iter::engine::{run, is_coupled_lu_fixed_point};
use monotone_iter::order::OrderedUniverse;
use monotone_iter::problems::{build, hammerstein_grid, power_op, Instance};

#[test]
fn grid_cone_with_one_sample_is_the_half_line() {
    let c = grid_function_cone(1).unwrap();
    assert_eq!(c.dim(), 1);
    let (a, b) = (ConeVector::new(vec![0.5]).unwrap(), ConeVector::new(vec![2.0]).unwrap());
    assert!(c.leq(&a, &b) && !c.leq(&b, &a));
    // constant functions order like their values
    let c5 = grid_function_cone(5).unwrap();
    assert!(c5.leq(&ConeVector::splat(5, 0.5), &ConeVector::splat(5, 2.0)));
    assert!(!c5.leq(&ConeVector::splat(5, 2.0), &ConeVector::splat(5, 0.5)));
}

#[test]
fn hammerstein_contracts() {
    let a = hammerstein_grid(9, 1.0).unwrap();
    assert!(check_mixed_monotone(&a, Strategy::sampled(1)).unwrap().passed());
    let phi = PhiSpec::power(0.5).unwrap();
    let u = ConeVector::ones(9);
    assert!(phi_condition_check(&a, &phi, &u, &PhiGrid::default()).passed());
    assert_eq!(closure_check(&a, &u, 500, 2).unwrap(), ClosureCheck::Pass { checked: 500 });

    let r = solve(&a, &phi, &u, &SolveOptions::new(1e-10)).unwrap();
    assert!(r.residual < 1e-9);
    assert!(self_bounded_check(&r.x_trace, Bound::Upper, &Bound::Upper.default_grid()).passed());
    let m = multi_start(&a, &phi, &random_starts(9, 6, 4), 1e-10).unwrap();
    assert!(m.spread < 1e-8);
}

#[test]
fn solver_and_engine_agree() {
    let Instance::Cone(c) = build("power-op", &BTreeMap::from([("dim".into(), 2.0)])).unwrap().instance else {
        unreachable!()
    };
    let solved = solve(&c.op, &c.phi, &c.u, &SolveOptions::new(1e-10)).unwrap();
    let it = c.iteration().unwrap();
    assert!(is_coupled_lu_fixed_point(&it.op, &it.x0, &it.y0));
    let trace = run(&it.op, &it.x0, &it.y0, it.policy).unwrap();
    assert_eq!(trace.lu_onset, Some(0));
    let v = trace.verdict();
    assert!(v.kind.is_order_attractive() && v.fixed_point_confirmed);
    let x = v.kind.x_star().unwrap();
    for (p, q) in x.as_slice().iter().zip(solved.x_star.as_slice()) {
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn pair_search_stays_on_the_diagonal_in_three_dimensions() {
    let a = power_op(0.5, 1.0 / 3.0, 3);
    let phi = PhiSpec::power(0.5).unwrap();
    let pair = construct_lu_pair(&a, &phi, &ConeVector::new(vec![1.0, 2.0, 0.5]).unwrap(), &[]).unwrap();
    let sols = coupled_pair_search(&a, &pair.x0, &pair.y0, 32, 1).unwrap();
    assert_eq!(sols.len(), 1);
    assert!(sols[0].0.as_slice().iter().zip(sols[0].1.as_slice()).all(|(p, q)| (p - q).abs() < 1e-9));
}

#[test]
fn phi_condition_failure_is_reported() {
    let a = power_op(0.5, 1.0 / 3.0, 2);
    let greedy = PhiSpec::power(0.2).unwrap();
    assert!(!phi_condition_check(&a, &greedy, &ConeVector::ones(2), &PhiGrid::default()).passed());
}
