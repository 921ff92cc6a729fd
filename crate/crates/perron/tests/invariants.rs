//! Property suites for the order structure, the oscillation machinery,
//! and the semigroup evaluator.

mod common;

use common::*;
use nalgebra::DVector;
use perron::testutil::{basis_vector, inf_norm, mat_pow};
use perron::{
    evaluate, in_cone, in_interior, limit_decomposition, nonflat_decompose, trace_until,
    u_norm, ConeSpace, DualBase, Generator, OrderUnit, PositiveOperator, SemigroupOptions,
    Tolerances,
};
use proptest::prelude::*;
use rand::Rng;

fn space_and_vectors() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|d| {
        (
            Just(d),
            prop::collection::vec(-10.0f64..10.0, d),
            prop::collection::vec(0.1f64..5.0, d),
        )
    })
}

proptest! {
    #[test]
    fn u_norm_is_equivalent_to_max_norm((d, x, u) in space_and_vectors()) {
        let space = ConeSpace::new(d).unwrap();
        let unit = OrderUnit::new(space, DVector::from_vec(u)).unwrap();
        let x = DVector::from_vec(x);
        let max_norm = x.amax();
        let un = u_norm(&unit, &x).unwrap();
        prop_assert!(un <= unit.c_u * max_norm + 1e-12);
        prop_assert!(un >= max_norm / unit.c_u - 1e-12);
    }

    #[test]
    fn dual_base_recovers_u_norm((d, x, u) in space_and_vectors()) {
        let space = ConeSpace::new(d).unwrap();
        let unit = OrderUnit::new(space, DVector::from_vec(u)).unwrap();
        let x = DVector::from_vec(x);
        let un = u_norm(&unit, &x).unwrap();
        let base = DualBase::new(unit);
        let sup = (0..d).map(|i| base.apply(i, &x).abs()).fold(0.0, f64::max);
        prop_assert!((sup - un).abs() <= 1e-12 * (1.0 + un));
    }

    #[test]
    fn order_characterized_by_extreme_functionals(
        (d, x, u) in space_and_vectors(),
        y in prop::collection::vec(-10.0f64..10.0, 8),
    ) {
        let space = ConeSpace::new(d).unwrap();
        let unit = OrderUnit::new(space, DVector::from_vec(u)).unwrap();
        let x = DVector::from_vec(x);
        let y = DVector::from_iterator(d, y.into_iter().take(d));
        let base = DualBase::new(unit);
        let componentwise = (0..d).all(|i| x[i] <= y[i]);
        let functional = (0..d).all(|i| base.apply(i, &x) <= base.apply(i, &y));
        prop_assert_eq!(componentwise, functional);
    }

    #[test]
    fn u_norm_monotone_on_cone((d, x, u) in space_and_vectors()) {
        let space = ConeSpace::new(d).unwrap();
        let unit = OrderUnit::new(space, DVector::from_vec(u)).unwrap();
        let small = DVector::from_vec(x).map(f64::abs);
        let big = &small + DVector::from_element(d, 0.5);
        prop_assert!(u_norm(&unit, &small).unwrap() <= u_norm(&unit, &big).unwrap() + 1e-12);
    }

    #[test]
    fn nonflat_parts_bounded_by_gamma((d, x, u) in space_and_vectors()) {
        let space = ConeSpace::new(d).unwrap();
        let unit = OrderUnit::new(space, DVector::from_vec(u)).unwrap();
        let x = DVector::from_vec(x);
        let (p, n) = nonflat_decompose(&unit, &x).unwrap();
        prop_assert!(in_cone(&space, &p).unwrap());
        prop_assert!(in_cone(&space, &n).unwrap());
        let diff = &p - &n;
        prop_assert!((&diff - &x).amax() <= 1e-15 * (1.0 + x.amax()));
        prop_assert!(p.amax() <= unit.gamma * x.amax());
        prop_assert!(n.amax() <= unit.gamma * x.amax());
    }

    #[test]
    fn interior_implies_cone_and_pointedness((d, x, _u) in space_and_vectors()) {
        let space = ConeSpace::new(d).unwrap();
        let x = DVector::from_vec(x);
        if in_interior(&space, &x).unwrap() {
            prop_assert!(in_cone(&space, &x).unwrap());
        }
        let neg = -&x;
        if in_cone(&space, &x).unwrap() && in_cone(&space, &neg).unwrap() {
            prop_assert!(x.iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn trace_monotone_nesting_and_sandwich() {
    let mut r = rng(41);
    for case in 0..60 {
        let d = 2 + (case % 7);
        let m = random_dense_stochastic(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let unit = OrderUnit::new(a.space, DVector::from_element(d, 1.0)).unwrap();
        let x = random_cone_vector(&mut r, d);
        let trace = trace_until(&a, &unit, &x, 1e-12, 2000).unwrap();

        for w in trace.steps.windows(2) {
            assert!(w[1].upper <= w[0].upper + 1e-12 * (1.0 + w[0].upper.abs()));
            assert!(w[1].lower >= w[0].lower - 1e-12 * (1.0 + w[0].lower.abs()));
            assert!(w[1].lower <= w[1].upper + 1e-12);
        }
        // sandwich m(n) u <= A^n x <= M(n) u, recomputed fresh
        let mut y = x.clone();
        for step in &trace.steps {
            if step.n > 0 {
                y = a.apply(&y).unwrap();
            }
            for i in 0..d {
                assert!(y[i] >= step.lower * unit.u[i] - 1e-12);
                assert!(y[i] <= step.upper * unit.u[i] + 1e-12);
            }
        }
    }
}

#[test]
fn limit_consistency_and_error_bound() {
    let mut r = rng(42);
    for case in 0..40 {
        let d = 2 + (case % 6);
        let m = random_dense_stochastic(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let decomp = limit_decomposition(&a, &Tolerances::default()).unwrap();
        let unit = decomp.unit(a.space).unwrap();
        let f0 = decomp.f0.as_ref().unwrap();
        let x = random_cone_vector(&mut r, d);
        let f0x = f0.dot(&x);
        let trace = trace_until(&a, &unit, &x, 1e-12, 2000).unwrap();

        let mut y = x.clone();
        for step in &trace.steps {
            if step.n > 0 {
                y = a.apply(&y).unwrap();
            }
            let delta = step.delta();
            // the limit value stays inside [m(n), M(n)]
            assert!((f0x - step.lower).abs() <= delta + 1e-10);
            assert!((f0x - step.upper).abs() <= delta + 1e-10);
            // ||A^n x - f0(x) u||_u <= delta(n)
            let deviation = u_norm(&unit, &(&y - &unit.u * f0x)).unwrap();
            assert!(
                deviation <= delta + 1e-10,
                "case {case} step {}: {deviation} > {delta}",
                step.n
            );
        }
    }
}

#[test]
fn contraction_and_interior_invariants_for_fixed_point_operators() {
    let mut r = rng(43);
    for case in 0..50 {
        let d = 2 + (case % 8);
        let (m, u) = random_scaled_perron(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let space = a.space;
        let unit = OrderUnit::new(space, u).unwrap();

        // adjoint positivity and positivity closure
        assert!(a.matrix().transpose().iter().all(|&v| v >= 0.0));
        let cone_seed = random_cone_vector(&mut r, d);
        assert!(in_cone(&space, &a.apply(&cone_seed).unwrap()).unwrap());

        // u-norm contraction on random vectors
        for _ in 0..5 {
            let x = DVector::from_fn(d, |_, _| r.gen::<f64>() * 2.0 - 1.0);
            let ax = a.apply(&x).unwrap();
            assert!(
                u_norm(&unit, &ax).unwrap() <= u_norm(&unit, &x).unwrap() + 1e-12
            );
        }

        // power boundedness by C_u^2
        let bound = unit.c_u * unit.c_u;
        let mut power = a.matrix().clone();
        for _ in 0..7 {
            assert!(inf_norm(&power) <= bound * (1.0 + 1e-12));
            power = &power * a.matrix();
        }

        // interior preservation and monotone preimages along a trajectory
        let mut y = random_cone_vector(&mut r, d);
        let mut seen_interior = false;
        for _ in 0..3 * d {
            y = a.apply(&y).unwrap();
            let interior = in_interior(&space, &y).unwrap();
            if seen_interior {
                assert!(interior, "trajectory left the interior");
            }
            seen_interior = seen_interior || interior;
        }
    }
}

#[test]
fn certificates_contract_for_non_stochastic_units() {
    // the certificate argument is unit-agnostic: exercise it on conjugated
    // chains whose fixed point is a general interior vector
    let mut r = rng(48);
    for case in 0..25 {
        let d = 2 + (case % 7);
        let (m, u) = random_scaled_perron(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let unit = OrderUnit::new(a.space, u).unwrap();
        let p = perron::find_uniform_index(&a).unwrap().unwrap();
        let cert = perron::certify_rate(&a, &unit, p).unwrap();
        assert!(cert.beta > 0.0 && cert.beta < 0.5);
        for _ in 0..3 {
            let x = random_cone_vector(&mut r, d);
            let trace = trace_until(&a, &unit, &x, 1e-12, 4000).unwrap();
            let delta0 = trace.steps[0].delta();
            for step in &trace.steps {
                if step.n % cert.p == 0 && step.n > 0 {
                    let k = (step.n / cert.p) as i32;
                    assert!(
                        step.delta() <= cert.rate().powi(k) * delta0 + 1e-10,
                        "case {case}, n = {}",
                        step.n
                    );
                }
            }
        }
    }
}

#[test]
fn norm_bound_field_holds_on_sampled_powers() {
    let mut r = rng(44);
    let (m, u) = random_scaled_perron(&mut r, 6);
    let unit = OrderUnit::new(ConeSpace::new(6).unwrap(), u).unwrap();
    let a = PositiveOperator::new(m).unwrap().with_norm_bound(unit.c_u * unit.c_u);
    let bound = a.norm_bound.unwrap();
    for n in [1u64, 2, 4, 8, 16, 32, 64] {
        assert!(inf_norm(&mat_pow(a.matrix(), n)) <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn adjoint_fixed_point_of_limit_functional() {
    let mut r = rng(45);
    for case in 0..30 {
        let d = 2 + (case % 9);
        let m = random_primitive_stochastic(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let decomp = limit_decomposition(&a, &Tolerances::default()).unwrap();
        let f0 = decomp.f0.as_ref().unwrap();
        let pulled = a.matrix().transpose() * f0;
        assert!((&pulled - f0).amax() <= 1e-12, "case {case}: {}", (&pulled - f0).amax());
    }
}

#[test]
fn semigroup_positivity_markov_and_tau_consistency() {
    let mut r = rng(46);
    for case in 0..10 {
        let d = 2 + (case % 5);
        let g = Generator::new(random_metzler_zero_rowsum(&mut r, d)).unwrap();
        assert!(g.row_sum_zero);
        for t in [0.1, 1.0, 7.5] {
            let e = evaluate(&g, t).unwrap();
            assert!(e.iter().all(|&v| v >= -1e-13));
            let ones = DVector::from_element(d, 1.0);
            assert!((&e * &ones - &ones).amax() <= 1e-12);
        }
        // the decomposition does not depend on the sampling time
        let opts = SemigroupOptions::default();
        let lim_a = perron::semigroup_limit(&g, 1.0, f64::INFINITY, &opts).unwrap();
        let lim_b = perron::semigroup_limit(&g, 0.5, f64::INFINITY, &opts).unwrap();
        let diff = inf_norm(&(&lim_a.decomp.a0 - &lim_b.decomp.a0));
        assert!(diff <= 1e-10, "case {case}: {diff}");
    }
}

#[test]
fn sqrt_kernel_limit_agrees_across_resolutions() {
    // the quadrature defect shifts the spectral radius off 1 by O(1/grid),
    // so the analysis runs on the radius-normalized operator; compare the
    // limit distributions as measures by aggregating fine-node masses over
    // coarse cells
    let normalized = |grid: usize| {
        let fixture = perron::fixtures::sqrt_kernel_operator(0.25, grid).unwrap();
        let rho = perron::spectral_radius(fixture.op.matrix());
        PositiveOperator::new(fixture.op.matrix() / rho).unwrap()
    };
    let opts = Tolerances::default();
    let f_coarse = limit_decomposition(&normalized(128), &opts).unwrap().f0.unwrap();
    let f_fine = limit_decomposition(&normalized(256), &opts).unwrap().f0.unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..128 {
        let aggregated = f_fine[2 * i] + f_fine[2 * i + 1];
        worst = worst.max((aggregated - f_coarse[i]).abs());
    }
    assert!(worst <= 4.0 / 128.0, "aggregated deviation {worst}");
}

#[test]
fn dyadic_adjoint_fixed_point() {
    let chain = perron::fixtures::dyadic_chain(16).unwrap();
    let decomp = limit_decomposition(&chain.op, &Tolerances::default()).unwrap();
    let f0 = decomp.f0.as_ref().unwrap();
    let pulled = chain.op.matrix().transpose() * f0;
    assert!((&pulled - f0).amax() <= 1e-12);
}

#[test]
fn uniform_index_bounded_by_wielandt() {
    let mut r = rng(47);
    for case in 0..20 {
        let d = 2 + (case % 7);
        let m = random_primitive_stochastic(&mut r, d);
        let a = PositiveOperator::new(m).unwrap();
        let p = perron::find_uniform_index(&a).unwrap().unwrap();
        assert!(p <= (d - 1) * (d - 1) + 1);
        // the uniform index serves every basis vector
        let power = mat_pow(a.matrix(), p as u64);
        for j in 0..d {
            assert!(in_interior(&a.space, &power.column(j).clone_owned()).unwrap());
        }
        let _ = basis_vector(d, 0);
    }
}
