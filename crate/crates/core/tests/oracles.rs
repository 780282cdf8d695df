// SPDX-License-Identifier: Apache-2.0

//! Comparisons against independent reference computations.

use gauss_packing::dimension::{solve_dimension, DEFAULT_TOLERANCE};
use gauss_packing::exec::Execution;
use gauss_packing::ifs::IfsSystem;
use gauss_packing::measure::ConformalMeasure;
use gauss_packing::packing::{
    candidate_centers, dmin_lower_bound, dmin_sampled, dmin_sampled_with, i_n_density,
    i_n_interval, packing_estimate, sweep, PackingOptions, SamplingOptions, Search,
};

fn solved(n: usize) -> (IfsSystem, f64) {
    let s = IfsSystem::gauss_linear(n).unwrap();
    let h = solve_dimension(&s, DEFAULT_TOLERANCE).unwrap().h;
    (s, h)
}

// Bisection on sum_k (1/(k(k+1)))^h = 1 with terms summed smallest first.
fn bisect(n: usize) -> f64 {
    let f = |h: f64| {
        (1..=n)
            .rev()
            .map(|k| (1.0 / (k as f64 * (k as f64 + 1.0))).powf(h))
            .sum::<f64>()
            - 1.0
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn dimension_matches_bisection() {
    for n in [2usize, 3, 7, 50, 1000] {
        let (_, h) = solved(n);
        assert!((h - bisect(n)).abs() < 1e-12, "n={n}");
    }
}

#[test]
fn i_n_density_matches_closed_form() {
    for n in 2..=30 {
        let (s, h) = solved(n);
        let mu = ConformalMeasure::new(&s, h).unwrap();
        let d = mu.density(i_n_interval(n), 60, 1e-10).unwrap();
        let exact = i_n_density(n, h);
        assert!(d.contains(exact), "n={n} {exact} {d:?}");
        assert!(d.density_upper - d.density_lower <= 1e-8);
    }
}

#[test]
fn i_n_interval_ends() {
    let i = i_n_interval(2);
    assert!((i.left() - (8.0 / 11.0 - 0.5)).abs() < 1e-15);
    assert_eq!(i.right(), 0.5);
}

#[test]
fn first_generation_centers_of_two_branch_system() {
    let (s, _) = solved(2);
    let centers = candidate_centers(&s, 1).unwrap();
    // Hull ends, fixed points of g_1 and g_2, and images of the hull ends.
    for x in [4.0 / 11.0, 9.0 / 11.0, 2.0 / 3.0, 3.0 / 7.0] {
        assert!(
            centers.iter().any(|&c| (c - x).abs() < 1e-15),
            "{x} missing"
        );
    }
    assert!(centers.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn pruning_and_threads_do_not_change_the_minimum() {
    for (n, g) in [(2usize, 4usize), (3, 3), (4, 2), (5, 2), (9, 2)] {
        let (s, h) = solved(n);
        let base = SamplingOptions {
            generation: g,
            radii_per_center: 24,
            ..SamplingOptions::default()
        };
        let reference = dmin_sampled_with(
            &s,
            h,
            &SamplingOptions {
                search: Search::Exhaustive,
                execution: Execution::Sequential,
                ..base
            },
        )
        .unwrap();
        for execution in [Execution::Sequential, Execution::Parallel] {
            for search in [Search::Exhaustive, Search::Pruned] {
                let e = dmin_sampled_with(
                    &s,
                    h,
                    &SamplingOptions {
                        search,
                        execution,
                        ..base
                    },
                )
                .unwrap();
                assert_eq!(
                    e.dmin_upper, reference.dmin_upper,
                    "n={n} {search:?} {execution:?}"
                );
                assert_eq!(e.witness, reference.witness);
            }
        }
    }
}

#[test]
fn two_branch_sampled_bound() {
    let (s, h) = solved(2);
    let e = dmin_sampled(&s, h, 6, 64).unwrap();
    assert!(e.dmin_upper <= (11.0f64 / 18.0).powf(h));
    assert!(e.dmin_upper <= 0.744);
    assert_eq!(e.dmin_lower, 0.0);
    assert!(e.packing_upper.is_infinite());
    let c = e.witness_center;
    assert!(candidate_centers(&s, 6).unwrap().contains(&c));
}

#[test]
fn lower_bound_brackets_the_sample() {
    let (s, h) = solved(2);
    let upper = dmin_sampled(&s, h, 4, 64).unwrap().dmin_upper;
    let lower = dmin_lower_bound(&s, h, 50_000).unwrap();
    assert!(!lower.partial);
    assert!(0.0 < lower.value && lower.value <= upper);
    assert!(upper - lower.value <= 1e-3 * upper);
}

#[test]
fn sixteen_branch_lower_bound() {
    let (s, h) = solved(16);
    let lower = dmin_lower_bound(&s, h, 50_000).unwrap();
    assert!(lower.value >= 0.25, "{lower:?}");
}

#[test]
fn estimate_orders_its_bounds() {
    let opts = PackingOptions {
        lower_bound: Some(Default::default()),
        ..PackingOptions::default()
    };
    let e = packing_estimate(3, &opts).unwrap();
    assert!(e.dmin_lower <= e.dmin_upper);
    assert!(e.packing_lower <= e.packing_upper);
    assert!(e.witness_density.density_lower <= e.dmin_upper);
    assert!(e.dmin_lower <= e.witness_density.density_lower);
}

#[test]
fn two_branch_packing_bound() {
    let e = packing_estimate(2, &PackingOptions::default()).unwrap();
    assert!(e.packing_lower >= 1.344);
    assert!(e.packing_lower >= 1.0 / i_n_density(2, e.h) - 1e-6);
}

#[test]
fn small_sweep_increases() {
    let out = sweep(2, 8, &PackingOptions::default(), None).unwrap();
    let ns: Vec<usize> = out.iter().map(|e| e.n).collect();
    assert_eq!(ns, (2..=8).collect::<Vec<_>>());
    for pair in [(0, 2), (2, 6)] {
        assert!(out[pair.0].packing_lower < out[pair.1].packing_lower);
    }
}
