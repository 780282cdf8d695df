// SPDX-License-Identifier: Apache-2.0

use std::sync::OnceLock;

use gauss_packing::dimension::{solve_dimension, DEFAULT_TOLERANCE};
use gauss_packing::ifs::{IfsSystem, Word};
use gauss_packing::interval::Interval;
use gauss_packing::measure::ConformalMeasure;
use gauss_packing::packing::dmin_lower_bound;
use proptest::prelude::*;

const DEPTH: usize = 60;
const TOL: f64 = 1e-12;

struct Fixture {
    system: IfsSystem,
    mu: ConformalMeasure,
    dmin_floor: f64,
}

fn fixture(n: usize) -> &'static Fixture {
    static CACHE: OnceLock<Vec<Fixture>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        [2usize, 3, 5, 16]
            .into_iter()
            .map(|n| {
                let system = IfsSystem::gauss_linear(n).unwrap();
                let h = solve_dimension(&system, DEFAULT_TOLERANCE).unwrap().h;
                let mu = ConformalMeasure::new(&system, h).unwrap();
                let dmin_floor = dmin_lower_bound(&system, h, 2_000).unwrap().value;
                Fixture {
                    system,
                    mu,
                    dmin_floor,
                }
            })
            .collect()
    });
    all.iter().find(|f| f.system.n() == n).unwrap()
}

fn ordered(a: f64, b: f64) -> Interval {
    Interval::clamped(a.min(b), a.max(b))
}

// A point of J_n given by a word, applied to the leftmost point.
fn limit_point(f: &Fixture, letters: &[usize]) -> f64 {
    let map = f.system.compose(&Word::from(letters)).unwrap();
    map.apply(f.system.leftmost_point())
}

fn word(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1..=n, 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conformal_invariance(n in prop::sample::select(vec![2usize, 5, 16]), k in 1usize..=16, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = fixture(n);
        let k = 1 + (k - 1) % n;
        let iv = ordered(a, b);
        prop_assume!(iv.length() > 1e-9);
        let g = f.system.branch(k).unwrap();
        let w = f.mu.weight(k);
        let m = f.mu.measure(iv, DEPTH, TOL);
        let mg = f.mu.measure(g.image_of(&iv), DEPTH, TOL * w);
        prop_assert!(mg.lower <= w * m.upper * (1.0 + 1e-13));
        prop_assert!(w * m.lower * (1.0 - 1e-13) <= mg.upper);
    }

    #[test]
    fn additivity(n in prop::sample::select(vec![2usize, 3, 5]), x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
        let f = fixture(n);
        let mut p = [x, y, z];
        p.sort_by(f64::total_cmp);
        let (i1, i2, whole) = (ordered(p[0], p[1]), ordered(p[1], p[2]), ordered(p[0], p[2]));
        let (m1, m2, m) = (f.mu.measure(i1, DEPTH, TOL), f.mu.measure(i2, DEPTH, TOL), f.mu.measure(whole, DEPTH, TOL));
        let slack = 4.0 * TOL;
        prop_assert!(m.lower <= m1.upper + m2.upper + slack);
        prop_assert!(m1.lower + m2.lower <= m.upper + slack);
    }

    #[test]
    fn monotonicity(n in prop::sample::select(vec![2usize, 3, 5]), x in 0.0f64..1.0, y in 0.0f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let f = fixture(n);
        let outer = ordered(x, y);
        let inner = ordered(
            outer.left() + s * outer.length(),
            outer.left() + t * outer.length(),
        );
        prop_assert!(f.mu.measure(inner, DEPTH, TOL).lower <= f.mu.measure(outer, DEPTH, TOL).upper);
    }

    #[test]
    fn min_split(n in prop::sample::select(vec![2usize, 3, 5, 16]), x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
        let f = fixture(n);
        let mut p = [x, y, z];
        p.sort_by(f64::total_cmp);
        prop_assume!(p[1] - p[0] > 1e-9 && p[2] - p[1] > 1e-9);
        let d = |iv: Interval| f.mu.density(iv, DEPTH, TOL).unwrap();
        let (d1, d2, d) = (d(ordered(p[0], p[1])), d(ordered(p[1], p[2])), d(ordered(p[0], p[2])));
        prop_assert!(d.density_upper >= d1.density_lower.min(d2.density_lower) - 1e-9);
    }

    #[test]
    fn periodic_point_lies_in_its_cylinder(n in 2usize..10, letters in prop::collection::vec(1usize..=9, 1..8)) {
        let f = IfsSystem::gauss_linear(n).unwrap();
        let w = Word::new(letters.into_iter().map(|k| 1 + (k - 1) % n).collect());
        let p = f.periodic_point(&w).unwrap();
        let cyl = f.cylinder_interval(&w).unwrap();
        prop_assert!(cyl.left() - 1e-15 <= p && p <= cyl.right() + 1e-15);
    }

    #[test]
    fn cylinders_nest(n in 2usize..10, letters in prop::collection::vec(1usize..=9, 1..8), k in 1usize..=9) {
        let f = IfsSystem::gauss_linear(n).unwrap();
        let letters: Vec<usize> = letters.into_iter().map(|q| 1 + (q - 1) % n).collect();
        let mut longer = letters.clone();
        longer.push(1 + (k - 1) % n);
        let parent = f.cylinder_interval(&Word::new(letters)).unwrap();
        let child = f.cylinder_interval(&Word::new(longer)).unwrap();
        let pad = 1e-15;
        prop_assert!(parent.left() - pad <= child.left() && child.right() <= parent.right() + pad);
    }

    #[test]
    fn pull_back_to_grid_keeps_density(n in prop::sample::select(vec![2usize, 3, 5]), letters in word(5), frac in 0.05f64..0.45) {
        let f = fixture(n);
        let letters: Vec<usize> = letters.into_iter().map(|q| 1 + (q - 1) % n).collect();
        let map = f.system.compose(&Word::from(letters.as_slice())).unwrap();
        // A small interval around a point of J_n inside a deep cylinder.
        let c = limit_point(f, &letters);
        let r = frac * map.a.abs() * 0.5;
        let iv = Interval::centered(c, r);
        prop_assume!(iv.length() > 1e-13);
        // Pull-backs that reach the empty strip below 1/(n+1) have no grid image.
        let grid = match f.system.expand_to_grid(iv) {
            Ok((grid, _)) => grid,
            Err(_) => return Ok(()),
        };
        let a = f.mu.density(iv, DEPTH, 1e-9 * iv.length().powf(f.mu.h())).unwrap();
        let b = f.mu.density(grid, DEPTH, 1e-9 * grid.length().powf(f.mu.h())).unwrap();
        let rel = 1e-9;
        prop_assert!(a.density_lower <= b.density_upper * (1.0 + rel) && b.density_lower <= a.density_upper * (1.0 + rel),
            "{a:?} vs {b:?}");
    }

    #[test]
    fn certified_floor_is_below_sampled_densities(n in prop::sample::select(vec![2usize, 3, 5, 16]), letters in word(16), t in 0.0f64..1.0) {
        let f = fixture(n);
        let letters: Vec<usize> = letters.into_iter().map(|q| 1 + (q - 1) % n).collect();
        let c = limit_point(f, &letters);
        let r_max = c.min(1.0 - c);
        let r = r_max * 1e-6f64.powf(t);
        let d = f.mu.density(Interval::centered(c, r), DEPTH, 1e-9 * (2.0 * r).powf(f.mu.h())).unwrap();
        prop_assert!(d.density_upper >= f.dmin_floor, "{d:?} below {}", f.dmin_floor);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn power_subadditivity(c in 0.0f64..=1.0, a in prop::collection::vec(0.0f64..10.0, 1..8)) {
        let lhs: f64 = a.iter().map(|x| x.powf(c)).sum();
        let rhs = a.iter().sum::<f64>().powf(c);
        prop_assert!(lhs >= rhs * (1.0 - 1e-12));
    }
}

#[test]
fn gaps_carry_no_mass() {
    for n in [2usize, 3, 5, 16] {
        let f = fixture(n);
        let edge = 1.0 / (n as f64 + 1.0);
        for k in 1..=n {
            let g = f.system.branch(k).unwrap();
            let gap = Interval::new(g.apply(edge), 1.0 / k as f64).unwrap();
            let m = f.mu.measure(gap, DEPTH, 1e-10);
            assert!(m.upper <= 1e-10, "n={n} k={k} {m:?}");
        }
    }
}
