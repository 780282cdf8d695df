// SPDX-License-Identifier: Apache-2.0

//! Certified evaluation of the normalized packing measure `m_n` on closed
//! intervals, and of interval densities `m_n(J) / |J|^h`.
//!
//! The measure gives mass `prod_j |slope_{q_j}|^h` to the cylinder of the word
//! `q_1 ... q_l`. An interval is decomposed branch by branch: first-generation
//! pieces whose limit-set hull lies inside the interval contribute their
//! weight exactly, pieces whose hull misses it contribute nothing, and the few
//! pieces cut by an endpoint are pulled back through the inverse branch and
//! decomposed again. Pieces still unresolved at the depth cap or below the
//! mass cutoff contribute `[0, weight]`.
//!
//! Endpoints are tracked with an explicit uncertainty radius that grows with
//! every pull-back, so classification decisions are certain in spite of
//! rounding, and sums are rounded outward at the end.

use crate::dimension::moran_residual;
use crate::error::{Error, Result};
use crate::ifs::{IfsSystem, Word};
use crate::interval::{round_down, round_up, Interval};

pub const DEFAULT_MAX_DEPTH: usize = 60;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest Moran residual accepted for the exponent of a measure.
pub const DIMENSION_CONSISTENCY: f64 = 1e-10;

const HULL_PAD: f64 = 16.0 * f64::EPSILON;

/// Enclosure `[lower, upper]` of `m_n(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureBound {
    pub lower: f64,
    pub upper: f64,
    /// Deepest generation visited.
    pub depth_used: usize,
    /// Mass left unresolved, including rounding slack; equals `upper - lower`.
    pub unresolved_mass: f64,
}

impl MeasureBound {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn overlaps(&self, other: &MeasureBound) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    const ZERO: MeasureBound = MeasureBound {
        lower: 0.0,
        upper: 0.0,
        depth_used: 0,
        unresolved_mass: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRecord {
    pub interval: Interval,
    pub h: f64,
    pub measure: MeasureBound,
    pub density_lower: f64,
    pub density_upper: f64,
}

impl DensityRecord {
    pub fn contains(&self, x: f64) -> bool {
        self.density_lower <= x && x <= self.density_upper
    }

    pub fn overlaps(&self, other: &DensityRecord) -> bool {
        self.density_lower <= other.density_upper && other.density_lower <= self.density_upper
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    slope: f64,
    intercept: f64,
    cyl_lo: f64,
    cyl_hi: f64,
    hull_lo: f64,
    hull_hi: f64,
    weight: f64,
    expansion: f64,
    pull_pad: f64,
}

impl Piece {
    #[inline]
    fn pull_back(&self, y: f64) -> f64 {
        (y - self.intercept) / self.slope
    }
}

/// The `h`-conformal measure of a system, prepared for repeated queries.
#[derive(Debug, Clone)]
pub struct ConformalMeasure {
    h: f64,
    hull: Interval,
    // First-generation pieces ordered left to right.
    pieces: Vec<Piece>,
    // prefix[i] = total weight of pieces[..i].
    prefix: Vec<f64>,
    weight_by_letter: Vec<f64>,
}

struct Accumulator {
    full: f64,
    unresolved: f64,
    depth_used: usize,
    cutoff: f64,
    max_depth: usize,
}

impl ConformalMeasure {
    /// Fails unless `h` solves the Moran equation of `system` to within
    /// [`DIMENSION_CONSISTENCY`].
    pub fn new(system: &IfsSystem, h: f64) -> Result<Self> {
        let residual = moran_residual(system, h);
        if !(h >= 0.0) || !(residual.abs() <= DIMENSION_CONSISTENCY) {
            return Err(Error::InconsistentDimension { h, residual });
        }
        let raw: Vec<f64> = system
            .branches()
            .iter()
            .map(|b| (h * b.ratio().ln()).exp())
            .collect();
        let total: f64 = raw.iter().sum();
        let weight_by_letter: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let hull = system.hull();
        let pieces: Vec<Piece> = system
            .slots_by_position()
            .iter()
            .map(|&slot| {
                let b = &system.branches()[slot];
                let cyl = b.image();
                let hull_img = b.image_of(&hull);
                let expansion = 1.0 / b.ratio();
                Piece {
                    slope: b.slope(),
                    intercept: b.intercept(),
                    cyl_lo: cyl.left(),
                    cyl_hi: cyl.right(),
                    hull_lo: hull_img.left(),
                    hull_hi: hull_img.right(),
                    weight: weight_by_letter[slot],
                    expansion,
                    pull_pad: 8.0 * f64::EPSILON * (expansion + 1.0),
                }
            })
            .collect();
        let mut prefix = Vec::with_capacity(pieces.len() + 1);
        prefix.push(0.0);
        for p in &pieces {
            prefix.push(prefix.last().unwrap() + p.weight);
        }
        Ok(Self {
            h,
            hull,
            pieces,
            prefix,
            weight_by_letter,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Hull of the support.
    pub fn hull(&self) -> Interval {
        self.hull
    }

    pub fn n(&self) -> usize {
        self.pieces.len()
    }

    /// Mass of the first-generation cylinder of letter `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weight_by_letter[k - 1]
    }

    /// Mass of a word's cylinder.
    pub fn cylinder_weight(&self, word: &Word) -> f64 {
        word.letters().iter().map(|&k| self.weight(k)).product()
    }

    /// Enclosure of `m(interval)`.
    pub fn measure(&self, interval: Interval, max_depth: usize, tol: f64) -> MeasureBound {
        let (a, b) = (interval.left(), interval.right());
        if a == b {
            return MeasureBound::ZERO;
        }
        if a <= self.hull.left() - HULL_PAD && b >= self.hull.right() + HULL_PAD {
            return MeasureBound {
                lower: 1.0,
                upper: 1.0,
                depth_used: 1,
                unresolved_mass: 0.0,
            };
        }
        let mut acc = Accumulator {
            full: 0.0,
            unresolved: 0.0,
            depth_used: 0,
            cutoff: 0.25 * tol,
            max_depth: max_depth.max(1),
        };
        self.decompose(a, b, 0.0, 0.0, 1.0, 1, &mut acc);
        let slack = 32.0 + 8.0 * acc.depth_used as f64;
        let lower = round_down(acc.full, slack).clamp(0.0, 1.0);
        let upper = round_up(acc.full + acc.unresolved, slack).clamp(0.0, 1.0);
        MeasureBound {
            lower,
            upper,
            depth_used: acc.depth_used,
            unresolved_mass: upper - lower,
        }
    }

    /// Density enclosure of a nondegenerate interval.
    pub fn density(&self, interval: Interval, max_depth: usize, tol: f64) -> Result<DensityRecord> {
        let length = interval.length();
        if !(length > 0.0) {
            return Err(Error::ZeroLength);
        }
        let measure = self.measure(interval, max_depth, tol);
        let scale = length.powf(self.h);
        Ok(DensityRecord {
            interval,
            h: self.h,
            measure,
            density_lower: round_down(measure.lower / round_up(scale, 8.0), 4.0),
            density_upper: round_up(measure.upper / round_down(scale, 8.0), 4.0),
        })
    }

    // Index of the last piece whose cylinder starts at or before x.
    #[inline]
    fn locate(&self, x: f64) -> usize {
        self.pieces
            .partition_point(|p| p.cyl_lo <= x)
            .saturating_sub(1)
    }

    #[allow(clippy::too_many_arguments)]
    fn decompose(
        &self,
        a: f64,
        b: f64,
        ua: f64,
        ub: f64,
        scale: f64,
        depth: usize,
        acc: &mut Accumulator,
    ) {
        acc.depth_used = acc.depth_used.max(depth);
        let first = self.locate(a - ua);
        let inner_lo = self.locate(a + ua);
        let inner_hi = self.locate(b - ub);
        let last = self.locate(b + ub);
        // Pieces strictly between the endpoint pieces lie inside [a + ua, b - ub].
        let interior = (inner_lo + 1)..inner_hi;
        if !interior.is_empty() {
            acc.full += scale * (self.prefix[interior.end] - self.prefix[interior.start]);
        }
        for idx in first..=last {
            if interior.contains(&idx) {
                continue;
            }
            let p = &self.pieces[idx];
            let (hl, hh) = (p.hull_lo - HULL_PAD, p.hull_hi + HULL_PAD);
            if a + ua <= hl && b - ub >= hh {
                acc.full += scale * p.weight;
                continue;
            }
            if b + ub < hl || a - ua > hh {
                continue;
            }
            let child = scale * p.weight;
            if depth >= acc.max_depth || child < acc.cutoff {
                acc.unresolved += child;
                continue;
            }
            let (lo, u_lo) = clip_low(a, ua, p.cyl_lo);
            let (hi, u_hi) = clip_high(b, ub, p.cyl_hi);
            let (x_lo, x_hi) = (p.pull_back(lo), p.pull_back(hi));
            let (v_lo, v_hi) = (
                u_lo * p.expansion + p.pull_pad,
                u_hi * p.expansion + p.pull_pad,
            );
            let (mut na, mut nua, mut nb, mut nub) = if p.slope < 0.0 {
                (x_hi, v_hi, x_lo, v_lo)
            } else {
                (x_lo, v_lo, x_hi, v_hi)
            };
            if na > nb {
                std::mem::swap(&mut na, &mut nb);
                let u = nua.max(nub);
                nua = u;
                nub = u;
            }
            self.decompose(
                na.clamp(0.0, 1.0),
                nb.clamp(0.0, 1.0),
                nua,
                nub,
                child,
                depth + 1,
                acc,
            );
        }
    }
}

// Lower end of [a, ...] ∩ [bound, ...] with its uncertainty.
#[inline]
fn clip_low(a: f64, ua: f64, bound: f64) -> (f64, f64) {
    if a + ua <= bound {
        (bound, 0.0)
    } else {
        (a.max(bound), ua)
    }
}

#[inline]
fn clip_high(b: f64, ub: f64, bound: f64) -> (f64, f64) {
    if b - ub >= bound {
        (bound, 0.0)
    } else {
        (b.min(bound), ub)
    }
}

fn check_query(max_depth: usize, tol: f64) -> Result<()> {
    if max_depth == 0 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Enclosure of `m_n(interval)` for the system with dimension `h`.
pub fn measure_interval(
    system: &IfsSystem,
    h: f64,
    interval: Interval,
    max_depth: usize,
    tol: f64,
) -> Result<MeasureBound> {
    check_query(max_depth, tol)?;
    Ok(ConformalMeasure::new(system, h)?.measure(interval, max_depth, tol))
}

/// Enclosure of `m_n(interval) / |interval|^h`.
pub fn density(
    system: &IfsSystem,
    h: f64,
    interval: Interval,
    max_depth: usize,
    tol: f64,
) -> Result<DensityRecord> {
    check_query(max_depth, tol)?;
    ConformalMeasure::new(system, h)?.density(interval, max_depth, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::{solve_dimension, DEFAULT_TOLERANCE};

    fn setup(n: usize) -> (IfsSystem, ConformalMeasure) {
        let s = IfsSystem::gauss_linear(n).unwrap();
        let h = solve_dimension(&s, DEFAULT_TOLERANCE).unwrap().h;
        let m = ConformalMeasure::new(&s, h).unwrap();
        (s, m)
    }

    #[test]
    fn unit_interval_is_exact() {
        let (_, m) = setup(4);
        let b = m.measure(Interval::unit(), DEFAULT_MAX_DEPTH, DEFAULT_TOL);
        assert_eq!((b.lower, b.upper, b.depth_used), (1.0, 1.0, 1));
    }

    #[test]
    fn points_are_null() {
        let (_, m) = setup(3);
        let p = Interval::new(2.0 / 3.0, 2.0 / 3.0).unwrap();
        assert_eq!(m.measure(p, 60, 1e-10), MeasureBound::ZERO);
        assert_eq!(m.density(p, 60, 1e-10), Err(Error::ZeroLength));
    }

    #[test]
    fn first_generation_cylinders() {
        for n in [2usize, 3, 5] {
            let (_, m) = setup(n);
            for k in 1..=n {
                let kf = k as f64;
                let cyl = Interval::new(1.0 / (kf + 1.0), 1.0 / kf).unwrap();
                let b = m.measure(cyl, DEFAULT_MAX_DEPTH, DEFAULT_TOL);
                let exact = (1.0 / (kf * (kf + 1.0))).powf(m.h());
                assert!(b.contains(exact), "n={n} k={k} {b:?} {exact}");
                assert!(b.width() <= 1e-10);
            }
        }
    }

    #[test]
    fn left_half_of_two_branch_system() {
        let (_, m) = setup(2);
        let b = m.measure(Interval::new(0.0, 0.5).unwrap(), 40, 1e-10);
        let exact = (1.0f64 / 6.0).powf(m.h());
        assert!(b.contains(exact) && b.width() <= 1e-10, "{b:?}");
    }

    #[test]
    fn inconsistent_dimension_is_rejected() {
        let s = IfsSystem::gauss_linear(3).unwrap();
        assert!(matches!(
            ConformalMeasure::new(&s, 0.5),
            Err(Error::InconsistentDimension { .. })
        ));
        assert!(measure_interval(&s, 0.5, Interval::unit(), 10, 1e-10).is_err());
    }

    #[test]
    fn query_parameters_are_checked() {
        let (s, m) = setup(2);
        assert!(measure_interval(&s, m.h(), Interval::unit(), 0, 1e-10).is_err());
        assert!(measure_interval(&s, m.h(), Interval::unit(), 10, 0.0).is_err());
    }

    #[test]
    fn gaps_carry_no_mass() {
        let (s, m) = setup(5);
        let x = s.leftmost_point();
        // Between 1/(n+1) and the leftmost point of the limit set.
        let gap = Interval::new(1.0 / 6.0 + 1e-9, x - 1e-9).unwrap();
        let b = m.measure(gap, 60, 1e-10);
        assert_eq!(b.lower, 0.0);
        assert!(b.upper <= 1e-10);
        // Its image under g_3.
        let g3 = s.branch(3).unwrap();
        let b = m.measure(g3.image_of(&gap), 60, 1e-10);
        assert!(b.upper <= 1e-10);
    }

    #[test]
    fn first_cylinder_has_unit_density() {
        let (_, m) = setup(2);
        let d = m
            .density(Interval::new(1.0 / 3.0, 0.5).unwrap(), 60, 1e-10)
            .unwrap();
        assert!(d.contains(1.0));
        let d = m.density(Interval::unit(), 60, 1e-10).unwrap();
        assert!(d.contains(1.0));
    }

    #[test]
    fn shallow_depth_still_encloses() {
        let (s, m) = setup(2);
        let x = s.leftmost_point();
        let interval = Interval::new(x - 0.01, x + 0.05).unwrap();
        let deep = m.measure(interval, 60, 1e-12);
        for depth in 1..6 {
            let shallow = m.measure(interval, depth, 1e-12);
            assert!(shallow.lower <= deep.lower && deep.upper <= shallow.upper);
        }
    }
}
