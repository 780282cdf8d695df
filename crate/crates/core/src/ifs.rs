// SPDX-License-Identifier: Apache-2.0

//! Affine iterated function systems on `[0, 1]`, with the linear Gauss family
//! `S_n` as the main constructor.
//!
//! Branches are addressed by 1-based letters, matching words `q_1 ... q_l`.
//! A word `w` denotes the composition `g_{q_1} o ... o g_{q_l}`, and its
//! cylinder is the image of `[0, 1]` under that composition.

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Default cap on the number of cylinders any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Cap on the number of inverse-branch steps taken by [`IfsSystem::expand_to_grid`].
pub const EXPANSION_STEP_CAP: usize = 64;

/// One affine branch `x -> slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap {
    slope: f64,
    intercept: f64,
    index: usize,
}

impl LinearMap {
    pub fn new(slope: f64, intercept: f64, index: usize) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidBranch {
            index,
            reason: reason.to_string(),
        };
        if index == 0 {
            return Err(invalid("branch labels start at 1"));
        }
        if !(slope.is_finite() && intercept.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        if slope == 0.0 || slope.abs() >= 1.0 {
            return Err(invalid("slope must satisfy 0 < |slope| < 1"));
        }
        let (a, b) = (intercept, slope + intercept);
        if a.min(b) < 0.0 || a.max(b) > 1.0 {
            return Err(invalid("image of [0, 1] must lie in [0, 1]"));
        }
        Ok(Self {
            slope,
            intercept,
            index,
        })
    }

    /// Branch `g_k(x) = 1/k - x/(k(k+1))` of the linear Gauss family.
    pub fn gauss(k: usize) -> Self {
        assert!(k >= 1, "branch labels start at 1");
        let kf = k as f64;
        Self {
            slope: -1.0 / (kf * (kf + 1.0)),
            intercept: 1.0 / kf,
            index: k,
        }
    }

    #[inline]
    pub fn slope(&self) -> f64 {
        self.slope
    }

    #[inline]
    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    #[inline]
    pub fn index(&self) -> usize {
        self.index
    }

    /// Contraction ratio `|slope|`.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.slope.abs()
    }

    #[inline]
    pub fn reverses(&self) -> bool {
        self.slope < 0.0
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// The inverse branch `f_k`, extended affinely to the whole line.
    #[inline]
    pub fn pull_back(&self, y: f64) -> f64 {
        (y - self.intercept) / self.slope
    }

    pub fn image(&self) -> Interval {
        Interval::clamped(self.intercept, self.slope + self.intercept)
    }

    pub fn image_of(&self, interval: &Interval) -> Interval {
        Interval::clamped(self.apply(interval.left()), self.apply(interval.right()))
    }
}

/// A finite word over the alphabet `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The word `k` followed by `self`.
    pub fn prepend(&self, k: usize) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.push(k);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }
}

impl From<Vec<usize>> for Word {
    fn from(letters: Vec<usize>) -> Self {
        Word(letters)
    }
}

impl From<&[usize]> for Word {
    fn from(letters: &[usize]) -> Self {
        Word(letters.to_vec())
    }
}

/// A generation-`l` cylinder together with its `m_n`-mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder {
    pub word: Word,
    pub interval: Interval,
    /// `prod_j |slope_{q_j}|^h`.
    pub weight: f64,
}

/// An affine map `x -> a x + b`, the composition of a word's branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { a: 1.0, b: 0.0 };

    /// `self o g`.
    #[inline]
    pub fn then(self, g: &LinearMap) -> Affine {
        Affine {
            a: self.a * g.slope(),
            b: self.a * g.intercept() + self.b,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    /// Unique fixed point of a strict contraction.
    #[inline]
    pub fn fixed_point(&self) -> f64 {
        self.b / (1.0 - self.a)
    }

    pub fn image_of(&self, interval: &Interval) -> Interval {
        Interval::clamped(self.apply(interval.left()), self.apply(interval.right()))
    }
}

/// An ordered list of affine branches; implicitly represents its limit set.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    branches: Vec<LinearMap>,
    // Branch slots (0-based) sorted by the position of their image, left to right.
    by_position: Vec<usize>,
    hull: Interval,
}

impl IfsSystem {
    /// The linear Gauss system `S_n`.
    pub fn gauss_linear(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySystem(0));
        }
        Self::from_branches((1..=n).map(LinearMap::gauss).collect())
    }

    /// Builds a system from arbitrary branches. Branch `i` of the list gets
    /// letter `i + 1`; images must have pairwise disjoint interiors.
    pub fn from_branches(branches: Vec<LinearMap>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::EmptySystem(0));
        }
        for (slot, b) in branches.iter().enumerate() {
            if b.index() != slot + 1 {
                return Err(Error::InvalidBranch {
                    index: b.index(),
                    reason: format!("expected label {}", slot + 1),
                });
            }
        }
        let mut by_position: Vec<usize> = (0..branches.len()).collect();
        by_position.sort_by(|&i, &j| {
            branches[i]
                .image()
                .left()
                .total_cmp(&branches[j].image().left())
        });
        for pair in by_position.windows(2) {
            let (lo, hi) = (branches[pair[0]].image(), branches[pair[1]].image());
            // Shared endpoints may disagree by a few ulps after rounding.
            if lo.right() - hi.left() > 4.0 * f64::EPSILON * lo.right() {
                return Err(Error::InvalidBranch {
                    index: branches[pair[1]].index(),
                    reason: "image overlaps a neighbouring image".into(),
                });
            }
        }
        let total: f64 = branches.iter().map(LinearMap::ratio).sum();
        if total >= 1.0 {
            return Err(Error::InvalidBranch {
                index: branches.len(),
                reason: "sum of contraction ratios must be below 1".into(),
            });
        }
        let hull = limit_hull(&branches);
        Ok(Self {
            branches,
            by_position,
            hull,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[LinearMap] {
        &self.branches
    }

    /// Branch with letter `k` (1-based).
    pub fn branch(&self, k: usize) -> Result<&LinearMap> {
        if k == 0 || k > self.n() {
            return Err(Error::LetterOutOfRange {
                letter: k,
                n: self.n(),
            });
        }
        Ok(&self.branches[k - 1])
    }

    /// Branch slots ordered by image position, left to right.
    pub(crate) fn slots_by_position(&self) -> &[usize] {
        &self.by_position
    }

    /// Convex hull of the limit set.
    pub fn hull(&self) -> Interval {
        self.hull
    }

    /// Minimum of the limit set. For `S_n` this is the fixed point of
    /// `g_n o g_1`, `2n/(2n^2+2n-1)`.
    pub fn leftmost_point(&self) -> f64 {
        self.hull.left()
    }

    /// Maximum of the limit set. For `S_n` this is `g_1(leftmost)`,
    /// `(2n-1)(n+1)/(2n^2+2n-1)`.
    pub fn rightmost_point(&self) -> f64 {
        self.hull.right()
    }

    /// Sum of the contraction ratios.
    pub fn ratio_sum(&self) -> f64 {
        self.branches.iter().map(LinearMap::ratio).sum()
    }

    pub fn compose(&self, word: &Word) -> Result<Affine> {
        let mut map = Affine::IDENTITY;
        for &q in word.letters() {
            map = map.then(self.branch(q)?);
        }
        Ok(map)
    }

    /// Image of `[0, 1]` under the composition of the word's branches.
    pub fn cylinder_interval(&self, word: &Word) -> Result<Interval> {
        Ok(self.compose(word)?.image_of(&Interval::unit()))
    }

    /// Fixed point of the word's composition; a point of the limit set.
    pub fn periodic_point(&self, word: &Word) -> Result<f64> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(self.compose(word)?.fixed_point())
    }

    /// All `n^l` cylinders of generation `l`, weights taken at exponent `h`.
    pub fn enumerate_generation(&self, l: usize, h: f64, cap: u64) -> Result<Vec<Cylinder>> {
        if l == 0 {
            return Err(Error::InvalidParameter(
                "generation must be at least 1".into(),
            ));
        }
        let count = checked_power(self.n(), l, cap)?;
        let weights: Vec<f64> = self.branches.iter().map(|b| b.ratio().powf(h)).collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut letters = Vec::with_capacity(l);
        self.enumerate_rec(l, &weights, Affine::IDENTITY, 1.0, &mut letters, &mut out);
        Ok(out)
    }

    fn enumerate_rec(
        &self,
        remaining: usize,
        weights: &[f64],
        map: Affine,
        weight: f64,
        letters: &mut Vec<usize>,
        out: &mut Vec<Cylinder>,
    ) {
        if remaining == 0 {
            out.push(Cylinder {
                word: Word(letters.clone()),
                interval: map.image_of(&Interval::unit()),
                weight,
            });
            return;
        }
        for (slot, branch) in self.branches.iter().enumerate() {
            letters.push(slot + 1);
            self.enumerate_rec(
                remaining - 1,
                weights,
                map.then(branch),
                weight * weights[slot],
                letters,
                out,
            );
            letters.pop();
        }
    }

    /// Right endpoints of the first-generation images (`1/j`, `j = 1..=n`,
    /// for `S_n`), sorted ascending.
    pub fn grid_points(&self) -> Vec<f64> {
        self.by_position
            .iter()
            .map(|&s| self.branches[s].image().right())
            .collect()
    }

    /// Letter of the branch whose image contains `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        self.branches
            .iter()
            .find(|b| b.image().contains(x))
            .map(LinearMap::index)
    }

    /// Repeatedly pulls an interval back through the branch whose image
    /// contains it until the result contains a grid point. Density is
    /// unchanged at every step. Returns the expanded interval and the number
    /// of steps taken.
    pub fn expand_to_grid(&self, interval: Interval) -> Result<(Interval, usize)> {
        let grid = self.grid_points();
        let mut current = interval;
        for steps in 0..=EXPANSION_STEP_CAP {
            if grid.iter().any(|&p| current.contains(p)) {
                return Ok((current, steps));
            }
            if steps == EXPANSION_STEP_CAP {
                break;
            }
            let branch = self
                .branches
                .iter()
                .find(|b| b.image().contains_interval(&current));
            let branch = match branch {
                Some(b) => b,
                None => {
                    let touches = self
                        .branches
                        .iter()
                        .any(|b| b.image().overlaps_interior(&current));
                    return Err(if touches {
                        Error::StraddlesGap {
                            left: current.left(),
                            right: current.right(),
                        }
                    } else {
                        Error::OutsideUnion {
                            left: current.left(),
                            right: current.right(),
                        }
                    });
                }
            };
            current = Interval::clamped(
                branch.pull_back(current.left()),
                branch.pull_back(current.right()),
            );
        }
        Err(Error::StepCapReached(EXPANSION_STEP_CAP))
    }
}

/// Builds `S_n`.
pub fn make_gauss_linear_ifs(n: usize) -> Result<IfsSystem> {
    IfsSystem::gauss_linear(n)
}

/// `base^exp` if it does not exceed `cap`.
pub(crate) fn checked_power(base: usize, exp: usize, cap: u64) -> Result<u64> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
        if acc > cap as u128 {
            return Err(Error::CapExceeded {
                requested: acc,
                cap,
            });
        }
    }
    Ok(acc as u64)
}

// Fixed point of the hull operator [lo, hi] -> hull of the union of g_k([lo, hi]).
fn limit_hull(branches: &[LinearMap]) -> Interval {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..4096 {
        let mut new_lo = f64::INFINITY;
        let mut new_hi = f64::NEG_INFINITY;
        for b in branches {
            let (p, q) = (b.apply(lo), b.apply(hi));
            new_lo = new_lo.min(p.min(q));
            new_hi = new_hi.max(p.max(q));
        }
        if new_lo == lo && new_hi == hi {
            break;
        }
        lo = new_lo;
        hi = new_hi;
    }
    Interval::clamped(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rejects_zero_branches() {
        assert_eq!(IfsSystem::gauss_linear(0), Err(Error::EmptySystem(0)));
    }

    #[test]
    fn single_branch_endpoints() {
        let s = IfsSystem::gauss_linear(1).unwrap();
        let g1 = s.branch(1).unwrap();
        assert_eq!(g1.apply(0.0), 1.0);
        assert_eq!(g1.apply(1.0), 0.5);
    }

    #[test]
    fn third_branch_endpoints() {
        let s = IfsSystem::gauss_linear(3).unwrap();
        let g3 = s.branch(3).unwrap();
        assert!(close(g3.apply(0.0), 1.0 / 3.0));
        assert!(close(g3.apply(1.0), 0.25));
    }

    #[test]
    fn ratio_sum_telescopes() {
        let s = IfsSystem::gauss_linear(2).unwrap();
        assert!(close(s.ratio_sum(), 2.0 / 3.0));
        let s = IfsSystem::gauss_linear(50).unwrap();
        assert!(close(s.ratio_sum(), 1.0 - 1.0 / 51.0));
    }

    #[test]
    fn cylinder_examples() {
        let s = IfsSystem::gauss_linear(2).unwrap();
        let i = s.cylinder_interval(&Word::new(vec![2, 1])).unwrap();
        assert!(close(i.left(), 1.0 / 3.0) && close(i.right(), 5.0 / 12.0));
        let s = IfsSystem::gauss_linear(7).unwrap();
        let i = s.cylinder_interval(&Word::new(vec![1, 1])).unwrap();
        assert!(close(i.left(), 0.5) && close(i.right(), 0.75));
        for k in 1..=7 {
            let i = s.cylinder_interval(&Word::new(vec![k])).unwrap();
            assert!(close(i.left(), 1.0 / (k as f64 + 1.0)));
            assert!(close(i.right(), 1.0 / k as f64));
        }
        assert_eq!(
            s.cylinder_interval(&Word::new(vec![8])),
            Err(Error::LetterOutOfRange { letter: 8, n: 7 })
        );
    }

    #[test]
    fn generation_two_lengths() {
        let s = IfsSystem::gauss_linear(2).unwrap();
        let gen = s
            .enumerate_generation(2, 0.5, DEFAULT_ENUMERATION_CAP)
            .unwrap();
        let mut lengths: Vec<f64> = gen.iter().map(|c| c.interval.length()).collect();
        lengths.sort_by(f64::total_cmp);
        let expected = [1.0 / 36.0, 1.0 / 12.0, 1.0 / 12.0, 0.25];
        for (l, e) in lengths.iter().zip(expected) {
            assert!((l - e).abs() < 1e-15, "{l} vs {e}");
        }
        let first = s
            .enumerate_generation(1, 0.5, DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert!(close(first[0].interval.left(), 0.5));
        assert!(close(first[1].interval.left(), 1.0 / 3.0));
    }

    #[test]
    fn enumeration_cap_fails_loudly() {
        let s = IfsSystem::gauss_linear(10).unwrap();
        assert!(matches!(
            s.enumerate_generation(5, 0.5, 1000),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn hull_matches_closed_forms() {
        for n in [1usize, 2, 3, 10, 100] {
            let s = IfsSystem::gauss_linear(n).unwrap();
            let nf = n as f64;
            let d = 2.0 * nf * nf + 2.0 * nf - 1.0;
            assert!(close(s.leftmost_point(), 2.0 * nf / d), "n={n}");
            assert!(close(
                s.rightmost_point(),
                (2.0 * nf - 1.0) * (nf + 1.0) / d
            ));
        }
        assert!(close(
            IfsSystem::gauss_linear(2).unwrap().leftmost_point(),
            4.0 / 11.0
        ));
        assert!(close(
            IfsSystem::gauss_linear(10).unwrap().leftmost_point(),
            20.0 / 219.0
        ));
        let one = IfsSystem::gauss_linear(1).unwrap();
        assert!(close(one.leftmost_point(), 2.0 / 3.0));
        assert!(close(one.rightmost_point(), 2.0 / 3.0));
    }

    #[test]
    fn periodic_point_examples() {
        let s = IfsSystem::gauss_linear(5).unwrap();
        assert!(close(
            s.periodic_point(&Word::new(vec![1])).unwrap(),
            2.0 / 3.0
        ));
        assert!(close(
            s.periodic_point(&Word::new(vec![5, 1])).unwrap(),
            10.0 / 59.0
        ));
        assert_eq!(s.periodic_point(&Word::default()), Err(Error::EmptyWord));

        // g_2(g_2(x)) = 1/2 - (1/2 - x/6)/6 = 5/12 + x/36, fixed point 15/35 = 3/7.
        let s2 = IfsSystem::gauss_linear(2).unwrap();
        let w = Word::new(vec![2, 2]);
        let p = s2.periodic_point(&w).unwrap();
        assert!(close(p, 3.0 / 7.0));
        let g2 = s2.branch(2).unwrap();
        let cyl = Interval::clamped(g2.apply(0.5), g2.apply(1.0 / 3.0));
        assert!(cyl.contains(p));
        assert!(s2.cylinder_interval(&w).unwrap().contains(p));
    }

    #[test]
    fn expand_examples() {
        let s = IfsSystem::gauss_linear(2).unwrap();
        let (out, steps) = s
            .expand_to_grid(Interval::new(0.40, 0.45).unwrap())
            .unwrap();
        assert_eq!(steps, 1);
        assert!((out.left() - 0.30).abs() < 1e-12 && (out.right() - 0.60).abs() < 1e-12);

        let with_half = Interval::new(0.45, 0.55).unwrap();
        assert_eq!(s.expand_to_grid(with_half).unwrap(), (with_half, 0));

        // f_1(x) = 2(1 - x): [0.67, 0.70] -> [0.60, 0.66] -> [0.68, 0.80] -> [0.40, 0.64].
        let (out, steps) = s
            .expand_to_grid(Interval::new(0.67, 0.70).unwrap())
            .unwrap();
        assert_eq!(steps, 3);
        assert!((out.left() - 0.40).abs() < 1e-12 && (out.right() - 0.64).abs() < 1e-12);
    }

    #[test]
    fn expand_rejects_outside_and_straddling() {
        let s = IfsSystem::gauss_linear(2).unwrap();
        assert!(matches!(
            s.expand_to_grid(Interval::new(0.1, 0.2).unwrap()),
            Err(Error::OutsideUnion { .. })
        ));
        assert!(matches!(
            s.expand_to_grid(Interval::new(0.3, 0.34).unwrap()),
            Err(Error::StraddlesGap { .. })
        ));
    }

    #[test]
    fn from_branches_validates() {
        let overlapping = vec![
            LinearMap::new(0.5, 0.0, 1).unwrap(),
            LinearMap::new(0.4, 0.3, 2).unwrap(),
        ];
        assert!(IfsSystem::from_branches(overlapping).is_err());
        let cantor = vec![
            LinearMap::new(1.0 / 3.0, 0.0, 1).unwrap(),
            LinearMap::new(1.0 / 3.0, 2.0 / 3.0, 2).unwrap(),
        ];
        let s = IfsSystem::from_branches(cantor).unwrap();
        assert_eq!(s.hull(), Interval::unit());
        assert!(LinearMap::new(1.0, 0.0, 1).is_err());
        assert!(LinearMap::new(0.5, 0.7, 1).is_err());
    }
}
