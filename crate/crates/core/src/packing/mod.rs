// SPDX-License-Identifier: Apache-2.0

//! Search for the smallest density over closed intervals centered in the
//! limit set, and the packing measure bounds that follow from it.
//!
//! The packing measure of `J_n` in dimension `h_n` is `1 / d_min`, where
//! `d_min` is the infimum of `m_n(F) / |F|^{h_n}` over closed `F ⊆ [0, 1]`
//! centered at a point of `J_n`. An interval lying inside a first-generation
//! cylinder without touching its boundary has the same density as its
//! pull-back, which is again centered in `J_n`. So only intervals reaching the
//! boundary of the cylinder that contains their center need to be searched.
//!
//! [`dmin_sampled`] evaluates a fixed candidate family and yields an upper
//! bound on `d_min`. [`dmin_lower_bound`] certifies a lower bound by
//! branch and bound over (center, radius) boxes.

mod lower;

pub use lower::{dmin_lower_bound, dmin_lower_bound_with, LowerBound, LowerBoundOptions};

use std::sync::atomic::{AtomicU64, Ordering};

use crate::dimension::{solve_dimension, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ifs::{checked_power, Affine, IfsSystem, DEFAULT_ENUMERATION_CAP};
use crate::interval::{round_down, round_up, Interval};
use crate::measure::{ConformalMeasure, DensityRecord, DEFAULT_MAX_DEPTH};

pub const DEFAULT_GENERATION: usize = 2;
pub const DEFAULT_RADII_PER_CENTER: usize = 64;
/// Unresolved mass allowed per candidate, relative to `(2r)^h`.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// The limit of the packing measure as `n` grows.
pub const PACKING_LIMIT: f64 = 2.0;

// Outward padding of computed hull endpoints.
const HULL_PAD: f64 = 8.0 * f64::EPSILON;
// Radius bands narrower than this are not split further when pruning.
const BAND_RATIO: f64 = 1.01;
// Relative tolerance of the measure queries behind pruning bounds.
const BOUND_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    /// Evaluate every candidate.
    Exhaustive,
    /// Skip groups of candidates whose certified density lower bound
    /// exceeds the best upper bound found so far. Same minimum as
    /// [`Search::Exhaustive`].
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    pub generation: usize,
    pub radii_per_center: usize,
    pub max_depth: usize,
    pub rel_tol: f64,
    pub cap: u64,
    pub search: Search,
    pub execution: Execution,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            generation: DEFAULT_GENERATION,
            radii_per_center: DEFAULT_RADII_PER_CENTER,
            max_depth: DEFAULT_MAX_DEPTH,
            rel_tol: DEFAULT_REL_TOL,
            cap: DEFAULT_ENUMERATION_CAP,
            search: Search::Pruned,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub center: f64,
    pub radius: f64,
    pub density: DensityRecord,
}

impl Candidate {
    // Smaller density upper bound, then smaller center, then smaller radius.
    fn precedes(&self, other: &Candidate) -> bool {
        let key = |c: &Candidate| (c.density.density_upper, c.center, c.radius);
        let (a, b) = (key(self), key(other));
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .is_lt()
    }
}

fn keep_best(slot: &mut Option<Candidate>, c: Candidate) {
    if slot.as_ref().is_none_or(|b| c.precedes(b)) {
        *slot = Some(c);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingEstimate {
    pub n: usize,
    pub h: f64,
    pub dmin_upper: f64,
    /// Zero unless a lower bound was certified.
    pub dmin_lower: f64,
    pub packing_lower: f64,
    /// `+inf` when `dmin_lower` is zero.
    pub packing_upper: f64,
    pub witness: Interval,
    pub witness_center: f64,
    pub witness_radius: f64,
    pub witness_density: DensityRecord,
    pub lower_bound: Option<LowerBound>,
}

impl PackingEstimate {
    fn from_witness(n: usize, h: f64, best: Candidate) -> Self {
        let dmin_upper = best.density.density_upper;
        Self {
            n,
            h,
            dmin_upper,
            dmin_lower: 0.0,
            packing_lower: round_down(1.0 / dmin_upper, 2.0),
            packing_upper: f64::INFINITY,
            witness: best.density.interval,
            witness_center: best.center,
            witness_radius: best.radius,
            witness_density: best.density,
            lower_bound: None,
        }
    }

    /// Records a certified lower bound on `d_min`.
    pub fn with_lower_bound(mut self, bound: LowerBound) -> Self {
        self.dmin_lower = bound.value.min(self.dmin_upper);
        self.packing_upper = if self.dmin_lower > 0.0 {
            round_up(1.0 / self.dmin_lower, 2.0)
        } else {
            f64::INFINITY
        };
        self.lower_bound = Some(bound);
        self
    }
}

// First-generation layout of a system, as needed by the searches.
pub(crate) struct Geometry {
    pub n: usize,
    pub branches: Vec<crate::ifs::LinearMap>,
    pub hull: Interval,
    // Cylinders ordered left to right.
    cylinders: Vec<(f64, f64)>,
    // J-hull of each first-generation piece, same order.
    piece_hulls: Vec<(f64, f64)>,
}

impl Geometry {
    pub fn new(system: &IfsSystem) -> Self {
        let hull = system.hull();
        let slots = system.slots_by_position();
        let branches = system.branches();
        Self {
            n: system.n(),
            branches: branches.to_vec(),
            hull,
            cylinders: slots
                .iter()
                .map(|&s| {
                    let c = branches[s].image();
                    (c.left(), c.right())
                })
                .collect(),
            piece_hulls: slots
                .iter()
                .map(|&s| {
                    let c = branches[s].image_of(&hull);
                    (c.left(), c.right())
                })
                .collect(),
        }
    }

    fn position(&self, x: f64) -> usize {
        self.cylinders
            .partition_point(|c| c.0 <= x)
            .saturating_sub(1)
    }

    /// First-generation cylinder containing `x`.
    pub fn cylinder_at(&self, x: f64) -> (f64, f64) {
        self.cylinders[self.position(x)]
    }

    /// Smallest gap between a piece's J-hull and its cylinder boundary.
    pub fn reducible_floor(&self) -> f64 {
        self.cylinders
            .iter()
            .zip(&self.piece_hulls)
            .map(|(c, p)| (p.0 - c.0).min(c.1 - p.1))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Candidate radii at center `c`: a geometric grid between the larger of
    /// `r_min` and the reducible radius and `min(c, 1 - c)`, together with
    /// the distances from `c` to the ends of its cylinder and to the nearest
    /// edges of the neighbouring pieces.
    pub fn radii(&self, c: f64, count: usize, r_min: f64) -> Vec<f64> {
        let r_max = c.min(1.0 - c);
        let idx = self.position(c);
        let (lo_c, hi_c) = self.cylinders[idx];
        let lo = r_min.max((c - lo_c).min(hi_c - c));
        let mut out = Vec::with_capacity(count + 6);
        if !(lo < r_max) {
            out.push(r_max);
            return out;
        }
        let ratio = (r_max / lo).ln() / (count - 1) as f64;
        out.extend((0..count - 1).map(|i| lo * (ratio * i as f64).exp()));
        out.push(r_max);
        let mut snaps = vec![c - lo_c, hi_c - c];
        if idx > 0 {
            snaps.push(c - self.piece_hulls[idx - 1].1);
        }
        if idx + 1 < self.piece_hulls.len() {
            snaps.push(self.piece_hulls[idx + 1].0 - c);
        }
        snaps.push(c - self.hull.left());
        snaps.push(self.hull.right() - c);
        out.extend(snaps.into_iter().filter(|&r| r >= lo && r <= r_max));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// A word together with its composed map and padded J-hull.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub word: Vec<usize>,
    pub map: Affine,
    pub lo: f64,
    pub hi: f64,
}

impl Node {
    pub fn root(geo: &Geometry) -> Self {
        Self {
            word: Vec::new(),
            map: Affine::IDENTITY,
            lo: geo.hull.left(),
            hi: geo.hull.right(),
        }
    }

    pub fn child(&self, geo: &Geometry, k: usize) -> Self {
        let map = self.map.then(&geo.branches[k - 1]);
        let h = map.image_of(&geo.hull);
        let mut word = self.word.clone();
        word.push(k);
        Self {
            word,
            map,
            lo: (h.left() - HULL_PAD).max(0.0),
            hi: (h.right() + HULL_PAD).min(1.0),
        }
    }

    /// Points of the limit set attached to this word.
    pub fn centers(&self, geo: &Geometry) -> Vec<f64> {
        let mut out = Vec::with_capacity(3);
        if !self.word.is_empty() {
            out.push(self.map.fixed_point());
        }
        out.push(self.map.apply(geo.hull.left()));
        out.push(self.map.apply(geo.hull.right()));
        out
    }

    /// Radius range covering every irreducible or maximal candidate centered
    /// in this node's hull.
    pub fn radius_range(&self, geo: &Geometry, r_min: f64) -> (f64, f64) {
        let rho = if self.word.is_empty() {
            geo.reducible_floor()
        } else {
            let (lo, hi) = geo.cylinder_at(0.5 * (self.lo + self.hi));
            (self.lo - lo).min(hi - self.hi).max(0.0)
        };
        let smallest_cap = self.lo.min(1.0 - self.hi);
        let largest_cap = if self.lo <= 0.5 && 0.5 <= self.hi {
            0.5
        } else {
            self.hi.min(1.0 - self.lo)
        };
        (r_min.max(rho).min(smallest_cap), largest_cap)
    }

    /// Certified lower bound on the density of every interval centered in
    /// this node's hull with radius in `[r_lo, r_hi]`.
    pub fn density_floor(&self, mu: &ConformalMeasure, r_lo: f64, r_hi: f64, depth: usize) -> f64 {
        let (a, b) = (self.hi - r_lo, self.lo + r_lo);
        if !(a < b) {
            return 0.0;
        }
        let core = Interval::clamped(a, b);
        let tol = BOUND_REL_TOL * core.length().powf(mu.h());
        let m = mu.measure(core, depth, tol.max(f64::MIN_POSITIVE));
        round_down(m.lower / round_up((2.0 * r_hi).powf(mu.h()), 8.0), 4.0)
    }
}

/// Points of the limit set attached to all words of length at most
/// `generation`: periodic points and images of both hull endpoints,
/// deduplicated and sorted.
pub fn candidate_centers(system: &IfsSystem, generation: usize) -> Result<Vec<f64>> {
    candidate_centers_capped(system, generation, DEFAULT_ENUMERATION_CAP)
}

pub fn candidate_centers_capped(
    system: &IfsSystem,
    generation: usize,
    cap: u64,
) -> Result<Vec<f64>> {
    checked_power(system.n(), generation, cap)?;
    let geo = Geometry::new(system);
    let mut out = Vec::new();
    let mut stack = vec![Node::root(&geo)];
    while let Some(node) = stack.pop() {
        out.extend(node.centers(&geo));
        if node.word.len() < generation {
            stack.extend((1..=geo.n).map(|k| node.child(&geo, k)));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * f64::EPSILON * b.abs());
    Ok(out)
}

fn check_sampling(opts: &SamplingOptions) -> Result<()> {
    if opts.radii_per_center < 2 {
        return Err(Error::InvalidParameter(
            "radii_per_center must be at least 2".into(),
        ));
    }
    if opts.max_depth == 0 {
        return Err(Error::InvalidParameter(
            "max_depth must be at least 1".into(),
        ));
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol.is_finite()) {
        return Err(Error::InvalidTolerance(opts.rel_tol));
    }
    Ok(())
}

/// Upper bound on `d_min` from the candidate family of the given generation.
pub fn dmin_sampled(
    system: &IfsSystem,
    h: f64,
    generation: usize,
    radii_per_center: usize,
) -> Result<PackingEstimate> {
    let opts = SamplingOptions {
        generation,
        radii_per_center,
        ..SamplingOptions::default()
    };
    dmin_sampled_with(system, h, &opts)
}

pub fn dmin_sampled_with(
    system: &IfsSystem,
    h: f64,
    opts: &SamplingOptions,
) -> Result<PackingEstimate> {
    check_sampling(opts)?;
    checked_power(system.n(), opts.generation, opts.cap)?;
    let mu = ConformalMeasure::new(system, h)?;
    let geo = Geometry::new(system);
    let min_ratio = geo
        .branches
        .iter()
        .map(|b| b.ratio())
        .fold(f64::INFINITY, f64::min);
    let sampler = Sampler {
        geo: &geo,
        mu: &mu,
        opts,
        r_min: 0.5 * min_ratio.powi(opts.generation as i32),
        incumbent: AtomicU64::new(f64::INFINITY.to_bits()),
    };
    let best = match opts.search {
        Search::Exhaustive => sampler.exhaustive(system)?,
        Search::Pruned => sampler.pruned(),
    };
    let best = best.ok_or_else(|| Error::InvalidParameter("no candidate intervals".into()))?;
    Ok(PackingEstimate::from_witness(system.n(), h, best))
}

struct Sampler<'a> {
    geo: &'a Geometry,
    mu: &'a ConformalMeasure,
    opts: &'a SamplingOptions,
    r_min: f64,
    // Bits of the smallest density upper bound seen; positive floats order
    // like their bit patterns.
    incumbent: AtomicU64,
}

impl Sampler<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed))
    }

    fn evaluate(&self, c: f64, r: f64) -> Candidate {
        let interval = Interval::centered(c, r);
        let tol = self.opts.rel_tol * interval.length().powf(self.mu.h());
        let density = self
            .mu
            .density(interval, self.opts.max_depth, tol.max(f64::MIN_POSITIVE))
            .expect("candidate radius is positive");
        self.incumbent
            .fetch_min(density.density_upper.to_bits(), Ordering::Relaxed);
        Candidate {
            center: c,
            radius: r,
            density,
        }
    }

    fn center_best(&self, c: f64, prune: bool) -> Option<Candidate> {
        let radii = self.geo.radii(c, self.opts.radii_per_center, self.r_min);
        let mut best = None;
        if prune {
            self.scan_radii(c, &radii, &mut best);
        } else {
            for &r in &radii {
                keep_best(&mut best, self.evaluate(c, r));
            }
        }
        best
    }

    // Bisects the sorted radius list, skipping runs whose floor beats the incumbent.
    fn scan_radii(&self, c: f64, radii: &[f64], best: &mut Option<Candidate>) {
        if radii.len() <= 2 {
            for &r in radii {
                keep_best(best, self.evaluate(c, r));
            }
            return;
        }
        let point = Node {
            word: Vec::new(),
            map: Affine::IDENTITY,
            lo: c,
            hi: c,
        };
        let floor = point.density_floor(
            self.mu,
            radii[0],
            radii[radii.len() - 1],
            self.opts.max_depth,
        );
        if floor > self.incumbent() {
            return;
        }
        let (left, right) = radii.split_at(radii.len() / 2);
        self.scan_radii(c, left, best);
        self.scan_radii(c, right, best);
    }

    fn exhaustive(&self, system: &IfsSystem) -> Result<Option<Candidate>> {
        let centers = candidate_centers_capped(system, self.opts.generation, self.opts.cap)?;
        let per_center = self
            .opts
            .execution
            .map(&centers, |&c| self.center_best(c, false));
        Ok(reduce(per_center))
    }

    // True unless every candidate under the node is certainly worse than the
    // incumbent.
    fn may_improve(&self, node: &Node) -> bool {
        let (lo, hi) = node.radius_range(self.geo, self.r_min);
        self.band_may_improve(node, lo, hi.max(lo))
    }

    fn band_may_improve(&self, node: &Node, lo: f64, hi: f64) -> bool {
        if node.density_floor(self.mu, lo, hi, self.opts.max_depth) > self.incumbent() {
            return false;
        }
        // Narrow bands, or bands too small to see a common core, are kept.
        if hi <= lo * BAND_RATIO || 2.0 * lo <= node.hi - node.lo {
            return true;
        }
        let mid = (lo * hi).sqrt();
        self.band_may_improve(node, lo, mid) || self.band_may_improve(node, mid, hi)
    }

    fn visit(&self, node: &Node, best: &mut Option<Candidate>) {
        for c in node.centers(self.geo) {
            if let Some(cand) = self.center_best(c, true) {
                keep_best(best, cand);
            }
        }
        if node.word.len() == self.opts.generation {
            return;
        }
        for k in 1..=self.geo.n {
            let child = node.child(self.geo, k);
            if self.may_improve(&child) {
                self.visit(&child, best);
            }
        }
    }

    fn pruned(&self) -> Option<Candidate> {
        // Shallow words are handled in order, so every task starts from the
        // incumbent set by the hull endpoints.
        let mut best = None;
        let mut level = vec![Node::root(self.geo)];
        let mut frontier = Vec::new();
        while let Some(node) = level.pop() {
            let split = node.word.len() < self.opts.generation
                && (self.geo.n as u64).pow(node.word.len() as u32 + 1) <= 256;
            if !split {
                frontier.push(node);
                continue;
            }
            for c in node.centers(self.geo) {
                if let Some(cand) = self.center_best(c, true) {
                    keep_best(&mut best, cand);
                }
            }
            level.extend((1..=self.geo.n).rev().map(|k| node.child(self.geo, k)));
        }
        let results = self.opts.execution.map(&frontier, |node| {
            let mut local = None;
            if node.word.is_empty() || self.may_improve(node) {
                self.visit(node, &mut local);
            }
            local
        });
        let mut all = reduce(results);
        if let Some(b) = best {
            keep_best(&mut all, b);
        }
        all
    }
}

fn reduce(items: Vec<Option<Candidate>>) -> Option<Candidate> {
    let mut best = None;
    for c in items.into_iter().flatten() {
        keep_best(&mut best, c);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingOptions {
    pub sampling: SamplingOptions,
    /// Run the certified lower bound as well.
    pub lower_bound: Option<LowerBoundOptions>,
    pub dimension_tol: f64,
}

impl Default for PackingOptions {
    fn default() -> Self {
        Self {
            sampling: SamplingOptions::default(),
            lower_bound: None,
            dimension_tol: DEFAULT_TOLERANCE,
        }
    }
}

/// Dimension, sampled `d_min` and, optionally, its certified lower bound for `S_n`.
pub fn packing_estimate(n: usize, opts: &PackingOptions) -> Result<PackingEstimate> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let system = IfsSystem::gauss_linear(n)?;
    let h = solve_dimension(&system, opts.dimension_tol)?.h;
    let estimate = dmin_sampled_with(&system, h, &opts.sampling)?;
    match &opts.lower_bound {
        Some(lb) => {
            let bound = dmin_lower_bound_with(&system, h, lb)?;
            Ok(estimate.with_lower_bound(bound))
        }
        None => Ok(estimate),
    }
}

/// Estimates for every `n` in `n_min..=n_max`, ordered by `n`.
pub fn sweep(
    n_min: usize,
    n_max: usize,
    opts: &PackingOptions,
    progress: Option<&(dyn Fn(&PackingEstimate) + Sync)>,
) -> Result<Vec<PackingEstimate>> {
    if n_min < 2 || n_min > n_max {
        return Err(Error::InvalidParameter(format!(
            "sweep needs 2 <= n_min <= n_max, got {n_min}..={n_max}"
        )));
    }
    let values: Vec<usize> = (n_min..=n_max).collect();
    sweep_values(&values, opts, progress)
}

/// Estimates for an explicit list of `n`, returned sorted by `n`.
pub fn sweep_values(
    values: &[usize],
    opts: &PackingOptions,
    progress: Option<&(dyn Fn(&PackingEstimate) + Sync)>,
) -> Result<Vec<PackingEstimate>> {
    let mut values = values.to_vec();
    values.sort_unstable();
    values.dedup();
    let mut out = Vec::with_capacity(values.len());
    for n in values {
        let estimate = packing_estimate(n, opts)?;
        if let Some(cb) = progress {
            cb(&estimate);
        }
        out.push(estimate);
    }
    Ok(out)
}

/// Density of `I_n = [2x_n - 1/n, 1/n]` in closed form,
/// `(1/2)^h ((2n^2+2n-1)/(2n^2+n-1))^h`.
pub fn i_n_density(n: usize, h: f64) -> f64 {
    let n = n as f64;
    let q = (2.0 * n * n + 2.0 * n - 1.0) / (2.0 * n * n + n - 1.0);
    (0.5 * q).powf(h)
}

/// The interval `I_n = [2x_n - 1/n, 1/n]` centered at the leftmost point `x_n`.
pub fn i_n_interval(n: usize) -> Interval {
    let nf = n as f64;
    let x = 2.0 * nf / (2.0 * nf * nf + 2.0 * nf - 1.0);
    Interval::clamped(2.0 * x - 1.0 / nf, 1.0 / nf)
}
