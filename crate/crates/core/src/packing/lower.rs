// SPDX-License-Identifier: Apache-2.0

//! Certified lower bound on `d_min` by best-first branch and bound.
//!
//! A box is a word `w` (centers in the J-hull of `w`) and a radius range.
//! Every interval in the box contains `[hi - r_lo, lo + r_lo]` and is no
//! longer than `2 r_hi`, which gives a certified density floor. Radii below
//! the reducible radius of the box are dropped since those intervals repeat
//! densities found at larger scales.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Geometry, Node};
use crate::error::{Error, Result};
use crate::ifs::IfsSystem;
use crate::interval::{round_down, Interval};
use crate::measure::{ConformalMeasure, DEFAULT_MAX_DEPTH};

pub const DEFAULT_BUDGET: usize = 20_000;
pub const DEFAULT_REL_GAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundOptions {
    /// Maximum number of box splits.
    pub budget: usize,
    /// Stop once the floor is within this fraction of the best upper bound.
    pub rel_gap: f64,
    pub max_depth: usize,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            rel_gap: DEFAULT_REL_GAP,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    /// Certified: `d_min >= value`.
    pub value: f64,
    /// Budget ran out before the gap closed.
    pub partial: bool,
    pub splits: usize,
    /// Smallest density upper bound met during the search.
    pub incumbent: f64,
}

struct Box {
    node: Node,
    r_lo: f64,
    r_hi: f64,
    floor: f64,
    seq: u64,
}

impl PartialEq for Box {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Box {}

impl PartialOrd for Box {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the smallest floor, oldest first.
impl Ord for Box {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .floor
            .total_cmp(&self.floor)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Lower bound on `d_min` with default options and the given split budget.
pub fn dmin_lower_bound(system: &IfsSystem, h: f64, budget: usize) -> Result<LowerBound> {
    let opts = LowerBoundOptions {
        budget,
        ..LowerBoundOptions::default()
    };
    dmin_lower_bound_with(system, h, &opts)
}

pub fn dmin_lower_bound_with(
    system: &IfsSystem,
    h: f64,
    opts: &LowerBoundOptions,
) -> Result<LowerBound> {
    if !(opts.rel_gap >= 0.0 && opts.rel_gap < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rel_gap must lie in [0, 1), got {}",
            opts.rel_gap
        )));
    }
    let mu = ConformalMeasure::new(system, h)?;
    let geo = Geometry::new(system);
    let mut search = Search {
        geo: &geo,
        mu: &mu,
        depth: opts.max_depth.max(1),
        incumbent: f64::INFINITY,
        heap: BinaryHeap::new(),
        seq: 0,
        pruned_floor: f64::INFINITY,
    };
    for c in [geo.hull.left(), geo.hull.right()] {
        for r in geo.radii(c, 32, 0.0) {
            search.probe(c, r);
        }
    }
    if opts.budget == 0 {
        return Ok(LowerBound {
            value: 0.0,
            partial: true,
            splits: 0,
            incumbent: search.incumbent,
        });
    }
    let root = Node::root(&geo);
    for k in 1..=geo.n {
        let child = root.child(&geo, k);
        let (lo, hi) = child.radius_range(&geo, 0.0);
        search.offer(child, lo, hi, opts.rel_gap);
    }
    let mut splits = 0;
    loop {
        let top = match search.heap.pop() {
            Some(b) => b,
            None => {
                return Ok(LowerBound {
                    value: search.pruned_floor.min(search.incumbent),
                    partial: false,
                    splits,
                    incumbent: search.incumbent,
                })
            }
        };
        let done = top.floor >= search.incumbent * (1.0 - opts.rel_gap);
        if done || splits >= opts.budget {
            return Ok(LowerBound {
                value: round_down(top.floor.min(search.pruned_floor), 2.0),
                partial: !done,
                splits,
                incumbent: search.incumbent,
            });
        }
        splits += 1;
        search.split(top, opts.rel_gap);
    }
}

struct Search<'a> {
    geo: &'a Geometry,
    mu: &'a ConformalMeasure,
    depth: usize,
    incumbent: f64,
    heap: BinaryHeap<Box>,
    seq: u64,
    // Smallest floor among discarded boxes.
    pruned_floor: f64,
}

impl Search<'_> {
    fn probe(&mut self, c: f64, r: f64) {
        let r = r.min(c.min(1.0 - c));
        if !(r > 0.0) {
            return;
        }
        let interval = Interval::centered(c, r);
        let tol = 1e-9 * interval.length().powf(self.mu.h());
        if let Ok(d) = self
            .mu
            .density(interval, self.depth, tol.max(f64::MIN_POSITIVE))
        {
            self.incumbent = self.incumbent.min(d.density_upper);
        }
    }

    fn offer(&mut self, node: Node, r_lo: f64, r_hi: f64, rel_gap: f64) {
        if !(r_lo <= r_hi) {
            return;
        }
        let c = node.map.apply(self.geo.hull.left());
        self.probe(c, (r_lo * r_hi).sqrt());
        let floor = node.density_floor(self.mu, r_lo, r_hi, self.depth);
        if floor >= self.incumbent * (1.0 - rel_gap) {
            self.pruned_floor = self.pruned_floor.min(floor);
            return;
        }
        self.seq += 1;
        self.heap.push(Box {
            node,
            r_lo,
            r_hi,
            floor,
            seq: self.seq,
        });
    }

    fn split(&mut self, b: Box, rel_gap: f64) {
        if b.node.hi - b.node.lo > b.r_hi - b.r_lo {
            for k in 1..=self.geo.n {
                let child = b.node.child(self.geo, k);
                let (lo, hi) = child.radius_range(self.geo, 0.0);
                self.offer(child, b.r_lo.max(lo), b.r_hi.min(hi), rel_gap);
            }
        } else {
            let mid = (b.r_lo * b.r_hi).sqrt();
            self.offer(b.node.clone(), b.r_lo, mid, rel_gap);
            self.offer(b.node, mid, b.r_hi, rel_gap);
        }
    }
}
