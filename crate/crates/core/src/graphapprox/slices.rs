//! Choice of the levels `s_j` and the hat functions glued over them.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ApproxBox, ApproxError};
use crate::geom::{hausdorff_distance, sample_fiber_with, Fiber, FiberOptions, GraphSurface};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceOptions {
    /// Uniform probe levels across the level range before refinement.
    pub probe_mesh: usize,
    /// Rays per fiber.
    pub fiber_mesh: usize,
    /// Hausdorff distance allowed between a level and its neighbours; the
    /// target epsilon when `None`.
    pub hausdorff_tol: Option<f64>,
    /// Bisection stops below this gap in `s` (relative to `1 + |s|`).
    pub min_gap: f64,
    /// Upper bound on the number of probed fibers.
    pub max_probes: usize,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            probe_mesh: 81,
            fiber_mesh: 256,
            hausdorff_tol: None,
            min_gap: 1e-12,
            max_probes: 4096,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlicePlan {
    pub s_levels: Vec<f64>,
    /// Half-width of the interval around each level that its hat lives in.
    pub deltas: Vec<f64>,
    /// The level range `I` where `K_s` is non-empty.
    pub interval: (f64, f64),
    /// Sampled fiber at every level.
    #[serde(skip)]
    pub fibers: Vec<Fiber>,
    /// Hausdorff threshold used to space the levels.
    pub hausdorff_tol: f64,
    /// Number of fibers sampled while probing.
    pub probes: usize,
}

impl SlicePlan {
    /// Non-zero hat values at `s` as `(level index, weight)`. The weights are
    /// non-negative and sum to one exactly; outside `I` the end hat is 1.
    pub fn weights(&self, s: f64) -> Vec<(usize, f64)> {
        let l = &self.s_levels;
        let n = l.len();
        if n == 1 || s <= l[0] {
            return vec![(0, 1.0)];
        }
        if s >= l[n - 1] {
            return vec![(n - 1, 1.0)];
        }
        let j = l.partition_point(|&x| x <= s) - 1;
        let a = (l[j + 1] - s) / (l[j + 1] - l[j]);
        if a == 1.0 {
            vec![(j, 1.0)]
        } else if a == 0.0 {
            vec![(j + 1, 1.0)]
        } else {
            vec![(j, a), (j + 1, 1.0 - a)]
        }
    }

    /// Value of the `j`-th hat at `s`.
    pub fn hat(&self, j: usize, s: f64) -> f64 {
        self.weights(s)
            .into_iter()
            .find(|&(k, _)| k == j)
            .map_or(0.0, |(_, w)| w)
    }
}

fn check_surface(surface: &GraphSurface) -> Result<(), ApproxError> {
    if surface.nz() != 1 || !surface.is_real_valued() {
        return Err(ApproxError::UnsupportedSurface);
    }
    Ok(())
}

/// Range of `rho` over `|z| <= radius`, clipped to `[s_lo, s_hi]`.
fn level_range(surface: &GraphSurface, k: &ApproxBox) -> Option<(f64, f64)> {
    let (nr, nt) = (200, 400);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=nr {
        let r = k.radius * i as f64 / nr as f64;
        for j in 0..nt {
            let s = surface
                .rho(&[C64::from_polar(r, TAU * j as f64 / nt as f64)])
                .re;
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let (lo, hi) = (lo.max(k.s_lo), hi.min(k.s_hi));
    (lo <= hi).then_some((lo, hi))
}

struct Prober<'a> {
    surface: &'a GraphSurface,
    fopts: FiberOptions,
    probes: usize,
    max_probes: usize,
}

impl Prober<'_> {
    fn fiber(&mut self, s: f64) -> Result<Fiber, ApproxError> {
        self.probes += 1;
        if self.probes > self.max_probes {
            return Err(ApproxError::Options(format!(
                "more than {} fibers needed to resolve the level range",
                self.max_probes
            )));
        }
        Ok(sample_fiber_with(self.surface, s, &self.fopts)?)
    }
}

/// Hausdorff distance between the sampled sets.
fn dh(a: &Fiber, b: &Fiber) -> f64 {
    hausdorff_distance(&a.points, &b.points).unwrap_or(f64::INFINITY)
}

/// Largest gap a sampled fiber can leave along the true curve.
fn sampling_noise(opts: &FiberOptions, radius: f64) -> f64 {
    (radius * TAU / opts.mesh as f64).hypot(radius / opts.circles as f64)
}

/// Samples fibers across the level range of `K` and refines by bisection until
/// neighbouring fibers are within `tol` in Hausdorff distance. A gap that
/// survives bisection down to `min_gap` is a failure of condition (*).
///
/// Returns the sorted non-empty fibers.
pub fn probe_condition_star(
    surface: &GraphSurface,
    k: &ApproxBox,
    tol: f64,
    opts: &SliceOptions,
) -> Result<(Vec<Fiber>, usize), ApproxError> {
    check_surface(surface)?;
    let (lo, hi) = level_range(surface, k).ok_or(ApproxError::EmptyLevelRange {
        lo: k.s_lo,
        hi: k.s_hi,
    })?;
    let fopts = FiberOptions::new(opts.fiber_mesh).radius(k.radius);
    let tol = tol.max(2.0 * sampling_noise(&fopts, k.radius));
    let mut p = Prober {
        surface,
        fopts,
        probes: 0,
        max_probes: opts.max_probes,
    };
    let m = opts.probe_mesh.max(2);
    let mut coarse = Vec::new();
    for i in 0..m {
        let s = if hi > lo {
            lo + (hi - lo) * i as f64 / (m - 1) as f64
        } else {
            lo
        };
        let f = p.fiber(s)?;
        if !f.is_empty() {
            coarse.push(f);
        }
        if hi == lo {
            break;
        }
    }
    if coarse.is_empty() {
        return Err(ApproxError::EmptyLevelRange { lo, hi });
    }
    let mut out = vec![coarse[0].clone()];
    for w in coarse.windows(2) {
        refine(&mut p, &w[0], &w[1], tol, opts.min_gap, &mut out)?;
        out.push(w[1].clone());
    }
    Ok((out, p.probes))
}

/// Pushes the fibers strictly between `a` and `b` needed to bring consecutive
/// Hausdorff distances below `tol`.
fn refine(
    p: &mut Prober,
    a: &Fiber,
    b: &Fiber,
    tol: f64,
    min_gap: f64,
    out: &mut Vec<Fiber>,
) -> Result<(), ApproxError> {
    let d = dh(a, b);
    if d <= tol {
        return Ok(());
    }
    let gap = b.s - a.s;
    if gap <= min_gap * (1.0 + a.s.abs().max(b.s.abs())) {
        return Err(ApproxError::ConditionStarViolated {
            s: 0.5 * (a.s + b.s),
            jump: d,
            gap,
        });
    }
    let mid = p.fiber(0.5 * (a.s + b.s))?;
    if mid.is_empty() {
        // the level set disappears inside the gap: a jump to the empty set
        return Err(ApproxError::ConditionStarViolated {
            s: mid.s,
            jump: d,
            gap,
        });
    }
    refine(p, a, &mid, tol, min_gap, out)?;
    out.push(mid.clone());
    refine(p, &mid, b, tol, min_gap, out)
}

/// Levels spaced so that every probed fiber between two neighbouring levels is
/// within the Hausdorff tolerance of both, with the hats built on them.
pub fn select_slices(
    surface: &GraphSurface,
    k: &ApproxBox,
    epsilon: f64,
    opts: &SliceOptions,
) -> Result<SlicePlan, ApproxError> {
    if !(epsilon > 0.0) {
        return Err(ApproxError::Options(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    let fopts = FiberOptions::new(opts.fiber_mesh).radius(k.radius);
    let tol = opts
        .hausdorff_tol
        .unwrap_or(epsilon)
        .max(2.0 * sampling_noise(&fopts, k.radius));
    let (probed, probes) = probe_condition_star(surface, k, tol, opts)?;
    let n = probed.len();
    let mut idx = vec![0];
    let mut j = 0;
    while j + 1 < n {
        let mut next = j + 1;
        while next + 1 < n && fits_between(&probed, j, next + 1, tol) {
            next += 1;
        }
        idx.push(next);
        j = next;
    }
    let s_levels: Vec<f64> = idx.iter().map(|&i| probed[i].s).collect();
    let l = s_levels.len();
    let deltas = (0..l)
        .map(|j| {
            let left = if j > 0 {
                s_levels[j] - s_levels[j - 1]
            } else {
                0.0
            };
            let right = if j + 1 < l {
                s_levels[j + 1] - s_levels[j]
            } else {
                0.0
            };
            // open interval strictly containing the hat support
            left.max(right) * (1.0 + 1e-9) + f64::MIN_POSITIVE
        })
        .collect();
    Ok(SlicePlan {
        interval: (probed[0].s, probed[n - 1].s),
        fibers: idx.iter().map(|&i| probed[i].clone()).collect(),
        s_levels,
        deltas,
        hausdorff_tol: tol,
        probes,
    })
}

/// Whether every probed fiber in `a..=b` is within `tol` of both ends.
fn fits_between(probed: &[Fiber], a: usize, b: usize, tol: f64) -> bool {
    (a..=b).all(|i| dh(&probed[i], &probed[a]) <= tol && dh(&probed[i], &probed[b]) <= tol)
}
