//! Largest singularity-free square, conditioning-bounded square growth,
//! and the resulting performance index in the workspace cross-section.
//!
//! The pipeline works in the (rho, z) half-plane. First the singularity
//! locus is sampled and the largest square clear of it (Chebyshev
//! clearance) is optimized by direct search. That square sizes a scan
//! lattice on which a second search grows the largest square whose lattice
//! points are all reachable with conditioning index at least a threshold.
//! The performance index is the grown edge divided by the maximal reach,
//! a dimensionless, scale-invariant score.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::kinematics::{conditioning_index, default_ik_tol, inverse_kinematics, jacobian};
use crate::optimize::{hooke_jeeves, HjOptions};
use crate::singularity::{axis_crossings, max_reach, singular_set, SingularSampleSet};
use crate::types::{CartesianPoint, CrossSectionPoint, GeometryParams, Square};

/// max(|delta rho|, |delta z|): the radius metric of axis-aligned squares.
pub fn chebyshev_distance(p: &CrossSectionPoint, q: &CrossSectionPoint) -> f64 {
    (p.rho - q.rho).abs().max((p.z - q.z).abs())
}

/// Minimal Chebyshev distance from `center` to the singular samples. The
/// largest singularity-free square centered there has edge 2 * clearance
/// (up to the sample-set gap bound).
pub fn clearance(center: &CrossSectionPoint, s: &SingularSampleSet) -> f64 {
    assert!(!s.is_empty(), "clearance needs a nonempty sample set");
    s.points
        .iter()
        .map(|p| chebyshev_distance(center, p))
        .fold(f64::INFINITY, f64::min)
}

/// Widest reachable interval between consecutive z = 0 crossings of the
/// singular image, as (midpoint rho, half-length). Reachability is checked
/// at the interval midpoint.
fn free_segment(g: &GeometryParams, s: &SingularSampleSet) -> Result<(f64, f64)> {
    let crossings = axis_crossings(s, None)?;
    let ik_tol = default_ik_tol(g);
    let mut best: Option<(f64, f64)> = None;
    for pair in crossings.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        let half = 0.5 * (pair[1] - pair[0]);
        let target = CartesianPoint {
            x: mid,
            y: 0.0,
            z: 0.0,
        };
        if inverse_kinematics(g, &target, ik_tol).is_empty() {
            continue;
        }
        if best.map_or(true, |(_, bh)| half > bh) {
            best = Some((mid, half));
        }
    }
    best.ok_or(Error::NoFreeSegment)
}

/// Start point for the free-square search: the midpoint (rho0, 0) of the
/// widest reachable z = 0 interval between consecutive singular crossings.
pub fn initial_center(g: &GeometryParams, s: &SingularSampleSet) -> Result<CrossSectionPoint> {
    let (mid, _) = free_segment(g, s)?;
    Ok(CrossSectionPoint::new(mid, 0.0))
}

/// Direct-search maximization of [`clearance`] over the square center,
/// started at [`initial_center`]. Centers with negative rho or an
/// unreachable midpoint are infeasible. Returns the optimized square
/// (half_edge = best clearance); its clearance never falls below the
/// start's.
pub fn max_free_square(
    g: &GeometryParams,
    s: &SingularSampleSet,
    opts: &HjOptions,
) -> Result<Square> {
    search_free_square(g, s, opts).map(|(sq, _)| sq)
}

/// [`max_free_square`] plus the number of objective evaluations spent.
fn search_free_square(
    g: &GeometryParams,
    s: &SingularSampleSet,
    opts: &HjOptions,
) -> Result<(Square, usize)> {
    let (mid, _) = free_segment(g, s)?;
    let ik_tol = default_ik_tol(g);
    let mut evals = 0usize;
    let result = hooke_jeeves(
        |x| {
            evals += 1;
            if x[0] < 0.0 {
                return f64::NEG_INFINITY;
            }
            let target = CartesianPoint {
                x: x[0],
                y: 0.0,
                z: x[1],
            };
            if inverse_kinematics(g, &target, ik_tol).is_empty() {
                return f64::NEG_INFINITY;
            }
            clearance(&CrossSectionPoint::new(x[0], x[1]), s)
        },
        &[mid, 0.0],
        opts,
    );
    let square = Square {
        center: CrossSectionPoint::new(result.x[0], result.x[1]),
        half_edge: result.value.max(0.0),
    };
    Ok((square, evals))
}

/// How the conditioning index is aggregated across the inverse-kinematic
/// branches of a point. `Min` (default) guarantees the dexterity bound at
/// every posture; `Max` requires it on the best posture only; `First`
/// takes the first branch in canonical order. For types B1, C and E
/// (r3 = 0) all branches agree to machine precision, so the choice is
/// immaterial; for G and H (r3 > 0) the two posture pairs genuinely split
/// (spreads up to ~4e-2 observed), and `Min` is the conservative choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatePolicy {
    Min,
    Max,
    First,
}

/// Conditioning index of a cross-section point: k^-1 evaluated at every
/// inverse-kinematic solution of (rho, 0, z) and aggregated per policy.
pub fn conditioning_at(
    g: &GeometryParams,
    p: &CrossSectionPoint,
    aggregate: AggregatePolicy,
) -> Result<f64> {
    let target = CartesianPoint {
        x: p.rho,
        y: 0.0,
        z: p.z,
    };
    let sols = inverse_kinematics(g, &target, default_ik_tol(g));
    if sols.is_empty() {
        return Err(Error::Unreachable { rho: p.rho, z: p.z });
    }
    let mut ks = sols.iter().map(|q| conditioning_index(&jacobian(g, q)));
    Ok(match aggregate {
        AggregatePolicy::Min => ks.fold(f64::INFINITY, f64::min),
        AggregatePolicy::Max => ks.fold(0.0, f64::max),
        AggregatePolicy::First => ks.next().unwrap(),
    })
}

/// Largest admissible square edge around `center` on a lattice of pitch
/// `scan_step` anchored at the center. The square grows one lattice ring
/// at a time while every ring point is reachable with conditioning index
/// at least `k_min_inv`; each ring is evaluated once. Fails with
/// [`Error::ZeroEdge`] when the center itself is inadmissible.
pub fn grow_square(
    g: &GeometryParams,
    center: &CrossSectionPoint,
    k_min_inv: f64,
    scan_step: f64,
) -> Result<f64> {
    assert!(
        k_min_inv > 0.0 && k_min_inv <= 1.0,
        "k_min_inv must lie in (0, 1]"
    );
    assert!(
        scan_step > 0.0 && scan_step.is_finite(),
        "scan_step must be positive"
    );
    let mut lattice = 0usize;
    grow_edge(
        g,
        center,
        k_min_inv,
        scan_step,
        AggregatePolicy::Min,
        &mut lattice,
    )
}

/// Ring-growth kernel shared by [`grow_square`] and [`compute_rdw`];
/// counts lattice-point evaluations into `lattice`.
fn grow_edge(
    g: &GeometryParams,
    center: &CrossSectionPoint,
    k_min_inv: f64,
    h: f64,
    aggregate: AggregatePolicy,
    lattice: &mut usize,
) -> Result<f64> {
    let mut admissible = |i: i64, j: i64| -> bool {
        *lattice += 1;
        let p = CrossSectionPoint::new(center.rho + i as f64 * h, center.z + j as f64 * h);
        matches!(conditioning_at(g, &p, aggregate), Ok(k) if k >= k_min_inv)
    };
    if !admissible(0, 0) {
        return Err(Error::ZeroEdge);
    }
    let mut r: i64 = 1;
    loop {
        let mut ring_ok = true;
        'ring: for i in -r..=r {
            for j in -r..=r {
                if i.abs().max(j.abs()) != r {
                    continue;
                }
                if !admissible(i, j) {
                    ring_ok = false;
                    break 'ring;
                }
            }
        }
        if !ring_ok {
            // Rings 0..r-1 passed: the largest square whose lattice points
            // all lie within them has edge (2r - 1) * h.
            return Ok((2 * r - 1) as f64 * h);
        }
        r += 1;
    }
}

/// Resolution parameters for [`compute_rdw`].
#[derive(Debug, Clone, Copy)]
pub struct RdwConfig {
    /// Grid size for the singularity scan.
    pub singular_grid_n: usize,
    /// Grid size for the maximal-reach scan.
    pub reach_grid_n: usize,
    /// Singular-sample spacing = rho_max / spacing_div.
    pub spacing_div: usize,
    /// Growth-lattice pitch = free edge / n_scan.
    pub n_scan: usize,
    /// Evaluation budget per direct search.
    pub hj_max_evals: usize,
    /// Branch aggregation for the conditioning index.
    pub aggregate: AggregatePolicy,
}

impl Default for RdwConfig {
    fn default() -> Self {
        Self {
            singular_grid_n: 1024,
            reach_grid_n: 1024,
            spacing_div: 500,
            n_scan: 100,
            hj_max_evals: 10_000,
            aggregate: AggregatePolicy::Min,
        }
    }
}

impl RdwConfig {
    /// Reduced per-cell resolution for parameter sweeps; the sweep-level
    /// tolerances account for it.
    pub fn sweep() -> Self {
        Self {
            singular_grid_n: 512,
            reach_grid_n: 256,
            n_scan: 60,
            ..Self::default()
        }
    }

    /// Doubles every resolution parameter (convergence checks).
    pub fn doubled(&self) -> Self {
        Self {
            singular_grid_n: 2 * self.singular_grid_n,
            reach_grid_n: 2 * self.reach_grid_n,
            spacing_div: 2 * self.spacing_div,
            n_scan: 2 * self.n_scan,
            ..*self
        }
    }
}

/// Diagnostics counters of one [`compute_rdw`] run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RdwEvals {
    /// Singular samples found by the singularity scan.
    pub singular_samples: usize,
    /// Clearance evaluations in the free-square search.
    pub clearance: usize,
    /// Growth evaluations (distinct centers) in the second search.
    pub growth: usize,
    /// Lattice conditioning evaluations across all growths.
    pub lattice: usize,
}

/// Full result of the pipeline.
#[derive(Debug, Clone)]
pub struct RdwResult {
    /// Largest singularity-free square found.
    pub free_square: Square,
    /// Largest conditioning-bounded square found. Its center is optimized
    /// independently, so its edge is not forced below the free square's.
    pub rdw_square: Square,
    /// Conditioning threshold used.
    pub k_min_inv: f64,
    /// Maximal reach of the operation point.
    pub rho_max: f64,
    /// Performance index: 2 * rdw_square.half_edge / rho_max.
    pub eta: f64,
    /// Growth-lattice pitch actually used.
    pub scan_step: f64,
    /// Work counters.
    pub evals: RdwEvals,
}

/// Runs the full pipeline: singularity sampling, free-square search,
/// conditioning-bounded growth search, maximal reach, performance index.
/// Deterministic for a fixed configuration.
pub fn compute_rdw(g: &GeometryParams, k_min_inv: f64, config: &RdwConfig) -> Result<RdwResult> {
    assert!(
        k_min_inv > 0.0 && k_min_inv <= 1.0,
        "k_min_inv must lie in (0, 1]"
    );
    assert!(config.spacing_div >= 10, "spacing_div must be at least 10");
    assert!(config.n_scan >= 10, "n_scan must be at least 10");
    let scale = g.length_scale();

    let rho_max = max_reach(g, config.reach_grid_n);
    let spacing = rho_max / config.spacing_div as f64;
    let samples = singular_set(g, config.singular_grid_n, spacing)?;

    let (_, seg_half) = free_segment(g, &samples)?;
    let free_opts = HjOptions::new(
        (0.1 * seg_half).max(4e-5 * scale),
        1e-5 * scale,
        0.5,
        config.hj_max_evals,
    )
    .expect("free-square search options");
    let (free_square, clearance_evals) = search_free_square(g, &samples, &free_opts)?;
    let a = free_square.edge();

    let mut evals = RdwEvals {
        singular_samples: samples.len(),
        clearance: clearance_evals,
        ..RdwEvals::default()
    };
    if a <= 0.0 {
        // No clear area around any feasible center: the index is zero.
        return Ok(RdwResult {
            rdw_square: Square {
                center: free_square.center,
                half_edge: 0.0,
            },
            free_square,
            k_min_inv,
            rho_max,
            eta: 0.0,
            scan_step: 0.0,
            evals,
        });
    }

    let h = a / config.n_scan as f64;
    let initial_step = 0.1 * (0.5 * a);
    let min_step = (h / 8.0).max(1e-5 * scale).min(0.5 * initial_step);
    let grow_opts = HjOptions::new(initial_step, min_step, 0.5, config.hj_max_evals)
        .expect("growth search options");

    // The growth objective is expensive and the direct search revisits
    // centers; memoize by exact coordinates (bit patterns).
    let mut memo: HashMap<(u64, u64), f64> = HashMap::new();
    let mut growth_evals = 0usize;
    let mut lattice_evals = 0usize;
    let grown = hooke_jeeves(
        |x| {
            let key = (x[0].to_bits(), x[1].to_bits());
            if let Some(&v) = memo.get(&key) {
                return v;
            }
            growth_evals += 1;
            let c = CrossSectionPoint::new(x[0], x[1]);
            let v = grow_edge(g, &c, k_min_inv, h, config.aggregate, &mut lattice_evals)
                .unwrap_or(0.0);
            memo.insert(key, v);
            v
        },
        &[free_square.center.rho, free_square.center.z],
        &grow_opts,
    );
    evals.growth = growth_evals;
    evals.lattice = lattice_evals;

    let rdw_square = Square {
        center: CrossSectionPoint::new(grown.x[0], grown.x[1]),
        half_edge: 0.5 * grown.value.max(0.0),
    };
    let eta = 2.0 * rdw_square.half_edge / rho_max;
    debug_assert!(eta.is_finite());
    Ok(RdwResult {
        free_square,
        rdw_square,
        k_min_inv,
        rho_max,
        eta,
        scan_step: h,
        evals,
    })
}
