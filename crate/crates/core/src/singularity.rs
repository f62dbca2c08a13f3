//! Sampling of the singularity locus det J = 0 and its image in the
//! (rho, z) workspace cross-section.
//!
//! The determinant does not depend on theta1, so the locus lives on the
//! (theta2, theta3) torus. A grid scan classifies every node as negative,
//! positive, or on the locus (within the refinement tolerance). Grid edges
//! whose endpoints have opposite strict signs are refined by bisection;
//! on-locus nodes are kept directly, which covers branches that run along
//! grid lines or touch zero without a sign change. Each root maps through
//! the forward kinematics into the cross-section. Cells whose sample
//! images are farther apart than the requested spacing are subdivided
//! recursively, which bounds the gap between adjacent samples along any
//! curve branch.
//!
//! The image of the locus contains the workspace boundaries (critical
//! values of the kinematic map), so no separate boundary treatment is
//! needed downstream.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::kinematics::{det_from_trig, planar_terms, section_from_trig};
use crate::optimize::{hooke_jeeves, HjOptions};
use crate::types::{wrap_angle, CrossSectionPoint, GeometryParams};

/// Point cloud on the singularity locus, in cross-section coordinates with
/// joint-space preimages.
#[derive(Debug, Clone)]
pub struct SingularSampleSet {
    /// Sample images, sorted by (rho, z, theta2, theta3).
    pub points: Vec<CrossSectionPoint>,
    /// Parallel list of (theta2, theta3) preimages in [-pi, pi).
    pub preimages: Vec<(f64, f64)>,
    /// Grid size the scan started from.
    pub resolution: usize,
    /// Upper bound on the Euclidean image distance between adjacent samples
    /// along any curve branch (measured per scan cell after subdivision).
    pub max_gap: f64,
}

impl SingularSampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes the samples as CSV with header `rho,z,theta2,theta3`, values
    /// at 9 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "rho,z,theta2,theta3")?;
        for (p, (t2, t3)) in self.points.iter().zip(self.preimages.iter()) {
            writeln!(
                w,
                "{},{},{},{}",
                sig(p.rho, 9),
                sig(p.z, 9),
                sig(*t2, 9),
                sig(*t3, 9)
            )?;
        }
        Ok(())
    }
}

/// One scan cell: corner angles and corner determinant values.
/// `d[a][b]` is the determinant at `(t2[a], t3[b])`.
#[derive(Debug, Clone, Copy)]
struct Cell {
    t2: [f64; 2],
    t3: [f64; 2],
    d: [[f64; 2]; 2],
}

const MAX_DEPTH: usize = 16;
const BISECT_ITERS: usize = 64;

/// Samples the singularity locus on a `grid_n` x `grid_n` scan of the
/// (theta2, theta3) torus, refining every determinant sign change to
/// |det J| <= 1e-9 * scale^3 and subdividing cells until adjacent sample
/// images are closer than `spacing`.
///
/// Degenerate geometries whose determinant vanishes on most of the torus
/// (for example a bare wrist with every other length zero) are rejected
/// with [`Error::EmptySingularSet`], as are geometries where no locus
/// sample is found at all.
pub fn singular_set(g: &GeometryParams, grid_n: usize, spacing: f64) -> Result<SingularSampleSet> {
    assert!(grid_n >= 64, "grid_n must be at least 64");
    assert!(
        spacing > 0.0 && spacing.is_finite(),
        "spacing must be positive"
    );
    let scale = g.length_scale();
    let det_tol = 1e-9 * scale * scale * scale;

    // One shared angle table: theta_k = -pi + k * (2*pi/grid_n), k = 0..=grid_n.
    let h = 2.0 * PI / grid_n as f64;
    let theta: Vec<f64> = (0..=grid_n).map(|k| -PI + k as f64 * h).collect();
    let trig: Vec<(f64, f64)> = theta.iter().map(|t| t.sin_cos()).collect();

    let n1 = grid_n + 1;
    let mut det = vec![0.0f64; n1 * n1];
    let mut zero_nodes = 0usize;
    for (i, &(s2, c2)) in trig.iter().enumerate() {
        for (j, &(s3, c3)) in trig.iter().enumerate() {
            let d = det_from_trig(g, s2, c2, s3, c3);
            if d.abs() <= det_tol {
                zero_nodes += 1;
            }
            det[i * n1 + j] = d;
        }
    }
    // det J is analytic on the torus: vanishing on half the nodes means it
    // vanishes identically and the locus is not a curve.
    if 2 * zero_nodes > n1 * n1 {
        return Err(Error::EmptySingularSet);
    }

    let mut out: Vec<(CrossSectionPoint, f64, f64)> = Vec::new();
    let mut max_gap = 0.0f64;
    for i in 0..grid_n {
        for j in 0..grid_n {
            let cell = Cell {
                t2: [theta[i], theta[i + 1]],
                t3: [theta[j], theta[j + 1]],
                d: [
                    [det[i * n1 + j], det[i * n1 + j + 1]],
                    [det[(i + 1) * n1 + j], det[(i + 1) * n1 + j + 1]],
                ],
            };
            process_cell(g, det_tol, spacing, cell, 0, &mut out, &mut max_gap);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySingularSet);
    }
    if max_gap == 0.0 {
        // Only isolated samples were found; fall back to the requested
        // bound so downstream band defaults stay usable.
        max_gap = spacing;
    }

    out.sort_by(|a, b| {
        (a.0.rho, a.0.z, a.1, a.2)
            .partial_cmp(&(b.0.rho, b.0.z, b.1, b.2))
            .unwrap()
    });
    let mut points: Vec<CrossSectionPoint> = Vec::with_capacity(out.len());
    let mut preimages: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (p, t2, t3) in out {
        if let (Some(lp), Some(&(l2, l3))) = (points.last(), preimages.last()) {
            if (p.rho - lp.rho).abs() <= 1e-9
                && (p.z - lp.z).abs() <= 1e-9
                && (t2 - l2).abs() <= 1e-9
                && (t3 - l3).abs() <= 1e-9
            {
                continue;
            }
        }
        points.push(p);
        preimages.push((t2, t3));
    }

    Ok(SingularSampleSet {
        points,
        preimages,
        resolution: grid_n,
        max_gap,
    })
}

/// Collects refined samples for one cell (sign-change bisections plus
/// on-locus corners), subdividing when the sample images are farther apart
/// than `spacing`.
fn process_cell(
    g: &GeometryParams,
    det_tol: f64,
    spacing: f64,
    cell: Cell,
    depth: usize,
    out: &mut Vec<(CrossSectionPoint, f64, f64)>,
    max_gap: &mut f64,
) {
    let crosses = |da: f64, db: f64| {
        (da < -det_tol && db > det_tol) || (da > det_tol && db < -det_tol)
    };
    let mut samples: Vec<(CrossSectionPoint, f64, f64)> = Vec::with_capacity(4);

    // Horizontal edges (theta2 varies, theta3 fixed), low -> high.
    for b in 0..2 {
        let (da, db) = (cell.d[0][b], cell.d[1][b]);
        if crosses(da, db) {
            let t3 = cell.t3[b];
            let (s3, c3) = t3.sin_cos();
            let f = |t2: f64| {
                let (s2, c2) = t2.sin_cos();
                det_from_trig(g, s2, c2, s3, c3)
            };
            let t2 = bisect(cell.t2[0], da, cell.t2[1], det_tol, f);
            let (s2, c2) = t2.sin_cos();
            samples.push((section_from_trig(g, s2, c2, s3, c3), t2, t3));
        }
    }
    // Vertical edges (theta3 varies, theta2 fixed).
    for a in 0..2 {
        let (da, db) = (cell.d[a][0], cell.d[a][1]);
        if crosses(da, db) {
            let t2 = cell.t2[a];
            let (s2, c2) = t2.sin_cos();
            let f = |t3: f64| {
                let (s3, c3) = t3.sin_cos();
                det_from_trig(g, s2, c2, s3, c3)
            };
            let t3 = bisect(cell.t3[0], da, cell.t3[1], det_tol, f);
            let (s3, c3) = t3.sin_cos();
            samples.push((section_from_trig(g, s2, c2, s3, c3), t2, t3));
        }
    }
    // Corners that sit on the locus directly; these cover branches the
    // sign test cannot see, e.g. roots exactly on grid lines or double
    // roots without a sign change.
    for a in 0..2 {
        for b in 0..2 {
            if cell.d[a][b].abs() <= det_tol {
                let t2 = cell.t2[a];
                let t3 = cell.t3[b];
                let (s2, c2) = t2.sin_cos();
                let (s3, c3) = t3.sin_cos();
                samples.push((section_from_trig(g, s2, c2, s3, c3), t2, t3));
            }
        }
    }

    if samples.len() >= 2 {
        let mut gap = 0.0f64;
        for p in 0..samples.len() {
            for q in (p + 1)..samples.len() {
                let dr = samples[p].0.rho - samples[q].0.rho;
                let dz = samples[p].0.z - samples[q].0.z;
                gap = gap.max((dr * dr + dz * dz).sqrt());
            }
        }
        if gap > spacing && depth < MAX_DEPTH {
            // Too coarse here: discard and redo on the 2x2 subdivision.
            let m2 = 0.5 * (cell.t2[0] + cell.t2[1]);
            let m3 = 0.5 * (cell.t3[0] + cell.t3[1]);
            let eval = |t2: f64, t3: f64| {
                let (s2, c2) = t2.sin_cos();
                let (s3, c3) = t3.sin_cos();
                det_from_trig(g, s2, c2, s3, c3)
            };
            let dm0 = eval(m2, cell.t3[0]);
            let dm1 = eval(m2, cell.t3[1]);
            let d0m = eval(cell.t2[0], m3);
            let d1m = eval(cell.t2[1], m3);
            let dmm = eval(m2, m3);
            let subcells = [
                Cell {
                    t2: [cell.t2[0], m2],
                    t3: [cell.t3[0], m3],
                    d: [[cell.d[0][0], d0m], [dm0, dmm]],
                },
                Cell {
                    t2: [m2, cell.t2[1]],
                    t3: [cell.t3[0], m3],
                    d: [[dm0, dmm], [cell.d[1][0], d1m]],
                },
                Cell {
                    t2: [cell.t2[0], m2],
                    t3: [m3, cell.t3[1]],
                    d: [[d0m, cell.d[0][1]], [dmm, dm1]],
                },
                Cell {
                    t2: [m2, cell.t2[1]],
                    t3: [m3, cell.t3[1]],
                    d: [[dmm, dm1], [d1m, cell.d[1][1]]],
                },
            ];
            for sub in subcells {
                process_cell(g, det_tol, spacing, sub, depth + 1, out, max_gap);
            }
            return;
        }
        *max_gap = max_gap.max(gap);
    }

    for (p, t2, t3) in samples {
        out.push((p, wrap_angle(t2), wrap_angle(t3)));
    }
}

/// Bisection for a sign change of `f` between `a` (where `f` evaluates to
/// `fa`) and `b`, stopping once |f| <= tol. The midpoint sequence is
/// symmetric in the endpoints, so shared cell edges refine to identical
/// samples.
fn bisect(a: f64, fa: f64, b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    // Keep the invariant f(lo) < 0 < f(hi).
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut mid = 0.5 * (a + b);
    for _ in 0..BISECT_ITERS {
        mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= tol {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Radii of the z = 0 crossings of the singular image: samples with
/// |z| <= band are clustered along rho (single linkage, break at gaps
/// larger than band) and each cluster is represented by its sample of
/// smallest |z| (ties broken toward smaller rho). `band` defaults to
/// `2 * max_gap`.
pub fn axis_crossings(s: &SingularSampleSet, band: Option<f64>) -> Result<Vec<f64>> {
    let band = band.unwrap_or(2.0 * s.max_gap);
    assert!(band > 0.0, "band must be positive");
    let mut near: Vec<(f64, f64)> = s
        .points
        .iter()
        .filter(|p| p.z.abs() <= band)
        .map(|p| (p.rho, p.z))
        .collect();
    if near.is_empty() {
        return Err(Error::EmptyCrossings);
    }
    near.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut crossings = Vec::new();
    let mut cluster_start = 0;
    for idx in 1..=near.len() {
        let cluster_ends = idx == near.len() || near[idx].0 - near[idx - 1].0 > band;
        if cluster_ends {
            let rep = near[cluster_start..idx]
                .iter()
                .min_by(|p, q| (p.1.abs(), p.0).partial_cmp(&(q.1.abs(), q.0)).unwrap())
                .unwrap();
            crossings.push(rep.0);
            cluster_start = idx;
        }
    }
    Ok(crossings)
}

/// Maximal reach: the largest distance of the operation point from the base
/// origin, over all configurations. Grid scan over (theta2, theta3) at
/// theta1 = 0 plus pattern-search refinement; relative accuracy 1e-6.
pub fn max_reach(g: &GeometryParams, grid_n: usize) -> f64 {
    assert!(grid_n >= 64, "grid_n must be at least 64");
    let reach_sq = |t2: f64, t3: f64| {
        let (s2, c2) = t2.sin_cos();
        let (s3, c3) = t3.sin_cos();
        let t = planar_terms(g, s2, c2, s3, c3);
        t.a * t.a + t.b * t.b + t.v * t.v
    };

    let h = 2.0 * PI / grid_n as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..grid_n {
        let t2 = -PI + i as f64 * h;
        for j in 0..grid_n {
            let t3 = -PI + j as f64 * h;
            let r = reach_sq(t2, t3);
            if r > best.0 {
                best = (r, t2, t3);
            }
        }
    }

    let opts = HjOptions::new(h, 1e-5, 0.5, 4_000).expect("valid reach refinement options");
    let refined = hooke_jeeves(|x| reach_sq(x[0], x[1]), &[best.1, best.2], &opts);
    refined.value.max(best.0).sqrt()
}
