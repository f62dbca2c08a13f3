//! Design-plane sweeps: performance index per grid node of a 2-D parameter
//! space, isocontour extraction, and the CSV/SVG artifact formats.
//!
//! Every named manipulator type has a canonical two-parameter design plane
//! (the remaining lengths are zero or fixed to 1). A sweep evaluates the
//! full pipeline at each grid node; nodes whose geometry falls outside the
//! type (or whose computation fails) are masked with a reason instead of
//! aborting the sweep. Nodes are independent, so they evaluate in parallel
//! with position-addressed results: the output is identical regardless of
//! worker count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::sig;
use crate::rdw::{compute_rdw, RdwConfig};
use crate::types::{CrossSectionPoint, ManipulatorType};

/// One design-plane axis: an inclusive arithmetic progression of positive
/// parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "axis {name}: bounds and step must be finite"
            )));
        }
        if min <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axis {name}: min must be positive (got {min}); zero lengths change the type"
            )));
        }
        if max <= min {
            return Err(Error::InvalidArgument(format!(
                "axis {name}: max must exceed min (got {min}..{max})"
            )));
        }
        if step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "axis {name}: step must be positive (got {step})"
            )));
        }
        Ok(Axis {
            name: name.to_string(),
            min,
            max,
            step,
        })
    }

    /// Grid values min, min+step, ... up to max (inclusive within rounding).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

/// The two swept axes of a design plane.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: [Axis; 2],
}

impl GridSpec {
    /// Square grid over the type's canonical design plane.
    pub fn for_type(kind: ManipulatorType, min: f64, max: f64, step: f64) -> Result<Self> {
        let names = kind.sweep_axes().ok_or_else(|| {
            Error::InvalidArgument(format!("type {kind} has no design plane to sweep"))
        })?;
        Ok(GridSpec {
            axes: [
                Axis::new(names[0], min, max, step)?,
                Axis::new(names[1], min, max, step)?,
            ],
        })
    }
}

/// Pipeline outputs kept per valid grid node.
#[derive(Debug, Clone, Copy)]
pub struct CellRecord {
    pub eta: f64,
    pub a_rdw: f64,
    pub rho_max: f64,
    pub center: CrossSectionPoint,
}

/// A grid node either carries a record or a mask reason.
#[derive(Debug, Clone)]
pub enum CellOutcome {
    Valid(CellRecord),
    Masked(String),
}

/// Field of performance-index records over a design-plane grid, stored
/// row-major with the first axis outermost.
#[derive(Debug, Clone)]
pub struct EtaField {
    pub grid: GridSpec,
    pub p1_values: Vec<f64>,
    pub p2_values: Vec<f64>,
    pub cells: Vec<CellOutcome>,
}

impl EtaField {
    pub fn n1(&self) -> usize {
        self.p1_values.len()
    }

    pub fn n2(&self) -> usize {
        self.p2_values.len()
    }

    pub fn outcome(&self, i: usize, j: usize) -> &CellOutcome {
        &self.cells[i * self.n2() + j]
    }

    /// Performance index at node (i, j), or `None` when masked.
    pub fn eta(&self, i: usize, j: usize) -> Option<f64> {
        match self.outcome(i, j) {
            CellOutcome::Valid(rec) => Some(rec.eta),
            CellOutcome::Masked(_) => None,
        }
    }

    /// Field value used by the contour extractor: masked nodes count as
    /// 0, below every admissible level.
    fn node_value(&self, i: usize, j: usize) -> f64 {
        self.eta(i, j).unwrap_or(0.0)
    }

    /// Largest performance index over the unmasked nodes, with its grid
    /// coordinates; ties resolve to the first node in row-major order.
    pub fn max_eta(&self) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 0..self.n1() {
            for j in 0..self.n2() {
                if let Some(eta) = self.eta(i, j) {
                    if best.is_none_or(|(b, _, _)| eta > b) {
                        best = Some((eta, self.p1_values[i], self.p2_values[j]));
                    }
                }
            }
        }
        best
    }

    /// CSV with header `p1,p2,eta,a_rdw,rho_max,center_rho,center_z,mask_reason`,
    /// one row per node in storage order, numbers at 6 significant digits,
    /// numeric columns empty on masked rows. Mask reasons are sanitized so
    /// rows always have exactly eight comma-separated fields.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "p1,p2,eta,a_rdw,rho_max,center_rho,center_z,mask_reason")?;
        for i in 0..self.n1() {
            for j in 0..self.n2() {
                let p1 = sig(self.p1_values[i], 6);
                let p2 = sig(self.p2_values[j], 6);
                match self.outcome(i, j) {
                    CellOutcome::Valid(rec) => writeln!(
                        w,
                        "{},{},{},{},{},{},{},",
                        p1,
                        p2,
                        sig(rec.eta, 6),
                        sig(rec.a_rdw, 6),
                        sig(rec.rho_max, 6),
                        sig(rec.center.rho, 6),
                        sig(rec.center.z, 6)
                    )?,
                    CellOutcome::Masked(reason) => {
                        let clean = reason.replace(',', ";").replace(['\n', '\r'], " ");
                        writeln!(w, "{p1},{p2},,,,,,{clean}")?
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses the CSV format written by [`EtaField::write_csv`]. The grid
    /// is reconstructed from the row structure; axis names are generic.
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header != "p1,p2,eta,a_rdw,rho_max,center_rho,center_z,mask_reason" {
            return Err(Error::Parse(format!(
                "unexpected sweep CSV header: {header}"
            )));
        }
        let parse = |field: &str, what: &str, line: usize| -> Result<f64> {
            field.parse::<f64>().map_err(|_| {
                Error::Parse(format!("line {line}: bad {what} value '{field}'"))
            })
        };

        let mut rows: Vec<(String, String, f64, f64, CellOutcome)> = Vec::new();
        for (idx, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected 8 fields, found {}",
                    fields.len()
                )));
            }
            let p1 = parse(fields[0], "p1", lineno)?;
            let p2 = parse(fields[1], "p2", lineno)?;
            let outcome = if fields[2].is_empty() {
                CellOutcome::Masked(fields[7].to_string())
            } else {
                CellOutcome::Valid(CellRecord {
                    eta: parse(fields[2], "eta", lineno)?,
                    a_rdw: parse(fields[3], "a_rdw", lineno)?,
                    rho_max: parse(fields[4], "rho_max", lineno)?,
                    center: CrossSectionPoint::new(
                        parse(fields[5], "center_rho", lineno)?,
                        parse(fields[6], "center_z", lineno)?,
                    ),
                })
            };
            rows.push((fields[0].to_string(), fields[1].to_string(), p1, p2, outcome));
        }
        if rows.is_empty() {
            return Err(Error::Parse("sweep CSV has no data rows".into()));
        }

        // Row-major structure: the inner axis repeats within the first block.
        let first_p1 = rows[0].0.clone();
        let n2 = rows.iter().take_while(|r| r.0 == first_p1).count();
        if n2 == 0 || rows.len() % n2 != 0 {
            return Err(Error::Parse("sweep CSV rows are not a full grid".into()));
        }
        let n1 = rows.len() / n2;
        let p1_values: Vec<f64> = (0..n1).map(|i| rows[i * n2].2).collect();
        let p2_values: Vec<f64> = (0..n2).map(|j| rows[j].3).collect();
        for i in 0..n1 {
            for j in 0..n2 {
                let row = &rows[i * n2 + j];
                if row.0 != rows[i * n2].0 || row.1 != rows[j].1 {
                    return Err(Error::Parse(format!(
                        "sweep CSV loses grid structure near row {}",
                        i * n2 + j + 2
                    )));
                }
            }
        }
        let axis = |name: &str, values: &[f64]| Axis {
            name: name.to_string(),
            min: values[0],
            max: *values.last().unwrap(),
            step: if values.len() > 1 {
                values[1] - values[0]
            } else {
                1.0
            },
        };
        Ok(EtaField {
            grid: GridSpec {
                axes: [axis("p1", &p1_values), axis("p2", &p2_values)],
            },
            cells: rows.into_iter().map(|r| r.4).collect(),
            p1_values,
            p2_values,
        })
    }
}

/// Evaluates the pipeline over the grid. Per-node failures are recorded in
/// the mask; the sweep itself never fails.
pub fn sweep_eta(
    kind: ManipulatorType,
    grid: &GridSpec,
    k_min_inv: f64,
    config: &RdwConfig,
) -> EtaField {
    sweep_eta_with_progress(kind, grid, k_min_inv, config, |_, _| {})
}

/// [`sweep_eta`] with a completion callback `(nodes done, total nodes)`,
/// invoked once per finished node (possibly from worker threads).
pub fn sweep_eta_with_progress(
    kind: ManipulatorType,
    grid: &GridSpec,
    k_min_inv: f64,
    config: &RdwConfig,
    progress: impl Fn(usize, usize) + Sync,
) -> EtaField {
    let p1_values = grid.axes[0].values();
    let p2_values = grid.axes[1].values();
    let n2 = p2_values.len();
    let total = p1_values.len() * n2;
    let done = AtomicUsize::new(0);
    let cells: Vec<CellOutcome> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let outcome = evaluate_node(
                kind,
                p1_values[idx / n2],
                p2_values[idx % n2],
                k_min_inv,
                config,
            );
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            outcome
        })
        .collect();
    EtaField {
        grid: grid.clone(),
        p1_values,
        p2_values,
        cells,
    }
}

fn evaluate_node(
    kind: ManipulatorType,
    p1: f64,
    p2: f64,
    k_min_inv: f64,
    config: &RdwConfig,
) -> CellOutcome {
    // The d3 <= d4 half of the B1 plane belongs to the sibling class with a
    // workspace void; mask it with a stable reason instead of a
    // constraint-violation message.
    if kind == ManipulatorType::B1 && p1 <= p2 {
        return CellOutcome::Masked("type-B2 region".into());
    }
    let geom = match kind.sweep_geometry(p1, p2) {
        Ok(g) => g,
        Err(e) => return CellOutcome::Masked(e.to_string()),
    };
    match compute_rdw(&geom, k_min_inv, config) {
        Ok(r) => CellOutcome::Valid(CellRecord {
            eta: r.eta,
            a_rdw: r.rdw_square.edge(),
            rho_max: r.rho_max,
            center: r.rdw_square.center,
        }),
        Err(e) => CellOutcome::Masked(e.to_string()),
    }
}

/// Area of the region where the performance index reaches `level`, as a
/// fraction of the whole design plane (node-counting measure: unmasked
/// nodes with eta >= level over all grid nodes). Using the full plane as
/// the denominator keeps areas comparable across types with different
/// masked regions.
pub fn region_area(field: &EtaField, level: f64) -> f64 {
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    let above = field
        .cells
        .iter()
        .filter(|cell| matches!(cell, CellOutcome::Valid(rec) if rec.eta >= level))
        .count();
    above as f64 / field.cells.len() as f64
}

/// Isocontours of an [`EtaField`], one polyline list per level, plus the
/// grid bounding box used for rendering.
#[derive(Debug, Clone)]
pub struct ContourSet {
    pub levels: Vec<ContourLevel>,
    /// (p1 min, p1 max, p2 min, p2 max) of the source grid.
    pub bbox: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct ContourLevel {
    pub level: f64,
    /// Each polyline is a sequence of (p1, p2) vertices on grid-cell edges;
    /// closed loops repeat their first vertex at the end.
    pub polylines: Vec<Vec<(f64, f64)>>,
}

/// Grid edge between two nodes, used as the identity of a contour vertex:
/// `H` runs from node (i, j) to (i+1, j), `V` from (i, j) to (i, j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeDir {
    H,
    V,
}

type EdgeId = (EdgeDir, usize, usize);

/// Marching-squares isocontours with linear interpolation along cell
/// edges. Node inclusion is `value >= level`; masked nodes count as 0.
/// Ambiguous saddle cells are split by the cell-center average. Vertices
/// are computed once per grid edge (always interpolating from the
/// lower-indexed node), so shared vertices agree bit-for-bit and chains
/// assemble deterministically.
pub fn extract_contours(field: &EtaField, levels: &[f64]) -> ContourSet {
    let xs = &field.p1_values;
    let ys = &field.p2_values;
    let bbox = [
        xs[0],
        *xs.last().unwrap(),
        ys[0],
        *ys.last().unwrap(),
    ];
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        assert!(
            level > 0.0 && level < 1.0,
            "contour level must lie in (0, 1)"
        );
        out.push(ContourLevel {
            level,
            polylines: contour_level(field, level),
        });
    }
    ContourSet { levels: out, bbox }
}

fn contour_level(field: &EtaField, level: f64) -> Vec<Vec<(f64, f64)>> {
    let xs = &field.p1_values;
    let ys = &field.p2_values;
    let mut vertices: HashMap<EdgeId, (f64, f64)> = HashMap::new();
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();

    // The vertex on a crossed edge, interpolated low node -> high node.
    let vertex = |vertices: &mut HashMap<EdgeId, (f64, f64)>, id: EdgeId| {
        if !vertices.contains_key(&id) {
            let (dir, i, j) = id;
            let p = match dir {
                EdgeDir::H => {
                    let (v0, v1) = (field.node_value(i, j), field.node_value(i + 1, j));
                    let t = (level - v0) / (v1 - v0);
                    (xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
                }
                EdgeDir::V => {
                    let (v0, v1) = (field.node_value(i, j), field.node_value(i, j + 1));
                    let t = (level - v0) / (v1 - v0);
                    (xs[i], ys[j] + t * (ys[j + 1] - ys[j]))
                }
            };
            vertices.insert(id, p);
        }
        id
    };

    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let v00 = field.node_value(i, j);
            let v10 = field.node_value(i + 1, j);
            let v11 = field.node_value(i + 1, j + 1);
            let v01 = field.node_value(i, j + 1);
            let case = (v00 >= level) as usize
                | ((v10 >= level) as usize) << 1
                | ((v11 >= level) as usize) << 2
                | ((v01 >= level) as usize) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let e0 = (EdgeDir::H, i, j); // bottom
            let e1 = (EdgeDir::V, i + 1, j); // right
            let e2 = (EdgeDir::H, i, j + 1); // top
            let e3 = (EdgeDir::V, i, j); // left
            let pairs: &[(EdgeId, EdgeId)] = match case {
                1 | 14 => &[(e3, e0)],
                2 | 13 => &[(e0, e1)],
                3 | 12 => &[(e3, e1)],
                4 | 11 => &[(e1, e2)],
                6 | 9 => &[(e0, e2)],
                7 | 8 => &[(e3, e2)],
                5 => {
                    if (v00 + v10 + v11 + v01) / 4.0 >= level {
                        &[(e0, e1), (e2, e3)]
                    } else {
                        &[(e0, e3), (e1, e2)]
                    }
                }
                10 => {
                    if (v00 + v10 + v11 + v01) / 4.0 >= level {
                        &[(e0, e3), (e1, e2)]
                    } else {
                        &[(e0, e1), (e2, e3)]
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                let a = vertex(&mut vertices, a);
                let b = vertex(&mut vertices, b);
                segments.push((a, b));
            }
        }
    }

    chain_segments(&segments, &vertices)
}

/// Connects undirected segments into polylines: open chains first (started
/// from endpoints in ascending edge order), then closed loops. At
/// junctions the smallest unused neighbor is taken, so the output is a
/// deterministic function of the segment set.
fn chain_segments(
    segments: &[(EdgeId, EdgeId)],
    vertices: &HashMap<EdgeId, (f64, f64)>,
) -> Vec<Vec<(f64, f64)>> {
    let mut adjacency: BTreeMap<EdgeId, Vec<EdgeId>> = BTreeMap::new();
    for &(a, b) in segments {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    for neighbors in adjacency.values_mut() {
        neighbors.sort();
    }
    let seg_key = |a: EdgeId, b: EdgeId| if a <= b { (a, b) } else { (b, a) };
    let mut used: BTreeSet<(EdgeId, EdgeId)> = BTreeSet::new();

    let walk = |start: EdgeId, used: &mut BTreeSet<(EdgeId, EdgeId)>| -> Vec<EdgeId> {
        let mut path = vec![start];
        let mut current = start;
        loop {
            let next = adjacency[&current]
                .iter()
                .copied()
                .find(|&n| !used.contains(&seg_key(current, n)));
            match next {
                Some(n) => {
                    used.insert(seg_key(current, n));
                    path.push(n);
                    current = n;
                }
                None => return path,
            }
        }
    };

    let mut polylines = Vec::new();
    let endpoints: Vec<EdgeId> = adjacency
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&id, _)| id)
        .collect();
    let starts = endpoints
        .into_iter()
        .chain(adjacency.keys().copied().collect::<Vec<_>>());
    for start in starts {
        let has_unused = adjacency[&start]
            .iter()
            .any(|&n| !used.contains(&seg_key(start, n)));
        if !has_unused {
            continue;
        }
        let path = walk(start, &mut used);
        let mut coords: Vec<(f64, f64)> = Vec::with_capacity(path.len());
        for id in path {
            let p = vertices[&id];
            if coords.last() != Some(&p) {
                coords.push(p);
            }
        }
        if coords.len() >= 2 {
            polylines.push(coords);
        }
    }
    polylines
}

impl ContourSet {
    /// CSV with header `level,poly_id,p1,p2`: one row per vertex, polyline
    /// ids counted per level, numbers at 6 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "level,poly_id,p1,p2")?;
        for level in &self.levels {
            for (poly_id, polyline) in level.polylines.iter().enumerate() {
                for &(x, y) in polyline {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        sig(level.level, 6),
                        poly_id,
                        sig(x, 6),
                        sig(y, 6)
                    )?;
                }
            }
        }
        Ok(())
    }

    /// SVG rendering in a fixed 800x800 viewport: the grid bounding box
    /// maps onto the viewport (20-pixel inset, second axis pointing up),
    /// one path per polyline and one text label per level.
    pub fn write_svg<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        const SIZE: f64 = 800.0;
        const INSET: f64 = 20.0;
        const PALETTE: [&str; 6] = [
            "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
        ];
        let [xmin, xmax, ymin, ymax] = self.bbox;
        let xspan = (xmax - xmin).max(f64::MIN_POSITIVE);
        let yspan = (ymax - ymin).max(f64::MIN_POSITIVE);
        let px = |x: f64| INSET + (x - xmin) / xspan * (SIZE - 2.0 * INSET);
        let py = |y: f64| SIZE - INSET - (y - ymin) / yspan * (SIZE - 2.0 * INSET);

        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">"
        )?;
        writeln!(
            w,
            "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>"
        )?;
        for (li, level) in self.levels.iter().enumerate() {
            let color = PALETTE[li % PALETTE.len()];
            for polyline in &level.polylines {
                let mut d = String::new();
                for (k, &(x, y)) in polyline.iter().enumerate() {
                    let cmd = if k == 0 { 'M' } else { 'L' };
                    d.push_str(&format!("{}{:.2} {:.2} ", cmd, px(x), py(y)));
                }
                writeln!(
                    w,
                    "  <path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                    d.trim_end(),
                    color
                )?;
            }
            if let Some(first) = level.polylines.first().and_then(|p| p.first()) {
                writeln!(
                    w,
                    "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" fill=\"{}\">{}</text>",
                    px(first.0) + 4.0,
                    py(first.1) - 4.0,
                    color,
                    sig(level.level, 6)
                )?;
            }
        }
        writeln!(w, "</svg>")
    }
}
