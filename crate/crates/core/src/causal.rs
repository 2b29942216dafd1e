//! Observer cones, shell components and tangent-plane scans.
//!
//! A direction `y` is an *observer ray* when `L(x, y) ≠ 0`, `g^L` is
//! non-degenerate and its signature is `(ε, −ε, −ε, −ε)` with `ε = sign L`.
//! The shell `Ω_x` is the set of unit-normalized observer rays; its
//! components correspond one-to-one to the connected components of the set
//! of observer rays on the unit chart sphere. The future shell `S_x` is the
//! component containing the seed direction (the coordinate time axis when
//! it qualifies, otherwise the sampled ray with the largest `y⁰`).

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finsler::{classify_ray, RayClass};
use crate::model::{FundamentalModel, TangentPoint};

/// Samples along the great-circle arc used for the fast membership test.
const ARC_SAMPLES: usize = 32;
/// Angular resolution of the fallback connectivity grid, in degrees.
const GRID_DEG: f64 = 2.0;
/// Directions sampled when looking for a seed.
const SEED_SAMPLES: usize = 100_000;

fn uniform_s3(rng: &mut impl Rng) -> Vector4<f64> {
    loop {
        let v = Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Observer-ray test and future-cone membership at a fixed base point.
pub struct CausalStructure<'m> {
    model: &'m FundamentalModel,
    x: Vector4<f64>,
    seed: Vector4<f64>,
    grid: OnceLock<ConeGrid>,
}

impl<'m> CausalStructure<'m> {
    pub fn new(model: &'m FundamentalModel, x: Vector4<f64>) -> Result<Self> {
        let mut cs = Self { model, x, seed: Vector4::x(), grid: OnceLock::new() };
        if cs.is_ray(&Vector4::x())? {
            return Ok(cs);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut best: Option<Vector4<f64>> = None;
        for _ in 0..SEED_SAMPLES {
            let d = uniform_s3(&mut rng);
            if best.map_or(true, |b| d[0] > b[0]) && cs.is_ray(&d)? {
                best = Some(d);
            }
        }
        cs.seed = best.ok_or(Error::NoConeFound)?;
        Ok(cs)
    }

    pub fn seed(&self) -> Vector4<f64> {
        self.seed
    }

    pub fn x(&self) -> Vector4<f64> {
        self.x
    }

    pub fn ray(&self, y: &Vector4<f64>) -> Result<RayClass> {
        classify_ray(self.model, &TangentPoint::new(self.x, *y))
    }

    pub fn is_ray(&self, y: &Vector4<f64>) -> Result<bool> {
        Ok(self.ray(y)?.is_observer_ray())
    }

    /// Is `y` (any positive scale) in the future observer cone `C_x`?
    pub fn contains(&self, y: &Vector4<f64>) -> Result<bool> {
        if !self.is_ray(y)? {
            return Ok(false);
        }
        if self.arc_to_seed(y)? {
            return Ok(true);
        }
        let grid = self.grid.get_or_init(|| ConeGrid::build(self));
        Ok(grid.contains(self, y))
    }

    // Every sampled direction on the chord from ŷ to the seed is a ray.
    fn arc_to_seed(&self, y: &Vector4<f64>) -> Result<bool> {
        let u = y.normalize();
        for k in 1..ARC_SAMPLES {
            let t = k as f64 / ARC_SAMPLES as f64;
            let d = u * (1.0 - t) + self.seed * t;
            if d.norm() < 1e-6 || !self.is_ray(&d)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Flood fill of the seed's component on a hyperspherical grid whose pole
/// is the seed direction.
struct ConeGrid {
    frame: Matrix4<f64>,
    visited: Vec<bool>,
    n_psi: usize,
    n_theta: usize,
    n_phi: usize,
}

impl ConeGrid {
    fn build(cs: &CausalStructure) -> Self {
        let n_psi = (180.0 / GRID_DEG) as usize;
        let n_theta = n_psi;
        let n_phi = 2 * n_psi;
        let frame = pole_frame(&cs.seed);
        let mut g = Self { frame, visited: vec![false; n_psi * n_theta * n_phi], n_psi, n_theta, n_phi };
        let per_ring = n_theta * n_phi;
        let mut rings: Vec<Option<Vec<bool>>> = vec![None; n_psi];
        let ensure_ring = |i: usize, rings: &mut Vec<Option<Vec<bool>>>| {
            if rings[i].is_none() {
                let mask: Vec<bool> = (0..per_ring)
                    .into_par_iter()
                    .map(|r| {
                        let d = g_direction(&frame, n_psi, n_theta, n_phi, i, r / n_phi, r % n_phi);
                        cs.is_ray(&d).unwrap_or(false)
                    })
                    .collect();
                rings[i] = Some(mask);
            }
        };
        let mut queue = VecDeque::new();
        ensure_ring(0, &mut rings);
        for (r, ok) in rings[0].as_ref().expect("ring computed").iter().enumerate() {
            if *ok {
                let idx = r;
                g.visited[idx] = true;
                queue.push_back((0usize, r / n_phi, r % n_phi));
            }
        }
        while let Some((i, j, k)) = queue.pop_front() {
            let mut nbrs = vec![
                (i, j, (k + 1) % n_phi),
                (i, j, (k + n_phi - 1) % n_phi),
            ];
            if j + 1 < n_theta {
                nbrs.push((i, j + 1, k));
            }
            if j > 0 {
                nbrs.push((i, j - 1, k));
            }
            if i + 1 < n_psi {
                nbrs.push((i + 1, j, k));
            }
            if i > 0 {
                nbrs.push((i - 1, j, k));
            }
            for (a, b, c) in nbrs {
                let idx = (a * n_theta + b) * n_phi + c;
                if g.visited[idx] {
                    continue;
                }
                ensure_ring(a, &mut rings);
                if rings[a].as_ref().expect("ring computed")[b * n_phi + c] {
                    g.visited[idx] = true;
                    queue.push_back((a, b, c));
                }
            }
        }
        g
    }

    fn cell_of(&self, y: &Vector4<f64>) -> (usize, usize, usize) {
        let u = self.frame.transpose() * y.normalize();
        let psi = u[0].clamp(-1.0, 1.0).acos();
        let rest = (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]).sqrt();
        let theta = if rest > 0.0 { (u[1] / rest).clamp(-1.0, 1.0).acos() } else { 0.0 };
        let phi = u[3].atan2(u[2]).rem_euclid(2.0 * PI);
        let bin = |a: f64, range: f64, n: usize| ((a / range * n as f64) as usize).min(n - 1);
        (bin(psi, PI, self.n_psi), bin(theta, PI, self.n_theta), bin(phi, 2.0 * PI, self.n_phi))
    }

    fn contains(&self, _cs: &CausalStructure, y: &Vector4<f64>) -> bool {
        let (i, j, k) = self.cell_of(y);
        let mut cells = vec![(i, j, k), (i, j, (k + 1) % self.n_phi), (i, j, (k + self.n_phi - 1) % self.n_phi)];
        if i > 0 {
            cells.push((i - 1, j, k));
        }
        if i + 1 < self.n_psi {
            cells.push((i + 1, j, k));
        }
        if j > 0 {
            cells.push((i, j - 1, k));
        }
        if j + 1 < self.n_theta {
            cells.push((i, j + 1, k));
        }
        cells
            .into_iter()
            .any(|(a, b, c)| self.visited[(a * self.n_theta + b) * self.n_phi + c])
    }
}

fn g_direction(frame: &Matrix4<f64>, n_psi: usize, n_theta: usize, n_phi: usize, i: usize, j: usize, k: usize) -> Vector4<f64> {
    let psi = (i as f64 + 0.5) * PI / n_psi as f64;
    let theta = (j as f64 + 0.5) * PI / n_theta as f64;
    let phi = (k as f64 + 0.5) * 2.0 * PI / n_phi as f64;
    let u = Vector4::new(
        psi.cos(),
        psi.sin() * theta.cos(),
        psi.sin() * theta.sin() * phi.cos(),
        psi.sin() * theta.sin() * phi.sin(),
    );
    frame * u
}

// Orthonormal basis (columns) whose first vector is the pole.
fn pole_frame(pole: &Vector4<f64>) -> Matrix4<f64> {
    let mut cols: Vec<Vector4<f64>> = vec![pole.normalize()];
    for e in 0..4 {
        let mut v = Vector4::zeros();
        v[e] = 1.0;
        for c in &cols {
            v -= c * c.dot(&v);
        }
        if v.norm() > 1e-6 && cols.len() < 4 {
            cols.push(v.normalize());
        }
    }
    Matrix4::from_columns(&cols)
}

/// Result of sampling convex combinations of cone directions.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub pairs: usize,
    pub checks: usize,
    pub seed_direction: [f64; 4],
    pub failures: Vec<ConvexityFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityFailure {
    pub u: [f64; 4],
    pub v: [f64; 4],
    pub t: f64,
}

fn sample_cone_direction(cs: &CausalStructure, rng: &mut impl Rng) -> Result<Vector4<f64>> {
    for _ in 0..SEED_SAMPLES {
        let r: f64 = rng.gen_range(0.0..2.0);
        let d = cs.seed() + uniform_s3(rng) * r;
        if d.norm() > 1e-6 && cs.contains(&d)? {
            return Ok(d.normalize());
        }
    }
    Err(Error::NoConeFound)
}

/// Checks `t u + (1 − t) v ∈ C_x` for random cone directions `u, v` and
/// `t ∈ {¼, ½, ¾}`.
pub fn cone_convexity_check(
    model: &FundamentalModel,
    x: Vector4<f64>,
    n_samples: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    let cs = CausalStructure::new(model, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = sample_cone_direction(&cs, &mut rng)?;
        let v = sample_cone_direction(&cs, &mut rng)?;
        pairs.push((u, v));
    }
    let failures: Vec<ConvexityFailure> = pairs
        .par_iter()
        .map(|(u, v)| {
            let mut out = Vec::new();
            for t in [0.25, 0.5, 0.75] {
                let w = u * t + v * (1.0 - t);
                if !cs.contains(&w).unwrap_or(false) {
                    out.push(ConvexityFailure { u: (*u).into(), v: (*v).into(), t });
                }
            }
            out
        })
        .flatten()
        .collect();
    Ok(ConvexityReport {
        pairs: n_samples,
        checks: 3 * n_samples,
        seed_direction: cs.seed().into(),
        failures,
    })
}

/// A 2-plane in the tangent space at `x` spanned by `e1`, `e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub x: Vector4<f64>,
    pub e1: Vector4<f64>,
    pub e2: Vector4<f64>,
}

impl Plane {
    /// The `t–x` plane at `x`.
    pub fn tx(x: Vector4<f64>) -> Self {
        Self { x, e1: Vector4::x(), e2: Vector4::y() }
    }

    pub fn direction(&self, phi: f64) -> Vector4<f64> {
        self.e1 * phi.cos() + self.e2 * phi.sin()
    }

    pub fn at(&self, a: f64, b: f64) -> Vector4<f64> {
        self.e1 * a + self.e2 * b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Null,
    Degeneracy,
    Signature,
}

/// An arc of observer rays in the plane: one component of `Ω_x` within it.
#[derive(Debug, Clone, Serialize)]
pub struct ShellArc {
    /// Start and end angle (radians, counter-clockwise, end may exceed 2π).
    pub start: f64,
    pub end: f64,
    pub start_kind: BoundaryKind,
    pub end_kind: BoundaryKind,
    /// Both ends run off to infinity along null rays.
    pub closed: bool,
    /// Part of the future observer cone.
    pub future: bool,
}

impl ShellArc {
    pub fn contains_angle(&self, phi: f64) -> bool {
        let two_pi = 2.0 * PI;
        let mut a = phi.rem_euclid(two_pi);
        if a < self.start {
            a += two_pi;
        }
        a >= self.start && a <= self.end
    }
}

/// Angular structure of the null set, degeneracy set and shells in a plane.
#[derive(Debug, Clone, Serialize)]
pub struct PlaneAnalysis {
    pub null_rays: Vec<f64>,
    pub degeneracy_rays: Vec<f64>,
    pub arcs: Vec<ShellArc>,
}

impl PlaneAnalysis {
    pub fn future_arcs(&self) -> impl Iterator<Item = &ShellArc> {
        self.arcs.iter().filter(|a| a.future)
    }
}

fn bisect(mut a: f64, mut b: f64, mut pred: impl FnMut(f64) -> bool) -> f64 {
    // pred(a) != pred(b)
    let pa = pred(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if pred(m) == pa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Angular analysis at resolution `samples` around the full circle.
pub fn analyze_plane(model: &FundamentalModel, plane: &Plane, samples: usize) -> Result<PlaneAnalysis> {
    let step = 2.0 * PI / samples as f64;
    let angle = |k: usize| (k as f64 + 0.5) * step;
    let at = |phi: f64| TangentPoint::new(plane.x, plane.direction(phi));
    let rays: Vec<RayClass> = (0..samples)
        .into_par_iter()
        .map(|k| classify_ray(model, &at(angle(k))))
        .collect::<Result<_>>()?;
    let l_of = |phi: f64| model.value(&at(phi)).unwrap_or(0.0);

    let mut null_rays = Vec::new();
    let mut degeneracy_rays = Vec::new();
    for k in 0..samples {
        let k1 = (k + 1) % samples;
        let (a, b) = (angle(k), angle(k) + step);
        if rays[k].l.signum() != rays[k1].l.signum() {
            null_rays.push(bisect(a, b, |p| l_of(p) > 0.0).rem_euclid(2.0 * PI));
        }
        // Eigenvalues changing sign away from the null structure mark the
        // degeneracy set; by symmetry two of them may vanish together, so
        // the determinant need not change sign there.
        let same_l = rays[k].l.signum() == rays[k1].l.signum();
        if same_l && rays[k].signature != rays[k1].signature {
            let sig = rays[k].signature;
            let phi = bisect(a, b, |p| {
                classify_ray(model, &at(p)).map(|r| r.signature == sig).unwrap_or(false)
            })
            .rem_euclid(2.0 * PI);
            degeneracy_rays.push(phi);
        }
    }
    null_rays.sort_by(f64::total_cmp);
    degeneracy_rays.sort_by(f64::total_cmp);

    let is_ray = |phi: f64| classify_ray(model, &at(phi)).map(|r| r.is_observer_ray()).unwrap_or(false);
    let boundary_kind = |phi: f64| {
        let near = |v: &Vec<f64>| v.iter().any(|&r| angular_distance(r, phi) < 2.0 * step);
        if near(&null_rays) {
            BoundaryKind::Null
        } else if near(&degeneracy_rays) {
            BoundaryKind::Degeneracy
        } else {
            BoundaryKind::Signature
        }
    };
    let flags: Vec<bool> = rays.iter().map(RayClass::is_observer_ray).collect();
    let mut arcs = Vec::new();
    if let Some(first_gap) = flags.iter().position(|f| !f) {
        let mut k = 0;
        while k < samples {
            let idx = (first_gap + k) % samples;
            if !flags[idx] {
                k += 1;
                continue;
            }
            let begin = first_gap + k;
            let mut len = 0;
            while len < samples && flags[(begin + len) % samples] {
                len += 1;
            }
            let a0 = angle(begin - 1);
            let start = bisect(a0, a0 + step, is_ray).rem_euclid(2.0 * PI);
            let b0 = angle(begin + len - 1);
            let mut end = bisect(b0, b0 + step, is_ray).rem_euclid(2.0 * PI);
            if end < start {
                end += 2.0 * PI;
            }
            let start_kind = boundary_kind(start);
            let end_kind = boundary_kind(end);
            arcs.push(ShellArc {
                start,
                end,
                start_kind,
                end_kind,
                closed: start_kind == BoundaryKind::Null && end_kind == BoundaryKind::Null,
                future: false,
            });
            k += len;
        }
    }
    if !arcs.is_empty() {
        match CausalStructure::new(model, plane.x) {
            Ok(cs) => {
                for arc in &mut arcs {
                    let mid = plane.direction(0.5 * (arc.start + arc.end));
                    arc.future = cs.contains(&mid)?;
                }
            }
            Err(Error::NoConeFound) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(PlaneAnalysis { null_rays, degeneracy_rays, arcs })
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// One node of a plane scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanNode {
    pub y1: f64,
    pub y2: f64,
    pub sign_l: i8,
    pub det_sign: i8,
    pub signature: [i8; 4],
    /// The direction is an observer ray; scaling it to `|L| = 1` lands in `Ω_x`.
    pub in_omega: bool,
    pub in_cone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub plane: Plane,
    /// Half-width of the square `[−extent, extent]²` in plane coordinates.
    pub extent: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub nodes: usize,
    pub sign_counts: [usize; 3],
    pub omega_nodes: usize,
    pub cone_nodes: usize,
    /// Connected regions of constant `(sign L, signature)`, excluding null
    /// and degenerate nodes. Counted on the annulus `r ≥ extent / 2`: all
    /// rays meet at the origin, where thin sectors are narrower than a cell.
    pub regions: usize,
    pub null_rays: usize,
    pub degeneracy_rays: usize,
    pub omega_components: usize,
    pub closed_future_components: usize,
    pub analysis: PlaneAnalysis,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub spec: ScanSpec,
    /// Row-major: `nodes[j * nx + i]` has `y1` index `i`, `y2` index `j`.
    pub nodes: Vec<ScanNode>,
    pub summary: ScanSummary,
}

/// Classifies every node of a cell-centered grid on the plane.
pub fn scan_plane(model: &FundamentalModel, spec: &ScanSpec) -> Result<ScanResult> {
    let analysis = analyze_plane(model, &spec.plane, 7200)?;
    let cs = match CausalStructure::new(model, spec.plane.x) {
        Ok(cs) => Some(cs),
        Err(Error::NoConeFound) => None,
        Err(e) => return Err(e),
    };
    let coord = |i: usize, n: usize| -spec.extent + (i as f64 + 0.5) * 2.0 * spec.extent / n as f64;
    let rows: Vec<Vec<ScanNode>> = (0..spec.ny)
        .into_par_iter()
        .map(|j| {
            (0..spec.nx)
                .map(|i| {
                    let (y1, y2) = (coord(i, spec.nx), coord(j, spec.ny));
                    let y = spec.plane.at(y1, y2);
                    let ray = classify_ray(model, &TangentPoint::new(spec.plane.x, y))?;
                    let in_omega = ray.is_observer_ray();
                    let in_cone = in_omega
                        && match analysis.arcs.iter().find(|a| a.contains_angle(y2.atan2(y1))) {
                            Some(a) => a.future,
                            None => match &cs {
                                Some(cs) => cs.contains(&y)?,
                                None => false,
                            },
                        };
                    Ok(ScanNode {
                        y1,
                        y2,
                        sign_l: ray.sign_l,
                        det_sign: if ray.degenerate { 0 } else { ray.det.signum() as i8 },
                        signature: ray.signature,
                        in_omega,
                        in_cone,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let nodes: Vec<ScanNode> = rows.into_iter().flatten().collect();
    let summary = summarize(&nodes, spec, analysis);
    Ok(ScanResult { spec: *spec, nodes, summary })
}

fn summarize(nodes: &[ScanNode], spec: &ScanSpec, analysis: PlaneAnalysis) -> ScanSummary {
    let mut sign_counts = [0usize; 3];
    for n in nodes {
        sign_counts[(n.sign_l + 1) as usize] += 1;
    }
    let r_min = 0.5 * spec.extent;
    let label = |n: &ScanNode| -> Option<(i8, [i8; 4])> {
        let outer = n.y1.hypot(n.y2) >= r_min;
        (outer && n.sign_l != 0 && n.det_sign != 0).then_some((n.sign_l, n.signature))
    };
    let (nx, ny) = (spec.nx, spec.ny);
    let mut region = vec![usize::MAX; nodes.len()];
    let mut regions = 0;
    for start in 0..nodes.len() {
        let Some(lab) = label(&nodes[start]) else { continue };
        if region[start] != usize::MAX {
            continue;
        }
        region[start] = regions;
        let mut stack = vec![start];
        while let Some(idx) = stack.pop() {
            let (i, j) = (idx % nx, idx / nx);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(idx - 1);
            }
            if i + 1 < nx {
                nb.push(idx + 1);
            }
            if j > 0 {
                nb.push(idx - nx);
            }
            if j + 1 < ny {
                nb.push(idx + nx);
            }
            for q in nb {
                if region[q] == usize::MAX && label(&nodes[q]) == Some(lab) {
                    region[q] = regions;
                    stack.push(q);
                }
            }
        }
        regions += 1;
    }
    ScanSummary {
        nodes: nodes.len(),
        sign_counts,
        omega_nodes: nodes.iter().filter(|n| n.in_omega).count(),
        cone_nodes: nodes.iter().filter(|n| n.in_cone).count(),
        regions,
        null_rays: analysis.null_rays.len(),
        degeneracy_rays: analysis.degeneracy_rays.len(),
        omega_components: analysis.arcs.len(),
        closed_future_components: analysis.arcs.iter().filter(|a| a.future && a.closed).count(),
        analysis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_plane_structure() {
        let m = FundamentalModel::minkowski();
        let a = analyze_plane(&m, &Plane::tx(Vector4::zeros()), 720).unwrap();
        assert_eq!(a.null_rays.len(), 4);
        assert!(a.degeneracy_rays.is_empty());
        // future and past timelike arcs, both closed; spacelike directions
        // have the wrong signature
        assert_eq!(a.arcs.len(), 2);
        let fut: Vec<_> = a.future_arcs().collect();
        assert_eq!(fut.len(), 1);
        assert!(fut[0].closed && fut[0].contains_angle(0.0));
    }

    #[test]
    fn pole_frame_is_orthonormal() {
        let f = pole_frame(&Vector4::new(0.3, -0.2, 0.9, 0.1));
        assert!((f.transpose() * f - Matrix4::identity()).amax() < 1e-14);
    }
}
