//! Lattice approximations `D_N` of planar domains with a fused boundary
//! vertex `ϱ`.
//!
//! A lattice point `x` belongs to `D_N` iff the closed `ℓ∞` box of radius
//! `1/N` around `x/N` lies inside the open domain, i.e.
//! `d∞(x/N, ℝ² ∖ D) > 1/N`. All geometry is evaluated in lattice units
//! (the domain scaled by `N`), which keeps the square exact.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Continuum shape before anchoring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    /// `(0,1)²`.
    UnitSquare,
    /// `(0,width) × (0,height)`.
    AxisRectangle { width: f64, height: f64 },
    /// Open disk centred at the anchor.
    Disk { radius: f64 },
    /// Simple polygon, vertices in order.
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub shape: Shape,
    #[serde(default)]
    pub anchor: [f64; 2],
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        Self { shape: Shape::UnitSquare, anchor: [0.0, 0.0] }
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self { shape: Shape::AxisRectangle { width, height }, anchor: [0.0, 0.0] }
    }

    pub fn disk(radius: f64) -> Self {
        Self { shape: Shape::Disk { radius }, anchor: [0.0, 0.0] }
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Self {
        Self { shape: Shape::Polygon { vertices }, anchor: [0.0, 0.0] }
    }

    pub fn with_anchor(mut self, anchor: [f64; 2]) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        if !self.anchor.iter().all(|&a| finite(a)) {
            return Err(Error::InvalidSpec("anchor must be finite".into()));
        }
        match &self.shape {
            Shape::UnitSquare => Ok(()),
            Shape::AxisRectangle { width, height } => {
                if *width > 0.0 && *height > 0.0 && finite(*width) && finite(*height) {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("rectangle needs positive finite width and height".into()))
                }
            }
            Shape::Disk { radius } => {
                if *radius > 0.0 && finite(*radius) {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec("disk needs a positive finite radius".into()))
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidSpec("polygon needs at least 3 vertices".into()));
                }
                if !vertices.iter().flatten().all(|&v| finite(v)) {
                    return Err(Error::InvalidSpec("polygon vertices must be finite".into()));
                }
                if polygon_area(vertices).abs() <= 0.0 {
                    return Err(Error::InvalidSpec("polygon has empty interior".into()));
                }
                if !polygon_is_simple(vertices) {
                    return Err(Error::InvalidSpec("polygon is self-intersecting".into()));
                }
                Ok(())
            }
        }
    }

    /// Lebesgue measure of the domain.
    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::UnitSquare => 1.0,
            Shape::AxisRectangle { width, height } => width * height,
            Shape::Disk { radius } => std::f64::consts::PI * radius * radius,
            Shape::Polygon { vertices } => polygon_area(vertices).abs(),
        }
    }

    /// Bounding box `[xmin, ymin, xmax, ymax]` in continuum coordinates.
    pub fn bounding_box(&self) -> [f64; 4] {
        let [ax, ay] = self.anchor;
        match &self.shape {
            Shape::UnitSquare => [ax, ay, ax + 1.0, ay + 1.0],
            Shape::AxisRectangle { width, height } => [ax, ay, ax + width, ay + height],
            Shape::Disk { radius } => [ax - radius, ay - radius, ax + radius, ay + radius],
            Shape::Polygon { vertices } => {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for v in vertices {
                    b[0] = b[0].min(v[0] + ax);
                    b[1] = b[1].min(v[1] + ay);
                    b[2] = b[2].max(v[0] + ax);
                    b[3] = b[3].max(v[1] + ay);
                }
                b
            }
        }
    }

    /// Whether the closed `ℓ∞` box of half-width `r` around `p` lies in the
    /// open domain scaled by `scale`. Equivalent to
    /// `d∞(p/scale, ℝ² ∖ D) > r/scale`.
    pub fn box_inside(&self, p: [f64; 2], r: f64, scale: f64) -> bool {
        let ax = self.anchor[0] * scale;
        let ay = self.anchor[1] * scale;
        match &self.shape {
            Shape::UnitSquare => rect_box_inside(p, r, [ax, ay, ax + scale, ay + scale]),
            Shape::AxisRectangle { width, height } => {
                rect_box_inside(p, r, [ax, ay, ax + width * scale, ay + height * scale])
            }
            Shape::Disk { radius } => {
                let dx = (p[0] - ax).abs() + r;
                let dy = (p[1] - ay).abs() + r;
                let rr = radius * scale;
                dx * dx + dy * dy < rr * rr
            }
            Shape::Polygon { vertices } => {
                let poly: Vec<[f64; 2]> =
                    vertices.iter().map(|v| [v[0] * scale + ax, v[1] * scale + ay]).collect();
                point_in_polygon(p, &poly)
                    && (0..poly.len())
                        .all(|i| !segment_hits_box(poly[i], poly[(i + 1) % poly.len()], p, r))
            }
        }
    }

    /// `d∞(x/N, ℝ² ∖ D) > 1/N`, the interior rule defining `D_N`.
    pub fn admits(&self, x: [i64; 2], n: u32) -> bool {
        self.box_inside([x[0] as f64, x[1] as f64], 1.0, n as f64)
    }
}

fn rect_box_inside(p: [f64; 2], r: f64, b: [f64; 4]) -> bool {
    p[0] - r > b[0] && p[0] + r < b[2] && p[1] - r > b[1] && p[1] + r < b[3]
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| {
        let (a, b) = (v[i], v[(i + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    }).sum::<f64>()
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

// Liang-Barsky clip of the segment against the closed box.
fn segment_hits_box(a: [f64; 2], b: [f64; 2], c: [f64; 2], r: f64) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        let lo = c[k] - r - a[k];
        let hi = c[k] + r - a[k];
        if d[k] == 0.0 {
            if lo > 0.0 || hi < 0.0 {
                return false;
            }
        } else {
            let (mut e0, mut e1) = (lo / d[k], hi / d[k]);
            if e0 > e1 {
                std::mem::swap(&mut e0, &mut e1);
            }
            t0 = t0.max(e0);
            t1 = t1.min(e1);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2], o: f64| {
        o == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn polygon_is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Sentinel neighbour index: the boundary vertex `ϱ` is stored as `|D_N|`.
pub type Vertex = u32;

/// `D_N ∪ {ϱ}` with the nearest-neighbour graph. Vertex `i < len()` is
/// `vertices[i]`; index `len()` is `ϱ`.
#[derive(Clone, Debug)]
pub struct LatticeDomain {
    n_scale: u32,
    shape: Option<DomainSpec>,
    vertices: Vec<[i64; 2]>,
    index: HashMap<[i64; 2], usize>,
    boundary_edge_count: Vec<u8>,
    neighbors: Vec<[Vertex; 4]>,
    rho_edges: Vec<Vertex>,
    deg_rho: u64,
    pruned: bool,
}

const DIRS: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

/// Build `D_N` as the maximal set obeying the interior rule, in row-major
/// order, keeping only the largest connected component.
pub fn build_lattice(spec: &DomainSpec, n: u32) -> Result<LatticeDomain> {
    if n < 1 {
        return Err(Error::Parameter("N must be at least 1".into()));
    }
    spec.validate()?;
    let b = spec.bounding_box();
    let s = n as f64;
    let (i0, i1) = ((b[0] * s).floor() as i64, (b[2] * s).ceil() as i64);
    let (j0, j1) = ((b[1] * s).floor() as i64, (b[3] * s).ceil() as i64);
    let mut points = Vec::new();
    for i in i0..=i1 {
        for j in j0..=j1 {
            if spec.admits([i, j], n) {
                points.push([i, j]);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyDomain { n });
    }
    let mut d = LatticeDomain::from_points(n, points)?;
    d.shape = Some(spec.clone());
    Ok(d)
}

impl LatticeDomain {
    /// Domain from an explicit point set (hand-built domains). Points are
    /// sorted row-major and reduced to the largest component.
    pub fn from_points(n: u32, mut points: Vec<[i64; 2]>) -> Result<Self> {
        points.sort_unstable();
        points.dedup();
        if points.is_empty() {
            return Err(Error::EmptyDomain { n });
        }
        let kept = largest_component(&points);
        let pruned = kept.len() != points.len();
        let points = kept;
        let index: HashMap<[i64; 2], usize> =
            points.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        let rho = points.len() as Vertex;
        let mut neighbors = Vec::with_capacity(points.len());
        let mut boundary_edge_count = Vec::with_capacity(points.len());
        let mut rho_edges = Vec::new();
        for (k, p) in points.iter().enumerate() {
            let mut nb = [rho; 4];
            let mut out = 0u8;
            for (slot, d) in DIRS.iter().enumerate() {
                match index.get(&[p[0] + d[0], p[1] + d[1]]) {
                    Some(&q) => nb[slot] = q as Vertex,
                    None => {
                        out += 1;
                        rho_edges.push(k as Vertex);
                    }
                }
            }
            neighbors.push(nb);
            boundary_edge_count.push(out);
        }
        let deg_rho = rho_edges.len() as u64;
        Ok(Self {
            n_scale: n,
            shape: None,
            vertices: points,
            index,
            boundary_edge_count,
            neighbors,
            rho_edges,
            deg_rho,
            pruned,
        })
    }

    /// `k × k` block `{1..k}²` at scale `N`.
    pub fn square_block(k: u32, n: u32) -> Result<Self> {
        let k = k as i64;
        Self::from_points(n, (1..=k).flat_map(|i| (1..=k).map(move |j| [i, j])).collect())
    }

    pub fn scale(&self) -> u32 {
        self.n_scale
    }

    pub fn spec(&self) -> Option<&DomainSpec> {
        self.shape.as_ref()
    }

    /// `|D_N|`.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Index of `ϱ`.
    pub fn rho(&self) -> Vertex {
        self.vertices.len() as Vertex
    }

    pub fn vertices(&self) -> &[[i64; 2]] {
        &self.vertices
    }

    pub fn point(&self, v: usize) -> [i64; 2] {
        self.vertices[v]
    }

    pub fn index_of(&self, p: [i64; 2]) -> Option<usize> {
        self.index.get(&p).copied()
    }

    /// Continuum position `x/N`.
    pub fn position(&self, v: usize) -> [f64; 2] {
        let p = self.vertices[v];
        [p[0] as f64 / self.n_scale as f64, p[1] as f64 / self.n_scale as f64]
    }

    pub fn boundary_edge_count(&self) -> &[u8] {
        &self.boundary_edge_count
    }

    /// Neighbour slots of an interior vertex; `ϱ` appears once per
    /// boundary edge.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[Vertex; 4] {
        &self.neighbors[v]
    }

    /// Interior endpoint of every edge at `ϱ`, one entry per edge.
    pub fn rho_edges(&self) -> &[Vertex] {
        &self.rho_edges
    }

    pub fn deg_rho(&self) -> u64 {
        self.deg_rho
    }

    /// `Σ deg` over `D_N ∪ {ϱ}`.
    pub fn deg_total(&self) -> u64 {
        4 * self.len() as u64 + self.deg_rho
    }

    pub fn degree(&self, v: Vertex) -> u64 {
        if v == self.rho() {
            self.deg_rho
        } else {
            4
        }
    }

    /// Whether a disconnected candidate set was cut down to its largest
    /// component.
    pub fn was_pruned(&self) -> bool {
        self.pruned
    }

    /// Vertex nearest the lower-left corner of the bounding box; the
    /// "arbitrary" start rule.
    pub fn corner_vertex(&self) -> usize {
        let (mi, mj) = self.vertices.iter().fold((i64::MAX, i64::MAX), |(a, b), p| {
            (a.min(p[0]), b.min(p[1]))
        });
        (0..self.len())
            .min_by_key(|&v| {
                let p = self.vertices[v];
                ((p[0] - mi).pow(2) + (p[1] - mj).pow(2), v)
            })
            .unwrap()
    }

    /// Vertex nearest the barycentre.
    pub fn center_vertex(&self) -> usize {
        let n = self.len() as f64;
        let (sx, sy) = self.vertices.iter().fold((0.0, 0.0), |(a, b), p| {
            (a + p[0] as f64, b + p[1] as f64)
        });
        let c = [sx / n, sy / n];
        (0..self.len())
            .min_by(|&a, &b| {
                let d = |v: usize| {
                    let p = self.vertices[v];
                    (p[0] as f64 - c[0]).powi(2) + (p[1] as f64 - c[1]).powi(2)
                };
                d(a).total_cmp(&d(b)).then(a.cmp(&b))
            })
            .unwrap()
    }

    /// Breadth-first connectivity of `D_N ∪ {ϱ}`.
    pub fn is_connected(&self) -> bool {
        let n = self.len() + 1;
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.rho() as usize]);
        seen[self.rho() as usize] = true;
        while let Some(v) = queue.pop_front() {
            let next: Vec<Vertex> = if v == self.rho() as usize {
                self.rho_edges.clone()
            } else {
                self.neighbors[v].to_vec()
            };
            for w in next {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w as usize);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

fn largest_component(points: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let index: HashMap<[i64; 2], usize> = points.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut label = vec![usize::MAX; points.len()];
    let mut best = (0usize, 0usize);
    let mut comp = 0;
    for s in 0..points.len() {
        if label[s] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([s]);
        label[s] = comp;
        while let Some(v) = queue.pop_front() {
            size += 1;
            let p = points[v];
            for d in DIRS {
                if let Some(&w) = index.get(&[p[0] + d[0], p[1] + d[1]]) {
                    if label[w] == usize::MAX {
                        label[w] = comp;
                        queue.push_back(w);
                    }
                }
            }
        }
        if size > best.0 {
            best = (size, comp);
        }
        comp += 1;
    }
    points.iter().zip(&label).filter(|(_, &l)| l == best.1).map(|(&p, _)| p).collect()
}

/// Outcome of [`validate_admissible`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    /// Interior rule `d∞(x/N, Dᶜ) > 1/N` for every vertex.
    pub interior_rule: bool,
    /// Vertices violating the interior rule.
    pub violations: Vec<[i64; 2]>,
    /// Every lattice point with `d∞(x/N, Dᶜ) > δ` belongs to `D_N`.
    pub covers_delta_interior: bool,
    /// Lattice points deep inside `D` but missing from `D_N`.
    pub missing: usize,
    pub deg_rho_ratio: f64,
    pub pruned: bool,
}

impl ValidationReport {
    pub fn admissible(&self) -> bool {
        self.interior_rule && self.covers_delta_interior
    }
}

pub fn validate_admissible(domain: &LatticeDomain, spec: &DomainSpec, delta: f64) -> ValidationReport {
    assert!(delta > 0.0, "delta must be positive");
    let n = domain.scale();
    let violations: Vec<[i64; 2]> =
        domain.vertices().iter().copied().filter(|&x| !spec.admits(x, n)).collect();
    let s = n as f64;
    let b = spec.bounding_box();
    let mut missing = 0;
    for i in (b[0] * s).floor() as i64..=(b[2] * s).ceil() as i64 {
        for j in (b[1] * s).floor() as i64..=(b[3] * s).ceil() as i64 {
            if spec.box_inside([i as f64, j as f64], delta * s, s) && domain.index_of([i, j]).is_none() {
                missing += 1;
            }
        }
    }
    ValidationReport {
        interior_rule: violations.is_empty(),
        violations,
        covers_delta_interior: missing == 0,
        missing,
        deg_rho_ratio: domain.deg_rho() as f64 / domain.deg_total() as f64,
        pruned: domain.was_pruned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts_follow_the_interior_rule() {
        // sites 2..=N-2 per axis
        let d = build_lattice(&DomainSpec::unit_square(), 9).unwrap();
        assert_eq!(d.len(), 36);
        assert_eq!(d.deg_rho(), 24);
        assert_eq!(d.deg_total(), 168);
        let single = build_lattice(&DomainSpec::unit_square(), 4).unwrap();
        assert_eq!((single.len(), single.deg_rho(), single.deg_total()), (1, 4, 8));
        assert!(matches!(
            build_lattice(&DomainSpec::unit_square(), 3),
            Err(Error::EmptyDomain { .. })
        ));
    }

    #[test]
    fn disk_respects_margin() {
        let spec = DomainSpec::disk(1.0);
        let d = build_lattice(&spec, 16).unwrap();
        for &p in d.vertices() {
            let (x, y) = (p[0] as f64 / 16.0, p[1] as f64 / 16.0);
            // farthest corner of the 1/N box stays inside the unit disk
            assert!((x.abs() + 1.0 / 16.0).powi(2) + (y.abs() + 1.0 / 16.0).powi(2) < 1.0);
        }
        assert!(d.is_connected());
        assert!(validate_admissible(&d, &spec, 0.1).admissible());
    }

    #[test]
    fn boundary_distance_exactly_one_over_n_fails() {
        let spec = DomainSpec::unit_square();
        let d = LatticeDomain::from_points(8, vec![[1, 1], [2, 1], [2, 2]]).unwrap();
        let r = validate_admissible(&d, &spec, 0.5);
        assert!(!r.interior_rule);
        assert_eq!(r.violations, vec![[1, 1], [2, 1]]);
        let huge = validate_admissible(&build_lattice(&spec, 8).unwrap(), &spec, 3.0);
        assert!(huge.covers_delta_interior);
    }

    #[test]
    fn polygon_triangle_and_pruning() {
        let spec = DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let d = build_lattice(&spec, 32).unwrap();
        assert!(validate_admissible(&d, &spec, 0.05).admissible());
        let bow = DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(bow.validate().is_err());
        let two = LatticeDomain::from_points(10, vec![[1, 1], [1, 2], [5, 5]]).unwrap();
        assert!(two.was_pruned());
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn block_matches_strict_square() {
        let a = LatticeDomain::square_block(6, 9).unwrap();
        let b = build_lattice(&DomainSpec::unit_square(), 9).unwrap();
        let shift: Vec<[i64; 2]> = a.vertices().iter().map(|p| [p[0] + 1, p[1] + 1]).collect();
        assert_eq!(shift, b.vertices());
    }
}
