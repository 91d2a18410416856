//! Conforming triangulations of convex polygons, edge topology and
//! refinement (red refinement and newest vertex bisection).
//!
//! Local edge `k` of a triangle `[v0, v1, v2]` joins `v[(k+1)%3]` and
//! `v[(k+2)%3]`, i.e. it is the edge opposite vertex `k`. The refinement
//! edge index therefore also names the "newest vertex" of the triangle.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tensor::{distance, Point};

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub fn local_edge(tri: &[usize; 3], k: usize) -> (usize, usize) {
    (tri[(k + 1) % 3], tri[(k + 2) % 3])
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    generation: Vec<u32>,
}

impl Mesh {
    /// Builds a mesh, seeding each refinement edge with the longest edge.
    /// Clockwise triangles are reoriented.
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in &mut triangles {
            let area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if area < 0.0 {
                t.swap(1, 2);
            }
        }
        let refinement_edge = triangles
            .iter()
            .map(|t| {
                (0..3)
                    .map(|k| {
                        let (a, b) = local_edge(t, k);
                        (k, distance(vertices[a], vertices[b]))
                    })
                    // first longest edge wins ties
                    .fold((0usize, -1.0f64), |best, cur| if cur.1 > best.1 * (1.0 + 1e-12) { cur } else { best })
                    .0 as u8
            })
            .collect();
        Self::with_refinement_edges(vertices, triangles, refinement_edge)
    }

    pub fn with_refinement_edges(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
    ) -> Result<Self> {
        if refinement_edge.len() != triangles.len() {
            return Err(Error::Config("one refinement edge per triangle required".into()));
        }
        let n = triangles.len();
        let mesh = Mesh { vertices, triangles, refinement_edge, generation: vec![0; n] };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::Config(format!("triangle {i} references a missing vertex")));
            }
            if self.refinement_edge[i] > 2 {
                return Err(Error::Config(format!("triangle {i} has refinement edge index > 2")));
            }
            let area = self.area(i);
            let scale = (0..3)
                .map(|k| {
                    let (a, b) = local_edge(t, k);
                    distance(self.vertices[a], self.vertices[b])
                })
                .fold(0.0, f64::max);
            if !(area > 1e-14 * scale * scale) {
                return Err(Error::DegenerateTriangle(i, area));
            }
        }
        Ok(())
    }

    /// `n x n` squares on the unit square, each split along its
    /// `(0,0)-(1,1)` diagonal.
    pub fn unit_square(n: usize) -> Self {
        Self::rectangle([0.0, 0.0], [1.0, 1.0], n, n)
    }

    pub fn rectangle(lo: Point, hi: Point, nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0);
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    lo[0] + (hi[0] - lo[0]) * i as f64 / nx as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / ny as f64,
                ]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::new(vertices, triangles).expect("structured grid is valid")
    }

    /// Fan triangulation of a convex polygon around its vertex centroid.
    pub fn convex_polygon(corners: &[Point]) -> Result<Self> {
        if corners.len() < 3 {
            return Err(Error::Config("polygon needs at least 3 vertices".into()));
        }
        let n = corners.len();
        let c = corners.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        let c = [c[0] / n as f64, c[1] / n as f64];
        let mut vertices = corners.to_vec();
        vertices.push(c);
        let triangles = (0..n).map(|i| [n, i, (i + 1) % n]).collect();
        Mesh::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn generations(&self) -> &[u32] {
        &self.generation
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        distance(a, b).max(distance(b, c)).max(distance(c, a))
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.diameter(t)).fold(0.0, f64::max)
    }

    /// Interior angles of triangle `t` in radians.
    pub fn angles(&self, t: usize) -> [f64; 3] {
        let p = self.corners(t);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let a = p[k];
            let b = p[(k + 1) % 3];
            let c = p[(k + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            out[k] = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
        }
        out
    }

    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .flat_map(|t| self.angles(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Red refinement: every triangle is split into four similar children.
    /// Children keep the refinement edge parallel to the parent's.
    pub fn uniform_refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *midpoints.entry(edge_key(a, b)).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut refinement_edge = Vec::with_capacity(4 * self.triangles.len());
        let mut generation = Vec::with_capacity(4 * self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let [v0, v1, v2] = *tri;
            let m0 = mid(v1, v2, &mut vertices);
            let m1 = mid(v2, v0, &mut vertices);
            let m2 = mid(v0, v1, &mut vertices);
            let r = self.refinement_edge[t];
            for child in [[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]] {
                triangles.push(child);
                refinement_edge.push(r);
                generation.push(self.generation[t] + 2);
            }
        }
        Mesh { vertices, triangles, refinement_edge, generation }
    }

    /// Newest vertex bisection of the marked triangles and of every triangle
    /// containing a marked edge, followed by the closure that keeps the mesh
    /// conforming. Marked edges are given by their endpoint vertices.
    pub fn bisect_marked(&self, marked_triangles: &[usize], marked_edges: &[[usize; 2]]) -> Mesh {
        let mut split: HashSet<(usize, usize)> = HashSet::new();
        for &t in marked_triangles {
            let (a, b) = local_edge(&self.triangles[t], self.refinement_edge[t] as usize);
            split.insert(edge_key(a, b));
        }
        for e in marked_edges {
            split.insert(edge_key(e[0], e[1]));
        }
        if split.is_empty() {
            return self.clone();
        }
        // closure: a triangle with any split edge must split its refinement edge
        loop {
            let mut changed = false;
            for (t, tri) in self.triangles.iter().enumerate() {
                let (a, b) = local_edge(tri, self.refinement_edge[t] as usize);
                let rkey = edge_key(a, b);
                if split.contains(&rkey) {
                    continue;
                }
                if (0..3).any(|k| {
                    let (a, b) = local_edge(tri, k);
                    split.contains(&edge_key(a, b))
                }) {
                    split.insert(rkey);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(self.triangles.len() + 2 * split.len());
        let mut refinement_edge = Vec::with_capacity(triangles.capacity());
        let mut generation = Vec::with_capacity(triangles.capacity());

        let mut stack = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            stack.push((*tri, self.refinement_edge[t] as usize, self.generation[t]));
            while let Some((tri, r, gen)) = stack.pop() {
                let (a, b) = local_edge(&tri, r);
                let key = edge_key(a, b);
                if !split.contains(&key) {
                    triangles.push(tri);
                    refinement_edge.push(r as u8);
                    generation.push(gen);
                    continue;
                }
                let m = *midpoints.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                    vertices.len() - 1
                });
                let c = tri[r];
                // newest vertex m sits at local index 0 of both children, so
                // their refinement edges are the parent's remaining edges
                stack.push(([m, b, c], 0, gen + 1));
                stack.push(([m, c, a], 0, gen + 1));
            }
        }
        Mesh { vertices, triangles, refinement_edge, generation }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for (t, r) in self.triangles.iter().zip(&self.refinement_edge) {
            writeln!(w, "{} {} {} {}", t[0], t[1], t[2], r)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Mesh> {
        let mut tokens = Vec::new();
        for line in r.lines() {
            let line = line?;
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse(format!("mesh file truncated reading {what}")));
        let parse_usize = |s: String| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let parse_f64 = |s: String| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        let nv = parse_usize(next("header")?)?;
        let nt = parse_usize(next("header")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([parse_f64(next("vertex")?)?, parse_f64(next("vertex")?)?]);
        }
        let mut triangles = Vec::with_capacity(nt);
        let mut refinement_edge = Vec::with_capacity(nt);
        for _ in 0..nt {
            let i = parse_usize(next("triangle")?)?;
            let j = parse_usize(next("triangle")?)?;
            let k = parse_usize(next("triangle")?)?;
            let r = parse_usize(next("triangle")?)?;
            if r > 2 {
                return Err(Error::Parse(format!("refinement edge index {r} out of range")));
            }
            triangles.push([i, j, k]);
            refinement_edge.push(r as u8);
        }
        if next("end").is_ok() {
            return Err(Error::Parse("trailing data after mesh".into()));
        }
        Mesh::with_refinement_edges(vertices, triangles, refinement_edge)
    }
}

#[derive(Debug, Clone)]
pub struct InteriorEdge {
    pub id: usize,
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: usize,
    /// Unit normal pointing from `left` into `right`.
    pub normal: Point,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub id: usize,
    pub vertices: [usize; 2],
    pub triangle: usize,
}

#[derive(Debug, Clone)]
pub struct EdgeTopology {
    /// All edges in first-seen order; endpoints sorted ascending.
    pub edges: Vec<[usize; 2]>,
    /// Global edge id of each local edge of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    pub interior: Vec<InteriorEdge>,
    pub boundary: Vec<BoundaryEdge>,
    pub is_boundary_edge: Vec<bool>,
    pub is_boundary_vertex: Vec<bool>,
}

impl EdgeTopology {
    pub fn build(mesh: &Mesh) -> Result<Self> {
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut owners: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut local = [0; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let (a, b) = local_edge(tri, k);
                let key = edge_key(a, b);
                let id = *ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    owners.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                owners[id].push(t);
                *slot = id;
            }
            triangle_edges.push(local);
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut is_boundary_edge = vec![false; edges.len()];
        let mut is_boundary_vertex = vec![false; mesh.num_vertices()];
        for (id, (e, own)) in edges.iter().zip(&owners).enumerate() {
            match own.as_slice() {
                &[t] => {
                    is_boundary_edge[id] = true;
                    is_boundary_vertex[e[0]] = true;
                    is_boundary_vertex[e[1]] = true;
                    boundary.push(BoundaryEdge { id, vertices: *e, triangle: t });
                }
                &[l, r] if l != r => {
                    let pa = mesh.vertices()[e[0]];
                    let pb = mesh.vertices()[e[1]];
                    let length = distance(pa, pb);
                    let mut normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                    let cl = mesh.centroid(l);
                    let cr = mesh.centroid(r);
                    if normal[0] * (cr[0] - cl[0]) + normal[1] * (cr[1] - cl[1]) < 0.0 {
                        normal = [-normal[0], -normal[1]];
                    }
                    interior.push(InteriorEdge { id, vertices: *e, left: l, right: r, normal, length });
                }
                _ => return Err(Error::NonConforming(e[0], e[1], own.len())),
            }
        }
        // a hanging node shows up as a one-sided vertex inside a one-sided edge
        let verts = mesh.vertices();
        for b in &boundary {
            let pa = verts[b.vertices[0]];
            let pb = verts[b.vertices[1]];
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            for c in &boundary {
                for &v in &c.vertices {
                    if v == b.vertices[0] || v == b.vertices[1] {
                        continue;
                    }
                    let p = verts[v];
                    let s = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                    let cross = (p[0] - pa[0]) * (pb[1] - pa[1]) - (p[1] - pa[1]) * (pb[0] - pa[0]);
                    if s > 1e-12 && s < 1.0 - 1e-12 && cross.abs() <= 1e-12 * len2 {
                        return Err(Error::NonConforming(b.vertices[0], b.vertices[1], 1));
                    }
                }
            }
        }
        Ok(EdgeTopology { edges, triangle_edges, interior, boundary, is_boundary_edge, is_boundary_vertex })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
}

/// Bucket grid over triangle bounding boxes for point location.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    lo: Point,
    cell: Point,
    n: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in mesh.vertices() {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let side = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0) as usize;
        let n = [side, side];
        let cell = [
            ((hi[0] - lo[0]) / n[0] as f64).max(f64::MIN_POSITIVE),
            ((hi[1] - lo[1]) / n[1] as f64).max(f64::MIN_POSITIVE),
        ];
        let mut loc = PointLocator { mesh, lo, cell, n, buckets: vec![Vec::new(); n[0] * n[1]] };
        for t in 0..mesh.num_triangles() {
            let c = mesh.corners(t);
            let bmin = [c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), c.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
            let bmax = [c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), c.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
            let (i0, j0) = loc.cell_of(bmin);
            let (i1, j1) = loc.cell_of(bmax);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * n[0] + i].push(t);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let f = |d: usize| (((p[d] - self.lo[d]) / self.cell[d]).floor().max(0.0) as usize).min(self.n[d] - 1);
        (f(0), f(1))
    }

    /// Triangle containing `p` together with its barycentric coordinates.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.n[0] + i] {
            let bary = barycentric(self.mesh.corners(t), p);
            let worst = bary.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((t, bary));
            }
            if best.as_ref().map_or(true, |b| worst > b.2) {
                best = Some((t, bary, worst));
            }
        }
        best.filter(|b| b.2 > -1e-10).map(|b| (b.0, b.1))
    }
}

pub fn barycentric(c: [Point; 3], p: Point) -> [f64; 3] {
    let total = signed_area(c[0], c[1], c[2]);
    let l1 = signed_area(c[0], p, c[2]) / total;
    let l2 = signed_area(c[0], c[1], p) / total;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangle_square() -> Mesh {
        Mesh::unit_square(1)
    }

    fn euler(mesh: &Mesh) -> isize {
        let topo = EdgeTopology::build(mesh).unwrap();
        mesh.num_vertices() as isize - topo.num_edges() as isize + mesh.num_triangles() as isize
    }

    #[test]
    fn topology_of_two_triangle_square() {
        let topo = EdgeTopology::build(&two_triangle_square()).unwrap();
        assert_eq!(topo.interior.len(), 1);
        assert_eq!(topo.boundary.len(), 4);
        assert!((topo.interior[0].length - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn topology_of_single_triangle() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let topo = EdgeTopology::build(&mesh).unwrap();
        assert_eq!(topo.interior.len(), 0);
        assert_eq!(topo.boundary.len(), 3);
    }

    #[test]
    fn topology_of_2x2_grid() {
        let mesh = Mesh::unit_square(2);
        assert_eq!(mesh.num_triangles(), 8);
        assert_eq!(EdgeTopology::build(&mesh).unwrap().interior.len(), 8);
    }

    #[test]
    fn normals_point_left_to_right_and_are_unit() {
        let mesh = Mesh::unit_square(3);
        let topo = EdgeTopology::build(&mesh).unwrap();
        for e in &topo.interior {
            assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-14);
            let cl = mesh.centroid(e.left);
            let cr = mesh.centroid(e.right);
            assert!(e.normal[0] * (cr[0] - cl[0]) + e.normal[1] * (cr[1] - cl[1]) > 0.0);
        }
    }

    #[test]
    fn edge_shared_by_three_triangles_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 0.5]];
        let mesh = Mesh::new(v, vec![[0, 1, 2], [0, 3, 1], [0, 1, 4]]).unwrap();
        assert!(matches!(EdgeTopology::build(&mesh), Err(Error::NonConforming(0, 1, 3))));
    }

    #[test]
    fn hanging_node_is_rejected() {
        // right triangle split once on one side only
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let tris = vec![[0, 1, 4], [1, 2, 4], [0, 2, 3]];
        let mesh = Mesh::new(v, tris).unwrap();
        assert!(EdgeTopology::build(&mesh).is_err());
    }

    #[test]
    fn red_refinement_counts() {
        let m1 = two_triangle_square().uniform_refine();
        assert_eq!(m1.num_triangles(), 8);
        assert_eq!(m1.num_vertices(), 9);
        assert_eq!(euler(&m1), 1);
        let m2 = m1.uniform_refine();
        assert_eq!(m2.num_triangles(), 32);
        assert_eq!(euler(&m2), 1);
        assert!((m2.max_diameter() - 0.25 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisecting_one_triangle_forces_its_neighbour() {
        let mesh = two_triangle_square();
        let refined = mesh.bisect_marked(&[0], &[]);
        assert_eq!(refined.num_triangles(), 4);
        assert_eq!(euler(&refined), 1);
        EdgeTopology::build(&refined).unwrap();
        let total: f64 = (0..4).map(|t| refined.area(t)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_marking_is_identity() {
        let mesh = Mesh::unit_square(2);
        assert_eq!(mesh.bisect_marked(&[], &[]), mesh);
    }

    #[test]
    fn marked_edge_bisects_both_neighbours() {
        let mesh = Mesh::unit_square(2);
        let topo = EdgeTopology::build(&mesh).unwrap();
        let e = &topo.interior[0];
        let refined = mesh.bisect_marked(&[], &[e.vertices]);
        let topo2 = EdgeTopology::build(&refined).unwrap();
        let mid = [
            0.5 * (mesh.vertices()[e.vertices[0]][0] + mesh.vertices()[e.vertices[1]][0]),
            0.5 * (mesh.vertices()[e.vertices[0]][1] + mesh.vertices()[e.vertices[1]][1]),
        ];
        assert!(refined.vertices().iter().any(|v| distance(*v, mid) < 1e-15));
        assert!(topo2.interior.len() > topo.interior.len());
    }

    #[test]
    fn repeated_corner_refinement_stays_conforming_and_shape_regular() {
        let mut mesh = Mesh::unit_square(2);
        let initial = mesh.min_angle();
        for _ in 0..12 {
            let marked: Vec<usize> = (0..mesh.num_triangles())
                .filter(|&t| mesh.corners(t).iter().any(|p| p[0] == 0.0 && p[1] == 0.0))
                .collect();
            mesh = mesh.bisect_marked(&marked, &[]);
            EdgeTopology::build(&mesh).unwrap();
            assert_eq!(euler(&mesh), 1);
        }
        assert!(mesh.min_angle() >= 0.4 * initial);
    }

    #[test]
    fn mesh_file_round_trip() {
        let mesh = Mesh::unit_square(2).bisect_marked(&[3], &[]);
        let mut buf = Vec::new();
        mesh.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("{} {}\n", mesh.num_vertices(), mesh.num_triangles())));
        let back = Mesh::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.triangles(), mesh.triangles());
        assert_eq!(back.refinement_edges(), mesh.refinement_edges());
    }

    #[test]
    fn malformed_mesh_file() {
        assert!(Mesh::read_from("3 1\n0 0\n1 0\n".as_bytes()).is_err());
        assert!(Mesh::read_from("3 1\n0 0\n1 0\n0 1\n0 1 2 5\n".as_bytes()).is_err());
    }

    #[test]
    fn locator_finds_points() {
        let mesh = Mesh::unit_square(4).bisect_marked(&[0, 5], &[]);
        let loc = PointLocator::new(&mesh);
        for p in [[0.0, 0.0], [1.0, 1.0], [0.33, 0.71], [0.5, 0.5], [0.999, 0.001]] {
            let (t, bary) = loc.locate(p).unwrap();
            let c = mesh.corners(t);
            let q = [
                bary[0] * c[0][0] + bary[1] * c[1][0] + bary[2] * c[2][0],
                bary[0] * c[0][1] + bary[1] * c[1][1] + bary[2] * c[2][1],
            ];
            assert!(distance(p, q) < 1e-14);
        }
        assert!(loc.locate([2.0, 2.0]).is_none());
    }
}
