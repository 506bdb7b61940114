//! 2D simplicial meshes with tagged boundary facets.
//!
//! A [`Mesh`] is immutable once built. Generators produce counter-clockwise
//! cells and boundary facets oriented so the domain lies to their left.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Tag covering the whole boundary of generated unit-square meshes.
pub const WHOLE: u32 = 1;
/// Outer boundary of the annulus.
pub const SKULL: u32 = 2;
/// Inner boundary of the annulus.
pub const VENTRICLE: u32 = 3;

pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("degenerate annulus radii: inner {inner}, outer {outer}")]
    DegenerateRadii { inner: f64, outer: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    /// Boundary facets; `facet_tags[i]` is the tag of `facets[i]`.
    pub facets: Vec<[usize; 2]>,
    pub facet_tags: Vec<u32>,
}

/// Unique undirected edges plus the cell-to-edge map.
///
/// Local edge `k` of a cell is the edge opposite local vertex `k`.
#[derive(Debug, Clone)]
pub struct EdgeTopology {
    pub edges: Vec<[usize; 2]>,
    pub cell_edges: Vec<[usize; 3]>,
    /// Number of cells sharing each edge (1 on the boundary, 2 inside).
    pub edge_cells: Vec<u8>,
    lookup: HashMap<[usize; 2], usize>,
}

impl EdgeTopology {
    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&sorted_pair(a, b)).copied()
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Local vertex pair of the edge opposite local vertex `k`.
pub const fn opposite_edge(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    }
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds a mesh and checks every structural invariant.
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        facets: Vec<[usize; 2]>,
        facet_tags: Vec<u32>,
    ) -> Result<Self, MeshError> {
        let mesh = Mesh { vertices, cells, facets, facet_tags };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_points(c);
        signed_area(a, b, d)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Distinct tags in first-appearance order.
    pub fn tags(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for &t in &self.facet_tags {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        out
    }

    pub fn edge_topology(&self) -> EdgeTopology {
        let mut lookup = HashMap::with_capacity(self.cells.len() * 2);
        let mut edges = Vec::new();
        let mut edge_cells: Vec<u8> = Vec::new();
        let mut cell_edges = Vec::with_capacity(self.cells.len());
        for cell in &self.cells {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let (i, j) = opposite_edge(k);
                let key = sorted_pair(cell[i], cell[j]);
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_cells.push(0);
                    edges.len() - 1
                });
                edge_cells[id] = edge_cells[id].saturating_add(1);
                *slot = id;
            }
            cell_edges.push(local);
        }
        EdgeTopology { edges, cell_edges, edge_cells, lookup }
    }

    /// Checks orientation, index ranges, manifoldness and tag coverage.
    pub fn validate(&self) -> Result<(), MeshError> {
        let nv = self.vertices.len();
        if self.facets.len() != self.facet_tags.len() {
            return Err(MeshError::Invalid(format!(
                "{} facets but {} facet tags",
                self.facets.len(),
                self.facet_tags.len()
            )));
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::Invalid(format!("cell {c} references vertex {v} of {nv}")));
            }
            if self.cell_area(c) <= 0.0 {
                return Err(MeshError::Invalid(format!("cell {c} has non-positive signed area")));
            }
        }
        let topo = self.edge_topology();
        if let Some(e) = topo.edge_cells.iter().position(|&n| n > 2) {
            let [a, b] = topo.edges[e];
            return Err(MeshError::Invalid(format!("edge ({a}, {b}) shared by more than two cells")));
        }
        let mut seen = vec![false; topo.edges.len()];
        for (f, facet) in self.facets.iter().enumerate() {
            if let Some(&v) = facet.iter().find(|&&v| v >= nv) {
                return Err(MeshError::Invalid(format!("facet {f} references vertex {v} of {nv}")));
            }
            let e = topo.find(facet[0], facet[1]).ok_or_else(|| {
                MeshError::Invalid(format!("facet {f} ({}, {}) is not a cell edge", facet[0], facet[1]))
            })?;
            if topo.edge_cells[e] != 1 {
                return Err(MeshError::Invalid(format!("facet {f} is an interior edge")));
            }
            if seen[e] {
                return Err(MeshError::Invalid(format!("facet {f} listed twice")));
            }
            seen[e] = true;
        }
        let untagged = topo.edge_cells.iter().zip(&seen).filter(|(&n, &s)| n == 1 && !s).count();
        if untagged > 0 {
            return Err(MeshError::Invalid(format!("{untagged} boundary edges carry no tag")));
        }
        Ok(())
    }

    /// Replaces every facet tag by `f(midpoint, old_tag)`.
    pub fn retag(&self, f: impl Fn(Point, u32) -> u32) -> Mesh {
        let mut out = self.clone();
        for (facet, tag) in out.facets.iter().zip(out.facet_tags.iter_mut()) {
            let a = self.vertices[facet[0]];
            let b = self.vertices[facet[1]];
            *tag = f([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], *tag);
        }
        out
    }

    /// Splits every triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let topo = self.edge_topology();
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(topo.edges.iter().map(|&[a, b]| {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
        }));
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (cell, ce) in self.cells.iter().zip(&topo.cell_edges) {
            let [v0, v1, v2] = *cell;
            let [m0, m1, m2] = [nv + ce[0], nv + ce[1], nv + ce[2]];
            cells.push([v0, m2, m1]);
            cells.push([m2, v1, m0]);
            cells.push([m1, m0, v2]);
            cells.push([m0, m1, m2]);
        }
        let mut facets = Vec::with_capacity(2 * self.facets.len());
        let mut facet_tags = Vec::with_capacity(2 * self.facets.len());
        for (&[a, b], &tag) in self.facets.iter().zip(&self.facet_tags) {
            let m = nv + topo.find(a, b).expect("boundary facet is a mesh edge");
            facets.push([a, m]);
            facets.push([m, b]);
            facet_tags.extend([tag, tag]);
        }
        Mesh { vertices, cells, facets, facet_tags }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("mpetmesh 1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        let _ = writeln!(s, "cells {}", self.cells.len());
        for c in &self.cells {
            let _ = writeln!(s, "{} {} {}", c[0], c[1], c[2]);
        }
        let _ = writeln!(s, "facets {}", self.facets.len());
        for (f, t) in self.facets.iter().zip(&self.facet_tags) {
            let _ = writeln!(s, "{} {} {}", f[0], f[1], t);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |line: usize, message: String| MeshError::Parse { line, message };
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| MeshError::Parse {
                line: text.lines().count() + 1,
                message: format!("unexpected end of file, expected {what}"),
            })
        };

        let (ln, header) = next("header")?;
        if header.split_whitespace().collect::<Vec<_>>() != ["mpetmesh", "1"] {
            return Err(err(ln, format!("expected header `mpetmesh 1`, found `{header}`")));
        }

        fn count(ln: usize, line: &str, key: &str) -> Result<usize, MeshError> {
            let mut it = line.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some(k), Some(n), None) if k == key => {
                    n.parse().map_err(|_| MeshError::Parse { line: ln, message: format!("invalid {key} count `{n}`") })
                }
                _ => Err(MeshError::Parse { line: ln, message: format!("expected `{key} N`, found `{line}`") }),
            }
        }
        fn fields<T: std::str::FromStr, const N: usize>(
            ln: usize,
            line: &str,
            what: &str,
        ) -> Result<[T; N], MeshError> {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != N {
                return Err(MeshError::Parse {
                    line: ln,
                    message: format!("{what} needs {N} fields, found {}", parts.len()),
                });
            }
            let mut out = Vec::with_capacity(N);
            for p in parts {
                out.push(
                    p.parse::<T>()
                        .map_err(|_| MeshError::Parse { line: ln, message: format!("cannot parse `{p}` in {what}") })?,
                );
            }
            Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
        }

        let (ln, l) = next("vertices")?;
        let nv = count(ln, l, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = next("vertex")?;
            let v: [f64; 2] = fields(ln, l, "vertex")?;
            if !v.iter().all(|x| x.is_finite()) {
                return Err(err(ln, "non-finite vertex coordinate".into()));
            }
            vertices.push(v);
        }

        let (ln, l) = next("cells")?;
        let nc = count(ln, l, "cells")?;
        let mut cells = Vec::with_capacity(nc);
        for c in 0..nc {
            let (ln, l) = next("cell")?;
            let cell: [usize; 3] = fields(ln, l, "cell")?;
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(err(ln, format!("cell {c} references vertex {v} but only {nv} vertices exist")));
            }
            if signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]) <= 0.0 {
                return Err(err(ln, format!("cell {c} is clockwise or degenerate")));
            }
            cells.push(cell);
        }

        let (ln, l) = next("facets")?;
        let nf = count(ln, l, "facets")?;
        let mut facets = Vec::with_capacity(nf);
        let mut facet_tags = Vec::with_capacity(nf);
        for f in 0..nf {
            let (ln, l) = next("facet")?;
            let [a, b, tag]: [usize; 3] = fields(ln, l, "facet")?;
            if a >= nv || b >= nv {
                return Err(err(ln, format!("facet {f} references a vertex beyond {nv}")));
            }
            let tag = u32::try_from(tag).map_err(|_| err(ln, format!("facet tag {tag} out of range")))?;
            facets.push([a, b]);
            facet_tags.push(tag);
        }
        if let Some((ln, l)) = lines.next() {
            return Err(err(ln, format!("trailing content `{l}`")));
        }
        Mesh::new(vertices, cells, facets, facet_tags)
    }
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    Mesh::parse(&std::fs::read_to_string(path)?)
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}

/// Which diagonal cuts each square of a unit-square mesh.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Diagonal {
    /// Lower-left to upper-right.
    #[default]
    Right,
    /// Lower-right to upper-left.
    Left,
}

impl Diagonal {
    pub fn describe(self) -> &'static str {
        match self {
            Diagonal::Right => "lower-left to upper-right",
            Diagonal::Left => "lower-right to upper-left",
        }
    }
}

/// `n x n` squares on the unit square, each cut by its lower-left to
/// upper-right diagonal. All boundary facets carry [`WHOLE`].
pub fn build_unit_square_mesh(n: usize) -> Mesh {
    build_unit_square_mesh_with(n, Diagonal::Right)
}

pub fn build_unit_square_mesh_with(n: usize, diagonal: Diagonal) -> Mesh {
    assert!(n >= 1, "unit square mesh needs n >= 1");
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    // pin the far edges to exactly 1.0
    for v in &mut vertices {
        for x in v.iter_mut() {
            if (*x - 1.0).abs() < 1e-12 {
                *x = 1.0;
            }
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match diagonal {
                Diagonal::Right => {
                    cells.push([a, b, c]);
                    cells.push([a, c, d]);
                }
                Diagonal::Left => {
                    cells.push([a, b, d]);
                    cells.push([b, c, d]);
                }
            }
        }
    }
    let mut facets = Vec::with_capacity(4 * n);
    for i in 0..n {
        facets.push([id(i, 0), id(i + 1, 0)]);
    }
    for j in 0..n {
        facets.push([id(n, j), id(n, j + 1)]);
    }
    for i in (0..n).rev() {
        facets.push([id(i + 1, n), id(i, n)]);
    }
    for j in (0..n).rev() {
        facets.push([id(0, j + 1), id(0, j)]);
    }
    let facet_tags = vec![WHOLE; facets.len()];
    Mesh { vertices, cells, facets, facet_tags }
}

/// Annulus centred at the origin built from concentric vertex rings.
///
/// `resolution` is the number of radial layers; the angular count is chosen
/// so cells are roughly isotropic. Outer facets are tagged [`SKULL`], inner
/// facets [`VENTRICLE`].
pub fn build_annulus_mesh(r_inner: f64, r_outer: f64, resolution: usize) -> Result<Mesh, MeshError> {
    if !(r_inner > 0.0 && r_outer > r_inner && r_outer.is_finite()) || resolution == 0 {
        return Err(MeshError::DegenerateRadii { inner: r_inner, outer: r_outer });
    }
    let layers = resolution;
    let dr = (r_outer - r_inner) / layers as f64;
    let mean_circumference = std::f64::consts::PI * (r_inner + r_outer);
    let sectors = ((mean_circumference / dr).ceil() as usize).max(8);
    let id = |ring: usize, k: usize| ring * sectors + (k % sectors);
    let mut vertices = Vec::with_capacity((layers + 1) * sectors);
    for ring in 0..=layers {
        let r = if ring == layers { r_outer } else { r_inner + ring as f64 * dr };
        for k in 0..sectors {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / sectors as f64;
            vertices.push([r * theta.cos(), r * theta.sin()]);
        }
    }
    let mut cells = Vec::with_capacity(2 * layers * sectors);
    for ring in 0..layers {
        for k in 0..sectors {
            let (a, b) = (id(ring, k), id(ring, k + 1));
            let (c, d) = (id(ring + 1, k + 1), id(ring + 1, k));
            cells.push([a, c, b]);
            cells.push([a, d, c]);
        }
    }
    let mut facets = Vec::with_capacity(2 * sectors);
    let mut facet_tags = Vec::with_capacity(2 * sectors);
    for k in 0..sectors {
        facets.push([id(layers, k), id(layers, k + 1)]);
        facet_tags.push(SKULL);
    }
    for k in 0..sectors {
        facets.push([id(0, k + 1), id(0, k)]);
        facet_tags.push(VENTRICLE);
    }
    Mesh::new(vertices, cells, facets, facet_tags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = build_unit_square_mesh(4);
        assert_eq!((m.vertices.len(), m.cells.len(), m.facets.len()), (25, 32, 16));
        let m1 = build_unit_square_mesh(1);
        assert_eq!((m1.vertices.len(), m1.cells.len()), (4, 2));
        assert!((build_unit_square_mesh(8).total_area() - 1.0).abs() < 1e-14);
        m.validate().unwrap();
        assert!(m.facet_tags.iter().all(|&t| t == WHOLE));
    }

    #[test]
    fn left_diagonal_mesh_is_valid() {
        let m = build_unit_square_mesh_with(4, Diagonal::Left);
        m.validate().unwrap();
        assert_eq!((m.vertices.len(), m.cells.len()), (25, 32));
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        // first square: cells share the edge (1,0)-(0,1)
        assert_eq!(m.cells[0], [0, 1, 5]);
        assert_eq!(m.cells[1], [1, 6, 5]);
    }

    #[test]
    fn euler_formula_on_generated_meshes() {
        for m in [build_unit_square_mesh(3), build_unit_square_mesh(4).refine_uniform()] {
            let e = m.edge_topology().edges.len() as i64;
            assert_eq!(m.vertices.len() as i64 - e + m.cells.len() as i64, 1);
        }
        // the annulus has a hole, so V - E + F = 0
        let a = build_annulus_mesh(1.0, 2.0, 3).unwrap();
        let e = a.edge_topology().edges.len() as i64;
        assert_eq!(a.vertices.len() as i64 - e + a.cells.len() as i64, 0);
    }

    #[test]
    fn refinement_matches_direct_construction() {
        let m = build_unit_square_mesh(4);
        let r = m.refine_uniform();
        assert_eq!(r.cells.len(), 128);
        r.validate().unwrap();
        assert!((r.total_area() - 1.0).abs() < 1e-14);
        let rr = r.refine_uniform();
        let direct = build_unit_square_mesh(16);
        let key = |p: &Point| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let mut a: Vec<_> = rr.vertices.iter().map(key).collect();
        let mut b: Vec<_> = direct.vertices.iter().map(key).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn annulus_area_and_tags() {
        let m = build_annulus_mesh(30.0, 100.0, 8).unwrap();
        let exact = std::f64::consts::PI * (100.0f64.powi(2) - 30.0f64.powi(2));
        assert!((m.total_area() - exact).abs() / exact < 0.02);
        assert!(m.facet_tags.iter().all(|&t| t == SKULL || t == VENTRICLE));
        assert!(build_annulus_mesh(50.0, 50.0, 4).is_err());
        assert!(build_annulus_mesh(0.0, 50.0, 4).is_err());
    }

    #[test]
    fn round_trip_text() {
        let m = build_unit_square_mesh(4);
        assert_eq!(Mesh::parse(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn parse_errors_carry_context() {
        let bad_index = "mpetmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 7\nfacets 0\n";
        match Mesh::parse(bad_index) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
        let clockwise = "mpetmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 2 1\nfacets 0\n";
        let e = Mesh::parse(clockwise).unwrap_err().to_string();
        assert!(e.contains("cell 0") && e.contains("clockwise"), "{e}");
        assert!(Mesh::parse("mesh 2\n").is_err());
    }
}
