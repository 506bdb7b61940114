//! Continuous Lagrange spaces, dof maps and Dirichlet bookkeeping.
//!
//! Scalar nodes are numbered vertices first, then edges (degree 2). Vector
//! spaces interleave components, so dof `2 * node + comp`.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::elements::{CellGeometry, ReferenceElement, MAX_NODES};
use crate::mesh::{Mesh, Point};

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("boundary tag {tag} in Dirichlet spec for {field} does not exist on the mesh")]
    UnknownTag { field: String, tag: u32 },
    #[error("expected Dirichlet tags for {expected} pressure networks, got {found}")]
    NetworkCount { expected: usize, found: usize },
    #[error("network count must be at least 1")]
    NoNetworks,
}

#[derive(Debug, Clone)]
pub struct FESpace {
    pub mesh: Arc<Mesh>,
    pub element: ReferenceElement,
    pub value_size: usize,
    pub constrained_tags: Vec<u32>,
    cell_nodes: Vec<[usize; MAX_NODES]>,
    facet_nodes: Vec<[usize; 3]>,
    node_coords: Vec<Point>,
    tag_nodes: BTreeMap<u32, Vec<usize>>,
    constrained: Vec<usize>,
    is_constrained: Vec<bool>,
}

impl FESpace {
    /// Builds a space; unknown tags in `constrained_tags` are rejected.
    pub fn new(
        mesh: Arc<Mesh>,
        degree: usize,
        value_size: usize,
        constrained_tags: &[u32],
    ) -> Result<Self, SpaceError> {
        let element = ReferenceElement::new(degree);
        let known = mesh.tags();
        if let Some(&tag) = constrained_tags.iter().find(|t| !known.contains(t)) {
            return Err(SpaceError::UnknownTag { field: format!("degree-{degree} space"), tag });
        }
        let nv = mesh.num_vertices();
        let topo = (degree == 2).then(|| mesh.edge_topology());

        let mut node_coords = mesh.vertices.clone();
        if let Some(t) = &topo {
            node_coords.extend(t.edges.iter().map(|&[a, b]| {
                let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
                [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
            }));
        }

        let cell_nodes = mesh
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let mut n = [0usize; MAX_NODES];
                n[..3].copy_from_slice(cell);
                if let Some(t) = &topo {
                    for k in 0..3 {
                        n[3 + k] = nv + t.cell_edges[c][k];
                    }
                }
                n
            })
            .collect();

        let mut facet_nodes = Vec::with_capacity(mesh.facets.len());
        let mut tag_nodes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (&[a, b], &tag) in mesh.facets.iter().zip(&mesh.facet_tags) {
            let mid = topo.as_ref().map_or(usize::MAX, |t| nv + t.find(a, b).expect("facet is an edge"));
            facet_nodes.push([a, b, mid]);
            let list = tag_nodes.entry(tag).or_default();
            list.extend([a, b]);
            if mid != usize::MAX {
                list.push(mid);
            }
        }
        for list in tag_nodes.values_mut() {
            list.sort_unstable();
            list.dedup();
        }

        let ndofs = node_coords.len() * value_size;
        let mut is_constrained = vec![false; ndofs];
        for tag in constrained_tags {
            for &node in &tag_nodes[tag] {
                for comp in 0..value_size {
                    is_constrained[node * value_size + comp] = true;
                }
            }
        }
        let constrained = (0..ndofs).filter(|&d| is_constrained[d]).collect();

        Ok(FESpace {
            mesh,
            element,
            value_size,
            constrained_tags: constrained_tags.to_vec(),
            cell_nodes,
            facet_nodes,
            node_coords,
            tag_nodes,
            constrained,
            is_constrained,
        })
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn ndofs(&self) -> usize {
        self.node_coords.len() * self.value_size
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.element.node_count()
    }

    /// Scalar node indices of a cell.
    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        &self.cell_nodes[c][..self.element.node_count()]
    }

    /// Global dofs of a cell, ordered node-major then component.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        let vs = self.value_size;
        self.cell_nodes(c).iter().flat_map(|&n| (0..vs).map(move |k| n * vs + k)).collect()
    }

    /// Scalar nodes of boundary facet `f`: its two vertices, then the midpoint for degree 2.
    pub fn facet_nodes(&self, f: usize) -> &[usize] {
        let n = if self.element.degree == 2 { 3 } else { 2 };
        &self.facet_nodes[f][..n]
    }

    pub fn node_coords(&self) -> &[Point] {
        &self.node_coords
    }

    pub fn dof_coords(&self, dof: usize) -> Point {
        self.node_coords[dof / self.value_size]
    }

    /// Scalar nodes lying on facets with `tag`.
    pub fn nodes_on_tag(&self, tag: u32) -> &[usize] {
        self.tag_nodes.get(&tag).map_or(&[], Vec::as_slice)
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.is_constrained[dof]
    }

    pub fn geometry(&self, c: usize) -> CellGeometry {
        CellGeometry::new(self.mesh.cell_points(c))
    }

    /// Lowest-index cell containing `x`, with its barycentric coordinates.
    pub fn locate(&self, x: Point) -> Option<(usize, [f64; 3])> {
        (0..self.mesh.num_cells()).find_map(|c| {
            let b = self.geometry(c).barycentric(x);
            (b.iter().all(|&l| l >= -1e-12)).then_some((c, b))
        })
    }
}

/// Dirichlet tags per field; the total pressure never carries any.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpec {
    pub displacement: Vec<u32>,
    pub pressures: Vec<Vec<u32>>,
}

impl DirichletSpec {
    pub fn whole_boundary(networks: usize) -> Self {
        DirichletSpec { displacement: vec![crate::mesh::WHOLE], pressures: vec![vec![crate::mesh::WHOLE]; networks] }
    }
}

/// Spaces of one formulation in field order `(u, [p0], p1..pA)`.
#[derive(Debug, Clone)]
pub struct FieldSpaces {
    pub spaces: Vec<Arc<FESpace>>,
    pub total_pressure: bool,
}

impl FieldSpaces {
    pub fn networks(&self) -> usize {
        self.spaces.len() - 1 - usize::from(self.total_pressure)
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn displacement(&self) -> &Arc<FESpace> {
        &self.spaces[0]
    }

    pub fn total_pressure_space(&self) -> Option<&Arc<FESpace>> {
        self.total_pressure.then(|| &self.spaces[1])
    }

    /// Field index of network `j` (1-based).
    pub fn pressure_field(&self, j: usize) -> usize {
        j + usize::from(self.total_pressure)
    }

    pub fn pressure(&self, j: usize) -> &Arc<FESpace> {
        &self.spaces[self.pressure_field(j)]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.ndofs()).collect()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for s in &self.spaces {
            off.push(off.last().unwrap() + s.ndofs());
        }
        off
    }

    pub fn total_dofs(&self) -> usize {
        self.sizes().iter().sum()
    }
}

fn build_fields(
    mesh: Arc<Mesh>,
    networks: usize,
    spec: &DirichletSpec,
    total: bool,
) -> Result<FieldSpaces, SpaceError> {
    if networks == 0 {
        return Err(SpaceError::NoNetworks);
    }
    if spec.pressures.len() != networks {
        return Err(SpaceError::NetworkCount { expected: networks, found: spec.pressures.len() });
    }
    let known = mesh.tags();
    let check = |field: String, tags: &[u32]| match tags.iter().find(|t| !known.contains(t)) {
        Some(&tag) => Err(SpaceError::UnknownTag { field, tag }),
        None => Ok(()),
    };
    check("u".into(), &spec.displacement)?;
    for (j, tags) in spec.pressures.iter().enumerate() {
        check(format!("p{}", j + 1), tags)?;
    }
    let mut spaces = vec![Arc::new(FESpace::new(mesh.clone(), 2, 2, &spec.displacement)?)];
    if total {
        spaces.push(Arc::new(FESpace::new(mesh.clone(), 1, 1, &[])?));
    }
    for tags in &spec.pressures {
        spaces.push(Arc::new(FESpace::new(mesh.clone(), 1, 1, tags)?));
    }
    Ok(FieldSpaces { spaces, total_pressure: total })
}

/// P2 displacement, P1 total pressure and P1 network pressures.
pub fn make_taylor_hood_spaces(
    mesh: Arc<Mesh>,
    networks: usize,
    spec: &DirichletSpec,
) -> Result<FieldSpaces, SpaceError> {
    build_fields(mesh, networks, spec, true)
}

/// P2 displacement and P1 network pressures, without a total pressure.
pub fn make_standard_spaces(mesh: Arc<Mesh>, networks: usize, spec: &DirichletSpec) -> Result<FieldSpaces, SpaceError> {
    build_fields(mesh, networks, spec, false)
}

#[derive(Debug, Clone)]
pub struct FEFunction {
    pub space: Arc<FESpace>,
    pub coefficients: Vec<f64>,
}

impl FEFunction {
    pub fn zeros(space: Arc<FESpace>) -> Self {
        let n = space.ndofs();
        FEFunction { space, coefficients: vec![0.0; n] }
    }

    pub fn from_coefficients(space: Arc<FESpace>, coefficients: Vec<f64>) -> Self {
        assert_eq!(coefficients.len(), space.ndofs(), "coefficient length does not match space");
        FEFunction { space, coefficients }
    }

    /// Values (one per component) at barycentric point `b` of cell `c`.
    pub fn eval_in_cell(&self, c: usize, b: [f64; 3]) -> [f64; 2] {
        let mut v = [0.0; MAX_NODES];
        let mut g = [[0.0; 2]; MAX_NODES];
        self.space.element.eval(b, &mut v, &mut g);
        let vs = self.space.value_size;
        let mut out = [0.0; 2];
        for (a, &node) in self.space.cell_nodes(c).iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate().take(vs) {
                *o += v[a] * self.coefficients[node * vs + k];
            }
        }
        out
    }

    /// Point evaluation; `None` outside the mesh.
    pub fn eval(&self, x: Point) -> Option<[f64; 2]> {
        self.space.locate(x).map(|(c, b)| self.eval_in_cell(c, b))
    }
}

pub fn interpolate_scalar(space: &Arc<FESpace>, f: impl Fn(Point) -> f64) -> FEFunction {
    assert_eq!(space.value_size, 1, "scalar interpolation on a vector space");
    let coefficients = space.node_coords().iter().map(|&x| f(x)).collect();
    FEFunction { space: space.clone(), coefficients }
}

pub fn interpolate_vector(space: &Arc<FESpace>, f: impl Fn(Point) -> [f64; 2]) -> FEFunction {
    assert_eq!(space.value_size, 2, "vector interpolation on a scalar space");
    let coefficients = space.node_coords().iter().flat_map(|&x| f(x)).collect();
    FEFunction { space: space.clone(), coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_square_mesh, WHOLE};

    fn square(n: usize) -> Arc<Mesh> {
        Arc::new(build_unit_square_mesh(n))
    }

    #[test]
    fn taylor_hood_dof_counts() {
        let fs = make_taylor_hood_spaces(square(4), 2, &DirichletSpec::whole_boundary(2)).unwrap();
        assert_eq!(fs.len(), 4);
        assert_eq!(fs.sizes(), vec![162, 25, 25, 25]);
        assert!(fs.spaces[1].constrained_dofs().is_empty());
        assert_eq!(fs.pressure(1).constrained_dofs().len(), 16);
        assert_eq!(fs.pressure(2).constrained_dofs().len(), 16);
        // 16 boundary vertices + 16 boundary midpoints, two components each
        assert_eq!(fs.displacement().constrained_dofs().len(), 64);
        let fs4 = make_taylor_hood_spaces(square(2), 4, &DirichletSpec::whole_boundary(4)).unwrap();
        assert_eq!(fs4.len(), 6);
        let std = make_standard_spaces(square(2), 2, &DirichletSpec::whole_boundary(2)).unwrap();
        assert_eq!(std.len(), 3);
    }

    #[test]
    fn displacement_constraints_are_boundary_nodes() {
        let fs = make_taylor_hood_spaces(square(3), 1, &DirichletSpec::whole_boundary(1)).unwrap();
        let v = fs.displacement();
        for d in 0..v.ndofs() {
            let x = v.dof_coords(d);
            let on_boundary = x.iter().any(|&c| c.abs() < 1e-14 || (c - 1.0).abs() < 1e-14);
            assert_eq!(v.is_constrained(d), on_boundary, "dof {d} at {x:?}");
        }
    }

    #[test]
    fn unknown_tag_rejected() {
        let spec = DirichletSpec { displacement: vec![WHOLE], pressures: vec![vec![7]] };
        let err = make_taylor_hood_spaces(square(2), 1, &spec).unwrap_err();
        assert_eq!(err, SpaceError::UnknownTag { field: "p1".into(), tag: 7 });
    }

    #[test]
    fn constrained_count_is_4n() {
        for n in [1, 2, 5, 8] {
            let s = FESpace::new(square(n), 1, 1, &[WHOLE]).unwrap();
            assert_eq!(s.constrained_dofs().len(), 4 * n);
        }
    }

    #[test]
    fn interpolation_reproduces_affine_and_is_projection() {
        let s = Arc::new(FESpace::new(square(3), 1, 1, &[]).unwrap());
        let f = interpolate_scalar(&s, |x| x[0] + x[1]);
        for p in [[0.13, 0.71], [0.5, 0.5], [0.99, 0.01]] {
            assert!((f.eval(p).unwrap()[0] - (p[0] + p[1])).abs() < 1e-14);
        }
        let again = interpolate_scalar(&s, |x| f.eval(x).unwrap()[0]);
        for (a, b) in again.coefficients.iter().zip(&f.coefficients) {
            assert!((a - b).abs() < 1e-15);
        }
        let ones = interpolate_scalar(&s, |_| 1.0);
        assert!(ones.coefficients.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn continuity_across_shared_edge() {
        let s = Arc::new(FESpace::new(square(2), 2, 2, &[]).unwrap());
        let f = interpolate_vector(&s, |x| [(3.0 * x[0]).sin() * x[1], x[0] * x[0] - x[1]]);
        let topo = s.mesh.edge_topology();
        for (e, &[a, b]) in topo.edges.iter().enumerate() {
            if topo.edge_cells[e] != 2 {
                continue;
            }
            let (pa, pb) = (s.mesh.vertices[a], s.mesh.vertices[b]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let vals: Vec<[f64; 2]> = (0..s.mesh.num_cells())
                .filter(|&c| topo.cell_edges[c].contains(&e))
                .map(|c| f.eval_in_cell(c, s.geometry(c).barycentric(mid)))
                .collect();
            assert_eq!(vals.len(), 2);
            assert!(vals[0].iter().zip(&vals[1]).all(|(a, b)| (a - b).abs() < 1e-13));
        }
    }

    #[test]
    fn point_location_outside_is_none() {
        let s = Arc::new(FESpace::new(square(2), 1, 1, &[]).unwrap());
        assert!(s.locate([1.5, 0.5]).is_none());
        assert_eq!(s.locate([0.0, 0.0]).unwrap().0, 0);
    }
}
