use std::sync::Arc;

use crate::error::Result;
use crate::fem::basis::{AffineMap, BasisValues, LagrangeBasis, NodeKind};
use crate::mesh::{EdgeTopology, Mesh};
use crate::quadrature::{EdgeRule, QuadratureRule};
use crate::tensor::Point;

/// Continuous Lagrange space of degree `p` on a conforming mesh.
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<Mesh>,
    topology: EdgeTopology,
    basis: LagrangeBasis,
    dof_map: Vec<usize>,
    n_dofs: usize,
    is_boundary: Vec<bool>,
    boundary_dofs: Vec<usize>,
    nodes: Vec<Point>,
    volume_rule: QuadratureRule,
    edge_rule: EdgeRule,
    /// Basis tabulated at the volume quadrature points.
    tabulation: Vec<BasisValues>,
}

impl FeSpace {
    /// Space with quadrature exact to degree `2p` on triangles and edges.
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Arc<Self>> {
        Self::with_quadrature(mesh, degree, 2 * degree, 2 * degree)
    }

    pub fn with_quadrature(mesh: Arc<Mesh>, degree: usize, volume_degree: usize, edge_degree: usize) -> Result<Arc<Self>> {
        let basis = LagrangeBasis::new(degree)?;
        let topology = EdgeTopology::build(&mesh)?;
        let p = degree;
        let nloc = basis.num_local();
        let n_vertices = mesh.num_vertices();
        let per_edge = p - 1;
        let per_interior = (p - 1) * (p - 2) / 2;
        let edge_offset = n_vertices;
        let interior_offset = edge_offset + topology.num_edges() * per_edge;
        let n_dofs = interior_offset + mesh.num_triangles() * per_interior;

        let mut dof_map = Vec::with_capacity(mesh.num_triangles() * nloc);
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for kind in basis.kinds() {
                let g = match *kind {
                    NodeKind::Vertex(k) => tri[k],
                    NodeKind::Edge { edge, position } => {
                        let a = tri[(edge + 1) % 3];
                        let b = tri[(edge + 2) % 3];
                        let along = if a < b { position } else { per_edge - 1 - position };
                        edge_offset + topology.triangle_edges[t][edge] * per_edge + along
                    }
                    NodeKind::Interior(j) => interior_offset + t * per_interior + j,
                };
                dof_map.push(g);
            }
        }

        let mut is_boundary = vec![false; n_dofs];
        for (v, &b) in topology.is_boundary_vertex.iter().enumerate() {
            is_boundary[v] = b;
        }
        for e in &topology.boundary {
            for k in 0..per_edge {
                is_boundary[edge_offset + e.id * per_edge + k] = true;
            }
        }
        let boundary_dofs = (0..n_dofs).filter(|&i| is_boundary[i]).collect();

        let mut nodes = vec![[0.0; 2]; n_dofs];
        for t in 0..mesh.num_triangles() {
            let map = AffineMap::new(mesh.corners(t))?;
            for (i, node) in basis.nodes().iter().enumerate() {
                nodes[dof_map[t * nloc + i]] = map.to_physical(*node);
            }
        }

        let volume_rule = QuadratureRule::triangle(volume_degree);
        let edge_rule = EdgeRule::new(edge_degree);
        let tabulation = (0..volume_rule.len()).map(|q| basis.eval(volume_rule.reference_point(q))).collect();
        Ok(Arc::new(FeSpace {
            mesh,
            topology,
            basis,
            dof_map,
            n_dofs,
            is_boundary,
            boundary_dofs,
            nodes,
            volume_rule,
            edge_rule,
            tabulation,
        }))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn topology(&self) -> &EdgeTopology {
        &self.topology
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn num_local(&self) -> usize {
        self.basis.num_local()
    }

    pub fn element_dofs(&self, t: usize) -> &[usize] {
        let n = self.num_local();
        &self.dof_map[t * n..(t + 1) * n]
    }

    pub fn is_boundary_dof(&self, i: usize) -> bool {
        self.is_boundary[i]
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn interior_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs).filter(|&i| !self.is_boundary[i]).collect()
    }

    /// Physical location of each global Lagrange node.
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn volume_rule(&self) -> &QuadratureRule {
        &self.volume_rule
    }

    pub fn edge_rule(&self) -> &EdgeRule {
        &self.edge_rule
    }

    pub fn tabulation(&self) -> &[BasisValues] {
        &self.tabulation
    }

    pub fn element_map(&self, t: usize) -> AffineMap {
        AffineMap::new(self.mesh.corners(t)).expect("mesh triangles are validated on construction")
    }

    /// Physical quadrature points of every element, element-major.
    pub fn quadrature_points(&self) -> Vec<Point> {
        let rule = &self.volume_rule;
        (0..self.mesh.num_triangles())
            .flat_map(|t| {
                let map = self.element_map(t);
                (0..rule.len()).map(move |q| map.to_physical(rule.reference_point(q)))
            })
            .collect()
    }
}
