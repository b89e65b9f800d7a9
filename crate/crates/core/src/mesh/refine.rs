//! Uniform red refinement. Old dofs keep their indices, so the coarse P1
//! space embeds in the fine one by nodal interpolation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{CrackMesh, CrackPair, InterfaceEdge, MeshParts, Triangle};
use crate::{Error, Result};

struct Midpoints {
    vertices: Vec<[f64; 2]>,
    map: BTreeMap<(usize, usize), usize>,
}

impl Midpoints {
    fn get(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = self.map.get(&key) {
            return m;
        }
        let (p, q) = (self.vertices[a], self.vertices[b]);
        self.vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        let m = self.vertices.len() - 1;
        self.map.insert(key, m);
        m
    }

    fn existing(&self, a: usize, b: usize) -> Result<usize> {
        self.map
            .get(&(a.min(b), a.max(b)))
            .copied()
            .ok_or_else(|| Error::Meshing(alloc::format!("edge ({a}, {b}) is not a mesh edge")))
    }
}

/// Splits every triangle into four; crack pairs, interface edges and edge
/// groups follow. Midpoints of curved boundary edges are not projected.
pub fn refine(mesh: &CrackMesh) -> Result<CrackMesh> {
    let mut mids = Midpoints {
        vertices: mesh.vertices().to_vec(),
        map: BTreeMap::new(),
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles().len());
    for t in mesh.triangles() {
        let [a, b, c] = t.dofs;
        let ab = mids.get(a, b);
        let bc = mids.get(b, c);
        let ca = mids.get(c, a);
        for dofs in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            triangles.push(Triangle { dofs, sector: t.sector });
        }
    }
    let mut crack_pairs: Vec<CrackPair> = mesh.crack_pairs().to_vec();
    let mut interface_edges = Vec::with_capacity(2 * mesh.interface_edges().len());
    for e in mesh.interface_edges() {
        let mp = mids.existing(e.plus[0], e.plus[1])?;
        let mm = mids.existing(e.minus[0], e.minus[1])?;
        crack_pairs.push(CrackPair {
            plus: mp,
            minus: mm,
            branch: e.branch,
        });
        interface_edges.push(InterfaceEdge {
            branch: e.branch,
            plus: [e.plus[0], mp],
            minus: [e.minus[0], mm],
        });
        interface_edges.push(InterfaceEdge {
            branch: e.branch,
            plus: [mp, e.plus[1]],
            minus: [mm, e.minus[1]],
        });
    }
    crack_pairs.sort_by_key(|p| (p.branch, p.plus));
    let mut edge_groups = BTreeMap::new();
    for (name, edges) in mesh.edge_groups() {
        let mut out = Vec::with_capacity(2 * edges.len());
        for e in edges {
            let m = mids.existing(e[0], e[1])?;
            out.push([e[0], m]);
            out.push([m, e[1]]);
        }
        edge_groups.insert(name.clone(), out);
    }
    CrackMesh::assemble_parts(
        MeshParts {
            vertices: mids.vertices,
            triangles,
            crack_pairs,
            interface_edges,
            edge_groups,
            origin_dofs: mesh.origin_dofs().to_vec(),
            dirichlet_groups: mesh.dirichlet_groups().to_vec(),
        },
        mesh.kind().clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StarGraph;
    use crate::mesh::{build_star_mesh, MeshParams};

    #[test]
    fn refinement_quadruples_triangles_and_keeps_coarse_nodes() {
        let g = StarGraph::new(alloc::vec![0.3, 2.0, 4.0], -1.0).unwrap();
        let coarse = build_star_mesh(&g, &MeshParams::uniform(2.0, 0.25).unwrap()).unwrap();
        let fine = refine(&coarse).unwrap();
        assert_eq!(fine.triangles().len(), 4 * coarse.triangles().len());
        assert_eq!(&fine.vertices()[..coarse.dof_count()], coarse.vertices());
        assert_eq!(fine.euler_characteristic(), 1);
        let area = |m: &CrackMesh| m.triangles().iter().map(|t| m.signed_area(t)).sum::<f64>();
        assert!((area(&fine) - area(&coarse)).abs() < 1e-10);
        assert_eq!(fine.crack_pairs().len(), 2 * coarse.crack_pairs().len());
    }
}
