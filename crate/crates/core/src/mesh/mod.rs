//! Interface-conforming P1 triangulations.
//!
//! Every node lying on a branch of the star graph is duplicated: one copy is
//! referenced by the triangles of each adjacent sector, so a nodal vector can
//! jump across the interface. The origin carries one copy per incident sector.
//! `vertices` is indexed by degree of freedom, duplicated copies share their
//! coordinates.

mod generate;
mod refine;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub use generate::{build_half_domain_mesh, build_sector_mesh, build_star_mesh, radial_nodes};
pub use refine::refine;

pub const OUTER: &str = "outer";
pub const ROBIN: &str = "robin";
pub const SYMMETRY_AXIS: &str = "symmetry_axis";

pub fn branch_plus(k: usize) -> String {
    format!("branch_{k}_plus")
}

pub fn branch_minus(k: usize) -> String {
    format!("branch_{k}_minus")
}

/// Discretization parameters of the truncated disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshParams {
    /// Radius of the artificial circular boundary.
    pub radius: f64,
    /// Target edge length: radial spacing at the outer ring and transverse
    /// spacing next to the branches.
    pub h: f64,
    /// Radial grading exponent toward the corner, `1` is uniform.
    pub grading: f64,
}

impl MeshParams {
    pub fn new(radius: f64, h: f64, grading: f64) -> Result<Self> {
        let p = MeshParams { radius, h, grading };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(radius: f64, h: f64) -> Result<Self> {
        MeshParams::new(radius, h, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Meshing(format!("radius {} must be positive", self.radius)));
        }
        if !(self.h > 0.0 && self.h < self.radius) {
            return Err(Error::Meshing(format!(
                "edge length {} must lie in (0, R = {})",
                self.h, self.radius
            )));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return Err(Error::Meshing(format!("grading {} must be >= 1", self.grading)));
        }
        Ok(())
    }

    /// Both lengths divided by `factor`; the grading is unchanged.
    pub fn scaled_down(&self, factor: f64) -> MeshParams {
        MeshParams {
            radius: self.radius / factor,
            h: self.h / factor,
            grading: self.grading,
        }
    }
}

/// Natural or essential condition on the symmetry axis of the half domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshKind {
    /// Disk cut along the branches of a star graph.
    Star { branches: usize },
    /// Truncated sector without cracks.
    Sector,
    /// Truncated `Ω_θ` with a crack on the positive y-axis.
    HalfDomain { theta: f64, boundary: BoundaryKind },
    /// Assembled by hand from raw parts.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub dofs: [usize; 3],
    pub sector: usize,
}

/// Two copies of one interface node. `plus` belongs to the sector on the
/// counter-clockwise side of the branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrackPair {
    pub plus: usize,
    pub minus: usize,
    pub branch: usize,
}

/// One segment of a branch seen from both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InterfaceEdge {
    pub branch: usize,
    pub plus: [usize; 2],
    pub minus: [usize; 2],
}

/// Raw mesh data, checked by [`CrackMesh::from_parts`].
#[derive(Clone, Debug, Default)]
pub struct MeshParts {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub crack_pairs: Vec<CrackPair>,
    pub interface_edges: Vec<InterfaceEdge>,
    pub edge_groups: BTreeMap<String, Vec<[usize; 2]>>,
    /// Origin copy of each sector, indexed by sector tag.
    pub origin_dofs: Vec<usize>,
    /// Groups whose dofs are eliminated (essential conditions owned by the mesh).
    pub dirichlet_groups: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CrackMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    crack_pairs: Vec<CrackPair>,
    interface_edges: Vec<InterfaceEdge>,
    edge_groups: BTreeMap<String, Vec<[usize; 2]>>,
    origin_dofs: Vec<usize>,
    dirichlet_groups: Vec<String>,
    dof_sector: Vec<usize>,
    sector_count: usize,
    kind: MeshKind,
}

impl CrackMesh {
    /// Validates raw parts and builds a mesh of kind [`MeshKind::Custom`].
    pub fn from_parts(parts: MeshParts) -> Result<Self> {
        CrackMesh::assemble_parts(parts, MeshKind::Custom)
    }

    pub(crate) fn assemble_parts(parts: MeshParts, kind: MeshKind) -> Result<Self> {
        let n = parts.vertices.len();
        let mut dof_sector = vec![usize::MAX; n];
        let mut sector_count = 0;
        for t in &parts.triangles {
            sector_count = sector_count.max(t.sector + 1);
            for &d in &t.dofs {
                if d >= n {
                    return Err(Error::Meshing(format!("triangle references dof {d} >= {n}")));
                }
                if dof_sector[d] == usize::MAX {
                    dof_sector[d] = t.sector;
                } else if dof_sector[d] != t.sector && !matches!(kind, MeshKind::Custom) {
                    return Err(Error::Meshing(format!(
                        "dof {d} is shared by sectors {} and {}",
                        dof_sector[d], t.sector
                    )));
                }
            }
        }
        if let Some(d) = dof_sector.iter().position(|&s| s == usize::MAX) {
            return Err(Error::Meshing(format!("dof {d} belongs to no triangle")));
        }
        let mesh = CrackMesh {
            vertices: parts.vertices,
            triangles: parts.triangles,
            crack_pairs: parts.crack_pairs,
            interface_edges: parts.interface_edges,
            edge_groups: parts.edge_groups,
            origin_dofs: parts.origin_dofs,
            dirichlet_groups: parts.dirichlet_groups,
            dof_sector,
            sector_count,
            kind,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn crack_pairs(&self) -> &[CrackPair] {
        &self.crack_pairs
    }

    pub fn interface_edges(&self) -> &[InterfaceEdge] {
        &self.interface_edges
    }

    pub fn edge_groups(&self) -> &BTreeMap<String, Vec<[usize; 2]>> {
        &self.edge_groups
    }

    pub fn edge_group(&self, name: &str) -> Option<&[[usize; 2]]> {
        self.edge_groups.get(name).map(|v| v.as_slice())
    }

    pub fn origin_dofs(&self) -> &[usize] {
        &self.origin_dofs
    }

    pub fn dof_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn sector_count(&self) -> usize {
        self.sector_count
    }

    pub fn dof_sector(&self) -> &[usize] {
        &self.dof_sector
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    pub fn dirichlet_groups(&self) -> &[String] {
        &self.dirichlet_groups
    }

    /// Dofs eliminated by the mesh itself (not counting the outer boundary).
    pub fn constrained_dofs(&self) -> Vec<usize> {
        let mut flags = vec![false; self.dof_count()];
        for g in &self.dirichlet_groups {
            if let Some(edges) = self.edge_groups.get(g) {
                for e in edges {
                    flags[e[0]] = true;
                    flags[e[1]] = true;
                }
            }
        }
        (0..flags.len()).filter(|&i| flags[i]).collect()
    }

    /// Dofs touched by the edges of `group`, ascending.
    pub fn group_dofs(&self, group: &str) -> Option<Vec<usize>> {
        let edges = self.edge_groups.get(group)?;
        let mut d: Vec<usize> = edges.iter().flat_map(|e| [e[0], e[1]]).collect();
        d.sort_unstable();
        d.dedup();
        Some(d)
    }

    pub fn has_cracks(&self) -> bool {
        !self.interface_edges.is_empty()
    }

    pub fn signed_area(&self, t: &Triangle) -> f64 {
        let [a, b, c] = t.dofs;
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]))
    }

    /// Nodal values of `f(x, y, sector)`.
    pub fn interpolate<F: Fn(f64, f64, usize) -> f64>(&self, f: F) -> Vec<f64> {
        self.vertices
            .iter()
            .zip(&self.dof_sector)
            .map(|(p, &s)| f(p[0], p[1], s))
            .collect()
    }

    /// Number of distinct geometric vertices once every group of coinciding
    /// copies (crack pairs and origin copies) is merged.
    pub fn geometric_vertex_ids(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.dof_count());
        for p in &self.crack_pairs {
            uf.union(p.plus, p.minus);
        }
        for e in &self.interface_edges {
            uf.union(e.plus[0], e.minus[0]);
            uf.union(e.plus[1], e.minus[1]);
        }
        for w in self.origin_dofs.windows(2) {
            uf.union(w[0], w[1]);
        }
        uf.labels()
    }

    /// `V − E + F` of the triangulation with all copies merged.
    pub fn euler_characteristic(&self) -> i64 {
        let ids = self.geometric_vertex_ids();
        let v = ids.iter().copied().max().map_or(0, |m| m + 1);
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for k in 0..3 {
                let a = ids[t.dofs[k]];
                let b = ids[t.dofs[(k + 1) % 3]];
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        v as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Checks the structural invariants of an interface-conforming mesh.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.triangles.iter().enumerate() {
            let a = self.signed_area(t);
            if !(a > 0.0) {
                return Err(Error::Meshing(format!("triangle {i} has signed area {a}")));
            }
        }
        let n = self.dof_count();
        let coincide = |a: usize, b: usize| {
            let (p, q) = (self.vertices[a], self.vertices[b]);
            let scale = 1.0 + p[0].abs().max(p[1].abs());
            (p[0] - q[0]).abs() <= 1e-12 * scale && (p[1] - q[1]).abs() <= 1e-12 * scale
        };
        let mut pair_of = vec![usize::MAX; n];
        for (i, p) in self.crack_pairs.iter().enumerate() {
            if p.plus >= n || p.minus >= n {
                return Err(Error::Meshing(format!("crack pair {i} out of range")));
            }
            if !coincide(p.plus, p.minus) {
                return Err(Error::Meshing(format!("crack pair {i} copies do not coincide")));
            }
            for d in [p.plus, p.minus] {
                if pair_of[d] != usize::MAX {
                    return Err(Error::Meshing(format!("dof {d} appears in two crack pairs")));
                }
                pair_of[d] = i;
            }
        }
        let is_origin = |d: usize| self.origin_dofs.contains(&d);
        for (i, e) in self.interface_edges.iter().enumerate() {
            for k in 0..2 {
                let (p, m) = (e.plus[k], e.minus[k]);
                if p >= n || m >= n {
                    return Err(Error::Meshing(format!("interface edge {i} out of range")));
                }
                if !coincide(p, m) {
                    return Err(Error::Meshing(format!("interface edge {i} sides do not coincide")));
                }
                if is_origin(p) && is_origin(m) {
                    continue;
                }
                let ok = pair_of[p] != usize::MAX && pair_of[p] == pair_of[m] && self.crack_pairs[pair_of[p]].plus == p;
                if !ok {
                    return Err(Error::Assembly(format!(
                        "interface edge {i}: dofs ({p}, {m}) are not a crack pair"
                    )));
                }
            }
        }
        for (name, edges) in &self.edge_groups {
            if edges.iter().any(|e| e[0] >= n || e[1] >= n) {
                return Err(Error::Meshing(format!("edge group {name} out of range")));
            }
        }
        // Conformity: every dof edge is shared by at most two triangles and
        // interface edges by exactly one.
        let mut count: BTreeMap<(usize, usize), u8> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t.dofs[k], t.dofs[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        if count.values().any(|&c| c > 2) {
            return Err(Error::Meshing("an edge is shared by more than two triangles".into()));
        }
        for e in &self.interface_edges {
            for side in [e.plus, e.minus] {
                let key = (side[0].min(side[1]), side[0].max(side[1]));
                if count.get(&key) != Some(&1) {
                    return Err(Error::Meshing(format!(
                        "interface edge {:?} is not a boundary edge of exactly one triangle",
                        side
                    )));
                }
            }
        }
        Ok(())
    }

    /// The triangles of one sector as a crack-free mesh. Both bounding rays
    /// become the `robin` group.
    pub fn sector_submesh(&self, sector: usize) -> Result<CrackMesh> {
        Ok(self.sector_submesh_with_map(sector)?.0)
    }

    /// [`CrackMesh::sector_submesh`] together with the parent dof of every
    /// submesh dof.
    pub fn sector_submesh_with_map(&self, sector: usize) -> Result<(CrackMesh, Vec<usize>)> {
        if sector >= self.sector_count {
            return Err(Error::InvalidInput(format!("no sector {sector}")));
        }
        let mut map = vec![usize::MAX; self.dof_count()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for t in self.triangles.iter().filter(|t| t.sector == sector) {
            let mut dofs = [0; 3];
            for (k, &d) in t.dofs.iter().enumerate() {
                if map[d] == usize::MAX {
                    map[d] = vertices.len();
                    vertices.push(self.vertices[d]);
                }
                dofs[k] = map[d];
            }
            triangles.push(Triangle { dofs, sector: 0 });
        }
        let remap = |edges: &[[usize; 2]]| -> Vec<[usize; 2]> {
            edges
                .iter()
                .filter(|e| map[e[0]] != usize::MAX && map[e[1]] != usize::MAX)
                .map(|e| [map[e[0]], map[e[1]]])
                .collect()
        };
        let mut robin = Vec::new();
        for e in &self.interface_edges {
            for side in [e.plus, e.minus] {
                if map[side[0]] != usize::MAX && map[side[1]] != usize::MAX {
                    robin.push([map[side[0]], map[side[1]]]);
                }
            }
        }
        let mut edge_groups = BTreeMap::new();
        edge_groups.insert(OUTER.to_string(), remap(self.edge_group(OUTER).unwrap_or(&[])));
        edge_groups.insert(ROBIN.to_string(), robin);
        let origin_dofs = self.origin_dofs.get(sector).map(|&o| vec![map[o]]).unwrap_or_default();
        let mut parent = vec![0; vertices.len()];
        for (full, &sub) in map.iter().enumerate() {
            if sub != usize::MAX {
                parent[sub] = full;
            }
        }
        let mesh = CrackMesh::assemble_parts(
            MeshParts {
                vertices,
                triangles,
                crack_pairs: Vec::new(),
                interface_edges: Vec::new(),
                edge_groups,
                origin_dofs,
                dirichlet_groups: Vec::new(),
            },
            MeshKind::Sector,
        )?;
        Ok((mesh, parent))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as representative so labels stay ordered.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Dense class labels numbered in order of first appearance.
    pub(crate) fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut next = 0;
        for i in 0..n {
            let r = self.find(i);
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[i] = label[r];
        }
        out
    }
}
