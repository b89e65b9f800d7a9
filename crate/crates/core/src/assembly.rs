//! P1 element matrices and the reduced systems of every operator.
//!
//! The free functions below work on the full dof set of a mesh and return
//! unsigned blocks (the jump block carries the factor `α` only). [`assemble`]
//! combines them with the signs of each form and reduces the result by a
//! [`DofMap`]: merged copies become one unknown and constrained dofs are
//! removed.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::mesh::{CrackMesh, MeshKind, UnionFind, OUTER, ROBIN, SYMMETRY_AXIS};
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

/// Coupling of the interface term in both half problems.
pub const HALF_PROBLEM_ALPHA: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorSpec {
    /// `∫|∇u|² + α∫_Γ|[u]|²` on the cut disk.
    DeltaPrimeStar { alpha: f64 },
    /// `∫|∇v|² − γ∫_{∂U}|v|²` on a sector.
    RobinSector { gamma: f64 },
    /// `∫|∇u|² − γ∫_Γ|u|²` with every crack closed.
    DeltaLine { gamma: f64 },
    /// Even part of the broken-line operator, natural condition on the axis.
    HalfNeumann,
    /// Odd part, `v = 0` on the axis.
    HalfDirichlet,
}

impl OperatorSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OperatorSpec::DeltaPrimeStar { alpha } if !alpha.is_finite() => {
                Err(Error::InvalidInput(format!("coupling {alpha} is not finite")))
            }
            OperatorSpec::RobinSector { gamma } | OperatorSpec::DeltaLine { gamma }
                if !(gamma > 0.0 && gamma.is_finite()) =>
            {
                Err(Error::InvalidInput(format!("strength {gamma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Bottom of the essential spectrum of the untruncated operator.
    pub fn ess_threshold(&self) -> f64 {
        match *self {
            OperatorSpec::DeltaPrimeStar { alpha } => {
                if alpha < 0.0 {
                    -4.0 * alpha * alpha
                } else {
                    0.0
                }
            }
            OperatorSpec::RobinSector { gamma } => -gamma * gamma,
            OperatorSpec::DeltaLine { gamma } => -0.25 * gamma * gamma,
            OperatorSpec::HalfNeumann | OperatorSpec::HalfDirichlet => -4.0 * HALF_PROBLEM_ALPHA * HALF_PROBLEM_ALPHA,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::DeltaPrimeStar { .. } => "delta_prime_star",
            OperatorSpec::RobinSector { .. } => "robin_sector",
            OperatorSpec::DeltaLine { .. } => "delta_line",
            OperatorSpec::HalfNeumann => "half_neumann",
            OperatorSpec::HalfDirichlet => "half_dirichlet",
        }
    }

    /// The operator with its parameter multiplied by `c`, if it has one.
    pub fn scaled_parameter(&self, c: f64) -> Option<OperatorSpec> {
        match *self {
            OperatorSpec::DeltaPrimeStar { alpha } => Some(OperatorSpec::DeltaPrimeStar { alpha: c * alpha }),
            OperatorSpec::RobinSector { gamma } => Some(OperatorSpec::RobinSector { gamma: c * gamma }),
            OperatorSpec::DeltaLine { gamma } => Some(OperatorSpec::DeltaLine { gamma: c * gamma }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OuterCondition {
    #[default]
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssemblyOptions {
    pub outer: OuterCondition,
    /// Branches treated as absent: their copies are merged and they carry
    /// no interface term.
    pub inactive_branches: Vec<usize>,
}

/// Map from mesh dofs to unknowns of a reduced system.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    to_reduced: Vec<Option<usize>>,
    representative: Vec<usize>,
}

impl DofMap {
    pub fn identity(n: usize) -> Self {
        DofMap {
            to_reduced: (0..n).map(Some).collect(),
            representative: (0..n).collect(),
        }
    }

    fn build(n: usize, uf: &mut UnionFind, eliminated: &[bool]) -> Self {
        let mut class_dead = vec![false; n];
        for i in 0..n {
            if eliminated[i] {
                let r = uf.find(i);
                class_dead[r] = true;
            }
        }
        let mut class_id = vec![usize::MAX; n];
        let mut to_reduced = vec![None; n];
        let mut representative = Vec::new();
        for i in 0..n {
            let r = uf.find(i);
            if class_dead[r] {
                continue;
            }
            if class_id[r] == usize::MAX {
                class_id[r] = representative.len();
                representative.push(i);
            }
            to_reduced[i] = Some(class_id[r]);
        }
        DofMap {
            to_reduced,
            representative,
        }
    }

    pub fn full_dim(&self) -> usize {
        self.to_reduced.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.representative.len()
    }

    pub fn reduced_index(&self, full: usize) -> Option<usize> {
        self.to_reduced[full]
    }

    /// Nodal vector on the mesh; eliminated dofs are zero.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        self.to_reduced.iter().map(|r| r.map_or(0.0, |i| reduced[i])).collect()
    }

    /// Reduced vector taking the value of one representative per unknown.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.representative.iter().map(|&i| full[i]).collect()
    }
}

/// Reduced stiffness-side matrix `a`, mass matrix `m` and their dof map.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub a: SparseSymMatrix,
    pub m: SparseSymMatrix,
    pub dofs: DofMap,
    pub spec: OperatorSpec,
}

fn triangle_geometry(mesh: &CrackMesh, idx: usize) -> Result<([f64; 3], [f64; 3], f64)> {
    let t = &mesh.triangles()[idx];
    let v = mesh.vertices();
    let p = [v[t.dofs[0]], v[t.dofs[1]], v[t.dofs[2]]];
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j][1] - p[k][1];
        c[i] = p[k][0] - p[j][0];
    }
    let area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
    if !(area > 0.0) {
        return Err(Error::Assembly(format!("triangle {idx} is degenerate (area {area})")));
    }
    Ok((b, c, area))
}

fn stiffness_into<F: FnMut(usize, usize, f64) + ?Sized>(mesh: &CrackMesh, sink: &mut F) -> Result<()> {
    for (idx, t) in mesh.triangles().iter().enumerate() {
        let (b, c, area) = triangle_geometry(mesh, idx)?;
        let s = 0.25 / area;
        for r in 0..3 {
            for q in 0..3 {
                sink(t.dofs[r], t.dofs[q], s * (b[r] * b[q] + c[r] * c[q]));
            }
        }
    }
    Ok(())
}

fn mass_into<F: FnMut(usize, usize, f64) + ?Sized>(mesh: &CrackMesh, sink: &mut F) -> Result<()> {
    for (idx, t) in mesh.triangles().iter().enumerate() {
        let (_, _, area) = triangle_geometry(mesh, idx)?;
        for r in 0..3 {
            for q in 0..3 {
                let w = if r == q { 2.0 } else { 1.0 };
                sink(t.dofs[r], t.dofs[q], area * w / 12.0);
            }
        }
    }
    Ok(())
}

fn edge_length(mesh: &CrackMesh, a: usize, b: usize) -> f64 {
    let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
    Float::hypot(p[0] - q[0], p[1] - q[1])
}

fn edge_mass_into<F: FnMut(usize, usize, f64) + ?Sized>(
    mesh: &CrackMesh,
    edges: &[[usize; 2]],
    scale: f64,
    sink: &mut F,
) {
    for e in edges {
        let l = edge_length(mesh, e[0], e[1]) * scale / 6.0;
        sink(e[0], e[0], 2.0 * l);
        sink(e[0], e[1], l);
        sink(e[1], e[0], l);
        sink(e[1], e[1], 2.0 * l);
    }
}

fn jump_into<F: FnMut(usize, usize, f64) + ?Sized>(mesh: &CrackMesh, alpha: f64, inactive: &[usize], sink: &mut F) {
    for e in mesh.interface_edges() {
        if inactive.contains(&e.branch) {
            continue;
        }
        let l = edge_length(mesh, e.plus[0], e.plus[1]) * alpha / 6.0;
        let dofs = [e.plus[0], e.plus[1], e.minus[0], e.minus[1]];
        let sign = [1.0, 1.0, -1.0, -1.0];
        for r in 0..4 {
            for q in 0..4 {
                let w = if r % 2 == q % 2 { 2.0 } else { 1.0 };
                sink(dofs[r], dofs[q], sign[r] * sign[q] * w * l);
            }
        }
    }
}

fn collect<G>(n: usize, fill: G) -> Result<SparseSymMatrix>
where
    G: FnOnce(&mut dyn FnMut(usize, usize, f64)) -> Result<()>,
{
    let mut t = Vec::new();
    fill(&mut |i, j, v| t.push((i, j, v)))?;
    let mut m = SparseSymMatrix::from_triplets_unchecked(n, &t)?;
    m.symmetrize();
    Ok(m)
}

/// `∫|∇u|²` on the full dof set.
pub fn stiffness(mesh: &CrackMesh) -> Result<SparseSymMatrix> {
    collect(mesh.dof_count(), |s| stiffness_into(mesh, s))
}

/// Consistent P1 mass matrix on the full dof set.
pub fn mass(mesh: &CrackMesh) -> Result<SparseSymMatrix> {
    collect(mesh.dof_count(), |s| mass_into(mesh, s))
}

/// `α∫_Γ|[u]|²` with `[u] = u⁺ − u⁻`.
pub fn jump_term(mesh: &CrackMesh, alpha: f64) -> Result<SparseSymMatrix> {
    if !mesh.has_cracks() {
        return Err(Error::Assembly("mesh has no interface edges".into()));
    }
    collect(mesh.dof_count(), |s| {
        jump_into(mesh, alpha, &[], s);
        Ok(())
    })
}

/// `γ∫|v|²` over the edges of `group`.
pub fn boundary_term(mesh: &CrackMesh, group: &str, gamma: f64) -> Result<SparseSymMatrix> {
    let edges = mesh
        .edge_group(group)
        .ok_or_else(|| Error::Assembly(format!("unknown edge group {group:?}")))?;
    collect(mesh.dof_count(), |s| {
        edge_mass_into(mesh, edges, gamma, s);
        Ok(())
    })
}

pub fn assemble(mesh: &CrackMesh, spec: OperatorSpec) -> Result<Assembled> {
    assemble_with(mesh, spec, &AssemblyOptions::default())
}

pub fn assemble_with(mesh: &CrackMesh, spec: OperatorSpec, options: &AssemblyOptions) -> Result<Assembled> {
    spec.validate()?;
    check_compatible(mesh, spec, options)?;
    let dofs = dof_map(mesh, spec, options)?;
    let n = dofs.reduced_dim();
    if n == 0 {
        return Err(Error::Assembly("no free degrees of freedom".into()));
    }
    let map = &dofs.to_reduced;
    let a = collect(n, |s| {
        let mut r = reduced(map, s);
        stiffness_into(mesh, &mut r)?;
        match spec {
            OperatorSpec::DeltaPrimeStar { alpha } => jump_into(mesh, alpha, &options.inactive_branches, &mut r),
            OperatorSpec::HalfNeumann | OperatorSpec::HalfDirichlet => {
                jump_into(mesh, HALF_PROBLEM_ALPHA, &options.inactive_branches, &mut r)
            }
            OperatorSpec::RobinSector { gamma } => {
                let edges = mesh.edge_group(ROBIN).unwrap_or(&[]);
                edge_mass_into(mesh, edges, -gamma, &mut r);
            }
            OperatorSpec::DeltaLine { gamma } => {
                let edges: Vec<[usize; 2]> = mesh
                    .interface_edges()
                    .iter()
                    .filter(|e| !options.inactive_branches.contains(&e.branch))
                    .map(|e| e.plus)
                    .collect();
                edge_mass_into(mesh, &edges, -gamma, &mut r);
            }
        }
        Ok(())
    })?;
    let m = collect(n, |s| mass_into(mesh, &mut reduced(map, s)))?;
    Ok(Assembled { a, m, dofs, spec })
}

fn reduced<'a>(
    map: &'a [Option<usize>],
    sink: &'a mut dyn FnMut(usize, usize, f64),
) -> impl FnMut(usize, usize, f64) + 'a {
    move |i, j, v| {
        if let (Some(a), Some(b)) = (map[i], map[j]) {
            sink(a, b, v);
        }
    }
}

fn check_compatible(mesh: &CrackMesh, spec: OperatorSpec, options: &AssemblyOptions) -> Result<()> {
    let branches = mesh.interface_edges().iter().map(|e| e.branch + 1).max().unwrap_or(0);
    if let Some(&b) = options.inactive_branches.iter().find(|&&b| b >= branches) {
        return Err(Error::InvalidInput(format!("no branch {b} to deactivate")));
    }
    let ok = match spec {
        OperatorSpec::DeltaPrimeStar { .. } | OperatorSpec::DeltaLine { .. } => mesh.has_cracks(),
        OperatorSpec::RobinSector { .. } => mesh.edge_group(ROBIN).is_some(),
        OperatorSpec::HalfNeumann => mesh.edge_group(SYMMETRY_AXIS).is_some() && mesh.dirichlet_groups().is_empty(),
        OperatorSpec::HalfDirichlet => mesh.edge_group(SYMMETRY_AXIS).is_some(),
    };
    if !ok {
        let kind = match mesh.kind() {
            MeshKind::Star { .. } => "star",
            MeshKind::Sector => "sector",
            MeshKind::HalfDomain { .. } => "half-domain",
            MeshKind::Custom => "custom",
        };
        return Err(Error::Incompatible(format!(
            "operator {} cannot be assembled on a {kind} mesh",
            spec.name()
        )));
    }
    Ok(())
}

fn dof_map(mesh: &CrackMesh, spec: OperatorSpec, options: &AssemblyOptions) -> Result<DofMap> {
    let n = mesh.dof_count();
    let mut uf = UnionFind::new(n);
    let closed = |b: usize| matches!(spec, OperatorSpec::DeltaLine { .. }) || options.inactive_branches.contains(&b);
    for p in mesh.crack_pairs() {
        if closed(p.branch) {
            uf.union(p.plus, p.minus);
        }
    }
    for e in mesh.interface_edges() {
        if closed(e.branch) {
            uf.union(e.plus[0], e.minus[0]);
            uf.union(e.plus[1], e.minus[1]);
        }
    }
    let mut eliminated = vec![false; n];
    if options.outer == OuterCondition::Dirichlet {
        for d in mesh.group_dofs(OUTER).unwrap_or_default() {
            eliminated[d] = true;
        }
    }
    for d in mesh.constrained_dofs() {
        eliminated[d] = true;
    }
    if spec == OperatorSpec::HalfDirichlet {
        for d in mesh.group_dofs(SYMMETRY_AXIS).unwrap_or_default() {
            eliminated[d] = true;
        }
    }
    Ok(DofMap::build(n, &mut uf, &eliminated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{MeshParts, Triangle};
    use alloc::collections::BTreeMap;

    fn single_triangle() -> CrackMesh {
        CrackMesh::from_parts(MeshParts {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![Triangle {
                dofs: [0, 1, 2],
                sector: 0,
            }],
            edge_groups: BTreeMap::from([(alloc::string::String::from("e"), vec![[0, 1]])]),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn unit_right_triangle_matrices() {
        let m = single_triangle();
        let k = stiffness(&m).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        let mm = mass(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - expect[i][j]).abs() < 1e-15);
                let w = if i == j { 2.0 } else { 1.0 };
                assert!((mm.get(i, j) - 0.5 * w / 12.0).abs() < 1e-15);
            }
        }
        let b = boundary_term(&m, "e", 1.0).unwrap();
        assert!((b.get(0, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.get(0, 1) - 1.0 / 6.0).abs() < 1e-15);
        assert!(boundary_term(&m, "missing", 1.0).is_err());
        assert!(jump_term(&m, 1.0).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(OperatorSpec::DeltaPrimeStar { alpha: -2.0 }.ess_threshold(), -16.0);
        assert_eq!(OperatorSpec::DeltaPrimeStar { alpha: 0.5 }.ess_threshold(), 0.0);
        assert_eq!(OperatorSpec::RobinSector { gamma: 3.0 }.ess_threshold(), -9.0);
        assert_eq!(OperatorSpec::DeltaLine { gamma: 4.0 }.ess_threshold(), -4.0);
        assert!(OperatorSpec::RobinSector { gamma: 0.0 }.validate().is_err());
    }
}
