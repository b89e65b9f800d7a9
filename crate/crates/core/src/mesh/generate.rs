//! Ring meshes of truncated sectors.
//!
//! Radial nodes are shared by all sectors. In every sector the transverse
//! nodes of one half are placed at geometrically growing distances from the
//! bounding ray, and the other half is the mirror image about the bisector.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_traits::Float;

use super::{
    branch_minus, branch_plus, BoundaryKind, CrackMesh, CrackPair, InterfaceEdge, MeshKind, MeshParams, MeshParts,
    Triangle, OUTER, ROBIN, SYMMETRY_AXIS,
};
use crate::geometry::StarGraph;
use crate::{Error, Result};

/// Ratio of consecutive transverse gaps away from a ray.
const TRANSVERSE_GROWTH: f64 = 1.2;
/// Largest angular gap between neighbouring nodes of a ring.
const MAX_ANGLE_STEP: f64 = FRAC_PI_4;
/// Smallest admissible `2φR/h` for the narrowest sector.
const MIN_ARC_CELLS: f64 = 3.0;

/// `r_i = R (i/N)^g` for `i = 0..=N`, `N = ⌈R/h⌉`.
pub fn radial_nodes(params: &MeshParams) -> Vec<f64> {
    let n = ((params.radius / params.h) - 1e-9).ceil().max(2.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                params.radius
            } else {
                params.radius * Float::powf(i as f64 / n as f64, params.grading)
            }
        })
        .collect()
}

/// Node reference inside one half of a sector: `(ring, index)`; ring 0 is
/// the origin.
type Node = (usize, usize);

/// Half of a truncated sector of half-opening `w`, seen from its ray.
struct HalfLayout {
    /// Angular offsets from the ray, per ring; the last entry is `w`.
    rings: Vec<Vec<f64>>,
    /// Triangles between ring `i` and `i + 1`.
    strips: Vec<Vec<[Node; 3]>>,
}

fn quantize(w: f64) -> f64 {
    (w * 1e12).round() / 1e12
}

fn half_layout(radii: &[f64], w: f64, h: f64) -> HalfLayout {
    let w = quantize(w);
    let n = radii.len() - 1;
    let mut rings = Vec::with_capacity(n + 1);
    rings.push(vec![0.0]);
    for &r in &radii[1..] {
        let arc = r * w;
        let mut offsets = vec![0.0];
        let (mut d, mut gap) = (0.0, h);
        loop {
            let next = d + gap;
            if next > arc - 0.5 * gap * TRANSVERSE_GROWTH {
                break;
            }
            offsets.push(next / r);
            d = next;
            gap *= TRANSVERSE_GROWTH;
        }
        let last = *offsets.last().unwrap_or(&0.0);
        let pieces = (((w - last) / MAX_ANGLE_STEP) - 1e-12).ceil().max(1.0) as usize;
        for k in 1..pieces {
            offsets.push(last + (w - last) * k as f64 / pieces as f64);
        }
        offsets.push(w);
        rings.push(offsets);
    }
    let point = |ring: usize, a: f64| -> [f64; 2] {
        let r = radii[ring];
        [r * Float::cos(a), r * Float::sin(a)]
    };
    let mut strips = Vec::with_capacity(n);
    for i in 0..n {
        let outer = &rings[i + 1];
        let mut tris = Vec::new();
        if i == 0 {
            for j in 0..outer.len() - 1 {
                tris.push([(0, 0), (1, j), (1, j + 1)]);
            }
        } else {
            let inner = &rings[i];
            let (p, q) = (inner.len() - 1, outer.len() - 1);
            let (mut a, mut b) = (0, 0);
            while a < p || b < q {
                let advance_outer = if a == p {
                    true
                } else if b == q {
                    false
                } else {
                    let d1 = dist(point(i, inner[a]), point(i + 1, outer[b + 1]));
                    let d2 = dist(point(i + 1, outer[b]), point(i, inner[a + 1]));
                    d1 <= d2 * (1.0 + 1e-9)
                };
                if advance_outer {
                    tris.push([(i, a), (i + 1, b), (i + 1, b + 1)]);
                    b += 1;
                } else {
                    tris.push([(i, a), (i + 1, b), (i, a + 1)]);
                    a += 1;
                }
            }
        }
        strips.push(tris);
    }
    HalfLayout { rings, strips }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    Float::hypot(p[0] - q[0], p[1] - q[1])
}

fn polar(r: f64, a: f64) -> [f64; 2] {
    [r * Float::cos(a), r * Float::sin(a)]
}

fn check_resolution(half_opening: f64, params: &MeshParams) -> Result<()> {
    let cells = 2.0 * half_opening * params.radius / params.h;
    if cells < MIN_ARC_CELLS - 1e-9 {
        return Err(Error::Meshing(format!(
            "sector of opening {:.3e} is unresolved: 2φR/h = {:.3} < {}",
            2.0 * half_opening,
            cells,
            MIN_ARC_CELLS
        )));
    }
    Ok(())
}

struct SectorSpec {
    bisector: f64,
    half_opening: f64,
    start_ray: f64,
    end_ray: f64,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    groups: BTreeMap<String, Vec<[usize; 2]>>,
}

impl Builder {
    fn vertex(&mut self, p: [f64; 2]) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn triangle(&mut self, mut dofs: [usize; 3], sector: usize) {
        let (a, b, c) = (self.vertices[dofs[0]], self.vertices[dofs[1]], self.vertices[dofs[2]]);
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if area < 0.0 {
            dofs.swap(1, 2);
        }
        self.triangles.push(Triangle { dofs, sector });
    }

    fn chain(&mut self, group: &str, dofs: &[usize]) {
        let g = self.groups.entry(group.to_string()).or_default();
        for w in dofs.windows(2) {
            g.push([w[0], w[1]]);
        }
    }
}

/// Meshes full sectors; `ids[s][i]` lists ring `i` of sector `s` in
/// counter-clockwise order.
fn mesh_sectors(b: &mut Builder, specs: &[SectorSpec], radii: &[f64], h: f64) -> Vec<Vec<Vec<usize>>> {
    let layouts: Vec<HalfLayout> = specs.iter().map(|s| half_layout(radii, s.half_opening, h)).collect();
    let n = radii.len() - 1;
    let mut ids: Vec<Vec<Vec<usize>>> = vec![Vec::with_capacity(n + 1); specs.len()];
    for id in ids.iter_mut() {
        let o = b.vertex([0.0, 0.0]);
        id.push(vec![o]);
    }
    for i in 1..=n {
        let r = radii[i];
        for (s, spec) in specs.iter().enumerate() {
            let offs = &layouts[s].rings[i];
            let p = offs.len() - 1;
            let mut ring = Vec::with_capacity(2 * p + 1);
            for k in 0..=2 * p {
                let pos = if k == 0 {
                    polar(r, spec.start_ray)
                } else if k == 2 * p {
                    polar(r, spec.end_ray)
                } else if k == p {
                    polar(r, spec.bisector)
                } else if k < p {
                    polar(r, spec.bisector - (spec.half_opening - offs[k]))
                } else {
                    polar(r, spec.bisector + (spec.half_opening - offs[2 * p - k]))
                };
                ring.push(b.vertex(pos));
            }
            ids[s].push(ring);
        }
    }
    for (s, lay) in layouts.iter().enumerate() {
        for strip in &lay.strips {
            for tri in strip {
                for left in [true, false] {
                    let dofs = tri.map(|(ring, j)| {
                        let row = &ids[s][ring];
                        if ring == 0 {
                            row[0]
                        } else if left {
                            row[j]
                        } else {
                            row[row.len() - 1 - j]
                        }
                    });
                    b.triangle(dofs, s);
                }
            }
        }
    }
    ids
}

fn ray_chain(ids: &[Vec<usize>], end: bool) -> Vec<usize> {
    ids.iter()
        .map(|row| if end { row[row.len() - 1] } else { row[0] })
        .collect()
}

/// Truncated disk cut along the branches of `graph`.
pub fn build_star_mesh(graph: &StarGraph, params: &MeshParams) -> Result<CrackMesh> {
    params.validate()?;
    let sectors = graph.sectors();
    for s in &sectors {
        check_resolution(s.half_opening, params)?;
    }
    let m = sectors.len();
    let angles = graph.angles();
    let specs: Vec<SectorSpec> = sectors
        .iter()
        .enumerate()
        .map(|(k, s)| SectorSpec {
            bisector: s.bisector(),
            half_opening: s.half_opening,
            start_ray: angles[k],
            end_ray: angles[(k + 1) % m],
        })
        .collect();
    let radii = radial_nodes(params);
    let mut b = Builder::default();
    let ids = mesh_sectors(&mut b, &specs, &radii, params.h);
    let mut crack_pairs = Vec::new();
    let mut interface_edges = Vec::new();
    for k in 0..m {
        let prev = (k + m - 1) % m;
        let plus = ray_chain(&ids[k], false);
        let minus = ray_chain(&ids[prev], true);
        for i in 1..plus.len() {
            crack_pairs.push(CrackPair {
                plus: plus[i],
                minus: minus[i],
                branch: k,
            });
        }
        for i in 0..plus.len() - 1 {
            interface_edges.push(InterfaceEdge {
                branch: k,
                plus: [plus[i], plus[i + 1]],
                minus: [minus[i], minus[i + 1]],
            });
        }
        b.chain(&branch_plus(k), &plus);
        b.chain(&branch_minus(k), &minus);
    }
    for s in 0..m {
        let outer = ids[s].last().cloned().unwrap_or_default();
        b.chain(OUTER, &outer);
    }
    crack_pairs.sort_by_key(|p| (p.branch, p.plus));
    let origin_dofs = ids.iter().map(|id| id[0][0]).collect();
    CrackMesh::assemble_parts(
        MeshParts {
            vertices: b.vertices,
            triangles: b.triangles,
            crack_pairs,
            interface_edges,
            edge_groups: b.groups,
            origin_dofs,
            dirichlet_groups: Vec::new(),
        },
        MeshKind::Star { branches: m },
    )
}

/// Truncated sector `{|arg z| < θ}`; both rays form the `robin` group.
pub fn build_sector_mesh(half_opening: f64, params: &MeshParams) -> Result<CrackMesh> {
    params.validate()?;
    if !(half_opening > 0.0 && half_opening <= PI) {
        return Err(Error::Geometry(format!(
            "sector half-opening {half_opening} outside (0, π]"
        )));
    }
    check_resolution(half_opening, params)?;
    let radii = radial_nodes(params);
    let mut b = Builder::default();
    let spec = SectorSpec {
        bisector: 0.0,
        half_opening,
        start_ray: -half_opening,
        end_ray: half_opening,
    };
    let ids = mesh_sectors(&mut b, &[spec], &radii, params.h);
    b.chain(ROBIN, &ray_chain(&ids[0], false));
    b.chain(ROBIN, &ray_chain(&ids[0], true));
    let outer = ids[0].last().cloned().unwrap_or_default();
    b.chain(OUTER, &outer);
    CrackMesh::assemble_parts(
        MeshParts {
            vertices: b.vertices,
            triangles: b.triangles,
            crack_pairs: Vec::new(),
            interface_edges: Vec::new(),
            edge_groups: b.groups,
            origin_dofs: vec![ids[0][0][0]],
            dirichlet_groups: Vec::new(),
        },
        MeshKind::Sector,
    )
}

/// Truncated `Ω_θ = {x < y tan θ}` cut along the positive y-axis.
///
/// Sector tag 0 is the piece of opening `θ` (right of the crack), tag 1 the
/// piece of opening `π − θ`. With [`BoundaryKind::Dirichlet`] the straight
/// boundary, origin copies included, is eliminated.
pub fn build_half_domain_mesh(theta: f64, boundary: BoundaryKind, params: &MeshParams) -> Result<CrackMesh> {
    params.validate()?;
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Geometry(format!("half-domain angle {theta} outside (0, π/2)")));
    }
    check_resolution(theta, params)?;
    let radii = radial_nodes(params);
    let n = radii.len() - 1;
    let pieces = [
        half_layout(&radii, theta, params.h),
        half_layout(&radii, PI - theta, params.h),
    ];
    // Piece 0 turns clockwise from the crack, piece 1 counter-clockwise.
    let axis = [FRAC_PI_2 - theta, 1.5 * PI - theta];
    let mut b = Builder::default();
    let mut ids: [Vec<Vec<usize>>; 2] = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
    for id in ids.iter_mut() {
        let o = b.vertex([0.0, 0.0]);
        id.push(vec![o]);
    }
    for i in 1..=n {
        let r = radii[i];
        for (piece, lay) in pieces.iter().enumerate() {
            let offs = &lay.rings[i];
            let p = offs.len() - 1;
            let row: Vec<usize> = (0..=p)
                .map(|j| {
                    let pos = if j == 0 {
                        [0.0, r]
                    } else if j == p {
                        polar(r, axis[piece])
                    } else if piece == 0 {
                        polar(r, FRAC_PI_2 - offs[j])
                    } else {
                        polar(r, FRAC_PI_2 + offs[j])
                    };
                    b.vertex(pos)
                })
                .collect();
            ids[piece].push(row);
        }
    }
    for (piece, lay) in pieces.iter().enumerate() {
        for strip in &lay.strips {
            for tri in strip {
                let dofs = tri.map(|(ring, j)| ids[piece][ring][if ring == 0 { 0 } else { j }]);
                b.triangle(dofs, piece);
            }
        }
    }
    let plus = ray_chain(&ids[1], false);
    let minus = ray_chain(&ids[0], false);
    let crack_pairs = (1..plus.len())
        .map(|i| CrackPair {
            plus: plus[i],
            minus: minus[i],
            branch: 0,
        })
        .collect();
    let interface_edges = (0..plus.len() - 1)
        .map(|i| InterfaceEdge {
            branch: 0,
            plus: [plus[i], plus[i + 1]],
            minus: [minus[i], minus[i + 1]],
        })
        .collect();
    b.chain(&branch_plus(0), &plus);
    b.chain(&branch_minus(0), &minus);
    for piece in 0..2 {
        b.chain(SYMMETRY_AXIS, &ray_chain(&ids[piece], true));
        let outer = ids[piece].last().cloned().unwrap_or_default();
        b.chain(OUTER, &outer);
    }
    let dirichlet_groups = match boundary {
        BoundaryKind::Neumann => Vec::new(),
        BoundaryKind::Dirichlet => vec![SYMMETRY_AXIS.to_string()],
    };
    CrackMesh::assemble_parts(
        MeshParts {
            vertices: b.vertices,
            triangles: b.triangles,
            crack_pairs,
            interface_edges,
            edge_groups: b.groups,
            origin_dofs: vec![ids[0][0][0], ids[1][0][0]],
            dirichlet_groups,
        },
        MeshKind::HalfDomain { theta, boundary },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::broken_line;

    fn params(r: f64, h: f64) -> MeshParams {
        MeshParams::uniform(r, h).unwrap()
    }

    fn total_area(m: &CrackMesh) -> f64 {
        m.triangles().iter().map(|t| m.signed_area(t)).sum()
    }

    #[test]
    fn radial_nodes_hit_both_ends() {
        let r = radial_nodes(&MeshParams::new(4.0, 0.5, 2.0).unwrap());
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[8], 4.0);
        assert!((r[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_mesh_is_a_cut_disk() {
        let g = StarGraph::line(-1.0);
        let m = build_star_mesh(&g, &params(3.0, 0.25)).unwrap();
        assert_eq!(m.sector_count(), 2);
        assert_eq!(m.origin_dofs().len(), 2);
        assert_eq!(m.euler_characteristic(), 1);
        // Inscribed polygon area is a bit below πR².
        let a = total_area(&m);
        assert!(a < PI * 9.0 && a > PI * 9.0 * 0.99, "area {a}");
        let n = radial_nodes(&params(3.0, 0.25)).len() - 1;
        assert_eq!(m.crack_pairs().len(), 2 * n);
    }

    #[test]
    fn every_mesh_kind_validates() {
        let p = params(2.0, 0.2);
        let graphs = [
            StarGraph::half_line(-1.0),
            broken_line(0.3, -1.0).unwrap(),
            StarGraph::new(vec![0.0, 1.0, 2.5, 4.0], -1.0).unwrap(),
        ];
        for g in &graphs {
            let m = build_star_mesh(g, &p).unwrap();
            assert_eq!(m.euler_characteristic(), 1);
        }
        let s = build_sector_mesh(0.4, &p).unwrap();
        assert_eq!(s.euler_characteristic(), 1);
        let hd = build_half_domain_mesh(0.4, BoundaryKind::Dirichlet, &p).unwrap();
        assert_eq!(hd.euler_characteristic(), 1);
        assert!(!hd.constrained_dofs().is_empty());
    }

    #[test]
    fn thin_sector_is_rejected() {
        let g = broken_line(0.01, -1.0).unwrap();
        let err = build_star_mesh(&g, &params(2.0, 0.1)).unwrap_err();
        assert!(matches!(err, Error::Meshing(_)));
    }

    #[test]
    fn half_domain_lies_in_omega() {
        let theta = 0.5;
        let m = build_half_domain_mesh(theta, BoundaryKind::Neumann, &params(2.0, 0.2)).unwrap();
        for v in m.vertices() {
            assert!(v[0] <= v[1] * Float::tan(theta) + 1e-12);
        }
        let area = total_area(&m);
        assert!(area < 2.0 * PI && area > 0.98 * 2.0 * PI);
    }

    #[test]
    fn sector_submesh_matches_sector_mesh() {
        let theta = 0.35;
        let p = params(2.0, 0.1);
        let star = build_star_mesh(&broken_line(theta, -1.0).unwrap(), &p).unwrap();
        let sub = star.sector_submesh(1).unwrap();
        let direct = build_sector_mesh(theta, &p).unwrap();
        assert_eq!(sub.dof_count(), direct.dof_count());
        assert_eq!(sub.triangles().len(), direct.triangles().len());
        assert_eq!(
            sub.edge_group(ROBIN).unwrap().len(),
            direct.edge_group(ROBIN).unwrap().len()
        );
    }
}
