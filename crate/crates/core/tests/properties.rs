use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use starspec_core::assembly::{assemble, boundary_term, jump_term, mass, stiffness};
use starspec_core::mesh::{build_sector_mesh, build_star_mesh, refine};
use starspec_core::models::Problem;
use starspec_core::{CrackMesh, MeshParams, StarGraph};

const MIN_GAP: f64 = 0.6;

/// Star graphs with 1 to 5 branches, neighbouring branches at least
/// `MIN_GAP` apart.
fn graphs() -> impl Strategy<Value = StarGraph> {
    (1usize..=5)
        .prop_flat_map(|m| (prop::collection::vec(0.0f64..1.0, m), 0.0f64..TAU))
        .prop_map(|(w, start)| {
            let m = w.len();
            let total: f64 = w.iter().sum::<f64>() + 1e-9;
            let spare = TAU - MIN_GAP * m as f64;
            let mut angles = Vec::with_capacity(m);
            let mut a = start;
            for x in &w {
                angles.push(a);
                a += MIN_GAP + spare * x / total;
            }
            StarGraph::from_unsorted(&angles, -1.0).unwrap()
        })
}

fn coarse() -> MeshParams {
    MeshParams::new(2.0, 0.3, 1.0).unwrap()
}

fn smooth(x: f64, y: f64) -> f64 {
    (x - 0.3 * y).cos() + x * y
}

fn area(mesh: &CrackMesh, sector: Option<usize>) -> f64 {
    mesh.triangles()
        .iter()
        .filter(|t| sector.is_none_or(|s| t.sector == s))
        .map(|t| mesh.signed_area(t))
        .sum()
}

/// Area of the polygon cut off by the outer chords, per sector or overall.
fn chord_area(mesh: &CrackMesh, sector: Option<usize>) -> f64 {
    let v = mesh.vertices();
    mesh.edge_group("outer")
        .unwrap()
        .iter()
        .filter(|e| sector.is_none_or(|s| mesh.dof_sector()[e[0]] == s))
        .map(|e| 0.5 * (v[e[0]][0] * v[e[1]][1] - v[e[1]][0] * v[e[0]][1]).abs())
        .sum()
}

/// Nodal values on `fine` of the P1 function `u` on `coarse`, assuming `fine`
/// is a red refinement of `coarse`.
fn prolong(coarse: &CrackMesh, fine: &CrackMesh, u: &[f64]) -> Vec<f64> {
    let close = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12;
    let cv = coarse.vertices();
    (0..fine.dof_count())
        .map(|i| {
            let p = fine.vertices()[i];
            let s = fine.dof_sector()[i];
            if let Some(j) = (0..coarse.dof_count()).find(|&j| coarse.dof_sector()[j] == s && close(cv[j], p)) {
                return u[j];
            }
            for t in coarse.triangles().iter().filter(|t| t.sector == s) {
                for k in 0..3 {
                    let (a, b) = (t.dofs[k], t.dofs[(k + 1) % 3]);
                    let mid = [0.5 * (cv[a][0] + cv[b][0]), 0.5 * (cv[a][1] + cv[b][1])];
                    if close(mid, p) {
                        return 0.5 * (u[a] + u[b]);
                    }
                }
            }
            panic!("fine dof {i} is neither a coarse node nor an edge midpoint");
        })
        .collect()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn sectors_tile_the_plane(g in graphs()) {
        let s = g.sectors();
        prop_assert_eq!(s.len(), g.branch_count());
        let total: f64 = s.iter().map(|x| 2.0 * x.half_opening).sum();
        prop_assert!((total - TAU).abs() < 1e-12);
        for (j, x) in s.iter().enumerate() {
            prop_assert!(x.half_opening > 0.0);
            prop_assert!((x.end_angle - x.start_angle - 2.0 * x.half_opening).abs() < 1e-12);
            let next = &s[(j + 1) % s.len()];
            let d = (x.end_angle - next.start_angle).rem_euclid(TAU);
            prop_assert!(d < 1e-12 || TAU - d < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn star_mesh_invariants(g in graphs()) {
        let params = coarse();
        let mesh = build_star_mesh(&g, &params).unwrap();
        let r2 = params.radius * params.radius;
        let total = area(&mesh, None);
        prop_assert!(total <= PI * r2 && rel_close(total, chord_area(&mesh, None), 1e-12), "area {}", total);
        for j in 0..g.branch_count() {
            let (a, b) = (area(&mesh, Some(j)), chord_area(&mesh, Some(j)));
            prop_assert!(rel_close(a, b, 1e-12), "sector {} area {} vs {}", j, a, b);
        }
        prop_assert_eq!(mesh.euler_characteristic(), 1);
        prop_assert_eq!(mesh.origin_dofs().len(), g.branch_count());
        for &o in mesh.origin_dofs() {
            prop_assert_eq!(mesh.vertices()[o], [0.0, 0.0]);
        }
        for t in mesh.triangles() {
            prop_assert!(t.dofs.iter().all(|&d| mesh.dof_sector()[d] == t.sector));
        }
        let mut per_branch = vec![0usize; g.branch_count()];
        for c in mesh.crack_pairs() {
            per_branch[c.branch] += 1;
            let p = mesh.vertices()[c.plus];
            let phi = p[1].atan2(p[0]).rem_euclid(TAU);
            let want = g.angles()[c.branch];
            let d = (phi - want).rem_euclid(TAU);
            prop_assert!(d < 1e-10 || TAU - d < 1e-10);
            prop_assert!(mesh.dof_sector()[c.plus] != mesh.dof_sector()[c.minus] || g.branch_count() == 1);
        }
        prop_assert!(per_branch.iter().all(|&n| n > 0));
    }

    #[test]
    fn continuous_vectors_have_no_jump(g in graphs()) {
        let mesh = build_star_mesh(&g, &coarse()).unwrap();
        let u = mesh.interpolate(|x, y, _| smooth(x, y));
        let j = jump_term(&mesh, 1.0).unwrap();
        prop_assert!(j.quadratic_form(&u).abs() < 1e-13);
        // One side of every crack lifted: a genuine jump.
        let mut v = vec![0.0; mesh.dof_count()];
        for c in mesh.crack_pairs() {
            v[c.plus] = 1.0;
        }
        prop_assert!(j.quadratic_form(&v) > 0.0);
    }

    #[test]
    fn matrices_are_symmetric_and_consistent(g in graphs()) {
        let mesh = build_star_mesh(&g, &coarse()).unwrap();
        let k = stiffness(&mesh).unwrap();
        let m = mass(&mesh).unwrap();
        prop_assert!(k.is_symmetric(0.0) && m.is_symmetric(0.0));
        let ones = vec![1.0; mesh.dof_count()];
        prop_assert!(k.mul_vec(&ones).iter().all(|x| x.abs() < 1e-12));
        prop_assert!(rel_close(m.quadratic_form(&ones), area(&mesh, None), 1e-12));
        let sys = assemble(&mesh, Problem::Star(g.clone()).spec()).unwrap();
        prop_assert!(sys.a.is_symmetric(0.0) && sys.m.is_symmetric(0.0));
        prop_assert_eq!(sys.dofs.full_dim(), mesh.dof_count());
        prop_assert_eq!(sys.a.dim(), sys.dofs.reduced_dim());
        let outer = mesh.group_dofs("outer").unwrap();
        prop_assert!(outer.iter().all(|&d| sys.dofs.reduced_index(d).is_none()));
    }

    #[test]
    fn red_refinement_nests_the_spaces(g in graphs()) {
        let c = build_star_mesh(&g, &MeshParams::new(2.0, 0.35, 1.0).unwrap()).unwrap();
        let f = refine(&c).unwrap();
        prop_assert_eq!(f.triangles().len(), 4 * c.triangles().len());
        prop_assert_eq!(f.euler_characteristic(), 1);
        let u = c.interpolate(|x, y, s| smooth(x, y) + s as f64);
        let pu = prolong(&c, &f, &u);
        for (a, b) in [
            (stiffness(&c).unwrap(), stiffness(&f).unwrap()),
            (mass(&c).unwrap(), mass(&f).unwrap()),
            (jump_term(&c, 1.0).unwrap(), jump_term(&f, 1.0).unwrap()),
        ] {
            let (qc, qf) = (a.quadratic_form(&u), b.quadratic_form(&pu));
            prop_assert!(rel_close(qc, qf, 1e-11), "{} vs {}", qc, qf);
        }
    }

    #[test]
    fn sector_mesh_refinement_keeps_the_robin_form(half in 0.3f64..1.5) {
        let c = build_sector_mesh(half, &MeshParams::new(1.5, 0.3, 2.0).unwrap()).unwrap();
        let f = refine(&c).unwrap();
        let u = c.interpolate(|x, y, _| smooth(x, y));
        let pu = prolong(&c, &f, &u);
        let (qc, qf) = (
            boundary_term(&c, "robin", 1.0).unwrap().quadratic_form(&u),
            boundary_term(&f, "robin", 1.0).unwrap().quadratic_form(&pu),
        );
        prop_assert!(rel_close(qc, qf, 1e-11), "{} vs {}", qc, qf);
    }
}

#[test]
fn line_mesh_is_mirror_symmetric() {
    let mesh = build_star_mesh(&StarGraph::line(-1.0), &MeshParams::new(3.0, 0.25, 2.0).unwrap()).unwrap();
    let key = |p: [f64; 2]| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
    let mut up: Vec<_> = mesh.vertices().iter().map(|&p| key(p)).collect();
    let mut down: Vec<_> = mesh.vertices().iter().map(|&p| key([p[0], -p[1]])).collect();
    up.sort_unstable();
    down.sort_unstable();
    assert_eq!(up, down);
}
