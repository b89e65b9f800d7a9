use std::collections::BTreeMap;
use std::f64::consts::PI;

use starspec_core::assembly::{jump_term, mass, stiffness};
use starspec_core::mesh::{refine, CrackPair, InterfaceEdge, MeshParts, Triangle};
use starspec_core::CrackMesh;

fn rim(k: usize) -> [f64; 2] {
    let t = k as f64 * PI / 4.0;
    [t.cos(), t.sin()]
}

/// Unit disk as a fan of 8 triangles around the origin, cut along the
/// positive x-axis. Dof 1 is the upper copy of (1, 0), dof 9 the lower one.
fn cut_disk() -> CrackMesh {
    let mut vertices = vec![[0.0, 0.0]];
    vertices.extend((0..=8).map(rim));
    vertices[9] = [1.0, 0.0];
    let triangles = (1..=8)
        .map(|k| Triangle {
            dofs: [0, k, k + 1],
            sector: 0,
        })
        .collect();
    let outer = (1..=8).map(|k| [k, k + 1]).collect();
    CrackMesh::from_parts(MeshParts {
        vertices,
        triangles,
        crack_pairs: vec![CrackPair {
            plus: 1,
            minus: 9,
            branch: 0,
        }],
        interface_edges: vec![InterfaceEdge {
            branch: 0,
            plus: [0, 1],
            minus: [0, 9],
        }],
        edge_groups: BTreeMap::from([("outer".to_string(), outer)]),
        origin_dofs: vec![0],
        dirichlet_groups: vec![],
    })
    .unwrap()
}

/// Same fan without the cut.
fn whole_disk() -> CrackMesh {
    let mut vertices = vec![[0.0, 0.0]];
    vertices.extend((0..8).map(rim));
    let triangles = (1..=8)
        .map(|k| Triangle {
            dofs: [0, k, k % 8 + 1],
            sector: 0,
        })
        .collect();
    CrackMesh::from_parts(MeshParts {
        vertices,
        triangles,
        ..Default::default()
    })
    .unwrap()
}

fn smooth(x: f64, y: f64) -> f64 {
    1.0 + x - 2.0 * y + x * y + (3.0 * x).sin()
}

#[test]
fn hand_disk_is_valid_and_has_disk_topology() {
    let m = cut_disk();
    assert_eq!(m.triangles().len(), 8);
    assert_eq!(m.dof_count(), 10);
    assert_eq!(m.euler_characteristic(), 1);
    assert_eq!(whole_disk().euler_characteristic(), 1);
}

#[test]
fn jump_vanishes_on_continuous_vectors() {
    let m = cut_disk();
    let u = m.interpolate(|x, y, _| smooth(x, y));
    assert_eq!(u[1], u[9]);
    let j = jump_term(&m, 1.0).unwrap();
    assert!(j.quadratic_form(&u).abs() < 1e-14);

    // A unit jump at the rim, falling linearly to zero at the tip, has
    // ∫_0^1 t² dt = 1/3.
    let mut e = vec![0.0; 10];
    e[1] = 1.0;
    assert!((j.quadratic_form(&e) - 1.0 / 3.0).abs() < 1e-14);
    assert!((jump_term(&m, -2.0).unwrap().quadratic_form(&e) + 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn continuous_vectors_see_the_uncut_forms() {
    let cut = cut_disk();
    let whole = whole_disk();
    let u = cut.interpolate(|x, y, _| smooth(x, y));
    let w = whole.interpolate(|x, y, _| smooth(x, y));
    for (a, b) in [
        (stiffness(&cut).unwrap(), stiffness(&whole).unwrap()),
        (mass(&cut).unwrap(), mass(&whole).unwrap()),
    ] {
        let (qa, qb) = (a.quadratic_form(&u), b.quadratic_form(&w));
        assert!((qa - qb).abs() < 1e-13 * qb.abs().max(1.0), "{qa} vs {qb}");
    }
}

#[test]
fn stiffness_decouples_across_the_cut() {
    let k = stiffness(&cut_disk()).unwrap();
    assert_eq!(k.get(1, 9), 0.0);
    // Dof 1 only touches the upper triangle, dof 9 only the lower one.
    assert_eq!(k.get(1, 8), 0.0);
    assert_eq!(k.get(9, 2), 0.0);
    assert!(k.get(1, 2) != 0.0 && k.get(9, 8) != 0.0);
    let ones = vec![1.0; 10];
    assert!(k.mul_vec(&ones).iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn refinement_counts() {
    let fine = refine(&cut_disk()).unwrap();
    assert_eq!(fine.triangles().len(), 32);
    // The new midpoint on the crack is doubled; the shared tip is not a pair.
    assert_eq!(fine.crack_pairs().len(), 2);
    assert_eq!(fine.euler_characteristic(), 1);
    let u = fine.interpolate(|x, y, _| smooth(x, y));
    assert!(jump_term(&fine, 1.0).unwrap().quadratic_form(&u).abs() < 1e-14);
    let finer = refine(&fine).unwrap();
    assert_eq!(finer.triangles().len(), 128);
    assert_eq!(finer.crack_pairs().len(), 4);
}
