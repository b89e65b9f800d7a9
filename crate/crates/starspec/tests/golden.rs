use std::path::Path;

use starspec::core::assembly::assemble;
use starspec::core::mesh::build_star_mesh;
use starspec::core::models::Problem;
use starspec::core::{broken_line, MeshParams};
use starspec::dump::{matrix_to_string, mesh_to_string, parse_matrix, parse_mesh, MeshDump};

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

fn same_entries(got: &[(usize, usize, f64)], want: &[(usize, usize, f64)]) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!((g.0, g.1), (w.0, w.1));
        assert!(close(g.2, w.2), "entry ({}, {}): {} vs {}", g.0, g.1, g.2, w.2);
    }
}

/// Broken line at ±π/4 on the unit disk with h = 0.5.
fn small_case() -> (starspec::core::CrackMesh, Problem) {
    let graph = broken_line(std::f64::consts::FRAC_PI_4, -1.0).unwrap();
    let mesh = build_star_mesh(&graph, &MeshParams::uniform(1.0, 0.5).unwrap()).unwrap();
    (mesh, Problem::Star(graph))
}

#[test]
fn mesh_matches_golden_file() {
    let (mesh, _) = small_case();
    let want = parse_mesh(&golden("mesh.txt")).unwrap();
    let got = MeshDump::of(&mesh);
    assert_eq!(got.triangles, want.triangles);
    assert_eq!(got.crack_pairs, want.crack_pairs);
    assert_eq!(got.vertices.len(), want.vertices.len());
    for (g, w) in got.vertices.iter().zip(&want.vertices) {
        assert!(close(g[0], w[0]) && close(g[1], w[1]), "{g:?} vs {w:?}");
    }
}

#[test]
fn matrices_match_golden_files() {
    let (mesh, problem) = small_case();
    let sys = assemble(&mesh, problem.spec()).unwrap();
    same_entries(&sys.a.triplets(), &parse_matrix(&golden("A.txt")).unwrap());
    same_entries(&sys.m.triplets(), &parse_matrix(&golden("M.txt")).unwrap());
}

#[test]
fn dumps_round_trip() {
    let (mesh, problem) = small_case();
    assert_eq!(parse_mesh(&mesh_to_string(&mesh)).unwrap(), MeshDump::of(&mesh));
    let a = assemble(&mesh, problem.spec()).unwrap().a;
    assert_eq!(parse_matrix(&matrix_to_string(&a)).unwrap(), a.triplets());
}
