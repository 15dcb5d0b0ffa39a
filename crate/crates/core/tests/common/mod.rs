//! Helpers shared by the integration tests.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod snf;

use std::path::PathBuf;

use distfe::linalg::Rational;
use distfe::{generate_mesh, load_mesh, GeneratorKind, SimplicialComplex};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A suite mesh together with the name it is reported under.
pub struct SuiteMesh {
    pub name: String,
    pub mesh: SimplicialComplex,
}

fn mesh_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes").join(name)
}

/// The certification suite: four 2D and six 3D meshes.
pub fn suite() -> Vec<SuiteMesh> {
    let file = |f: &str| SuiteMesh { name: format!("meshes/{f}"), mesh: load_mesh(mesh_file(f)).expect("suite file") };
    let gen = |k: GeneratorKind, r: usize| SuiteMesh {
        name: format!("gen:{}:{r}", k.name()),
        mesh: generate_mesh(k, r).expect("suite generator"),
    };
    vec![
        file("triangle.txt"),
        gen(GeneratorKind::Square, 1),
        gen(GeneratorKind::CrissCrossSquare, 1),
        gen(GeneratorKind::SquareWithHole, 4),
        file("tet.txt"),
        file("two-tet.txt"),
        gen(GeneratorKind::Cube, 1),
        gen(GeneratorKind::Cube, 2),
        gen(GeneratorKind::CubeWithTunnel, 3),
        gen(GeneratorKind::CubeWithCavity, 3),
    ]
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn det3(p: &[Vec<Rational>]) -> Rational {
    let d: Vec<Vec<Rational>> = (1..4).map(|i| (0..3).map(|c| &p[i][c] - &p[0][c]).collect()).collect();
    &d[0][0] * (&d[1][1] * &d[2][2] - &d[1][2] * &d[2][1]) - &d[0][1] * (&d[1][0] * &d[2][2] - &d[1][2] * &d[2][0])
        + &d[0][2] * (&d[1][0] * &d[2][1] - &d[1][1] * &d[2][0])
}

/// Non-degenerate tetrahedra with random rational vertices.
pub fn random_tets(count: usize, seed: u64) -> Vec<Vec<Vec<Rational>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let tet: Vec<Vec<Rational>> =
            (0..4).map(|_| (0..3).map(|_| rat(rng.random_range(-6..=6), rng.random_range(1..=5))).collect()).collect();
        if !det3(&tet).is_zero() {
            out.push(tet);
        }
    }
    out
}

pub fn reference_tet() -> Vec<Vec<Rational>> {
    let z = || Rational::zero();
    let o = || Rational::one();
    vec![vec![z(), z(), z()], vec![o(), z(), z()], vec![z(), o(), z()], vec![z(), z(), o()]]
}

/// Rank of a dense rational matrix by plain Gaussian elimination.
pub fn dense_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &pivot;
                for j in c..cols {
                    let d = &f * &m[rank][j];
                    m[r][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}
