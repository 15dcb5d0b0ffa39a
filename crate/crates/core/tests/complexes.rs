//! Operator shapes, pairings and space dimensions on small meshes.

#![allow(clippy::needless_range_loop)]

mod common;

use common::{rat, suite};
use distfe::functionals::Integrator;
use distfe::maps::pairing;
use distfe::spaces::LocalElements;
use distfe::{assemble, generate_mesh, load_mesh, BasisAtom, ComplexKind, Error, GeneratorKind, SimplicialComplex};

fn mesh(name: &str) -> SimplicialComplex {
    load_mesh(std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../meshes").join(name)).unwrap()
}

#[test]
fn single_triangle_hessian_has_no_rows() {
    let asm = assemble(ComplexKind::Hessian2d, &mesh("triangle.txt")).unwrap();
    assert_eq!((asm.ops[0].rows(), asm.ops[0].cols()), (0, 3));
}

#[test]
fn single_tet_operators_have_no_rows() {
    let asm = assemble(ComplexKind::Hessian3d, &mesh("tet.txt")).unwrap();
    assert_eq!(asm.ops.len(), 3);
    assert!(asm.ops.iter().all(|op| op.rows() == 0));
}

#[test]
fn two_tet_hessian_follows_the_affine_dependency() {
    // The gradient jump of a hat across the shared face is proportional to
    // its coefficient in the affine dependency 2v0 − v1 − v2 − v3 + v4 = 0.
    let m = mesh("two-tet.txt");
    let asm = assemble(ComplexKind::Hessian3d, &m).unwrap();
    let hess = &asm.ops[0];
    assert_eq!((hess.rows(), hess.cols()), (1, 5));
    let dependency = [2, -1, -1, -1, 1];
    let value = |v: usize| {
        let j = asm.spaces[0].position(&BasisAtom::LagrangeHat { vertex: v }).unwrap();
        hess.get(0, j)
    };
    let unit = value(4);
    assert_ne!(unit, rat(0, 1));
    for (v, c) in dependency.iter().enumerate() {
        assert_eq!(value(v), &unit * rat(*c, 1), "vertex {v}");
    }
}

#[test]
fn hat_against_vertex_delta_pairing_is_the_identity() {
    let m = generate_mesh(GeneratorKind::CrissCrossSquare, 2).unwrap();
    let local = LocalElements::new(&m).unwrap();
    let mut integ = Integrator::new(&m);
    let v = &assemble(ComplexKind::Hessian0_2d, &m).unwrap().spaces[0];
    let u = &assemble(ComplexKind::Divdiv2d, &m).unwrap().spaces[2];
    let p = pairing(&m, &local, &mut integ, v, u).unwrap();
    assert_eq!((p.rows(), p.cols()), (v.dim(), u.dim()));
    assert!(p.is_nondegenerate().unwrap());
    for (i, j, x) in p.entries() {
        assert_eq!((i, x.to_string()), (j, "1".to_string()));
    }
}

#[test]
fn unsanctioned_pairing_is_rejected() {
    let m = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
    let local = LocalElements::new(&m).unwrap();
    let mut integ = Integrator::new(&m);
    let v = &assemble(ComplexKind::Hessian2d, &m).unwrap().spaces[0];
    let u = &assemble(ComplexKind::Divdiv2d, &m).unwrap().spaces[2];
    assert!(matches!(pairing(&m, &local, &mut integ, v, u), Err(Error::Invalid(_))));
}

#[test]
fn two_dimensional_space_counts() {
    for s in suite().into_iter().filter(|s| s.mesh.dim() == 2) {
        let m = &s.mesh;
        let interior = |k: usize| m.interior(k).len();
        let hess = assemble(ComplexKind::Hessian2d, m).unwrap().dims();
        assert_eq!(hess[1], interior(1), "{}", s.name);
        assert_eq!(hess[2], 2 * interior(0), "{}", s.name);
        let aux = assemble(ComplexKind::AuxHessian2d, m).unwrap().dims();
        assert_eq!(aux[1], 3 * interior(1), "{}", s.name);
    }
}

#[test]
fn three_dimensional_aux_counts() {
    for s in suite().into_iter().filter(|s| s.mesh.dim() == 3 && s.mesh.num(3) <= 48) {
        let m = &s.mesh;
        let aux = assemble(ComplexKind::AuxHessian3d, m).unwrap().dims();
        for k in 1..=3 {
            assert_eq!(aux[k], 4 * m.interior(3 - k).len(), "{} degree {k}", s.name);
        }
    }
}

/// BC distribution spaces add the atoms carried by boundary simplices; BC
/// function spaces drop the atoms carried by boundary simplices.
#[test]
fn boundary_variants_differ_by_boundary_atoms() {
    for s in suite().into_iter().filter(|s| s.mesh.num(s.mesh.dim()) <= 48) {
        let m = &s.mesh;
        let n = m.dim();
        for plain in ComplexKind::for_dim(n).into_iter().filter(|k| !k.is_bc()) {
            let bc = plain.with_bc(true);
            let (a, b) = (assemble(plain, m).unwrap(), assemble(bc, m).unwrap());
            for (p, q) in a.spaces.iter().zip(&b.spaces) {
                let (small, large) = if p.dim() <= q.dim() { (p, q) } else { (q, p) };
                for atom in &small.atoms {
                    assert!(large.position(atom).is_some(), "{plain} on {}: {atom:?} missing", s.name);
                }
                for atom in large.atoms.iter().filter(|a| small.position(a).is_none()) {
                    let (k, i) = atom.simplex(n);
                    assert!(m.is_boundary(k, i), "{plain} on {}: extra atom {atom:?} is interior", s.name);
                }
                let distributions = p.atoms.iter().chain(&q.atoms).all(|a| !a.is_function());
                if distributions {
                    assert!(q.dim() >= p.dim(), "{plain} on {}: BC distribution space is smaller", s.name);
                }
            }
        }
    }
}
