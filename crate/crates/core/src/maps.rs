//! Vertical maps between complexes: the inclusion of the distributional
//! Hessian complex into the auxiliary complex, the maps `κ` onto simplicial
//! chains, the nodal maps `g` onto the `∂̃` complex, and the duality pairings
//! between distribution and function spaces.

use std::collections::{BTreeSet, HashMap};

use crate::functionals::{apply_distribution, Integrator};
use crate::geometry;
use crate::homology::{tilde_chain_basis, Family};
use crate::linalg::{q, ExactMatrix, Rational};
use crate::mesh::{subsets, OrientationVariant, SimplicialComplex};
use crate::spaces::{monomial_p, BasisAtom, LocalElements, SpaceBasis};
use crate::{Error, Result};

fn variant(bc: bool) -> OrientationVariant {
    if bc {
        OrientationVariant::Standard
    } else {
        OrientationVariant::Relative
    }
}

fn aux_check(space: &SpaceBasis) -> Result<()> {
    if space.id.family != Family::Aux {
        return Err(Error::Invalid(format!("{} is not an auxiliary space", space.id)));
    }
    Ok(())
}

/// Carrier `(simplex, p)` of an auxiliary atom.
fn aux_carrier(atom: &BasisAtom) -> (usize, usize) {
    match *atom {
        BasisAtom::CellPoly { cell: s, p }
        | BasisAtom::AuxFaceDist { face: s, p }
        | BasisAtom::AuxEdgeDist { edge: s, p }
        | BasisAtom::AuxVertexDist { vertex: s, p } => (s, p),
        other => unreachable!("not an auxiliary atom: {other:?}"),
    }
}

/// Scalar `c_σ` of the chain maps on a simplex of the given degree.
fn chain_scale(mesh: &SimplicialComplex, degree: usize, simplex: usize) -> Rational {
    let n = mesh.dim();
    let eps = || q(mesh.cell_orientation(simplex) as i64);
    match (n, degree) {
        (2, 0) => eps(),
        (2, 1) => q(1),
        (2, _) => q(-1),
        (_, 0) => -eps(),
        (_, 1) => q(1),
        (_, 2) => q(-1),
        _ => q(1),
    }
}

/// `κ^k : V₋^k → C_{n−k} ⊗ ℝ^{n+1}`, block-diagonal `c_σ · I`.
pub fn kappa(mesh: &SimplicialComplex, space: &SpaceBasis) -> Result<ExactMatrix> {
    aux_check(space)?;
    let n = mesh.dim();
    let k = space.id.degree;
    let chains = mesh.chain_basis(n - k, variant(space.id.bc));
    let pos: HashMap<usize, usize> = chains.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut triplets = Vec::with_capacity(space.dim());
    for (col, atom) in space.atoms.iter().enumerate() {
        let (s, p) = aux_carrier(atom);
        let row = pos[&s] * (n + 1) + p;
        triplets.push((row, col, chain_scale(mesh, k, s)));
    }
    ExactMatrix::from_triplets(chains.len() * (n + 1), space.dim(), triplets)
}

/// `g^k : V₋^k → ⊕_σ P1(σ)`, evaluating the coefficient polynomial at the
/// vertices of its carrier and scaling by `c_σ`.
pub fn nodal_map(mesh: &SimplicialComplex, space: &SpaceBasis) -> Result<ExactMatrix> {
    aux_check(space)?;
    let n = mesh.dim();
    let k = space.id.degree;
    let rows = tilde_chain_basis(mesh, n - k, variant(space.id.bc));
    let pos: HashMap<(usize, usize), usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut triplets = Vec::new();
    for (col, atom) in space.atoms.iter().enumerate() {
        let (s, p) = aux_carrier(atom);
        let c = chain_scale(mesh, k, s);
        let mono = monomial_p(p);
        for (a, &v) in mesh.simplex(n - k, s).iter().enumerate() {
            triplets.push((pos[&(s, a)], col, &c * mono.eval(mesh.vertex(v))));
        }
    }
    ExactMatrix::from_triplets(rows.len(), space.dim(), triplets)
}

/// Inclusion `ι^k : V^k → V₋^k` of the distributional Hessian complex for
/// `k ≥ 1`; for `k = 0` the top-row space is zero and the map has no columns.
pub fn inclusion(mesh: &SimplicialComplex, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
    aux_check(dst)?;
    if src.id.family != Family::Hessian || src.id.degree != dst.id.degree || src.id.bc != dst.id.bc {
        return Err(Error::Invalid(format!("no inclusion from {} into {}", src.id, dst.id)));
    }
    let n = mesh.dim();
    if src.id.degree == 0 {
        return Ok(ExactMatrix::zeros(dst.dim(), 0));
    }
    let mut triplets = Vec::new();
    let mut push = |atom: BasisAtom, col: usize, v: Rational| -> Result<()> {
        let row = dst.position(&atom).ok_or_else(|| Error::Assembly(format!("{atom:?} missing from {}", dst.id)))?;
        triplets.push((row, col, v));
        Ok(())
    };
    // `±(σ, m·(x − x₁))` for a carrier simplex with first vertex `x₁`.
    let affine = |m: &[Rational], x1: &[Rational], sign: i64| -> Vec<(usize, Rational)> {
        let s = q(sign);
        let mut out = vec![(0, -&s * geometry::dot(m, x1))];
        out.extend(m.iter().enumerate().map(|(i, c)| (i + 1, &s * c)));
        out
    };
    for (col, atom) in src.atoms.iter().enumerate() {
        match *atom {
            BasisAtom::EdgeNNDelta { edge: f } | BasisAtom::FaceNNDelta { face: f } => {
                let nf = geometry::facet_normal(mesh, f);
                let x1 = mesh.vertex(mesh.simplex(n - 1, f)[0]);
                for (p, v) in affine(&nf, x1, -1) {
                    push(
                        if n == 2 {
                            BasisAtom::AuxEdgeDist { edge: f, p }
                        } else {
                            BasisAtom::AuxFaceDist { face: f, p }
                        },
                        col,
                        v,
                    )?;
                }
            }
            BasisAtom::EdgeNTDelta { edge, slot } => {
                let m = &geometry::edge_normals(mesh, edge)[slot];
                let x1 = mesh.vertex(mesh.simplex(1, edge)[0]);
                for (p, v) in affine(m, x1, -1) {
                    push(BasisAtom::AuxEdgeDist { edge, p }, col, v)?;
                }
            }
            BasisAtom::VertexVecDelta { vertex, axis } => {
                push(BasisAtom::AuxVertexDist { vertex, p: axis + 1 }, col, q(1))?;
                push(BasisAtom::AuxVertexDist { vertex, p: 0 }, col, -mesh.vertex(vertex)[axis].clone())?;
            }
            other => return Err(Error::Invalid(format!("{other:?} has no auxiliary image"))),
        }
    }
    ExactMatrix::from_triplets(dst.dim(), src.dim(), triplets.into_iter().filter(|(_, _, v)| *v != q(0)))
}

/// Simplices of a top cell grouped by dimension.
fn subsimplices(mesh: &SimplicialComplex, cell: usize) -> Vec<(usize, usize)> {
    let n = mesh.dim();
    let verts = mesh.simplex(n, cell);
    let mut out = Vec::new();
    for k in 0..=n {
        for s in subsets(verts, k + 1) {
            out.push((k, mesh.find(&s).expect("face of a cell")));
        }
    }
    out
}

/// Checks that a distribution space and a function space form one of the
/// dual pairs `(V^k, U^{n−k})` with opposite boundary conditions.
fn sanctioned(v: &SpaceBasis, u: &SpaceBasis) -> Result<()> {
    let ok = v.id.family == Family::Hessian
        && matches!(u.id.family, Family::Divdiv | Family::TrimmedDivdiv)
        && v.id.dim == u.id.dim
        && v.id.degree + u.id.degree == v.id.dim
        && v.id.bc != u.id.bc;
    if !ok {
        return Err(Error::Invalid(format!("{} and {} are not a dual pair", v.id, u.id)));
    }
    Ok(())
}

/// Pairing matrix `P[i, j] = ⟨V_i, U_j⟩` between a distribution space and
/// the dual function space. Each entry evaluates the distribution atom on
/// the function atom restricted to a cell containing the atom's carrier.
pub fn pairing(
    mesh: &SimplicialComplex,
    local: &LocalElements,
    integ: &mut Integrator<'_>,
    v: &SpaceBasis,
    u: &SpaceBasis,
) -> Result<ExactMatrix> {
    sanctioned(v, u)?;
    let n = mesh.dim();
    let mut by_simplex: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, atom) in v.atoms.iter().enumerate() {
        by_simplex.entry(atom.simplex(n)).or_default().push(i);
    }
    let mut triplets = Vec::new();
    for (j, uatom) in u.atoms.iter().enumerate() {
        let cells = if uatom.is_function() {
            local.support(mesh, uatom)
        } else {
            let (k, s) = uatom.simplex(n);
            mesh.cells_containing(k, s)
        };
        let mut done = BTreeSet::new();
        for &cell in &cells {
            for key in subsimplices(mesh, cell) {
                for &i in by_simplex.get(&key).into_iter().flatten() {
                    if done.contains(&i) {
                        continue;
                    }
                    let vatom = &v.atoms[i];
                    let value = if uatom.is_function() {
                        let field = local.local_field(mesh, uatom, cell).expect("cell in support");
                        apply_distribution(integ, vatom, &field)?
                    } else {
                        match local.local_field(mesh, vatom, cell) {
                            Some(field) => apply_distribution(integ, uatom, &field)?,
                            None => continue,
                        }
                    };
                    done.insert(i);
                    if value != q(0) {
                        triplets.push((i, j, value));
                    }
                }
            }
        }
    }
    ExactMatrix::from_triplets(v.dim(), u.dim(), triplets)
}
