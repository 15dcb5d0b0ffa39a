//! Assembly of the discrete differential operators as exact sparse matrices.
//!
//! Every operator is computed from its full formula on the mesh and then
//! restricted to the rows present in the target space. For conforming
//! operators the discarded rows must vanish, which is checked.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::geometry;
use crate::homology::{ComplexKind, Family};
use crate::linalg::{q, ExactMatrix, Rational};
use crate::mesh::SimplicialComplex;
use crate::poly::{self, MatField, Poly};
use crate::spaces::{build_space, BasisAtom, Field, LocalElements, SpaceBasis, SpaceId, TET_EDGES};
use crate::{Error, Result};

/// One assembled complex: its spaces in degree order and the operators
/// `ops[k] : spaces[k] → spaces[k+1]`.
#[derive(Clone, Debug)]
pub struct ComplexAssembly {
    pub kind: ComplexKind,
    pub spaces: Vec<SpaceBasis>,
    pub ops: Vec<ExactMatrix>,
    /// Operator names, e.g. `hess` or `sym curl`.
    pub labels: Vec<String>,
}

impl ComplexAssembly {
    /// Space dimensions in degree order.
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(SpaceBasis::dim).collect()
    }
}

/// Collects triplets of one operator, dropping rows outside the target.
struct Builder<'a> {
    target: &'a SpaceBasis,
    cols: usize,
    triplets: Vec<(usize, usize, Rational)>,
    dropped: BTreeMap<(BasisAtom, usize), Rational>,
}

impl<'a> Builder<'a> {
    fn new(target: &'a SpaceBasis, cols: usize) -> Self {
        Self { target, cols, triplets: Vec::new(), dropped: BTreeMap::new() }
    }

    fn push(&mut self, atom: BasisAtom, col: usize, value: Rational) {
        if value.is_zero() {
            return;
        }
        match self.target.position(&atom) {
            Some(row) => self.triplets.push((row, col, value)),
            None => *self.dropped.entry((atom, col)).or_insert_with(Rational::zero) += value,
        }
    }

    /// Finishes a distributional operator, where dropping rows is a restriction.
    fn finish(self) -> Result<ExactMatrix> {
        ExactMatrix::from_triplets(self.target.dim(), self.cols, self.triplets)
    }

    /// Finishes a conforming operator: dropped non-bubble rows must vanish.
    fn finish_strict(self, label: &str) -> Result<ExactMatrix> {
        if let Some(((atom, col), _)) = self.dropped.iter().find(|((a, _), v)| !a.is_bubble() && !v.is_zero()) {
            return Err(Error::Assembly(format!(
                "{label}: column {col} has a nonzero coefficient on {atom:?} outside the target space"
            )));
        }
        self.finish()
    }
}

/// Assembles a complex on a mesh.
pub fn assemble(kind: ComplexKind, mesh: &SimplicialComplex) -> Result<ComplexAssembly> {
    let local = LocalElements::new(mesh)?;
    assemble_with(kind, mesh, &local)
}

/// Builds the spaces of a complex in degree order.
pub fn complex_spaces(kind: ComplexKind, mesh: &SimplicialComplex) -> Result<Vec<SpaceBasis>> {
    let n = kind.dim();
    if mesh.dim() != n {
        return Err(Error::Dimension(format!("{kind} needs a {n}D mesh, got {}D", mesh.dim())));
    }
    (0..=n).map(|k| build_space(SpaceId::new(kind.family(), n, k, kind.is_bc()), mesh)).collect()
}

/// Assembles a complex reusing precomputed local elements.
pub fn assemble_with(kind: ComplexKind, mesh: &SimplicialComplex, local: &LocalElements) -> Result<ComplexAssembly> {
    let spaces = complex_spaces(kind, mesh)?;
    let n = kind.dim();
    let cx = Ctx { mesh, local };
    let mut ops = Vec::with_capacity(n);
    let labels: Vec<&str> = match (kind.family(), n) {
        (Family::Hessian, 2) => {
            ops.push(cx.hess(&spaces[0], &spaces[1])?);
            ops.push(cx.rot(&spaces[1], &spaces[2])?);
            vec!["hess", "rot"]
        }
        (Family::Hessian, _) => {
            ops.push(cx.hess(&spaces[0], &spaces[1])?);
            ops.push(cx.curl(&spaces[1], &spaces[2])?);
            ops.push(cx.div(&spaces[2], &spaces[3])?);
            vec!["hess", "curl", "div"]
        }
        (Family::Aux, 2) => {
            ops.push(cx.aux_hess(&spaces[0], &spaces[1])?);
            ops.push(cx.aux_boundary_to_vertices(&spaces[1], &spaces[2])?);
            vec!["hess-", "rot-"]
        }
        (Family::Aux, _) => {
            ops.push(cx.aux_hess(&spaces[0], &spaces[1])?);
            ops.push(cx.aux_curl(&spaces[1], &spaces[2])?);
            ops.push(cx.aux_boundary_to_vertices(&spaces[2], &spaces[3])?);
            vec!["hess-", "curl-", "div-"]
        }
        (_, 2) => {
            ops.push(cx.symcurl_2d(&spaces[0], &spaces[1])?);
            ops.push(cx.divdiv_2d(&spaces[1], &spaces[2])?);
            vec!["sym curl", "div div"]
        }
        _ => {
            ops.push(cx.devgrad(&spaces[0], &spaces[1])?);
            ops.push(cx.symcurl_3d(&spaces[1], &spaces[2])?);
            ops.push(cx.hat_divdiv(&spaces[2], &spaces[3])?);
            vec!["dev grad", "sym curl", "div div"]
        }
    };
    Ok(ComplexAssembly { kind, spaces, ops, labels: labels.into_iter().map(String::from).collect() })
}

/// Sign `O_std(τ, σ) = −O(τ, σ)` of a codimension-one face.
fn o_std(mesh: &SimplicialComplex, k: usize, tau: usize, sigma: usize) -> Rational {
    q(-(mesh.raw_sign(k, tau, sigma) as i64))
}

fn facet_atom(n: usize, f: usize) -> BasisAtom {
    if n == 2 {
        BasisAtom::EdgeNNDelta { edge: f }
    } else {
        BasisAtom::FaceNNDelta { face: f }
    }
}

fn aux_facet_atom(n: usize, f: usize, p: usize) -> BasisAtom {
    if n == 2 {
        BasisAtom::AuxEdgeDist { edge: f, p }
    } else {
        BasisAtom::AuxFaceDist { face: f, p }
    }
}

fn const_of(field: &MatField) -> Vec<Vec<Rational>> {
    let n = field.len();
    poly::eval_matrix(field, &vec![q(0); n])
}

fn matrix_field(f: Option<Field>) -> Result<MatField> {
    match f {
        Some(Field::Matrix(m)) => Ok(m),
        other => Err(Error::Assembly(format!("expected a matrix field, got {other:?}"))),
    }
}

fn bilinear_const(u: &[Rational], m: &[Vec<Rational>], v: &[Rational]) -> Rational {
    let mut acc = q(0);
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += ui * &m[i][j] * vj;
        }
    }
    acc
}

/// Records a per-cell degree of freedom of a conforming field and checks
/// that all cells sharing the carrier agree.
fn record_single_valued(
    seen: &mut HashMap<BasisAtom, Rational>,
    atom: BasisAtom,
    value: Rational,
    label: &str,
) -> Result<()> {
    match seen.get(&atom) {
        Some(prev) if *prev != value => {
            Err(Error::Assembly(format!("{label}: degree of freedom {atom:?} is not single-valued")))
        }
        Some(_) => Ok(()),
        None => {
            seen.insert(atom, value);
            Ok(())
        }
    }
}

struct Ctx<'a> {
    mesh: &'a SimplicialComplex,
    local: &'a LocalElements,
}

impl Ctx<'_> {
    fn hess(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let n = m.dim();
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::LagrangeHat { vertex } = *atom else { unreachable!("V0 holds hats") };
            let mut jumps: BTreeMap<usize, Rational> = BTreeMap::new();
            for cell in m.cells_containing(0, vertex) {
                let a = m.simplex(n, cell).iter().position(|&v| v == vertex).expect("vertex of cell");
                let g = &self.local.grads(cell)[a];
                for f in m.faces(n, cell) {
                    let nf = geometry::facet_normal(m, f);
                    let s = q(geometry::outward_sign(m, f, cell) as i64);
                    *jumps.entry(f).or_insert_with(Rational::zero) += s * geometry::dot(g, &nf);
                }
            }
            for (f, j) in jumps {
                let nf = geometry::facet_normal(m, f);
                b.push(facet_atom(n, f), col, -j / geometry::dot(&nf, &nf));
            }
        }
        b.finish()
    }

    fn rot(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::EdgeNNDelta { edge } = *atom else { unreachable!("V1 in 2D holds edge deltas") };
            let nn = geometry::facet_normal(m, edge);
            let e = m.simplex(1, edge);
            for i in 0..2 {
                b.push(BasisAtom::VertexVecDelta { vertex: e[0], axis: i }, col, nn[i].clone());
                b.push(BasisAtom::VertexVecDelta { vertex: e[1], axis: i }, col, -nn[i].clone());
            }
        }
        b.finish()
    }

    fn curl(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::FaceNNDelta { face } = *atom else { unreachable!("V1 in 3D holds face deltas") };
            let nf = geometry::facet_normal(m, face);
            for e in m.faces(2, face) {
                let [np, nm] = geometry::edge_normals(m, e);
                let (a, c) = geometry::resolve_in_pair(&nf, &np, &nm)?;
                let o = o_std(m, 1, e, face);
                b.push(BasisAtom::EdgeNTDelta { edge: e, slot: 0 }, col, &o * a);
                b.push(BasisAtom::EdgeNTDelta { edge: e, slot: 1 }, col, o * c);
            }
        }
        b.finish()
    }

    fn div(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::EdgeNTDelta { edge, slot } = *atom else { unreachable!("V2 in 3D holds edge deltas") };
            let normal = &geometry::edge_normals(m, edge)[slot];
            let e = m.simplex(1, edge);
            for i in 0..3 {
                b.push(BasisAtom::VertexVecDelta { vertex: e[0], axis: i }, col, normal[i].clone());
                b.push(BasisAtom::VertexVecDelta { vertex: e[1], axis: i }, col, -normal[i].clone());
            }
        }
        b.finish()
    }

    fn aux_hess(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let n = m.dim();
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::CellPoly { cell, p } = *atom else { unreachable!("V-0 holds cell polynomials") };
            for f in m.faces(n, cell) {
                b.push(aux_facet_atom(n, f, p), col, q(geometry::outward_sign(m, f, cell) as i64));
            }
        }
        b.finish()
    }

    /// `rot₋` in 2D and `div₋` in 3D: `(e, p) ↦ (x₂, p) − (x₁, p)`.
    fn aux_boundary_to_vertices(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::AuxEdgeDist { edge, p } = *atom else { unreachable!("aux edge space") };
            let e = m.simplex(1, edge);
            b.push(BasisAtom::AuxVertexDist { vertex: e[1], p }, col, q(1));
            b.push(BasisAtom::AuxVertexDist { vertex: e[0], p }, col, q(-1));
        }
        b.finish()
    }

    fn aux_curl(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let BasisAtom::AuxFaceDist { face, p } = *atom else { unreachable!("aux face space") };
            for e in m.faces(2, face) {
                b.push(BasisAtom::AuxEdgeDist { edge: e, p }, col, o_std(m, 1, e, face));
            }
        }
        b.finish()
    }

    fn symcurl_2d(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let mut seen = HashMap::new();
            for cell in self.local.support(m, atom) {
                let Some(Field::Vector(u)) = self.local.local_field(m, atom, cell) else {
                    unreachable!("U0 holds vector hats")
                };
                let s = const_of(&poly::sym(&poly::curl_2d(&u)));
                for edge in m.faces(2, cell) {
                    let nn = geometry::facet_normal(m, edge);
                    record_single_valued(
                        &mut seen,
                        BasisAtom::ReggeNN { edge },
                        bilinear_const(&nn, &s, &nn),
                        "sym curl",
                    )?;
                }
            }
            for (atom, v) in seen {
                b.push(atom, col, v);
            }
        }
        b.finish_strict("sym curl")
    }

    fn divdiv_2d(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            for cell in self.local.support(m, atom) {
                let sigma = const_of(&matrix_field(self.local.local_field(m, atom, cell))?);
                for edge in m.faces(2, cell) {
                    let t = geometry::tangent(m, edge);
                    let nn = geometry::facet_normal(m, edge);
                    let s = q(geometry::outward_sign(m, edge, cell) as i64);
                    let c = s * bilinear_const(&t, &sigma, &nn) / geometry::dot(&t, &t);
                    let e = m.simplex(1, edge);
                    b.push(BasisAtom::VertexScalarDelta { vertex: e[1] }, col, c.clone());
                    b.push(BasisAtom::VertexScalarDelta { vertex: e[0] }, col, -c);
                }
            }
        }
        b.finish()
    }

    fn devgrad(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let mut seen = HashMap::new();
            for cell in self.local.support(m, atom) {
                let Some(Field::Vector(u)) = self.local.local_field(m, atom, cell) else {
                    unreachable!("U0 holds vector hats")
                };
                let field = poly::dev(&poly::jacobian(&u));
                let pts = m.points(3, cell);
                let dofs = crate::spaces::u1_dofs(&pts, self.local.bubbles(cell), &field);
                let edges = self.local.cell_edges(cell);
                for (j, _) in TET_EDGES.iter().enumerate() {
                    for slot in 0..2 {
                        let atom = BasisAtom::MCSEdge { edge: edges[j], slot };
                        record_single_valued(&mut seen, atom, dofs[2 * j + slot].clone(), "dev grad")?;
                    }
                }
                for slot in 0..2 {
                    b.push(BasisAtom::MCSBubble { cell, slot }, col, dofs[12 + slot].clone());
                }
            }
            for (atom, v) in seen {
                b.push(atom, col, v);
            }
        }
        b.finish_strict("dev grad")
    }

    fn symcurl_3d(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let half = Rational::new(1.into(), 2.into());
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            let mut seen = HashMap::new();
            for cell in self.local.support(m, atom) {
                let xi = matrix_field(self.local.local_field(m, atom, cell))?;
                let s = const_of(&poly::sym(&poly::curl_rows(&xi)));
                for face in m.faces(3, cell) {
                    let nn = geometry::facet_normal(m, face);
                    let value = &half * bilinear_const(&nn, &s, &nn);
                    record_single_valued(&mut seen, BasisAtom::TDNNSFace { face }, value, "sym curl")?;
                }
                let vol = m.cell_volume(cell);
                for (slot, bub) in self.local.bubbles(cell).iter().enumerate() {
                    let frob = poly::contract_const(bub, &poly::const_matrix(&s));
                    b.push(BasisAtom::TDNNSBubble { cell, slot }, col, &vol * frob.coeff([0, 0, 0]));
                }
            }
            for (atom, v) in seen {
                b.push(atom, col, v);
            }
        }
        b.finish_strict("sym curl")
    }

    fn hat_divdiv(&self, src: &SpaceBasis, dst: &SpaceBasis) -> Result<ExactMatrix> {
        let m = self.mesh;
        let mut b = Builder::new(dst, src.dim());
        for (col, atom) in src.atoms.iter().enumerate() {
            for cell in self.local.support(m, atom) {
                let sigma = const_of(&matrix_field(self.local.local_field(m, atom, cell))?);
                let verts = m.simplex(3, cell);
                let grads = self.local.grads(cell);
                for face in m.faces(3, cell) {
                    let nn = geometry::facet_normal(m, face);
                    let s = q(geometry::outward_sign(m, face, cell) as i64);
                    let sn: Vec<Rational> = (0..3).map(|i| geometry::dot(&sigma[i], &nn)).collect();
                    let w = geometry::cross(&nn, &sn);
                    let denom = geometry::dot(&nn, &nn) * q(2);
                    for (a, g) in grads.iter().enumerate() {
                        let c = &s * geometry::dot(&w, &geometry::cross(&nn, g)) / &denom;
                        b.push(BasisAtom::VertexScalarDelta { vertex: verts[a] }, col, c);
                    }
                }
            }
        }
        b.finish()
    }
}

/// Hat function of a vertex as a polynomial on one cell, in the coefficient
/// order `1, x, y[, z]`.
fn hat_coefficients(local: &LocalElements, mesh: &SimplicialComplex, vertex: usize, cell: usize) -> Vec<Rational> {
    let h: Poly = local.hat(mesh, vertex, cell);
    let n = mesh.dim();
    let mut out = vec![h.coeff([0, 0, 0])];
    for i in 0..n {
        let mut e = [0u8; 3];
        e[i] = 1;
        out.push(h.coeff(e));
    }
    out
}

/// Restriction of `V⁰` hats to cellwise polynomials in `V₋⁰`.
pub fn restriction_map(
    mesh: &SimplicialComplex,
    local: &LocalElements,
    src: &SpaceBasis,
    dst: &SpaceBasis,
) -> Result<ExactMatrix> {
    let mut b = Builder::new(dst, src.dim());
    for (col, atom) in src.atoms.iter().enumerate() {
        let BasisAtom::LagrangeHat { vertex } = *atom else {
            return Err(Error::Invalid("restriction acts on V0".into()));
        };
        for cell in mesh.cells_containing(0, vertex) {
            for (p, c) in hat_coefficients(local, mesh, vertex, cell).into_iter().enumerate() {
                b.push(BasisAtom::CellPoly { cell, p }, col, c);
            }
        }
    }
    b.finish_strict("restriction")
}
