//! Basis atoms of every discrete space and the local finite elements behind
//! the function spaces (rotated Regge, TDNNS, the 14-dimensional `U¹`).

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point};
use crate::homology::Family;
use crate::linalg::{dense, q, qf, ExactMatrix, Rational};
use crate::mesh::SimplicialComplex;
use crate::poly::{self, MatField, Poly, VecField};
use crate::{Error, Result};

/// One basis element of a discrete space.
///
/// Distribution atoms carry their direction payloads implicitly: they are
/// recomputed from the mesh (`t_e`, `n_e`, `n_f`, `n_{e,±}`) so that two
/// atoms compare equal iff they describe the same functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BasisAtom {
    /// Continuous piecewise-linear hat function.
    LagrangeHat { vertex: usize },
    /// Vector hat `λ_v e_axis`.
    VecLagrangeHat { vertex: usize, axis: usize },
    /// `δ_f[n_f ⊗ n_f]` on a 3D face.
    FaceNNDelta { face: usize },
    /// `δ_e[n_{e,slot} ⊗ t_e]` on a 3D edge, slot 0 is `+` and 1 is `−`.
    EdgeNTDelta { edge: usize, slot: usize },
    /// `δ_e[n_e ⊗ n_e]` on a 2D edge.
    EdgeNNDelta { edge: usize },
    /// `δ_x[e_axis]`.
    VertexVecDelta { vertex: usize, axis: usize },
    /// `δ_x`.
    VertexScalarDelta { vertex: usize },
    /// Monomial `p` restricted to one top cell.
    CellPoly { cell: usize, p: usize },
    /// Auxiliary face distribution `v̂¹_f[p]` (3D).
    AuxFaceDist { face: usize, p: usize },
    /// Auxiliary edge distribution: `v̂¹_e[p]` in 2D, `v̂²_e[p]` in 3D.
    AuxEdgeDist { edge: usize, p: usize },
    /// Auxiliary vertex distribution: `v̂²_x[p]` in 2D, `v̂³_x[p]` in 3D.
    AuxVertexDist { vertex: usize, p: usize },
    /// Rotated Regge function dual to `∫_e n_e·σ·n_e`.
    ReggeNN { edge: usize },
    /// TDNNS function dual to `∫_f n_f·σ·n_f`.
    TDNNSFace { face: usize },
    /// TDNNS function dual to the bubble moment `∫_K σ : b_slot`.
    TDNNSBubble { cell: usize, slot: usize },
    /// `U¹` function dual to `∫_e n_{e,slot}·σ·t_e`.
    MCSEdge { edge: usize, slot: usize },
    /// `U¹` function dual to `∫_K curl σ : b_slot`.
    MCSBubble { cell: usize, slot: usize },
}

impl BasisAtom {
    /// True for atoms that are functions (integrated against test fields).
    pub fn is_function(&self) -> bool {
        use BasisAtom::*;
        matches!(
            self,
            LagrangeHat { .. }
                | VecLagrangeHat { .. }
                | CellPoly { .. }
                | ReggeNN { .. }
                | TDNNSFace { .. }
                | TDNNSBubble { .. }
                | MCSEdge { .. }
                | MCSBubble { .. }
        )
    }

    /// True for the interior (bubble) slots of the 3D divdiv spaces.
    pub fn is_bubble(&self) -> bool {
        matches!(self, BasisAtom::TDNNSBubble { .. } | BasisAtom::MCSBubble { .. })
    }

    /// Dimension and index of the simplex carrying the atom.
    pub fn simplex(&self, dim: usize) -> (usize, usize) {
        use BasisAtom::*;
        match *self {
            LagrangeHat { vertex } | VecLagrangeHat { vertex, .. } => (0, vertex),
            VertexVecDelta { vertex, .. } | VertexScalarDelta { vertex } | AuxVertexDist { vertex, .. } => (0, vertex),
            EdgeNTDelta { edge, .. } | EdgeNNDelta { edge } | AuxEdgeDist { edge, .. } => (1, edge),
            ReggeNN { edge } | MCSEdge { edge, .. } => (1, edge),
            FaceNNDelta { face } | AuxFaceDist { face, .. } | TDNNSFace { face } => (dim - 1, face),
            CellPoly { cell, .. } | TDNNSBubble { cell, .. } | MCSBubble { cell, .. } => (dim, cell),
        }
    }
}

/// Identifies one discrete space: family, spatial dimension, degree and
/// boundary-condition flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceId {
    pub family: Family,
    pub dim: usize,
    pub degree: usize,
    pub bc: bool,
}

impl SpaceId {
    pub fn new(family: Family, dim: usize, degree: usize, bc: bool) -> Self {
        Self { family, dim, degree, bc }
    }
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.family {
            Family::Hessian => "V",
            Family::Aux => "V-",
            Family::Divdiv => "U",
            Family::TrimmedDivdiv => "U^",
        };
        write!(f, "{letter}{}{}({}D)", self.degree, if self.bc { "_0" } else { "" }, self.dim)
    }
}

/// Ordered basis of a discrete space.
#[derive(Clone, Debug)]
pub struct SpaceBasis {
    pub id: SpaceId,
    pub atoms: Vec<BasisAtom>,
    index: HashMap<BasisAtom, usize>,
}

impl SpaceBasis {
    pub fn new(id: SpaceId, atoms: Vec<BasisAtom>) -> Self {
        let index = atoms.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        Self { id, atoms, index }
    }

    pub fn dim(&self) -> usize {
        self.atoms.len()
    }

    /// Position of an atom, or `None` if the space does not contain it.
    pub fn position(&self, atom: &BasisAtom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    /// The subspace spanned by the atoms satisfying `keep`, in the same order.
    pub fn filtered(&self, id: SpaceId, keep: impl Fn(&BasisAtom) -> bool) -> SpaceBasis {
        SpaceBasis::new(id, self.atoms.iter().copied().filter(|a| keep(a)).collect())
    }
}

fn select(mesh: &SimplicialComplex, k: usize, interior_only: bool) -> Vec<usize> {
    if interior_only {
        mesh.interior(k)
    } else {
        (0..mesh.num(k)).collect()
    }
}

/// Enumerates the basis of a space on a mesh.
///
/// Plain distribution spaces live on interior simplices and BC variants on
/// all simplices; function spaces are the other way round.
pub fn build_space(id: SpaceId, mesh: &SimplicialComplex) -> Result<SpaceBasis> {
    use BasisAtom::*;
    let n = mesh.dim();
    if id.dim != n {
        return Err(Error::Dimension(format!("space {id} needs a {}D mesh, got {n}D", id.dim)));
    }
    if id.degree > n {
        return Err(Error::Dimension(format!("degree {} exceeds dimension {n}", id.degree)));
    }
    if id.family == Family::TrimmedDivdiv && n != 3 {
        return Err(Error::Dimension("trimmed spaces exist only in 3D".into()));
    }
    let bc = id.bc;
    let mut atoms = Vec::new();
    match id.family {
        Family::Hessian => match (n, id.degree) {
            (_, 0) => atoms.extend(select(mesh, 0, bc).into_iter().map(|vertex| LagrangeHat { vertex })),
            (2, 1) => atoms.extend(select(mesh, 1, !bc).into_iter().map(|edge| EdgeNNDelta { edge })),
            (3, 1) => atoms.extend(select(mesh, 2, !bc).into_iter().map(|face| FaceNNDelta { face })),
            (3, 2) => {
                for edge in select(mesh, 1, !bc) {
                    atoms.extend((0..2).map(|slot| EdgeNTDelta { edge, slot }));
                }
            }
            _ => {
                for vertex in select(mesh, 0, !bc) {
                    atoms.extend((0..n).map(|axis| VertexVecDelta { vertex, axis }));
                }
            }
        },
        Family::Aux => {
            if id.degree == 0 {
                for cell in 0..mesh.num(n) {
                    atoms.extend((0..=n).map(|p| CellPoly { cell, p }));
                }
            } else {
                let k = n - id.degree;
                for s in select(mesh, k, !bc) {
                    atoms.extend((0..=n).map(|p| match k {
                        0 => AuxVertexDist { vertex: s, p },
                        1 => AuxEdgeDist { edge: s, p },
                        _ => AuxFaceDist { face: s, p },
                    }));
                }
            }
        }
        Family::Divdiv | Family::TrimmedDivdiv => {
            let trimmed = id.family == Family::TrimmedDivdiv;
            match (n, id.degree) {
                (_, 0) => {
                    for vertex in select(mesh, 0, bc) {
                        atoms.extend((0..n).map(|axis| VecLagrangeHat { vertex, axis }));
                    }
                }
                (2, 1) => atoms.extend(select(mesh, 1, bc).into_iter().map(|edge| ReggeNN { edge })),
                (3, 1) => {
                    for edge in select(mesh, 1, bc) {
                        atoms.extend((0..2).map(|slot| MCSEdge { edge, slot }));
                    }
                    if !trimmed {
                        for cell in 0..mesh.num(3) {
                            atoms.extend((0..2).map(|slot| MCSBubble { cell, slot }));
                        }
                    }
                }
                (3, 2) => {
                    atoms.extend(select(mesh, 2, bc).into_iter().map(|face| TDNNSFace { face }));
                    if !trimmed {
                        for cell in 0..mesh.num(3) {
                            atoms.extend((0..2).map(|slot| TDNNSBubble { cell, slot }));
                        }
                    }
                }
                _ => atoms.extend(select(mesh, 0, !bc).into_iter().map(|vertex| VertexScalarDelta { vertex })),
            }
        }
    }
    Ok(SpaceBasis::new(id, atoms))
}

/// A scalar, vector or matrix field, by default polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Field<P = Poly> {
    Scalar(P),
    Vector(Vec<P>),
    Matrix(Vec<Vec<P>>),
}

impl<P> Field<P> {
    /// Applies `f` to every component.
    pub fn map<Q>(&self, f: impl Fn(&P) -> Q) -> Field<Q> {
        match self {
            Field::Scalar(p) => Field::Scalar(f(p)),
            Field::Vector(v) => Field::Vector(v.iter().map(&f).collect()),
            Field::Matrix(m) => Field::Matrix(m.iter().map(|r| r.iter().map(&f).collect()).collect()),
        }
    }

    /// Components in row-major order.
    pub fn components(&self) -> Vec<&P> {
        match self {
            Field::Scalar(p) => vec![p],
            Field::Vector(v) => v.iter().collect(),
            Field::Matrix(m) => m.iter().flatten().collect(),
        }
    }
}

type ConstMatrix = Vec<Vec<Rational>>;

fn sym_basis(n: usize) -> Vec<ConstMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        let mut m = vec![vec![q(0); n]; n];
        m[i][i] = q(1);
        out.push(m);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut m = vec![vec![q(0); n]; n];
            m[i][j] = q(1);
            m[j][i] = q(1);
            out.push(m);
        }
    }
    out
}

fn combine(coeffs: &[Rational], mats: &[ConstMatrix]) -> ConstMatrix {
    let n = mats[0].len();
    let mut out = vec![vec![q(0); n]; n];
    for (c, m) in coeffs.iter().zip(mats) {
        if c.is_zero() {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[i][j] += c * &m[i][j];
            }
        }
    }
    out
}

fn frobenius(a: &ConstMatrix, b: &ConstMatrix) -> Rational {
    a.iter().zip(b).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| x * y)).fold(q(0), |acc, v| acc + v)
}

fn check_nondegenerate(pts: &[&Point]) -> Result<()> {
    if geometry::simplex_det(pts).is_zero() {
        return Err(Error::Degenerate("simplex has zero volume".into()));
    }
    Ok(())
}

/// Local edges of a tetrahedron as pairs of local vertex positions, lexicographic.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Local face `j` of a simplex: its vertices with position `j` removed.
fn local_face<'a>(pts: &[&'a Point], j: usize) -> Vec<&'a Point> {
    pts.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, p)| *p).collect()
}

/// Rotated Regge dual basis on a triangle: `S_j` with `n_i·S_j·n_i = δ_ij`,
/// where edge `i` is the one opposite local vertex `i`.
pub fn regge_dual_basis(pts: &[&Point]) -> Result<Vec<ConstMatrix>> {
    check_nondegenerate(pts)?;
    let basis = sym_basis(2);
    let rows: Vec<Vec<Rational>> = (0..3)
        .map(|j| {
            let n = geometry::facet_normal_of(&local_face(pts, j));
            basis.iter().map(|b| poly_free_bilinear(&n, b, &n)).collect()
        })
        .collect();
    let inv = dense::inverse(&rows).ok_or_else(|| Error::Degenerate("Regge dof matrix is singular".into()))?;
    Ok((0..3).map(|d| combine(&(0..3).map(|c| inv[c][d].clone()).collect::<Vec<_>>(), &basis)).collect())
}

fn poly_free_bilinear(u: &[Rational], m: &ConstMatrix, v: &[Rational]) -> Rational {
    let mut acc = q(0);
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            acc += ui * &m[i][j] * vj;
        }
    }
    acc
}

/// Basis of the normal-normal bubble `𝔹_K = {σ ∈ 𝕊 : n_f·σ·n_f = 0 on all faces}`.
pub fn tdnns_bubble_basis(pts: &[&Point]) -> Result<Vec<ConstMatrix>> {
    check_nondegenerate(pts)?;
    let basis = sym_basis(3);
    let rows: Vec<Vec<Rational>> = (0..4)
        .map(|j| {
            let n = geometry::facet_normal_of(&local_face(pts, j));
            basis.iter().map(|b| poly_free_bilinear(&n, b, &n)).collect()
        })
        .collect();
    let kernel = dense::nullspace(&rows, 6);
    if kernel.len() != 2 {
        return Err(Error::Degenerate(format!("normal-normal bubble has dimension {}", kernel.len())));
    }
    Ok(kernel.iter().map(|k| combine(k, &basis)).collect())
}

/// TDNNS dual basis on a tetrahedron: four face functions (in local face
/// order) followed by the two bubble functions.
pub fn tdnns_dual_basis(pts: &[&Point]) -> Result<Vec<ConstMatrix>> {
    let bubbles = tdnns_bubble_basis(pts)?;
    let basis = sym_basis(3);
    let vol = geometry::simplex_volume(pts);
    let half = qf(1, 2);
    let mut rows: Vec<Vec<Rational>> = (0..4)
        .map(|j| {
            let n = geometry::facet_normal_of(&local_face(pts, j));
            basis.iter().map(|b| &half * poly_free_bilinear(&n, b, &n)).collect()
        })
        .collect();
    for b in &bubbles {
        rows.push(basis.iter().map(|s| &vol * frobenius(s, b)).collect());
    }
    let inv = dense::inverse(&rows).ok_or_else(|| Error::Degenerate("TDNNS dof matrix is singular".into()))?;
    Ok((0..6).map(|d| combine(&(0..6).map(|c| inv[c][d].clone()).collect::<Vec<_>>(), &basis)).collect())
}

/// The 14 local shape fields of `U¹`: eight constant traceless matrices,
/// then `(x − x₀) × σ_b` row-wise for the six symmetric basis matrices.
pub fn u1_local_shape_basis(pts: &[&Point]) -> Result<Vec<MatField>> {
    check_nondegenerate(pts)?;
    let mut out = Vec::with_capacity(14);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let mut m = vec![vec![q(0); 3]; 3];
                m[i][j] = q(1);
                out.push(poly::const_matrix(&m));
            }
        }
    }
    for i in 0..2 {
        let mut m = vec![vec![q(0); 3]; 3];
        m[i][i] = q(1);
        m[i + 1][i + 1] = q(-1);
        out.push(poly::const_matrix(&m));
    }
    let x: VecField = (0..3).map(|i| &Poly::var(i) - &Poly::constant(pts[0][i].clone())).collect();
    for s in sym_basis(3) {
        out.push(s.iter().map(|row| cross_field(&x, row)).collect());
    }
    Ok(out)
}

fn cross_field(x: &[Poly], a: &[Rational]) -> VecField {
    vec![
        &x[1].scale(&a[2]) - &x[2].scale(&a[1]),
        &x[2].scale(&a[0]) - &x[0].scale(&a[2]),
        &x[0].scale(&a[1]) - &x[1].scale(&a[0]),
    ]
}

/// Degrees of freedom of `U¹` applied to a local field: twelve edge moments
/// `∫_e n_{e,±}·σ·t_e` (edges in `TET_EDGES` order, `+` before `−`), then the
/// two bubble moments `∫_K curl σ : b`.
pub fn u1_dofs(pts: &[&Point], bubbles: &[ConstMatrix], field: &MatField) -> Vec<Rational> {
    let mut out = Vec::with_capacity(14);
    for &(a, b) in &TET_EDGES {
        let t = geometry::sub(pts[b], pts[a]);
        let mid: Point = pts[a].iter().zip(pts[b]).map(|(x, y)| (x + y) * qf(1, 2)).collect();
        let value = poly::eval_matrix(field, &mid);
        for n in geometry::normal_pair(&t) {
            out.push(poly_free_bilinear(&n, &value, &t));
        }
    }
    let vol = geometry::simplex_volume(pts);
    let curl = poly::eval_matrix(&poly::curl_rows(field), pts[0]);
    for b in bubbles {
        out.push(&vol * frobenius(&curl, b));
    }
    out
}

/// The 14×14 matrix of `U¹` degrees of freedom (rows) against the local
/// shape basis (columns).
pub fn u1_dof_matrix(pts: &[&Point]) -> Result<ExactMatrix> {
    let shapes = u1_local_shape_basis(pts)?;
    let bubbles = tdnns_bubble_basis(pts)?;
    let cols: Vec<Vec<Rational>> = shapes.iter().map(|s| u1_dofs(pts, &bubbles, s)).collect();
    let rows: Vec<Vec<Rational>> = (0..14).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
    ExactMatrix::from_dense(14, &rows)
}

/// `U¹` dual basis fields on a tetrahedron, in the degree-of-freedom order of `u1_dofs`.
pub fn u1_dual_basis(pts: &[&Point]) -> Result<Vec<MatField>> {
    let shapes = u1_local_shape_basis(pts)?;
    let dofs = u1_dof_matrix(pts)?.to_dense();
    let inv = dense::inverse(&dofs).ok_or_else(|| Error::Degenerate("U1 dof matrix is singular".into()))?;
    Ok((0..14)
        .map(|d| {
            let mut acc: MatField = vec![vec![Poly::zero(); 3]; 3];
            for (c, s) in shapes.iter().enumerate() {
                if inv[c][d].is_zero() {
                    continue;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        acc[i][j] = &acc[i][j] + &s[i][j].scale(&inv[c][d]);
                    }
                }
            }
            acc
        })
        .collect())
}

/// Coordinates of a constant traceless matrix in the first eight shape fields.
fn traceless_coords(m: &ConstMatrix) -> Vec<Rational> {
    let mut out = Vec::with_capacity(14);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                out.push(m[i][j].clone());
            }
        }
    }
    out.push(m[0][0].clone());
    out.push(-m[2][2].clone());
    out.resize(14, q(0));
    out
}

/// Ranks of `dev grad : P1 ⊗ ℝ³ → U¹(K)` and `sym curl : U¹(K) → 𝕊` on one tetrahedron.
pub fn local_sequence_ranks(pts: &[&Point]) -> Result<(usize, usize)> {
    let shapes = u1_local_shape_basis(pts)?;
    let grads = geometry::barycentric_gradients_of(pts).ok_or_else(|| Error::Degenerate("singular cell".into()))?;
    // dev grad of λ_a e_i in shape coordinates.
    let mut devgrad_cols = Vec::with_capacity(12);
    for g in &grads {
        for i in 0..3 {
            let mut m = vec![vec![q(0); 3]; 3];
            m[i] = g.clone();
            let tr = m[0][0].clone() + &m[1][1] + &m[2][2];
            for (d, row) in m.iter_mut().enumerate() {
                row[d] -= &tr * qf(1, 3);
            }
            devgrad_cols.push(traceless_coords(&m));
        }
    }
    let devgrad = transpose_dense(&devgrad_cols, 14);
    let sym = sym_basis(3);
    let symcurl_cols: Vec<Vec<Rational>> = shapes
        .iter()
        .map(|s| {
            let c = poly::eval_matrix(&poly::sym(&poly::curl_rows(s)), pts[0]);
            sym_coords(&c, &sym)
        })
        .collect();
    let symcurl = transpose_dense(&symcurl_cols, 6);
    let a = ExactMatrix::from_dense(12, &devgrad)?;
    let b = ExactMatrix::from_dense(14, &symcurl)?;
    if !b.compose(&a)?.is_zero() {
        return Err(Error::Assembly("local sym curl ∘ dev grad is nonzero".into()));
    }
    Ok((a.rank(), b.rank()))
}

fn sym_coords(m: &ConstMatrix, _basis: &[ConstMatrix]) -> Vec<Rational> {
    let n = m.len();
    let mut out: Vec<Rational> = (0..n).map(|i| m[i][i].clone()).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push(m[i][j].clone());
        }
    }
    out
}

fn transpose_dense(cols: &[Vec<Rational>], rows: usize) -> Vec<Vec<Rational>> {
    (0..rows).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect()
}

/// Per-cell data of the local elements of one mesh.
#[derive(Clone, Debug)]
pub struct LocalElements {
    dim: usize,
    grads: Vec<Vec<Point>>,
    regge: Vec<Vec<ConstMatrix>>,
    tdnns: Vec<Vec<ConstMatrix>>,
    bubbles: Vec<Vec<ConstMatrix>>,
    mcs: Vec<Vec<MatField>>,
    cell_edges: Vec<Vec<usize>>,
}

impl LocalElements {
    pub fn new(mesh: &SimplicialComplex) -> Result<Self> {
        let n = mesh.dim();
        let cells = mesh.num(n);
        let mut me = Self {
            dim: n,
            grads: Vec::with_capacity(cells),
            regge: Vec::new(),
            tdnns: Vec::new(),
            bubbles: Vec::new(),
            mcs: Vec::new(),
            cell_edges: Vec::new(),
        };
        for k in 0..cells {
            let pts = mesh.points(n, k);
            me.grads.push(geometry::barycentric_gradients(mesh, k)?);
            if n == 2 {
                me.regge.push(regge_dual_basis(&pts)?);
            } else {
                me.bubbles.push(tdnns_bubble_basis(&pts)?);
                me.tdnns.push(tdnns_dual_basis(&pts)?);
                me.mcs.push(u1_dual_basis(&pts)?);
                let cell = mesh.simplex(3, k);
                me.cell_edges.push(
                    TET_EDGES.iter().map(|&(a, b)| mesh.find(&[cell[a], cell[b]]).expect("edge of cell")).collect(),
                );
            }
        }
        Ok(me)
    }

    /// Barycentric gradients of a cell.
    pub fn grads(&self, cell: usize) -> &[Point] {
        &self.grads[cell]
    }

    /// Normal-normal bubble basis of a 3D cell.
    pub fn bubbles(&self, cell: usize) -> &[ConstMatrix] {
        &self.bubbles[cell]
    }

    /// Local edges of a 3D cell in `TET_EDGES` order.
    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    /// Hat function of vertex `v` on a cell containing it.
    pub fn hat(&self, mesh: &SimplicialComplex, v: usize, cell: usize) -> Poly {
        let verts = mesh.simplex(self.dim, cell);
        let a = verts.iter().position(|&w| w == v).expect("vertex of cell");
        let other = verts[if a == 0 { 1 } else { 0 }];
        let g = &self.grads[cell][a];
        Poly::affine(g, -geometry::dot(g, mesh.vertex(other)))
    }

    /// Cells on which a function atom is supported; empty for distributions.
    pub fn support(&self, mesh: &SimplicialComplex, atom: &BasisAtom) -> Vec<usize> {
        use BasisAtom::*;
        match *atom {
            LagrangeHat { vertex } | VecLagrangeHat { vertex, .. } => mesh.cells_containing(0, vertex),
            ReggeNN { edge } | MCSEdge { edge, .. } => mesh.cells_containing(1, edge),
            TDNNSFace { face } => mesh.cells_containing(self.dim - 1, face),
            CellPoly { cell, .. } | TDNNSBubble { cell, .. } | MCSBubble { cell, .. } => vec![cell],
            _ => Vec::new(),
        }
    }

    /// The polynomial field of a function atom on one cell of its support.
    pub fn local_field(&self, mesh: &SimplicialComplex, atom: &BasisAtom, cell: usize) -> Option<Field> {
        use BasisAtom::*;
        let n = self.dim;
        let verts = mesh.simplex(n, cell);
        Some(match *atom {
            LagrangeHat { vertex } => {
                verts.contains(&vertex).then_some(())?;
                Field::Scalar(self.hat(mesh, vertex, cell))
            }
            VecLagrangeHat { vertex, axis } => {
                verts.contains(&vertex).then_some(())?;
                let h = self.hat(mesh, vertex, cell);
                Field::Vector((0..n).map(|i| if i == axis { h.clone() } else { Poly::zero() }).collect())
            }
            CellPoly { cell: c, p } => {
                (c == cell).then_some(())?;
                Field::Scalar(monomial_p(p))
            }
            ReggeNN { edge } => {
                let j = mesh.faces(2, cell).iter().position(|&e| e == edge)?;
                Field::Matrix(poly::const_matrix(&self.regge[cell][j]))
            }
            TDNNSFace { face } => {
                let j = mesh.faces(3, cell).iter().position(|&f| f == face)?;
                Field::Matrix(poly::const_matrix(&self.tdnns[cell][j]))
            }
            TDNNSBubble { cell: c, slot } => {
                (c == cell).then_some(())?;
                Field::Matrix(poly::const_matrix(&self.tdnns[cell][4 + slot]))
            }
            MCSEdge { edge, slot } => {
                let j = self.cell_edges[cell].iter().position(|&e| e == edge)?;
                Field::Matrix(self.mcs[cell][2 * j + slot].clone())
            }
            MCSBubble { cell: c, slot } => {
                (c == cell).then_some(())?;
                Field::Matrix(self.mcs[cell][12 + slot].clone())
            }
            _ => return None,
        })
    }
}

/// The coefficient monomial with index `p`: `1` for `p = 0`, else `x_{p−1}`.
pub fn monomial_p(p: usize) -> Poly {
    if p == 0 {
        Poly::constant(Rational::one())
    } else {
        Poly::var(p - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, GeneratorKind};

    fn reference_tet() -> Vec<Point> {
        vec![vec![q(0), q(0), q(0)], vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]
    }

    #[test]
    fn u1_dof_matrix_reference_tet_is_invertible() {
        let pts = reference_tet();
        let refs: Vec<&Point> = pts.iter().collect();
        assert_eq!(u1_dof_matrix(&refs).unwrap().rank(), 14);
        assert_eq!(local_sequence_ranks(&refs).unwrap(), (8, 6));
    }

    #[test]
    fn bubble_basis_kills_face_normals() {
        let pts = reference_tet();
        let refs: Vec<&Point> = pts.iter().collect();
        let b = tdnns_bubble_basis(&refs).unwrap();
        assert_eq!(b.len(), 2);
        for j in 0..4 {
            let n = geometry::facet_normal_of(&local_face(&refs, j));
            for m in &b {
                assert!(poly_free_bilinear(&n, m, &n).is_zero());
            }
        }
    }

    #[test]
    fn shape_fields_are_traceless() {
        let pts = reference_tet();
        let refs: Vec<&Point> = pts.iter().collect();
        for s in u1_local_shape_basis(&refs).unwrap() {
            assert!(poly::trace(&s).is_zero());
        }
    }

    #[test]
    fn degenerate_tet_is_rejected() {
        let pts = [vec![q(0), q(0), q(0)], vec![q(1), q(0), q(0)], vec![q(2), q(0), q(0)], vec![q(0), q(0), q(1)]];
        let refs: Vec<&Point> = pts.iter().collect();
        assert!(matches!(u1_dof_matrix(&refs), Err(Error::Degenerate(_))));
    }

    #[test]
    fn space_dimensions_3d() {
        let m = generate_mesh(GeneratorKind::Cube, 1).unwrap();
        let c = m.counts();
        let dim = |f, k, bc| build_space(SpaceId::new(f, 3, k, bc), &m).unwrap().dim();
        assert_eq!(dim(Family::Hessian, 1, false), c.interior[2]);
        assert_eq!(dim(Family::Hessian, 2, false), 2 * c.interior[1]);
        assert_eq!(dim(Family::Divdiv, 2, false), c.total[2] + 2 * c.total[3]);
        assert_eq!(dim(Family::Aux, 1, false), 4 * c.interior[2]);
    }
}
