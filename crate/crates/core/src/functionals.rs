//! Action of basis atoms on polynomial test fields.
//!
//! Distribution atoms are evaluated by exact integration over their carrier
//! simplex in the parametric measure; function atoms are integrated against
//! the test field cell by cell in Lebesgue measure.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::geometry::{self, Point};
use crate::linalg::{qf, Rational};
use crate::mesh::SimplicialComplex;
use crate::poly::{self, Exponent, MomentCache, Poly};
use crate::spaces::{monomial_p, BasisAtom, Field, LocalElements};
use crate::weighted::{Cutoff, Weighted};
use crate::{Error, Result};

/// Exact integration over the simplices of one mesh with cached moments.
#[derive(Debug)]
pub struct Integrator<'m> {
    mesh: &'m SimplicialComplex,
    cache: MomentCache,
}

impl<'m> Integrator<'m> {
    pub fn new(mesh: &'m SimplicialComplex) -> Self {
        Self { mesh, cache: MomentCache::new() }
    }

    pub fn mesh(&self) -> &'m SimplicialComplex {
        self.mesh
    }

    /// `∫_σ p` over simplex `i` of dimension `k`, parametric measure.
    pub fn simplex(&mut self, k: usize, i: usize, p: &Poly) -> Rational {
        let verts = self.mesh.simplex(k, i);
        let pts: Vec<&Point> = verts.iter().map(|&v| self.mesh.vertex(v)).collect();
        self.cache.integrate(verts, &pts, p)
    }

    /// `∫_σ p·x^shift` over simplex `i` of dimension `k`, parametric measure.
    pub fn simplex_shifted(&mut self, k: usize, i: usize, p: &Poly, shift: Exponent) -> Rational {
        let verts = self.mesh.simplex(k, i);
        let pts: Vec<&Point> = verts.iter().map(|&v| self.mesh.vertex(v)).collect();
        self.cache.integrate_shifted(verts, &pts, p, shift)
    }

    /// `∫_K p` over a top cell in Lebesgue measure.
    pub fn cell(&mut self, cell: usize, p: &Poly) -> Rational {
        self.cell_shifted(cell, p, [0; 3])
    }

    /// `∫_K p·x^shift` over a top cell in Lebesgue measure.
    pub fn cell_shifted(&mut self, cell: usize, p: &Poly, shift: Exponent) -> Rational {
        let n = self.mesh.dim();
        let det = geometry::simplex_det(&self.mesh.points(n, cell)).abs();
        let verts = self.mesh.simplex(n, cell);
        let pts: Vec<&Point> = verts.iter().map(|&v| self.mesh.vertex(v)).collect();
        self.cache.integrate_shifted(verts, &pts, p, shift) * det
    }
}

fn mismatch(atom: &BasisAtom) -> Error {
    Error::Invalid(format!("test field has the wrong shape for {atom:?}"))
}

/// Pointwise pairing of two fields of the same shape.
pub fn field_product(a: &Field, b: &Field) -> Option<Poly> {
    match (a, b) {
        (Field::Scalar(x), Field::Scalar(y)) => Some(x * y),
        (Field::Vector(x), Field::Vector(y)) => Some(poly::dot_fields(x, y)),
        (Field::Matrix(x), Field::Matrix(y)) => Some(poly::contract(x, y)),
        _ => None,
    }
}

/// Gradient of the coefficient monomial `p` as a constant vector.
fn grad_p(p: usize, n: usize) -> Vec<Rational> {
    (0..n).map(|i| if p == i + 1 { qf(1, 1) } else { qf(0, 1) }).collect()
}

/// `⟨atom, test⟩` for a distribution atom against a global polynomial field.
pub fn apply_distribution(integ: &mut Integrator<'_>, atom: &BasisAtom, test: &Field) -> Result<Rational> {
    use BasisAtom::*;
    let mesh = integ.mesh();
    let n = mesh.dim();
    Ok(match (*atom, test) {
        (VertexVecDelta { vertex, axis }, Field::Vector(w)) => w[axis].eval(mesh.vertex(vertex)),
        (VertexScalarDelta { vertex }, Field::Scalar(v)) => v.eval(mesh.vertex(vertex)),
        (EdgeNNDelta { edge }, Field::Matrix(s)) => {
            let nn = geometry::facet_normal(mesh, edge);
            integ.simplex(1, edge, &poly::bilinear(&nn, s, &nn))
        }
        (FaceNNDelta { face }, Field::Matrix(s)) => {
            let nn = geometry::facet_normal(mesh, face);
            integ.simplex(2, face, &poly::bilinear(&nn, s, &nn))
        }
        (EdgeNTDelta { edge, slot }, Field::Matrix(w)) => {
            let t = geometry::tangent(mesh, edge);
            let m = &geometry::edge_normals(mesh, edge)[slot];
            integ.simplex(1, edge, &poly::bilinear(m, w, &t))
        }
        (AuxFaceDist { face: f, p }, Field::Matrix(phi)) | (AuxEdgeDist { edge: f, p }, Field::Matrix(phi))
            if matches!(atom, AuxFaceDist { .. }) || n == 2 =>
        {
            let nn = geometry::facet_normal(mesh, f);
            let s = poly::sym(phi);
            let pp = monomial_p(p);
            let integrand =
                &(&poly::dot_const(&nn, &poly::div_cols(&s)) * &pp) - &poly::bilinear(&grad_p(p, n), &s, &nn);
            integ.simplex(n - 1, f, &integrand)
        }
        (AuxEdgeDist { edge, p }, Field::Matrix(w)) => {
            let t = geometry::tangent(mesh, edge);
            let d = poly::dev(w);
            let pp = monomial_p(p);
            let integrand = &(&poly::dot_const(&t, &poly::div_cols(&d)) * &pp).scale(&qf(1, 2))
                - &poly::bilinear(&grad_p(p, n), &d, &t);
            integ.simplex(1, edge, &integrand)
        }
        (AuxVertexDist { vertex, p }, Field::Vector(w)) => {
            let x = mesh.vertex(vertex);
            let gp = grad_p(p, n);
            let first = poly::dot_const(&gp, w).eval(x);
            let second = poly::div(w).eval(x) * monomial_p(p).eval(x) * qf(1, n as i64);
            first - second
        }
        _ => return Err(mismatch(atom)),
    })
}

/// `⟨atom, test⟩` for any atom against a global polynomial test field.
pub fn apply(integ: &mut Integrator<'_>, local: &LocalElements, atom: &BasisAtom, test: &Field) -> Result<Rational> {
    if !atom.is_function() {
        return apply_distribution(integ, atom, test);
    }
    let mesh = integ.mesh();
    let mut acc = qf(0, 1);
    for cell in local.support(mesh, atom) {
        let field = local.local_field(mesh, atom, cell).expect("cell in support");
        let prod = field_product(&field, test).ok_or_else(|| mismatch(atom))?;
        acc += integ.cell(cell, &prod);
    }
    Ok(acc)
}

fn same_shape<P, Q>(a: &Field<P>, b: &Field<Q>) -> bool {
    matches!(
        (a, b),
        (Field::Scalar(_), Field::Scalar(_))
            | (Field::Vector(_), Field::Vector(_))
            | (Field::Matrix(_), Field::Matrix(_))
    )
}

/// Fields derived from a test field, each flattened to its components.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
enum Part {
    Base,
    Sym,
    DivSym,
    Dev,
    DivDev,
    Div,
}

/// Exponent of the coefficient monomial `p`.
fn shift_p(p: usize) -> Exponent {
    let mut e = [0; 3];
    if p > 0 {
        e[p - 1] = 1;
    }
    e
}

/// A test field `c·φ` with cached derived fields and simplex integrals of
/// their components against monomials, so that each atom reduces to a
/// short linear combination of cached values.
#[derive(Debug)]
pub struct TestField<'f> {
    field: &'f Field<Weighted>,
    cutoff: &'f Cutoff,
    parts: HashMap<Part, Vec<Weighted>>,
    integrals: HashMap<(Part, usize, usize, usize, Exponent), Rational>,
}

impl<'f> TestField<'f> {
    pub fn new(field: &'f Field<Weighted>, cutoff: &'f Cutoff) -> Self {
        Self { field, cutoff, parts: HashMap::new(), integrals: HashMap::new() }
    }

    fn matrix(&self) -> &'f [Vec<Weighted>] {
        match self.field {
            Field::Matrix(m) => m,
            _ => unreachable!("matrix test field"),
        }
    }

    fn ensure(&mut self, part: Part) {
        if self.parts.contains_key(&part) {
            return;
        }
        let flat = |m: Vec<Vec<Weighted>>| m.into_iter().flatten().collect::<Vec<_>>();
        let value = match part {
            Part::Base => self.field.components().into_iter().cloned().collect(),
            Part::Sym => flat(poly::sym(self.matrix())),
            Part::Dev => flat(poly::dev(self.matrix())),
            Part::DivSym => poly::div_cols(&poly::sym(self.matrix())),
            Part::DivDev => poly::div_cols(&poly::dev(self.matrix())),
            Part::Div => match self.field {
                Field::Vector(w) => vec![poly::div(w)],
                _ => unreachable!("divergence of a vector field"),
            },
        };
        self.parts.insert(part, value);
    }

    /// `∫_σ c·x^e` for component `c` of a derived field over simplex `i`
    /// of dimension `k`, parametric measure.
    fn integral(
        &mut self,
        integ: &mut Integrator<'_>,
        part: Part,
        c: usize,
        k: usize,
        i: usize,
        e: Exponent,
    ) -> Rational {
        if let Some(v) = self.integrals.get(&(part, c, k, i, e)) {
            return v.clone();
        }
        self.ensure(part);
        let v = self.cutoff.integrate(integ, &self.parts[&part][c], k, i, e);
        self.integrals.insert((part, c, k, i, e), v.clone());
        v
    }

    fn value(&mut self, integ: &Integrator<'_>, part: Part, c: usize, vertex: usize) -> Rational {
        self.ensure(part);
        self.cutoff.eval(integ, &self.parts[&part][c], vertex)
    }

    /// `Σ_ij a_i b_j ∫_σ part_ij x^e`.
    #[allow(clippy::too_many_arguments)]
    fn bilinear(
        &mut self,
        integ: &mut Integrator<'_>,
        part: Part,
        a: &[Rational],
        b: &[Rational],
        k: usize,
        i: usize,
        e: Exponent,
    ) -> Rational {
        let n = a.len();
        let mut acc = qf(0, 1);
        for r in 0..n {
            for c in 0..n {
                if !a[r].is_zero() && !b[c].is_zero() {
                    acc += &a[r] * &b[c] * self.integral(integ, part, r * n + c, k, i, e);
                }
            }
        }
        acc
    }

    /// `Σ_i a_i ∫_σ part_i x^e`.
    fn linear(
        &mut self,
        integ: &mut Integrator<'_>,
        part: Part,
        a: &[Rational],
        k: usize,
        i: usize,
        e: Exponent,
    ) -> Rational {
        let mut acc = qf(0, 1);
        for (c, ac) in a.iter().enumerate() {
            if !ac.is_zero() {
                acc += ac * self.integral(integ, part, c, k, i, e);
            }
        }
        acc
    }

    /// `⟨atom, c·φ⟩`, equal to [`apply`] on the expanded field.
    pub fn apply(&mut self, integ: &mut Integrator<'_>, local: &LocalElements, atom: &BasisAtom) -> Result<Rational> {
        use BasisAtom::*;
        let mesh = integ.mesh();
        let n = mesh.dim();
        let z = [0; 3];
        let is_matrix = matches!(self.field, Field::Matrix(_));
        let is_vector = matches!(self.field, Field::Vector(_));
        Ok(match *atom {
            _ if atom.is_function() => {
                let mut acc = qf(0, 1);
                for cell in local.support(mesh, atom) {
                    let field = local.local_field(mesh, atom, cell).expect("cell in support");
                    if !same_shape(&field, self.field) {
                        return Err(mismatch(atom));
                    }
                    let mut cell_acc = qf(0, 1);
                    for (c, psi) in field.components().into_iter().enumerate() {
                        for (e, coef) in psi.terms() {
                            cell_acc += coef * self.integral(integ, Part::Base, c, n, cell, *e);
                        }
                    }
                    acc += cell_acc * geometry::simplex_det(&mesh.points(n, cell)).abs();
                }
                acc
            }
            VertexVecDelta { vertex, axis } if is_vector => self.value(integ, Part::Base, axis, vertex),
            VertexScalarDelta { vertex } if matches!(self.field, Field::Scalar(_)) => {
                self.value(integ, Part::Base, 0, vertex)
            }
            EdgeNNDelta { edge: f } | FaceNNDelta { face: f } if is_matrix => {
                let nn = geometry::facet_normal(mesh, f);
                let k = if matches!(atom, EdgeNNDelta { .. }) { 1 } else { 2 };
                self.bilinear(integ, Part::Base, &nn, &nn, k, f, z)
            }
            EdgeNTDelta { edge, slot } if is_matrix => {
                let t = geometry::tangent(mesh, edge);
                let m = &geometry::edge_normals(mesh, edge)[slot];
                self.bilinear(integ, Part::Base, m, &t, 1, edge, z)
            }
            AuxFaceDist { face: f, p } | AuxEdgeDist { edge: f, p }
                if is_matrix && (matches!(atom, AuxFaceDist { .. }) || n == 2) =>
            {
                let nn = geometry::facet_normal(mesh, f);
                self.linear(integ, Part::DivSym, &nn, n - 1, f, shift_p(p))
                    - self.bilinear(integ, Part::Sym, &grad_p(p, n), &nn, n - 1, f, z)
            }
            AuxEdgeDist { edge, p } if is_matrix => {
                let t = geometry::tangent(mesh, edge);
                self.linear(integ, Part::DivDev, &t, 1, edge, shift_p(p)) * qf(1, 2)
                    - self.bilinear(integ, Part::Dev, &grad_p(p, n), &t, 1, edge, z)
            }
            AuxVertexDist { vertex, p } if is_vector => {
                let x = mesh.vertex(vertex);
                let gp = grad_p(p, n);
                let mut first = qf(0, 1);
                for (i, g) in gp.iter().enumerate() {
                    if !g.is_zero() {
                        first += g * self.value(integ, Part::Base, i, vertex);
                    }
                }
                first - self.value(integ, Part::Div, 0, vertex) * monomial_p(p).eval(x) * qf(1, n as i64)
            }
            _ => return Err(mismatch(atom)),
        })
    }
}
