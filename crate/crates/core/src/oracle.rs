//! Independent adjointness oracle.
//!
//! Each assembled operator `D : X → Y` is tested against random polynomial
//! fields `φ` by comparing `Σ_i D_ij ⟨y_i, φ⟩` with `⟨x_j, D*φ⟩`, where
//! `D*` is the formal adjoint of the continuous operator and both sides are
//! integrated exactly. Operators whose target omits boundary rows are
//! tested against `φ` multiplied by a cutoff that vanishes to second order
//! on the nearby boundary facets.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::functionals::{field_product, Integrator, TestField};
use crate::geometry;
use crate::homology::{ComplexKind, Family};
use crate::linalg::{q, ExactMatrix, Rational};
use crate::mesh::SimplicialComplex;
use crate::operators::ComplexAssembly;
use crate::poly::{self, Linear, MatField, Poly, VecField};
use crate::spaces::{BasisAtom, Field, LocalElements};
use crate::weighted::{Cutoff, Weighted};
use crate::{Error, Result};

/// How an operator is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    /// Duality against the formal adjoint.
    Adjoint,
    /// Cellwise comparison of a conforming operator with its continuous counterpart.
    Cellwise,
    /// Duality against random continuous piecewise-linear test functions.
    LagrangeNodal,
}

/// Oracle parameters.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub trials: usize,
    pub seed: u64,
    /// Maximal total degree of the random test polynomials.
    pub degree: usize,
    /// Coefficients are drawn uniformly from `−range..=range`.
    pub range: i64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { trials: 20, seed: 0, degree: 3, range: 3 }
    }
}

/// Outcome of the oracle on one operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorOracle {
    pub operator: String,
    pub degree: usize,
    pub mode: OracleMode,
    pub trials: usize,
    pub columns: usize,
    /// Number of `(trial, column)` pairs where the two sides differ.
    pub mismatches: usize,
    pub pass: bool,
}

/// Test-field shape expected by the atoms of a target space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Scalar,
    Vector,
    Symmetric,
    Traceless,
    General,
}

struct Sampler {
    rng: ChaCha8Rng,
    degree: usize,
    range: i64,
    n: usize,
}

impl Sampler {
    fn poly(&mut self) -> Poly {
        let mut p = Poly::zero();
        for e in poly::exponents_up_to(self.n, self.degree) {
            let c = self.rng.random_range(-self.range..=self.range);
            if c != 0 {
                p = &p + &Poly::monomial(e, q(c));
            }
        }
        p
    }

    fn vector(&mut self) -> VecField {
        (0..self.n).map(|_| self.poly()).collect()
    }

    fn matrix(&mut self) -> MatField {
        (0..self.n).map(|_| self.vector()).collect()
    }

    fn field(&mut self, shape: Shape) -> Field {
        match shape {
            Shape::Scalar => Field::Scalar(self.poly()),
            Shape::Vector => Field::Vector(self.vector()),
            Shape::Symmetric => Field::Matrix(poly::sym(&self.matrix())),
            Shape::Traceless => Field::Matrix(poly::dev(&self.matrix())),
            Shape::General => Field::Matrix(self.matrix()),
        }
    }
}

fn expect_matrix(f: &Field) -> &MatField {
    match f {
        Field::Matrix(m) => m,
        _ => unreachable!("sampler produced the declared shape"),
    }
}

/// Mode, test shape and cutoff requirement of operator `k` of a complex.
fn plan(kind: ComplexKind, k: usize) -> Result<(OracleMode, Shape, bool)> {
    let n = kind.dim();
    let bc = kind.is_bc();
    Ok(match (kind.family(), n, k) {
        (Family::Hessian | Family::Aux, _, 0) => (OracleMode::Adjoint, Shape::Symmetric, !bc),
        (Family::Hessian | Family::Aux, 2, 1) | (Family::Hessian | Family::Aux, 3, 2) => {
            (OracleMode::Adjoint, Shape::Vector, !bc)
        }
        (Family::Hessian, 3, 1) => (OracleMode::Adjoint, Shape::General, !bc),
        (Family::Aux, 3, 1) => (OracleMode::Adjoint, Shape::Traceless, !bc),
        (Family::Divdiv, 2, 0) => (OracleMode::Adjoint, Shape::Symmetric, !bc),
        (Family::Divdiv, 2, 1) => (OracleMode::Adjoint, Shape::Scalar, !bc),
        (Family::Divdiv, 3, 0) => (OracleMode::Adjoint, Shape::General, !bc),
        (Family::Divdiv, 3, 1) => (OracleMode::Cellwise, Shape::Symmetric, false),
        (Family::Divdiv, 3, 2) => (OracleMode::LagrangeNodal, Shape::Scalar, false),
        _ => return Err(Error::Invalid(format!("the oracle does not cover operator {k} of {kind}"))),
    })
}

/// True when the oracle covers a complex; trimmed operators are restrictions
/// of the full ones and are checked against them instead.
pub fn covers(kind: ComplexKind) -> bool {
    kind.family() != Family::TrimmedDivdiv
}

fn neg_vec<P: Linear>(v: Vec<P>) -> Vec<P> {
    v.iter().map(Linear::negated).collect()
}

fn neg_mat<P: Linear>(m: Vec<Vec<P>>) -> Vec<Vec<P>> {
    m.into_iter().map(neg_vec).collect()
}

/// Formal adjoint of operator `k` applied to a test field.
fn adjoint<P: Linear>(kind: ComplexKind, k: usize, phi: &Field<P>) -> Field<P> {
    let n = kind.dim();
    let mat = || match phi {
        Field::Matrix(m) => m.as_slice(),
        _ => unreachable!("sampler produced the declared shape"),
    };
    let vec = || match phi {
        Field::Vector(v) => v.as_slice(),
        _ => unreachable!("sampler produced the declared shape"),
    };
    match (kind.family(), n, k) {
        (Family::Hessian | Family::Aux, _, 0) => Field::Scalar(poly::divdiv(mat())),
        (Family::Hessian | Family::Aux, 2, 1) => Field::Matrix(neg_mat(poly::curl_2d(vec()))),
        (Family::Hessian | Family::Aux, 3, 1) => Field::Matrix(poly::curl_rows(mat())),
        (Family::Hessian | Family::Aux, 3, 2) => Field::Matrix(neg_mat(poly::jacobian(vec()))),
        (Family::Divdiv, 2, 0) => Field::Vector(neg_vec(poly::rot_rows(mat()))),
        (Family::Divdiv, 2, 1) => match phi {
            Field::Scalar(p) => Field::Matrix(poly::hessian(p, 2)),
            _ => unreachable!("sampler produced the declared shape"),
        },
        (Family::Divdiv, 3, 0) => Field::Vector(neg_vec(poly::div_rows(&poly::dev(mat())))),
        _ => unreachable!("plan restricts adjoint mode"),
    }
}

/// Vertices of the closure of an atom's support.
fn support_vertices(mesh: &SimplicialComplex, local: &LocalElements, atom: &BasisAtom) -> BTreeSet<usize> {
    let n = mesh.dim();
    if atom.is_function() {
        local.support(mesh, atom).into_iter().flat_map(|c| mesh.simplex(n, c).to_vec()).collect()
    } else {
        let (k, s) = atom.simplex(n);
        mesh.simplex(k, s).iter().copied().collect()
    }
}

type Plane = (Vec<Rational>, Rational);

/// Distinct normalized boundary-facet planes that touch the closure of the
/// support.
fn cutoff_planes(mesh: &SimplicialComplex, verts: &BTreeSet<usize>) -> BTreeSet<Plane> {
    let n = mesh.dim();
    let mut planes = BTreeSet::new();
    for f in 0..mesh.num(n - 1) {
        if !mesh.is_boundary(n - 1, f) || !mesh.simplex(n - 1, f).iter().any(|v| verts.contains(v)) {
            continue;
        }
        let nf = geometry::facet_normal(mesh, f);
        let off = geometry::dot(&nf, mesh.vertex(mesh.simplex(n - 1, f)[0]));
        let lead = nf.iter().find(|c| **c != q(0)).cloned().expect("nonzero normal");
        planes.insert((nf.iter().map(|c| c / &lead).collect(), off / lead));
    }
    planes
}

/// Square of the product of the given planes.
fn cutoff(planes: &BTreeSet<Plane>) -> Poly {
    let mut out = Poly::constant(q(1));
    for (normal, off) in planes {
        let l = Poly::affine(normal, -off.clone());
        out = &out * &(&l * &l);
    }
    out
}

/// Runs the oracle on every operator of an assembled complex.
pub fn run_oracle(
    asm: &ComplexAssembly,
    mesh: &SimplicialComplex,
    local: &LocalElements,
    cfg: &OracleConfig,
) -> Result<Vec<OperatorOracle>> {
    if !covers(asm.kind) {
        return Ok(Vec::new());
    }
    let mut integ = Integrator::new(mesh);
    (0..asm.ops.len()).map(|k| check_operator(asm, k, &asm.ops[k], mesh, local, &mut integ, cfg)).collect()
}

/// Tests one operator matrix, which may differ from the assembled one.
pub fn check_operator(
    asm: &ComplexAssembly,
    k: usize,
    op: &ExactMatrix,
    mesh: &SimplicialComplex,
    local: &LocalElements,
    integ: &mut Integrator<'_>,
    cfg: &OracleConfig,
) -> Result<OperatorOracle> {
    let (mode, shape, needs_cutoff) = plan(asm.kind, k)?;
    let src = &asm.spaces[k];
    let dst = &asm.spaces[k + 1];
    if op.rows() != dst.dim() || op.cols() != src.dim() {
        return Err(Error::Dimension(format!("operator {k} has the wrong shape")));
    }
    let seed = cfg.seed ^ ((k as u64) << 32) ^ (asm.kind as u64) << 40;
    let mut sampler =
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), degree: cfg.degree, range: cfg.range, n: mesh.dim() };
    let columns: Vec<Vec<(usize, Rational)>> = {
        let t = op.transpose();
        (0..src.dim()).map(|j| t.row(j).map(|(i, v)| (i, v.clone())).collect()).collect()
    };
    // Columns sharing a cutoff share the test field and its adjoint.
    let mut groups: BTreeMap<BTreeSet<Plane>, Vec<usize>> = BTreeMap::new();
    for (j, atom) in src.atoms.iter().enumerate() {
        let key =
            if needs_cutoff { cutoff_planes(mesh, &support_vertices(mesh, local, atom)) } else { BTreeSet::new() };
        groups.entry(key).or_default().push(j);
    }
    let groups: Vec<(Cutoff, Vec<usize>)> =
        groups.into_iter().map(|(planes, cols)| (Cutoff::new(cutoff(&planes)), cols)).collect();
    log::debug!("{}: {} columns of {} in {} cutoff groups", asm.kind, src.dim(), asm.labels[k], groups.len());
    let mut mismatches = 0;
    for _ in 0..cfg.trials {
        match mode {
            OracleMode::Adjoint => {
                let phi = sampler.field(shape).map(Weighted::lift);
                let adj = adjoint(asm.kind, k, &phi);
                for (cutoff, cols) in &groups {
                    let mut test = TestField::new(&phi, cutoff);
                    let mut test_adj = TestField::new(&adj, cutoff);
                    let mut memo: HashMap<usize, Rational> = HashMap::new();
                    for &j in cols {
                        let mut lhs = q(0);
                        for (i, d) in &columns[j] {
                            if !memo.contains_key(i) {
                                memo.insert(*i, test.apply(integ, local, &dst.atoms[*i])?);
                            }
                            lhs += d * &memo[i];
                        }
                        let rhs = test_adj.apply(integ, local, &src.atoms[j])?;
                        if lhs != rhs {
                            mismatches += 1;
                        }
                    }
                }
            }
            OracleMode::Cellwise => {
                let psi = sampler.field(shape);
                let lifted = psi.map(Weighted::lift);
                let one = Cutoff::one();
                let mut test = TestField::new(&lifted, &one);
                let mut memo: HashMap<usize, Rational> = HashMap::new();
                for (j, col) in columns.iter().enumerate() {
                    let mut lhs = q(0);
                    for (i, d) in col {
                        if !memo.contains_key(i) {
                            memo.insert(*i, test.apply(integ, local, &dst.atoms[*i])?);
                        }
                        lhs += d * &memo[i];
                    }
                    let mut rhs = q(0);
                    for cell in local.support(mesh, &src.atoms[j]) {
                        let xi = local.local_field(mesh, &src.atoms[j], cell).expect("cell in support");
                        let s = Field::Matrix(poly::sym(&poly::curl_rows(expect_matrix(&xi))));
                        rhs += integ.cell(cell, &field_product(&s, &psi).expect("matrix fields"));
                    }
                    if lhs != rhs {
                        mismatches += 1;
                    }
                }
            }
            OracleMode::LagrangeNodal => {
                let mut nodal = vec![q(0); mesh.num(0)];
                for atom in &dst.atoms {
                    if let BasisAtom::VertexScalarDelta { vertex } = *atom {
                        nodal[vertex] = q(sampler.rng.random_range(-cfg.range..=cfg.range));
                    }
                }
                for (j, col) in columns.iter().enumerate() {
                    let mut lhs = q(0);
                    for (i, d) in col {
                        let BasisAtom::VertexScalarDelta { vertex } = dst.atoms[*i] else {
                            unreachable!("U3 holds vertex deltas")
                        };
                        lhs += d * &nodal[vertex];
                    }
                    if lhs != nodal_rhs(mesh, local, &src.atoms[j], &nodal) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    log::debug!("{}: oracle on {} finished with {mismatches} mismatches", asm.kind, asm.labels[k]);
    Ok(OperatorOracle {
        operator: asm.labels[k].clone(),
        degree: k,
        mode,
        trials: cfg.trials,
        columns: src.dim(),
        mismatches,
        pass: mismatches == 0,
    })
}

/// `⟨σ, hess v⟩` for piecewise-linear `v`, written through normal-normal jumps:
/// `−Σ_f Σ_{K ⊃ f} s(f,K) (∇v_K·n)(n·σ_K·n) / (2|n|²)`.
fn nodal_rhs(mesh: &SimplicialComplex, local: &LocalElements, atom: &BasisAtom, nodal: &[Rational]) -> Rational {
    let n = mesh.dim();
    let mut acc = q(0);
    for cell in local.support(mesh, atom) {
        let Some(Field::Matrix(sigma)) = local.local_field(mesh, atom, cell) else {
            unreachable!("U2 holds matrix fields")
        };
        let sigma = poly::eval_matrix(&sigma, &vec![q(0); n]);
        let verts = mesh.simplex(n, cell);
        let mut grad = vec![q(0); n];
        for (a, g) in local.grads(cell).iter().enumerate() {
            grad = geometry::add(&grad, &geometry::scale(g, &nodal[verts[a]]));
        }
        for f in mesh.faces(n, cell) {
            let nf = geometry::facet_normal(mesh, f);
            let s = q(geometry::outward_sign(mesh, f, cell) as i64);
            let sn: Vec<Rational> = (0..n).map(|i| geometry::dot(&sigma[i], &nf)).collect();
            let nn = geometry::dot(&nf, &sn);
            acc -= s * geometry::dot(&grad, &nf) * nn / (geometry::dot(&nf, &nf) * q(2));
        }
    }
    acc
}

/// Returns a copy of the operator with its first stored entry negated.
pub fn flip_sign(op: &ExactMatrix) -> Result<ExactMatrix> {
    let (i, j, v) = op
        .entries()
        .next()
        .map(|(i, j, v)| (i, j, v.clone()))
        .ok_or_else(|| Error::Invalid("cannot flip the sign of an entry of a zero operator".into()))?;
    let mut out = op.clone();
    out.set(i, j, -v)?;
    Ok(out)
}

/// Returns a copy of the operator with one entry increased by one.
pub fn perturb(op: &ExactMatrix) -> Result<ExactMatrix> {
    let mut out = op.clone();
    let (i, j) = op.entries().next().map(|(i, j, _)| (i, j)).unwrap_or((0, 0));
    if op.rows() == 0 || op.cols() == 0 {
        return Err(Error::Invalid("cannot perturb an empty operator".into()));
    }
    out.add_to(i, j, &q(1))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals;
    use crate::mesh::{generate_mesh, GeneratorKind};
    use crate::operators::assemble_with;

    #[test]
    fn weighted_test_fields_match_expanded_polynomials() {
        for (gen, res) in [(GeneratorKind::CrissCrossSquare, 1), (GeneratorKind::Cube, 1)] {
            let mesh = generate_mesh(gen, res).unwrap();
            let local = LocalElements::new(&mesh).unwrap();
            let mut integ = Integrator::new(&mesh);
            let cut = Cutoff::new(cutoff(&cutoff_planes(&mesh, &BTreeSet::from([0]))));
            for kind in ComplexKind::for_dim(mesh.dim()).into_iter().filter(|k| covers(*k)) {
                let asm = assemble_with(kind, &mesh, &local).unwrap();
                for k in 0..asm.ops.len() {
                    let (mode, shape, _) = plan(kind, k).unwrap();
                    if !matches!(mode, OracleMode::Adjoint) {
                        continue;
                    }
                    let mut sampler =
                        Sampler { rng: ChaCha8Rng::seed_from_u64(k as u64), degree: 2, range: 3, n: mesh.dim() };
                    let phi = sampler.field(shape).map(Weighted::lift);
                    let adj = adjoint(kind, k, &phi);
                    for (field, space) in [(&phi, &asm.spaces[k + 1]), (&adj, &asm.spaces[k])] {
                        let plain = field.map(|w| cut.expand(w));
                        let mut test = TestField::new(field, &cut);
                        for atom in &space.atoms {
                            assert_eq!(
                                test.apply(&mut integ, &local, atom).unwrap(),
                                functionals::apply(&mut integ, &local, atom, &plain).unwrap(),
                                "{kind} operator {k} at {atom:?}"
                            );
                        }
                    }
                }
            }
        }
    }
}
