//! Certification of the structural properties of assembled complexes.

use serde::{Deserialize, Serialize};

use crate::functionals::Integrator;
use crate::homology::{
    expected_cohomology, tilde_boundary_matrix, tilde_chain_basis, tilde_cohomology, ComplexKind, Family,
};
use crate::linalg::{q, ExactMatrix};
use crate::maps::{inclusion, kappa, nodal_map, pairing};
use crate::mesh::{OrientationVariant, SimplicialComplex};
use crate::operators::{assemble_with, restriction_map, ComplexAssembly};
use crate::spaces::LocalElements;
use crate::{Error, Result};

/// True when every composite `ops[k+1] ∘ ops[k]` vanishes exactly.
pub fn check_complex(asm: &ComplexAssembly) -> Result<bool> {
    Ok(composites(asm)?.iter().all(|c| c.zero))
}

/// One composite of consecutive operators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composite {
    pub degree: usize,
    pub label: String,
    pub nnz: usize,
    pub zero: bool,
}

/// All composites `ops[k+1] ∘ ops[k]`.
pub fn composites(asm: &ComplexAssembly) -> Result<Vec<Composite>> {
    (0..asm.ops.len().saturating_sub(1))
        .map(|k| {
            let c = asm.ops[k + 1].compose(&asm.ops[k])?;
            Ok(Composite {
                degree: k,
                label: format!("{} ∘ {}", asm.labels[k + 1], asm.labels[k]),
                nnz: c.nnz(),
                zero: c.is_zero(),
            })
        })
        .collect()
}

/// Ranks of the operators of a complex.
pub fn ranks(asm: &ComplexAssembly) -> Vec<usize> {
    asm.ops.iter().map(ExactMatrix::rank).collect()
}

/// Clamped at zero, which only matters when the sequence is not a complex.
fn cohomology_from_ranks(dims: &[usize], ranks: &[usize]) -> Vec<usize> {
    (0..dims.len())
        .map(|k| {
            let out = ranks.get(k).copied().unwrap_or(0);
            let inc = if k == 0 { 0 } else { ranks[k - 1] };
            dims[k].saturating_sub(out + inc)
        })
        .collect()
}

/// Cohomology dimensions `dim X^k − rank D^k − rank D^{k−1}`.
pub fn cohomology_dims(asm: &ComplexAssembly) -> Vec<usize> {
    cohomology_from_ranks(&asm.dims(), &ranks(asm))
}

/// Cohomology in one degree with its expected value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyEntry {
    pub k: usize,
    pub dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
    pub computed: usize,
    pub expected: usize,
    pub pass: bool,
}

/// Computes the cohomology and compares it with the expected Betti numbers
/// times the coefficient dimension.
pub fn certify_cohomology(asm: &ComplexAssembly, mesh: &SimplicialComplex) -> Result<Vec<CohomologyEntry>> {
    let dims = asm.dims();
    let r = ranks(asm);
    let expected = expected_cohomology(asm.kind, mesh)?;
    let computed = cohomology_from_ranks(&dims, &r);
    Ok((0..dims.len())
        .map(|k| CohomologyEntry {
            k,
            dim: dims[k],
            rank_in: if k == 0 { 0 } else { r[k - 1] },
            rank_out: r.get(k).copied().unwrap_or(0),
            computed: computed[k],
            expected: expected[k],
            pass: computed[k] == expected[k],
        })
        .collect())
}

fn variant(bc: bool) -> OrientationVariant {
    if bc {
        OrientationVariant::Standard
    } else {
        OrientationVariant::Relative
    }
}

fn commutes(a: &ExactMatrix, b: &ExactMatrix, c: &ExactMatrix, d: &ExactMatrix) -> Result<bool> {
    Ok(a.compose(b)? == c.compose(d)?)
}

/// Outcome of the diagram checks linking the distributional Hessian complex,
/// the auxiliary complex and the `∂̃` complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramReport {
    pub dim: usize,
    pub bc: bool,
    /// `ι^{k+1} D^k = D₋^k ι^k` for each `k`.
    pub inclusion_squares: Vec<bool>,
    /// `ι¹ ∘ hess = hess₋ ∘ restriction`.
    pub restriction_square: bool,
    /// `κ^{k+1} D₋^k = ∂ κ^k`.
    pub kappa_squares: Vec<bool>,
    /// `g^{k+1} D₋^k = ∂̃ g^k`.
    pub nodal_squares: Vec<bool>,
    /// Per degree: `ι` injective, `g` surjective, `g ι = 0`, `rank ι + rank g = dim V₋`.
    pub columns_exact: Vec<bool>,
    /// `χ(V₋) = χ(top row) + χ(∂̃)`.
    pub euler: bool,
    /// Cohomology of `∂̃` and its expected value.
    pub tilde_cohomology: Vec<usize>,
    pub tilde_expected: Vec<usize>,
    pub pass: bool,
}

/// Checks every square and column of the diagram for one dimension and
/// boundary-condition flag.
pub fn check_diagram(mesh: &SimplicialComplex, local: &LocalElements, bc: bool) -> Result<DiagramReport> {
    let n = mesh.dim();
    let kinds = ComplexKind::for_dim(n);
    let find = |fam: Family| {
        kinds.iter().copied().find(|k| k.family() == fam && k.is_bc() == bc).expect("every family has both variants")
    };
    let top = assemble_with(find(Family::Hessian), mesh, local)?;
    let aux = assemble_with(find(Family::Aux), mesh, local)?;
    let var = variant(bc);

    let iotas: Vec<ExactMatrix> =
        (0..=n).map(|k| inclusion(mesh, &top.spaces[k], &aux.spaces[k])).collect::<Result<_>>()?;
    let kappas: Vec<ExactMatrix> = aux.spaces.iter().map(|s| kappa(mesh, s)).collect::<Result<_>>()?;
    let gs: Vec<ExactMatrix> = aux.spaces.iter().map(|s| nodal_map(mesh, s)).collect::<Result<_>>()?;

    let mut inclusion_squares = Vec::with_capacity(n);
    let mut kappa_squares = Vec::with_capacity(n);
    let mut nodal_squares = Vec::with_capacity(n);
    for k in 0..n {
        let top_op = if k == 0 { ExactMatrix::zeros(top.spaces[1].dim(), 0) } else { top.ops[k].clone() };
        inclusion_squares.push(commutes(&iotas[k + 1], &top_op, &aux.ops[k], &iotas[k])?);
        let boundary = mesh.boundary_matrix(n - k, var, n + 1)?;
        kappa_squares.push(commutes(&kappas[k + 1], &aux.ops[k], &boundary, &kappas[k])?);
        let tilde = tilde_boundary_matrix(mesh, n - k, var)?;
        nodal_squares.push(commutes(&gs[k + 1], &aux.ops[k], &tilde, &gs[k])?);
    }
    let restriction = restriction_map(mesh, local, &top.spaces[0], &aux.spaces[0])?;
    let restriction_square = commutes(&iotas[1], &top.ops[0], &aux.ops[0], &restriction)?;

    let mut columns_exact = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let ri = iotas[k].rank();
        let rg = gs[k].rank();
        let injective = ri == iotas[k].cols();
        let surjective = rg == gs[k].rows();
        let zero = gs[k].compose(&iotas[k])?.is_zero();
        columns_exact.push(injective && surjective && zero && ri + rg == aux.spaces[k].dim());
    }

    let chi = |dims: &[usize]| -> i64 {
        dims.iter().enumerate().map(|(k, d)| if k % 2 == 0 { *d as i64 } else { -(*d as i64) }).sum()
    };
    let top_dims: Vec<usize> = (0..=n).map(|k| iotas[k].cols()).collect();
    let tilde_dims: Vec<usize> = (0..=n).map(|k| tilde_chain_basis(mesh, n - k, var).len()).collect();
    let euler = chi(&aux.dims()) == chi(&top_dims) + chi(&tilde_dims);

    let tilde = tilde_cohomology(mesh, var)?;
    let mut tilde_expected = vec![0; n + 1];
    tilde_expected[0] = if bc { mesh.interior(0).len() } else { mesh.num(0) };

    let pass = inclusion_squares.iter().all(|b| *b)
        && restriction_square
        && kappa_squares.iter().all(|b| *b)
        && nodal_squares.iter().all(|b| *b)
        && columns_exact.iter().all(|b| *b)
        && euler
        && tilde == tilde_expected;
    Ok(DiagramReport {
        dim: n,
        bc,
        inclusion_squares,
        restriction_square,
        kappa_squares,
        nodal_squares,
        columns_exact,
        euler,
        tilde_cohomology: tilde,
        tilde_expected,
        pass,
    })
}

/// One pairing identity `P_k · D_U = ± D_V^{k,T} · P_{k+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityIdentity {
    pub degree: usize,
    pub sign: i64,
    pub holds: bool,
}

/// Outcome of the duality checks for one pair of complexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub distribution: ComplexKind,
    pub function: ComplexKind,
    pub identities: Vec<DualityIdentity>,
    /// Per degree: `Some(nondegenerate)` for square pairings, `None` otherwise.
    pub nondegenerate: Vec<Option<bool>>,
    /// Harmonic dimensions of the distribution complex by degree.
    pub harmonic_distribution: Vec<usize>,
    /// Harmonic dimensions of the function complex in the matching degree `n − k`.
    pub harmonic_function: Vec<usize>,
    pub pass: bool,
}

/// Dimension of `ker D ∩ ker D_prevᵀ`, computed from the stacked rank of
/// `[D; D_prevᵀ]`.
pub fn harmonic_dims_stacked(asm: &ComplexAssembly) -> Result<Vec<usize>> {
    let dims = asm.dims();
    (0..dims.len())
        .map(|k| {
            let out = asm.ops.get(k).cloned().unwrap_or_else(|| ExactMatrix::zeros(0, dims[k]));
            let prev = if k == 0 { ExactMatrix::zeros(0, dims[k]) } else { asm.ops[k - 1].transpose() };
            Ok(dims[k] - out.vstack(&prev)?.rank())
        })
        .collect()
}

/// Dimension of `ker D ∩ ker D_prevᵀ`. When `D ∘ D_prev = 0` the row spaces
/// of `D` and `D_prevᵀ` are orthogonal, so the stacked rank splits into
/// `rank D + rank D_prev`; otherwise the stacked rank is computed.
pub fn harmonic_dims(asm: &ComplexAssembly) -> Result<Vec<usize>> {
    if check_complex(asm)? {
        Ok(cohomology_dims(asm))
    } else {
        harmonic_dims_stacked(asm)
    }
}

/// Sign in the identity of degree `k`.
fn duality_sign(n: usize, k: usize) -> i64 {
    match (n, k) {
        (2, 1) | (3, 2) => -1,
        _ => 1,
    }
}

/// Checks the pairing identities between the distributional Hessian complex
/// `dist` and the function complex `func` of opposite boundary conditions.
pub fn check_duality(
    mesh: &SimplicialComplex,
    local: &LocalElements,
    dist: &ComplexAssembly,
    func: &ComplexAssembly,
) -> Result<DualityReport> {
    let n = mesh.dim();
    if dist.kind.family() != Family::Hessian || dist.kind.dim() != n || func.kind.dim() != n {
        return Err(Error::Invalid(format!("{} and {} are not a dual pair", dist.kind, func.kind)));
    }
    let mut integ = Integrator::new(mesh);
    let pairings: Vec<ExactMatrix> = (0..=n)
        .map(|k| pairing(mesh, local, &mut integ, &dist.spaces[k], &func.spaces[n - k]))
        .collect::<Result<_>>()?;
    let mut identities = Vec::with_capacity(n);
    for k in 0..n {
        let sign = duality_sign(n, k);
        let lhs = pairings[k].compose(&func.ops[n - k - 1])?;
        let rhs = dist.ops[k].transpose().compose(&pairings[k + 1])?.scale(&q(sign));
        identities.push(DualityIdentity { degree: k, sign, holds: lhs == rhs });
    }
    let nondegenerate: Vec<Option<bool>> =
        pairings.iter().map(|p| if p.rows() == p.cols() { p.is_nondegenerate().ok() } else { None }).collect();
    let hd = harmonic_dims(dist)?;
    let hf = harmonic_dims(func)?;
    let harmonic_function: Vec<usize> = (0..=n).map(|k| hf[n - k]).collect();
    let expected = expected_cohomology(dist.kind, mesh)?;
    let pass = identities.iter().all(|i| i.holds)
        && nondegenerate.iter().all(|d| d.unwrap_or(true))
        && hd == harmonic_function
        && hd == expected;
    Ok(DualityReport {
        distribution: dist.kind,
        function: func.kind,
        identities,
        nondegenerate,
        harmonic_distribution: hd,
        harmonic_function,
        pass,
    })
}

/// True when every operator of a trimmed complex is the restriction of the
/// corresponding full operator to the non-bubble rows and columns.
pub fn check_trimmed(full: &ComplexAssembly, trimmed: &ComplexAssembly) -> Result<bool> {
    if full.ops.len() != trimmed.ops.len() {
        return Err(Error::Invalid("complexes have different lengths".into()));
    }
    for k in 0..full.ops.len() {
        let rows: Vec<usize> = trimmed.spaces[k + 1]
            .atoms
            .iter()
            .map(|a| full.spaces[k + 1].position(a).ok_or_else(|| Error::Invalid(format!("{a:?} missing"))))
            .collect::<Result<_>>()?;
        let cols: Vec<usize> = trimmed.spaces[k]
            .atoms
            .iter()
            .map(|a| full.spaces[k].position(a).ok_or_else(|| Error::Invalid(format!("{a:?} missing"))))
            .collect::<Result<_>>()?;
        if full.ops[k].select(&rows, &cols) != trimmed.ops[k] {
            return Ok(false);
        }
    }
    Ok(true)
}
