//! Simplicial homology over the rationals, expected cohomology of the
//! complexes, and the restriction-boundary complexes `∂̃`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::linalg::{q, ExactMatrix};
use crate::mesh::{OrientationVariant, SimplicialComplex};
use crate::poly::Poly;
use crate::{Error, Result};

/// Coefficient spaces appearing in the cohomology statements.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientSpace {
    Z,
    P1_2D,
    P1_3D,
    RT_2D,
    RT_3D,
}

impl CoefficientSpace {
    pub fn dim(self) -> usize {
        match self {
            CoefficientSpace::Z => 1,
            CoefficientSpace::P1_2D | CoefficientSpace::RT_2D => 3,
            CoefficientSpace::P1_3D | CoefficientSpace::RT_3D => 4,
        }
    }

    /// Basis as vectors of polynomial components; scalar spaces have one component.
    ///
    /// `P1` uses the monomials `{1, x, y(, z)}`; `RT` uses the constant unit
    /// vectors followed by `x`.
    pub fn basis(self) -> Vec<Vec<Poly>> {
        match self {
            CoefficientSpace::Z => vec![vec![Poly::constant(q(1))]],
            CoefficientSpace::P1_2D | CoefficientSpace::P1_3D => {
                let n = self.dim() - 1;
                let mut b = vec![vec![Poly::constant(q(1))]];
                b.extend((0..n).map(|i| vec![Poly::var(i)]));
                b
            }
            CoefficientSpace::RT_2D | CoefficientSpace::RT_3D => {
                let n = self.dim() - 1;
                let mut b: Vec<Vec<Poly>> =
                    (0..n).map(|i| (0..n).map(|j| Poly::constant(q((i == j) as i64))).collect()).collect();
                b.push((0..n).map(Poly::var).collect());
                b
            }
        }
    }
}

/// Betti numbers indexed by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector(pub Vec<usize>);

impl BettiVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// The fourteen assemblies: eight main complexes, four auxiliary
/// piecewise-polynomial complexes and two trimmed 3D divdiv complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ComplexKind {
    Hessian2d,
    Hessian0_2d,
    Divdiv2d,
    Divdiv0_2d,
    Hessian3d,
    Hessian0_3d,
    Divdiv3d,
    Divdiv0_3d,
    AuxHessian2d,
    AuxHessian0_2d,
    AuxHessian3d,
    AuxHessian0_3d,
    TrimmedDivdiv3d,
    TrimmedDivdiv0_3d,
}

/// Which family of spaces a complex is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Hessian,
    Divdiv,
    Aux,
    TrimmedDivdiv,
}

impl ComplexKind {
    pub const ALL: [ComplexKind; 14] = [
        ComplexKind::Hessian2d,
        ComplexKind::Hessian0_2d,
        ComplexKind::Divdiv2d,
        ComplexKind::Divdiv0_2d,
        ComplexKind::Hessian3d,
        ComplexKind::Hessian0_3d,
        ComplexKind::Divdiv3d,
        ComplexKind::Divdiv0_3d,
        ComplexKind::AuxHessian2d,
        ComplexKind::AuxHessian0_2d,
        ComplexKind::AuxHessian3d,
        ComplexKind::AuxHessian0_3d,
        ComplexKind::TrimmedDivdiv3d,
        ComplexKind::TrimmedDivdiv0_3d,
    ];

    pub const MAIN: [ComplexKind; 8] = [
        ComplexKind::Hessian2d,
        ComplexKind::Hessian0_2d,
        ComplexKind::Divdiv2d,
        ComplexKind::Divdiv0_2d,
        ComplexKind::Hessian3d,
        ComplexKind::Hessian0_3d,
        ComplexKind::Divdiv3d,
        ComplexKind::Divdiv0_3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::Hessian2d => "hessian-2d",
            ComplexKind::Hessian0_2d => "hessian0-2d",
            ComplexKind::Divdiv2d => "divdiv-2d",
            ComplexKind::Divdiv0_2d => "divdiv0-2d",
            ComplexKind::Hessian3d => "hessian-3d",
            ComplexKind::Hessian0_3d => "hessian0-3d",
            ComplexKind::Divdiv3d => "divdiv-3d",
            ComplexKind::Divdiv0_3d => "divdiv0-3d",
            ComplexKind::AuxHessian2d => "aux-hessian-2d",
            ComplexKind::AuxHessian0_2d => "aux-hessian0-2d",
            ComplexKind::AuxHessian3d => "aux-hessian-3d",
            ComplexKind::AuxHessian0_3d => "aux-hessian0-3d",
            ComplexKind::TrimmedDivdiv3d => "trimmed-divdiv-3d",
            ComplexKind::TrimmedDivdiv0_3d => "trimmed-divdiv0-3d",
        }
    }

    /// Spatial dimension the complex lives in.
    pub fn dim(self) -> usize {
        use ComplexKind::*;
        match self {
            Hessian2d | Hessian0_2d | Divdiv2d | Divdiv0_2d | AuxHessian2d | AuxHessian0_2d => 2,
            _ => 3,
        }
    }

    /// True for the variants with boundary conditions (compact support).
    pub fn is_bc(self) -> bool {
        use ComplexKind::*;
        matches!(
            self,
            Hessian0_2d | Divdiv0_2d | Hessian0_3d | Divdiv0_3d | AuxHessian0_2d | AuxHessian0_3d | TrimmedDivdiv0_3d
        )
    }

    pub fn family(self) -> Family {
        use ComplexKind::*;
        match self {
            Hessian2d | Hessian0_2d | Hessian3d | Hessian0_3d => Family::Hessian,
            Divdiv2d | Divdiv0_2d | Divdiv3d | Divdiv0_3d => Family::Divdiv,
            AuxHessian2d | AuxHessian0_2d | AuxHessian3d | AuxHessian0_3d => Family::Aux,
            TrimmedDivdiv3d | TrimmedDivdiv0_3d => Family::TrimmedDivdiv,
        }
    }

    /// Coefficient space of the cohomology.
    pub fn coefficient_space(self) -> CoefficientSpace {
        match (self.family(), self.dim()) {
            (Family::Hessian | Family::Aux, 2) => CoefficientSpace::P1_2D,
            (Family::Hessian | Family::Aux, _) => CoefficientSpace::P1_3D,
            (_, 2) => CoefficientSpace::RT_2D,
            _ => CoefficientSpace::RT_3D,
        }
    }

    /// The same complex with the boundary-condition flag replaced.
    pub fn with_bc(self, bc: bool) -> ComplexKind {
        ComplexKind::ALL
            .into_iter()
            .find(|k| k.family() == self.family() && k.dim() == self.dim() && k.is_bc() == bc)
            .expect("every family has both variants")
    }

    /// Complexes defined on meshes of the given dimension.
    pub fn for_dim(dim: usize) -> Vec<ComplexKind> {
        ComplexKind::ALL.into_iter().filter(|k| k.dim() == dim).collect()
    }
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<ComplexKind> for String {
    fn from(k: ComplexKind) -> String {
        k.name().to_string()
    }
}

impl TryFrom<String> for ComplexKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ComplexKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ComplexKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown complex kind `{s}`")))
    }
}

/// Rational homology dimensions `dim C_k − rank ∂_k − rank ∂_{k+1}`.
pub fn homology_dims(mesh: &SimplicialComplex, variant: OrientationVariant) -> BettiVector {
    let n = mesh.dim();
    let ranks: Vec<usize> = (0..=n + 1)
        .map(|k| if k == 0 || k > n { 0 } else { mesh.boundary_matrix(k, variant, 1).expect("degree in range").rank() })
        .collect();
    BettiVector((0..=n).map(|k| mesh.chain_basis(k, variant).len() - ranks[k] - ranks[k + 1]).collect())
}

/// De Rham Betti numbers: plain from relative homology, compactly supported
/// from standard homology, both with the degree reversal `k ↦ n − k`.
pub fn de_rham_betti(mesh: &SimplicialComplex, compact: bool) -> BettiVector {
    let variant = if compact { OrientationVariant::Standard } else { OrientationVariant::Relative };
    let h = homology_dims(mesh, variant);
    let n = mesh.dim();
    BettiVector((0..=n).map(|k| h.0[n - k]).collect())
}

/// Expected cohomology dimensions of a complex on a mesh.
pub fn expected_cohomology(kind: ComplexKind, mesh: &SimplicialComplex) -> Result<Vec<usize>> {
    if kind.dim() != mesh.dim() {
        return Err(Error::Dimension(format!("{kind} needs a {}D mesh, got {}D", kind.dim(), mesh.dim())));
    }
    let c = kind.coefficient_space().dim();
    Ok(de_rham_betti(mesh, kind.is_bc()).0.into_iter().map(|b| b * c).collect())
}

/// Chain basis of the `∂̃` complex in simplex dimension `k`: pairs
/// `(simplex, local vertex position)`, the nodal basis of `P1(σ)`.
pub fn tilde_chain_basis(mesh: &SimplicialComplex, k: usize, variant: OrientationVariant) -> Vec<(usize, usize)> {
    mesh.chain_basis(k, variant).into_iter().flat_map(|s| (0..=k).map(move |a| (s, a))).collect()
}

/// Matrix of `∂̃ : ⊕_σ P1(σ) → ⊕_τ P1(τ)` from simplex dimension `k` to `k − 1`.
///
/// `P1(σ)` is coordinatized by nodal values at the vertices of `σ`, so
/// restriction to a face keeps the values at the shared vertices.
pub fn tilde_boundary_matrix(mesh: &SimplicialComplex, k: usize, variant: OrientationVariant) -> Result<ExactMatrix> {
    if k == 0 || k > mesh.dim() {
        return Err(Error::Dimension(format!("degree {k} outside 1..={}", mesh.dim())));
    }
    let cols = tilde_chain_basis(mesh, k, variant);
    let rows = tilde_chain_basis(mesh, k - 1, variant);
    let row_pos: HashMap<(usize, usize), usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut triplets = Vec::new();
    for (c, &(s, a)) in cols.iter().enumerate() {
        let v = mesh.simplex(k, s)[a];
        for f in mesh.faces(k, s) {
            let face = mesh.simplex(k - 1, f);
            if let Some(b) = face.iter().position(|&w| w == v) {
                if let Some(&r) = row_pos.get(&(f, b)) {
                    triplets.push((r, c, q(mesh.raw_sign(k - 1, f, s) as i64)));
                }
            }
        }
    }
    ExactMatrix::from_triplets(rows.len(), cols.len(), triplets)
}

/// Cohomology of the `∂̃` complex, indexed by cohomological degree `n − k`.
pub fn tilde_cohomology(mesh: &SimplicialComplex, variant: OrientationVariant) -> Result<Vec<usize>> {
    let n = mesh.dim();
    let mut ranks = vec![0usize; n + 2];
    for k in 1..=n {
        ranks[k] = tilde_boundary_matrix(mesh, k, variant)?.rank();
    }
    Ok((0..=n)
        .map(|deg| {
            let k = n - deg;
            tilde_chain_basis(mesh, k, variant).len() - ranks[k] - ranks[k + 1]
        })
        .collect())
}

/// Chain complex on the simplices containing one vertex.
#[derive(Clone, Debug)]
pub struct VertexPatch {
    pub vertex: usize,
    /// `chains[k]`: simplices of dimension `k` in the patch (variant-filtered).
    pub chains: Vec<Vec<usize>>,
    /// `boundaries[k]` maps `chains[k+1]` to `chains[k]`.
    pub boundaries: Vec<ExactMatrix>,
}

impl VertexPatch {
    /// Homology indexed by cohomological degree `n − k`, like `tilde_cohomology`.
    pub fn homology(&self) -> Vec<usize> {
        let n = self.chains.len() - 1;
        let ranks: Vec<usize> = self.boundaries.iter().map(ExactMatrix::rank).collect();
        (0..=n)
            .map(|deg| {
                let k = n - deg;
                let out = if k > 0 { ranks[k - 1] } else { 0 };
                let inc = if k < n { ranks[k] } else { 0 };
                self.chains[k].len() - out - inc
            })
            .collect()
    }
}

/// Splits the `∂̃` complex into vertex-patch complexes, one per vertex.
pub fn vertex_patch_split(mesh: &SimplicialComplex, variant: OrientationVariant) -> Vec<VertexPatch> {
    let n = mesh.dim();
    let mut chains: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n + 1]; mesh.num(0)];
    for k in 0..=n {
        for s in mesh.chain_basis(k, variant) {
            for &v in mesh.simplex(k, s) {
                chains[v][k].push(s);
            }
        }
    }
    chains
        .into_iter()
        .enumerate()
        .map(|(vertex, chains)| {
            let boundaries = (0..n)
                .map(|k| {
                    let pos: HashMap<usize, usize> = chains[k].iter().enumerate().map(|(i, s)| (*s, i)).collect();
                    let mut triplets = Vec::new();
                    for (c, &s) in chains[k + 1].iter().enumerate() {
                        for f in mesh.faces(k + 1, s) {
                            if let Some(&r) = pos.get(&f) {
                                triplets.push((r, c, q(mesh.raw_sign(k, f, s) as i64)));
                            }
                        }
                    }
                    ExactMatrix::from_triplets(chains[k].len(), chains[k + 1].len(), triplets)
                        .expect("indices within patch")
                })
                .collect();
            VertexPatch { vertex, chains, boundaries }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, GeneratorKind};

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::parse("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\n").unwrap()
    }

    #[test]
    fn single_triangle_homology() {
        assert_eq!(homology_dims(&triangle(), OrientationVariant::Standard).0, vec![1, 0, 0]);
        assert_eq!(homology_dims(&triangle(), OrientationVariant::Relative).0, vec![0, 0, 1]);
    }

    #[test]
    fn annulus_relative_homology() {
        let m = generate_mesh(GeneratorKind::SquareWithHole, 4).unwrap();
        assert_eq!(homology_dims(&m, OrientationVariant::Relative).0, vec![0, 1, 1]);
        assert_eq!(expected_cohomology(ComplexKind::Hessian2d, &m).unwrap(), vec![3, 3, 0]);
    }

    #[test]
    fn tilde_complex_squares_to_zero_and_has_lagrange_cohomology() {
        let m = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
        for variant in [OrientationVariant::Relative, OrientationVariant::Standard] {
            let d2 = tilde_boundary_matrix(&m, 2, variant).unwrap();
            let d1 = tilde_boundary_matrix(&m, 1, variant).unwrap();
            assert!(d1.compose(&d2).unwrap().is_zero());
        }
        assert_eq!(tilde_cohomology(&m, OrientationVariant::Relative).unwrap(), vec![5, 0, 0]);
        assert_eq!(tilde_cohomology(&m, OrientationVariant::Standard).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn vertex_patches() {
        let m = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
        let center = (0..m.num(0)).find(|&v| !m.is_boundary(0, v)).unwrap();
        let patches = vertex_patch_split(&m, OrientationVariant::Standard);
        assert_eq!(patches[center].homology(), vec![1, 0, 0]);
        for p in &patches {
            if m.is_boundary(0, p.vertex) {
                assert_eq!(p.homology(), vec![0, 0, 0]);
            }
        }
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in ComplexKind::ALL {
            assert_eq!(k.name().parse::<ComplexKind>().unwrap(), k);
            assert_eq!(k.with_bc(k.is_bc()), k);
        }
    }
}
