//! Simplicial complexes with exact rational coordinates.
//!
//! Simplices are stored as strictly increasing vertex tuples. All orientation
//! signs are derived from that canonical order, so they never depend on the
//! vertex order used in an input file.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point};
use crate::linalg::{q, ExactMatrix, Rational};
use crate::{Error, Result};

/// Selects the orientation function: relative to the boundary or standard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrientationVariant {
    /// Signs vanish on boundary faces; chains use interior simplices only.
    Relative,
    /// Plain simplicial signs on every simplex.
    Standard,
}

/// Identifies a simplex by its dimension and index within that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplexId {
    pub dim: usize,
    pub index: usize,
}

impl SimplexId {
    pub fn new(dim: usize, index: usize) -> Self {
        Self { dim, index }
    }
}

/// Cardinalities of a complex, total and interior, per dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshCounts {
    pub dim: usize,
    pub total: Vec<usize>,
    pub interior: Vec<usize>,
}

/// A triangulation of a bounded polyhedral domain in 2D or 3D.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    boundary: Vec<Vec<bool>>,
    cofaces: Vec<Vec<Vec<usize>>>,
    cell_orientation: Vec<i32>,
    input_parity: Vec<i32>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.vertices == other.vertices
            && self.simplices == other.simplices
            && self.input_parity == other.input_parity
    }
}

impl SimplicialComplex {
    /// Builds the closure of the given top cells and classifies boundary simplices.
    ///
    /// Cells may list their vertices in any order; the permutation parity to
    /// the canonical increasing order is recorded per cell.
    pub fn from_cells(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(format!("dimension must be 2 or 3, got {dim}")));
        }
        if let Some((i, _)) = vertices.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(Error::Dimension(format!("vertex {i} does not have {dim} coordinates")));
        }
        if cells.is_empty() {
            return Err(Error::Topology("mesh has no cells".into()));
        }
        let mut canonical: Vec<(Vec<usize>, i32)> = Vec::with_capacity(cells.len());
        let mut used = vec![false; vertices.len()];
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(Error::Dimension(format!("cell {c} has {} vertices, expected {}", cell.len(), dim + 1)));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Topology(format!(
                    "cell {c} references vertex {v} but only {} vertices exist",
                    vertices.len()
                )));
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Topology(format!("cell {c} repeats a vertex")));
            }
            for &v in &sorted {
                used[v] = true;
            }
            canonical.push((sorted, permutation_parity(cell)));
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Topology(format!("vertex {v} is not used by any cell")));
        }
        canonical.sort();
        if canonical.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Topology("duplicate cell".into()));
        }

        let mut sets: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim + 1];
        for (cell, _) in &canonical {
            for k in 0..=dim {
                for sub in subsets(cell, k + 1) {
                    sets[k].insert(sub);
                }
            }
        }
        let simplices: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let lookup: Vec<HashMap<Vec<usize>, usize>> =
            simplices.iter().map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();

        let mut cofaces: Vec<Vec<Vec<usize>>> = (0..=dim).map(|k| vec![Vec::new(); simplices[k].len()]).collect();
        for k in 1..=dim {
            for (i, s) in simplices[k].iter().enumerate() {
                for j in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(j);
                    cofaces[k - 1][lookup[k - 1][&face]].push(i);
                }
            }
        }

        let mut boundary: Vec<Vec<bool>> = (0..=dim).map(|k| vec![false; simplices[k].len()]).collect();
        for (f, cf) in cofaces[dim - 1].iter().enumerate() {
            match cf.len() {
                1 => boundary[dim - 1][f] = true,
                2 => {}
                n => return Err(Error::Topology(format!("facet {:?} is shared by {n} cells", simplices[dim - 1][f]))),
            }
        }
        for f in 0..simplices[dim - 1].len() {
            if boundary[dim - 1][f] {
                let facet = simplices[dim - 1][f].clone();
                for k in 0..dim - 1 {
                    for sub in subsets(&facet, k + 1) {
                        boundary[k][lookup[k][&sub]] = true;
                    }
                }
            }
        }

        let mut cell_orientation = Vec::with_capacity(canonical.len());
        for (cell, _) in &canonical {
            let pts: Vec<&Point> = cell.iter().map(|&v| &vertices[v]).collect();
            let det = geometry::simplex_det(&pts);
            if det.is_zero() {
                return Err(Error::Topology(format!("cell {cell:?} has zero volume")));
            }
            cell_orientation.push(if det.is_positive() { 1 } else { -1 });
        }
        let input_parity = canonical.iter().map(|(_, p)| *p).collect();

        let complex = Self { dim, vertices, simplices, lookup, boundary, cofaces, cell_orientation, input_parity };
        complex.check_connected()?;
        Ok(complex)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for cell in &self.simplices[self.dim] {
            let r0 = find(&mut parent, cell[0]);
            for &v in &cell[1..] {
                let r = find(&mut parent, v);
                parent[r] = r0;
            }
        }
        let root = find(&mut parent, 0);
        if (0..n).any(|v| find(&mut parent, v) != root) {
            return Err(Error::Topology("the union of cells is not connected".into()));
        }
        Ok(())
    }

    /// Parses the line-oriented mesh text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        fn header<'t>(lines: &mut impl Iterator<Item = (usize, &'t str)>, key: &str) -> Result<(usize, usize)> {
            let (ln, l) = lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("missing `{key}` line") })?;
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::Parse { line: ln, msg: format!("expected `{key} <count>`") });
            }
            let value = parts
                .next()
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse { line: ln, msg: format!("`{key}` needs a nonnegative integer") })?;
            if parts.next().is_some() {
                return Err(Error::Parse { line: ln, msg: "trailing tokens".into() });
            }
            Ok((ln, value))
        }
        let (dim_line, dim) = header(&mut lines, "dim")?;
        if dim != 2 && dim != 3 {
            return Err(Error::Parse { line: dim_line, msg: format!("dimension must be 2 or 3, got {dim}") });
        }
        let (_, nv) = header(&mut lines, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| Error::Parse { line: 0, msg: "missing vertex line".into() })?;
            let coords = l.split_whitespace().map(|t| parse_rational(t, ln)).collect::<Result<Vec<_>>>()?;
            if coords.len() != dim {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {dim} coordinates, found {}", coords.len()),
                });
            }
            vertices.push(coords);
        }
        let (_, nc) = header(&mut lines, "cells")?;
        let mut cells = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = lines.next().ok_or_else(|| Error::Parse { line: 0, msg: "missing cell line".into() })?;
            let idx = l
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::Parse { line: ln, msg: format!("bad vertex index `{t}`") })
                })
                .collect::<Result<Vec<_>>>()?;
            if idx.len() != dim + 1 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {} vertex indices, found {}", dim + 1, idx.len()),
                });
            }
            cells.push(idx);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "unexpected content after cells".into() });
        }
        Self::from_cells(dim, vertices, cells)
    }

    /// Serializes to the mesh text format. Cells are written in canonical
    /// order with the first two vertices swapped for odd input parity.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dim {}", self.dim);
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let coords: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "{}", coords.join(" "));
        }
        let _ = writeln!(s, "cells {}", self.num(self.dim));
        for (c, parity) in self.simplices[self.dim].iter().zip(&self.input_parity) {
            let mut c = c.clone();
            if *parity < 0 {
                c.swap(0, 1);
            }
            let idx: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{}", idx.join(" "));
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    /// Number of `k`-simplices.
    pub fn num(&self, k: usize) -> usize {
        self.simplices[k].len()
    }

    /// Vertex tuple of simplex `i` of dimension `k`.
    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        &self.simplices[k][i]
    }

    /// All `k`-simplices.
    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        &self.simplices[k]
    }

    /// Index of the `k`-simplex with the given (sorted) vertex tuple.
    pub fn find(&self, verts: &[usize]) -> Option<usize> {
        let k = verts.len().checked_sub(1)?;
        self.lookup.get(k)?.get(verts).copied()
    }

    /// Points of simplex `i` of dimension `k`, in canonical vertex order.
    pub fn points(&self, k: usize, i: usize) -> Vec<&Point> {
        self.simplices[k][i].iter().map(|&v| &self.vertices[v]).collect()
    }

    pub fn is_boundary(&self, k: usize, i: usize) -> bool {
        self.boundary[k][i]
    }

    /// Indices of interior `k`-simplices, increasing.
    pub fn interior(&self, k: usize) -> Vec<usize> {
        (0..self.num(k)).filter(|&i| !self.boundary[k][i]).collect()
    }

    /// Simplices used as chain basis in degree `k` for a variant.
    pub fn chain_basis(&self, k: usize, variant: OrientationVariant) -> Vec<usize> {
        match variant {
            OrientationVariant::Relative => self.interior(k),
            OrientationVariant::Standard => (0..self.num(k)).collect(),
        }
    }

    /// `(k+1)`-simplices containing simplex `i` of dimension `k`.
    pub fn cofaces(&self, k: usize, i: usize) -> &[usize] {
        &self.cofaces[k][i]
    }

    /// `(k−1)`-faces of simplex `i` of dimension `k`, ordered by removed vertex position.
    pub fn faces(&self, k: usize, i: usize) -> Vec<usize> {
        let s = &self.simplices[k][i];
        (0..s.len())
            .map(|j| {
                let mut f = s.clone();
                f.remove(j);
                self.lookup[k - 1][&f]
            })
            .collect()
    }

    /// Top cells containing simplex `i` of dimension `k`, increasing.
    pub fn cells_containing(&self, k: usize, i: usize) -> Vec<usize> {
        let mut current: BTreeSet<usize> = [i].into_iter().collect();
        for d in k..self.dim {
            current = current.iter().flat_map(|&s| self.cofaces[d][s].iter().copied()).collect();
        }
        current.into_iter().collect()
    }

    /// Sign of the determinant of a top cell in canonical vertex order.
    pub fn cell_orientation(&self, cell: usize) -> i32 {
        self.cell_orientation[cell]
    }

    /// Parity (±1) of the permutation from the input vertex order of a cell to canonical order.
    pub fn input_parity(&self, cell: usize) -> i32 {
        self.input_parity[cell]
    }

    /// Volume (area in 2D) of a top cell.
    pub fn cell_volume(&self, cell: usize) -> Rational {
        geometry::simplex_volume(&self.points(self.dim, cell))
    }

    /// Total and interior simplex counts.
    pub fn counts(&self) -> MeshCounts {
        MeshCounts {
            dim: self.dim,
            total: (0..=self.dim).map(|k| self.num(k)).collect(),
            interior: (0..=self.dim).map(|k| self.interior(k).len()).collect(),
        }
    }

    /// Orientation function on a pair of simplices.
    ///
    /// Returns `(−1)^j` when `tau` is `sigma` with its `j`-th vertex (1-based,
    /// canonical order) removed, `0` when `tau` is not a face of `sigma`, and
    /// `0` for boundary `tau` under the relative variant.
    pub fn orientation_sign(&self, tau: SimplexId, sigma: SimplexId, variant: OrientationVariant) -> Result<i32> {
        if sigma.dim == 0 || tau.dim + 1 != sigma.dim || sigma.dim > self.dim {
            return Err(Error::Dimension(format!(
                "orientation needs dim(tau) = dim(sigma) − 1, got {} and {}",
                tau.dim, sigma.dim
            )));
        }
        if tau.index >= self.num(tau.dim) || sigma.index >= self.num(sigma.dim) {
            return Err(Error::Dimension("simplex index out of range".into()));
        }
        if variant == OrientationVariant::Relative && self.boundary[tau.dim][tau.index] {
            return Ok(0);
        }
        Ok(self.raw_sign(tau.dim, tau.index, sigma.index))
    }

    /// Standard orientation sign without the boundary rule; `k` is `dim(tau)`.
    pub(crate) fn raw_sign(&self, k: usize, tau: usize, sigma: usize) -> i32 {
        let t = &self.simplices[k][tau];
        let s = &self.simplices[k + 1][sigma];
        match s.iter().position(|v| !t.contains(v)) {
            Some(pos) if s.len() == t.len() + 1 && t.iter().all(|v| s.contains(v)) => {
                if (pos + 1) % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
            _ => 0,
        }
    }

    /// Matrix of the boundary operator `∂_k : C_k → C_{k−1}` tensored with a
    /// coefficient space of dimension `coeff_dim`.
    ///
    /// Rows and columns are indexed by `(simplex, coefficient)` pairs with the
    /// coefficient index varying fastest; under the relative variant only
    /// interior simplices index rows and columns.
    pub fn boundary_matrix(&self, k: usize, variant: OrientationVariant, coeff_dim: usize) -> Result<ExactMatrix> {
        if k == 0 || k > self.dim {
            return Err(Error::Dimension(format!("boundary degree {k} outside 1..={}", self.dim)));
        }
        if coeff_dim == 0 {
            return Err(Error::Invalid("coefficient dimension must be positive".into()));
        }
        let cols = self.chain_basis(k, variant);
        let rows = self.chain_basis(k - 1, variant);
        let row_pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(p, r)| (*r, p)).collect();
        let mut triplets = Vec::new();
        for (cp, &s) in cols.iter().enumerate() {
            for f in self.faces(k, s) {
                if let Some(&rp) = row_pos.get(&f) {
                    let sign = self.raw_sign(k - 1, f, s);
                    for a in 0..coeff_dim {
                        triplets.push((rp * coeff_dim + a, cp * coeff_dim + a, q(sign as i64)));
                    }
                }
            }
        }
        ExactMatrix::from_triplets(rows.len() * coeff_dim, cols.len() * coeff_dim, triplets)
    }
}

/// Reads a mesh file.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let text = std::fs::read_to_string(path)?;
    SimplicialComplex::parse(&text)
}

fn parse_rational(token: &str, line: usize) -> Result<Rational> {
    let bad = || Error::Parse { line, msg: format!("`{token}` is not an integer or p/q rational") };
    let (n, d) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse { line, msg: format!("zero denominator in `{token}`") });
    }
    Ok(Rational::new(n, d))
}

fn permutation_parity(p: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All sorted `size`-element subsets of a sorted tuple, in lexicographic order.
pub(crate) fn subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Mesh generators of the certification suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorKind {
    Square,
    CrissCrossSquare,
    SquareWithHole,
    Cube,
    CubeWithTunnel,
    CubeWithCavity,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 6] = [
        GeneratorKind::Square,
        GeneratorKind::CrissCrossSquare,
        GeneratorKind::SquareWithHole,
        GeneratorKind::Cube,
        GeneratorKind::CubeWithTunnel,
        GeneratorKind::CubeWithCavity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Square => "square",
            GeneratorKind::CrissCrossSquare => "criss-cross-square",
            GeneratorKind::SquareWithHole => "square-with-hole",
            GeneratorKind::Cube => "cube",
            GeneratorKind::CubeWithTunnel => "cube-with-tunnel",
            GeneratorKind::CubeWithCavity => "cube-with-cavity",
        }
    }

    /// Smallest resolution the generator accepts.
    pub fn min_resolution(self) -> usize {
        match self {
            GeneratorKind::SquareWithHole | GeneratorKind::CubeWithTunnel | GeneratorKind::CubeWithCavity => 3,
            _ => 1,
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown mesh generator `{s}`")))
    }
}

/// Generates a suite mesh on the unit square or cube with `resolution` cells per axis.
///
/// Holed domains remove the central block of grid cells spanning indices
/// `a..resolution−a` with `a = max(1, resolution / 4)` and need `resolution ≥ 3`.
pub fn generate_mesh(kind: GeneratorKind, resolution: usize) -> Result<SimplicialComplex> {
    if resolution < kind.min_resolution() {
        return Err(Error::Invalid(format!(
            "resolution {resolution} is too small for `{}` (minimum {})",
            kind.name(),
            kind.min_resolution()
        )));
    }
    let n = resolution;
    let a = (n / 4).max(1);
    let in_hole = |i: usize| i >= a && i < n - a;
    match kind {
        GeneratorKind::Square => grid_2d(n, false, |_, _| true),
        GeneratorKind::CrissCrossSquare => grid_2d(n, true, |_, _| true),
        GeneratorKind::SquareWithHole => grid_2d(n, false, |i, j| !(in_hole(i) && in_hole(j))),
        GeneratorKind::Cube => grid_3d(n, |_, _, _| true),
        GeneratorKind::CubeWithTunnel => grid_3d(n, |i, j, _| !(in_hole(i) && in_hole(j))),
        GeneratorKind::CubeWithCavity => grid_3d(n, |i, j, k| !(in_hole(i) && in_hole(j) && in_hole(k))),
    }
}

fn compact(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<SimplicialComplex> {
    let mut used = vec![false; vertices.len()];
    for c in &cells {
        for &v in c {
            used[v] = true;
        }
    }
    let mut new_index = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for (v, p) in vertices.into_iter().enumerate() {
        if used[v] {
            new_index[v] = kept.len();
            kept.push(p);
        }
    }
    let cells = cells.into_iter().map(|c| c.into_iter().map(|v| new_index[v]).collect()).collect();
    SimplicialComplex::from_cells(dim, kept, cells)
}

fn grid_2d(n: usize, criss_cross: bool, keep: impl Fn(usize, usize) -> bool) -> Result<SimplicialComplex> {
    let h = n as i64;
    let corner = |i: usize, j: usize| i * (n + 1) + j;
    let mut vertices: Vec<Point> = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            vertices.push(vec![
                Rational::new(BigInt::from(i), BigInt::from(h)),
                Rational::new(BigInt::from(j), BigInt::from(h)),
            ]);
        }
    }
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !keep(i, j) {
                continue;
            }
            let (v00, v10, v11, v01) = (corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1));
            if criss_cross {
                let c = vertices.len();
                vertices.push(vec![
                    Rational::new(BigInt::from(2 * i + 1), BigInt::from(2 * h)),
                    Rational::new(BigInt::from(2 * j + 1), BigInt::from(2 * h)),
                ]);
                cells.extend([vec![v00, v10, c], vec![v10, v11, c], vec![v11, v01, c], vec![v01, v00, c]]);
            } else {
                cells.extend([vec![v00, v10, v11], vec![v00, v11, v01]]);
            }
        }
    }
    compact(2, vertices, cells)
}

fn grid_3d(n: usize, keep: impl Fn(usize, usize, usize) -> bool) -> Result<SimplicialComplex> {
    let h = n as i64;
    let index = |i: usize, j: usize, k: usize| (i * (n + 1) + j) * (n + 1) + k;
    let mut vertices: Vec<Point> = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                vertices.push([i, j, k].iter().map(|&c| Rational::new(BigInt::from(c), BigInt::from(h))).collect());
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if !keep(i, j, k) {
                    continue;
                }
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = vec![index(c[0], c[1], c[2])];
                    for axis in perm {
                        c[axis] += 1;
                        tet.push(index(c[0], c[1], c[2]));
                    }
                    cells.push(tet);
                }
            }
        }
    }
    compact(3, vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SimplicialComplex {
        SimplicialComplex::parse("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\n").unwrap()
    }

    #[test]
    fn single_triangle_counts_and_boundary() {
        let t = triangle();
        assert_eq!(t.counts().total, vec![3, 3, 1]);
        assert_eq!(t.counts().interior, vec![0, 0, 1]);
    }

    #[test]
    fn two_triangle_square_has_one_interior_edge() {
        let m = generate_mesh(GeneratorKind::Square, 1).unwrap();
        assert_eq!(m.num(1), 5);
        assert_eq!(m.interior(1).len(), 1);
    }

    #[test]
    fn out_of_range_vertex_is_topology_error() {
        let err = SimplicialComplex::parse("dim 2\nvertices 4\n0 0\n1 0\n0 1\n1 1\ncells 1\n0 1 9\n").unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn malformed_coordinate_is_parse_error() {
        let err = SimplicialComplex::parse("dim 2\nvertices 3\n0 0\n1 x\n0 1\ncells 1\n0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn zero_volume_cell_is_rejected() {
        let err = SimplicialComplex::parse("dim 2\nvertices 3\n0 0\n1 1\n2 2\ncells 1\n0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn orientation_sign_matches_removed_position() {
        let t = triangle();
        let e01 = t.find(&[0, 1]).unwrap();
        let v0 = t.find(&[0]).unwrap();
        let v1 = t.find(&[1]).unwrap();
        let s = |tau, sig| {
            t.orientation_sign(SimplexId::new(0, tau), SimplexId::new(1, sig), OrientationVariant::Standard).unwrap()
        };
        assert_eq!(s(v1, e01), -1);
        assert_eq!(s(v0, e01), 1);
        let rel =
            t.orientation_sign(SimplexId::new(1, e01), SimplexId::new(2, 0), OrientationVariant::Relative).unwrap();
        assert_eq!(rel, 0);
        let v2 = t.find(&[2]).unwrap();
        assert_eq!(s(v2, e01), 0);
    }

    #[test]
    fn relative_boundary_of_two_triangle_square() {
        let m = generate_mesh(GeneratorKind::Square, 1).unwrap();
        let d2 = m.boundary_matrix(2, OrientationVariant::Relative, 1).unwrap();
        assert_eq!((d2.rows(), d2.cols()), (1, 2));
        // The diagonal sits at the same canonical position in both triangles.
        let vals: BTreeSet<String> = d2.entries().map(|(_, _, v)| v.to_string()).collect();
        assert_eq!(vals, ["1".to_string()].into_iter().collect());
        let single = triangle().boundary_matrix(2, OrientationVariant::Relative, 1).unwrap();
        assert_eq!((single.rows(), single.cols()), (0, 1));
    }

    #[test]
    fn criss_cross_counts() {
        let m = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
        assert_eq!(m.counts().total, vec![5, 8, 4]);
        assert_eq!(m.counts().interior, vec![1, 4, 4]);
    }

    #[test]
    fn kuhn_cube_counts() {
        let m = generate_mesh(GeneratorKind::Cube, 1).unwrap();
        assert_eq!(m.num(0), 8);
        assert_eq!(m.num(3), 6);
        // Euler characteristic of a ball.
        assert_eq!(m.num(0) as i64 - m.num(1) as i64 + m.num(2) as i64 - m.num(3) as i64, 1);
    }

    #[test]
    fn holes_need_enough_resolution() {
        assert!(matches!(generate_mesh(GeneratorKind::SquareWithHole, 2), Err(Error::Invalid(_))));
        assert!(generate_mesh(GeneratorKind::SquareWithHole, 3).is_ok());
    }

    #[test]
    fn input_parity_is_recorded() {
        let m = SimplicialComplex::parse("dim 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n1 0 2\n").unwrap();
        assert_eq!(m.input_parity(0), -1);
        assert_eq!(m.simplex(2, 0), &[0, 1, 2]);
    }

    #[test]
    fn text_roundtrip() {
        let m = generate_mesh(GeneratorKind::CrissCrossSquare, 2).unwrap();
        assert_eq!(SimplicialComplex::parse(&m.to_text()).unwrap(), m);
    }
}
