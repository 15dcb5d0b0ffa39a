//! Exact vector geometry and the direction payloads attached to simplices.
//!
//! Payload vectors are never normalized: `t_e = x₂ − x₁`, the 2D edge normal
//! is `t_e^⊥ = [−t_y, t_x]` and the 3D face normal is the cross product of
//! two edge vectors. Distributions on a `k`-simplex integrate against the
//! parametric measure of the reference simplex, so an unnormalized payload
//! absorbs exactly the Jacobian of the surface measure.

use num_traits::{One, Signed, Zero};

use crate::linalg::{dense, Rational};
use crate::mesh::SimplicialComplex;
use crate::{Error, Result};

/// A point or vector with exact coordinates.
pub type Point = Vec<Rational>;

pub fn sub(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Point {
    a.iter().map(|x| x * s).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn cross(a: &[Rational], b: &[Rational]) -> Point {
    vec![&a[1] * &b[2] - &a[2] * &b[1], &a[2] * &b[0] - &a[0] * &b[2], &a[0] * &b[1] - &a[1] * &b[0]]
}

/// Rotation by +90° in the plane: `[x, y]^⊥ = [−y, x]`.
pub fn perp(a: &[Rational]) -> Point {
    vec![-a[1].clone(), a[0].clone()]
}

/// `a ⊗ b` as a row-major matrix.
pub fn outer(a: &[Rational], b: &[Rational]) -> Vec<Vec<Rational>> {
    a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect()
}

/// Determinant of a small square matrix by cofactor expansion.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    match m.len() {
        0 => Rational::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => (0..n).fold(Rational::zero(), |acc, j| {
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                acc + term
            } else {
                acc - term
            }
        }),
    }
}

/// Determinant of the edge matrix `[p₁ − p₀, …, pₙ − p₀]` of a full-dimensional simplex.
pub fn simplex_det(pts: &[&Point]) -> Rational {
    let rows: Vec<Point> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    det(&rows)
}

/// Lebesgue volume of a full-dimensional simplex.
pub fn simplex_volume(pts: &[&Point]) -> Rational {
    let n = pts.len() - 1;
    let fact: i64 = (1..=n as i64).product();
    simplex_det(pts).abs() / Rational::from_integer(fact.into())
}

/// Tangent `t_e = x₂ − x₁` of edge `e`.
pub fn tangent(m: &SimplicialComplex, e: usize) -> Point {
    let s = m.simplex(1, e);
    sub(m.vertex(s[1]), m.vertex(s[0]))
}

/// Unnormalized normal of a facet: `t_e^⊥` in 2D, `(x₂−x₁)×(x₃−x₁)` in 3D.
pub fn facet_normal(m: &SimplicialComplex, f: usize) -> Point {
    facet_normal_of(&m.points(m.dim() - 1, f))
}

/// The two normal-plane payloads `n_{e,+}`, `n_{e,−}` of a 3D edge.
pub fn edge_normals(m: &SimplicialComplex, e: usize) -> [Point; 2] {
    normal_pair(&tangent(m, e))
}

/// `n₊ = t × a` for the first coordinate axis `a` not parallel to `t`, and
/// `n₋ = t × n₊`.
pub fn normal_pair(t: &[Rational]) -> [Point; 2] {
    for axis in 0..3 {
        let mut a = vec![Rational::zero(); 3];
        a[axis] = Rational::one();
        let np = cross(t, &a);
        if np.iter().any(|c| !c.is_zero()) {
            let nm = cross(t, &np);
            return [np, nm];
        }
    }
    unreachable!("edge of a valid complex has nonzero tangent")
}

/// Unnormalized normal of a facet given by its vertices in canonical order.
pub fn facet_normal_of(pts: &[&Point]) -> Point {
    if pts.len() == 2 {
        perp(&sub(pts[1], pts[0]))
    } else {
        cross(&sub(pts[1], pts[0]), &sub(pts[2], pts[0]))
    }
}

/// Sign of `n_f · ν` where `ν` is the outward normal of `cell` on its facet `f`.
pub fn outward_sign(m: &SimplicialComplex, f: usize, cell: usize) -> i32 {
    let d = m.dim();
    let facet = m.simplex(d - 1, f);
    let opposite = m.simplex(d, cell).iter().copied().find(|v| !facet.contains(v)).expect("facet of the cell");
    let s = dot(&facet_normal(m, f), &sub(m.vertex(facet[0]), m.vertex(opposite)));
    if s.is_positive() {
        1
    } else {
        -1
    }
}

/// Gradients of the barycentric coordinates of a top cell, in canonical vertex order.
pub fn barycentric_gradients(m: &SimplicialComplex, cell: usize) -> Result<Vec<Point>> {
    barycentric_gradients_of(&m.points(m.dim(), cell))
        .ok_or_else(|| Error::Degenerate(format!("cell {cell} is degenerate")))
}

/// Gradients of the barycentric coordinates of a full-dimensional simplex.
pub fn barycentric_gradients_of(pts: &[&Point]) -> Option<Vec<Point>> {
    let d = pts.len() - 1;
    let jac: Vec<Vec<Rational>> = (0..d).map(|r| (0..d).map(|c| &pts[c + 1][r] - &pts[0][r]).collect()).collect();
    let mut grads = dense::inverse(&jac)?;
    let g0: Point = (0..d).map(|c| -grads.iter().fold(Rational::zero(), |acc, g| acc + &g[c])).collect();
    grads.insert(0, g0);
    Some(grads)
}

/// Expresses `v` as `a·u + b·w` exactly; errors when `u`, `w` do not span `v`.
pub fn resolve_in_pair(v: &[Rational], u: &[Rational], w: &[Rational]) -> Result<(Rational, Rational)> {
    let g = vec![vec![dot(u, u), dot(u, w)], vec![dot(w, u), dot(w, w)]];
    let rhs = vec![dot(u, v), dot(w, v)];
    let sol = dense::solve(&g, &rhs).ok_or_else(|| Error::Assembly("payload pair is linearly dependent".into()))?;
    let recon = add(&scale(u, &sol[0]), &scale(w, &sol[1]));
    if recon != v {
        return Err(Error::Assembly("vector is not in the span of the payload pair".into()));
    }
    Ok((sol[0].clone(), sol[1].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::mesh::{generate_mesh, GeneratorKind};

    #[test]
    fn reference_tet_outward_relation() {
        let m = SimplicialComplex::parse("dim 3\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ncells 1\n0 1 2 3\n").unwrap();
        let f = m.find(&[0, 1, 2]).unwrap();
        assert_eq!(facet_normal(&m, f), vec![q(0), q(0), q(1)]);
        assert_eq!(outward_sign(&m, f, 0), -1);
    }

    #[test]
    fn edge_normals_span_normal_plane() {
        let m = generate_mesh(GeneratorKind::Cube, 1).unwrap();
        for e in 0..m.num(1) {
            let t = tangent(&m, e);
            let [a, b] = edge_normals(&m, e);
            assert!(dot(&a, &t).is_zero() && dot(&b, &t).is_zero());
            assert!(cross(&a, &b).iter().any(|c| !c.is_zero()));
        }
    }

    #[test]
    fn barycentric_gradients_sum_to_zero() {
        let m = generate_mesh(GeneratorKind::CrissCrossSquare, 1).unwrap();
        for k in 0..m.num(2) {
            let g = barycentric_gradients(&m, k).unwrap();
            let total = g.iter().fold(vec![q(0), q(0)], |acc, v| add(&acc, v));
            assert_eq!(total, vec![q(0), q(0)]);
        }
    }
}
