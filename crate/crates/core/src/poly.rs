//! Sparse multivariate polynomials with rational coefficients and exact
//! integration over simplices.
//!
//! Polynomials live in at most three variables `x, y, z`. Integrals over a
//! `k`-simplex use the parametric measure of the reference simplex (total
//! mass `1/k!`); cell integrals in Lebesgue measure scale that by `|det J|`.
//! Cached moments come from a closed-form generating function; the
//! Grundmann–Möller rules, with rational nodes and weights exact up to degree
//! `2s+1`, give an independent direct integrator.

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::geometry::Point;
use crate::linalg::Rational;

/// Exponent triple of a monomial `x^a y^b z^c`.
pub type Exponent = [u8; 3];

/// Polynomial in up to three variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Exponent, Rational>,
}

/// Vector-valued polynomial field.
pub type VecField = Vec<Poly>;

/// Matrix-valued polynomial field, row-major.
pub type MatField = Vec<Vec<Poly>>;

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(e: Exponent, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// The coordinate function `x_i`.
    pub fn var(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::monomial(e, Rational::one())
    }

    /// `Σ gᵢ xᵢ + c`.
    pub fn affine(grad: &[Rational], c: Rational) -> Self {
        let mut p = Self::constant(c);
        for (i, g) in grad.iter().enumerate() {
            p = &p + &Self::var(i).scale(g);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: Exponent) -> Rational {
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&a| a as usize).sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect() }
    }

    /// Partial derivative with respect to `x_i`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = *e;
                f[i] -= 1;
                terms.insert(f, c * Rational::from_integer(BigInt::from(e[i])));
            }
        }
        Self { terms }
    }

    /// Value at a point with one coordinate per used variable.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let maxdeg = self.degree();
        let powers: Vec<Vec<Rational>> = x.iter().map(|xi| powers_of(xi, maxdeg)).collect();
        self.eval_with_powers(&powers)
    }

    fn eval_with_powers(&self, powers: &[Vec<Rational>]) -> Rational {
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &a) in e.iter().enumerate() {
                if a > 0 {
                    t *= &powers[i][a as usize];
                }
            }
            acc += t;
        }
        acc
    }

    fn add_term(&mut self, e: Exponent, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }
}

fn powers_of(x: &Rational, n: usize) -> Vec<Rational> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(Rational::one());
    for k in 1..=n {
        let next = &p[k - 1] * x;
        p.push(next);
    }
    p
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// Scalars of a field algebra: closed under the linear operations and
/// partial derivatives used by the differential operators below.
pub trait Linear: Clone {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, s: &Rational) -> Self;
    fn partial(&self, i: usize) -> Self;
}

impl Linear for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, s: &Rational) -> Self {
        self.scale(s)
    }
    fn partial(&self, i: usize) -> Self {
        self.deriv(i)
    }
}

/// Sum of polynomials.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Poly>) -> Poly {
    items.into_iter().fold(Poly::zero(), |acc, p| &acc + p)
}

fn total<P: Linear>(items: impl IntoIterator<Item = P>) -> P {
    items.into_iter().fold(P::zero(), |acc, p| acc.plus(&p))
}

/// Constant matrix field.
pub fn const_matrix(m: &[Vec<Rational>]) -> MatField {
    m.iter().map(|r| r.iter().map(|c| Poly::constant(c.clone())).collect()).collect()
}

/// Constant vector field.
pub fn const_vector(v: &[Rational]) -> VecField {
    v.iter().map(|c| Poly::constant(c.clone())).collect()
}

/// Gradient of a scalar field in `n` variables.
pub fn grad<P: Linear>(p: &P, n: usize) -> Vec<P> {
    (0..n).map(|i| p.partial(i)).collect()
}

/// Jacobian `(∇u)_{ij} = ∂_j u_i`.
pub fn jacobian<P: Linear>(u: &[P]) -> Vec<Vec<P>> {
    let n = u.len();
    u.iter().map(|ui| (0..n).map(|j| ui.partial(j)).collect()).collect()
}

/// Row-wise divergence `(div σ)_i = Σ_j ∂_j σ_ij`.
pub fn div_rows<P: Linear>(s: &[Vec<P>]) -> Vec<P> {
    s.iter().map(|r| total(r.iter().enumerate().map(|(j, p)| p.partial(j)))).collect()
}

/// Column-wise divergence `(div σ)_j = Σ_i ∂_i σ_ij`.
pub fn div_cols<P: Linear>(s: &[Vec<P>]) -> Vec<P> {
    let n = s.len();
    (0..n).map(|j| total((0..n).map(|i| s[i][j].partial(i)))).collect()
}

/// Divergence of a vector field.
pub fn div<P: Linear>(v: &[P]) -> P {
    total(v.iter().enumerate().map(|(i, p)| p.partial(i)))
}

/// `Σ_ij ∂_i ∂_j σ_ij`.
pub fn divdiv<P: Linear>(s: &[Vec<P>]) -> P {
    let n = s.len();
    total((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| s[i][j].partial(i).partial(j)))
}

/// Hessian matrix of a scalar field.
pub fn hessian<P: Linear>(p: &P, n: usize) -> Vec<Vec<P>> {
    (0..n).map(|i| (0..n).map(|j| p.partial(i).partial(j)).collect()).collect()
}

/// Curl of a 3D vector field.
pub fn curl_vec3<P: Linear>(v: &[P]) -> Vec<P> {
    vec![
        v[2].partial(1).minus(&v[1].partial(2)),
        v[0].partial(2).minus(&v[2].partial(0)),
        v[1].partial(0).minus(&v[0].partial(1)),
    ]
}

/// Row-wise curl of a 3D matrix field.
pub fn curl_rows<P: Linear>(s: &[Vec<P>]) -> Vec<Vec<P>> {
    s.iter().map(|r| curl_vec3(r)).collect()
}

/// Row-wise 2D rot of a matrix field: `(rot σ)_i = ∂_x σ_i2 − ∂_y σ_i1`.
pub fn rot_rows<P: Linear>(s: &[Vec<P>]) -> Vec<P> {
    s.iter().map(|r| r[1].partial(0).minus(&r[0].partial(1))).collect()
}

/// 2D curl of a vector field: row `i` is `(−∂_y φ_i, ∂_x φ_i)`.
pub fn curl_2d<P: Linear>(v: &[P]) -> Vec<Vec<P>> {
    v.iter().map(|p| vec![p.partial(1).negated(), p.partial(0)]).collect()
}

pub fn transpose<P: Linear>(s: &[Vec<P>]) -> Vec<Vec<P>> {
    let n = s.len();
    (0..n).map(|i| (0..n).map(|j| s[j][i].clone()).collect()).collect()
}

pub fn sym<P: Linear>(s: &[Vec<P>]) -> Vec<Vec<P>> {
    let half = Rational::new(1.into(), 2.into());
    let n = s.len();
    (0..n).map(|i| (0..n).map(|j| s[i][j].plus(&s[j][i]).scaled(&half)).collect()).collect()
}

pub fn trace<P: Linear>(s: &[Vec<P>]) -> P {
    total((0..s.len()).map(|i| s[i][i].clone()))
}

/// Trace-free part `σ − tr(σ)/n · I`.
pub fn dev<P: Linear>(s: &[Vec<P>]) -> Vec<Vec<P>> {
    let n = s.len();
    let t = trace(s).scaled(&Rational::new(1.into(), (n as i64).into()));
    (0..n).map(|i| (0..n).map(|j| if i == j { s[i][j].minus(&t) } else { s[i][j].clone() }).collect()).collect()
}

/// `Σ_ij a_ij B_ij` for a constant matrix `a` and a matrix field `B`.
pub fn contract_const(a: &[Vec<Rational>], b: &MatField) -> Poly {
    let mut acc = Poly::zero();
    for (i, row) in a.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &b[i][j].scale(c);
            }
        }
    }
    acc
}

/// `Σ_ij A_ij B_ij` for matrix fields.
pub fn contract(a: &MatField, b: &MatField) -> Poly {
    let mut acc = Poly::zero();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            if !x.is_zero() && !y.is_zero() {
                acc = &acc + &(x * y);
            }
        }
    }
    acc
}

/// `u · M · v` for constant vectors and a matrix field.
pub fn bilinear(u: &[Rational], m: &MatField, v: &[Rational]) -> Poly {
    let mut acc = Poly::zero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            let c = ui * vj;
            if !c.is_zero() {
                acc = &acc + &m[i][j].scale(&c);
            }
        }
    }
    acc
}

/// `Σ cᵢ vᵢ` for a constant vector and a vector field.
pub fn dot_const(c: &[Rational], v: &[Poly]) -> Poly {
    let mut acc = Poly::zero();
    for (ci, vi) in c.iter().zip(v) {
        if !ci.is_zero() {
            acc = &acc + &vi.scale(ci);
        }
    }
    acc
}

/// Field product `Σ uᵢ vᵢ`.
pub fn dot_fields(u: &[Poly], v: &[Poly]) -> Poly {
    let mut acc = Poly::zero();
    for (a, b) in u.iter().zip(v) {
        if !a.is_zero() && !b.is_zero() {
            acc = &acc + &(a * b);
        }
    }
    acc
}

/// Evaluates a matrix field at a point.
pub fn eval_matrix(m: &MatField, x: &[Rational]) -> Vec<Vec<Rational>> {
    m.iter().map(|r| r.iter().map(|p| p.eval(x)).collect()).collect()
}

/// Grundmann–Möller rule of index `s` on the reference `k`-simplex:
/// weights and barycentric nodes, exact up to degree `2s+1`.
pub fn grundmann_moeller(k: usize, s: usize) -> Vec<(Rational, Vec<Rational>)> {
    let d = 2 * s + 1;
    let mut out = Vec::new();
    let fact = |n: usize| -> BigInt { (1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b)) };
    for i in 0..=s {
        let denom_pt = (d + k - 2 * i) as i64;
        let num = BigInt::from(denom_pt).pow(d as u32);
        let den = BigInt::from(2).pow(2 * s as u32) * fact(i) * fact(d + k - i);
        let mut w = Rational::new(num, den);
        if i % 2 == 1 {
            w = -w;
        }
        for beta in compositions(s - i, k + 1) {
            let bary =
                beta.iter().map(|&b| Rational::new(BigInt::from(2 * b as i64 + 1), BigInt::from(denom_pt))).collect();
            out.push((w.clone(), bary));
        }
    }
    out
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Integral of `p` over the simplex with the given vertices, parametric measure.
pub fn integrate_simplex(p: &Poly, pts: &[&Point]) -> Rational {
    if p.is_zero() {
        return Rational::zero();
    }
    let k = pts.len() - 1;
    let s = p.degree() / 2;
    let mut acc = Rational::zero();
    for (w, bary) in grundmann_moeller(k, s) {
        let x = barycentric_point(pts, &bary);
        acc += w * p.eval(&x);
    }
    acc
}

fn barycentric_point(pts: &[&Point], bary: &[Rational]) -> Point {
    let n = pts[0].len();
    (0..n).map(|c| pts.iter().zip(bary).fold(Rational::zero(), |acc, (p, b)| acc + &p[c] * b)).collect()
}

/// Closed-form integral of `t^α` over the reference `k`-simplex, `α!/(k+|α|)!`.
pub fn reference_monomial_integral(alpha: &[usize]) -> Rational {
    let k = alpha.len();
    let fact = |n: usize| -> BigInt { (1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b)) };
    let num = alpha.iter().fold(BigInt::one(), |acc, &a| acc * fact(a));
    Rational::new(num, fact(k + alpha.iter().sum::<usize>()))
}

/// Monomial moments of one simplex, extended on demand.
#[derive(Clone, Debug, Default)]
struct Moments {
    degree: usize,
    /// Common denominator of all moments.
    denom: BigInt,
    /// Numerators indexed by [`Moments::slot`].
    numer: Vec<BigInt>,
}

impl Moments {
    fn slot(&self, e: Exponent) -> usize {
        let d = self.degree + 1;
        (e[0] as usize * d + e[1] as usize) * d + e[2] as usize
    }
}

/// Integrates polynomials over simplices of a fixed point set, caching
/// monomial moments per simplex so that each integral is a dot product.
#[derive(Debug, Default)]
pub struct MomentCache {
    cache: HashMap<Vec<usize>, Moments>,
}

impl MomentCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `∫_σ p` in the parametric measure of the simplex with vertex ids `key`
    /// and coordinates `pts`.
    pub fn integrate(&mut self, key: &[usize], pts: &[&Point], p: &Poly) -> Rational {
        self.integrate_shifted(key, pts, p, [0; 3])
    }

    /// `∫_σ p·x^shift`, without forming the product.
    pub fn integrate_shifted(&mut self, key: &[usize], pts: &[&Point], p: &Poly, shift: Exponent) -> Rational {
        if p.is_zero() {
            return Rational::zero();
        }
        let need = p.degree() + shift.iter().map(|&a| a as usize).sum::<usize>();
        let entry = self.cache.entry(key.to_vec()).or_default();
        if entry.numer.is_empty() || entry.degree < need {
            *entry = compute_moments(pts, need.max(entry.degree + 4).max(6));
        }
        let lcm =
            p.terms().fold(BigInt::one(), |acc, (_, c)| if c.denom().is_one() { acc } else { acc.lcm(c.denom()) });
        let mut acc = BigInt::zero();
        for (e, c) in p.terms() {
            let shifted = [e[0] + shift[0], e[1] + shift[1], e[2] + shift[2]];
            let m = &entry.numer[entry.slot(shifted)];
            if lcm.is_one() {
                acc += c.numer() * m;
            } else {
                acc += c.numer() * (&lcm / c.denom()) * m;
            }
        }
        Rational::new(acc, &entry.denom * lcm)
    }
}

/// Exact monomial moments of a simplex up to a total degree.
///
/// With integer vertices `w_a = L·v_a` the moments satisfy
/// `∫_σ x^α = α!/(|α|+k)! · [ξ^α] Π_a 1/(1 − ξ·w_a) / L^{|α|}`, where the
/// bracket extracts a coefficient of the product of geometric series.
fn compute_moments(pts: &[&Point], degree: usize) -> Moments {
    let k = pts.len() - 1;
    let n = pts[0].len();
    let scale =
        pts.iter().flat_map(|p| p.iter()).fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<Vec<BigInt>> = pts
        .iter()
        .map(|p| p.iter().map(|c| (c * Rational::from_integer(scale.clone())).to_integer()).collect())
        .collect();
    let mut exps = exponents_up_to(n, degree);
    exps.sort_by_key(|e| (e.iter().map(|&a| a as usize).sum::<usize>(), *e));
    let index: HashMap<Exponent, usize> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let deg = |e: &Exponent| e.iter().map(|&a| a as usize).sum::<usize>();
    // Start of each degree block in `exps`.
    let mut block = vec![0usize; degree + 2];
    for d in 0..=degree {
        block[d + 1] = block[d] + exps.iter().filter(|e| deg(e) == d).count();
    }
    let series = |w: &[BigInt]| -> Vec<BigInt> {
        let mut c = vec![BigInt::zero(); exps.len()];
        c[0] = BigInt::one();
        for (idx, e) in exps.iter().enumerate().skip(1) {
            let mut acc = BigInt::zero();
            for i in 0..n {
                if e[i] > 0 && !w[i].is_zero() {
                    let mut prev = *e;
                    prev[i] -= 1;
                    acc += &c[index[&prev]] * &w[i];
                }
            }
            c[idx] = acc;
        }
        c
    };
    let mut product = series(&ints[0]);
    for w in &ints[1..] {
        let g = series(w);
        let mut out = vec![BigInt::zero(); exps.len()];
        for (ia, ea) in exps.iter().enumerate() {
            if product[ia].is_zero() {
                continue;
            }
            let room = degree - deg(ea);
            for (ib, eb) in exps[..block[room + 1]].iter().enumerate() {
                if g[ib].is_zero() {
                    continue;
                }
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out[index[&e]] += &product[ia] * &g[ib];
            }
        }
        product = out;
    }
    let fact = |m: usize| -> BigInt { (1..=m).fold(BigInt::one(), |a, b| a * BigInt::from(b)) };
    // Moment `e` is `c·e!/(|e|+k)!/scale^|e|`; bring all over `(degree+k)!·scale^degree`.
    let denom = fact(degree + k) * scale.pow(degree as u32);
    let mut moments = Moments { degree, denom, numer: vec![BigInt::zero(); (degree + 1).pow(3)] };
    for (e, c) in exps.iter().zip(product) {
        let d = deg(e);
        let num = e.iter().fold(c, |acc, &a| acc * fact(a as usize));
        let lift = (d + k + 1..=degree + k).fold(BigInt::one(), |a, b| a * BigInt::from(b));
        let slot = moments.slot(*e);
        moments.numer[slot] = num * lift * scale.pow((degree - d) as u32);
    }
    moments
}

/// All exponents in `n ≤ 3` variables with total degree at most `degree`.
pub fn exponents_up_to(n: usize, degree: usize) -> Vec<Exponent> {
    let mut out = Vec::new();
    let d = degree as u8;
    for a in 0..=d {
        for b in 0..=(if n > 1 { d - a } else { 0 }) {
            for c in 0..=(if n > 2 { d - a - b } else { 0 }) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// True iff the polynomial is a constant (possibly zero).
pub fn is_constant(p: &Poly) -> bool {
    p.terms().all(|(e, _)| *e == [0, 0, 0])
}

/// Absolute value helper for signed rationals.
pub fn abs(r: &Rational) -> Rational {
    r.abs()
}
