//! Test fields of the form `c·φ` for a fixed polynomial cutoff `c` and a
//! low-degree field `φ`.
//!
//! Such fields are kept in the expanded form `Σ_α (∂^α c)·f_α`, so that
//! derivatives act on the low-degree factors and never multiply out the
//! cutoff. Integrals reduce to moments of the derivatives of `c`, which are
//! cached per simplex and shared by every field with the same cutoff.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::functionals::Integrator;
use crate::linalg::Rational;
use crate::poly::{Exponent, Linear, Poly};

/// `Σ_α (∂^α c)·f_α` for an implicit cutoff `c`, keyed by the multi-index `α`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Weighted {
    terms: BTreeMap<Exponent, Poly>,
}

impl Weighted {
    /// `c·f`.
    pub fn lift(f: &Poly) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert([0; 3], f.clone());
        }
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Poly)> {
        self.terms.iter()
    }

    fn add_term(&mut self, alpha: Exponent, f: &Poly) {
        if f.is_zero() {
            return;
        }
        let sum = match self.terms.get(&alpha) {
            Some(g) => g + f,
            None => f.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, sum);
        }
    }
}

impl Linear for Weighted {
    fn zero() -> Self {
        Self::default()
    }

    fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, f) in &other.terms {
            out.add_term(*a, f);
        }
        out
    }

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    fn negated(&self) -> Self {
        Self { terms: self.terms.iter().map(|(a, f)| (*a, -f)).collect() }
    }

    fn scaled(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::default();
        }
        Self { terms: self.terms.iter().map(|(a, f)| (*a, f.scale(s))).collect() }
    }

    /// Leibniz rule: `∂_i((∂^α c) f) = (∂^{α+e_i} c) f + (∂^α c) ∂_i f`.
    fn partial(&self, i: usize) -> Self {
        let mut out = Self::default();
        for (a, f) in &self.terms {
            let mut up = *a;
            up[i] += 1;
            out.add_term(up, f);
            out.add_term(*a, &f.deriv(i));
        }
        out
    }
}

/// A cutoff polynomial with cached derivatives, simplex moments of the
/// derivatives and their values at mesh vertices.
#[derive(Debug)]
pub struct Cutoff {
    poly: Poly,
    derivs: RefCell<HashMap<Exponent, Poly>>,
    moments: RefCell<HashMap<(usize, usize, Exponent, Exponent), Rational>>,
    values: RefCell<HashMap<(Exponent, usize), Rational>>,
}

impl Cutoff {
    pub fn new(poly: Poly) -> Self {
        Self { poly, derivs: RefCell::default(), moments: RefCell::default(), values: RefCell::default() }
    }

    /// The constant cutoff `1`.
    pub fn one() -> Self {
        Self::new(Poly::constant(Rational::from_integer(1.into())))
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    /// `∂^α c`.
    pub fn deriv(&self, alpha: Exponent) -> Poly {
        if let Some(p) = self.derivs.borrow().get(&alpha) {
            return p.clone();
        }
        let mut p = self.poly.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                p = p.deriv(i);
            }
        }
        self.derivs.borrow_mut().insert(alpha, p.clone());
        p
    }

    /// `∫_σ (∂^α c)·x^e` over simplex `i` of dimension `k`, parametric measure.
    fn moment(&self, integ: &mut Integrator<'_>, k: usize, i: usize, alpha: Exponent, e: Exponent) -> Rational {
        if let Some(v) = self.moments.borrow().get(&(k, i, alpha, e)) {
            return v.clone();
        }
        let v = integ.simplex_shifted(k, i, &self.deriv(alpha), e);
        self.moments.borrow_mut().insert((k, i, alpha, e), v.clone());
        v
    }

    /// `∫_σ w·x^e` over simplex `i` of dimension `k`, parametric measure.
    pub fn integrate(&self, integ: &mut Integrator<'_>, w: &Weighted, k: usize, i: usize, e: Exponent) -> Rational {
        let mut acc = Rational::zero();
        for (alpha, f) in w.terms() {
            if self.deriv(*alpha).is_zero() {
                continue;
            }
            for (t, coef) in f.terms() {
                let shifted = [t[0] + e[0], t[1] + e[1], t[2] + e[2]];
                acc += coef * self.moment(integ, k, i, *alpha, shifted);
            }
        }
        acc
    }

    /// `w` at mesh vertex `v`.
    pub fn eval(&self, integ: &Integrator<'_>, w: &Weighted, v: usize) -> Rational {
        let x = integ.mesh().vertex(v);
        let mut acc = Rational::zero();
        for (alpha, f) in w.terms() {
            let key = (*alpha, v);
            let cached = self.values.borrow().get(&key).cloned();
            let c = match cached {
                Some(c) => c,
                None => {
                    let c = self.deriv(*alpha).eval(x);
                    self.values.borrow_mut().insert(key, c.clone());
                    c
                }
            };
            if !c.is_zero() {
                acc += c * f.eval(x);
            }
        }
        acc
    }

    /// The polynomial `Σ_α (∂^α c)·f_α`.
    pub fn expand(&self, w: &Weighted) -> Poly {
        w.terms().fold(Poly::zero(), |acc, (alpha, f)| &acc + &(&self.deriv(*alpha) * f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;

    fn sample() -> (Poly, Poly) {
        let x = Poly::var(0);
        let y = Poly::var(1);
        let z = Poly::var(2);
        let l = &(&x - &Poly::constant(q(1))) * &y;
        let c = &l * &l;
        let f = &(&(&x * &z) + &y.scale(&q(3))) - &Poly::constant(q(2));
        (c, f)
    }

    #[test]
    fn derivatives_match_the_expanded_product() {
        let (c, f) = sample();
        let cut = Cutoff::new(c.clone());
        let w = Weighted::lift(&f);
        let prod = &c * &f;
        assert_eq!(cut.expand(&w), prod);
        for i in 0..3 {
            assert_eq!(cut.expand(&w.partial(i)), prod.deriv(i));
            for j in 0..3 {
                assert_eq!(cut.expand(&w.partial(i).partial(j)), prod.deriv(i).deriv(j));
            }
        }
    }

    #[test]
    fn linear_operations_commute_with_expansion() {
        let (c, f) = sample();
        let cut = Cutoff::new(c);
        let a = Weighted::lift(&f).partial(0);
        let b = Weighted::lift(&Poly::var(1)).partial(2);
        let s = q(5) / q(7);
        assert_eq!(cut.expand(&a.plus(&b)), &cut.expand(&a) + &cut.expand(&b));
        assert_eq!(cut.expand(&a.minus(&b)), &cut.expand(&a) - &cut.expand(&b));
        assert_eq!(cut.expand(&a.scaled(&s)), cut.expand(&a).scale(&s));
        assert_eq!(cut.expand(&a.negated()), -&cut.expand(&a));
    }
}
