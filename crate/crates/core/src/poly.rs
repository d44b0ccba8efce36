//! Dense univariate polynomials over the rationals, coefficients stored
//! lowest degree first.

use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn one() -> Self {
        Poly(vec![BigRational::one()])
    }

    /// `x^n − 1`.
    pub fn x_pow_minus_one(n: usize) -> Self {
        let mut c = vec![BigRational::zero(); n + 1];
        c[0] = -BigRational::one();
        c[n] += BigRational::one();
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Self::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Self::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut c = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.0[dd].clone();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (Poly(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let coef = &rem[i + dd] / &lead;
            if !coef.is_zero() {
                for (j, dv) in divisor.0.iter().enumerate() {
                    rem[i + j] -= &coef * dv;
                }
            }
            quot[i] = coef;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Returns `(g, s, t)` with `s·self + t·other = g = gcd`, `g` monic.
    pub fn ext_gcd(&self, other: &Self) -> (Self, Self, Self) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly(Vec::new()));
        let (mut t0, mut t1) = (Poly(Vec::new()), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if let Some(d) = r0.degree() {
            let inv = BigRational::one() / &r0.0[d];
            let scale = Poly(vec![inv]);
            return (r0.mul(&scale), s0.mul(&scale), t0.mul(&scale));
        }
        (r0, s0, t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let a = Poly::from_i64(&[-1, 0, 0, 0, 1]); // x^4 - 1
        let b = Poly::from_i64(&[1, -2, 1]); // (x-1)^2
        let (q, r) = a.div_rem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn bezout_coefficients() {
        let a = Poly::from_i64(&[1, -2, 1]);
        let b = Poly::from_i64(&[1, 1, 1]); // x^2 + x + 1
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(g, Poly::one());
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }

    #[test]
    fn evaluation() {
        let p = Poly::x_pow_minus_one(3);
        assert_eq!(p.eval(&BigRational::from_integer(2.into())), BigRational::from_integer(7.into()));
    }
}
