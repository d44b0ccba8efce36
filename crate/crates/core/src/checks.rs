//! Seeded randomized checks of the product structure on forms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::Result;
use crate::forms::{Form, FormsWindow};
use crate::scalar::Scalar;

/// Sparse random form of degree `n` with small integer coefficients.
pub fn random_form<S: Scalar>(window: &FormsWindow<S>, n: usize, rng: &mut impl Rng) -> Form<S> {
    let dim = window.dim(n);
    let mut coeffs = vec![S::zero(); dim];
    if dim > 0 {
        for _ in 0..rng.random_range(1..=3) {
            let i = rng.random_range(0..dim);
            coeffs[i] = coeffs[i].plus(&S::from_i64(rng.random_range(-3..=3)));
        }
    }
    Form::homogeneous(n, coeffs)
}

pub fn random_element<S: Scalar>(dim: usize, rng: &mut impl Rng) -> AlgebraElement<S> {
    AlgebraElement::new((0..dim).map(|_| S::from_i64(rng.random_range(-3..=3))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductChecks {
    pub associativity_triples: usize,
    pub associativity_max_residual: f64,
    pub bracket_checks: usize,
    pub bracket_max_residual: f64,
    pub leibniz_checks: usize,
    pub leibniz_max_residual: f64,
}

impl ProductChecks {
    pub fn all_zero(&self) -> bool {
        self.associativity_max_residual == 0.0 && self.bracket_max_residual == 0.0 && self.leibniz_max_residual == 0.0
    }

    pub fn max_residual(&self) -> f64 {
        self.associativity_max_residual.max(self.bracket_max_residual).max(self.leibniz_max_residual)
    }
}

fn random_degrees(n_max: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    loop {
        let d: Vec<usize> = (0..parts).map(|_| rng.random_range(0..=n_max)).collect();
        if d.iter().sum::<usize>() <= n_max {
            return d;
        }
    }
}

/// Associativity `(uv)w = u(vw)`, the bracket identity
/// `b(ω da) = (−1)^{|ω|}(ωa − aω)` and the graded Leibniz rule
/// `d(uv) = (du)v + (−1)^{|u|} u dv` on `count` random instances each.
pub fn product_checks<S: Scalar>(window: &FormsWindow<S>, count: usize, rng: &mut impl Rng) -> Result<ProductChecks> {
    let n_max = window.n_max();
    let dim = window.algebra().dim();
    let mut assoc = 0.0f64;
    for _ in 0..count {
        let deg = random_degrees(n_max, 3, rng);
        let (u, v, w) = (random_form(window, deg[0], rng), random_form(window, deg[1], rng), random_form(window, deg[2], rng));
        let left = window.multiply_forms(&window.multiply_forms(&u, &v)?, &w)?;
        let right = window.multiply_forms(&u, &window.multiply_forms(&v, &w)?)?;
        assoc = assoc.max(left.sub(&right).max_abs());
    }
    let mut bracket = 0.0f64;
    let mut bracket_checks = 0;
    if n_max >= 1 {
        for _ in 0..count {
            let n = rng.random_range(0..n_max);
            let omega = random_form(window, n, rng);
            let a = Form::homogeneous(0, random_element::<S>(dim, rng).coeffs);
            let lhs = window.apply_b(&window.multiply_forms(&omega, &window.apply_d(&a)?)?)?;
            let comm = window.multiply_forms(&omega, &a)?.sub(&window.multiply_forms(&a, &omega)?);
            let rhs = if n % 2 == 0 { comm } else { comm.scale(&S::from_i64(-1)) };
            bracket = bracket.max(lhs.sub(&rhs).max_abs());
            bracket_checks += 1;
        }
    }
    let mut leibniz = 0.0f64;
    let mut leibniz_checks = 0;
    if n_max >= 1 {
        for _ in 0..count {
            let deg = random_degrees(n_max - 1, 2, rng);
            let (u, v) = (random_form(window, deg[0], rng), random_form(window, deg[1], rng));
            let lhs = window.apply_d(&window.multiply_forms(&u, &v)?)?;
            let du_v = window.multiply_forms(&window.apply_d(&u)?, &v)?;
            let u_dv = window.multiply_forms(&u, &window.apply_d(&v)?)?;
            let sign = if deg[0].is_multiple_of(2) { S::one() } else { S::from_i64(-1) };
            leibniz = leibniz.max(lhs.sub(&du_v.add(&u_dv.scale(&sign))).max_abs());
            leibniz_checks += 1;
        }
    }
    Ok(ProductChecks {
        associativity_triples: count,
        associativity_max_residual: assoc,
        bracket_checks,
        bracket_max_residual: bracket,
        leibniz_checks,
        leibniz_max_residual: leibniz,
    })
}
