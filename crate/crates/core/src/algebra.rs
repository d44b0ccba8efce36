//! Finite-dimensional unital associative algebras given by structure
//! constants, and the reduced space `Ā = A / scalars·1`.
//!
//! After construction the unit is always basis vector 0; the remaining basis
//! vectors span the fixed complement used for `Ā`.

use std::path::Path;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{GaussianRational, Scalar, ScalarMode};

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement<S> {
    pub coeffs: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedElement<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> AlgebraElement<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }
}

impl<S: Scalar> ReducedElement<S> {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct Algebra<S> {
    dim: usize,
    labels: Vec<String>,
    /// `c[(i*dim + j)*dim + k]`: coefficient of `e_k` in `e_i·e_j`.
    structure: Vec<S>,
    /// Columns are the internal basis vectors written in the input basis.
    change_of_basis: Mat<S>,
    change_of_basis_inv: Mat<S>,
}

impl<S: Scalar> Algebra<S> {
    /// Validates structure constants and normalizes the basis so that the
    /// unit is basis vector 0.
    pub fn new(labels: Vec<String>, structure_constants: Vec<Vec<Vec<S>>>, unit: Vec<S>) -> Result<Self> {
        let dim = structure_constants.len();
        if dim == 0 {
            return Err(Error::ShapeMismatch("algebra dimension must be at least 1".into()));
        }
        if labels.len() != dim {
            return Err(Error::ShapeMismatch(format!("{} basis labels for dimension {dim}", labels.len())));
        }
        if unit.len() != dim {
            return Err(Error::ShapeMismatch(format!("unit has {} coordinates for dimension {dim}", unit.len())));
        }
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for (i, row) in structure_constants.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::ShapeMismatch(format!("mul[{i}] has length {}", row.len())));
            }
            for (j, v) in row.into_iter().enumerate() {
                if v.len() != dim {
                    return Err(Error::ShapeMismatch(format!("mul[{i}][{j}] has length {}", v.len())));
                }
                flat.extend(v);
            }
        }

        check_associative(dim, &flat)?;
        check_unit(dim, &flat, &unit)?;

        // Pivoted reordering: prefer coordinate 0, otherwise the first nonzero one.
        let pivot = unit.iter().position(|x| !x.is_zero()).ok_or(Error::UnitViolation { basis: 0 })?;
        let mut columns: Vec<Vec<S>> = vec![unit.clone()];
        let mut new_labels = Vec::with_capacity(dim);
        let unit_is_basis = unit.iter().enumerate().all(|(i, x)| if i == pivot { *x == S::one() } else { x.is_zero() });
        new_labels.push(if unit_is_basis { labels[pivot].clone() } else { "1".to_string() });
        for j in (0..dim).filter(|&j| j != pivot) {
            let mut e = vec![S::zero(); dim];
            e[j] = S::one();
            columns.push(e);
            new_labels.push(labels[j].clone());
        }
        let b = Mat::from_columns(dim, &columns);
        let b_inv = b.inverse().ok_or(Error::UnitViolation { basis: pivot })?;

        let mul_input = |x: &[S], y: &[S]| -> Vec<S> { mul_flat(dim, &flat, x, y) };
        let mut structure = Vec::with_capacity(dim * dim * dim);
        for a in 0..dim {
            for c in 0..dim {
                let prod = mul_input(&columns[a], &columns[c]);
                structure.extend(b_inv.mul_vec(&prod));
            }
        }

        Ok(Self { dim, labels: new_labels, structure, change_of_basis: b, change_of_basis_inv: b_inv })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mode(&self) -> ScalarMode {
        S::MODE
    }

    /// Structure constant `c[i][j][k]` in the internal basis.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &S {
        &self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// `e_i · e_j` in the internal basis.
    pub fn basis_product(&self, i: usize, j: usize) -> &[S] {
        let start = (i * self.dim + j) * self.dim;
        &self.structure[start..start + self.dim]
    }

    pub fn unit(&self) -> AlgebraElement<S> {
        self.basis(0)
    }

    pub fn basis(&self, i: usize) -> AlgebraElement<S> {
        let mut v = vec![S::zero(); self.dim];
        v[i] = S::one();
        AlgebraElement::new(v)
    }

    /// Converts coordinates in the basis the algebra was constructed from.
    pub fn from_input_coords(&self, coords: &[S]) -> Result<AlgebraElement<S>> {
        self.check_len(coords.len())?;
        Ok(AlgebraElement::new(self.change_of_basis_inv.mul_vec(coords)))
    }

    pub fn to_input_coords(&self, x: &AlgebraElement<S>) -> Result<Vec<S>> {
        self.check_len(x.coeffs.len())?;
        Ok(self.change_of_basis.mul_vec(&x.coeffs))
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    pub fn multiply(&self, x: &AlgebraElement<S>, y: &AlgebraElement<S>) -> Result<AlgebraElement<S>> {
        self.check_len(x.coeffs.len())?;
        self.check_len(y.coeffs.len())?;
        Ok(AlgebraElement::new(self.mul_coeffs(&x.coeffs, &y.coeffs)))
    }

    pub(crate) fn mul_coeffs(&self, x: &[S], y: &[S]) -> Vec<S> {
        mul_flat(self.dim, &self.structure, x, y)
    }

    /// Projection with kernel the scalar line: drops coordinate 0.
    pub fn reduce(&self, x: &AlgebraElement<S>) -> Result<ReducedElement<S>> {
        self.check_len(x.coeffs.len())?;
        Ok(ReducedElement { coeffs: x.coeffs[1..].to_vec() })
    }

    /// The section `Ā → A` onto the complement basis.
    pub fn lift(&self, r: &ReducedElement<S>) -> Result<AlgebraElement<S>> {
        if r.coeffs.len() + 1 != self.dim {
            return Err(Error::DimMismatch { expected: self.dim - 1, got: r.coeffs.len() });
        }
        let mut v = Vec::with_capacity(self.dim);
        v.push(S::zero());
        v.extend(r.coeffs.iter().cloned());
        Ok(AlgebraElement::new(v))
    }

    /// Re-checks associativity of the internal structure constants.
    pub fn is_associative(&self) -> bool {
        check_associative(self.dim, &self.structure).is_ok()
    }

    /// The same algebra over another scalar mode. Exact data converts
    /// exactly; rational mode keeps only real parts.
    pub fn convert<T: Scalar>(&self) -> Result<Algebra<T>> {
        let d = self.dim;
        let mul = (0..d).map(|i| (0..d).map(|j| self.basis_product(i, j).iter().map(|x| x.convert()).collect()).collect()).collect();
        Algebra::<T>::new(self.labels.clone(), mul, self.unit().coeffs.iter().map(|x| x.convert()).collect())
    }

    pub fn to_file(&self) -> AlgebraFile {
        let d = self.dim;
        AlgebraFile {
            dim: d,
            basis: self.labels.clone(),
            unit: self.unit().coeffs.iter().map(|x| x.to_json()).collect(),
            mul: (0..d).map(|i| (0..d).map(|j| self.basis_product(i, j).iter().map(|x| x.to_json()).collect()).collect()).collect(),
            scalars: Some(S::MODE),
        }
    }

    pub fn from_file(file: &AlgebraFile) -> Result<Self> {
        if file.mul.len() != file.dim || file.basis.len() != file.dim || file.unit.len() != file.dim {
            return Err(Error::ShapeMismatch(format!(
                "dim {} but {} basis labels, {} unit coordinates, {} rows of mul",
                file.dim,
                file.basis.len(),
                file.unit.len(),
                file.mul.len()
            )));
        }
        let unit = file.unit.iter().map(S::from_json).collect::<Result<Vec<_>>>()?;
        let mul = file
            .mul
            .iter()
            .map(|row| row.iter().map(|v| v.iter().map(S::from_json).collect::<Result<Vec<_>>>()).collect())
            .collect::<Result<Vec<Vec<Vec<S>>>>>()?;
        Self::new(file.basis.clone(), mul, unit)
    }

    /// Reads an algebra file in its declared scalar mode (rational when
    /// absent) and converts to `S`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = AlgebraFile::load(path)?;
        match file.scalars.unwrap_or_default() {
            ScalarMode::Rational => Algebra::<BigRational>::from_file(&file)?.convert(),
            ScalarMode::Gaussian => Algebra::<GaussianRational>::from_file(&file)?.convert(),
            ScalarMode::Float => Algebra::<Complex64>::from_file(&file)?.convert(),
        }
    }
}

/// On-disk algebra description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub basis: Vec<String>,
    pub unit: Vec<Value>,
    pub mul: Vec<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalars: Option<ScalarMode>,
}

impl AlgebraFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn mul_flat<S: Scalar>(dim: usize, c: &[S], x: &[S], y: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); dim];
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            let w = xi.times(yj);
            let base = (i * dim + j) * dim;
            for (k, o) in out.iter_mut().enumerate() {
                let ck = &c[base + k];
                if !ck.is_zero() {
                    *o = o.plus(&w.times(ck));
                }
            }
        }
    }
    out
}

fn check_associative<S: Scalar>(dim: usize, c: &[S]) -> Result<()> {
    let at = |i: usize, j: usize, k: usize| &c[(i * dim + j) * dim + k];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let mut lhs = S::zero();
                    let mut rhs = S::zero();
                    for m in 0..dim {
                        lhs = lhs.plus(&at(i, j, m).times(at(m, k, l)));
                        rhs = rhs.plus(&at(j, k, m).times(at(i, m, l)));
                    }
                    let diff = lhs.minus(&rhs);
                    if !(diff.is_zero() || (!S::is_exact() && diff.magnitude() < 1e-12)) {
                        return Err(Error::AssociativityViolation { i, j, k, l });
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_unit<S: Scalar>(dim: usize, c: &[S], unit: &[S]) -> Result<()> {
    for b in 0..dim {
        let mut e = vec![S::zero(); dim];
        e[b] = S::one();
        let left = mul_flat(dim, c, unit, &e);
        let right = mul_flat(dim, c, &e, unit);
        let close = |v: &[S]| {
            v.iter().zip(&e).all(|(x, y)| {
                let d = x.minus(y);
                d.is_zero() || (!S::is_exact() && d.magnitude() < 1e-12)
            })
        };
        if !close(&left) || !close(&right) {
            return Err(Error::UnitViolation { basis: b });
        }
    }
    Ok(())
}

/// The algebras bundled with the crate.
pub mod examples {
    use super::*;

    fn table<S: Scalar>(dim: usize, f: impl Fn(usize, usize) -> Vec<(usize, i64)>) -> Vec<Vec<Vec<S>>> {
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let mut v = vec![S::zero(); dim];
                        for (k, c) in f(i, j) {
                            v[k] = v[k].plus(&S::from_i64(c));
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    fn unit_vec<S: Scalar>(dim: usize, ones: &[usize]) -> Vec<S> {
        let mut u = vec![S::zero(); dim];
        for &i in ones {
            u[i] = S::one();
        }
        u
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// `C[x]/(x²)`, basis `{1, x}`.
    pub fn dual_numbers<S: Scalar>() -> Algebra<S> {
        let mul = table(2, |i, j| if i + j < 2 { vec![(i + j, 1)] } else { vec![] });
        Algebra::new(labels(&["1", "x"]), mul, unit_vec(2, &[0])).expect("dual numbers are valid")
    }

    /// `C ⊕ C`, basis `{1, e}` with `e = (1, 0)` idempotent.
    pub fn c_plus_c<S: Scalar>() -> Algebra<S> {
        let mul = table(2, |i, j| match (i, j) {
            (0, k) | (k, 0) => vec![(k, 1)],
            _ => vec![(1, 1)],
        });
        Algebra::new(labels(&["1", "e"]), mul, unit_vec(2, &[0])).expect("C+C is valid")
    }

    /// Matrix-unit multiplication table `E_ab E_cd = δ_bc E_ad`, basis order
    /// `E11, E12, E21, E22`.
    pub fn matrix_units_table<S: Scalar>() -> Vec<Vec<Vec<S>>> {
        table(4, |i, j| {
            let (a, b) = (i / 2, i % 2);
            let (c, d) = (j / 2, j % 2);
            if b == c {
                vec![(2 * a + d, 1)]
            } else {
                vec![]
            }
        })
    }

    /// `M₂(C)` in the matrix-unit basis; the unit `E11 + E22` becomes basis
    /// vector 0 internally.
    pub fn m2<S: Scalar>() -> Algebra<S> {
        Algebra::new(labels(&["E11", "E12", "E21", "E22"]), matrix_units_table(), unit_vec(4, &[0, 3])).expect("M2 is valid")
    }

    /// Group algebra of `Z/3`, basis `{1, g, g²}`.
    pub fn group_z3<S: Scalar>() -> Algebra<S> {
        let mul = table(3, |i, j| vec![((i + j) % 3, 1)]);
        Algebra::new(labels(&["1", "g", "g2"]), mul, unit_vec(3, &[0])).expect("C[Z/3] is valid")
    }

    /// The one-dimensional algebra `C`.
    pub fn scalars<S: Scalar>() -> Algebra<S> {
        Algebra::new(labels(&["1"]), table(1, |_, _| vec![(0, 1)]), unit_vec(1, &[0])).expect("C is valid")
    }

    /// Name, algebra pairs for the standard test suite.
    pub fn suite<S: Scalar>() -> Vec<(&'static str, Algebra<S>)> {
        vec![("dual_numbers", dual_numbers()), ("c_plus_c", c_plus_c()), ("m2", m2()), ("group_z3", group_z3())]
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    type Q = BigRational;

    fn el(a: &Algebra<Q>, v: &[i64]) -> AlgebraElement<Q> {
        let coords: Vec<Q> = v.iter().map(|&x| Q::from_i64(x)).collect();
        a.from_input_coords(&coords).unwrap()
    }

    #[test]
    fn dual_numbers_x_squared_is_zero() {
        let a = dual_numbers::<Q>();
        assert_eq!(a.dim(), 2);
        let x = a.basis(1);
        assert!(a.multiply(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn unit_law_on_every_example() {
        for (_, a) in suite::<Q>() {
            let one = a.unit();
            for i in 0..a.dim() {
                let e = a.basis(i);
                assert_eq!(a.multiply(&one, &e).unwrap(), e);
                assert_eq!(a.multiply(&e, &one).unwrap(), e);
            }
            assert!(a.is_associative());
        }
    }

    #[test]
    fn m2_matrix_unit_identity() {
        let a = m2::<Q>();
        assert_eq!(a.dim(), 4);
        let e12 = el(&a, &[0, 1, 0, 0]);
        let e21 = el(&a, &[0, 0, 1, 0]);
        let e11 = el(&a, &[1, 0, 0, 0]);
        assert_eq!(a.multiply(&e12, &e21).unwrap(), e11);
        // unit moved to the front
        assert_eq!(a.labels()[0], "1");
        assert_eq!(a.to_input_coords(&a.unit()).unwrap(), vec![Q::from_i64(1), Q::from_i64(0), Q::from_i64(0), Q::from_i64(1)]);
    }

    #[test]
    fn perturbed_m2_is_not_associative() {
        let mut mul = matrix_units_table::<Q>();
        mul[1][2][0] = mul[1][2][0].plus(&Q::from_i64(1));
        let err = Algebra::new(
            vec!["E11".into(), "E12".into(), "E21".into(), "E22".into()],
            mul,
            vec![Q::from_i64(1), Q::from_i64(0), Q::from_i64(0), Q::from_i64(1)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::AssociativityViolation { .. }), "{err:?}");
    }

    #[test]
    fn wrong_unit_is_rejected() {
        let mul = matrix_units_table::<Q>();
        let err = Algebra::new(
            vec!["E11".into(), "E12".into(), "E21".into(), "E22".into()],
            mul,
            vec![Q::from_i64(1), Q::from_i64(0), Q::from_i64(0), Q::from_i64(0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnitViolation { .. }));
    }

    #[test]
    fn unit_not_first_is_reordered() {
        // dual numbers with basis order {x, 1}
        let z = Q::from_i64(0);
        let o = Q::from_i64(1);
        let mul = vec![
            vec![vec![z.clone(), z.clone()], vec![o.clone(), z.clone()]],
            vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()]],
        ];
        let a = Algebra::new(vec!["x".into(), "1".into()], mul, vec![z.clone(), o.clone()]).unwrap();
        assert_eq!(a.labels(), &["1".to_string(), "x".to_string()]);
        let x = a.basis(1);
        assert!(a.multiply(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn shape_errors() {
        let err = Algebra::<Q>::new(vec!["1".into()], vec![vec![]], vec![Q::from_i64(1)]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
        let a = dual_numbers::<Q>();
        let bad = AlgebraElement::new(vec![Q::from_i64(1)]);
        assert!(matches!(a.multiply(&bad, &bad), Err(Error::DimMismatch { .. })));
        assert!(matches!(a.reduce(&bad), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn reduce_kills_the_unit_line() {
        let a = dual_numbers::<Q>();
        assert!(a.reduce(&a.unit()).unwrap().is_zero());
        let x = a.basis(1);
        assert_eq!(a.reduce(&x).unwrap().coeffs, vec![Q::from_i64(1)]);
        let shifted = AlgebraElement::new(vec![Q::from_i64(5), Q::from_i64(1)]);
        assert_eq!(a.reduce(&shifted).unwrap(), a.reduce(&x).unwrap());
        let r = a.reduce(&x).unwrap();
        assert_eq!(a.reduce(&a.lift(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn one_dimensional_algebra_is_legal() {
        let a = scalars::<Q>();
        assert_eq!(a.dim(), 1);
        assert!(a.reduce(&a.unit()).unwrap().coeffs.is_empty());
    }

    #[test]
    fn file_round_trip_and_mode_conversion() {
        let a = group_z3::<Q>();
        let file = a.to_file();
        let text = serde_json::to_string(&file).unwrap();
        let back: AlgebraFile = serde_json::from_str(&text).unwrap();
        let b = Algebra::<Q>::from_file(&back).unwrap();
        assert_eq!(b.basis_product(1, 2), a.basis_product(1, 2));
        let f = a.convert::<Complex64>().unwrap();
        assert_eq!(f.basis_product(2, 2)[1], Complex64::new(1.0, 0.0));
    }
}
