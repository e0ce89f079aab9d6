//! Sparse multivariate polynomials with complex coefficients.
//!
//! Elements of `Sym* W` are stored as polynomials in the coordinates
//! `u_1, ..., u_r` of `W^∨`. Terms live in a `BTreeMap` keyed by exponent
//! tuple, so iteration (and therefore every summation) is lexicographic and
//! bit-reproducible.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg;

pub type Exponent = Vec<u32>;

#[derive(Clone, PartialEq, Debug)]
pub struct MultiPoly {
    arity: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

impl MultiPoly {
    pub fn zero(arity: usize) -> Self {
        MultiPoly {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, c: Complex64) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(vec![0; arity], c);
        p
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function `u_k`.
    pub fn variable(arity: usize, k: usize) -> Self {
        let mut e = vec![0; arity];
        e[k] = 1;
        Self::monomial(e, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponent: Exponent, c: Complex64) -> Self {
        let mut p = Self::zero(exponent.len());
        p.add_term(exponent, c);
        p
    }

    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut p = Self::zero(arity);
        for (e, c) in terms {
            if e.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponent, c: Complex64) {
        debug_assert_eq!(e.len(), self.arity);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &[u32]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_else(Complex64::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.keys().map(|e| e[k]).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut p = Self::zero(self.arity);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.arity);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Term-by-term evaluation in lexicographic exponent order.
    pub fn evaluate(&self, u: &[Complex64]) -> Result<Complex64> {
        if u.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: u.len(),
            });
        }
        Ok(self.eval(u))
    }

    /// Unchecked evaluation for hot loops; the caller guarantees the arity.
    pub fn eval(&self, u: &[Complex64]) -> Complex64 {
        let mut sum = Complex64::zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for (x, &k) in u.iter().zip(e) {
                if k > 0 {
                    t *= x.powu(k);
                }
            }
            sum += t;
        }
        sum
    }

    /// Sum of absolute values of the terms at `u`; the natural scale against
    /// which a residual `|p(u)|` is judged.
    pub fn eval_abs(&self, u: &[Complex64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.norm();
                for (x, &k) in u.iter().zip(e) {
                    t *= x.norm().powi(k as i32);
                }
                t
            })
            .sum()
    }

    pub fn partial_derivative(&self, k: usize) -> Result<Self> {
        if k >= self.arity {
            return Err(Error::IndexOutOfRange {
                index: k,
                arity: self.arity,
            });
        }
        let mut p = Self::zero(self.arity);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            p.add_term(e2, c * e[k] as f64);
        }
        Ok(p)
    }

    /// Substitutes polynomial images for each variable.
    pub fn compose(&self, images: &[MultiPoly]) -> Result<Self> {
        if images.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: images.len(),
            });
        }
        let target = images.first().map(|p| p.arity).unwrap_or(0);
        let mut acc = Self::zero(target);
        for (e, c) in &self.terms {
            let mut t = Self::constant(target, *c);
            for (img, &k) in images.iter().zip(e) {
                if k > 0 {
                    t = &t * &img.pow(k);
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Appends `extra` new variables (with exponent 0) at the end.
    pub fn extend_arity(&self, extra: usize) -> Self {
        let mut p = Self::zero(self.arity + extra);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.extend(std::iter::repeat_n(0, extra));
            p.add_term(e2, *c);
        }
        p
    }

    /// Fixes the last variable to `value`, dropping it.
    pub fn specialize_last(&self, value: Complex64) -> Self {
        let mut p = Self::zero(self.arity - 1);
        for (e, c) in &self.terms {
            let k = e[self.arity - 1];
            p.add_term(e[..self.arity - 1].to_vec(), c * value.powu(k));
        }
        p
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*u{}", i + 1)?,
                    _ => write!(f, "*u{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in add");
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), *c);
        }
        p
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in sub");
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in mul");
        let mut p = MultiPoly::zero(self.arity);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

/// A vector of `W` written in the chosen basis; as a function on `W^∨` it
/// is the linear polynomial `Σ c_k u_k`.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearForm(pub Vec<Complex64>);

impl LinearForm {
    pub fn zero(r: usize) -> Self {
        LinearForm(vec![Complex64::zero(); r])
    }

    pub fn from_integers(v: &[i64]) -> Self {
        LinearForm(v.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_poly(&self) -> MultiPoly {
        let r = self.0.len();
        let mut p = MultiPoly::zero(r);
        for (k, c) in self.0.iter().enumerate() {
            let mut e = vec![0; r];
            e[k] = 1;
            p.add_term(e, *c);
        }
        p
    }

    pub fn eval(&self, u: &[Complex64]) -> Complex64 {
        self.0.iter().zip(u).map(|(a, b)| a * b).sum()
    }
}

/// Determinant of a square matrix of polynomial entries by cofactor
/// expansion along the first row.
pub fn det_of_poly_matrix(m: &[Vec<MultiPoly>]) -> Result<MultiPoly> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NonSquare {
                rows: n,
                row: i,
                cols: row.len(),
            });
        }
    }
    if n == 0 {
        return Err(Error::NonSquare {
            rows: 0,
            row: 0,
            cols: 0,
        });
    }
    let arity = m[0][0].arity();
    let cols: Vec<usize> = (0..n).collect();
    Ok(cofactor(m, 0, &cols, arity))
}

fn cofactor(m: &[Vec<MultiPoly>], row: usize, cols: &[usize], arity: usize) -> MultiPoly {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut acc = MultiPoly::zero(arity);
    for (pos, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = cofactor(m, row + 1, &rest, arity);
        let term = &m[row][c] * &minor;
        acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

pub fn det_of_linear_matrix(m: &[Vec<LinearForm>]) -> Result<MultiPoly> {
    let polys: Vec<Vec<MultiPoly>> = m
        .iter()
        .map(|row| row.iter().map(LinearForm::to_poly).collect())
        .collect();
    det_of_poly_matrix(&polys)
}

/// `det (∂f_j/∂u_k)(u)`.
pub fn jacobian_det_at(fs: &[MultiPoly], u: &[Complex64]) -> Result<Complex64> {
    let r = fs.len();
    let mut jac = vec![vec![Complex64::zero(); r]; r];
    for (j, f) in fs.iter().enumerate() {
        if f.arity() != r || u.len() != r {
            return Err(Error::ArityMismatch {
                expected: r,
                got: f.arity().min(u.len()),
            });
        }
        for (k, slot) in jac[j].iter_mut().enumerate() {
            *slot = f.partial_derivative(k)?.eval(u);
        }
    }
    Ok(linalg::det(&jac))
}
