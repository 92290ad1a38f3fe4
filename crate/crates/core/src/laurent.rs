//! Laurent polynomials on the n-torus and square matrices of them.
//!
//! A [`LaurentPoly`] stores a finite map from integer exponent vectors
//! k ∈ Zⁿ to complex coefficients and denotes the trigonometric
//! polynomial p(ω) = Σ_k c_k·exp(i⟨k,ω⟩).  A [`LoopMatrix`] is an N×N
//! grid of such polynomials, i.e. a polynomial map from the torus into
//! N×N matrices.  Exponents are exact integers; coefficients are complex
//! doubles kept in normal form by pruning magnitudes below
//! [`PRUNE_EPS`].  Unitarity for all ω is a polynomial identity and is
//! checked on coefficients, not on a sample grid.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{DualCosetSystem, FreqVector};

/// Coefficients with magnitude at or below this bound are dropped when
/// restoring normal form after arithmetic.
pub const PRUNE_EPS: f64 = 1e-14;

/// Finitely supported function Zⁿ → C, read as p(ω) = Σ_k c_k e^{i⟨k,ω⟩}.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    n: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl LaurentPoly {
    /// The zero polynomial in dimension n.
    pub fn zero(n: usize) -> Self {
        LaurentPoly { n, terms: BTreeMap::new() }
    }

    /// The constant polynomial c.
    pub fn constant(n: usize, c: Complex64) -> Self {
        LaurentPoly::monomial(vec![0; n], c)
    }

    /// The single term c·e^{i⟨k,ω⟩}.
    pub fn monomial(k: Vec<i64>, c: Complex64) -> Self {
        let n = k.len();
        let mut terms = BTreeMap::new();
        if c.norm() > PRUNE_EPS {
            terms.insert(k, c);
        }
        LaurentPoly { n, terms }
    }

    /// Builds a polynomial from (exponent, coefficient) pairs, summing
    /// repeated exponents.
    pub fn from_terms(
        n: usize,
        pairs: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        let mut terms: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, c) in pairs {
            if k.len() != n {
                return Err(Error::DimMismatch { expected: n, got: k.len() });
            }
            *terms.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(LaurentPoly { n, terms })
    }

    /// Ambient dimension n of the torus.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates terms in exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    /// Coefficient at exponent k (zero if absent).
    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.terms.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Pointwise sum.
    pub fn add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.combine(other, |a, b| a + b)
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(
        &self,
        other: &LaurentPoly,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<LaurentPoly> {
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let mut terms = BTreeMap::new();
        for k in self.terms.keys().chain(other.terms.keys()) {
            if !terms.contains_key(k) {
                terms.insert(k.clone(), f(self.coeff(k), other.coeff(k)));
            }
        }
        terms.retain(|_, c: &mut Complex64| c.norm() > PRUNE_EPS);
        Ok(LaurentPoly { n: self.n, terms })
    }

    /// Negation.
    pub fn neg(&self) -> LaurentPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> LaurentPoly {
        let mut terms: BTreeMap<Vec<i64>, Complex64> =
            self.terms.iter().map(|(k, v)| (k.clone(), c * v)).collect();
        terms.retain(|_, v| v.norm() > PRUNE_EPS);
        LaurentPoly { n: self.n, terms }
    }

    /// Pointwise product: convolution of the exponent maps.
    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let mut terms: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let k: Vec<i64> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                *terms.entry(k).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        terms.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(LaurentPoly { n: self.n, terms })
    }

    /// The polynomial ω ↦ conj(p(ω)): coefficients conjugated, exponents
    /// negated.
    pub fn para_adjoint(&self) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| (k.iter().map(|x| -x).collect(), c.conj()))
            .collect();
        LaurentPoly { n: self.n, terms }
    }

    /// Numeric evaluation at a point of the torus.
    pub fn eval(&self, omega: &[f64]) -> Complex64 {
        assert_eq!(omega.len(), self.n, "evaluation point has wrong dimension");
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let dot: f64 = k.iter().zip(omega).map(|(&a, &w)| a as f64 * w).sum();
            acc += c * Complex64::new(dot.cos(), dot.sin());
        }
        acc
    }

    /// The substitution ω ↦ ω + ξ for an exact rational frequency ξ:
    /// each coefficient c_k is multiplied by the root of unity
    /// exp(i⟨k,ξ⟩).
    pub fn shift_frequency(&self, xi: &FreqVector) -> LaurentPoly {
        assert_eq!(xi.dim(), self.n, "frequency has wrong dimension");
        let mut terms: BTreeMap<Vec<i64>, Complex64> = self
            .terms
            .iter()
            .map(|(k, c)| (k.clone(), c * xi.character(k)))
            .collect();
        terms.retain(|_, c| c.norm() > PRUNE_EPS);
        LaurentPoly { n: self.n, terms }
    }

    /// Largest coefficient magnitude (0 for the zero polynomial).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of the difference.
    pub fn max_diff(&self, other: &LaurentPoly) -> f64 {
        let mut worst = 0.0f64;
        for k in self.terms.keys().chain(other.terms.keys()) {
            worst = worst.max((self.coeff(k) - other.coeff(k)).norm());
        }
        worst
    }

    /// Copy with coefficients at or below eps removed.
    pub fn pruned(&self, eps: f64) -> LaurentPoly {
        let mut terms = self.terms.clone();
        terms.retain(|_, c| c.norm() > eps);
        LaurentPoly { n: self.n, terms }
    }
}

/// Location and size of the largest coefficient of the unitarity defect
/// M·M* − I, as reported by [`LoopMatrix::is_paraunitary`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParaunitaryReport {
    /// Whether the residual is within the requested tolerance.
    pub ok: bool,
    /// Largest defect coefficient magnitude.
    pub residual: f64,
    /// Row of the entry holding that coefficient.
    pub row: usize,
    /// Column of the entry holding that coefficient.
    pub col: usize,
    /// Exponent of that coefficient.
    pub exponent: Vec<i64>,
}

/// Square matrix of Laurent polynomials: a polynomial map from the
/// n-torus into N×N complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopMatrix {
    n: usize,
    size: usize,
    entries: Vec<LaurentPoly>,
}

impl LoopMatrix {
    /// The constant identity loop.
    pub fn identity(n: usize, size: usize) -> Self {
        let mut m = LoopMatrix::zero(n, size);
        for i in 0..size {
            *m.get_mut(i, i) = LaurentPoly::constant(n, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// The zero matrix.
    pub fn zero(n: usize, size: usize) -> Self {
        LoopMatrix { n, size, entries: vec![LaurentPoly::zero(n); size * size] }
    }

    /// Builds a matrix from rows of polynomials.  All rows must have the
    /// same length as the row count and all entries the same dimension.
    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::SizeMismatch { expected: 1, got: 0 });
        }
        let n = rows[0][0].dim();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::SizeMismatch { expected: size, got: row.len() });
            }
            for p in row {
                if p.dim() != n {
                    return Err(Error::DimMismatch { expected: n, got: p.dim() });
                }
                entries.push(p);
            }
        }
        Ok(LoopMatrix { n, size, entries })
    }

    /// Builds a constant loop from a numeric matrix.
    pub fn from_constant(n: usize, mat: &[Vec<Complex64>]) -> Result<Self> {
        let rows = mat
            .iter()
            .map(|row| row.iter().map(|&c| LaurentPoly::constant(n, c)).collect())
            .collect();
        LoopMatrix::from_rows(rows)
    }

    /// Ambient torus dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Matrix size N.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry at (row, col).
    pub fn get(&self, row: usize, col: usize) -> &LaurentPoly {
        &self.entries[row * self.size + col]
    }

    /// Mutable entry at (row, col).
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut LaurentPoly {
        &mut self.entries[row * self.size + col]
    }

    /// Entrywise sum.
    pub fn add(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.zip(other, LaurentPoly::add)
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        self.zip(other, LaurentPoly::sub)
    }

    fn zip(
        &self,
        other: &LoopMatrix,
        f: impl Fn(&LaurentPoly, &LaurentPoly) -> Result<LaurentPoly>,
    ) -> Result<LoopMatrix> {
        if self.size != other.size {
            return Err(Error::SizeMismatch { expected: self.size, got: other.size });
        }
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoopMatrix { n: self.n, size: self.size, entries })
    }

    /// Entrywise scalar multiple.
    pub fn scale(&self, c: Complex64) -> LoopMatrix {
        LoopMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Matrix product.
    pub fn matmul(&self, other: &LoopMatrix) -> Result<LoopMatrix> {
        if self.size != other.size {
            return Err(Error::SizeMismatch { expected: self.size, got: other.size });
        }
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let mut out = LoopMatrix::zero(self.n, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut acc = LaurentPoly::zero(self.n);
                for k in 0..self.size {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                *out.get_mut(i, j) = acc;
            }
        }
        Ok(out)
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> LoopMatrix {
        let mut out = LoopMatrix::zero(self.n, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                *out.get_mut(j, i) = self.get(i, j).clone();
            }
        }
        out
    }

    /// The loop ω ↦ M(ω)^H: entry (i,j) is the conjugate of entry (j,i)
    /// with exponents negated.
    pub fn para_adjoint(&self) -> LoopMatrix {
        let mut out = LoopMatrix::zero(self.n, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                *out.get_mut(j, i) = self.get(i, j).para_adjoint();
            }
        }
        out
    }

    /// Numeric evaluation at a point of the torus.
    pub fn eval(&self, omega: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        if omega.len() != self.n {
            return Err(Error::DimMismatch { expected: self.n, got: omega.len() });
        }
        Ok((0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j).eval(omega)).collect())
            .collect())
    }

    /// Entrywise substitution ω ↦ ω + ξ.
    pub fn shift_frequency(&self, xi: &FreqVector) -> LoopMatrix {
        LoopMatrix {
            n: self.n,
            size: self.size,
            entries: self.entries.iter().map(|p| p.shift_frequency(xi)).collect(),
        }
    }

    /// Checks the polynomial identity M(ω)·M(ω)^H = I by forming the
    /// defect D = M·M* − I exactly in coefficients.  The report locates
    /// the largest defect coefficient.
    pub fn is_paraunitary(&self, tol: f64) -> ParaunitaryReport {
        let defect = self
            .matmul(&self.para_adjoint())
            .and_then(|p| p.sub(&LoopMatrix::identity(self.n, self.size)))
            .expect("sizes match by construction");
        let mut report = ParaunitaryReport {
            ok: true,
            residual: 0.0,
            row: 0,
            col: 0,
            exponent: vec![0; self.n],
        };
        for i in 0..self.size {
            for j in 0..self.size {
                for (k, c) in defect.get(i, j).terms() {
                    if c.norm() > report.residual {
                        report.residual = c.norm();
                        report.row = i;
                        report.col = j;
                        report.exponent = k.clone();
                    }
                }
            }
        }
        report.ok = report.residual <= tol;
        report
    }

    /// Whether M(ω + ρ) = M(ω) for every dual representative ρ of the
    /// lattice, i.e. whether every exponent with coefficient magnitude
    /// above tol is a lattice point.
    pub fn is_lattice_periodic(&self, dual: &DualCosetSystem, tol: f64) -> bool {
        let lattice = dual.lattice();
        self.entries.iter().all(|p| {
            p.terms().all(|(k, c)| c.norm() <= tol || lattice.contains(k))
        })
    }

    /// Largest coefficient magnitude over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of the entrywise difference.
    pub fn max_diff(&self, other: &LoopMatrix) -> f64 {
        assert_eq!(self.size, other.size, "matrix sizes differ");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_diff(b))
            .fold(0.0, f64::max)
    }
}
