//! Integer lattice arithmetic.
//!
//! A full-rank sublattice Γ ⊂ Zⁿ is described by a square integer basis
//! matrix.  This module provides the quotient group Zⁿ/Γ (canonical coset
//! representatives, reduction, group tables), the dual quotient of
//! frequencies ξ with exp(i⟨ξ,γ⟩) = 1 for all γ ∈ Γ, and the permutation
//! matrices by which a dual shift acts on the dual representatives.
//!
//! Dual frequencies are stored as exact rational multiples of 2π so that
//! all periodicity predicates are exact integer arithmetic.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Basis of a full-rank sublattice Γ ⊂ Zⁿ.
///
/// The matrix is stored row-major; its columns generate the lattice.
/// The normal form, determinant and adjugate are precomputed so that
/// membership tests and reduction are cheap integer operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    n: usize,
    rows: Vec<Vec<i64>>,
    det: i64,
    adj: Vec<Vec<i64>>,
    hnf: Vec<Vec<i64>>,
}

impl LatticeBasis {
    /// Builds a lattice from the rows of a square integer matrix whose
    /// columns generate the lattice.
    ///
    /// Returns `ZeroDeterminant` if the matrix is singular and
    /// `SizeMismatch` if it is not square.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::SizeMismatch { expected: 1, got: 0 });
        }
        for r in &rows {
            if r.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: r.len() });
            }
        }
        let det_wide = det_i128(&rows);
        if det_wide == 0 {
            return Err(Error::ZeroDeterminant);
        }
        let det = i64::try_from(det_wide)
            .map_err(|_| Error::Unsupported("determinant overflows i64".into()))?;
        let adj = adjugate(&rows);
        let hnf = hnf_upper(rows.clone());
        Ok(LatticeBasis { n, rows, det, adj, hnf })
    }

    /// Convenience constructor for the one-dimensional lattice mZ.
    pub fn one_dim(m: i64) -> Result<Self> {
        LatticeBasis::new(vec![vec![m]])
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Signed determinant of the basis matrix.
    pub fn det(&self) -> i64 {
        self.det
    }

    /// Number of residue classes N = |Zⁿ/Γ| = |det|.
    pub fn index(&self) -> usize {
        self.det.unsigned_abs() as usize
    }

    /// The basis matrix, row-major.
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Column-style Hermite normal form of the basis: upper triangular
    /// with positive diagonal, generating the same lattice.
    pub fn normal_form(&self) -> &[Vec<i64>] {
        &self.hnf
    }

    /// The lattice generated by the columns of the transposed matrix.
    /// Its residue classes index the dual frequencies of this lattice.
    pub fn transposed(&self) -> LatticeBasis {
        let rows = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.rows[j][i]).collect())
            .collect();
        LatticeBasis::new(rows).expect("transpose preserves the determinant")
    }

    /// Matrix-vector product B·m, mapping lattice coordinates to a point.
    pub fn mul_vec(&self, m: &[i64]) -> Vec<i64> {
        assert_eq!(m.len(), self.n, "coordinate vector has wrong length");
        self.rows
            .iter()
            .map(|row| row.iter().zip(m).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Lattice coordinates m with B·m = x, or `None` when x ∉ Γ.
    pub fn lattice_coords(&self, x: &[i64]) -> Option<Vec<i64>> {
        assert_eq!(x.len(), self.n, "point has wrong length");
        let mut out = Vec::with_capacity(self.n);
        for row in &self.adj {
            let s: i128 = row.iter().zip(x).map(|(&a, &b)| a as i128 * b as i128).sum();
            if s % self.det as i128 != 0 {
                return None;
            }
            out.push((s / self.det as i128) as i64);
        }
        Some(out)
    }

    /// Whether x is a lattice point.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.lattice_coords(x).is_some()
    }

    /// Canonical representative of x modulo the lattice: the unique point
    /// congruent to x in the box 0 ≤ yᵢ < dᵢ spanned by the normal-form
    /// diagonal.
    pub fn canonical_rep(&self, x: &[i64]) -> Vec<i64> {
        assert_eq!(x.len(), self.n, "point has wrong length");
        let mut y = x.to_vec();
        for i in (0..self.n).rev() {
            let d = self.hnf[i][i];
            let q = y[i].div_euclid(d);
            for r in 0..=i {
                y[r] -= q * self.hnf[r][i];
            }
        }
        y
    }
}

/// A transversal of Zⁿ/Γ: an ordered list of N points, one per residue
/// class, together with precomputed group tables for the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetSystem {
    lattice: LatticeBasis,
    reps: Vec<Vec<i64>>,
    canon_index: HashMap<Vec<i64>, usize>,
    add_table: Vec<Vec<usize>>,
    neg_table: Vec<usize>,
}

impl CosetSystem {
    /// The canonical transversal: the box representatives of the basis
    /// normal form, listed in lexicographic order.
    pub fn canonical(lattice: LatticeBasis) -> Self {
        let diag: Vec<i64> = (0..lattice.dim()).map(|i| lattice.normal_form()[i][i]).collect();
        let mut reps = Vec::with_capacity(lattice.index());
        let mut cur = vec![0i64; lattice.dim()];
        loop {
            reps.push(cur.clone());
            let mut i = lattice.dim();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < diag[i] {
                    break;
                }
                cur[i] = 0;
            }
            if cur.iter().all(|&c| c == 0) {
                break;
            }
        }
        debug_assert_eq!(reps.len(), lattice.index());
        CosetSystem::with_reps(lattice, reps).expect("box points form a transversal")
    }

    /// Builds a system from caller-chosen representatives.  The points
    /// must be pairwise non-congruent modulo the lattice and there must
    /// be one per residue class.
    pub fn with_reps(lattice: LatticeBasis, reps: Vec<Vec<i64>>) -> Result<Self> {
        let n = lattice.index();
        if reps.len() != n {
            return Err(Error::DomainNotFundamental(format!(
                "expected {} points, got {}",
                n,
                reps.len()
            )));
        }
        let mut canon_index = HashMap::with_capacity(n);
        for (i, r) in reps.iter().enumerate() {
            if r.len() != lattice.dim() {
                return Err(Error::DimMismatch { expected: lattice.dim(), got: r.len() });
            }
            if canon_index.insert(lattice.canonical_rep(r), i).is_some() {
                return Err(Error::DomainNotFundamental(format!(
                    "point {:?} repeats a residue class",
                    r
                )));
            }
        }
        let mut sys = CosetSystem {
            lattice,
            reps,
            canon_index,
            add_table: Vec::new(),
            neg_table: Vec::new(),
        };
        sys.add_table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let sum: Vec<i64> =
                            sys.reps[a].iter().zip(&sys.reps[b]).map(|(x, y)| x + y).collect();
                        sys.index_of(&sum)
                    })
                    .collect()
            })
            .collect();
        sys.neg_table = (0..n)
            .map(|a| {
                let neg: Vec<i64> = sys.reps[a].iter().map(|x| -x).collect();
                sys.index_of(&neg)
            })
            .collect();
        Ok(sys)
    }

    /// The underlying lattice.
    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    /// Number of residue classes.
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    /// Whether the quotient is trivial.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The ordered representatives.
    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    /// Index of the class of an arbitrary integer point.
    pub fn index_of(&self, x: &[i64]) -> usize {
        self.canon_index[&self.lattice.canonical_rep(x)]
    }

    /// Splits x = rep + gamma with rep one of the representatives and
    /// gamma a lattice point.  The split is unique.
    pub fn reduce(&self, x: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let rep = self.reps[self.index_of(x)].clone();
        let gamma = x.iter().zip(&rep).map(|(a, b)| a - b).collect();
        (rep, gamma)
    }

    /// Class index of the sum of two classes.
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add_table[a][b]
    }

    /// Class index of the negative of a class.
    pub fn neg(&self, a: usize) -> usize {
        self.neg_table[a]
    }
}

/// Canonical transversal of Zⁿ/Γ.  See [`CosetSystem::canonical`].
pub fn coset_representatives(basis: &LatticeBasis) -> CosetSystem {
    CosetSystem::canonical(basis.clone())
}

/// A frequency vector ω = 2π·num/den with integer numerators reduced to
/// 0 ≤ numᵢ < den.  All dual representatives have this exact form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreqVector {
    num: Vec<i64>,
    den: i64,
}

impl FreqVector {
    /// Builds the frequency 2π·num/den, reducing numerators modulo den.
    /// The denominator must be positive after sign normalization.
    pub fn new(num: Vec<i64>, den: i64) -> Self {
        assert!(den != 0, "denominator must be nonzero");
        let (num, den) = if den < 0 {
            (num.into_iter().map(|x| -x).collect::<Vec<i64>>(), -den)
        } else {
            (num, den)
        };
        let num = num.into_iter().map(|x| x.rem_euclid(den)).collect();
        FreqVector { num, den }
    }

    /// The zero frequency in dimension n with the given denominator.
    pub fn zero(n: usize, den: i64) -> Self {
        FreqVector::new(vec![0; n], den)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.num.len()
    }

    /// Numerators of the 2π-fractions.
    pub fn num(&self) -> &[i64] {
        &self.num
    }

    /// Common denominator of the 2π-fractions.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Whether this is the zero class.
    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }

    /// Componentwise sum modulo 2π.
    pub fn add(&self, other: &FreqVector) -> FreqVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        let den = lcm(self.den, other.den);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| a * (den / self.den) + b * (den / other.den))
            .collect();
        FreqVector::new(num, den)
    }

    /// The negative class modulo 2π.
    pub fn neg(&self) -> FreqVector {
        FreqVector::new(self.num.iter().map(|&x| -x).collect(), self.den)
    }

    /// Floating-point angles in [0, 2π)ⁿ.
    pub fn angles(&self) -> Vec<f64> {
        self.num
            .iter()
            .map(|&x| 2.0 * std::f64::consts::PI * x as f64 / self.den as f64)
            .collect()
    }

    /// The exact rational ⟨k, ω⟩ / 2π as (numerator, denominator),
    /// with the numerator reduced modulo the denominator.
    pub fn pairing(&self, k: &[i64]) -> (i64, i64) {
        assert_eq!(k.len(), self.dim(), "dimension mismatch");
        let s: i128 = k.iter().zip(&self.num).map(|(&a, &b)| a as i128 * b as i128).sum();
        (s.rem_euclid(self.den as i128) as i64, self.den)
    }

    /// exp(i⟨k, ω⟩), exact for quarter turns.
    pub fn character(&self, k: &[i64]) -> Complex64 {
        let (num, den) = self.pairing(k);
        root_of_unity(num, den)
    }
}

/// exp(2πi·num/den), evaluated exactly when the reduced fraction is a
/// multiple of a quarter turn and by trigonometric functions otherwise.
pub fn root_of_unity(num: i64, den: i64) -> Complex64 {
    assert!(den > 0, "denominator must be positive");
    let r = num.rem_euclid(den);
    let g = gcd(r, den);
    let (r, den) = (r / g, den / g);
    match (r, den) {
        (0, 1) => Complex64::new(1.0, 0.0),
        (1, 2) => Complex64::new(-1.0, 0.0),
        (1, 4) => Complex64::new(0.0, 1.0),
        (3, 4) => Complex64::new(0.0, -1.0),
        _ => {
            let theta = 2.0 * std::f64::consts::PI * r as f64 / den as f64;
            Complex64::new(theta.cos(), theta.sin())
        }
    }
}

/// The dual quotient: representatives of the frequencies ξ with
/// exp(i⟨ξ,γ⟩) = 1 for every lattice point γ, taken modulo 2πZⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCosetSystem {
    lattice: LatticeBasis,
    freqs: Vec<FreqVector>,
    index: HashMap<Vec<i64>, usize>,
    add_table: Vec<Vec<usize>>,
    neg_table: Vec<usize>,
}

impl DualCosetSystem {
    /// Builds the dual representatives 2π·(Bᵀ)⁻¹·m, with m running over
    /// the canonical representatives of the lattice generated by Bᵀ.
    /// The zero frequency is always listed first.
    pub fn new(lattice: LatticeBasis) -> Self {
        let t = lattice.transposed();
        let det = t.det();
        let cosets = CosetSystem::canonical(t.clone());
        let mut freqs = Vec::with_capacity(cosets.len());
        let mut index = HashMap::with_capacity(cosets.len());
        for m in cosets.reps() {
            let num: Vec<i64> = adj_mul(&t, m);
            let f = FreqVector::new(num, det);
            index.insert(f.num().to_vec(), freqs.len());
            freqs.push(f);
        }
        let n = freqs.len();
        let add_table: Vec<Vec<usize>> = (0..n)
            .map(|a| (0..n).map(|b| index[freqs[a].add(&freqs[b]).num()]).collect())
            .collect();
        let neg_table = (0..n).map(|a| index[freqs[a].neg().num()]).collect();
        DualCosetSystem { lattice, freqs, index, add_table, neg_table }
    }

    /// The lattice whose dual quotient this is.
    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    /// Number of dual classes, equal to the lattice index.
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    /// Whether the quotient is trivial.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The ordered dual representatives.
    pub fn freqs(&self) -> &[FreqVector] {
        &self.freqs
    }

    /// Index of the class of a frequency, if it is one of the
    /// representatives' classes with the same denominator grid.
    pub fn index_of(&self, f: &FreqVector) -> Option<usize> {
        if f.den() == self.freqs[0].den() {
            self.index.get(f.num()).copied()
        } else {
            None
        }
    }

    /// Index of the zero frequency.
    pub fn zero_index(&self) -> usize {
        self.index[self.freqs[0].num().to_vec().as_slice()]
    }

    /// Class index of the sum of two classes.
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add_table[a][b]
    }

    /// Class index of the negative of a class.
    pub fn neg(&self, a: usize) -> usize {
        self.neg_table[a]
    }
}

/// Dual representatives of a lattice.  See [`DualCosetSystem::new`].
pub fn dual_coset_representatives(basis: &LatticeBasis) -> DualCosetSystem {
    DualCosetSystem::new(basis.clone())
}

/// The permutation matrix R(ρ) by which the dual shift ρ acts on the
/// dual representatives: R[ω][ξ] = 1 exactly when ω ≡ ξ + ρ.
///
/// R(0) is the identity and R(ρ)R(ρ') = R(ρ + ρ').
pub fn permutation_representation(rho: usize, dual: &DualCosetSystem) -> Result<Vec<Vec<f64>>> {
    let n = dual.len();
    if rho >= n {
        return Err(Error::UnknownLabel { label: rho, size: n });
    }
    let mut out = vec![vec![0.0; n]; n];
    for xi in 0..n {
        out[dual.add(xi, rho)][xi] = 1.0;
    }
    Ok(out)
}

fn adj_mul(b: &LatticeBasis, m: &[i64]) -> Vec<i64> {
    b.adj.iter().map(|row| row.iter().zip(m).map(|(&a, &x)| a * x).sum()).collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn det_i128(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0] as i128;
    }
    let mut sum: i128 = 0;
    let mut sign: i128 = 1;
    for j in 0..n {
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect()
            })
            .collect();
        sum += sign * m[0][j] as i128 * det_i128(&minor);
        sign = -sign;
    }
    sum
}

/// Adjugate matrix: adj(B)·B = det(B)·I.
fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = m
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, row)| {
                    row.iter().enumerate().filter(|&(c, _)| c != i).map(|(_, &v)| v).collect()
                })
                .collect();
            let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = (sign as i128 * det_i128(&minor)) as i64;
        }
    }
    adj
}

/// Column-style Hermite normal form: integer column operations bring the
/// matrix to upper triangular shape with positive diagonal entries and
/// entries to the right of each diagonal reduced modulo it.
fn hnf_upper(mut a: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let n = a.len();
    for i in (0..n).rev() {
        loop {
            let mut pivot = None;
            for j in 0..=i {
                if a[i][j] != 0 {
                    pivot = match pivot {
                        Some(p) if a[i][p as usize].abs() <= a[i][j].abs() => pivot,
                        _ => Some(j),
                    };
                }
            }
            let p = pivot.expect("nonsingular matrix has a nonzero entry in every row");
            if p != i {
                for row in a.iter_mut() {
                    row.swap(p, i);
                }
            }
            let mut cleared = true;
            for j in 0..i {
                if a[i][j] != 0 {
                    let q = a[i][j] / a[i][i];
                    for r in 0..n {
                        a[r][j] -= q * a[r][i];
                    }
                    if a[i][j] != 0 {
                        cleared = false;
                    }
                }
            }
            if cleared {
                break;
            }
        }
        if a[i][i] < 0 {
            for row in a.iter_mut() {
                row[i] = -row[i];
            }
        }
        for j in i + 1..n {
            let q = a[i][j].div_euclid(a[i][i]);
            for r in 0..n {
                a[r][j] -= q * a[r][i];
            }
        }
    }
    a
}
