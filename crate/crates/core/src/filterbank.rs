//! Multichannel filter systems over a lattice Γ ⊂ Zⁿ and their matrix
//! forms.
//!
//! A [`FilterBank`] holds one finitely supported filter per residue
//! class of Γ.  Its polyphase form is the N×N loop with entry
//! (k, ξ) = N^{-1/2}·φ̂_k(ω+ξ), rows indexed by coset representatives
//! and columns by dual representatives.  Translates {T_γ φ_k} form an
//! orthonormal system exactly when this loop is paraunitary, which is
//! what [`is_qmf`] checks, reading defect coefficients back as inner
//! products.
//!
//! Fourier convention: a filter with taps s(m) transforms to
//! Σ_m s(m)·e^{−i⟨ω,m⟩}, i.e. the Laurent coefficient at exponent −m is
//! s(m).  The exponential matrix of [`character_matrix`] uses the
//! opposite sign, e^{+i⟨ω+ξ,k⟩}, as its entries state.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{CosetSystem, DualCosetSystem, LatticeBasis};
use crate::laurent::{LaurentPoly, LoopMatrix, PRUNE_EPS};

/// Finitely supported sequence Zⁿ → C.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    n: usize,
    taps: BTreeMap<Vec<i64>, Complex64>,
}

impl Filter {
    /// The zero sequence.
    pub fn zero(n: usize) -> Self {
        Filter { n, taps: BTreeMap::new() }
    }

    /// The delta sequence at a point.
    pub fn delta(at: Vec<i64>) -> Self {
        let n = at.len();
        Filter { n, taps: BTreeMap::from([(at, Complex64::new(1.0, 0.0))]) }
    }

    /// Builds a filter from (position, value) pairs, summing repeats and
    /// pruning magnitudes at or below [`PRUNE_EPS`].
    pub fn from_taps(
        n: usize,
        pairs: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        let mut taps: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, c) in pairs {
            if k.len() != n {
                return Err(Error::DimMismatch { expected: n, got: k.len() });
            }
            *taps.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        taps.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(Filter { n, taps })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored taps.
    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    /// Whether all taps are zero.
    pub fn is_zero(&self) -> bool {
        self.taps.is_empty()
    }

    /// Iterates (position, value) pairs in position order.
    pub fn taps(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.taps.iter()
    }

    /// Value at a position (zero if absent).
    pub fn tap(&self, k: &[i64]) -> Complex64 {
        self.taps.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Translate T_m: (T_m f)(x) = f(x − m).
    pub fn translate(&self, m: &[i64]) -> Filter {
        assert_eq!(m.len(), self.n, "translation vector has wrong dimension");
        let taps = self
            .taps
            .iter()
            .map(|(k, c)| (k.iter().zip(m).map(|(a, b)| a + b).collect(), *c))
            .collect();
        Filter { n: self.n, taps }
    }

    /// The involution f̃(k) = conj(f(−k)).
    pub fn conj_reflect(&self) -> Filter {
        let taps = self
            .taps
            .iter()
            .map(|(k, c)| (k.iter().map(|x| -x).collect(), c.conj()))
            .collect();
        Filter { n: self.n, taps }
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> Filter {
        let mut taps: BTreeMap<Vec<i64>, Complex64> =
            self.taps.iter().map(|(k, v)| (k.clone(), c * v)).collect();
        taps.retain(|_, v| v.norm() > PRUNE_EPS);
        Filter { n: self.n, taps }
    }

    /// Tap-wise sum.
    pub fn add(&self, other: &Filter) -> Result<Filter> {
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let mut taps = self.taps.clone();
        for (k, c) in &other.taps {
            *taps.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        taps.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(Filter { n: self.n, taps })
    }

    /// Tap-wise difference.
    pub fn sub(&self, other: &Filter) -> Result<Filter> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Convolution (r ∗ s)(x) = Σ_k r(x − k)·s(k).
    pub fn convolve(&self, other: &Filter) -> Result<Filter> {
        if self.n != other.n {
            return Err(Error::DimMismatch { expected: self.n, got: other.n });
        }
        let mut taps: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (a, ca) in &self.taps {
            for (b, cb) in &other.taps {
                let k: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *taps.entry(k).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        taps.retain(|_, c| c.norm() > PRUNE_EPS);
        Ok(Filter { n: self.n, taps })
    }

    /// Inner product ⟨f, g⟩ = Σ_k conj(f(k))·g(k), conjugate-linear in
    /// the first argument.
    pub fn inner(&self, other: &Filter) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.taps {
            acc += c.conj() * other.tap(k);
        }
        acc
    }

    /// Squared norm Σ|f(k)|².
    pub fn energy(&self) -> f64 {
        self.taps.values().map(|c| c.norm_sqr()).sum()
    }

    /// Largest tap magnitude.
    pub fn max_abs(&self) -> f64 {
        self.taps.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest tap magnitude of the difference.
    pub fn max_abs_diff(&self, other: &Filter) -> f64 {
        let mut worst = 0.0f64;
        for k in self.taps.keys().chain(other.taps.keys()) {
            worst = worst.max((self.tap(k) - other.tap(k)).norm());
        }
        worst
    }

    /// Smallest and largest support coordinate per axis, or `None` for
    /// the zero filter.
    pub fn support_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let mut iter = self.taps.keys();
        let first = iter.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for k in iter {
            for i in 0..self.n {
                lo[i] = lo[i].min(k[i]);
                hi[i] = hi[i].max(k[i]);
            }
        }
        Some((lo, hi))
    }
}

/// One filter per residue class of a lattice, index-aligned with the
/// coset representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    cosets: CosetSystem,
    dual: DualCosetSystem,
    filters: Vec<Filter>,
}

impl FilterBank {
    /// Builds a bank from a coset system and one filter per class.
    pub fn new(cosets: CosetSystem, filters: Vec<Filter>) -> Result<Self> {
        if filters.len() != cosets.len() {
            return Err(Error::SizeMismatch { expected: cosets.len(), got: filters.len() });
        }
        let n = cosets.lattice().dim();
        for f in &filters {
            if f.dim() != n {
                return Err(Error::DimMismatch { expected: n, got: f.dim() });
            }
        }
        let dual = DualCosetSystem::new(cosets.lattice().clone());
        Ok(FilterBank { cosets, dual, filters })
    }

    /// The delta bank: filter k is the delta at coset representative k.
    pub fn lazy(lattice: LatticeBasis) -> Self {
        let cosets = CosetSystem::canonical(lattice);
        let filters = cosets.reps().iter().map(|r| Filter::delta(r.clone())).collect();
        FilterBank::new(cosets, filters).expect("one delta per class")
    }

    /// The two-tap averaging/differencing bank on Γ = 2Z.
    pub fn haar() -> Self {
        let lattice = LatticeBasis::one_dim(2).expect("2 is nonzero");
        let cosets = CosetSystem::canonical(lattice);
        let s = Complex64::new(1.0 / 2.0f64.sqrt(), 0.0);
        let f0 = Filter::from_taps(1, [(vec![0], s), (vec![1], s)]).expect("dim 1");
        let f1 = Filter::from_taps(1, [(vec![0], s), (vec![1], -s)]).expect("dim 1");
        FilterBank::new(cosets, vec![f0, f1]).expect("two filters, two classes")
    }

    /// The underlying lattice.
    pub fn lattice(&self) -> &LatticeBasis {
        self.cosets.lattice()
    }

    /// The coset representatives indexing the channels.
    pub fn cosets(&self) -> &CosetSystem {
        &self.cosets
    }

    /// The dual representatives indexing polyphase columns.
    pub fn dual(&self) -> &DualCosetSystem {
        &self.dual
    }

    /// Number of channels N.
    pub fn num_channels(&self) -> usize {
        self.filters.len()
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.cosets.lattice().dim()
    }

    /// All filters in channel order.
    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    /// Filter of channel k.
    pub fn filter(&self, k: usize) -> &Filter {
        &self.filters[k]
    }

    /// Replaces the filters, keeping the coset structure.
    pub fn with_filters(&self, filters: Vec<Filter>) -> Result<Self> {
        FilterBank::new(self.cosets.clone(), filters)
    }
}

/// Polyphase form of a bank: entry (k, ξ) = N^{-1/2}·φ̂_k(ω+ξ).
#[derive(Debug, Clone, PartialEq)]
pub struct QmfMatrix {
    matrix: LoopMatrix,
}

impl QmfMatrix {
    /// Wraps an arbitrary loop.  Genuine polyphase matrices come from
    /// [`qmf_matrix`]; this constructor exists so structure predicates
    /// can be exercised on loops that lack the polyphase form.
    pub fn from_loop(matrix: LoopMatrix) -> Self {
        QmfMatrix { matrix }
    }

    /// The underlying loop.
    pub fn loop_matrix(&self) -> &LoopMatrix {
        &self.matrix
    }
}

/// Fourier transform of a filter: taps s(m) become the Laurent
/// coefficient s(m) at exponent −m, so the polynomial is
/// Σ_m s(m)·e^{−i⟨ω,m⟩}.
pub fn fourier(f: &Filter) -> LaurentPoly {
    LaurentPoly::from_terms(
        f.dim(),
        f.taps().map(|(k, c)| (k.iter().map(|x| -x).collect(), *c)),
    )
    .expect("exponents share the filter dimension")
}

/// Polyphase matrix of a bank: row k, column ξ holds
/// N^{-1/2}·φ̂_k(ω+ξ) in the canonical coset/dual order.
pub fn qmf_matrix(fb: &FilterBank) -> QmfMatrix {
    let nch = fb.num_channels();
    let scale = Complex64::new(1.0 / (nch as f64).sqrt(), 0.0);
    let rows = fb
        .filters()
        .iter()
        .map(|f| {
            let hat = fourier(f).scale(scale);
            fb.dual().freqs().iter().map(|xi| hat.shift_frequency(xi)).collect()
        })
        .collect();
    QmfMatrix { matrix: LoopMatrix::from_rows(rows).expect("N rows of N entries") }
}

/// Verdict of the orthonormality check, locating the worst violated
/// inner product ⟨T_shift φ_col, φ_row⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct QmfReport {
    /// Whether translates of the filters are orthonormal within tol.
    pub ok: bool,
    /// Largest defect magnitude.
    pub residual: f64,
    /// Channel index k of the worst pair.
    pub row: usize,
    /// Channel index k′ of the worst pair.
    pub col: usize,
    /// Lattice shift γ of the worst inner product.
    pub shift: Vec<i64>,
}

/// Checks whether the Γ-translates of the bank's filters are
/// orthonormal, as a coefficient identity on the polyphase matrix.
///
/// The defect M·M* − I has entry (k, k′) with coefficient at exponent e
/// equal to ⟨T_γ φ_k′, φ_k⟩ − δ(k−k′)·δ(γ) for γ = −e, which is how the
/// report locates the worst inner product.
pub fn is_qmf(fb: &FilterBank, tol: f64) -> QmfReport {
    let r = qmf_matrix(fb).matrix.is_paraunitary(tol);
    QmfReport {
        ok: r.ok,
        residual: r.residual,
        row: r.row,
        col: r.col,
        shift: r.exponent.iter().map(|x| -x).collect(),
    }
}

/// Residual of the channel-power identity Σ_ξ |φ̂(ω+ξ)|² = N as a
/// polynomial: the largest coefficient magnitude of the difference.
/// Zero for any row of an orthonormal bank.
pub fn power_complementarity(f: &Filter, dual: &DualCosetSystem) -> f64 {
    let n = dual.len() as f64;
    let hat = fourier(f);
    let sq = hat.mul(&hat.para_adjoint()).expect("same dimension");
    let mut total = LaurentPoly::zero(f.dim());
    for xi in dual.freqs() {
        total = total.add(&sq.shift_frequency(xi)).expect("same dimension");
    }
    total
        .sub(&LaurentPoly::constant(f.dim(), Complex64::new(n, 0.0)))
        .expect("same dimension")
        .max_abs()
}

/// The exponential loop with entry (k, ξ) = N^{-1/2}·e^{i⟨ω+ξ,k⟩},
/// rows over coset representatives k, columns over dual
/// representatives ξ.  Paraunitary by construction.
pub fn character_matrix(cosets: &CosetSystem, dual: &DualCosetSystem) -> Result<LoopMatrix> {
    if cosets.len() != dual.len() {
        return Err(Error::SizeMismatch { expected: cosets.len(), got: dual.len() });
    }
    let scale = 1.0 / (cosets.len() as f64).sqrt();
    let rows = cosets
        .reps()
        .iter()
        .map(|k| {
            dual.freqs()
                .iter()
                .map(|xi| LaurentPoly::monomial(k.clone(), xi.character(k) * scale))
                .collect()
        })
        .collect();
    LoopMatrix::from_rows(rows)
}

/// Conjugates the polyphase matrix into the loop K = Mᵀ·F acting on
/// dual labels, with K_{ρ,ξ} = Σ_k M_{k,ρ}·F_{k,ξ}.  The result is
/// paraunitary and transforms under ω ↦ ω+ρ by conjugation with the
/// permutation of dual labels; see [`twisted_residual`].
///
/// Fails with `NotParaunitary` when the input matrix is not unitary for
/// every ω at the given tolerance.
pub fn loop_from_qmf(
    q: &QmfMatrix,
    cosets: &CosetSystem,
    dual: &DualCosetSystem,
    tol: f64,
) -> Result<LoopMatrix> {
    let r = q.matrix.is_paraunitary(tol);
    if !r.ok {
        return Err(Error::NotParaunitary { residual: r.residual, tol });
    }
    let f = character_matrix(cosets, dual)?;
    q.matrix.transpose().matmul(&f)
}

/// Largest coefficient deviation from the twisted transformation law
/// B(ω+ρ) = R(ρ)ᵀ·B(ω)·R(ρ) over all dual representatives ρ, where R
/// is the permutation representation of the dual quotient.
pub fn twisted_residual(m: &LoopMatrix, dual: &DualCosetSystem) -> Result<f64> {
    if m.size() != dual.len() {
        return Err(Error::SizeMismatch { expected: dual.len(), got: m.size() });
    }
    let mut worst = 0.0f64;
    for rho in 0..dual.len() {
        let r = crate::lattice::permutation_representation(rho, dual)?;
        let r_c: Vec<Vec<Complex64>> =
            r.iter().map(|row| row.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        let r_loop = LoopMatrix::from_constant(m.dim(), &r_c)?;
        let conjugated = r_loop.transpose().matmul(m)?.matmul(&r_loop)?;
        let shifted = m.shift_frequency(&dual.freqs()[rho]);
        worst = worst.max(shifted.max_diff(&conjugated));
    }
    Ok(worst)
}

/// Product χ₁·χ₂* of two polyphase matrices together with the verdict
/// of the lattice-periodicity test on it.  For genuine orthonormal
/// banks on the same lattice the product is exactly Γ-periodic: every
/// exponent is a lattice point.
///
/// Both inputs must be paraunitary at tol.
pub fn periodic_factor(
    q1: &QmfMatrix,
    q2: &QmfMatrix,
    dual: &DualCosetSystem,
    tol: f64,
) -> Result<(LoopMatrix, bool)> {
    require_paraunitary(q1, tol)?;
    require_paraunitary(q2, tol)?;
    let product = q1.matrix.matmul(&q2.matrix.para_adjoint())?;
    let verdict = product.is_lattice_periodic(dual, tol);
    Ok((product, verdict))
}

/// Product χ₁*·χ₂ of two polyphase matrices together with the verdict
/// of the twisted transformation law on it (residual ≤ tol).  For
/// genuine orthonormal banks on the same lattice the law holds
/// coefficient-exactly.
///
/// Both inputs must be paraunitary at tol.
pub fn twisted_factor(
    q1: &QmfMatrix,
    q2: &QmfMatrix,
    dual: &DualCosetSystem,
    tol: f64,
) -> Result<(LoopMatrix, bool)> {
    require_paraunitary(q1, tol)?;
    require_paraunitary(q2, tol)?;
    let product = q1.matrix.para_adjoint().matmul(&q2.matrix)?;
    let verdict = twisted_residual(&product, dual)? <= tol;
    Ok((product, verdict))
}

fn require_paraunitary(q: &QmfMatrix, tol: f64) -> Result<()> {
    let r = q.matrix.is_paraunitary(tol);
    if r.ok {
        Ok(())
    } else {
        Err(Error::NotParaunitary { residual: r.residual, tol })
    }
}

/// Moments Σ_m m^p·f(m) for p = 0..=p_max of a one-dimensional filter.
pub fn vanishing_moments(f: &Filter, p_max: usize) -> Result<Vec<Complex64>> {
    if f.dim() != 1 {
        return Err(Error::DimUnsupported { expected: 1, got: f.dim() });
    }
    Ok((0..=p_max)
        .map(|p| {
            f.taps()
                .map(|(k, c)| c * Complex64::new((k[0] as f64).powi(p as i32), 0.0))
                .sum()
        })
        .collect())
}

/// Recovers the pre-filters (η₀, η₁) of a two-channel one-dimensional
/// bank from φ₀ = η̃₀ and φ₁ = T₁*η̃₁, where g̃(k) = conj(g(−k)):
/// η₀(m) = conj(φ₀(−m)) and η₁(m) = conj(φ₁(−m−1)).
///
/// With the even/odd restriction projectors Π₀ and Π₁ = T₁Π₀T₁*, an
/// orthonormal bank satisfies ‖s‖² = ‖Π₀(η₀∗s)‖² + ‖Π₁(η₁∗s)‖².
pub fn prefilters_1d(fb: &FilterBank) -> Result<(Filter, Filter)> {
    if fb.dim() != 1 {
        return Err(Error::DimUnsupported { expected: 1, got: fb.dim() });
    }
    if fb.num_channels() != 2 {
        return Err(Error::SizeMismatch { expected: 2, got: fb.num_channels() });
    }
    let eta0 = fb.filter(0).conj_reflect();
    let eta1 = fb.filter(1).translate(&[1]).conj_reflect();
    Ok((eta0, eta1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{coset_representatives, dual_coset_representatives};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inv_sqrt2() -> f64 {
        1.0 / 2.0f64.sqrt()
    }

    fn two_z() -> LatticeBasis {
        LatticeBasis::one_dim(2).unwrap()
    }

    fn d4_bank() -> FilterBank {
        let r3 = 3.0f64.sqrt();
        let h = [1.0 + r3, 3.0 + r3, 3.0 - r3, 1.0 - r3].map(|x| x / (4.0 * 2.0f64.sqrt()));
        let f0 = Filter::from_taps(1, (0..4).map(|i| (vec![i as i64], c(h[i], 0.0)))).unwrap();
        let f1 = Filter::from_taps(
            1,
            (0..4).map(|i| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                (vec![i as i64], c(sign * h[3 - i], 0.0))
            }),
        )
        .unwrap();
        FilterBank::new(CosetSystem::canonical(two_z()), vec![f0, f1]).unwrap()
    }

    /// All inner products ⟨T_γ φ_k, φ_k′⟩ over lattice shifts covering
    /// the joint support, compared against δ(k−k′)δ(γ).
    fn brute_force_orthonormal(fb: &FilterBank, tol: f64) -> bool {
        let lattice = fb.lattice();
        let diameter = fb
            .filters()
            .iter()
            .filter_map(|f| f.support_box())
            .map(|(lo, hi)| {
                lo.iter().zip(&hi).map(|(a, b)| (b - a).unsigned_abs()).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0) as i64;
        let bound = diameter + 1;
        let n = fb.dim();
        let mut coords = vec![-bound; n];
        loop {
            let gamma = lattice.mul_vec(&coords);
            if gamma.iter().all(|g| g.abs() <= 2 * bound) {
                for k in 0..fb.num_channels() {
                    for kp in 0..fb.num_channels() {
                        let want = if k == kp && gamma.iter().all(|&g| g == 0) { 1.0 } else { 0.0 };
                        let got = fb.filter(k).translate(&gamma).inner(fb.filter(kp));
                        if (got - c(want, 0.0)).norm() > tol {
                            return false;
                        }
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return true;
                }
                coords[i] += 1;
                if coords[i] <= bound {
                    break;
                }
                coords[i] = -bound;
                i += 1;
            }
        }
    }

    #[test]
    fn fourier_examples() {
        assert_eq!(fourier(&Filter::delta(vec![0])), LaurentPoly::constant(1, c(1.0, 0.0)));
        let d1 = fourier(&Filter::delta(vec![1]));
        assert_eq!(d1.coeff(&[-1]), c(1.0, 0.0));
        assert_eq!(d1.num_terms(), 1);

        let h0 = fourier(FilterBank::haar().filter(0));
        assert_eq!(h0.coeff(&[0]), c(inv_sqrt2(), 0.0));
        assert_eq!(h0.coeff(&[-1]), c(inv_sqrt2(), 0.0));
    }

    #[test]
    fn qmf_matrix_of_lazy_bank() {
        let m = qmf_matrix(&FilterBank::lazy(two_z()));
        let s = inv_sqrt2();
        let loop_m = m.loop_matrix();
        assert_eq!(loop_m.get(0, 0).coeff(&[0]), c(s, 0.0));
        assert_eq!(loop_m.get(0, 1).coeff(&[0]), c(s, 0.0));
        assert_eq!(loop_m.get(1, 0).coeff(&[-1]), c(s, 0.0));
        assert_eq!(loop_m.get(1, 1).coeff(&[-1]), c(-s, 0.0));
        for entry in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(loop_m.get(entry.0, entry.1).num_terms(), 1);
        }
    }

    #[test]
    fn qmf_matrix_single_channel() {
        let one = LatticeBasis::one_dim(1).unwrap();
        let m = qmf_matrix(&FilterBank::lazy(one));
        assert_eq!(m.loop_matrix().size(), 1);
        assert_eq!(m.loop_matrix().get(0, 0).coeff(&[0]), c(1.0, 0.0));
    }

    #[test]
    fn haar_matrix_unitary_on_grid() {
        let m = qmf_matrix(&FilterBank::haar());
        assert!(m.loop_matrix().is_paraunitary(1e-14).ok);
        for g in 0..8 {
            let w = [0.3 + g as f64];
            let e = m.loop_matrix().eval(&w).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let got = e[i][0] * e[j][0].conj() + e[i][1] * e[j][1].conj();
                    assert!((got - c(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn is_qmf_examples() {
        assert!(is_qmf(&FilterBank::lazy(two_z()), 1e-14).ok);
        assert!(is_qmf(&FilterBank::haar(), 1e-14).ok);
        assert!(is_qmf(&FilterBank::lazy(LatticeBasis::new(vec![vec![1, 1], vec![1, -1]]).unwrap()), 1e-14).ok);

        let dup = FilterBank::new(
            CosetSystem::canonical(two_z()),
            vec![Filter::delta(vec![0]), Filter::delta(vec![0])],
        )
        .unwrap();
        let r = is_qmf(&dup, 1e-10);
        assert!(!r.ok);
        assert!((r.residual - 1.0).abs() < 1e-12);
        assert_ne!(r.row, r.col);
        assert_eq!(r.shift, vec![0]);
    }

    #[test]
    fn is_qmf_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let mut bank = d4_bank();
            let should_pass = rng.gen_bool(0.5);
            if !should_pass {
                let eps = rng.gen_range(1e-4..1e-2);
                let filters = vec![
                    bank.filter(0).add(&Filter::delta(vec![0]).scale(c(eps, 0.0))).unwrap(),
                    bank.filter(1).clone(),
                ];
                bank = bank.with_filters(filters).unwrap();
            }
            assert_eq!(is_qmf(&bank, 1e-10).ok, should_pass);
            assert_eq!(brute_force_orthonormal(&bank, 1e-10), should_pass);
        }
        assert!(is_qmf(&d4_bank(), 1e-12).ok);
        assert!(brute_force_orthonormal(&d4_bank(), 1e-12));
    }

    #[test]
    fn report_residual_matches_inner_product_defect() {
        let bank = FilterBank::haar();
        let shrunk = bank
            .with_filters(vec![bank.filter(0).clone(), bank.filter(1).scale(c(0.9, 0.0))])
            .unwrap();
        let r = is_qmf(&shrunk, 1e-10);
        assert!(!r.ok);
        assert!((r.residual - 0.19).abs() < 1e-12);
        assert_eq!((r.row, r.col), (1, 1));
        assert_eq!(r.shift, vec![0]);
        let got = shrunk.filter(1).inner(shrunk.filter(1));
        assert!(((got - c(1.0, 0.0)).norm() - r.residual).abs() < 1e-12);
    }

    #[test]
    fn power_complementarity_examples() {
        let dual = dual_coset_representatives(&two_z());
        assert!(power_complementarity(FilterBank::haar().filter(0), &dual) < 1e-14);
        assert!(power_complementarity(FilterBank::haar().filter(1), &dual) < 1e-14);
        assert_eq!(power_complementarity(&Filter::delta(vec![0]), &dual), 0.0);
        let half = Filter::delta(vec![0]).scale(c(0.5, 0.0));
        assert!((power_complementarity(&half, &dual) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn power_complementarity_bounded_by_scaled_residual() {
        let dual = dual_coset_representatives(&two_z());
        for bank in [
            FilterBank::haar(),
            FilterBank::haar()
                .with_filters(vec![
                    FilterBank::haar().filter(0).scale(c(0.5, 0.0)),
                    FilterBank::haar().filter(1).clone(),
                ])
                .unwrap(),
        ] {
            let r = is_qmf(&bank, 1e-10).residual;
            let nch = bank.num_channels() as f64;
            for f in bank.filters() {
                assert!(power_complementarity(f, &dual) <= nch * r + 1e-12);
            }
        }
    }

    #[test]
    fn character_matrix_examples() {
        let one = LatticeBasis::one_dim(1).unwrap();
        let f = character_matrix(
            &coset_representatives(&one),
            &dual_coset_representatives(&one),
        )
        .unwrap();
        assert_eq!(f.get(0, 0).coeff(&[0]), c(1.0, 0.0));

        let cosets = coset_representatives(&two_z());
        let dual = dual_coset_representatives(&two_z());
        let f = character_matrix(&cosets, &dual).unwrap();
        let s = inv_sqrt2();
        assert_eq!(f.get(0, 0).coeff(&[0]), c(s, 0.0));
        assert_eq!(f.get(0, 1).coeff(&[0]), c(s, 0.0));
        assert_eq!(f.get(1, 0).coeff(&[1]), c(s, 0.0));
        assert_eq!(f.get(1, 1).coeff(&[1]), c(-s, 0.0));
        assert!(f.is_paraunitary(1e-14).ok);
    }

    #[test]
    fn character_matrix_is_adjoint_transpose_of_lazy_polyphase() {
        for lattice in [two_z(), LatticeBasis::new(vec![vec![1, 1], vec![1, -1]]).unwrap()] {
            let cosets = coset_representatives(&lattice);
            let dual = dual_coset_representatives(&lattice);
            let f = character_matrix(&cosets, &dual).unwrap();
            let m = qmf_matrix(&FilterBank::lazy(lattice));
            assert_eq!(f, m.loop_matrix().para_adjoint().transpose());
        }
    }

    #[test]
    fn loop_from_qmf_examples() {
        let cosets = coset_representatives(&two_z());
        let dual = dual_coset_representatives(&two_z());

        let lazy = qmf_matrix(&FilterBank::lazy(two_z()));
        let k = loop_from_qmf(&lazy, &cosets, &dual, 1e-10).unwrap();
        assert!(k.max_diff(&LoopMatrix::identity(1, 2)) < 1e-15);

        let haar = qmf_matrix(&FilterBank::haar());
        let k = loop_from_qmf(&haar, &cosets, &dual, 1e-10).unwrap();
        assert!(k.is_paraunitary(1e-12).ok);
        assert!(twisted_residual(&k, &dual).unwrap() < 1e-12);

        let bad = FilterBank::new(
            cosets.clone(),
            vec![Filter::delta(vec![0]), Filter::delta(vec![0])],
        )
        .unwrap();
        assert!(matches!(
            loop_from_qmf(&qmf_matrix(&bad), &cosets, &dual, 1e-10),
            Err(Error::NotParaunitary { .. })
        ));
    }

    #[test]
    fn twisted_law_direction_distinguished() {
        let lattice = LatticeBasis::one_dim(4).unwrap();
        let cosets = coset_representatives(&lattice);
        let dual = dual_coset_representatives(&lattice);

        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..4 {
            let mut v: Vec<Complex64> =
                (0..4).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            for prev in &cols {
                let proj: Complex64 =
                    prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
                for i in 0..4 {
                    v[i] -= proj * prev[i];
                }
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            for x in &mut v {
                *x /= norm;
            }
            cols.push(v);
        }
        let u: Vec<Vec<Complex64>> =
            (0..4).map(|i| (0..4).map(|j| cols[j][i]).collect()).collect();

        let filters = (0..4)
            .map(|k| {
                Filter::from_taps(1, (0..4).map(|j| (vec![j as i64], u[k][j as usize]))).unwrap()
            })
            .collect();
        let bank = FilterBank::new(cosets.clone(), filters).unwrap();
        assert!(is_qmf(&bank, 1e-10).ok);

        let k = loop_from_qmf(&qmf_matrix(&bank), &cosets, &dual, 1e-10).unwrap();
        assert!(twisted_residual(&k, &dual).unwrap() < 1e-12);

        let mut flipped_worst = 0.0f64;
        for rho in 0..dual.len() {
            let shifted = k.shift_frequency(&dual.freqs()[rho]);
            let mut conj = LoopMatrix::zero(1, 4);
            for i in 0..4 {
                for j in 0..4 {
                    let a = dual.add(i, dual.neg(rho));
                    let b = dual.add(j, dual.neg(rho));
                    *conj.get_mut(i, j) = k.get(a, b).clone();
                }
            }
            flipped_worst = flipped_worst.max(shifted.max_diff(&conj));
        }
        assert!(flipped_worst > 1e-3, "flipped law should fail, got {}", flipped_worst);
    }

    #[test]
    fn periodic_factor_examples() {
        let dual = dual_coset_representatives(&two_z());
        let lazy = qmf_matrix(&FilterBank::lazy(two_z()));
        let haar = qmf_matrix(&FilterBank::haar());

        let (p, verdict) = periodic_factor(&haar, &haar, &dual, 1e-10).unwrap();
        assert!(verdict);
        assert!(p.max_diff(&LoopMatrix::identity(1, 2)) < 1e-14);

        let (p, verdict) = periodic_factor(&lazy, &haar, &dual, 1e-10).unwrap();
        assert!(verdict);
        assert!(p.is_paraunitary(1e-12).ok);

        let bad = FilterBank::new(
            CosetSystem::canonical(two_z()),
            vec![Filter::delta(vec![0]), Filter::delta(vec![0])],
        )
        .unwrap();
        assert!(periodic_factor(&haar, &qmf_matrix(&bad), &dual, 1e-10).is_err());

        let monomial = QmfMatrix::from_loop(
            LoopMatrix::from_rows(vec![
                vec![LaurentPoly::monomial(vec![1], c(1.0, 0.0)), LaurentPoly::zero(1)],
                vec![LaurentPoly::zero(1), LaurentPoly::monomial(vec![1], c(1.0, 0.0))],
            ])
            .unwrap(),
        );
        let (_, verdict) = periodic_factor(&lazy, &monomial, &dual, 1e-10).unwrap();
        assert!(!verdict);
    }

    #[test]
    fn twisted_factor_examples() {
        let dual = dual_coset_representatives(&two_z());
        let lazy = qmf_matrix(&FilterBank::lazy(two_z()));
        let haar = qmf_matrix(&FilterBank::haar());

        let (t, verdict) = twisted_factor(&haar, &haar, &dual, 1e-10).unwrap();
        assert!(verdict);
        assert!(t.max_diff(&LoopMatrix::identity(1, 2)) < 1e-14);

        let (t, verdict) = twisted_factor(&lazy, &haar, &dual, 1e-10).unwrap();
        assert!(verdict);
        assert!(t.is_paraunitary(1e-12).ok);

        let not_polyphase = QmfMatrix::from_loop(LoopMatrix::identity(1, 2));
        let (_, verdict) = twisted_factor(&haar, &not_polyphase, &dual, 1e-10).unwrap();
        assert!(!verdict);
    }

    #[test]
    fn vanishing_moments_examples() {
        let haar = FilterBank::haar();
        let m = vanishing_moments(haar.filter(1), 1).unwrap();
        assert_eq!(m[0], c(0.0, 0.0));
        assert_eq!(m[1], c(-inv_sqrt2(), 0.0));

        let m = vanishing_moments(&Filter::delta(vec![0]), 3).unwrap();
        assert_eq!(m, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        assert!(matches!(
            vanishing_moments(&Filter::delta(vec![0, 0]), 1),
            Err(Error::DimUnsupported { .. })
        ));
    }

    #[test]
    fn prefilters_examples() {
        let (e0, e1) = prefilters_1d(&FilterBank::lazy(two_z())).unwrap();
        assert_eq!(e0, Filter::delta(vec![0]));
        assert_eq!(e1, Filter::delta(vec![-2]));

        let (e0, e1) = prefilters_1d(&FilterBank::haar()).unwrap();
        let s = inv_sqrt2();
        assert_eq!(e0.tap(&[0]), c(s, 0.0));
        assert_eq!(e0.tap(&[-1]), c(s, 0.0));
        assert_eq!(e1.tap(&[-1]), c(s, 0.0));
        assert_eq!(e1.tap(&[-2]), c(-s, 0.0));

        assert!(prefilters_1d(&FilterBank::lazy(
            LatticeBasis::new(vec![vec![1, 1], vec![1, -1]]).unwrap()
        ))
        .is_err());
    }

    #[test]
    fn prefilters_rebuild_filters() {
        for bank in [FilterBank::lazy(two_z()), FilterBank::haar(), d4_bank()] {
            let (e0, e1) = prefilters_1d(&bank).unwrap();
            let phi0 = e0.conj_reflect();
            let phi1 = e1.conj_reflect().translate(&[-1]);
            assert_eq!(&phi0, bank.filter(0));
            assert_eq!(&phi1, bank.filter(1));
        }
    }

    #[test]
    fn prefilter_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for bank in [FilterBank::haar(), d4_bank()] {
            let (e0, e1) = prefilters_1d(&bank).unwrap();
            for _ in 0..10 {
                let s = Filter::from_taps(
                    1,
                    (0..12).map(|i| {
                        (vec![i - 6], c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    }),
                )
                .unwrap();
                let even = |f: &Filter| {
                    Filter::from_taps(
                        1,
                        f.taps().filter(|(k, _)| k[0] % 2 == 0).map(|(k, c)| (k.clone(), *c)),
                    )
                    .unwrap()
                };
                let odd = |f: &Filter| {
                    Filter::from_taps(
                        1,
                        f.taps().filter(|(k, _)| k[0].rem_euclid(2) == 1).map(|(k, c)| (k.clone(), *c)),
                    )
                    .unwrap()
                };
                let part0 = even(&e0.convolve(&s).unwrap());
                let part1 = odd(&e1.convolve(&s).unwrap());
                let total = part0.energy() + part1.energy();
                assert!((total - s.energy()).abs() < 1e-12 * s.energy().max(1.0));
            }
        }
    }
}
