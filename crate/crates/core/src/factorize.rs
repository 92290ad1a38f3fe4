//! Product structure of orthonormal banks: elementary
//! fundamental-domain unitaries, synthesis of banks as products of such
//! steps, and the two-channel one-dimensional peel-off factorization
//! that inverts the synthesis.
//!
//! An elementary step is the unique unitary commuting with lattice
//! translates whose restriction to the deltas over a fundamental domain
//! F = {f_0, …, f_{N−1}} is a given N×N unitary u:
//! δ_{f_j + γ} ↦ Σ_i u_{ij}·δ_{f_i + γ}.  Applied to a filter this
//! multiplies each F-aligned block of taps by u.  Steps on different
//! domains do not commute in general, which is what makes products of
//! them reach long filters.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filterbank::{is_qmf, Filter, FilterBank};
use crate::lattice::{CosetSystem, LatticeBasis};
use crate::DEFAULT_TOL;

/// Norm threshold below which a boundary vector counts as absent when
/// the factorization picks rotation axes.
pub const RANK_EPS: f64 = 1e-9;

/// Mass allowed to fall outside the shrinking support window during a
/// peel step before the factorization reports failure.
const DISCARD_EPS: f64 = 1e-8;

/// A finite unitary attached to a fundamental domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryStep {
    unitary: Vec<Vec<Complex64>>,
    domain: CosetSystem,
}

impl ElementaryStep {
    /// Validates that the matrix is square of the domain's size and
    /// unitary to 1e-12.
    pub fn new(unitary: Vec<Vec<Complex64>>, domain: CosetSystem) -> Result<Self> {
        let n = domain.len();
        if unitary.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: unitary.len() });
        }
        for row in &unitary {
            if row.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: row.len() });
            }
        }
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    dot += unitary[i][k] * unitary[j][k].conj();
                }
                let want = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((dot - Complex64::new(want, 0.0)).norm());
            }
        }
        if residual > 1e-12 {
            return Err(Error::NonUnitaryStep { residual });
        }
        Ok(ElementaryStep { unitary, domain })
    }

    /// The matrix acting on delta coordinates over the domain.
    pub fn unitary(&self) -> &[Vec<Complex64>] {
        &self.unitary
    }

    /// The fundamental domain, in the order matching matrix indices.
    pub fn domain(&self) -> &CosetSystem {
        &self.domain
    }

    /// The inverse step: conjugate transpose on the same domain.
    pub fn adjoint(&self) -> ElementaryStep {
        let n = self.unitary.len();
        let unitary = (0..n)
            .map(|i| (0..n).map(|j| self.unitary[j][i].conj()).collect())
            .collect();
        ElementaryStep { unitary, domain: self.domain.clone() }
    }

    /// Whether the matrix is exactly the identity.
    pub fn is_identity(&self) -> bool {
        let n = self.unitary.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 1.0 } else { 0.0 };
                self.unitary[i][j] == Complex64::new(want, 0.0)
            })
        })
    }
}

/// Applies the step's translation-commuting unitary to every filter of
/// the bank: each tap block over a translate of the domain is
/// multiplied by the step matrix.
pub fn elementary_apply(step: &ElementaryStep, fb: &FilterBank) -> Result<FilterBank> {
    if step.domain.lattice().normal_form() != fb.lattice().normal_form() {
        return Err(Error::DomainNotFundamental(
            "step domain lives on a different lattice than the bank".into(),
        ));
    }
    let domain = &step.domain;
    let u = &step.unitary;
    let filters = fb
        .filters()
        .iter()
        .map(|phi| {
            let mut pairs: Vec<(Vec<i64>, Complex64)> = Vec::new();
            for (x, v) in phi.taps() {
                let j = domain.index_of(x);
                let gamma: Vec<i64> =
                    x.iter().zip(&domain.reps()[j]).map(|(a, b)| a - b).collect();
                for (i, f_i) in domain.reps().iter().enumerate() {
                    if u[i][j].norm() == 0.0 {
                        continue;
                    }
                    let pos: Vec<i64> = f_i.iter().zip(&gamma).map(|(a, b)| a + b).collect();
                    pairs.push((pos, u[i][j] * v));
                }
            }
            Filter::from_taps(fb.dim(), pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    fb.with_filters(filters)
}

/// Builds a bank by applying the steps in order to the delta bank and
/// then translating every filter by the given integer vector.  The
/// result of any such product is an orthonormal bank with finitely
/// supported filters.
pub fn synthesize(
    lattice: &LatticeBasis,
    steps: &[ElementaryStep],
    translation: &[i64],
) -> Result<FilterBank> {
    if translation.len() != lattice.dim() {
        return Err(Error::DimMismatch { expected: lattice.dim(), got: translation.len() });
    }
    let mut bank = FilterBank::lazy(lattice.clone());
    for step in steps {
        bank = elementary_apply(step, &bank)?;
    }
    if translation.iter().any(|&t| t != 0) {
        let filters = bank.filters().iter().map(|f| f.translate(translation)).collect();
        bank = bank.with_filters(filters)?;
    }
    Ok(bank)
}

/// Steps plus a global translation reproducing a bank through
/// [`reconstruct`].
#[derive(Debug, Clone)]
pub struct FactorizationResult {
    /// Net translation applied after all steps.  May be negative.
    pub translation: Vec<i64>,
    /// Steps in application order: the first entry acts on the delta
    /// bank first.
    pub steps: Vec<ElementaryStep>,
}

/// Rebuilds the bank encoded by a factorization.
pub fn reconstruct(r: &FactorizationResult, lattice: &LatticeBasis) -> Result<FilterBank> {
    synthesize(lattice, &r.steps, &r.translation)
}

/// Peels a two-channel bank on 2Z into elementary steps on
/// length-2 windows.
///
/// The filters are translated so their joint support is [0, 2L−1].
/// Each round reads the boundary pairs (ψ_k(0), ψ_k(1)) and
/// (ψ_k(2ℓ−2), ψ_k(2ℓ−1)); orthonormality of translates makes every
/// left pair orthogonal to every right pair, so a 2×2 unitary built
/// from the two directions empties positions 0 and 2ℓ−1 at once.
/// Shifting by one then shortens the window by two.  The residual
/// window of length 2 is itself one elementary step.  Inverting the
/// recursion yields steps whose reconstruction reproduces the input
/// exactly up to floating error; exact-identity steps are dropped.
pub fn factorize_1d(fb: &FilterBank) -> Result<FactorizationResult> {
    if fb.dim() != 1 {
        return Err(Error::DimUnsupported { expected: 1, got: fb.dim() });
    }
    if fb.num_channels() != 2 || fb.lattice().normal_form() != [vec![2]] {
        return Err(Error::Unsupported(
            "factorization is defined for two channels on the index-2 lattice".into(),
        ));
    }
    let report = is_qmf(fb, DEFAULT_TOL);
    if !report.ok {
        return Err(Error::NotParaunitary { residual: report.residual, tol: DEFAULT_TOL });
    }

    let (lo0, hi0) = fb.filter(0).support_box().expect("orthonormal filters are nonzero");
    let (lo1, hi1) = fb.filter(1).support_box().expect("orthonormal filters are nonzero");
    let lo = lo0[0].min(lo1[0]);
    let hi = hi0[0].max(hi1[0]);
    let len = (hi - lo + 1) as usize;
    let big_l = len.div_ceil(2);

    let mut psi: [Vec<Complex64>; 2] = [
        dense_taps(fb.filter(0), lo, 2 * big_l),
        dense_taps(fb.filter(1), lo, 2 * big_l),
    ];

    let mut peels: Vec<[[Complex64; 2]; 2]> = Vec::new();
    for ell in (2..=big_l).rev() {
        let w = 2 * ell;
        let left = [[psi[0][0], psi[0][1]], [psi[1][0], psi[1][1]]];
        let right = [
            [psi[0][w - 2], psi[0][w - 1]],
            [psi[1][w - 2], psi[1][w - 1]],
        ];
        let u = peel_unitary(&left, &right)?;
        let mut next: [Vec<Complex64>; 2] = [vec![Complex64::new(0.0, 0.0); w - 2], vec![
            Complex64::new(0.0, 0.0);
            w - 2
        ]];
        for k in 0..2 {
            let mut transformed = vec![Complex64::new(0.0, 0.0); w];
            let mut block = 0;
            while block + 1 < w {
                let a = psi[k][block];
                let b = psi[k][block + 1];
                transformed[block] = u[0][0] * a + u[0][1] * b;
                transformed[block + 1] = u[1][0] * a + u[1][1] * b;
                block += 2;
            }
            let spill = transformed[0].norm().max(transformed[w - 1].norm());
            if spill > DISCARD_EPS {
                return Err(Error::SupportNotReducible(format!(
                    "window edge keeps mass {spill:e} after a peel step"
                )));
            }
            next[k] = transformed[1..w - 1].to_vec();
        }
        psi = next;
        peels.push(u);
    }

    let w = orthonormalize_columns([[psi[0][0], psi[1][0]], [psi[0][1], psi[1][1]]]);

    let lattice = fb.lattice();
    let mut steps = Vec::with_capacity(big_l);
    let terminal =
        ElementaryStep::new(matrix_to_rows(&w), CosetSystem::canonical(lattice.clone()))?;
    if !terminal.is_identity() {
        steps.push(terminal);
    }
    for (i, u) in peels.iter().rev().enumerate() {
        let shift = -(i as i64 + 1);
        let domain = CosetSystem::with_reps(
            lattice.clone(),
            vec![vec![shift], vec![shift + 1]],
        )?;
        let v = conj_transpose(u);
        let step = ElementaryStep::new(matrix_to_rows(&v), domain)?;
        if !step.is_identity() {
            steps.push(step);
        }
    }
    let translation = vec![lo + big_l as i64 - 1];
    Ok(FactorizationResult { translation, steps })
}

fn dense_taps(f: &Filter, lo: i64, len: usize) -> Vec<Complex64> {
    (0..len as i64).map(|x| f.tap(&[x + lo])).collect()
}

fn matrix_to_rows(m: &[[Complex64; 2]; 2]) -> Vec<Vec<Complex64>> {
    m.iter().map(|row| row.to_vec()).collect()
}

fn conj_transpose(m: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

fn vec_norm(v: &[Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn normalize(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = vec_norm(&v);
    [v[0] / n, v[1] / n]
}

/// Unit vector orthogonal to p, biased toward the standard basis.
fn complete_orthonormal(p: &[Complex64; 2]) -> [Complex64; 2] {
    for e in [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]] {
        let proj = p[0].conj() * e[0] + p[1].conj() * e[1];
        let v = [e[0] - proj * p[0], e[1] - proj * p[1]];
        if vec_norm(&v) > 0.5 {
            return normalize(v);
        }
    }
    unreachable!("a unit vector cannot be near both standard basis vectors at once")
}

/// The 2×2 unitary with first row the adjoint of the dominant right
/// boundary direction and second row the adjoint of the dominant left
/// one, so that left pairs map into the second slot and right pairs
/// into the first.
fn peel_unitary(left: &[[Complex64; 2]; 2], right: &[[Complex64; 2]; 2]) -> Result<[[Complex64; 2]; 2]> {
    let pick = |side: &[[Complex64; 2]; 2]| {
        if vec_norm(&side[0]) >= vec_norm(&side[1]) {
            side[0]
        } else {
            side[1]
        }
    };
    let l_raw = pick(left);
    let r_raw = pick(right);
    let l_norm = vec_norm(&l_raw);
    let r_norm = vec_norm(&r_raw);

    let (r_hat, l_hat) = if r_norm <= RANK_EPS && l_norm <= RANK_EPS {
        (
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        )
    } else if r_norm <= RANK_EPS {
        let l_hat = normalize(l_raw);
        (complete_orthonormal(&l_hat), l_hat)
    } else if l_norm <= RANK_EPS {
        let r_hat = normalize(r_raw);
        let l_hat = complete_orthonormal(&r_hat);
        (r_hat, l_hat)
    } else if r_norm >= l_norm {
        let r_hat = normalize(r_raw);
        let proj = r_hat[0].conj() * l_raw[0] + r_hat[1].conj() * l_raw[1];
        let l_res = [l_raw[0] - proj * r_hat[0], l_raw[1] - proj * r_hat[1]];
        if vec_norm(&l_res) <= RANK_EPS {
            return Err(Error::SupportNotReducible(
                "left and right boundary directions are not independent".into(),
            ));
        }
        (r_hat, normalize(l_res))
    } else {
        let l_hat = normalize(l_raw);
        let proj = l_hat[0].conj() * r_raw[0] + l_hat[1].conj() * r_raw[1];
        let r_res = [r_raw[0] - proj * l_hat[0], r_raw[1] - proj * l_hat[1]];
        if vec_norm(&r_res) <= RANK_EPS {
            return Err(Error::SupportNotReducible(
                "left and right boundary directions are not independent".into(),
            ));
        }
        (normalize(r_res), l_hat)
    };

    Ok([
        [r_hat[0].conj(), r_hat[1].conj()],
        [l_hat[0].conj(), l_hat[1].conj()],
    ])
}

/// Gram–Schmidt on the columns, first column first.
fn orthonormalize_columns(m: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let c0 = normalize([m[0][0], m[1][0]]);
    let proj = c0[0].conj() * m[0][1] + c0[1].conj() * m[1][1];
    let c1 = normalize([m[0][1] - proj * c0[0], m[1][1] - proj * c0[1]]);
    [[c0[0], c1[0]], [c0[1], c1[1]]]
}

/// A unitary matrix drawn by orthonormalizing a Gaussian matrix;
/// orthogonal (real) when real_only is set.  All randomness comes from
/// the supplied generator.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize, real_only: bool) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = if real_only { 0.0 } else { rng.sample(StandardNormal) };
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    for j in 0..n {
        for i in 0..j {
            let proj: Complex64 =
                cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
            for k in 0..n {
                let correction = proj * cols[i][k];
                cols[j][k] -= correction;
            }
        }
        let norm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// A seeded random orthonormal bank: num_steps random unitaries applied
/// on alternating fundamental domains (the canonical one and its shift
/// by the first unit vector).  Deterministic for a given seed and flag.
pub fn random_qmf(
    lattice: &LatticeBasis,
    num_steps: usize,
    seed: u64,
    real_only: bool,
) -> Result<FilterBank> {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lattice.index();
    let canonical = CosetSystem::canonical(lattice.clone());
    let mut steps = Vec::with_capacity(num_steps);
    for j in 0..num_steps {
        let mut offset = vec![0i64; lattice.dim()];
        offset[0] = (j % 2) as i64;
        let reps = canonical
            .reps()
            .iter()
            .map(|r| r.iter().zip(&offset).map(|(a, b)| a + b).collect())
            .collect();
        let domain = CosetSystem::with_reps(lattice.clone(), reps)?;
        steps.push(ElementaryStep::new(random_unitary(&mut rng, n, real_only), domain)?);
    }
    synthesize(lattice, &steps, &vec![0; lattice.dim()])
}
