//! Signal-domain transforms: subband analysis/synthesis, the
//! translation-commuting unitary of a bank, and coset restriction.
//!
//! Subband channels are indexed in lattice coordinates: channel k holds
//! values at integer vectors m standing for the lattice point B·m.  All
//! transforms are direct sums over the finite supports; supports at desk
//! scale keep this fast, and exact support bookkeeping matters more
//! here than an FFT would (an FFT path could be added behind the same
//! API).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filterbank::{fourier, is_qmf, Filter, FilterBank};
use crate::lattice::{DualCosetSystem, LatticeBasis};
use crate::laurent::LaurentPoly;

/// A finitely supported sequence on Zⁿ; same representation as a
/// filter.
pub type Signal = Filter;

/// One channel of coefficients per residue class, indexed in lattice
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    lattice: LatticeBasis,
    channels: Vec<Filter>,
}

impl SubbandSet {
    /// Builds a subband set; one channel per residue class, all in the
    /// lattice's coordinate dimension.
    pub fn new(lattice: LatticeBasis, channels: Vec<Filter>) -> Result<Self> {
        if channels.len() != lattice.index() {
            return Err(Error::SizeMismatch { expected: lattice.index(), got: channels.len() });
        }
        for ch in &channels {
            if ch.dim() != lattice.dim() {
                return Err(Error::DimMismatch { expected: lattice.dim(), got: ch.dim() });
            }
        }
        Ok(SubbandSet { lattice, channels })
    }

    /// The lattice whose coordinates index the channels.
    pub fn lattice(&self) -> &LatticeBasis {
        &self.lattice
    }

    /// Number of channels.
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// All channels in order.
    pub fn channels(&self) -> &[Filter] {
        &self.channels
    }

    /// Channel k.
    pub fn channel(&self, k: usize) -> &Filter {
        &self.channels[k]
    }

    /// Squared norm of each channel.
    pub fn energies(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.energy()).collect()
    }

    /// Sum of the channel energies.
    pub fn total_energy(&self) -> f64 {
        self.channels.iter().map(|c| c.energy()).sum()
    }
}

/// Splits a signal into subbands: channel k at lattice coordinate m
/// (standing for γ = B·m) holds ⟨T_γ φ_k, s⟩.  Defined for any bank;
/// orthonormality is not required.
pub fn analysis(fb: &FilterBank, s: &Signal) -> Result<SubbandSet> {
    if s.dim() != fb.dim() {
        return Err(Error::DimMismatch { expected: fb.dim(), got: s.dim() });
    }
    let lattice = fb.lattice();
    let channels = fb
        .filters()
        .iter()
        .map(|phi| {
            let mut pairs: Vec<(Vec<i64>, Complex64)> = Vec::new();
            for (x, sx) in s.taps() {
                for (y, py) in phi.taps() {
                    let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                    if let Some(m) = lattice.lattice_coords(&diff) {
                        pairs.push((m, py.conj() * sx));
                    }
                }
            }
            Filter::from_taps(lattice.dim(), pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    SubbandSet::new(lattice.clone(), channels)
}

/// Rebuilds a signal from subbands: s = Σ_k Σ_m c_k(m)·T_{B·m} φ_k.
pub fn synthesis(fb: &FilterBank, c: &SubbandSet) -> Result<Signal> {
    if c.num_channels() != fb.num_channels() {
        return Err(Error::SizeMismatch { expected: fb.num_channels(), got: c.num_channels() });
    }
    if c.lattice().dim() != fb.dim() {
        return Err(Error::DimMismatch { expected: fb.dim(), got: c.lattice().dim() });
    }
    let lattice = fb.lattice();
    let mut pairs: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for (phi, ch) in fb.filters().iter().zip(c.channels()) {
        for (m, v) in ch.taps() {
            let gamma = lattice.mul_vec(m);
            for (y, py) in phi.taps() {
                let x: Vec<i64> = y.iter().zip(&gamma).map(|(a, b)| a + b).collect();
                pairs.push((x, v * py));
            }
        }
    }
    Filter::from_taps(fb.dim(), pairs)
}

/// Applies the unique unitary that commutes with lattice translates and
/// maps the delta at coset representative k to φ_k.
///
/// Computed as synthesis over the delta-bank subbands of s, then checked
/// against the direct convolution form
/// Σ_k (restriction of s to coset k) ∗ (T_{−r_k} φ_k); the two must
/// agree to 1e-10 or the call panics, which would indicate a defect in
/// the transform algebra rather than in the input.
pub fn apply_unitary(fb: &FilterBank, s: &Signal, tol: f64) -> Result<Signal> {
    let r = is_qmf(fb, tol);
    if !r.ok {
        return Err(Error::NotParaunitary { residual: r.residual, tol });
    }
    if s.dim() != fb.dim() {
        return Err(Error::DimMismatch { expected: fb.dim(), got: s.dim() });
    }
    let lattice = fb.lattice();
    let cosets = fb.cosets();

    let mut lazy_channels: Vec<Vec<(Vec<i64>, Complex64)>> = vec![Vec::new(); cosets.len()];
    for (x, sx) in s.taps() {
        let (rep, gamma) = cosets.reduce(x);
        let k = cosets.index_of(&rep);
        let m = lattice.lattice_coords(&gamma).expect("reduce returns a lattice point");
        lazy_channels[k].push((m, *sx));
    }
    let channels = lazy_channels
        .into_iter()
        .map(|pairs| Filter::from_taps(lattice.dim(), pairs))
        .collect::<Result<Vec<_>>>()?;
    let out = synthesis(fb, &SubbandSet::new(lattice.clone(), channels)?)?;

    let mut direct = Filter::zero(fb.dim());
    for (k, rep) in cosets.reps().iter().enumerate() {
        let restricted = Filter::from_taps(
            fb.dim(),
            s.taps()
                .filter(|(x, _)| cosets.index_of(x) == cosets.index_of(rep))
                .map(|(x, v)| (x.clone(), *v)),
        )?;
        let neg_rep: Vec<i64> = rep.iter().map(|x| -x).collect();
        direct = direct.add(&restricted.convolve(&fb.filter(k).translate(&neg_rep))?)?;
    }
    let gap = out.max_abs_diff(&direct);
    assert!(gap <= 1e-10, "transform identity violated: gap {gap:e}");
    Ok(out)
}

/// Restriction of a signal to the lattice: taps at lattice points are
/// kept, all others dropped.  The Fourier side of the same operation is
/// the average (1/N)·Σ_ξ ŝ(ω+ξ); see [`poisson_residual`].
pub fn poisson_project(dual: &DualCosetSystem, s: &Signal) -> Signal {
    assert_eq!(s.dim(), dual.lattice().dim(), "signal dimension mismatch");
    let lattice = dual.lattice();
    Filter::from_taps(
        s.dim(),
        s.taps().filter(|(x, _)| lattice.contains(x)).map(|(x, v)| (x.clone(), *v)),
    )
    .expect("taps share the signal dimension")
}

/// Gap between the two sides of the restriction identity: the largest
/// coefficient difference between (1/N)·Σ_ξ ŝ(ω+ξ) and the transform
/// of the time-domain restriction.
pub fn poisson_residual(dual: &DualCosetSystem, s: &Signal) -> f64 {
    let hat = fourier(s);
    let mut avg = LaurentPoly::zero(s.dim());
    for xi in dual.freqs() {
        avg = avg.add(&hat.shift_frequency(xi)).expect("same dimension");
    }
    let avg = avg.scale(Complex64::new(1.0 / dual.len() as f64, 0.0));
    avg.max_diff(&fourier(&poisson_project(dual, s)))
}

/// Channel energies of the subband split and their sum.  For an
/// orthonormal bank the sum equals ‖s‖²; the bank is required to pass
/// the orthonormality check at tol.
pub fn energy_split(fb: &FilterBank, s: &Signal, tol: f64) -> Result<(f64, Vec<f64>)> {
    let r = is_qmf(fb, tol);
    if !r.ok {
        return Err(Error::NotParaunitary { residual: r.residual, tol });
    }
    let bands = analysis(fb, s)?;
    let energies = bands.energies();
    Ok((energies.iter().sum(), energies))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dual_coset_representatives, CosetSystem};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_z() -> LatticeBasis {
        LatticeBasis::one_dim(2).unwrap()
    }

    fn quincunx() -> LatticeBasis {
        LatticeBasis::new(vec![vec![1, 1], vec![1, -1]]).unwrap()
    }

    fn random_signal_1d(rng: &mut ChaCha8Rng, len: i64) -> Signal {
        Filter::from_taps(
            1,
            (0..len).map(|i| {
                (vec![i - len / 2], c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            }),
        )
        .unwrap()
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

    /// Quincunx bank built by mixing the two lazy deltas with a fixed
    /// unitary, so translates stay orthonormal.
    fn quincunx_mixed_bank() -> FilterBank {
        let lazy = FilterBank::lazy(quincunx());
        let u = [
            [c(0.6, 0.0), c(0.0, 0.8)],
            [c(0.0, 0.8), c(0.6, 0.0)],
        ];
        let filters = (0..2)
            .map(|i| {
                lazy.filter(0)
                    .scale(u[i][0])
                    .add(&lazy.filter(1).scale(u[i][1]))
                    .unwrap()
            })
            .collect();
        lazy.with_filters(filters).unwrap()
    }

    #[test]
    fn lazy_analysis_picks_cosets() {
        let bank = FilterBank::lazy(two_z());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_signal_1d(&mut rng, 9);
        let bands = analysis(&bank, &s).unwrap();
        for m in -5..5 {
            assert_eq!(bands.channel(0).tap(&[m]), s.tap(&[2 * m]));
            assert_eq!(bands.channel(1).tap(&[m]), s.tap(&[2 * m + 1]));
        }
        let back = synthesis(&bank, &bands).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn haar_analysis_of_delta() {
        let bands = analysis(&FilterBank::haar(), &Filter::delta(vec![0])).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert_eq!(bands.channel(0).tap(&[0]), c(s, 0.0));
        assert_eq!(bands.channel(1).tap(&[0]), c(s, 0.0));
        assert_eq!(bands.channel(0).num_taps(), 1);
        assert_eq!(bands.channel(1).num_taps(), 1);
        for e in bands.energies() {
            assert!((e - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn analysis_preserves_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for bank in [FilterBank::haar(), d4_bank()] {
            for _ in 0..10 {
                let s = random_signal_1d(&mut rng, 32);
                let bands = analysis(&bank, &s).unwrap();
                let total = bands.total_energy();
                assert!((total - s.energy()).abs() < 1e-12 * s.energy().max(1.0));
            }
        }
    }

    #[test]
    fn synthesis_examples() {
        let bank = FilterBank::haar();
        let zero = SubbandSet::new(two_z(), vec![Filter::zero(1), Filter::zero(1)]).unwrap();
        assert!(synthesis(&bank, &zero).unwrap().is_zero());

        let one_hot =
            SubbandSet::new(two_z(), vec![Filter::delta(vec![0]), Filter::zero(1)]).unwrap();
        assert_eq!(&synthesis(&bank, &one_hot).unwrap(), bank.filter(0));
    }

    #[test]
    fn round_trip_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for bank in [FilterBank::haar(), d4_bank()] {
            for _ in 0..10 {
                let s = random_signal_1d(&mut rng, 24);
                let back = synthesis(&bank, &analysis(&bank, &s).unwrap()).unwrap();
                assert!(back.max_abs_diff(&s) < 1e-10);
            }
        }
        let bank = quincunx_mixed_bank();
        for _ in 0..10 {
            let s = Filter::from_taps(
                2,
                (0..16).map(|_| {
                    let p = vec![rng.gen_range(-4..4), rng.gen_range(-4..4)];
                    (p, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                }),
            )
            .unwrap();
            let back = synthesis(&bank, &analysis(&bank, &s).unwrap()).unwrap();
            assert!(back.max_abs_diff(&s) < 1e-10);
        }
    }

    #[test]
    fn unitary_maps_deltas_to_filters() {
        let bank = FilterBank::haar();
        let out = apply_unitary(&bank, &Filter::delta(vec![0]), 1e-10).unwrap();
        assert!(out.max_abs_diff(bank.filter(0)) < 1e-15);
        let out = apply_unitary(&bank, &Filter::delta(vec![1]), 1e-10).unwrap();
        assert!(out.max_abs_diff(bank.filter(1)) < 1e-15);
    }

    #[test]
    fn unitary_of_lazy_bank_is_identity() {
        let bank = FilterBank::lazy(two_z());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let s = random_signal_1d(&mut rng, 15);
            assert_eq!(apply_unitary(&bank, &s, 1e-10).unwrap(), s);
        }
    }

    #[test]
    fn unitary_is_isometric_and_commutes_with_translates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for bank in [FilterBank::haar(), d4_bank()] {
            for _ in 0..5 {
                let s = random_signal_1d(&mut rng, 20);
                let out = apply_unitary(&bank, &s, 1e-10).unwrap();
                assert!((out.energy() - s.energy()).abs() < 1e-12 * s.energy().max(1.0));
                for gamma in [vec![2], vec![-4], vec![6]] {
                    let a = apply_unitary(&bank, &s.translate(&gamma), 1e-10).unwrap();
                    let b = out.translate(&gamma);
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn unitary_rejects_non_orthonormal_bank() {
        let bad = FilterBank::new(
            CosetSystem::canonical(two_z()),
            vec![Filter::delta(vec![0]), Filter::delta(vec![0])],
        )
        .unwrap();
        assert!(matches!(
            apply_unitary(&bad, &Filter::delta(vec![0]), 1e-10),
            Err(Error::NotParaunitary { .. })
        ));
    }

    #[test]
    fn poisson_examples() {
        let dual = dual_coset_representatives(&two_z());
        let on_lattice = Filter::from_taps(
            1,
            [(vec![-2], c(1.0, 2.0)), (vec![0], c(3.0, 0.0)), (vec![4], c(-1.0, 0.5))],
        )
        .unwrap();
        assert_eq!(poisson_project(&dual, &on_lattice), on_lattice);

        assert!(poisson_project(&dual, &Filter::delta(vec![3])).is_zero());

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = random_signal_1d(&mut rng, 11);
        let projected = poisson_project(&dual, &s);
        for m in -6..6 {
            let want = if m % 2 == 0 { s.tap(&[m]) } else { c(0.0, 0.0) };
            assert_eq!(projected.tap(&[m]), want);
        }
    }

    #[test]
    fn poisson_residual_small_across_lattices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let duals = [
            dual_coset_representatives(&two_z()),
            dual_coset_representatives(&LatticeBasis::one_dim(3).unwrap()),
            dual_coset_representatives(&quincunx()),
        ];
        for dual in &duals {
            for _ in 0..10 {
                let n = dual.lattice().dim();
                let s = Filter::from_taps(
                    n,
                    (0..20).map(|_| {
                        let p: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..6)).collect();
                        (p, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    }),
                )
                .unwrap();
                assert!(poisson_residual(dual, &s) <= 1e-12);
            }
        }
    }

    #[test]
    fn energy_split_examples() {
        let bank = FilterBank::haar();
        let (total, per) = energy_split(&bank, &Filter::zero(1), 1e-10).unwrap();
        assert_eq!(total, 0.0);
        assert_eq!(per, vec![0.0, 0.0]);

        let (total, per) = energy_split(&bank, &Filter::delta(vec![0]), 1e-10).unwrap();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((per[0] - 0.5).abs() < 1e-12);
        assert!((per[1] - 0.5).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let s = random_signal_1d(&mut rng, 30);
            let (total, per) = energy_split(&d4_bank(), &s, 1e-10).unwrap();
            assert_eq!(total, per.iter().sum::<f64>());
            assert!((total - s.energy()).abs() < 1e-12 * s.energy().max(1.0));
        }
    }
}
