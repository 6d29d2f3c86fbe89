//! Multi-tone signal simulator: sampling on integer lattices, the
//! multidimensional DFT, peak detection, and frequency recovery through the
//! multi-vector and pair reconstructions.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::exactint::{adjugate, det};
use crate::lattice::{fpd, lcrm};
use crate::matrix::{Matrix, Vector};
use crate::multivec::{compute_range, reconstruct, AuditEvent, ModuliSet, ReconstructionOutcome, ResidueSetSystem};
use crate::pairvec::{check_condition, reconstruct_pair, PairSystem};
use crate::scalar::{IntScalar, RealScalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Tone<F, T> {
    pub amplitude: Complex<F>,
    pub frequency: Vector<T>,
}

/// `x(t) = Σ a_i·exp(2πi·f_iᵀt) + noise`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalSpec<F, T> {
    dim: usize,
    tones: Vec<Tone<F, T>>,
    noise_sigma: Option<F>,
}

impl<F: RealScalar, T: IntScalar> SignalSpec<F, T> {
    pub fn new(tones: Vec<Tone<F, T>>) -> Result<Self> {
        let dim = tones
            .first()
            .ok_or_else(|| Error::InvalidInput("a signal needs at least one tone".into()))?
            .frequency
            .dim();
        if let Some(t) = tones.iter().find(|t| t.frequency.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: t.frequency.dim() });
        }
        Ok(SignalSpec { dim, tones, noise_sigma: None })
    }

    /// Unit-amplitude tones at the given frequencies.
    pub fn unit_tones(frequencies: &[Vector<T>]) -> Result<Self> {
        Self::new(
            frequencies
                .iter()
                .map(|f| Tone { amplitude: Complex::new(F::one(), F::zero()), frequency: f.clone() })
                .collect(),
        )
    }

    /// Adds circular complex Gaussian noise with `E|w|² = sigma²`.
    pub fn with_noise(mut self, sigma: F) -> Result<Self> {
        if sigma.is_nan() || sigma < F::zero() {
            return Err(Error::InvalidInput(format!("noise sigma must be nonnegative, got {sigma}")));
        }
        self.noise_sigma = Some(sigma);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tones(&self) -> &[Tone<F, T>] {
        &self.tones
    }

    pub fn noise_sigma(&self) -> Option<F> {
        self.noise_sigma
    }

    pub fn frequencies(&self) -> Vec<Vector<T>> {
        self.tones.iter().map(|t| t.frequency.clone()).collect()
    }
}

/// Samples `x[n]` for `n ∈ N(Mᵀ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal<F, T> {
    pub sampling_matrix: Matrix<T>,
    pub samples: BTreeMap<Vector<T>, Complex<F>>,
}

/// Bins `X(k)` for `k ∈ N(M)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<F, T> {
    pub sampling_matrix: Matrix<T>,
    pub bins: BTreeMap<Vector<T>, Complex<F>>,
}

/// Evaluates `exp(±2πi·uᵀM⁻ᵀn)` as `exp(±2πi·e/|det M|)` with the integer
/// `e = sign(det)·(adj(M)·u)·n mod |det M|`.
struct PhaseTable<F, T> {
    adj: Matrix<T>,
    sign: T,
    abs_det: T,
    twiddles: Vec<Complex<F>>,
}

impl<F: RealScalar, T: IntScalar> PhaseTable<F, T> {
    fn new(m: &Matrix<T>, direction: F) -> Result<Self> {
        m.ensure_square()?;
        let d = det(m);
        if d.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let abs_det = d.abs();
        let size = abs_det
            .to_usize()
            .ok_or_else(|| Error::InvalidInput(format!("|det| = {abs_det} is too large to simulate")))?;
        let denom = F::from(size).expect("size fits a float");
        let twiddles = (0..size)
            .map(|e| {
                let angle = direction * F::TAU() * F::from(e).expect("index fits a float") / denom;
                Complex::from_polar(F::one(), angle)
            })
            .collect();
        Ok(PhaseTable { adj: adjugate(m), sign: d.signum(), abs_det, twiddles })
    }

    /// `sign(det)·adj(M)·u`, the per-frequency part of the exponent.
    fn weights(&self, u: &Vector<T>) -> Vector<T> {
        self.adj.mul_vec(u).scale(&self.sign)
    }

    fn twiddle(&self, weights: &Vector<T>, n: &Vector<T>) -> Complex<F> {
        let dot = weights.iter().zip(n.iter()).fold(T::zero(), |acc, (w, x)| acc + w.clone() * x.clone());
        let e = dot.mod_floor(&self.abs_det);
        self.twiddles[e.to_usize().expect("reduced exponent is below |det|")]
    }
}

/// Samples the signal at `n ∈ N(Mᵀ)`. Noise is drawn in sorted `n` order,
/// real part before imaginary part, from a ChaCha8 stream seeded by `seed`.
pub fn sample<F: RealScalar, T: IntScalar>(spec: &SignalSpec<F, T>, m: &Matrix<T>, seed: u64) -> Result<SampledSignal<F, T>> {
    if m.rows() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: m.rows() });
    }
    let table = PhaseTable::<F, T>::new(m, F::one())?;
    let weights: Vec<_> = spec.tones.iter().map(|t| (t.amplitude, table.weights(&t.frequency))).collect();
    let mut noise = spec.noise_sigma.map(|sigma| {
        let normal = Normal::new(0.0, sigma.to_f64().expect("finite sigma") / 2f64.sqrt()).expect("finite sigma");
        (ChaCha8Rng::seed_from_u64(seed), normal)
    });
    let samples = fpd(&m.transpose())?
        .sorted_points()
        .into_iter()
        .map(|n| {
            let mut x = weights
                .iter()
                .fold(Complex::new(F::zero(), F::zero()), |acc, (a, w)| acc + *a * table.twiddle(w, &n));
            if let Some((rng, normal)) = noise.as_mut() {
                let re = F::from_f64_lossy(normal.sample(rng));
                let im = F::from_f64_lossy(normal.sample(rng));
                x = x + Complex::new(re, im);
            }
            (n, x)
        })
        .collect();
    Ok(SampledSignal { sampling_matrix: m.clone(), samples })
}

/// `X(k) = Σ_n x[n]·exp(−2πi·kᵀM⁻ᵀn)` for every `k ∈ N(M)`, evaluated
/// directly.
pub fn mddft<F: RealScalar, T: IntScalar>(s: &SampledSignal<F, T>) -> Result<Spectrum<F, T>> {
    let m = &s.sampling_matrix;
    let table = PhaseTable::<F, T>::new(m, -F::one())?;
    let bins = fpd(m)?
        .sorted_points()
        .into_iter()
        .map(|k| {
            let w = table.weights(&k);
            let x = s
                .samples
                .iter()
                .fold(Complex::new(F::zero(), F::zero()), |acc, (n, x)| acc + *x * table.twiddle(&w, n));
            (k, x)
        })
        .collect();
    Ok(Spectrum { sampling_matrix: m.clone(), bins })
}

/// Bins whose magnitude exceeds `threshold_ratio` times the largest one,
/// at most `rho_max` of them, strongest first.
pub fn detect_residues<F: RealScalar, T: IntScalar>(
    spectrum: &Spectrum<F, T>,
    rho_max: usize,
    threshold_ratio: F,
) -> Result<Vec<Vector<T>>> {
    if !(threshold_ratio > F::zero() && threshold_ratio <= F::one()) {
        return Err(Error::InvalidInput(format!("threshold ratio must lie in (0, 1], got {threshold_ratio}")));
    }
    let size = F::from(spectrum.bins.len()).expect("bin count fits a float");
    let floor = F::from_f64_lossy(1e-9) * size;
    let mut peaks: Vec<(F, &Vector<T>)> = spectrum.bins.iter().map(|(k, x)| (x.norm(), k)).collect();
    peaks.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("magnitudes are finite").then_with(|| a.1.cmp(b.1)));
    let top = match peaks.first() {
        Some(&(mag, _)) if mag >= floor => mag,
        _ => return Err(Error::NoPeaks),
    };
    Ok(peaks
        .into_iter()
        .take_while(|&(mag, _)| mag > threshold_ratio * top && mag >= floor)
        .take(rho_max)
        .map(|(_, k)| k.clone())
        .collect())
}

/// Samples per unit volume, `|det M|`.
pub fn sampling_rate<T: IntScalar>(m: &Matrix<T>) -> Result<T> {
    m.ensure_square()?;
    let d = det(m).abs();
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(d)
}

#[derive(Clone, Debug)]
pub struct EndToEndOptions<F, T> {
    /// Number of unknown frequencies; the tone count when `None`.
    pub rho: Option<usize>,
    pub threshold: F,
    /// Use the two-vector reconstruction with prior information.
    pub prior: bool,
    /// lcrm overrides for the determinable range.
    pub overrides: Option<BTreeMap<Vec<usize>, Matrix<T>>>,
}

impl<F: RealScalar, T> Default for EndToEndOptions<F, T> {
    fn default() -> Self {
        EndToEndOptions { rho: None, threshold: F::from_f64_lossy(0.5), prior: false, overrides: None }
    }
}

/// The residue sets detected from one sampled spectrum per modulus. The
/// noise seed for modulus `j` is `seed + j`.
pub fn detect_system<F: RealScalar, T: IntScalar>(
    spec: &SignalSpec<F, T>,
    ms: &ModuliSet<T>,
    seed: u64,
    rho: usize,
    threshold: F,
) -> Result<Vec<Vec<Vector<T>>>> {
    (0..ms.gamma())
        .map(|j| {
            let s = sample(spec, ms.modulus(j), seed.wrapping_add(j as u64))?;
            detect_residues(&mddft(&s)?, rho, threshold)
        })
        .collect()
}

/// Samples with every modulus, detects residues, and reconstructs the
/// frequencies.
///
/// With `prior` set the tone difference is first checked against the pair
/// condition, since the pair reconstruction is only guaranteed under it.
pub fn end_to_end<F: RealScalar, T: IntScalar>(
    spec: &SignalSpec<F, T>,
    ms: &ModuliSet<T>,
    seed: u64,
    options: &EndToEndOptions<F, T>,
) -> Result<ReconstructionOutcome<T>> {
    let rho = options.rho.unwrap_or(spec.tones.len());
    let sets = detect_system(spec, ms, seed, rho, options.threshold)?;

    if options.prior {
        let [f1, f2] = spec.frequencies().try_into().map_err(|_| {
            Error::InvalidInput("the prior-information path needs exactly two tones".into())
        })?;
        if rho != 2 {
            return Err(Error::InvalidInput("the prior-information path needs rho = 2".into()));
        }
        if !check_condition(ms, &(&f1 - &f2)) {
            return Err(Error::InvalidInput(format!("tone difference {} violates the pair condition", &f1 - &f2)));
        }
        let ps = PairSystem::new(ms.clone(), sets).map_err(|e| Error::DetectionMismatch(e.to_string()))?;
        let out = reconstruct_pair(&ps, &lcrm(&ms.moduli())?)?;
        let mut vectors = out.vectors.to_vec();
        vectors.sort();
        return Ok(ReconstructionOutcome {
            vectors,
            rounds: vec![AuditEvent::PairDifference { d_star: out.d_star }],
            crt_invocations: 2,
        });
    }

    let system = ResidueSetSystem::new(ms, sets, rho).map_err(|e| Error::DetectionMismatch(e.to_string()))?;
    let range = compute_range(ms, rho, options.overrides.as_ref())?;
    reconstruct(ms, &system, &range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Reducer;
    use crate::multivec::fixtures::{two_vector_overrides, moduli, v};
    use num_bigint::BigInt;
    use num_traits::Zero;
    use proptest::prelude::*;

    type M = Matrix<BigInt>;

    fn tones(fs: &[&[i64]]) -> SignalSpec<f64, BigInt> {
        SignalSpec::unit_tones(&fs.iter().map(|f| v(f)).collect::<Vec<_>>()).unwrap()
    }

    fn m1() -> M {
        M::from_array([[3, 0], [1, 3]])
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn dc_tone_samples_are_one() {
        let s = sample(&tones(&[&[0, 0]]), &m1(), 0).unwrap();
        assert_eq!(s.samples.len(), 9);
        assert!(s.samples.values().all(|x| close(x.re, 1.0, 1e-12) && x.im.abs() < 1e-12));
    }

    #[test]
    fn alternating_tone() {
        let s = sample(&tones(&[&[1, 1]]), &M::from_array([[2, 0], [0, 2]]), 0).unwrap();
        for (n, x) in &s.samples {
            let parity = n.iter().cloned().sum::<BigInt>() % 2;
            let expected = if parity == BigInt::from(0) { 1.0 } else { -1.0 };
            assert!(close(x.re, expected, 1e-12) && x.im.abs() < 1e-12, "{n}");
        }
        let x = mddft(&s).unwrap();
        for (k, b) in &x.bins {
            if *k == v(&[1, 1]) {
                assert!(close(b.norm(), 4.0, 1e-9));
            } else {
                assert!(b.norm() < 1e-9);
            }
        }
    }

    #[test]
    fn seeded_noise_replays() {
        let spec = tones(&[&[2, 4], &[1, 7]]).with_noise(0.3).unwrap();
        let a = sample(&spec, &m1(), 17).unwrap();
        assert_eq!(a, sample(&spec, &m1(), 17).unwrap());
        assert_ne!(a, sample(&spec, &m1(), 18).unwrap());
        assert!(spec.clone().with_noise(-1.0).is_err());
    }

    #[test]
    fn singular_or_mismatched_sampling() {
        let spec = tones(&[&[1, 1]]);
        assert_eq!(sample(&spec, &M::from_array([[1, 2], [2, 4]]), 0), Err(Error::SingularMatrix));
        assert!(sample(&spec, &M::from_array([[2]]), 0).is_err());
    }

    #[test]
    fn zero_signal() {
        let spec = SignalSpec::<f64, BigInt>::new(vec![Tone { amplitude: Complex::new(0.0, 0.0), frequency: v(&[1, 2]) }]).unwrap();
        let x = mddft(&sample(&spec, &m1(), 0).unwrap()).unwrap();
        assert!(x.bins.values().all(|b| b.norm() == 0.0));
        assert_eq!(detect_residues(&x, 2, 0.5), Err(Error::NoPeaks));
    }

    #[test]
    fn two_tone_peaks() {
        let x = mddft(&sample(&tones(&[&[2, 4], &[1, 7]]), &m1(), 0).unwrap()).unwrap();
        let peaks: Vec<_> = x.bins.iter().filter(|(_, b)| b.norm() > 1e-9).collect();
        assert_eq!(peaks.len(), 2);
        for (k, b) in &peaks {
            assert!([v(&[2, 1]), v(&[1, 1])].contains(k));
            assert!(close(b.norm(), 9.0, 1e-9));
        }
        let mut found = detect_residues(&x, 2, 0.5).unwrap();
        found.sort();
        assert_eq!(found, vec![v(&[1, 1]), v(&[2, 1])]);
        assert_eq!(detect_residues(&x, 1, 0.5).unwrap().len(), 1);
        assert!(detect_residues(&x, 2, 0.0).is_err());
    }

    #[test]
    fn colliding_tones_share_one_peak() {
        // [2,4] and [2,1] leave the same remainder modulo M1.
        let spec = SignalSpec::<f64, BigInt>::new(vec![
            Tone { amplitude: Complex::new(1.0, 0.0), frequency: v(&[2, 4]) },
            Tone { amplitude: Complex::new(0.5, 0.5), frequency: v(&[2, 1]) },
        ])
        .unwrap();
        let x = mddft(&sample(&spec, &m1(), 0).unwrap()).unwrap();
        let peak = x.bins[&v(&[2, 1])].norm();
        assert!(close(peak, Complex::new(1.5, 0.5).norm() * 9.0, 1e-9));
        assert_eq!(detect_residues(&x, 2, 0.5).unwrap(), vec![v(&[2, 1])]);
    }

    #[test]
    fn sampling_rates() {
        assert_eq!(sampling_rate(&M::identity(2)).unwrap(), BigInt::from(1));
        assert_eq!(sampling_rate(&M::from_array([[4, 1], [0, 4]])).unwrap(), BigInt::from(16));
        assert_eq!(sampling_rate(&M::from_array([[3, 0], [0, 9]])).unwrap(), BigInt::from(27));
        assert_eq!(sampling_rate(&M::from_array([[1, 1], [1, 1]])), Err(Error::SingularMatrix));
    }

    #[test]
    fn two_tones_end_to_end() {
        let options = EndToEndOptions { overrides: Some(two_vector_overrides()), ..Default::default() };
        let out = end_to_end(&tones(&[&[2, 4], &[1, 7]]), &moduli(4), 0, &options).unwrap();
        assert_eq!(out.vectors, vec![v(&[1, 7]), v(&[2, 4])]);
    }

    #[test]
    fn close_pair_end_to_end_with_prior() {
        let ms = ModuliSet::new(
            [[[4, 1], [1, 1]], [[3, 3], [1, 2]], [[2, 1], [0, 2]], [[5, 1], [1, 1]]].map(M::from_array).to_vec(),
        )
        .unwrap();
        let options = EndToEndOptions { prior: true, ..Default::default() };
        let out = end_to_end(&tones(&[&[10, 7], &[8, 6]]), &ms, 0, &options).unwrap();
        assert_eq!(out.vectors, vec![v(&[8, 6]), v(&[10, 7])]);
        assert_eq!(out.rounds, vec![AuditEvent::PairDifference { d_star: v(&[2, 1]) }]);
        assert_eq!(out.crt_invocations, 2);

        let bad = end_to_end(&tones(&[&[0, 0], &[6, 0]]), &ms, 0, &options);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn end_to_end_over_the_whole_range() {
        let ms = moduli(4);
        let range = compute_range(&ms, 2, Some(&two_vector_overrides())).unwrap();
        let pts = range.points();
        let options = EndToEndOptions { overrides: Some(two_vector_overrides()), ..Default::default() };
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let spec = SignalSpec::<f64, BigInt>::unit_tones(&[a.clone(), b.clone()]).unwrap();
                // Colliding residues leave deficient sets but the solver copes.
                let out = end_to_end(&spec, &ms, 0, &options).unwrap();
                let mut expected = vec![a.clone(), b.clone()];
                expected.sort();
                assert_eq!(out.vectors, expected);
            }
        }
    }

    #[test]
    fn single_precision_delta() {
        let spec = SignalSpec::<f32, i64>::unit_tones(&[Vector::from_i64s(&[5, -3])]).unwrap();
        let m = Matrix::<i64>::from_array([[4, 1], [0, 4]]);
        let x = mddft(&sample(&spec, &m, 0).unwrap()).unwrap();
        let k = Reducer::new(&m).unwrap().remainder(&Vector::from_i64s(&[5, -3]));
        assert!((x.bins[&k].norm() - 16.0).abs() < 1e-3);
    }

    fn arb_signal() -> impl Strategy<Value = (SignalSpec<f64, BigInt>, M)> {
        let tone = ((-5.0f64..5.0, -5.0f64..5.0), (-30i64..30, -30i64..30))
            .prop_map(|((re, im), (x, y))| Tone { amplitude: Complex::new(re, im), frequency: v(&[x, y]) });
        let m = (1i64..6, -4i64..5, -4i64..5, 1i64..6)
            .prop_map(|(a, b, c, d)| M::from_array([[a, b], [c, d]]))
            .prop_filter("non-singular", |m| !det(m).is_zero());
        (proptest::collection::vec(tone, 1..4), m).prop_map(|(t, m)| (SignalSpec::new(t).unwrap(), m))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn parseval((spec, m) in arb_signal(), sigma in 0.0f64..1.0, seed in any::<u64>()) {
            let s = sample(&spec.with_noise(sigma).unwrap(), &m, seed).unwrap();
            let x = mddft(&s).unwrap();
            let time: f64 = s.samples.values().map(|z| z.norm_sqr()).sum();
            let freq: f64 = x.bins.values().map(|z| z.norm_sqr()).sum();
            let d = sampling_rate(&m).unwrap();
            let d: f64 = d.to_string().parse().unwrap();
            prop_assert!(close(freq, d * time, 1e-9), "{freq} vs {}", d * time);
        }

        #[test]
        fn single_tone_delta((spec, m) in arb_signal()) {
            let tone = &spec.tones()[0];
            let one = SignalSpec::new(vec![tone.clone()]).unwrap();
            let x = mddft(&sample(&one, &m, 0).unwrap()).unwrap();
            let k = Reducer::new(&m).unwrap().remainder(&tone.frequency);
            let d: f64 = sampling_rate(&m).unwrap().to_string().parse().unwrap();
            let expected = tone.amplitude.norm() * d;
            for (bin, val) in &x.bins {
                if *bin == k {
                    prop_assert!((val.norm() - expected).abs() <= 1e-9 * expected.max(1.0));
                } else {
                    prop_assert!(val.norm() <= 1e-9 * expected.max(1.0));
                }
            }
        }
    }
}
