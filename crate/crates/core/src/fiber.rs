//! λ-indexed two-photon (and one-photon) fibers of the non-commutative
//! harmonic oscillator: per-eigenvalue fiber verification, numerical
//! reconstruction of the oscillator spectrum from the fiber family, and the
//! weighted-space unitarity checks.
//!
//! This is the one module that materializes complex phases: the boson part of
//! the intertwining map is the diagonal phase e^{-i(π/4)a†a} (e^{-i(π/2)a†a}
//! in the one-photon case).

use num_complex::Complex;

use crate::error::{Error, Result};

use crate::model::ModelSpec;
use crate::scalar::Scalar;
use crate::spectral::{assemble, converged_spectrum, eigen, eigen_full, group_degenerate, default_degeneracy_tol, Spectrum};

/// Which Rabi family the fiber lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberFamily {
    TwoPhoton,
    OnePhoton,
}

/// One fiber: the Rabi model attached to an oscillator eigenvalue λ, with
/// detuning (α-β)λ/(2αβ), coupling 1/(2√(αβ)), and overall scale 2αβ/(α+β).
#[derive(Debug, Clone, Copy)]
pub struct FiberSpec<T> {
    pub alpha: T,
    pub beta: T,
    pub lambda: T,
    pub induced_delta: T,
    pub induced_g: T,
    pub scale: T,
    pub family: FiberFamily,
}

impl<T: Scalar> FiberSpec<T> {
    pub fn new(alpha: T, beta: T, lambda: T, family: FiberFamily) -> Result<Self> {
        if alpha <= T::zero() || beta <= T::zero() {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        if family == FiberFamily::TwoPhoton && !(alpha * beta > T::one()) {
            return Err(Error::OutOfRegime(format!(
                "alpha*beta = {} <= 1: the two-photon fiber coupling reaches the critical \
                 value 1/2 and the fiber family degenerates",
                alpha * beta
            )));
        }
        let two = T::two();
        Ok(FiberSpec {
            alpha,
            beta,
            lambda,
            induced_delta: (alpha - beta) * lambda / (two * alpha * beta),
            induced_g: T::one() / (two * (alpha * beta).sqrt()),
            scale: two * alpha * beta / (alpha + beta),
            family,
        })
    }

    /// The Rabi model this fiber is.
    pub fn model(&self) -> ModelSpec<T> {
        match self.family {
            FiberFamily::TwoPhoton => ModelSpec::rabi2p(self.induced_delta, self.induced_g),
            FiberFamily::OnePhoton => ModelSpec::rabi1p(self.induced_delta, self.induced_g),
        }
    }
}

/// The Rabi model attached to oscillator eigenvalue `lambda`.
pub fn fiber_model<T: Scalar>(
    alpha: T,
    beta: T,
    lambda: T,
    family: FiberFamily,
) -> Result<ModelSpec<T>> {
    Ok(FiberSpec::new(alpha, beta, lambda, family)?.model())
}

/// Verification row for one oscillator eigenvalue.
#[derive(Debug, Clone)]
pub struct FiberLevel<T> {
    pub index: usize,
    pub lambda: T,
    /// (α+β)λ/(2αβ), the value that must appear in the fiber spectrum.
    pub scaled: T,
    /// Distance of `scaled` to the fiber spectrum.
    pub distance: T,
    pub mult_source: usize,
    pub mult_fiber: usize,
    pub pass: bool,
}

/// Report of `verify_fiber`.
#[derive(Debug, Clone)]
pub struct FiberReport<T> {
    pub levels: Vec<FiberLevel<T>>,
    pub n_max: usize,
    pub all_pass: bool,
}

/// For each of the first `k_max` oscillator eigenvalues λ, check that
/// (α+β)λ/(2αβ) lies in the spectrum of the fiber attached to λ (within
/// `tol`, at matched truncation) with equal multiplicity.
pub fn verify_fiber<T: Scalar>(
    alpha: T,
    beta: T,
    family: FiberFamily,
    k_max: usize,
    tol: T,
) -> Result<FiberReport<T>> {
    let source_model = match family {
        FiberFamily::TwoPhoton => ModelSpec::ncho(alpha, beta),
        FiberFamily::OnePhoton => ModelSpec::ncho1p(alpha, beta),
    };
    let conv_tol = (tol * T::of(0.01)).max(T::of(1e-12));
    let source = converged_spectrum(&source_model, k_max, conv_tol)?;
    let n_max = source.n_max;
    let mut levels = Vec::with_capacity(k_max);
    for i in 0..k_max.min(source.values.len()) {
        let (g0, g1) = source.group_of(i);
        let lambda = source.values[i];
        let fiber = FiberSpec::new(alpha, beta, lambda, family)?;
        let fiber_spec = eigen(&assemble(&fiber.model(), n_max)?)?;
        let scaled = lambda / fiber.scale;
        let (j, distance) = nearest(&fiber_spec.values, scaled);
        let (f0, f1) = fiber_spec.group_of(j);
        let mult_source = g1 - g0;
        let mult_fiber = f1 - f0;
        levels.push(FiberLevel {
            index: i,
            lambda,
            scaled,
            distance,
            mult_source,
            mult_fiber,
            pass: distance <= tol && mult_source == mult_fiber,
        });
    }
    let all_pass = levels.iter().all(|l| l.pass);
    Ok(FiberReport { levels, n_max, all_pass })
}

fn nearest<T: Scalar>(sorted: &[T], x: T) -> (usize, T) {
    let mut best = (0usize, T::infinity());
    for (j, &v) in sorted.iter().enumerate() {
        let d = (v - x).abs();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Reconstruct the oscillator spectrum inside `window` from the fiber family
/// alone: find the roots of h_j(λ) = μ_j(fiber(λ)) - (α+β)λ/(2αβ) by scanning
/// for sign changes and bisecting.
///
/// Each h_j is strictly decreasing in λ (|dμ_j/dλ| ≤ |α-β|/(2αβ) <
/// (α+β)/(2αβ)), so every root is a clean bracket and multiplicities appear
/// as distinct j-branches sharing a root. The returned multiset is sorted;
/// roots closer together than `tol` are snapped to their cluster mean.
pub fn reconstruct_ncho_spectrum<T: Scalar>(
    alpha: T,
    beta: T,
    window: (T, T),
    tol: T,
) -> Result<Vec<T>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument("empty reconstruction window".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    // Probe fiber at the top of the window to fix a matched truncation level:
    // enough levels to cover the window plus margin, converged to tol/10.
    let probe = FiberSpec::new(alpha, beta, hi, FiberFamily::TwoPhoton)?;
    let gap = (T::one() - T::of(4.0) * probe.induced_g * probe.induced_g).sqrt();
    let j_cover = ((hi / probe.scale / gap).to_usize().unwrap_or(0) + 4) * 2;
    let fiber_conv = converged_spectrum(
        &probe.model(),
        j_cover,
        (tol * T::of(0.1)).max(T::of(1e-11)),
    )?;
    let n_max = fiber_conv.n_max;

    let h_at = |lambda: T| -> Result<Vec<T>> {
        let fiber = FiberSpec::new(alpha, beta, lambda, FiberFamily::TwoPhoton)?;
        let spec = eigen(&assemble(&fiber.model(), n_max)?)?;
        Ok(spec
            .values
            .iter()
            .take(j_cover)
            .map(|&mu| mu - lambda / fiber.scale)
            .collect())
    };

    // scan step: half the minimal spacing of the oscillator's lower bounds
    let root = (T::one() - T::one() / (alpha * beta)).sqrt();
    let step = (alpha.min(beta) * root * T::of(0.25)).max(tol);
    let mut grid = vec![lo];
    let mut x = lo;
    while x < hi {
        x = (x + step).min(hi);
        grid.push(x);
    }
    let h_grid: Vec<Vec<T>> = grid.iter().map(|&l| h_at(l)).collect::<Result<_>>()?;

    let mut roots: Vec<T> = Vec::new();
    for j in 0..j_cover {
        for w in 0..grid.len() - 1 {
            let (fa, fb) = (h_grid[w][j], h_grid[w + 1][j]);
            if fa == T::zero() {
                if w == 0 {
                    roots.push(grid[w]);
                }
                continue;
            }
            if fb == T::zero() {
                roots.push(grid[w + 1]);
                continue;
            }
            if (fa > T::zero()) != (fb > T::zero()) {
                // bisect h_j on [grid[w], grid[w+1]]
                let (mut a, mut b) = (grid[w], grid[w + 1]);
                let mut fa = fa;
                for _ in 0..200 {
                    if (b - a).abs() < tol * T::of(0.25) {
                        break;
                    }
                    let mid = (a + b) * T::half();
                    let fm = h_at(mid)?[j];
                    if fm == T::zero() {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (fm > T::zero()) == (fa > T::zero()) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                roots.push((a + b) * T::half());
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("root is NaN"));
    // snap clusters within tol to their mean, preserving the count
    let mut out: Vec<T> = Vec::with_capacity(roots.len());
    let mut i = 0usize;
    while i < roots.len() {
        let mut j = i + 1;
        while j < roots.len() && (roots[j] - roots[j - 1]).abs() < tol {
            j += 1;
        }
        let mean = roots[i..j].iter().copied().sum::<T>() / T::of_usize(j - i);
        for _ in i..j {
            out.push(mean);
        }
        i = j;
    }
    Ok(out)
}

/// The weighted Hilbert space carrying the fiber decomposition: the ordinary
/// state space with inner product (f,g)_αβ = (f, γ_αβ g), γ_αβ = diag(1/α,1/β)⊗1.
#[derive(Debug, Clone, Copy)]
pub struct WeightedSpace<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> WeightedSpace<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if alpha <= T::zero() || beta <= T::zero() {
            return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
        }
        Ok(WeightedSpace { alpha, beta })
    }

    /// Spin weight at interleaved flat index.
    fn weight_at(&self, flat: usize) -> T {
        if flat % 2 == 0 {
            T::one() / self.alpha
        } else {
            T::one() / self.beta
        }
    }

    /// Weighted inner product of complex coefficient vectors.
    pub fn inner(&self, f: &[Complex<T>], g: &[Complex<T>]) -> Complex<T> {
        f.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * *b * Complex::new(self.weight_at(i), T::zero()))
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
    }
}

/// Apply the intertwining map I = (diag(√α,√β)·e^{i(π/4)σ_z}) ⊗ e^{-i(π/4)a†a}
/// to a real coefficient vector in the interleaved spin⊗Fock basis.
pub fn intertwine<T: Scalar>(alpha: T, beta: T, v: &[T]) -> Vec<Complex<T>> {
    let quarter = T::pi() * T::of(0.25);
    let spin_phase = [
        Complex::from_polar(alpha.sqrt(), quarter),
        Complex::from_polar(beta.sqrt(), -quarter),
    ];
    v.iter()
        .enumerate()
        .map(|(flat, &c)| {
            let level = flat / 2;
            let boson_phase = Complex::from_polar(T::one(), -quarter * T::of_usize(level));
            spin_phase[flat % 2] * boson_phase * c
        })
        .collect()
}

/// Report of `weighted_gram_check`.
#[derive(Debug, Clone)]
pub struct GramReport<T> {
    /// max |(I v_i, I v_j)_αβ - δ_ij| over the checked block.
    pub max_gram_deviation: T,
    /// max weighted off-diagonal between eigenvectors of distinct eigenvalues.
    pub max_cross_group: T,
    /// max |‖I v‖²_αβ - 1|.
    pub max_norm_deviation: T,
    pub k_max: usize,
    pub n_max: usize,
}

/// Check that the intertwining map is unitary into the weighted space: the
/// γ-weighted Gram matrix of the images of the first `k_max` oscillator
/// eigenvectors equals the ordinary Gram matrix of the originals, and
/// eigenvectors of distinct eigenvalues are γ-orthogonal.
pub fn weighted_gram_check<T: Scalar>(alpha: T, beta: T, k_max: usize) -> Result<GramReport<T>> {
    let model = ModelSpec::ncho(alpha, beta);
    if !model.bounded_below() {
        return Err(Error::OutOfRegime(model.refusal_reason()));
    }
    let conv = converged_spectrum(&model, k_max, T::of(1e-10))?;
    let op = assemble(&model, conv.n_max)?;
    let (spec, vectors) = eigen_full(&op)?;
    let space = WeightedSpace::new(alpha, beta)?;
    let groups = group_degenerate(&spec.values[..k_max], default_degeneracy_tol());
    let images: Vec<Vec<Complex<T>>> = (0..k_max)
        .map(|j| intertwine(alpha, beta, &vectors.col(j)))
        .collect();
    let group_of = |i: usize| groups.iter().position(|&(s, e)| i >= s && i < e).unwrap();

    let mut max_gram_dev = T::zero();
    let mut max_cross = T::zero();
    let mut max_norm_dev = T::zero();
    for i in 0..k_max {
        for j in i..k_max {
            let w = space.inner(&images[i], &images[j]);
            let target = if i == j { T::one() } else { T::zero() };
            let dev = ((w.re - target).powi(2) + w.im.powi(2)).sqrt();
            max_gram_dev = max_gram_dev.max(dev);
            if i == j {
                max_norm_dev = max_norm_dev.max((w.re - T::one()).abs().max(w.im.abs()));
            } else if group_of(i) != group_of(j) {
                max_cross = max_cross.max(w.norm());
            }
        }
    }
    Ok(GramReport {
        max_gram_deviation: max_gram_dev,
        max_cross_group: max_cross,
        max_norm_deviation: max_norm_dev,
        k_max,
        n_max: conv.n_max,
    })
}

/// Convenience: the oscillator spectrum this module reconstructs against.
pub fn direct_ncho_spectrum<T: Scalar>(alpha: T, beta: T, k: usize, tol: T) -> Result<Spectrum<T>> {
    converged_spectrum(&ModelSpec::ncho(alpha, beta), k, tol)
}

/// True when the fiber is itself in the bounded-below regime (it is exactly
/// when the oscillator is).
pub fn fiber_in_regime<T: Scalar>(spec: &FiberSpec<T>) -> bool {
    spec.model().bounded_below()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelFamily;

    #[test]
    fn fiber_parameters() {
        // α=β=2: Δ=0, g=1/4 for any λ
        let f = FiberSpec::new(2.0f64, 2.0, 1.7, FiberFamily::TwoPhoton).unwrap();
        assert_eq!(f.induced_delta, 0.0);
        assert!((f.induced_g - 0.25).abs() < 1e-15);
        assert!((f.scale - 2.0).abs() < 1e-15);

        // (3,2), λ=1: Δ=1/12, g=1/(2√6)
        let f = FiberSpec::new(3.0f64, 2.0, 1.0, FiberFamily::TwoPhoton).unwrap();
        assert!((f.induced_delta - 1.0 / 12.0).abs() < 1e-15);
        assert!((f.induced_g - 1.0 / (2.0 * 6f64.sqrt())).abs() < 1e-15);
        assert_eq!(f.model().family, ModelFamily::Rabi2p);
    }

    #[test]
    fn fiber_regime_boundary() {
        // αβ→1⁺: induced g→½⁻, still in regime; αβ<=1 refused for 2p
        let f = FiberSpec::new(1.05f64, 1.0, 0.3, FiberFamily::TwoPhoton).unwrap();
        assert!(f.induced_g < 0.5);
        assert!(fiber_in_regime(&f));
        assert!(FiberSpec::new(1.0f64, 1.0, 0.3, FiberFamily::TwoPhoton).is_err());
        // the 1p fiber exists for any positive parameters
        assert!(FiberSpec::new(0.9f64, 0.9, 0.3, FiberFamily::OnePhoton).is_ok());
    }

    #[test]
    fn verify_fiber_equal_parameters() {
        // α=β: λ_n = √3(n+½) and the fiber is the Δ=0, g=1/(2α) model
        let r = verify_fiber(2.0f64, 2.0, FiberFamily::TwoPhoton, 4, 1e-6).unwrap();
        assert!(r.all_pass, "{:?}", r.levels);
        for l in &r.levels {
            assert_eq!(l.mult_source, 2);
            assert_eq!(l.mult_fiber, 2);
        }
    }

    #[test]
    fn verify_fiber_asymmetric_2p_and_1p() {
        let r = verify_fiber(3.0f64, 2.0, FiberFamily::TwoPhoton, 6, 1e-6).unwrap();
        assert!(r.all_pass, "{:?}", r.levels);
        assert_eq!(r.levels[0].mult_source, 1, "ground is simple for α≠β");

        let r = verify_fiber(3.0f64, 2.0, FiberFamily::OnePhoton, 4, 1e-6).unwrap();
        assert!(r.all_pass, "{:?}", r.levels);
    }

    #[test]
    fn reconstruction_equal_parameters() {
        // window [0,5]: √3(n+½) ∩ window = {0.866, 2.598, 4.330}, each doubled
        let roots = reconstruct_ncho_spectrum(2.0f64, 2.0, (0.0, 5.0), 1e-6).unwrap();
        let r3 = 3f64.sqrt();
        let expect = [0.5 * r3, 0.5 * r3, 1.5 * r3, 1.5 * r3, 2.5 * r3, 2.5 * r3];
        assert_eq!(roots.len(), 6, "{roots:?}");
        for (r, e) in roots.iter().zip(expect) {
            assert!((r - e).abs() < 1e-6, "{r} vs {e}");
        }
    }

    #[test]
    fn reconstruction_empty_below_ground_bound() {
        // window strictly below the ground lower bound (min{α,β}/2)√(1-1/(αβ))
        let lower = 1.0f64 * (1.0 - 1.0 / 6.0f64).sqrt(); // (2/2)·√(5/6) for (3,2)
        let roots = reconstruct_ncho_spectrum(3.0f64, 2.0, (0.0, lower * 0.9), 1e-6).unwrap();
        assert!(roots.is_empty(), "{roots:?}");
    }

    #[test]
    fn weighted_gram() {
        let r = weighted_gram_check(3.0f64, 2.0, 6).unwrap();
        assert!(r.max_cross_group < 1e-8, "cross {:?}", r.max_cross_group);
        assert!(r.max_gram_deviation < 1e-8);
        assert!(r.max_norm_deviation < 1e-10);

        // α=β: weighted orthogonality reduces to the scaled ordinary one
        let r = weighted_gram_check(2.0f64, 2.0, 4).unwrap();
        assert!(r.max_gram_deviation < 1e-10);
    }
}
