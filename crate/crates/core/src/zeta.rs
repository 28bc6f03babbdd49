//! Hurwitz zeta reference kernel (Euler-Maclaurin with explicit remainder),
//! truncated spectral zeta with affine tail completion, and the asymptotic
//! limit tables in the detuning, the coupling, and the oscillator asymmetry.

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::scalar::Scalar;
use crate::spectral::{converged_spectrum, Spectrum};

/// How a zeta value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZetaMethod {
    HurwitzClosed,
    TruncatedPlusTail,
}

/// A zeta evaluation with its tail accounting.
#[derive(Debug, Clone)]
pub struct ZetaValue<T> {
    pub s: T,
    pub value: T,
    pub method: ZetaMethod,
    /// Euler-Maclaurin correction order, or the number of eigenvalues summed.
    pub tail_terms: usize,
    /// Bound on the tail/remainder error under the stated tail model.
    pub tail_bound: T,
}

/// Bernoulli numbers B_{2k}, k = 1..=11, as exact fractions.
const BERNOULLI_2K: [(f64, f64); 11] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
];

/// Hurwitz zeta ζ(s;τ) = Σ_{n≥0} (n+τ)^{-s} for s > 1, τ > 0, by
/// Euler-Maclaurin summation with the remainder bounded by the first
/// neglected correction term (guaranteed ≤ 10⁻¹²·value).
pub fn hurwitz_zeta<T: Scalar>(s: T, tau: T) -> Result<ZetaValue<T>> {
    if !(s > T::one()) {
        return Err(Error::InvalidArgument(format!(
            "hurwitz_zeta requires s > 1, got {s}"
        )));
    }
    if !(tau > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "hurwitz_zeta requires tau > 0, got {tau}"
        )));
    }
    const K: usize = 10;
    let mut m = 16usize;
    loop {
        let (value, bound) = hurwitz_em(s, tau, m, K);
        if bound <= T::of(1e-13) * value.abs() || m >= 1 << 20 {
            return Ok(ZetaValue {
                s,
                value,
                method: ZetaMethod::HurwitzClosed,
                tail_terms: K,
                tail_bound: bound,
            });
        }
        m *= 2;
    }
}

fn hurwitz_em<T: Scalar>(s: T, tau: T, m: usize, k_order: usize) -> (T, T) {
    let mut head = T::zero();
    for n in 0..m {
        head = head + (T::of_usize(n) + tau).powf(-s);
    }
    let x = T::of_usize(m) + tau;
    // ∫_M^∞ + midpoint correction
    let mut value = head + x.powf(T::one() - s) / (s - T::one()) + T::half() * x.powf(-s);
    // Σ_k B_{2k}/(2k)! · (s)_{2k-1} · x^{-s-2k+1}
    let mut rising = s; // (s)_1
    let mut factorial = T::one();
    let mut term_bound = T::zero();
    for (k, &(num, den)) in BERNOULLI_2K.iter().enumerate().take(k_order + 1) {
        let two_k = 2 * (k + 1);
        // factorial (2k)!: extend from (2k-2)!
        factorial = factorial * T::of_usize(two_k - 1) * T::of_usize(two_k);
        // rising factorial (s)_{2k-1}: extend from (s)_{2k-3}
        if k > 0 {
            rising = rising * (s + T::of_usize(two_k - 3)) * (s + T::of_usize(two_k - 2));
        }
        let term = T::of(num) / T::of(den) / factorial * rising * x.powf(T::one() - s - T::of_usize(two_k));
        if k < k_order {
            value = value + term;
        } else {
            term_bound = term.abs();
        }
    }
    (value, term_bound)
}

/// Affine tail model: fit μ_n ≈ c·n + d on the last `window` converged
/// eigenvalues and complete the sum with a Hurwitz zeta of the fit.
#[derive(Debug, Clone, Copy)]
pub struct TailModel {
    pub window: usize,
}

impl Default for TailModel {
    fn default() -> Self {
        TailModel { window: 32 }
    }
}

/// Spectral zeta Σ_n μ_n^{-s} from a converged spectrum: the converged head
/// is summed directly; the tail is c^{-s}·ζ(s; K + d/c) from the affine fit,
/// with a bracketing pair of intercepts (fit residual) giving the tail bound.
pub fn spectral_zeta<T: Scalar>(spec: &Spectrum<T>, s: T, tail: TailModel) -> Result<ZetaValue<T>> {
    if !(s > T::one()) {
        return Err(Error::InvalidArgument("spectral_zeta requires s > 1".into()));
    }
    let k = spec.converged_count;
    if k == 0 {
        return Err(Error::OutOfRegime(
            "spectral_zeta needs a converged spectrum (run the truncation escalation)".into(),
        ));
    }
    let head_vals = &spec.values[..k];
    if head_vals.iter().any(|&v| v <= T::zero()) {
        return Err(Error::InvalidArgument(
            "spectral zeta undefined: nonpositive eigenvalue in the converged head".into(),
        ));
    }
    let head: T = head_vals.iter().map(|&v| v.powf(-s)).sum();

    // least-squares affine fit on the last `window` converged eigenvalues
    let w = tail.window.clamp(4, k);
    let idx0 = k - w;
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for i in idx0..k {
        let x = T::of_usize(i);
        let y = spec.values[i];
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let wn = T::of_usize(w);
    let c = (wn * sxy - sx * sy) / (wn * sxx - sx * sx);
    let d = (sy - c * sx) / wn;
    if !(c > T::zero()) {
        return Err(Error::Numerical("tail fit produced a nonpositive slope".into()));
    }
    let resid = (idx0..k).fold(T::zero(), |r, i| {
        r.max((spec.values[i] - (c * T::of_usize(i) + d)).abs())
    });

    let tail_at = |shift: T| -> Result<T> {
        let tau = T::of_usize(k) + (d + shift) / c;
        if !(tau > T::zero()) {
            return Err(Error::Numerical("tail fit produced a nonpositive offset".into()));
        }
        Ok(c.powf(-s) * hurwitz_zeta(s, tau)?.value)
    };
    let mid = tail_at(T::zero())?;
    let lo = tail_at(resid)?; // larger intercept -> smaller tail
    let hi = tail_at(-resid)?;
    Ok(ZetaValue {
        s,
        value: head + mid,
        method: ZetaMethod::TruncatedPlusTail,
        tail_terms: k,
        tail_bound: (hi - lo).abs() * T::half() + (hi - mid).abs().max((mid - lo).abs()),
    })
}

/// One row of a limit table.
#[derive(Debug, Clone)]
pub struct LimitRow<T> {
    /// The vanishing (or converging) parameter for this row.
    pub param: T,
    pub zeta: T,
    pub distance: T,
}

/// Convergence table of a spectral zeta toward its closed-form limit.
#[derive(Debug, Clone)]
pub struct LimitTable<T> {
    pub s: T,
    pub limit: T,
    pub rows: Vec<LimitRow<T>>,
}

impl<T: Scalar> LimitTable<T> {
    pub fn final_distance(&self) -> T {
        self.rows.last().map(|r| r.distance).unwrap_or(T::nan())
    }

    /// Nonincreasing up to the tail-model noise floor.
    pub fn distances_nonincreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].distance <= w[0].distance * T::of(1.05) + T::of(1e-5))
    }
}

/// Which parameter of the two-photon model is driven to zero.
#[derive(Debug, Clone, Copy)]
pub enum Limit2p<T> {
    /// Δ_k → 0 at fixed coupling |g| < ½; limit 2(1-4g²)^{-s/2} ζ(s;½).
    DeltaToZero { g: T },
    /// g_k → 0 at fixed 0 < Δ < ½; limit ζ(s;Δ+½) + ζ(s;-Δ+½).
    GToZero { delta: T },
}

/// Internal: zeta of a two-photon spectrum at given parameters.
fn zeta_2p_at<T: Scalar>(delta: T, g: T, s: T, k: usize, tol: T) -> Result<T> {
    let spec = converged_spectrum(&ModelSpec::rabi2p(delta, g), k, tol)?;
    Ok(spectral_zeta(&spec, s, TailModel::default())?.value)
}

/// Convergence of the two-photon spectral zeta toward its closed-form limit
/// along a parameter sequence.
pub fn zeta_limit_2p<T: Scalar>(
    s: T,
    variant: Limit2p<T>,
    sequence: &[T],
    k: usize,
    tol: T,
) -> Result<LimitTable<T>> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty parameter sequence".into()));
    }
    let (limit, rows) = match variant {
        Limit2p::DeltaToZero { g } => {
            if !(g.abs() < T::half()) {
                return Err(Error::OutOfRegime(ModelSpec::rabi2p(T::zero(), g).refusal_reason()));
            }
            let pref = T::two() * (T::one() - T::of(4.0) * g * g).powf(-s * T::half());
            let limit = pref * hurwitz_zeta(s, T::half())?.value;
            let mut rows = Vec::new();
            for &dk in sequence {
                let z = zeta_2p_at(dk, g, s, k, tol)?;
                rows.push(LimitRow { param: dk, zeta: z, distance: (z - limit).abs() });
            }
            (limit, rows)
        }
        Limit2p::GToZero { delta } => {
            if !(delta > T::zero() && delta < T::half()) {
                return Err(Error::InvalidArgument(
                    "this limit is stated for 0 < delta < 1/2".into(),
                ));
            }
            let limit = hurwitz_zeta(s, delta + T::half())?.value
                + hurwitz_zeta(s, T::half() - delta)?.value;
            let mut rows = Vec::new();
            for &gk in sequence {
                let z = zeta_2p_at(delta, gk, s, k, tol)?;
                rows.push(LimitRow { param: gk, zeta: z, distance: (z - limit).abs() });
            }
            (limit, rows)
        }
    };
    Ok(LimitTable { s, limit, rows })
}

/// Convergence of the oscillator spectral zeta toward 2(α²-1)^{-s/2}ζ(s;½)
/// as β → α.
pub fn zeta_limit_ncho<T: Scalar>(
    s: T,
    alpha: T,
    beta_sequence: &[T],
    k: usize,
    tol: T,
) -> Result<LimitTable<T>> {
    if beta_sequence.is_empty() {
        return Err(Error::InvalidArgument("empty beta sequence".into()));
    }
    for &b in beta_sequence {
        let m = ModelSpec::ncho(alpha, b);
        m.validate()?;
        if !m.bounded_below() {
            return Err(Error::OutOfRegime(m.refusal_reason()));
        }
    }
    let limit = T::two() * (alpha * alpha - T::one()).powf(-s * T::half())
        * hurwitz_zeta(s, T::half())?.value;
    let mut rows = Vec::new();
    for &b in beta_sequence {
        let spec = converged_spectrum(&ModelSpec::ncho(alpha, b), k, tol)?;
        let z = spectral_zeta(&spec, s, TailModel::default())?.value;
        rows.push(LimitRow { param: b, zeta: z, distance: (z - limit).abs() });
    }
    Ok(LimitTable { s, limit, rows })
}

/// Per-eigenvalue limit check: |μ_n(model_k) - target_n| for the first k
/// levels, mirroring the eigenvalue-convergence corollaries.
pub fn eigenvalue_limit_distance<T: Scalar>(
    model: &ModelSpec<T>,
    targets: &[T],
    tol: T,
) -> Result<T> {
    let spec = converged_spectrum(model, targets.len(), tol)?;
    Ok(targets
        .iter()
        .zip(&spec.values)
        .fold(T::zero(), |w, (&t, &v)| w.max((v - t).abs())))
}
