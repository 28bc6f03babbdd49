//! Monte Carlo evaluation of semigroup matrix elements in the μ-space
//! (b-ladder) representation of the Rabi models: exact path sampling of the
//! stationary Ornstein-Uhlenbeck process at the required times, Poisson
//! spin-flip trajectories, Gauss-Legendre quadrature of the potential
//! integral, positivity scans, ground-energy extraction, and the fiber-summed
//! estimator for the non-commutative harmonic oscillator.
//!
//! Estimator (two-photon family): for f, g on R×{±1},
//!   (f, e^{-tL} g) = 2 e^{Δt - t/2} E[ conj(f(q_0)) g(q_t) e^{-g∫₀ᵗ V(q_s) ds} ],
//! with q_s = (X_{s(1-2gT_s)}, T_s), V(q_s) = (2X²_{s(1-2gT_s)} - 1)T_s, spin
//! T_s flipping at unit-rate Poisson times on the Δ-scaled clock, and X the
//! stationary OU process with kernel
//!   κ_t(y,x) = (π(1-e^{-2t}))^{-1/2} exp(-|y - e^{-t}x|²/(1-e^{-2t})).
//! The one-photon family uses the identity time map and V = √2 T_s X_s.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ModelFamily, ModelSpec};
use crate::scalar::Scalar;
use crate::spectral::{assemble, assemble_rakk, converged_spectrum, eigen_full, TruncatedOperator};

/// Scalars that the samplers can draw: f32 or f64.
pub trait SampleScalar: Scalar
where
    StandardNormal: Distribution<Self>,
{
}
impl SampleScalar for f32 {}
impl SampleScalar for f64 {}

/// Which path functional a family integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFunctional {
    /// V(q_s) = (2X²_{s(1-2gT_s)} - 1)·T_s (two-photon)
    V2p,
    /// Ṽ(q̃_s) = √2·T_s·X_s (one-photon)
    V1p,
}

impl PathFunctional {
    fn for_model<T: Scalar>(model: &ModelSpec<T>) -> Result<Self> {
        match model.family {
            ModelFamily::Rabi2p => Ok(PathFunctional::V2p),
            ModelFamily::Rabi1p => Ok(PathFunctional::V1p),
            other => Err(Error::Unsupported(format!(
                "Feynman-Kac sampling covers the rabi2p and rabi1p families, not {}",
                other.name()
            ))),
        }
    }
}

/// Monte Carlo estimate with its statistical error.
#[derive(Debug, Clone)]
pub struct MCEstimate<T> {
    pub mean: T,
    /// Sample standard deviation / √n.
    pub std_error: T,
    pub n_samples: usize,
    pub seed: u64,
    pub integrand_spec: String,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct QuadNode<T> {
    /// quadrature node in path time
    pub s: T,
    pub weight: T,
    pub spin: i8,
    /// OU value at the mapped time of this node
    pub x: T,
}

/// One Feynman-Kac draw.
#[derive(Debug, Clone)]
pub struct PathSample<T> {
    /// Initial OU point, drawn from the stationary measure dμ = γ²dx.
    pub x0: T,
    pub sigma0: i8,
    /// Poisson jump times on the Δ-scaled clock [0, Δt], sorted.
    pub jump_times: Vec<T>,
    /// All OU times the draw required (0, mapped quadrature nodes, mapped
    /// endpoint), sorted.
    pub eval_times: Vec<T>,
    /// OU values at `eval_times`, sampled sequentially from the exact kernel.
    pub ou_values: Vec<T>,
    pub horizon: T,
    pub(crate) nodes: Vec<QuadNode<T>>,
    pub(crate) end_x: T,
    pub(crate) end_spin: i8,
}

impl<T: Scalar> PathSample<T> {
    /// Spin value at path time s: T_s = (-1)^{#jumps ≤ Δs}·σ₀.
    pub fn spin_at(&self, s: T, delta: T) -> i8 {
        let clock = delta * s;
        let flips = self.jump_times.iter().filter(|&&j| j <= clock).count();
        if flips % 2 == 0 {
            self.sigma0
        } else {
            -self.sigma0
        }
    }

    /// ∫₀ᵗ V(q_s) ds by the per-interval Gauss-Legendre rule.
    pub fn potential_integral(&self, functional: PathFunctional) -> T {
        let mut acc = T::zero();
        for node in &self.nodes {
            let spin = T::of(node.spin as f64);
            let v = match functional {
                PathFunctional::V2p => (T::two() * node.x * node.x - T::one()) * spin,
                PathFunctional::V1p => T::two().sqrt() * spin * node.x,
            };
            acc = acc + node.weight * v;
        }
        acc
    }
}

/// Test vector on R×{±1}: complex coefficients over the b-ladder basis in the
/// interleaved (spin fastest, σ=+1 first) ordering, evaluable pointwise via
/// the normalized Hermite recurrence.
#[derive(Debug, Clone)]
pub struct TestVector<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> TestVector<T> {
    pub fn from_complex_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        TestVector { coeffs }
    }

    pub fn from_real_coeffs(coeffs: &[T]) -> Self {
        TestVector {
            coeffs: coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect(),
        }
    }

    /// f(x,σ) = 1 (the b-basis ground level on both spin components).
    pub fn constant() -> Self {
        Self::from_real_coeffs(&[T::one(), T::one()])
    }

    /// Indicator of σ = +1 times the constant function.
    pub fn spin_up() -> Self {
        Self::from_real_coeffs(&[T::one(), T::zero()])
    }

    /// Indicator of σ = -1 times the constant function.
    pub fn spin_down() -> Self {
        Self::from_real_coeffs(&[T::zero(), T::one()])
    }

    /// f(x,σ) = x² on both spin components: ½ψ₀ + 2^{-1/2}ψ₂.
    pub fn x_squared() -> Self {
        let h = T::half();
        let r = T::one() / T::two().sqrt();
        Self::from_real_coeffs(&[h, h, T::zero(), T::zero(), r, r])
    }

    pub fn levels(&self) -> usize {
        self.coeffs.len().div_ceil(2)
    }

    /// Σ |c|² (the μ-space norm squared, by orthonormality of the basis).
    pub fn norm_sq(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Pointwise value via ψ_{n+1}(x) = x√(2/(n+1))ψ_n(x) - √(n/(n+1))ψ_{n-1}(x).
    pub fn eval(&self, x: T, sigma: i8) -> Complex<T> {
        let offset = if sigma > 0 { 0 } else { 1 };
        let mut acc = Complex::new(T::zero(), T::zero());
        let mut prev = T::zero(); // ψ_{n-1}
        let mut cur = T::one(); // ψ_n
        for n in 0..self.levels() {
            let flat = 2 * n + offset;
            if flat < self.coeffs.len() {
                acc = acc + self.coeffs[flat] * cur;
            }
            let next = x * (T::two() / T::of_usize(n + 1)).sqrt() * cur
                - (T::of_usize(n) / T::of_usize(n + 1)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        acc
    }

    /// Rough pointwise nonnegativity check on a grid (for positivity scans).
    pub fn is_pointwise_nonnegative(&self) -> bool {
        let mut any_positive = false;
        for sigma in [1i8, -1] {
            for i in 0..=160 {
                let x = T::of(-8.0 + 0.1 * i as f64);
                let v = self.eval(x, sigma);
                if v.im.abs() > T::of(1e-12) || v.re < -T::of(1e-9) {
                    return false;
                }
                if v.re > T::of(1e-9) {
                    any_positive = true;
                }
            }
        }
        any_positive
    }
}

/// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre<T: Scalar>(m: usize) -> (Vec<T>, Vec<T>) {
    assert!(m >= 1);
    let mut nodes = vec![T::zero(); m];
    let mut weights = vec![T::zero(); m];
    let mm = T::of_usize(m);
    for i in 0..m.div_ceil(2) {
        // Chebyshev initial guess
        let mut x = T::of((std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos());
        let mut dp = T::one();
        for _ in 0..100 {
            // Legendre P_m(x) and derivative
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=m {
                let kf = T::of_usize(k);
                let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { T::one() } else { p0 };
            dp = mm * (x * p - pm1) / (x * x - T::one());
            let dx = p / dp;
            x = x - dx;
            if dx.abs() <= T::epsilon() * T::of(4.0) * x.abs().max(T::one()) {
                break;
            }
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = T::two() / ((T::one() - x * x) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = T::zero();
    }
    (nodes, weights)
}

/// Draw one path for the given Rabi model: stationary OU start, Poisson spin
/// flips on the Δ-clock, and exact sequential OU sampling at the sorted set
/// of required times (all mapped quadrature nodes plus the mapped endpoint);
/// no interpolation anywhere.
pub fn sample_path<T: SampleScalar, R: Rng>(
    model: &ModelSpec<T>,
    t: T,
    quad_nodes_per_interval: usize,
    rng: &mut R,
) -> Result<PathSample<T>>
where
    StandardNormal: Distribution<T>,
{
    let functional = PathFunctional::for_model(model)?;
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument("horizon t must be positive".into()));
    }
    if quad_nodes_per_interval < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 quadrature nodes per interval".into(),
        ));
    }
    if !(model.delta >= T::zero()) {
        return Err(Error::InvalidArgument("delta must be >= 0 for sampling".into()));
    }
    if functional == PathFunctional::V2p && !(model.g.abs() < T::half()) {
        return Err(Error::OutOfRegime(format!(
            "|g| = {} >= 1/2: the two-photon path formula holds for |g| < 1/2",
            model.g.abs()
        )));
    }
    let (gl_x, gl_w) = gauss_legendre::<T>(quad_nodes_per_interval);

    let sigma0: i8 = if rng.random::<f64>() < 0.5 { 1 } else { -1 };

    // unit-rate Poisson arrivals on the Δ-clock [0, Δt]
    let clock_end = model.delta * t;
    let mut jump_times = Vec::new();
    if clock_end > T::zero() {
        let mut clock = T::zero();
        loop {
            let u: f64 = rng.random();
            clock = clock - T::of((1.0 - u).ln());
            if clock >= clock_end {
                break;
            }
            jump_times.push(clock);
        }
    }

    // knots in path time: 0, jumps/Δ, t; spin alternates per interval
    let mut knots = vec![T::zero()];
    for &j in &jump_times {
        knots.push(j / model.delta);
    }
    knots.push(t);
    let mut nodes: Vec<QuadNode<T>> = Vec::with_capacity(quad_nodes_per_interval * (knots.len() - 1));
    let mut spin = sigma0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = (a + b) * T::half();
        let half_len = (b - a) * T::half();
        for (&xg, &wg) in gl_x.iter().zip(&gl_w) {
            nodes.push(QuadNode { s: mid + half_len * xg, weight: half_len * wg, spin, x: T::nan() });
        }
        spin = -spin;
    }
    let end_spin = if jump_times.len() % 2 == 0 { sigma0 } else { -sigma0 };

    // time map s -> s(1-2gT_s) for the two-photon family, identity for 1p
    let map = |s: T, spin: i8| -> T {
        match functional {
            PathFunctional::V2p => s * (T::one() - T::two() * model.g * T::of(spin as f64)),
            PathFunctional::V1p => s,
        }
    };
    let end_time = map(t, end_spin);

    // gather required times: slot i < nodes.len() is node i, slot = nodes.len()
    // is the endpoint; time 0 is always included for x0
    let mut required: Vec<(T, usize)> = Vec::with_capacity(nodes.len() + 2);
    for (i, node) in nodes.iter().enumerate() {
        required.push((map(node.s, node.spin), i));
    }
    required.push((end_time, nodes.len()));
    required.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("time is NaN"));

    // exact sequential OU sampling from the stationary start
    let x0 = rng.sample::<T, _>(StandardNormal) * T::half().sqrt();
    let mut eval_times = vec![T::zero()];
    let mut ou_values = vec![x0];
    let mut end_x = x0;
    let mut t_prev = T::zero();
    let mut x_prev = x0;
    for &(time, slot) in &required {
        let dt = time - t_prev;
        let x = if dt > T::zero() {
            let decay = (-dt).exp();
            let sd = ((T::one() - decay * decay) * T::half()).sqrt();
            let z: T = rng.sample(StandardNormal);
            let x = decay * x_prev + sd * z;
            eval_times.push(time);
            ou_values.push(x);
            t_prev = time;
            x_prev = x;
            x
        } else {
            x_prev
        };
        if slot < nodes.len() {
            nodes[slot].x = x;
        } else {
            end_x = x;
        }
    }

    Ok(PathSample {
        x0,
        sigma0,
        jump_times,
        eval_times,
        ou_values,
        horizon: t,
        nodes,
        end_x,
        end_spin,
    })
}

/// Welford accumulator (count, mean, sum of squared deviations) for one
/// component; exact for constant integrands and stable in general.
#[derive(Debug, Clone, Copy)]
struct Welford<T> {
    n: usize,
    mean: T,
    m2: T,
}

impl<T: Scalar> Welford<T> {
    fn new() -> Self {
        Welford { n: 0, mean: T::zero(), m2: T::zero() }
    }

    fn push(&mut self, v: T) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean = self.mean + delta / T::of_usize(self.n);
        self.m2 = self.m2 + delta * (v - self.mean);
    }

    fn merge(&mut self, other: &Welford<T>) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (T::of_usize(self.n), T::of_usize(other.n));
        let delta = other.mean - self.mean;
        let total = na + nb;
        self.mean = self.mean + delta * nb / total;
        self.m2 = self.m2 + other.m2 + delta * delta * na * nb / total;
        self.n += other.n;
    }

    /// Standard error of the mean.
    fn std_error(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        let n = T::of_usize(self.n);
        (self.m2.max(T::zero()) / (n - T::one()) / n).sqrt()
    }
}

/// Complex accumulator for one chunk of samples.
#[derive(Debug, Clone, Copy)]
struct ChunkStats<T> {
    re: Welford<T>,
    im: Welford<T>,
}

const CHUNK: usize = 4096;

/// Core estimator: mean and componentwise standard error of
/// 2e^{Δt-t/2}·conj(f(q₀))·g(q_t)·e^{-g∫V}, with σ₀ uniform on {±1} and an
/// optional extra spin weight on the left vector's argument.
fn fk_core<T: SampleScalar>(
    model: &ModelSpec<T>,
    f: &TestVector<T>,
    g_vec: &TestVector<T>,
    t: T,
    n_samples: usize,
    quad_nodes_per_interval: usize,
    seed: u64,
    stream_offset: u64,
) -> Result<(Complex<T>, Complex<T>)>
where
    StandardNormal: Distribution<T>,
{
    let functional = PathFunctional::for_model(model)?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    // fail fast on bad parameters before spawning workers
    sample_path(model, t, quad_nodes_per_interval, &mut ChaCha8Rng::seed_from_u64(seed))?;

    let prefactor = T::two() * (model.delta * t - t * T::half()).exp();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let stats: Vec<ChunkStats<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_offset + c as u64);
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n_samples);
            let mut acc = ChunkStats { re: Welford::new(), im: Welford::new() };
            for _ in lo..hi {
                let path = sample_path(model, t, quad_nodes_per_interval, &mut rng)
                    .expect("parameters validated before sampling");
                let weight = (-model.g * path.potential_integral(functional)).exp();
                let fv = f.eval(path.x0, path.sigma0).conj();
                let gv = g_vec.eval(path.end_x, path.end_spin);
                let val = fv * gv * (prefactor * weight);
                acc.re.push(val.re);
                acc.im.push(val.im);
            }
            acc
        })
        .collect();

    // deterministic sequential merge
    let mut re = Welford::new();
    let mut im = Welford::new();
    for s in &stats {
        re.merge(&s.re);
        im.merge(&s.im);
    }
    let mean = Complex::new(re.mean, im.mean);
    let se = Complex::new(re.std_error(), im.std_error());
    Ok((mean, se))
}

/// Monte Carlo estimate of the semigroup matrix element (f, e^{-tL} g) in the
/// μ-space form of the model (rabi2p → rak, rabi1p → its one-photon analogue).
pub fn fk_matrix_element<T: SampleScalar>(
    model: &ModelSpec<T>,
    f: &TestVector<T>,
    g_vec: &TestVector<T>,
    t: T,
    n_samples: usize,
    quad_nodes_per_interval: usize,
    seed: u64,
) -> Result<MCEstimate<T>>
where
    StandardNormal: Distribution<T>,
{
    let (mean, se) = fk_core(model, f, g_vec, t, n_samples, quad_nodes_per_interval, seed, 0)?;
    // internal consistency: the imaginary part must be statistical noise
    let im_tol = T::of(6.0) * se.im + T::of(1e-12) * (T::one() + mean.re.abs());
    if mean.im.abs() > im_tol {
        return Err(Error::Numerical(format!(
            "imaginary part of the estimate ({}) exceeds its noise level ({im_tol})",
            mean.im
        )));
    }
    Ok(MCEstimate {
        mean: mean.re,
        std_error: se.re,
        n_samples,
        seed,
        integrand_spec: format!(
            "(f, e^{{-tL}}g), family={}, delta={}, g={}, t={t}, nodes/interval={quad_nodes_per_interval}",
            model.family.name(),
            model.delta,
            model.g
        ),
    })
}

/// Spectral reference for the same matrix element, from the μ-space matrix:
/// (f, e^{-tM} g) = Σ_k e^{-tλ_k} (f·v_k)(v_k·g).
pub fn spectral_matrix_element<T: Scalar>(
    model: &ModelSpec<T>,
    f: &TestVector<T>,
    g_vec: &TestVector<T>,
    t: T,
    n_max: usize,
) -> Result<T> {
    let op = mu_form(model, n_max)?;
    let (spec, vectors) = eigen_full(&op)?;
    let dim = op.matrix.dim();
    let take = |v: &TestVector<T>, i: usize| {
        if i < v.coeffs.len() {
            v.coeffs[i]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    };
    let mut acc = T::zero();
    for k in 0..dim {
        let col = vectors.col(k);
        let mut fk = Complex::new(T::zero(), T::zero());
        let mut gk = Complex::new(T::zero(), T::zero());
        for (i, &c) in col.iter().enumerate() {
            fk = fk + take(f, i).conj() * c;
            gk = gk + take(g_vec, i) * c;
        }
        acc = acc + (-t * spec.values[k]).exp() * (fk * gk).re;
    }
    Ok(acc)
}

/// μ-space matrix of the model the sampler integrates.
pub(crate) fn mu_form<T: Scalar>(model: &ModelSpec<T>, n_max: usize) -> Result<TruncatedOperator<T>> {
    match model.family {
        ModelFamily::Rabi2p => assemble(&ModelSpec::rak(model.delta, model.g), n_max),
        ModelFamily::Rabi1p => Ok(TruncatedOperator {
            matrix: assemble_rakk(model.delta, model.g, n_max)?,
            n_max,
            model: *model,
            truncation_artifact: !model.bounded_below(),
        }),
        other => Err(Error::Unsupported(format!(
            "no μ-space form for family {}",
            other.name()
        ))),
    }
}

/// Strictly positive ground vector of the μ-space matrix (sign-normalized).
pub fn ground_test_vector<T: Scalar>(model: &ModelSpec<T>, n_max: usize) -> Result<TestVector<T>> {
    let op = mu_form(model, n_max)?;
    let (_, vectors) = eigen_full(&op)?;
    let mut col = vectors.col(0);
    let total: T = col.iter().copied().sum();
    if total < T::zero() {
        for c in col.iter_mut() {
            *c = -*c;
        }
    }
    Ok(TestVector::from_real_coeffs(&col))
}

/// Large-t ground-energy extraction: -log((f, e^{-tL}f)/‖f‖²)/t with the
/// statistical error propagated by the delta method. The default test vector
/// is the μ-space ground vector, which removes the excited-state bias.
pub fn fk_ground_energy<T: SampleScalar>(
    model: &ModelSpec<T>,
    t: T,
    n_samples: usize,
    quad_nodes_per_interval: usize,
    seed: u64,
    vector: Option<&TestVector<T>>,
) -> Result<MCEstimate<T>>
where
    StandardNormal: Distribution<T>,
{
    // gap precondition: first distinct-level gap × t ≥ 3
    let probe = converged_spectrum(model, 8, T::of(1e-7))?;
    let (_, g1) = probe.group_of(0);
    let gap = probe.values[g1.min(probe.values.len() - 1)] - probe.values[0];
    if gap * t < T::of(3.0) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} too small: spectral gap {gap} times t must be >= 3 for ground-energy extraction"
        )));
    }
    let default_vec;
    let f = match vector {
        Some(v) => v,
        None => {
            default_vec = ground_test_vector(model, 160)?;
            &default_vec
        }
    };
    let est = fk_matrix_element(model, f, f, t, n_samples, quad_nodes_per_interval, seed)?;
    if !(est.mean > T::zero()) {
        return Err(Error::Statistical(format!(
            "matrix-element estimate {} is not positive; increase n_samples",
            est.mean
        )));
    }
    let norm_sq = f.norm_sq();
    Ok(MCEstimate {
        mean: -(est.mean / norm_sq).ln() / t,
        std_error: est.std_error / (t * est.mean),
        n_samples,
        seed,
        integrand_spec: format!("-log((f,e^{{-tL}}f)/|f|^2)/t, {}", est.integrand_spec),
    })
}

/// One pair in a positivity scan.
#[derive(Debug, Clone)]
pub struct PositivityRow<T> {
    pub left: usize,
    pub right: usize,
    pub estimate: MCEstimate<T>,
    /// mean / std_error (infinite for exact positives with zero variance).
    pub z: T,
    pub conclusive_positive: bool,
    pub inconclusive: bool,
}

/// Report of `positivity_scan`.
#[derive(Debug, Clone)]
pub struct PositivityReport<T> {
    pub rows: Vec<PositivityRow<T>>,
    pub min_z: T,
    pub all_conclusive_positive: bool,
}

/// Estimate all pairwise matrix elements between nonnegative test vectors and
/// report how decisively each is positive (z ≥ 3). Statistically undecided
/// pairs are flagged inconclusive rather than failed.
pub fn positivity_scan<T: SampleScalar>(
    model: &ModelSpec<T>,
    vectors: &[TestVector<T>],
    t: T,
    n_samples: usize,
    quad_nodes_per_interval: usize,
    seed: u64,
) -> Result<PositivityReport<T>>
where
    StandardNormal: Distribution<T>,
{
    if !(model.delta > T::zero()) {
        return Err(Error::InvalidArgument(
            "positivity scan requires delta > 0 (the semigroup is not positivity \
             improving at delta = 0)"
                .into(),
        ));
    }
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two test vectors".into()));
    }
    for (i, v) in vectors.iter().enumerate() {
        if !v.is_pointwise_nonnegative() {
            return Err(Error::InvalidArgument(format!(
                "test vector {i} is not pointwise nonnegative"
            )));
        }
    }
    let mut rows = Vec::new();
    let mut min_z = T::infinity();
    let mut pair_index = 0u64;
    for i in 0..vectors.len() {
        for j in i..vectors.len() {
            let (mean, se) = fk_core(
                model,
                &vectors[i],
                &vectors[j],
                t,
                n_samples,
                quad_nodes_per_interval,
                seed,
                pair_index << 32,
            )?;
            pair_index += 1;
            let z = if se.re > T::zero() {
                mean.re / se.re
            } else if mean.re > T::zero() {
                T::infinity()
            } else {
                T::zero()
            };
            min_z = min_z.min(z);
            rows.push(PositivityRow {
                left: i,
                right: j,
                estimate: MCEstimate {
                    mean: mean.re,
                    std_error: se.re,
                    n_samples,
                    seed,
                    integrand_spec: format!("positivity pair ({i},{j})"),
                },
                z,
                conclusive_positive: z >= T::of(3.0),
                inconclusive: z < T::of(3.0) && z > -T::of(3.0),
            });
        }
    }
    let all = rows.iter().all(|r| r.conclusive_positive);
    Ok(PositivityReport { rows, min_z, all_conclusive_positive: all })
}

/// Fiber-summed estimator for the oscillator semigroup:
/// (f, e^{-tQ}g) = Σ_λ (plain two-photon estimate at Δ_λ = (α-β)λ/(2αβ),
/// g* = 1/(2√(αβ)), horizon 2αβt/(α+β), with the weighted-space factor folded
/// into the left vector). Inputs are coefficient vectors in the interleaved
/// spin⊗Fock basis of the oscillator. Returns the estimate and the bound on
/// the discarded tail Σ_{λ beyond k_max} e^{-tλ}‖f_λ‖‖g_λ‖.
pub fn fk_ncho_matrix_element<T: SampleScalar>(
    alpha: T,
    beta: T,
    f: &[T],
    g_vec: &[T],
    t: T,
    n_samples: usize,
    quad_nodes_per_interval: usize,
    seed: u64,
    k_max: usize,
) -> Result<(MCEstimate<T>, T)>
where
    StandardNormal: Distribution<T>,
{
    if !(alpha * beta > T::one()) {
        return Err(Error::OutOfRegime(
            ModelSpec::ncho(alpha, beta).refusal_reason(),
        ));
    }
    if !(alpha > beta) {
        return Err(Error::InvalidArgument(
            "the fiber-summed estimator is stated for alpha > beta".into(),
        ));
    }
    let model = ModelSpec::ncho(alpha, beta);
    let conv = converged_spectrum(&model, k_max, T::of(1e-8))?;
    let op = assemble(&model, conv.n_max)?;
    let (spec, vectors) = eigen_full(&op)?;
    let dim = op.matrix.dim();
    let pad = |v: &[T], i: usize| if i < v.len() { v[i] } else { T::zero() };

    let scale = T::two() * alpha * beta / (alpha + beta);
    let t_fiber = scale * t;
    let mut total_mean = T::zero();
    let mut total_var = T::zero();
    let mut total_im = T::zero();
    let mut total_im_var = T::zero();
    let mut used_f_sq = T::zero();
    let mut used_g_sq = T::zero();
    let mut group_start = 0usize;
    let mut lambda_index = 0u64;
    while group_start < k_max.min(spec.values.len()) {
        let (g0, g1) = spec.group_of(group_start);
        let lambda = spec.values[g0];
        // project f and g onto the λ-eigenspace
        let mut f_lam = vec![T::zero(); dim];
        let mut g_lam = vec![T::zero(); dim];
        for k in g0..g1 {
            let col = vectors.col(k);
            let cf: T = col.iter().enumerate().map(|(i, &c)| c * pad(f, i)).sum();
            let cg: T = col.iter().enumerate().map(|(i, &c)| c * pad(g_vec, i)).sum();
            for i in 0..dim {
                f_lam[i] = f_lam[i] + cf * col[i];
                g_lam[i] = g_lam[i] + cg * col[i];
            }
        }
        used_f_sq = used_f_sq + f_lam.iter().map(|&c| c * c).sum();
        used_g_sq = used_g_sq + g_lam.iter().map(|&c| c * c).sum();

        let fiber = crate::fiber::FiberSpec::new(alpha, beta, lambda, crate::fiber::FiberFamily::TwoPhoton)?;
        let left = TestVector::from_complex_coeffs(map_to_mu_space(alpha, beta, &f_lam, true));
        let right = TestVector::from_complex_coeffs(map_to_mu_space(alpha, beta, &g_lam, false));
        let (mean, se) = fk_core(
            &fiber.model(),
            &left,
            &right,
            t_fiber,
            n_samples,
            quad_nodes_per_interval,
            seed,
            lambda_index << 32,
        )?;
        lambda_index += 1;
        total_mean = total_mean + mean.re;
        total_var = total_var + se.re * se.re;
        total_im = total_im + mean.im;
        total_im_var = total_im_var + se.im * se.im;
        group_start = g1;
    }
    // discarded tail: e^{-tλ_next}·‖f - Σf_λ‖·‖g - Σg_λ‖
    let lambda_next = spec.values.get(group_start).copied().unwrap_or(T::infinity());
    let norm = |v: &[T]| v.iter().map(|&c| c * c).sum::<T>();
    let rest_f = (norm(f) - used_f_sq).max(T::zero()).sqrt();
    let rest_g = (norm(g_vec) - used_g_sq).max(T::zero()).sqrt();
    let tail_bound = (-t * lambda_next).exp() * rest_f * rest_g;

    let im_tol = T::of(6.0) * total_im_var.sqrt() + T::of(1e-12) * (T::one() + total_mean.abs());
    if total_im.abs() > im_tol {
        return Err(Error::Numerical(format!(
            "imaginary part {total_im} of the fiber-summed estimate exceeds noise {im_tol}"
        )));
    }
    Ok((
        MCEstimate {
            mean: total_mean,
            std_error: total_var.sqrt(),
            n_samples,
            seed,
            integrand_spec: format!(
                "(f, e^{{-tQ}}g) via fibers, alpha={alpha}, beta={beta}, t={t}, \
                 fibers={lambda_index}, tail_bound={tail_bound}"
            ),
        },
        tail_bound,
    ))
}

/// Map an oscillator-space coefficient vector into the μ-space test vector of
/// its fiber: spin rotation (π/4 around y) composed with the level phases
/// e^{-i(π/4)n} and the diag(√α,√β)·e^{i(π/4)σ_z} intertwiner; for the left
/// vector of the weighted inner product the diag(1/α,1/β) weight is folded in
/// (the weight does not commute with the spin rotation and cannot be carried
/// as a scalar sample factor).
fn map_to_mu_space<T: Scalar>(alpha: T, beta: T, v: &[T], weighted: bool) -> Vec<Complex<T>> {
    let quarter = T::pi() * T::of(0.25);
    let inv_sqrt2 = T::one() / T::two().sqrt();
    let (wa, wb) = if weighted {
        (T::one() / alpha, T::one() / beta)
    } else {
        (T::one(), T::one())
    };
    let cu = Complex::from_polar(alpha.sqrt() * wa * inv_sqrt2, quarter);
    let cd = Complex::from_polar(beta.sqrt() * wb * inv_sqrt2, -quarter);
    let levels = v.len().div_ceil(2);
    let mut out = vec![Complex::new(T::zero(), T::zero()); 2 * levels];
    for n in 0..levels {
        let up = if 2 * n < v.len() { v[2 * n] } else { T::zero() };
        let dn = if 2 * n + 1 < v.len() { v[2 * n + 1] } else { T::zero() };
        let phase = Complex::from_polar(T::one(), -quarter * T::of_usize(n));
        // spin rotation rows: (1/√2)[[1,1],[-1,1]] applied after the diagonal
        out[2 * n] = (cu * up + cd * dn) * phase;
        out[2 * n + 1] = (-cu * up + cd * dn) * phase;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(16);
        // ∫_{-1}^{1} x^k dx
        for k in 0..=20 {
            let quad: f64 = x.iter().zip(&w).map(|(&xi, &wi)| wi * xi.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((quad - exact).abs() < 1e-13, "k={k}: {quad} vs {exact}");
        }
        let wsum: f64 = w.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn test_vector_eval() {
        // ψ0 = 1, ψ1 = √2 x, ψ2 = (2x²-1)/√2
        let v = TestVector::<f64>::from_real_coeffs(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        for x in [-1.3, 0.0, 0.4, 2.1] {
            let expect = (2.0 * x * x - 1.0) / 2f64.sqrt();
            assert!((v.eval(x, 1).re - expect).abs() < 1e-13);
            assert_eq!(v.eval(x, -1).re, 0.0);
        }
        let c = TestVector::<f64>::constant();
        assert_eq!(c.eval(1.7, 1).re, 1.0);
        assert_eq!(c.eval(1.7, -1).re, 1.0);
        let xsq = TestVector::<f64>::x_squared();
        for x in [-0.9, 0.3, 1.8] {
            assert!((xsq.eval(x, 1).re - x * x).abs() < 1e-13);
        }
        assert!(xsq.is_pointwise_nonnegative());
        assert!(TestVector::<f64>::spin_up().is_pointwise_nonnegative());
    }

    #[test]
    fn zero_detuning_paths_have_no_jumps() {
        let m = ModelSpec::rabi2p(0.0f64, 0.2);
        let mut r = rng(7);
        for _ in 0..20 {
            let p = sample_path(&m, 2.0, 4, &mut r).unwrap();
            assert!(p.jump_times.is_empty());
            assert_eq!(p.end_spin, p.sigma0);
            for node in &p.nodes {
                assert_eq!(node.spin, p.sigma0);
            }
        }
    }

    #[test]
    fn zero_coupling_time_map_is_identity() {
        let m = ModelSpec::rabi2p(0.5f64, 0.0);
        let mut r = rng(11);
        let p = sample_path(&m, 1.0, 4, &mut r).unwrap();
        // eval times are exactly the node times plus 0 and t
        for node in &p.nodes {
            assert!(p.eval_times.iter().any(|&et| et == node.s));
        }
        assert!(p.eval_times.iter().any(|&et| et == 1.0));
    }

    #[test]
    fn spin_trajectory_consistency() {
        let m = ModelSpec::rabi2p(0.8f64, 0.1);
        let mut r = rng(13);
        for _ in 0..50 {
            let p = sample_path(&m, 2.0, 3, &mut r).unwrap();
            for node in &p.nodes {
                assert_eq!(node.spin, p.spin_at(node.s, m.delta), "node spin mismatch");
            }
            assert_eq!(p.end_spin, p.spin_at(p.horizon, m.delta));
        }
    }

    #[test]
    fn sampler_refuses_out_of_regime() {
        let mut r = rng(1);
        assert!(sample_path(&ModelSpec::rabi2p(0.1f64, 0.5), 1.0, 4, &mut r)
            .unwrap_err()
            .is_refusal());
        assert!(sample_path(&ModelSpec::rabi2p(0.1f64, 0.2), 0.0, 4, &mut r).is_err());
        assert!(sample_path(&ModelSpec::ncho(2.0f64, 2.0), 1.0, 4, &mut r).is_err());
        // one-photon family has no coupling restriction
        assert!(sample_path(&ModelSpec::rabi1p(0.1f64, 0.9), 1.0, 4, &mut r).is_ok());
    }

    #[test]
    fn ou_marginal_is_stationary() {
        // X at a fixed positive time under the stationary start stays N(0, ½):
        // Kolmogorov-Smirnov test against the exact normal CDF.
        let m = ModelSpec::rabi2p(0.4f64, 0.15);
        let mut r = rng(20260810);
        let n = 20_000;
        let mut xs: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let p = sample_path(&m, 1.5, 2, &mut r).unwrap();
            xs.push(*p.ou_values.last().unwrap());
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // normal cdf via the Abramowitz-Stegun 7.1.26 erf approximation
        let cdf = |x: f64| {
            let z = x / 0.5f64.sqrt() / 2f64.sqrt();
            let t = 1.0 / (1.0 + 0.3275911 * z.abs());
            let poly = t
                * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
            let erf = 1.0 - poly * (-z * z).exp();
            0.5 * (1.0 + erf.copysign(z))
        };
        let mut ks = 0.0f64;
        for (i, &x) in xs.iter().enumerate() {
            let f = cdf(x);
            ks = ks.max((f - i as f64 / n as f64).abs());
            ks = ks.max(((i + 1) as f64 / n as f64 - f).abs());
        }
        // 1% critical value 1.63/√n plus slack for the erf approximation
        assert!(ks < 1.7 / (n as f64).sqrt() + 2e-3, "KS statistic {ks}");
    }

    #[test]
    fn deterministic_given_seed() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        let f = TestVector::constant();
        let a = fk_matrix_element(&m, &f, &f, 1.0, 20_000, 8, 42).unwrap();
        let b = fk_matrix_element(&m, &f, &f, 1.0, 20_000, 8, 42).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std_error, b.std_error);
        let c = fk_matrix_element(&m, &f, &f, 1.0, 20_000, 8, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn zero_variance_free_case() {
        // Δ=0, g=0, f=g=1: every sample equals 2e^{-t/2}
        let m = ModelSpec::rabi2p(0.0f64, 0.0);
        let f = TestVector::constant();
        let t = 1.3;
        let est = fk_matrix_element(&m, &f, &f, t, 500, 4, 5).unwrap();
        assert!((est.mean - 2.0 * (-t / 2.0f64).exp()).abs() < 1e-14);
        assert_eq!(est.std_error, 0.0, "identical samples have exactly zero spread");
    }

    #[test]
    fn uncoupled_spin_correlation_matches_closed_form() {
        // Δ=0.5, g=0: (1_+, e^{-tL} 1_-) = e^{-t/2} sinh(Δt)
        let m = ModelSpec::rabi2p(0.5f64, 0.0);
        let t = 1.0;
        let est = fk_matrix_element(
            &m,
            &TestVector::spin_up(),
            &TestVector::spin_down(),
            t,
            60_000,
            4,
            99,
        )
        .unwrap();
        let expect = (-t / 2.0f64).exp() * (0.5 * t).sinh();
        assert!(
            (est.mean - expect).abs() < 4.0 * est.std_error,
            "{} vs {expect} ± {}",
            est.mean,
            est.std_error
        );
        // spectral route agrees
        let sp = spectral_matrix_element(&m, &TestVector::spin_up(), &TestVector::spin_down(), t, 64).unwrap();
        assert!((sp - expect).abs() < 1e-10);
    }

    #[test]
    fn fk_matches_spectral_oracle_2p() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        let f = TestVector::constant();
        let t = 1.0;
        let est = fk_matrix_element(&m, &f, &f, t, 120_000, 16, 7).unwrap();
        let sp = spectral_matrix_element(&m, &f, &f, t, 220).unwrap();
        let z = (est.mean - sp).abs() / est.std_error;
        assert!(z < 3.5, "z = {z}: {} vs {sp} ± {}", est.mean, est.std_error);
    }

    #[test]
    fn fk_matches_spectral_oracle_1p() {
        let m = ModelSpec::rabi1p(0.5f64, 0.3);
        let f = TestVector::constant();
        let t = 1.0;
        let est = fk_matrix_element(&m, &f, &f, t, 120_000, 8, 17).unwrap();
        let sp = spectral_matrix_element(&m, &f, &f, t, 220).unwrap();
        let z = (est.mean - sp).abs() / est.std_error;
        assert!(z < 3.5, "z = {z}: {} vs {sp} ± {}", est.mean, est.std_error);
    }

    #[test]
    fn ground_energy_extraction_free_case() {
        // Δ=0, g=0, t=5: exactly ½ with zero variance
        let m = ModelSpec::rabi2p(0.0f64, 0.0);
        let est = fk_ground_energy(&m, 5.0, 400, 4, 3, Some(&TestVector::constant())).unwrap();
        assert!((est.mean - 0.5).abs() < 1e-12, "{}", est.mean);
    }

    #[test]
    fn ground_energy_uncoupled_detuned() {
        // Δ=0.5, g=0: ground of the μ-space form is 0
        let m = ModelSpec::rabi2p(0.5f64, 0.0);
        let est = fk_ground_energy(&m, 7.0, 40_000, 4, 21, None).unwrap();
        assert!(
            est.mean.abs() < 3.0 * est.std_error + 1e-3,
            "{} ± {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn ground_energy_requires_gap_times_t() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        assert!(fk_ground_energy(&m, 0.5, 1000, 4, 3, None).is_err());
    }

    #[test]
    fn positivity_cross_spin_zero_at_zero_detuning() {
        // the scan itself refuses Δ=0; the underlying element is exactly 0
        let m = ModelSpec::rabi2p(0.0f64, 0.2);
        let est = fk_matrix_element(
            &m,
            &TestVector::spin_up(),
            &TestVector::spin_down(),
            1.0,
            5_000,
            8,
            3,
        )
        .unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert!(positivity_scan(&m, &[TestVector::spin_up(), TestVector::spin_down()], 1.0, 100, 4, 3).is_err());
    }

    #[test]
    fn positivity_scan_detuned() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        let vs = [
            TestVector::constant(),
            TestVector::spin_up(),
            TestVector::spin_down(),
            TestVector::x_squared(),
        ];
        let rep = positivity_scan(&m, &vs, 1.0, 30_000, 8, 12).unwrap();
        assert!(rep.all_conclusive_positive, "min z = {}", rep.min_z);
        assert!(rep.min_z >= 3.0);
    }

    #[test]
    fn positivity_scan_rejects_signed_vector() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        // ψ1 = √2 x changes sign
        let bad = TestVector::from_real_coeffs(&[0.0, 0.0, 1.0, 1.0]);
        assert!(!bad.is_pointwise_nonnegative());
        assert!(positivity_scan(&m, &[bad, TestVector::constant()], 1.0, 100, 4, 3).is_err());
    }

    #[test]
    fn variance_scales_inverse_root_n() {
        let m = ModelSpec::rabi2p(0.5f64, 0.2);
        let f = TestVector::constant();
        let mut logs: Vec<(f64, f64)> = Vec::new();
        for &n in &[100usize, 1_000, 10_000, 100_000] {
            let est = fk_matrix_element(&m, &f, &f, 1.0, n, 8, 31).unwrap();
            logs.push(((n as f64).ln(), est.std_error.ln()));
        }
        // least-squares slope over 3 decades
        let n = logs.len() as f64;
        let sx: f64 = logs.iter().map(|p| p.0).sum();
        let sy: f64 = logs.iter().map(|p| p.1).sum();
        let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn time_change_matches_direct_stretched_sampling() {
        // Δ=0: the map s↦s(1-2gσ) is linear with slope fixed by σ₀; the
        // sampled path read at mapped nodes must follow the stationary OU law
        // on the stretched horizon: E[X_{τ(s)}X_{τ(s')}] = ½e^{-|τ(s)-τ(s')|},
        // separately per σ₀ branch.
        let g = 0.2f64;
        let m = ModelSpec::rabi2p(0.0, g);
        let mut r = rng(77);
        let n = 60_000;
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        let mut ds = 0.0f64;
        for _ in 0..n {
            let p = sample_path(&m, 1.0, 2, &mut r).unwrap();
            let (a, b) = (&p.nodes[0], &p.nodes[1]);
            ds = b.s - a.s; // fixed Gauss-Legendre node spacing
            let idx = if p.sigma0 == 1 { 0 } else { 1 };
            sums[idx] += a.x * b.x;
            counts[idx] += 1;
        }
        for (idx, sigma) in [(0usize, 1.0f64), (1, -1.0)] {
            let gap = ds * (1.0 - 2.0 * g * sigma);
            let expect = 0.5 * (-gap.abs()).exp();
            let mean = sums[idx] / counts[idx] as f64;
            // var(X_a X_b) ≤ E[X²]² + ... ≈ ½ for the stationary pair
            let se = (0.75 / counts[idx] as f64).sqrt();
            assert!(
                (mean - expect).abs() < 5.0 * se,
                "sigma0={sigma}: lag correlation {mean} vs {expect}"
            );
        }
    }

    #[test]
    fn fiber_summed_estimator_short_time_identity() {
        // t→0⁺: Σ_λ estimates → (f,g)
        let alpha = 3.0f64;
        let beta = 2.0;
        let m = ModelSpec::ncho(alpha, beta);
        let conv = converged_spectrum(&m, 4, 1e-8).unwrap();
        let op = assemble(&m, conv.n_max).unwrap();
        let (_, vectors) = eigen_full(&op).unwrap();
        let f = vectors.col(0);
        let (est, _) = fk_ncho_matrix_element(alpha, beta, &f, &f, 0.05, 60_000, 8, 123, 4).unwrap();
        // ground eigenvector: (f,f) = 1, contamination from other fibers is zero
        let rel = (est.mean - (-0.05 * conv.values[0]).exp()).abs();
        assert!(
            rel < 3.5 * est.std_error + 1e-4,
            "{} vs {} ± {}",
            est.mean,
            (-0.05 * conv.values[0]).exp(),
            est.std_error
        );
    }

    #[test]
    fn fiber_summed_estimator_ground_decay() {
        let alpha = 3.0f64;
        let beta = 2.0;
        let m = ModelSpec::ncho(alpha, beta);
        let conv = converged_spectrum(&m, 2, 1e-8).unwrap();
        let op = assemble(&m, conv.n_max).unwrap();
        let (_, vectors) = eigen_full(&op).unwrap();
        let f = vectors.col(0);
        let t = 1.0;
        let (est, tail) = fk_ncho_matrix_element(alpha, beta, &f, &f, t, 120_000, 16, 31, 2).unwrap();
        let expect = (-t * conv.values[0]).exp();
        assert!(tail < 1e-10, "ground vector has no tail: {tail}");
        let z = (est.mean - expect).abs() / est.std_error;
        assert!(z < 3.5, "z = {z}: {} vs {expect} ± {}", est.mean, est.std_error);
    }

    #[test]
    fn fiber_summed_estimator_rejects_bad_order() {
        let f = vec![1.0f64, 0.0];
        assert!(fk_ncho_matrix_element(2.0, 3.0, &f, &f, 1.0, 100, 4, 1, 2).is_err());
        assert!(fk_ncho_matrix_element(1.0, 0.9, &f, &f, 1.0, 100, 4, 1, 2).is_err());
    }
}
