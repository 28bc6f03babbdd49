//! Hamiltonian assembly, diagonalization, truncation escalation, closed-form
//! bound checks and spectral symmetry checks.

use crate::error::{Error, Result};
use crate::fock::{boson_matrix, kron_add, sector_of, spin_matrix, BasisIndex, BosonOperatorKind as B, SectorLabel, SpinOperatorKind as S};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::model::{ModelFamily, ModelSpec};
use crate::scalar::Scalar;

/// Escalation ceiling for `converged_spectrum`.
pub const N_MAX_CAP: usize = 4096;

/// Default relative tolerance for grouping near-degenerate eigenvalues.
pub fn default_degeneracy_tol<T: Scalar>() -> T {
    T::of(1e-7)
}

/// A model Hamiltonian compressed to the truncated basis.
#[derive(Debug, Clone)]
pub struct TruncatedOperator<T> {
    pub matrix: Matrix<T>,
    pub n_max: usize,
    pub model: ModelSpec<T>,
    /// Set when the model is not bounded below: the matrix is still assembled
    /// but its eigenvalues are truncation artifacts, not approximations.
    pub truncation_artifact: bool,
}

/// Sorted eigenvalues with degeneracy grouping and convergence metadata.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    /// Nondecreasing eigenvalues of the final truncated matrix.
    pub values: Vec<T>,
    /// Maximal runs of indices whose consecutive gaps are below the
    /// degeneracy tolerance, as half-open ranges (start, end).
    pub degeneracy_groups: Vec<(usize, usize)>,
    pub n_max: usize,
    /// How many leading eigenvalues passed the escalation test (0 when the
    /// spectrum came from a single diagonalization).
    pub converged_count: usize,
    pub convergence_tol: Option<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub(crate) fn from_values(values: Vec<T>, n_max: usize) -> Self {
        let degeneracy_groups = group_degenerate(&values, default_degeneracy_tol());
        Spectrum { values, degeneracy_groups, n_max, converged_count: 0, convergence_tol: None }
    }

    /// Multiplicity of the group containing eigenvalue index `i`.
    pub fn multiplicity_at(&self, i: usize) -> usize {
        self.degeneracy_groups
            .iter()
            .find(|&&(s, e)| i >= s && i < e)
            .map(|&(s, e)| e - s)
            .unwrap_or(1)
    }

    /// Index range (start, end) of the group containing index `i`.
    pub fn group_of(&self, i: usize) -> (usize, usize) {
        self.degeneracy_groups
            .iter()
            .copied()
            .find(|&(s, e)| i >= s && i < e)
            .unwrap_or((i, i + 1))
    }
}

/// Maximal runs with consecutive relative gaps below `tol`.
pub fn group_degenerate<T: Scalar>(values: &[T], tol: T) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0usize;
    for i in 1..=values.len() {
        let split = if i == values.len() {
            true
        } else {
            let gap = (values[i] - values[i - 1]).abs();
            let scale = T::one().max(values[i].abs().max(values[i - 1].abs()));
            gap >= tol * scale
        };
        if split {
            groups.push((start, i));
            start = i;
        }
    }
    groups
}

/// Assemble the truncated Hamiltonian of `model` at truncation `n_max`.
///
/// All matrices are real symmetric: wherever the operator pairs σ_y with the
/// antisymmetric boson factor a²-a†² (or a-a†), the real antisymmetric
/// [[0,-1],[1,0]] is used instead, which leaves the spectrum unchanged.
pub fn assemble<T: Scalar>(model: &ModelSpec<T>, n_max: usize) -> Result<TruncatedOperator<T>> {
    model.validate()?;
    if n_max < 4 {
        return Err(Error::InvalidArgument(format!(
            "assemble needs n_max >= 4, got {n_max}"
        )));
    }
    let id2 = spin_matrix(S::Identity)?;
    let half = T::half();
    let matrix = match model.family {
        ModelFamily::Rabi2p | ModelFamily::Rabi1p => {
            let coupling = if model.family == ModelFamily::Rabi2p { B::PairSum } else { B::LadderSum };
            let mut m = Matrix::zeros(2 * n_max);
            kron_add(&mut m, model.delta, &spin_matrix(S::Sz)?, &Matrix::identity(n_max));
            kron_add(&mut m, T::one(), &id2, &number_plus_half(n_max)?);
            kron_add(&mut m, model.g, &spin_matrix(S::Sx)?, &boson_matrix(coupling, n_max)?);
            m
        }
        ModelFamily::Ncho | ModelFamily::Ncho1p => {
            let coupling = if model.family == ModelFamily::Ncho { B::PairDiff } else { B::LadderDiff };
            let mut m = Matrix::zeros(2 * n_max);
            kron_add(&mut m, T::one(), &spin_matrix(S::Diag(model.alpha, model.beta))?, &number_plus_half(n_max)?);
            kron_add(&mut m, half, &spin_matrix(S::SyReal)?, &boson_matrix(coupling, n_max)?);
            m
        }
        ModelFamily::KAlphaBeta => {
            let mut m = Matrix::zeros(2 * n_max);
            kron_add(&mut m, T::one(), &id2, &number_plus_half(n_max)?);
            let c = half / (model.alpha * model.beta).sqrt();
            kron_add(&mut m, c, &spin_matrix(S::SyReal)?, &boson_matrix(B::PairDiff, n_max)?);
            m
        }
        ModelFamily::Rak => {
            // -Δσ_x⊗1 + (1-2gσ_z)⊗b†b + gσ_z⊗(2x²-1) + ½, in the b-ladder
            // basis of L²(R, dμ) where b†b and x have the same matrix elements
            // as a†a and q in the Fock basis. 2x²-1 = b²+b†²+2b†b.
            let num = boson_matrix::<T>(B::Number, n_max)?;
            let pair = boson_matrix::<T>(B::PairSum, n_max)?;
            let x2m1 = Matrix::from_fn(n_max, |i, j| {
                pair[(i, j)] + if i == j { T::two() * num[(i, i)] } else { T::zero() }
            });
            let mut m = Matrix::zeros(2 * n_max);
            kron_add(&mut m, -model.delta, &spin_matrix(S::Sx)?, &Matrix::identity(n_max));
            kron_add(&mut m, T::one(), &id2, &num);
            kron_add(&mut m, -T::two() * model.g, &spin_matrix(S::Sz)?, &num);
            kron_add(&mut m, model.g, &spin_matrix(S::Sz)?, &x2m1);
            kron_add(&mut m, half, &id2, &Matrix::identity(n_max));
            m
        }
        ModelFamily::QuadTs => {
            // (p+tq)² + sq² = p² + (t²+s)q² + t(pq+qp). The cross term is
            // imaginary in the Fock basis, but the matrix is tridiagonal
            // within each parity chain, so a diagonal phase gauge makes it
            // real with off-diagonal magnitude |(t²+s-1)/2 - it|·√((n+1)(n+2)).
            let (tc, sc) = (model.t_coef, model.s_coef);
            let diag_coef = T::one() + tc * tc + sc;
            let re = (tc * tc + sc - T::one()) * half;
            let kappa = (re * re + tc * tc).sqrt();
            let mut m = Matrix::zeros(n_max);
            for n in 0..n_max {
                m[(n, n)] = (T::of_usize(n) + half) * diag_coef;
            }
            for n in 0..n_max.saturating_sub(2) {
                let v = kappa * (T::of_usize(n + 1) * T::of_usize(n + 2)).sqrt();
                m[(n, n + 2)] = v;
                m[(n + 2, n)] = v;
            }
            m
        }
    };
    Ok(TruncatedOperator {
        matrix,
        n_max,
        model: *model,
        truncation_artifact: !model.bounded_below(),
    })
}

fn number_plus_half<T: Scalar>(n_max: usize) -> Result<Matrix<T>> {
    let num = boson_matrix::<T>(B::Number, n_max)?;
    Ok(Matrix::from_fn(n_max, |i, j| {
        num[(i, j)] + if i == j { T::half() } else { T::zero() }
    }))
}

/// μ-space form of the one-photon model (the analogue of `Rak`):
/// -Δσ_x⊗1 + 1⊗b†b + g√2 σ_z⊗x + ½. Used by the Feynman-Kac oracle tests.
pub(crate) fn assemble_rakk<T: Scalar>(delta: T, g: T, n_max: usize) -> Result<Matrix<T>> {
    let id2 = spin_matrix(S::Identity)?;
    let num = boson_matrix(B::Number, n_max)?;
    // √2 x has the matrix of a+a† = LadderSum
    let sqrt2x = boson_matrix(B::LadderSum, n_max)?;
    let mut m = Matrix::zeros(2 * n_max);
    kron_add(&mut m, -delta, &spin_matrix(S::Sx)?, &Matrix::identity(n_max));
    kron_add(&mut m, T::one(), &id2, &num);
    kron_add(&mut m, g, &spin_matrix(S::Sz)?, &sqrt2x);
    kron_add(&mut m, T::half(), &id2, &Matrix::identity(n_max));
    Ok(m)
}

/// All eigenvalues of the truncated operator, sorted ascending.
pub fn eigen<T: Scalar>(op: &TruncatedOperator<T>) -> Result<Spectrum<T>> {
    let e = symmetric_eigen(&op.matrix, false)?;
    Ok(Spectrum::from_values(e.values, op.n_max))
}

/// Eigenvalues plus orthonormal eigenvectors (columns).
pub fn eigen_full<T: Scalar>(op: &TruncatedOperator<T>) -> Result<(Spectrum<T>, Matrix<T>)> {
    let e = symmetric_eigen(&op.matrix, true)?;
    let vectors = e.vectors.expect("vectors requested");
    Ok((Spectrum::from_values(e.values, op.n_max), vectors))
}

/// Escalate the truncation (doubling from max(64, 8k)) until the first `k`
/// eigenvalues move by less than `tol` between successive levels.
pub fn converged_spectrum<T: Scalar>(model: &ModelSpec<T>, k: usize, tol: T) -> Result<Spectrum<T>> {
    model.validate()?;
    if k < 1 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tol must be > 0".into()));
    }
    if !model.bounded_below() {
        return Err(Error::OutOfRegime(model.refusal_reason()));
    }
    let mut n = 64usize.max(8 * k);
    let mut prev = eigen(&assemble(model, n)?)?;
    loop {
        let next_n = 2 * n;
        if next_n > N_MAX_CAP {
            return Err(Error::ConvergenceCap(format!(
                "first {k} eigenvalues of {} not stable to {tol} at n_max = {n} \
                 (cap {N_MAX_CAP}); lowest computed values: {:?}",
                model.family.name(),
                &prev.values[..k.min(prev.values.len()).min(4)]
            )));
        }
        let next = eigen(&assemble(model, next_n)?)?;
        let shift = worst_shift(&prev.values, &next.values, k);
        if shift < tol {
            let mut spec = next;
            spec.converged_count = k;
            spec.convergence_tol = Some(tol);
            return Ok(spec);
        }
        n = next_n;
        prev = next;
    }
}

fn worst_shift<T: Scalar>(a: &[T], b: &[T], k: usize) -> T {
    let k = k.min(a.len()).min(b.len());
    (0..k).fold(T::zero(), |w, i| w.max((a[i] - b[i]).abs()))
}

/// One closed-form inequality check on one eigenvalue index.
#[derive(Debug, Clone)]
pub struct BoundCheck<T> {
    pub index: usize,
    pub value: T,
    pub lower: Option<T>,
    pub upper: Option<T>,
    /// min over the stated inequalities of (slack); negative means violated.
    pub margin: T,
    pub ok: bool,
}

/// Report for `verify_bounds`.
#[derive(Debug, Clone)]
pub struct BoundsReport<T> {
    pub checks: Vec<BoundCheck<T>>,
    pub all_ok: bool,
}

/// Check the closed-form spectral bounds of the model family on the converged
/// part of `spec` ((n+½)·min{α,β}√(1-1/(αβ)) ≤ λ_{2n} ≤ λ_{2n+1} ≤
/// (n+½)·max{α,β}√(1-1/(αβ)) for the oscillator family; λ₀ ≥ ½√(1-4g²)-Δ for
/// the two-photon model).
pub fn verify_bounds<T: Scalar>(spec: &Spectrum<T>, model: &ModelSpec<T>) -> Result<BoundsReport<T>> {
    if !model.bounded_below() {
        return Err(Error::OutOfRegime(model.refusal_reason()));
    }
    let upto = if spec.converged_count > 0 {
        spec.converged_count.min(spec.values.len())
    } else {
        spec.values.len()
    };
    let mut checks = Vec::new();
    match model.family {
        ModelFamily::Ncho => {
            let root = (T::one() - T::one() / (model.alpha * model.beta)).sqrt();
            let lo_c = model.alpha.min(model.beta) * root;
            let hi_c = model.alpha.max(model.beta) * root;
            for i in 0..upto {
                let n = i / 2;
                let level = T::of_usize(n) + T::half();
                let lower = level * lo_c;
                let upper = level * hi_c;
                let v = spec.values[i];
                let margin = (v - lower).min(upper - v);
                checks.push(BoundCheck {
                    index: i,
                    value: v,
                    lower: Some(lower),
                    upper: Some(upper),
                    margin,
                    ok: margin >= -T::of(1e-9),
                });
            }
        }
        ModelFamily::Rabi2p => {
            let lower = T::half() * (T::one() - T::of(4.0) * model.g * model.g).sqrt() - model.delta;
            if upto > 0 {
                let v = spec.values[0];
                let margin = v - lower;
                checks.push(BoundCheck {
                    index: 0,
                    value: v,
                    lower: Some(lower),
                    upper: None,
                    margin,
                    ok: margin >= -T::of(1e-9),
                });
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no closed-form bounds implemented for family {}",
                model.family.name()
            )))
        }
    }
    let all_ok = checks.iter().all(|c| c.ok);
    Ok(BoundsReport { checks, all_ok })
}

/// Report of spectral-symmetry deviations.
#[derive(Debug, Clone)]
pub struct SymmetryReport<T> {
    /// (transform label, max |λ_n(model) - λ_n(model')| over the first k)
    pub checks: Vec<(String, T)>,
}

/// Compare the first `k` eigenvalues of the model against its symmetry
/// partners (g→-g and Δ→-Δ for the Rabi families, α↔β for the oscillator
/// families, t→-t for the quadratic form), at fixed truncation `n_max`.
pub fn symmetry_checks<T: Scalar>(
    model: &ModelSpec<T>,
    n_max: usize,
    k: usize,
) -> Result<SymmetryReport<T>> {
    let base = eigen(&assemble(model, n_max)?)?;
    let mut partners: Vec<(String, ModelSpec<T>)> = Vec::new();
    match model.family {
        ModelFamily::Rabi2p | ModelFamily::Rabi1p | ModelFamily::Rak => {
            partners.push(("g -> -g".into(), ModelSpec { g: -model.g, ..*model }));
            partners.push(("delta -> -delta".into(), ModelSpec { delta: -model.delta, ..*model }));
        }
        ModelFamily::Ncho | ModelFamily::Ncho1p | ModelFamily::KAlphaBeta => {
            partners.push((
                "alpha <-> beta".into(),
                ModelSpec { alpha: model.beta, beta: model.alpha, ..*model },
            ));
        }
        ModelFamily::QuadTs => {
            partners.push(("t -> -t".into(), ModelSpec { t_coef: -model.t_coef, ..*model }));
        }
    }
    let mut checks = Vec::new();
    for (label, partner) in partners {
        let other = eigen(&assemble(&partner, n_max)?)?;
        checks.push((label, worst_shift(&base.values, &other.values, k)));
    }
    Ok(SymmetryReport { checks })
}

/// Squared overlaps of the two-photon ground space with the four Z4 sectors.
#[derive(Debug, Clone)]
pub struct GroundSectorReport<T> {
    pub degeneracy: usize,
    /// Overlap per sector in the order of `SectorLabel::ALL`, normalized so
    /// the entries sum to 1.
    pub overlaps: [T; 4],
    /// The sector holding (almost) all of the weight, when unique.
    pub dominant: Option<SectorLabel>,
}

/// Ground-state sector analysis for the two-photon model.
pub fn ground_sector<T: Scalar>(model: &ModelSpec<T>, n_max: usize) -> Result<GroundSectorReport<T>> {
    if model.family != ModelFamily::Rabi2p {
        return Err(Error::Unsupported(
            "ground_sector applies to the two-photon model".into(),
        ));
    }
    if !(model.g.abs() < T::half()) {
        return Err(Error::OutOfRegime(model.refusal_reason()));
    }
    let op = assemble(model, n_max)?;
    let (spec, vectors) = eigen_full(&op)?;
    let (g0, g1) = spec.group_of(0);
    let degeneracy = g1 - g0;
    let mut overlaps = [T::zero(); 4];
    for j in g0..g1 {
        let col = vectors.col(j);
        for (flat, &c) in col.iter().enumerate() {
            let sector = sector_of(BasisIndex::from_flat(flat));
            let slot = SectorLabel::ALL.iter().position(|&s| s == sector).unwrap();
            overlaps[slot] = overlaps[slot] + c * c;
        }
    }
    let total: T = overlaps.iter().copied().sum();
    for o in overlaps.iter_mut() {
        *o = *o / total;
    }
    let dominant = SectorLabel::ALL
        .iter()
        .copied()
        .zip(overlaps.iter())
        .find(|&(_, &w)| w > T::one() - T::of(1e-9))
        .map(|(s, _)| s);
    Ok(GroundSectorReport { degeneracy, overlaps, dominant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_levels() {
        // Δ=0, g=0: levels (n+½) each twice
        let spec = eigen(&assemble(&ModelSpec::rabi2p(0.0f64, 0.0), 16).unwrap()).unwrap();
        let expect = [0.5, 0.5, 1.5, 1.5, 2.5, 2.5];
        for (v, e) in spec.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn detuned_uncoupled_levels() {
        // Δ=0.7, g=0: n+½ ± 0.7
        let spec = eigen(&assemble(&ModelSpec::rabi2p(0.7f64, 0.0), 32).unwrap()).unwrap();
        let expect = [-0.2, 0.5 + 0.7, 1.5 - 0.7, 1.5 + 0.7];
        assert!((spec.values[0] - expect[0]).abs() < 1e-12);
        assert!((spec.values[1] - expect[2]).abs() < 1e-12);
        assert!((spec.values[2] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn quad_ts_closed_form() {
        // s>0: spectrum √s(2n+1), independent of t
        for tc in [0.0, 1.0, -1.0] {
            let spec = eigen(&assemble(&ModelSpec::quad_ts(tc, 4.0f64), 256).unwrap()).unwrap();
            for n in 0..6 {
                assert!(
                    (spec.values[n] - 2.0 * (2.0 * n as f64 + 1.0)).abs() < 1e-9,
                    "t={tc} n={n}: {}",
                    spec.values[n]
                );
            }
        }
    }

    #[test]
    fn lemma_re_scaled_levels() {
        // Δ=0, g=0.3: √(1-4g²)(n+½) = 0.8(n+½) doubly degenerate
        let spec = converged_spectrum(&ModelSpec::rabi2p(0.0f64, 0.3), 8, 1e-10).unwrap();
        let expect = [0.4, 0.4, 1.2, 1.2, 2.0, 2.0, 2.8, 2.8];
        for (v, e) in spec.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-8, "{v} vs {e}");
        }
        assert_eq!(spec.converged_count, 8);
        assert_eq!(spec.multiplicity_at(0), 2);
    }

    #[test]
    fn ncho_equal_parameters() {
        // α=β=2: √3(n+½) doubly degenerate
        let spec = converged_spectrum(&ModelSpec::ncho(2.0, 2.0), 4, 1e-8).unwrap();
        let r3 = 3f64.sqrt();
        let expect = [0.5 * r3, 0.5 * r3, 1.5 * r3, 1.5 * r3];
        for (v, e) in spec.values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-8);
        }
    }

    #[test]
    fn k_operator_closed_form() {
        let spec = converged_spectrum(&ModelSpec::k_alpha_beta(2.0, 1.0), 2, 1e-8).unwrap();
        let c = (1.0f64 - 0.5).sqrt();
        assert!((spec.values[0] - 0.5 * c).abs() < 1e-8);
        assert!((spec.values[1] - 0.5 * c).abs() < 1e-8);
    }

    #[test]
    fn rak_matches_rabi2p() {
        // eq-uni: the μ-space form is a unitary conjugate of the 2p model
        let a = eigen(&assemble(&ModelSpec::rak(0.5f64, 0.2), 200).unwrap()).unwrap();
        let b = eigen(&assemble(&ModelSpec::rabi2p(0.5, 0.2), 200).unwrap()).unwrap();
        for i in 0..8 {
            assert!((a.values[i] - b.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn refuses_unbounded() {
        let err = converged_spectrum(&ModelSpec::rabi2p(0.0, 0.6), 4, 1e-8).unwrap_err();
        assert!(err.is_refusal(), "{err}");
        // critical coupling refused too
        assert!(converged_spectrum(&ModelSpec::rabi2p(0.0, 0.5), 4, 1e-8)
            .unwrap_err()
            .is_refusal());
        // but assembly is allowed, flagged as artifact
        let op = assemble(&ModelSpec::rabi2p(0.0, 0.6), 16).unwrap();
        assert!(op.truncation_artifact);
        assert!(eigen(&op).is_ok());
    }

    #[test]
    fn sector_block_diagonality_exact() {
        let op = assemble(&ModelSpec::rabi2p(0.5, 0.3), 24).unwrap();
        for i in 0..op.matrix.dim() {
            for j in 0..op.matrix.dim() {
                let si = sector_of(BasisIndex::from_flat(i));
                let sj = sector_of(BasisIndex::from_flat(j));
                if si != sj {
                    assert_eq!(op.matrix[(i, j)], 0.0, "sector leak at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn bounds_ncho() {
        let m = ModelSpec::ncho(3.0, 2.0);
        let spec = converged_spectrum(&m, 10, 1e-8).unwrap();
        let report = verify_bounds(&spec, &m).unwrap();
        assert!(report.all_ok);
        // λ0 ≥ 0.5·2·√(1-1/6)
        let lower = report.checks[0].lower.unwrap();
        assert!((lower - 1.0 * (1.0f64 - 1.0 / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bounds_rabi2p_ground() {
        let m = ModelSpec::rabi2p(0.1f64, 0.3);
        let spec = converged_spectrum(&m, 2, 1e-8).unwrap();
        let report = verify_bounds(&spec, &m).unwrap();
        assert!(report.all_ok);
        assert!((report.checks[0].lower.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn bounds_unsupported_family() {
        let m = ModelSpec::quad_ts(0.0, 1.0);
        let spec = eigen(&assemble(&m, 16).unwrap()).unwrap();
        assert!(matches!(verify_bounds(&spec, &m), Err(Error::Unsupported(_))));
    }

    #[test]
    fn symmetries() {
        let r = symmetry_checks(&ModelSpec::ncho(3.0, 2.0), 256, 10).unwrap();
        assert!(r.checks[0].1 < 1e-9, "alpha<->beta dev {}", r.checks[0].1);
        let r = symmetry_checks(&ModelSpec::rabi2p(0.5, 0.2), 256, 10).unwrap();
        for (label, dev) in &r.checks {
            assert!(*dev < 1e-9, "{label}: {dev}");
        }
        // identity check: Δ=0 against itself
        let r = symmetry_checks(&ModelSpec::rabi2p(0.0, 0.2), 64, 10).unwrap();
        let delta_flip = r.checks.iter().find(|(l, _)| l.contains("delta")).unwrap();
        assert_eq!(delta_flip.1, 0.0);
    }

    #[test]
    fn ground_sector_minus_one() {
        for g in [0.0f64, 0.3] {
            let rep = ground_sector(&ModelSpec::rabi2p(0.5, g), 128).unwrap();
            assert_eq!(rep.degeneracy, 1);
            assert_eq!(rep.dominant, Some(SectorLabel::MinusOne));
            assert!(rep.overlaps[1] > 1.0 - 1e-12);
        }
    }

    #[test]
    fn ground_sector_degenerate_at_zero_detuning() {
        let rep = ground_sector(&ModelSpec::rabi2p(0.0f64, 0.3), 128).unwrap();
        assert_eq!(rep.degeneracy, 2);
        assert_eq!(rep.dominant, None);
        // the two-dimensional ground space splits between the ±1 sectors
        assert!((rep.overlaps[0] - 0.5).abs() < 1e-9);
        assert!((rep.overlaps[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rayleigh_ritz_monotone() {
        let m = ModelSpec::ncho(3.0, 2.0);
        let a = eigen(&assemble(&m, 64).unwrap()).unwrap();
        let b = eigen(&assemble(&m, 128).unwrap()).unwrap();
        for i in 0..32 {
            assert!(b.values[i] <= a.values[i] + 1e-12);
        }
    }
}
