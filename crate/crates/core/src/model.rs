//! Model families and their parameter domains.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which Hamiltonian family a `ModelSpec` describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    /// Two-photon quantum Rabi model: Δσ_z⊗1 + 1⊗(a†a+½) + gσ_x⊗(a²+a†²)
    Rabi2p,
    /// One-photon quantum Rabi model: Δσ_z⊗1 + 1⊗(a†a+½) + gσ_x⊗(a+a†)
    Rabi1p,
    /// Non-commutative harmonic oscillator:
    /// diag(α,β)⊗(a†a+½) + ½[[0,-1],[1,0]]⊗(a²-a†²)
    Ncho,
    /// One-particle variant: diag(α,β)⊗(a†a+½) + ½[[0,-1],[1,0]]⊗(a-a†)
    Ncho1p,
    /// 1⊗(a†a+½) + (2√(αβ))⁻¹[[0,-1],[1,0]]⊗(a²-a†²)
    KAlphaBeta,
    /// μ-space form of the two-photon model:
    /// -Δσ_x⊗1 + (1-2gσ_z)⊗b†b + gσ_z⊗(2x²-1) + ½
    Rak,
    /// Quadratic form (p+tq)² + sq² on the boson space alone
    QuadTs,
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Rabi2p => "rabi2p",
            ModelFamily::Rabi1p => "rabi1p",
            ModelFamily::Ncho => "ncho",
            ModelFamily::Ncho1p => "ncho1p",
            ModelFamily::KAlphaBeta => "k_alpha_beta",
            ModelFamily::Rak => "rak",
            ModelFamily::QuadTs => "quad_ts",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rabi2p" => ModelFamily::Rabi2p,
            "rabi1p" => ModelFamily::Rabi1p,
            "ncho" => ModelFamily::Ncho,
            "ncho1p" => ModelFamily::Ncho1p,
            "k_alpha_beta" => ModelFamily::KAlphaBeta,
            "rak" => ModelFamily::Rak,
            "quad_ts" => ModelFamily::QuadTs,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown model family '{other}'"
                )))
            }
        })
    }
}

/// A Hamiltonian family together with its parameters. Unused fields are
/// ignored by each family (rabi/rak use delta and g, ncho-like families use
/// alpha and beta, quad_ts uses t_coef and s_coef).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec<T> {
    pub family: ModelFamily,
    pub delta: T,
    pub g: T,
    pub alpha: T,
    pub beta: T,
    pub t_coef: T,
    pub s_coef: T,
}

impl<T: Scalar> ModelSpec<T> {
    fn base(family: ModelFamily) -> Self {
        ModelSpec {
            family,
            delta: T::zero(),
            g: T::zero(),
            alpha: T::one(),
            beta: T::one(),
            t_coef: T::zero(),
            s_coef: T::zero(),
        }
    }

    pub fn rabi2p(delta: T, g: T) -> Self {
        ModelSpec { delta, g, ..Self::base(ModelFamily::Rabi2p) }
    }

    pub fn rabi1p(delta: T, g: T) -> Self {
        ModelSpec { delta, g, ..Self::base(ModelFamily::Rabi1p) }
    }

    pub fn ncho(alpha: T, beta: T) -> Self {
        ModelSpec { alpha, beta, ..Self::base(ModelFamily::Ncho) }
    }

    pub fn ncho1p(alpha: T, beta: T) -> Self {
        ModelSpec { alpha, beta, ..Self::base(ModelFamily::Ncho1p) }
    }

    pub fn k_alpha_beta(alpha: T, beta: T) -> Self {
        ModelSpec { alpha, beta, ..Self::base(ModelFamily::KAlphaBeta) }
    }

    pub fn rak(delta: T, g: T) -> Self {
        ModelSpec { delta, g, ..Self::base(ModelFamily::Rak) }
    }

    pub fn quad_ts(t_coef: T, s_coef: T) -> Self {
        ModelSpec { t_coef, s_coef, ..Self::base(ModelFamily::QuadTs) }
    }

    /// Parameter-domain validation; no silent clamping.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: T, name: &str| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be finite")))
            }
        };
        match self.family {
            ModelFamily::Rabi2p | ModelFamily::Rabi1p | ModelFamily::Rak => {
                finite(self.delta, "delta")?;
                finite(self.g, "g")?;
            }
            ModelFamily::Ncho | ModelFamily::Ncho1p | ModelFamily::KAlphaBeta => {
                finite(self.alpha, "alpha")?;
                finite(self.beta, "beta")?;
                if self.alpha <= T::zero() || self.beta <= T::zero() {
                    return Err(Error::InvalidArgument(
                        "alpha and beta must be positive".into(),
                    ));
                }
            }
            ModelFamily::QuadTs => {
                finite(self.t_coef, "t")?;
                finite(self.s_coef, "s")?;
            }
        }
        Ok(())
    }

    /// Whether the operator is bounded below with purely discrete spectrum, so
    /// that truncated eigenvalues converge. Critical couplings (|g| = 1/2,
    /// αβ = 1, s = 0) have continuous spectrum and count as not convergent.
    pub fn bounded_below(&self) -> bool {
        match self.family {
            ModelFamily::Rabi2p | ModelFamily::Rak => self.g.abs() < T::half(),
            ModelFamily::Rabi1p | ModelFamily::Ncho1p => true,
            ModelFamily::Ncho | ModelFamily::KAlphaBeta => self.alpha * self.beta > T::one(),
            ModelFamily::QuadTs => self.s_coef > T::zero(),
        }
    }

    /// Human-readable reason used in refusal errors for non-convergent regimes.
    pub fn refusal_reason(&self) -> String {
        match self.family {
            ModelFamily::Rabi2p | ModelFamily::Rak => format!(
                "|g| = {} >= 1/2: the two-photon Hamiltonian is not bounded below \
                 (continuous spectrum at |g| = 1/2, spectrum = R beyond); truncated \
                 eigenvalues do not converge",
                self.g.abs()
            ),
            ModelFamily::Ncho | ModelFamily::KAlphaBeta => format!(
                "alpha*beta = {} <= 1: the oscillator is not bounded below \
                 (continuous spectrum at alpha*beta = 1, spectrum = R below); \
                 truncated eigenvalues do not converge",
                self.alpha * self.beta
            ),
            ModelFamily::QuadTs => format!(
                "s = {} <= 0: (p+tq)^2 + s q^2 has continuous spectrum; truncated \
                 eigenvalues do not converge",
                self.s_coef
            ),
            ModelFamily::Rabi1p | ModelFamily::Ncho1p => {
                "model is always bounded below".into()
            }
        }
    }

    /// Matrix dimension at truncation level `n_max` (the two-component
    /// families double it).
    pub fn dim(&self, n_max: usize) -> usize {
        match self.family {
            ModelFamily::QuadTs => n_max,
            _ => 2 * n_max,
        }
    }
}
