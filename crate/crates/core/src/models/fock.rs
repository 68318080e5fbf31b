use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub const DEFAULT_TRUNCATION: usize = 40;

/// Fock levels `0..truncation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockConfig {
    truncation: usize,
}

impl FockConfig {
    pub fn new(truncation: usize) -> Result<Self> {
        if truncation < 2 {
            return Err(Error::InvalidArgument(format!("truncation must be at least 2, got {truncation}")));
        }
        Ok(Self { truncation })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            truncation: DEFAULT_TRUNCATION,
        }
    }
}

/// `(a, a†)` in the truncated number basis.
pub fn ladder_ops(cfg: FockConfig) -> (CMatrix, CMatrix) {
    let n = cfg.truncation;
    let a = CMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            C64::from((c as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    });
    let ad = a.adjoint();
    (a, ad)
}

/// The mean photon number is too large for the truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub alpha: C64,
    pub truncation: usize,
}

impl fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.alpha.norm_sqr();
        write!(
            f,
            "|alpha|^2 + 5|alpha| = {:.3} exceeds truncation {}",
            n + 5.0 * n.sqrt(),
            self.truncation
        )
    }
}

#[derive(Debug, Clone)]
pub struct Displaced {
    pub operator: CMatrix,
    pub warning: Option<TruncationWarning>,
}

pub(crate) fn truncation_warning(alpha: C64, cfg: FockConfig) -> Option<TruncationWarning> {
    let n = alpha.norm_sqr();
    (n + 5.0 * n.sqrt() > cfg.truncation as f64).then_some(TruncationWarning {
        alpha,
        truncation: cfg.truncation,
    })
}

/// `D(α) = exp(α a† − α* a)` on the truncated space.
pub fn displacement(alpha: C64, cfg: FockConfig) -> Result<Displaced> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let (a, ad) = ladder_ops(cfg);
    let generator = ad.scale(alpha) - a.scale(alpha.conj());
    let operator = CMatrix::from_dmatrix(generator.into_inner().exp())?;
    Ok(Displaced {
        operator,
        warning: truncation_warning(alpha, cfg),
    })
}
