//! Homodyne Monte Carlo on coherent-state encodings.
//!
//! Mode `m` yields `q_m ~ Normal(Re(α_m e^{−iφ_m}), v)` with `α_m = ε_m z + η_m z*`,
//! so `E q_m = c_m z + c_m* z*` with `c_m = ½(ε_m e^{−iφ_m} + η_m* e^{iφ_m})`.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::models::CoherentKey;

/// Vacuum quadrature variance for `Q = (a + a†)/2`.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Shot count below which score-based estimates carry a warning.
pub const MIN_RECOMMENDED_SHOTS: usize = 1000;

fn default_variance() -> f64 {
    VACUUM_VARIANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomodyneSpec {
    /// Quadrature phase per mode; `0` measures `(a + a†)/2`, `π/2` its conjugate.
    pub phases: Vec<f64>,
    pub shots: usize,
    pub seed: u64,
    #[serde(default = "default_variance")]
    pub variance: f64,
}

impl HomodyneSpec {
    pub fn new(phases: Vec<f64>, shots: usize, seed: u64) -> Self {
        Self {
            phases,
            shots,
            seed,
            variance: VACUUM_VARIANCE,
        }
    }

    /// Phases `(0, π/2)`, paired with the key `(1, 0, 0, 1)`.
    pub fn two_mode_optimal(shots: usize, seed: u64) -> Self {
        Self::new(vec![0.0, FRAC_PI_2], shots, seed)
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = variance;
        self
    }

    fn validate(&self, key: &CoherentKey) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid quadrature variance {}", self.variance)));
        }
        if self.phases.len() != key.num_modes() {
            return Err(Error::SizeMismatch {
                expected: format!("{} phases", key.num_modes()),
                found: format!("{}", self.phases.len()),
            });
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(())
    }
}

/// `c_m` for each mode.
pub fn quadrature_coefficients(key: &CoherentKey, phases: &[f64]) -> Vec<C64> {
    key.modes()
        .iter()
        .zip(phases)
        .map(|(&(e, n), &phi)| {
            let rot = C64::from_polar(1.0, -phi);
            (e * rot + n.conj() * rot.conj()) * 0.5
        })
        .collect()
}

/// `Re(α_m e^{−iφ_m})` for each mode.
pub fn quadrature_means(key: &CoherentKey, phases: &[f64], z: C64) -> Vec<f64> {
    quadrature_coefficients(key, phases).iter().map(|c| 2.0 * (c * z).re).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    /// Row-major `shots × modes`.
    outcomes: Vec<f64>,
    modes: usize,
    pub spec: HomodyneSpec,
    pub true_param: C64,
}

impl SampleSet {
    pub fn shots(&self) -> usize {
        self.spec.shots
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn outcome(&self, shot: usize, mode: usize) -> f64 {
        self.outcomes[shot * self.modes + mode]
    }

    pub fn shot(&self, shot: usize) -> &[f64] {
        &self.outcomes[shot * self.modes..(shot + 1) * self.modes]
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.shots() < MIN_RECOMMENDED_SHOTS {
            vec![format!(
                "only {} shots; estimates below {MIN_RECOMMENDED_SHOTS} shots are unreliable",
                self.shots()
            )]
        } else {
            Vec::new()
        }
    }

    /// CSV with header `shot,mode,outcome`, LF line endings, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"shot,mode,outcome\n")?;
        for s in 0..self.shots() {
            for m in 0..self.modes {
                writeln!(out, "{s},{m},{:.16e}", self.outcome(s, m))?;
            }
        }
        out.flush()
    }
}

/// Shot `s` draws its modes in order from a ChaCha8 stream `s` under `seed`,
/// so the result does not depend on thread scheduling.
pub fn sample_homodyne(key: &CoherentKey, z: C64, spec: &HomodyneSpec) -> Result<SampleSet> {
    spec.validate(key)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let means = quadrature_means(key, &spec.phases, z);
    let sd = spec.variance.sqrt();
    let outcomes: Vec<f64> = (0..spec.shots)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(s as u64);
            means
                .iter()
                .map(|mu| mu + sd * rng.sample::<f64, _>(StandardNormal))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleSet {
        outcomes,
        modes: key.num_modes(),
        spec: spec.clone(),
        true_param: z,
    })
}

#[derive(Debug, Clone)]
pub struct TwoModeEstimate {
    pub estimates: Vec<C64>,
    pub mean: C64,
    /// Sample covariance of `(ẑ, ẑ*)`.
    pub covariance: CMatrix,
}

impl TwoModeEstimate {
    /// Five standard errors of the sample covariance entries.
    pub fn covariance_tolerance(&self) -> f64 {
        let n = self.estimates.len() as f64;
        5.0 * self.covariance.max_abs() * (2.0 / n).sqrt()
    }
}

/// Linear inversion `ẑ = (c₂* q₁ − c₁* q₂) / (c₁c₂* − c₁*c₂)`.
pub fn estimate_two_mode(s: &SampleSet, key: &CoherentKey) -> Result<TwoModeEstimate> {
    if key.num_modes() != 2 || s.modes() != 2 {
        return Err(Error::InvalidArgument("linear inversion needs exactly two modes".into()));
    }
    let c = quadrature_coefficients(key, &s.spec.phases);
    let det = c[0] * c[1].conj() - c[0].conj() * c[1];
    if det.norm() <= 1e-12 * (c[0].norm() * c[1].norm()).max(f64::MIN_POSITIVE) {
        return Err(Error::NonInvertibleEncoding { determinant: det.norm() });
    }
    let estimates: Vec<C64> = (0..s.shots())
        .map(|i| {
            let q = s.shot(i);
            (c[1].conj() * q[0] - c[0].conj() * q[1]) / det
        })
        .collect();
    let n = estimates.len() as f64;
    // shifted by the first estimate so identical draws give an exactly zero covariance
    let origin = estimates[0];
    let shift = estimates.iter().map(|e| e - origin).sum::<C64>() / n;
    let mean = origin + shift;
    let denom = (n - 1.0).max(1.0);
    let (mut abs2, mut sq) = (0.0, C64::new(0.0, 0.0));
    for e in &estimates {
        let d = (e - origin) - shift;
        abs2 += d.norm_sqr();
        sq += d * d;
    }
    let (abs2, sq) = (abs2 / denom, sq / denom);
    let covariance = CMatrix::from_rows(&[vec![C64::from(abs2), sq], vec![sq.conj(), C64::from(abs2)]])?;
    Ok(TwoModeEstimate {
        estimates,
        mean,
        covariance,
    })
}

/// Classical FIM `I = E[|∂_{z*} ln f|²]` and pseudo-FIM `P = E[(∂_{z*} ln f)²]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalFimBlocks {
    pub i: CMatrix,
    pub p: CMatrix,
}

impl ClassicalFimBlocks {
    /// `[[I, P], [P*, I*]]`.
    pub fn full(&self) -> CMatrix {
        CMatrix::from_blocks(&self.i, &self.p, &self.p.conj(), &self.i.conj()).expect("square blocks")
    }
}

/// Score `∂_{z*} ln f = Σ_m (q_m − μ_m) c_m* / v`; the likelihood is independent of `z` otherwise.
pub fn gaussian_classical_fim(key: &CoherentKey, spec: &HomodyneSpec, _z: C64) -> Result<ClassicalFimBlocks> {
    spec.validate(key)?;
    if spec.variance <= 0.0 {
        return Err(Error::InvalidArgument("classical FIM needs a positive variance".into()));
    }
    let c = quadrature_coefficients(key, &spec.phases);
    let v = spec.variance;
    let i: f64 = c.iter().map(|c| c.norm_sqr()).sum::<f64>() / v;
    let p: C64 = c.iter().map(|c| c.conj() * c.conj()).sum::<C64>() / v;
    Ok(ClassicalFimBlocks {
        i: CMatrix::from_real_diagonal(&[i]),
        p: CMatrix::from_diagonal(&[p]),
    })
}

#[derive(Debug, Clone)]
pub struct EmpiricalFim {
    pub blocks: ClassicalFimBlocks,
    pub warnings: Vec<String>,
}

/// Outer-product-of-scores estimate using the analytic Gaussian score at the true parameter.
pub fn empirical_fim(s: &SampleSet, key: &CoherentKey) -> Result<EmpiricalFim> {
    s.spec.validate(key)?;
    if s.spec.variance <= 0.0 {
        return Err(Error::InvalidArgument("score-based FIM needs a positive variance".into()));
    }
    let c = quadrature_coefficients(key, &s.spec.phases);
    let mu = quadrature_means(key, &s.spec.phases, s.true_param);
    let v = s.spec.variance;
    let (mut i, mut p) = (0.0, C64::new(0.0, 0.0));
    for shot in 0..s.shots() {
        let score: C64 = s
            .shot(shot)
            .iter()
            .zip(&mu)
            .zip(&c)
            .map(|((q, m), c)| c.conj() * ((q - m) / v))
            .sum();
        i += score.norm_sqr();
        p += score * score;
    }
    let n = s.shots() as f64;
    Ok(EmpiricalFim {
        blocks: ClassicalFimBlocks {
            i: CMatrix::from_real_diagonal(&[i / n]),
            p: CMatrix::from_diagonal(&[p / n]),
        },
        warnings: s.warnings(),
    })
}
