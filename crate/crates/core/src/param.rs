//! Complex parameters, their real and conjugate-extended forms, and
//! finite-difference Wirtinger derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Ket, C64, I};

/// Complex parameter vector `θ ∈ ℂ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    theta: Vec<C64>,
}

impl ParamPoint {
    pub fn new(theta: Vec<C64>) -> Result<Self> {
        if let Some(i) = theta.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self { theta })
    }

    pub fn scalar(z: C64) -> Result<Self> {
        Self::new(vec![z])
    }

    pub fn theta(&self) -> &[C64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Copy with `θ_j` shifted by `delta`.
    pub fn shifted(&self, j: usize, delta: C64) -> Self {
        let mut theta = self.theta.clone();
        theta[j] += delta;
        Self { theta }
    }

    pub fn to_real_rep(&self) -> RealRep {
        let mut bar: Vec<f64> = self.theta.iter().map(|z| z.re).collect();
        bar.extend(self.theta.iter().map(|z| z.im));
        RealRep { bar }
    }

    pub fn to_conj_ext(&self) -> ConjExt {
        let mut hat = self.theta.clone();
        hat.extend(self.theta.iter().map(|z| z.conj()));
        ConjExt { hat }
    }
}

/// `θ̄ = [Re θ; Im θ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealRep {
    bar: Vec<f64>,
}

impl RealRep {
    pub fn new(bar: Vec<f64>) -> Result<Self> {
        if !bar.len().is_multiple_of(2) {
            return Err(Error::OddDimension { rows: bar.len(), cols: 1 });
        }
        if let Some(i) = bar.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        Ok(Self { bar })
    }

    pub fn bar(&self) -> &[f64] {
        &self.bar
    }

    pub fn to_param(&self) -> ParamPoint {
        let k = self.bar.len() / 2;
        ParamPoint {
            theta: (0..k).map(|j| C64::new(self.bar[j], self.bar[k + j])).collect(),
        }
    }
}

/// `θ̂ = [θ; θ*]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjExt {
    hat: Vec<C64>,
}

const CONJ_TOL: f64 = 1e-12;

impl ConjExt {
    /// Checks that the lower half is the conjugate of the upper half.
    pub fn new(hat: Vec<C64>) -> Result<Self> {
        if !hat.len().is_multiple_of(2) {
            return Err(Error::OddDimension { rows: hat.len(), cols: 1 });
        }
        let k = hat.len() / 2;
        let residue = (0..k).map(|j| (hat[k + j] - hat[j].conj()).norm()).fold(0.0, f64::max);
        if !(residue <= CONJ_TOL * (1.0 + hat.iter().map(|z| z.norm()).fold(0.0, f64::max))) {
            return Err(Error::InconsistentConjugate { residue });
        }
        Ok(Self { hat })
    }

    pub fn hat(&self) -> &[C64] {
        &self.hat
    }

    pub fn to_param(&self) -> ParamPoint {
        ParamPoint {
            theta: self.hat[..self.hat.len() / 2].to_vec(),
        }
    }
}

/// `θ̄ = M_{2k} θ̂`; the imaginary residue of the product must vanish.
pub fn real_from_conj(c: &ConjExt) -> Result<RealRep> {
    let k = c.hat.len() / 2;
    let mut bar = Vec::with_capacity(2 * k);
    let mut residue: f64 = 0.0;
    for j in 0..k {
        let a = (c.hat[j] + c.hat[k + j]) * 0.5;
        residue = residue.max(a.im.abs());
        bar.push(a.re);
    }
    for j in 0..k {
        let b = (c.hat[k + j] - c.hat[j]) * I * 0.5;
        residue = residue.max(b.im.abs());
        bar.push(b.re);
    }
    if residue > CONJ_TOL * (1.0 + bar.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
        return Err(Error::InconsistentConjugate { residue });
    }
    Ok(RealRep { bar })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepScaling {
    /// `h = step · max(1, |θ_j|)`.
    Relative,
    /// `h = step`.
    Absolute,
}

/// Central-difference step policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdPolicy {
    pub step: f64,
    pub scaling: StepScaling,
}

impl Default for FdPolicy {
    fn default() -> Self {
        Self {
            step: f64::EPSILON.cbrt(),
            scaling: StepScaling::Relative,
        }
    }
}

impl FdPolicy {
    pub fn absolute(step: f64) -> Self {
        Self {
            step,
            scaling: StepScaling::Absolute,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {}", self.step)))
        }
    }

    pub fn step_at(&self, z: C64) -> f64 {
        match self.scaling {
            StepScaling::Relative => self.step * z.norm().max(1.0),
            StepScaling::Absolute => self.step,
        }
    }
}

/// Values that can be differentiated by finite differences.
pub trait FdValue: Sized {
    /// `a·x + b·y`; shapes are assumed to match.
    fn lin2(a: C64, x: &Self, b: C64, y: &Self) -> Self;
}

impl FdValue for C64 {
    fn lin2(a: C64, x: &Self, b: C64, y: &Self) -> Self {
        a * x + b * y
    }
}

impl FdValue for CMatrix {
    fn lin2(a: C64, x: &Self, b: C64, y: &Self) -> Self {
        x.scale(a) + y.scale(b)
    }
}

impl FdValue for Ket {
    fn lin2(a: C64, x: &Self, b: C64, y: &Self) -> Self {
        x.scale(a).axpy(b, y)
    }
}

impl FdValue for Vec<C64> {
    fn lin2(a: C64, x: &Self, b: C64, y: &Self) -> Self {
        x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
    }
}

fn check_index(p: &ParamPoint, j: usize) -> Result<()> {
    if j < p.len() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("parameter index {j} out of range for k = {}", p.len())))
    }
}

/// `(∂_{θ_j} f, ∂_{θ*_j} f)` by central differences in `Re θ_j` and `Im θ_j`.
pub fn wirtinger_derivs<T, F>(f: F, p: &ParamPoint, j: usize, policy: &FdPolicy) -> Result<(T, T)>
where
    T: FdValue,
    F: Fn(&ParamPoint) -> Result<T>,
{
    check_index(p, j)?;
    policy.validate()?;
    let h = policy.step_at(p.theta[j]);
    let xp = f(&p.shifted(j, C64::new(h, 0.0)))?;
    let xm = f(&p.shifted(j, C64::new(-h, 0.0)))?;
    let yp = f(&p.shifted(j, C64::new(0.0, h)))?;
    let ym = f(&p.shifted(j, C64::new(0.0, -h)))?;
    let inv = C64::from(0.5 / h);
    let dx = T::lin2(inv, &xp, -inv, &xm);
    let dy = T::lin2(inv, &yp, -inv, &ym);
    let half = C64::from(0.5);
    let dz = T::lin2(half, &dx, -half * I, &dy);
    let dzc = T::lin2(half, &dx, half * I, &dy);
    Ok((dz, dzc))
}

/// Conjugate-extended Jacobian `[[D_θF, D_{θ*}F], [(D_{θ*}F)*, (D_θF)*]]` (2m×2k).
pub fn wirtinger_jacobian<F>(f: F, p: &ParamPoint, policy: &FdPolicy) -> Result<CMatrix>
where
    F: Fn(&ParamPoint) -> Result<Vec<C64>>,
{
    let k = p.len();
    let mut cols = Vec::with_capacity(k);
    let mut m = None;
    for j in 0..k {
        let (dz, dzc) = wirtinger_derivs(&f, p, j, policy)?;
        match m {
            None => m = Some(dz.len()),
            Some(m) if m != dz.len() => {
                return Err(Error::EvaluationFailure("output length changed between evaluations".into()))
            }
            _ => {}
        }
        cols.push((dz, dzc));
    }
    let m = m.unwrap_or(0);
    let mut out = CMatrix::zeros(2 * m, 2 * k);
    for (j, (dz, dzc)) in cols.iter().enumerate() {
        for i in 0..m {
            out.set(i, j, dz[i]);
            out.set(i, k + j, dzc[i]);
            out.set(m + i, j, dzc[i].conj());
            out.set(m + i, k + j, dz[i].conj());
        }
    }
    Ok(out)
}

/// Real Jacobian `∂ḡ_i/∂θ̄_j` of a map `ℂ^k → ℂ^m` seen as `ℝ^{2k} → ℝ^{2m}`.
pub fn real_jacobian<F>(f: F, p: &ParamPoint, policy: &FdPolicy) -> Result<CMatrix>
where
    F: Fn(&ParamPoint) -> Result<Vec<C64>>,
{
    let k = p.len();
    policy.validate()?;
    let mut out: Option<CMatrix> = None;
    for j in 0..2 * k {
        let idx = j % k;
        let h = policy.step_at(p.theta[idx]);
        let dir = if j < k { C64::new(h, 0.0) } else { C64::new(0.0, h) };
        let plus = f(&p.shifted(idx, dir))?;
        let minus = f(&p.shifted(idx, -dir))?;
        let m = plus.len();
        let jac = out.get_or_insert_with(|| CMatrix::zeros(2 * m, 2 * k));
        if jac.rows() != 2 * m || minus.len() != m {
            return Err(Error::EvaluationFailure("output length changed between evaluations".into()));
        }
        for i in 0..m {
            let d = (plus[i] - minus[i]) / (2.0 * h);
            jac.set(i, j, C64::from(d.re));
            jac.set(m + i, j, C64::from(d.im));
        }
    }
    Ok(out.unwrap_or_else(|| CMatrix::zeros(0, 0)))
}

/// Identity map as a Wirtinger Jacobian: `I_{2k}`.
pub fn identity_jacobian(k: usize) -> CMatrix {
    CMatrix::identity(2 * k)
}
