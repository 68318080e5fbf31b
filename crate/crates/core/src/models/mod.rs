//! Parametrized state families.

mod coherent;
mod fock;
mod qubit;
mod random;

pub use coherent::{CoherentKey, CoherentModel};
pub use fock::{displacement, ladder_ops, Displaced, FockConfig, TruncationWarning, DEFAULT_TRUNCATION};
pub use qubit::{builtin_qubit_model, QubitModel, QubitSpec};
pub use random::{RandomDensityModel, RandomPureModel};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, CMatrix, Ket, C64};
use crate::param::{wirtinger_derivs, FdPolicy, ParamPoint};
use crate::policy::NumericPolicy;

/// `θ ↦ ρ(θ)`, a `d×d` density matrix.
pub trait DensityModel: Sync {
    fn dim(&self) -> usize;
    fn num_params(&self) -> usize;
    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix>;

    /// Exact `(∂_{θ_j}ρ, ∂_{θ*_j}ρ)` when the model knows them.
    fn analytic_derivs(&self, _p: &ParamPoint, _j: usize) -> Option<Result<(CMatrix, CMatrix)>> {
        None
    }
}

/// `θ ↦ |ψ(θ)⟩`, a unit vector of length `d`.
pub trait PureModel: Sync {
    fn dim(&self) -> usize;
    fn num_params(&self) -> usize;
    fn evaluate(&self, p: &ParamPoint) -> Result<Ket>;

    fn analytic_derivs(&self, _p: &ParamPoint, _j: usize) -> Option<Result<(Ket, Ket)>> {
        None
    }
}

fn check_params(k: usize, p: &ParamPoint) -> Result<()> {
    if p.len() == k {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            expected: format!("{k} parameters"),
            found: format!("{}", p.len()),
        })
    }
}

/// Wirtinger derivatives of ρ, analytic when available.
pub fn density_derivs<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    j: usize,
    fd: &FdPolicy,
) -> Result<(CMatrix, CMatrix)> {
    check_params(model.num_params(), p)?;
    match model.analytic_derivs(p, j) {
        Some(r) => r,
        None => wirtinger_derivs(|q: &ParamPoint| model.evaluate(q), p, j, fd),
    }
}

/// Wirtinger derivatives of |ψ⟩, analytic when available.
pub fn pure_derivs<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, j: usize, fd: &FdPolicy) -> Result<(Ket, Ket)> {
    check_params(model.num_params(), p)?;
    match model.analytic_derivs(p, j) {
        Some(r) => r,
        None => wirtinger_derivs(|q: &ParamPoint| model.evaluate(q), p, j, fd),
    }
}

/// All Wirtinger derivative pairs of ρ.
pub fn all_density_derivs<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    fd: &FdPolicy,
) -> Result<Vec<(CMatrix, CMatrix)>> {
    (0..model.num_params()).map(|j| density_derivs(model, p, j, fd)).collect()
}

pub fn all_pure_derivs<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, fd: &FdPolicy) -> Result<Vec<(Ket, Ket)>> {
    (0..model.num_params()).map(|j| pure_derivs(model, p, j, fd)).collect()
}

/// Real partials from a Wirtinger pair: `∂_α = ∂_θ + ∂_{θ*}`, `∂_β = i(∂_θ − ∂_{θ*})`.
pub fn real_partials(d: &(CMatrix, CMatrix)) -> (CMatrix, CMatrix) {
    let alpha = &d.0 + &d.1;
    let beta = (&d.0 - &d.1).scale(C64::new(0.0, 1.0));
    (alpha, beta)
}

/// Checks Hermiticity, unit trace and positivity of a density matrix.
pub fn validate_density(rho: &CMatrix, policy: &NumericPolicy) -> Result<()> {
    rho.ensure_hermitian(policy.hermitian_tol)?;
    let tr = rho.trace();
    if (tr - C64::from(1.0)).norm() > policy.hermitian_tol {
        return Err(Error::EvaluationFailure(format!("trace {tr} differs from 1")));
    }
    let lmin = min_eigenvalue(rho)?;
    if lmin < -policy.hermitian_tol {
        return Err(Error::EvaluationFailure(format!("negative eigenvalue {lmin:.3e}")));
    }
    Ok(())
}

/// `ρ(ε) = (1−ε)|ψ⟩⟨ψ| + ε I/d`.
pub fn epsilon_mix(psi: &Ket, eps: f64) -> Result<CMatrix> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadMixingWeight(eps));
    }
    let d = psi.len();
    let pure = psi.outer(psi).scale_real(1.0 - eps);
    Ok(pure + CMatrix::identity(d).scale_real(eps / d as f64))
}

/// `∂(|ψ⟩⟨ψ|) = |∂ψ⟩⟨ψ| + |ψ⟩⟨∂̄ψ|` where `∂̄` is the conjugate Wirtinger direction.
fn projector_derivs(psi: &Ket, d: &(Ket, Ket)) -> (CMatrix, CMatrix) {
    let dz = d.0.outer(psi) + psi.outer(&d.1);
    let dzc = d.1.outer(psi) + psi.outer(&d.0);
    (dz, dzc)
}

/// A pure model seen as the rank-one density `|ψ⟩⟨ψ|`.
pub struct PureAsDensity<'a, M: PureModel + ?Sized> {
    pub model: &'a M,
    pub fd: FdPolicy,
}

impl<'a, M: PureModel + ?Sized> PureAsDensity<'a, M> {
    pub fn new(model: &'a M) -> Self {
        Self {
            model,
            fd: FdPolicy::default(),
        }
    }
}

impl<M: PureModel + ?Sized> DensityModel for PureAsDensity<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn num_params(&self) -> usize {
        self.model.num_params()
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix> {
        let psi = self.model.evaluate(p)?;
        Ok(psi.outer(&psi))
    }

    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(CMatrix, CMatrix)>> {
        Some((|| {
            let psi = self.model.evaluate(p)?;
            let d = pure_derivs(self.model, p, j, &self.fd)?;
            Ok(projector_derivs(&psi, &d))
        })())
    }
}

/// `ρ(ε)` built from a pure model, with exact derivatives `(1−ε)∂(|ψ⟩⟨ψ|)`.
pub struct EpsilonMixed<'a, M: PureModel + ?Sized> {
    pub model: &'a M,
    pub eps: f64,
    pub fd: FdPolicy,
}

impl<'a, M: PureModel + ?Sized> EpsilonMixed<'a, M> {
    pub fn new(model: &'a M, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadMixingWeight(eps));
        }
        Ok(Self {
            model,
            eps,
            fd: FdPolicy::default(),
        })
    }
}

impl<M: PureModel + ?Sized> DensityModel for EpsilonMixed<'_, M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn num_params(&self) -> usize {
        self.model.num_params()
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix> {
        epsilon_mix(&self.model.evaluate(p)?, self.eps)
    }

    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(CMatrix, CMatrix)>> {
        Some((|| {
            let psi = self.model.evaluate(p)?;
            let d = pure_derivs(self.model, p, j, &self.fd)?;
            let (a, b) = projector_derivs(&psi, &d);
            let w = 1.0 - self.eps;
            Ok((a.scale_real(w), b.scale_real(w)))
        })())
    }
}

/// Density model from a closure; derivatives by finite differences.
pub struct FnDensityModel<F> {
    pub dim: usize,
    pub num_params: usize,
    pub f: F,
}

impl<F> DensityModel for FnDensityModel<F>
where
    F: Fn(&ParamPoint) -> Result<CMatrix> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_params(&self) -> usize {
        self.num_params
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix> {
        check_params(self.num_params, p)?;
        (self.f)(p)
    }
}

/// Pure model from a closure; derivatives by finite differences.
pub struct FnPureModel<F> {
    pub dim: usize,
    pub num_params: usize,
    pub f: F,
}

impl<F> PureModel for FnPureModel<F>
where
    F: Fn(&ParamPoint) -> Result<Ket> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_params(&self) -> usize {
        self.num_params
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<Ket> {
        check_params(self.num_params, p)?;
        (self.f)(p)
    }
}
