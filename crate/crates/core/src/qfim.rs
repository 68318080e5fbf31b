//! Logarithmic derivatives and quantum Fisher information matrices.
//!
//! Real-parameter matrices are indexed by `θ̄ = [Re θ; Im θ]`; complex ones by
//! `θ̂ = [θ; θ*]` and returned as [`QfimBlocks`]. The right matrices use
//! `[J̄^R]_ij = Tr(ρ L_i L_j†)` and its conjugate-extended analogue
//! `[𝒥^R]_ab = Tr(ρ 𝓛_{ā} 𝓛_{b̄}†)`, where `ā` swaps `θ_j` and `θ*_j`; with this
//! order `𝒥^R = ¼⟨J̄^R⟩` and the pure-state limit is
//! `(𝒥^S)⁻¹ + i(𝒥^S)⁻¹𝒦(𝒥^S)⁻¹`.

use serde::{Deserialize, Serialize};

use crate::complex_map::to_complex;
use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix, Ket, C64, I, ZERO};
use crate::models::{
    all_density_derivs, all_pure_derivs, real_partials, DensityModel, EpsilonMixed, PureModel,
};
use crate::param::{wirtinger_derivs, FdPolicy, ParamPoint};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Symmetric,
    Right,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Symmetric => "symmetric",
            Kind::Right => "right",
        })
    }
}

/// Which derivative a logarithmic derivative belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrt {
    Theta(usize),
    ThetaStar(usize),
    /// Index into `θ̄`.
    Real(usize),
}

#[derive(Debug, Clone)]
pub struct LogDerivative {
    pub kind: Kind,
    pub with_respect_to: Wrt,
    pub matrix: CMatrix,
    /// Residual of the defining equation.
    pub residual: f64,
    /// Some entries were zeroed on the kernel of ρ.
    pub kernel_projected: bool,
}

/// Solves `∂ρ = ½(ρL + Lρ)` in the eigenbasis of ρ.
pub fn solve_sld(rho: &CMatrix, drho: &CMatrix, policy: &NumericPolicy) -> Result<(CMatrix, f64, bool)> {
    let n = rho.ensure_square()?;
    if drho.shape() != (n, n) {
        return Err(Error::SizeMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{:?}", drho.shape()),
        });
    }
    let he = eigh(rho)?;
    let v = &he.vectors;
    let d = v.adjoint() * drho * v;
    let cutoff = policy.sld_kernel_tol * rho.trace().re.abs();
    let mut projected = false;
    let l_eig = CMatrix::from_fn(n, n, |i, j| {
        let s = he.values[i] + he.values[j];
        if s > cutoff {
            d.get(i, j) * (2.0 / s)
        } else {
            projected = true;
            ZERO
        }
    });
    let l = v * &l_eig * v.adjoint();
    let residual = (drho - (rho * &l + &l * rho).scale_real(0.5)).norm();
    Ok((l, residual, projected))
}

/// Solves `∂ρ = ρL`; refuses states with `λ_min(ρ) ≤ rank_gate`.
pub fn solve_rld(rho: &CMatrix, drho: &CMatrix, policy: &NumericPolicy) -> Result<(CMatrix, f64)> {
    let n = rho.ensure_square()?;
    if drho.shape() != (n, n) {
        return Err(Error::SizeMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{:?}", drho.shape()),
        });
    }
    let he = eigh(rho)?;
    let min_eigenvalue = he.min_value();
    if min_eigenvalue <= policy.rank_gate {
        return Err(Error::RankDeficient { min_eigenvalue });
    }
    let rho_inv = he.map(|p| C64::from(1.0 / p));
    let l = rho_inv * drho;
    let residual = (drho - rho * &l).norm();
    Ok((l, residual))
}

fn solve(kind: Kind, rho: &CMatrix, drho: &CMatrix, wrt: Wrt, policy: &NumericPolicy) -> Result<LogDerivative> {
    let (matrix, residual, kernel_projected) = match kind {
        Kind::Symmetric => solve_sld(rho, drho, policy)?,
        Kind::Right => {
            let (l, r) = solve_rld(rho, drho, policy)?;
            (l, r, false)
        }
    };
    Ok(LogDerivative {
        kind,
        with_respect_to: wrt,
        matrix,
        residual,
        kernel_projected,
    })
}

fn gate_rank(rho: &CMatrix, policy: &NumericPolicy) -> Result<()> {
    let min_eigenvalue = eigh(rho)?.min_value();
    if min_eigenvalue <= policy.rank_gate {
        return Err(Error::RankDeficient { min_eigenvalue });
    }
    Ok(())
}

/// `L_{θ̄_i}` for `i = 0..2k`.
pub fn real_log_derivs<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    kind: Kind,
    policy: &NumericPolicy,
) -> Result<Vec<LogDerivative>> {
    let rho = model.evaluate(p)?;
    gate_rank(&rho, policy)?;
    let derivs = all_density_derivs(model, p, &policy.fd)?;
    let k = derivs.len();
    let partials: Vec<(CMatrix, CMatrix)> = derivs.iter().map(real_partials).collect();
    (0..2 * k)
        .map(|i| {
            let d = if i < k { &partials[i].0 } else { &partials[i - k].1 };
            solve(kind, &rho, d, Wrt::Real(i), policy)
        })
        .collect()
}

/// `(𝓛_{θ_j}, 𝓛_{θ*_j})` for `j = 0..k`.
pub fn complex_log_derivs<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    kind: Kind,
    policy: &NumericPolicy,
) -> Result<Vec<(LogDerivative, LogDerivative)>> {
    let rho = model.evaluate(p)?;
    gate_rank(&rho, policy)?;
    let derivs = all_density_derivs(model, p, &policy.fd)?;
    derivs
        .iter()
        .enumerate()
        .map(|(j, (dz, dzc))| {
            Ok((
                solve(kind, &rho, dz, Wrt::Theta(j), policy)?,
                solve(kind, &rho, dzc, Wrt::ThetaStar(j), policy)?,
            ))
        })
        .collect()
}

fn sym_form(rho: &CMatrix, a: &CMatrix, b: &CMatrix) -> C64 {
    (rho * &(a * b + b * a)).trace() * 0.5
}

fn right_form(rho: &CMatrix, a: &CMatrix, b: &CMatrix) -> C64 {
    (rho * a * b.adjoint()).trace()
}

/// `J̄^S_ij = ½Tr(ρ{L_i, L_j})` (real symmetric).
pub fn sqfim_real<M: DensityModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let rho = model.evaluate(p)?;
    let ls = real_log_derivs(model, p, Kind::Symmetric, policy)?;
    let n = ls.len();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = C64::from(sym_form(&rho, &ls[i].matrix, &ls[j].matrix).re);
            out.set(i, j, v);
            out.set(j, i, v);
        }
    }
    Ok(out)
}

/// `J̄^R_ij = Tr(ρ L_i L_j†)` (Hermitian).
pub fn rqfim_real<M: DensityModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let rho = model.evaluate(p)?;
    let ls = real_log_derivs(model, p, Kind::Right, policy)?;
    let n = ls.len();
    Ok(CMatrix::from_fn(n, n, |i, j| right_form(&rho, &ls[i].matrix, &ls[j].matrix)).hermitian_part())
}

/// The four `k×k` blocks of a `2k×2k` complex Fisher matrix over `θ̂`.
///
/// The symmetric kind has the structure `[[J, Q], [Q*, J*]]`; the right kind
/// in general does not, so all four blocks are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct QfimBlocks {
    pub kind: Kind,
    pub j: CMatrix,
    pub q: CMatrix,
    pub q_lower: CMatrix,
    pub j_lower: CMatrix,
}

impl QfimBlocks {
    /// Conjugate-structured blocks `[[J, Q], [Q*, J*]]`.
    pub fn conjugate_structured(kind: Kind, j: CMatrix, q: CMatrix) -> Result<Self> {
        let k = j.ensure_square()?;
        if q.shape() != (k, k) {
            return Err(Error::SizeMismatch {
                expected: format!("{k}x{k}"),
                found: format!("{:?}", q.shape()),
            });
        }
        Ok(Self {
            kind,
            q_lower: q.conj(),
            j_lower: j.conj(),
            j,
            q,
        })
    }

    pub fn from_full(kind: Kind, full: &CMatrix) -> Result<Self> {
        let n = full.ensure_square()?;
        if n % 2 != 0 {
            return Err(Error::OddDimension { rows: n, cols: n });
        }
        let k = n / 2;
        Ok(Self {
            kind,
            j: full.block(0, 0, k, k),
            q: full.block(0, k, k, k),
            q_lower: full.block(k, 0, k, k),
            j_lower: full.block(k, k, k, k),
        })
    }

    pub fn k(&self) -> usize {
        self.j.rows()
    }

    pub fn full(&self) -> CMatrix {
        CMatrix::from_blocks(&self.j, &self.q, &self.q_lower, &self.j_lower).expect("blocks have matching shapes")
    }

    /// `max(‖Q_lower − Q*‖, ‖J_lower − J*‖)`.
    pub fn conjugate_structure_residual(&self) -> f64 {
        self.q_lower.distance(&self.q.conj()).max(self.j_lower.distance(&self.j.conj()))
    }

    pub fn determinant(&self) -> C64 {
        self.full().determinant().expect("square")
    }

    /// Inverse of the full matrix, refused when it is numerically singular.
    pub fn inverse(&self, policy: &NumericPolicy) -> Result<CMatrix> {
        gated_inverse(&self.full(), policy)
    }
}

/// Inverts a Fisher matrix unless `|det| < singular_det_tol · scale^n`,
/// with `scale = ‖G‖_F/√n`.
pub fn gated_inverse(g: &CMatrix, policy: &NumericPolicy) -> Result<CMatrix> {
    let n = g.ensure_square()?;
    let det = g.determinant()?;
    let scale = g.norm() / (n as f64).sqrt();
    if !(scale > 0.0) || det.norm() < policy.singular_det_tol * scale.powi(n as i32) {
        return Err(Error::SingularSqfim { determinant: det.norm() });
    }
    g.inverse()
}

/// `𝙹_ij = ½Tr(ρ{𝓛_{θ*_i}, 𝓛_{θ_j}})`, `𝚀_ij = ½Tr(ρ{𝓛_{θ*_i}, 𝓛_{θ*_j}})`.
pub fn sqfim_complex<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    policy: &NumericPolicy,
) -> Result<QfimBlocks> {
    let rho = model.evaluate(p)?;
    let ls = complex_log_derivs(model, p, Kind::Symmetric, policy)?;
    let k = ls.len();
    let j = CMatrix::from_fn(k, k, |a, b| sym_form(&rho, &ls[a].1.matrix, &ls[b].0.matrix)).hermitian_part();
    let q = CMatrix::from_fn(k, k, |a, b| sym_form(&rho, &ls[a].1.matrix, &ls[b].1.matrix));
    let q = (&q + q.transpose()).scale_real(0.5);
    QfimBlocks::conjugate_structured(Kind::Symmetric, j, q)
}

/// `[𝒥^R]_ab = Tr(ρ 𝓛_{ā} 𝓛_{b̄}†)` over `θ̂`.
pub fn rqfim_complex<M: DensityModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    policy: &NumericPolicy,
) -> Result<QfimBlocks> {
    let rho = model.evaluate(p)?;
    let ls = complex_log_derivs(model, p, Kind::Right, policy)?;
    let k = ls.len();
    // index a < k is θ_a, so ā is θ*_a
    let bar = |a: usize| -> &CMatrix {
        if a < k {
            &ls[a].1.matrix
        } else {
            &ls[a - k].0.matrix
        }
    };
    let full = CMatrix::from_fn(2 * k, 2 * k, |a, b| right_form(&rho, bar(a), bar(b))).hermitian_part();
    QfimBlocks::from_full(Kind::Right, &full)
}

/// `¼⟨J̄⟩` for a real-representation Fisher matrix.
pub fn complex_from_real(j_real: &CMatrix) -> Result<CMatrix> {
    Ok(to_complex(j_real)?.scale_real(0.25))
}

struct PureTangents {
    /// `P ∂_{θ_j}ψ`
    a: Vec<Ket>,
    /// `P ∂_{θ*_j}ψ`
    b: Vec<Ket>,
}

fn pure_tangents<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, fd: &FdPolicy) -> Result<(Ket, PureTangents)> {
    let psi = model.evaluate(p)?;
    let derivs = all_pure_derivs(model, p, fd)?;
    let a = derivs.iter().map(|d| d.0.project_out(&psi)).collect();
    let b = derivs.iter().map(|d| d.1.project_out(&psi)).collect();
    Ok((psi, PureTangents { a, b }))
}

/// Pure-state SQFIM over `θ̂`:
/// `𝙹_jk = 2[⟨∂_{θ*_j}ψ|P|∂_{θ_k}ψ⟩ + ⟨∂_{θ_k}ψ|P|∂_{θ*_j}ψ⟩]`,
/// `𝚀_jk = 2[⟨∂_{θ*_j}ψ|P|∂_{θ*_k}ψ⟩ + ⟨∂_{θ*_k}ψ|P|∂_{θ*_j}ψ⟩]`,
/// with `⟨∂_{θ*}ψ| = (∂_θ|ψ⟩)†` and `P = I − |ψ⟩⟨ψ|`.
pub fn sqfim_pure_complex<M: PureModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    policy: &NumericPolicy,
) -> Result<QfimBlocks> {
    let (_, t) = pure_tangents(model, p, &policy.fd)?;
    let k = t.a.len();
    let j = CMatrix::from_fn(k, k, |x, y| (t.a[x].inner(&t.a[y]) + t.b[y].inner(&t.b[x])) * 2.0);
    let q = CMatrix::from_fn(k, k, |x, y| (t.a[x].inner(&t.b[y]) + t.a[y].inner(&t.b[x])) * 2.0);
    QfimBlocks::conjugate_structured(Kind::Symmetric, j, q)
}

/// `𝒦 = [[K, R], [R*, K*]]`, anti-Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct KBlocks {
    pub k: CMatrix,
    pub r: CMatrix,
}

impl KBlocks {
    pub fn full(&self) -> CMatrix {
        CMatrix::from_blocks(&self.k, &self.r, &self.r.conj(), &self.k.conj()).expect("square blocks")
    }
}

/// `K_jk = −2i[⟨∂_{θ*_j}ψ|P|∂_{θ_k}ψ⟩ − ⟨∂_{θ_k}ψ|P|∂_{θ*_j}ψ⟩]`,
/// `R_jk = −2i[⟨∂_{θ*_j}ψ|P|∂_{θ*_k}ψ⟩ − ⟨∂_{θ*_k}ψ|P|∂_{θ*_j}ψ⟩]`.
pub fn k_blocks_pure<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<KBlocks> {
    let (_, t) = pure_tangents(model, p, &policy.fd)?;
    let n = t.a.len();
    let m2i = C64::new(0.0, -2.0);
    let k = CMatrix::from_fn(n, n, |x, y| (t.a[x].inner(&t.a[y]) - t.b[y].inner(&t.b[x])) * m2i);
    let r = CMatrix::from_fn(n, n, |x, y| (t.a[x].inner(&t.b[y]) - t.a[y].inner(&t.b[x])) * m2i);
    Ok(KBlocks { k, r })
}

fn real_tangents<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, fd: &FdPolicy) -> Result<Vec<Ket>> {
    let psi = model.evaluate(p)?;
    let derivs = all_pure_derivs(model, p, fd)?;
    let k = derivs.len();
    let mut out: Vec<Ket> = derivs.iter().map(|d| d.0.add(&d.1)).collect();
    out.extend(derivs.iter().map(|d| d.0.sub(&d.1).scale(I)));
    debug_assert_eq!(out.len(), 2 * k);
    Ok(out.into_iter().map(|v| v.project_out(&psi)).collect())
}

/// `J̄_ij = 4 Re⟨∂_iψ|P|∂_jψ⟩` over `θ̄`.
pub fn sqfim_pure_real<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let t = real_tangents(model, p, &policy.fd)?;
    let n = t.len();
    Ok(CMatrix::from_fn(n, n, |i, j| C64::from(4.0 * t[i].inner(&t[j]).re)))
}

/// `K̄_ij = 4 Im⟨∂_iψ|P|∂_jψ⟩` over `θ̄` (real antisymmetric).
pub fn k_real_pure<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let t = real_tangents(model, p, &policy.fd)?;
    let n = t.len();
    Ok(CMatrix::from_fn(n, n, |i, j| C64::from(4.0 * t[i].inner(&t[j]).im)))
}

/// `(𝒥^S)⁻¹ + i(𝒥^S)⁻¹𝒦(𝒥^S)⁻¹`, refused when `𝒥^S` is singular.
pub fn rqfim_inv_pure<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let js = sqfim_pure_complex(model, p, policy)?.full();
    let kk = k_blocks_pure(model, p, policy)?.full();
    pure_right_inverse(&js, &kk, policy)
}

/// `J̄⁻¹ + iJ̄⁻¹K̄J̄⁻¹` over `θ̄`.
pub fn rqfim_inv_pure_real<M: PureModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    policy: &NumericPolicy,
) -> Result<CMatrix> {
    let js = sqfim_pure_real(model, p, policy)?;
    let kk = k_real_pure(model, p, policy)?;
    pure_right_inverse(&js, &kk, policy)
}

fn pure_right_inverse(js: &CMatrix, kk: &CMatrix, policy: &NumericPolicy) -> Result<CMatrix> {
    let inv = gated_inverse(js, policy)?;
    let out = &inv + (&inv * kk * &inv).scale(I);
    Ok(out.hermitian_part())
}

/// `−2 ∂_{θ̂_ā}∂_{θ̂_b} |⟨ψ(θ)|ψ(θ′)⟩|²` at `θ′ = θ`, by nested central differences
/// with absolute step `policy.hessian_step`.
pub fn fubini_study_hessian<M: PureModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    policy: &NumericPolicy,
) -> Result<CMatrix> {
    let psi0 = model.evaluate(p)?;
    let k = p.len();
    let fd = FdPolicy::absolute(policy.hessian_step);
    let fidelity = |q: &ParamPoint| -> Result<C64> { Ok(C64::from(psi0.inner(&model.evaluate(q)?).norm_sqr())) };
    // second[a][b] = ∂_{θ̂_a} ∂_{θ̂_b} F over θ̂ indices
    let mut second = CMatrix::zeros(2 * k, 2 * k);
    for b in 0..k {
        let inner = |q: &ParamPoint| -> Result<Vec<C64>> {
            let (dz, dzc) = wirtinger_derivs(fidelity, q, b, &fd)?;
            Ok(vec![dz, dzc])
        };
        for a in 0..k {
            let (da, dac) = wirtinger_derivs(inner, p, a, &fd)?;
            second.set(a, b, da[0]);
            second.set(a, k + b, da[1]);
            second.set(k + a, b, dac[0]);
            second.set(k + a, k + b, dac[1]);
        }
    }
    let swap = |a: usize| if a < k { a + k } else { a - k };
    Ok(CMatrix::from_fn(2 * k, 2 * k, |a, b| second.get(swap(a), b) * -2.0))
}

pub const DEFAULT_MIX_WEIGHTS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Mixed-state route to the pure right limit: `(𝒥^R)⁻¹ = ⟨(J̄^R)⁻¹⟩` on `ρ(ε)`
/// for each ε, then polynomial extrapolation to `ε = 0`.
pub fn rqfim_inv_mixed_limit<M: PureModel + ?Sized>(
    model: &M,
    p: &ParamPoint,
    weights: &[f64],
    policy: &NumericPolicy,
) -> Result<CMatrix> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("at least one mixing weight is needed".into()));
    }
    let samples = weights
        .iter()
        .map(|&eps| {
            let mixed = EpsilonMixed::new(model, eps)?;
            let jr = rqfim_real(&mixed, p, policy)?;
            let (inv, _) = crate::linalg::robust_inverse(&jr, policy.rank_tol)?;
            to_complex(&inv)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(extrapolate_to_zero(weights, &samples).hermitian_part())
}

/// Neville extrapolation of `X(ε)` to `ε = 0`.
pub fn extrapolate_to_zero(eps: &[f64], xs: &[CMatrix]) -> CMatrix {
    let mut t: Vec<CMatrix> = xs.to_vec();
    let n = t.len();
    for m in 1..n {
        for i in 0..n - m {
            let (ei, ej) = (eps[i], eps[i + m]);
            // value at 0 of the line through (ei, t[i]) and (ej, t[i+1])
            t[i] = (t[i + 1].scale_real(ei) - t[i].scale_real(ej)).scale_real(1.0 / (ei - ej));
        }
    }
    t.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, min_eigenvalue, psd_order};
    use crate::models::{
        builtin_qubit_model, CoherentKey, CoherentModel, FnDensityModel, FockConfig, PureAsDensity, QubitSpec,
        RandomDensityModel, RandomPureModel,
    };
    use crate::testing::rng;

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn coherent(eps: C64, eta: C64) -> CoherentModel {
        CoherentModel::new(CoherentKey::single(eps, eta), FockConfig::default())
    }

    #[test]
    fn sld_examples() {
        let p = policy();
        let half = CMatrix::identity(2).scale_real(0.5);
        let (l, res, _) = solve_sld(&half, &pauli_x().scale_real(0.5), &p).unwrap();
        assert!(l.distance(&pauli_x()) < 1e-14 && res < 1e-14);

        let mut r = rng(3);
        let m = RandomDensityModel::new(&mut r, 2, 1, 0.1);
        let q = ParamPoint::scalar(c64(0.1, 0.2)).unwrap();
        let rho = m.evaluate(&q).unwrap();
        let (dz, _) = m.analytic_derivs(&q, 0).unwrap().unwrap();
        let (_, res, projected) = solve_sld(&rho, &dz, &p).unwrap();
        assert!(res <= 1e-10 && !projected);
        let herm = dz.hermitian_part();
        let (l, _, _) = solve_sld(&rho, &herm, &p).unwrap();
        assert!(l.hermitian_deviation() <= 1e-10);
    }

    #[test]
    fn rld_examples() {
        let p = policy();
        let third = CMatrix::identity(3).scale_real(1.0 / 3.0);
        let mut r = rng(9);
        let d = crate::testing::random_hermitian(&mut r, 3);
        let (l, _) = solve_rld(&third, &d, &p).unwrap();
        assert!(l.distance(&d.scale_real(3.0)) < 1e-13);

        let m = RandomDensityModel::new(&mut r, 3, 1, 0.1);
        let q = ParamPoint::scalar(c64(0.3, -0.2)).unwrap();
        let (dz, _) = m.analytic_derivs(&q, 0).unwrap().unwrap();
        let (_, res) = solve_rld(&m.evaluate(&q).unwrap(), &dz, &p).unwrap();
        assert!(res <= 1e-10);

        let psi = Ket::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)]).unwrap();
        assert!(matches!(
            solve_rld(&psi.outer(&psi), &pauli_x(), &p),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn qubit_closed_form_oracle() {
        let c = 0.4;
        let m = builtin_qubit_model(QubitSpec::planar(c)).unwrap();
        let q = ParamPoint::scalar(c64(0.5, -0.7)).unwrap();
        let j = sqfim_real(&m, &q, &policy()).unwrap();
        let r = m.bloch(&q);
        let r2: f64 = r.iter().map(|x| x * x).sum();
        let dr = [[c, 0.0, 0.0], [0.0, c, 0.0]];
        for a in 0..2 {
            for b in 0..2 {
                let dot = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
                let expected = dot(&dr[a], &dr[b]) + dot(&r, &dr[a]) * dot(&r, &dr[b]) / (1.0 - r2);
                assert!((j.get(a, b).re - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_family_oracle() {
        // ρ(θ) = e^{−i Re θ H} ρ₀ e^{i Re θ H}, H = σ_x/2, ρ₀ = diag(p₀, p₁)
        let (p0, p1) = (0.8, 0.2);
        let model = FnDensityModel {
            dim: 2,
            num_params: 1,
            f: |q: &ParamPoint| {
                let t = q.theta()[0].re / 2.0;
                let u = CMatrix::from_rows(&[
                    vec![C64::from(t.cos()), C64::new(0.0, -t.sin())],
                    vec![C64::new(0.0, -t.sin()), C64::from(t.cos())],
                ])?;
                Ok(&u * CMatrix::from_real_diagonal(&[0.8, 0.2]) * u.adjoint())
            },
        };
        let j = sqfim_real(&model, &ParamPoint::scalar(c64(0.3, 0.0)).unwrap(), &policy()).unwrap();
        let expected = 2.0 * 2.0 * (p0 - p1) * (p0 - p1) / (p0 + p1) * 0.25;
        assert!((j.get(0, 0).re - expected).abs() < 1e-9, "{} vs {expected}", j.get(0, 0));
        assert!(j.get(1, 1).norm() < 1e-9 && j.get(0, 1).norm() < 1e-9);
    }

    #[test]
    fn classical_family_oracle() {
        // diagonal ρ = diag(p(θ)), p = (½ + a, ½ − a), a = 0.3 Re θ + 0.1 Im θ
        let model = FnDensityModel {
            dim: 2,
            num_params: 1,
            f: |q: &ParamPoint| {
                let z = q.theta()[0];
                let a = 0.3 * z.re + 0.1 * z.im;
                Ok(CMatrix::from_real_diagonal(&[0.5 + a, 0.5 - a]))
            },
        };
        let q = ParamPoint::scalar(c64(0.2, 0.4)).unwrap();
        let a = 0.3 * 0.2 + 0.1 * 0.4;
        let probs = [0.5 + a, 0.5 - a];
        let grads = [[0.3, 0.1], [-0.3, -0.1]];
        let js = sqfim_real(&model, &q, &policy()).unwrap();
        let jr = rqfim_real(&model, &q, &policy()).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let expected: f64 = (0..2).map(|i| grads[i][x] * grads[i][y] / probs[i]).sum();
                assert!((js.get(x, y).re - expected).abs() < 1e-8);
                assert!((jr.get(x, y) - C64::from(expected)).norm() < 1e-8);
            }
        }
        let cs = sqfim_complex(&model, &q, &policy()).unwrap().full();
        let cr = rqfim_complex(&model, &q, &policy()).unwrap().full();
        assert!(cs.distance(&cr) < 1e-8);
    }

    #[test]
    fn isotropic_commuting_family_has_equal_kinds() {
        let model = builtin_qubit_model(QubitSpec {
            offset: [0.0, 0.0, 0.1],
            columns: vec![[0.0, 0.0, 0.3], [0.0, 0.0, 0.2]],
        })
        .unwrap();
        let q = ParamPoint::scalar(c64(0.5, 0.5)).unwrap();
        let js = sqfim_real(&model, &q, &policy()).unwrap();
        let jr = rqfim_real(&model, &q, &policy()).unwrap();
        assert!(js.distance(&jr) < 1e-10);
    }

    #[test]
    fn equivalence_with_map_route() {
        let mut r = rng(12);
        let p = policy();
        for dim in [2, 3] {
            let m = RandomDensityModel::new(&mut r, dim, 2, 0.2);
            let q = ParamPoint::new(vec![c64(0.1, -0.2), c64(0.3, 0.05)]).unwrap();
            let s_direct = sqfim_complex(&m, &q, &p).unwrap().full();
            let s_map = complex_from_real(&sqfim_real(&m, &q, &p).unwrap()).unwrap();
            assert!(s_direct.distance(&s_map) <= 1e-8);
            let r_direct = rqfim_complex(&m, &q, &p).unwrap().full();
            let r_map = complex_from_real(&rqfim_real(&m, &q, &p).unwrap()).unwrap();
            assert!(r_direct.distance(&r_map) <= 1e-8);
            assert!(min_eigenvalue(&s_direct).unwrap() >= -1e-8);
            assert!(s_direct.is_hermitian(1e-9));
        }
    }

    #[test]
    fn log_derivative_relations() {
        let mut r = rng(13);
        let p = policy();
        let m = RandomDensityModel::new(&mut r, 3, 1, 0.2);
        let q = ParamPoint::scalar(c64(0.2, 0.1)).unwrap();
        let rho = m.evaluate(&q).unwrap();
        for kind in [Kind::Symmetric, Kind::Right] {
            let cplx = complex_log_derivs(&m, &q, kind, &p).unwrap();
            let real = real_log_derivs(&m, &q, kind, &p).unwrap();
            let (lz, lzc) = (&cplx[0].0.matrix, &cplx[0].1.matrix);
            let (la, lb) = (&real[0].matrix, &real[1].matrix);
            assert!(lz.distance(&(la - lb.scale(I)).scale_real(0.5)) <= 1e-9);
            assert!(lzc.distance(&(la + lb.scale(I)).scale_real(0.5)) <= 1e-9);
            match kind {
                Kind::Symmetric => {
                    assert!(lz.distance(&lzc.adjoint()) <= 1e-9);
                    assert!(la.hermitian_deviation() <= 1e-9);
                }
                Kind::Right => {
                    let lhs = &rho * lz;
                    let rhs = (&rho * lzc).adjoint();
                    assert!(lhs.distance(&rhs) <= 1e-9);
                }
            }
            for l in real.iter().chain(cplx.iter().flat_map(|(a, b)| [a, b])) {
                assert!(l.residual <= 1e-9);
            }
        }
    }

    #[test]
    fn holomorphic_family_has_null_pseudo_blocks() {
        // α = z: the projected ∂_{z*}ψ vanishes
        let m = coherent(c64(1.0, 0.0), c64(0.0, 0.0));
        let q = ParamPoint::scalar(c64(0.2, 0.1)).unwrap();
        let mixed = EpsilonMixed::new(&m, 1e-4).unwrap();
        let s = sqfim_complex(&mixed, &q, &policy()).unwrap();
        assert!(s.q.norm() <= 1e-8);
        assert!((s.j.get(0, 0) - C64::from(2.0)).norm() <= 1e-3);
        let r = rqfim_complex(&mixed, &q, &policy()).unwrap();
        assert!(r.q.norm() <= 1e-8 && r.q_lower.norm() <= 1e-8);
    }

    #[test]
    fn coherent_pure_closed_forms() {
        let p = policy();
        for (e, n) in [(c64(1.0, 0.0), c64(0.0, 0.0)), (c64(1.0, 0.0), c64(0.5, 0.0)), (c64(0.6, 0.6), c64(0.0, 0.5))] {
            let m = coherent(e, n);
            let q = ParamPoint::scalar(c64(0.3, 0.1)).unwrap();
            let (a, b, c) = (e.norm_sqr(), n.norm_sqr(), e.conj() * n);
            let expected = CMatrix::from_rows(&[
                vec![C64::from(2.0 * (a + b)), c * 4.0],
                vec![c.conj() * 4.0, C64::from(2.0 * (a + b))],
            ])
            .unwrap();
            let s = sqfim_pure_complex(&m, &q, &p).unwrap();
            assert!(s.full().distance(&expected) <= 1e-8);
            let s_real = complex_from_real(&sqfim_pure_real(&m, &q, &p).unwrap()).unwrap();
            assert!(s_real.distance(&expected) <= 1e-8);

            let k = k_blocks_pure(&m, &q, &p).unwrap().full();
            let kexp = CMatrix::from_diagonal(&[C64::new(0.0, -2.0 * (a - b)), C64::new(0.0, 2.0 * (a - b))]);
            assert!(k.distance(&kexp) <= 1e-8);
            let k_map = complex_from_real(&k_real_pure(&m, &q, &p).unwrap()).unwrap();
            assert!(k.distance(&k_map) <= 1e-8);

            let inv = rqfim_inv_pure(&m, &q, &p).unwrap();
            let s2 = (a - b) * (a - b);
            let iexp = CMatrix::from_rows(&[vec![C64::from(a / s2), -c / s2], vec![-c.conj() / s2, C64::from(b / s2)]])
                .unwrap();
            assert!(inv.distance(&iexp) <= 1e-8);
            let inv_map = to_complex(&rqfim_inv_pure_real(&m, &q, &p).unwrap()).unwrap();
            assert!(inv.distance(&inv_map) <= 1e-8);
        }
    }

    #[test]
    fn balanced_key_is_singular_and_k_vanishes() {
        let m = coherent(c64(1.0, 0.0), c64(0.0, 1.0));
        let q = ParamPoint::scalar(c64(0.3, 0.0)).unwrap();
        let k = k_blocks_pure(&m, &q, &policy()).unwrap().full();
        assert!(k.norm() <= 1e-8);
        assert!(matches!(rqfim_inv_pure(&m, &q, &policy()), Err(Error::SingularSqfim { .. })));
    }

    #[test]
    fn right_inverse_is_rank_one_for_unbalanced_vacuum_key() {
        let m = coherent(c64(1.0, 0.0), c64(0.0, 0.0));
        let inv = rqfim_inv_pure(&m, &ParamPoint::scalar(c64(0.2, 0.0)).unwrap(), &policy()).unwrap();
        assert!(inv.distance(&CMatrix::from_real_diagonal(&[1.0, 0.0])) <= 1e-8);
        let (_, rep) = crate::linalg::robust_inverse(&inv, 1e-8).unwrap();
        assert_eq!(rep.rank, 1);
    }

    #[test]
    fn fubini_study_matches_pure_sqfim() {
        let m = coherent(c64(1.0, 0.0), c64(0.5, 0.2));
        let q = ParamPoint::scalar(c64(0.3, 0.1)).unwrap();
        let h = fubini_study_hessian(&m, &q, &policy()).unwrap();
        let s = sqfim_pure_complex(&m, &q, &policy()).unwrap().full();
        assert!(h.distance(&s) / s.norm() <= 1e-4, "{h:?} vs {s:?}");
        assert!(h.hermitian_deviation() / h.norm() <= 1e-4);

        let psi = m.evaluate(&q).unwrap();
        assert!((psi.inner(&psi).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_sqfim_approaches_pure_path() {
        let mut r = rng(15);
        let m = RandomPureModel::new(&mut r, 2, 1);
        let q = ParamPoint::scalar(c64(0.1, 0.2)).unwrap();
        let mixed = EpsilonMixed::new(&m, 1e-6).unwrap();
        let jm = sqfim_real(&mixed, &q, &policy()).unwrap();
        let jp = sqfim_pure_real(&m, &q, &policy()).unwrap();
        assert!(jm.distance(&jp) <= 1e-4);
    }

    #[test]
    fn mixed_limit_of_right_inverse() {
        let p = policy();
        let m = coherent(c64(1.0, 0.0), c64(0.5, 0.0));
        let q = ParamPoint::scalar(c64(0.3, 0.1)).unwrap();
        let lim = rqfim_inv_mixed_limit(&m, &q, &DEFAULT_MIX_WEIGHTS, &p).unwrap();
        let pure = rqfim_inv_pure(&m, &q, &p).unwrap();
        assert!(lim.distance(&pure) <= 1e-3, "{lim:?} vs {pure:?}");
    }

    #[test]
    fn rank_deficient_density_is_refused() {
        let m = coherent(c64(1.0, 0.0), c64(0.0, 0.0));
        let proj = PureAsDensity::new(&m);
        let q = ParamPoint::scalar(c64(0.1, 0.0)).unwrap();
        assert!(matches!(sqfim_complex(&proj, &q, &policy()), Err(Error::RankDeficient { .. })));
        assert!(matches!(rqfim_real(&proj, &q, &policy()), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn right_and_symmetric_are_reported_not_ordered() {
        let mut r = rng(16);
        let m = RandomDensityModel::new(&mut r, 2, 1, 0.2);
        let q = ParamPoint::scalar(c64(0.0, 0.1)).unwrap();
        let js = sqfim_real(&m, &q, &policy()).unwrap();
        let jr = rqfim_real(&m, &q, &policy()).unwrap();
        assert!(jr.is_hermitian(1e-9));
        let verdict = psd_order(&jr, &js, 1e-12, &policy()).unwrap();
        assert!(verdict.min_eigenvalue.is_finite());
    }

    #[test]
    fn gated_inverse_refuses_singular() {
        let g = CMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(gated_inverse(&g, &policy()), Err(Error::SingularSqfim { .. })));
        assert!(gated_inverse(&CMatrix::identity(2), &policy()).is_ok());
    }

    #[test]
    fn extrapolation_is_exact_for_polynomials() {
        let eps = [1e-1, 1e-2, 1e-3];
        let xs: Vec<CMatrix> = eps
            .iter()
            .map(|&e| CMatrix::from_real_diagonal(&[3.0 + 2.0 * e - 5.0 * e * e]))
            .collect();
        let x0 = extrapolate_to_zero(&eps, &xs);
        assert!((x0.get(0, 0).re - 3.0).abs() < 1e-12);
    }
}
