//! Cramér-Rao covariance bounds, weighted mean-square-error bounds and the
//! pure-state attainability test.

use serde::Serialize;

use crate::complex_map::{from_complex, sigma, to_complex};
use crate::error::{Error, Result};
use crate::linalg::{matrix_abs, psd_order, CMatrix, Ket, PsdVerdict, C64};
use crate::models::{all_pure_derivs, PureModel};
use crate::param::ParamPoint;
use crate::policy::NumericPolicy;
use crate::qfim::{gated_inverse, Kind, QfimBlocks};

/// Schur data of `[[J, Q], [Q', J']]`:
/// `E = J − Q J'⁻¹ Q'`, `E' = J' − Q' J⁻¹ Q`, `F = J⁻¹ Q`, `F' = J'⁻¹ Q'`.
///
/// The inverse is `[[E⁻¹, −F E'⁻¹], [−F' E⁻¹, E'⁻¹]]`; for conjugate-structured
/// blocks `E' = E*` and `F' = F*`.
#[derive(Debug, Clone)]
pub struct SchurBlocks {
    pub kind: Kind,
    pub e: CMatrix,
    pub f: CMatrix,
    pub e_lower: CMatrix,
    pub f_lower: CMatrix,
    pub e_inv: CMatrix,
    pub e_lower_inv: CMatrix,
}

fn block_inverse(g: &CMatrix, block: &'static str, policy: &NumericPolicy) -> Result<CMatrix> {
    gated_inverse(g, policy).map_err(|e| match e {
        Error::SingularSqfim { .. } => Error::SingularBlock { block },
        other => other,
    })
}

pub fn schur_blocks(q: &QfimBlocks, policy: &NumericPolicy) -> Result<SchurBlocks> {
    let j_inv = block_inverse(&q.j, "J", policy)?;
    let jl_inv = block_inverse(&q.j_lower, "J_lower", policy)?;
    let e = &q.j - &q.q * &jl_inv * &q.q_lower;
    let e_lower = &q.j_lower - &q.q_lower * &j_inv * &q.q;
    let f = &j_inv * &q.q;
    let f_lower = &jl_inv * &q.q_lower;
    let e_inv = block_inverse(&e, "E", policy)?;
    let e_lower_inv = block_inverse(&e_lower, "E_lower", policy)?;
    Ok(SchurBlocks {
        kind: q.kind,
        e,
        f,
        e_lower,
        f_lower,
        e_inv,
        e_lower_inv,
    })
}

impl SchurBlocks {
    /// `[[E⁻¹, −F E'⁻¹], [−F' E⁻¹, E'⁻¹]]`.
    pub fn inverse(&self) -> CMatrix {
        CMatrix::from_blocks(
            &self.e_inv,
            &-(&self.f * &self.e_lower_inv),
            &-(&self.f_lower * &self.e_inv),
            &self.e_lower_inv,
        )
        .expect("square blocks")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Covariance,
    Wmse,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub qfim_kind: Kind,
    pub matrix: Option<CMatrix>,
    pub scalar: Option<f64>,
    pub determinant: f64,
    /// Numerical rank of the bound matrix.
    pub rank: usize,
    pub attainability: Option<CMatrix>,
    pub notes: Vec<String>,
}

/// `Cov(t̂) ≥ 𝒟 𝒥⁻¹ 𝒟†` for a Wirtinger Jacobian `𝒟` (2m×2k).
pub fn crb_covariance(q: &QfimBlocks, jac: &CMatrix, policy: &NumericPolicy) -> Result<BoundReport> {
    let full = q.full();
    if jac.cols() != full.rows() {
        return Err(Error::SizeMismatch {
            expected: format!("Jacobian with {} columns", full.rows()),
            found: format!("{:?}", jac.shape()),
        });
    }
    let inv = gated_inverse(&full, policy)?;
    let bound = (jac * &inv * jac.adjoint()).hermitian_part();
    Ok(covariance_report(q.kind, bound, full.determinant()?.norm(), policy))
}

/// Covariance report for an already inverted Fisher matrix, e.g. the pure right limit.
pub fn covariance_report(kind: Kind, bound: CMatrix, determinant: f64, policy: &NumericPolicy) -> BoundReport {
    let rank = crate::linalg::robust_inverse(&bound, policy.rank_tol.max(1e-10))
        .map(|(_, r)| r.rank)
        .unwrap_or(0);
    let mut notes = Vec::new();
    if rank < bound.rows() {
        notes.push(format!(
            "bound has rank {rank} of {}: only part of the parameter can be estimated at this bound",
            bound.rows()
        ));
    }
    BoundReport {
        kind: BoundKind::Covariance,
        qfim_kind: kind,
        matrix: Some(bound),
        scalar: None,
        determinant,
        rank,
        attainability: None,
        notes,
    }
}

/// Upper-left `m×m` block of `𝒟𝒥⁻¹𝒟†` written through the Schur blocks, with
/// `𝒟 = [[A, B], [B*, A*]]`: `A X A† + A Y B† + B Y' A† + B X' B†`.
pub fn crb_t_block(s: &SchurBlocks, jac: &CMatrix) -> Result<CMatrix> {
    let k = s.e.rows();
    let m2 = jac.rows();
    if jac.cols() != 2 * k || !m2.is_multiple_of(2) {
        return Err(Error::SizeMismatch {
            expected: format!("2m x {}", 2 * k),
            found: format!("{:?}", jac.shape()),
        });
    }
    let m = m2 / 2;
    let a = jac.block(0, 0, m, k);
    let b = jac.block(0, k, m, k);
    let x = &s.e_inv;
    let y = -(&s.f * &s.e_lower_inv);
    let y_l = -(&s.f_lower * &s.e_inv);
    let x_l = &s.e_lower_inv;
    Ok(&a * x * a.adjoint() + &a * &y * b.adjoint() + &b * &y_l * a.adjoint() + &b * x_l * b.adjoint())
}

/// `𝒲 = [[W, X], [X*, W*]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBlocks {
    pub w: CMatrix,
    pub x: CMatrix,
}

impl WeightBlocks {
    pub fn new(w: CMatrix, x: CMatrix, policy: &NumericPolicy) -> Result<Self> {
        let k = w.ensure_square()?;
        if x.shape() != (k, k) {
            return Err(Error::SizeMismatch {
                expected: format!("{k}x{k}"),
                found: format!("{:?}", x.shape()),
            });
        }
        w.ensure_hermitian(policy.hermitian_tol)?;
        let deviation = x.distance(&x.transpose());
        if deviation > policy.hermitian_tol * x.norm().max(1.0) {
            return Err(Error::NotSymmetric { deviation });
        }
        Ok(Self { w, x })
    }

    /// `diag(W, W*)`.
    pub fn diagonal(w: CMatrix) -> Result<Self> {
        let k = w.ensure_square()?;
        Self::new(w, CMatrix::zeros(k, k), &NumericPolicy::default())
    }

    pub fn full(&self) -> CMatrix {
        CMatrix::from_blocks(&self.w, &self.x, &self.x.conj(), &self.w.conj()).expect("square blocks")
    }
}

/// `𝒲 = ¼⟨W̄⟩` for a real symmetric `W̄`.
pub fn weight_from_real(w_real: &CMatrix, policy: &NumericPolicy) -> Result<WeightBlocks> {
    let n = w_real.ensure_square()?;
    let deviation = w_real.distance(&w_real.transpose()) + w_real.im().norm();
    if deviation > policy.hermitian_tol * w_real.norm().max(1.0) {
        return Err(Error::NotSymmetric { deviation });
    }
    let full = to_complex(w_real)?.scale_real(0.25);
    let k = n / 2;
    Ok(WeightBlocks {
        w: full.block(0, 0, k, k),
        x: full.block(0, k, k, k),
    })
}

/// Both forms of `w^S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricWmse {
    /// `Tr(𝒲 (𝒥^S)⁻¹)`
    pub trace_form: f64,
    /// `2 Re Tr(W E⁻¹ − X F* E⁻¹)`
    pub block_form: f64,
}

pub fn wmse_bound_symmetric(w: &WeightBlocks, q: &QfimBlocks, policy: &NumericPolicy) -> Result<SymmetricWmse> {
    let inv = q.inverse(policy)?;
    let trace_form = (w.full() * &inv).trace().re;
    let s = schur_blocks(q, policy).map_err(|e| match e {
        Error::SingularBlock { .. } => Error::SingularSqfim {
            determinant: q.determinant().norm(),
        },
        other => other,
    })?;
    let t = (&w.w * &s.e_inv - &w.x * s.f.conj() * &s.e_inv).trace();
    Ok(SymmetricWmse {
        trace_form,
        block_form: 2.0 * t.re,
    })
}

fn trace_abs(g: &CMatrix, policy: &NumericPolicy) -> Result<f64> {
    Ok(matrix_abs(g, policy)?.trace().re)
}

/// `½Tr(𝒲[R + σR*σ]) + ½TrAbs(𝒲[R − σR*σ])` with `R = (𝒥^R)⁻¹`.
pub fn wmse_bound_right(w: &WeightBlocks, q_inv: &CMatrix, policy: &NumericPolicy) -> Result<f64> {
    let k = w.w.rows();
    if q_inv.shape() != (2 * k, 2 * k) {
        return Err(Error::SizeMismatch {
            expected: format!("{}x{}", 2 * k, 2 * k),
            found: format!("{:?}", q_inv.shape()),
        });
    }
    let s = sigma(k);
    let flipped = &s * q_inv.conj() * &s;
    let wf = w.full();
    let first = (&wf * (q_inv + &flipped)).trace().re * 0.5;
    let second = trace_abs(&(&wf * (q_inv - &flipped)), policy)? * 0.5;
    Ok(first + second)
}

/// `Tr(W̄ Re R̄) + TrAbs(W̄ Im R̄)` with `R̄ = (J̄^R)⁻¹`.
pub fn wmse_bound_right_real(w_real: &CMatrix, q_inv_real: &CMatrix, policy: &NumericPolicy) -> Result<f64> {
    let first = (w_real * q_inv_real.re()).trace().re;
    let second = trace_abs(&(w_real * q_inv_real.im()), policy)?;
    Ok(first + second)
}

/// `R̄ = (J̄^R)⁻¹` recovered from `(𝒥^R)⁻¹ = ⟨R̄⟩`.
pub fn real_inverse_from_complex(q_inv: &CMatrix) -> Result<CMatrix> {
    from_complex(q_inv)
}

/// `C_ab = ⟨ψ|[𝓛_{θ̂_a}, 𝓛_{θ̂_b}]|ψ⟩` over `θ̂`, with `𝓛 = 2∂(|ψ⟩⟨ψ|)`.
pub fn attainability<M: PureModel + ?Sized>(model: &M, p: &ParamPoint, policy: &NumericPolicy) -> Result<CMatrix> {
    let psi = model.evaluate(p)?;
    let derivs = all_pure_derivs(model, p, &policy.fd)?;
    let k = derivs.len();
    // u_a = ∂_{θ̂_a}ψ, v_a = ∂_{θ̂_ā}ψ
    let mut u: Vec<&Ket> = derivs.iter().map(|d| &d.0).collect();
    u.extend(derivs.iter().map(|d| &d.1));
    let v: Vec<&Ket> = (0..2 * k).map(|a| u[if a < k { a + k } else { a - k }]).collect();
    let two = C64::from(2.0);
    // 𝓛_a|ψ⟩ and 𝓛_a†|ψ⟩
    let l_psi: Vec<Ket> = (0..2 * k)
        .map(|a| u[a].axpy(v[a].inner(&psi), &psi).scale(two))
        .collect();
    let ladj_psi: Vec<Ket> = (0..2 * k)
        .map(|a| psi.scale(u[a].inner(&psi)).add(v[a]).scale(two))
        .collect();
    Ok(CMatrix::from_fn(2 * k, 2 * k, |a, b| {
        ladj_psi[a].inner(&l_psi[b]) - ladj_psi[b].inner(&l_psi[a])
    }))
}

/// All commutator expectations below `attainability_tol · scale`.
pub fn is_attainable(commutators: &CMatrix, scale: f64, policy: &NumericPolicy) -> bool {
    commutators.max_abs() <= policy.attainability_tol * scale.max(1.0)
}

/// `classical ≤ quantum` in the Loewner order.
pub fn fim_dominance(classical: &CMatrix, quantum: &CMatrix, tol: f64, policy: &NumericPolicy) -> Result<PsdVerdict> {
    psd_order(quantum, classical, tol, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::models::{CoherentKey, CoherentModel, FockConfig};
    use crate::param::identity_jacobian;
    use crate::qfim::{rqfim_inv_pure, sqfim_pure_complex};
    use crate::testing::{random_cmatrix, random_psd, random_real_symmetric, rng};

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn random_structured(seed: u64, k: usize) -> QfimBlocks {
        let mut r = rng(seed);
        let a = random_cmatrix(&mut r, 2 * k, 2 * k);
        // ¼⟨real PSD⟩ is conjugate-structured and Hermitian PSD
        let real = (a.re().transpose() * a.re()) + CMatrix::identity(2 * k);
        QfimBlocks::from_full(Kind::Symmetric, &to_complex(&real).unwrap().scale_real(0.25)).unwrap()
    }

    fn coherent(e: C64, n: C64) -> CoherentModel {
        CoherentModel::new(CoherentKey::single(e, n), FockConfig::default())
    }

    #[test]
    fn schur_null_pseudo_block() {
        let j = CMatrix::from_real_diagonal(&[2.0, 3.0]);
        let q = QfimBlocks::conjugate_structured(Kind::Symmetric, j.clone(), CMatrix::zeros(2, 2)).unwrap();
        let s = schur_blocks(&q, &policy()).unwrap();
        assert!(s.e.distance(&j) < 1e-15 && s.f.norm() < 1e-15);
        let inv = s.inverse();
        assert!(inv.block(0, 2, 2, 2).norm() < 1e-15);
    }

    #[test]
    fn schur_reassembly_matches_direct_inverse() {
        for (seed, k) in [(1, 1), (2, 2), (3, 3)] {
            let q = random_structured(seed, k);
            let s = schur_blocks(&q, &policy()).unwrap();
            let direct = q.full().inverse().unwrap();
            assert!(s.inverse().distance(&direct) <= 1e-9);
            assert!(s.e_lower.distance(&s.e.conj()) <= 1e-9);
        }
        // general four-block case
        let mut r = rng(8);
        let full = random_psd(&mut r, 4) + CMatrix::identity(4);
        let q = QfimBlocks::from_full(Kind::Right, &full).unwrap();
        let s = schur_blocks(&q, &policy()).unwrap();
        assert!(s.inverse().distance(&full.inverse().unwrap()) <= 1e-9);
    }

    #[test]
    fn schur_names_singular_block() {
        let q = QfimBlocks::conjugate_structured(Kind::Symmetric, CMatrix::zeros(1, 1), CMatrix::identity(1)).unwrap();
        assert!(matches!(schur_blocks(&q, &policy()), Err(Error::SingularBlock { block: "J" })));
    }

    #[test]
    fn coherent_schur_and_crb() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.2, 0.1)).unwrap();
        let s = sqfim_pure_complex(&coherent(c64(1.0, 0.0), c64(0.0, 0.0)), &q, &p).unwrap();
        let sb = schur_blocks(&s, &p).unwrap();
        assert!((sb.e.get(0, 0) - C64::from(2.0)).norm() < 1e-8);
        assert!(sb.inverse().distance(&CMatrix::from_real_diagonal(&[0.5, 0.5])) < 1e-8);

        let (e, n) = (c64(1.0, 0.0), c64(0.3, 0.4));
        let s = sqfim_pure_complex(&coherent(e, n), &q, &p).unwrap();
        let rep = crb_covariance(&s, &identity_jacobian(1), &p).unwrap();
        let (a, b, c) = (e.norm_sqr(), n.norm_sqr(), e.conj() * n);
        let f = 1.0 / (2.0 * (a - b) * (a - b));
        let expected =
            CMatrix::from_rows(&[vec![C64::from((a + b) * f), -c * 2.0 * f], vec![-c.conj() * 2.0 * f, C64::from((a + b) * f)]])
                .unwrap();
        assert!(rep.matrix.as_ref().unwrap().distance(&expected) <= 1e-8);
        let tb = crb_t_block(&schur_blocks(&s, &p).unwrap(), &identity_jacobian(1)).unwrap();
        assert!((tb.get(0, 0) - expected.get(0, 0)).norm() <= 1e-8);
    }

    #[test]
    fn crb_identity_with_null_q_is_j_inverse() {
        let mut r = rng(5);
        let j = random_psd(&mut r, 2) + CMatrix::identity(2);
        let q = QfimBlocks::conjugate_structured(Kind::Symmetric, j.clone(), CMatrix::zeros(2, 2)).unwrap();
        let rep = crb_covariance(&q, &identity_jacobian(2), &policy()).unwrap();
        let m = rep.matrix.unwrap();
        assert!(m.block(0, 0, 2, 2).distance(&j.inverse().unwrap()) <= 1e-10);
    }

    #[test]
    fn singular_fim_is_refused() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.2, 0.0)).unwrap();
        let s = sqfim_pure_complex(&coherent(c64(1.0, 0.0), c64(1.0, 0.0)), &q, &p).unwrap();
        assert!(matches!(
            crb_covariance(&s, &identity_jacobian(1), &p),
            Err(Error::SingularSqfim { .. })
        ));
    }

    #[test]
    fn covariance_equivalence_through_map() {
        let mut r = rng(31);
        let p = policy();
        for _ in 0..5 {
            let a = random_cmatrix(&mut r, 4, 4).re();
            let j_real = a.transpose() * &a + CMatrix::identity(4);
            let d_real = random_cmatrix(&mut r, 2, 4).re();
            let real_bound = &d_real * j_real.inverse().unwrap() * d_real.transpose();
            let transported = to_complex(&real_bound).unwrap();
            let q = QfimBlocks::from_full(Kind::Symmetric, &to_complex(&j_real).unwrap().scale_real(0.25)).unwrap();
            let d_c = to_complex(&d_real).unwrap().scale_real(0.5);
            let complex = crb_covariance(&q, &d_c, &p).unwrap().matrix.unwrap();
            assert!(transported.relative_distance(&complex) <= 1e-8);
        }
    }

    #[test]
    fn weight_from_real_examples() {
        let p = policy();
        let w = weight_from_real(&CMatrix::identity(2), &p).unwrap();
        assert!((w.w.get(0, 0) - C64::from(0.5)).norm() < 1e-15 && w.x.norm() < 1e-15);
        let w = weight_from_real(&CMatrix::from_real_diagonal(&[1.0, 0.0]), &p).unwrap();
        assert!((w.w.get(0, 0) - C64::from(0.25)).norm() < 1e-15);
        assert!((w.x.get(0, 0) - C64::from(0.25)).norm() < 1e-15);
        let w = weight_from_real(&CMatrix::zeros(2, 2), &p).unwrap();
        assert!(w.w.norm() == 0.0 && w.x.norm() == 0.0);
        let bad = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(weight_from_real(&bad, &p), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn weighted_scalar_is_preserved() {
        let mut r = rng(32);
        let p = policy();
        for k in 1..=3 {
            let w_real = random_real_symmetric(&mut r, 2 * k);
            let a = random_cmatrix(&mut r, 2 * k, 2 * k).re();
            let cov = a.transpose() * a;
            let lhs = (&w_real * &cov).trace();
            let w = weight_from_real(&w_real, &p).unwrap();
            let rhs = (w.full() * to_complex(&cov).unwrap()).trace();
            assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn symmetric_wmse_forms_agree() {
        let p = policy();
        let mut r = rng(33);
        for (seed, k) in [(4, 1), (5, 2), (6, 3)] {
            let q = random_structured(seed, k);
            let w_real = random_real_symmetric(&mut r, 2 * k);
            let w = weight_from_real(&w_real, &p).unwrap();
            let b = wmse_bound_symmetric(&w, &q, &p).unwrap();
            assert!((b.trace_form - b.block_form).abs() <= 1e-9 * b.trace_form.abs().max(1.0));
        }
    }

    #[test]
    fn symmetric_wmse_examples() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.1, 0.0)).unwrap();
        let (e, n) = (c64(1.0, 0.0), c64(0.5, 0.0));
        let s = sqfim_pure_complex(&coherent(e, n), &q, &p).unwrap();
        let w0 = 0.7;
        let w = WeightBlocks::diagonal(CMatrix::from_real_diagonal(&[w0])).unwrap();
        let (a, b) = (e.norm_sqr(), n.norm_sqr());
        let expected = (a + b) / (2.0 * (a - b) * (a - b)) * 2.0 * w0;
        let got = wmse_bound_symmetric(&w, &s, &p).unwrap();
        assert!((got.trace_form - expected).abs() <= 1e-8);

        let mut r = rng(9);
        let j = random_psd(&mut r, 2) + CMatrix::identity(2);
        let qb = QfimBlocks::conjugate_structured(Kind::Symmetric, j.clone(), CMatrix::zeros(2, 2)).unwrap();
        let wi = WeightBlocks::diagonal(CMatrix::identity(2)).unwrap();
        let got = wmse_bound_symmetric(&wi, &qb, &p).unwrap();
        assert!((got.trace_form - 2.0 * j.inverse().unwrap().trace().re).abs() <= 1e-10);

        let wz = WeightBlocks::diagonal(CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(wmse_bound_symmetric(&wz, &qb, &p).unwrap().trace_form, 0.0);
    }

    #[test]
    fn right_wmse_coherent_relation_and_real_route() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.2, -0.1)).unwrap();
        for (e, n, wz, x) in [
            (c64(1.0, 0.0), c64(0.0, 0.0), 1.0, c64(0.0, 0.0)),
            (c64(0.8, 0.3), c64(0.2, -0.4), 0.5, c64(0.0, 0.0)),
            (c64(0.8, 0.3), c64(0.2, -0.4), 0.5, c64(0.1, 0.2)),
        ] {
            let m = coherent(e, n);
            let s = sqfim_pure_complex(&m, &q, &p).unwrap();
            let inv = rqfim_inv_pure(&m, &q, &p).unwrap();
            let w = WeightBlocks::new(CMatrix::from_real_diagonal(&[wz]), CMatrix::from_diagonal(&[x]), &p).unwrap();
            let ws = wmse_bound_symmetric(&w, &s, &p).unwrap().trace_form;
            let wr = wmse_bound_right(&w, &inv, &p).unwrap();
            if x.norm() == 0.0 {
                let imb = (e.norm_sqr() - n.norm_sqr()).abs();
                assert!((wr - ws - wz / imb).abs() <= 1e-8, "{wr} {ws}");
            }

            let w_real = from_complex(&w.full()).unwrap().scale_real(4.0);
            let r_real = real_inverse_from_complex(&inv).unwrap();
            let wr_real = wmse_bound_right_real(&w_real, &r_real, &p).unwrap();
            assert!((wr - wr_real).abs() <= 1e-8, "{wr} vs {wr_real}");
        }
        let zero = WeightBlocks::diagonal(CMatrix::zeros(1, 1)).unwrap();
        assert_eq!(wmse_bound_right(&zero, &CMatrix::identity(2), &p).unwrap(), 0.0);
    }

    #[test]
    fn right_wmse_equals_symmetric_when_k_vanishes() {
        let p = policy();
        let mut r = rng(10);
        let q = random_structured(11, 2);
        let w = weight_from_real(&(random_psd(&mut r, 4).re() + CMatrix::identity(4)), &p).unwrap();
        let ws = wmse_bound_symmetric(&w, &q, &p).unwrap().trace_form;
        let wr = wmse_bound_right(&w, &q.full().inverse().unwrap(), &p).unwrap();
        assert!((ws - wr).abs() <= 1e-9 * ws.abs().max(1.0));
    }

    #[test]
    fn attainability_examples() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.3, 0.2)).unwrap();
        let balanced = attainability(&coherent(c64(1.0, 0.0), c64(0.0, 1.0)), &q, &p).unwrap();
        assert!(balanced.max_abs() <= 1e-8);
        let vac = attainability(&coherent(c64(1.0, 0.0), c64(0.0, 0.0)), &q, &p).unwrap();
        assert!((vac.get(0, 1) - C64::from(-4.0)).norm() <= 1e-8, "{vac:?}");
        assert!((vac.get(1, 0) - C64::from(4.0)).norm() <= 1e-8);

        let two = CoherentModel::new(
            CoherentKey::new(vec![(c64(1.0, 0.0), c64(0.0, 0.0)), (c64(0.0, 0.0), c64(1.0, 0.0))]).unwrap(),
            FockConfig::new(20).unwrap(),
        );
        let c = attainability(&two, &q, &p).unwrap();
        assert!(c.max_abs() <= 1e-8);
    }

    #[test]
    fn singular_bound_iff_attainable_for_coherent() {
        let p = policy();
        let q = ParamPoint::scalar(c64(0.1, 0.1)).unwrap();
        for (e, n) in [(1.0, 1.0), (1.0, 0.5), (0.5, 0.5), (0.2, 0.9)] {
            let m = coherent(c64(e, 0.0), c64(0.0, n));
            let s = sqfim_pure_complex(&m, &q, &p).unwrap();
            let singular = crb_covariance(&s, &identity_jacobian(1), &p).is_err();
            let c = attainability(&m, &q, &p).unwrap();
            assert_eq!(singular, is_attainable(&c, s.full().norm(), &p));
        }
    }

    #[test]
    fn dominance_examples() {
        let p = policy();
        let quantum = CMatrix::identity(2).scale_real(2.0);
        assert!(fim_dominance(&CMatrix::zeros(2, 2), &quantum, 1e-12, &p).unwrap().holds);
        assert!(!fim_dominance(&quantum.scale_real(2.0), &quantum, 1e-12, &p).unwrap().holds);
    }
}
