use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Ket, C64};
use crate::param::ParamPoint;
use crate::testing::random_cmatrix;

use super::{DensityModel, PureModel};

fn check(k: usize, p: &ParamPoint) -> Result<()> {
    if p.len() == k {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            expected: format!("{k} parameters"),
            found: format!("{}", p.len()),
        })
    }
}

/// Random full-rank family `ρ ∝ S(θ)S(θ)† + δI` with
/// `S(θ) = A₀ + Σ_j (θ_j A_j + θ*_j B_j + |θ_j|² C_j)`.
#[derive(Debug, Clone)]
pub struct RandomDensityModel {
    dim: usize,
    a0: CMatrix,
    terms: Vec<[CMatrix; 3]>,
    delta: f64,
}

impl RandomDensityModel {
    pub fn new<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize, delta: f64) -> Self {
        let a0 = random_cmatrix(rng, dim, dim);
        let terms = (0..k)
            .map(|_| {
                [
                    random_cmatrix(rng, dim, dim).scale_real(0.5),
                    random_cmatrix(rng, dim, dim).scale_real(0.5),
                    random_cmatrix(rng, dim, dim).scale_real(0.2),
                ]
            })
            .collect();
        Self { dim, a0, terms, delta }
    }

    fn s(&self, p: &ParamPoint) -> CMatrix {
        let mut s = self.a0.clone();
        for (t, z) in self.terms.iter().zip(p.theta()) {
            s = s + t[0].scale(*z) + t[1].scale(z.conj()) + t[2].scale_real(z.norm_sqr());
        }
        s
    }

    fn unnormalized(&self, s: &CMatrix) -> CMatrix {
        s * s.adjoint() + CMatrix::identity(self.dim).scale_real(self.delta)
    }
}

impl DensityModel for RandomDensityModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_params(&self) -> usize {
        self.terms.len()
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix> {
        check(self.num_params(), p)?;
        let n = self.unnormalized(&self.s(p));
        let t = n.trace().re;
        Ok(n.scale_real(1.0 / t))
    }

    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(CMatrix, CMatrix)>> {
        if check(self.num_params(), p).is_err() || j >= self.num_params() {
            return None;
        }
        let z = p.theta()[j];
        let s = self.s(p);
        let n = self.unnormalized(&s);
        let t = n.trace().re;
        let t_ = &self.terms[j];
        let sa = &t_[0] + t_[2].scale(z.conj());
        let sb = &t_[1] + t_[2].scale(z);
        let dn = &sa * s.adjoint() + &s * sb.adjoint();
        let dnc = &sb * s.adjoint() + &s * sa.adjoint();
        let d = |dn: &CMatrix| dn.scale_real(1.0 / t) - n.scale(dn.trace() / (t * t));
        Some(Ok((d(&dn), d(&dnc))))
    }
}

/// Random pure family `ψ = u/‖u‖` with `u(θ) = v₀ + Σ_j (θ_j v_j + θ*_j w_j + |θ_j|² c_j)`.
#[derive(Debug, Clone)]
pub struct RandomPureModel {
    v0: Ket,
    terms: Vec<[Ket; 3]>,
}

fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Ket {
    random_cmatrix(rng, dim, 1).column(0).scale(C64::from(scale))
}

impl RandomPureModel {
    pub fn new<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Self {
        let v0 = random_ket(rng, dim, 1.0);
        let terms = (0..k)
            .map(|_| [random_ket(rng, dim, 0.5), random_ket(rng, dim, 0.5), random_ket(rng, dim, 0.2)])
            .collect();
        Self { v0, terms }
    }

    fn u(&self, p: &ParamPoint) -> Ket {
        let mut u = self.v0.clone();
        for (t, z) in self.terms.iter().zip(p.theta()) {
            u = u.axpy(*z, &t[0]).axpy(z.conj(), &t[1]).axpy(C64::from(z.norm_sqr()), &t[2]);
        }
        u
    }
}

impl PureModel for RandomPureModel {
    fn dim(&self) -> usize {
        self.v0.len()
    }

    fn num_params(&self) -> usize {
        self.terms.len()
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<Ket> {
        check(self.num_params(), p)?;
        let u = self.u(p);
        Ok(u.scale(C64::from(1.0 / u.norm())))
    }

    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(Ket, Ket)>> {
        if check(self.num_params(), p).is_err() || j >= self.num_params() {
            return None;
        }
        let z = p.theta()[j];
        let u = self.u(p);
        let n = u.norm();
        let t = &self.terms[j];
        let ua = t[0].axpy(z.conj(), &t[2]);
        let ub = t[1].axpy(z, &t[2]);
        let dn = (ub.inner(&u) + u.inner(&ua)) / (2.0 * n);
        let dnc = (ua.inner(&u) + u.inner(&ub)) / (2.0 * n);
        let d = |du: &Ket, dn: C64| du.scale(C64::from(1.0 / n)).axpy(-dn / (n * n), &u);
        Some(Ok((d(&ua, dn), d(&ub, dnc))))
    }
}
