use crate::error::{Error, Result};
use crate::linalg::{Ket, C64};
use crate::param::ParamPoint;

use super::fock::{displacement, truncation_warning, FockConfig, TruncationWarning};
use super::PureModel;

/// Per-mode encoding weights `(ε_m, η_m)` in `α_m = ε_m z + η_m z*`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentKey {
    modes: Vec<(C64, C64)>,
}

impl CoherentKey {
    pub fn new(modes: Vec<(C64, C64)>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidArgument("a coherent key needs at least one mode".into()));
        }
        if modes
            .iter()
            .any(|(e, n)| !(e.re.is_finite() && e.im.is_finite() && n.re.is_finite() && n.im.is_finite()))
        {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        Ok(Self { modes })
    }

    pub fn single(eps: C64, eta: C64) -> Self {
        Self {
            modes: vec![(eps, eta)],
        }
    }

    pub fn modes(&self) -> &[(C64, C64)] {
        &self.modes
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn alphas(&self, z: C64) -> Vec<C64> {
        self.modes.iter().map(|&(e, n)| e * z + n * z.conj()).collect()
    }

    /// `Σ_m (|ε_m|² − |η_m|²)`.
    pub fn imbalance(&self) -> f64 {
        self.modes.iter().map(|(e, n)| e.norm_sqr() - n.norm_sqr()).sum()
    }
}

/// `|α₁⟩ ⊗ … ⊗ |α_M⟩` on a truncated Fock space, parametrized by one complex `z`.
#[derive(Debug, Clone)]
pub struct CoherentModel {
    key: CoherentKey,
    cfg: FockConfig,
}

struct ModeState {
    ket: Ket,
    dz: Ket,
    dzc: Ket,
}

impl CoherentModel {
    pub fn new(key: CoherentKey, cfg: FockConfig) -> Self {
        Self { key, cfg }
    }

    pub fn key(&self) -> &CoherentKey {
        &self.key
    }

    pub fn config(&self) -> FockConfig {
        self.cfg
    }

    pub fn warnings(&self, z: C64) -> Vec<TruncationWarning> {
        self.key
            .alphas(z)
            .into_iter()
            .filter_map(|a| truncation_warning(a, self.cfg))
            .collect()
    }

    fn z_of(&self, p: &ParamPoint) -> Result<C64> {
        match p.theta() {
            [z] => Ok(*z),
            t => Err(Error::SizeMismatch {
                expected: "1 parameter".into(),
                found: format!("{}", t.len()),
            }),
        }
    }

    fn modes(&self, z: C64) -> Result<Vec<ModeState>> {
        self.key
            .modes
            .iter()
            .map(|&(eps, eta)| {
                let alpha = eps * z + eta * z.conj();
                let d = displacement(alpha, self.cfg)?.operator;
                let vac = d.column(0);
                let one = d.column(1);
                let cz = (alpha * eta.conj() - alpha.conj() * eps) * -0.5;
                let czc = (alpha * eps.conj() - alpha.conj() * eta) * -0.5;
                Ok(ModeState {
                    dz: one.scale(eps).axpy(cz, &vac),
                    dzc: one.scale(eta).axpy(czc, &vac),
                    ket: vac,
                })
            })
            .collect()
    }
}

fn kron_all(kets: &[&Ket]) -> Ket {
    let mut out = kets[0].clone();
    for k in &kets[1..] {
        out = out.kron(k);
    }
    out
}

impl PureModel for CoherentModel {
    fn dim(&self) -> usize {
        self.cfg.truncation().pow(self.key.num_modes() as u32)
    }

    fn num_params(&self) -> usize {
        1
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<Ket> {
        let modes = self.modes(self.z_of(p)?)?;
        let kets: Vec<&Ket> = modes.iter().map(|m| &m.ket).collect();
        Ok(kron_all(&kets))
    }

    /// Product rule over modes of the single-mode derivatives
    /// `D(α)(ε a† − ½[αη* − α*ε])|0⟩` and `D(α)(η a† − ½[αε* − α*η])|0⟩`.
    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(Ket, Ket)>> {
        if j != 0 {
            return Some(Err(Error::InvalidArgument(format!("parameter index {j} out of range"))));
        }
        Some((|| {
            let modes = self.modes(self.z_of(p)?)?;
            let mut dz: Option<Ket> = None;
            let mut dzc: Option<Ket> = None;
            for m in 0..modes.len() {
                let pick = |sel: &dyn Fn(&ModeState) -> &Ket| {
                    let kets: Vec<&Ket> = modes
                        .iter()
                        .enumerate()
                        .map(|(i, s)| if i == m { sel(s) } else { &s.ket })
                        .collect();
                    kron_all(&kets)
                };
                let a = pick(&|s| &s.dz);
                let b = pick(&|s| &s.dzc);
                dz = Some(match dz {
                    None => a,
                    Some(acc) => acc.add(&a),
                });
                dzc = Some(match dzc {
                    None => b,
                    Some(acc) => acc.add(&b),
                });
            }
            Ok((dz.expect("at least one mode"), dzc.expect("at least one mode")))
        })())
    }
}
