use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::param::ParamPoint;

use super::DensityModel;

/// Affine Bloch map `r(θ) = offset + Σ_i columns[i]·θ̄_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub offset: [f64; 3],
    /// One Bloch direction per real parameter: all `Re θ_j` first, then all `Im θ_j`.
    pub columns: Vec<[f64; 3]>,
}

impl QubitSpec {
    /// `r = (Re θ, Im θ, 0)·scale`.
    pub fn planar(scale: f64) -> Self {
        Self {
            offset: [0.0; 3],
            columns: vec![[scale, 0.0, 0.0], [0.0, scale, 0.0]],
        }
    }
}

/// `ρ = ½(I + r(θ)·σ)`.
#[derive(Debug, Clone)]
pub struct QubitModel {
    spec: QubitSpec,
}

/// Builds the qubit family; the map needs an even number of columns.
pub fn builtin_qubit_model(spec: QubitSpec) -> Result<QubitModel> {
    if spec.columns.is_empty() || !spec.columns.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "qubit spec needs 2k Bloch columns, got {}",
            spec.columns.len()
        )));
    }
    if spec.offset.iter().chain(spec.columns.iter().flatten()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    Ok(QubitModel { spec })
}

fn pauli_combination(r: [f64; 3]) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C64::from(r[2]),
        (1, 1) => C64::from(-r[2]),
        (0, 1) => C64::new(r[0], -r[1]),
        _ => C64::new(r[0], r[1]),
    })
}

impl QubitModel {
    pub fn spec(&self) -> &QubitSpec {
        &self.spec
    }

    pub fn bloch(&self, p: &ParamPoint) -> [f64; 3] {
        let bar = p.to_real_rep();
        let mut r = self.spec.offset;
        for (c, x) in self.spec.columns.iter().zip(bar.bar()) {
            for a in 0..3 {
                r[a] += c[a] * x;
            }
        }
        r
    }
}

impl DensityModel for QubitModel {
    fn dim(&self) -> usize {
        2
    }

    fn num_params(&self) -> usize {
        self.spec.columns.len() / 2
    }

    fn evaluate(&self, p: &ParamPoint) -> Result<CMatrix> {
        if p.len() != self.num_params() {
            return Err(Error::SizeMismatch {
                expected: format!("{} parameters", self.num_params()),
                found: format!("{}", p.len()),
            });
        }
        let r = self.bloch(p);
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm >= 1.0 {
            return Err(Error::BlochOverflow(norm));
        }
        Ok((CMatrix::identity(2) + pauli_combination(r)).scale_real(0.5))
    }

    fn analytic_derivs(&self, p: &ParamPoint, j: usize) -> Option<Result<(CMatrix, CMatrix)>> {
        let k = self.num_params();
        if j >= k || p.len() != k {
            return None;
        }
        let da = pauli_combination(self.spec.columns[j]).scale_real(0.5);
        let db = pauli_combination(self.spec.columns[k + j]).scale_real(0.5);
        let i = C64::new(0.0, 1.0);
        let dz = (&da - db.scale(i)).scale_real(0.5);
        let dzc = (&da + db.scale(i)).scale_real(0.5);
        Some(Ok((dz, dzc)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, eigh};
    use crate::models::{density_derivs, validate_density};
    use crate::param::{wirtinger_derivs, FdPolicy};
    use crate::policy::NumericPolicy;

    #[test]
    fn origin_is_maximally_mixed() {
        let m = builtin_qubit_model(QubitSpec::planar(0.5)).unwrap();
        let rho = m.evaluate(&ParamPoint::scalar(c64(0.0, 0.0)).unwrap()).unwrap();
        assert!(rho.distance(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn planar_eigenvalues() {
        let m = builtin_qubit_model(QubitSpec::planar(0.5)).unwrap();
        let rho = m.evaluate(&ParamPoint::scalar(c64(0.4, 0.0)).unwrap()).unwrap();
        let ev = eigh(&rho).unwrap().values;
        assert!((ev[0] - 0.4).abs() < 1e-14 && (ev[1] - 0.6).abs() < 1e-14);
        validate_density(&rho, &NumericPolicy::default()).unwrap();
        assert_eq!(rho.hermitian_deviation(), 0.0);
        assert_eq!(rho.trace(), C64::from(1.0));
    }

    #[test]
    fn overflow_is_rejected() {
        let m = builtin_qubit_model(QubitSpec::planar(0.5)).unwrap();
        assert!(matches!(
            m.evaluate(&ParamPoint::scalar(c64(2.0, 0.1)).unwrap()),
            Err(Error::BlochOverflow(_))
        ));
        assert!(builtin_qubit_model(QubitSpec {
            offset: [0.0; 3],
            columns: vec![[1.0, 0.0, 0.0]],
        })
        .is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let spec = QubitSpec {
            offset: [0.1, -0.2, 0.05],
            columns: vec![[0.2, 0.1, 0.0], [0.0, 0.1, 0.3], [0.1, 0.0, -0.2], [-0.1, 0.2, 0.1]],
        };
        let m = builtin_qubit_model(spec).unwrap();
        let p = ParamPoint::new(vec![c64(0.3, -0.2), c64(-0.1, 0.4)]).unwrap();
        let fd = FdPolicy::default();
        for j in 0..2 {
            let exact = density_derivs(&m, &p, j, &fd).unwrap();
            let num = wirtinger_derivs(|q: &ParamPoint| m.evaluate(q), &p, j, &fd).unwrap();
            assert!(exact.0.distance(&num.0) < 1e-9);
            assert!(exact.1.distance(&num.1) < 1e-9);
        }
    }
}
