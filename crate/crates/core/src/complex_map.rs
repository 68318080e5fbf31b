//! The map `⟨G⟩ = 2 M_{2d}⁻¹ G M_{2k}` between real-representation matrices and
//! conjugate-extension matrices, and a randomized check of its algebraic rules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig, matrix_function, min_eigenvalue, CMatrix, C64, I};
use crate::policy::NumericPolicy;
use crate::testing::{random_cmatrix, random_complex, random_hermitian, random_psd};

/// Half-dimensions of a `2d × 2k` matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapDims {
    pub d: usize,
    pub k: usize,
}

impl MapDims {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidArgument("map dimensions must be at least 1".into()));
        }
        Ok(Self { d, k })
    }
}

/// `M_{2l} = ½[[I, I], [−iI, iI]]`.
pub fn m_matrix(l: usize) -> CMatrix {
    let h = C64::from(0.5);
    CMatrix::from_fn(2 * l, 2 * l, |r, c| {
        if r % l != c % l {
            return C64::from(0.0);
        }
        match (r < l, c < l) {
            (true, _) => h,
            (false, true) => -I * h,
            (false, false) => I * h,
        }
    })
}

fn halves(g: &CMatrix) -> Result<(usize, usize)> {
    let (r, c) = g.shape();
    if r % 2 != 0 || c % 2 != 0 || r == 0 || c == 0 {
        return Err(Error::OddDimension { rows: r, cols: c });
    }
    Ok((r / 2, c / 2))
}

/// `⟨G⟩ = 2 M_{2d}⁻¹ G M_{2k} = 4 M_{2d}† G M_{2k}`.
pub fn to_complex(g: &CMatrix) -> Result<CMatrix> {
    let (d, k) = halves(g)?;
    Ok((m_matrix(d).adjoint() * g * m_matrix(k)).scale_real(4.0))
}

/// Inverse of [`to_complex`]: `M_{2d} H M_{2k}†`.
pub fn from_complex(h: &CMatrix) -> Result<CMatrix> {
    let (d, k) = halves(h)?;
    Ok(m_matrix(d) * h * m_matrix(k).adjoint())
}

/// Entry-wise block expansion of `⟨G⟩`.
pub fn to_complex_blocks(g: &CMatrix) -> Result<CMatrix> {
    let (d, k) = halves(g)?;
    let g11 = g.block(0, 0, d, k);
    let g12 = g.block(0, k, d, k);
    let g21 = g.block(d, 0, d, k);
    let g22 = g.block(d, k, d, k);
    let a = &g11 + g21.scale(I);
    let b = &g12 + g22.scale(I);
    let c = &g11 - g21.scale(I);
    let e = &g12 - g22.scale(I);
    CMatrix::from_blocks(
        &(&a - b.scale(I)),
        &(&a + b.scale(I)),
        &(&c - e.scale(I)),
        &(&c + e.scale(I)),
    )
}

/// Block swap `[[0, I], [I, 0]]` of size `2·half`.
pub fn sigma(half: usize) -> CMatrix {
    CMatrix::from_fn(2 * half, 2 * half, |r, c| {
        if (r + half) % (2 * half) == c {
            C64::from(1.0)
        } else {
            C64::from(0.0)
        }
    })
}

pub const PROPERTY_NAMES: [&str; 9] = [
    "linearity",
    "hermiticity",
    "inverse",
    "positivity",
    "adjoint",
    "product",
    "trace",
    "spectral_function",
    "conjugation",
];

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub max_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapPropertyReport {
    pub trials: usize,
    pub dims: MapDims,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
    /// Ill-conditioned draws that were replaced.
    pub resampled: usize,
}

impl MapPropertyReport {
    pub fn max_violation(&self) -> f64 {
        self.properties.iter().map(|p| p.max_violation).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.properties.iter().all(|p| p.max_violation <= tol)
    }
}

fn rel(lhs: &CMatrix, rhs: &CMatrix) -> f64 {
    lhs.distance(rhs) / lhs.norm().max(rhs.norm()).max(1.0)
}

fn rel_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Hook type for checking a map other than [`to_complex`].
pub type MapFn<'a> = dyn Fn(&CMatrix) -> Result<CMatrix> + Sync + 'a;

/// Checks the nine map identities on `trials` random draws.
pub fn verify_map_properties(trials: usize, dims: MapDims, seed: u64) -> Result<MapPropertyReport> {
    verify_map_properties_with(trials, dims, seed, &to_complex)
}

/// As [`verify_map_properties`] with a caller-supplied map.
///
/// Trial `t` draws from a ChaCha8 stream `t` keyed by `seed`, so the report does
/// not depend on scheduling.
pub fn verify_map_properties_with(
    trials: usize,
    dims: MapDims,
    seed: u64,
    map: &MapFn<'_>,
) -> Result<MapPropertyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let policy = NumericPolicy::default();
    let per_trial: Vec<Result<([f64; 9], usize)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            one_trial(&mut rng, dims, map, &policy)
        })
        .collect();

    let mut max = [0.0f64; 9];
    let mut resampled = 0;
    for r in per_trial {
        let (v, n) = r?;
        resampled += n;
        for (m, x) in max.iter_mut().zip(v) {
            // NaN counts as a failure
            *m = if x.is_nan() { f64::INFINITY } else { m.max(x) };
        }
    }
    Ok(MapPropertyReport {
        trials,
        dims,
        seed,
        properties: PROPERTY_NAMES
            .iter()
            .zip(max)
            .map(|(&name, max_violation)| PropertyResult { name, max_violation })
            .collect(),
        resampled,
    })
}

fn well_conditioned(g: &CMatrix, limit: f64) -> bool {
    let sv = g.inner().clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    min > 0.0 && max / min <= limit
}

fn one_trial(
    rng: &mut ChaCha8Rng,
    dims: MapDims,
    map: &MapFn<'_>,
    policy: &NumericPolicy,
) -> Result<([f64; 9], usize)> {
    let (d2, k2) = (2 * dims.d, 2 * dims.k);
    let mut v = [0.0; 9];
    let mut resampled = 0;

    // (i) linearity
    let g = random_cmatrix(rng, d2, k2);
    let h = random_cmatrix(rng, d2, k2);
    let lambda = random_complex(rng);
    let lhs = map(&(&g + h.scale(lambda)))?;
    let rhs = map(&g)? + map(&h)?.scale(lambda);
    v[0] = rel(&lhs, &rhs);

    // (ii) G = G† ⇔ ⟨G⟩ = ⟨G⟩†, checked quantitatively in both directions
    let herm = random_hermitian(rng, d2);
    let mh = map(&herm)?;
    let generic = random_cmatrix(rng, d2, d2);
    let mg = map(&generic)?;
    let a = mh.hermitian_deviation() / mh.norm().max(1.0);
    let b = rel_scalar(mg.hermitian_deviation(), 2.0 * generic.hermitian_deviation());
    v[1] = a.max(b);

    // (iii) ⟨G⟩⁻¹ = ¼⟨G⁻¹⟩
    let sq = loop {
        let s = random_cmatrix(rng, d2, d2);
        if well_conditioned(&s, policy.resample_condition) {
            break s;
        }
        resampled += 1;
    };
    let lhs = map(&sq)?.inverse()?;
    let rhs = map(&sq.inverse()?)?.scale_real(0.25);
    v[2] = rel(&lhs, &rhs);

    // (iv) G ≥ 0 ⇔ ⟨G⟩ ≥ 0 via λ_min(⟨G⟩) = 2 λ_min(G)
    let psd = random_psd(rng, d2);
    let indefinite = random_hermitian(rng, d2);
    let mut worst: f64 = 0.0;
    for s in [&psd, &indefinite] {
        let ms = map(s)?;
        if !ms.is_hermitian(policy.hermitian_tol) {
            worst = f64::INFINITY;
            continue;
        }
        let lg = min_eigenvalue(s)?;
        let lm = min_eigenvalue(&ms)?;
        let tol = policy.hermitian_tol * ms.norm().max(1.0);
        let sign_mismatch = (lg >= -tol) != (lm >= -tol);
        let r = (lm - 2.0 * lg).abs() / ms.norm().max(1.0);
        worst = worst.max(if sign_mismatch { f64::INFINITY } else { r });
    }
    v[3] = worst;

    // (v) ⟨G†⟩ = ⟨G⟩†
    let ga = random_cmatrix(rng, d2, k2);
    v[4] = rel(&map(&ga.adjoint())?, &map(&ga)?.adjoint());

    // (vi) ⟨G₁G₂⟩ = ½⟨G₁⟩⟨G₂⟩
    let g1 = random_cmatrix(rng, d2, k2);
    let g2 = random_cmatrix(rng, k2, d2);
    v[5] = rel(&map(&(&g1 * &g2))?, &(map(&g1)? * map(&g2)?).scale_real(0.5));

    // (vii) Tr G = ½ Tr⟨G⟩
    let gt = random_cmatrix(rng, d2, d2);
    let t1 = gt.trace();
    let t2 = map(&gt)?.trace() * 0.5;
    v[6] = (t1 - t2).norm() / t1.norm().max(t2.norm()).max(1.0);

    // (viii) ⟨f(G)⟩ = 2 f(½⟨G⟩)
    let gf = loop {
        let s = random_cmatrix(rng, d2, d2);
        if eig(&s)?.condition <= policy.resample_condition {
            break s;
        }
        resampled += 1;
    };
    let f = |z: C64| z.exp();
    let lhs = map(&matrix_function(&gf, f, policy)?)?;
    let half = map(&gf)?.scale_real(0.5);
    v[7] = match matrix_function(&half, f, policy) {
        Ok(fh) => rel(&lhs, &fh.scale_real(2.0)),
        Err(Error::DefectiveMatrix { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };

    // (ix) ⟨G*⟩ = σ_{2d} ⟨G⟩* σ_{2k}
    let gc = random_cmatrix(rng, d2, k2);
    let rhs = sigma(dims.d) * map(&gc)?.conj() * sigma(dims.k);
    v[8] = rel(&map(&gc.conj())?, &rhs);

    Ok((v, resampled))
}
