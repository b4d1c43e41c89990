use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::SdeError;
use crate::geometry::Mat3;

/// Piecewise-constant coefficient matrix `a(t)`. Piece `k` is active on
/// `[b_{k-1}, b_k)`, with `b_{-1} = -∞` and `b_m = +∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSchedule {
    breakpoints: Vec<f64>,
    matrices: Vec<Mat3>,
    sigmas: Vec<Mat3>,
    nu1: f64,
    nu2: f64,
}

/// On-disk form: `{"breakpoints": [...], "matrices": [[[..],[..],[..]], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub matrices: Vec<[[f64; 3]; 3]>,
}

fn to_mat(m: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| m[i][j])
}

fn from_mat(m: &Mat3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

impl CoefficientSchedule {
    pub fn new(breakpoints: Vec<f64>, matrices: Vec<Mat3>) -> Result<Self, SdeError> {
        if matrices.len() != breakpoints.len() + 1 {
            return Err(SdeError::BadSchedule(format!(
                "{} breakpoints need {} matrices, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                matrices.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SdeError::BadSchedule("breakpoints must be finite and strictly increasing".into()));
        }
        let mut nu1 = f64::INFINITY;
        let mut nu2 = 0.0f64;
        let mut sigmas = Vec::with_capacity(matrices.len());
        for (k, a) in matrices.iter().enumerate() {
            let asym = (a - a.transpose()).abs().max();
            if asym > 1e-12 * a.abs().max().max(1.0) {
                return Err(SdeError::NonSymmetric { piece: k, asymmetry: asym });
            }
            let sym = 0.5 * (a + a.transpose());
            let eig = SymmetricEigen::new(sym);
            let lo = eig.eigenvalues.min();
            if !(lo > 0.0) {
                return Err(SdeError::NotPositiveDefinite { piece: k, min_eigenvalue: lo });
            }
            nu1 = nu1.min(lo);
            nu2 = nu2.max(eig.eigenvalues.max());
            let root = eig.eigenvalues.map(|l| (2.0 * l).sqrt());
            sigmas.push(eig.eigenvectors * Mat3::from_diagonal(&root) * eig.eigenvectors.transpose());
        }
        Ok(CoefficientSchedule {
            breakpoints,
            matrices,
            sigmas,
            nu1,
            nu2,
        })
    }

    pub fn constant(a: Mat3) -> Result<Self, SdeError> {
        Self::new(Vec::new(), vec![a])
    }

    /// The heat operator, `a = I`.
    pub fn heat() -> Self {
        Self::constant(Mat3::identity()).expect("identity is positive definite")
    }

    /// `c I` before `at`, `d I` from `at` on.
    pub fn two_piece(at: f64, c: f64, d: f64) -> Result<Self, SdeError> {
        Self::new(vec![at], vec![Mat3::identity() * c, Mat3::identity() * d])
    }

    pub fn from_spec(spec: &ScheduleSpec) -> Result<Self, SdeError> {
        Self::new(spec.breakpoints.clone(), spec.matrices.iter().map(to_mat).collect())
    }

    pub fn to_spec(&self) -> ScheduleSpec {
        ScheduleSpec {
            breakpoints: self.breakpoints.clone(),
            matrices: self.matrices.iter().map(from_mat).collect(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn matrices(&self) -> &[Mat3] {
        &self.matrices
    }

    /// `σ_k` with `σ_k σ_kᵀ = 2 a_k`, symmetric.
    pub fn diffusion_factors(&self) -> &[Mat3] {
        &self.sigmas
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    pub fn num_pieces(&self) -> usize {
        self.matrices.len()
    }

    /// Index of the piece active at `t`.
    pub fn piece_at(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    pub fn a_at(&self, t: f64) -> &Mat3 {
        &self.matrices[self.piece_at(t)]
    }

    pub fn sigma_at(&self, t: f64) -> &Mat3 {
        &self.sigmas[self.piece_at(t)]
    }

    /// `(start, end, piece)` for each piece meeting `[s, t]`, in time order.
    pub fn pieces_between(&self, s: f64, t: f64) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        let mut start = s;
        let mut k = self.piece_at(s);
        while start < t {
            let end = self.breakpoints.get(k).copied().unwrap_or(f64::INFINITY).min(t);
            if end > start {
                out.push((start, end, k));
            }
            start = end;
            k += 1;
        }
        out
    }

    /// `∫_s^t a(u) du`.
    pub fn integral(&self, s: f64, t: f64) -> Mat3 {
        self.pieces_between(s, t)
            .iter()
            .fold(Mat3::zeros(), |acc, &(a, b, k)| acc + self.matrices[k] * (b - a))
    }

    /// Schedule of the adjoint operator, `ã(t) = a(-t)`.
    pub fn reversed(&self) -> Self {
        let breakpoints = self.breakpoints.iter().rev().map(|b| -b).collect();
        let matrices = self.matrices.iter().rev().copied().collect();
        Self::new(breakpoints, matrices).expect("reversal keeps pieces valid")
    }

    /// `Some(c)` when `a = c I` for all time.
    pub fn isotropic_constant(&self) -> Option<f64> {
        if self.matrices.len() != 1 {
            return None;
        }
        let a = &self.matrices[0];
        let c = a[(0, 0)];
        ((a - Mat3::identity() * c).abs().max() <= 1e-14 * c).then_some(c)
    }
}

/// Named schedules: `heat`, `anisotropic` (diag(1, 1, 4)), `two_piece`
/// (`I` before 0, `3I` after).
pub fn builtin_schedule(name: &str) -> Result<CoefficientSchedule, SdeError> {
    match name {
        "heat" => Ok(CoefficientSchedule::heat()),
        "anisotropic" => CoefficientSchedule::constant(Mat3::from_diagonal(&crate::geometry::Vec3::new(1.0, 1.0, 4.0))),
        "two_piece" => CoefficientSchedule::two_piece(0.0, 1.0, 3.0),
        other => Err(SdeError::BadSchedule(format!("unknown builtin schedule '{other}'"))),
    }
}

/// Parses a schedule file; errors name the offending field.
pub fn parse_schedule_json(text: &str) -> Result<CoefficientSchedule, SdeError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ScheduleSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| SdeError::BadSchedule(format!("field '{}': {}", e.path(), e.inner())))?;
    CoefficientSchedule::from_spec(&spec)
}

/// `builtin:<name>` or a path to a JSON schedule file.
pub fn load_schedule(arg: &str) -> Result<CoefficientSchedule, SdeError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin_schedule(name);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| SdeError::BadSchedule(format!("cannot read '{arg}': {e}")))?;
    parse_schedule_json(&text)
}
