use std::f64::consts::PI;

use super::{GeometryError, Mat3, Vec3, ANGLE_TOL};

/// Rotated copy of `W_κ = {(ρ cos θ, ρ sin θ) : ρ > 0, 0 < θ < κ} × ℝ`.
///
/// The edge is the image of the `x3` axis under `rotation`.
#[derive(Debug, Clone, PartialEq)]
pub struct WedgeSpec {
    kappa: f64,
    rotation: Mat3,
}

impl WedgeSpec {
    pub fn new(kappa: f64, rotation: Mat3) -> Result<Self, GeometryError> {
        if !(kappa > 0.0 && kappa < 2.0 * PI) || (kappa - PI).abs() < ANGLE_TOL {
            return Err(GeometryError::BadWedgeAngle(kappa));
        }
        let orth = (rotation.transpose() * rotation - Mat3::identity()).norm();
        if orth > 1e-12 || (rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(GeometryError::NotARotation);
        }
        Ok(WedgeSpec { kappa, rotation })
    }

    /// Unrotated wedge with its edge on the `x3` axis.
    pub fn standard(kappa: f64) -> Result<Self, GeometryError> {
        Self::new(kappa, Mat3::identity())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn is_convex(&self) -> bool {
        self.kappa < PI
    }

    pub fn to_local(&self, x: &Vec3) -> Vec3 {
        self.rotation.transpose() * x
    }

    pub fn to_global(&self, x: &Vec3) -> Vec3 {
        self.rotation * x
    }

    /// Cylindrical coordinates `(ρ, θ ∈ [0, 2π), z)` about the edge.
    pub fn cylindrical(&self, x: &Vec3) -> (f64, f64, f64) {
        let l = self.to_local(x);
        let rho = l.x.hypot(l.y);
        let mut theta = l.y.atan2(l.x);
        if theta < 0.0 {
            theta += 2.0 * PI;
        }
        (rho, theta, l.z)
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        let (rho, theta, _) = self.cylindrical(x);
        rho > 0.0 && theta > 0.0 && theta < self.kappa
    }

    pub fn dist_edge(&self, x: &Vec3) -> f64 {
        let l = self.to_local(x);
        l.x.hypot(l.y)
    }

    /// In-plane unit direction of face 0 (`θ = 0`) or face 1 (`θ = κ`), local frame.
    fn face_dir(&self, face: usize) -> (f64, f64) {
        if face == 0 {
            (1.0, 0.0)
        } else {
            (self.kappa.cos(), self.kappa.sin())
        }
    }

    /// Inward unit normal of face 0 or 1 in global coordinates.
    pub fn face_normal(&self, face: usize) -> Vec3 {
        let local = if face == 0 {
            Vec3::new(0.0, 1.0, 0.0)
        } else {
            Vec3::new(self.kappa.sin(), -self.kappa.cos(), 0.0)
        };
        self.to_global(&local)
    }

    /// Whether a point of the plane of `face` lies on the closed half-plane face.
    pub(crate) fn face_contains(&self, face: usize, p: &Vec3) -> bool {
        let l = self.to_local(p);
        let (c, s) = self.face_dir(face);
        l.x * c + l.y * s >= 0.0
    }

    pub fn dist_face(&self, face: usize, x: &Vec3) -> f64 {
        let l = self.to_local(x);
        let (c, s) = self.face_dir(face);
        let along = l.x * c + l.y * s;
        if along >= 0.0 {
            (l.y * c - l.x * s).abs()
        } else {
            l.x.hypot(l.y)
        }
    }

    pub fn dist_boundary(&self, x: &Vec3) -> f64 {
        self.dist_face(0, x).min(self.dist_face(1, x))
    }

    /// Unit bisector of the wedge opening, global frame.
    pub fn bisector(&self) -> Vec3 {
        let h = 0.5 * self.kappa;
        self.to_global(&Vec3::new(h.cos(), h.sin(), 0.0))
    }

    pub fn edge_direction(&self) -> Vec3 {
        self.to_global(&Vec3::z())
    }
}
