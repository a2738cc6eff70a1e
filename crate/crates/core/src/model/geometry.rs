use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::ModelError;

/// Flat 3-torus (R/2πZ)³ carrying the contact form
/// `a = cos(2z) dx − sin(2z) dy`.
///
/// With the flat metric this form satisfies `|a| = 1` and `da = 2 *a`, so the
/// metric is adapted. The conformal factor is carried as a constant and the
/// base connection may be shifted by a flat `i c_z dz` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactTorusGeometry {
    omega: f64,
    cz: f64,
}

pub const PERIOD: f64 = 2.0 * PI;
pub const TWIST: i32 = 2;
pub const OMEGA_MIN: f64 = 9.0 / 10.0;
pub const OMEGA_MAX: f64 = 10.0 / 9.0;

impl Default for ContactTorusGeometry {
    fn default() -> Self {
        ContactTorusGeometry { omega: 1.0, cz: 0.0 }
    }
}

impl ContactTorusGeometry {
    pub fn new(omega: f64, cz: f64) -> Result<Self, ModelError> {
        if !(OMEGA_MIN..=OMEGA_MAX).contains(&omega) {
            return Err(ModelError::ConformalFactor(omega));
        }
        if !cz.is_finite() {
            return Err(ModelError::NonFinite("c_z"));
        }
        Ok(ContactTorusGeometry { omega, cz })
    }

    pub fn with_cz(cz: f64) -> Self {
        ContactTorusGeometry { omega: 1.0, cz }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn cz(&self) -> f64 {
        self.cz
    }

    pub fn scalar_curvature(&self) -> f64 {
        0.0
    }

    /// Components `(a_x, a_y, a_z)` of the contact form at height `z`.
    pub fn contact_form(&self, z: f64) -> [f64; 3] {
        let phase = f64::from(TWIST) * z;
        [phase.cos(), -phase.sin(), 0.0]
    }

    /// Reeb field: the metric dual of `a` (unit length, `da(v, ·) = 0`).
    pub fn reeb(&self, z: f64) -> [f64; 3] {
        self.contact_form(z)
    }

    /// `da` as the antisymmetric component array `(da)_{ij}`.
    pub fn d_contact_form(&self, z: f64) -> [[f64; 3]; 3] {
        let w = f64::from(TWIST);
        let phase = w * z;
        // d(cos 2z dx) = -2 sin 2z dz∧dx,  d(-sin 2z dy) = -2 cos 2z dz∧dy
        let dz_dx = -w * phase.sin();
        let dz_dy = -w * phase.cos();
        let mut f = [[0.0; 3]; 3];
        f[2][0] = dz_dx;
        f[0][2] = -dz_dx;
        f[2][1] = dz_dy;
        f[1][2] = -dz_dy;
        f
    }

    /// Pointwise violation of `|a| = 1` and `da = 2 *a`.
    pub fn adaptedness_residual(&self, z: f64) -> f64 {
        let a = self.contact_form(z);
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let da = self.d_contact_form(z);
        // (*da)_l = (da)_{jk} over cyclic (l, j, k)
        let star_da = [da[1][2], da[2][0], da[0][1]];
        let hodge = (0..3).map(|l| (star_da[l] - 2.0 * a[l]).abs()).fold(0.0, f64::max);
        (norm - 1.0).abs().max(hodge)
    }

    /// Density of `a ∧ da` with respect to `dx dy dz`.
    pub fn contact_volume_density(&self, z: f64) -> f64 {
        let a = self.contact_form(z);
        let da = self.d_contact_form(z);
        let star_da = [da[1][2], da[2][0], da[0][1]];
        a[0] * star_da[0] + a[1] * star_da[1] + a[2] * star_da[2]
    }
}
