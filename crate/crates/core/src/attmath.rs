//! Fixed-size attitude math.
//!
//! Vectors and matrices are plain `nalgebra` statics. Everything else here
//! (the Jacobi eigensolvers, Euler conversions, polar orthonormalization and
//! the rotation log map) is written out so that its numerical behaviour is
//! pinned down and testable.
//!
//! Frame conventions used throughout the crate:
//! - navigation frame `n` is East-North-Up,
//! - body frame `b` is Right-Forward-Up,
//! - `C_b^n = Rz(yaw) * Rx(pitch) * Ry(roll)`, yaw positive counterclockwise
//!   about Up, extracted yaw in `(-pi, pi]`.

use nalgebra::{Matrix3, Matrix4, UnitQuaternion, Vector3, Vector4};

use crate::error::AlignError;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_JACOBI_SWEEPS: usize = 15;

/// Pitch closer than this to +-pi/2 is reported as gimbal proximity.
pub const GIMBAL_MARGIN: f64 = 1e-6;

/// Attitude as Euler angles, radians.
///
/// `pitch` rotates about body x (Right), `roll` about body y (Forward),
/// `yaw` about navigation z (Up).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(pitch: f64, roll: f64, yaw: f64) -> Self {
        Self { pitch, roll, yaw }
    }

    pub fn from_degrees(pitch: f64, roll: f64, yaw: f64) -> Self {
        Self::new(pitch.to_radians(), roll.to_radians(), yaw.to_radians())
    }

    pub fn to_degrees(self) -> [f64; 3] {
        [self.pitch.to_degrees(), self.roll.to_degrees(), self.yaw.to_degrees()]
    }
}

/// Symmetric eigendecomposition result, eigenvalues in descending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEig3 {
    pub values: [f64; 3],
    /// Column `j` is the unit eigenvector of `values[j]`.
    pub vectors: Mat3,
}

impl SymEig3 {
    pub fn vector(&self, j: usize) -> Vec3 {
        self.vectors.column(j).into_owned()
    }
}

/// Cross-product matrix: `skew(v) * u == v.cross(&u)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `C_b^n` for the given Euler angles.
pub fn euler_to_dcm(e: &EulerAngles) -> Mat3 {
    rot_z(e.yaw) * rot_x(e.pitch) * rot_y(e.roll)
}

/// Inverse of [`euler_to_dcm`].
pub fn dcm_to_euler(c: &Mat3) -> Result<EulerAngles, AlignError> {
    let residual = orthonormality_residual(c);
    if residual > 1e-9 {
        return Err(AlignError::NotOrthonormal { residual });
    }
    let pitch = c[(2, 1)].clamp(-1.0, 1.0).asin();
    if std::f64::consts::FRAC_PI_2 - pitch.abs() < GIMBAL_MARGIN {
        return Err(AlignError::GimbalProximity { pitch });
    }
    let roll = (-c[(2, 0)]).atan2(c[(2, 2)]);
    let mut yaw = (-c[(0, 1)]).atan2(c[(1, 1)]);
    if yaw <= -std::f64::consts::PI {
        yaw += 2.0 * std::f64::consts::PI;
    }
    Ok(EulerAngles { pitch, roll, yaw })
}

/// `||C^T C - I||_F`.
pub fn orthonormality_residual(c: &Mat3) -> f64 {
    (c.transpose() * c - Mat3::identity()).norm()
}

/// Rotation matrix `exp([phi x])` by the Rodrigues formula.
///
/// Uses `2 sin^2(theta/2)` for the second-order term so tiny angles (earth
/// rate over a few seconds) keep full relative precision.
pub fn rotation_from_vector(phi: &Vec3) -> Mat3 {
    let theta = phi.norm();
    if theta == 0.0 {
        return Mat3::identity();
    }
    let k = skew(&(phi / theta));
    let half = 0.5 * theta;
    Mat3::identity() + k * theta.sin() + k * k * (2.0 * half.sin() * half.sin())
}

/// Quaternion of a proper rotation matrix (Shepperd's method), `w >= 0`.
pub fn dcm_to_quat(c: &Mat3) -> Quat {
    let tr = c.trace();
    let d = [c[(0, 0)], c[(1, 1)], c[(2, 2)]];
    let (w, x, y, z);
    if tr >= d[0] && tr >= d[1] && tr >= d[2] {
        let s = 2.0 * (1.0 + tr).sqrt();
        w = 0.25 * s;
        x = (c[(2, 1)] - c[(1, 2)]) / s;
        y = (c[(0, 2)] - c[(2, 0)]) / s;
        z = (c[(1, 0)] - c[(0, 1)]) / s;
    } else if d[0] >= d[1] && d[0] >= d[2] {
        let s = 2.0 * (1.0 + d[0] - d[1] - d[2]).sqrt();
        w = (c[(2, 1)] - c[(1, 2)]) / s;
        x = 0.25 * s;
        y = (c[(0, 1)] + c[(1, 0)]) / s;
        z = (c[(0, 2)] + c[(2, 0)]) / s;
    } else if d[1] >= d[2] {
        let s = 2.0 * (1.0 - d[0] + d[1] - d[2]).sqrt();
        w = (c[(0, 2)] - c[(2, 0)]) / s;
        x = (c[(0, 1)] + c[(1, 0)]) / s;
        y = 0.25 * s;
        z = (c[(1, 2)] + c[(2, 1)]) / s;
    } else {
        let s = 2.0 * (1.0 - d[0] - d[1] + d[2]).sqrt();
        w = (c[(1, 0)] - c[(0, 1)]) / s;
        x = (c[(0, 2)] + c[(2, 0)]) / s;
        y = (c[(1, 2)] + c[(2, 1)]) / s;
        z = 0.25 * s;
    }
    let q = nalgebra::Quaternion::new(w, x, y, z);
    let q = if w < 0.0 { -q } else { q };
    UnitQuaternion::from_quaternion(q)
}

/// Exact log map of a rotation matrix: the rotation vector `phi` with
/// `rotation_from_vector(phi) == c`, `|phi| <= pi`.
pub fn rotation_vector(c: &Mat3) -> Vec3 {
    let q = dcm_to_quat(c);
    let v = q.imag();
    let n = v.norm();
    if n == 0.0 {
        return Vec3::zeros();
    }
    v * (2.0 * n.atan2(q.w) / n)
}

/// Nearest orthogonal matrix in the Frobenius norm (polar factor).
///
/// The determinant sign of the input is preserved, so reflections stay
/// reflections.
pub fn orthonormalize(c: &Mat3) -> Result<Mat3, AlignError> {
    let det = c.determinant();
    if !(det.abs() > 1e-6) {
        return Err(AlignError::NearSingular { det });
    }
    let eig = sym_eig3(&(c.transpose() * c));
    let q = eig.vectors;
    let inv_sqrt = Mat3::from_diagonal(&Vec3::from_iterator(
        eig.values.iter().map(|l| 1.0 / l.sqrt()),
    ));
    let u = c * q * inv_sqrt * q.transpose();
    // One Newton step for the polar factor removes the last ulps.
    let u_inv_t = u.try_inverse().ok_or(AlignError::NearSingular { det })?.transpose();
    Ok((u + u_inv_t) * 0.5)
}

/// Cyclic Jacobi eigensolver on an `N x N` symmetric array.
///
/// Returns the diagonal (unsorted) and the accumulated rotation whose columns
/// are the eigenvectors. An off-diagonal entry is annihilated unless it is
/// already negligible relative to its two diagonal partners, which keeps
/// relative accuracy on strongly graded positive semidefinite matrices such
/// as the dyadic tensors.
fn jacobi<const N: usize>(m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (std::array::from_fn(|i| a[i][i]), v);
    }
    let floor = f64::MIN_POSITIVE / f64::EPSILON * norm;

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..N - 1 {
            for q in p + 1..N {
                let apq = a[p][q];
                let app = a[p][p];
                let aqq = a[q][q];
                if apq.abs() <= f64::EPSILON * 0.5 * (app * aqq).abs().sqrt()
                    || apq.abs() <= floor
                {
                    a[p][q] = 0.0;
                    a[q][p] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..N {
                    if r != p && r != q {
                        let g = a[r][p];
                        let h = a[r][q];
                        a[r][p] = g - s * (h + g * tau);
                        a[p][r] = a[r][p];
                        a[r][q] = h + s * (g - h * tau);
                        a[q][r] = a[r][q];
                    }
                }
                for row in v.iter_mut() {
                    let g = row[p];
                    let h = row[q];
                    row[p] = g - s * (h + g * tau);
                    row[q] = h + s * (g - h * tau);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

/// Indices sorted by descending value; ties keep the original order.
fn descending_order<const N: usize>(values: &[f64; N]) -> [usize; N] {
    let mut idx: [usize; N] = std::array::from_fn(|i| i);
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    idx
}

/// Flip `v` so its largest-magnitude component is positive.
fn canonical_sign<const N: usize>(v: &mut [f64; N]) {
    let mut k = 0;
    for i in 1..N {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn sorted_eigen<const N: usize>(m: [[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let (vals, vecs) = jacobi(m);
    let order = descending_order(&vals);
    let values = std::array::from_fn(|j| vals[order[j]]);
    // columns[j] holds eigenvector j
    let mut columns: [[f64; N]; N] = std::array::from_fn(|j| std::array::from_fn(|i| vecs[i][order[j]]));
    columns.iter_mut().for_each(canonical_sign);
    (values, columns)
}

/// Eigendecomposition of a symmetric 3x3 matrix.
///
/// The input is symmetrized by averaging. Eigenvalues come out in descending
/// order and each eigenvector's largest-magnitude component is positive.
pub fn sym_eig3(m: &Mat3) -> SymEig3 {
    let s = (m + m.transpose()) * 0.5;
    let arr: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| s[(i, j)]));
    let (values, cols) = sorted_eigen(arr);
    let vectors = Mat3::from_fn(|i, j| cols[j][i]);
    SymEig3 { values, vectors }
}

/// Largest eigenpair of a symmetric 4x4 matrix (Davenport's K matrix).
pub fn max_eig4(k: &Mat4) -> (f64, Vec4) {
    let s = (k + k.transpose()) * 0.5;
    let arr: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| s[(i, j)]));
    let (values, cols) = sorted_eigen(arr);
    let v = Vec4::from_column_slice(&cols[0]);
    (values[0], v.normalize())
}
