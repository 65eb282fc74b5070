use std::fmt;

use nalgebra::{Quaternion, UnitQuaternion};

use crate::attmath::{rotation_vector, sym_eig3, max_eig4, Mat3, Mat4, SymEig3, Vec3};
use crate::earth::{c_eprime_n, latitude_scaling, EarthModel};

/// Minimum `(l2 - l3) / l1` of the reference tensor before eigenvectors are
/// trusted.
pub const READINESS_GAP: f64 = 1e-9;
/// Minimum angle between the two TRIAD vectors on each side, rad.
pub const TRIAD_MIN_ANGLE: f64 = 1e-4;
/// Minimum `sigma2 / sigma1` of the attitude profile matrix.
pub const OBA_MIN_SINGULAR_RATIO: f64 = 2e-9;
/// Sign-test inner products below this fraction of the anchor norm are
/// treated as zero.
pub const ANCHOR_FLOOR: f64 = 1e-12;
/// Tolerance on `|det(C')| - 1` in the normalized-chain solve.
pub const DET_TOLERANCE: f64 = 1e-6;
/// Smallest usable `|T11 + T22 - T33|` relative to `tr(T_ref)`.
pub const LATITUDE_DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotReady {
    NoData,
    CollinearPair,
    RankDeficient,
    DegenerateSpectrum,
    DegenerateLatitude,
    LatitudeGrowing,
    Reflection,
}

impl fmt::Display for NotReady {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NotReady::NoData => "no velocity vectors yet",
            NotReady::CollinearPair => "vector pair is nearly collinear",
            NotReady::RankDeficient => "attitude profile matrix is rank deficient",
            NotReady::DegenerateSpectrum => "tensor eigenvalue gap below threshold",
            NotReady::DegenerateLatitude => "latitude denominator too small",
            NotReady::LatitudeGrowing => "latitude argument above one",
            NotReady::Reflection => "solution is not a proper or improper rotation",
        };
        f.write_str(s)
    }
}

/// Running uniform-weight dyadic tensors of both sides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DyadicAccumulator {
    sum_ref: Mat3,
    sum_obs: Mat3,
    n: usize,
}

impl DyadicAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v_ref: &Vec3, v_obs: &Vec3) {
        self.sum_ref += v_ref * v_ref.transpose();
        self.sum_obs += v_obs * v_obs.transpose();
        self.n += 1;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `sum_k w_k v_ref v_ref^T` with `w_k = 1/n`.
    pub fn t_ref(&self) -> Mat3 {
        weighted(&self.sum_ref, self.n)
    }

    pub fn t_obs(&self) -> Mat3 {
        weighted(&self.sum_obs, self.n)
    }
}

/// Running attitude profile matrix `B = sum_k w_k v_ref v_obs^T`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WahbaAccumulator {
    sum: Mat3,
    n: usize,
}

impl WahbaAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v_ref: &Vec3, v_obs: &Vec3) {
        self.sum += v_ref * v_obs.transpose();
        self.n += 1;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn profile(&self) -> Mat3 {
        if self.n == 0 {
            Mat3::zeros()
        } else {
            self.sum / self.n as f64
        }
    }
}

fn weighted(sum: &Mat3, n: usize) -> Mat3 {
    if n == 0 {
        return Mat3::zeros();
    }
    let m = sum / n as f64;
    (m + m.transpose()) * 0.5
}

/// A reference/observation pair used to resolve eigenvector signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorPair {
    pub v_ref: Vec3,
    pub v_obs: Vec3,
}

/// The latest pair and, as a fallback, the one before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchors {
    pub latest: AnchorPair,
    pub previous: Option<AnchorPair>,
}

impl Anchors {
    pub fn single(v_ref: Vec3, v_obs: Vec3) -> Self {
        Self { latest: AnchorPair { v_ref, v_obs }, previous: None }
    }

    fn scaled(&self, s: &Mat3) -> Self {
        let f = |p: AnchorPair| AnchorPair { v_ref: s * p.v_ref, v_obs: p.v_obs };
        Self { latest: f(self.latest), previous: self.previous.map(f) }
    }
}

/// `(l2 - l3) / l1`, zero for a zero matrix.
pub fn eigen_gap(e: &SymEig3) -> f64 {
    let [l1, l2, l3] = e.values;
    if l1 > 0.0 {
        (l2 - l3) / l1
    } else {
        0.0
    }
}

/// Classic two-vector TRIAD: returns `C` with `v_ref ~ C v_obs`, exact on the
/// first vector.
pub fn triad_align(v1_ref: &Vec3, v2_ref: &Vec3, v1_obs: &Vec3, v2_obs: &Vec3) -> Result<Mat3, NotReady> {
    let u_r = triad_frame(v1_ref, v2_ref)?;
    let u_w = triad_frame(v1_obs, v2_obs)?;
    Ok(u_r * u_w.transpose())
}

fn triad_frame(a: &Vec3, b: &Vec3) -> Result<Mat3, NotReady> {
    let cross = a.cross(b);
    let angle = cross.norm().atan2(a.dot(b));
    if !(angle > TRIAD_MIN_ANGLE) || !(angle < std::f64::consts::PI - TRIAD_MIN_ANGLE) {
        return Err(NotReady::CollinearPair);
    }
    let x1 = a.normalize();
    let x2 = cross.normalize();
    let x3 = x1.cross(&x2);
    Ok(Mat3::from_columns(&[x1, x2, x3]))
}

/// Wahba solution by Davenport's q-method.
pub fn oba_align(acc: &WahbaAccumulator) -> Result<Mat3, NotReady> {
    if acc.len() < 2 {
        return Err(NotReady::NoData);
    }
    let b = acc.profile();
    let norm2 = b.norm_squared();
    // ||adj(B)||_F is sigma1 sigma2 up to a sigma3 term, so this ratio
    // estimates sigma2 / sigma1 without squaring B.
    let adj = cofactor(&b);
    if !(norm2 > 0.0) || !(adj.norm() / norm2 > OBA_MIN_SINGULAR_RATIO) {
        return Err(NotReady::RankDeficient);
    }
    Ok(davenport(&b))
}

fn cofactor(b: &Mat3) -> Mat3 {
    let c0 = b.column(1).cross(&b.column(2));
    let c1 = b.column(2).cross(&b.column(0));
    let c2 = b.column(0).cross(&b.column(1));
    Mat3::from_columns(&[c0, c1, c2])
}

/// Rotation maximizing `tr(C^T B)`.
pub fn davenport(b: &Mat3) -> Mat3 {
    let sigma = b.trace();
    let s = b + b.transpose();
    let z = Vec3::new(b[(2, 1)] - b[(1, 2)], b[(0, 2)] - b[(2, 0)], b[(1, 0)] - b[(0, 1)]);
    let mut k = Mat4::zeros();
    k[(0, 0)] = sigma;
    for i in 0..3 {
        k[(0, i + 1)] = z[i];
        k[(i + 1, 0)] = z[i];
        for j in 0..3 {
            k[(i + 1, j + 1)] = s[(i, j)] - if i == j { sigma } else { 0.0 };
        }
    }
    let (_, q) = max_eig4(&k);
    let q = UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3]));
    *q.to_rotation_matrix().matrix()
}

/// Flips `x_r` when the anchors say it points opposite to `x_w`. Returns
/// whether the fallback anchor was needed.
fn fix_sign(x_r: &mut Vec3, x_w: &Vec3, anchors: &Anchors) -> bool {
    let test = |a: &AnchorPair| {
        let pr = a.v_ref.dot(x_r);
        let pw = a.v_obs.dot(x_w);
        let usable = pr.abs() >= ANCHOR_FLOOR * a.v_ref.norm() && pw.abs() >= ANCHOR_FLOOR * a.v_obs.norm();
        (usable && pr.is_finite() && pw.is_finite()).then_some(pr * pw)
    };
    let (product, fallback) = match test(&anchors.latest) {
        Some(p) => (p, false),
        None => (anchors.previous.as_ref().and_then(test).unwrap_or(1.0), true),
    };
    if product < 0.0 {
        *x_r = -*x_r;
    }
    fallback
}

/// newTRIAD from given eigenbases (columns in descending eigenvalue order).
///
/// The first two reference columns are sign-matched to the observation
/// columns, the third is the cross product on both sides. Returns the
/// attitude and whether a fallback anchor was used.
pub fn newtriad_from_eigenbases(u_ref: &Mat3, u_obs: &Mat3, anchors: &Anchors) -> (Mat3, bool) {
    let mut r1 = u_ref.column(0).into_owned();
    let mut r2 = u_ref.column(1).into_owned();
    let w1 = u_obs.column(0).into_owned();
    let w2 = u_obs.column(1).into_owned();
    let f1 = fix_sign(&mut r1, &w1, anchors);
    let f2 = fix_sign(&mut r2, &w2, anchors);
    let r = Mat3::from_columns(&[r1, r2, r1.cross(&r2)]);
    let w = Mat3::from_columns(&[w1, w2, w1.cross(&w2)]);
    (r * w.transpose(), f1 || f2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewTriadSolution {
    pub c_b0: Mat3,
    pub eigen_gap: f64,
    pub anchor_fallback: bool,
}

pub fn newtriad_solve(acc: &DyadicAccumulator, anchors: &Anchors) -> Result<NewTriadSolution, NotReady> {
    if acc.is_empty() {
        return Err(NotReady::NoData);
    }
    let er = sym_eig3(&acc.t_ref());
    let gap = eigen_gap(&er);
    if !(gap > READINESS_GAP) {
        return Err(NotReady::DegenerateSpectrum);
    }
    let ew = sym_eig3(&acc.t_obs());
    let (c_b0, anchor_fallback) = newtriad_from_eigenbases(&er.vectors, &ew.vectors, anchors);
    Ok(NewTriadSolution { c_b0, eigen_gap: gap, anchor_fallback })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatitudeClamp {
    /// Raw argument above one; the latitude is reported as zero.
    AboveOne,
    /// Raw argument below zero; the latitude is reported as 90 degrees.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatitudeSolution {
    /// `|L|` estimate, rad.
    pub l_plus: f64,
    /// Unclamped argument of the square root.
    pub sqrt_arg: f64,
    pub clamp: Option<LatitudeClamp>,
}

/// Latitude magnitude from the trace identity of the normalized-chain
/// tensors.
pub fn salad_latitude(acc: &DyadicAccumulator) -> Result<LatitudeSolution, NotReady> {
    if acc.is_empty() {
        return Err(NotReady::NoData);
    }
    let tr = acc.t_ref();
    let tw = acc.t_obs();
    let den = tr[(0, 0)] + tr[(1, 1)] - tr[(2, 2)];
    // Both differences are negative: the integrated unit cone is shorter
    // than the time axis by a term of order (wt)^2.
    if !(den.abs() > LATITUDE_DENOMINATOR_FLOOR * tr.trace()) {
        return Err(NotReady::DegenerateLatitude);
    }
    let arg = (tw.trace() - tr[(2, 2)]) / den;
    Ok(latitude_from_argument(arg))
}

pub fn latitude_from_argument(arg: f64) -> LatitudeSolution {
    if arg > 1.0 {
        LatitudeSolution { l_plus: 0.0, sqrt_arg: arg, clamp: Some(LatitudeClamp::AboveOne) }
    } else if arg < 0.0 {
        LatitudeSolution { l_plus: std::f64::consts::FRAC_PI_2, sqrt_arg: arg, clamp: Some(LatitudeClamp::Negative) }
    } else {
        LatitudeSolution { l_plus: arg.sqrt().acos(), sqrt_arg: arg, clamp: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaladSolution {
    /// `C_{b0}^{i0}`.
    pub c_b0: Mat3,
    /// Signed latitude, rad.
    pub latitude: f64,
    pub det: f64,
    pub eigen_gap: f64,
    pub anchor_fallback: bool,
}

/// Attitude and latitude sign from the normalized-chain tensors.
///
/// `anchors` carry the raw normalized reference vector; it is scaled by
/// `diag(cos L+, cos L+, sin L+)` here.
pub fn salad_solve(acc: &DyadicAccumulator, l_plus: f64, anchors: &Anchors) -> Result<SaladSolution, NotReady> {
    if acc.is_empty() {
        return Err(NotReady::NoData);
    }
    let s = latitude_scaling(l_plus);
    let er = sym_eig3(&(s * acc.t_ref() * s.transpose()));
    let gap = eigen_gap(&er);
    if !(gap > READINESS_GAP) {
        return Err(NotReady::DegenerateSpectrum);
    }
    let ew = sym_eig3(&acc.t_obs());
    let anchors = anchors.scaled(&s);
    let mut fallback = false;
    let mut cols = [Vec3::zeros(); 3];
    for (j, col) in cols.iter_mut().enumerate() {
        *col = er.vector(j);
        fallback |= fix_sign(col, &ew.vector(j), &anchors);
    }
    let c_prime = Mat3::from_columns(&cols) * ew.vectors.transpose();
    let det = c_prime.determinant();
    if !((det.abs() - 1.0).abs() <= DET_TOLERANCE) {
        return Err(NotReady::Reflection);
    }
    let sign = det.signum();
    let flip = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, sign));
    Ok(SaladSolution { c_b0: flip * c_prime, latitude: sign * l_plus, det, eigen_gap: gap, anchor_fallback: fallback })
}

/// `C_b^n(t) = [C_n^{n0}(t)]^T C_{b0}^{n0} C_b^{b0}(t)`.
pub fn realtime_attitude_known(c_b0: &Mat3, c_n_n0: &Mat3, c_b_b0: &Mat3) -> Mat3 {
    c_n_n0.transpose() * c_b0 * c_b_b0
}

/// `C_b^n(t) = C_{e'}^n(L) C_{i0}^{e'}(t) C_{b0}^{i0} C_b^{b0}(t)`.
pub fn realtime_attitude_inertial(earth: &EarthModel, c_b0_i0: &Mat3, latitude: f64, t: f64, c_b_b0: &Mat3) -> Mat3 {
    c_eprime_n(latitude) * earth.c_i0_eprime(t) * c_b0_i0 * c_b_b0
}

/// Misalignment `[phi_E, phi_N, phi_U]`, rad: the rotation vector of
/// `C_est C_true^T`.
pub fn misalignment(c_est: &Mat3, c_true: &Mat3) -> Vec3 {
    rotation_vector(&(c_est * c_true.transpose()))
}
