//! Forward/inverse kinematics, position Jacobian and conditioning index.
//!
//! Frame convention: joint `i` contributes
//! `RotX(alpha_i) * TransX(d_i) * RotZ(theta_i) * TransZ(r_i)` with
//! `(alpha1, d1, r1) = (0, 0, 0)`, `alpha2 = -90°`, `alpha3 = +90°`; the
//! operation point sits at `(d4, 0, 0)` in frame 3. Eliminating `theta1`
//! leaves three planar terms in `(theta2, theta3)`:
//!
//! ```text
//! a = d2 + c2 * (d3 + d4 * c3) + s2 * r3      radial component
//! b = r2 + d4 * s3                            lateral component
//! v = r3 * c2 - s2 * (d3 + d4 * c3)           height along the base axis
//! ```
//!
//! so the operation point is `(c1 * a - s1 * b, s1 * a + c1 * b, v)` and the
//! cross-section coordinates are `rho = sqrt(a^2 + b^2)`, `z = v`.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix3, Matrix4, Vector3};

use crate::types::{wrap_angle, CartesianPoint, CrossSectionPoint, GeometryParams, JointConfig};

/// Position Jacobian: `J[i][j] = d P_i / d theta_j`.
pub type Jacobian = Matrix3<f64>;

/// Radial, lateral and axial components of the operation point for
/// `theta1 = 0`, as functions of `(theta2, theta3)` trig values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PlanarTerms {
    pub a: f64,
    pub b: f64,
    pub v: f64,
}

#[inline]
pub(crate) fn planar_terms(g: &GeometryParams, s2: f64, c2: f64, s3: f64, c3: f64) -> PlanarTerms {
    let w = g.d3 + g.d4 * c3;
    PlanarTerms {
        a: g.d2 + c2 * w + s2 * g.r3,
        b: g.r2 + g.d4 * s3,
        v: g.r3 * c2 - s2 * w,
    }
}

/// Determinant of the position Jacobian from precomputed trig values; the
/// determinant does not depend on `theta1`.
#[inline]
pub(crate) fn det_from_trig(g: &GeometryParams, s2: f64, c2: f64, s3: f64, c3: f64) -> f64 {
    let t = planar_terms(g, s2, c2, s3, c3);
    let da = g.d2 - t.a;
    g.d4 * (da * (t.b * c3 - t.a * s3 * c2) - t.a * t.v * s2 * s3)
}

/// Cross-section point for `theta1 = 0` from precomputed trig values.
#[inline]
pub(crate) fn section_from_trig(
    g: &GeometryParams,
    s2: f64,
    c2: f64,
    s3: f64,
    c3: f64,
) -> CrossSectionPoint {
    let t = planar_terms(g, s2, c2, s3, c3);
    CrossSectionPoint {
        rho: (t.a * t.a + t.b * t.b).sqrt(),
        z: t.v,
    }
}

/// Operation point position in the base frame.
pub fn forward_kinematics(g: &GeometryParams, q: &JointConfig) -> CartesianPoint {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let t = planar_terms(g, s2, c2, s3, c3);
    CartesianPoint {
        x: c1 * t.a - s1 * t.b,
        y: s1 * t.a + c1 * t.b,
        z: t.v,
    }
}

/// Projects a base-frame point to the workspace cross-section
/// `(rho, z) = (sqrt(x^2 + y^2), z)`.
pub fn cross_section(p: &CartesianPoint) -> CrossSectionPoint {
    CrossSectionPoint {
        rho: (p.x * p.x + p.y * p.y).sqrt(),
        z: p.z,
    }
}

/// Analytic position Jacobian at `q`.
pub fn jacobian(g: &GeometryParams, q: &JointConfig) -> Jacobian {
    let (s1, c1) = q.theta1.sin_cos();
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    let t = planar_terms(g, s2, c2, s3, c3);
    // Partials of the planar terms: da/dt2 = v, dv/dt2 = d2 - a,
    // da/dt3 = -d4 s3 c2, db/dt3 = d4 c3, dv/dt3 = d4 s3 s2.
    let da3 = -g.d4 * s3 * c2;
    let db3 = g.d4 * c3;
    let dv3 = g.d4 * s3 * s2;
    Matrix3::new(
        -(s1 * t.a + c1 * t.b),
        c1 * t.v,
        c1 * da3 - s1 * db3,
        c1 * t.a - s1 * t.b,
        s1 * t.v,
        s1 * da3 + c1 * db3,
        0.0,
        g.d2 - t.a,
        dv3,
    )
}

/// Determinant of [`jacobian`]. Evaluated in closed form; exactly invariant
/// under `theta1` because the first joint only rotates the Jacobian.
pub fn det_jacobian(g: &GeometryParams, q: &JointConfig) -> f64 {
    let (s2, c2) = q.theta2.sin_cos();
    let (s3, c3) = q.theta3.sin_cos();
    det_from_trig(g, s2, c2, s3, c3)
}

/// Eigenvalues of a symmetric 3x3 matrix, ascending (trigonometric solution
/// of the characteristic cubic).
fn sym_eigenvalues3(m: &Matrix3<f64>) -> [f64; 3] {
    let p1 = m[(0, 1)] * m[(0, 1)] + m[(0, 2)] * m[(0, 2)] + m[(1, 2)] * m[(1, 2)];
    let q = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
    if p1 == 0.0 {
        let mut d = [m[(0, 0)], m[(1, 1)], m[(2, 2)]];
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return d;
    }
    let p2 = (m[(0, 0)] - q).powi(2)
        + (m[(1, 1)] - q).powi(2)
        + (m[(2, 2)] - q).powi(2)
        + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (m - Matrix3::from_diagonal_element(q)) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l_max = q + 2.0 * p * phi.cos();
    let l_min = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    [l_min, 3.0 * q - l_max - l_min, l_max]
}

/// Conditioning index `1/kappa = sigma_min / sigma_max` of a Jacobian: the
/// ratio of its smallest to largest singular value, in `[0, 1]`. Returns 0
/// for the zero matrix.
pub fn conditioning_index(j: &Jacobian) -> f64 {
    let jtj = j.transpose() * j;
    let [l_min, _, l_max] = sym_eigenvalues3(&jtj);
    if l_max <= 0.0 {
        return 0.0;
    }
    (l_min.max(0.0) / l_max).sqrt()
}

/// Default inverse-kinematics acceptance tolerance on the position residual.
pub fn default_ik_tol(g: &GeometryParams) -> f64 {
    1e-9 * g.length_scale()
}

/// Inverse kinematics result with numerical diagnostics.
#[derive(Debug, Clone)]
pub struct IkSolutions {
    /// Canonicalized solutions, sorted lexicographically by
    /// `(theta1, theta2, theta3)`; empty when the target is unreachable.
    pub solutions: Vec<JointConfig>,
    /// Candidates that were algebraically consistent but failed the
    /// forward-kinematics round trip at `tol`: a non-zero count signals a
    /// numerically suspect (near-boundary) target.
    pub residual_rejects: usize,
}

/// All inverse kinematic solutions for `target`, with positions accepted
/// when the forward-kinematics residual is at most `tol`.
///
/// The joint-space reduction eliminates `theta1` by the base-axis symmetry,
/// turns the two remaining position equations into a degree-4 polynomial in
/// `tan(theta3 / 2)` (a quadratic when `d2 = 0`, which covers every named
/// type), back-substitutes `theta2`, and polishes each candidate with damped
/// Newton steps on the full position residual. Duplicate roots closer than
/// 1e-6 rad on every joint are merged.
pub fn inverse_kinematics(g: &GeometryParams, target: &CartesianPoint, tol: f64) -> Vec<JointConfig> {
    inverse_kinematics_detailed(g, target, tol).solutions
}

/// See [`inverse_kinematics`]; also reports round-trip rejects.
pub fn inverse_kinematics_detailed(
    g: &GeometryParams,
    target: &CartesianPoint,
    tol: f64,
) -> IkSolutions {
    assert!(tol > 0.0, "ik tolerance must be positive");
    let mut out = IkSolutions {
        solutions: Vec::new(),
        residual_rejects: 0,
    };
    if !(target.x.is_finite() && target.y.is_finite() && target.z.is_finite()) {
        return out;
    }
    let scale = g.length_scale();
    let rho2 = target.x * target.x + target.y * target.y;
    let rr = rho2 + target.z * target.z;
    // |P| <= d2 + d3 + d4 + r2 + r3 for any configuration.
    if rr > scale * scale * (1.0 + 1e-9) {
        return out;
    }

    let sumsq = g.d2 * g.d2 + g.d3 * g.d3 + g.d4 * g.d4 + g.r2 * g.r2 + g.r3 * g.r3;
    let u = rr - sumsq;
    let alpha = u + 2.0 * g.d3 * g.d4;
    let beta = -4.0 * g.r2 * g.d4;
    let gamma = u - 2.0 * g.d3 * g.d4;

    // theta3 candidates; tan(theta3/2) misses theta3 = pi, test it always.
    let mut thetas3: Vec<f64> = Vec::with_capacity(8);
    let coeff_floor = 1e-10 * scale * scale * scale.max(1.0);
    if g.d2 <= 1e-12 * scale {
        // With d2 = 0 the quartic is the exact square of this quadratic.
        if alpha.abs().max(beta.abs()).max(gamma.abs()) <= coeff_floor {
            // Degenerate continuum (sphere-like geometry at exact radius):
            // keep a few representatives.
            thetas3.extend_from_slice(&[0.0, 0.5 * PI, -0.5 * PI]);
        } else {
            for t in quadratic_roots(alpha, beta, gamma) {
                thetas3.push(2.0 * t.atan());
            }
        }
    } else {
        let w2 = g.d3 - g.d4;
        let w0 = g.d3 + g.d4;
        let e = 4.0 * g.d2 * g.d2;
        let gt = e * (g.r3 * g.r3 - target.z * target.z);
        let coeffs = [
            gamma * gamma - e * w0 * w0 - gt,
            2.0 * beta * gamma,
            beta * beta + 2.0 * alpha * gamma - 2.0 * e * w2 * w0 - 2.0 * gt,
            2.0 * alpha * beta,
            alpha * alpha - e * w2 * w2 - gt,
        ];
        if beta == 0.0 {
            // r2 = 0 zeroes the odd coefficients; the quartic is a
            // quadratic in t^2, which is much cheaper than an eigenvalue
            // solve and hits every d2 != 0 named type.
            for y in quadratic_roots(coeffs[4], coeffs[2], coeffs[0]) {
                if y < -1e-9 * (1.0 + coeffs[2].abs() / coeffs[4].abs().max(f64::MIN_POSITIVE)) {
                    continue;
                }
                let t = y.max(0.0).sqrt();
                thetas3.push(2.0 * t.atan());
                if t > 0.0 {
                    thetas3.push(2.0 * (-t).atan());
                }
            }
        } else {
            for t in real_roots(&coeffs) {
                thetas3.push(2.0 * t.atan());
            }
        }
    }
    thetas3.push(PI);

    let mut candidates: Vec<JointConfig> = Vec::with_capacity(8);
    for &theta3 in &thetas3 {
        let (s3, c3) = theta3.sin_cos();
        let w = g.d3 + g.d4 * c3;
        let b = g.r2 + g.d4 * s3;
        let a2 = rho2 - b * b;
        if a2 < -1e-6 * scale * scale {
            continue;
        }
        let a_mag = a2.max(0.0).sqrt();
        let denom = w * w + g.r3 * g.r3;
        let tiny = 1e-12 * scale;
        for sign in [1.0, -1.0] {
            if sign < 0.0 && a_mag <= tiny {
                break;
            }
            let a = sign * a_mag;
            let theta2 = if denom <= tiny * tiny {
                // w = r3 = 0: theta2 does not move the point on this branch.
                0.0
            } else {
                let c2 = (w * (a - g.d2) + g.r3 * target.z) / denom;
                let s2 = (g.r3 * (a - g.d2) - w * target.z) / denom;
                let n = (c2 * c2 + s2 * s2).sqrt();
                // (a - d2)^2 + z^2 must equal w^2 + r3^2; a wrong branch
                // sign shows up as a non-unit solution of the linear system.
                if (n - 1.0).abs() > 0.05 {
                    continue;
                }
                s2.atan2(c2)
            };
            let theta1 = target.y.atan2(target.x) - b.atan2(a);
            let mut q = JointConfig::new(theta1, theta2, theta3).canonical();
            newton_polish(g, &mut q, target, scale);
            let p = forward_kinematics(g, &q);
            let res = ((p.x - target.x).powi(2)
                + (p.y - target.y).powi(2)
                + (p.z - target.z).powi(2))
            .sqrt();
            if res <= tol {
                candidates.push(q);
            } else {
                out.residual_rejects += 1;
            }
        }
    }

    candidates.sort_by(|p, q| {
        (p.theta1, p.theta2, p.theta3)
            .partial_cmp(&(q.theta1, q.theta2, q.theta3))
            .unwrap()
    });
    for q in candidates {
        let dup = out.solutions.iter().any(|k| {
            wrap_angle(k.theta1 - q.theta1).abs() <= 1e-6
                && wrap_angle(k.theta2 - q.theta2).abs() <= 1e-6
                && wrap_angle(k.theta3 - q.theta3).abs() <= 1e-6
        });
        if !dup {
            out.solutions.push(q);
        }
    }
    out
}

/// Damped Newton refinement of `q` on the position residual; keeps a step
/// only when it reduces the residual.
fn newton_polish(g: &GeometryParams, q: &mut JointConfig, target: &CartesianPoint, scale: f64) {
    let residual = |q: &JointConfig| {
        let p = forward_kinematics(g, q);
        Vector3::new(p.x - target.x, p.y - target.y, p.z - target.z)
    };
    let goal = 1e-13 * scale;
    let mut best = residual(q).norm();
    for _ in 0..3 {
        if best <= goal {
            break;
        }
        let j = jacobian(g, q);
        let Some(mut delta) = j.lu().solve(&(-residual(q))) else {
            break;
        };
        let n = delta.norm();
        if n > 0.5 {
            delta *= 0.5 / n;
        }
        let trial = JointConfig::new(
            q.theta1 + delta[0],
            q.theta2 + delta[1],
            q.theta3 + delta[2],
        )
        .canonical();
        let r = residual(&trial).norm();
        if r < best {
            *q = trial;
            best = r;
        } else {
            break;
        }
    }
}

/// Real roots of a quadratic, tolerating a slightly negative discriminant
/// (grazing double root at the workspace boundary).
fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    if a == 0.0 {
        if b == 0.0 {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-10 * (b * b).max((4.0 * a * c).abs()) {
            return vec![-b / (2.0 * a)];
        }
        return Vec::new();
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    if qq == 0.0 {
        // b = 0 and c = 0: double root at the origin.
        return vec![0.0];
    }
    vec![qq / a, c / qq]
}

/// Real roots of `sum c[i] x^i` with `c` ascending, degree at most 4.
/// Coefficients are normalized by the largest magnitude; a leading
/// coefficient below 1e-12 (relative) deflates the degree, the lost root
/// having escaped to infinity. Degrees 3 and 4 go through companion-matrix
/// eigenvalues; near-real eigenvalues are kept and later gated by the
/// forward-kinematics round trip.
fn real_roots(c: &[f64]) -> Vec<f64> {
    assert!(c.len() <= 5);
    let cmax = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if cmax == 0.0 {
        return Vec::new();
    }
    let c: Vec<f64> = c.iter().map(|x| x / cmax).collect();
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() < 1e-12 {
        deg -= 1;
    }
    let keep_real = |ev: &[Complex<f64>]| {
        ev.iter()
            .filter(|e| e.im.abs() <= 1e-6 * (1.0 + e.re.abs()))
            .map(|e| e.re)
            .collect::<Vec<f64>>()
    };
    match deg {
        0 => Vec::new(),
        1 => vec![-c[0] / c[1]],
        2 => quadratic_roots(c[2], c[1], c[0]),
        3 => {
            let a = [c[0] / c[3], c[1] / c[3], c[2] / c[3]];
            let m = Matrix3::new(0.0, 0.0, -a[0], 1.0, 0.0, -a[1], 0.0, 1.0, -a[2]);
            keep_real(m.complex_eigenvalues().as_slice())
        }
        _ => {
            let a = [c[0] / c[4], c[1] / c[4], c[2] / c[4], c[3] / c[4]];
            let m = Matrix4::new(
                0.0, 0.0, 0.0, -a[0], 1.0, 0.0, 0.0, -a[1], 0.0, 1.0, 0.0, -a[2], 0.0, 0.0, 1.0,
                -a[3],
            );
            keep_real(m.complex_eigenvalues().as_slice())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom_c() -> GeometryParams {
        GeometryParams::new(0.0, 0.0, 1.5, 1.0, 0.0).unwrap()
    }

    fn geom_b1() -> GeometryParams {
        GeometryParams::new(0.0, 4.0, 2.2, 0.0, 0.0).unwrap()
    }

    fn random_q(rng: &mut impl Rng) -> JointConfig {
        JointConfig::new(
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
        )
    }

    #[test]
    fn fk_unit_wrist_stays_on_sphere() {
        let g = GeometryParams::new(0.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = forward_kinematics(&g, &random_q(&mut rng));
            let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn fk_home_pose_reference_values() {
        let home = JointConfig::new(0.0, 0.0, 0.0);
        let p = forward_kinematics(&geom_c(), &home);
        assert_abs_diff_eq!(p.x, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.z, 0.0, epsilon = 1e-15);
        let s = cross_section(&p);
        assert_abs_diff_eq!(s.rho, 3.25f64.sqrt(), epsilon = 1e-14);

        let p = forward_kinematics(&geom_b1(), &home);
        let s = cross_section(&p);
        assert_abs_diff_eq!(s.rho, 6.2, epsilon = 1e-14);
        assert_abs_diff_eq!(s.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fk_linear_in_uniform_scaling() {
        let g = GeometryParams::new(0.3, 1.1, 2.0, 0.7, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q = random_q(&mut rng);
            let p1 = forward_kinematics(&g, &q);
            let p2 = forward_kinematics(&g.scaled(3.0), &q);
            assert_abs_diff_eq!(p2.x, 3.0 * p1.x, epsilon = 1e-12 * g.length_scale());
            assert_abs_diff_eq!(p2.y, 3.0 * p1.y, epsilon = 1e-12 * g.length_scale());
            assert_abs_diff_eq!(p2.z, 3.0 * p1.z, epsilon = 1e-12 * g.length_scale());
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = GeometryParams::new(0.4, 1.3, 2.0, 0.8, 0.6).unwrap();
        let scale = g.length_scale();
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = random_q(&mut rng);
            let j = jacobian(&g, &q);
            for col in 0..3 {
                let mut qp = q;
                let mut qm = q;
                match col {
                    0 => {
                        qp.theta1 += h;
                        qm.theta1 -= h;
                    }
                    1 => {
                        qp.theta2 += h;
                        qm.theta2 -= h;
                    }
                    _ => {
                        qp.theta3 += h;
                        qm.theta3 -= h;
                    }
                }
                let pp = forward_kinematics(&g, &qp);
                let pm = forward_kinematics(&g, &qm);
                let fd = [
                    (pp.x - pm.x) / (2.0 * h),
                    (pp.y - pm.y) / (2.0 * h),
                    (pp.z - pm.z) / (2.0 * h),
                ];
                for row in 0..3 {
                    assert_abs_diff_eq!(j[(row, col)], fd[row], epsilon = 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn det_jacobian_closed_form_for_type_c() {
        let g = geom_c();
        let scale3 = g.length_scale().powi(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let q = random_q(&mut rng);
            let expected = -g.r2 * g.d4 * g.d4 * q.theta2.cos() * q.theta3.cos().powi(2);
            assert_abs_diff_eq!(det_jacobian(&g, &q), expected, epsilon = 1e-12 * scale3);
            // ... and matches the determinant of the full Jacobian.
            assert_abs_diff_eq!(
                det_jacobian(&g, &q),
                jacobian(&g, &q).determinant(),
                epsilon = 1e-12 * scale3
            );
        }
    }

    #[test]
    fn det_jacobian_invariant_under_theta1() {
        let g = GeometryParams::new(0.2, 1.0, 1.7, 0.5, 0.3).unwrap();
        let q0 = JointConfig::new(0.0, 0.7, -1.2);
        let q1 = JointConfig::new(1.7, 0.7, -1.2);
        assert_eq!(det_jacobian(&g, &q0), det_jacobian(&g, &q1));
    }

    #[test]
    fn conditioning_reference_values() {
        assert_abs_diff_eq!(
            conditioning_index(&Matrix3::identity()),
            1.0,
            epsilon = 1e-14
        );
        let d = Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 4.0));
        assert_abs_diff_eq!(conditioning_index(&d), 0.25, epsilon = 1e-14);
        let singular = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(conditioning_index(&singular), 0.0);
        assert_eq!(conditioning_index(&Matrix3::zeros()), 0.0);
    }

    #[test]
    fn conditioning_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let m = Matrix3::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let sv = m.singular_values();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &s in sv.iter() {
                lo = lo.min(s);
                hi = hi.max(s);
            }
            let reference = if hi > 0.0 { lo / hi } else { 0.0 };
            assert_abs_diff_eq!(conditioning_index(&m), reference, epsilon = 1e-7);
        }
    }

    #[test]
    fn conditioning_invariant_under_theta1() {
        let g = geom_c();
        let q0 = JointConfig::new(0.0, 0.4, 0.9);
        let q1 = JointConfig::new(2.3, 0.4, 0.9);
        let k0 = conditioning_index(&jacobian(&g, &q0));
        let k1 = conditioning_index(&jacobian(&g, &q1));
        assert_abs_diff_eq!(k0, k1, epsilon = 1e-12 * k0.max(1e-30));
    }

    fn assert_round_trip(g: &GeometryParams, q: &JointConfig) {
        let target = forward_kinematics(g, q);
        let tol = default_ik_tol(g);
        let sols = inverse_kinematics(g, &target, tol);
        assert!(!sols.is_empty(), "no solution for {q:?}");
        let qc = q.canonical();
        let found = sols.iter().any(|s| {
            wrap_angle(s.theta1 - qc.theta1).abs() <= 1e-9
                && wrap_angle(s.theta2 - qc.theta2).abs() <= 1e-9
                && wrap_angle(s.theta3 - qc.theta3).abs() <= 1e-9
        });
        assert!(found, "seed configuration {qc:?} not recovered: {sols:?}");
        for s in &sols {
            let p = forward_kinematics(g, s);
            let res = ((p.x - target.x).powi(2)
                + (p.y - target.y).powi(2)
                + (p.z - target.z).powi(2))
            .sqrt();
            assert!(res <= tol, "solution {s:?} residual {res}");
        }
    }

    #[test]
    fn ik_round_trip_all_named_types() {
        let geoms = [
            geom_b1(),
            geom_c(),
            GeometryParams::new(4.0, 0.0, 4.0, 0.0, 0.0).unwrap(),
            GeometryParams::new(0.0, 4.0, 2.5, 0.0, 1.0).unwrap(),
            GeometryParams::new(0.0, 0.0, 4.0, 4.0, 1.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for g in &geoms {
            for _ in 0..200 {
                assert_round_trip(g, &random_q(&mut rng));
            }
        }
    }

    #[test]
    fn ik_interior_target_has_four_sorted_solutions() {
        let g = geom_c();
        let target = CartesianPoint {
            x: 1.6,
            y: 0.0,
            z: 0.3,
        };
        let sols = inverse_kinematics(&g, &target, default_ik_tol(&g));
        assert_eq!(sols.len(), 4, "got {sols:?}");
        for w in sols.windows(2) {
            assert!(
                (w[0].theta1, w[0].theta2, w[0].theta3)
                    <= (w[1].theta1, w[1].theta2, w[1].theta3)
            );
        }
    }

    #[test]
    fn ik_unreachable_targets_yield_empty() {
        let g = geom_c();
        // Beyond the outer reach r2 + d4 = 2.5.
        let far = CartesianPoint {
            x: 3.0,
            y: 0.0,
            z: 0.0,
        };
        assert!(inverse_kinematics(&g, &far, default_ik_tol(&g)).is_empty());
        // Inside the central void: the minimal reach is d4 - r2 = 0.5.
        let void = CartesianPoint {
            x: 0.3,
            y: 0.0,
            z: 0.0,
        };
        assert!(inverse_kinematics(&g, &void, default_ik_tol(&g)).is_empty());
    }

    #[test]
    fn ik_theta1_equivariance() {
        let g = geom_b1();
        let q = JointConfig::new(0.0, 0.5, 1.1);
        let p0 = forward_kinematics(&g, &q);
        let sols0 = inverse_kinematics(&g, &p0, default_ik_tol(&g));
        // Rotating the target about the base axis shifts every theta1.
        let rot = 0.8f64;
        let p1 = CartesianPoint {
            x: rot.cos() * p0.x - rot.sin() * p0.y,
            y: rot.sin() * p0.x + rot.cos() * p0.y,
            z: p0.z,
        };
        let sols1 = inverse_kinematics(&g, &p1, default_ik_tol(&g));
        assert_eq!(sols0.len(), sols1.len());
        for s1 in &sols1 {
            let matched = sols0.iter().any(|s0| {
                wrap_angle(s1.theta1 - s0.theta1 - rot).abs() <= 1e-9
                    && wrap_angle(s1.theta2 - s0.theta2).abs() <= 1e-9
                    && wrap_angle(s1.theta3 - s0.theta3).abs() <= 1e-9
            });
            assert!(matched);
        }
    }

    #[test]
    fn ik_biquadratic_path_for_nonzero_d2() {
        // d2 != 0 with r2 = 0 reduces to a quadratic in tan(theta3/2)^2.
        let g = GeometryParams::new(4.0, 0.0, 4.0, 0.0, 0.0).unwrap();
        let target = CartesianPoint {
            x: 4.4,
            y: 0.0,
            z: 1.2,
        };
        let sols = inverse_kinematics(&g, &target, default_ik_tol(&g));
        assert_eq!(sols.len(), 4, "got {sols:?}");
    }

    #[test]
    fn ik_round_trip_full_quartic_geometry() {
        // d2 != 0 and r2 != 0 together force the degree-4 eigenvalue path.
        let g = GeometryParams::new(1.0, 0.7, 1.3, 0.4, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            assert_round_trip(&g, &random_q(&mut rng));
        }
    }
}
