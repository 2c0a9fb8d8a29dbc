//! Nesterov-Todd scaling for the three supported symmetric cones, together
//! with the Jordan-algebra operations the predictor-corrector step needs.

use nalgebra::{DMatrix, DVector};

use super::kernels::{factor_spd, smat, svec_index, svec_len};
use super::{ConeBlock, ConeKind};

/// Per-block scaling state. The scaling map `W` satisfies
/// `lambda = W z = W^{-T} s` at the current iterate.
pub(crate) enum BlockScaling {
    NonNeg {
        w: DVector<f64>,
        lambda: DVector<f64>,
    },
    Soc {
        /// Unit-determinant Jordan square root of the scaling point.
        v: DVector<f64>,
        eta: f64,
        lambda: DVector<f64>,
    },
    Psd {
        r: DMatrix<f64>,
        r_inv: DMatrix<f64>,
        /// Scaled point is diagonal by construction.
        lambda_diag: DVector<f64>,
    },
}

fn jdot_soc(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let mut acc = a[0] * b[0];
    for i in 1..a.len() {
        acc -= a[i] * b[i];
    }
    acc
}

/// `P(v) x = 2 v (v.x) - J x` for a second-order cone vector `v` with
/// `v' J v = 1`.
fn soc_quad_rep(v: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let vx = v.dot(x);
    let mut out = DVector::zeros(x.len());
    out[0] = 2.0 * v[0] * vx - x[0];
    for i in 1..x.len() {
        out[i] = 2.0 * v[i] * vx + x[i];
    }
    out
}

fn reflect_soc(v: &DVector<f64>) -> DVector<f64> {
    let mut out = -v.clone();
    out[0] = v[0];
    out
}

impl BlockScaling {
    /// Computes the scaling from the current interior pair `(s, z)` of one
    /// block. Fails with a diagnostic when either point has left the cone
    /// numerically.
    pub fn compute(block: &ConeBlock, s: &DVector<f64>, z: &DVector<f64>) -> Result<Self, String> {
        match block.kind {
            ConeKind::NonNeg => {
                let mut w = DVector::zeros(s.len());
                let mut lambda = DVector::zeros(s.len());
                for i in 0..s.len() {
                    if s[i] <= 0.0 || z[i] <= 0.0 {
                        return Err(format!(
                            "nonneg iterate left the cone (s={:.3e}, z={:.3e})",
                            s[i], z[i]
                        ));
                    }
                    w[i] = (s[i] / z[i]).sqrt();
                    lambda[i] = (s[i] * z[i]).sqrt();
                }
                Ok(Self::NonNeg { w, lambda })
            }
            ConeKind::Soc => {
                let ss = jdot_soc(s, s);
                let zz = jdot_soc(z, z);
                if ss <= 0.0 || zz <= 0.0 || s[0] <= 0.0 || z[0] <= 0.0 {
                    return Err(format!(
                        "soc iterate left the cone (det_s={ss:.3e}, det_z={zz:.3e})"
                    ));
                }
                let a = ss.sqrt();
                let b = zz.sqrt();
                let s_hat = s / a;
                let z_hat = z / b;
                let gamma = ((1.0 + s_hat.dot(&z_hat)) / 2.0).sqrt();
                // w_hat = (s_hat + J z_hat) / (2 gamma); unit J-norm
                let mut w_hat = DVector::zeros(s.len());
                w_hat[0] = (s_hat[0] + z_hat[0]) / (2.0 * gamma);
                for i in 1..s.len() {
                    w_hat[i] = (s_hat[i] - z_hat[i]) / (2.0 * gamma);
                }
                // v = Jordan square root of w_hat, normalized to unit determinant
                let denom = (2.0 * (w_hat[0] + 1.0)).sqrt();
                let mut v = w_hat.clone();
                v[0] += 1.0;
                v /= denom;
                let eta = (a / b).sqrt();
                let lambda = soc_quad_rep(&v, z) * eta;
                Ok(Self::Soc { v, eta, lambda })
            }
            ConeKind::Psd => {
                let sm = smat(s).map_err(|e| e.to_string())?;
                let zm = smat(z).map_err(|e| e.to_string())?;
                let l1 = factor_spd(&sm)
                    .map_err(|e| e.to_string())?
                    .ok_or("psd slack iterate lost positive definiteness")?;
                let l2 = factor_spd(&zm)
                    .map_err(|e| e.to_string())?
                    .ok_or("psd dual iterate lost positive definiteness")?;
                let inner = l2.transpose() * &l1;
                let svd = inner.svd(true, true);
                let u = svd.u.as_ref().ok_or("svd failed in psd scaling")?;
                let vt = svd.v_t.as_ref().ok_or("svd failed in psd scaling")?;
                let sing = &svd.singular_values;
                if sing.iter().any(|&x| x <= 0.0) {
                    return Err("singular psd scaling system".into());
                }
                let d = block.dim;
                // R = L1 V diag(sigma^-1/2); R^-1 = diag(sigma^-1/2) U' L2'
                let mut vmat = vt.transpose();
                let mut ut = u.transpose();
                for k in 0..d {
                    let inv_sqrt = 1.0 / sing[k].sqrt();
                    vmat.column_mut(k).scale_mut(inv_sqrt);
                    ut.row_mut(k).scale_mut(inv_sqrt);
                }
                let r = &l1 * vmat;
                let r_inv = ut * l2.transpose();
                Ok(Self::Psd {
                    r,
                    r_inv,
                    lambda_diag: sing.clone_owned(),
                })
            }
        }
    }

    /// The scaled point `lambda` in slack coordinates.
    pub fn lambda(&self) -> DVector<f64> {
        match self {
            Self::NonNeg { lambda, .. } | Self::Soc { lambda, .. } => lambda.clone(),
            Self::Psd { lambda_diag, .. } => {
                let d = lambda_diag.len();
                let mut out = DVector::zeros(svec_len(d));
                for i in 0..d {
                    out[svec_index(d, i, i)] = lambda_diag[i];
                }
                out
            }
        }
    }

    pub fn apply_w(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::NonNeg { w, .. } => x.component_mul(w),
            Self::Soc { v, eta, .. } => soc_quad_rep(v, x) * *eta,
            Self::Psd { r, .. } => {
                let xm = smat(x).expect("svec length");
                super::kernels::svec(&symmetrize(r.transpose() * xm * r)).expect("symmetric")
            }
        }
    }

    pub fn apply_w_t(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::NonNeg { .. } | Self::Soc { .. } => self.apply_w(x),
            Self::Psd { r, .. } => {
                let xm = smat(x).expect("svec length");
                super::kernels::svec(&symmetrize(r * xm * r.transpose())).expect("symmetric")
            }
        }
    }

    pub fn apply_w_inv(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::NonNeg { w, .. } => x.component_div(w),
            Self::Soc { v, eta, .. } => soc_quad_rep(&reflect_soc(v), x) / *eta,
            Self::Psd { r_inv, .. } => {
                let xm = smat(x).expect("svec length");
                super::kernels::svec(&symmetrize(r_inv.transpose() * xm * r_inv))
                    .expect("symmetric")
            }
        }
    }

    pub fn apply_w_inv_t(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::NonNeg { .. } | Self::Soc { .. } => self.apply_w_inv(x),
            Self::Psd { r_inv, .. } => {
                let xm = smat(x).expect("svec length");
                super::kernels::svec(&symmetrize(r_inv * xm * r_inv.transpose()))
                    .expect("symmetric")
            }
        }
    }

    /// Jordan product of two block vectors.
    pub fn jordan_product(block: &ConeBlock, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        match block.kind {
            ConeKind::NonNeg => a.component_mul(b),
            ConeKind::Soc => {
                let mut out = DVector::zeros(a.len());
                out[0] = a.dot(b);
                for i in 1..a.len() {
                    out[i] = a[0] * b[i] + b[0] * a[i];
                }
                out
            }
            ConeKind::Psd => {
                let am = smat(a).expect("svec length");
                let bm = smat(b).expect("svec length");
                let prod = (&am * &bm + &bm * &am) * 0.5;
                super::kernels::svec(&prod).expect("symmetric")
            }
        }
    }

    /// Solves `lambda o x = d` for `x`, exploiting that the scaled point is
    /// componentwise positive (nonneg), interior (soc), or diagonal (psd).
    pub fn divide_by_lambda(&self, d: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::NonNeg { lambda, .. } => d.component_div(lambda),
            Self::Soc { lambda, .. } => {
                let det = jdot_soc(lambda, lambda);
                let lam1_dot_d1: f64 = (1..d.len()).map(|i| lambda[i] * d[i]).sum();
                let x0 = (lambda[0] * d[0] - lam1_dot_d1) / det;
                let mut out = DVector::zeros(d.len());
                out[0] = x0;
                for i in 1..d.len() {
                    out[i] = (d[i] - x0 * lambda[i]) / lambda[0];
                }
                out
            }
            Self::Psd { lambda_diag, .. } => {
                let side = lambda_diag.len();
                let mut out = DVector::zeros(d.len());
                let mut k = 0;
                for j in 0..side {
                    for i in j..side {
                        out[k] = 2.0 * d[k] / (lambda_diag[i] + lambda_diag[j]);
                        k += 1;
                    }
                }
                out
            }
        }
    }

    /// Cone identity element of the block.
    pub fn identity(block: &ConeBlock) -> DVector<f64> {
        match block.kind {
            ConeKind::NonNeg => DVector::from_element(block.dim, 1.0),
            ConeKind::Soc => {
                let mut e = DVector::zeros(block.dim);
                e[0] = 1.0;
                e
            }
            ConeKind::Psd => {
                let d = block.dim;
                let mut e = DVector::zeros(svec_len(d));
                for i in 0..d {
                    e[svec_index(d, i, i)] = 1.0;
                }
                e
            }
        }
    }

    /// Largest step `alpha` in `[0, 1]` with `point + alpha * dir` still in the
    /// cone. PSD blocks use bisection on the factorization flag.
    pub fn max_step(block: &ConeBlock, point: &DVector<f64>, dir: &DVector<f64>) -> f64 {
        match block.kind {
            ConeKind::NonNeg => {
                let mut alpha: f64 = 1.0;
                for i in 0..point.len() {
                    if dir[i] < 0.0 {
                        alpha = alpha.min(-point[i] / dir[i]);
                    }
                }
                alpha.max(0.0)
            }
            ConeKind::Soc => {
                let a = jdot_soc(dir, dir);
                let b = 2.0 * jdot_soc(point, dir);
                let c = jdot_soc(point, point);
                let lin = if dir[0] < 0.0 { -point[0] / dir[0] } else { 1.0 };
                let quad = smallest_positive_root(a, b, c).unwrap_or(f64::INFINITY);
                quad.min(lin).clamp(0.0, 1.0)
            }
            ConeKind::Psd => {
                let test = |alpha: f64| -> bool {
                    let cand = point + dir * alpha;
                    let mat = smat(&cand).expect("svec length");
                    matches!(factor_spd(&mat), Ok(Some(_)))
                };
                if test(1.0) {
                    return 1.0;
                }
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if test(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    (m + mt) * 0.5
}

/// Smallest positive root of `a x^2 + b x + c = 0`, computed with the
/// cancellation-safe variant of the quadratic formula.
fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let tiny = 1e-300;
    if a.abs() < tiny {
        if b.abs() < tiny {
            return None;
        }
        let r = -c / b;
        return (r > 0.0).then_some(r);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, if q.abs() < tiny { f64::INFINITY } else { c / q });
    let mut best = f64::INFINITY;
    for r in [r1, r2] {
        if r > 0.0 && r < best {
            best = r;
        }
    }
    (best < f64::INFINITY).then_some(best)
}
