use serde::{Deserialize, Serialize};

use super::frame::{
    directional, frame_at, lie_bracket, Frame, FrameField, FramePolicy, Invariant, VectorField,
};
use super::{bracket_basis, SpherePoint, JSIGMA, SIGMA, XI};
use crate::error::{Error, Result};
use crate::fd::Fd;

/// A Riemannian metric, given by its Gram matrix on the invariant basis.
pub trait Metric: Sync {
    fn gram(&self, p: &SpherePoint) -> [[f64; 3]; 3];

    fn inner(&self, p: &SpherePoint, u: &[f64; 3], v: &[f64; 3]) -> f64 {
        let g = self.gram(p);
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += u[a] * g[a][b] * v[b];
            }
        }
        s
    }

    /// Whether the Gram matrix is the identity everywhere.
    fn is_round(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RoundMetric;

impl Metric for RoundMetric {
    fn gram(&self, _: &SpherePoint) -> [[f64; 3]; 3] {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }
    fn is_round(&self) -> bool {
        true
    }
}

/// Round metric plus `eps·h(p)` with a position-dependent symmetric `h`.
/// Only used to check that the residuals respond to symmetry breaking.
#[derive(Clone, Copy, Debug)]
pub struct PerturbedMetric {
    pub eps: f64,
}

impl Metric for PerturbedMetric {
    fn gram(&self, p: &SpherePoint) -> [[f64; 3]; 3] {
        let q = p.q();
        let h = [
            [q[0] * q[2], q[1], 0.5 * q[3]],
            [q[1], q[3] * q[3], q[0]],
            [0.5 * q[3], q[0], q[2] * q[1]],
        ];
        let mut g = RoundMetric.gram(p);
        for a in 0..3 {
            for b in 0..3 {
                g[a][b] += self.eps * h[a][b];
            }
        }
        g
    }
}

fn solve3(g: &[[f64; 3]; 3], rhs: &[f64; 3]) -> [f64; 3] {
    let m = nalgebra::Matrix3::from_fn(|r, c| g[r][c]);
    let b = nalgebra::Vector3::from_column_slice(rhs);
    let x = m.lu().solve(&b).unwrap_or_else(nalgebra::Vector3::zeros);
    [x[0], x[1], x[2]]
}

/// `D_A B` for the round metric: coefficient derivatives plus half the
/// bracket of the basis fields.
pub fn levi_civita(
    a: &dyn VectorField,
    b: &dyn VectorField,
    p: &SpherePoint,
    fd: &Fd,
) -> Result<[f64; 3]> {
    let va = a.coeffs(p)?;
    let vb = b.coeffs(p)?;
    let mut out = match b.constant() {
        Some(_) => [0.0; 3],
        None => directional(&|x| b.coeffs(x), p, &va, fd)?,
    };
    for i in 0..3 {
        for k in 0..3 {
            let c = bracket_basis(i, k);
            for m in 0..3 {
                out[m] += 0.5 * va[i] * vb[k] * c[m];
            }
        }
    }
    Ok(out)
}

/// `D_A B` from the Koszul formula, with every derivative of a metric
/// coefficient taken numerically.
pub fn levi_civita_koszul(
    metric: &dyn Metric,
    a: &dyn VectorField,
    b: &dyn VectorField,
    p: &SpherePoint,
    fd: &Fd,
) -> Result<[f64; 3]> {
    let va = a.coeffs(p)?;
    let vb = b.coeffs(p)?;
    let ab = lie_bracket(a, b, p, fd)?;
    let mut k = [0.0; 3];
    for c in 0..3 {
        let e = Invariant::basis(c);
        let ec = e.0;
        let t1 = directional(&|q| pair(metric, b, &e, q), p, &va, fd)?;
        let t2 = directional(&|q| pair(metric, a, &e, q), p, &vb, fd)?;
        let t3 = directional(&|q| pair(metric, a, b, q), p, &ec, fd)?;
        let ac = lie_bracket(a, &e, p, fd)?;
        let bc = lie_bracket(b, &e, p, fd)?;
        let t4 = metric.inner(p, &ab, &ec);
        let t5 = metric.inner(p, &ac, &vb);
        let t6 = metric.inner(p, &bc, &va);
        k[c] = 0.5 * (t1 + t2 - t3 + t4 - t5 - t6);
    }
    Ok(solve3(&metric.gram(p), &k))
}

fn pair(metric: &dyn Metric, x: &dyn VectorField, y: &dyn VectorField, q: &SpherePoint) -> Result<f64> {
    Ok(metric.inner(q, &x.coeffs(q)?, &y.coeffs(q)?))
}

fn connection(
    metric: &dyn Metric,
    a: &dyn VectorField,
    b: &dyn VectorField,
    p: &SpherePoint,
    fd: &Fd,
) -> Result<[f64; 3]> {
    if metric.is_round() {
        levi_civita(a, b, p, fd)
    } else {
        levi_civita_koszul(metric, a, b, p, fd)
    }
}

/// `v ↦ D_v ξ` on the whole frame, as a matrix in frame coefficients
/// (column `k` is the image of frame vector `k`).
fn nabla_xi(metric: &dyn Metric, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<[[f64; 3]; 3]> {
    let frame = frame_at(p, policy)?;
    let xi = FrameField::new(*policy, XI);
    let mut m = [[0.0; 3]; 3];
    for k in 0..3 {
        let v = FrameField::new(*policy, k);
        let d = frame.from_invariant(&connection(metric, &v, &xi, p, fd)?);
        for r in 0..3 {
            m[r][k] = d[r];
        }
    }
    Ok(m)
}

/// Matrix of `β(v) = D_v ξ` on `ξ⊥` in the `(σ, jσ)` basis.
pub fn beta_operator(
    metric: &dyn Metric,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<[[f64; 2]; 2]> {
    let m = nabla_xi(metric, p, policy, fd)?;
    Ok([[m[0][0], m[0][1]], [m[1][0], m[1][1]]])
}

/// The function `f` defined by `−2f = tr β² + ξ(tr β)`.
pub fn ricci_xi(metric: &dyn Metric, p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<f64> {
    let b = beta_operator(metric, p, policy, fd)?;
    let tr_b2 = b[0][0] * b[0][0] + 2.0 * b[0][1] * b[1][0] + b[1][1] * b[1][1];
    let trace = |q: &SpherePoint| -> Result<f64> {
        let b = beta_operator(metric, q, policy, fd)?;
        Ok(b[0][0] + b[1][1])
    };
    let xi_tr = directional(&trace, p, &[0.0, 0.0, 1.0], fd)?;
    Ok(-0.5 * (tr_b2 + xi_tr))
}

/// `Ric(ξ, ξ)` of the round metric from the curvature tensor of the
/// bi-invariant connection `D_X Y = ½[X, Y]`.
pub fn standard_ricci_xi() -> f64 {
    let br = |u: &[f64; 3], v: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for k in 0..3 {
                let c = bracket_basis(i, k);
                for m in 0..3 {
                    out[m] += u[i] * v[k] * c[m];
                }
            }
        }
        out
    };
    let e = |a: usize| {
        let mut v = [0.0; 3];
        v[a] = 1.0;
        v
    };
    let xi = e(XI);
    let mut ric = 0.0;
    for k in 0..3 {
        let x = e(k);
        // R(X,Y)Z = ¼[X,[Y,Z]] − ¼[Y,[X,Z]] − ½[[X,Y],Z]
        let t1 = br(&x, &br(&xi, &xi));
        let t2 = br(&xi, &br(&x, &xi));
        let t3 = br(&br(&x, &xi), &xi);
        let r = [0, 1, 2].map(|m| 0.25 * t1[m] - 0.25 * t2[m] - 0.5 * t3[m]);
        ric += r[k];
    }
    ric
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeometryResiduals {
    pub geodesibility: f64,
    pub killing: f64,
    pub contact_identity: f64,
    pub integrability: f64,
    pub divergence: f64,
    /// Gap of `dϑ = ι_{β−β*} g`, also folded into `contact_identity`.
    pub contact_cross_check: f64,
}

impl GeometryResiduals {
    pub fn max(&self) -> f64 {
        [
            self.geodesibility,
            self.killing,
            self.contact_identity,
            self.integrability,
            self.divergence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn contact_residuals(
    metric: &dyn Metric,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<GeometryResiduals> {
    let frame = frame_at(p, policy)?;
    let fields = [0, 1, 2].map(|k| FrameField::new(*policy, k));
    let rows = frame.rows;
    let g = |u: &[f64; 3], v: &[f64; 3]| metric.inner(p, u, v);

    // ϑ = g(ξ, ·) on frame vectors, differentiated along the frame.
    let theta = |k: usize| {
        let f = fields[k];
        let xi = fields[XI];
        move |q: &SpherePoint| -> Result<f64> { Ok(metric.inner(q, &xi.coeffs(q)?, &f.coeffs(q)?)) }
    };
    let brackets = {
        let mut b = [[[0.0; 3]; 3]; 3];
        for u in 0..3 {
            for v in 0..3 {
                if u != v {
                    b[u][v] = lie_bracket(&fields[u], &fields[v], p, fd)?;
                }
            }
        }
        b
    };
    let mut dtheta = [[0.0; 3]; 3];
    for u in 0..3 {
        for v in 0..3 {
            if u == v {
                continue;
            }
            dtheta[u][v] = directional(&theta(v), p, &rows[u], fd)?
                - directional(&theta(u), p, &rows[v], fd)?
                - g(&rows[XI], &brackets[u][v]);
        }
    }

    let nxi = nabla_xi(metric, p, policy, fd)?;
    // frame-coefficient image of D_k ξ, then pushed back to invariant coordinates
    let dxi = |k: usize| frame.to_invariant(&[nxi[0][k], nxi[1][k], nxi[2][k]]);

    let dxixi = dxi(XI);
    let geodesibility = g(&dxixi, &dxixi)
        .sqrt()
        .max(dtheta[XI][SIGMA].abs())
        .max(dtheta[XI][JSIGMA].abs());

    // L_ξ g(u,v) = ξ g(u,v) − g([ξ,u], v) − g(u, [ξ,v])
    let pair = |u: usize, v: usize| {
        let (fu, fv) = (fields[u], fields[v]);
        move |q: &SpherePoint| -> Result<f64> { Ok(metric.inner(q, &fu.coeffs(q)?, &fv.coeffs(q)?)) }
    };
    let divergence = nxi[0][0] + nxi[1][1] + nxi[2][2];
    let mut killing: f64 = 0.0;
    for u in 0..3 {
        for v in 0..3 {
            let lie = directional(&pair(u, v), p, &rows[XI], fd)?
                - g(&brackets[XI][u], &rows[v])
                - g(&rows[u], &brackets[XI][v]);
            let horizontal = u != XI && v != XI;
            let target = if horizontal { divergence * g(&rows[u], &rows[v]) } else { 0.0 };
            killing = killing.max((lie - target).abs()).max(lie.abs());
        }
    }
    for u in 0..2 {
        for v in 0..2 {
            let sym = g(&dxi(v), &rows[u]) + g(&rows[v], &dxi(u));
            killing = killing.max(sym.abs());
        }
    }

    let f = ricci_xi(metric, p, policy, fd)?;
    let omega = g(&rows[JSIGMA], &rows[JSIGMA]);
    let mut contact: f64 = (dtheta[SIGMA][JSIGMA] - 2.0 * f.max(0.0).sqrt() * omega).abs();
    contact = contact
        .max(dtheta[SIGMA][XI].abs())
        .max(dtheta[JSIGMA][XI].abs());
    let mut cross: f64 = 0.0;
    for u in 0..3 {
        for v in 0..3 {
            // g((β − β*)u, v) = g(D_u ξ, v) − g(u, D_v ξ)
            let rhs = g(&dxi(u), &rows[v]) - g(&rows[u], &dxi(v));
            cross = cross.max((dtheta[u][v] - rhs).abs());
        }
    }

    // [ξ, jσ] − j[ξ, σ] in frame coefficients
    let xs = frame.from_invariant(&brackets[XI][SIGMA]);
    let xjs = frame.from_invariant(&brackets[XI][JSIGMA]);
    let jxs = Frame::apply_j(&xs);
    let integrability = (0..3)
        .map(|k| (xjs[k] - jxs[k]).abs())
        .fold(xs[XI].abs(), f64::max);

    Ok(GeometryResiduals {
        geodesibility,
        killing,
        contact_identity: contact.max(cross),
        integrability,
        divergence: divergence.abs(),
        contact_cross_check: cross,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub lambda: f64,
    /// `‖[σ,ξ] − 4λ jσ‖`
    pub bracket_residual: f64,
    /// `‖[Z,ξ] − i(4λ) Z‖` with `Z = σ − i jσ`
    pub z_residual: f64,
    /// `|g([σ,ξ], ξ)|` and `|g([σ,ξ], σ)|`
    pub xi_component: f64,
    pub sigma_component: f64,
}

/// `λ = ¼ g([σ, ξ], jσ)` with its consistency residuals (round metric).
pub fn lambda_at(p: &SpherePoint, policy: &FramePolicy, fd: &Fd) -> Result<LambdaReport> {
    let frame = frame_at(p, policy).map_err(|e| match e {
        Error::PolicyChartMiss => Error::FrameDegenerate,
        e => e,
    })?;
    let s = FrameField::new(*policy, SIGMA);
    let js = FrameField::new(*policy, JSIGMA);
    let x = FrameField::new(*policy, XI);
    let sx = frame.from_invariant(&lie_bracket(&s, &x, p, fd)?);
    let jsx = frame.from_invariant(&lie_bracket(&js, &x, p, fd)?);
    let lambda = 0.25 * sx[JSIGMA];
    let l4 = 4.0 * lambda;
    let bracket_residual = (sx[0].powi(2) + (sx[1] - l4).powi(2) + sx[2].powi(2)).sqrt();
    // real part [σ,ξ] − 4λ jσ, imaginary part −[jσ,ξ] − 4λ σ
    let im = [-jsx[0] - l4, -jsx[1], -jsx[2]];
    let z_residual = (bracket_residual.powi(2) + im.iter().map(|v| v * v).sum::<f64>()).sqrt();
    Ok(LambdaReport {
        lambda,
        bracket_residual,
        z_residual,
        xi_component: sx[XI].abs(),
        sigma_component: sx[SIGMA].abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points() -> Vec<SpherePoint> {
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.4, -0.3, 0.6, 0.2],
            [-0.1, 0.7, 0.2, 0.5],
            [0.3, 0.3, -0.3, 0.8],
        ]
        .iter()
        .map(|q| SpherePoint::normalize(*q).unwrap())
        .collect()
    }

    #[test]
    fn d_sigma_xi_is_jsigma() {
        let e = SpherePoint::identity();
        let d = levi_civita(&Invariant::basis(SIGMA), &Invariant::basis(XI), &e, &Fd::default()).unwrap();
        assert_eq!(e.ambient(&d), [0.0, 0.0, 0.0, 1.0]);
        let dxx = levi_civita(&Invariant::basis(XI), &Invariant::basis(XI), &e, &Fd::default()).unwrap();
        assert_eq!(dxx, [0.0; 3]);
    }

    #[test]
    fn koszul_agrees_with_half_bracket() {
        let a = Invariant([0.3, -1.2, 0.7]);
        let b = Invariant([-0.5, 0.4, 1.1]);
        for p in points() {
            let x = levi_civita(&a, &b, &p, &Fd::default()).unwrap();
            let y = levi_civita_koszul(&RoundMetric, &a, &b, &p, &Fd::default()).unwrap();
            for k in 0..3 {
                assert!((x[k] - y[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn beta_is_j_and_f_is_one() {
        let fd = Fd::default();
        for p in points() {
            for policy in [FramePolicy::LeftInvariant, FramePolicy::flow_lift(SpherePoint::identity())] {
                let b = beta_operator(&RoundMetric, &p, &policy, &fd).unwrap();
                let j = [[0.0, -1.0], [1.0, 0.0]];
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((b[r][c] - j[r][c]).abs() < 1e-8, "{policy:?} {b:?}");
                    }
                }
                let f = ricci_xi(&RoundMetric, &p, &policy, &fd).unwrap();
                assert!((f - 1.0).abs() < 1e-8);
            }
        }
        assert!((standard_ricci_xi() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn round_sphere_is_sasakian() {
        let fd = Fd::default();
        for p in points() {
            for policy in [FramePolicy::LeftInvariant, FramePolicy::flow_lift(SpherePoint::identity())] {
                let r = contact_residuals(&RoundMetric, &p, &policy, &fd).unwrap();
                assert!(r.max() < 1e-6, "{policy:?} {r:?}");
            }
        }
    }

    #[test]
    fn perturbed_metric_breaks_contact_identity() {
        let p = points()[1];
        let r = contact_residuals(&PerturbedMetric { eps: 0.1 }, &p, &FramePolicy::LeftInvariant, &Fd::default())
            .unwrap();
        assert!(r.contact_identity > 1e-3, "{r:?}");
    }

    #[test]
    fn lambda_by_policy() {
        let fd = Fd::default();
        for p in points() {
            let l = lambda_at(&p, &FramePolicy::LeftInvariant, &fd).unwrap();
            assert!((l.lambda - 0.5).abs() < 1e-10);
            assert!(l.z_residual < 1e-10);
            let l = lambda_at(&p, &FramePolicy::flow_lift(SpherePoint::identity()), &fd).unwrap();
            assert!(l.lambda.abs() < 1e-6);
            assert!(l.z_residual < 1e-6 && l.xi_component < 1e-8 && l.sigma_component < 1e-8);
        }
    }
}
