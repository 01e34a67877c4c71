//! The coupled system for `ψ`, the potential equations `E1`, `E2`, the
//! commutator identity for `∇̂ = ∇ + ϑ⊗φ̂` with `φ̂ = −2iφ`, and the
//! comparison between the cone equation `∂̄Ψ = ι_Z F′` and its reduction.
//!
//! Complex directions are `Z = σ − i·jσ` and `Z̄ = σ + i·jσ` of the policy
//! frame; `∇_Z` is extended complex-linearly.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bundle::{bogomolny_residual, covariant, curvature_components, lift_curvature, FieldSample, MonopoleField};
use crate::cone::{Calibration, ConePoint};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{c, commutator, cscale, frob, zeros, Coef, Endo, I};
use crate::potential::{psi_field, PotentialSolution};
use crate::sphere::{lie_bracket, lambda_at, FrameField, FramePolicy, SpherePoint, JSIGMA, SIGMA, XI};

pub type EndoFn<'a> = &'a dyn Fn(&SpherePoint) -> Result<Endo>;

/// Nested differences need `h² ≥ 100·ε_mach`.
fn check_nested(fd: &Fd) -> Result<()> {
    if fd.step * fd.step < 100.0 * f64::EPSILON {
        return Err(Error::BadParams(format!("fd step {} too small for second derivatives", fd.step)));
    }
    Ok(())
}

fn out_of_box(e: Error) -> Error {
    match e {
        Error::EvalDomain | Error::DomainExcluded => Error::StencilOutOfBox,
        e => e,
    }
}

/// `∇_Z f` (or `∇_Z̄ f` when `conj`).
pub fn nabla_complex(
    field: &MonopoleField,
    f: EndoFn,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
    conj: bool,
) -> Result<Endo> {
    let rows = policy.rows(p)?;
    let a = covariant(field, f, p, &rows[SIGMA], fd)?;
    let b = covariant(field, f, p, &rows[JSIGMA], fd)?;
    Ok(a + cscale(&b, if conj { I } else { -I }))
}

pub fn nabla_xi(field: &MonopoleField, f: EndoFn, p: &SpherePoint, fd: &Fd) -> Result<Endo> {
    covariant(field, f, p, &[0.0, 0.0, 1.0], fd)
}

/// The connection `∇̂ = ∇ + ϑ⊗φ̂`; `ϑ` is dual to `ξ = e₂`.
pub fn hat_field(field: &MonopoleField) -> MonopoleField {
    let base = field.clone();
    let eval = move |p: &SpherePoint| -> Result<FieldSample> {
        let mut s = base.sample(p)?;
        s.a[2] += cscale(&s.phi, c(0.0, -2.0));
        Ok(s)
    };
    MonopoleField::new(field.rank, field.kind, format!("{} (hat)", field.label), field.domain.clone(), Arc::new(eval))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoupledResiduals {
    /// `‖∇_Z̄ψ − 2i∇_ξφ‖`
    pub r1: f64,
    /// `‖(∇_ξ − 2iφ)ψ + 2i∇_Zφ‖`
    pub r2: f64,
    /// Largest difference between the expanded and the `∇̂, φ̂` forms.
    pub concise_gap: f64,
}

pub fn coupled_residuals(
    field: &MonopoleField,
    psi: EndoFn,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<CoupledResiduals> {
    let run = || -> Result<CoupledResiduals> {
        let phi = |q: &SpherePoint| field.phi(q);
        let psi0 = psi(p)?;
        let phi0 = field.phi(p)?;
        let i2 = c(0.0, 2.0);
        let e1 = nabla_complex(field, psi, p, policy, fd, true)? - cscale(&nabla_xi(field, &phi, p, fd)?, i2);
        let e2 = nabla_xi(field, psi, p, fd)? - cscale(&commutator(&phi0, &psi0), i2)
            + cscale(&nabla_complex(field, &phi, p, policy, fd, false)?, i2);

        let hat = hat_field(field);
        let phi_hat = |q: &SpherePoint| Ok(cscale(&field.phi(q)?, -i2));
        let c1 = nabla_complex(&hat, psi, p, policy, fd, true)? + nabla_xi(&hat, &phi_hat, p, fd)?;
        let c2 = nabla_xi(&hat, psi, p, fd)? - nabla_complex(&hat, &phi_hat, p, policy, fd, false)?;
        Ok(CoupledResiduals {
            r1: frob(&e1),
            r2: frob(&e2),
            concise_gap: frob(&(c1 - &e1)).max(frob(&(c2 - &e2))),
        })
    };
    run().map_err(out_of_box)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialResiduals {
    /// `‖∇_Z̄∇_ZΦ + ∇_ξφ‖`
    pub e1: f64,
    /// `‖λ∇_ZΦ + [∇_Zφ, Φ]‖`, without the `λ` term in corollary mode.
    pub e2: f64,
    pub lambda: f64,
    pub nabla_z_potential: f64,
    /// `‖[∇_Zφ, Φ]‖`
    pub commutator_term: f64,
    /// `E2` with the alternative factor `λ = 2`.
    pub e2_alt: f64,
    /// `| ‖R(λ) − R(2)‖ − |λ − 2|·‖∇_ZΦ‖ |`
    pub lambda_relation_gap: f64,
}

pub const LAMBDA_ALT: f64 = 2.0;

pub fn obstruction_residuals(
    sol: &PotentialSolution,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
    corollary: bool,
) -> Result<PotentialResiduals> {
    check_nested(fd)?;
    let field = sol.field();
    let run = || -> Result<PotentialResiduals> {
        let pot = |q: &SpherePoint| sol.eval(q);
        let nz = |q: &SpherePoint| nabla_complex(field, &pot, q, policy, fd, false);
        let phi = |q: &SpherePoint| field.phi(q);
        let e1 = nabla_complex(field, &nz, p, policy, fd, true)? + nabla_xi(field, &phi, p, fd)?;
        let nz0 = nz(p)?;
        let comm = commutator(&nabla_complex(field, &phi, p, policy, fd, false)?, &pot(p)?);
        let lambda = lambda_at(p, policy, fd)?.lambda;
        let l_used = if corollary { 0.0 } else { lambda };
        let r = nz0.scaled(l_used) + &comm;
        let r_alt = nz0.scaled(LAMBDA_ALT) + &comm;
        let gap = (frob(&(&r - &r_alt)) - (l_used - LAMBDA_ALT).abs() * frob(&nz0)).abs();
        Ok(PotentialResiduals {
            e1: frob(&e1),
            e2: frob(&r),
            lambda,
            nabla_z_potential: frob(&nz0),
            commutator_term: frob(&comm),
            e2_alt: frob(&r_alt),
            lambda_relation_gap: gap,
        })
    };
    run().map_err(out_of_box)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CommutatorIdentity {
    /// `‖[∇̂_Z, ∇̂_ξ]Φ − ∇̂_{[Z,ξ]}Φ − [F̂(Z,ξ), Φ]‖`
    pub residual: f64,
    /// `‖ι_Zι_ξF̂ + 2∇_Zφ̂‖`; vanishes on Bogomolny solutions.
    pub sub_identity: f64,
    /// `‖∇̂_{[Z,ξ]}Φ + [F̂(Z,ξ),Φ] − 4i(λ∇_ZΦ − [∇_Zφ, Φ])‖`, using
    /// `[Z,ξ] = i(4λ)Z` and the sub-identity.
    pub rewritten: f64,
    /// `‖[Z,ξ] − i(4λ)Z‖`
    pub bracket: f64,
}

pub fn commutator_identity_residual(
    field: &MonopoleField,
    pot: EndoFn,
    p: &SpherePoint,
    policy: &FramePolicy,
    fd: &Fd,
) -> Result<CommutatorIdentity> {
    check_nested(fd)?;
    let run = || -> Result<CommutatorIdentity> {
        let hat = hat_field(field);
        let hz = |q: &SpherePoint| nabla_complex(&hat, pot, q, policy, fd, false);
        let hx = |q: &SpherePoint| nabla_xi(&hat, pot, q, fd);
        let lhs = nabla_complex(&hat, &hx, p, policy, fd, false)? - nabla_xi(&hat, &hz, p, fd)?;

        let (s, js, x) = (FrameField::new(*policy, SIGMA), FrameField::new(*policy, JSIGMA), FrameField::new(*policy, XI));
        let re = lie_bracket(&s, &x, p, fd)?;
        let im = lie_bracket(&js, &x, p, fd)?;
        let along = |v: &[f64; 3]| covariant(&hat, pot, p, v, fd);
        let bracket_term = along(&re)? - cscale(&along(&im)?, I);
        let fh = curvature_components(&hat, p, policy, fd)?;
        let f_zx = &fh.f13 - cscale(&fh.f23, I);
        let phi0 = pot(p)?;
        let rhs = &bracket_term + commutator(&f_zx, &phi0);

        let lam = lambda_at(p, policy, fd)?;
        let phi = |q: &SpherePoint| field.phi(q);
        let nz_phi = nabla_complex(field, &phi, p, policy, fd, false)?;
        let sub = -f_zx.clone() + cscale(&nz_phi, c(0.0, -4.0));
        let nz_pot = nabla_complex(field, pot, p, policy, fd, false)?;
        let rewritten = &rhs - cscale(&(nz_pot.scaled(lam.lambda) - commutator(&nz_phi, &phi0)), c(0.0, 4.0));
        Ok(CommutatorIdentity {
            residual: frob(&(lhs - rhs)),
            sub_identity: frob(&sub),
            rewritten: frob(&rewritten),
            bracket: lam.z_residual,
        })
    };
    run().map_err(out_of_box)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `‖∂̄_E Ψ − ι_Z F′‖` on the cone, orthonormal slots.
    pub four_d: f64,
    /// The same norm assembled from `R1, R2`.
    pub assembled: f64,
    pub gap: f64,
    /// Largest slotwise difference between the two computations.
    pub slot_gap: f64,
    /// `‖i r·D(∂t) − D(ξ)‖` with `J ξ = r ∂t`.
    pub slot_coincidence: f64,
}

pub const DEFAULT_BOGOMOLNY_TOL: f64 = 1e-4;

pub fn equivalence_gap(
    field: &MonopoleField,
    psi: EndoFn,
    cp: &ConePoint,
    policy: &FramePolicy,
    cal: &Calibration,
    fd: &Fd,
    bogomolny_tol: f64,
) -> Result<EquivalenceReport> {
    let p = &cp.p;
    let residual = bogomolny_residual(field, p, policy, fd)?;
    if residual > bogomolny_tol {
        return Err(Error::NotABogomolnySolution { residual, tol: bogomolny_tol });
    }
    let run = || -> Result<EquivalenceReport> {
        let t = cp.t;
        let r = cal.reeb_sign * 2.0 * t * cal.c.sqrt();
        let lift = lift_curvature(field, cp, policy, cal, fd)?;
        let rows = policy.rows(p)?;
        let psi0 = psi(p)?;
        let nabla_prime: Vec<Endo> = (0..4)
            .map(|a| {
                if a < 3 {
                    covariant(field, psi, p, &rows[a], fd)
                } else {
                    Ok(commutator(&lift.connection[3], &psi0))
                }
            })
            .collect::<Result<_>>()?;
        let apply = |v: &[f64; 4]| -> Endo {
            let mut out = zeros(field.rank);
            for a in 0..4 {
                if v[a] != 0.0 {
                    out += nabla_prime[a].scaled(v[a]);
                }
            }
            out
        };
        let f = |a: usize, b: usize| -> Endo {
            match (a < b, a == b) {
                (_, true) => zeros(field.rank),
                (true, _) => lift.curvature.get(a, b).expect("pair"),
                (false, _) => -lift.curvature.get(b, a).expect("pair"),
            }
        };
        let scales = [1.0 / t, 1.0 / t, 1.0 / t, 2.0 * cal.c.sqrt()];
        let d: Vec<Endo> = (0..4)
            .map(|a| {
                let mut v = [0.0; 4];
                v[a] = 1.0;
                let dbar = apply(&v) + cscale(&apply(&cal.j(t, &v)), I);
                let iz = f(0, a) - cscale(&f(1, a), I);
                dbar - iz
            })
            .collect();

        let phi = |q: &SpherePoint| field.phi(q);
        let i2 = c(0.0, 2.0);
        let r1 = nabla_complex(field, psi, p, policy, fd, true)? - cscale(&nabla_xi(field, &phi, p, fd)?, i2);
        let r2 = nabla_xi(field, psi, p, fd)? - cscale(&commutator(&field.phi(p)?, &psi0), i2)
            + cscale(&nabla_complex(field, &phi, p, policy, fd, false)?, i2);
        let slots = [r1.clone(), cscale(&r1, -I), r2.clone(), cscale(&r2, c(0.0, -1.0 / r))];

        let norm = |m: &[Endo]| -> f64 { (0..4).map(|a| (scales[a] * frob(&m[a])).powi(2)).sum::<f64>().sqrt() };
        let four_d = norm(&d);
        let assembled = norm(&slots);
        let slot_gap = (0..4).map(|a| scales[a] * frob(&(&d[a] - &slots[a]))).fold(0.0, f64::max);
        let slot_coincidence = frob(&(cscale(&d[3], c(0.0, r)) - &d[2]));
        Ok(EquivalenceReport {
            four_d,
            assembled,
            gap: (four_d - assembled).abs(),
            slot_gap,
            slot_coincidence,
        })
    };
    run().map_err(out_of_box)
}

/// One point of an obstruction sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: SpherePoint,
    pub r1: f64,
    pub r2: f64,
    pub e1: f64,
    pub e2: f64,
    pub eq5: f64,
    pub equivalence_gap: f64,
}

/// Every residual at one point of the flow box, with `ψ` from the potential.
pub fn sweep_point(
    sol: &PotentialSolution,
    p: &SpherePoint,
    policy: &FramePolicy,
    cal: &Calibration,
    fd: &Fd,
    corollary: bool,
    bogomolny_tol: f64,
) -> Result<SweepRow> {
    let field = sol.field();
    let psi = psi_field(sol, *policy, *fd);
    let psi_fn = |q: &SpherePoint| psi.eval(q);
    let pot = |q: &SpherePoint| sol.eval(q);
    let cr = coupled_residuals(field, &psi_fn, p, policy, fd)?;
    let pr = obstruction_residuals(sol, p, policy, fd, corollary)?;
    let eq5 = commutator_identity_residual(field, &pot, p, policy, fd)?.residual;
    let gap = match equivalence_gap(field, &psi_fn, &ConePoint::new(*p, 1.0)?, policy, cal, fd, bogomolny_tol) {
        Ok(r) => r.gap,
        Err(Error::NotABogomolnySolution { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(SweepRow {
        point: *p,
        r1: cr.r1,
        r2: cr.r2,
        e1: pr.e1,
        e2: pr.e2,
        eq5,
        equivalence_gap: gap,
    })
}

pub fn write_sweep_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["q0", "q1", "q2", "q3", "r1", "r2", "e1", "e2", "eq5", "equivalence_gap"])?;
    for r in rows {
        let q = r.point.q();
        let vals = [q[0], q[1], q[2], q[3], r.r1, r.r2, r.e1, r.e2, r.eq5, r.equivalence_gap];
        wr.write_record(vals.iter().map(|x| format!("{x:e}")))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{constant_higgs, random_smooth, zero};
    use crate::potential::{flow_box, solve_potential, FlowBoxParams};

    fn bx() -> crate::potential::FlowBox {
        flow_box(&SpherePoint::identity(), FlowBoxParams { radius: 0.3, eps: 0.5, delta: 0.0, resolution: 1 }).unwrap()
    }

    fn probe() -> SpherePoint {
        bx().point([0.08, -0.05], 0.15)
    }

    #[test]
    fn zero_field_is_trivial() {
        let f = zero(2);
        let z = |_: &SpherePoint| Ok(zeros(2));
        let p = probe();
        let cr = coupled_residuals(&f, &z, &p, &FramePolicy::LeftInvariant, &Fd::default()).unwrap();
        assert_eq!((cr.r1, cr.r2), (0.0, 0.0));
        let sol = solve_potential(&f, &bx(), 0.05).unwrap();
        let pr = obstruction_residuals(&sol, &p, &FramePolicy::LeftInvariant, &Fd::default(), false).unwrap();
        assert_eq!((pr.e1, pr.e2), (0.0, 0.0));
        let id = commutator_identity_residual(&f, &z, &p, &FramePolicy::LeftInvariant, &Fd::default()).unwrap();
        assert_eq!(id.residual, 0.0);
        let eq = equivalence_gap(&f, &z, &ConePoint::new(p, 1.3).unwrap(), &FramePolicy::LeftInvariant, &Calibration::ROUND, &Fd::default(), 1e-8)
            .unwrap();
        assert_eq!(eq.gap, 0.0);
    }

    #[test]
    fn concise_form_agrees_on_random_data() {
        let f = random_smooth(2, 5, 0.7);
        let g = random_smooth(2, 6, 0.7);
        let psi = |q: &SpherePoint| g.phi(q);
        let cr = coupled_residuals(&f, &psi, &probe(), &FramePolicy::LeftInvariant, &Fd::default()).unwrap();
        assert!(cr.concise_gap < 1e-10 && cr.r1 > 1e-3);
    }

    #[test]
    fn identity_five_on_random_data() {
        let f = random_smooth(2, 8, 0.6);
        let g = random_smooth(2, 9, 0.6);
        let pot = |q: &SpherePoint| g.phi(q);
        for policy in [FramePolicy::LeftInvariant, FramePolicy::flow_lift(SpherePoint::identity())] {
            let id = commutator_identity_residual(&f, &pot, &probe(), &policy, &Fd::default()).unwrap();
            assert!(id.residual < 1e-5, "{id:?}");
            assert!(id.bracket < 1e-6);
        }
    }

    #[test]
    fn constant_higgs_pipeline() {
        let f = constant_higgs(1.0);
        let fd = Fd::default();
        let p = probe();
        let sol = solve_potential(&f, &bx(), 0.05).unwrap();
        let lift = FramePolicy::flow_lift(SpherePoint::identity());
        let pr = obstruction_residuals(&sol, &p, &lift, &fd, false).unwrap();
        assert!(pr.e2 < 1e-7, "{pr:?}");
        let left = FramePolicy::LeftInvariant;
        let pr = obstruction_residuals(&sol, &p, &left, &fd, false).unwrap();
        assert!((pr.lambda - 0.5).abs() < 1e-10);
        assert!(pr.lambda_relation_gap < 1e-12);
        assert!(pr.commutator_term < 1e-10);
        let psi = psi_field(&sol, left, fd);
        let psi_fn = |q: &SpherePoint| psi.eval(q);
        let cr = coupled_residuals(&f, &psi_fn, &p, &left, &fd).unwrap();
        assert!((cr.r1 - 2.0 * pr.e1).abs() < 1e-5 * (1.0 + pr.e1), "{cr:?} {pr:?}");
        assert!((cr.r2 - 8.0 * pr.e2).abs() < 1e-5 * (1.0 + pr.e2), "{cr:?} {pr:?}");
        let pot = |q: &SpherePoint| sol.eval(q);
        let id = commutator_identity_residual(&f, &pot, &p, &left, &fd).unwrap();
        assert!(id.residual < 1e-5 && id.sub_identity < 1e-6 && id.rewritten < 1e-5, "{id:?}");
        let eq = equivalence_gap(&f, &psi_fn, &ConePoint::new(p, 0.8).unwrap(), &left, &Calibration::ROUND, &fd, 1e-8).unwrap();
        assert!(eq.gap < 1e-5 && eq.slot_coincidence < 1e-8, "{eq:?}");
    }

    #[test]
    fn equivalence_requires_a_solution() {
        let f = random_smooth(2, 3, 0.5);
        let z = |_: &SpherePoint| Ok(zeros(2));
        let e = equivalence_gap(&f, &z, &ConePoint::new(probe(), 1.0).unwrap(), &FramePolicy::LeftInvariant, &Calibration::ROUND, &Fd::default(), 1e-4);
        assert!(matches!(e, Err(Error::NotABogomolnySolution { .. })));
    }
}
