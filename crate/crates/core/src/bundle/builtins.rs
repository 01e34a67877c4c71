//! The built-in field corpus and the JSON field specification.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::hopf::{field_from_profiles, hopf_invariant_abelian, HopfParams, HopfProfiles};
use super::{gauge_transform, Domain, Exclusion, FieldKind, FieldSample, Gauge, MonopoleField};
use crate::error::{Error, Result};
use crate::fd::Fd;
use crate::linalg::{mat_exp, sigma3i, Coef, Endo};
use crate::rng;
use crate::sphere::{geodesic_distance, SpherePoint};

pub fn zero(n: usize) -> MonopoleField {
    let eval = move |_: &SpherePoint| Ok(FieldSample::zero(n));
    MonopoleField::new(n, FieldKind::Zero, "zero", Domain::default(), Arc::new(eval))
}

/// `A = 0`, `φ = m·diag(i, −i)`.
pub fn constant_higgs(m: f64) -> MonopoleField {
    let phi = sigma3i().scaled(m);
    let eval = move |_: &SpherePoint| {
        let mut s = FieldSample::zero(2);
        s.phi = phi.clone();
        Ok(s)
    };
    MonopoleField::new(2, FieldKind::ConstantHiggs, "constant_higgs", Domain::default(), Arc::new(eval))
}

/// A smooth non-abelian su(n) field: every slot is
/// `M₀ + Σ qₖ Mₖ + sin(q₀ + 2q₃) M₅` with seeded random `Mᵢ ∈ su(n)`.
pub fn random_smooth(rank: usize, seed: u64, amplitude: f64) -> MonopoleField {
    let mut r = rng::stream(seed, 0x5eed);
    let coeffs: Vec<Vec<Endo>> = (0..4)
        .map(|_| (0..6).map(|_| rng::su(&mut r, rank, amplitude)).collect())
        .collect();
    let eval = move |p: &SpherePoint| {
        let q = p.q();
        let w = [1.0, q[0], q[1], q[2], q[3], (q[0] + 2.0 * q[3]).sin()];
        let slot = |k: usize| {
            let mut m = coeffs[k][0].clone();
            for i in 1..6 {
                m += coeffs[k][i].scaled(w[i]);
            }
            m
        };
        Ok(FieldSample {
            a: [slot(0), slot(1), slot(2)],
            phi: slot(3),
        })
    };
    MonopoleField::new(rank, FieldKind::User, "random_smooth", Domain::default(), Arc::new(eval))
}

/// `ρ(p) = exp(d(p, P₀)^e · X)`, `X = diag(i, −i)`.
pub fn radial_exp_gauge(basepoint: SpherePoint, exponent: f64) -> Arc<dyn Gauge> {
    let x = sigma3i();
    Arc::new(move |p: &SpherePoint| Ok(mat_exp(&x.scaled(geodesic_distance(p, &basepoint).powf(exponent)))))
}

pub const SINGULAR_CORE: f64 = 1e-6;

/// The zero field seen through the Hölder-`e` gauge `exp(d^e X)`.
pub fn singular_gauge(basepoint: SpherePoint, exponent: f64) -> MonopoleField {
    let mut f = gauge_transform(&zero(2), radial_exp_gauge(basepoint, exponent), Fd::default());
    f.label = "singular_gauge".into();
    f.domain = Domain {
        excluded: vec![Exclusion::Ball { center: basepoint, radius: SINGULAR_CORE }],
    };
    f
}

/// `A = 0`, `φ = d(p, P₀)^e · diag(i, −i)`.
pub fn singular_higgs(basepoint: SpherePoint, exponent: f64) -> MonopoleField {
    let s3 = sigma3i();
    let eval = move |p: &SpherePoint| {
        let mut s = FieldSample::zero(2);
        s.phi = s3.scaled(geodesic_distance(p, &basepoint).powf(exponent));
        Ok(s)
    };
    let domain = Domain {
        excluded: vec![Exclusion::Ball { center: basepoint, radius: SINGULAR_CORE }],
    };
    MonopoleField::new(2, FieldKind::User, "singular_higgs", domain, Arc::new(eval))
}

/// `{kind, rank, params | profile_table}`; `profile_table` is a CSV path
/// with header `rho,h,u,v`, relative to the spec file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: String,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    #[serde(default)]
    pub profile_table: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MassParams {
    #[serde(default = "one")]
    m: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomParams {
    #[serde(default)]
    seed: u64,
    #[serde(default = "half")]
    amplitude: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingularParams {
    #[serde(default = "default_basepoint")]
    basepoint: SpherePoint,
    #[serde(default = "fifth")]
    exponent: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    #[serde(default = "margin")]
    margin: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn fifth() -> f64 {
    0.2
}
fn margin() -> f64 {
    HopfParams::default().margin
}
fn default_basepoint() -> SpherePoint {
    SpherePoint::new(crate::sphere::DEFAULT_BASEPOINT).expect("unit")
}

fn params<T: for<'de> Deserialize<'de>>(spec: &FieldSpec) -> Result<T> {
    let v = spec.params.clone().unwrap_or_else(|| serde_json::json!({}));
    serde_json::from_value(v).map_err(|e| Error::BadParams(format!("{}: {e}", spec.kind)))
}

#[derive(Deserialize)]
struct ProfileRow {
    rho: f64,
    h: f64,
    u: f64,
    v: f64,
}

pub fn read_profile_table(path: &Path) -> Result<Vec<[f64; 4]>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for r in rd.deserialize() {
        let r: ProfileRow = r?;
        rows.push([r.rho, r.h, r.u, r.v]);
    }
    Ok(rows)
}

pub fn make_builtin(spec: &FieldSpec, base_dir: Option<&Path>) -> Result<MonopoleField> {
    let rank = spec.rank.unwrap_or(2);
    let field = match spec.kind.as_str() {
        "zero" => {
            if spec.params.is_some() {
                return Err(Error::BadParams("zero takes no params".into()));
            }
            zero(rank)
        }
        "constant_higgs" => constant_higgs(params::<MassParams>(spec)?.m),
        "hopf_invariant_abelian" => match &spec.profile_table {
            Some(path) => {
                let path = base_dir.map(|d| d.join(path)).unwrap_or_else(|| path.into());
                let margin = params::<TableParams>(spec)?.margin;
                let prof = HopfProfiles::from_table(&read_profile_table(&path)?, margin)?;
                field_from_profiles(Arc::new(prof))
            }
            None => hopf_invariant_abelian(&params::<HopfParams>(spec)?)?,
        },
        "random_smooth" => {
            let p = params::<RandomParams>(spec)?;
            random_smooth(rank, p.seed, p.amplitude)
        }
        "singular_gauge" => {
            let p = params::<SingularParams>(spec)?;
            singular_gauge(p.basepoint, p.exponent)
        }
        "singular_higgs" => {
            let p = params::<SingularParams>(spec)?;
            singular_higgs(p.basepoint, p.exponent)
        }
        other => return Err(Error::BadParams(format!("unknown field kind `{other}`"))),
    };
    if field.rank != rank {
        return Err(Error::BadParams(format!("{} has rank {}", spec.kind, field.rank)));
    }
    Ok(field)
}

/// A builtin name, or a path to a JSON field spec.
pub fn load_field_spec(name_or_path: &str) -> Result<MonopoleField> {
    let path = Path::new(name_or_path);
    if path.extension().is_some_and(|e| e == "json") || path.exists() {
        let spec: FieldSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        return make_builtin(&spec, path.parent());
    }
    make_builtin(
        &FieldSpec {
            kind: name_or_path.to_string(),
            ..FieldSpec::default()
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::bogomolny_residual;
    use crate::sphere::FramePolicy;

    #[test]
    fn zero_field_is_zero() {
        let f = zero(3);
        let s = f.sample(&rng::sphere_sample(1, 0)).unwrap();
        assert_eq!(s, FieldSample::zero(3));
    }

    #[test]
    fn specs_parse_and_reject_unknown_keys() {
        let spec: FieldSpec = serde_json::from_str(r#"{"kind":"constant_higgs","params":{"m":2.0}}"#).unwrap();
        let f = make_builtin(&spec, None).unwrap();
        assert_eq!(f.phi(&SpherePoint::identity()).unwrap(), sigma3i().scaled(2.0));
        assert!(serde_json::from_str::<FieldSpec>(r#"{"kind":"zero","colour":1}"#).is_err());
        let bad: FieldSpec = serde_json::from_str(r#"{"kind":"constant_higgs","params":{"mass":2.0}}"#).unwrap();
        assert!(matches!(make_builtin(&bad, None), Err(Error::BadParams(_))));
    }

    #[test]
    fn profile_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = String::from("rho,h,u,v\n");
        for k in 0..=40 {
            let chi = 0.1 + k as f64 * (std::f64::consts::FRAC_PI_2 - 0.2) / 40.0;
            csv += &format!("{chi},0.5,0.0,0.0\n");
        }
        std::fs::write(dir.path().join("p.csv"), csv).unwrap();
        std::fs::write(
            dir.path().join("f.json"),
            r#"{"kind":"hopf_invariant_abelian","profile_table":"p.csv"}"#,
        )
        .unwrap();
        let f = load_field_spec(dir.path().join("f.json").to_str().unwrap()).unwrap();
        let p = super::super::hopf::point_at(0.8, 0.1, 0.4);
        assert!(bogomolny_residual(&f, &p, &FramePolicy::LeftInvariant, &Fd::default()).unwrap() < 1e-12);
    }
}
