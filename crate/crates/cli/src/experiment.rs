//! The experiment description: JSON file, command-line flags, or both
//! (flags win). Normalization fills every default so the manifest records
//! exactly what ran.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinconc::fock::DEFAULT_N_LIST;
use spinconc::quadrature::{build_rule, Purpose, QuadRule, RuleKind};
use spinconc::schema::{CapSpec, DensitySpec, FockPolySpec, PlanarRegionSpec, PolySpec, RegionSpec};
use spinconc::sharpness::DEFAULT_EPS;
use spinconc::sphere::SpherePoint;
use spinconc::wehrl::PhiSpec;
use spinconc::Cx;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Concentrate,
    Deficit,
    Stability,
    Asymmetry,
    Wehrl,
    Levelsets,
    Schatten,
    Mixed,
    FockLimit,
    Sharpness,
    Acceptance,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Concentrate => "concentrate",
            Kind::Deficit => "deficit",
            Kind::Stability => "stability",
            Kind::Asymmetry => "asymmetry",
            Kind::Wehrl => "wehrl",
            Kind::Levelsets => "levelsets",
            Kind::Schatten => "schatten",
            Kind::Mixed => "mixed",
            Kind::FockLimit => "fock-limit",
            Kind::Sharpness => "sharpness",
            Kind::Acceptance => "acceptance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    #[default]
    Csv,
    Json,
}

impl OutFormat {
    pub fn ext(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }

    pub fn table_format(self) -> spinconc::table::Format {
        match self {
            OutFormat::Csv => spinconc::table::Format::Csv,
            OutFormat::Json => spinconc::table::Format::Json,
        }
    }
}

/// Node-count and tolerance overrides for the tensor rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RuleOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl RuleOverride {
    pub fn is_empty(&self) -> bool {
        self.n_s.is_none() && self.n_theta.is_none() && self.tolerance.is_none()
    }

    /// The purpose default for degree `n` with overrides applied.
    pub fn rule(&self, n: usize, purpose: Purpose) -> Result<QuadRule, CliError> {
        let base = build_rule(n, purpose)?;
        let RuleKind::TensorProduct { n_s, n_theta } = base.kind else {
            unreachable!("build_rule returns tensor rules")
        };
        let rule = QuadRule::tensor(self.n_s.unwrap_or(n_s), self.n_theta.unwrap_or(n_theta))?;
        Ok(rule.with_tolerance(self.tolerance.unwrap_or(base.target_abs_tol)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Kind>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N_list", default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<PolySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<PhiSpec>>,
    /// Fock-space `P` (monomial coefficients).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_poly: Option<FockPolySpec>,
    /// Second argument of the inner-product row; defaults to `fock_poly`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_poly_q: Option<FockPolySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planar_region: Option<PlanarRegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    /// Schatten exponent; `"inf"` for the operator norm.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_extended_f64")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// JSON has no infinity; accept and emit the string `"inf"`.
mod opt_extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() => s.serialize_str("inf"),
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(x)) => Ok(Some(x)),
            Some(Raw::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_MEASURE: f64 = 0.25;
pub const DEFAULT_PROFILE_POINTS: usize = 100;
pub const DEFAULT_SHARPNESS_N: [usize; 3] = [2, 4, 8];

/// Parses JSON, reporting the path of the offending field.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." { String::new() } else { format!(" at `{path}`") };
        CliError::Schema(format!("{what}{at}: {}", e.inner()))
    })
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

fn parse_center(s: &str) -> Result<SpherePoint<f64>, CliError> {
    let s = s.trim();
    if s == "inf" {
        return Ok(SpherePoint::Infinity);
    }
    let z: Cx<f64> = s
        .parse()
        .map_err(|_| CliError::Schema(format!("region: cannot parse cap center {s:?}")))?;
    Ok(SpherePoint::new(z.re, z.im)?)
}

/// `cap:<center>,measure=<m>` or `cap:<center>,radius=<r>`, optionally
/// prefixed by `!` for the complement; `;` separates union members.
/// Centers are `inf` or complex literals such as `0.3-0.2i`. A value
/// starting with `{` is read as JSON.
pub fn parse_region(s: &str) -> Result<RegionSpec, CliError> {
    let s = s.trim();
    if s.starts_with('{') {
        return parse_json(s, "region");
    }
    let terms = s.split(';').map(parse_region_term).collect::<Result<Vec<_>, _>>()?;
    Ok(if terms.len() == 1 { terms.into_iter().next().expect("one term") } else { RegionSpec::Union(terms) })
}

fn parse_region_term(s: &str) -> Result<RegionSpec, CliError> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('!') {
        return Ok(RegionSpec::Complement(Box::new(parse_region_term(rest)?)));
    }
    let bad = || CliError::Schema(format!("region: expected `cap:<center>,measure=<m>` or `cap:<center>,radius=<r>`, got {s:?}"));
    let body = s.strip_prefix("cap:").ok_or_else(bad)?;
    let (center, size) = body.rsplit_once(',').ok_or_else(bad)?;
    let (key, value) = size.split_once('=').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    let center = parse_center(center)?;
    let cap = match key.trim() {
        "measure" => CapSpec { center, chordal_radius: None, measure: Some(value) },
        "radius" => CapSpec { center, chordal_radius: Some(value), measure: None },
        _ => return Err(bad()),
    };
    Ok(RegionSpec::Cap(cap))
}

/// `xlogx`, `power:<p>`, `hinge:<tau>`, comma separated, or a JSON array.
pub fn parse_phi(s: &str) -> Result<Vec<PhiSpec>, CliError> {
    let s = s.trim();
    if s.starts_with('[') {
        return parse_json(s, "phi");
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let param = |rest: &str| {
                rest.parse::<f64>().map_err(|_| CliError::Schema(format!("phi: bad parameter in {t:?}")))
            };
            if t == "xlogx" {
                Ok(PhiSpec::XLogX)
            } else if let Some(r) = t.strip_prefix("power:") {
                Ok(PhiSpec::Power { p: param(r)? })
            } else if let Some(r) = t.strip_prefix("hinge:") {
                Ok(PhiSpec::Hinge { tau: param(r)? })
            } else {
                Err(CliError::Schema(format!("phi: unknown family {t:?}")))
            }
        })
        .collect()
}

fn need_n(spec: &ExperimentSpec) -> usize {
    spec.n.unwrap_or(DEFAULT_N)
}

impl ExperimentSpec {
    /// Fields given in `over` replace those in `self`.
    pub fn merge(self, over: ExperimentSpec) -> ExperimentSpec {
        macro_rules! pick {
            ($($f:ident),*) => { ExperimentSpec { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(subcommand, n, n_list, poly, density, region, phi, fock_poly, fock_poly_q, planar_region, eps, p, trials, seed, rule, profile_points, criteria, format, output)
    }

    /// Fills defaults for `kind` and validates. Fields irrelevant to
    /// `kind` are rejected so the manifest never lists unused inputs.
    pub fn normalize(mut self, kind: Kind) -> Result<ExperimentSpec, CliError> {
        if let Some(k) = self.subcommand {
            if k != kind {
                return Err(CliError::Schema(format!(
                    "subcommand: file requests `{}` but `{}` was invoked",
                    k.name(),
                    kind.name()
                )));
            }
        }
        self.subcommand = Some(kind);
        self.seed.get_or_insert(DEFAULT_SEED);
        self.format.get_or_insert_default();
        self.output.get_or_insert_with(|| PathBuf::from("spinconc-out").join(kind.name()));
        let allowed: &[&str] = match kind {
            Kind::Concentrate | Kind::Deficit | Kind::Stability => &["N", "poly", "region", "trials", "rule"],
            Kind::Asymmetry => &["region"],
            Kind::Wehrl => &["N", "poly", "phi", "trials", "rule"],
            Kind::Levelsets => &["N", "poly", "trials", "profile_points"],
            Kind::Schatten => &["N", "region", "p", "rule"],
            Kind::Mixed => &["N", "density", "region", "phi", "trials", "rule"],
            Kind::FockLimit => &["N_list", "fock_poly", "fock_poly_q", "planar_region", "phi"],
            Kind::Sharpness => &["N", "N_list", "eps"],
            Kind::Acceptance => &["criteria"],
        };
        let present = [
            ("N", self.n.is_some()),
            ("N_list", self.n_list.is_some()),
            ("poly", self.poly.is_some()),
            ("density", self.density.is_some()),
            ("region", self.region.is_some()),
            ("phi", self.phi.is_some()),
            ("fock_poly", self.fock_poly.is_some()),
            ("fock_poly_q", self.fock_poly_q.is_some()),
            ("planar_region", self.planar_region.is_some()),
            ("eps", self.eps.is_some()),
            ("p", self.p.is_some()),
            ("trials", self.trials.is_some()),
            ("rule", self.rule.is_some()),
            ("profile_points", self.profile_points.is_some()),
            ("criteria", self.criteria.is_some()),
        ];
        if let Some((f, _)) = present.iter().find(|(f, on)| *on && !allowed.contains(f)) {
            return Err(CliError::Schema(format!("{f}: not used by `{}`", kind.name())));
        }

        let uses = |f: &str| allowed.contains(&f);
        if let Some(p) = &self.poly {
            match self.n {
                Some(n) if n != p.n => {
                    return Err(CliError::Schema(format!("N: {n} disagrees with poly.N = {}", p.n)));
                }
                _ => self.n = Some(p.n),
            }
            if self.trials.is_some_and(|t| t != 1) {
                return Err(CliError::Schema("trials: an explicit poly is a single trial".into()));
            }
            self.trials = Some(1);
        }
        if let Some(d) = &self.density {
            let dn = d.to_density()?.degree();
            match self.n {
                Some(n) if n != dn => return Err(CliError::Schema(format!("N: {n} disagrees with the density degree {dn}"))),
                _ => self.n = Some(dn),
            }
            self.trials = Some(1);
        }
        if kind == Kind::Sharpness {
            let list = match (self.n, self.n_list.take()) {
                (Some(_), Some(_)) => return Err(CliError::Schema("N_list: give either N or N_list".into())),
                (Some(n), None) => vec![n],
                (None, Some(l)) => l,
                (None, None) => DEFAULT_SHARPNESS_N.to_vec(),
            };
            if let Some(n) = list.iter().find(|n| **n < 2) {
                return Err(CliError::Schema(format!("N: sharpness needs N ≥ 2, got {n}")));
            }
            self.n = None;
            self.n_list = Some(list);
            let eps = self.eps.get_or_insert_with(|| DEFAULT_EPS.to_vec());
            if eps.len() < 3 {
                return Err(CliError::Schema("eps: need at least 3 values".into()));
            }
            if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e <= 0.1)) {
                return Err(CliError::Schema(format!("eps: {e} outside (0, 0.1]")));
            }
        } else if uses("N") {
            let n = need_n(&self);
            if n == 0 {
                return Err(CliError::Schema("N: must be at least 1".into()));
            }
            self.n = Some(n);
        }
        if uses("trials") {
            let t = *self.trials.get_or_insert(1);
            if t == 0 {
                return Err(CliError::Schema("trials: must be at least 1".into()));
            }
        }
        if uses("region") && self.region.is_none() {
            self.region = Some(RegionSpec::Cap(CapSpec {
                center: SpherePoint::origin(),
                chordal_radius: None,
                measure: Some(DEFAULT_MEASURE),
            }));
        }
        if let Some(r) = &self.region {
            r.to_region()?;
        }
        if uses("phi") {
            let phi = self.phi.get_or_insert_with(|| match kind {
                Kind::FockLimit => vec![PhiSpec::XLogX],
                _ => PhiSpec::builtin().to_vec(),
            });
            if phi.is_empty() {
                return Err(CliError::Schema("phi: empty list".into()));
            }
            for f in phi.iter() {
                f.validate().map_err(|e| CliError::Schema(format!("phi: {e}")))?;
            }
            if kind == Kind::FockLimit && phi.len() != 1 {
                return Err(CliError::Schema("phi: fock-limit takes a single Φ".into()));
            }
        }
        if kind == Kind::Schatten {
            let p = *self.p.get_or_insert(1.0);
            if !(p >= 1.0) {
                return Err(CliError::Schema(format!("p: {p} below 1")));
            }
        }
        if uses("rule") {
            if let Some(r) = &self.rule {
                if r.is_empty() {
                    self.rule = None;
                } else if r.n_s == Some(0) || r.n_theta == Some(0) || r.tolerance.is_some_and(|t| !(t > 0.0)) {
                    return Err(CliError::Schema("rule: node counts and tolerance must be positive".into()));
                }
            }
        }
        if kind == Kind::Levelsets {
            let k = *self.profile_points.get_or_insert(DEFAULT_PROFILE_POINTS);
            if k < 2 {
                return Err(CliError::Schema("profile_points: need at least 2".into()));
            }
        }
        if kind == Kind::FockLimit {
            let f = self.fock_poly.get_or_insert_with(|| FockPolySpec { coeffs: vec![[0.0, 0.0], [1.0, 0.0]] });
            f.to_fock()?;
            if let Some(q) = &self.fock_poly_q {
                q.to_fock()?;
            }
            if let Some(r) = &self.planar_region {
                r.to_planar()?;
            }
            let list = self.n_list.get_or_insert_with(|| DEFAULT_N_LIST.to_vec());
            if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Schema("N_list: must be non-empty and strictly ascending".into()));
            }
        }
        if kind == Kind::Acceptance {
            let c = self.criteria.get_or_insert_with(|| spinconc::acceptance::CRITERIA.collect());
            if let Some(bad) = c.iter().find(|id| !spinconc::acceptance::CRITERIA.contains(id)) {
                return Err(CliError::Schema(format!("criteria: no criterion {bad}")));
            }
            c.sort_unstable();
            c.dedup();
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_shorthand() {
        let r = parse_region("cap:0,measure=0.25").unwrap();
        assert_eq!(
            r,
            RegionSpec::Cap(CapSpec { center: SpherePoint::origin(), chordal_radius: None, measure: Some(0.25) })
        );
        let u = parse_region("cap:0.5-1i,radius=0.2; !cap:inf,measure=0.9").unwrap();
        let RegionSpec::Union(members) = &u else { panic!("{u:?}") };
        assert!(matches!(&members[1], RegionSpec::Complement(_)));
        for bad in ["disc:0,measure=0.1", "cap:0", "cap:0,area=0.1", "cap:x,measure=0.1", "cap:0,measure=a"] {
            assert!(matches!(parse_region(bad), Err(CliError::Schema(_))), "{bad}");
        }
        assert!(parse_region(r#"{"cap": {"center": [0, 0], "measure": 0.5}}"#).is_ok());
    }

    #[test]
    fn json_errors_name_the_field() {
        let e = parse_json::<ExperimentSpec>(r#"{"region": {"cap": {"center": [0, 0], "meassure": 0.1}}}"#, "x").unwrap_err();
        let CliError::Schema(msg) = e else { panic!() };
        assert!(msg.contains("region"), "{msg}");
        let e = parse_json::<ExperimentSpec>(r#"{"rule": {"n_s": -1}}"#, "x").unwrap_err();
        let CliError::Schema(msg) = e else { panic!() };
        assert!(msg.contains("rule.n_s"), "{msg}");
    }

    #[test]
    fn phi_shorthand() {
        assert_eq!(
            parse_phi("xlogx, power:3,hinge:0.25").unwrap(),
            vec![PhiSpec::XLogX, PhiSpec::Power { p: 3.0 }, PhiSpec::Hinge { tau: 0.25 }]
        );
        assert!(parse_phi("entropy").is_err());
    }

    #[test]
    fn normalization_fills_defaults() {
        let s = ExperimentSpec::default().normalize(Kind::Wehrl).unwrap();
        assert_eq!(s.n, Some(DEFAULT_N));
        assert_eq!(s.seed, Some(DEFAULT_SEED));
        assert_eq!(s.trials, Some(1));
        assert_eq!(s.phi.as_ref().unwrap().len(), 3);
        assert!(s.region.is_none());
        let again = s.clone().normalize(Kind::Wehrl).unwrap();
        assert_eq!(again, s);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(parse_json::<ExperimentSpec>(&text, "x").unwrap(), s);
    }

    #[test]
    fn normalization_rejections() {
        let sharp = ExperimentSpec { n: Some(1), ..Default::default() };
        assert!(matches!(sharp.normalize(Kind::Sharpness), Err(CliError::Schema(_))));
        let unused = ExperimentSpec { eps: Some(vec![0.1]), ..Default::default() };
        assert!(unused.normalize(Kind::Concentrate).is_err());
        let wrong = ExperimentSpec { subcommand: Some(Kind::Wehrl), ..Default::default() };
        assert!(wrong.normalize(Kind::Deficit).is_err());
        let bad_region = ExperimentSpec { region: Some(parse_region("cap:0,measure=1.5").unwrap()), ..Default::default() };
        assert!(bad_region.normalize(Kind::Schatten).is_err());
    }

    #[test]
    fn explicit_seed_survives() {
        let s = ExperimentSpec { seed: Some(99), ..Default::default() }.normalize(Kind::Stability).unwrap();
        assert_eq!(s.seed, Some(99));
    }

    #[test]
    fn schatten_p_inf_round_trips() {
        let s: ExperimentSpec = parse_json(r#"{"p": "inf"}"#, "x").unwrap();
        assert_eq!(s.p, Some(f64::INFINITY));
        assert!(serde_json::to_string(&s).unwrap().contains("\"inf\""));
    }

    #[test]
    fn rule_override() {
        let r = RuleOverride { n_s: Some(7), n_theta: None, tolerance: Some(1e-3) };
        let q = r.rule(4, Purpose::ExactPoly).unwrap();
        assert_eq!(q.kind, RuleKind::TensorProduct { n_s: 7, n_theta: 9 });
        assert_eq!(q.target_abs_tol, 1e-3);
    }
}
