//! JSON input forms for regions, polynomials, density operators and Fock
//! inputs. Unknown fields are rejected.
//!
//! ```json
//! {"union": [{"cap": {"center": [0.2, -1], "measure": 0.1}},
//!            {"complement": {"cap": {"center": "inf", "chordal_radius": 0.3}}}]}
//! {"N": 3, "basis": "monomial", "coeffs": [[1, 0], [0, 0.5]]}
//! {"ensemble": {"weights": [0.5, 0.5], "polys": [ … ]}}
//! ```

use serde::{Deserialize, Serialize};

use crate::eigen::CMatrix;
use crate::error::{Error, Result};
use crate::fock::{FockPoly, PlanarDisc, PlanarRegion};
use crate::mixed::{density_from_ensemble, DensityOp};
use crate::polyspace::Poly;
use crate::region::Region;
use crate::scalar::Cx;
use crate::sphere::{Cap, SpherePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Cap(CapSpec),
    Complement(Box<RegionSpec>),
    Union(Vec<RegionSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    pub center: SpherePoint<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chordal_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<f64>,
}

impl RegionSpec {
    pub fn to_region(&self) -> Result<Region<f64>> {
        match self {
            RegionSpec::Cap(c) => {
                let cap = match (c.chordal_radius, c.measure) {
                    (Some(r), None) => Cap::new(c.center, r)?,
                    (None, Some(m)) => Cap::with_measure(c.center, m)?,
                    _ => {
                        return Err(Error::Schema(
                            "cap needs exactly one of `chordal_radius` or `measure`".into(),
                        ))
                    }
                };
                Ok(Region::Cap(cap))
            }
            RegionSpec::Complement(r) => Ok(Region::complement(r.to_region()?)),
            RegionSpec::Union(rs) => Region::union(rs.iter().map(RegionSpec::to_region).collect::<Result<_>>()?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    Orthonormal,
    Monomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub basis: Basis,
    pub coeffs: Vec<[f64; 2]>,
}

fn to_cx(c: &[[f64; 2]]) -> Vec<Cx<f64>> {
    c.iter().map(|[re, im]| Cx::new(*re, *im)).collect()
}

impl PolySpec {
    pub fn to_poly(&self) -> Result<Poly<f64>> {
        let c = to_cx(&self.coeffs);
        match self.basis {
            Basis::Orthonormal => Poly::new(self.n, c),
            Basis::Monomial => Poly::from_monomial(self.n, &c),
        }
    }

    pub fn from_poly(p: &Poly<f64>) -> Self {
        Self {
            n: p.degree_bound(),
            basis: Basis::Orthonormal,
            coeffs: p.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub weights: Vec<f64>,
    pub polys: Vec<PolySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    Matrix {
        #[serde(rename = "N")]
        n: usize,
        /// Row-major `[re, im]` pairs.
        matrix: Vec<Vec<[f64; 2]>>,
    },
    Ensemble { ensemble: EnsembleSpec },
}

impl DensitySpec {
    pub fn to_density(&self) -> Result<DensityOp> {
        match self {
            DensitySpec::Matrix { n, matrix } => {
                if matrix.len() != n + 1 || matrix.iter().any(|r| r.len() != n + 1) {
                    return Err(Error::Schema(format!("matrix must be {0}×{0}", n + 1)));
                }
                let mut m = CMatrix::zeros(n + 1);
                for (i, row) in matrix.iter().enumerate() {
                    for (j, [re, im]) in row.iter().enumerate() {
                        m[(i, j)] = Cx::new(*re, *im);
                    }
                }
                DensityOp::from_matrix(*n, m)
            }
            DensitySpec::Ensemble { ensemble } => {
                let polys = ensemble.polys.iter().map(PolySpec::to_poly).collect::<Result<Vec<_>>>()?;
                density_from_ensemble(&ensemble.weights, &polys)
            }
        }
    }

    pub fn from_density(rho: &DensityOp) -> Self {
        let m = rho.matrix();
        let k = rho.degree() + 1;
        DensitySpec::Matrix {
            n: rho.degree(),
            matrix: (0..k)
                .map(|i| (0..k).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }
}

/// Monomial coefficients of an entire polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockPolySpec {
    pub coeffs: Vec<[f64; 2]>,
}

impl FockPolySpec {
    pub fn to_fock(&self) -> Result<FockPoly> {
        FockPoly::new(to_cx(&self.coeffs))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanarRegionSpec {
    pub discs: Vec<PlanarDisc>,
}

impl PlanarRegionSpec {
    pub fn to_planar(&self) -> Result<PlanarRegion> {
        PlanarRegion::new(self.discs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::region_measure;

    #[test]
    fn region_json() {
        let s = r#"{"union": [{"cap": {"center": [0.2, -0.1], "measure": 0.1}},
                               {"cap": {"center": "inf", "chordal_radius": 0.3}}]}"#;
        let r: RegionSpec = serde_json::from_str(s).unwrap();
        let region = r.to_region().unwrap();
        let m = region_measure(&region).value;
        assert!((m - (0.1 + std::f64::consts::PI * 0.09)).abs() < 1e-12);
        let back: RegionSpec = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn region_json_rejections() {
        for bad in [
            r#"{"cap": {"center": [0, 0], "measure": 0.1, "extra": 1}}"#,
            r#"{"disc": {"center": [0, 0], "measure": 0.1}}"#,
            r#"{"cap": {"center": "north", "measure": 0.1}}"#,
        ] {
            assert!(serde_json::from_str::<RegionSpec>(bad).is_err(), "{bad}");
        }
        let both: RegionSpec =
            serde_json::from_str(r#"{"cap": {"center": [0, 0], "measure": 0.1, "chordal_radius": 0.1}}"#).unwrap();
        assert!(matches!(both.to_region(), Err(Error::Schema(_))));
        let neither: RegionSpec = serde_json::from_str(r#"{"cap": {"center": [0, 0]}}"#).unwrap();
        assert!(neither.to_region().is_err());
    }

    #[test]
    fn poly_json() {
        let p: PolySpec = serde_json::from_str(r#"{"N": 2, "basis": "monomial", "coeffs": [[1, 0], [0, 2]]}"#).unwrap();
        let poly = p.to_poly().unwrap();
        assert!((poly.coeffs()[1].im - 2.0 / 2f64.sqrt()).abs() < 1e-15);
        let q: PolySpec = serde_json::from_str(r#"{"N": 1, "coeffs": [[1, 0], [0, 0]]}"#).unwrap();
        assert_eq!(q.to_poly().unwrap(), Poly::one(1));
        assert!(serde_json::from_str::<PolySpec>(r#"{"n": 1, "coeffs": []}"#).is_err());
        let r: PolySpec = serde_json::from_str(r#"{"N": 1, "coeffs": [[1, 0]]}"#).unwrap();
        assert!(r.to_poly().is_err());
    }

    #[test]
    fn density_json() {
        let m: DensitySpec = serde_json::from_str(r#"{"N": 1, "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#).unwrap();
        let rho = m.to_density().unwrap();
        assert_eq!(rho.rank(), 2);
        let e: DensitySpec = serde_json::from_str(
            r#"{"ensemble": {"weights": [1], "polys": [{"N": 1, "coeffs": [[1, 0], [0, 0]]}]}}"#,
        )
        .unwrap();
        assert_eq!(e.to_density().unwrap().rank(), 1);
        let round = DensitySpec::from_density(&rho);
        assert_eq!(round.to_density().unwrap().matrix(), rho.matrix());
        let bad: DensitySpec = serde_json::from_str(r#"{"N": 2, "matrix": [[[1, 0]]]}"#).unwrap();
        assert!(bad.to_density().is_err());
    }

    #[test]
    fn planar_json() {
        let s: PlanarRegionSpec = serde_json::from_str(r#"{"discs": [{"center": [0, 0], "radius": 0.5}]}"#).unwrap();
        assert!((s.to_planar().unwrap().area() - std::f64::consts::PI * 0.25).abs() < 1e-15);
        let f: FockPolySpec = serde_json::from_str(r#"{"coeffs": [[0, 0], [1, 0]]}"#).unwrap();
        assert_eq!(f.to_fock().unwrap().degree(), 1);
    }
}
