use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GeomError;
use crate::C64;

/// A set in `C^n` that can report how far a point is from it.
///
/// The distance only has to be monotone-equivalent to the Euclidean distance
/// near the set; for graphs it is the graph residual plus box exceedance.
pub trait SetOracle: Sync {
    fn dim(&self) -> usize;
    fn distance(&self, p: &[C64]) -> f64;
}

/// Catalog of graph submanifolds `w = rho(z, zbar)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurfaceKind {
    /// `|z|^2 + lambda (z^2 + zbar^2) + E`, `lambda` in `[0, 1/2)`.
    EllipticBishop { lambda: f64 },
    /// Same formula with `lambda > 1/2`; `lambda = inf` means `z^2 + zbar^2 + E`.
    HyperbolicBishop { lambda: f64 },
    /// `lambda = 1/2`.
    ParabolicBishop,
    /// `w = |z|^2`.
    SpecialElliptic,
    /// `w = conj(z1) z2` in `C^3`.
    LeviFlatZbarZ,
    /// `w = |z1|^2 - |z2|^2`, a graph in `C^2 x R`.
    SignatureQuadric,
    /// `s = exp(-1/(Re z)^2)` for `Re z > 0`, else `0`: a flat graph whose
    /// level sets jump in Hausdorff distance at `s = 0`.
    FlatExponential,
}

/// One term `coeff * z^p * zbar^q` of a higher-order perturbation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ETermMonomial {
    pub p: u32,
    pub q: u32,
    pub coeff: f64,
}

/// Higher-order term `E(z, zbar) = Re sum coeff * z^p zbar^q` (all `p + q >= 3`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum ETerm {
    #[default]
    None,
    Poly(Vec<ETermMonomial>),
}

impl ETerm {
    pub fn eval(&self, z: C64) -> f64 {
        match self {
            ETerm::None => 0.0,
            ETerm::Poly(terms) => terms
                .iter()
                .map(|t| (z.powu(t.p) * z.conj().powu(t.q)).re * t.coeff)
                .sum(),
        }
    }

    fn validate(&self) -> Result<(), GeomError> {
        if let ETerm::Poly(terms) = self {
            if let Some(t) = terms.iter().find(|t| t.p + t.q < 3) {
                return Err(GeomError::InvalidSurface(format!(
                    "E-term monomial z^{} zbar^{} is not O(|z|^3)",
                    t.p, t.q
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for ETerm {
    type Err = GeomError;

    /// `none`, `re-z3` (`Re z^3`), `abs-z4` (`|z|^4`) or
    /// `poly:c@p,q;c@p,q;...` for `Re sum c z^p zbar^q`.
    fn from_str(s: &str) -> Result<Self, GeomError> {
        let s = s.trim();
        let term = match s {
            "none" | "" => ETerm::None,
            "re-z3" => ETerm::Poly(vec![ETermMonomial {
                p: 3,
                q: 0,
                coeff: 1.0,
            }]),
            "abs-z4" => ETerm::Poly(vec![ETermMonomial {
                p: 2,
                q: 2,
                coeff: 1.0,
            }]),
            _ => {
                let body = s
                    .strip_prefix("poly:")
                    .ok_or_else(|| GeomError::Config(format!("unknown e_term selector `{s}`")))?;
                let mut terms = Vec::new();
                for item in body.split(';').filter(|t| !t.trim().is_empty()) {
                    let bad = || GeomError::Config(format!("bad e_term monomial `{item}`"));
                    let (c, pq) = item.split_once('@').ok_or_else(bad)?;
                    let (p, q) = pq.split_once(',').ok_or_else(bad)?;
                    terms.push(ETermMonomial {
                        coeff: c.trim().parse().map_err(|_| bad())?,
                        p: p.trim().parse().map_err(|_| bad())?,
                        q: q.trim().parse().map_err(|_| bad())?,
                    });
                }
                ETerm::Poly(terms)
            }
        };
        term.validate()?;
        Ok(term)
    }
}

impl fmt::Display for ETerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ETerm::None => write!(f, "none"),
            ETerm::Poly(terms) => {
                write!(f, "poly:")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{}@{},{}", t.coeff, t.p, t.q)?;
                }
                Ok(())
            }
        }
    }
}

/// Graph submanifold descriptor with its box `|z_j| <= delta1`, `|w| <= delta2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSurface {
    pub kind: SurfaceKind,
    pub e_term: ETerm,
    pub delta1: f64,
    pub delta2: f64,
    /// Weights `(alpha_z..., alpha_w)` under which the graph is homogeneous.
    pub alpha: Option<Vec<u32>>,
}

impl GraphSurface {
    fn base(kind: SurfaceKind, alpha: Option<Vec<u32>>) -> Self {
        GraphSurface {
            kind,
            e_term: ETerm::None,
            delta1: 1.0,
            delta2: 1.0,
            alpha,
        }
    }

    pub fn special_elliptic() -> Self {
        Self::base(SurfaceKind::SpecialElliptic, Some(vec![1, 2]))
    }

    pub fn elliptic_bishop(lambda: f64) -> Result<Self, GeomError> {
        if !(0.0..0.5).contains(&lambda) {
            return Err(GeomError::InvalidSurface(format!(
                "elliptic Bishop needs lambda in [0, 1/2), got {lambda}"
            )));
        }
        Ok(Self::base(
            SurfaceKind::EllipticBishop { lambda },
            Some(vec![1, 2]),
        ))
    }

    pub fn hyperbolic_bishop(lambda: f64) -> Result<Self, GeomError> {
        if lambda.is_nan() || lambda <= 0.5 {
            return Err(GeomError::InvalidSurface(format!(
                "hyperbolic Bishop needs lambda in (1/2, inf], got {lambda}"
            )));
        }
        Ok(Self::base(
            SurfaceKind::HyperbolicBishop { lambda },
            Some(vec![1, 2]),
        ))
    }

    /// `w = z^2 + zbar^2`.
    pub fn hyperbolic_model() -> Self {
        Self::hyperbolic_bishop(f64::INFINITY).expect("infinite lambda is hyperbolic")
    }

    pub fn parabolic_bishop() -> Self {
        Self::base(SurfaceKind::ParabolicBishop, Some(vec![1, 2]))
    }

    pub fn levi_flat_zbar_z() -> Self {
        Self::base(SurfaceKind::LeviFlatZbarZ, Some(vec![1, 1, 2]))
    }

    pub fn signature_quadric() -> Self {
        Self::base(SurfaceKind::SignatureQuadric, Some(vec![1, 1, 2]))
    }

    pub fn flat_exponential() -> Self {
        Self::base(SurfaceKind::FlatExponential, None)
    }

    /// Attaches a higher-order term; a non-trivial term breaks homogeneity.
    pub fn with_e_term(mut self, e: ETerm) -> Result<Self, GeomError> {
        e.validate()?;
        if !self.is_bishop() {
            return Err(GeomError::InvalidSurface(
                "E-terms only apply to Bishop kinds".into(),
            ));
        }
        if e != ETerm::None {
            self.alpha = None;
        }
        self.e_term = e;
        Ok(self)
    }

    pub fn with_box(mut self, delta1: f64, delta2: f64) -> Self {
        self.delta1 = delta1;
        self.delta2 = delta2;
        self
    }

    pub fn is_bishop(&self) -> bool {
        matches!(
            self.kind,
            SurfaceKind::EllipticBishop { .. }
                | SurfaceKind::HyperbolicBishop { .. }
                | SurfaceKind::ParabolicBishop
                | SurfaceKind::SpecialElliptic
        )
    }

    /// Number of complex graph variables `z`.
    pub fn nz(&self) -> usize {
        match self.kind {
            SurfaceKind::LeviFlatZbarZ | SurfaceKind::SignatureQuadric => 2,
            _ => 1,
        }
    }

    /// Whether `rho` is real-valued (a graph in `C^n x R`).
    pub fn is_real_valued(&self) -> bool {
        !matches!(self.kind, SurfaceKind::LeviFlatZbarZ)
    }

    /// `rho(z, zbar)` without the box check.
    pub fn rho(&self, z: &[C64]) -> C64 {
        let real = |x: f64| C64::new(x, 0.0);
        let bishop = |lambda: f64, z: C64| {
            let quad = if lambda.is_infinite() {
                2.0 * (z * z).re
            } else {
                z.norm_sqr() + 2.0 * lambda * (z * z).re
            };
            quad + self.e_term.eval(z)
        };
        match self.kind {
            SurfaceKind::EllipticBishop { lambda } | SurfaceKind::HyperbolicBishop { lambda } => {
                real(bishop(lambda, z[0]))
            }
            SurfaceKind::ParabolicBishop => real(bishop(0.5, z[0])),
            SurfaceKind::SpecialElliptic => real(z[0].norm_sqr()),
            SurfaceKind::LeviFlatZbarZ => z[0].conj() * z[1],
            SurfaceKind::SignatureQuadric => real(z[0].norm_sqr() - z[1].norm_sqr()),
            SurfaceKind::FlatExponential => {
                let x = z[0].re;
                real(if x > 0.0 { (-1.0 / (x * x)).exp() } else { 0.0 })
            }
        }
    }

    pub fn in_box(&self, z: &[C64]) -> bool {
        z.iter().all(|c| c.norm() <= self.delta1)
    }

    /// `rho(z, zbar)` for `z` inside the box.
    pub fn eval_rho(&self, z: &[C64]) -> Result<C64, GeomError> {
        if z.len() != self.nz() {
            return Err(GeomError::DimensionMismatch {
                expected: self.nz(),
                got: z.len(),
            });
        }
        if !self.in_box(z) {
            return Err(GeomError::OutOfBox {
                point: z.to_vec(),
                delta1: self.delta1,
            });
        }
        Ok(self.rho(z))
    }

    /// Lift of `z` to the point `(z, rho(z))` of the graph.
    pub fn lift(&self, z: &[C64]) -> Vec<C64> {
        let mut p = z.to_vec();
        p.push(self.rho(z));
        p
    }

    /// Parse a flat key-value surface description.
    ///
    /// Keys: `kind` (`special-elliptic`, `elliptic-bishop`, `hyperbolic-bishop`,
    /// `hyperbolic-model`, `parabolic-bishop`, `zbar-z`, `signature-quadric`,
    /// `flat-exponential`), `lambda` (`inf` allowed), `delta1`, `delta2`,
    /// `alpha` (comma-separated), `e_term` (see [`ETerm::from_str`]).
    /// Lines are `key = value`; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self, GeomError> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GeomError::Config(format!("expected key = value, got `{line}`")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, GeomError> {
        let num = |k: &str| -> Result<Option<f64>, GeomError> {
            map.get(k)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| GeomError::Config(format!("`{k}` is not a number: {v}")))
                })
                .transpose()
        };
        let kind = map
            .get("kind")
            .ok_or_else(|| GeomError::Config("missing `kind`".into()))?;
        let lambda = num("lambda")?;
        let mut s = Self::by_name(kind, lambda)?;
        if let Some(e) = map.get("e_term") {
            s = s.with_e_term(e.parse()?)?;
        }
        if let Some(d) = num("delta1")? {
            s.delta1 = d;
        }
        if let Some(d) = num("delta2")? {
            s.delta2 = d;
        }
        if let Some(a) = map.get("alpha") {
            let alpha = a
                .split(',')
                .map(|x| x.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| GeomError::Config(format!("bad alpha `{a}`")))?;
            if alpha.len() != s.nz() + 1 || alpha.contains(&0) {
                return Err(GeomError::Config(format!(
                    "alpha needs {} positive weights",
                    s.nz() + 1
                )));
            }
            s.alpha = Some(alpha);
        }
        Ok(s)
    }

    /// Catalog lookup by the names used on the command line.
    pub fn by_name(name: &str, lambda: Option<f64>) -> Result<Self, GeomError> {
        let need =
            |l: Option<f64>| l.ok_or_else(|| GeomError::Config(format!("`{name}` needs a lambda")));
        match name {
            "special-elliptic" => Ok(Self::special_elliptic()),
            "elliptic-bishop" => Self::elliptic_bishop(need(lambda)?),
            "hyperbolic-bishop" => Self::hyperbolic_bishop(need(lambda)?),
            "hyperbolic-model" => Ok(Self::hyperbolic_model()),
            "parabolic-bishop" => Ok(Self::parabolic_bishop()),
            "zbar-z" => Ok(Self::levi_flat_zbar_z()),
            "signature-quadric" => Ok(Self::signature_quadric()),
            "flat-exponential" => Ok(Self::flat_exponential()),
            other => Err(GeomError::Config(format!("unknown surface kind `{other}`"))),
        }
    }

    /// Inverse of [`GraphSurface::from_kv`].
    pub fn to_kv(&self) -> String {
        let (name, lambda) = match self.kind {
            SurfaceKind::EllipticBishop { lambda } => ("elliptic-bishop", Some(lambda)),
            SurfaceKind::HyperbolicBishop { lambda } => ("hyperbolic-bishop", Some(lambda)),
            SurfaceKind::ParabolicBishop => ("parabolic-bishop", None),
            SurfaceKind::SpecialElliptic => ("special-elliptic", None),
            SurfaceKind::LeviFlatZbarZ => ("zbar-z", None),
            SurfaceKind::SignatureQuadric => ("signature-quadric", None),
            SurfaceKind::FlatExponential => ("flat-exponential", None),
        };
        let mut out = format!("kind = {name}\n");
        if let Some(l) = lambda {
            out += &format!("lambda = {l}\n");
        }
        out += &format!("delta1 = {}\ndelta2 = {}\n", self.delta1, self.delta2);
        out += &format!("e_term = {}\n", self.e_term);
        if let Some(a) = &self.alpha {
            let a: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            out += &format!("alpha = {}\n", a.join(","));
        }
        out
    }
}

impl SetOracle for GraphSurface {
    fn dim(&self) -> usize {
        self.nz() + 1
    }

    fn distance(&self, p: &[C64]) -> f64 {
        let (z, w) = p.split_at(self.nz());
        let w = w[0];
        let exceed: f64 = z.iter().map(|c| (c.norm() - self.delta1).max(0.0)).sum();
        (w - self.rho(z)).norm() + exceed + (w.norm() - self.delta2).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_rho_examples() {
        let s = GraphSurface::special_elliptic();
        assert_eq!(s.eval_rho(&[c(0.0, 0.0)]).unwrap(), c(0.0, 0.0));
        let h = GraphSurface::hyperbolic_model();
        assert!((h.eval_rho(&[c(1.0, 0.0)]).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let l = GraphSurface::levi_flat_zbar_z();
        assert_eq!(
            l.eval_rho(&[c(0.0, 1.0), c(1.0, 0.0)]).unwrap(),
            c(0.0, -1.0)
        );
    }

    #[test]
    fn out_of_box_is_a_domain_error() {
        let s = GraphSurface::special_elliptic();
        assert!(matches!(
            s.eval_rho(&[c(1.5, 0.0)]),
            Err(GeomError::OutOfBox { .. })
        ));
        assert!(matches!(
            s.eval_rho(&[c(0.1, 0.0), c(0.0, 0.0)]),
            Err(GeomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bishop_origin_is_critical() {
        let cat = [
            GraphSurface::elliptic_bishop(0.25).unwrap(),
            GraphSurface::hyperbolic_bishop(2.0).unwrap(),
            GraphSurface::hyperbolic_model(),
            GraphSurface::parabolic_bishop(),
            GraphSurface::special_elliptic(),
            GraphSurface::elliptic_bishop(0.1)
                .unwrap()
                .with_e_term("re-z3".parse().unwrap())
                .unwrap(),
        ];
        let h = 1e-6;
        for s in &cat {
            assert_eq!(s.rho(&[c(0.0, 0.0)]).norm(), 0.0);
            let dx = (s.rho(&[c(h, 0.0)]) - s.rho(&[c(-h, 0.0)])).re / (2.0 * h);
            let dy = (s.rho(&[c(0.0, h)]) - s.rho(&[c(0.0, -h)])).re / (2.0 * h);
            assert!(dx.abs() < 1e-9 && dy.abs() < 1e-9, "{:?}", s.kind);
        }
    }

    #[test]
    fn lambda_ranges_validated() {
        assert!(GraphSurface::elliptic_bishop(0.5).is_err());
        assert!(GraphSurface::hyperbolic_bishop(0.5).is_err());
        assert!("poly:1@1,1".parse::<ETerm>().is_err());
    }

    #[test]
    fn config_roundtrip() {
        let text = "kind = elliptic-bishop\nlambda = 0.25\ndelta1 = 0.8 # box\ne_term = poly:0.5@3,0;0.25@2,2\n";
        let s = GraphSurface::from_kv(text).unwrap();
        assert_eq!(s.kind, SurfaceKind::EllipticBishop { lambda: 0.25 });
        assert_eq!(s.delta1, 0.8);
        assert!(s.alpha.is_none());
        let again = GraphSurface::from_kv(&s.to_kv()).unwrap();
        assert_eq!(s, again);
        let h = GraphSurface::from_kv("kind = hyperbolic-bishop\nlambda = inf").unwrap();
        assert_eq!(h, GraphSurface::hyperbolic_model());
        assert!(GraphSurface::from_kv("kind = torus").is_err());
    }

    #[test]
    fn graph_residual_counts_box_exceedance() {
        let l = GraphSurface::levi_flat_zbar_z();
        assert!(l.distance(&[c(0.5, 0.0), c(0.5, 0.0), c(0.25, 0.0)]) < 1e-15);
        let d = l.distance(&[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((d - 0.5).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use crate::geom::weighted_dilate;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weighted_homogeneity(t in 0.0..=1.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64,
                                    c_ in -1.0..1.0f64, d in -1.0..1.0f64) {
                let cat = [
                    GraphSurface::levi_flat_zbar_z(),
                    GraphSurface::signature_quadric(),
                    GraphSurface::special_elliptic(),
                    GraphSurface::hyperbolic_model(),
                    GraphSurface::elliptic_bishop(0.3).unwrap(),
                ];
                for s in &cat {
                    let alpha = s.alpha.clone().unwrap();
                    let z: Vec<C64> = [c(a, b), c(c_, d)][..s.nz()].to_vec();
                    let p = s.lift(&z);
                    let q = weighted_dilate(&p, t, &alpha);
                    let lhs = s.rho(&q[..s.nz()]);
                    let rhs = p[s.nz()] * t.powi(alpha[s.nz()] as i32);
                    prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
                }
            }
        }
    }
}
