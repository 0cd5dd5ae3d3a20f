//! The two half-tori `X = X1 ∪ X2` in `C^2`, whose disc hull has to be
//! iterated once to fill the unit bidisc, and the homogenised copy `X'` in `C^3`.
//!
//! - `X1 = { |z1| = |z2| = 1, Im z2 >= 0 }`, `X2 = { |z1| = 2, |z2| = 1, Im z2 <= 0 }`.
//! - `DH(X)` adds `|z1| <= 1` over `X1` and `|z1| <= 2` over `X2`; it contains
//!   the torus, and discs `zeta -> (a, zeta)` attached to it fill the bidisc.
//! - `X'` is the union of the copies of `X` scaled by `r = z3` in `[0, 1]`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{
    check, exceed, hull_iterate, le, uniform_disc, Attached, DiscGenerator, HullCloud, HullError,
    HullOptions, SeedSet,
};
use crate::geom::{AnalyticDisc, SetOracle};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorusVariant {
    X,
    XPrime,
}

impl TorusVariant {
    pub fn dim(self) -> usize {
        match self {
            TorusVariant::X => 2,
            TorusVariant::XPrime => 3,
        }
    }

    /// Scale `r` of a point and the penalty for `z3` leaving `[0, 1]`.
    fn scale(self, p: &[C64]) -> (f64, f64) {
        match self {
            TorusVariant::X => (1.0, 0.0),
            TorusVariant::XPrime => {
                let z3 = p[2];
                (
                    z3.re.clamp(0.0, 1.0),
                    z3.im.abs() + exceed(-z3.re, 0.0) + exceed(z3.re, 1.0),
                )
            }
        }
    }

    fn with_scale(self, mut p: Vec<C64>, r: f64) -> Vec<C64> {
        if self == TorusVariant::XPrime {
            p.push(C64::new(r, 0.0));
        }
        p
    }
}

/// `X` (or `X'`) as a set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusX {
    pub variant: TorusVariant,
}

impl SetOracle for TorusX {
    fn dim(&self) -> usize {
        self.variant.dim()
    }

    fn distance(&self, p: &[C64]) -> f64 {
        let (r, pen) = self.variant.scale(p);
        let (a, b) = (p[0].norm(), p[1].norm());
        let upper = (a - r).abs() + (b - r).abs() + exceed(-p[1].im, 0.0);
        let lower = (a - 2.0 * r).abs() + (b - r).abs() + exceed(p[1].im, 0.0);
        pen + upper.min(lower)
    }
}

impl SeedSet for TorusX {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let r = match self.variant {
            TorusVariant::X => 1.0,
            TorusVariant::XPrime => rng.gen::<f64>(),
        };
        let upper = rng.gen_bool(0.5);
        let t1 = rng.gen_range(0.0..TAU);
        let t2 = rng.gen_range(0.0..PI);
        let p = if upper {
            vec![C64::from_polar(r, t1), C64::from_polar(r, t2)]
        } else {
            vec![C64::from_polar(2.0 * r, t1), C64::from_polar(r, -t2)]
        };
        self.variant.with_scale(p, r)
    }
}

/// `DH(X)` (or `DH(X')`) as a set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusDh1 {
    pub variant: TorusVariant,
}

impl SetOracle for TorusDh1 {
    fn dim(&self) -> usize {
        self.variant.dim()
    }

    fn distance(&self, p: &[C64]) -> f64 {
        let (r, pen) = self.variant.scale(p);
        let (a, b) = (p[0].norm(), p[1].norm());
        let upper = exceed(a, r) + (b - r).abs() + exceed(-p[1].im, 0.0);
        let lower = exceed(a, 2.0 * r) + (b - r).abs() + exceed(p[1].im, 0.0);
        pen + upper.min(lower)
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Stage 1: constant-`z2` discs filling `|z1| <= r` or `|z1| <= 2r`.
#[derive(Clone, Copy, Debug)]
pub struct TorusStage1 {
    pub variant: TorusVariant,
    x: TorusX,
}

impl TorusStage1 {
    pub fn new(variant: TorusVariant) -> Self {
        TorusStage1 {
            variant,
            x: TorusX { variant },
        }
    }
}

fn scale_of(variant: TorusVariant, p: &[C64]) -> Result<f64, HullError> {
    check(p.len() == variant.dim(), "point dimension")?;
    match variant {
        TorusVariant::X => Ok(1.0),
        TorusVariant::XPrime => {
            let z3 = p[2];
            check(
                z3.im.abs() <= 1e-12 && le(0.0, z3.re) && le(z3.re, 1.0),
                "z3 real in [0, 1]",
            )?;
            Ok(z3.re.clamp(0.0, 1.0))
        }
    }
}

impl DiscGenerator for TorusStage1 {
    fn name(&self) -> String {
        "torus-stage1".into()
    }

    fn stage(&self) -> usize {
        1
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let r = match self.variant {
            TorusVariant::X => 1.0,
            TorusVariant::XPrime => rng.gen::<f64>(),
        };
        let t2 = rng.gen_range(0.0..PI);
        let p = if rng.gen_bool(0.5) {
            vec![uniform_disc(rng, r), C64::from_polar(r, t2)]
        } else {
            vec![uniform_disc(rng, 2.0 * r), C64::from_polar(r, -t2)]
        };
        self.variant.with_scale(p, r)
    }

    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError> {
        let r = scale_of(self.variant, p)?;
        let (a, b) = (p[0], p[1]);
        check((b.norm() - r).abs() <= 1e-12, "|z2| = r")?;
        if r == 0.0 {
            return Ok(Attached {
                disc: AnalyticDisc::constant(p),
                zeta: zero(),
            });
        }
        let radius = if b.im >= -1e-12 && le(a.norm(), r) {
            r
        } else if b.im <= 1e-12 && le(a.norm(), 2.0 * r) {
            2.0 * r
        } else {
            return Err(HullError::NotAdmissible(
                "|z1| <= r over Im z2 >= 0, |z1| <= 2r over Im z2 <= 0".into(),
            ));
        };
        let coeffs = scale_row(
            self.variant,
            vec![vec![zero(), C64::new(radius, 0.0)], vec![b]],
            r,
        );
        Ok(Attached {
            disc: AnalyticDisc::new(coeffs)?,
            zeta: a / radius,
        })
    }

    fn target(&self) -> &dyn SetOracle {
        &self.x
    }
}

/// Appends the constant component `z3 = r` for `X'`.
fn scale_row(variant: TorusVariant, mut rows: Vec<Vec<C64>>, r: f64) -> Vec<Vec<C64>> {
    if variant == TorusVariant::XPrime {
        rows.push(vec![C64::new(r, 0.0)]);
    }
    rows
}

/// Stage 2: discs `zeta -> (a, r zeta)` attached to the stage-1 set.
#[derive(Clone, Copy, Debug)]
pub struct TorusStage2 {
    pub variant: TorusVariant,
    dh1: TorusDh1,
}

impl TorusStage2 {
    pub fn new(variant: TorusVariant) -> Self {
        TorusStage2 {
            variant,
            dh1: TorusDh1 { variant },
        }
    }
}

impl DiscGenerator for TorusStage2 {
    fn name(&self) -> String {
        "torus-stage2".into()
    }

    fn stage(&self) -> usize {
        2
    }

    /// Uniform point of the open bidisc (scaled by a uniform `r` for `X'`).
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let r = match self.variant {
            TorusVariant::X => 1.0,
            TorusVariant::XPrime => rng.gen::<f64>(),
        };
        let p = vec![uniform_disc(rng, r), uniform_disc(rng, r)];
        self.variant.with_scale(p, r)
    }

    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError> {
        let r = scale_of(self.variant, p)?;
        let (a, b) = (p[0], p[1]);
        check(le(a.norm(), r) && le(b.norm(), r), "|z1|, |z2| <= r")?;
        if r == 0.0 {
            return Ok(Attached {
                disc: AnalyticDisc::constant(p),
                zeta: zero(),
            });
        }
        let rows = scale_row(
            self.variant,
            vec![vec![a], vec![zero(), C64::new(r, 0.0)]],
            r,
        );
        Ok(Attached {
            disc: AnalyticDisc::new(rows)?,
            zeta: b / r,
        })
    }

    fn target(&self) -> &dyn SetOracle {
        &self.dh1
    }
}

/// Both stages of the iterated hull of `X` (or `X'`).
pub fn torus_bidisc_hull(
    variant: TorusVariant,
    opts: &HullOptions,
    rng: &mut dyn RngCore,
) -> HullCloud {
    let g1 = TorusStage1::new(variant);
    let g2 = TorusStage2::new(variant);
    hull_iterate(&TorusX { variant }, &[&g1, &g2], 2, opts, rng)
}

/// Grid on `X` (or `X'`) and the radius `h` within which it covers the set:
/// `n1` angles for `z1`, `n2 + 1` angles on each half circle for `z2` and, for
/// `X'`, `n3 + 1` scales.
pub fn torus_grid(variant: TorusVariant, n1: usize, n2: usize, n3: usize) -> (Vec<Vec<C64>>, f64) {
    let scales: Vec<f64> = match variant {
        TorusVariant::X => vec![1.0],
        TorusVariant::XPrime => (0..=n3).map(|k| k as f64 / n3 as f64).collect(),
    };
    let mut pts = Vec::new();
    for &r in &scales {
        for i in 0..n1 {
            let t1 = TAU * i as f64 / n1 as f64;
            for j in 0..=n2 {
                let t2 = PI * j as f64 / n2 as f64;
                pts.push(
                    variant.with_scale(vec![C64::from_polar(r, t1), C64::from_polar(r, t2)], r),
                );
                pts.push(variant.with_scale(
                    vec![C64::from_polar(2.0 * r, t1), C64::from_polar(r, -t2)],
                    r,
                ));
            }
        }
    }
    // arc-length bounds per coordinate, combined by the triangle inequality
    let mut h = 2.0 * (PI / n1 as f64) + 0.5 * PI / n2 as f64;
    if variant == TorusVariant::XPrime {
        h += 6f64.sqrt() * 0.5 / n3 as f64;
    }
    (pts, h)
}
