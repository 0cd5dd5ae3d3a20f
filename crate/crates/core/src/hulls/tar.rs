//! Two-stage disc hull of `w = conj(z1) z2` inside the polydisc of radius `C`.
//!
//! - `A0 = Delta_C ∩ M`.
//! - `A1 = Delta_C ∩ { Im(w z1 conj z2) = 0, Re(w z1 conj z2) >= |z1 z2|^2, |z2|/C <= |z1| <= C|z2| }`,
//!   covered by linear discs attached to `A0`.
//! - `A2 = { |z1| <= eps, 1/K1 <= |z2| <= |w|/K2, K3/C <= |w| <= C }`, covered by
//!   quadratic discs attached to `A1`.

use std::f64::consts::TAU;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check, exceed, le, uniform_disc, Attached, DiscGenerator, HullError, SeedSet};
use crate::geom::{AnalyticDisc, SetOracle};
use crate::C64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `A0`: the graph inside the closed polydisc of radius `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TarA0 {
    pub c: f64,
}

impl SetOracle for TarA0 {
    fn dim(&self) -> usize {
        3
    }

    fn distance(&self, p: &[C64]) -> f64 {
        (p[2] - p[0].conj() * p[1]).norm() + p.iter().map(|x| exceed(x.norm(), self.c)).sum::<f64>()
    }
}

impl SeedSet for TarA0 {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        loop {
            let z1 = uniform_disc(rng, self.c);
            let z2 = uniform_disc(rng, self.c);
            let w = z1.conj() * z2;
            if w.norm() <= self.c {
                return vec![z1, z2, w];
            }
        }
    }
}

/// `A1` as a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TarA1 {
    pub c: f64,
}

impl SetOracle for TarA1 {
    fn dim(&self) -> usize {
        3
    }

    fn distance(&self, p: &[C64]) -> f64 {
        let (z1, z2, w) = (p[0], p[1], p[2]);
        let q = w * z1 * z2.conj();
        let (a1, a2) = (z1.norm(), z2.norm());
        q.im.abs()
            + exceed((a1 * a2).powi(2), q.re)
            + exceed(a2 / self.c, a1)
            + exceed(a1, self.c * a2)
            + p.iter().map(|x| exceed(x.norm(), self.c)).sum::<f64>()
    }
}

/// Disc through a point of `A1`, attached to `A0`.
pub fn disc_tar_step1(p: &[C64], c: f64) -> Result<Attached, HullError> {
    check(p.len() == 3, "point in C^3")?;
    let (z1, z2, w) = (p[0], p[1], p[2]);
    let (a1, a2) = (z1.norm(), z2.norm());
    check(p.iter().all(|x| le(x.norm(), c)), "|coordinates| <= C")?;
    if (TarA0 { c }).distance(p) <= CONSTANT_TOL {
        return Ok(Attached {
            disc: AnalyticDisc::constant(p),
            zeta: zero(),
        });
    }
    let q = w * z1 * z2.conj();
    let scale = (a1 * a2).powi(2).max(q.norm()).max(1e-300);
    check(q.im.abs() <= 1e-12 * scale, "Im(w z1 conj z2) = 0")?;
    check(le((a1 * a2).powi(2), q.re), "Re(w z1 conj z2) >= |z1 z2|^2")?;
    check(le(a2 / c, a1) && le(a1, c * a2), "|z2|/C <= |z1| <= C|z2|")?;
    if a2 == 0.0 {
        // then z1 = 0 too; the disc (conj(w) zeta, zeta, w) passes through (0, 0, w)
        return Ok(Attached {
            disc: AnalyticDisc::new(vec![
                vec![zero(), w.conj()],
                vec![zero(), C64::new(1.0, 0.0)],
                vec![w],
            ])?,
            zeta: zero(),
        });
    }
    // lambda^2 = w z1 / z2, a positive real
    let lambda = q.re.max(0.0).sqrt() / a2;
    let disc = AnalyticDisc::new(vec![
        vec![zero(), C64::new(lambda, 0.0)],
        vec![zero(), w / lambda],
        vec![w],
    ])?;
    Ok(Attached {
        disc,
        zeta: z1 / lambda,
    })
}

/// Oracle distance below which a point counts as already on `A0`.
const CONSTANT_TOL: f64 = 1e-14;

/// Constants of the second stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TarConstants {
    pub c: f64,
    pub epsilon: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

/// `zeta(u) = 5/4 - sqrt(9/16 - 9u/2)`, the root of `zeta f(zeta, 1/zeta) = u` near `1/2`.
fn zeta_of(u: C64) -> C64 {
    C64::new(1.25, 0.0) - (C64::new(9.0 / 16.0, 0.0) - u * 4.5).sqrt()
}

impl TarConstants {
    /// Extremes of `|zeta(u)|` over `|u| <= eps` (attained on `|u| = eps`).
    pub fn zeta_range(epsilon: f64) -> (f64, f64) {
        let n = 4096;
        (0..n)
            .map(|k| zeta_of(C64::from_polar(epsilon, TAU * k as f64 / n as f64)).norm())
            .fold((f64::INFINITY, 0.0), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }

    /// `K1 = C / max|zeta|`, `K2 = 9 / min|zeta|` (with a small safety margin)
    /// and `K3` the midpoint of `(C K2 / K1, C^2)`.
    pub fn derived(c: f64, epsilon: f64) -> Result<Self, HullError> {
        let (lo, hi) = Self::zeta_range(epsilon);
        let margin = 1e-6;
        let k1 = c / (hi * (1.0 + margin));
        let k2 = 9.0 / (lo * (1.0 - margin));
        let k3 = 0.5 * (c * k2 / k1 + c * c);
        let out = TarConstants {
            c,
            epsilon,
            k1,
            k2,
            k3,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), HullError> {
        let TarConstants { c, k1, k2, k3, .. } = *self;
        if c <= 3.0 {
            return Err(HullError::Constants(format!("C = {c} must exceed 3")));
        }
        if !(c * k2 / k1 < k3 && k3 < c * c) {
            return Err(HullError::Constants(format!(
                "need C K2 / K1 < K3 < C^2, got C K2 / K1 = {}, K3 = {k3}, C^2 = {}",
                c * k2 / k1,
                c * c
            )));
        }
        Ok(())
    }

    /// Whether every point of `A2` admits a feasible `lambda`.
    pub fn covers_a2(&self) -> bool {
        let (lo, hi) = Self::zeta_range(self.epsilon);
        hi <= self.c / self.k1 && 9.0 / self.k2 <= lo
    }
}

impl Default for TarConstants {
    fn default() -> Self {
        TarConstants::derived(4.0, 0.02).expect("default constants are consistent")
    }
}

/// Taylor coefficients of `zeta f(zeta, 1/zeta) = (4/9)(zeta - 1/2)(1 - zeta/2)`.
pub fn step2_profile_coeffs() -> [C64; 3] {
    [
        C64::new(-2.0 / 9.0, 0.0),
        C64::new(5.0 / 9.0, 0.0),
        C64::new(-2.0 / 9.0, 0.0),
    ]
}

/// `f(zeta, 1/zeta)` on `m` uniform points of the unit circle.
pub fn step2_boundary_profile(m: usize) -> Vec<C64> {
    let c = step2_profile_coeffs();
    (0..m)
        .map(|k| {
            let z = C64::from_polar(1.0, TAU * k as f64 / m as f64);
            (c[0] + z * (c[1] + z * c[2])) / z
        })
        .collect()
}

/// Disc through a point of `A2`, attached to `A1`.
pub fn disc_tar_step2(p: &[C64], k: &TarConstants) -> Result<Attached, HullError> {
    check(p.len() == 3, "point in C^3")?;
    let (z1, z2, w) = (p[0], p[1], p[2]);
    let (a1, a2, aw) = (z1.norm(), z2.norm(), w.norm());
    check(le(a1, k.epsilon), "|z1| <= eps")?;
    check(
        le(1.0 / k.k1, a2) && le(a2, aw / k.k2),
        "1/K1 <= |z2| <= |w|/K2",
    )?;
    check(le(k.k3 / k.c, aw) && le(aw, k.c), "K3/C <= |w| <= C")?;

    // arg(w lambda e^{i theta} zeta(theta)) = arg z2
    let target = z2.arg() - w.arg();
    // zeta(0) = 1/2 has argument 0
    let mut theta = target;
    let mut converged = false;
    for _ in 0..200 {
        let next = target - zeta_of(z1 * C64::from_polar(1.0, -theta)).arg();
        let delta = (next - theta).abs();
        theta = next;
        if delta <= 1e-14 * (1.0 + theta.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(HullError::NoConvergence);
    }
    let e = C64::from_polar(1.0, theta);
    let zeta = zeta_of(z1 / e);
    let lambda = a2 / (aw * zeta.norm());
    let (lower, upper) = (1.0 / (k.c * aw), 1.0 / 9.0);
    if !(le(lower, lambda) && le(lambda, upper)) {
        return Err(HullError::Infeasible {
            lambda,
            lower,
            upper,
        });
    }
    let prof = step2_profile_coeffs();
    let disc = AnalyticDisc::new(vec![
        prof.iter().map(|c| c * e).collect(),
        vec![zero(), w * lambda * e],
        vec![w],
    ])?;
    Ok(Attached { disc, zeta })
}

/// Stage-1 generator: linear discs through `A1`.
#[derive(Clone, Debug)]
pub struct TarStep1 {
    pub c: f64,
    a0: TarA0,
}

impl TarStep1 {
    pub fn new(c: f64) -> Self {
        TarStep1 { c, a0: TarA0 { c } }
    }
}

impl DiscGenerator for TarStep1 {
    fn name(&self) -> String {
        "tar-step1".into()
    }

    fn stage(&self) -> usize {
        1
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let c = self.c;
        loop {
            let r1: f64 = c * rng.gen::<f64>().sqrt();
            let r2: f64 = rng.gen_range(r1 / c..=(c * r1).min(c));
            if r1 * r2 > c || r1 == 0.0 {
                continue;
            }
            let z1 = C64::from_polar(r1, rng.gen_range(0.0..TAU));
            let z2 = C64::from_polar(r2, rng.gen_range(0.0..TAU));
            let prod = r1 * r2;
            // w z1 conj(z2) = big, with prod^2 <= big <= C prod
            let big = rng.gen_range(prod * prod..=c * prod);
            let w = z1.conj() * z2 * (big / (prod * prod));
            return vec![z1, z2, w];
        }
    }

    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError> {
        disc_tar_step1(p, self.c)
    }

    fn target(&self) -> &dyn SetOracle {
        &self.a0
    }
}

/// Stage-2 generator: quadratic discs through `A2`.
#[derive(Clone, Debug)]
pub struct TarStep2 {
    pub constants: TarConstants,
    a1: TarA1,
}

impl TarStep2 {
    pub fn new(constants: TarConstants) -> Self {
        let a1 = TarA1 { c: constants.c };
        TarStep2 { constants, a1 }
    }
}

impl DiscGenerator for TarStep2 {
    fn name(&self) -> String {
        "tar-step2".into()
    }

    fn stage(&self) -> usize {
        2
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let k = &self.constants;
        let z1 = uniform_disc(rng, k.epsilon);
        let aw = rng.gen_range(k.k3 / k.c..=k.c);
        let a2 = rng.gen_range(1.0 / k.k1..=aw / k.k2);
        vec![
            z1,
            C64::from_polar(a2, rng.gen_range(0.0..TAU)),
            C64::from_polar(aw, rng.gen_range(0.0..TAU)),
        ]
    }

    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError> {
        disc_tar_step2(p, &self.constants)
    }

    fn target(&self) -> &dyn SetOracle {
        &self.a1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::boundary_residual;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn point_on_a0_gets_constant_disc() {
        let (z1, z2) = (c(0.5, 0.1), c(0.2, -0.3));
        let p = [z1, z2, z1.conj() * z2];
        let a = disc_tar_step1(&p, 4.0).unwrap();
        assert!(a.disc.is_constant());
    }

    #[test]
    fn step1_example() {
        let p = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)];
        let a = disc_tar_step1(&p, 4.0).unwrap();
        let s = FRAC_1_SQRT_2;
        assert!((a.disc.coeffs()[0][1] - c(s, 0.0)).norm() < 1e-15);
        assert!((a.disc.coeffs()[1][1] - c(s, 0.0)).norm() < 1e-15);
        assert!((a.zeta - c(s, 0.0)).norm() < 1e-15);
        assert!(a.through_error(&p) < 1e-15);
        assert!(boundary_residual(&a.disc, &TarA0 { c: 4.0 }, 64) < 1e-12);
    }

    #[test]
    fn step1_singular_branch() {
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        let a = disc_tar_step1(&p, 4.0).unwrap();
        assert_eq!(a.disc.coeffs()[0], vec![c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(a.through_error(&p) < 1e-15);
        assert!(boundary_residual(&a.disc, &TarA0 { c: 4.0 }, 64) < 1e-12);
        // (0, 1, 1/2) is not in A1: |z2| / C <= |z1| fails
        assert!(matches!(
            disc_tar_step1(&[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0)], 4.0),
            Err(HullError::NotAdmissible(_))
        ));
    }

    #[test]
    fn step2_profile_is_in_range() {
        for v in step2_boundary_profile(256) {
            assert!(v.im.abs() < 1e-15);
            assert!(v.re >= 1.0 / 9.0 - 1e-12 && v.re <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn default_constants_cover_a2() {
        let k = TarConstants::default();
        assert!(k.covers_a2());
        assert!(k.k1 < 8.0 && k.k2 > 18.0);
        // eps = 0.05 leaves no room for K3 when C = 4
        assert!(TarConstants::derived(4.0, 0.05).is_err());
    }

    #[test]
    fn step2_at_z1_zero_hits_one_half() {
        let k = TarConstants::default();
        let p = [c(0.0, 0.0), c(0.0, 0.16), c(-3.8, 0.0)];
        let a = disc_tar_step2(&p, &k).unwrap();
        assert_eq!(a.zeta, c(0.5, 0.0));
        assert!(a.through_error(&p) < 1e-14);
        assert!(boundary_residual(&a.disc, &TarA1 { c: 4.0 }, 256) < 1e-12);
    }

    #[test]
    fn random_points_of_both_stages() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g1 = TarStep1::new(4.0);
        let g2 = TarStep2::new(TarConstants::default());
        for _ in 0..200 {
            let p = g1.sample(&mut rng);
            let a = g1.disc_through(&p).unwrap();
            assert!(a.zeta.norm() <= 1.0 + 1e-12);
            assert!(a.through_error(&p) < 1e-8);
            assert!(boundary_residual(&a.disc, g1.target(), 64) < 1e-8);
            let q = g2.sample(&mut rng);
            let b = g2.disc_through(&q).unwrap();
            assert!(b.zeta.norm() <= 1.0);
            assert!(b.through_error(&q) < 1e-8, "{:e}", b.through_error(&q));
            assert!(boundary_residual(&b.disc, g2.target(), 64) < 1e-8);
        }
    }
}
