//! Linear discs attached to `s = |z1|^2 - |z2|^2` in `C^2 x R`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check, le, uniform_disc, Attached, DiscGenerator, HullError, SeedSet};
use crate::geom::{AnalyticDisc, GraphSurface, SetOracle};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnoteBranch {
    /// `|z1|^2 <= |z2|^2 + s`: the disc moves `z1`.
    A1,
    /// `|z2|^2 <= |z1|^2 - s`: the disc moves `z2`.
    A2,
}

/// Disc through `p = (z1, z2, s)` attached to the quadric.
pub fn disc_anote(p: &[C64], branch: AnoteBranch) -> Result<Attached, HullError> {
    check(p.len() == 3, "point in C^2 x R")?;
    let (z1, z2, s) = (p[0], p[1], p[2]);
    check(s.im.abs() <= 1e-12 * (1.0 + s.re.abs()), "s real")?;
    let s = s.re;
    let zero = C64::new(0.0, 0.0);
    let (a1, a2) = (z1.norm_sqr(), z2.norm_sqr());
    if (a1 - a2 - s).abs() <= 1e-14 {
        return Ok(Attached {
            disc: AnalyticDisc::constant(p),
            zeta: zero,
        });
    }
    let sr = C64::new(s, 0.0);
    match branch {
        AnoteBranch::A1 => {
            let r2 = a2 + s;
            check(r2 > 0.0, "|z2|^2 + s > 0")?;
            check(le(a1, r2), "|z1|^2 <= |z2|^2 + s")?;
            let r = r2.sqrt();
            Ok(Attached {
                disc: AnalyticDisc::new(vec![vec![zero, C64::new(r, 0.0)], vec![z2], vec![sr]])?,
                zeta: z1 / r,
            })
        }
        AnoteBranch::A2 => {
            let r2 = a1 - s;
            check(r2 > 0.0, "|z1|^2 - s > 0")?;
            check(le(a2, r2), "|z2|^2 <= |z1|^2 - s")?;
            let r = r2.sqrt();
            Ok(Attached {
                disc: AnalyticDisc::new(vec![vec![z1], vec![zero, C64::new(r, 0.0)], vec![sr]])?,
                zeta: z2 / r,
            })
        }
    }
}

/// The quadric inside `|z1|, |z2| <= 1` as a sampled seed set; the oracle box
/// is wide enough to contain every disc the generators build from it.
#[derive(Clone, Debug)]
pub struct QuadricSeed {
    pub surface: GraphSurface,
}

impl Default for QuadricSeed {
    fn default() -> Self {
        QuadricSeed {
            surface: GraphSurface::signature_quadric().with_box(2.0, 2.0),
        }
    }
}

impl SetOracle for QuadricSeed {
    fn dim(&self) -> usize {
        3
    }

    fn distance(&self, p: &[C64]) -> f64 {
        self.surface.distance(p)
    }
}

impl SeedSet for QuadricSeed {
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        let z = [uniform_disc(rng, 1.0), uniform_disc(rng, 1.0)];
        self.surface.lift(&z)
    }
}

#[derive(Clone, Debug)]
pub struct AnoteGenerator {
    pub branch: AnoteBranch,
    seed: QuadricSeed,
}

impl AnoteGenerator {
    pub fn new(branch: AnoteBranch) -> Self {
        AnoteGenerator {
            branch,
            seed: QuadricSeed::default(),
        }
    }
}

impl DiscGenerator for AnoteGenerator {
    fn name(&self) -> String {
        match self.branch {
            AnoteBranch::A1 => "anote-a1".into(),
            AnoteBranch::A2 => "anote-a2".into(),
        }
    }

    fn stage(&self) -> usize {
        1
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<C64> {
        loop {
            let s: f64 = rng.gen_range(-1.0..=1.0);
            let other = uniform_disc(rng, 1.0);
            let r2 = match self.branch {
                AnoteBranch::A1 => other.norm_sqr() + s,
                AnoteBranch::A2 => other.norm_sqr() - s,
            };
            if r2 <= 1e-6 {
                continue;
            }
            let moved = uniform_disc(rng, r2.sqrt().min(1.0));
            let sr = C64::new(s, 0.0);
            return match self.branch {
                AnoteBranch::A1 => vec![moved, other, sr],
                AnoteBranch::A2 => vec![other, moved, sr],
            };
        }
    }

    fn disc_through(&self, p: &[C64]) -> Result<Attached, HullError> {
        disc_anote(p, self.branch)
    }

    fn target(&self) -> &dyn SetOracle {
        &self.seed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::boundary_residual;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn examples() {
        let m = QuadricSeed::default();
        let p = [c(0.5), c(0.3), c(0.1)];
        let a = disc_anote(&p, AnoteBranch::A2).unwrap();
        assert_eq!(a.disc.coeffs()[0], vec![c(0.5)]);
        assert!((a.disc.coeffs()[1][1].re - 0.15f64.sqrt()).abs() < 1e-15);
        assert!(a.through_error(&p) < 1e-15);
        assert!(boundary_residual(&a.disc, &m, 64) < 1e-12);

        let o = disc_anote(&[c(0.0), c(0.0), c(0.0)], AnoteBranch::A1).unwrap();
        assert!(o.disc.is_constant());

        let q = [c(0.2), c(0.5), c(0.1)];
        let b = disc_anote(&q, AnoteBranch::A1).unwrap();
        assert!((b.disc.coeffs()[0][1].re - 0.35f64.sqrt()).abs() < 1e-15);
        assert!(boundary_residual(&b.disc, &m, 64) < 1e-12);
        assert!(b.through_error(&q) < 1e-15);
    }

    #[test]
    fn violations_are_reported() {
        assert!(disc_anote(&[c(0.9), c(0.1), c(0.1)], AnoteBranch::A1).is_err());
        assert!(disc_anote(&[c(0.1), c(0.9), c(0.1)], AnoteBranch::A2).is_err());
    }

    #[test]
    fn sampled_points_are_admissible() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for b in [AnoteBranch::A1, AnoteBranch::A2] {
            let g = AnoteGenerator::new(b);
            for _ in 0..200 {
                let p = g.sample(&mut rng);
                let a = g.disc_through(&p).unwrap();
                assert!(a.through_error(&p) < 1e-12);
                assert!(boundary_residual(&a.disc, g.target(), 64) < 1e-12);
            }
        }
    }
}
