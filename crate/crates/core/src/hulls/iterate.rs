use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DiscGenerator, HullCloud, Link, SeedSet, DEFAULT_ATTACH_TOL};
use crate::geom::{boundary_residual, DEFAULT_BOUNDARY_MESH};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullOptions {
    pub attach_tol: f64,
    /// Boundary samples checked per disc.
    pub boundary_mesh: usize,
    /// Candidates drawn per generator (and seed points at stage 0).
    pub samples: usize,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            attach_tol: DEFAULT_ATTACH_TOL,
            boundary_mesh: DEFAULT_BOUNDARY_MESH,
            samples: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub chain: Vec<Link>,
    pub residual: f64,
    pub discs: usize,
}

/// Certificate that `p` lies in stage `stage` of the iterated hull.
///
/// A stage-`j` disc through `p` must pass through `p` at a parameter in the
/// closed disc, have boundary residual at most `attach_tol` against its
/// generator's target and, for `j >= 2`, every boundary sample must itself be
/// certified at stage `j - 1`.
pub fn certify_point(
    p: &[C64],
    stage: usize,
    generators: &[&dyn DiscGenerator],
    opts: &HullOptions,
) -> Option<Certificate> {
    if stage == 0 {
        return None;
    }
    for g in generators.iter().filter(|g| g.stage() == stage) {
        let Ok(a) = g.disc_through(p) else { continue };
        if a.zeta.norm() > 1.0 + 1e-12 || a.through_error(p) > opts.attach_tol {
            continue;
        }
        let residual = boundary_residual(&a.disc, g.target(), opts.boundary_mesh);
        if residual > opts.attach_tol {
            continue;
        }
        let link = Link {
            generator: g.name(),
            disc: a.disc.clone(),
            zeta: a.zeta,
            residual,
        };
        if stage == 1 {
            return Some(Certificate {
                chain: vec![link],
                residual,
                discs: 1,
            });
        }
        let mut cert = Certificate {
            chain: vec![link],
            residual,
            discs: 1,
        };
        let mut ok = true;
        for (i, b) in a
            .disc
            .boundary_values(opts.boundary_mesh)
            .iter()
            .enumerate()
        {
            match certify_point(b, stage - 1, generators, opts) {
                Some(sub) => {
                    cert.residual = cert.residual.max(sub.residual);
                    cert.discs += sub.discs;
                    if i == 0 {
                        cert.chain.extend(sub.chain);
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(cert);
        }
    }
    None
}

/// Monte-Carlo sample of `DH^k(seed)`: seed points at stage 0, then for every
/// stage `j <= k` the certified candidates of each stage-`j` generator.
pub fn hull_iterate(
    seed: &dyn SeedSet,
    generators: &[&dyn DiscGenerator],
    k: usize,
    opts: &HullOptions,
    rng: &mut dyn RngCore,
) -> HullCloud {
    let mut cloud = HullCloud::new(seed.dim(), k);
    for _ in 0..opts.samples {
        let p = seed.sample(rng);
        let residual = seed.distance(&p);
        cloud.push(
            p,
            0,
            Certificate {
                chain: Vec::new(),
                residual,
                discs: 0,
            },
        );
    }
    for stage in 1..=k {
        for g in generators.iter().filter(|g| g.stage() == stage) {
            let candidates: Vec<Vec<C64>> = (0..opts.samples).map(|_| g.sample(rng)).collect();
            let certs: Vec<Option<Certificate>> = candidates
                .par_iter()
                .map(|p| certify_point(p, stage, generators, opts))
                .collect();
            for (p, c) in candidates.into_iter().zip(certs) {
                if let Some(c) = c {
                    cloud.push(p, stage, c);
                }
            }
        }
    }
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::SetOracle;
    use crate::hulls::{TarA0, TarA1, TarConstants, TarStep1, TarStep2};
    use rand::SeedableRng;

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn stage_one_lies_in_a1() {
        let g1 = TarStep1::new(4.0);
        let opts = HullOptions {
            samples: 50,
            ..Default::default()
        };
        let cloud = hull_iterate(&TarA0 { c: 4.0 }, &[&g1], 1, &opts, &mut rng());
        assert_eq!(cloud.stage(1).len(), 50);
        let a1 = TarA1 { c: 4.0 };
        for p in &cloud.stage(1).points {
            assert!(a1.distance(p) < 1e-10);
        }
        assert!(cloud.max_residual() < 1e-8);
    }

    #[test]
    fn stage_two_chains_reach_the_seed() {
        let g1 = TarStep1::new(4.0);
        let g2 = TarStep2::new(TarConstants::default());
        let opts = HullOptions {
            samples: 20,
            ..Default::default()
        };
        let cloud = hull_iterate(&TarA0 { c: 4.0 }, &[&g1, &g2], 2, &opts, &mut rng());
        let s2 = cloud.stage(2);
        assert_eq!(s2.len(), 20);
        for i in 0..s2.len() {
            assert!(s2.points[i][0].norm() <= 0.02 + 1e-12);
            assert_eq!(s2.provenance[i].len(), 2);
            assert_eq!(s2.certified_discs[i], 1 + opts.boundary_mesh);
            assert!(s2.residuals[i] < 1e-8);
        }
    }

    #[test]
    fn no_generators_leaves_the_seed() {
        let opts = HullOptions {
            samples: 10,
            ..Default::default()
        };
        let cloud = hull_iterate(&TarA0 { c: 4.0 }, &[], 1, &opts, &mut rng());
        assert_eq!(cloud.len(), 10);
        assert!(cloud.stages.iter().all(|&s| s == 0));
    }

    #[test]
    fn deterministic() {
        let g1 = TarStep1::new(4.0);
        let opts = HullOptions {
            samples: 10,
            ..Default::default()
        };
        let a = hull_iterate(&TarA0 { c: 4.0 }, &[&g1], 1, &opts, &mut rng());
        let b = hull_iterate(&TarA0 { c: 4.0 }, &[&g1], 1, &opts, &mut rng());
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
