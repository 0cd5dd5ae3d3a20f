use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::C64;

/// Polynomial with complex coefficients in `nvars` holomorphic variables.
///
/// Terms are kept in a `BTreeMap` keyed by exponent multi-index, so iteration
/// order (and therefore floating-point evaluation order) is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", try_from = "PolyRepr")]
pub struct HoloPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    nvars: usize,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    re: f64,
    im: f64,
}

impl From<HoloPolynomial> for PolyRepr {
    fn from(p: HoloPolynomial) -> Self {
        PolyRepr {
            nvars: p.nvars,
            terms: p
                .terms
                .into_iter()
                .map(|(exp, c)| TermRepr {
                    exp,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolyRepr> for HoloPolynomial {
    type Error = String;

    fn try_from(r: PolyRepr) -> Result<Self, Self::Error> {
        let mut p = HoloPolynomial::zero(r.nvars);
        for t in r.terms {
            if t.exp.len() != r.nvars {
                return Err(format!(
                    "exponent {:?} does not match nvars = {}",
                    t.exp, r.nvars
                ));
            }
            p.add_term(&t.exp, C64::new(t.re, t.im));
        }
        Ok(p)
    }
}

impl HoloPolynomial {
    pub fn zero(nvars: usize) -> Self {
        HoloPolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], c);
        p
    }

    /// The coordinate function `z_i`.
    pub fn variable(nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable index {i} out of range for {nvars} variables"
        );
        let mut exp = vec![0; nvars];
        exp[i] = 1;
        Self::monomial(&exp, C64::new(1.0, 0.0))
    }

    pub fn monomial(exp: &[u32], c: C64) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C64)>,
    {
        let mut p = Self::zero(nvars);
        for (exp, c) in terms {
            p.add_term(&exp, c);
        }
        p
    }

    /// Adds `c * z^exp`; a coefficient that cancels to exactly zero is removed.
    pub fn add_term(&mut self, exp: &[u32], c: C64) {
        assert_eq!(exp.len(), self.nvars, "exponent length mismatch");
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exp.to_vec()).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(exp);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> + '_ {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn coeff(&self, exp: &[u32]) -> C64 {
        self.terms.get(exp).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Drops terms whose coefficient modulus is at most `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, v)| (e.clone(), v * c)),
        )
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        assert_eq!(z.len(), self.nvars, "evaluation point has wrong dimension");
        if self.terms.is_empty() {
            return C64::new(0.0, 0.0);
        }
        let mut max_pow = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (m, &k) in max_pow.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<C64>> = z
            .iter()
            .zip(&max_pow)
            .map(|(&zi, &m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                let mut acc = C64::new(1.0, 0.0);
                row.push(acc);
                for _ in 0..m {
                    acc *= zi;
                    row.push(acc);
                }
                row
            })
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &k)| acc * powers[i][k as usize])
            })
            .sum()
    }

    /// Upper bound for the Lipschitz constant on the polydisc of radius `r`
    /// (sup-norm of the gradient in the l1 sense).
    pub fn lipschitz_bound(&self, r: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let d: u32 = e.iter().sum();
                if d == 0 {
                    0.0
                } else {
                    c.norm() * d as f64 * r.powi(d as i32 - 1)
                }
            })
            .sum()
    }

    /// Random polynomial of total degree at most `degree` with coefficients
    /// uniform in the unit square.
    pub fn random<R: Rng + ?Sized>(nvars: usize, degree: u32, rng: &mut R) -> Self {
        let mut p = Self::zero(nvars);
        for exp in exponents_up_to(nvars, degree) {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            p.add_term(&exp, c);
        }
        p
    }
}

/// All exponent multi-indices in `nvars` variables with total degree `<= degree`.
pub(crate) fn exponents_up_to(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, left: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=budget {
            prefix.push(k);
            rec(prefix, left - 1, budget - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), nvars, degree, &mut out);
    out
}

impl fmt::Display for HoloPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*z{}", i + 1)?,
                    _ => write!(f, "*z{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &HoloPolynomial {
    type Output = HoloPolynomial;

    fn add(self, rhs: &HoloPolynomial) -> HoloPolynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e, *c);
        }
        out
    }
}

impl Sub for &HoloPolynomial {
    type Output = HoloPolynomial;

    fn sub(self, rhs: &HoloPolynomial) -> HoloPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &HoloPolynomial {
    type Output = HoloPolynomial;

    fn neg(self) -> HoloPolynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &HoloPolynomial {
    type Output = HoloPolynomial;

    fn mul(self, rhs: &HoloPolynomial) -> HoloPolynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = HoloPolynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for HoloPolynomial {
            type Output = HoloPolynomial;
            fn $m(self, rhs: HoloPolynomial) -> HoloPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_terms_are_dropped() {
        let mut p = HoloPolynomial::monomial(&[1, 0], c(2.0, 0.0));
        p.add_term(&[1, 0], c(-2.0, 0.0));
        assert!(p.is_zero());
        let q = &HoloPolynomial::variable(2, 0) - &HoloPolynomial::variable(2, 0);
        assert_eq!(q.len(), 0);
    }

    #[test]
    fn eval_of_z2w_plus_3() {
        let z = HoloPolynomial::variable(2, 0);
        let w = HoloPolynomial::variable(2, 1);
        let p = &(&(&z * &z) * &w) + &HoloPolynomial::constant(2, c(3.0, 0.0));
        // z = i, w = 2: i^2 * 2 + 3 = 1
        assert_eq!(p.eval(&[c(0.0, 1.0), c(2.0, 0.0)]), c(1.0, 0.0));
        assert_eq!(p.total_degree(), 3);
    }

    #[test]
    fn eval_is_bitwise_deterministic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = HoloPolynomial::random(3, 5, &mut rng);
        let z = [c(0.3, -0.2), c(-0.7, 0.1), c(0.25, 0.5)];
        let a = p.eval(&z);
        let b = p.clone().eval(&z);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let p = HoloPolynomial::random(2, 3, &mut rng);
        let s = serde_json::to_string(&p).unwrap();
        let q: HoloPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert_eq!(serde_json::to_string(&q).unwrap(), s);
    }

    #[test]
    fn exponent_enumeration_counts() {
        // binomial(n + d, d)
        assert_eq!(exponents_up_to(2, 4).len(), 15);
        assert_eq!(exponents_up_to(3, 4).len(), 35);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = C64> {
            (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
        }

        proptest! {
            #[test]
            fn ring_axioms_hold_under_evaluation(seed in any::<u64>(), z in proptest::collection::vec(cplx(), 2)) {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let p = HoloPolynomial::random(2, 4, &mut rng);
                let q = HoloPolynomial::random(2, 3, &mut rng);
                let (pz, qz) = (p.eval(&z), q.eval(&z));
                let sum = (&p + &q).eval(&z);
                let prod = (&p * &q).eval(&z);
                let scale = 1.0 + pz.norm() + qz.norm();
                prop_assert!((sum - (pz + qz)).norm() <= 1e-12 * scale);
                prop_assert!((prod - pz * qz).norm() <= 1e-12 * scale * scale);
            }
        }
    }
}
