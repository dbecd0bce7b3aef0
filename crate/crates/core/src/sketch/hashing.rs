//! Simulated and explicit permutations of the feature universe.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamFamily;

/// Largest universe accepted by [`TwoUniversalHashFamily`]; keeps the prime in `u64`.
pub const MAX_UNIVERSE: u64 = 1 << 62;

/// A family of `k` maps on `[0, D)` used to take minima of permuted feature ids.
pub trait MinwiseHasher: Sync {
    fn num_hashes(&self) -> usize;

    fn universe_size(&self) -> u64;

    /// Image of feature `t` under map `j`.
    ///
    /// Callers guarantee `j < num_hashes()` and `t < universe_size()`.
    fn hash(&self, j: usize, t: u64) -> u64;
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime_above(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// `h_j(t) = ((c1_j + c2_j t) mod p) mod D` for `k` stored coefficient pairs.
///
/// The products are formed in a width that cannot overflow: `u64` while
/// `p <= 2^32`, `u128` above that. No modular-arithmetic shortcuts are used;
/// a multiply-shift scheme would be faster but changes the hash family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoUniversalHashFamily {
    prime: u64,
    universe_size: u64,
    coeffs: Vec<(u64, u64)>,
    seed: u64,
}

impl TwoUniversalHashFamily {
    /// Draw `k` pairs with `c1` uniform on `[0, p)` and `c2` uniform on `[1, p)`,
    /// where `p` is the smallest prime above `D`.
    ///
    /// Pairs are drawn sequentially from one stream, so the family for `k`
    /// is a prefix of the family for any larger `k` under the same seed.
    pub fn new(k: usize, universe_size: u64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if universe_size == 0 || universe_size > MAX_UNIVERSE {
            return Err(Error::invalid(format!(
                "universe size must be in [1, 2^62], got {universe_size}"
            )));
        }
        let prime = next_prime_above(universe_size);
        let mut rng = StreamFamily::new(seed).stream(0);
        let coeffs = (0..k)
            .map(|_| (rng.gen_range(0..prime), rng.gen_range(1..prime)))
            .collect();
        Ok(Self {
            prime,
            universe_size,
            coeffs,
            seed,
        })
    }

    /// Build from explicit coefficients; `prime` must be a prime above `universe_size`.
    pub fn from_coefficients(coeffs: Vec<(u64, u64)>, prime: u64, universe_size: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("k must be at least 1"));
        }
        if universe_size == 0 || prime <= universe_size || !is_prime(prime) {
            return Err(Error::invalid(format!(
                "{prime} is not a prime above the universe size {universe_size}"
            )));
        }
        if let Some(&(c1, c2)) = coeffs.iter().find(|&&(c1, c2)| c1 >= prime || c2 == 0 || c2 >= prime) {
            return Err(Error::invalid(format!("coefficients ({c1}, {c2}) out of range")));
        }
        Ok(Self {
            prime,
            universe_size,
            coeffs,
            seed: 0,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coefficients(&self) -> &[(u64, u64)] {
        &self.coeffs
    }

    /// Checked evaluation of `h_j(t)`.
    pub fn apply(&self, j: usize, t: u64) -> Result<u64> {
        if j >= self.coeffs.len() {
            return Err(Error::OutOfRange {
                index: j as u64,
                bound: self.coeffs.len() as u64,
            });
        }
        if t >= self.universe_size {
            return Err(Error::OutOfRange {
                index: t,
                bound: self.universe_size,
            });
        }
        Ok(self.hash(j, t))
    }
}

impl MinwiseHasher for TwoUniversalHashFamily {
    fn num_hashes(&self) -> usize {
        self.coeffs.len()
    }

    fn universe_size(&self) -> u64 {
        self.universe_size
    }

    #[inline]
    fn hash(&self, j: usize, t: u64) -> u64 {
        let (c1, c2) = self.coeffs[j];
        let p = self.prime;
        if p <= 1 << 32 {
            // c1 + c2 t <= (p - 1) + (p - 1)^2 < 2^64
            ((c1 + c2 * t) % p) % self.universe_size
        } else {
            let v = (c1 as u128 + c2 as u128 * t as u128) % p as u128;
            (v as u64) % self.universe_size
        }
    }
}

/// `k` stored bijections of `[0, D)`. Only practical for small universes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitPermutationFamily {
    universe_size: u64,
    // k * D images, row-major by permutation
    images: Vec<u64>,
    seed: u64,
}

impl ExplicitPermutationFamily {
    /// `k` uniformly random permutations, permutation `j` shuffled from stream `j`.
    pub fn random(k: usize, universe_size: u64, seed: u64) -> Result<Self> {
        if k == 0 || universe_size == 0 {
            return Err(Error::invalid("k and universe size must be at least 1"));
        }
        let d = usize::try_from(universe_size)
            .ok()
            .filter(|&d| d.checked_mul(k).is_some())
            .ok_or_else(|| Error::invalid("universe too large for explicit permutations"))?;
        let streams = StreamFamily::new(seed);
        let mut images = Vec::with_capacity(k * d);
        let mut row: Vec<u64> = (0..universe_size).collect();
        for j in 0..k {
            let mut rng = streams.stream(j as u64);
            row.iter_mut().enumerate().for_each(|(i, v)| *v = i as u64);
            row.shuffle(&mut rng);
            images.extend_from_slice(&row);
        }
        Ok(Self {
            universe_size,
            images,
            seed,
        })
    }

    /// Use the given maps, each of which must be a bijection of `[0, D)`.
    pub fn from_permutations(perms: &[Vec<u64>]) -> Result<Self> {
        let first = perms
            .first()
            .ok_or_else(|| Error::invalid("need at least one permutation"))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::invalid("empty permutation"));
        }
        let mut seen = vec![false; d];
        let mut images = Vec::with_capacity(d * perms.len());
        for p in perms {
            if p.len() != d {
                return Err(Error::shape("permutations of different lengths"));
            }
            seen.iter_mut().for_each(|s| *s = false);
            for &v in p {
                let slot = seen.get_mut(v as usize).ok_or(Error::OutOfRange {
                    index: v,
                    bound: d as u64,
                })?;
                if *slot {
                    return Err(Error::invalid(format!("value {v} repeated; not a bijection")));
                }
                *slot = true;
            }
            images.extend_from_slice(p);
        }
        Ok(Self {
            universe_size: d as u64,
            images,
            seed: 0,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self, j: usize) -> &[u64] {
        let d = self.universe_size as usize;
        &self.images[j * d..(j + 1) * d]
    }
}

impl MinwiseHasher for ExplicitPermutationFamily {
    fn num_hashes(&self) -> usize {
        self.images.len() / self.universe_size as usize
    }

    fn universe_size(&self) -> u64 {
        self.universe_size
    }

    #[inline]
    fn hash(&self, j: usize, t: u64) -> u64 {
        self.images[j * self.universe_size as usize + t as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(2_147_483_647));
        assert!(!is_prime(2_147_483_649));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert_eq!(next_prime_above(16), 17);
        assert_eq!(next_prime_above(17), 19);
        assert_eq!(next_prime_above(1 << 20), 1_048_583);
    }

    #[test]
    fn family_is_deterministic() {
        let a = TwoUniversalHashFamily::new(1, 16, 42).unwrap();
        let b = TwoUniversalHashFamily::new(1, 16, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.prime(), 17);
        assert_ne!(a, TwoUniversalHashFamily::new(1, 16, 43).unwrap());
    }

    #[test]
    fn smaller_family_is_a_prefix() {
        let small = TwoUniversalHashFamily::new(5, 1000, 9).unwrap();
        let big = TwoUniversalHashFamily::new(50, 1000, 9).unwrap();
        assert_eq!(small.coefficients(), &big.coefficients()[..5]);
    }

    #[test]
    fn coefficient_ranges() {
        let fam = TwoUniversalHashFamily::new(10_000, 16, 1).unwrap();
        let p = fam.prime();
        assert!(fam
            .coefficients()
            .iter()
            .all(|&(c1, c2)| c1 < p && (1..p).contains(&c2)));
        // both ends of the c2 range get hit with p = 17 over 10^4 draws
        assert!(fam.coefficients().iter().any(|&(_, c2)| c2 == 1));
        assert!(fam.coefficients().iter().any(|&(_, c2)| c2 == p - 1));
    }

    #[test]
    fn direct_arithmetic() {
        let fam = TwoUniversalHashFamily::from_coefficients(vec![(3, 5), (0, 1)], 31, 16).unwrap();
        assert_eq!(fam.apply(0, 7).unwrap(), 7);
        for t in 0..16 {
            assert_eq!(fam.apply(1, t).unwrap(), t);
        }
        assert!(matches!(fam.apply(2, 0), Err(Error::OutOfRange { .. })));
        assert!(matches!(fam.apply(0, 16), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn wide_arithmetic_path() {
        let d = (1u64 << 40) + 3;
        let fam = TwoUniversalHashFamily::new(3, d, 5).unwrap();
        assert!(fam.prime() > 1 << 32);
        for j in 0..3 {
            let (c1, c2) = fam.coefficients()[j];
            let t = d - 1;
            let expect = ((c1 as u128 + c2 as u128 * t as u128) % fam.prime() as u128) as u64 % d;
            assert_eq!(fam.apply(j, t).unwrap(), expect);
        }
    }

    #[test]
    fn hash_output_is_near_uniform() {
        // 20 equal bins over [0, D); chi-square critical value at 0.01 with 19 dof
        let d = 10_000u64;
        let fam = TwoUniversalHashFamily::new(4, d, 77).unwrap();
        for j in 0..4 {
            let mut bins = [0u64; 20];
            for t in 0..d {
                bins[(fam.hash(j, t) * 20 / d) as usize] += 1;
            }
            let e = d as f64 / 20.0;
            let chi2: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
            assert!(chi2 < 36.19, "chi2 = {chi2}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TwoUniversalHashFamily::new(0, 16, 0).is_err());
        assert!(TwoUniversalHashFamily::new(1, 0, 0).is_err());
        assert!(TwoUniversalHashFamily::from_coefficients(vec![(0, 0)], 17, 16).is_err());
        assert!(TwoUniversalHashFamily::from_coefficients(vec![(0, 1)], 16, 15).is_err());
        assert!(TwoUniversalHashFamily::from_coefficients(vec![(0, 1)], 13, 16).is_err());
    }

    #[test]
    fn explicit_permutations_are_bijections() {
        let fam = ExplicitPermutationFamily::random(5, 100, 3).unwrap();
        for j in 0..5 {
            let mut p = fam.permutation(j).to_vec();
            p.sort_unstable();
            assert_eq!(p, (0..100).collect::<Vec<_>>());
        }
        assert_ne!(fam.permutation(0), fam.permutation(1));
        assert!(ExplicitPermutationFamily::from_permutations(&[vec![0, 0, 1]]).is_err());
        assert!(ExplicitPermutationFamily::from_permutations(&[vec![0, 3, 1]]).is_err());
        let id = ExplicitPermutationFamily::from_permutations(&[vec![2, 0, 1]]).unwrap();
        assert_eq!(id.hash(0, 0), 2);
    }
}
