//! Seeded rank oracles.
//!
//! Every LCA in this crate simulates an online algorithm over a random arrival
//! order. The order is never materialized: a [`RankOracle`] maps an item id to a
//! [`Rank`] on demand, so all queries against the same seed see the same
//! permutation.
//!
//! Derivations are fixed and portable:
//!
//! * sub-seeds and bounded draws use SHA-256 over a domain tag, the parent key,
//!   the ensemble index (little endian), the label length (little endian u64)
//!   and the label bytes;
//! * full pseudorandom ranks use a two-round keyed splitmix64 finalizer with two
//!   64-bit words taken from SHA-256 of the seed;
//! * k-wise independent ranks evaluate a degree `k - 1` polynomial over `GF(p)`
//!   whose coefficients are SHA-256 words of the seed reduced mod `p`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LcaError, Result};

/// The Mersenne prime `2^61 - 1`, large enough to exceed `n^3` for any
/// universe up to `2^20` items.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

const TAG_SUBSEED: &[u8] = b"lca/subseed/v1";
const TAG_RANGE: &[u8] = b"lca/range/v1";
const TAG_HASH_KEY: &[u8] = b"lca/rank-key/v1";
const TAG_KWISE: &[u8] = b"lca/kwise/v1";
const TAG_FROM_U64: &[u8] = b"lca/seed-from-u64/v1";

/// A 256-bit master key plus an ensemble index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed {
    pub master_key: [u8; 32],
    pub ensemble_index: u64,
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({}#{})", self.to_hex(), self.ensemble_index)
    }
}

impl Seed {
    pub fn new(master_key: [u8; 32]) -> Self {
        Seed {
            master_key,
            ensemble_index: 0,
        }
    }

    /// Parses exactly 64 hex characters.
    pub fn from_hex(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() != 64 {
            return Err(LcaError::invalid(format!(
                "seed must be 64 hex characters, got {}",
                s.len()
            )));
        }
        let mut key = [0u8; 32];
        hex::decode_to_slice(s, &mut key)
            .map_err(|e| LcaError::invalid(format!("seed is not hex: {e}")))?;
        Ok(Seed::new(key))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.master_key)
    }

    /// Convenience constructor for tests and sweeps: SHA-256 of a tag and `x`.
    pub fn from_u64(x: u64) -> Self {
        let mut h = Sha256::new();
        h.update(TAG_FROM_U64);
        h.update(x.to_le_bytes());
        Seed::new(h.finalize().into())
    }

    /// The same master key with another ensemble index.
    pub fn ensemble(&self, index: u64) -> Self {
        Seed {
            master_key: self.master_key,
            ensemble_index: index,
        }
    }

    /// Domain-separated child seed. The ensemble index is inherited.
    pub fn derive(&self, label: &[u8]) -> Self {
        let digest = self.digest(TAG_SUBSEED, label);
        Seed {
            master_key: digest,
            ensemble_index: self.ensemble_index,
        }
    }

    /// `derive(label)` followed by `derive(index as little endian bytes)`.
    pub fn derive_indexed(&self, label: &[u8], index: u64) -> Self {
        self.derive(label).derive(&index.to_le_bytes())
    }

    /// Uniform draw from `[0, bound)`, a pure function of `(self, label, bound)`.
    ///
    /// Reduces a 128-bit digest word mod `bound`; the bias is below `2^-64`.
    pub fn random_in_range(&self, label: &[u8], bound: u64) -> Result<u64> {
        if bound == 0 {
            return Err(LcaError::invalid("random_in_range bound must be >= 1"));
        }
        let d = self.digest(TAG_RANGE, label);
        let word = u128::from_le_bytes(d[..16].try_into().unwrap());
        Ok((word % bound as u128) as u64)
    }

    /// 32 bytes suitable for seeding a ChaCha stream.
    pub fn stream_seed(&self, label: &[u8]) -> [u8; 32] {
        self.derive(label).master_key
    }

    fn digest(&self, tag: &[u8], label: &[u8]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(tag);
        h.update(self.master_key);
        h.update(self.ensemble_index.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label);
        h.finalize().into()
    }
}

impl Serialize for Seed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Seed::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`Seed::derive`].
pub fn derive_subseed(seed: &Seed, label: &[u8]) -> Seed {
    seed.derive(label)
}

/// Free-function form of [`Seed::random_in_range`].
pub fn random_in_range(seed: &Seed, label: &[u8], bound: u64) -> Result<u64> {
    seed.random_in_range(label, bound)
}

/// Position in the simulated arrival order.
///
/// `value / 2^64` is the point in `[0, 1)`; equal values are ordered by
/// `owner`, so any set of distinct owners is strictly ordered. The derived
/// `Ord` is exactly this lexicographic order (field order matters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rank {
    pub value: u64,
    pub owner: u64,
}

impl Rank {
    pub fn as_unit(&self) -> f64 {
        self.value as f64 / 18_446_744_073_709_551_616.0
    }
}

pub fn compare(a: &Rank, b: &Rank) -> Ordering {
    a.cmp(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderingKind {
    FullPseudorandom,
    KWiseIndependent { k: u32, prime: u64 },
}

impl Default for OrderingKind {
    fn default() -> Self {
        OrderingKind::FullPseudorandom
    }
}

impl OrderingKind {
    /// k-wise independent ordering over the default prime field.
    pub fn k_wise(k: u32) -> Self {
        OrderingKind::KWiseIndependent {
            k,
            prime: MERSENNE_61,
        }
    }

    pub fn validate(&self, universe: u64) -> Result<()> {
        match *self {
            OrderingKind::FullPseudorandom => Ok(()),
            OrderingKind::KWiseIndependent { k, prime } => {
                if k == 0 {
                    return Err(LcaError::invalid("k-wise ordering needs k >= 1"));
                }
                if !is_prime(prime) {
                    return Err(LcaError::invalid(format!("{prime} is not prime")));
                }
                if prime <= universe {
                    return Err(LcaError::invalid(format!(
                        "prime {prime} must exceed universe size {universe}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Two-word keyed 64-bit hash; fast, portable, not cryptographic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyedHash {
    k0: u64,
    k1: u64,
}

impl KeyedHash {
    pub fn new(seed: &Seed) -> Self {
        let d = seed.digest(TAG_HASH_KEY, b"");
        KeyedHash {
            k0: u64::from_le_bytes(d[0..8].try_into().unwrap()),
            k1: u64::from_le_bytes(d[8..16].try_into().unwrap()),
        }
    }

    pub fn hash(&self, x: u64) -> u64 {
        mix64(mix64(x.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ self.k0) ^ self.k1)
    }

    pub fn bit(&self, x: u64) -> bool {
        self.hash(x) >> 63 == 1
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
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

/// `x -> sum a_i x^i mod p`; with uniform coefficients the values at any
/// `k` distinct points are independent and uniform over `GF(p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWisePolynomial {
    coefficients: Vec<u64>,
    prime: u64,
}

impl KWisePolynomial {
    pub fn from_coefficients(coefficients: Vec<u64>, prime: u64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(LcaError::invalid("polynomial needs at least one coefficient"));
        }
        if !is_prime(prime) {
            return Err(LcaError::invalid(format!("{prime} is not prime")));
        }
        let coefficients = coefficients.into_iter().map(|a| a % prime).collect();
        Ok(KWisePolynomial {
            coefficients,
            prime,
        })
    }

    pub fn from_seed(seed: &Seed, k: u32, prime: u64) -> Result<Self> {
        let coefficients = (0..k as u64)
            .map(|i| {
                let d = seed.digest(TAG_KWISE, &i.to_le_bytes());
                let w = u128::from_le_bytes(d[..16].try_into().unwrap());
                (w % prime as u128) as u64
            })
            .collect();
        Self::from_coefficients(coefficients, prime)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % self.prime;
        self.coefficients
            .iter()
            .rev()
            .fold(0, |acc, &a| (mul_mod(acc, x, self.prime) + a) % self.prime)
    }

    /// Field value scaled monotonically onto 64 bits.
    pub fn rank(&self, x: u64) -> Rank {
        let y = self.eval(x) as u128;
        Rank {
            value: ((y << 64) / self.prime as u128) as u64,
            owner: x,
        }
    }
}

#[derive(Clone, Debug)]
enum RankFunction {
    Hash(KeyedHash),
    Poly(KWisePolynomial),
}

/// A rank function bound to a seed, an ordering kind and a universe size.
#[derive(Clone, Debug)]
pub struct RankOracle {
    universe: u64,
    function: RankFunction,
}

impl RankOracle {
    pub fn new(seed: &Seed, kind: OrderingKind, universe: u64) -> Result<Self> {
        kind.validate(universe)?;
        let function = match kind {
            OrderingKind::FullPseudorandom => RankFunction::Hash(KeyedHash::new(seed)),
            OrderingKind::KWiseIndependent { k, prime } => {
                RankFunction::Poly(KWisePolynomial::from_seed(seed, k, prime)?)
            }
        };
        Ok(RankOracle { universe, function })
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn rank_of(&self, id: u64) -> Result<Rank> {
        if id >= self.universe {
            return Err(LcaError::OutOfUniverse {
                id,
                universe: self.universe,
            });
        }
        Ok(self.rank_unchecked(id))
    }

    /// [`Self::rank_of`] without the range check, for hot loops whose ids
    /// are known to be in range. Debug builds still assert it.
    pub fn rank_unchecked(&self, id: u64) -> Rank {
        debug_assert!(id < self.universe);
        match &self.function {
            RankFunction::Hash(h) => Rank {
                value: h.hash(id),
                owner: id,
            },
            RankFunction::Poly(p) => p.rank(id),
        }
    }
}

/// One-shot rank lookup. Builds the oracle on every call; hold a
/// [`RankOracle`] for repeated queries.
pub fn rank_of(seed: &Seed, kind: OrderingKind, universe: u64, vertex: u64) -> Result<Rank> {
    RankOracle::new(seed, kind, universe)?.rank_of(vertex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rank_is_deterministic() {
        let s = Seed::from_u64(1);
        let a = rank_of(&s, OrderingKind::FullPseudorandom, 10, 7).unwrap();
        let b = rank_of(&s, OrderingKind::FullPseudorandom, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.owner, 7);
    }

    #[test]
    fn out_of_universe_is_rejected() {
        let s = Seed::from_u64(1);
        let err = rank_of(&s, OrderingKind::FullPseudorandom, 10, 10).unwrap_err();
        assert_eq!(err, LcaError::OutOfUniverse { id: 10, universe: 10 });
    }

    #[test]
    fn degree_zero_polynomial_ties_everything() {
        let kind = OrderingKind::KWiseIndependent { k: 1, prime: 11 };
        let oracle = RankOracle::new(&Seed::from_u64(3), kind, 10).unwrap();
        let a = oracle.rank_of(4).unwrap();
        let b = oracle.rank_of(9).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(compare(&a, &b), Ordering::Less);
    }

    #[test]
    fn kwise_validation() {
        let s = Seed::from_u64(0);
        let bad_k = OrderingKind::KWiseIndependent { k: 0, prime: 11 };
        assert!(RankOracle::new(&s, bad_k, 5).is_err());
        let composite = OrderingKind::KWiseIndependent { k: 2, prime: 15 };
        assert!(RankOracle::new(&s, composite, 5).is_err());
        let small = OrderingKind::KWiseIndependent { k: 2, prime: 11 };
        assert!(RankOracle::new(&s, small, 11).is_err());
        assert!(RankOracle::new(&s, small, 10).is_ok());
    }

    #[test]
    fn compare_examples() {
        let r = |value, owner| Rank { value, owner };
        assert_eq!(compare(&r(5, 0), &r(9, 0)), Ordering::Less);
        assert_eq!(compare(&r(5, 2), &r(5, 3)), Ordering::Less);
        assert_eq!(compare(&r(9, 1), &r(5, 2)), Ordering::Greater);
    }

    #[test]
    fn subseed_examples() {
        let s = Seed::from_u64(42);
        assert_eq!(s.derive(b"phase2"), s.derive(b"phase2"));
        assert_ne!(s.derive(b"phase2"), s.derive(b"phase3"));
        assert_ne!(s.derive(b"a").derive(b"b"), s.derive(b"ab"));
    }

    #[test]
    fn subseeds_do_not_collide() {
        let s = Seed::from_u64(42);
        let keys: HashSet<[u8; 32]> = (0..10_000u32)
            .map(|i| s.derive(format!("label-{i}").as_bytes()).master_key)
            .collect();
        assert_eq!(keys.len(), 10_000);
    }

    #[test]
    fn ensembles_differ() {
        let s = Seed::from_u64(5);
        assert_ne!(s.ensemble(1).derive(b"x"), s.ensemble(2).derive(b"x"));
        assert_ne!(KeyedHash::new(&s.ensemble(0)), KeyedHash::new(&s.ensemble(1)));
    }

    #[test]
    fn random_in_range_examples() {
        let s = Seed::from_u64(9);
        for i in 0..100u32 {
            assert_eq!(s.random_in_range(&i.to_le_bytes(), 1).unwrap(), 0);
        }
        assert!(s.random_in_range(b"x", 0).is_err());
        assert_eq!(
            s.random_in_range(b"x", 1000).unwrap(),
            s.random_in_range(b"x", 1000).unwrap()
        );
    }

    #[test]
    fn random_in_range_is_uniform() {
        // Six bins, 6e5 seed variations; each frequency within 1% (relative) of 1/6.
        let trials = 600_000u64;
        let mut counts = [0u64; 6];
        for i in 0..trials {
            let s = Seed::from_u64(i);
            counts[s.random_in_range(b"die", 6).unwrap() as usize] += 1;
        }
        let expected = trials as f64 / 6.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        for &c in &counts {
            let f = c as f64 / trials as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.01 / 6.0, "freq {f}");
        }
        // 5 degrees of freedom, p = 0.001 critical value.
        assert!(chi2 < 20.515, "chi2 {chi2}");
    }

    #[test]
    fn hex_roundtrip_and_errors() {
        let s = Seed::from_u64(77);
        assert_eq!(Seed::from_hex(&s.to_hex()).unwrap(), s);
        assert!(Seed::from_hex("abcd").is_err());
        assert!(Seed::from_hex(&"zz".repeat(32)).is_err());
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(is_prime(MERSENNE_61));
        assert!(!is_prime(MERSENNE_61 - 2));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
    }

    #[test]
    fn polynomial_eval_matches_naive() {
        let p = KWisePolynomial::from_coefficients(vec![3, 5, 7], 31).unwrap();
        for x in 0..40u64 {
            assert_eq!(p.eval(x), (3 + 5 * x + 7 * x * x) % 31);
        }
    }

    #[test]
    fn scaled_rank_preserves_field_order() {
        let p = KWisePolynomial::from_coefficients(vec![0, 1], 31).unwrap();
        let ranks: Vec<Rank> = (0..31).map(|x| p.rank(x)).collect();
        assert!(ranks.windows(2).all(|w| w[0].value < w[1].value));
    }
}
