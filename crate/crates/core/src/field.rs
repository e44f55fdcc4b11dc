//! Exact arithmetic in the prime field GF(q).
//!
//! A [`Modulus`] is validated once (prime, at least 5) and shared by every
//! [`FieldElement`] built from it. Elements always hold a canonical residue in
//! `[0, q)`; operations between elements of different moduli are rejected.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("operands belong to different moduli")]
    ModulusMismatch,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("modulus {0} is not prime")]
    NotPrime(BigUint),
    #[error("modulus {0} is too small; at least 5 is required")]
    ModulusTooSmall(BigUint),
    #[error("primality is only defined for integers >= 2 (got {0})")]
    InvalidPrimalityInput(BigUint),
    #[error("value {value} is not a residue modulo {modulus}")]
    OutOfRange { value: BigUint, modulus: BigUint },
    #[error("not a base-10 integer: {0:?}")]
    Parse(String),
}

/// Smallest modulus admitting a nontrivial scheme.
const MIN_MODULUS: u32 = 5;

/// Miller-Rabin bases that decide primality exactly for every n < 3.3 * 10^24.
const DETERMINISTIC_WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Random rounds used above 2^64, on top of the fixed witnesses.
const PROBABILISTIC_ROUNDS: usize = 64;

/// A prime modulus q >= 5.
#[derive(Clone)]
pub struct Modulus(Arc<BigUint>);

impl Modulus {
    pub fn new(q: BigUint) -> Result<Self, FieldError> {
        if q < BigUint::from(MIN_MODULUS) {
            return Err(FieldError::ModulusTooSmall(q));
        }
        if !is_prime(&q)? {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Modulus(Arc::new(q)))
    }

    pub fn from_u64(q: u64) -> Result<Self, FieldError> {
        Self::new(BigUint::from(q))
    }

    pub fn from_decimal(s: &str) -> Result<Self, FieldError> {
        Self::new(parse_decimal(s)?)
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    /// Builds an element, reducing `value` modulo q.
    pub fn element(&self, value: impl Into<BigUint>) -> FieldElement {
        FieldElement {
            value: value.into() % self.value(),
            modulus: self.clone(),
        }
    }

    /// Builds an element from a value that must already be a residue.
    pub fn residue(&self, value: BigUint) -> Result<FieldElement, FieldError> {
        if &value >= self.value() {
            return Err(FieldError::OutOfRange {
                value,
                modulus: self.value().clone(),
            });
        }
        Ok(FieldElement {
            value,
            modulus: self.clone(),
        })
    }

    /// Parses a canonical decimal residue (digits only, no sign or exponent).
    pub fn parse_element(&self, s: &str) -> Result<FieldElement, FieldError> {
        self.residue(parse_decimal(s)?)
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0u32)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1u32)
    }

    /// Uniformly random element of GF(q).
    pub fn random_element<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            value: random_below(rng, self.value()),
            modulus: self.clone(),
        }
    }

    pub(crate) fn add_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let sum = a + b;
        if &sum >= self.value() {
            sum - self.value()
        } else {
            sum
        }
    }

    pub(crate) fn sub_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            self.value() - (b - a)
        }
    }

    pub(crate) fn mul_raw(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % self.value()
    }

    pub(crate) fn inv_raw(&self, a: &BigUint) -> Result<BigUint, FieldError> {
        if a.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        // Extended Euclid on (a, q); q prime so gcd is 1 for every nonzero a.
        let q = BigInt::from_biguint(Sign::Plus, self.value().clone());
        let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a.clone()), q.clone());
        let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
        while !r.is_zero() {
            let quotient = &old_r / &r;
            let next_r = &old_r - &quotient * &r;
            old_r = std::mem::replace(&mut r, next_r);
            let next_s = &old_s - &quotient * &s;
            old_s = std::mem::replace(&mut s, next_s);
        }
        debug_assert!(old_r.is_one());
        Ok(old_s
            .mod_floor(&q)
            .to_biguint()
            .expect("mod_floor of a positive modulus is nonnegative"))
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Modulus {}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus({})", self.0)
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A residue in `[0, q)` tied to its modulus.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    value: BigUint,
    modulus: Modulus,
}

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn into_value(self) -> BigUint {
        self.value
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.modulus == other.modulus {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch)
        }
    }

    fn with_value(&self, value: BigUint) -> FieldElement {
        FieldElement {
            value,
            modulus: self.modulus.clone(),
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with_value(self.modulus.add_raw(&self.value, &other.value)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with_value(self.modulus.sub_raw(&self.value, &other.value)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with_value(self.modulus.sub_raw(&BigUint::zero(), &self.value))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        Ok(self.with_value(self.modulus.mul_raw(&self.value, &other.value)))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(self.with_value(self.modulus.inv_raw(&self.value)?))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(other)?;
        self.mul(&other.inv()?)
    }

    /// `self^exponent` by square-and-multiply.
    pub fn pow(&self, exponent: &BigUint) -> FieldElement {
        self.with_value(self.value.modpow(exponent, self.modulus.value()))
    }

    pub fn pow_u64(&self, exponent: u64) -> FieldElement {
        self.pow(&BigUint::from(exponent))
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

/// Parses a nonnegative base-10 integer made of ASCII digits only.
pub fn parse_decimal(s: &str) -> Result<BigUint, FieldError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(FieldError::Parse(s.to_string()));
    }
    BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| FieldError::Parse(s.to_string()))
}

/// Uniform integer in `[0, 2^bits)`, read little-endian from the generator.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let mut bytes = vec![0u8; bits.div_ceil(8) as usize];
    rng.fill_bytes(&mut bytes);
    let spare = (bytes.len() as u64 * 8 - bits) as u32;
    if let Some(top) = bytes.last_mut() {
        *top &= 0xffu8 >> spare;
    }
    BigUint::from_bytes_le(&bytes)
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty sampling range");
    let bits = bound.bits();
    loop {
        let candidate = random_bits(rng, bits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Miller-Rabin primality test.
///
/// Exact below 2^64 (fixed witness set); above that the fixed witnesses are
/// followed by 64 random bases, for an error probability below 4^-64.
pub fn is_prime(n: &BigUint) -> Result<bool, FieldError> {
    let two = BigUint::from(2u32);
    if n < &two {
        return Err(FieldError::InvalidPrimalityInput(n.clone()));
    }
    for &p in DETERMINISTIC_WITNESSES.iter() {
        let p = BigUint::from(p);
        if n == &p {
            return Ok(true);
        }
        if (n % &p).is_zero() {
            return Ok(false);
        }
    }

    let n_minus_one = n - 1u32;
    let shift = n_minus_one
        .trailing_zeros()
        .expect("n - 1 is nonzero for n >= 2");
    let odd_part = &n_minus_one >> shift;

    let is_witness = |base: &BigUint| -> bool {
        let mut x = base.modpow(&odd_part, n);
        if x.is_one() || x == n_minus_one {
            return false;
        }
        for _ in 1..shift {
            x = (&x * &x) % n;
            if x == n_minus_one {
                return false;
            }
        }
        true
    };

    if DETERMINISTIC_WITNESSES
        .iter()
        .any(|&w| is_witness(&BigUint::from(w)))
    {
        return Ok(false);
    }
    if n.bits() <= 64 {
        return Ok(true);
    }

    let mut rng = rand::thread_rng();
    let span = n - 3u32;
    for _ in 0..PROBABILISTIC_ROUNDS {
        let base = random_below(&mut rng, &span) + &two;
        if is_witness(&base) {
            return Ok(false);
        }
    }
    Ok(true)
}
