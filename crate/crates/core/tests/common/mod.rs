#![allow(dead_code)]

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use hsss::dealer::SecretVector;
use hsss::field::{is_prime, Modulus};
use hsss::orgchart::{OrgChart, Participant};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

/// 2^61 - 1: comfortably above `1 + h^2 * max_login` for every random chart here.
pub const Q61: u64 = 2_305_843_009_213_693_951;

pub const MAX_RANDOM_LOGIN: u64 = 200;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("testdata")
        .join(name)
}

/// Qualification from first principles: level sum above `h` and no level `j`
/// contributing `ceil((h + 1) / j)` or more members.
pub fn qualifies(height: u32, levels: &[u32]) -> bool {
    let sum: u32 = levels.iter().sum();
    if sum < height + 1 {
        return false;
    }
    (1..=height).all(|j| {
        let count = levels.iter().filter(|&&l| l == j).count() as u32;
        count < (height + 1).div_ceil(j)
    })
}

/// True when no two `(login, m)` claims share `m * login`.
pub fn collision_free(participants: &[Participant]) -> bool {
    let mut seen = HashSet::new();
    participants
        .iter()
        .all(|p| (1..=p.level as u64).all(|m| seen.insert(m * p.login)))
}

/// A random roster of `n` members with distinct, collision-free logins.
pub fn random_chart<R: Rng>(rng: &mut R, n: usize, height: u32) -> OrgChart {
    loop {
        let mut logins: Vec<u64> = (1..=MAX_RANDOM_LOGIN).collect();
        logins.shuffle(rng);
        let participants: Vec<Participant> = logins[..n]
            .iter()
            .map(|&login| Participant::new(login, rng.gen_range(1..=height)))
            .collect();
        if collision_free(&participants) {
            return OrgChart::new(height, participants, []).expect("valid roster");
        }
    }
}

pub fn random_secret<R: Rng>(rng: &mut R, q: &Modulus, height: u32) -> SecretVector {
    let mut components: Vec<_> = (0..height).map(|_| q.random_element(rng)).collect();
    while components.last().unwrap().is_zero() {
        *components.last_mut().unwrap() = q.random_element(rng);
    }
    SecretVector::new(components, q.random_element(rng)).expect("valid secret")
}

/// A uniformly drawn prime in `[2^63, 2^64)`.
pub fn random_prime_u64<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let candidate = rng.gen::<u64>() | (1 << 63) | 1;
        if is_prime(&BigUint::from(candidate)).unwrap() {
            return candidate;
        }
    }
}

/// `sum c_i x^i mod q` by Horner's rule in `u128`.
pub fn horner(coefficients: &[u64], x: u64, q: u64) -> u64 {
    coefficients
        .iter()
        .rev()
        .fold(0u128, |acc, &c| (acc * x as u128 + c as u128) % q as u128) as u64
}
