//! Share issuance.
//!
//! The dealer fixes `f(x) = a0 + k1 x + ... + kh x^h` over GF(q) and gives a
//! level-`j` participant with login `i` the `j` points `(x_im, f(x_im))` with
//! `x_im = 1 + m i h`, `m = 1..=j`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::exec::Execution;
use crate::field::{random_below, random_bits, FieldElement, FieldError, Modulus};
use crate::orgchart::OrgChart;
use crate::poly::Polynomial;

/// Default bit width of a scalar secret.
pub const DEFAULT_SECRET_BITS: u64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DealError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("a secret needs at least 2 components (got {0})")]
    TooFewComponents(usize),
    #[error("leading coefficient k_h is zero; the polynomial would lose full degree")]
    LeadingCoefficientZero,
    #[error("secret {secret} does not fit in {bits} bits")]
    SecretTooLarge { secret: BigUint, bits: u64 },
    #[error("2^{bits} exceeds the modulus {modulus}")]
    SecretBitsExceedModulus { bits: u64, modulus: BigUint },
    #[error("chart height {chart} differs from polynomial degree {polynomial}")]
    HeightMismatch { chart: u32, polynomial: usize },
    #[error("modulus {modulus} must exceed 1 + h^2 * max_login = {floor}")]
    ModulusFloor { modulus: BigUint, floor: BigUint },
    #[error("{0}")]
    Collision(CoordinateReport),
    #[error("share packet carries no points")]
    EmptyPacket,
}

/// `x_im = 1 + m i h`.
pub fn derive_x(login: u64, index: u32, height: u32) -> BigUint {
    BigUint::one() + BigUint::from(index) * BigUint::from(login) * BigUint::from(height)
}

/// The secret components `k_1..k_h`, the blinding constant `a0`, and their
/// XOR digest `K = k_1 ^ ... ^ k_h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretVector {
    components: Vec<FieldElement>,
    blinding: FieldElement,
    xor_secret: BigUint,
}

impl SecretVector {
    pub fn new(components: Vec<FieldElement>, blinding: FieldElement) -> Result<Self, DealError> {
        if components.len() < 2 {
            return Err(DealError::TooFewComponents(components.len()));
        }
        if components.iter().any(|c| c.modulus() != blinding.modulus()) {
            return Err(FieldError::ModulusMismatch.into());
        }
        if components.last().is_some_and(FieldElement::is_zero) {
            return Err(DealError::LeadingCoefficientZero);
        }
        let xor_secret = xor_all(components.iter().map(FieldElement::value));
        Ok(SecretVector {
            components,
            blinding,
            xor_secret,
        })
    }

    pub fn components(&self) -> &[FieldElement] {
        &self.components
    }

    pub fn blinding(&self) -> &FieldElement {
        &self.blinding
    }

    pub fn xor_secret(&self) -> &BigUint {
        &self.xor_secret
    }

    pub fn height(&self) -> usize {
        self.components.len()
    }

    pub fn modulus(&self) -> &Modulus {
        self.blinding.modulus()
    }
}

pub(crate) fn xor_all<'a>(values: impl Iterator<Item = &'a BigUint>) -> BigUint {
    values.fold(BigUint::zero(), |acc, v| acc ^ v)
}

/// Splits a scalar secret `K < 2^bits` into `height` components whose XOR is `K`.
///
/// `k_1..k_{h-1}` are uniform in `[0, 2^bits)` and `k_h` closes the XOR. When
/// `k_h` comes out zero, `k_{h-1}` is redrawn. The blinding constant `a0` is
/// drawn uniformly from GF(q) afterwards.
pub fn split_secret<R: RngCore + ?Sized>(
    secret: &BigUint,
    height: u32,
    modulus: &Modulus,
    bits: u64,
    rng: &mut R,
) -> Result<SecretVector, DealError> {
    if height < 2 {
        return Err(DealError::TooFewComponents(height as usize));
    }
    if BigUint::one() << bits > *modulus.value() {
        return Err(DealError::SecretBitsExceedModulus {
            bits,
            modulus: modulus.value().clone(),
        });
    }
    if secret.bits() > bits {
        return Err(DealError::SecretTooLarge {
            secret: secret.clone(),
            bits,
        });
    }
    let mut free: Vec<BigUint> = (0..height - 1).map(|_| random_bits(rng, bits)).collect();
    let last = loop {
        let closing = secret ^ xor_all(free.iter());
        if !closing.is_zero() {
            break closing;
        }
        *free.last_mut().expect("height >= 2") = random_bits(rng, bits);
    };
    free.push(last);
    let components = free.into_iter().map(|k| modulus.element(k)).collect();
    let blinding = modulus.element(random_below(rng, modulus.value()));
    SecretVector::new(components, blinding)
}

/// `f(x) = a0 + k1 x + ... + kh x^h` with `kh != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretPolynomial(Polynomial);

impl SecretPolynomial {
    pub fn from_polynomial(poly: Polynomial) -> Result<Self, DealError> {
        let degree = poly.degree_bound();
        if degree < 2 {
            return Err(DealError::TooFewComponents(degree));
        }
        if poly.residues()[degree].is_zero() {
            return Err(DealError::LeadingCoefficientZero);
        }
        Ok(SecretPolynomial(poly))
    }

    pub fn height(&self) -> usize {
        self.0.degree_bound()
    }

    pub fn modulus(&self) -> &Modulus {
        self.0.modulus()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.0
    }

    pub fn evaluate(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        self.0.evaluate(x)
    }
}

/// Coefficients `(a0, k1, ..., kh)`.
pub fn build_polynomial(secret: &SecretVector) -> SecretPolynomial {
    let mut coeffs = Vec::with_capacity(secret.height() + 1);
    coeffs.push(secret.blinding.value().clone());
    coeffs.extend(secret.components.iter().map(|k| k.value().clone()));
    SecretPolynomial(Polynomial::from_residues(secret.modulus().clone(), coeffs))
}

/// Horner evaluation of `f` at `x`.
pub fn evaluate(poly: &SecretPolynomial, x: &FieldElement) -> Result<FieldElement, FieldError> {
    poly.evaluate(x)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharePoint {
    pub x: FieldElement,
    pub y: FieldElement,
}

/// `S_ij`: public login and level plus the private points.
///
/// Packets read back from participants are not trusted; the combiner
/// authenticates them before use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharePacket {
    login: u64,
    level: u32,
    points: Vec<SharePoint>,
}

impl SharePacket {
    pub fn new(login: u64, level: u32, points: Vec<SharePoint>) -> Result<Self, DealError> {
        let Some(first) = points.first() else {
            return Err(DealError::EmptyPacket);
        };
        let modulus = first.x.modulus();
        if points
            .iter()
            .any(|p| p.x.modulus() != modulus || p.y.modulus() != modulus)
        {
            return Err(FieldError::ModulusMismatch.into());
        }
        Ok(SharePacket {
            login,
            level,
            points,
        })
    }

    pub fn login(&self) -> u64 {
        self.login
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn points(&self) -> &[SharePoint] {
        &self.points
    }

    pub fn modulus(&self) -> &Modulus {
        self.points[0].x.modulus()
    }
}

impl fmt::Display for SharePacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{}", self.login, self.level)?;
        for p in &self.points {
            write!(f, ",({},{})", p.x, p.y)?;
        }
        write!(f, ")")
    }
}

/// Participants whose coordinates coincide because `m i = m' i'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub x: BigUint,
    /// `(login, m)` pairs mapping to `x`.
    pub claims: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateReport {
    pub collisions: Vec<Collision>,
}

impl fmt::Display for CoordinateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coordinate collision")?;
        for c in &self.collisions {
            write!(f, "; x = {} claimed by", c.x)?;
            for (login, m) in &c.claims {
                write!(f, " (login {login}, m = {m})")?;
            }
        }
        Ok(())
    }
}

/// Checks that every `m i` (participant `i`, `1 <= m <= j`) is distinct, so the
/// issued abscissae never repeat.
pub fn validate_coordinates(chart: &OrgChart) -> Result<(), CoordinateReport> {
    let mut by_product: BTreeMap<u128, Vec<(u64, u32)>> = BTreeMap::new();
    for p in chart.participants() {
        for m in 1..=p.level {
            by_product
                .entry(m as u128 * p.login as u128)
                .or_default()
                .push((p.login, m));
        }
    }
    let collisions: Vec<Collision> = by_product
        .into_iter()
        .filter(|(_, claims)| claims.len() > 1)
        .map(|(_, claims)| Collision {
            x: derive_x(claims[0].0, claims[0].1, chart.height()),
            claims,
        })
        .collect();
    if collisions.is_empty() {
        Ok(())
    } else {
        Err(CoordinateReport { collisions })
    }
}

/// `1 + h^2 * max_login`; the modulus must be strictly larger.
pub fn modulus_floor(chart: &OrgChart) -> BigUint {
    let h = BigUint::from(chart.height());
    BigUint::one() + &h * &h * BigUint::from(chart.max_login())
}

/// Issues one packet per participant, ordered by login.
pub fn deal(chart: &OrgChart, poly: &SecretPolynomial) -> Result<Vec<SharePacket>, DealError> {
    deal_with(chart, poly, Execution::default())
}

pub fn deal_with(
    chart: &OrgChart,
    poly: &SecretPolynomial,
    execution: Execution,
) -> Result<Vec<SharePacket>, DealError> {
    if poly.height() != chart.height() as usize {
        return Err(DealError::HeightMismatch {
            chart: chart.height(),
            polynomial: poly.height(),
        });
    }
    let modulus = poly.modulus();
    let floor = modulus_floor(chart);
    if *modulus.value() <= floor {
        return Err(DealError::ModulusFloor {
            modulus: modulus.value().clone(),
            floor,
        });
    }
    validate_coordinates(chart).map_err(DealError::Collision)?;

    let height = chart.height();
    Ok(execution.map(chart.participants(), |p| {
        let points = (1..=p.level)
            .map(|m| {
                let x = modulus.element(derive_x(p.login, m, height));
                let y = modulus.element(poly.polynomial().evaluate_raw(x.value()));
                SharePoint { x, y }
            })
            .collect();
        SharePacket {
            login: p.login,
            level: p.level,
            points,
        }
    }))
}
