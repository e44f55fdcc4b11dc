//! Share authentication and secret reconstruction.
//!
//! [`reconstruct`] runs the stages in order and stops at the first failure:
//!
//! 1. every packet is authenticated against the roster (conditions (iii) and
//!    (iv)); forged levels would otherwise corrupt the qualification test;
//! 2. the claimed coalition must be qualified;
//! 3. points are pooled, the degree-`h` polynomial is interpolated, and any
//!    surplus points are checked against it;
//! 4. the secret is the XOR of the recovered `k_1..k_h`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::dealer::{xor_all, SharePacket, SharePoint};
use crate::exec::Execution;
use crate::field::{FieldError, Modulus};
use crate::orgchart::{Coalition, OrgChart, Qualification};
use crate::poly::Polynomial;

/// A failed authenticity check on one packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Condition (iii): the login is not on the roster.
    UnknownLogin { login: u64 },
    /// Condition (iii): the roster places the login at a different level.
    LevelMismatch {
        login: u64,
        claimed: u32,
        actual: u32,
    },
    /// Condition (iv): `x = 1 (mod i h)` and `floor(x / (i h)) <= j` must both hold.
    Coordinate {
        /// 1-based position of the pair inside the packet.
        index: usize,
        x: BigUint,
        divisor: BigUint,
        residue: BigUint,
        quotient: BigUint,
        level: u32,
    },
    /// The packet was issued under another modulus.
    ModulusMismatch,
}

impl Violation {
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::UnknownLogin { .. } | Violation::LevelMismatch { .. } => "iii",
            Violation::Coordinate { .. } => "iv",
            Violation::ModulusMismatch => "modulus",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownLogin { login } => {
                write!(f, "condition (iii): login {login} is not on the roster")
            }
            Violation::LevelMismatch {
                login,
                claimed,
                actual,
            } => write!(
                f,
                "condition (iii): login {login} claims level {claimed} but sits at level {actual}"
            ),
            Violation::Coordinate {
                index,
                x,
                divisor,
                residue,
                quotient,
                level,
            } => {
                let congruent = residue.is_one();
                let bounded = quotient <= &BigUint::from(*level);
                write!(f, "condition (iv), pair {index}: ")?;
                match (congruent, bounded) {
                    (true, _) => write!(
                        f,
                        "x = {x} = 1 (mod {divisor}) but floor(x/{divisor}) = {quotient} > {level}"
                    ),
                    (false, true) => write!(
                        f,
                        "floor(x/{divisor}) = {quotient} <= {level} but x = {x} != 1 (mod {divisor})"
                    ),
                    (false, false) => write!(
                        f,
                        "x = {x} != 1 (mod {divisor}) and floor(x/{divisor}) = {quotient} > {level}"
                    ),
                }
            }
            Violation::ModulusMismatch => write!(f, "packet was issued under a different modulus"),
        }
    }
}

/// Per-packet authentication result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketVerdict {
    pub login: u64,
    pub level: u32,
    pub violations: Vec<Violation>,
}

impl PacketVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks conditions (iii) and (iv) for one packet against the roster.
pub fn authenticate_packet(packet: &SharePacket, chart: &OrgChart) -> PacketVerdict {
    let (login, level) = (packet.login(), packet.level());
    let mut violations = Vec::new();
    match chart.participant(login) {
        None => violations.push(Violation::UnknownLogin { login }),
        Some(p) if p.level != level => violations.push(Violation::LevelMismatch {
            login,
            claimed: level,
            actual: p.level,
        }),
        Some(_) => {}
    }
    let divisor = BigUint::from(login) * BigUint::from(chart.height());
    let bound = BigUint::from(level);
    for (i, point) in packet.points().iter().enumerate() {
        let x = point.x.value();
        let (quotient, residue) = if divisor.is_zero() {
            (BigUint::zero(), x.clone())
        } else {
            (x / &divisor, x % &divisor)
        };
        // A login of 0 is never on the roster; treat every x as non-congruent.
        if !residue.is_one() || quotient > bound {
            violations.push(Violation::Coordinate {
                index: i + 1,
                x: x.clone(),
                divisor: divisor.clone(),
                residue,
                quotient,
                level,
            });
        }
    }
    PacketVerdict {
        login,
        level,
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("no shares submitted")]
    Empty,
    #[error("login {0} submitted two different packets")]
    ConflictingPackets(u64),
}

/// Packets submitted by a claimed coalition, one per login.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmissionBundle {
    packets: Vec<SharePacket>,
}

impl SubmissionBundle {
    /// Identical resubmissions collapse; differing packets under one login are refused.
    pub fn new(packets: impl IntoIterator<Item = SharePacket>) -> Result<Self, BundleError> {
        let mut by_login: BTreeMap<u64, SharePacket> = BTreeMap::new();
        for p in packets {
            match by_login.get(&p.login()) {
                Some(existing) if existing != &p => {
                    return Err(BundleError::ConflictingPackets(p.login()))
                }
                Some(_) => {}
                None => {
                    by_login.insert(p.login(), p);
                }
            }
        }
        if by_login.is_empty() {
            return Err(BundleError::Empty);
        }
        Ok(SubmissionBundle {
            packets: by_login.into_values().collect(),
        })
    }

    /// Packets ordered by login.
    pub fn packets(&self) -> &[SharePacket] {
        &self.packets
    }

    pub fn logins(&self) -> Vec<u64> {
        self.packets.iter().map(SharePacket::login).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Inconsistency {
    #[error("abscissa {x} carries two different values")]
    Contradiction { x: BigUint },
    #[error("abscissa {x} was submitted by logins {first} and {second}")]
    SharedAbscissa { x: BigUint, first: u64, second: u64 },
}

/// Pools the points of every packet, sorted by abscissa.
///
/// A pair repeated inside one packet is kept once. The same abscissa coming
/// from two logins, or with two different ordinates, is an inconsistency.
pub fn collect_points(bundle: &SubmissionBundle) -> Result<Vec<SharePoint>, Inconsistency> {
    let mut pooled: BTreeMap<&BigUint, (u64, &SharePoint)> = BTreeMap::new();
    for packet in bundle.packets() {
        for point in packet.points() {
            match pooled.get(point.x.value()) {
                None => {
                    pooled.insert(point.x.value(), (packet.login(), point));
                }
                Some((_, seen)) if seen.y != point.y => {
                    return Err(Inconsistency::Contradiction {
                        x: point.x.value().clone(),
                    })
                }
                Some((owner, _)) if *owner != packet.login() => {
                    return Err(Inconsistency::SharedAbscissa {
                        x: point.x.value().clone(),
                        first: *owner,
                        second: packet.login(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    Ok(pooled.into_values().map(|(_, p)| p.clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpolationError {
    #[error("{got} distinct abscissae supplied; {needed} required")]
    TooFewPoints { needed: usize, got: usize },
    #[error("abscissa {x} appears twice")]
    DuplicateAbscissa { x: BigUint },
    #[error("surplus point at x = {x} does not lie on the interpolated polynomial")]
    Inconsistent { x: BigUint },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Recovers the unique polynomial of degree at most `degree` through the
/// `degree + 1` points with the smallest abscissae, then requires every
/// remaining point to lie on it.
///
/// Coefficients come from expanding the Lagrange basis: the numerator of
/// `l_i` is `M(x) / (x - x_i)` with `M(x) = prod (x - x_k)`, obtained by
/// synthetic division, and is scaled by `y_i / prod_{k != i} (x_i - x_k)`.
pub fn interpolate(
    points: &[SharePoint],
    degree: usize,
    modulus: &Modulus,
) -> Result<Polynomial, InterpolationError> {
    if points
        .iter()
        .any(|p| p.x.modulus() != modulus || p.y.modulus() != modulus)
    {
        return Err(FieldError::ModulusMismatch.into());
    }
    let mut sorted: Vec<&SharePoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.x.value().cmp(b.x.value()));
    for pair in sorted.windows(2) {
        if pair[0].x == pair[1].x {
            return Err(InterpolationError::DuplicateAbscissa {
                x: pair[0].x.value().clone(),
            });
        }
    }
    let needed = degree + 1;
    if sorted.len() < needed {
        return Err(InterpolationError::TooFewPoints {
            needed,
            got: sorted.len(),
        });
    }
    let (basis, surplus) = sorted.split_at(needed);
    let xs: Vec<&BigUint> = basis.iter().map(|p| p.x.value()).collect();

    // M(x) = prod (x - x_k), ascending coefficients, degree `needed`.
    let mut master = vec![BigUint::zero(); needed + 1];
    master[0] = BigUint::one();
    for (k, x_k) in xs.iter().enumerate() {
        for d in (0..=k + 1).rev() {
            let shifted = if d > 0 {
                master[d - 1].clone()
            } else {
                BigUint::zero()
            };
            let scaled = modulus.mul_raw(&master[d], x_k);
            master[d] = modulus.sub_raw(&shifted, &scaled);
        }
    }

    let mut coeffs = vec![BigUint::zero(); needed];
    let mut numerator = vec![BigUint::zero(); needed];
    for (i, point) in basis.iter().enumerate() {
        let x_i = xs[i];
        // Synthetic division of M by (x - x_i).
        numerator[needed - 1] = master[needed].clone();
        for d in (0..needed - 1).rev() {
            numerator[d] =
                modulus.add_raw(&master[d + 1], &modulus.mul_raw(x_i, &numerator[d + 1]));
        }
        let denominator = xs
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .fold(BigUint::one(), |acc, (_, x_k)| {
                modulus.mul_raw(&acc, &modulus.sub_raw(x_i, x_k))
            });
        let scale = modulus.mul_raw(point.y.value(), &modulus.inv_raw(&denominator)?);
        for (c, n) in coeffs.iter_mut().zip(&numerator) {
            *c = modulus.add_raw(c, &modulus.mul_raw(&scale, n));
        }
    }

    let poly = Polynomial::from_residues(modulus.clone(), coeffs);
    for extra in surplus {
        if &poly.evaluate_raw(extra.x.value()) != extra.y.value() {
            return Err(InterpolationError::Inconsistent {
                x: extra.x.value().clone(),
            });
        }
    }
    Ok(poly)
}

/// `K = k_1 ^ ... ^ k_h`; the constant term is excluded.
pub fn recover_secret(poly: &Polynomial) -> BigUint {
    xor_all(poly.residues().iter().skip(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Recovered,
    DeniedUnqualified,
    DeniedAuthentication,
    DeniedInconsistent,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Recovered => "recovered",
            Outcome::DeniedUnqualified => "denied-unqualified",
            Outcome::DeniedAuthentication => "denied-authentication",
            Outcome::DeniedInconsistent => "denied-inconsistent",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructionReport {
    pub outcome: Outcome,
    /// Present iff the outcome is [`Outcome::Recovered`].
    pub secret: Option<BigUint>,
    /// `(a0, k_1, ..., k_h)`, present iff recovered.
    pub coefficients: Option<Vec<BigUint>>,
    /// One verdict per submitted packet, ordered by login.
    pub diagnostics: Vec<PacketVerdict>,
    pub detail: String,
}

impl ReconstructionReport {
    fn denied(outcome: Outcome, diagnostics: Vec<PacketVerdict>, detail: String) -> Self {
        ReconstructionReport {
            outcome,
            secret: None,
            coefficients: None,
            diagnostics,
            detail,
        }
    }
}

pub fn reconstruct(
    bundle: &SubmissionBundle,
    chart: &OrgChart,
    modulus: &Modulus,
) -> ReconstructionReport {
    reconstruct_with(bundle, chart, modulus, Execution::default())
}

pub fn reconstruct_with(
    bundle: &SubmissionBundle,
    chart: &OrgChart,
    modulus: &Modulus,
    execution: Execution,
) -> ReconstructionReport {
    let diagnostics = execution.map(bundle.packets(), |packet| {
        let mut verdict = authenticate_packet(packet, chart);
        if packet.modulus() != modulus {
            verdict.violations.push(Violation::ModulusMismatch);
        }
        verdict
    });
    let failed: Vec<String> = diagnostics
        .iter()
        .filter(|v| !v.passed())
        .map(|v| v.login.to_string())
        .collect();
    if !failed.is_empty() {
        return ReconstructionReport::denied(
            Outcome::DeniedAuthentication,
            diagnostics,
            format!(
                "attack attempt: authentication failed for login(s) {}",
                failed.join(", ")
            ),
        );
    }

    let coalition =
        Coalition::new(chart, bundle.logins()).expect("authenticated logins are on the roster");
    let qualification = chart.qualification(&coalition);
    if qualification != Qualification::Qualified {
        return ReconstructionReport::denied(
            Outcome::DeniedUnqualified,
            diagnostics,
            format!("the subset is not qualified: {qualification}"),
        );
    }

    let points = match collect_points(bundle) {
        Ok(points) => points,
        Err(e) => {
            return ReconstructionReport::denied(
                Outcome::DeniedInconsistent,
                diagnostics,
                e.to_string(),
            )
        }
    };
    match interpolate(&points, chart.height() as usize, modulus) {
        Ok(poly) => ReconstructionReport {
            outcome: Outcome::Recovered,
            secret: Some(recover_secret(&poly)),
            coefficients: Some(poly.residues().to_vec()),
            diagnostics,
            detail: format!("interpolated from {} points", points.len()),
        },
        Err(e) => {
            ReconstructionReport::denied(Outcome::DeniedInconsistent, diagnostics, e.to_string())
        }
    }
}

/// Reconstructs many bundles independently; results keep input order.
pub fn reconstruct_batch(
    bundles: &[SubmissionBundle],
    chart: &OrgChart,
    modulus: &Modulus,
    execution: Execution,
) -> Vec<ReconstructionReport> {
    execution.map(bundles, |b| {
        reconstruct_with(b, chart, modulus, Execution::Sequential)
    })
}

/// Outsider search space `q^(h+1)`: every coefficient of `f` is unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceCost {
    pub combinations: BigUint,
    pub bits: u64,
}

pub fn bruteforce_cost(height: u32, modulus: &Modulus) -> BruteForceCost {
    let combinations = num_traits::pow(modulus.value().clone(), height as usize + 1);
    BruteForceCost {
        bits: combinations.bits(),
        combinations,
    }
}
