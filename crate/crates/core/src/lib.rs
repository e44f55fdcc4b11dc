//! Hierarchical secret sharing over prime fields.
//!
//! Participants of an organisation chart hold as many polynomial points as
//! their level; coalitions whose levels add up to more than the chart height,
//! without over-representing any single level, rebuild the dealer's
//! polynomial by Lagrange interpolation and read the secret off its
//! coefficients.
//!
//! ```
//! use hsss::dealer::{build_polynomial, deal, SecretVector};
//! use hsss::combiner::{reconstruct, Outcome, SubmissionBundle};
//! use hsss::field::Modulus;
//! use hsss::orgchart::{OrgChart, Participant};
//!
//! let q = Modulus::from_u64(1_000_003).unwrap();
//! let chart = OrgChart::new(
//!     2,
//!     [Participant::new(1, 2), Participant::new(3, 1), Participant::new(5, 1)],
//!     [],
//! )
//! .unwrap();
//! let secret = SecretVector::new(vec![q.element(5u32), q.element(9u32)], q.element(77u32)).unwrap();
//! let shares = deal(&chart, &build_polynomial(&secret)).unwrap();
//!
//! let bundle = SubmissionBundle::new(shares[..2].to_vec()).unwrap();
//! let report = reconstruct(&bundle, &chart, &q);
//! assert_eq!(report.outcome, Outcome::Recovered);
//! assert_eq!(report.secret.as_ref(), Some(secret.xor_secret()));
//! ```

pub mod cli;
pub mod combiner;
pub mod dealer;
pub mod exec;
pub mod field;
pub mod io;
pub mod orgchart;
pub mod poly;

#[cfg(test)]
mod testing;

pub use exec::Execution;
