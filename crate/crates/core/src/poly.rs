//! Dense univariate polynomials over GF(q), coefficients in ascending degree.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::field::{FieldElement, FieldError, Modulus};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    modulus: Modulus,
    coeffs: Vec<BigUint>,
}

impl Polynomial {
    /// Coefficients `c_0, c_1, ...` with `c_i` multiplying `x^i`.
    pub fn new(coefficients: &[FieldElement]) -> Result<Self, FieldError> {
        let modulus = coefficients
            .first()
            .map(|c| c.modulus().clone())
            .ok_or(FieldError::ModulusMismatch)?;
        if coefficients.iter().any(|c| c.modulus() != &modulus) {
            return Err(FieldError::ModulusMismatch);
        }
        Ok(Polynomial {
            coeffs: coefficients.iter().map(|c| c.value().clone()).collect(),
            modulus,
        })
    }

    /// Residues must already lie in `[0, q)`.
    pub(crate) fn from_residues(modulus: Modulus, coeffs: Vec<BigUint>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c < modulus.value()));
        Polynomial { modulus, coeffs }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Number of stored coefficients minus one; trailing zeros are kept.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coefficient(&self, index: usize) -> Option<FieldElement> {
        self.coeffs
            .get(index)
            .map(|c| self.modulus.element(c.clone()))
    }

    pub fn coefficients(&self) -> Vec<FieldElement> {
        self.coeffs
            .iter()
            .map(|c| self.modulus.element(c.clone()))
            .collect()
    }

    /// Horner evaluation: one multiplication per coefficient above the constant.
    pub fn evaluate(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if x.modulus() != &self.modulus {
            return Err(FieldError::ModulusMismatch);
        }
        Ok(self.modulus.element(self.evaluate_raw(x.value())))
    }

    pub(crate) fn evaluate_raw(&self, x: &BigUint) -> BigUint {
        self.coeffs.iter().rev().fold(BigUint::zero(), |acc, c| {
            self.modulus.add_raw(&self.modulus.mul_raw(&acc, x), c)
        })
    }
}
