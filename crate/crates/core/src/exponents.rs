//! Derived exponents of the superquadratic problem.
//!
//! Everything here is a closed-form function of the gradient exponent
//! `gamma > 2` and the space dimension `N`.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    gamma: f64,
    dim: usize,
}

impl Exponents {
    pub fn new(gamma: f64, dim: usize) -> Result<Self> {
        if !(gamma > 2.0) || !gamma.is_finite() {
            return Err(LabError::InvalidParameter(format!(
                "gamma must exceed 2 (got {gamma})"
            )));
        }
        if dim == 0 {
            return Err(LabError::InvalidParameter(
                "dimension must be positive".into(),
            ));
        }
        Ok(Self { gamma, dim })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Conjugate exponent `gamma / (gamma - 1)`, always in `(1, 2)`.
    pub fn gamma_prime(&self) -> f64 {
        self.gamma / (self.gamma - 1.0)
    }

    /// Critical integrability `(N + 2) / gamma'`.
    pub fn q0(&self) -> f64 {
        (self.dim as f64 + 2.0) / self.gamma_prime()
    }

    /// Conjugate of `q0`.
    pub fn q0_conj(&self) -> f64 {
        let q0 = self.q0();
        q0 / (q0 - 1.0)
    }

    /// Intrinsic Hölder exponent `(gamma - 2) / (gamma - 1)`.
    pub fn alpha0(&self) -> f64 {
        (self.gamma - 2.0) / (self.gamma - 1.0)
    }

    /// Hölder exponent paired with integrability `q`: `2 - (N + 2) / q`.
    pub fn alpha_for(&self, q: f64) -> f64 {
        2.0 - (self.dim as f64 + 2.0) / q
    }

    /// Power of the diffusion factor in the scaled `L^{q0}` smallness
    /// condition: `gamma' (N + 1) / (N + 2)`.
    pub fn sigma_power(&self) -> f64 {
        self.gamma_prime() * (self.dim as f64 + 1.0) / (self.dim as f64 + 2.0)
    }

    /// Lagrangian coefficient `h (gamma - 1) / (h gamma)^{gamma'}`, so that
    /// `h |p|^gamma = sup_q { p.q - l |q|^{gamma'} }`.
    pub fn lagrangian_coeff(&self, h: f64) -> f64 {
        h * (self.gamma - 1.0) / (h * self.gamma).powf(self.gamma_prime())
    }

    /// Time exponent produced by Young's inequality, `alpha / (gamma - alpha (gamma - 1))`.
    pub fn young_exponent(&self, alpha: f64) -> f64 {
        alpha / (self.gamma - alpha * (self.gamma - 1.0))
    }

    /// Power of the amplitude in the case-(b) time quotient after
    /// substituting the blow-up length: `2 / gamma + alpha (gamma - 1) / gamma`.
    /// Equal to one exactly when `alpha = alpha0`.
    pub fn case_b_amplitude_power(&self, alpha: f64) -> f64 {
        2.0 / self.gamma + alpha * (self.gamma - 1.0) / self.gamma
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_three_in_one_dimension() {
        let e = Exponents::new(3.0, 1).unwrap();
        assert_eq!(e.gamma_prime(), 1.5);
        assert_eq!(e.q0(), 2.0);
        assert_eq!(e.alpha0(), 0.5);
        assert_eq!(e.q0_conj(), 2.0);
    }

    #[test]
    fn lagrangian_coefficient_gamma_four() {
        let e = Exponents::new(4.0, 1).unwrap();
        let l = e.lagrangian_coeff(1.0);
        assert!((l - 3.0 / 4f64.powf(4.0 / 3.0)).abs() < 1e-15);
        assert!((l - 0.47247).abs() < 1e-5);
    }

    #[test]
    fn rejects_quadratic_growth() {
        let err = Exponents::new(2.0, 1).unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 2"));
    }

    #[test]
    fn interpolation_alpha_from_q() {
        let e = Exponents::new(3.0, 1).unwrap();
        assert!((e.alpha_for(2.5) - 0.8).abs() < 1e-15);
        assert_eq!(e.alpha_for(3.0), 1.0);
    }
}
