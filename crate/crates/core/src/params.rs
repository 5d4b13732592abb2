//! Physical parameters and the characteristic scales used to remove units.

use crate::error::{invalid, Result};

/// Which constitutive relation closes the equation of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `eps = h(T) - gamma * T_t`
    StressRate,
    /// `eps + nu * eps_t = g(T)`
    StrainRate,
    /// `eps = h(T)`
    Elastic,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::StressRate => "stress_rate",
            Variant::StrainRate => "strain_rate",
            Variant::Elastic => "elastic",
        }
    }
}

/// Dimensional model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Density.
    pub rho: f64,
    /// Stress scale.
    pub mu: f64,
    /// Characteristic length.
    pub length_scale: f64,
    /// Strain-rate coefficient (units of time).
    pub nu: f64,
    /// Stress-rate coefficient (time per unit stress).
    pub gamma: f64,
    pub variant: Variant,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rho", self.rho),
            ("mu", self.mu),
            ("length_scale", self.length_scale),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(
                    name,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid(
                "gamma",
                format!(
                    "must be >= 0 (the dissipation gamma * T_t^2 >= 0 holds for every stress history iff gamma >= 0), got {}",
                    self.gamma
                ),
            ));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return Err(invalid("nu", format!("must be >= 0, got {}", self.nu)));
        }
        match self.variant {
            Variant::StressRate if self.gamma <= 0.0 => Err(invalid(
                "gamma",
                "the stress_rate variant requires gamma > 0",
            )),
            Variant::StrainRate if self.nu <= 0.0 => {
                Err(invalid("nu", "the strain_rate variant requires nu > 0"))
            }
            Variant::Elastic if self.gamma != 0.0 || self.nu != 0.0 => Err(invalid(
                "variant",
                format!(
                    "elastic requires gamma = nu = 0, got gamma = {}, nu = {}",
                    self.gamma, self.nu
                ),
            )),
            _ => Ok(()),
        }
    }
}

/// Characteristic scales: `x = L x'`, `t = L sqrt(rho/mu) t'`, `T = mu T'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondimScales {
    pub x_scale: f64,
    pub t_scale: f64,
    pub stress_scale: f64,
    pub nu_bar: f64,
    pub gamma_bar: f64,
}

impl NondimScales {
    /// Wave speed `sqrt(mu/rho)`, the velocity scale.
    pub fn velocity_scale(&self) -> f64 {
        self.x_scale / self.t_scale
    }

    pub fn nu(&self) -> f64 {
        self.nu_bar * self.t_scale
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_bar * self.t_scale / self.stress_scale
    }

    /// Density recovered from `t_scale = L sqrt(rho/mu)`.
    pub fn rho(&self) -> f64 {
        let ratio = self.t_scale / self.x_scale;
        ratio * ratio * self.stress_scale
    }
}

pub fn nondimensionalize(params: &ModelParams) -> Result<NondimScales> {
    params.validate()?;
    let ModelParams {
        rho,
        mu,
        length_scale: l,
        nu,
        gamma,
        ..
    } = *params;
    let speed = (mu / rho).sqrt();
    Ok(NondimScales {
        x_scale: l,
        t_scale: l / speed,
        stress_scale: mu,
        nu_bar: nu / l * speed,
        gamma_bar: gamma * mu / l * speed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(rho: f64, mu: f64, l: f64, nu: f64, gamma: f64) -> ModelParams {
        ModelParams {
            rho,
            mu,
            length_scale: l,
            nu,
            gamma,
            variant: Variant::StressRate,
        }
    }

    #[test]
    fn identity_scales() {
        let s = nondimensionalize(&params(1.0, 1.0, 1.0, 0.3, 0.7)).unwrap();
        assert_eq!(s.nu_bar, 0.3);
        assert_eq!(s.gamma_bar, 0.7);
        assert_eq!(s.t_scale, 1.0);
    }

    #[test]
    fn scaled_example() {
        let s = nondimensionalize(&params(1.0, 4.0, 2.0, 0.5, 0.25)).unwrap();
        assert!((s.nu_bar - 0.5).abs() < 1e-15);
        assert!((s.gamma_bar - 1.0).abs() < 1e-15);
        assert_eq!(s.x_scale, 2.0);
        assert!((s.t_scale - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_scale_rejected() {
        assert!(nondimensionalize(&params(1.0, 1.0, 0.0, 0.3, 0.7)).is_err());
        assert!(nondimensionalize(&params(-1.0, 1.0, 1.0, 0.3, 0.7)).is_err());
    }

    #[test]
    fn variant_requirements() {
        let mut p = params(1.0, 1.0, 1.0, 0.0, 0.0);
        assert!(p.validate().is_err());
        p.variant = Variant::Elastic;
        assert!(p.validate().is_ok());
        p.nu = 0.1;
        assert!(p.validate().is_err());
        p.variant = Variant::StrainRate;
        assert!(p.validate().is_ok());
        p.gamma = -0.1;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn resubstitution_recovers_dimensional_values() {
        let cases = [
            (1.0, 1.0, 1.0, 0.3, 0.7),
            (7800.0, 2.1e11, 0.05, 1e-4, 3e-12),
            (0.37, 19.0, 4.2, 2.5, 0.011),
        ];
        for (rho, mu, l, nu, gamma) in cases {
            let s = nondimensionalize(&params(rho, mu, l, nu, gamma)).unwrap();
            for (got, want) in [(s.rho(), rho), (s.nu(), nu), (s.gamma(), gamma)] {
                assert!(((got - want) / want).abs() < 1e-14, "{got} vs {want}");
            }
        }
    }
}
