//! Ideal-gas thermodynamics.
//!
//! Pressure law `p = rho * theta` with the gas constant normalised to one
//! and a constant specific heat at constant volume `c_v`, so the adiabatic
//! exponent is `gamma = (c_v + 1) / c_v`. Specific entropy is
//! `s(rho, theta) = c_v ln(theta) - ln(rho)`, and along an isentrope `S`
//! temperature and pressure close as
//! `theta = e^{S/c_v} rho^{1/c_v}` and `p = e^{S/c_v} rho^gamma`.

use serde::{Deserialize, Serialize};

/// Invalid thermodynamic input or state.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GasError {
    #[error("heat capacity c_v must be positive and finite, got {0}")]
    InvalidHeatCapacity(f64),
    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("internal energy must be positive, got {0}")]
    NonPositiveInternalEnergy(f64),
    #[error("{quantity} = {value} exceeds admissible bound {bound}")]
    OutOfBounds {
        quantity: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("{0} must be finite")]
    NonFinite(&'static str),
}

/// Gas parameters: the heat capacity and the adiabatic exponent derived
/// from it at construction. `gamma` is cached, never set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GasParams {
    c_v: f64,
    gamma: f64,
}

impl GasParams {
    pub fn new(c_v: f64) -> Result<Self, GasError> {
        if !c_v.is_finite() || c_v <= 0.0 {
            return Err(GasError::InvalidHeatCapacity(c_v));
        }
        Ok(GasParams {
            c_v,
            gamma: (c_v + 1.0) / c_v,
        })
    }

    /// Monatomic gas, `c_v = 3/2` (`gamma = 5/3`). The default everywhere.
    pub fn monatomic() -> Self {
        Self::new(1.5).expect("3/2 is a valid heat capacity")
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Thermal pressure `p = rho * theta`.
    pub fn pressure(&self, rho: f64, theta: f64) -> Result<f64, GasError> {
        check_state(rho, theta)?;
        Ok(rho * theta)
    }

    /// Specific entropy `s = c_v ln(theta) - ln(rho)`.
    ///
    /// Evaluated in log form rather than as `ln(theta^{c_v} / rho)` so large
    /// `c_v` or extreme temperatures cannot overflow the intermediate power.
    pub fn entropy(&self, rho: f64, theta: f64) -> Result<f64, GasError> {
        check_state(rho, theta)?;
        Ok(self.c_v * theta.ln() - rho.ln())
    }

    /// Temperature on the isentrope `s`: `theta = e^{s/c_v} rho^{1/c_v}`.
    pub fn temperature_from_entropy(&self, rho: f64, s: f64) -> Result<f64, GasError> {
        check_density(rho)?;
        check_finite(s, "entropy")?;
        Ok((s / self.c_v).exp() * rho.powf(1.0 / self.c_v))
    }

    /// Pressure on the isentrope `s`: `p = e^{s/c_v} rho^gamma`.
    pub fn isentropic_pressure(&self, rho: f64, s: f64) -> Result<f64, GasError> {
        check_density(rho)?;
        check_finite(s, "entropy")?;
        Ok((s / self.c_v).exp() * rho.powf(self.gamma))
    }

    /// Isentropic sound speed, `c^2 = d p / d rho` at constant entropy:
    /// `c = sqrt(gamma e^{s/c_v} rho^{gamma - 1})`.
    pub fn sound_speed(&self, rho: f64, s: f64) -> Result<f64, GasError> {
        check_density(rho)?;
        check_finite(s, "entropy")?;
        Ok((self.gamma * (s / self.c_v).exp() * rho.powf(self.gamma - 1.0)).sqrt())
    }

    pub fn prim_to_cons(&self, p: &Primitive) -> Result<Conserved, GasError> {
        check_state(p.rho, p.theta)?;
        let kinetic = 0.5 * p.rho * (p.u1 * p.u1 + p.u2 * p.u2);
        Ok(Conserved {
            rho: p.rho,
            m1: p.rho * p.u1,
            m2: p.rho * p.u2,
            e_tot: kinetic + self.c_v * p.rho * p.theta,
        })
    }

    pub fn cons_to_prim(&self, c: &Conserved) -> Result<Primitive, GasError> {
        check_density(c.rho)?;
        let u1 = c.m1 / c.rho;
        let u2 = c.m2 / c.rho;
        let e_int = c.e_tot - 0.5 * c.rho * (u1 * u1 + u2 * u2);
        if !e_int.is_finite() || e_int <= 0.0 {
            return Err(GasError::NonPositiveInternalEnergy(e_int));
        }
        Ok(Primitive {
            rho: c.rho,
            theta: e_int / (self.c_v * c.rho),
            u1,
            u2,
        })
    }

    /// Positivity plus the explicit ceilings in `bounds`.
    pub fn validate_admissible(
        &self,
        p: &Primitive,
        bounds: &AdmissibilityBounds,
    ) -> Result<(), GasError> {
        check_state(p.rho, p.theta)?;
        if !(p.u1.is_finite() && p.u2.is_finite()) {
            return Err(GasError::NonFinite("velocity"));
        }
        let checks = [
            ("density", p.rho, bounds.rho_max),
            ("temperature", p.theta, bounds.theta_max),
            (
                "speed",
                (p.u1 * p.u1 + p.u2 * p.u2).sqrt(),
                bounds.speed_max,
            ),
            (
                "entropy magnitude",
                self.entropy(p.rho, p.theta)?.abs(),
                bounds.entropy_abs_max,
            ),
        ];
        for (quantity, value, bound) in checks {
            if value > bound {
                return Err(GasError::OutOfBounds {
                    quantity,
                    value,
                    bound,
                });
            }
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for GasParams {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            c_v: f64,
            // Accepted on input so a serialised GasParams round-trips, but
            // always recomputed from c_v.
            #[serde(default)]
            #[allow(dead_code)]
            gamma: Option<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        GasParams::new(raw.c_v).map_err(serde::de::Error::custom)
    }
}

/// Primitive state `(rho, theta, u1, u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub theta: f64,
    pub u1: f64,
    pub u2: f64,
}

/// Conserved state `(rho, m1, m2, e_tot)` with
/// `e_tot = rho |u|^2 / 2 + c_v rho theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
    pub e_tot: f64,
}

impl Conserved {
    pub fn as_array(&self) -> [f64; 4] {
        [self.rho, self.m1, self.m2, self.e_tot]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Conserved {
            rho: a[0],
            m1: a[1],
            m2: a[2],
            e_tot: a[3],
        }
    }
}

/// Ceilings for [`GasParams::validate_admissible`]. Positivity of density
/// and temperature is always enforced; these add problem-scaled upper
/// bounds so a blown-up run fails loudly instead of drifting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityBounds {
    pub rho_max: f64,
    pub theta_max: f64,
    pub speed_max: f64,
    pub entropy_abs_max: f64,
}

impl AdmissibilityBounds {
    /// Generous bounds derived from a pair of 1-D end states: ten times the
    /// extremum of each quantity, with a floor of ten so zero-velocity or
    /// zero-entropy data do not produce degenerate bounds.
    pub fn from_end_states(
        left: (f64, f64, f64),
        right: (f64, f64, f64),
        gas: &GasParams,
    ) -> Result<Self, GasError> {
        let (rho_l, theta_l, u_l) = left;
        let (rho_r, theta_r, u_r) = right;
        let s_l = gas.entropy(rho_l, theta_l)?;
        let s_r = gas.entropy(rho_r, theta_r)?;
        let big = |a: f64, b: f64| 10.0 * a.abs().max(b.abs()).max(1.0);
        Ok(AdmissibilityBounds {
            rho_max: big(rho_l, rho_r),
            theta_max: big(theta_l, theta_r),
            speed_max: big(u_l, u_r),
            entropy_abs_max: big(s_l, s_r),
        })
    }
}

fn check_density(rho: f64) -> Result<(), GasError> {
    if !rho.is_finite() {
        return Err(GasError::NonFinite("density"));
    }
    if rho <= 0.0 {
        return Err(GasError::NonPositiveDensity(rho));
    }
    Ok(())
}

fn check_state(rho: f64, theta: f64) -> Result<(), GasError> {
    check_density(rho)?;
    if !theta.is_finite() {
        return Err(GasError::NonFinite("temperature"));
    }
    if theta <= 0.0 {
        return Err(GasError::NonPositiveTemperature(theta));
    }
    Ok(())
}

fn check_finite(x: f64, what: &'static str) -> Result<(), GasError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(GasError::NonFinite(what))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mono() -> GasParams {
        GasParams::monatomic()
    }

    #[test]
    fn gamma_is_derived_from_c_v() {
        assert_eq!(mono().gamma(), 5.0 / 3.0);
        let g = GasParams::new(2.5).unwrap();
        assert_relative_eq!(g.gamma(), 1.4, max_relative = 1e-15);
        assert!(GasParams::new(0.0).is_err());
        assert!(GasParams::new(-1.0).is_err());
        assert!(GasParams::new(f64::NAN).is_err());
    }

    #[test]
    fn pressure_examples() {
        let g = mono();
        assert_eq!(g.pressure(2.0, 3.0).unwrap(), 6.0);
        assert!(matches!(
            g.pressure(1.0, -1.0),
            Err(GasError::NonPositiveTemperature(_))
        ));
        assert!(matches!(
            g.pressure(0.0, 1.0),
            Err(GasError::NonPositiveDensity(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let g = mono();
        assert_eq!(g.entropy(1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            g.entropy(2.0, 1.0).unwrap(),
            -std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        // Independent of c_v at theta = 1.
        let g2 = GasParams::new(7.3).unwrap();
        assert_eq!(g2.entropy(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn temperature_from_entropy_examples() {
        let g = mono();
        assert_eq!(g.temperature_from_entropy(1.0, 0.0).unwrap(), 1.0);
        // theta(8, 0) = 8^{2/3} = 4 for c_v = 3/2.
        assert_relative_eq!(
            g.temperature_from_entropy(8.0, 0.0).unwrap(),
            4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn isentropic_pressure_example() {
        let g = mono();
        // 4^{5/3}
        assert_relative_eq!(
            g.isentropic_pressure(4.0, 0.0).unwrap(),
            10.079368399158985,
            max_relative = 1e-14
        );
    }

    #[test]
    fn sound_speed_example() {
        let g = mono();
        assert_relative_eq!(
            g.sound_speed(1.0, 0.0).unwrap(),
            (5.0f64 / 3.0).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn prim_cons_examples() {
        let g = mono();
        let p = Primitive {
            rho: 1.0,
            theta: 1.0,
            u1: 3.0,
            u2: 4.0,
        };
        let c = g.prim_to_cons(&p).unwrap();
        assert_eq!(c.m1, 3.0);
        assert_eq!(c.m2, 4.0);
        assert_eq!(c.e_tot, 14.0); // 25/2 + 3/2

        let back = g.cons_to_prim(&c).unwrap();
        assert_relative_eq!(back.theta, 1.0, max_relative = 1e-14);

        let bad = Conserved {
            rho: 1.0,
            m1: 2.0,
            m2: 0.0,
            e_tot: 1.0, // kinetic alone is 2.0
        };
        assert!(matches!(
            g.cons_to_prim(&bad),
            Err(GasError::NonPositiveInternalEnergy(_))
        ));
    }

    #[test]
    fn admissibility_bounds() {
        let g = mono();
        let b = AdmissibilityBounds::from_end_states((1.0, 1.0, 0.0), (1.0, 1.0, 0.5), &g).unwrap();
        assert_eq!(b.rho_max, 10.0);
        assert_eq!(b.speed_max, 10.0); // floor kicks in for |u| <= 1
        let ok = Primitive {
            rho: 2.0,
            theta: 1.0,
            u1: 0.0,
            u2: 0.0,
        };
        assert!(g.validate_admissible(&ok, &b).is_ok());
        let too_dense = Primitive { rho: 11.0, ..ok };
        assert!(matches!(
            g.validate_admissible(&too_dense, &b),
            Err(GasError::OutOfBounds {
                quantity: "density",
                ..
            })
        ));
    }

    #[test]
    fn gas_params_deserialize_recomputes_gamma() {
        let g: GasParams = serde_json::from_str(r#"{"c_v": 1.5}"#).unwrap();
        assert_eq!(g.gamma(), 5.0 / 3.0);
        // A stale gamma on input is ignored.
        let g: GasParams = serde_json::from_str(r#"{"c_v": 1.0, "gamma": 9.0}"#).unwrap();
        assert_eq!(g.gamma(), 2.0);
        assert!(serde_json::from_str::<GasParams>(r#"{"c_v": -2.0}"#).is_err());
    }

    proptest! {
        // theta(rho, s(rho, theta)) = theta and p = rho * theta consistency
        // across the admissible box used throughout the test suite.
        #[test]
        fn entropy_temperature_roundtrip(
            rho in 0.01f64..100.0,
            theta in 0.01f64..100.0,
            c_v in 0.3f64..4.0,
        ) {
            let g = GasParams::new(c_v).unwrap();
            let s = g.entropy(rho, theta).unwrap();
            let theta_back = g.temperature_from_entropy(rho, s).unwrap();
            prop_assert!((theta_back - theta).abs() <= 1e-13 * theta);

            let p_direct = g.pressure(rho, theta).unwrap();
            let p_isen = g.isentropic_pressure(rho, s).unwrap();
            prop_assert!((p_direct - p_isen).abs() <= 1e-13 * p_direct);
        }

        #[test]
        fn prim_cons_roundtrip(
            rho in 0.01f64..100.0,
            theta in 0.01f64..100.0,
            u1 in -50.0f64..50.0,
            u2 in -50.0f64..50.0,
        ) {
            let g = mono();
            let p = Primitive { rho, theta, u1, u2 };
            let back = g.cons_to_prim(&g.prim_to_cons(&p).unwrap()).unwrap();
            prop_assert!((back.rho - rho).abs() <= 1e-14 * rho);
            // Recovering theta subtracts the kinetic energy from the total,
            // so the attainable accuracy degrades with the kinetic/thermal
            // ratio; the tolerance carries that conditioning factor.
            let cond = 1.0 + (u1 * u1 + u2 * u2) / (2.0 * g.c_v() * theta);
            prop_assert!((back.theta - theta).abs() <= 5e-15 * cond * theta);
            prop_assert!((back.u1 - u1).abs() <= 1e-13 * (1.0 + u1.abs()));
            prop_assert!((back.u2 - u2).abs() <= 1e-13 * (1.0 + u2.abs()));
        }

        // On moderate-speed states the energy split is balanced and the
        // roundtrip is near machine exact.
        #[test]
        fn prim_cons_roundtrip_moderate_is_tight(
            rho in 0.1f64..10.0,
            theta in 0.1f64..10.0,
            u1 in -3.0f64..3.0,
            u2 in -3.0f64..3.0,
        ) {
            let g = mono();
            let p = Primitive { rho, theta, u1, u2 };
            let back = g.cons_to_prim(&g.prim_to_cons(&p).unwrap()).unwrap();
            prop_assert!((back.rho - rho).abs() <= 1e-14 * rho);
            prop_assert!((back.theta - theta).abs() <= 1e-13 * theta);
            prop_assert!((back.u1 - u1).abs() <= 1e-14 * (1.0 + u1.abs()));
            prop_assert!((back.u2 - u2).abs() <= 1e-14 * (1.0 + u2.abs()));
        }
    }
}
