use serde::{Deserialize, Serialize};

use crate::collide::{CollisionParams, WorldBox};
use crate::integrate::IntegratorKind;
use crate::mesh::{Dimension, Material};
use crate::{Error, Result, Vec3};

/// Every tunable of a simulation. Defaults reproduce the reference
/// parameter set (KS 800, KD 15, RKS 700, RKD 50, MKS 150, MKD 25,
/// PRESSURE 20, MASS 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Structural spring stiffness (N/m).
    pub ks: f64,
    /// Structural spring damping (N·s/m).
    pub kd: f64,
    /// Radius and shear spring stiffness.
    pub rks: f64,
    /// Radius and shear spring damping.
    pub rkd: f64,
    /// Mouse drag spring stiffness.
    pub mks: f64,
    /// Mouse drag spring damping.
    pub mkd: f64,
    /// Mouse drag spring rest length.
    pub drag_rest: f64,
    /// Combined n·R·T of the enclosed gas.
    #[serde(alias = "pressure")]
    pub pressure_nrt: f64,
    pub mass: f64,
    pub g: f64,
    pub dt: f64,
    pub integrator: IntegratorKind,
    /// Fraction of normal velocity kept (and reversed) at a wall.
    #[serde(alias = "e")]
    pub restitution: f64,
    /// Fraction of tangential velocity kept at a wall.
    #[serde(alias = "f")]
    pub friction: f64,
    /// Scale structural forces per particle by 6 / (attached springs).
    pub uniformity_correction: bool,
    pub world_min: [f64; 3],
    pub world_max: [f64; 3],
    pub surface_epsilon: f64,
    pub layer_epsilon: f64,
    /// Pressure volume floor as a fraction of the initial layer volume.
    pub volume_floor_ratio: f64,
    /// Divergence bound as a multiple of the world box diagonal.
    pub divergence_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ks: 800.0,
            kd: 15.0,
            rks: 700.0,
            rkd: 50.0,
            mks: 150.0,
            mkd: 25.0,
            drag_rest: 0.0,
            pressure_nrt: 20.0,
            mass: 1.0,
            g: 9.8,
            dt: 0.003,
            integrator: IntegratorKind::Rk4,
            restitution: 0.5,
            friction: 0.9,
            uniformity_correction: false,
            world_min: [-10.0, -5.0, -10.0],
            world_max: [10.0, 15.0, 10.0],
            surface_epsilon: 1e-9,
            layer_epsilon: 1e-3,
            volume_floor_ratio: 1e-6,
            divergence_factor: 1e3,
        }
    }
}

/// Keys accepted by [`SimConfig::set_param`].
pub const PARAM_KEYS: &[&str] = &[
    "ks",
    "kd",
    "rks",
    "rkd",
    "mks",
    "mkd",
    "drag_rest",
    "pressure_nrt",
    "mass",
    "g",
    "dt",
    "restitution",
    "friction",
    "uniformity_correction",
];

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("ks", self.ks),
            ("kd", self.kd),
            ("rks", self.rks),
            ("rkd", self.rkd),
            ("mks", self.mks),
            ("mkd", self.mkd),
            ("drag_rest", self.drag_rest),
            ("pressure_nrt", self.pressure_nrt),
            ("surface_epsilon", self.surface_epsilon),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let positive = [
            ("mass", self.mass),
            ("dt", self.dt),
            ("volume_floor_ratio", self.volume_floor_ratio),
            ("divergence_factor", self.divergence_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !self.g.is_finite() {
            return Err(Error::Config(format!("g must be finite, got {}", self.g)));
        }
        for (name, v) in [("restitution", self.restitution), ("friction", self.friction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.layer_epsilon > 0.0 && self.layer_epsilon < 1.0) {
            return Err(Error::Config(format!(
                "layer_epsilon must lie in (0, 1), got {}",
                self.layer_epsilon
            )));
        }
        for axis in 0..3 {
            if !(self.world_min[axis] < self.world_max[axis]) {
                return Err(Error::Config(format!("world box is empty along axis {axis}")));
            }
        }
        Ok(())
    }

    /// Applies one named parameter. The configuration is left untouched
    /// when the key is unknown or the value is out of bounds.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        let mut next = self.clone();
        match key {
            "ks" => next.ks = value,
            "kd" => next.kd = value,
            "rks" => next.rks = value,
            "rkd" => next.rkd = value,
            "mks" => next.mks = value,
            "mkd" => next.mkd = value,
            "drag_rest" => next.drag_rest = value,
            "pressure_nrt" | "pressure" => next.pressure_nrt = value,
            "mass" => next.mass = value,
            "g" => next.g = value,
            "dt" => next.dt = value,
            "restitution" | "e" => next.restitution = value,
            "friction" | "f" => next.friction = value,
            "uniformity_correction" => next.uniformity_correction = value != 0.0,
            other => return Err(Error::Config(format!("unknown parameter '{other}'"))),
        }
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn material(&self) -> Material {
        Material {
            mass: self.mass,
            ks: self.ks,
            kd: self.kd,
            rks: self.rks,
            rkd: self.rkd,
        }
    }

    pub fn collision(&self) -> CollisionParams {
        CollisionParams::new(self.restitution, self.friction)
            .expect("restitution and friction are validated with the config")
    }

    pub fn world(&self, dimension: Dimension) -> WorldBox {
        WorldBox::new(Vec3::from(self.world_min), Vec3::from(self.world_max), dimension)
    }

    pub fn world_diagonal(&self, dimension: Dimension) -> f64 {
        let span = Vec3::from(self.world_max) - Vec3::from(self.world_min);
        match dimension.spatial() {
            2 => span.xy().norm(),
            _ => span.norm(),
        }
    }

    pub fn divergence_bound(&self, dimension: Dimension) -> f64 {
        self.divergence_factor * self.world_diagonal(dimension)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_parameters() {
        let c = SimConfig::default();
        assert_eq!((c.ks, c.kd, c.rks, c.rkd), (800.0, 15.0, 700.0, 50.0));
        assert_eq!((c.mks, c.mkd, c.pressure_nrt, c.mass), (150.0, 25.0, 20.0, 1.0));
        assert_eq!(c.dt, 0.003);
        assert!(!c.uniformity_correction);
        c.validate().unwrap();
    }

    #[test]
    fn set_param_rejects_out_of_bounds() {
        let mut c = SimConfig::default();
        assert!(c.set_param("ks", -1.0).is_err());
        assert_eq!(c, SimConfig::default());
        assert!(c.set_param("restitution", 1.5).is_err());
        assert!(c.set_param("nope", 1.0).is_err());
        c.set_param("pressure", 5.0).unwrap();
        assert_eq!(c.pressure_nrt, 5.0);
    }

    #[test]
    fn partial_json_overrides_keep_defaults() {
        let c: SimConfig = serde_json::from_str(r#"{"ks": 100, "integrator": "euler", "e": 1.0}"#).unwrap();
        assert_eq!(c.ks, 100.0);
        assert_eq!(c.integrator, IntegratorKind::Euler);
        assert_eq!(c.restitution, 1.0);
        assert_eq!(c.kd, 15.0);
        assert!(serde_json::from_str::<SimConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
