use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::engine::SimConfig;
use crate::mesh::{
    build_1d, build_ring_2d, build_sphere_octa, build_sphere_polar, link_layers, LayeredBody, MAX_OCTA_ITERATIONS,
};
use crate::{Error, Result, Vec3};

/// Upper bound on particles per body, so a request cannot allocate without
/// limit.
pub const MAX_PARTICLES: usize = 200_000;

/// Which body to build and where to put it.
///
/// Plain serde reads the parameters next to `kind`. [`BodySpec::from_json`]
/// also accepts them inside a `params` object:
///
/// ```
/// # use squish::engine::BodySpec;
/// use serde_json::json;
/// let a: BodySpec = serde_json::from_value(json!({"kind": "ring2d", "n": 8})).unwrap();
/// let b = BodySpec::from_json(json!({"kind": "ring2d", "params": {"n": 8}})).unwrap();
/// assert_eq!(a, b);
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum BodySpec {
    #[serde(rename = "1d")]
    OneD {
        #[serde(default = "default_p0", deserialize_with = "point")]
        p0: [f64; 3],
        #[serde(default = "default_p1", deserialize_with = "point")]
        p1: [f64; 3],
    },
    #[serde(rename = "ring2d")]
    Ring2d {
        #[serde(default = "default_ring_n")]
        n: usize,
        #[serde(default = "default_r_inner")]
        r_inner: f64,
        #[serde(default = "default_r_outer")]
        r_outer: f64,
        #[serde(default, deserialize_with = "point")]
        center: [f64; 3],
    },
    #[serde(rename = "sphere_polar")]
    SpherePolar {
        #[serde(default = "default_polar_count")]
        n_slices: usize,
        #[serde(default = "default_polar_count")]
        n_stacks: usize,
        #[serde(default = "default_r_inner")]
        r_inner: f64,
        #[serde(default = "default_r_outer")]
        r_outer: f64,
        #[serde(default, deserialize_with = "point")]
        center: [f64; 3],
    },
    #[serde(rename = "sphere_octa")]
    SphereOcta {
        #[serde(default = "default_iterations")]
        iterations: u32,
        #[serde(default = "default_r_inner")]
        r_inner: f64,
        #[serde(default = "default_r_outer")]
        r_outer: f64,
        #[serde(default, deserialize_with = "point")]
        center: [f64; 3],
    },
}

fn default_p0() -> [f64; 3] {
    [0.0, 2.0, 0.0]
}
fn default_p1() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}
fn default_ring_n() -> usize {
    12
}
fn default_polar_count() -> usize {
    10
}
fn default_iterations() -> u32 {
    1
}
fn default_r_inner() -> f64 {
    1.5
}
fn default_r_outer() -> f64 {
    2.0
}

/// Accepts `[x, y]` or `[x, y, z]`.
fn point<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<[f64; 3], D::Error> {
    let v: Vec<f64> = Vec::deserialize(d)?;
    match v[..] {
        [x, y] => Ok([x, y, 0.0]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err(serde::de::Error::custom(format!("expected 2 or 3 coordinates, got {}", v.len()))),
    }
}

impl BodySpec {
    pub fn one_d(p0: [f64; 2], p1: [f64; 2]) -> Self {
        BodySpec::OneD {
            p0: [p0[0], p0[1], 0.0],
            p1: [p1[0], p1[1], 0.0],
        }
    }

    pub fn ring2d(n: usize, r_inner: f64, r_outer: f64) -> Self {
        BodySpec::Ring2d {
            n,
            r_inner,
            r_outer,
            center: [0.0; 3],
        }
    }

    pub fn sphere_polar(n_slices: usize, n_stacks: usize, r_inner: f64, r_outer: f64) -> Self {
        BodySpec::SpherePolar {
            n_slices,
            n_stacks,
            r_inner,
            r_outer,
            center: [0.0; 3],
        }
    }

    pub fn sphere_octa(iterations: u32, r_inner: f64, r_outer: f64) -> Self {
        BodySpec::SphereOcta {
            iterations,
            r_inner,
            r_outer,
            center: [0.0; 3],
        }
    }

    /// Same body, centred at `c` (ignored for the 1D body, whose endpoints
    /// are absolute).
    pub fn centered_at(mut self, c: [f64; 3]) -> Self {
        match &mut self {
            BodySpec::OneD { .. } => {}
            BodySpec::Ring2d { center, .. }
            | BodySpec::SpherePolar { center, .. }
            | BodySpec::SphereOcta { center, .. } => *center = c,
        }
        self
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BodySpec::OneD { .. } => "1d",
            BodySpec::Ring2d { .. } => "ring2d",
            BodySpec::SpherePolar { .. } => "sphere_polar",
            BodySpec::SphereOcta { .. } => "sphere_octa",
        }
    }

    /// Parses `{"kind": ..., ...}` with the parameters either inline or in
    /// a `params` object.
    pub fn from_json(value: Value) -> Result<Self> {
        let Value::Object(mut map) = value else {
            return Err(Error::Scenario("body spec must be a JSON object".into()));
        };
        if let Some(params) = map.remove("params") {
            match params {
                Value::Object(inner) => {
                    for (k, v) in inner {
                        if map.insert(k.clone(), v).is_some() {
                            return Err(Error::Scenario(format!("body parameter '{k}' given twice")));
                        }
                    }
                }
                Value::Null => {}
                _ => return Err(Error::Scenario("body params must be a JSON object".into())),
            }
        }
        let spec: BodySpec = serde_json::from_value(Value::Object(map))?;
        Ok(spec)
    }

    /// Same parse as [`BodySpec::from_json`] with `kind` and `params` given
    /// separately.
    pub fn from_kind(kind: &str, params: Value) -> Result<Self> {
        let mut map = serde_json::Map::new();
        map.insert("kind".into(), Value::String(kind.into()));
        map.insert("params".into(), params);
        Self::from_json(Value::Object(map))
    }

    pub fn particle_count(&self) -> usize {
        match *self {
            BodySpec::OneD { .. } => 2,
            BodySpec::Ring2d { n, .. } => n.saturating_mul(2),
            BodySpec::SpherePolar { n_slices, n_stacks, .. } => n_slices
                .saturating_mul(n_stacks.saturating_sub(1))
                .saturating_add(2)
                .saturating_mul(2),
            BodySpec::SphereOcta { iterations, .. } => {
                if iterations > MAX_OCTA_ITERATIONS {
                    usize::MAX
                } else {
                    2 * (4usize.pow(iterations) * 4 + 2)
                }
            }
        }
    }

    pub fn build(&self, cfg: &SimConfig) -> Result<LayeredBody> {
        let count = self.particle_count();
        if count > MAX_PARTICLES {
            return Err(Error::Mesh(format!(
                "body would have {count} particles, the limit is {MAX_PARTICLES}"
            )));
        }
        let material = cfg.material();
        let (mut body, center) = match *self {
            BodySpec::OneD { p0, p1 } => {
                if p0[2] != 0.0 || p1[2] != 0.0 {
                    return Err(Error::Mesh("1D endpoints live in the xy plane".into()));
                }
                let body = build_1d(Vec3::from(p0), Vec3::from(p1), cfg.mass, cfg.ks, cfg.kd)?;
                (body, [0.0; 3])
            }
            BodySpec::Ring2d {
                n,
                r_inner,
                r_outer,
                center,
            } => {
                if center[2] != 0.0 {
                    return Err(Error::Mesh("a 2D ring must be centred in the xy plane".into()));
                }
                (build_ring_2d(n, r_inner, r_outer, &material)?, center)
            }
            BodySpec::SpherePolar {
                n_slices,
                n_stacks,
                r_inner,
                r_outer,
                center,
            } => {
                check_radii(r_inner, r_outer)?;
                let inner = build_sphere_polar(n_slices, n_stacks, r_inner)?;
                let outer = build_sphere_polar(n_slices, n_stacks, r_outer)?;
                (link_layers(&inner, &outer, &material)?, center)
            }
            BodySpec::SphereOcta {
                iterations,
                r_inner,
                r_outer,
                center,
            } => {
                check_radii(r_inner, r_outer)?;
                let inner = build_sphere_octa(iterations, r_inner)?;
                let outer = build_sphere_octa(iterations, r_outer)?;
                (link_layers(&inner, &outer, &material)?, center)
            }
        };
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Mesh("body centre must be finite".into()));
        }
        if center != [0.0; 3] {
            body.translate(Vec3::from(center));
        }
        Ok(body)
    }
}

/// `deserialize_with` helper that goes through [`BodySpec::from_json`].
pub fn deserialize_body<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BodySpec, D::Error> {
    BodySpec::from_json(Value::deserialize(d)?).map_err(serde::de::Error::custom)
}

fn check_radii(r_inner: f64, r_outer: f64) -> Result<()> {
    if r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite() {
        Ok(())
    } else {
        Err(Error::Mesh(format!(
            "radii must satisfy 0 < r_inner < r_outer, got {r_inner} and {r_outer}"
        )))
    }
}
