use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Number of samples used to validate a profile on `[1/2, 1]`.
const VALIDATION_SAMPLES: usize = 4096;

/// Largest jump between neighbouring validation samples accepted as continuous.
const MAX_JUMP: f64 = 0.05;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial profile `p` of the generator, with `p = 1` on `[0, 1/2]`, `p = 0` on
/// `[1, ∞)` and strictly decreasing in between.
#[derive(Clone)]
pub struct GeneratorSpec {
    name: String,
    profile: Profile,
}

impl fmt::Debug for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec").field("name", &self.name).finish()
    }
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self::smooth_bump()
    }
}

fn q(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// The standard `C^∞` transition `q(2-2r) / (q(2-2r) + q(2r-1))`, `q(s) = e^{-1/s}`.
pub fn smooth_bump(r: f64) -> f64 {
    let up = q(2.0 - 2.0 * r);
    let down = q(2.0 * r - 1.0);
    up / (up + down)
}

impl GeneratorSpec {
    pub fn smooth_bump() -> Self {
        Self {
            name: "smooth_bump".into(),
            profile: Arc::new(smooth_bump),
        }
    }

    /// A validated user-supplied profile.
    pub fn custom(name: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            profile: Arc::new(profile),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Looks up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "smooth_bump" => Ok(Self::smooth_bump()),
            _ => Err(Error::InvalidGenerator {
                name: name.into(),
                reason: "unknown preset".into(),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.profile)(r)
    }

    /// Checks the profile invariants on a fine sample.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidGenerator {
            name: self.name.clone(),
            reason,
        };
        for i in 0..=VALIDATION_SAMPLES {
            let r = 0.5 * i as f64 / VALIDATION_SAMPLES as f64;
            let v = self.eval(r);
            if v != 1.0 {
                return Err(fail(format!("p({r}) = {v}, expected exactly 1 on [0, 1/2]")));
            }
        }
        for r in [1.0, 1.25, 1.5, 2.0, 4.0, 1e3] {
            let v = self.eval(r);
            if v != 0.0 {
                return Err(fail(format!("p({r}) = {v}, expected exactly 0 on [1, ∞)")));
            }
        }
        let mut prev = 1.0;
        for i in 1..=VALIDATION_SAMPLES {
            let r = 0.5 + 0.5 * i as f64 / VALIDATION_SAMPLES as f64;
            let v = self.eval(r);
            if !(0.0..=1.0).contains(&v) {
                return Err(fail(format!("p({r}) = {v} outside [0, 1]")));
            }
            // Plateaus are tolerated only where the profile has saturated in
            // floating point.
            if v > prev || (v == prev && v > 1e-12 && v < 1.0 - 1e-12) {
                return Err(fail(format!("p is not strictly decreasing near r = {r}")));
            }
            if prev - v > MAX_JUMP {
                return Err(fail(format!("p jumps by {} near r = {r}", prev - v)));
            }
            prev = v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_bump_endpoints_and_midpoint() {
        assert_eq!(smooth_bump(0.0), 1.0);
        assert_eq!(smooth_bump(0.5), 1.0);
        assert_eq!(smooth_bump(1.0), 0.0);
        assert_eq!(smooth_bump(7.0), 0.0);
        assert!((smooth_bump(0.75) - 0.5).abs() < 1e-15);
        GeneratorSpec::smooth_bump().validate().unwrap();
    }

    #[test]
    fn linear_ramp_is_accepted() {
        GeneratorSpec::custom("ramp", |r: f64| (2.0 - 2.0 * r).clamp(0.0, 1.0)).unwrap();
    }

    #[test]
    fn bad_profiles_are_rejected() {
        let wide = GeneratorSpec::custom("wide", |r: f64| if r < 1.2 { 1.0 } else { 0.0 });
        assert!(matches!(wide, Err(Error::InvalidGenerator { .. })));
        let step = GeneratorSpec::custom("step", |r: f64| if r < 0.7 { 1.0 } else { 0.0 });
        assert!(step.is_err());
        let bump = GeneratorSpec::custom("bump", |r: f64| {
            if r <= 0.5 {
                1.0
            } else if r >= 1.0 {
                0.0
            } else {
                0.5 + 0.4 * (20.0 * r).sin()
            }
        });
        assert!(bump.is_err());
        assert!(GeneratorSpec::preset("gaussian").is_err());
    }
}
