//! Piecewise terrain elevation profiles for the planar stepper.

use serde::{Deserialize, Serialize};

/// Surface class, sets the rolling-resistance default. The coefficients are
/// model constants, not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceClass {
    Flat,
    Asphalt,
    Grass,
    Pebbles,
}

impl SurfaceClass {
    pub fn rolling_resistance(self) -> f64 {
        match self {
            SurfaceClass::Flat => 0.010,
            SurfaceClass::Asphalt => 0.012,
            SurfaceClass::Grass => 0.08,
            SurfaceClass::Pebbles => 0.12,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SurfaceClass::Flat => "flat",
            SurfaceClass::Asphalt => "asphalt",
            SurfaceClass::Grass => "grass",
            SurfaceClass::Pebbles => "pebbles",
        }
    }

    /// Whether the integrated strategy keeps wheels on this surface.
    pub fn is_wheel_friendly(self) -> bool {
        matches!(self, SurfaceClass::Flat | SurfaceClass::Asphalt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainKind {
    Flat,
    /// Single step up of the given height at x = 0.
    Step { height: f64 },
    /// Staircase starting at x = 0: `count` risers of `height` spaced by
    /// `depth`.
    Stairs { height: f64, depth: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrainProfile {
    #[serde(flatten)]
    pub kind: TerrainKind,
    pub surface: SurfaceClass,
    /// Coulomb friction coefficient at the contacts.
    pub friction_mu: f64,
    /// Rolling-resistance coefficient; defaults to the surface class value.
    pub rolling_resistance: f64,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid terrain: {0}")]
pub struct TerrainError(pub String);

impl TerrainProfile {
    pub fn flat() -> TerrainProfile {
        TerrainProfile::new(TerrainKind::Flat, SurfaceClass::Flat, 0.8)
    }

    pub fn step(height: f64) -> TerrainProfile {
        TerrainProfile::new(TerrainKind::Step { height }, SurfaceClass::Flat, 0.8)
    }

    pub fn stairs(height: f64, depth: f64, count: usize) -> TerrainProfile {
        TerrainProfile::new(TerrainKind::Stairs { height, depth, count }, SurfaceClass::Flat, 0.8)
    }

    pub fn new(kind: TerrainKind, surface: SurfaceClass, friction_mu: f64) -> TerrainProfile {
        TerrainProfile {
            kind,
            surface,
            friction_mu,
            rolling_resistance: surface.rolling_resistance(),
        }
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        if !(self.friction_mu > 0.0 && self.friction_mu <= 2.0) {
            return Err(TerrainError(format!("friction {} outside (0, 2]", self.friction_mu)));
        }
        if self.rolling_resistance < 0.0 {
            return Err(TerrainError("rolling resistance must be nonnegative".into()));
        }
        match self.kind {
            TerrainKind::Flat => Ok(()),
            TerrainKind::Step { height } => {
                if height > 0.0 {
                    Ok(())
                } else {
                    Err(TerrainError("step height must be positive".into()))
                }
            }
            TerrainKind::Stairs { height, depth, count } => {
                if height <= 0.0 || depth <= 0.0 {
                    return Err(TerrainError("stair height and depth must be positive".into()));
                }
                if count < 1 {
                    return Err(TerrainError("stairs need at least one riser".into()));
                }
                Ok(())
            }
        }
    }

    /// Ground elevation under world x.
    pub fn elevation(&self, x: f64) -> f64 {
        match self.kind {
            TerrainKind::Flat => 0.0,
            TerrainKind::Step { height } => {
                if x < 0.0 {
                    0.0
                } else {
                    height
                }
            }
            TerrainKind::Stairs { height, depth, count } => {
                if x < 0.0 {
                    0.0
                } else {
                    let riser = (x / depth).floor() as usize + 1;
                    height * riser.min(count) as f64
                }
            }
        }
    }

    /// Riser corner points (x, top elevation) of the profile.
    pub fn corners(&self) -> Vec<(f64, f64)> {
        match self.kind {
            TerrainKind::Flat => vec![],
            TerrainKind::Step { height } => vec![(0.0, height)],
            TerrainKind::Stairs { height, depth, count } => (0..count)
                .map(|i| (i as f64 * depth, height * (i + 1) as f64))
                .collect(),
        }
    }

    /// Total rise of the profile.
    pub fn total_rise(&self) -> f64 {
        match self.kind {
            TerrainKind::Flat => 0.0,
            TerrainKind::Step { height } => height,
            TerrainKind::Stairs { height, count, .. } => height * count as f64,
        }
    }

    /// x past which the profile is flat again.
    pub fn end_x(&self) -> f64 {
        match self.kind {
            TerrainKind::Flat => 0.0,
            TerrainKind::Step { .. } => 0.0,
            TerrainKind::Stairs { depth, count, .. } => (count - 1) as f64 * depth,
        }
    }
}
