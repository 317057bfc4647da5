use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Affine map of the parametric unit square onto `[0, L]^2` (mm).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    side_length: f64,
}

impl Geometry {
    pub fn new(side_length: f64) -> Result<Self> {
        if !(side_length > 0.0 && side_length.is_finite()) {
            return Err(Error::Config(format!("side length must be positive, got {side_length}")));
        }
        Ok(Self { side_length })
    }

    pub fn side_length(&self) -> f64 {
        self.side_length
    }

    pub fn to_physical(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0] * self.side_length, x[1] * self.side_length]
    }

    /// Clamped into the unit square to absorb rounding at the boundary.
    pub fn to_parametric(&self, x: [f64; 2]) -> [f64; 2] {
        [(x[0] / self.side_length).clamp(0.0, 1.0), (x[1] / self.side_length).clamp(0.0, 1.0)]
    }

    pub fn jacobian(&self) -> f64 {
        self.side_length * self.side_length
    }
}

/// Linear isotropic material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// W/mm/K
    pub conductivity: f64,
    /// J/kg/K
    pub specific_heat: f64,
    /// kg/mm^3
    pub density: f64,
    /// Initial temperature in degrees Celsius.
    pub theta0: f64,
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("conductivity", self.conductivity),
            ("specific_heat", self.specific_heat),
            ("density", self.density),
            ("theta0", self.theta0),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("material {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `Cp * rho`
    pub fn heat_capacity(&self) -> f64 {
        self.specific_heat * self.density
    }
}

/// Trajectory of the beam center, in mm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScanPath {
    CircularArc {
        center: [f64; 2],
        radius: f64,
        start_angle: f64,
        /// rad/s; the sign sets the direction.
        angular_speed: f64,
        /// Total swept angle in rad.
        sweep: f64,
    },
    /// Tracks along +x/-x alternately, offset by `hatch` in y after each track.
    AlternatingTracks { origin: [f64; 2], track_length: f64, hatch: f64, n_tracks: usize, speed: f64 },
    /// Straight segments between waypoints; `speeds[k]` applies to segment `k`.
    Polyline { waypoints: Vec<[f64; 2]>, speeds: Vec<f64> },
}

impl ScanPath {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match self {
            ScanPath::CircularArc { radius, angular_speed, sweep, .. } => {
                if !(*radius > 0.0) || *angular_speed == 0.0 || !(*sweep > 0.0) {
                    return bad("circular arc needs radius > 0, angular_speed != 0, sweep > 0");
                }
            }
            ScanPath::AlternatingTracks { track_length, hatch, n_tracks, speed, .. } => {
                if !(*track_length > 0.0) || *hatch < 0.0 || *n_tracks == 0 || !(*speed > 0.0) {
                    return bad("alternating tracks need track_length > 0, hatch >= 0, n_tracks >= 1, speed > 0");
                }
            }
            ScanPath::Polyline { waypoints, speeds } => {
                if waypoints.len() < 2 || speeds.len() != waypoints.len() - 1 || speeds.iter().any(|s| !(*s > 0.0)) {
                    return bad("polyline needs >= 2 waypoints and one positive speed per segment");
                }
            }
        }
        Ok(())
    }

    fn segments(&self) -> Option<(Vec<[f64; 2]>, Vec<f64>)> {
        match self {
            ScanPath::CircularArc { .. } => None,
            ScanPath::AlternatingTracks { origin, track_length, hatch, n_tracks, speed } => {
                let mut pts = Vec::new();
                for k in 0..*n_tracks {
                    let y = origin[1] + k as f64 * hatch;
                    let (a, b) = if k % 2 == 0 {
                        (origin[0], origin[0] + track_length)
                    } else {
                        (origin[0] + track_length, origin[0])
                    };
                    pts.push([a, y]);
                    pts.push([b, y]);
                }
                pts.dedup();
                let n = pts.len() - 1;
                Some((pts, vec![*speed; n]))
            }
            ScanPath::Polyline { waypoints, speeds } => Some((waypoints.clone(), speeds.clone())),
        }
    }

    /// Time needed to traverse the whole path.
    pub fn duration(&self) -> f64 {
        match self {
            ScanPath::CircularArc { angular_speed, sweep, .. } => sweep / angular_speed.abs(),
            _ => {
                let (pts, speeds) = self.segments().unwrap();
                pts.windows(2).zip(&speeds).map(|(w, s)| dist(w[0], w[1]) / s).sum()
            }
        }
    }

    /// Beam center at time `t`, or `None` once the path has been completed.
    pub fn position(&self, t: f64) -> Option<[f64; 2]> {
        if t < 0.0 || t > self.duration() {
            return None;
        }
        match self {
            ScanPath::CircularArc { center, radius, start_angle, angular_speed, .. } => {
                let a = start_angle + angular_speed * t;
                Some([center[0] + radius * a.cos(), center[1] + radius * a.sin()])
            }
            _ => {
                let (pts, speeds) = self.segments().unwrap();
                let mut rest = t;
                for (w, s) in pts.windows(2).zip(&speeds) {
                    let dt = dist(w[0], w[1]) / s;
                    if rest <= dt {
                        let u = if dt > 0.0 { rest / dt } else { 0.0 };
                        return Some([w[0][0] + u * (w[1][0] - w[0][0]), w[0][1] + u * (w[1][1] - w[0][1])]);
                    }
                    rest -= dt;
                }
                pts.last().copied()
            }
        }
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

/// Gaussian surface heat source moving along a scan path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatSource {
    /// W
    pub power: f64,
    pub absorptivity: f64,
    /// Spot radius in mm.
    pub radius: f64,
    pub path: ScanPath,
}

impl HeatSource {
    pub fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0) || !(self.absorptivity > 0.0 && self.absorptivity <= 1.0) || !(self.radius > 0.0) {
            return Err(Error::Config("source needs power >= 0, absorptivity in (0, 1], radius > 0".into()));
        }
        self.path.validate()
    }

    /// Flux density `P * eta * exp(-|x - x0(t)|^2 / r_h^2)`; zero after the path ends.
    pub fn value(&self, t: f64, x: [f64; 2]) -> f64 {
        match self.path.position(t) {
            Some(c) => {
                let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                self.power * self.absorptivity * (-r2 / (self.radius * self.radius)).exp()
            }
            None => 0.0,
        }
    }
}
