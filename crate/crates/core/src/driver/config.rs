use crate::assembly::{Geometry, HeatSource, Material, ScanPath};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

/// Discretization strategy of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Admissible refinement and coarsening of class `m`.
    Adaptive,
    /// Fixed tensor-product space refined `k` times.
    Uniform(usize),
    /// Adaptive with `m = N`, which disables every neighborhood closure.
    NonAdmissible,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Adaptive => write!(f, "adaptive"),
            Mode::Uniform(k) => write!(f, "uniform:{k}"),
            Mode::NonAdmissible => write!(f, "non_admissible"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adaptive" => Ok(Mode::Adaptive),
            "non_admissible" => Ok(Mode::NonAdmissible),
            _ => {
                let k = s
                    .strip_prefix("uniform:")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))?;
                Ok(Mode::Uniform(k))
            }
        }
    }
}

/// Everything a run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub degree: usize,
    pub base_cells: usize,
    /// Number of hierarchy levels `N`.
    pub max_levels: usize,
    pub m: usize,
    pub alpha_r: f64,
    pub alpha_c: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub tol: f64,
    /// Iteration cap of the first step; `None` means `N`.
    pub i_max_first: Option<usize>,
    pub i_max_rest: usize,
    pub side_length: f64,
    pub mode: Mode,
    pub material: Material,
    pub source: HeatSource,
    pub sample_n: usize,
    /// Gauss points per direction; `None` means `p + 1`.
    pub n_gauss: Option<usize>,
    pub solver_tol: f64,
    pub coarsen: bool,
    /// Write mesh and field snapshots every this many steps (0 disables).
    pub snapshot_every: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.degree < 1 {
            return bad("degree must be at least 1".into());
        }
        if self.base_cells < 1 {
            return bad("base_cells must be at least 1".into());
        }
        if self.max_levels < 1 {
            return bad("max_levels must be at least 1".into());
        }
        if self.mode == Mode::Adaptive && self.m < 2 {
            return bad(format!("admissibility class m must be at least 2, got {}", self.m));
        }
        for (name, a) in [("alpha_r", self.alpha_r), ("alpha_c", self.alpha_c)] {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {a}"));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_steps < 1 {
            return bad("n_steps must be at least 1".into());
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad("tol must be nonnegative".into());
        }
        if self.sample_n < 2 {
            return bad("sample_n must be at least 2".into());
        }
        if let Some(g) = self.n_gauss {
            if g < self.degree + 1 {
                return bad(format!("n_gauss must be at least p + 1 = {}", self.degree + 1));
            }
        }
        if !(self.solver_tol > 0.0 && self.solver_tol < 1.0) {
            return bad("solver_tol must lie in (0, 1)".into());
        }
        Geometry::new(self.side_length)?;
        self.material.validate()?;
        self.source.validate()
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(self.side_length).expect("validated side length")
    }

    pub fn n_gauss(&self) -> usize {
        self.n_gauss.unwrap_or(self.degree + 1)
    }

    /// Admissibility class actually used by refinement and coarsening.
    pub fn effective_m(&self) -> usize {
        match self.mode {
            Mode::NonAdmissible => self.max_levels,
            _ => self.m,
        }
    }

    /// Hierarchy depth of the run.
    pub fn levels(&self) -> usize {
        match self.mode {
            Mode::Uniform(k) => k + 1,
            _ => self.max_levels,
        }
    }

    pub fn i_max_first(&self) -> usize {
        self.i_max_first.unwrap_or(self.max_levels)
    }

    /// Parses the sectioned `key = value` format; unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut material = Table::new("material", sections.get("material"));
        let mut source = Table::new("source", sections.get("source"));
        let mut path = Table::new("path", sections.get("path"));
        let mut run = Table::new("run", sections.get("run"));
        if let Some(s) = sections.keys().find(|s| !["material", "source", "path", "run"].contains(&s.as_str())) {
            return Err(Error::Config(format!("unknown section [{s}]")));
        }

        let mat = Material {
            conductivity: material.req("conductivity")?,
            specific_heat: material.req("specific_heat")?,
            density: material.req("density")?,
            theta0: material.req("theta0")?,
        };
        material.finish()?;

        let kind: String = path.req("kind")?;
        let scan = match kind.as_str() {
            "circular_arc" => ScanPath::CircularArc {
                center: path.req_pair("center")?,
                radius: path.req("radius")?,
                start_angle: path.req("start_angle")?,
                angular_speed: path.req("angular_speed")?,
                sweep: path.req("sweep")?,
            },
            "alternating_tracks" => ScanPath::AlternatingTracks {
                origin: path.req_pair("origin")?,
                track_length: path.req("track_length")?,
                hatch: path.req("hatch")?,
                n_tracks: path.req("n_tracks")?,
                speed: path.req("speed")?,
            },
            "polyline" => {
                let pts: String = path.req("waypoints")?;
                let waypoints = pts.split(';').map(|p| parse_pair("waypoints", p)).collect::<Result<Vec<_>>>()?;
                let sp: String = path.req("speeds")?;
                let speeds = sp.split(',').map(|s| parse_value("speeds", s.trim())).collect::<Result<Vec<f64>>>()?;
                ScanPath::Polyline { waypoints, speeds }
            }
            other => return Err(Error::Config(format!("unknown path kind {other:?}"))),
        };
        path.finish()?;

        let src = HeatSource {
            power: source.req("power")?,
            absorptivity: source.req("absorptivity")?,
            radius: source.req("radius")?,
            path: scan,
        };
        source.finish()?;

        let dt: f64 = run.req("dt")?;
        let n_steps = match (run.opt::<usize>("n_steps")?, run.opt::<f64>("t_end")?) {
            (Some(n), None) => n,
            (None, Some(t_end)) => (t_end / dt - 1e-9).ceil().max(0.0) as usize,
            _ => return Err(Error::Config("[run] needs exactly one of n_steps and t_end".into())),
        };
        let cfg = SimulationConfig {
            degree: run.req("degree")?,
            base_cells: run.opt("base_cells")?.unwrap_or(1),
            max_levels: run.req("max_levels")?,
            m: run.opt("m")?.unwrap_or(2),
            alpha_r: run.req("alpha_r")?,
            alpha_c: run.req("alpha_c")?,
            dt,
            n_steps,
            tol: run.opt("tol")?.unwrap_or(0.0),
            i_max_first: run.opt("i_max_first")?,
            i_max_rest: run.opt("i_max_rest")?.unwrap_or(2),
            side_length: run.req("side_length")?,
            mode: run.opt("mode")?.unwrap_or(Mode::Adaptive),
            material: mat,
            source: src,
            sample_n: run.opt("sample_n")?.unwrap_or(101),
            n_gauss: run.opt("n_gauss")?,
            solver_tol: run.opt("solver_tol")?.unwrap_or(1e-10),
            coarsen: run.opt("coarsen")?.unwrap_or(true),
            snapshot_every: run.opt("snapshot_every")?.unwrap_or(1),
        };
        run.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes to the format accepted by [`SimulationConfig::parse`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let m = &self.material;
        let _ = writeln!(s, "[material]");
        let _ = writeln!(s, "conductivity = {}", m.conductivity);
        let _ = writeln!(s, "specific_heat = {}", m.specific_heat);
        let _ = writeln!(s, "density = {}", m.density);
        let _ = writeln!(s, "theta0 = {}", m.theta0);
        let src = &self.source;
        let _ = writeln!(s, "\n[source]");
        let _ = writeln!(s, "power = {}", src.power);
        let _ = writeln!(s, "absorptivity = {}", src.absorptivity);
        let _ = writeln!(s, "radius = {}", src.radius);
        let _ = writeln!(s, "\n[path]");
        match &src.path {
            ScanPath::CircularArc { center, radius, start_angle, angular_speed, sweep } => {
                let _ = writeln!(s, "kind = circular_arc");
                let _ = writeln!(s, "center = {}, {}", center[0], center[1]);
                let _ = writeln!(s, "radius = {radius}");
                let _ = writeln!(s, "start_angle = {start_angle}");
                let _ = writeln!(s, "angular_speed = {angular_speed}");
                let _ = writeln!(s, "sweep = {sweep}");
            }
            ScanPath::AlternatingTracks { origin, track_length, hatch, n_tracks, speed } => {
                let _ = writeln!(s, "kind = alternating_tracks");
                let _ = writeln!(s, "origin = {}, {}", origin[0], origin[1]);
                let _ = writeln!(s, "track_length = {track_length}");
                let _ = writeln!(s, "hatch = {hatch}");
                let _ = writeln!(s, "n_tracks = {n_tracks}");
                let _ = writeln!(s, "speed = {speed}");
            }
            ScanPath::Polyline { waypoints, speeds } => {
                let pts: Vec<String> = waypoints.iter().map(|p| format!("{}, {}", p[0], p[1])).collect();
                let sp: Vec<String> = speeds.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "kind = polyline");
                let _ = writeln!(s, "waypoints = {}", pts.join("; "));
                let _ = writeln!(s, "speeds = {}", sp.join(", "));
            }
        }
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "mode = {}", self.mode);
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "base_cells = {}", self.base_cells);
        let _ = writeln!(s, "max_levels = {}", self.max_levels);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "alpha_r = {}", self.alpha_r);
        let _ = writeln!(s, "alpha_c = {}", self.alpha_c);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "n_steps = {}", self.n_steps);
        let _ = writeln!(s, "tol = {}", self.tol);
        if let Some(i) = self.i_max_first {
            let _ = writeln!(s, "i_max_first = {i}");
        }
        let _ = writeln!(s, "i_max_rest = {}", self.i_max_rest);
        let _ = writeln!(s, "side_length = {}", self.side_length);
        let _ = writeln!(s, "sample_n = {}", self.sample_n);
        if let Some(g) = self.n_gauss {
            let _ = writeln!(s, "n_gauss = {g}");
        }
        let _ = writeln!(s, "solver_tol = {}", self.solver_tol);
        let _ = writeln!(s, "coarsen = {}", self.coarsen);
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        s
    }
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if out.contains_key(&name) {
                return Err(Error::Config(format!("line {}: duplicate section [{name}]", no + 1)));
            }
            out.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let section =
            current.as_ref().ok_or_else(|| Error::Config(format!("line {}: key outside of a section", no + 1)))?;
        let table = out.get_mut(section).unwrap();
        if table.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {}", no + 1, k.trim())));
        }
    }
    Ok(out)
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

fn parse_pair(key: &str, v: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([parse_value(key, a)?, parse_value(key, b)?]),
        _ => Err(Error::Config(format!("{key} expects two comma-separated numbers, got {v:?}"))),
    }
}

/// Keys of one section, consumed as they are read.
struct Table {
    name: &'static str,
    entries: BTreeMap<String, String>,
}

impl Table {
    fn new(name: &'static str, entries: Option<&BTreeMap<String, String>>) -> Self {
        Self { name, entries: entries.cloned().unwrap_or_default() }
    }

    fn opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.entries.remove(key).map(|v| parse_value(key, &v)).transpose()
    }

    fn req<T: FromStr>(&mut self, key: &str) -> Result<T> {
        self.opt(key)?.ok_or_else(|| Error::Config(format!("[{}] is missing {key}", self.name)))
    }

    fn req_pair(&mut self, key: &str) -> Result<[f64; 2]> {
        let v: String = self.req(key)?;
        parse_pair(key, &v)
    }

    fn finish(&self) -> Result<()> {
        match self.entries.keys().next() {
            Some(k) => Err(Error::Config(format!("unknown key {k} in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

/// Bundled scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    CircularArc,
    Alternating,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular_arc" => Ok(Preset::CircularArc),
            "alternating" => Ok(Preset::Alternating),
            _ => Err(Error::Config(format!("unknown preset {s:?} (circular_arc, alternating)"))),
        }
    }
}

impl Preset {
    /// Scenario parameters; the time step moves the beam by half a spot radius.
    pub fn config(self) -> SimulationConfig {
        match self {
            Preset::CircularArc => {
                let (speed, radius, r_h) = (1.57, 2.5, 0.1);
                SimulationConfig {
                    degree: 3,
                    base_cells: 1,
                    max_levels: 7,
                    m: 2,
                    alpha_r: 0.1,
                    alpha_c: 0.25,
                    dt: 0.5 * r_h / speed,
                    n_steps: 40,
                    tol: 0.0,
                    i_max_first: None,
                    i_max_rest: 2,
                    side_length: 10.0,
                    mode: Mode::Adaptive,
                    material: Material { conductivity: 1.0, specific_heat: 1.0, density: 1.0, theta0: 20.0 },
                    source: HeatSource {
                        power: 9e5,
                        absorptivity: 0.33,
                        radius: r_h,
                        path: ScanPath::CircularArc {
                            center: [5.0, 5.0],
                            radius,
                            start_angle: PI,
                            angular_speed: speed / radius,
                            sweep: PI,
                        },
                    },
                    sample_n: 101,
                    n_gauss: None,
                    solver_tol: 1e-10,
                    coarsen: true,
                    snapshot_every: 1,
                }
            }
            Preset::Alternating => {
                let (speed, r_h) = (8.0, 0.05);
                SimulationConfig {
                    degree: 3,
                    base_cells: 1,
                    max_levels: 8,
                    m: 2,
                    alpha_r: 0.08,
                    alpha_c: 0.25,
                    dt: 0.5 * r_h / speed,
                    n_steps: 40,
                    tol: 0.0,
                    i_max_first: None,
                    i_max_rest: 2,
                    side_length: 10.0,
                    mode: Mode::Adaptive,
                    material: Material { conductivity: 29e-3, specific_heat: 650.0, density: 8440.0, theta0: 25.0 },
                    source: HeatSource {
                        power: 190.0,
                        absorptivity: 0.33,
                        radius: r_h,
                        path: ScanPath::AlternatingTracks {
                            origin: [1.0, 5.0],
                            track_length: 8.0,
                            hatch: r_h,
                            n_tracks: 4,
                            speed,
                        },
                    },
                    sample_n: 101,
                    n_gauss: None,
                    solver_tol: 1e-10,
                    coarsen: true,
                    snapshot_every: 1,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for p in [Preset::CircularArc, Preset::Alternating] {
            let cfg = p.config();
            cfg.validate().unwrap();
            assert_eq!(SimulationConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
        }
    }

    #[test]
    fn modes_parse() {
        assert_eq!("adaptive".parse::<Mode>().unwrap(), Mode::Adaptive);
        assert_eq!("uniform:5".parse::<Mode>().unwrap(), Mode::Uniform(5));
        assert_eq!("non_admissible".parse::<Mode>().unwrap(), Mode::NonAdmissible);
        assert!("uniform".parse::<Mode>().is_err());
        assert!("uniform:x".parse::<Mode>().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = Preset::CircularArc.config().to_config_string();
        let bad = text.replace("[run]", "[run]\nspeed_of_light = 3");
        let err = SimulationConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("speed_of_light"), "{err}");
        let bad = text.replace("[material]", "[material]\ncolor = red");
        assert!(SimulationConfig::parse(&bad).is_err());
        let bad = format!("{text}\n[extra]\na = 1\n");
        assert!(SimulationConfig::parse(&bad).is_err());
    }

    #[test]
    fn path_keys_depend_on_kind() {
        let text = Preset::CircularArc.config().to_config_string();
        let bad = text.replace("sweep =", "hatch = 1\nsweep =");
        assert!(SimulationConfig::parse(&bad).is_err());
    }

    #[test]
    fn t_end_sets_step_count() {
        let text = Preset::CircularArc.config().to_config_string().replace("n_steps = 40", "t_end = 0.25");
        let cfg = SimulationConfig::parse(&text).unwrap();
        assert_eq!(cfg.n_steps, (0.25 / cfg.dt).ceil() as usize);
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = Preset::CircularArc.config();
        cfg.alpha_r = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = Preset::CircularArc.config();
        cfg.m = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = Preset::CircularArc.config();
        cfg.n_gauss = Some(2);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn polyline_parses() {
        let text = Preset::CircularArc.config().to_config_string();
        let start = text.find("[path]").unwrap();
        let end = text.find("[run]").unwrap();
        let text = format!(
            "{}[path]\nkind = polyline\nwaypoints = 1, 1; 2, 1; 2, 3\nspeeds = 1, 2\n\n{}",
            &text[..start],
            &text[end..]
        );
        let cfg = SimulationConfig::parse(&text).unwrap();
        assert_eq!(
            cfg.source.path,
            ScanPath::Polyline { waypoints: vec![[1.0, 1.0], [2.0, 1.0], [2.0, 3.0]], speeds: vec![1.0, 2.0] }
        );
    }
}
