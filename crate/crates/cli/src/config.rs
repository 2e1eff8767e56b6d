//! Layered run configuration: command-line flags override keys of a JSON
//! config file, which override the per-command defaults. Validation walks
//! every key and reports all problems at once.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::path::Path;

use serde_json::{json, Map, Value};
use vibron_core::model::{ChainCoefficients, HamiltonianKind, ModelParams, Normalization};
use vibron_core::phasespace::{Axis, WignerKind, PLANAR_STEP_LIMIT};
use vibron_core::protocol::InitialState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Meanfield,
    Coherent,
    Quench,
    Wigner,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Meanfield => "meanfield",
            Command::Coherent => "coherent",
            Command::Quench => "quench",
            Command::Wigner => "wigner",
            Command::Sweep => "sweep",
        }
    }

    /// Every accepted key with its default; `null` marks optional keys.
    pub fn defaults(self) -> Map<String, Value> {
        let v = match self {
            Command::Spectrum => json!({
                "hamiltonian": "essential",
                "gamma_min": 0.0,
                "gamma_max": 1.0,
                "steps": 101,
                "n": 100,
                "l": 0,
                "normalization": null,
                "w2_sign": -1.0,
                "e0": 0.0,
                "epsilon": 0.0,
                "alpha": 0.0,
                "beta": 0.0,
                "a": 0.0,
            }),
            Command::Meanfield => json!({
                "gamma": 0.5,
                "trajectories": "auto",
                "levels": 8,
                "resolution": 1024,
                "phase_space_n": null,
            }),
            Command::Coherent => json!({
                "hamiltonian": "n0_only",
                "gamma": 0.0,
                "alpha": 1.0,
                "n": 50,
                "initial": "spin_coherent",
                "theta": FRAC_PI_2,
                "phi": 0.0,
                "x": 0.0,
                "y": 0.0,
                "t_max": 2.0 * TAU,
                "points": 201,
                "normalization": null,
            }),
            Command::Quench => json!({
                "gamma": 0.3,
                "n": 1000,
                "t_max": 1000.0,
                "points": 10000,
                "normalization": null,
            }),
            Command::Wigner => json!({
                "hamiltonian": "spinor_rotated",
                "gamma": 0.5,
                "alpha": 1.0,
                "n": 50,
                "initial": "pole",
                "theta": 0.0,
                "phi": 0.0,
                "x": 0.0,
                "y": 0.0,
                "time": 0.0,
                "kind": "spherical",
                "x_min": null,
                "x_max": null,
                "x_len": null,
                "p_min": null,
                "p_max": null,
                "p_len": null,
                "theta_len": 181,
                "phi_len": 361,
                "normalization": null,
            }),
            Command::Sweep => json!({
                "gammas": null,
                "gamma_min": 0.1,
                "gamma_max": 0.3,
                "steps": 21,
                "ns": [500, 1000, 2000],
                "t_max": 1000.0,
                "points": 10000,
            }),
        };
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One offending key and the constraint it broke.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Read a config file: a JSON object whose keys are the flag names with
/// underscores. A nested object under the command name takes precedence
/// over top-level keys, so one file can serve several commands.
pub fn load_file(path: &Path, command: Command) -> Result<Map<String, Value>, Vec<ConfigError>> {
    let err = |message: String| {
        vec![ConfigError {
            key: "config".into(),
            message,
        }]
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| err(format!("invalid JSON in {}: {e}", path.display())))?;
    let Value::Object(mut top) = value else {
        return Err(err("config file must hold a JSON object".into()));
    };
    let all = [
        Command::Spectrum,
        Command::Meanfield,
        Command::Coherent,
        Command::Quench,
        Command::Wigner,
        Command::Sweep,
    ];
    let mut nested = Map::new();
    for c in all {
        if let Some(v) = top.remove(c.name()) {
            if c == command {
                match v {
                    Value::Object(m) => nested = m,
                    _ => return Err(err(format!("section `{c}` must be an object"))),
                }
            }
        }
    }
    top.extend(nested);
    Ok(top)
}

/// Merge layers in increasing precedence; unknown keys are errors.
pub fn merge(command: Command, layers: &[Map<String, Value>]) -> Result<Map<String, Value>, Vec<ConfigError>> {
    let mut out = command.defaults();
    let mut errors = Vec::new();
    for layer in layers {
        for (k, v) in layer {
            if !out.contains_key(k) {
                errors.push(ConfigError {
                    key: k.clone(),
                    message: format!("unknown key for `{command}`"),
                });
                continue;
            }
            out.insert(k.clone(), v.clone());
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Typed access that records errors instead of failing fast.
struct Reader<'a> {
    map: &'a Map<String, Value>,
    errors: Vec<ConfigError>,
}

impl<'a> Reader<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Reader { map, errors: Vec::new() }
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        self.errors.push(ConfigError {
            key: key.into(),
            message: message.into(),
        });
    }

    fn value(&self, key: &str) -> &Value {
        self.map.get(key).unwrap_or(&Value::Null)
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        match self.value(key) {
            Value::Null => None,
            v => match v.as_f64().filter(|x| x.is_finite()) {
                Some(x) => Some(x),
                None => {
                    self.fail(key, format!("{key} must be a finite number"));
                    None
                }
            },
        }
    }

    fn f64(&mut self, key: &str) -> f64 {
        if self.value(key).is_null() {
            self.fail(key, format!("{key} is required"));
            return 0.0;
        }
        self.opt_f64(key).unwrap_or(0.0)
    }

    fn f64_in(&mut self, key: &str, lo: f64, hi: f64, shown: &str) -> f64 {
        let x = self.f64(key);
        if !(lo..=hi).contains(&x) {
            self.fail(key, format!("{key} must lie in {shown}"));
        }
        x
    }

    fn positive(&mut self, key: &str) -> f64 {
        let x = self.f64(key);
        if x <= 0.0 {
            self.fail(key, format!("{key} must be positive"));
        }
        x
    }

    fn opt_int(&mut self, key: &str, min: i64) -> Option<i64> {
        match self.value(key) {
            Value::Null => None,
            v => match v.as_i64() {
                Some(x) if x >= min => Some(x),
                _ => {
                    self.fail(key, format!("{key} must be an integer >= {min}"));
                    None
                }
            },
        }
    }

    fn int(&mut self, key: &str, min: i64) -> i64 {
        if self.value(key).is_null() {
            self.fail(key, format!("{key} is required"));
            return min;
        }
        self.opt_int(key, min).unwrap_or(min)
    }

    fn n(&mut self, key: &str, min: u32) -> u32 {
        let x = self.int(key, min as i64);
        match u32::try_from(x) {
            Ok(v) => v,
            Err(_) => {
                self.fail(key, format!("{key} is too large"));
                min
            }
        }
    }

    fn str(&mut self, key: &str) -> Option<String> {
        match self.value(key) {
            Value::Null => None,
            Value::String(s) => Some(s.clone()),
            _ => {
                self.fail(key, format!("{key} must be a string"));
                None
            }
        }
    }

    fn f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.value(key) {
            Value::Null => None,
            Value::Array(items) => {
                let xs: Option<Vec<f64>> = items.iter().map(|v| v.as_f64().filter(|x| x.is_finite())).collect();
                match xs {
                    Some(xs) if !xs.is_empty() => Some(xs),
                    _ => {
                        self.fail(key, format!("{key} must be a non-empty list of numbers"));
                        None
                    }
                }
            }
            _ => {
                self.fail(key, format!("{key} must be a list"));
                None
            }
        }
    }

    fn hamiltonian(&mut self) -> HamiltonianKind {
        let s = self.str("hamiltonian").unwrap_or_default();
        match s.parse::<HamiltonianKind>() {
            Ok(k) => k,
            Err(_) => {
                let names: Vec<&str> = HamiltonianKind::ALL.iter().map(|k| k.name()).collect();
                self.fail("hamiltonian", format!("hamiltonian must be one of {}", names.join(", ")));
                HamiltonianKind::Essential
            }
        }
    }

    fn normalization(&mut self) -> Option<Normalization> {
        match self.str("normalization").as_deref() {
            None => None,
            Some("n_minus_1") => Some(Normalization::NMinus1),
            Some("n") => Some(Normalization::N),
            Some(_) => {
                self.fail("normalization", "normalization must be `n_minus_1` or `n`");
                None
            }
        }
    }

    fn gamma(&mut self) -> f64 {
        self.f64_in("gamma", 0.0, 1.0, "[0,1]")
    }

    fn initial(&mut self) -> InitialState {
        let kind = self.str("initial").unwrap_or_default();
        let (theta, phi, x, y) = (self.f64("theta"), self.f64("phi"), self.f64("x"), self.f64("y"));
        match kind.as_str() {
            "pole" => InitialState::Pole,
            "coherent" => {
                if x < 0.0 {
                    self.fail("x", "x must be non-negative; use a negative y or rotate phi instead");
                }
                InitialState::Coherent { x, y }
            }
            "spin_coherent" => {
                if !(0.0..=PI).contains(&theta) {
                    self.fail("theta", "theta must lie in [0,pi]");
                }
                if !(0.0..TAU).contains(&phi) {
                    self.fail("phi", "phi must lie in [0,2pi)");
                }
                InitialState::SpinCoherent { theta, phi }
            }
            _ => {
                self.fail("initial", "initial must be one of pole, coherent, spin_coherent");
                InitialState::Pole
            }
        }
    }

    fn finish<T>(self, value: T) -> Result<T, Vec<ConfigError>> {
        if self.errors.is_empty() {
            Ok(value)
        } else {
            Err(self.errors)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub kind: HamiltonianKind,
    pub params: ModelParams,
    pub l: i64,
    pub gammas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum Levels {
    Auto(usize),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct MeanfieldRun {
    pub gamma: f64,
    pub levels: Levels,
    pub resolution: usize,
    pub phase_space_n: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct CoherentRun {
    pub kind: HamiltonianKind,
    pub params: ModelParams,
    pub initial: InitialState,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct QuenchRun {
    pub params: ModelParams,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WignerRun {
    pub kind: HamiltonianKind,
    pub params: ModelParams,
    pub initial: InitialState,
    pub time: f64,
    pub picture: WignerKind,
    pub axes: (Axis, Axis),
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub gammas: Vec<f64>,
    pub ns: Vec<u32>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum RunConfig {
    Spectrum(SpectrumRun),
    Meanfield(MeanfieldRun),
    Coherent(CoherentRun),
    Quench(QuenchRun),
    Wigner(WignerRun),
    Sweep(SweepRun),
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn params(gamma: f64, n: u32, norm: Option<Normalization>) -> ModelParams {
    // ranges are checked by the reader; fall back to a valid gamma so the
    // remaining keys still get validated
    let mut p = ModelParams::new(gamma, n).unwrap_or_else(|_| ModelParams::new(0.5, n).expect("valid gamma"));
    p.normalization = norm;
    p
}

/// Check the merged key map and turn it into a typed run.
pub fn validate(command: Command, map: &Map<String, Value>) -> Result<RunConfig, Vec<ConfigError>> {
    let mut r = Reader::new(map);
    match command {
        Command::Spectrum => {
            let kind = r.hamiltonian();
            let lo = r.f64_in("gamma_min", 0.0, 1.0, "[0,1]");
            let hi = r.f64_in("gamma_max", 0.0, 1.0, "[0,1]");
            if hi < lo {
                r.fail("gamma_max", "gamma_max must not be below gamma_min");
            }
            let steps = r.int("steps", 1) as usize;
            let n = r.n("n", 2);
            let l = r.opt_int("l", i64::MIN).unwrap_or(0);
            if l.unsigned_abs() > n as u64 {
                r.fail("l", format!("l must lie in [-N, N] = [-{n}, {n}]"));
            }
            let norm = r.normalization();
            let sign = r.f64("w2_sign");
            if sign != 1.0 && sign != -1.0 {
                r.fail("w2_sign", "w2_sign must be +1 or -1");
            }
            let chain = ChainCoefficients {
                e0: r.f64("e0"),
                epsilon: r.f64("epsilon"),
                alpha: r.f64("alpha"),
                beta: r.f64("beta"),
                a: r.f64("a"),
            };
            if kind == HamiltonianKind::LowDepletion {
                r.fail("hamiltonian", "low_depletion lives on a Cartesian excitation window and has no l block");
            }
            let p = params(lo, n, norm).with_w2_sign(sign).with_chain(chain);
            r.finish(RunConfig::Spectrum(SpectrumRun {
                kind,
                params: p,
                l,
                gammas: grid(lo, hi, steps),
            }))
        }
        Command::Meanfield => {
            let gamma = r.gamma();
            let count = r.int("levels", 1) as usize;
            let levels = match r.value("trajectories").clone() {
                Value::String(s) if s == "auto" => Levels::Auto(count),
                Value::Array(_) => Levels::Explicit(r.f64_list("trajectories").unwrap_or_default()),
                Value::Number(n) if n.as_u64().is_some_and(|k| k > 0) => Levels::Auto(n.as_u64().unwrap_or(1) as usize),
                _ => {
                    r.fail("trajectories", "trajectories must be \"auto\", a count, or a list of energies");
                    Levels::Auto(count)
                }
            };
            let resolution = r.int("resolution", 8) as usize;
            let phase_space_n = r.opt_int("phase_space_n", 1).map(|n| n as u32);
            r.finish(RunConfig::Meanfield(MeanfieldRun {
                gamma,
                levels,
                resolution,
                phase_space_n,
            }))
        }
        Command::Coherent => {
            let kind = r.hamiltonian();
            let gamma = r.gamma();
            let alpha = r.f64("alpha");
            let n = r.n("n", 1);
            let initial = r.initial();
            let t_max = r.positive("t_max");
            let points = r.int("points", 2) as usize;
            let norm = r.normalization();
            check_kind_for_evolution(&mut r, kind, gamma);
            r.finish(RunConfig::Coherent(CoherentRun {
                kind,
                params: params(gamma, n, norm).with_alpha_n0(alpha),
                initial,
                times: vibron_core::dynamics::uniform_times(t_max, points),
            }))
        }
        Command::Quench => {
            let gamma = r.gamma();
            if gamma == 0.0 {
                r.fail(
                    "gamma",
                    "gamma = 0 is singular for the spinor quench; use the n0_only protocol (`coherent --hamiltonian n0_only`)",
                );
            }
            let n = r.n("n", 2);
            let t_max = r.positive("t_max");
            let points = r.int("points", 2) as usize;
            let norm = r.normalization();
            r.finish(RunConfig::Quench(QuenchRun {
                params: params(gamma, n, norm),
                times: vibron_core::dynamics::uniform_times(t_max, points),
            }))
        }
        Command::Wigner => {
            let kind = r.hamiltonian();
            let gamma = r.gamma();
            let alpha = r.f64("alpha");
            let n = r.n("n", 1);
            let initial = r.initial();
            let time = r.f64("time");
            if time < 0.0 {
                r.fail("time", "time must be non-negative");
            }
            let norm = r.normalization();
            check_kind_for_evolution(&mut r, kind, gamma);
            let picture = match r.str("kind").as_deref() {
                Some("planar") => WignerKind::Planar,
                Some("spherical") => WignerKind::Spherical,
                _ => {
                    r.fail("kind", "kind must be `planar` or `spherical`");
                    WignerKind::Planar
                }
            };
            let axes = match picture {
                WignerKind::Planar => {
                    // the quadrature support of |n <= N> reaches about sqrt(N)
                    let ext = (n as f64).sqrt() + 1.5;
                    let auto_len = (2.0 * ext / (0.8 * PLANAR_STEP_LIMIT)).ceil() as i64 + 1;
                    let axis = |r: &mut Reader, pre: &str| {
                        let lo = r.opt_f64(&format!("{pre}_min")).unwrap_or(-ext);
                        let hi = r.opt_f64(&format!("{pre}_max")).unwrap_or(ext);
                        let len = r.opt_int(&format!("{pre}_len"), 2).unwrap_or(auto_len) as usize;
                        Axis::new(lo, hi, len).unwrap_or_else(|e| {
                            r.fail(&format!("{pre}_max"), e.to_string());
                            Axis::new(-1.0, 1.0, 2).expect("valid axis")
                        })
                    };
                    (axis(&mut r, "x"), axis(&mut r, "p"))
                }
                WignerKind::Spherical => {
                    let tl = r.int("theta_len", 2) as usize;
                    let pl = r.int("phi_len", 2) as usize;
                    (
                        Axis::new(0.0, PI, tl).expect("valid axis"),
                        Axis::new(0.0, TAU, pl).expect("valid axis"),
                    )
                }
            };
            r.finish(RunConfig::Wigner(WignerRun {
                kind,
                params: params(gamma, n, norm).with_alpha_n0(alpha),
                initial,
                time,
                picture,
                axes,
            }))
        }
        Command::Sweep => {
            let gammas = match r.f64_list("gammas") {
                Some(g) => g,
                None => {
                    let lo = r.f64_in("gamma_min", 0.0, 1.0, "[0,1]");
                    let hi = r.f64_in("gamma_max", 0.0, 1.0, "[0,1]");
                    let steps = r.int("steps", 1) as usize;
                    grid(lo, hi, steps)
                }
            };
            if gammas.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
                r.fail("gammas", "every gamma must lie in (0,1]; gamma = 0 needs the n0_only protocol");
            }
            let ns: Vec<u32> = r
                .f64_list("ns")
                .unwrap_or_default()
                .into_iter()
                .filter_map(|x| {
                    (x.fract() == 0.0 && x >= 2.0 && x <= u32::MAX as f64).then_some(x as u32)
                })
                .collect();
            let raw_len = r.value("ns").as_array().map_or(0, |a| a.len());
            if ns.is_empty() || ns.len() != raw_len {
                r.fail("ns", "ns must be a non-empty list of integers >= 2");
            }
            let t_max = r.positive("t_max");
            let points = r.int("points", 2) as usize;
            r.finish(RunConfig::Sweep(SweepRun {
                gammas,
                ns,
                times: vibron_core::dynamics::uniform_times(t_max, points),
            }))
        }
    }
}

fn check_kind_for_evolution(r: &mut Reader, kind: HamiltonianKind, gamma: f64) {
    if kind == HamiltonianKind::SpinorRotated && gamma == 0.0 {
        r.fail(
            "gamma",
            "gamma = 0 is singular for spinor_rotated; use the n0_only protocol",
        );
    }
}
