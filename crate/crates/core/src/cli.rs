// Copyright 2026 The qdyn Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The `qdyn` command line.
//!
//! Every setting is a `key=value` pair. Values come from the built-in
//! defaults, then an optional `--config` file, then `--key value` flags.
//! With `--output PATH` the result goes to `PATH` and the resolved settings
//! to `PATH.config`; otherwise the result goes to stdout and the settings to
//! stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, Command as ClapCommand};
use num_complex::Complex64;
use rand::Rng;

use crate::cooling::{run_cooling, BathSpec, CoolingSetup, Ramp, SystemEvolution};
use crate::error::{Error, Result};
use crate::gates::{apply_qft, dft_direct, qft_circuit, CircuitStats, Direction};
use crate::oracle::{SpectralOracle, MAX_ORACLE_QUBITS};
use crate::pointer::{sample_spectrum, ObservableSpec, PointerSpec};
use crate::prep::{build_split_tree, prepare_full, prepare_magnitude, TargetShape, TargetWavefunction};
use crate::propagator::{evolve, GridSpec, PotentialSpec};
use crate::state::{seeded_rng, sub_seed, RegisterLayout, RegisterRole, StateVector};

/// Setting name, default ("" for none) and help text.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("l", "7", "qubits per grid register"),
    ("box", "10", "periodic box length"),
    ("mass", "1", "particle mass"),
    ("a", "1", "integer A fixing dt = m dx^2 N / (2 pi A)"),
    ("potential", "harmonic", "free | harmonic | square-well | file"),
    ("omega", "1", "harmonic frequency"),
    ("depth", "1", "square-well depth"),
    ("width", "2", "square-well width"),
    ("potential-file", "", "phase-table file of potential energies"),
    ("target", "gaussian", "gaussian | delta | uniform | plane-wave | file"),
    ("center", "", "gaussian center (default: box middle)"),
    ("sigma", "1", "gaussian width of |psi|^2"),
    ("momentum", "0", "gaussian mean momentum"),
    ("cell", "0", "delta cell"),
    ("k", "1", "plane-wave number"),
    ("target-file", "", "index,re,im samples of the target"),
    ("quadrature", "16", "quadrature points per leaf"),
    ("ancilla-qubits", "16", "ancilla width for the target phase"),
    ("input", "", "state dump to start from"),
    ("steps", "100", "time steps"),
    ("pointer-qubits", "8", "pointer register width"),
    ("coupling", "32", "pointer coupling k"),
    ("duration", "1", "pointer coupling time t"),
    ("emin", "0", "lowest eigenvalue the pointer window must hold"),
    ("emax", "7", "highest eigenvalue the pointer window must hold"),
    ("shots", "4096", "pointer readouts"),
    ("seed", "0", "random seed"),
    ("bath-qubits", "1", "bath two-level systems"),
    ("e0", "", "largest bath gap (default: E1 - E0 of the system)"),
    ("g", "0.1", "bath coupling"),
    ("reset-period", "45", "steps between bath resets"),
    ("ramp", "constant", "constant | linear"),
    ("evolution", "exact", "system motion while cooling: exact | trotter"),
    ("cycles", "40", "cooling cycles"),
    ("initial-level", "1", "eigenstate the cooling run starts from"),
    ("qubits", "8", "register width for qft-check"),
    ("states", "10", "random states for qft-check"),
    ("output", "", "output path; PATH.config gets the resolved settings"),
];

const COMMANDS: &[&str] = &["prepare", "evolve", "spectrum", "cool", "qft-check"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Prepare,
    Evolve,
    Spectrum,
    Cool,
    QftCheck,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "prepare" => Command::Prepare,
            "evolve" => Command::Evolve,
            "spectrum" => Command::Spectrum,
            "cool" => Command::Cool,
            "qft-check" => Command::QftCheck,
            _ => return None,
        })
    }
}

/// Fully resolved scenario.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub command: Command,
    settings: BTreeMap<String, String>,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub target: TargetWavefunction,
    pub quadrature: usize,
    pub ancilla_qubits: usize,
    pub input: Option<PathBuf>,
    pub steps: usize,
    pub pointer_qubits: usize,
    pub coupling: f64,
    pub duration: f64,
    pub emin: f64,
    pub emax: f64,
    pub shots: usize,
    pub seed: u64,
    pub bath_qubits: usize,
    pub e0: Option<f64>,
    pub g: f64,
    pub reset_period: usize,
    pub ramp: Ramp,
    pub evolution: SystemEvolution,
    pub cycles: usize,
    pub initial_level: usize,
    pub qubits: usize,
    pub states: usize,
    pub output: Option<PathBuf>,
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_settings_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let file = File::open(path)
        .map_err(|e| Error::Config(vec![format!("config: cannot open {}: {e}", path.display())]))?;
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => {
                out.insert(k.trim().to_string(), v.trim().to_string());
            }
            None => errors.push(format!("config line {}: expected key=value", n + 1)),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(Error::Config(errors))
    }
}

struct Resolver<'a> {
    values: &'a BTreeMap<String, String>,
    errors: Vec<String>,
}

impl Resolver<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Option<T> {
        let raw = self.raw(key)?;
        match raw.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{key}: cannot parse '{raw}'"));
                None
            }
        }
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        let raw = self.raw(key)?;
        let p = PathBuf::from(raw);
        if !p.is_file() {
            self.errors.push(format!("{key}: file '{raw}' does not exist"));
            return None;
        }
        Some(p)
    }

    fn check<T>(&mut self, key: &str, r: Result<T>) -> Option<T> {
        r.map_err(|e| self.errors.push(format!("{key}: {e}"))).ok()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

impl ScenarioConfig {
    /// Resolves merged settings; every offending key is reported at once.
    pub fn resolve(mut settings: BTreeMap<String, String>) -> Result<Self> {
        let mut errors = Vec::new();
        for key in settings.keys() {
            if key != "command" && !KEYS.iter().any(|(k, _, _)| k == key) {
                errors.push(format!("{key}: unknown setting"));
            }
        }
        for (k, default, _) in KEYS {
            if !default.is_empty() {
                settings.entry(k.to_string()).or_insert_with(|| default.to_string());
            }
        }
        let command = match settings.get("command") {
            None => {
                errors.push(format!("command: missing, expected one of {}", COMMANDS.join(", ")));
                None
            }
            Some(c) => {
                let parsed = Command::parse(c);
                if parsed.is_none() {
                    errors.push(format!("command: unknown '{c}', expected one of {}", COMMANDS.join(", ")));
                }
                parsed
            }
        };
        let mut r = Resolver { values: &settings, errors };

        let l: Option<usize> = r.parse("l");
        let box_len: Option<f64> = r.parse("box");
        let mass: Option<f64> = r.parse("mass");
        let a: Option<u64> = r.parse("a");
        let grid = match (l, box_len, mass, a) {
            (Some(l), Some(b), Some(m), Some(a)) => r.check("l", GridSpec::with_box(l, b, m, a)),
            _ => None,
        };

        let omega: Option<f64> = r.parse("omega");
        let depth: Option<f64> = r.parse("depth");
        let width: Option<f64> = r.parse("width");
        let potential_file = r.path("potential-file");
        let potential = match (grid, r.raw("potential").map(str::to_string)) {
            (Some(g), Some(kind)) => match kind.as_str() {
                "free" => Some(PotentialSpec::free(&g)),
                "harmonic" => omega.and_then(|w| r.check("omega", PotentialSpec::harmonic(&g, w))),
                "square-well" => match (depth, width) {
                    (Some(d), Some(w)) => r.check("depth", PotentialSpec::square_well(&g, d, w)),
                    _ => None,
                },
                "file" => match potential_file.clone() {
                    Some(p) => r.check("potential-file", open(&p).and_then(|f| PotentialSpec::read(f, &g))),
                    None => {
                        r.errors.push("potential-file: required for potential=file".into());
                        None
                    }
                },
                other => {
                    r.errors.push(format!("potential: unknown '{other}'"));
                    None
                }
            },
            _ => None,
        };

        let center: Option<f64> = r.parse("center");
        let sigma: Option<f64> = r.parse("sigma");
        let momentum: Option<f64> = r.parse("momentum");
        let cell: Option<usize> = r.parse("cell");
        let k: Option<i64> = r.parse("k");
        let target_file = r.path("target-file");
        let target = match (grid, r.raw("target").map(str::to_string)) {
            (Some(g), Some(kind)) => {
                let bl = g.box_length();
                let shape = match kind.as_str() {
                    "gaussian" => match (sigma, momentum) {
                        (Some(sigma), Some(momentum)) => {
                            Some(TargetShape::Gaussian { center: center.unwrap_or(bl / 2.0), sigma, momentum })
                        }
                        _ => None,
                    },
                    "delta" => cell.map(|cell| TargetShape::Delta { cell }),
                    "uniform" => Some(TargetShape::Uniform),
                    "plane-wave" => k.map(|k| TargetShape::PlaneWave { k }),
                    "file" => None,
                    other => {
                        r.errors.push(format!("target: unknown '{other}'"));
                        None
                    }
                };
                if kind == "file" {
                    match target_file.clone() {
                        Some(p) => r.check("target-file", open(&p).and_then(|f| TargetWavefunction::read_samples(f, bl))),
                        None => {
                            r.errors.push("target-file: required for target=file".into());
                            None
                        }
                    }
                } else {
                    shape.and_then(|s| r.check("target", TargetWavefunction::new(s, bl)))
                }
            }
            _ => None,
        };

        let quadrature = r.parse("quadrature");
        let ancilla_qubits = r.parse("ancilla-qubits");
        let input = r.path("input");
        let steps = r.parse("steps");
        let pointer_qubits = r.parse("pointer-qubits");
        let coupling = r.parse("coupling");
        let duration = r.parse("duration");
        let emin = r.parse("emin");
        let emax = r.parse("emax");
        let shots = r.parse("shots");
        let seed = r.parse("seed");
        let bath_qubits = r.parse("bath-qubits");
        let e0 = r.parse("e0");
        let g = r.parse("g");
        let reset_period = r.parse("reset-period");
        let ramp = match r.raw("ramp") {
            Some("constant") => Some(Ramp::Constant),
            Some("linear") => Some(Ramp::Linear),
            other => {
                r.errors.push(format!("ramp: unknown '{}'", other.unwrap_or("")));
                None
            }
        };
        let evolution = match r.raw("evolution") {
            Some("exact") => Some(SystemEvolution::Exact),
            Some("trotter") => Some(SystemEvolution::Trotter),
            other => {
                r.errors.push(format!("evolution: unknown '{}'", other.unwrap_or("")));
                None
            }
        };
        let cycles = r.parse("cycles");
        let initial_level = r.parse("initial-level");
        let qubits = r.parse("qubits");
        let states = r.parse("states");
        let output = r.raw("output").map(PathBuf::from);

        if let Some(q) = quadrature {
            if q == 0 {
                r.errors.push("quadrature: must be at least 1".into());
            }
        }
        let errors = r.errors;
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let missing = || Error::Config(vec!["incomplete configuration".into()]);
        Ok(ScenarioConfig {
            command: command.ok_or_else(missing)?,
            grid: grid.ok_or_else(missing)?,
            potential: potential.ok_or_else(missing)?,
            target: target.ok_or_else(missing)?,
            quadrature: quadrature.ok_or_else(missing)?,
            ancilla_qubits: ancilla_qubits.ok_or_else(missing)?,
            input,
            steps: steps.ok_or_else(missing)?,
            pointer_qubits: pointer_qubits.ok_or_else(missing)?,
            coupling: coupling.ok_or_else(missing)?,
            duration: duration.ok_or_else(missing)?,
            emin: emin.ok_or_else(missing)?,
            emax: emax.ok_or_else(missing)?,
            shots: shots.ok_or_else(missing)?,
            seed: seed.ok_or_else(missing)?,
            bath_qubits: bath_qubits.ok_or_else(missing)?,
            e0,
            g: g.ok_or_else(missing)?,
            reset_period: reset_period.ok_or_else(missing)?,
            ramp: ramp.ok_or_else(missing)?,
            evolution: evolution.ok_or_else(missing)?,
            cycles: cycles.ok_or_else(missing)?,
            initial_level: initial_level.ok_or_else(missing)?,
            qubits: qubits.ok_or_else(missing)?,
            states: states.ok_or_else(missing)?,
            output,
            settings,
        })
    }

    /// Resolved settings as `key=value` lines, followed by the derived grid
    /// quantities.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        if let Some(c) = self.settings.get("command") {
            s.push_str(&format!("command={c}\n"));
        }
        for (k, _, _) in KEYS {
            if let Some(v) = self.settings.get(*k) {
                s.push_str(&format!("{k}={v}\n"));
            }
        }
        s.push_str(&format!("points={}\n", self.grid.points()));
        s.push_str(&format!("dx={:?}\n", self.grid.dx()));
        s.push_str(&format!("dt={:?}\n", self.grid.dt()));
        s
    }
}

fn cli() -> ClapCommand {
    let mut cmd = ClapCommand::new("qdyn")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Gate-level simulation of quantum particles on qubit registers")
        .arg(Arg::new("command").value_name("COMMAND").help(COMMANDS.join(" | ")))
        .arg(Arg::new("config").long("config").value_name("FILE").help("key=value settings file"));
    for (key, default, help) in KEYS {
        let help = if default.is_empty() { help.to_string() } else { format!("{help} [default: {default}]") };
        cmd = cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .allow_negative_numbers(true)
                .action(ArgAction::Set)
                .help(help),
        );
    }
    cmd
}

/// Defaults, then the config file, then flags.
pub fn parse_args<I, T>(args: I) -> std::result::Result<Result<ScenarioConfig>, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = cli().try_get_matches_from(args)?;
    let mut settings = match matches.get_one::<String>("config") {
        Some(path) => match read_settings_file(Path::new(path)) {
            Ok(s) => s,
            Err(e) => return Ok(Err(e)),
        },
        None => BTreeMap::new(),
    };
    if let Some(c) = matches.get_one::<String>("command") {
        settings.insert("command".into(), c.clone());
    }
    for (key, _, _) in KEYS {
        if let Some(v) = matches.get_one::<String>(key) {
            settings.insert(key.to_string(), v.clone());
        }
    }
    Ok(ScenarioConfig::resolve(settings))
}

/// Files a run produced, keyed by path suffix ("" for the main output).
pub type Outputs = Vec<(&'static str, Vec<u8>)>;

/// The target loaded into a single register named `x`.
fn prepared_target(cfg: &ScenarioConfig) -> Result<StateVector> {
    let l = cfg.grid.qubits();
    let system = RegisterLayout::single("x", l, RegisterRole::System)?;
    if cfg.target.grid_phases(l).iter().all(|&p| p == 0.0) {
        let tree = build_split_tree(&cfg.target, l, cfg.quadrature)?;
        return prepare_magnitude(&system, "x", &tree);
    }
    let layout = system.with("anc", cfg.ancilla_qubits, RegisterRole::Ancilla)?;
    prepare_full(&layout, "x", &cfg.target, "anc", cfg.quadrature)?.factor_out("anc", 0)
}

fn initial_state(cfg: &ScenarioConfig) -> Result<StateVector> {
    match &cfg.input {
        Some(p) => StateVector::read_dump(open(p)?),
        None => prepared_target(cfg),
    }
}

fn single_register(state: &StateVector) -> Result<String> {
    match state.layout().registers() {
        [only] => Ok(only.name().to_string()),
        _ => Err(Error::LayoutMismatch("expected a state with exactly one register".into())),
    }
}

fn dump(state: &StateVector) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    state.write_dump(&mut buf)?;
    Ok(buf)
}

/// Runs the scenario and returns its output files.
pub fn run(cfg: &ScenarioConfig) -> Result<Outputs> {
    match cfg.command {
        Command::Prepare => Ok(vec![("", dump(&prepared_target(cfg)?)?)]),
        Command::Evolve => {
            let mut state = initial_state(cfg)?;
            let names: Vec<String> = state.layout().registers().iter().map(|r| r.name().to_string()).collect();
            let regs: Vec<&str> = names.iter().map(String::as_str).collect();
            evolve(&mut state, &regs, &cfg.grid, &cfg.potential, &[], cfg.steps)?;
            Ok(vec![("", dump(&state)?)])
        }
        Command::Spectrum => {
            let system = initial_state(cfg)?;
            let name = single_register(&system)?;
            let ptr = StateVector::new_basis_state(
                RegisterLayout::single("ptr", cfg.pointer_qubits, RegisterRole::Pointer)?,
                0,
            )?;
            let joint = system.tensor(&ptr)?;
            let obs = ObservableSpec::hamiltonian(&name, &cfg.grid, &cfg.potential)?.with_bounds(cfg.emin, cfg.emax)?;
            let spec = PointerSpec::new("ptr", cfg.coupling, cfg.duration, obs);
            let est = sample_spectrum(&joint, &spec, cfg.shots, cfg.seed)?;
            let mut buf = Vec::new();
            est.write(&mut buf)?;
            Ok(vec![("", buf)])
        }
        Command::Cool => {
            let oracle = SpectralOracle::single_particle(&cfg.grid, &cfg.potential)?;
            let system = match &cfg.input {
                Some(p) => StateVector::read_dump(open(p)?)?,
                None => {
                    let layout = RegisterLayout::single("x", cfg.grid.qubits(), RegisterRole::System)?;
                    if cfg.initial_level >= oracle.dim() {
                        return Err(Error::Domain(format!("initial level {} does not exist", cfg.initial_level)));
                    }
                    oracle.eigenstate(&layout, cfg.initial_level)?
                }
            };
            let name = single_register(&system)?;
            let e0 = cfg.e0.unwrap_or(oracle.eigenvalues()[1] - oracle.eigenvalues()[0]);
            let bath = BathSpec::new("bath", e0, cfg.g, cfg.reset_period)?
                .with_ramp(cfg.ramp)
                .with_evolution(cfg.evolution);
            let bath_state =
                StateVector::new_basis_state(RegisterLayout::single("bath", cfg.bath_qubits, RegisterRole::Bath)?, 0)?;
            let setup = CoolingSetup::new(&name, &cfg.grid, &cfg.potential, &bath)?;
            let (state, report) = run_cooling(&system.tensor(&bath_state)?, &setup, cfg.cycles, cfg.seed)?;
            let mut buf = Vec::new();
            report.write(&mut buf)?;
            Ok(vec![("", buf), (".state", dump(&state.factor_out("bath", 0)?)?)])
        }
        Command::QftCheck => {
            let l = cfg.qubits;
            let layout = RegisterLayout::single("x", l, RegisterRole::System)?;
            let mut max_dev = 0.0f64;
            for i in 0..cfg.states {
                let mut rng = seeded_rng(sub_seed(cfg.seed, i as u64));
                let amps = (0..layout.dim())
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let s = StateVector::normalized(layout.clone(), amps)?;
                let (mut a, mut b) = (s.clone(), s);
                apply_qft(&mut a, "x", Direction::Forward)?;
                dft_direct(&mut b, "x", Direction::Forward)?;
                max_dev = max_dev.max(a.max_deviation(&b)?);
            }
            let stats = CircuitStats::of(&qft_circuit(l)?);
            let line = format!(
                "qubits,states,max_deviation,controlled_phases,gates\n{l},{},{:?},{},{}\n",
                cfg.states, max_dev, stats.controlled_phase, stats.gate_count
            );
            if max_dev >= 1e-10 {
                return Err(Error::Domain(format!("QFT deviates from the direct DFT by {max_dev:e}")));
            }
            Ok(vec![("", line.into_bytes())])
        }
    }
}

fn write_outputs(cfg: &ScenarioConfig, outputs: &Outputs) -> Result<()> {
    match &cfg.output {
        Some(path) => {
            for (suffix, data) in outputs {
                let mut p = path.clone().into_os_string();
                p.push(suffix);
                std::fs::write(p, data)?;
            }
            let mut p = path.clone().into_os_string();
            p.push(".config");
            std::fs::write(p, cfg.echo())?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Some((_, data)) = outputs.first() {
                out.write_all(data)?;
            }
            eprint!("{}", cfg.echo());
        }
    }
    Ok(())
}

/// Process entry point; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(args) {
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
        Ok(Err(e)) => {
            eprintln!("qdyn: {e}");
            return 2;
        }
        Ok(Ok(cfg)) => cfg,
    };
    if cfg.grid.qubits() > MAX_ORACLE_QUBITS && matches!(cfg.command, Command::Spectrum | Command::Cool) {
        eprintln!("qdyn: l = {} exceeds the dense-oracle limit of {MAX_ORACLE_QUBITS}", cfg.grid.qubits());
        return 1;
    }
    match run(&cfg).and_then(|outputs| write_outputs(&cfg, &outputs)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qdyn: {e}");
            1
        }
    }
}
