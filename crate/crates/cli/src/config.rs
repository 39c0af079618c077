use std::fmt;
use std::path::PathBuf;

use nicrn::network::{parse_document, parse_network, EnergyMode};
use nicrn::thermo::State;
use nicrn::Network;

use crate::{Cli, CliCommand, Format, InitialArgs};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Validate,
    Matrices,
    Balance,
    Equilibrium,
    Simulate {
        t_end: f64,
        rtol: f64,
        atol: f64,
        out: Option<PathBuf>,
        sweep: usize,
        seed: u64,
    },
}

/// A resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub input: PathBuf,
    pub u0: Option<f64>,
    pub n0: Option<Vec<f64>>,
    pub format: Format,
}

/// Problems with the input file or the arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<nicrn::Error> for ConfigError {
    fn from(e: nicrn::Error) -> Self {
        Self(e.to_string())
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, ConfigError> {
        let mut format = cli.format;
        let none = InitialArgs { u0: None, n0: None };
        let (command, input, initial) = match cli.command {
            CliCommand::Validate { file } => (Command::Validate, file, none),
            CliCommand::Matrices { file, json } => {
                if json {
                    format = Format::Json;
                }
                (Command::Matrices, file, none)
            }
            CliCommand::Balance { file } => (Command::Balance, file, none),
            CliCommand::Equilibrium { file, initial } => (Command::Equilibrium, file, initial),
            CliCommand::Simulate {
                file,
                initial,
                t_end,
                out,
                rtol,
                atol,
                sweep,
                seed,
            } => {
                if !(t_end > 0.0 && t_end.is_finite()) {
                    return Err(ConfigError(format!("--t-end must be positive, got {t_end}")));
                }
                if !(rtol > 0.0 && atol > 0.0) {
                    return Err(ConfigError("--rtol and --atol must be positive".into()));
                }
                (
                    Command::Simulate {
                        t_end,
                        rtol,
                        atol,
                        out,
                        sweep,
                        seed,
                    },
                    file,
                    initial,
                )
            }
        };
        Ok(Self {
            command,
            input,
            u0: initial.u0,
            n0: initial.n0,
            format,
        })
    }

    fn read(&self) -> Result<String, ConfigError> {
        std::fs::read_to_string(&self.input).map_err(|e| ConfigError(format!("{}: {e}", self.input.display())))
    }

    /// Parses without enforcing the conditions.
    pub fn load_document(&self) -> Result<Network, ConfigError> {
        Ok(parse_document::<f64>(&self.read()?)?)
    }

    /// Parses and enforces the conditions. A failing condition is not a
    /// configuration problem, so it is returned in the inner result.
    pub fn load_network(&self) -> Result<Result<Network, nicrn::Error>, ConfigError> {
        let text = self.read()?;
        parse_document::<f64>(&text)?;
        Ok(parse_network::<f64>(&text))
    }

    /// The initial state given by `--U0` and `--N0`.
    pub fn initial_state(&self, spec: &Network) -> Result<State<f64>, ConfigError> {
        let n0 = self.n0.clone().ok_or_else(|| ConfigError("--N0 is required".into()))?;
        if n0.len() != spec.n_species() {
            return Err(ConfigError(format!(
                "--N0 has {} entries but the network has {} species",
                n0.len(),
                spec.n_species()
            )));
        }
        let u0 = match (self.u0, spec.energy_mode) {
            (Some(u), _) => u,
            (None, EnergyMode::Isothermal) => spec.thermo.internal_energy(spec.bath_temperature(), &n0),
            (None, EnergyMode::Isolated) => return Err(ConfigError("--U0 is required".into())),
        };
        let state = State::new(u0, n0);
        spec.thermo.temperature_of(&state)?;
        if spec.energy_mode == EnergyMode::Isothermal {
            let surface = spec.thermo.internal_energy(spec.bath_temperature(), &state.amounts);
            if (state.energy - surface).abs() > 1e-9 * (1.0 + surface.abs()) {
                return Err(ConfigError(format!(
                    "isothermal networks need U0 = N0^T u(T_env) = {surface}, got {u0}"
                )));
            }
        }
        Ok(state)
    }
}
