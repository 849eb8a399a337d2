use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magnon_bath::ModelParams;

use crate::grid::Grid;

/// Non-Markovian dynamics of a two-level impurity in a ferromagnetic magnon bath.
#[derive(Debug, Parser)]
#[command(name = "magnon-bath", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// Energies and times as given.
    Raw,
    /// Energies in units of J, times in units of 1/J.
    #[value(name = "J")]
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Model {
    /// Lattice dimension (1, 2 or 3).
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Exchange coupling.
    #[arg(long = "J", default_value_t = 1.0)]
    pub j: f64,
    /// Spin length.
    #[arg(long = "S", default_value_t = 1.0)]
    pub s: f64,
    /// Easy-axis anisotropy γ_z.
    #[arg(long = "gz", default_value_t = 1.0)]
    pub gamma_z: f64,
    /// Magnetic field.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub h: f64,
    /// Impurity level spacing.
    #[arg(long, default_value_t = 3.0)]
    pub omega0: f64,
    /// Impurity–lattice coupling.
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub model: Model,
    #[arg(long, value_enum, default_value_t = Units::Raw)]
    pub units: Units,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat JSON object of flag names to values; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    /// Energy unit: J with `--units J`, else 1.
    pub fn energy_unit(&self) -> f64 {
        match self.units {
            Units::J => self.model.j,
            Units::Raw => 1.0,
        }
    }

    pub fn params(&self) -> magnon_bath::Result<ModelParams> {
        let m = &self.model;
        let e = self.energy_unit();
        ModelParams::new(m.d, m.j, m.s, m.gamma_z, m.h * e, m.omega0 * e, m.g * e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    H,
    Omega0,
    G,
    #[value(name = "gz")]
    GammaZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observable {
    /// Golden-rule κ and ξ.
    Markov,
    /// Γ, Δ and τ_D.
    ShortTime,
    /// Bound-state energies and weights.
    BoundStates,
    /// Bound weights plus continuum integral.
    SumRule,
    /// Exact ρ11 at `--t` from the excited state.
    Rho11,
    /// Weak-coupling Zeno crossover interval.
    ZenoCrossover,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retarded self-energy Σ(ε + i0⁺) on an energy grid.
    SelfEnergy {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        eps_grid: Grid,
        /// Broadening for the Brillouin-zone quadrature; implied for d = 3.
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Bound states outside the continuum.
    BoundStates {
        #[command(flatten)]
        common: Common,
    },
    /// Exact amplitude φ(t), with the short-time Gaussian e^{−2t²/τ_D²}.
    Amplitude {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_grid: Grid,
    },
    /// Exact decay rate κ(t) and Lamb shift ξ(t).
    Rates {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_grid: Grid,
        /// Add |φ|² and the bound-state asymptotic forms.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Exact reduced density matrix.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_grid: Grid,
        /// Real initial amplitude of the excited level.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        alpha_plus: f64,
        /// Real initial amplitude of the ground level.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_minus: f64,
    },
    /// Second-order (weak-coupling) rates and populations.
    Perturbative {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_grid: Grid,
        /// Bath temperature (k_B = 1).
        #[arg(long, default_value_t = 0.0)]
        temperature: f64,
        /// Initial excited-state population.
        #[arg(long, default_value_t = 1.0)]
        rho11: f64,
        /// Add the exact κ and ρ11 for comparison.
        #[arg(long)]
        with_exact: bool,
    },
    /// Golden-rule limits of κ and ξ.
    Markov {
        #[command(flatten)]
        common: Common,
    },
    /// Field h_cri of fastest decay, per impurity energy.
    CriticalField {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        h_grid: Grid,
        /// Impurity energies; defaults to `--omega0`.
        #[arg(long, allow_hyphen_values = true)]
        omega0_grid: Option<Grid>,
        /// Time at which ρ11 is compared.
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
    },
    /// Repeated-measurement effective rates.
    Zeno {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau_grid: Grid,
    },
    /// Continuum amplitude against finite-lattice diagonalisation.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_grid: Grid,
        /// Sites per axis.
        #[arg(long, default_value_t = 1024)]
        n_modes: usize,
    },
    /// One observable over a parameter grid, computed in parallel.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        over: SweepParam,
        #[arg(long, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long, value_enum)]
        observable: Observable,
        /// Evaluation time for time-dependent observables.
        #[arg(long, default_value_t = 10.0)]
        t: f64,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::SelfEnergy { common, .. }
            | Command::BoundStates { common }
            | Command::Amplitude { common, .. }
            | Command::Rates { common, .. }
            | Command::Evolve { common, .. }
            | Command::Perturbative { common, .. }
            | Command::Markov { common }
            | Command::CriticalField { common, .. }
            | Command::Zeno { common, .. }
            | Command::OracleCompare { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }
}
