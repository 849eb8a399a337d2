pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod perturb;
pub mod selfenergy;
pub mod specfun;
pub mod spectral;
pub mod zeno;

mod ode;
mod quad;

pub use error::{Error, Result};
pub use model::{coupling_sq, dispersion, spectrum_bounds, structure_factor, ModelParams, SpectrumBounds};
pub use specfun::{bessel_j, elliptic_e, elliptic_k, ComplexValue};
pub use selfenergy::{sigma_1d, sigma_2d, sigma_numeric, sigma_ret};
pub use spectral::{find_bound_states, spectral_density, sum_rule, two_state_threshold, weight_function, BoundState};
pub use dynamics::{
    amplitude, asymptotics, critical_field, evolve_density, master_equation_residual, rates, AmplitudeSample, Asymptotics,
    DensityMatrix2, ExactDynamics, PureState, RateSample, ResidualReport,
};
pub use perturb::{
    correlation_psi, markov_limits, short_time, weak_evolve, weak_rates, MarkovLimits, ShortTimeCoefficients, ThermalParams,
    WeakDynamics, WeakSample,
};
pub use zeno::{crossover_tau, effective_rate, effective_rates, survival, weak_effective_rate, ZenoRate};
pub use oracle::{amplitude_finite, build_hamiltonian, ArrowheadMatrix, FiniteLattice, OracleSpec, OracleSpectrum};
