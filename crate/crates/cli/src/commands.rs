use magnon_bath::{
    asymptotics, critical_field, crossover_tau, effective_rates, find_bound_states, markov_limits, short_time,
    sigma_numeric, sigma_ret, sum_rule, weak_effective_rate, DensityMatrix2, Error, ExactDynamics, FiniteLattice,
    ModelParams, OracleSpec, PureState, Result, ThermalParams, WeakDynamics,
};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::args::{Command, Observable, SweepParam};
use crate::table::{Cell, Table};

/// Default broadening for the quadrature route in d = 3.
const NU_DEFAULT: f64 = 1e-6;

pub fn run(cmd: &Command) -> Result<Table> {
    let common = cmd.common();
    let e = common.energy_unit();
    let p = common.params()?;
    // Times are read in 1/J when energies are in J.
    let t_in = |t: f64| t / e;
    match cmd {
        Command::SelfEnergy { eps_grid, nu, .. } => self_energy(&p, &eps_grid.scaled(e).points(), *nu, e),
        Command::BoundStates { .. } => {
            let mut table = Table::new(&["index", "energy", "weight"]);
            for (i, s) in find_bound_states(&p)?.iter().enumerate() {
                table.push(vec![i.into(), (s.energy / e).into(), s.weight.into()]);
            }
            Ok(table)
        }
        Command::Amplitude { t_grid, .. } => {
            let ts = t_grid.scaled(1.0 / e).points();
            let tau_d = short_time(&p, &ThermalParams::ZERO)?.tau_d;
            let dynamics = ExactDynamics::new(&p, horizon(&ts))?;
            let mut table = Table::new(&["t", "re", "im", "abs2", "short_time"]);
            for a in dynamics.amplitudes(&ts)? {
                let gauss = (-2.0 * (a.t / tau_d).powi(2)).exp();
                table.push(vec![(a.t * e).into(), a.phi.re.into(), a.phi.im.into(), a.phi.norm_sqr().into(), gauss.into()]);
            }
            Ok(table)
        }
        Command::Rates { t_grid, asymptotic, .. } => {
            let ts = t_grid.scaled(1.0 / e).points();
            let dynamics = ExactDynamics::new(&p, horizon(&ts))?;
            let amps = dynamics.amplitudes(&ts)?;
            let rates = dynamics.rates_on(&ts)?;
            let mut table = if *asymptotic {
                Table::new(&["t", "kappa", "xi", "singular", "abs2", "abs2_asym", "kappa_asym"])
            } else {
                Table::new(&["t", "kappa", "xi", "singular"])
            };
            let asy = if *asymptotic { Some(asymptotics(&p)?) } else { None };
            for (r, a) in rates.iter().zip(&amps) {
                let mut row = vec![(r.t * e).into(), (r.kappa / e).into(), (r.xi / e).into(), r.singular.into()];
                if let Some(asy) = &asy {
                    row.extend([a.phi.norm_sqr().into(), asy.population(r.t).into(), (asy.kappa(r.t) / e).into()]);
                }
                table.push(row);
            }
            Ok(table)
        }
        Command::Evolve { t_grid, alpha_plus, alpha_minus, .. } => {
            let psi = PureState::new(Complex64::new(*alpha_plus, 0.0), Complex64::new(*alpha_minus, 0.0))?;
            let ts = t_grid.scaled(1.0 / e).points();
            let dynamics = ExactDynamics::new(&p, horizon(&ts))?;
            let mut table = Table::new(&["t", "rho11", "rho12_re", "rho12_im"]);
            for &t in &ts {
                let rho = dynamics.evolve(&psi, t)?;
                table.push(vec![(t * e).into(), rho.rho11.into(), rho.rho12.re.into(), rho.rho12.im.into()]);
            }
            Ok(table)
        }
        Command::Perturbative { t_grid, temperature, rho11, with_exact, .. } => {
            let tp = ThermalParams::new(temperature * e)?;
            if !(0.0..=1.0).contains(rho11) {
                return Err(Error::Domain(format!("initial population must lie in [0, 1], got {rho11}")));
            }
            let ts = t_grid.scaled(1.0 / e).points();
            let weak = WeakDynamics::new(&p, &tp, &ts)?;
            let rho0 = DensityMatrix2 { rho11: *rho11, rho12: Complex64::new((rho11 * (1.0 - rho11)).sqrt(), 0.0) };
            let rhos = weak.evolve(&rho0)?;
            let mut table = if *with_exact {
                Table::new(&["t", "kappa", "xi", "rho11", "rho12_re", "rho12_im", "kappa_exact", "rho11_exact"])
            } else {
                Table::new(&["t", "kappa", "xi", "rho11", "rho12_re", "rho12_im"])
            };
            let exact = if *with_exact {
                let dynamics = ExactDynamics::new(&p, horizon(&ts))?;
                let psi = PureState::new(Complex64::new(rho11.sqrt(), 0.0), Complex64::new((1.0 - rho11).sqrt(), 0.0))?;
                let rows = ts
                    .iter()
                    .map(|&t| Ok((dynamics.rates(t)?.kappa, dynamics.evolve(&psi, t)?.rho11)))
                    .collect::<Result<Vec<_>>>()?;
                Some(rows)
            } else {
                None
            };
            for (i, (s, rho)) in weak.samples().iter().zip(&rhos).enumerate() {
                let mut row = vec![
                    (s.t * e).into(),
                    (s.kappa / e).into(),
                    (s.xi / e).into(),
                    rho.rho11.into(),
                    rho.rho12.re.into(),
                    rho.rho12.im.into(),
                ];
                if let Some(exact) = &exact {
                    row.extend([(exact[i].0 / e).into(), exact[i].1.into()]);
                }
                table.push(row);
            }
            Ok(table)
        }
        Command::Markov { .. } => {
            let m = markov_limits(&p)?;
            let mut table = Table::new(&["kappa", "xi", "divergent"]);
            table.push(vec![(m.kappa / e).into(), (m.xi / e).into(), m.divergent.into()]);
            Ok(table)
        }
        Command::CriticalField { h_grid, omega0_grid, horizon, .. } => {
            let hs = h_grid.scaled(e).points();
            let omegas = match omega0_grid {
                Some(g) => g.scaled(e).points(),
                None => vec![p.omega0],
            };
            let mut table = Table::new(&["omega0", "h_cri", "omega0_minus_h_cri"]);
            for w in omegas {
                let q = p.with_omega0(w);
                q.validate()?;
                let h = critical_field(&q, &hs, t_in(*horizon))?.unwrap_or(f64::NAN);
                table.push(vec![(w / e).into(), (h / e).into(), ((w - h) / e).into()]);
            }
            Ok(table)
        }
        Command::Zeno { tau_grid, .. } => {
            let taus = tau_grid.scaled(1.0 / e).points();
            let eff = effective_rates(&p, &taus)?;
            let dynamics = ExactDynamics::new(&p, horizon(&taus))?;
            let weak = taus.par_iter().map(|&tau| weak_effective_rate(&p, tau)).collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["tau", "kappa", "kappa_eff", "saturated", "kappa_eff_weak"]);
            for ((z, w), &tau) in eff.iter().zip(&weak).zip(&taus) {
                let kappa = dynamics.rates(tau)?.kappa;
                table.push(vec![
                    (tau * e).into(),
                    (kappa / e).into(),
                    (z.kappa_eff / e).into(),
                    z.saturated.into(),
                    (w / e).into(),
                ]);
            }
            Ok(table)
        }
        Command::OracleCompare { t_grid, n_modes, .. } => {
            let ts = t_grid.scaled(1.0 / e).points();
            let exact = ExactDynamics::new(&p, horizon(&ts))?.amplitudes(&ts)?;
            let finite = FiniteLattice::new(&p, &OracleSpec::new(*n_modes)?)?.amplitudes(&ts);
            let mut table = Table::new(&["t", "re", "im", "re_finite", "im_finite", "abs_err"]);
            for (a, f) in exact.iter().zip(&finite) {
                table.push(vec![
                    (a.t * e).into(),
                    a.phi.re.into(),
                    a.phi.im.into(),
                    f.re.into(),
                    f.im.into(),
                    (a.phi - f).norm().into(),
                ]);
            }
            Ok(table)
        }
        Command::Sweep { over, grid, observable, t, .. } => {
            let scale = if *over == SweepParam::GammaZ { 1.0 } else { e };
            sweep(&p, *over, &grid.scaled(scale).points(), *observable, t_in(*t), e)
        }
    }
}

fn horizon(ts: &[f64]) -> f64 {
    ts.iter().copied().fold(0.0, f64::max)
}

fn self_energy(p: &ModelParams, eps: &[f64], nu: Option<f64>, e: f64) -> Result<Table> {
    let nu = match (nu, p.d) {
        (Some(nu), _) => Some(nu * e),
        (None, 3) => Some(NU_DEFAULT * e),
        (None, _) => None,
    };
    let values = eps
        .par_iter()
        .map(|&x| {
            let sigma = match nu {
                Some(nu) => sigma_numeric(p, x, nu),
                None => sigma_ret(p, x),
            };
            // Branch points on the grid are reported as NaN rather than
            // aborting the curve.
            match sigma {
                Err(Error::Singularity { .. }) => Ok(Complex64::new(f64::NAN, f64::NAN)),
                other => other,
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["eps", "re", "im"]);
    for (&x, s) in eps.iter().zip(&values) {
        table.push(vec![(x / e).into(), (s.re / e).into(), (s.im / e).into()]);
    }
    Ok(table)
}

fn with_param(p: &ModelParams, over: SweepParam, v: f64) -> ModelParams {
    let mut q = *p;
    match over {
        SweepParam::H => q.h = v,
        SweepParam::Omega0 => q.omega0 = v,
        SweepParam::G => q.g = v,
        SweepParam::GammaZ => q.gamma_z = v,
    }
    q
}

fn sweep(p: &ModelParams, over: SweepParam, values: &[f64], obs: Observable, t: f64, e: f64) -> Result<Table> {
    let columns: &[&'static str] = match obs {
        Observable::Markov => &["value", "kappa", "xi", "divergent"],
        Observable::ShortTime => &["value", "gamma", "delta", "tau_d"],
        Observable::BoundStates => &["value", "count", "energy1", "weight1", "energy2", "weight2"],
        Observable::SumRule => &["value", "total"],
        Observable::Rho11 => &["value", "rho11"],
        Observable::ZenoCrossover => &["value", "tau_star"],
    };
    let shown = |v: f64| if over == SweepParam::GammaZ { v } else { v / e };
    // Indexed parallel collect keeps the rows in grid order.
    let rows = values
        .par_iter()
        .map(|&v| {
            let q = with_param(p, over, v);
            q.validate()?;
            let mut row: Vec<Cell> = vec![shown(v).into()];
            match obs {
                Observable::Markov => {
                    let m = markov_limits(&q)?;
                    row.extend([(m.kappa / e).into(), (m.xi / e).into(), m.divergent.into()]);
                }
                Observable::ShortTime => {
                    let s = short_time(&q, &ThermalParams::ZERO)?;
                    row.extend([(s.gamma / (e * e)).into(), (s.delta / (e * e)).into(), (s.tau_d * e).into()]);
                }
                Observable::BoundStates => {
                    let states = find_bound_states(&q)?;
                    row.push(states.len().into());
                    for i in 0..2 {
                        match states.get(i) {
                            Some(s) => row.extend([(s.energy / e).into(), s.weight.into()]),
                            None => row.extend([f64::NAN.into(), f64::NAN.into()]),
                        }
                    }
                }
                Observable::SumRule => row.push(sum_rule(&q)?.into()),
                Observable::Rho11 => {
                    let a = ExactDynamics::new(&q, t)?.amplitude(t)?;
                    row.push(a.phi.norm_sqr().into());
                }
                Observable::ZenoCrossover => {
                    let tau = crossover_tau(&q)?.unwrap_or(f64::NAN);
                    row.push((tau * e).into());
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(columns);
    for row in rows {
        table.push(row);
    }
    Ok(table)
}
