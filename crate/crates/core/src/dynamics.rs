//! Relaxation of the mean atomic energy under the rate equations, solved in
//! closed form and sampled by a per-atom jump process.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::InitialState;
use crate::error::{ensure_positive, Error, Result};
use crate::rates::SpectralRates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationCurve {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub equilibrium_energy: f64,
    /// `A_up + A_down`
    pub decay_rate: f64,
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::invalid(
            "times",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    Ok(())
}

fn check_rates(sr: &SpectralRates) -> Result<()> {
    for (name, v) in [("a_down", sr.a_down), ("a_up", sr.a_up)] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid(
                name,
                format!("must be finite and >= 0, got {v}"),
            ));
        }
    }
    Ok(())
}

/// Excited-state fraction `N2(t)/N` from the population rate equations.
pub fn excited_population(
    sr: &SpectralRates,
    initial: InitialState,
    times: &[f64],
) -> Result<Vec<f64>> {
    check_rates(sr)?;
    check_times(times)?;
    let p0 = initial.excited_fraction();
    let gamma = sr.decay_rate();
    if gamma == 0.0 {
        return Ok(vec![p0; times.len()]);
    }
    let p_eq = sr.a_up / gamma;
    Ok(times
        .iter()
        .map(|&t| p_eq + (p0 - p_eq) * (-gamma * t).exp())
        .collect())
}

/// Mean energy `<H_A(t)>` relaxing towards `-omega0/2 + omega0 A_up / (A_up + A_down)`.
pub fn analytic_relaxation(
    sr: &SpectralRates,
    omega0: f64,
    initial: InitialState,
    times: &[f64],
) -> Result<RelaxationCurve> {
    ensure_positive("omega0", omega0)?;
    check_rates(sr)?;
    check_times(times)?;
    let h0 = initial.energy(omega0);
    let gamma = sr.decay_rate();
    if gamma == 0.0 {
        return Ok(RelaxationCurve {
            times: times.to_vec(),
            energy: vec![h0; times.len()],
            equilibrium_energy: h0,
            decay_rate: 0.0,
        });
    }
    let shift = omega0 * sr.a_up / gamma;
    let equilibrium_energy = -0.5 * omega0 + shift;
    let amplitude = h0 + 0.5 * omega0 - shift;
    let energy = times
        .iter()
        .map(|&t| equilibrium_energy + amplitude * (-gamma * t).exp())
        .collect();
    Ok(RelaxationCurve {
        times: times.to_vec(),
        energy,
        equilibrium_energy,
        decay_rate: gamma,
    })
}

/// `d<H_A>/dt = (omega0/2)(G- - G+) - (G- + G+) <H_A>`.
pub fn ode_rhs(sr: &SpectralRates, omega0: f64, h: f64) -> f64 {
    0.5 * omega0 * (sr.g_minus - sr.g_plus) - (sr.g_minus + sr.g_plus) * h
}

/// Classical fourth-order Runge-Kutta for [`ode_rhs`] with fixed step `dt`,
/// landing exactly on `t_end`.
pub fn integrate_energy(
    sr: &SpectralRates,
    omega0: f64,
    h0: f64,
    t_end: f64,
    dt: f64,
) -> Result<f64> {
    ensure_positive("dt", dt)?;
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::invalid(
            "t_end",
            format!("must be finite and >= 0, got {t_end}"),
        ));
    }
    let steps = (t_end / dt).ceil() as u64;
    if steps == 0 {
        return Ok(h0);
    }
    let dt = t_end / steps as f64;
    let f = |h: f64| ode_rhs(sr, omega0, h);
    let mut h = h0;
    for _ in 0..steps {
        let k1 = f(h);
        let k2 = f(h + 0.5 * dt * k1);
        let k3 = f(h + 0.5 * dt * k2);
        let k4 = f(h + dt * k3);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(h)
}

/// Ensemble counts at proper time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub n1: u64,
    pub n2: u64,
    pub seed: u64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub atoms: u64,
    pub seed: u64,
    /// Number of independent random streams the ensemble is split into.
    /// Results are reproducible for a fixed `(seed, workers)` pair.
    pub workers: usize,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            atoms: 100_000,
            seed: 0,
            workers: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloRun {
    pub times: Vec<f64>,
    pub states: Vec<EnsembleState>,
    /// Ensemble-mean energy `(omega0/N)(N2 - N1)/2`.
    pub energy: Vec<f64>,
    /// `omega0 sqrt(p (1 - p) / N)` with `p` the sampled excited fraction.
    pub standard_error: Vec<f64>,
    pub options: MonteCarloOptions,
}

fn simulate_chunk(
    sr: &SpectralRates,
    initial: InitialState,
    times: &[f64],
    atoms: u64,
    mut rng: ChaCha8Rng,
) -> Vec<u64> {
    let p0 = initial.excited_fraction();
    let wait = |excited: bool, rng: &mut ChaCha8Rng| {
        let rate = if excited { sr.a_down } else { sr.a_up };
        if rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / rate
        } else {
            f64::INFINITY
        }
    };
    let mut excited_counts = vec![0u64; times.len()];
    for _ in 0..atoms {
        let mut excited = rng.gen_bool(p0);
        let mut next_jump = wait(excited, &mut rng);
        for (count, &t) in excited_counts.iter_mut().zip(times) {
            while next_jump <= t {
                excited = !excited;
                next_jump += wait(excited, &mut rng);
            }
            *count += u64::from(excited);
        }
    }
    excited_counts
}

/// Independent two-state jump processes with exact exponential waiting
/// times, recorded on a nondecreasing time grid.
pub fn monte_carlo_relaxation(
    sr: &SpectralRates,
    omega0: f64,
    initial: InitialState,
    times: &[f64],
    options: MonteCarloOptions,
) -> Result<MonteCarloRun> {
    ensure_positive("omega0", omega0)?;
    check_rates(sr)?;
    check_times(times)?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "must be nondecreasing"));
    }
    if options.atoms == 0 {
        return Err(Error::invalid(
            "atoms",
            "ensemble must contain at least one atom",
        ));
    }
    if options.workers == 0 {
        return Err(Error::invalid("workers", "must be >= 1"));
    }

    let workers = options.workers as u64;
    let (base, extra) = (options.atoms / workers, options.atoms % workers);
    let chunks: Vec<Vec<u64>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(w);
            simulate_chunk(sr, initial, times, base + u64::from(w < extra), rng)
        })
        .collect();

    let n = options.atoms;
    let nf = n as f64;
    let mut states = Vec::with_capacity(times.len());
    let mut energy = Vec::with_capacity(times.len());
    let mut standard_error = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let n2: u64 = chunks.iter().map(|c| c[i]).sum();
        let p = n2 as f64 / nf;
        states.push(EnsembleState {
            n1: n - n2,
            n2,
            seed: options.seed,
            t,
        });
        energy.push(omega0 * (p - 0.5));
        standard_error.push(omega0 * (p * (1.0 - p) / nf).sqrt());
    }
    Ok(MonteCarloRun {
        times: times.to_vec(),
        states,
        energy,
        standard_error,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn thermal_rates(beta_omega: f64) -> SpectralRates {
        let n = 1.0 / beta_omega.exp_m1();
        SpectralRates::new(0.7 * (1.0 + n), 0.7 * n).unwrap()
    }

    #[test]
    fn zero_temperature_decay() {
        let sr = SpectralRates::new(0.4, 0.0).unwrap();
        let times = [0.0, 1.0, 3.0];
        let c = analytic_relaxation(&sr, 2.0, InitialState::Excited, &times).unwrap();
        assert_eq!(c.equilibrium_energy, -1.0);
        for (t, e) in times.iter().zip(&c.energy) {
            assert_relative_eq!(*e, -1.0 + 2.0 * (-0.4 * t).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn thermal_equilibrium_is_gibbs() {
        for &bw in &[0.1, 0.5, 1.0, 2.0, 7.0] {
            let c =
                analytic_relaxation(&thermal_rates(bw), 1.0, InitialState::Ground, &[]).unwrap();
            assert_relative_eq!(
                c.equilibrium_energy,
                -0.5 * (0.5 * bw).tanh(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn initial_value_is_exact() {
        let sr = SpectralRates::new(0.3, 0.1).unwrap();
        for init in [
            InitialState::Excited,
            InitialState::Ground,
            InitialState::mixed(0.25).unwrap(),
        ] {
            let c = analytic_relaxation(&sr, 1.0, init, &[0.0]).unwrap();
            assert!((c.energy[0] - init.energy(1.0)).abs() <= 1e-16);
        }
    }

    #[test]
    fn degenerate_rates_give_constant_curve() {
        let sr = SpectralRates::new(0.0, 0.0).unwrap();
        let c = analytic_relaxation(&sr, 1.0, InitialState::Excited, &[0.0, 10.0]).unwrap();
        assert_eq!(c.energy, vec![0.5, 0.5]);
        assert_eq!(c.decay_rate, 0.0);
        let mc = monte_carlo_relaxation(
            &sr,
            1.0,
            InitialState::Excited,
            &[0.0, 5.0, 50.0],
            MonteCarloOptions {
                atoms: 100,
                seed: 3,
                workers: 2,
            },
        )
        .unwrap();
        assert!(mc.states.iter().all(|s| s.n2 == 100 && s.n1 == 0));
    }

    #[test]
    fn population_and_energy_forms_agree() {
        let sr = thermal_rates(0.8);
        let times: Vec<f64> = (0..50).map(|k| 0.1 * k as f64).collect();
        let init = InitialState::mixed(0.9).unwrap();
        let p = excited_population(&sr, init, &times).unwrap();
        let c = analytic_relaxation(&sr, 1.5, init, &times).unwrap();
        for (pk, ek) in p.iter().zip(&c.energy) {
            let via_population = 1.5 * (pk - 0.5);
            assert!((via_population - ek).abs() <= 1e-14 * 1.5);
        }
    }

    #[test]
    fn ode_rhs_reproduces_energy_rates() {
        let sr = thermal_rates(1.3);
        let omega0 = 1.7;
        let er = crate::rates::energy_rates(&sr, omega0);
        assert_eq!(ode_rhs(&sr, omega0, 0.5 * omega0), er.total_excited);
        assert_eq!(ode_rhs(&sr, omega0, -0.5 * omega0), er.total_ground);
        let eq = analytic_relaxation(&sr, omega0, InitialState::Ground, &[])
            .unwrap()
            .equilibrium_energy;
        assert!(ode_rhs(&sr, omega0, eq).abs() < 1e-15);
    }

    #[test]
    fn rk4_matches_closed_form() {
        let sr = thermal_rates(0.6);
        let gamma = sr.decay_rate();
        let t_end = 5.0 / gamma;
        let h = integrate_energy(&sr, 1.0, 0.5, t_end, 1e-3 / gamma).unwrap();
        let exact = analytic_relaxation(&sr, 1.0, InitialState::Excited, &[t_end])
            .unwrap()
            .energy[0];
        assert_relative_eq!(h, exact, max_relative = 1e-8);
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed_and_workers() {
        let sr = thermal_rates(1.0);
        let times = [0.5, 1.0, 2.0];
        let opts = MonteCarloOptions {
            atoms: 5000,
            seed: 11,
            workers: 4,
        };
        let a = monte_carlo_relaxation(&sr, 1.0, InitialState::Excited, &times, opts).unwrap();
        let b = monte_carlo_relaxation(&sr, 1.0, InitialState::Excited, &times, opts).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_relaxation(
            &sr,
            1.0,
            InitialState::Excited,
            &times,
            MonteCarloOptions { seed: 12, ..opts },
        )
        .unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn monte_carlo_tracks_analytic_curve() {
        let sr = thermal_rates(1.0);
        let gamma = sr.decay_rate();
        let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25 / gamma).collect();
        let mc = monte_carlo_relaxation(
            &sr,
            1.0,
            InitialState::Excited,
            &times,
            MonteCarloOptions {
                atoms: 20_000,
                seed: 5,
                workers: 4,
            },
        )
        .unwrap();
        let exact = analytic_relaxation(&sr, 1.0, InitialState::Excited, &times).unwrap();
        for i in 0..times.len() {
            assert!((mc.energy[i] - exact.energy[i]).abs() <= 4.0 * mc.standard_error[i]);
            assert_eq!(mc.states[i].n1 + mc.states[i].n2, 20_000);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sr = thermal_rates(1.0);
        let opts = MonteCarloOptions {
            atoms: 0,
            ..Default::default()
        };
        assert!(monte_carlo_relaxation(&sr, 1.0, InitialState::Ground, &[1.0], opts).is_err());
        assert!(monte_carlo_relaxation(
            &sr,
            1.0,
            InitialState::Ground,
            &[2.0, 1.0],
            Default::default()
        )
        .is_err());
        assert!(analytic_relaxation(&sr, 1.0, InitialState::Ground, &[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn energy_stays_in_band(gp in 0.0f64..5.0, gm in 0.0f64..5.0, f in 0.0f64..=1.0, t in 0.0f64..100.0) {
            let sr = SpectralRates::new(gp, gm).unwrap();
            let c = analytic_relaxation(&sr, 1.0, InitialState::mixed(f).unwrap(), &[t]).unwrap();
            prop_assert!(c.energy[0] >= -0.5 - 1e-15 && c.energy[0] <= 0.5 + 1e-15);
        }
    }
}
