//! Monte Carlo random-matrix model for the t-free sum.
//!
//! Simulates `diag(a) + U S diag(b) S⁻¹ U*` where `U` is a unitary Brownian
//! motion at time `t` and `S` a uniform permutation matrix, and collects the
//! empirical spectral measures across independent replicas. The path uses the
//! geometric integrator `U ← exp(iΔH)·U`, which is exactly unitary at every
//! step and weakly consistent with the Itô equation
//! `dU = i(dH)U − ½U dt` (the drift is the automatic Itô compensator of the
//! exponential step).

use faer::Mat;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

/// Parameters of one Monte Carlo run.
#[derive(Clone, Debug)]
pub struct SimulationConfig {
    /// Matrix size.
    pub n: usize,
    /// Time of the unitary Brownian motion.
    pub t: f64,
    /// Requested step size; the effective step is `max(dt, t/MAX_STEPS)`.
    pub dt: f64,
    /// Number of independent replicas.
    pub samples: usize,
    /// Base RNG seed; replica `r` uses stream `r` of this seed.
    pub seed: u64,
    /// Diagonal entries of the first matrix (length `n`).
    pub spectrum_a: Vec<f64>,
    /// Diagonal entries of the second matrix (length `n`).
    pub spectrum_b: Vec<f64>,
}

/// Cap on the number of path steps per replica. At large `t` a fixed small
/// `dt` would dominate the runtime while the weak bias of the geometric
/// scheme (O(t·dt) on observables that are themselves exponentially small in
/// `t`) stays far below Monte Carlo error.
pub const MAX_STEPS: usize = 200;

/// Default step size for a run to time `t`.
pub fn default_dt(t: f64) -> f64 {
    if t <= 0.0 {
        0.01
    } else {
        (t / 100.0).min(0.01)
    }
}

impl SimulationConfig {
    /// Bernoulli ±1 spectra of size `n` for both matrices, default `dt`.
    pub fn bernoulli(n: usize, t: f64, samples: usize, seed: u64) -> Self {
        let spectrum: Vec<f64> = (0..n).map(|i| if i < n / 2 { -1.0 } else { 1.0 }).collect();
        SimulationConfig {
            n,
            t,
            dt: default_dt(t),
            samples,
            seed,
            spectrum_a: spectrum.clone(),
            spectrum_b: spectrum,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("eigensolver failed in replica {replica}")]
    Eigensolver { replica: usize },
}

/// Uniform probability measure on the eigenvalues of one replica.
#[derive(Clone, Debug)]
pub struct EmpiricalSpectralMeasure {
    /// Sorted eigenvalues, each carrying weight 1/n.
    pub eigenvalues: Vec<f64>,
}

impl EmpiricalSpectralMeasure {
    /// k-th moment `(1/n) Σ λ_i^k`.
    pub fn moment(&self, k: u32) -> f64 {
        let n = self.eigenvalues.len() as f64;
        self.eigenvalues.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n
    }
}

/// Mean and standard error of a statistic across replicas.
#[derive(Clone, Copy, Debug)]
pub struct Statistic {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean and standard error of the mean.
pub fn statistic(values: &[f64]) -> Statistic {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0).max(1.0);
    Statistic {
        mean,
        stderr: (var / m).sqrt(),
    }
}

/// Per-moment summary `{mean, stderr}` of the empirical k-th moments.
pub fn summarize_moments(measures: &[EmpiricalSpectralMeasure], k_max: u32) -> Vec<Statistic> {
    (1..=k_max)
        .map(|k| {
            let vals: Vec<f64> = measures.iter().map(|m| m.moment(k)).collect();
            statistic(&vals)
        })
        .collect()
}

/// RNG stream for one replica: same base seed, per-replica ChaCha stream.
fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64 + 1);
    rng
}

/// Draw a Hermitian Gaussian increment with `E[tr H²] = dt` (normalized
/// trace): off-diagonal entries complex Gaussian of variance `dt/n`,
/// diagonal entries real Gaussian of variance `dt/n`.
pub fn sample_hermitian_increment(n: usize, dt: f64, rng: &mut impl Rng) -> Mat<Complex64> {
    let sd_diag = (dt / n as f64).sqrt();
    let sd_off = (dt / (2.0 * n as f64)).sqrt(); // per real component
    let mut h = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        let x: f64 = rng.sample(StandardNormal);
        h[(i, i)] = Complex64::new(sd_diag * x, 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(sd_off * re, sd_off * im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `exp(iH)` for Hermitian `H`, via the spectral decomposition. The result
/// is exactly unitary up to round-off.
fn exp_i_hermitian(h: &Mat<Complex64>) -> Result<Mat<Complex64>, ()> {
    let n = h.nrows();
    let eig = h.self_adjoint_eigen(faer::Side::Lower).map_err(|_| ())?;
    let u = eig.U();
    let s = eig.S();
    // V · diag(e^{iλ}) · V*
    let mut phase = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        let lambda = s[i].re;
        phase[(i, i)] = Complex64::new(lambda.cos(), lambda.sin());
    }
    Ok(u * phase * u.adjoint())
}

/// Run unitary Brownian motion to time `t` with step `dt` (final partial
/// step if `dt` does not divide `t`). Returns `U_{n,t}`, exactly unitary at
/// every step.
pub fn unitary_brownian_path(
    n: usize,
    t: f64,
    dt: f64,
    rng: &mut impl Rng,
) -> Result<Mat<Complex64>, ()> {
    let mut u = Mat::<Complex64>::identity(n, n);
    if t <= 0.0 {
        return Ok(u);
    }
    let mut remaining = t;
    while remaining > 1e-15 {
        let step = dt.min(remaining);
        let h = sample_hermitian_increment(n, step, rng);
        let e = exp_i_hermitian(&h)?;
        u = e * u;
        remaining -= step;
    }
    Ok(u)
}

/// One replica of the t-free sum: eigenvalues of
/// `diag(a) + U S diag(b) S⁻¹ U*` where `S` is a uniform permutation
/// (conjugating a diagonal matrix by a permutation just permutes its
/// diagonal).
fn replica_spectrum(
    config: &SimulationConfig,
    dt_eff: f64,
    replica: usize,
    trace_k_max: u32,
) -> Result<(EmpiricalSpectralMeasure, Vec<f64>), SimulationError> {
    let n = config.n;
    let mut rng = replica_rng(config.seed, replica);
    let mut b_perm = config.spectrum_b.clone();
    b_perm.shuffle(&mut rng);
    let u = unitary_brownian_path(n, config.t, dt_eff, &mut rng)
        .map_err(|_| SimulationError::Eigensolver { replica })?;
    let mut traces = Vec::with_capacity(trace_k_max as usize);
    let mut power = Mat::<Complex64>::identity(n, n);
    for _ in 0..trace_k_max {
        power = &power * &u;
        let tr: Complex64 = (0..n).map(|i| power[(i, i)]).sum();
        traces.push(tr.re / n as f64);
    }
    // M = diag(a) + U diag(b_perm) U*
    let mut diag_b = Mat::<Complex64>::zeros(n, n);
    for i in 0..n {
        diag_b[(i, i)] = Complex64::new(b_perm[i], 0.0);
    }
    let mut m = &u * diag_b * u.adjoint();
    for i in 0..n {
        m[(i, i)] += Complex64::new(config.spectrum_a[i], 0.0);
    }
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| SimulationError::Eigensolver { replica })?;
    let s = eig.S();
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((EmpiricalSpectralMeasure { eigenvalues }, traces))
}

/// Run all replicas in parallel and collect the empirical spectral measures.
pub fn simulate_tfree_sum(
    config: &SimulationConfig,
) -> Result<Vec<EmpiricalSpectralMeasure>, SimulationError> {
    Ok(simulate_with_unitary_traces(config, 0)?.0)
}

/// As `simulate_tfree_sum`, but each replica also records the normalized
/// traces `Re tr(U^k)/n` of its Brownian unitary for `k = 1..=trace_k_max`,
/// reusing the path that conjugates the second matrix. Returns the measures
/// and the per-power trace statistics across replicas.
pub fn simulate_with_unitary_traces(
    config: &SimulationConfig,
    trace_k_max: u32,
) -> Result<(Vec<EmpiricalSpectralMeasure>, Vec<Statistic>), SimulationError> {
    if config.n == 0 {
        return Err(SimulationError::InvalidConfig("n must be >= 1".into()));
    }
    if !(config.dt > 0.0) {
        return Err(SimulationError::InvalidConfig("dt must be > 0".into()));
    }
    if config.t < 0.0 {
        return Err(SimulationError::InvalidConfig("t must be >= 0".into()));
    }
    if config.spectrum_a.len() != config.n || config.spectrum_b.len() != config.n {
        return Err(SimulationError::InvalidConfig(
            "spectra must have length n".into(),
        ));
    }
    let dt_eff = config.dt.max(config.t / MAX_STEPS as f64);
    let replicas: Vec<(EmpiricalSpectralMeasure, Vec<f64>)> = (0..config.samples)
        .into_par_iter()
        .map(|r| replica_spectrum(config, dt_eff, r, trace_k_max))
        .collect::<Result<_, _>>()?;
    let trace_stats = (0..trace_k_max as usize)
        .map(|k| {
            let vals: Vec<f64> = replicas.iter().map(|(_, tr)| tr[k]).collect();
            statistic(&vals)
        })
        .collect();
    let measures = replicas.into_iter().map(|(m, _)| m).collect();
    Ok((measures, trace_stats))
}

/// Monte Carlo estimates of the normalized traces `E[tr U_{n,t}^k]`,
/// `k = 1..=k_max` (real parts; the imaginary parts average to zero).
pub fn mean_trace_powers(
    n: usize,
    t: f64,
    dt: f64,
    samples: usize,
    seed: u64,
    k_max: u32,
) -> Result<Vec<Statistic>, SimulationError> {
    let dt_eff = dt.max(t / MAX_STEPS as f64);
    let traces: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let u = unitary_brownian_path(n, t, dt_eff, &mut rng)
                .map_err(|_| SimulationError::Eigensolver { replica: r })?;
            let mut power = Mat::<Complex64>::identity(n, n);
            let mut row = Vec::with_capacity(k_max as usize);
            for _ in 0..k_max {
                power = &power * &u;
                let tr: Complex64 = (0..n).map(|i| power[(i, i)]).sum();
                row.push(tr.re / n as f64);
            }
            Ok(row)
        })
        .collect::<Result<_, SimulationError>>()?;
    Ok((0..k_max as usize)
        .map(|k| {
            let vals: Vec<f64> = traces.iter().map(|row| row[k]).collect();
            statistic(&vals)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increment_is_hermitian_exactly() {
        let mut rng = replica_rng(7, 0);
        let h = sample_hermitian_increment(20, 0.05, &mut rng);
        for i in 0..20 {
            for j in 0..20 {
                assert_eq!(h[(i, j)], h[(j, i)].conj());
            }
        }
    }

    #[test]
    fn increment_trace_square_normalization() {
        // E[tr H²] = dt, estimated over many samples.
        let n = 50;
        let dt = 0.2;
        let mut rng = replica_rng(11, 0);
        let samples = 2000;
        let vals: Vec<f64> = (0..samples)
            .map(|_| {
                let h = sample_hermitian_increment(n, dt, &mut rng);
                let mut tr2 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        tr2 += (h[(i, j)] * h[(j, i)]).re;
                    }
                }
                tr2 / n as f64
            })
            .collect();
        let s = statistic(&vals);
        assert!(
            (s.mean - dt).abs() < 3.0 * s.stderr,
            "mean {} stderr {}",
            s.mean,
            s.stderr
        );
    }

    #[test]
    fn path_at_time_zero_is_identity() {
        let mut rng = replica_rng(3, 0);
        let u = unitary_brownian_path(10, 0.0, 0.01, &mut rng).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(u[(i, j)], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn path_stays_unitary() {
        let n = 40;
        let mut rng = replica_rng(5, 0);
        let u = unitary_brownian_path(n, 1.0, 0.05, &mut rng).unwrap();
        let prod = &u * u.adjoint();
        let mut max_err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                max_err = max_err.max((prod[(i, j)] - expect).norm());
            }
        }
        assert!(max_err < 1e-10, "unitarity drift {max_err}");
    }

    #[test]
    fn mean_trace_matches_exponential_decay() {
        // E[tr U_{n,t}] -> e^{-t/2}, E[tr U²] -> e^{-t}(1-t) at t=1.
        let stats = mean_trace_powers(100, 1.0, 0.01, 200, 42, 2).unwrap();
        let targets = [(-0.5f64).exp(), 0.0]; // e^{-1}(1-1) = 0
        for (k, target) in targets.iter().enumerate() {
            let s = stats[k];
            assert!(
                (s.mean - target).abs() < 3.0 * s.stderr.max(1e-3),
                "k={} mean {} target {} stderr {}",
                k + 1,
                s.mean,
                target,
                s.stderr
            );
        }
    }

    #[test]
    fn classical_limit_bernoulli() {
        // t=0: diag(a) + P diag(b) P⁻¹ with independent uniform pairing is the
        // classical convolution 1/4 δ_{-2} + 1/2 δ_0 + 1/4 δ_2.
        let config = SimulationConfig::bernoulli(200, 0.0, 50, 9);
        let measures = simulate_tfree_sum(&config).unwrap();
        let stats = summarize_moments(&measures, 4);
        // moments of the three-point law: m1=0, m2=2, m3=0, m4=8
        for (k, target) in [0.0, 2.0, 0.0, 8.0].iter().enumerate() {
            let s = stats[k];
            assert!(
                (s.mean - target).abs() < 3.0 * s.stderr.max(1e-12),
                "k={} mean {} target {} stderr {}",
                k + 1,
                s.mean,
                target,
                s.stderr
            );
        }
    }

    #[test]
    fn seed_reproducibility_is_bit_exact() {
        let config = SimulationConfig::bernoulli(30, 0.5, 4, 1234);
        let a = simulate_tfree_sum(&config).unwrap();
        let b = simulate_tfree_sum(&config).unwrap();
        for (ma, mb) in a.iter().zip(b.iter()) {
            assert_eq!(ma.eigenvalues, mb.eigenvalues);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let mut config = SimulationConfig::bernoulli(10, 1.0, 1, 0);
        config.dt = 0.0;
        assert!(matches!(
            simulate_tfree_sum(&config),
            Err(SimulationError::InvalidConfig(_))
        ));
        let mut config = SimulationConfig::bernoulli(10, 1.0, 1, 0);
        config.spectrum_a.pop();
        assert!(matches!(
            simulate_tfree_sum(&config),
            Err(SimulationError::InvalidConfig(_))
        ));
    }
}
