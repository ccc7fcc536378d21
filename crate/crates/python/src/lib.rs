//! Python bindings: channel and system configuration, rate estimation,
//! sweeps, optimization and bit-energy analysis.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use relay_core::allocator::{optimize_variable, sweep as core_sweep, SweepSpec, SweepVariable};
use relay_core::energy;
use relay_core::{MonteCarlo, PilotReading, PowerSpec, Scheme};

fn to_py(e: relay_core::Error) -> PyErr {
    match e {
        relay_core::Error::InvalidParameter { .. } => PyValueError::new_err(e.to_string()),
        relay_core::Error::Numerical(_) => PyArithmeticError::new_err(e.to_string()),
    }
}

#[pyclass(frozen, module = "relay_rates")]
#[derive(Clone, Copy)]
struct ChannelParams {
    inner: relay_core::ChannelParams,
}

#[pymethods]
impl ChannelParams {
    #[new]
    #[pyo3(signature = (sigma_sd=1.0, sigma_sr=4.0, sigma_rd=4.0, n0=1.0))]
    fn new(sigma_sd: f64, sigma_sr: f64, sigma_rd: f64, n0: f64) -> PyResult<Self> {
        let inner = relay_core::ChannelParams::new(sigma_sd, sigma_sr, sigma_rd, n0).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn sigma_sd(&self) -> f64 {
        self.inner.sigma_sd
    }
    #[getter]
    fn sigma_sr(&self) -> f64 {
        self.inner.sigma_sr
    }
    #[getter]
    fn sigma_rd(&self) -> f64 {
        self.inner.sigma_rd
    }
    #[getter]
    fn n0(&self) -> f64 {
        self.inner.n0
    }

    fn __repr__(&self) -> String {
        let c = self.inner;
        format!(
            "ChannelParams(sigma_sd={}, sigma_sr={}, sigma_rd={}, n0={})",
            c.sigma_sd, c.sigma_sr, c.sigma_rd, c.n0
        )
    }
}

/// One experiment point. Give `p_total` (with `theta`) for a total-power
/// budget, otherwise `p_s` and `p_r` are used.
#[pyclass(frozen, module = "relay_rates")]
#[derive(Clone, Copy)]
struct SystemConfig {
    inner: relay_core::SystemConfig,
}

#[pymethods]
impl SystemConfig {
    #[new]
    #[pyo3(signature = (
        scheme="af", m=100, alpha=0.5, delta_s=0.1, delta_r=0.1,
        p_s=0.5, p_r=0.5, p_total=None, theta=0.6, pilot_reading="corrected",
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        scheme: &str,
        m: u32,
        alpha: f64,
        delta_s: f64,
        delta_r: f64,
        p_s: f64,
        p_r: f64,
        p_total: Option<f64>,
        theta: f64,
        pilot_reading: &str,
    ) -> PyResult<Self> {
        let power = match p_total {
            Some(p_total) => PowerSpec::Total { p_total, theta },
            None => PowerSpec::PerNode { p_s, p_r },
        };
        let inner = relay_core::SystemConfig {
            m,
            alpha,
            scheme: scheme.parse::<Scheme>().map_err(to_py)?,
            delta_s,
            delta_r,
            power,
            pilot_reading: pilot_reading.parse::<PilotReading>().map_err(to_py)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.as_str()
    }
    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn delta_s(&self) -> f64 {
        self.inner.delta_s
    }
    #[getter]
    fn delta_r(&self) -> f64 {
        self.inner.delta_r
    }

    /// `(p_s, p_r)` actually used by the scheme.
    fn node_powers(&self) -> PyResult<(f64, f64)> {
        self.inner.node_powers().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let c = self.inner;
        format!(
            "SystemConfig(scheme='{}', m={}, alpha={}, delta_s={}, delta_r={}, power={:?})",
            c.scheme, c.m, c.alpha, c.delta_s, c.delta_r, c.power
        )
    }
}

#[pyclass(frozen, module = "relay_rates")]
#[derive(Clone, Copy)]
struct RateEstimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    n_samples: u64,
    #[pyo3(get)]
    seed: u64,
}

impl From<relay_core::RateEstimate> for RateEstimate {
    fn from(e: relay_core::RateEstimate) -> Self {
        Self {
            mean: e.mean,
            std_error: e.std_error,
            n_samples: e.n_samples,
            seed: e.seed,
        }
    }
}

#[pymethods]
impl RateEstimate {
    fn __repr__(&self) -> String {
        format!(
            "RateEstimate(mean={}, std_error={}, n_samples={}, seed={})",
            self.mean, self.std_error, self.n_samples, self.seed
        )
    }
}

fn mc(n_samples: u64, seed: u64, workers: usize) -> MonteCarlo {
    MonteCarlo::new(n_samples, seed).with_workers(workers)
}

/// Ergodic achievable rate of `config` in bits per symbol.
#[pyfunction]
#[pyo3(signature = (channel, config, n_samples=200_000, seed=1, workers=0))]
fn estimate_rate(
    py: Python<'_>,
    channel: &ChannelParams,
    config: &SystemConfig,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<RateEstimate> {
    let (ch, cfg) = (channel.inner, config.inner);
    py.allow_threads(|| relay_core::estimate_rate(&ch, &cfg, &mc(n_samples, seed, workers)))
        .map(Into::into)
        .map_err(to_py)
}

/// Rate over a grid of one variable. Returns `(rows, argmax)`, each row a
/// `(value, RateEstimate or None, error message or None)` tuple.
#[pyfunction]
#[pyo3(signature = (variable, grid, channel, config, n_samples=200_000, seed=1, workers=0))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn sweep(
    py: Python<'_>,
    variable: &str,
    grid: Vec<f64>,
    channel: &ChannelParams,
    config: &SystemConfig,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<(Vec<(f64, Option<RateEstimate>, Option<String>)>, Option<f64>)> {
    let spec = SweepSpec {
        variable: variable.parse::<SweepVariable>().map_err(to_py)?,
        grid,
        channel: channel.inner,
        base: config.inner,
        mc: mc(n_samples, seed, workers),
    };
    let result = py.allow_threads(|| core_sweep(&spec)).map_err(to_py)?;
    let rows = result
        .rows
        .into_iter()
        .map(|r| (r.value, r.estimate.map(Into::into), r.error))
        .collect();
    Ok((rows, result.argmax))
}

/// Maximize the rate over `variable` in `[lo, hi]`. Returns `(x, estimate)`.
#[pyfunction]
#[pyo3(signature = (variable, lo, hi, channel, config, budget=30, n_samples=200_000, seed=1, workers=0))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    variable: &str,
    lo: f64,
    hi: f64,
    channel: &ChannelParams,
    config: &SystemConfig,
    budget: usize,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<(f64, RateEstimate)> {
    let var = variable.parse::<SweepVariable>().map_err(to_py)?;
    let (ch, cfg) = (channel.inner, config.inner);
    let opt = py
        .allow_threads(|| optimize_variable(var, &ch, &cfg, lo, hi, budget, &mc(n_samples, seed, workers)))
        .map_err(to_py)?;
    Ok((opt.x, opt.value.into()))
}

/// Bit energy along `snr_grid`: list of `(snr, rate, eb_n0 or None, flagged)`.
/// `config` must carry `p_total`.
#[pyfunction]
#[pyo3(signature = (channel, config, snr_grid, n_samples=200_000, seed=1, workers=0))]
#[allow(clippy::type_complexity)]
fn bit_energy_curve(
    py: Python<'_>,
    channel: &ChannelParams,
    config: &SystemConfig,
    snr_grid: Vec<f64>,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Vec<(f64, RateEstimate, Option<f64>, bool)>> {
    let (ch, cfg) = (channel.inner, config.inner);
    let curve = py
        .allow_threads(|| energy::bit_energy_curve(&ch, &cfg, &snr_grid, &mc(n_samples, seed, workers)))
        .map_err(to_py)?;
    Ok(curve
        .points
        .into_iter()
        .map(|p| (p.snr, p.rate.into(), p.eb_n0, p.flagged))
        .collect())
}

/// Minimum bit energy on `[snr_lo, snr_hi]`: `(snr_star, eb_n0_min, rate)`.
#[pyfunction]
#[pyo3(signature = (channel, config, snr_lo=1e-4, snr_hi=1e2, budget=30, n_samples=200_000, seed=1, workers=0))]
#[allow(clippy::too_many_arguments)]
fn min_bit_energy(
    py: Python<'_>,
    channel: &ChannelParams,
    config: &SystemConfig,
    snr_lo: f64,
    snr_hi: f64,
    budget: usize,
    n_samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<(f64, f64, RateEstimate)> {
    let (ch, cfg) = (channel.inner, config.inner);
    let m = py
        .allow_threads(|| {
            energy::min_bit_energy(&ch, &cfg, snr_lo, snr_hi, budget, &mc(n_samples, seed, workers))
        })
        .map_err(to_py)?;
    Ok((m.snr_star, m.eb_n0_min, m.rate.into()))
}

/// `prefactor * E[log2(1 + gamma X)]` for exponential `X`, in closed form.
#[pyfunction]
#[pyo3(signature = (gamma, prefactor=1.0))]
fn rate_direct_closed_form(gamma: f64, prefactor: f64) -> f64 {
    relay_core::rate_direct_closed_form(gamma, prefactor)
}

/// `(var_hat, var_err)` of a single-pilot MMSE channel estimate.
#[pyfunction]
fn mmse_training_stats(sigma: f64, delta: f64, m: u32, p: f64, n0: f64) -> PyResult<(f64, f64)> {
    let s = relay_core::mmse_training_stats(sigma, delta, m, p, n0).map_err(to_py)?;
    Ok((s.var_hat, s.var_err))
}

#[pyfunction]
fn f_combine(x: f64, y: f64) -> f64 {
    relay_core::f_combine(x, y)
}

#[pyfunction]
fn q_combine(a: f64, b: f64, c: f64, d: f64) -> f64 {
    relay_core::q_combine(a, b, c, d)
}

#[pymodule]
fn relay_rates(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ChannelParams>()?;
    m.add_class::<SystemConfig>()?;
    m.add_class::<RateEstimate>()?;
    m.add_function(wrap_pyfunction!(estimate_rate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(bit_energy_curve, m)?)?;
    m.add_function(wrap_pyfunction!(min_bit_energy, m)?)?;
    m.add_function(wrap_pyfunction!(rate_direct_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(mmse_training_stats, m)?)?;
    m.add_function(wrap_pyfunction!(f_combine, m)?)?;
    m.add_function(wrap_pyfunction!(q_combine, m)?)?;
    Ok(())
}
