//! Single-atom oracles in the rotating-wave approximation: Bloch equations,
//! the closed-form ⟨σ_z⟩(τ), the damped Rabi frequency and the
//! zero-temperature energy, plus estimators that pull a frequency and a
//! decay rate out of a numeric E(t).
//!
//! In the frame rotating at ω = ω₀ the drive A cos(ωt)(σ₊ + σ₋) becomes
//! (A/2)σ_x, so with s₊ = ⟨σ₊⟩ = x + iy
//!
//! ```text
//! ds_z/dτ = iA(s₋ - s₊) - 2γ(χ s_z + 1)
//! ds₊/dτ  = -i(A/2) s_z - γχ s₊
//! ```

use crate::error::{Error, Result};
use crate::lindblad::rk4;
use crate::params::SimulationParams;

/// χ = 1 + 2n̄.
pub fn chi(nbar: f64) -> f64 {
    1.0 + 2.0 * nbar
}

/// Ω = √(A² - γ²χ²/4), or the magnitude of the imaginary root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RabiFrequency {
    Underdamped(f64),
    Overdamped(f64),
}

impl RabiFrequency {
    pub fn value(self) -> Option<f64> {
        match self {
            RabiFrequency::Underdamped(w) => Some(w),
            RabiFrequency::Overdamped(_) => None,
        }
    }
}

fn rabi_radicand(amplitude: f64, gamma: f64, nbar: f64) -> f64 {
    let gc = gamma * chi(nbar);
    amplitude * amplitude - gc * gc / 4.0
}

pub fn rabi_frequency(amplitude: f64, gamma: f64, nbar: f64) -> RabiFrequency {
    let r = rabi_radicand(amplitude, gamma, nbar);
    if r >= 0.0 {
        RabiFrequency::Underdamped(r.sqrt())
    } else {
        RabiFrequency::Overdamped((-r).sqrt())
    }
}

/// Steady ⟨σ_z⟩ = -2γ²χ / (2γ²χ² + A²).
pub fn steady_sigma_z(amplitude: f64, gamma: f64, nbar: f64) -> f64 {
    let c = chi(nbar);
    let g2 = gamma * gamma;
    if g2 == 0.0 && amplitude == 0.0 {
        return f64::NAN;
    }
    -2.0 * g2 * c / (2.0 * g2 * c * c + amplitude * amplitude)
}

/// (cos Ωτ, sin(Ωτ)/Ω) for Ω² of either sign.
fn cos_and_sinc(radicand: f64, tau: f64) -> (f64, f64) {
    if radicand > 0.0 {
        let w = radicand.sqrt();
        ((w * tau).cos(), (w * tau).sin() / w)
    } else if radicand < 0.0 {
        let k = (-radicand).sqrt();
        ((k * tau).cosh(), (k * tau).sinh() / k)
    } else {
        (1.0, tau)
    }
}

fn sigma_z_with(radicand: f64, tau: f64, amplitude: f64, gamma: f64, nbar: f64, alpha: f64) -> f64 {
    let c = chi(nbar);
    let g2 = gamma * gamma;
    let a2 = amplitude * amplitude;
    let denom = 2.0 * g2 * c * c + a2;
    let (cos, sinc) = cos_and_sinc(radicand, tau);
    if g2 == 0.0 {
        // Undamped Rabi cycle; the general expression is 0·∞ here.
        return alpha * cos;
    }
    let a_cos = 2.0 * c * g2 * (1.0 + alpha * c) + alpha * a2;
    let a_sin = gamma * (2.0 * g2 * c * c * (1.0 + alpha * c) + a2 * (4.0 + alpha * c)) / 2.0;
    let transient = (-1.5 * tau * gamma * c).exp() / (2.0 * c * g2) * (a_cos * cos - a_sin * sinc);
    -2.0 * g2 * c / denom * (1.0 - transient)
}

/// Closed-form ⟨σ_z⟩(τ) from an initial state with ⟨σ_z⟩ = α and no
/// coherence. Only defined for real Ω > 0.
pub fn sigma_z_closed_form(tau: f64, amplitude: f64, gamma: f64, nbar: f64, alpha: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            key: "alpha",
            reason: format!("must lie in [-1, 1], got {alpha}"),
        });
    }
    let r = rabi_radicand(amplitude, gamma, nbar);
    if r <= 0.0 {
        return Err(Error::Overdamped);
    }
    Ok(sigma_z_with(r, tau, amplitude, gamma, nbar, alpha))
}

/// The same expression continued through Ω = 0 into the overdamped regime
/// (cos → cosh, sin/Ω → sinh/|Ω|).
pub fn sigma_z_continued(tau: f64, amplitude: f64, gamma: f64, nbar: f64, alpha: f64) -> f64 {
    sigma_z_with(rabi_radicand(amplitude, gamma, nbar), tau, amplitude, gamma, nbar, alpha)
}

/// ⟨σ_z⟩ of the single-atom Gibbs state at the bath temperature.
pub fn gibbs_sigma_z(p: &SimulationParams) -> f64 {
    let t = p.temperature();
    if t == 0.0 {
        -1.0
    } else {
        -(p.omega0 / (2.0 * t)).tanh()
    }
}

/// E(τ) = ω₀⟨σ_z⟩(τ)/2 from the Gibbs start, continued past Ω = 0.
pub fn energy_closed_form(tau: f64, p: &SimulationParams) -> f64 {
    0.5 * p.omega0 * sigma_z_continued(tau, p.amplitude, p.gamma, p.nbar, gibbs_sigma_z(p))
}

/// Zero-temperature energy
/// E = -4ω₀γ²/(8γ²+A²)·[1 + (A²/8γ²) e^{-3γτ/2}(cos Ωτ + (3γ/2Ω) sin Ωτ)],
/// Ω = √(A² - γ²/4).
pub fn energy_zero_temp(tau: f64, amplitude: f64, gamma: f64, omega0: f64) -> Result<f64> {
    let r = amplitude * amplitude - gamma * gamma / 4.0;
    if r <= 0.0 || gamma <= 0.0 {
        return Err(Error::Overdamped);
    }
    let w = r.sqrt();
    let g2 = gamma * gamma;
    let a2 = amplitude * amplitude;
    let osc = (w * tau).cos() + 1.5 * gamma / w * (w * tau).sin();
    Ok(-4.0 * omega0 * g2 / (8.0 * g2 + a2)
        * (1.0 + a2 / (8.0 * g2) * (-1.5 * gamma * tau).exp() * osc))
}

/// One sample of the rotating-frame Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub tau: f64,
    pub sz: f64,
    pub splus_re: f64,
    pub splus_im: f64,
}

/// RK4 integration of the RWA Bloch equations from ⟨σ_z⟩ = α, ⟨σ₊⟩ = 0,
/// sampled on the same grid as the master-equation integrator
/// (every `record_stride` steps of `dt`, up to `t_max`).
pub fn integrate_bloch(p: &SimulationParams, alpha: f64) -> Result<Vec<BlochState>> {
    p.validate()?;
    if (p.omega - p.omega0).abs() > 1e-12 * p.omega0 {
        return Err(Error::OffResonance {
            omega: p.omega,
            omega0: p.omega0,
        });
    }
    if !(-1.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter {
            key: "alpha",
            reason: format!("must lie in [-1, 1], got {alpha}"),
        });
    }
    let (a, g, c) = (p.amplitude, p.gamma, chi(p.nbar));
    // [s_z, Re s₊, Im s₊]; s₋ = s₊* is built in.
    let f = |y: &[f64; 3], _t: f64| {
        [
            2.0 * a * y[2] - 2.0 * g * (c * y[0] + 1.0),
            -g * c * y[1],
            -0.5 * a * y[0] - g * c * y[2],
        ]
    };
    let steps = p.total_steps();
    let mut y = [alpha, 0.0, 0.0];
    let sample = |tau: f64, y: &[f64; 3]| BlochState {
        tau,
        sz: y[0],
        splus_re: y[1],
        splus_im: y[2],
    };
    let mut out = vec![sample(0.0, &y)];
    for step in 1..=steps {
        let t = (step - 1) as f64 * p.dt;
        y = rk4(&y, t, p.dt, f);
        if step % p.record_stride == 0 || step == steps {
            out.push(sample(step as f64 * p.dt, &y));
        }
    }
    Ok(out)
}

/// Centered moving average over `window` samples, stamped at the window
/// midpoint; the result is `window - 1` samples shorter.
pub fn moving_average(times: &[f64], values: &[f64], window: usize) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let window = window.max(1);
    if n < window {
        return (Vec::new(), Vec::new());
    }
    let mut ts = Vec::with_capacity(n - window + 1);
    let mut vs = Vec::with_capacity(n - window + 1);
    let mut sum: f64 = values[..window].iter().sum();
    for start in 0..=n - window {
        if start > 0 {
            sum += values[start + window - 1] - values[start - 1];
        }
        ts.push(0.5 * (times[start] + times[start + window - 1]));
        vs.push(sum / window as f64);
    }
    (ts, vs)
}

/// Local maxima of `values` with parabolic refinement, as (t, value).
/// Assumes uniformly spaced samples.
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        if m > l && m >= r {
            let h = times[i + 1] - times[i];
            let curv = l - 2.0 * m + r;
            let shift = if curv != 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
            peaks.push((times[i] + shift * h, m - 0.25 * (l - r) * shift));
        }
    }
    peaks
}

/// Drive ripple removed by two passes of a one-period moving average
/// (a triangular window two periods wide, which leaves peak positions in
/// place).
fn smooth(times: &[f64], values: &[f64], drive_period: f64) -> (Vec<f64>, Vec<f64>) {
    if times.len() < 3 {
        return (Vec::new(), Vec::new());
    }
    let h = times[1] - times[0];
    let window = (drive_period / h).round() as usize;
    let (ts, vs) = moving_average(times, values, window);
    moving_average(&ts, &vs, window)
}

/// One maximum per excursion above `baseline`; excursions cut off by the
/// end of the data or peaking less than `min_amplitude` above the baseline
/// are dropped.
fn lobe_peaks(
    times: &[f64],
    values: &[f64],
    drive_period: f64,
    baseline: f64,
    min_amplitude: f64,
) -> Vec<(f64, f64)> {
    let (ts, vs) = smooth(times, values, drive_period);
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < vs.len() {
        if vs[i] <= baseline {
            i += 1;
            continue;
        }
        let start = i;
        while i < vs.len() && vs[i] > baseline {
            i += 1;
        }
        if start == 0 || i == vs.len() {
            continue;
        }
        let top = (start..i).fold(start, |best, k| if vs[k] > vs[best] { k } else { best });
        if top == 0 || top + 1 >= vs.len() {
            continue;
        }
        let refined = local_maxima(&ts[top - 1..=top + 1], &vs[top - 1..=top + 1]);
        let peak = refined.first().copied().unwrap_or((ts[top], vs[top]));
        if peak.1 - baseline > min_amplitude {
            peaks.push(peak);
        }
    }
    peaks
}

/// Oscillation frequency 2π / ⟨peak spacing⟩ of a sampled signal oscillating
/// about `baseline`, after removing drive-frequency ripple. Peaks less than
/// `min_amplitude` above the baseline are ignored.
pub fn fit_oscillation_frequency(
    times: &[f64],
    values: &[f64],
    drive_period: f64,
    baseline: f64,
    min_amplitude: f64,
) -> Option<f64> {
    let peaks = lobe_peaks(times, values, drive_period, baseline, min_amplitude);
    if peaks.len() < 2 {
        return None;
    }
    let spacing = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
    Some(2.0 * std::f64::consts::PI / spacing)
}

/// Exponential decay rate of the oscillation envelope, from a least-squares
/// line through ln(peak - baseline).
pub fn fit_envelope_decay(
    times: &[f64],
    values: &[f64],
    drive_period: f64,
    baseline: f64,
    min_amplitude: f64,
) -> Option<f64> {
    let peaks = lobe_peaks(times, values, drive_period, baseline, min_amplitude);
    if peaks.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = peaks.iter().map(|&(t, v)| (t, (v - baseline).ln())).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(-sxy / sxx)
}
