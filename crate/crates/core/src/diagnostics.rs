//! Subharmonic Fourier analysis of imbalance traces and melting detection.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::basis::BasisDescriptor;
use crate::dynamics::{evolve_trace, ImbalanceTrace, StateVector};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{DriveParams, Protocol};

/// Amplitudes are floored here before taking logarithms.
pub const KL_FLOOR: f64 = 1e-12;

/// Discrete Fourier amplitudes of a trace over `N` periods.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum {
    pub n_periods: usize,
    /// `ω_k = 2πk/N`, radians per period.
    pub frequencies: Vec<f64>,
    /// `F(ω_k) = |Σ_n I(nT) e^{−iω_k n}| / N` of the site-averaged trace.
    pub amplitudes: Vec<f64>,
    /// Complex transform behind `amplitudes`, already divided by `N`.
    pub transform: Vec<C64>,
    /// `per_site[j][k] = F_j(ω_k)`.
    pub per_site: Vec<Vec<f64>>,
    /// Complex per-site transforms, divided by `N`.
    pub per_site_transform: Vec<Vec<C64>>,
}

impl FourierSpectrum {
    /// Grid index of `ω = π`.
    pub fn pi_index(&self) -> usize {
        self.n_periods / 2
    }

    /// Per-site subharmonic peak heights `F_j(π)`.
    pub fn subharmonic_peaks(&self) -> Vec<f64> {
        let k = self.pi_index();
        self.per_site.iter().map(|row| row[k]).collect()
    }

    /// Index of the largest amplitude (lowest index on ties).
    pub fn dominant_index(&self) -> usize {
        let mut best = 0;
        for (k, a) in self.amplitudes.iter().enumerate() {
            if *a > self.amplitudes[best] {
                best = k;
            }
        }
        best
    }
}

fn dft(signal: &[f64], planner: &mut FftPlanner<f64>) -> Vec<C64> {
    let n = signal.len();
    let mut buf: Vec<C64> = signal.iter().map(|&v| C64::from(v)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

/// Transforms samples `n = 0..N−1` of a trace with `N = trace.n_periods`.
pub fn fourier(trace: &ImbalanceTrace) -> Result<FourierSpectrum> {
    fourier_window(trace, trace.n_periods)
}

/// Transforms the first `n` samples of a trace.
pub fn fourier_window(trace: &ImbalanceTrace, n: usize) -> Result<FourierSpectrum> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidParam(format!(
            "Fourier window N = {n} must be even and positive so that ω = π is on the grid"
        )));
    }
    if trace.total.len() < n {
        return Err(Error::Dimension {
            expected: n,
            got: trace.total.len(),
        });
    }
    let mut planner = FftPlanner::new();
    let transform = dft(&trace.total[..n], &mut planner);
    let l = trace.l();
    let per_site_transform: Vec<Vec<C64>> = (0..l)
        .map(|j| {
            let series: Vec<f64> = trace.per_site[..n].iter().map(|row| row[j]).collect();
            dft(&series, &mut planner)
        })
        .collect();
    Ok(FourierSpectrum {
        n_periods: n,
        frequencies: (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect(),
        amplitudes: transform.iter().map(|z| z.norm()).collect(),
        per_site: per_site_transform
            .iter()
            .map(|row| row.iter().map(|z| z.norm()).collect())
            .collect(),
        transform,
        per_site_transform,
    })
}

fn normalized_distribution(amplitudes: &[f64]) -> Vec<f64> {
    let total: f64 = amplitudes.iter().sum();
    amplitudes
        .iter()
        .map(|a| {
            let p = if total > 0.0 { a / total } else { 0.0 };
            p.max(KL_FLOOR)
        })
        .collect()
}

/// `KL(ω) = p(ω) ln(p(ω)/q(ω))` with `p`, `q` the floored, sum-normalized
/// amplitude distributions of `spec_eps` and `spec_ref`.
pub fn kl_divergence(spec_eps: &FourierSpectrum, spec_ref: &FourierSpectrum) -> Result<Vec<f64>> {
    if spec_eps.frequencies != spec_ref.frequencies {
        return Err(Error::Dimension {
            expected: spec_ref.frequencies.len(),
            got: spec_eps.frequencies.len(),
        });
    }
    let p = normalized_distribution(&spec_eps.amplitudes);
    let q = normalized_distribution(&spec_ref.amplitudes);
    Ok(p.iter().zip(&q).map(|(p, q)| p * (p / q).ln()).collect())
}

/// `(1/L) Σ_j (F_j(π) − mean)²` over the `L` rung sites.
pub fn peak_variance(spec: &FourierSpectrum) -> f64 {
    variance(&spec.subharmonic_peaks())
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// KL rows and peak variances over an `ε` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MeltScan {
    pub l: usize,
    pub n_periods: usize,
    pub eps: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `kl[i][k] = KL(ω_k, ε_i)`.
    pub kl: Vec<Vec<f64>>,
    pub variance: Vec<f64>,
    /// Refined location of the variance peak.
    pub eps_c: f64,
}

impl MeltScan {
    pub fn kl_total(&self, i: usize) -> f64 {
        self.kl[i].iter().sum()
    }
}

/// Scans `ε` for one protocol, starting every trace from the polarized
/// state in the pair sector.
pub fn melt_scan(
    template: &DriveParams,
    protocol: Protocol,
    eps_grid: &[f64],
    n_periods: usize,
) -> Result<MeltScan> {
    if eps_grid.len() < 3 {
        return Err(Error::InsufficientData {
            usable: eps_grid.len(),
            required: 3,
        });
    }
    if eps_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParam("ε grid must be strictly increasing".into()));
    }
    let l = template.l;
    let desc = BasisDescriptor::pair_sector(l)?;
    let state0 = StateVector::polarized(desc);
    let spectrum_at = |eps: f64| -> Result<FourierSpectrum> {
        let params = protocol.apply(template, l, eps);
        fourier(&evolve_trace(&params, &state0, n_periods)?)
    };
    let reference = spectrum_at(0.0)?;
    let spectra: Vec<FourierSpectrum> = eps_grid
        .par_iter()
        .map(|&eps| spectrum_at(eps))
        .collect::<Result<_>>()?;
    let kl = spectra
        .iter()
        .map(|s| kl_divergence(s, &reference))
        .collect::<Result<Vec<_>>>()?;
    let variance: Vec<f64> = spectra.iter().map(peak_variance).collect();
    let eps_c = locate_peak(eps_grid, &variance)?;
    Ok(MeltScan {
        l,
        n_periods,
        eps: eps_grid.to_vec(),
        frequencies: reference.frequencies,
        kl,
        variance,
        eps_c,
    })
}

/// Grid argmax of `values` refined by a parabola through its neighbours.
pub fn locate_peak(grid: &[f64], values: &[f64]) -> Result<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max = sorted.last().copied().unwrap_or(0.0);
    let ratio = if median > 0.0 { max / median } else if max > 0.0 { f64::INFINITY } else { 0.0 };
    if !(ratio >= 2.0) {
        return Err(Error::NoTransitionDetected { ratio });
    }
    let mut k = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[k] {
            k = i;
        }
    }
    if k == 0 || k + 1 == values.len() {
        return Ok(grid[k]);
    }
    let (x0, x1, x2) = (grid[k - 1], grid[k], grid[k + 1]);
    let (y0, y1, y2) = (values[k - 1], values[k], values[k + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if !(a < 0.0) {
        return Ok(x1);
    }
    Ok((-b / (2.0 * a)).clamp(x0, x2))
}

/// Half-width, in periods, of the moving average used for the envelope.
pub const ENVELOPE_HALF_WIDTH: usize = 50;

/// Slow envelope of the trace: the staggered signal `(−1)^n I(nT)/I(0)`
/// averaged over `2h+1` periods centred on each `n`. Index `i` of the result
/// is period `i + h`.
pub fn envelope(trace: &ImbalanceTrace, half_width: usize) -> Vec<f64> {
    let i0 = trace.total[0];
    let staggered: Vec<f64> = trace
        .total
        .iter()
        .enumerate()
        .map(|(n, v)| if n % 2 == 0 { v / i0 } else { -v / i0 })
        .collect();
    let width = 2 * half_width + 1;
    if staggered.len() < width {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(staggered.len() - width + 1);
    let mut sum: f64 = staggered[..width].iter().sum();
    out.push(sum / width as f64);
    for c in width..staggered.len() {
        sum += staggered[c] - staggered[c - width];
        out.push(sum / width as f64);
    }
    out
}

/// First zero of [`envelope`], linearly interpolated between periods;
/// `None` if it never changes sign.
pub fn first_envelope_zero(trace: &ImbalanceTrace, half_width: usize) -> Option<f64> {
    envelope(trace, half_width)
        .windows(2)
        .enumerate()
        .find_map(|(i, w)| (w[1] <= 0.0).then(|| (i + half_width) as f64 + w[0] / (w[0] - w[1])))
}
