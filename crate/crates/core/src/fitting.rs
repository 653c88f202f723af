//! Log-linear regressions for gap scaling: `δE ∝ e^{−αL}` and
//! `α = c + β ln(1/ε)`.

use rayon::prelude::*;

use crate::basis::BasisDescriptor;
use crate::error::{Error, Result};
use crate::model::Protocol;
use crate::spectral::{gap_deviation, PairingOptions};

/// Gap deviations below this are indistinguishable from rounding noise.
pub const GAP_FLOOR: f64 = 1e-13;

/// Default `ε` window for exponent fits.
pub const DEFAULT_EPS_WINDOW: (f64, f64) = (0.25, 0.45);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitModel {
    /// `ln δE = c − α L`
    ExponentialDecay,
    /// `α = c + β ln(1/ε)`
    LogExponent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub intercept: f64,
    /// `α` for [`FitModel::ExponentialDecay`], `β` for [`FitModel::LogExponent`].
    pub rate: f64,
    pub intercept_stderr: f64,
    pub rate_stderr: f64,
    pub r_squared: f64,
    /// Residuals in the transformed (linear) coordinates, one per point.
    pub residuals: Vec<f64>,
    /// Points used, sorted by abscissa.
    pub points: Vec<(f64, f64)>,
    /// Points dropped before fitting.
    pub excluded: Vec<(f64, f64)>,
    /// Abscissa window the points were drawn from, when one was imposed.
    pub window: Option<(f64, f64)>,
}

struct Linear {
    intercept: f64,
    slope: f64,
    intercept_se: f64,
    slope_se: f64,
    r_squared: f64,
    residuals: Vec<f64>,
}

fn ordinary_least_squares(x: &[f64], y: &[f64]) -> Linear {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (intercept + slope * a)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let sigma2 = if x.len() > 2 { ss_res / (n - 2.0) } else { 0.0 };
    let slope_se = (sigma2 / sxx).sqrt();
    let intercept_se = (sigma2 * (1.0 / n + mx * mx / sxx)).sqrt();
    Linear {
        intercept,
        slope,
        intercept_se,
        slope_se,
        r_squared,
        residuals,
    }
}

fn sorted(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points
}

fn require(points: &[(f64, f64)], required: usize) -> Result<()> {
    let distinct = {
        let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        xs.dedup();
        xs.len()
    };
    if points.len() < required || distinct < 2 {
        return Err(Error::InsufficientData {
            usable: points.len(),
            required,
        });
    }
    Ok(())
}

/// Fits `δE = A e^{−αL}` to `(L, δE)` points by least squares on `ln δE`.
pub fn fit_exponential_decay(points: &[(f64, f64)]) -> Result<FitResult> {
    let (kept, excluded): (Vec<_>, Vec<_>) = points
        .iter()
        .copied()
        .partition(|&(x, y)| x.is_finite() && y.is_finite() && y >= GAP_FLOOR);
    let kept = sorted(kept);
    require(&kept, 3)?;
    let x: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let fit = ordinary_least_squares(&x, &y);
    Ok(FitResult {
        model: FitModel::ExponentialDecay,
        intercept: fit.intercept,
        rate: -fit.slope,
        intercept_stderr: fit.intercept_se,
        rate_stderr: fit.slope_se,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
        points: kept,
        excluded: sorted(excluded),
        window: None,
    })
}

/// Fits `α = c + β ln(1/ε)` to `(ε, α)` points.
pub fn fit_log_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    if let Some(&(eps, _)) = points.iter().find(|p| !(p.0 > 0.0 && p.0 < 1.0)) {
        return Err(Error::InvalidParam(format!("ε = {eps} outside (0, 1)")));
    }
    let kept = sorted(points.iter().copied().filter(|p| p.1.is_finite()).collect());
    let excluded = sorted(points.iter().copied().filter(|p| !p.1.is_finite()).collect());
    require(&kept, 3)?;
    let x: Vec<f64> = kept.iter().map(|p| (1.0 / p.0).ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let fit = ordinary_least_squares(&x, &y);
    let window = kept.first().zip(kept.last()).map(|(a, b)| (a.0, b.0));
    Ok(FitResult {
        model: FitModel::LogExponent,
        intercept: fit.intercept,
        rate: fit.slope,
        intercept_stderr: fit.intercept_se,
        rate_stderr: fit.slope_se,
        r_squared: fit.r_squared,
        residuals: fit.residuals,
        points: kept,
        excluded,
        window,
    })
}

/// `δE(L)` table and its exponential fit at one `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaPoint {
    pub eps: f64,
    /// `(L, δE)` for every size, including ones excluded from the fit.
    pub gaps: Vec<(usize, f64)>,
    pub fit: FitResult,
}

impl AlphaPoint {
    pub fn alpha(&self) -> f64 {
        self.fit.rate
    }
}

/// Pair-sector `δE` of the polarized state for every `(ε, L)` combination.
pub fn gap_table(
    protocol: Protocol,
    eps_grid: &[f64],
    sizes: &[usize],
    pairing: &PairingOptions,
) -> Result<Vec<Vec<(usize, f64)>>> {
    let jobs: Vec<(usize, usize)> = (0..eps_grid.len())
        .flat_map(|e| (0..sizes.len()).map(move |s| (e, s)))
        .collect();
    let values: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(e, s)| {
            let l = sizes[s];
            let params = protocol.params(l, eps_grid[e]);
            let desc = BasisDescriptor::pair_sector(l)?;
            Ok(gap_deviation(&params, &desc, pairing)?.deviation)
        })
        .collect();
    let mut table = vec![Vec::with_capacity(sizes.len()); eps_grid.len()];
    for ((e, s), v) in jobs.into_iter().zip(values) {
        table[e].push((sizes[s], v?));
    }
    Ok(table)
}

/// `α(ε)` for each `ε` from pair-sector gap deviations over `sizes`,
/// using [`PairingOptions::scaling`].
pub fn alpha_scan(protocol: Protocol, eps_grid: &[f64], sizes: &[usize]) -> Result<Vec<AlphaPoint>> {
    alpha_scan_with(protocol, eps_grid, sizes, &PairingOptions::scaling())
}

pub fn alpha_scan_with(
    protocol: Protocol,
    eps_grid: &[f64],
    sizes: &[usize],
    pairing: &PairingOptions,
) -> Result<Vec<AlphaPoint>> {
    let table = gap_table(protocol, eps_grid, sizes, pairing)?;
    eps_grid
        .iter()
        .zip(table)
        .map(|(&eps, gaps)| {
            let pts: Vec<(f64, f64)> = gaps.iter().map(|&(l, d)| (l as f64, d)).collect();
            Ok(AlphaPoint {
                eps,
                fit: fit_exponential_decay(&pts)?,
                gaps,
            })
        })
        .collect()
}

/// `β` from an `α(ε)` scan.
pub fn beta_fit(alphas: &[AlphaPoint]) -> Result<FitResult> {
    fit_log_exponent(&alphas.iter().map(|a| (a.eps, a.alpha())).collect::<Vec<_>>())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaRow {
    pub gamma: f64,
    pub alphas: Vec<AlphaPoint>,
    pub beta: FitResult,
}

/// `β(γ)` for the skewed protocol `(ε, −(1+γ)ε)`.
pub fn gamma_sweep(gammas: &[f64], eps_grid: &[f64], sizes: &[usize]) -> Result<Vec<GammaRow>> {
    gamma_sweep_with(gammas, eps_grid, sizes, &PairingOptions::scaling())
}

pub fn gamma_sweep_with(
    gammas: &[f64],
    eps_grid: &[f64],
    sizes: &[usize],
    pairing: &PairingOptions,
) -> Result<Vec<GammaRow>> {
    let min_eps = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(g) = gammas.iter().find(|&&g| !(0.0..min_eps).contains(&g)) {
        return Err(Error::InvalidParam(format!(
            "γ = {g} must satisfy 0 ≤ γ < min ε = {min_eps}"
        )));
    }
    gammas
        .iter()
        .map(|&gamma| {
            let alphas = alpha_scan_with(Protocol::Skewed { gamma }, eps_grid, sizes, pairing)?;
            let beta = beta_fit(&alphas)?;
            Ok(GammaRow { gamma, alphas, beta })
        })
        .collect()
}
