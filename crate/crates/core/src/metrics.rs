//! Centroid observables, ensemble mean squared displacement and exponent fits.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;

use crate::dynamics::Trajectory;
use crate::system::ParticleSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("need at least {needed} trials, got {found}")]
    TooFewTrials { needed: usize, found: usize },
    #[error("trial {trial} is recorded on a different time grid than trial 0")]
    MismatchedGrid { trial: usize },
    #[error("fit impossible: {positive} lags with positive msd in the fit range, need 3")]
    FitImpossible { positive: usize },
    #[error("degenerate fit range {0}..={1}")]
    DegenerateRange(u64, u64),
    #[error("unknown axis {0:?} (expected +y, -y, +x or -x)")]
    UnknownAxis(String),
}

/// Center of mass: x in lattice lengths, y exact.
pub fn centroid(system: &ParticleSystem) -> (f64, Rational64) {
    (system.centroid_x(), system.centroid_height())
}

/// Centroid positions of one trial on its record grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub t: Vec<u64>,
    pub pos: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(t: Vec<u64>, pos: Vec<(f64, f64)>) -> Self {
        assert_eq!(t.len(), pos.len(), "one position per record time");
        Series { t, pos }
    }

    /// Net displacement from the first to the last record.
    pub fn net_displacement(&self) -> (f64, f64) {
        match (self.pos.first(), self.pos.last()) {
            (Some(a), Some(b)) => (b.0 - a.0, b.1 - a.1),
            _ => (0.0, 0.0),
        }
    }
}

impl From<&Trajectory> for Series {
    fn from(tr: &Trajectory) -> Self {
        Series {
            t: tr.records.iter().map(|r| r.t).collect(),
            pos: tr.records.iter().map(|r| (r.centroid_x, r.centroid_y_f64())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsdResult {
    /// Time since the first record.
    pub lags: Vec<u64>,
    pub msd: Vec<f64>,
    pub gamma: f64,
    /// ln(4D).
    pub log_intercept: f64,
    pub fit_range: (u64, u64),
}

impl MsdResult {
    pub fn diffusion_coefficient(&self) -> f64 {
        self.log_intercept.exp() / 4.0
    }

    pub fn classification(&self) -> Diffusion {
        classify(self.gamma)
    }

    /// `gamma=<g> intercept=<i> t_min=<a> t_max=<b>`
    pub fn summary_line(&self) -> String {
        format!(
            "gamma={} intercept={} t_min={} t_max={}",
            self.gamma, self.log_intercept, self.fit_range.0, self.fit_range.1
        )
    }
}

/// Ensemble σ²(t) = ⟨x·x⟩ − ⟨x⟩·⟨x⟩ of the displacement since the first record.
pub fn msd_curve(trials: &[Series]) -> Result<(Vec<u64>, Vec<f64>), MetricsError> {
    if trials.len() < 2 {
        return Err(MetricsError::TooFewTrials { needed: 2, found: trials.len() });
    }
    let grid = &trials[0].t;
    if let Some(i) = trials.iter().position(|s| &s.t != grid) {
        return Err(MetricsError::MismatchedGrid { trial: i });
    }
    let n = trials.len() as f64;
    let t0 = grid.first().copied().unwrap_or(0);
    let mut lags = Vec::with_capacity(grid.len());
    let mut msd = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        let (mut sx, mut sy, mut sq) = (0.0, 0.0, 0.0);
        // shifted by trial 0's displacement, so identical trials give exactly 0
        let r = &trials[0];
        let (rx, ry) = (r.pos[k].0 - r.pos[0].0, r.pos[k].1 - r.pos[0].1);
        for s in trials {
            let dx = s.pos[k].0 - s.pos[0].0 - rx;
            let dy = s.pos[k].1 - s.pos[0].1 - ry;
            sx += dx;
            sy += dy;
            sq += dx * dx + dy * dy;
        }
        let (mx, my) = (sx / n, sy / n);
        lags.push(t - t0);
        msd.push((sq / n - mx * mx - my * my).max(0.0));
    }
    Ok((lags, msd))
}

/// Excludes lag 0 and the first recorded lag, then keeps at most the middle
/// two decades (in log time) of what remains.
pub fn default_fit_range(lags: &[u64]) -> Option<(u64, u64)> {
    let usable: Vec<u64> = lags.iter().copied().filter(|&t| t > 0).skip(1).collect();
    let (lo, hi) = (*usable.first()?, *usable.last()?);
    let (llo, lhi) = ((lo as f64).log10(), (hi as f64).log10());
    if lhi - llo <= 2.0 {
        return Some((lo, hi));
    }
    let mid = (llo + lhi) / 2.0;
    let (a, b) = (10f64.powf(mid - 1.0), 10f64.powf(mid + 1.0));
    let inside: Vec<u64> = usable.into_iter().filter(|&t| (t as f64) >= a && (t as f64) <= b).collect();
    Some((*inside.first()?, *inside.last()?))
}

/// Least squares of ln σ² against ln t over lags in `range`; returns
/// `(gamma, ln(4D))`.
pub fn fit_gamma(lags: &[u64], msd: &[f64], range: (u64, u64)) -> Result<(f64, f64), MetricsError> {
    if range.0 == 0 || range.0 >= range.1 {
        return Err(MetricsError::DegenerateRange(range.0, range.1));
    }
    let pts: Vec<(f64, f64)> = lags
        .iter()
        .zip(msd)
        .filter(|(&t, &m)| t >= range.0 && t <= range.1 && m > 0.0)
        .map(|(&t, &m)| ((t as f64).ln(), m.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(MetricsError::FitImpossible { positive: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateRange(range.0, range.1));
    }
    let gamma = sxy / sxx;
    Ok((gamma, my - gamma * mx))
}

pub fn msd(trials: &[Series], fit_range: Option<(u64, u64)>) -> Result<MsdResult, MetricsError> {
    let (lags, curve) = msd_curve(trials)?;
    let range = match fit_range {
        Some(r) => r,
        None => default_fit_range(&lags).ok_or(MetricsError::FitImpossible { positive: 0 })?,
    };
    let (gamma, log_intercept) = fit_gamma(&lags, &curve, range)?;
    Ok(MsdResult { lags, msd: curve, gamma, log_intercept, fit_range: range })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diffusion {
    Subdiffusive,
    Diffusive,
    Superdiffusive,
}

impl fmt::Display for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Diffusion::Subdiffusive => "subdiffusive",
            Diffusion::Diffusive => "diffusive",
            Diffusion::Superdiffusive => "superdiffusive",
        })
    }
}

pub fn classify(gamma: f64) -> Diffusion {
    if gamma > 1.0 {
        Diffusion::Superdiffusive
    } else if gamma < 1.0 {
        Diffusion::Subdiffusive
    } else {
        Diffusion::Diffusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PlusY,
    MinusY,
    PlusX,
    MinusX,
}

impl Axis {
    fn component(self, d: (f64, f64)) -> f64 {
        match self {
            Axis::PlusY => d.1,
            Axis::MinusY => -d.1,
            Axis::PlusX => d.0,
            Axis::MinusX => -d.0,
        }
    }
}

impl FromStr for Axis {
    type Err = MetricsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+y" | "y" => Ok(Axis::PlusY),
            "-y" => Ok(Axis::MinusY),
            "+x" | "x" => Ok(Axis::PlusX),
            "-x" => Ok(Axis::MinusX),
            _ => Err(MetricsError::UnknownAxis(s.to_string())),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::PlusY => "+y",
            Axis::MinusY => "-y",
            Axis::PlusX => "+x",
            Axis::MinusX => "-x",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessRate {
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
    /// Wilson score interval at 95%.
    pub interval: (f64, f64),
}

impl fmt::Display for SuccessRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} = {:.3} (95% CI {:.3}..{:.3})",
            self.successes, self.trials, self.rate, self.interval.0, self.interval.1
        )
    }
}

pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of trials whose net displacement has a positive component along `axis`.
pub fn success_rate(trials: &[Series], axis: Axis) -> Result<SuccessRate, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::TooFewTrials { needed: 1, found: 0 });
    }
    let successes = trials.iter().filter(|s| axis.component(s.net_displacement()) > 0.0).count();
    Ok(SuccessRate {
        successes,
        trials: trials.len(),
        rate: successes as f64 / trials.len() as f64,
        interval: wilson_interval(successes, trials.len()),
    })
}

/// Net displacement statistics along one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementStats {
    pub mean: f64,
    pub std_dev: f64,
    pub mean_abs: f64,
    pub min: f64,
    pub max: f64,
}

impl fmt::Display for DisplacementStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mean={:.4} sd={:.4} mean_abs={:.4} min={:.4} max={:.4}",
            self.mean, self.std_dev, self.mean_abs, self.min, self.max
        )
    }
}

fn displacement_stats(values: &[f64]) -> DisplacementStats {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    DisplacementStats {
        mean,
        std_dev: var.sqrt(),
        mean_abs: values.iter().map(|v| v.abs()).sum::<f64>() / n,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

pub fn lateral_stats(trials: &[Series]) -> DisplacementStats {
    let dx: Vec<f64> = trials.iter().map(|s| s.net_displacement().0).collect();
    displacement_stats(&dx)
}

pub fn height_stats(trials: &[Series]) -> DisplacementStats {
    let dy: Vec<f64> = trials.iter().map(|s| s.net_displacement().1).collect();
    displacement_stats(&dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::AxialCoord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sys(c: &[(i32, i32)]) -> ParticleSystem {
        ParticleSystem::new(c.iter().map(|&(u, v)| AxialCoord::new(u, v))).unwrap()
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid(&sys(&[(0, 0)])), (0.0, Rational64::from_integer(0)));
        assert_eq!(centroid(&sys(&[(0, 0), (0, 1)])), (0.0, Rational64::new(1, 2)));
        let (x, y) = centroid(&sys(&[(0, 0), (1, 0)]));
        assert!((x - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(y, Rational64::new(1, 4));
    }

    #[test]
    fn noiseless_power_law() {
        let lags: Vec<u64> = (1..=10).collect();
        let msd: Vec<f64> = lags.iter().map(|&t| 4.0 * 0.5 * (t as f64).powf(1.3)).collect();
        let (g, c) = fit_gamma(&lags, &msd, (1, 10)).unwrap();
        assert!((g - 1.3).abs() < 1e-10);
        assert!((c - 2f64.ln()).abs() < 1e-10);
        assert_eq!(classify(g), Diffusion::Superdiffusive);
        assert_eq!(classify(0.7).to_string(), "subdiffusive");
    }

    fn grid(len: u64) -> Vec<u64> {
        (0..=len).collect()
    }

    #[test]
    fn random_walk_is_diffusive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = grid(2000);
        let trials: Vec<Series> = (0..200)
            .map(|_| {
                let mut p = (0.0, 0.0);
                let pos = t
                    .iter()
                    .map(|&k| {
                        if k > 0 {
                            let (du, dv) = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, -1), (-1, 1)][rng.gen_range(0..6)];
                            let (x, y) = AxialCoord::new(du, dv).embed();
                            p = (p.0 + x, p.1 + y);
                        }
                        p
                    })
                    .collect();
                Series::new(t.clone(), pos)
            })
            .collect();
        let r = msd(&trials, None).unwrap();
        assert!((r.gamma - 1.0).abs() < 0.1, "gamma {}", r.gamma);
        assert_eq!(r.msd[0], 0.0);
        assert!(r.msd.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn ballistic_spread_is_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = grid(1000);
        let trials: Vec<Series> = (0..50)
            .map(|_| {
                let v = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                Series::new(t.clone(), t.iter().map(|&k| (v.0 * k as f64, v.1 * k as f64)).collect())
            })
            .collect();
        let r = msd(&trials, None).unwrap();
        assert!((r.gamma - 2.0).abs() < 0.05, "gamma {}", r.gamma);
    }

    #[test]
    fn common_drift_and_translation() {
        let t = grid(100);
        let drift = |off: f64| Series::new(t.clone(), t.iter().map(|&k| (off, 0.3 * k as f64 + off)).collect());
        let trials = vec![drift(0.0), drift(0.0), drift(0.0)];
        let (_, curve) = msd_curve(&trials).unwrap();
        assert!(curve.iter().all(|&m| m == 0.0));
        assert_eq!(msd(&trials, None), Err(MetricsError::FitImpossible { positive: 0 }));
        // translating every trial leaves the curve alone
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let walks: Vec<Series> = (0..5)
            .map(|_| Series::new(t.clone(), t.iter().map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()))
            .collect();
        let moved: Vec<Series> = walks
            .iter()
            .map(|s| Series::new(s.t.clone(), s.pos.iter().map(|p| (p.0 + 7.0, p.1 - 3.0)).collect()))
            .collect();
        let (a, b) = (msd_curve(&walks).unwrap().1, msd_curve(&moved).unwrap().1);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    #[test]
    fn errors() {
        let s = Series::new(vec![0, 1, 2], vec![(0.0, 0.0); 3]);
        assert_eq!(msd_curve(&[s.clone()]), Err(MetricsError::TooFewTrials { needed: 2, found: 1 }));
        let other = Series::new(vec![0, 2, 4], vec![(0.0, 0.0); 3]);
        assert_eq!(msd_curve(&[s.clone(), other]), Err(MetricsError::MismatchedGrid { trial: 1 }));
        assert_eq!(fit_gamma(&[1, 2], &[1.0, 2.0], (5, 5)), Err(MetricsError::DegenerateRange(5, 5)));
    }

    #[test]
    fn default_range_trims() {
        let lags: Vec<u64> = (0..=100_000).step_by(10).collect();
        let (a, b) = default_fit_range(&lags).unwrap();
        assert!(a > 10);
        assert!((b as f64 / a as f64) <= 100.0 + 1e-9);
        assert_eq!(default_fit_range(&[0, 1, 2, 3]), Some((2, 3)));
    }

    #[test]
    fn success_rates() {
        let up = |dx: f64| Series::new(vec![0, 1], vec![(0.0, 0.0), (dx, 1.0)]);
        let all = vec![up(1.0), up(-1.0)];
        assert_eq!(success_rate(&all, Axis::PlusY).unwrap().rate, 1.0);
        assert_eq!(success_rate(&all, Axis::PlusX).unwrap().rate, 0.5);
        let (lo, hi) = wilson_interval(8, 10);
        assert!(lo < 0.8 && hi > 0.8 && lo > 0.4 && hi < 1.0);
        assert_eq!("-x".parse::<Axis>().unwrap(), Axis::MinusX);
        assert!("z".parse::<Axis>().is_err());
        let l = lateral_stats(&all);
        assert_eq!(l.mean, 0.0);
        assert_eq!(l.mean_abs, 1.0);
    }
}
