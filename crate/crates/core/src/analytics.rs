//! Large-m theory of the coarse-grained circuit, the rescaled universal
//! form, and extraction of the decoupling length from measured profiles.
//!
//! Everything here is generic over [`Real`]; times and separations are in
//! block units.

use std::fmt::{self, Write as _};

use crate::circuits::RealizationRecord;
use crate::error::{Error, Result};
use crate::num::Real;

fn critical_time<T: Real>(p: T) -> Option<T> {
    (p > T::zero()).then(|| T::one() / (T::two() * p))
}

/// I^norm(A:C|B) for m -> infinity: max{2t(1-pt) - 2(1-2pt)x, 0} before
/// the critical time 1/(2p), zero after it.
pub fn analytic_cmi_norm<T: Real>(t: T, x: T, p: T) -> T {
    if critical_time(p).is_some_and(|tc| t > tc) {
        return T::zero();
    }
    let two = T::two();
    let v = two * t * (T::one() - p * t) - two * (T::one() - two * p * t) * x;
    v.max(T::zero())
}

/// Separation where the analytic CMI first vanishes: t(1-pt)/(1-2pt).
pub fn analytic_xdec<T: Real>(t: T, p: T) -> Result<T> {
    if let Some(tc) = critical_time(p) {
        if t >= tc {
            return Err(Error::Domain(format!("t = {t} is not below t_c = {tc}")));
        }
    }
    Ok(t * (T::one() - p * t) / (T::one() - T::two() * p * t))
}

/// (t, x, I^norm) -> (2pt, 2px, p I^norm).
pub fn rescale<T: Real>(t: T, x: T, i_norm: T, p: T) -> Result<(T, T, T)> {
    if p <= T::zero() {
        return Err(Error::Domain(format!("rescaling needs p > 0, got {p}")));
    }
    let two_p = T::two() * p;
    Ok((two_p * t, two_p * x, p * i_norm))
}

/// Inverse of [`rescale`].
pub fn unrescale<T: Real>(t_tilde: T, x_tilde: T, i_tilde: T, p: T) -> Result<(T, T, T)> {
    if p <= T::zero() {
        return Err(Error::Domain(format!("rescaling needs p > 0, got {p}")));
    }
    let two_p = T::two() * p;
    Ok((t_tilde / two_p, x_tilde / two_p, i_tilde / p))
}

fn check_t_tilde<T: Real>(t_tilde: T) -> Result<()> {
    if t_tilde < T::zero() || t_tilde >= T::one() {
        return Err(Error::Domain(format!("rescaled time {t_tilde} outside [0, 1)")));
    }
    Ok(())
}

/// Universal form max{0, t~(1 - t~/2) - (1 - t~) x~}.
pub fn analytic_rescaled<T: Real>(t_tilde: T, x_tilde: T) -> Result<T> {
    check_t_tilde(t_tilde)?;
    let v = t_tilde * (T::one() - t_tilde * T::half()) - (T::one() - t_tilde) * x_tilde;
    Ok(v.max(T::zero()))
}

/// t~(1 - t~/2) / (1 - t~).
pub fn analytic_xdec_rescaled<T: Real>(t_tilde: T) -> Result<T> {
    check_t_tilde(t_tilde)?;
    Ok(t_tilde * (T::one() - t_tilde * T::half()) / (T::one() - t_tilde))
}

/// Box-decomposition counts (k1, k2) at time `t`: k1 = 2m(1 - 2pt),
/// k2 = 2mt(1 - pt). Past the critical time k1 stays at 0 and k2 at its
/// value there, m/(2p).
pub fn k1k2_model<T: Real>(t: T, m: T, p: T) -> (T, T) {
    let two = T::two();
    let t_eff = match critical_time(p) {
        Some(tc) if t > tc => tc,
        _ => t,
    };
    let k1 = (two * m * (T::one() - two * p * t_eff)).max(T::zero());
    let k2 = two * m * t_eff * (T::one() - p * t_eff);
    (k1, k2)
}

/// Normalized CMI against separation at one timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayProfile<T> {
    pub n_blocks: usize,
    pub t: usize,
    points: Vec<(T, T)>,
}

impl<T: Real> DecayProfile<T> {
    /// `points` must have strictly increasing x and non-negative values.
    pub fn new(n_blocks: usize, t: usize, points: Vec<(T, T)>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidConfig("profile x values must increase strictly".into()));
        }
        if points.iter().any(|&(_, v)| v < T::zero() || v.is_nan()) {
            return Err(Error::InvalidConfig("profile values must be non-negative".into()));
        }
        Ok(DecayProfile { n_blocks, t, points })
    }

    pub fn points(&self) -> &[(T, T)] {
        &self.points
    }
}

/// Fit-window and boundary-guard thresholds for [`extract_xdec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XdecOptions<T> {
    /// Fit points with `lo * I_ref <= I <= hi * I_ref`, where `I_ref` is
    /// the value at the smallest recorded x.
    pub lo: T,
    pub hi: T,
    /// Reject when the value at the largest recorded x exceeds this
    /// fraction of the profile maximum.
    pub boundary_fraction: T,
}

impl<T: Real> Default for XdecOptions<T> {
    fn default() -> Self {
        XdecOptions {
            lo: T::of(0.2),
            hi: T::of(0.8),
            boundary_fraction: T::of(0.05),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    /// Profile has not decayed by the largest recorded x.
    BoundaryDistortion,
    /// Reference value is zero.
    NoSignal,
    TooFewPoints(usize),
    NonNegativeSlope,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::BoundaryDistortion => f.write_str("boundary_distortion"),
            RejectReason::NoSignal => f.write_str("no_signal"),
            RejectReason::TooFewPoints(n) => write!(f, "too_few_points({n})"),
            RejectReason::NonNegativeSlope => f.write_str("non_negative_slope"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub x_dec: T,
    pub slope: T,
    pub intercept: T,
    pub points: usize,
    pub r2: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitOutcome<T> {
    Accepted(LinearFit<T>),
    Rejected(RejectReason),
}

impl<T: Real> FitOutcome<T> {
    pub fn x_dec(&self) -> Option<T> {
        match self {
            FitOutcome::Accepted(f) => Some(f.x_dec),
            FitOutcome::Rejected(_) => None,
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns (a, b, r^2).
pub fn least_squares<T: Real>(pts: &[(T, T)]) -> (T, T, T) {
    let n = T::of_usize(pts.len());
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in pts {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > T::zero() {
        sxy * sxy / (sxx * syy)
    } else {
        T::one()
    };
    (a, b, r2)
}

/// x-intercept of a straight-line fit to the linearly decaying part of a
/// profile.
pub fn extract_xdec<T: Real>(profile: &DecayProfile<T>, opts: &XdecOptions<T>) -> Result<FitOutcome<T>> {
    let pts = profile.points();
    if pts.len() < 4 {
        return Err(Error::InvalidConfig(format!(
            "profile needs at least 4 points, got {}",
            pts.len()
        )));
    }
    let max = pts.iter().fold(T::zero(), |m, p| m.max(p.1));
    let i_ref = pts[0].1;
    if max <= T::zero() || i_ref <= T::zero() {
        return Ok(FitOutcome::Rejected(RejectReason::NoSignal));
    }
    if pts[pts.len() - 1].1 > opts.boundary_fraction * max {
        return Ok(FitOutcome::Rejected(RejectReason::BoundaryDistortion));
    }
    let (lo, hi) = (opts.lo * i_ref, opts.hi * i_ref);
    let window: Vec<(T, T)> = pts.iter().copied().filter(|&(_, v)| v >= lo && v <= hi).collect();
    if window.len() < 2 {
        return Ok(FitOutcome::Rejected(RejectReason::TooFewPoints(window.len())));
    }
    let (a, b, r2) = least_squares(&window);
    if b >= T::zero() || b.is_nan() {
        return Ok(FitOutcome::Rejected(RejectReason::NonNegativeSlope));
    }
    Ok(FitOutcome::Accepted(LinearFit {
        x_dec: -a / b,
        slope: b,
        intercept: a,
        points: window.len(),
        r2,
    }))
}

/// Per-realization normalized CMI, `[realization][t][x index]`.
pub fn normalized_samples<T: Real>(records: &[RealizationRecord], m: usize) -> Vec<Vec<Vec<T>>> {
    let m = T::of_usize(m);
    records
        .iter()
        .map(|r| {
            r.cmi
                .iter()
                .map(|row| row.iter().map(|&v| T::of_usize(v) / m).collect())
                .collect()
        })
        .collect()
}

/// One timestep of a collapse curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapsePoint<T> {
    pub t: usize,
    pub t_tilde: T,
    pub outcome: FitOutcome<T>,
    /// Delete-one jackknife standard error of x~_dec over realizations.
    pub x_dec_tilde_stderr: T,
}

impl<T: Real> CollapsePoint<T> {
    pub fn x_dec_tilde(&self, p: T) -> Option<T> {
        self.outcome.x_dec().map(|x| T::two() * p * x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseCurve<T> {
    pub p: T,
    pub m: usize,
    pub points: Vec<CollapsePoint<T>>,
}

impl<T: Real> CollapseCurve<T> {
    pub fn at(&self, t: usize) -> Option<&CollapsePoint<T>> {
        self.points.iter().find(|c| c.t == t)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "p,m,t,t_tilde,x_dec,x_dec_tilde,fit_points,fit_r2,rejected_reason,x_dec_tilde_stderr\n",
        );
        for c in &self.points {
            let _ = write!(s, "{},{},{},{},", self.p, self.m, c.t, c.t_tilde);
            match &c.outcome {
                FitOutcome::Accepted(f) => {
                    let _ = write!(
                        s,
                        "{},{},{},{},,",
                        f.x_dec,
                        T::two() * self.p * f.x_dec,
                        f.points,
                        f.r2
                    );
                }
                FitOutcome::Rejected(r) => {
                    let _ = write!(s, ",,0,,{r},");
                }
            }
            let _ = writeln!(s, "{}", c.x_dec_tilde_stderr);
        }
        s
    }
}

fn mean_profile<T: Real>(
    samples: &[Vec<Vec<T>>],
    t: usize,
    x_values: &[usize],
    skip: Option<usize>,
) -> Vec<(T, T)> {
    let count = T::of_usize(samples.len() - usize::from(skip.is_some()));
    (0..x_values.len())
        .map(|i| {
            let sum = samples
                .iter()
                .enumerate()
                .filter(|(r, _)| Some(*r) != skip)
                .fold(T::zero(), |s, (_, rec)| s + rec[t][i]);
            (T::of_usize(x_values[i]), sum / count)
        })
        .collect()
}

/// x_dec extraction and rescaling at each timestep in `t_values`, from
/// per-realization normalized CMI `samples[realization][t][x index]`.
pub fn collapse_curve<T: Real>(
    p: T,
    m: usize,
    n_blocks: usize,
    x_values: &[usize],
    samples: &[Vec<Vec<T>>],
    t_values: &[usize],
    opts: &XdecOptions<T>,
) -> Result<CollapseCurve<T>> {
    if p <= T::zero() {
        return Err(Error::Domain(format!("collapse needs p > 0, got {p}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no realizations".into()));
    }
    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        if samples.iter().any(|s| t >= s.len()) {
            return Err(Error::InvalidConfig(format!("timestep {t} was not recorded")));
        }
        let profile = DecayProfile::new(n_blocks, t, mean_profile(samples, t, x_values, None))?;
        let outcome = extract_xdec(&profile, opts)?;
        let x_dec_tilde_stderr = if outcome.x_dec().is_some() && samples.len() > 1 {
            jackknife_stderr(samples, t, x_values, n_blocks, opts)? * T::two() * p
        } else {
            T::nan()
        };
        points.push(CollapsePoint {
            t,
            t_tilde: T::two() * p * T::of_usize(t),
            outcome,
            x_dec_tilde_stderr,
        });
    }
    Ok(CollapseCurve { p, m, points })
}

fn jackknife_stderr<T: Real>(
    samples: &[Vec<Vec<T>>],
    t: usize,
    x_values: &[usize],
    n_blocks: usize,
    opts: &XdecOptions<T>,
) -> Result<T> {
    let mut est = Vec::with_capacity(samples.len());
    for r in 0..samples.len() {
        let profile = DecayProfile::new(n_blocks, t, mean_profile(samples, t, x_values, Some(r)))?;
        if let Some(x) = extract_xdec(&profile, opts)?.x_dec() {
            est.push(x);
        }
    }
    if est.len() < 2 {
        return Ok(T::nan());
    }
    let n = T::of_usize(est.len());
    let mean = est.iter().fold(T::zero(), |s, &x| s + x) / n;
    let ss = est.iter().fold(T::zero(), |s, &x| s + (x - mean) * (x - mean));
    Ok(((n - T::one()) / n * ss).sqrt())
}
