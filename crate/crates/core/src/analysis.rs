//! Threshold and requirement solvers built on the DV and CV key rates.
//!
//! Key rates are clamped at zero, so every threshold here is located by
//! bisection on the predicate "the rate is positive" rather than on a sign
//! change. Grid evaluations run in parallel; row order and values do not
//! depend on the thread count.

use std::cell::RefCell;

use rayon::prelude::*;

use crate::dv_security::{self, key_rate_dv, qber_threshold, DvProtocol, DvSetup};
use crate::gaussian_cv::{self, key_rate_cv_with, CvSetup, CvVariant, TrustedNoise};
use crate::numerics::{find_transition, log_space, SolverConfig};
use crate::photon_stats::{ChannelModel, NoiseSource};
use crate::{Error, Result, Scalar};

/// Total variance standing in for infinite squeezing.
pub const INFINITE_SQUEEZING_V: f64 = 1e6;

/// Default modulation variance for requirement computations.
pub const DEFAULT_MODULATION: f64 = 1e3;

/// Range of `d/eta` over which the dark-count threshold is defined.
pub const DARK_COUNT_RANGE: (f64, f64) = (1e-7, 1e-4);

/// Smallest squeezing variance considered by [`min_squeezing`].
pub const MIN_SQUEEZING_FLOOR: f64 = 1e-6;

/// Mean photon numbers of the default key-rate curves.
pub const DEFAULT_KEY_RATE_MUS: [f64; 6] = [0.5, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

/// Solver settings shared by the analysis routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig<S> {
    /// Bisection on `mu` and on `log10 T` (relative tolerance).
    pub threshold: SolverConfig<S>,
    /// Bisection on probabilities and on `log10 V_s` (absolute tolerance).
    pub probability: SolverConfig<S>,
    /// Largest mean photon number searched by [`mu_max`].
    pub mu_cap: S,
}

impl<S: Scalar> Default for AnalysisConfig<S> {
    fn default() -> Self {
        Self {
            threshold: SolverConfig::relative(S::lit(1e-6)),
            probability: SolverConfig {
                tolerance: S::lit(1e-9),
                relative_tolerance: S::zero(),
                max_iterations: 200,
            },
            mu_cap: S::lit(1e3),
        }
    }
}

impl<S: Scalar> AnalysisConfig<S> {
    pub fn halved(self) -> Self {
        Self {
            threshold: self.threshold.halved(),
            probability: self.probability.halved(),
            mu_cap: self.mu_cap,
        }
    }

    /// Absolute tolerance on `log10 T` matching the relative threshold
    /// tolerance on `T`.
    fn log_axis(&self) -> SolverConfig<S> {
        SolverConfig {
            tolerance: (self.threshold.relative_tolerance + self.threshold.tolerance) / S::LN_10(),
            relative_tolerance: S::zero(),
            max_iterations: self.threshold.max_iterations,
        }
    }
}

/// Outcome of a `mu_max` search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold<S> {
    Finite(S),
    /// Still secure at the search cap.
    AboveCap,
    /// Insecure even without channel noise.
    NoPositiveRate,
}

impl<S: Scalar> Threshold<S> {
    pub fn finite(&self) -> Option<S> {
        match *self {
            Threshold::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `AboveCap` maps to `+inf`, `NoPositiveRate` to `None`.
    pub fn as_value(&self) -> Option<S> {
        match *self {
            Threshold::Finite(v) => Some(v),
            Threshold::AboveCap => Some(S::infinity()),
            Threshold::NoPositiveRate => None,
        }
    }
}

/// A protocol with every parameter fixed except the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetupTemplate<S> {
    Dv(DvSetup<S>),
    Cv(CvSetup<S>, TrustedNoise<S>),
}

impl<S: Scalar> SetupTemplate<S> {
    /// Squeezed-state protocol at [`INFINITE_SQUEEZING_V`].
    pub fn infinite_squeezing(trusted: TrustedNoise<S>) -> Self {
        Self::squeezed(S::lit(INFINITE_SQUEEZING_V), trusted)
    }

    pub fn squeezed(total_variance: S, trusted: TrustedNoise<S>) -> Self {
        let setup = CvSetup::squeezed(total_variance, default_channel()).expect("valid squeezed setup");
        SetupTemplate::Cv(setup, trusted)
    }

    pub fn gg02(modulation: S, trusted: TrustedNoise<S>) -> Self {
        let setup = CvSetup::gg02(modulation, default_channel()).expect("valid GG02 setup");
        SetupTemplate::Cv(setup, trusted)
    }

    pub fn ideal_dv(protocol: DvProtocol) -> Self {
        SetupTemplate::Dv(DvSetup::ideal(protocol, default_channel()))
    }

    pub fn channel(&self) -> ChannelModel<S> {
        match self {
            SetupTemplate::Dv(s) => s.channel,
            SetupTemplate::Cv(s, _) => s.channel,
        }
    }

    /// Same protocol over a channel of transmittance `t` and mean noise
    /// `mu`, keeping the noise statistics family.
    pub fn at(&self, t: S, mu: S) -> Result<Self> {
        let family = self.channel().noise().family();
        let channel = ChannelModel::new(t, NoiseSource::new(family, mu)?)?;
        Ok(match *self {
            SetupTemplate::Dv(s) => SetupTemplate::Dv(s.with_channel(channel)),
            SetupTemplate::Cv(s, trusted) => SetupTemplate::Cv(s.with_channel(channel), trusted),
        })
    }

    pub fn key_rate(&self) -> Result<S> {
        match self {
            SetupTemplate::Dv(s) => key_rate_dv(s),
            SetupTemplate::Cv(s, trusted) => Ok(key_rate_cv_with(s, *trusted)?.key_rate),
        }
    }

    pub fn is_secure(&self) -> Result<bool> {
        Ok(self.key_rate()? > S::zero())
    }

    pub fn label(&self) -> String {
        match self {
            SetupTemplate::Dv(s) => s.protocol.name().to_string(),
            SetupTemplate::Cv(s, _) => s.variant.name().to_string(),
        }
    }
}

fn default_channel<S: Scalar>() -> ChannelModel<S> {
    ChannelModel::thermal(S::one(), S::zero()).expect("unit transmittance is valid")
}

/// Predicate bisection that surfaces the first error raised by the
/// predicate.
fn bisect<S: Scalar>(
    predicate: impl Fn(S) -> Result<bool>,
    lower: S,
    upper: S,
    cfg: &SolverConfig<S>,
) -> Result<S> {
    let failure = RefCell::new(None);
    let found = find_transition(
        |x| match predicate(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                false
            }
        },
        lower,
        upper,
        cfg,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => found,
    }
}

/// Largest mean noise photon number with a positive key rate at
/// transmittance `t`.
///
/// The bracket starts at `[0, T]` and grows by a factor 4 up to
/// `cfg.mu_cap`.
pub fn mu_max<S: Scalar>(template: &SetupTemplate<S>, t: S, cfg: &AnalysisConfig<S>) -> Result<Threshold<S>> {
    let secure = |mu: S| template.at(t, mu)?.is_secure();
    if !secure(S::zero())? {
        return Ok(Threshold::NoPositiveRate);
    }
    let cap = cfg.mu_cap;
    let mut lower = S::zero();
    let mut upper = t.min(cap);
    while secure(upper)? {
        if upper >= cap {
            return Ok(Threshold::AboveCap);
        }
        lower = upper;
        upper = (upper * S::lit(4.0)).min(cap);
    }
    Ok(Threshold::Finite(bisect(secure, lower, upper, &cfg.threshold)?))
}

/// Per-row status of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    /// No positive rate or no admissible value.
    None,
    /// The infinitely squeezed CV protocol is still secure.
    CvSecure,
    Fail,
}

impl Status {
    pub fn token(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::None => "none",
            Status::CvSecure => "cv_secure",
            Status::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow<S> {
    pub axis: S,
    pub values: Vec<S>,
    pub status: Status,
}

/// Rows of `(axis value, computed values, status)`, one per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult<S> {
    pub axis: String,
    pub columns: Vec<String>,
    pub rows: Vec<CurveRow<S>>,
}

impl<S: Scalar> CurveResult<S> {
    fn build(axis: &str, columns: &[&str], rows: Vec<CurveRow<S>>) -> Self {
        Self {
            axis: axis.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    fn failed_row(axis: S, width: usize) -> CurveRow<S> {
        CurveRow {
            axis,
            values: vec![S::nan(); width],
            status: Status::Fail,
        }
    }

    /// Index of a value column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Quantity swept by a [`CurveRequest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    Transmittance,
    Mu,
    DarkCountRatio,
}

/// A validated sweep of one axis for one protocol template.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRequest<S> {
    pub template: SetupTemplate<S>,
    pub axis: SweepAxis,
    pub grid: Vec<S>,
    pub config: AnalysisConfig<S>,
}

impl<S: Scalar> CurveRequest<S> {
    pub fn new(template: SetupTemplate<S>, axis: SweepAxis, grid: Vec<S>, config: AnalysisConfig<S>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidSetup("empty grid".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSetup("grid must be strictly increasing".into()));
        }
        let (first, last) = (grid[0], grid[grid.len() - 1]);
        match axis {
            SweepAxis::Transmittance if !(first > S::zero() && last <= S::one()) => {
                return Err(Error::domain("T", first.as_f64(), "(0, 1]"));
            }
            SweepAxis::Mu if !(first >= S::zero() && last.is_finite()) => {
                return Err(Error::domain("mu", first.as_f64(), "[0, inf)"));
            }
            SweepAxis::DarkCountRatio => {
                if !matches!(template, SetupTemplate::Dv(_)) {
                    return Err(Error::InvalidSetup("dark-count sweeps need a DV protocol".into()));
                }
                if !(first >= S::zero() && last.is_finite()) {
                    return Err(Error::domain("d/eta", first.as_f64(), "[0, inf)"));
                }
            }
            _ => {}
        }
        Ok(Self {
            template,
            axis,
            grid,
            config,
        })
    }

    /// Threshold `mu_max(T)` for a transmittance sweep, the key rate at the
    /// template's transmittance for a `mu` sweep, and the dark-count
    /// threshold for a `d/eta` sweep.
    pub fn evaluate(&self) -> CurveResult<S> {
        match self.axis {
            SweepAxis::Transmittance => threshold_curve(&self.template, &self.grid, &self.config),
            SweepAxis::Mu => {
                let t = self.template.channel().transmittance();
                let rows = self
                    .grid
                    .par_iter()
                    .map(|&mu| match self.template.at(t, mu).and_then(|s| s.key_rate()) {
                        Ok(k) => rate_row(mu, k),
                        Err(_) => CurveResult::failed_row(mu, 1),
                    })
                    .collect();
                CurveResult::build("mu", &["key_rate"], rows)
            }
            SweepAxis::DarkCountRatio => {
                let cv = SetupTemplate::infinite_squeezing(TrustedNoise::Fixed(S::zero()));
                dark_count_curve(&self.template, &cv, &self.grid, &self.config)
            }
        }
    }
}

fn rate_row<S: Scalar>(axis: S, k: S) -> CurveRow<S> {
    CurveRow {
        axis,
        values: vec![k],
        status: if k > S::zero() { Status::Ok } else { Status::None },
    }
}

fn threshold_row<S: Scalar>(axis: S, threshold: Result<Threshold<S>>) -> CurveRow<S> {
    match threshold {
        Ok(th) => match th.as_value() {
            Some(v) => CurveRow {
                axis,
                values: vec![v],
                status: Status::Ok,
            },
            None => CurveRow {
                axis,
                values: vec![S::nan()],
                status: Status::None,
            },
        },
        Err(_) => CurveResult::failed_row(axis, 1),
    }
}

/// `mu_max(T)` over a transmittance grid. Rows above the search cap carry
/// `+inf`.
pub fn threshold_curve<S: Scalar>(template: &SetupTemplate<S>, t_grid: &[S], cfg: &AnalysisConfig<S>) -> CurveResult<S> {
    let rows = t_grid
        .par_iter()
        .map(|&t| threshold_row(t, mu_max(template, t, cfg)))
        .collect();
    CurveResult::build("T", &["mu_max"], rows)
}

/// Ratio `mu_max^CV / mu_max^DV` over a transmittance grid.
///
/// Columns: `mu_max_cv`, `mu_max_dv`, `ratio`. A DV threshold above the
/// search cap gives ratio 0.
pub fn ratio_curve<S: Scalar>(
    cv: &SetupTemplate<S>,
    dv: &SetupTemplate<S>,
    t_grid: &[S],
    cfg: &AnalysisConfig<S>,
) -> CurveResult<S> {
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let pair = mu_max(cv, t, cfg).and_then(|c| Ok((c, mu_max(dv, t, cfg)?)));
            match pair {
                Ok((c, d)) => match (c.as_value(), d.as_value()) {
                    (Some(c), Some(d)) => CurveRow {
                        axis: t,
                        values: vec![c, d, if d.is_infinite() { S::zero() } else { c / d }],
                        status: Status::Ok,
                    },
                    (c, d) => CurveRow {
                        axis: t,
                        values: vec![c.unwrap_or(S::nan()), d.unwrap_or(S::nan()), S::nan()],
                        status: Status::None,
                    },
                },
                Err(_) => CurveResult::failed_row(t, 3),
            }
        })
        .collect();
    CurveResult::build("T", &["mu_max_cv", "mu_max_dv", "ratio"], rows)
}

fn dv_setup<S: Scalar>(template: &SetupTemplate<S>) -> Result<DvSetup<S>> {
    match template {
        SetupTemplate::Dv(s) => Ok(*s),
        SetupTemplate::Cv(..) => Err(Error::InvalidSetup("expected a DV protocol".into())),
    }
}

fn cv_setup<S: Scalar>(template: &SetupTemplate<S>) -> Result<(CvSetup<S>, TrustedNoise<S>)> {
    match template {
        SetupTemplate::Cv(s, trusted) => Ok((*s, *trusted)),
        SetupTemplate::Dv(_) => Err(Error::InvalidSetup("expected a CV protocol".into())),
    }
}

/// Smallest single-photon probability `p` giving a positive key rate, or
/// `None` when even `p = 1` is insecure.
pub fn min_source_p<S: Scalar>(dv: &SetupTemplate<S>, t: S, mu: S, cfg: &AnalysisConfig<S>) -> Result<Option<S>> {
    let base = dv_setup(&dv.at(t, mu)?)?;
    let secure = |p: S| Ok(key_rate_dv(&base.with_source_p(p))? > S::zero());
    if !secure(S::one())? {
        return Ok(None);
    }
    Ok(Some(bisect(secure, S::zero(), S::one(), &cfg.probability)?))
}

/// Largest signal variance `V_s` (least squeezing) giving a positive key
/// rate with independently chosen modulation `V_m`.
///
/// Returns 1 when no squeezing is needed and `None` when the protocol is
/// insecure even at `V_s =` [`MIN_SQUEEZING_FLOOR`].
pub fn min_squeezing<S: Scalar>(
    modulation: S,
    trusted: TrustedNoise<S>,
    t: S,
    mu: S,
    cfg: &AnalysisConfig<S>,
) -> Result<Option<S>> {
    let channel = ChannelModel::thermal(t, mu)?;
    let secure = |log_vs: S| {
        let setup = CvSetup::generalized(S::lit(10.0).powf(log_vs), modulation, channel)?;
        Ok(key_rate_cv_with(&setup, trusted)?.key_rate > S::zero())
    };
    if secure(S::zero())? {
        return Ok(Some(S::one()));
    }
    let floor = S::lit(MIN_SQUEEZING_FLOOR).log10();
    if !secure(floor)? {
        return Ok(None);
    }
    let log_vs = bisect(secure, floor, S::zero(), &cfg.probability)?;
    Ok(Some(S::lit(10.0).powf(log_vs)))
}

/// Lower end of the transmittance search for [`cv_cutoff_transmittance`].
pub const CV_CUTOFF_SEARCH_MIN_T: f64 = 1e-10;

/// Smallest transmittance at which the CV protocol is secure for noise
/// `mu`, or `None` if it is secure down to [`CV_CUTOFF_SEARCH_MIN_T`].
pub fn cv_cutoff_transmittance<S: Scalar>(cv: &SetupTemplate<S>, mu: S, cfg: &AnalysisConfig<S>) -> Result<Option<S>> {
    cv_setup(cv)?;
    let ten = S::lit(10.0);
    let secure = |log_t: S| cv.at(ten.powf(log_t).min(S::one()), mu)?.is_secure();
    let lower = S::lit(CV_CUTOFF_SEARCH_MIN_T).log10();
    if secure(lower)? {
        return Ok(None);
    }
    if !secure(S::zero())? {
        return Err(Error::InvalidSetup("CV protocol insecure at unit transmittance".into()));
    }
    let log_t = bisect(secure, lower, S::zero(), &cfg.log_axis())?;
    Ok(Some(ten.powf(log_t)))
}

/// Smallest transmittance at which the DV protocol still tolerates more
/// noise than the CV protocol, for dark-count probability `d = d_over_eta *
/// eta` and a perfect single-photon source.
///
/// The search scans a log grid of [`DARK_COUNT_SCAN_POINTS`] points on
/// [`DARK_COUNT_SCAN_RANGE`] for the first insecure-to-secure transition,
/// then bisects. `None` when `d_over_eta` is zero or DV never wins on the
/// scan.
pub fn dark_count_threshold<S: Scalar>(
    dv: &SetupTemplate<S>,
    cv: &SetupTemplate<S>,
    d_over_eta: S,
    cfg: &AnalysisConfig<S>,
) -> Result<Option<S>> {
    let base = dv_setup(dv)?;
    cv_setup(cv)?;
    if d_over_eta == S::zero() {
        return Ok(None);
    }
    let (lo, hi) = DARK_COUNT_RANGE;
    let slack = S::lit(1e-9);
    if !(d_over_eta >= S::lit(lo) * (S::one() - slack) && d_over_eta <= S::lit(hi) * (S::one() + slack)) {
        return Err(Error::domain("d/eta", d_over_eta.as_f64(), "[1e-7, 1e-4]"));
    }
    let eta = base.efficiency_eta;
    let dv_setup = base.with_source_p(S::one()).with_dark_counts(d_over_eta * eta, eta);
    let dv_template = SetupTemplate::Dv(dv_setup);
    let ten = S::lit(10.0);
    let dv_wins = |log_t: S| -> Result<bool> {
        let t = ten.powf(log_t).min(S::one());
        match mu_max(cv, t, cfg)? {
            Threshold::Finite(mu_cv) => dv_template.at(t, mu_cv)?.is_secure(),
            Threshold::NoPositiveRate => dv_template.at(t, S::zero())?.is_secure(),
            Threshold::AboveCap => Ok(false),
        }
    };
    let (scan_lo, scan_hi) = DARK_COUNT_SCAN_RANGE;
    let grid = log_space(S::lit(scan_lo), S::lit(scan_hi), DARK_COUNT_SCAN_POINTS)?;
    let wins: Vec<bool> = grid
        .par_iter()
        .map(|&t| dv_wins(t.log10()))
        .collect::<Result<_>>()?;
    let Some(first) = wins.iter().position(|&w| w) else {
        return Ok(None);
    };
    if first == 0 {
        return Ok(Some(grid[0]));
    }
    let log_t = bisect(dv_wins, grid[first - 1].log10(), grid[first].log10(), &cfg.log_axis())?;
    Ok(Some(ten.powf(log_t)))
}

/// Transmittance range scanned by [`dark_count_threshold`].
pub const DARK_COUNT_SCAN_RANGE: (f64, f64) = (1e-8, 0.316_227_766_016_837_94);

/// Number of scan points, about ten per decade.
pub const DARK_COUNT_SCAN_POINTS: usize = 76;

/// Fitted upper bound `log10 T_th <= a log10(d/eta) + b` on the dark-count
/// threshold.
pub fn dark_count_bound<S: Scalar>(protocol: DvProtocol, d_over_eta: S) -> S {
    let (a, b) = match protocol {
        DvProtocol::SixState => (1.07, 1.45),
        DvProtocol::Bb84 => (1.15, 2.12),
    };
    S::lit(10.0).powf(S::lit(a) * d_over_eta.log10() + S::lit(b))
}

/// Dark-count thresholds over a `d/eta` grid, with the fitted bound and
/// the margin `log10(bound / T_th)` in decades.
pub fn dark_count_curve<S: Scalar>(
    dv: &SetupTemplate<S>,
    cv: &SetupTemplate<S>,
    grid: &[S],
    cfg: &AnalysisConfig<S>,
) -> CurveResult<S> {
    let protocol = dv_setup(dv).map(|s| s.protocol).ok();
    let rows = grid
        .iter()
        .map(|&r| match (protocol, dark_count_threshold(dv, cv, r, cfg)) {
            (Some(p), Ok(Some(t))) => {
                let bound = dark_count_bound(p, r);
                CurveRow {
                    axis: r,
                    values: vec![t, bound, (bound / t).log10()],
                    status: Status::Ok,
                }
            }
            (Some(p), Ok(None)) => CurveRow {
                axis: r,
                values: vec![S::nan(), dark_count_bound(p, r), S::nan()],
                status: Status::None,
            },
            _ => CurveResult::failed_row(r, 3),
        })
        .collect();
    CurveResult::build("d_over_eta", &["t_th", "bound", "margin_decades"], rows)
}

/// Key rate over a transmittance grid at the template's `mu`.
pub fn key_rate_curve<S: Scalar>(template: &SetupTemplate<S>, t_grid: &[S]) -> CurveResult<S> {
    let mu = template.channel().noise().mean();
    let rows = t_grid
        .par_iter()
        .map(|&t| match template.at(t, mu).and_then(|s| s.key_rate()) {
            Ok(k) => rate_row(t, k),
            Err(_) => CurveResult::failed_row(t, 1),
        })
        .collect();
    CurveResult::build("T", &["key_rate"], rows)
}

/// Required source quality over a `(T, mu)` grid.
///
/// Columns `mu`, `min_p`. Cells where the CV protocol is still secure are
/// marked [`Status::CvSecure`]; cells insecure even at `p = 1` are
/// [`Status::None`]. Rows are ordered by `T`, then `mu`.
pub fn region_map<S: Scalar>(
    dv: &SetupTemplate<S>,
    cv: &SetupTemplate<S>,
    t_grid: &[S],
    mu_grid: &[S],
    cfg: &AnalysisConfig<S>,
) -> CurveResult<S> {
    let cells: Vec<(S, S)> = t_grid
        .iter()
        .flat_map(|&t| mu_grid.iter().map(move |&mu| (t, mu)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(t, mu)| {
            let cell = cv.at(t, mu).and_then(|c| c.is_secure()).and_then(|cv_secure| {
                if cv_secure {
                    Ok((S::nan(), Status::CvSecure))
                } else {
                    Ok(match min_source_p(dv, t, mu, cfg)? {
                        Some(p) => (p, Status::Ok),
                        None => (S::nan(), Status::None),
                    })
                }
            });
            match cell {
                Ok((p, status)) => CurveRow {
                    axis: t,
                    values: vec![mu, p],
                    status,
                },
                Err(_) => CurveRow {
                    axis: t,
                    values: vec![mu, S::nan()],
                    status: Status::Fail,
                },
            }
        })
        .collect();
    CurveResult::build("T", &["mu", "min_p"], rows)
}

/// Exact threshold against its small-`T` law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCheck<S> {
    pub protocol: &'static str,
    pub t: S,
    pub exact: S,
    pub asymptotic: S,
    pub relative_error: S,
}

/// Compares `mu_max` of the ideal six-state protocol and of the infinitely
/// squeezed CV protocol with their small-`T` laws.
pub fn asymptotic_agreement<S: Scalar>(t_values: &[S], cfg: &AnalysisConfig<S>) -> Result<Vec<AsymptoticCheck<S>>> {
    let q_th = qber_threshold::<S>(DvProtocol::SixState, false)?;
    let dv = SetupTemplate::ideal_dv(DvProtocol::SixState);
    let cv = SetupTemplate::infinite_squeezing(TrustedNoise::Fixed(S::zero()));
    let mut checks = Vec::with_capacity(2 * t_values.len());
    for &t in t_values {
        let laws = [
            ("sixstate", &dv, dv_security::asymptotic_mu_max_dv(t, q_th)?),
            ("squeezed", &cv, gaussian_cv::asymptotic_mu_max_cv(t)?),
        ];
        for (protocol, template, asymptotic) in laws {
            let exact = mu_max(template, t, cfg)?
                .finite()
                .ok_or_else(|| Error::InvalidSetup(format!("{protocol} threshold not finite at T = {}", t.as_f64())))?;
            checks.push(AsymptoticCheck {
                protocol,
                t,
                exact,
                asymptotic,
                relative_error: ((exact - asymptotic) / asymptotic).abs(),
            });
        }
    }
    Ok(checks)
}

/// Relative change of the squeezed-state `mu_max` at `t` when the total
/// variance doubles from [`INFINITE_SQUEEZING_V`].
pub fn squeezing_convergence<S: Scalar>(t: S, trusted: TrustedNoise<S>, cfg: &AnalysisConfig<S>) -> Result<S> {
    let v = S::lit(INFINITE_SQUEEZING_V);
    let base = mu_max(&SetupTemplate::squeezed(v, trusted), t, cfg)?;
    let doubled = mu_max(&SetupTemplate::squeezed(v * S::lit(2.0), trusted), t, cfg)?;
    match (base.finite(), doubled.finite()) {
        (Some(a), Some(b)) => Ok(((b - a) / a).abs()),
        _ => Err(Error::InvalidSetup("squeezed threshold not finite".into())),
    }
}

/// CV setup with independently chosen squeezing and modulation.
pub fn generalized_template<S: Scalar>(signal_variance: S, modulation: S, trusted: TrustedNoise<S>) -> Result<SetupTemplate<S>> {
    let setup = CvSetup::new(CvVariant::Generalized, signal_variance, modulation, default_channel())?;
    Ok(SetupTemplate::Cv(setup, trusted))
}
