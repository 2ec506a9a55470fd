//! Discrete-variable observables and key rates.
//!
//! Bob's two detectors sit behind the two polarization modes, each of which
//! is coupled to its own noise source. A pulse is accepted when exactly one
//! detector registers; it is an error when that detector is the wrong one.
//!
//! Realistic devices: the source emits a single photon with probability
//! `source_p` and nothing otherwise, every photon reaching a detector is
//! registered with probability `efficiency_eta`, and each detector adds one
//! dark count with probability `dark_count_d` per window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};
use rayon::prelude::*;

use crate::numerics::{
    binary_entropy, find_transition, maximize_scalar, six_state_f, xlog2x, BracketedFunction,
    SolverConfig,
};
use crate::photon_stats::{ChannelModel, NoiseFamily, NoiseSource};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DvProtocol {
    Bb84,
    SixState,
}

impl DvProtocol {
    pub fn name(&self) -> &'static str {
        match self {
            DvProtocol::Bb84 => "bb84",
            DvProtocol::SixState => "sixstate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    /// Click / no-click detector.
    Binary,
    /// Photon-number-resolving detector.
    Pnr,
}

impl Detector {
    pub fn name(&self) -> &'static str {
        match self {
            Detector::Binary => "binary",
            Detector::Pnr => "pnr",
        }
    }
}

/// Direction of the extremization over Eve's attack parameter `lambda` in
/// the BB84 preprocessing bound.
///
/// `Max` reduces to `H(Q)` without preprocessing and is the default. `Min`
/// follows the bound as it is usually printed and collapses to zero at
/// `x = 0`; it is kept for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LambdaExtremum {
    #[default]
    Max,
    Min,
}

/// A DV link: protocol, source and detector parameters, and the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvSetup<S> {
    pub protocol: DvProtocol,
    pub preprocessing: bool,
    /// Probability that a pulse carries a single photon (never more).
    pub source_p: S,
    pub detector: Detector,
    pub dark_count_d: S,
    pub efficiency_eta: S,
    pub channel: ChannelModel<S>,
}

impl<S: Scalar> DvSetup<S> {
    /// Perfect single-photon source, lossless noiseless binary detectors,
    /// no preprocessing.
    pub fn ideal(protocol: DvProtocol, channel: ChannelModel<S>) -> Self {
        Self {
            protocol,
            preprocessing: false,
            source_p: S::one(),
            detector: Detector::Binary,
            dark_count_d: S::zero(),
            efficiency_eta: S::one(),
            channel,
        }
    }

    pub fn with_channel(mut self, channel: ChannelModel<S>) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_preprocessing(mut self, preprocessing: bool) -> Self {
        self.preprocessing = preprocessing;
        self
    }

    pub fn with_detector(mut self, detector: Detector) -> Self {
        self.detector = detector;
        self
    }

    pub fn with_source_p(mut self, source_p: S) -> Self {
        self.source_p = source_p;
        self
    }

    pub fn with_dark_counts(mut self, dark_count_d: S, efficiency_eta: S) -> Self {
        self.dark_count_d = dark_count_d;
        self.efficiency_eta = efficiency_eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.source_p;
        if !(p >= S::zero() && p <= S::one()) {
            return Err(Error::domain("source_p", p.as_f64(), "[0, 1]"));
        }
        let d = self.dark_count_d;
        if !(d >= S::zero() && d < S::one()) {
            return Err(Error::domain("dark_count_d", d.as_f64(), "[0, 1)"));
        }
        let eta = self.efficiency_eta;
        if !(eta > S::zero() && eta <= S::one()) {
            return Err(Error::domain("efficiency_eta", eta.as_f64(), "(0, 1]"));
        }
        Ok(())
    }

    /// Probability that the signal photon exists, passes the channel and is
    /// registered.
    fn signal_detected(&self) -> S {
        self.source_p * self.channel.transmittance() * self.efficiency_eta
    }

    /// Noise photons registered by one detector.
    fn registered_noise(&self) -> NoiseSource<S> {
        self.channel
            .coupled_noise()
            .thin(self.efficiency_eta)
            .expect("efficiency validated")
    }
}

/// Accepted-event probability per pulse and the error fraction among
/// accepted events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvObservables<S> {
    pub p_exp: S,
    pub qber: S,
}

impl<S: Scalar> DvObservables<S> {
    fn from_counts(correct: S, error: S) -> Self {
        let p_exp = correct + error;
        let qber = if p_exp > S::zero() { error / p_exp } else { S::zero() };
        Self { p_exp, qber }
    }
}

/// Probabilities of the four binary-detector outcomes of one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryEvents<S> {
    /// Only the right detector clicks.
    pub correct: S,
    /// Only the wrong detector clicks.
    pub error: S,
    pub double_click: S,
    pub no_click: S,
}

impl<S: Scalar> BinaryEvents<S> {
    pub fn accepted(&self) -> S {
        self.correct + self.error
    }

    pub fn total(&self) -> S {
        self.correct + self.error + self.double_click + self.no_click
    }
}

/// Outcome probabilities for the binary detector model.
pub fn binary_events<S: Scalar>(setup: &DvSetup<S>) -> Result<BinaryEvents<S>> {
    setup.validate()?;
    let one = S::one();
    let s = setup.signal_detected();
    // probability that a detector stays silent in the absence of the signal
    let z = setup.registered_noise().pmf(0) * (one - setup.dark_count_d);
    let right_clicks = s + (one - s) * (one - z);
    Ok(BinaryEvents {
        correct: right_clicks * z,
        error: (one - s) * z * (one - z),
        double_click: right_clicks * (one - z),
        no_click: (one - s) * z * z,
    })
}

fn require_detector<S>(setup: &DvSetup<S>, detector: Detector) -> Result<()> {
    if setup.detector != detector {
        return Err(Error::InvalidSetup(format!(
            "expected a {} detector, got {}",
            detector.name(),
            setup.detector.name()
        )));
    }
    Ok(())
}

/// Observables for click / no-click detectors; double clicks are discarded.
pub fn observables_binary<S: Scalar>(setup: &DvSetup<S>) -> Result<DvObservables<S>> {
    require_detector(setup, Detector::Binary)?;
    let ev = binary_events(setup)?;
    Ok(DvObservables::from_counts(ev.correct, ev.error))
}

/// Observables for photon-number-resolving detectors: a pulse is accepted
/// when one detector registers exactly one count and the other none.
pub fn observables_pnr<S: Scalar>(setup: &DvSetup<S>) -> Result<DvObservables<S>> {
    require_detector(setup, Detector::Pnr)?;
    setup.validate()?;
    let one = S::one();
    let s = setup.signal_detected();
    let noise = setup.registered_noise();
    let d = setup.dark_count_d;
    let (q0, q1) = (noise.pmf(0), noise.pmf(1));
    // zero and exactly one count from noise plus dark counts
    let a0 = q0 * (one - d);
    let a1 = q1 * (one - d) + q0 * d;
    let correct = (s * a0 + (one - s) * a1) * a0;
    let error = (one - s) * a0 * a1;
    Ok(DvObservables::from_counts(correct, error))
}

/// Observables for the detector model configured in `setup`.
pub fn observables<S: Scalar>(setup: &DvSetup<S>) -> Result<DvObservables<S>> {
    match setup.detector {
        Detector::Binary => observables_binary(setup),
        Detector::Pnr => observables_pnr(setup),
    }
}

/// Alice's flip probability and Eve's attack parameter in the
/// preprocessing bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessingParams<S> {
    pub x: S,
    pub lambda: S,
}

impl<S: Scalar> PreprocessingParams<S> {
    pub fn new(x: S, lambda: S, qber: S) -> Result<Self> {
        check_flip(x)?;
        if !(lambda >= S::zero() && lambda <= qber) {
            return Err(Error::domain("lambda", lambda.as_f64(), "[0, Q]"));
        }
        Ok(Self { x, lambda })
    }
}

fn check_flip<S: Scalar>(x: S) -> Result<()> {
    if !(x >= S::zero() && x <= S::lit(0.5)) {
        return Err(Error::domain("x", x.as_f64(), "[0, 1/2]"));
    }
    Ok(())
}

/// The bracket maximized (or minimized) over `lambda` in Eve's BB84
/// information, at fixed `Q` and flip probability.
pub fn bb84_lambda_bracket<S: Scalar>(qber: S, params: PreprocessingParams<S>) -> S {
    let (one, two, half) = (S::one(), S::lit(2.0), S::lit(0.5));
    let (q, l, x) = (qber, params.lambda, params.x);
    let flip = S::lit(16.0) * x * (one - x);
    let r12 = ((one - q) * (one - q) + flip * (l - two * q + one) * (l - q))
        .max(S::zero())
        .sqrt();
    let r34 = (q * q + flip * l * (l - q)).max(S::zero()).sqrt();
    let a = [
        (one - q + r12) * half,
        (one - q - r12) * half,
        (q + r34) * half,
        (q - r34) * half,
    ];
    a.iter().map(|&ai| xlog2x(ai)).fold(S::zero(), |acc, v| acc + v)
        - xlog2x(one + l - two * q)
        - two * xlog2x(q - l)
        - xlog2x(l)
}

/// Eve's information on the BB84 raw key after Alice flips each bit with
/// probability `x`, extremized over `lambda` in `[0, Q]` by maximization.
pub fn eve_info_bb84<S: Scalar>(qber: S, x: S) -> Result<S> {
    eve_info_bb84_with(qber, x, LambdaExtremum::Max)
}

pub fn eve_info_bb84_with<S: Scalar>(qber: S, x: S, extremum: LambdaExtremum) -> Result<S> {
    if !(qber >= S::zero() && qber < S::lit(0.5)) {
        return Err(Error::domain("Q", qber.as_f64(), "[0, 1/2)"));
    }
    check_flip(x)?;
    if qber == S::zero() {
        return Ok(S::zero());
    }
    let sign = match extremum {
        LambdaExtremum::Max => S::one(),
        LambdaExtremum::Min => -S::one(),
    };
    let bracket = BracketedFunction::new(
        |lambda: S| sign * bb84_lambda_bracket(qber, PreprocessingParams { x, lambda }),
        S::zero(),
        qber,
    )?;
    let (_, value) = maximize_scalar(&bracket, &SolverConfig::optimization())?;
    Ok(sign * value)
}

/// Eve's information on the six-state raw key at flip probability `x`.
pub fn eve_info_sixstate<S: Scalar>(qber: S, x: S) -> Result<S> {
    let two_thirds = S::lit(2.0) / S::lit(3.0);
    if !(qber >= S::zero() && qber <= two_thirds) {
        return Err(Error::domain("Q", qber.as_f64(), "[0, 2/3]"));
    }
    check_flip(x)?;
    let (one, half) = (S::one(), S::lit(0.5));
    let q = qber;
    let mut disc = (one - q) * (one - q) - S::lit(4.0) * x * (one - x) * q * (S::lit(2.0) - S::lit(3.0) * q);
    if disc < S::zero() {
        if disc < -S::lit(1e-14) {
            return Err(Error::domain("six-state discriminant", disc.as_f64(), "[0, inf)"));
        }
        disc = S::zero();
    }
    let r = disc.sqrt();
    let b = [
        (one - q + r) * half,
        (one - q - r) * half,
        q * (one - x),
        q * x,
    ];
    let sum = b.iter().map(|&bi| xlog2x(bi)).fold(S::zero(), |acc, v| acc + v);
    Ok(sum + six_state_f(q)?)
}

/// Alice-Bob mutual information per accepted bit after Alice's flips.
pub fn mutual_info_ab<S: Scalar>(qber: S, x: S) -> Result<S> {
    check_flip(x)?;
    let one = S::one();
    let effective = ((one - x) * qber + x * (one - qber)).min(one).max(S::zero());
    Ok(one - binary_entropy(effective)?)
}

/// Secret fractions at or below this value count as zero.
///
/// Guards against rounding residue such as the analytically vanishing rate
/// at `x = 1/2`.
pub fn secret_fraction_floor<S: Scalar>() -> S {
    S::epsilon().sqrt() * S::lit(1e-4)
}

/// Secure bits per accepted event before clamping at zero.
pub fn secret_fraction<S: Scalar>(protocol: DvProtocol, preprocessing: bool, qber: S) -> Result<S> {
    secret_fraction_with(protocol, preprocessing, qber, LambdaExtremum::Max)
}

pub fn secret_fraction_with<S: Scalar>(
    protocol: DvProtocol,
    preprocessing: bool,
    qber: S,
    extremum: LambdaExtremum,
) -> Result<S> {
    let half = S::lit(0.5);
    if !(qber >= S::zero() && qber <= half) {
        return Err(Error::domain("Q", qber.as_f64(), "[0, 1/2]"));
    }
    let one = S::one();
    let plain = match protocol {
        DvProtocol::Bb84 => one - S::lit(2.0) * binary_entropy(qber)?,
        DvProtocol::SixState => one - six_state_f(qber)?,
    };
    if !preprocessing || qber >= half {
        return Ok(plain);
    }
    let objective = |x: S| {
        let eve = match protocol {
            DvProtocol::Bb84 => eve_info_bb84_with(qber, x, extremum),
            DvProtocol::SixState => eve_info_sixstate(qber, x),
        };
        match (mutual_info_ab(qber, x), eve) {
            (Ok(ab), Ok(e)) => ab - e,
            _ => S::neg_infinity(),
        }
    };
    let bracket = BracketedFunction::new(objective, S::zero(), half)?;
    let (_, best) = maximize_scalar(&bracket, &SolverConfig::optimization())?;
    Ok(best)
}

/// Key rate in secure bits per source pulse.
pub fn key_rate_dv<S: Scalar>(setup: &DvSetup<S>) -> Result<S> {
    let obs = observables(setup)?;
    if obs.p_exp <= S::zero() {
        return Ok(S::zero());
    }
    let fraction = secret_fraction(setup.protocol, setup.preprocessing, obs.qber)?;
    Ok(if fraction > secret_fraction_floor() {
        obs.p_exp * fraction
    } else {
        S::zero()
    })
}

/// Largest QBER with a positive secret fraction.
pub fn qber_threshold<S: Scalar>(protocol: DvProtocol, preprocessing: bool) -> Result<S> {
    let floor = secret_fraction_floor::<S>();
    find_transition(
        |q| {
            secret_fraction(protocol, preprocessing, q)
                .map(|f| f > floor)
                .unwrap_or(false)
        },
        S::zero(),
        S::lit(0.25),
        &SolverConfig::default(),
    )
}

/// Small-`T` law `mu_max = T Q_th / (1 - 2 Q_th)`.
pub fn asymptotic_mu_max_dv<S: Scalar>(transmittance: S, q_th: S) -> Result<S> {
    if !(transmittance > S::zero() && transmittance <= S::one()) {
        return Err(Error::domain("T", transmittance.as_f64(), "(0, 1]"));
    }
    if !(q_th >= S::zero() && q_th < S::lit(0.5)) {
        return Err(Error::domain("Q_th", q_th.as_f64(), "[0, 1/2)"));
    }
    Ok(transmittance * q_th / (S::one() - S::lit(2.0) * q_th))
}

/// Trials simulated per random stream.
pub const SIMULATION_BLOCK: u64 = 1 << 14;

/// Monte Carlo estimates with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DvSimulation<S> {
    pub trials: u64,
    pub accepted: u64,
    pub errors: u64,
    pub p_exp: S,
    pub qber: S,
    pub p_exp_std_error: S,
    pub qber_std_error: S,
}

enum NoiseSampler {
    Silent,
    Thermal(Geometric),
    Poisson(Poisson<f64>),
}

impl NoiseSampler {
    fn new(family: NoiseFamily, mu: f64) -> Result<Self> {
        if mu == 0.0 {
            return Ok(NoiseSampler::Silent);
        }
        let bad = |_| Error::domain("mu", mu, "sampleable mean");
        Ok(match family {
            NoiseFamily::Thermal => NoiseSampler::Thermal(Geometric::new(1.0 / (1.0 + mu)).map_err(bad)?),
            NoiseFamily::Poisson => NoiseSampler::Poisson(Poisson::new(mu).map_err(|_| Error::domain("mu", mu, "sampleable mean"))?),
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        match self {
            NoiseSampler::Silent => 0,
            NoiseSampler::Thermal(g) => g.sample(rng),
            NoiseSampler::Poisson(p) => p.sample(rng) as u64,
        }
    }
}

fn thin<R: Rng>(rng: &mut R, n: u64, keep: f64) -> u64 {
    if n == 0 || keep >= 1.0 {
        return n;
    }
    Binomial::new(n, keep).expect("keep probability in [0, 1]").sample(rng)
}

struct TrialModel {
    source_p: f64,
    transmittance: f64,
    eta: f64,
    dark: f64,
    detector: Detector,
    noise: NoiseSampler,
}

impl TrialModel {
    fn registered_noise<R: Rng>(&self, rng: &mut R) -> u64 {
        let emitted = self.noise.sample(rng);
        let coupled = thin(rng, emitted, 1.0 - self.transmittance);
        thin(rng, coupled, self.eta)
    }

    /// Returns `(accepted, error)` for one pulse.
    fn run<R: Rng>(&self, rng: &mut R) -> (bool, bool) {
        let emitted = rng.random::<f64>() < self.source_p;
        let arrives = emitted && rng.random::<f64>() < self.transmittance;
        let registered = arrives && rng.random::<f64>() < self.eta;
        let right = u64::from(registered)
            + self.registered_noise(rng)
            + u64::from(rng.random::<f64>() < self.dark);
        let wrong = self.registered_noise(rng) + u64::from(rng.random::<f64>() < self.dark);
        match self.detector {
            Detector::Binary => {
                let accepted = (right > 0) != (wrong > 0);
                (accepted, accepted && wrong > 0)
            }
            Detector::Pnr => match (right, wrong) {
                (1, 0) => (true, false),
                (0, 1) => (true, true),
                _ => (false, false),
            },
        }
    }
}

/// Photon-level Monte Carlo estimate of `p_exp` and the QBER.
///
/// Trials are split into blocks of [`SIMULATION_BLOCK`]; block `b` draws
/// from stream `b` of a ChaCha8 generator seeded with `seed`, so the result
/// depends only on `(setup, trials, seed)` and not on the thread count.
pub fn simulate_dv<S: Scalar>(setup: &DvSetup<S>, trials: u64, seed: u64) -> Result<DvSimulation<S>> {
    if trials == 0 {
        return Err(Error::InvalidSetup("trials must be at least 1".into()));
    }
    setup.validate()?;
    let noise = setup.channel.noise();
    let model = TrialModel {
        source_p: setup.source_p.as_f64(),
        transmittance: setup.channel.transmittance().as_f64(),
        eta: setup.efficiency_eta.as_f64(),
        dark: setup.dark_count_d.as_f64(),
        detector: setup.detector,
        noise: NoiseSampler::new(noise.family(), noise.mean().as_f64())?,
    };
    let blocks = trials.div_ceil(SIMULATION_BLOCK);
    let (accepted, errors) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = SIMULATION_BLOCK.min(trials - b * SIMULATION_BLOCK);
            let mut tally = (0u64, 0u64);
            for _ in 0..count {
                let (acc, err) = model.run(&mut rng);
                tally.0 += u64::from(acc);
                tally.1 += u64::from(err);
            }
            tally
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = trials as f64;
    let p_exp = accepted as f64 / n;
    let (qber, qber_se) = if accepted > 0 {
        let q = errors as f64 / accepted as f64;
        (q, (q * (1.0 - q) / accepted as f64).sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(DvSimulation {
        trials,
        accepted,
        errors,
        p_exp: S::lit(p_exp),
        qber: S::lit(qber),
        p_exp_std_error: S::lit((p_exp * (1.0 - p_exp) / n).sqrt()),
        qber_std_error: S::lit(qber_se),
    })
}
