//! Gaussian continuous-variable machinery: two-mode covariance matrices in
//! shot-noise units, symplectic spectra, homodyne conditioning, the Holevo
//! bound and reverse-reconciliation key rates.
//!
//! Quadratures are ordered `(x_A, p_A, x_B, p_B)`; Bob measures `x`.

use crate::dv_security::secret_fraction_floor;
use crate::numerics::{bosonic_g, lambert_w_minus1, maximize_scalar, BracketedFunction, SolverConfig};
use crate::photon_stats::ChannelModel;
use crate::{Error, Result, Scalar};

/// Slack allowed below 1 for symplectic eigenvalues before a matrix is
/// declared unphysical.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

/// Real 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<S>(pub [[S; 2]; 2]);

impl<S: Scalar> Mat2<S> {
    pub fn new(m00: S, m01: S, m10: S, m11: S) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn diag(d0: S, d1: S) -> Self {
        Self::new(d0, S::zero(), S::zero(), d1)
    }

    pub fn identity() -> Self {
        Self::diag(S::one(), S::one())
    }

    pub fn scalar(v: S) -> Self {
        Self::diag(v, v)
    }

    /// Pauli `sigma_z = diag(1, -1)`.
    pub fn sigma_z() -> Self {
        Self::diag(S::one(), -S::one())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.0[i][j]
    }

    pub fn det(&self) -> S {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> S {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn scale(&self, k: S) -> Self {
        self.map(|v| v * k)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = |i: usize, j: usize| self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
        Self::new(m(0, 0), m(0, 1), m(1, 0), m(1, 1))
    }

    pub fn is_diagonal(&self) -> bool {
        self.0[0][1] == S::zero() && self.0[1][0] == S::zero()
    }

    pub fn is_symmetric(&self) -> bool {
        let (a, b) = (self.0[0][1], self.0[1][0]);
        (a - b).abs() <= S::lit(1e-12) * (S::one() + a.abs().max(b.abs()))
    }

    fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::new(f(self.0[0][0]), f(self.0[0][1]), f(self.0[1][0]), f(self.0[1][1]))
    }

    fn zip(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        Self::new(
            f(self.0[0][0], other.0[0][0]),
            f(self.0[0][1], other.0[0][1]),
            f(self.0[1][0], other.0[1][0]),
            f(self.0[1][1], other.0[1][1]),
        )
    }
}

/// Covariance matrix of two modes in block form `[[A, C], [C^T, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM<S> {
    pub a: Mat2<S>,
    pub b: Mat2<S>,
    pub c: Mat2<S>,
}

impl<S: Scalar> TwoModeCM<S> {
    pub fn new(a: Mat2<S>, b: Mat2<S>, c: Mat2<S>) -> Result<Self> {
        if !a.is_symmetric() || !b.is_symmetric() {
            return Err(Error::Unphysical("diagonal blocks must be symmetric".into()));
        }
        Ok(Self { a, b, c })
    }

    pub fn vacuum() -> Self {
        Self::product(Mat2::identity(), Mat2::identity())
    }

    /// Uncorrelated modes.
    pub fn product(a: Mat2<S>, b: Mat2<S>) -> Self {
        Self {
            a,
            b,
            c: Mat2::diag(S::zero(), S::zero()),
        }
    }

    pub fn from_array(m: [[S; 4]; 4]) -> Result<Self> {
        let block = |r: usize, c: usize| Mat2::new(m[r][c], m[r][c + 1], m[r + 1][c], m[r + 1][c + 1]);
        let upper = block(0, 2);
        let lower = block(2, 0);
        if !upper.transpose().sub(&lower).0.iter().flatten().all(|v| v.abs() <= S::lit(1e-12) * (S::one() + v.abs())) {
            return Err(Error::Unphysical("matrix must be symmetric".into()));
        }
        Self::new(block(0, 0), block(2, 2), upper)
    }

    pub fn to_array(&self) -> [[S; 4]; 4] {
        let mut m = [[S::zero(); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.a.get(i, j);
                m[i + 2][j + 2] = self.b.get(i, j);
                m[i][j + 2] = self.c.get(i, j);
                m[j + 2][i] = self.c.get(i, j);
            }
        }
        m
    }

    /// True when no quadrature `x` is correlated with any `p`.
    pub fn is_quadrature_decoupled(&self) -> bool {
        self.a.is_diagonal() && self.b.is_diagonal() && self.c.is_diagonal()
    }

    pub fn det(&self) -> S {
        det4(&self.to_array())
    }

    /// Returns the matrix if both symplectic eigenvalues are at least
    /// `1 - slack`, where the slack is [`PHYSICALITY_SLACK`] or, for large
    /// entries, `64 eps` times the largest entry.
    pub fn validate_physical(self) -> Result<Self> {
        symplectic_eigs(&self)?;
        Ok(self)
    }
}

fn det4<S: Scalar>(m: &[[S; 4]; 4]) -> S {
    // Laplace expansion along 2x2 minors of the first two rows
    let minor = |r: usize, c0: usize, c1: usize| m[r][c0] * m[r + 1][c1] - m[r][c1] * m[r + 1][c0];
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut det = S::zero();
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let (k, l) = pairs[5 - idx];
        let sign = if (i + j + 1) % 2 == 0 { S::one() } else { -S::one() };
        det = det + sign * minor(0, i, j) * minor(2, k, l);
    }
    det
}

/// Eigenvalues `(larger, smaller)` of a symmetric 2x2 matrix.
fn sym2_eigs<S: Scalar>(m00: S, m01: S, m11: S) -> (S, S) {
    let mean = (m00 + m11) / S::lit(2.0);
    let half_diff = (m00 - m11) / S::lit(2.0);
    let radius = half_diff.hypot(m01);
    let hi = mean + radius;
    let det = m00 * m11 - m01 * m01;
    let lo = if hi > S::zero() { det / hi } else { mean - radius };
    (hi, lo)
}

/// Symplectic eigenvalues `(lambda1 >= lambda2)` of a two-mode matrix.
///
/// For matrices without `x`-`p` correlations the squared eigenvalues are the
/// eigenvalues of `g_x^{1/2} g_p g_x^{1/2}`, with `g_x` and `g_p` the 2x2
/// quadrature blocks. Other matrices use the invariants
/// `Delta = det A + det B + 2 det C` and `det gamma`.
pub fn symplectic_eigs<S: Scalar>(cm: &TwoModeCM<S>) -> Result<(S, S)> {
    let (sq1, sq2) = if cm.is_quadrature_decoupled() {
        decoupled_squared_eigs(cm)?
    } else {
        invariant_squared_eigs(cm)?
    };
    let scale = cm.to_array().iter().flatten().fold(S::zero(), |m, v| m.max(v.abs()));
    let slack = S::lit(PHYSICALITY_SLACK).max(S::lit(64.0) * S::epsilon() * scale);
    let (l1, l2) = (sq1.max(S::zero()).sqrt(), sq2.max(S::zero()).sqrt());
    if !(l2 >= S::one() - slack) || !l1.is_finite() {
        return Err(Error::Unphysical(format!(
            "symplectic eigenvalues ({}, {}) below 1",
            l1.as_f64(),
            l2.as_f64()
        )));
    }
    Ok((l1.max(S::one()), l2.max(S::one())))
}

fn decoupled_squared_eigs<S: Scalar>(cm: &TwoModeCM<S>) -> Result<(S, S)> {
    let gx = Mat2::new(cm.a.get(0, 0), cm.c.get(0, 0), cm.c.get(0, 0), cm.b.get(0, 0));
    let gp = Mat2::new(cm.a.get(1, 1), cm.c.get(1, 1), cm.c.get(1, 1), cm.b.get(1, 1));
    let det_x = gx.det();
    if !(det_x > S::zero() && gx.trace() > S::zero()) {
        return Err(Error::Unphysical("x-quadrature block is not positive definite".into()));
    }
    // square root of a positive definite 2x2 matrix
    let root_det = det_x.sqrt();
    let root = gx
        .add(&Mat2::scalar(root_det))
        .scale(S::one() / (gx.trace() + S::lit(2.0) * root_det).sqrt());
    let n = root.mul(&gp).mul(&root);
    let (hi, _) = sym2_eigs(n.get(0, 0), (n.get(0, 1) + n.get(1, 0)) / S::lit(2.0), n.get(1, 1));
    let det = det_x * gp.det();
    Ok((hi, if hi > S::zero() { det / hi } else { S::zero() }))
}

fn invariant_squared_eigs<S: Scalar>(cm: &TwoModeCM<S>) -> Result<(S, S)> {
    let delta = cm.a.det() + cm.b.det() + S::lit(2.0) * cm.c.det();
    let det = cm.det();
    let mut disc = delta * delta - S::lit(4.0) * det;
    if disc < S::zero() {
        if disc < -S::lit(1e-12) {
            return Err(Error::Unphysical(format!("negative discriminant {}", disc.as_f64())));
        }
        disc = S::zero();
    }
    let hi = (delta + disc.sqrt()) / S::lit(2.0);
    Ok((hi, if hi > S::zero() { det / hi } else { S::zero() }))
}

/// Alice's matrix conditioned on Bob's `x` homodyne outcome with added
/// trusted noise `v_t`, together with its symplectic eigenvalue
/// `lambda3 = sqrt(det)`.
pub fn condition_on_homodyne<S: Scalar>(cm: &TwoModeCM<S>, trusted_noise: S) -> Result<(Mat2<S>, S)> {
    if !(trusted_noise >= S::zero()) {
        return Err(Error::domain("v_t", trusted_noise.as_f64(), "[0, inf)"));
    }
    let b = cm.b.get(0, 0) + trusted_noise;
    if !(b > S::zero()) {
        return Err(Error::DegenerateMeasurement(b.as_f64()));
    }
    let c0 = [cm.c.get(0, 0), cm.c.get(1, 0)];
    let reduce = |i: usize, j: usize| cm.a.get(i, j) - c0[i] * c0[j] / b;
    let cond = Mat2::new(reduce(0, 0), reduce(0, 1), reduce(1, 0), reduce(1, 1));
    let det = cond.det();
    let slack = S::lit(PHYSICALITY_SLACK);
    if !(det >= (S::one() - slack) * (S::one() - slack)) {
        return Err(Error::Unphysical(format!("conditional determinant {} below 1", det.as_f64())));
    }
    Ok((cond, det.sqrt().max(S::one())))
}

fn g_of<S: Scalar>(lambda: S) -> Result<S> {
    bosonic_g(((lambda - S::one()) / S::lit(2.0)).max(S::zero()))
}

/// Symplectic spectra entering the Holevo bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoTerms<S> {
    pub lambda1: S,
    pub lambda2: S,
    /// Eigenvalues of Eve's purification after Bob's measurement. `lambda4`
    /// is 1 when there is no trusted noise.
    pub lambda3: S,
    pub lambda4: S,
    pub chi_be: S,
}

/// Holevo bound on Eve's information about Bob's `x` outcome.
///
/// Trusted noise `v_t` is modelled as a beamsplitter of transmittance
/// `1 / (1 + v_t)` mixing Bob's mode with a vacuum ancilla `F` held by Bob.
/// Eve's conditional entropy is then that of the pair (A, F) conditioned on
/// the noisy outcome, with symplectic eigenvalues `lambda3`, `lambda4`.
/// At `v_t = 0` this is `G((l1-1)/2) + G((l2-1)/2) - G((l3-1)/2)` with `l3`
/// from [`condition_on_homodyne`].
pub fn holevo_terms<S: Scalar>(cm: &TwoModeCM<S>, trusted_noise: S) -> Result<HolevoTerms<S>> {
    let (lambda1, lambda2) = symplectic_eigs(cm)?;
    let (lambda3, lambda4) = if trusted_noise == S::zero() {
        (condition_on_homodyne(cm, S::zero())?.1, S::one())
    } else {
        conditioned_with_ancilla(cm, trusted_noise)?
    };
    let chi_be = g_of(lambda1)? + g_of(lambda2)? - g_of(lambda3)? - g_of(lambda4)?;
    Ok(HolevoTerms {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
        chi_be,
    })
}

pub fn holevo_bound<S: Scalar>(cm: &TwoModeCM<S>, trusted_noise: S) -> Result<S> {
    Ok(holevo_terms(cm, trusted_noise)?.chi_be)
}

fn conditioned_with_ancilla<S: Scalar>(cm: &TwoModeCM<S>, trusted_noise: S) -> Result<(S, S)> {
    if !(trusted_noise > S::zero() && trusted_noise.is_finite()) {
        return Err(Error::domain("v_t", trusted_noise.as_f64(), "[0, inf)"));
    }
    let one = S::one();
    let tau = one / (one + trusted_noise);
    let leak = one - tau;
    let eye = Mat2::<S>::identity();
    let f_block = cm.b.scale(leak).add(&eye.scale(tau));
    let c_af = cm.c.scale(-leak.sqrt());
    // covariances of (A, F) with the measured x of the noisy mode
    let c_ab = cm.c.scale(tau.sqrt());
    let c_fb = eye.sub(&cm.b).scale((tau * leak).sqrt());
    let b_x = tau * cm.b.get(0, 0) + leak;
    if !(b_x > S::zero()) {
        return Err(Error::DegenerateMeasurement(b_x.as_f64()));
    }
    let u = [c_ab.get(0, 0), c_ab.get(1, 0), c_fb.get(0, 0), c_fb.get(1, 0)];
    let mut joint = TwoModeCM {
        a: cm.a,
        b: f_block,
        c: c_af,
    }
    .to_array();
    for i in 0..4 {
        for j in 0..4 {
            joint[i][j] = joint[i][j] - u[i] * u[j] / b_x;
        }
    }
    symplectic_eigs(&TwoModeCM::from_array(joint)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CvVariant {
    /// Gaussian-modulated squeezed states with total variance `V` and signal
    /// variance `1/V`.
    Squeezed,
    /// Gaussian-modulated coherent states.
    Gg02,
    /// Independently chosen squeezing and modulation.
    Generalized,
}

impl CvVariant {
    pub fn name(&self) -> &'static str {
        match self {
            CvVariant::Squeezed => "squeezed",
            CvVariant::Gg02 => "gg02",
            CvVariant::Generalized => "generalized",
        }
    }
}

/// How the trusted detection noise is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrustedNoise<S> {
    Fixed(S),
    /// Maximize the key rate over `v_t >= 0`.
    Optimized,
}

/// A CV link: preparation, trusted detection noise and the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvSetup<S> {
    pub variant: CvVariant,
    /// Quadrature variance of each prepared signal state, `V_s`.
    pub signal_variance: S,
    /// Modulation variance `V_m`.
    pub modulation_variance: S,
    /// Trusted detection-noise variance `v_t`.
    pub trusted_noise: S,
    pub channel: ChannelModel<S>,
}

impl<S: Scalar> CvSetup<S> {
    /// Squeezed-state protocol with total variance `V`.
    pub fn squeezed(total_variance: S, channel: ChannelModel<S>) -> Result<Self> {
        if !(total_variance >= S::one() && total_variance.is_finite()) {
            return Err(Error::domain("V", total_variance.as_f64(), "[1, inf)"));
        }
        let vs = S::one() / total_variance;
        Self::new(CvVariant::Squeezed, vs, total_variance - vs, channel)
    }

    /// Coherent-state protocol with modulation variance `V_m`.
    pub fn gg02(modulation_variance: S, channel: ChannelModel<S>) -> Result<Self> {
        Self::new(CvVariant::Gg02, S::one(), modulation_variance, channel)
    }

    pub fn generalized(signal_variance: S, modulation_variance: S, channel: ChannelModel<S>) -> Result<Self> {
        Self::new(CvVariant::Generalized, signal_variance, modulation_variance, channel)
    }

    pub fn new(variant: CvVariant, signal_variance: S, modulation_variance: S, channel: ChannelModel<S>) -> Result<Self> {
        let setup = Self {
            variant,
            signal_variance,
            modulation_variance,
            trusted_noise: S::zero(),
            channel,
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn with_trusted_noise(mut self, trusted_noise: S) -> Self {
        self.trusted_noise = trusted_noise;
        self
    }

    pub fn with_channel(mut self, channel: ChannelModel<S>) -> Self {
        self.channel = channel;
        self
    }

    /// `V = V_s + V_m`.
    pub fn total_variance(&self) -> S {
        self.signal_variance + self.modulation_variance
    }

    pub fn validate(&self) -> Result<()> {
        let vs = self.signal_variance;
        if !(vs > S::zero() && vs.is_finite()) {
            return Err(Error::domain("V_s", vs.as_f64(), "(0, inf)"));
        }
        let vm = self.modulation_variance;
        if !(vm >= S::zero() && vm.is_finite()) {
            return Err(Error::domain("V_m", vm.as_f64(), "[0, inf)"));
        }
        if self.total_variance() < S::one() {
            return Err(Error::domain("V_s + V_m", self.total_variance().as_f64(), "[1, inf)"));
        }
        let vt = self.trusted_noise;
        if !(vt >= S::zero() && vt.is_finite()) {
            return Err(Error::domain("v_t", vt.as_f64(), "[0, inf)"));
        }
        if self.variant == CvVariant::Gg02 && vs != S::one() {
            return Err(Error::InvalidSetup("GG02 signal variance must be 1".into()));
        }
        Ok(())
    }
}

/// Entanglement-based covariance matrix shared by Alice and Bob.
///
/// Squeezed and GG02: `A = V I`, `B = (T V + (1-T) W) I`,
/// `C = sqrt(T (V^2 - 1)) sigma_z`. Generalized: a two-mode squeezed vacuum
/// of variance `V0 = sqrt(V / V_s)` with Bob's arm squeezed by
/// `s = sqrt(V_s V)` before the channel, so Bob's `x` marginal is `V` and
/// its variance conditioned on Alice is `V_s`.
pub fn build_cm<S: Scalar>(setup: &CvSetup<S>) -> Result<TwoModeCM<S>> {
    setup.validate()?;
    let t = setup.channel.transmittance();
    let w = setup.channel.cv_noise_variance();
    let one = S::one();
    let v = setup.total_variance();
    let cm = match setup.variant {
        CvVariant::Squeezed | CvVariant::Gg02 => TwoModeCM {
            a: Mat2::scalar(v),
            b: Mat2::scalar(t * v + (one - t) * w),
            c: Mat2::sigma_z().scale((t * (v * v - one)).max(S::zero()).sqrt()),
        },
        CvVariant::Generalized => {
            let v0 = (v / setup.signal_variance).sqrt();
            let s = (setup.signal_variance * v).sqrt();
            let corr = (t * (v0 * v0 - one)).max(S::zero()).sqrt();
            TwoModeCM {
                a: Mat2::scalar(v0),
                b: Mat2::diag(t * s * v0 + (one - t) * w, t * v0 / s + (one - t) * w),
                c: Mat2::diag(corr * s.sqrt(), -corr / s.sqrt()),
            }
        }
    };
    cm.validate_physical()
}

/// Alice-Bob mutual information of Bob's `x` homodyne outcome,
/// `1/2 log2[(V + W' + v_t/T) / (V_s + W' + v_t/T)]` with `W' = W (1-T)/T`.
pub fn mutual_info_cv<S: Scalar>(setup: &CvSetup<S>) -> Result<S> {
    setup.validate()?;
    let t = setup.channel.transmittance();
    let w = setup.channel.cv_noise_variance();
    let added = w * (S::one() - t) / t + setup.trusted_noise / t;
    let ratio = (setup.total_variance() + added) / (setup.signal_variance + added);
    Ok(ratio.log2() / S::lit(2.0))
}

/// Reverse-reconciliation rate and the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvRateBreakdown<S> {
    pub i_ab: S,
    pub chi_be: S,
    /// `I_AB - chi_BE` before clamping.
    pub secret_rate: S,
    /// `max[0, I_AB - chi_BE]`. Rates within the rounding floor relative to
    /// `|I_AB| + |chi_BE|` count as zero.
    pub key_rate: S,
    pub lambda1: S,
    pub lambda2: S,
    pub lambda3: S,
    pub lambda4: S,
    /// Trusted noise at which the rate was evaluated.
    pub trusted_noise: S,
}

impl<S: Scalar> CvRateBreakdown<S> {
    pub fn is_secure(&self) -> bool {
        self.key_rate > S::zero()
    }
}

/// Key rate at the trusted noise stored in `setup`.
pub fn key_rate_cv<S: Scalar>(setup: &CvSetup<S>) -> Result<CvRateBreakdown<S>> {
    let cm = build_cm(setup)?;
    let i_ab = mutual_info_cv(setup)?;
    let h = holevo_terms(&cm, setup.trusted_noise)?;
    let secret_rate = i_ab - h.chi_be;
    let floor = secret_fraction_floor::<S>() * (i_ab.abs() + h.chi_be.abs());
    let key_rate = if secret_rate > floor {
        secret_rate
    } else {
        S::zero()
    };
    Ok(CvRateBreakdown {
        i_ab,
        chi_be: h.chi_be,
        secret_rate,
        key_rate,
        lambda1: h.lambda1,
        lambda2: h.lambda2,
        lambda3: h.lambda3,
        lambda4: h.lambda4,
        trusted_noise: setup.trusted_noise,
    })
}

/// Search range of `log10 v_t` for the trusted-noise optimization.
pub const TRUSTED_NOISE_LOG10_RANGE: (f64, f64) = (-4.0, 6.0);

/// Key rate maximized over the trusted noise `v_t >= 0`.
///
/// Evaluates `v_t = 0` and a grid-seeded golden-section search over
/// `log10 v_t` in [`TRUSTED_NOISE_LOG10_RANGE`], keeping the best.
pub fn key_rate_cv_optimized<S: Scalar>(setup: &CvSetup<S>) -> Result<CvRateBreakdown<S>> {
    let base = key_rate_cv(&setup.with_trusted_noise(S::zero()))?;
    let ten = S::lit(10.0);
    let objective = |log_vt: S| {
        key_rate_cv(&setup.with_trusted_noise(ten.powf(log_vt)))
            .map(|r| r.secret_rate)
            .unwrap_or(S::neg_infinity())
    };
    let (lo, hi) = TRUSTED_NOISE_LOG10_RANGE;
    let bracket = BracketedFunction::new(objective, S::lit(lo), S::lit(hi))?;
    let (arg, best) = maximize_scalar(&bracket, &SolverConfig::optimization())?;
    if best > base.secret_rate {
        key_rate_cv(&setup.with_trusted_noise(ten.powf(arg)))
    } else {
        Ok(base)
    }
}

pub fn key_rate_cv_with<S: Scalar>(setup: &CvSetup<S>, trusted: TrustedNoise<S>) -> Result<CvRateBreakdown<S>> {
    match trusted {
        TrustedNoise::Fixed(v) => key_rate_cv(&setup.with_trusted_noise(v)),
        TrustedNoise::Optimized => key_rate_cv_optimized(setup),
    }
}

/// Small-`T` law for the infinitely squeezed protocol,
/// `mu_max = exp[1 + W_{-1}(-T/e)]`.
pub fn asymptotic_mu_max_cv<S: Scalar>(transmittance: S) -> Result<S> {
    if !(transmittance > S::zero() && transmittance <= S::one()) {
        return Err(Error::domain("T", transmittance.as_f64(), "(0, 1]"));
    }
    let arg = -transmittance / S::E();
    // the branch point itself can round just below -1/e
    let arg = arg.max(-S::one() / S::E());
    Ok((S::one() + lambert_w_minus1(arg)?).exp())
}
