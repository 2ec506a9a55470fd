//! Photon-number statistics of the channel-noise sources and the joint
//! arrival probabilities at Bob's two detectors.
//!
//! Each polarization mode is coupled to its own, independent noise source
//! of the same family and mean photon number. Photons from a source reach
//! Bob's side of the coupling beamsplitter with probability `1 - T`, so the
//! noise seen by a detector is the source thinned by `1 - T`.

use crate::{Error, Result, Scalar};

/// Photon-number statistics of a noise source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseFamily {
    /// Bose-Einstein (geometric) statistics of a thermal reservoir.
    Thermal,
    Poisson,
}

/// A noise source: statistics family plus mean photon number per pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource<S> {
    family: NoiseFamily,
    mu: S,
}

impl<S: Scalar> NoiseSource<S> {
    pub fn new(family: NoiseFamily, mu: S) -> Result<Self> {
        if !(mu.is_finite() && mu >= S::zero()) {
            return Err(Error::domain("mu", mu.as_f64(), "[0, inf)"));
        }
        Ok(Self { family, mu })
    }

    pub fn thermal(mu: S) -> Result<Self> {
        Self::new(NoiseFamily::Thermal, mu)
    }

    pub fn poisson(mu: S) -> Result<Self> {
        Self::new(NoiseFamily::Poisson, mu)
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn mean(&self) -> S {
        self.mu
    }

    /// Probability of emitting exactly `n` photons.
    pub fn pmf(&self, n: u32) -> S {
        if self.mu == S::zero() {
            return if n == 0 { S::one() } else { S::zero() };
        }
        match self.family {
            // mu^n / (mu+1)^(n+1), as a power of the ratio so it underflows
            // gracefully instead of overflowing
            NoiseFamily::Thermal => {
                let ratio = self.mu / (S::one() + self.mu);
                match i32::try_from(n) {
                    Ok(k) => ratio.powi(k) / (S::one() + self.mu),
                    Err(_) => ratio.powf(S::from_u32(n).expect("fits")) / (S::one() + self.mu),
                }
            }
            NoiseFamily::Poisson => {
                let nf = S::from_u32(n).expect("photon count fits");
                (-self.mu + nf * self.mu.ln() - ln_factorial::<S>(n)).exp()
            }
        }
    }

    /// Distribution of the photons that survive independent Bernoulli(`keep`)
    /// selection. Both families are closed under thinning.
    pub fn thin(&self, keep: S) -> Result<Self> {
        if keep.is_nan() || keep < S::zero() || keep > S::one() {
            return Err(Error::domain("keep", keep.as_f64(), "[0, 1]"));
        }
        Ok(Self {
            family: self.family,
            mu: self.mu * keep,
        })
    }

    /// Upper bound on `P(n > cutoff)`.
    ///
    /// Exact `(mu/(mu+1))^(cutoff+1)` for thermal sources; the Chernoff bound
    /// `e^-mu (e mu / a)^a` with `a = cutoff + 1` for Poisson sources.
    pub fn tail_bound(&self, cutoff: u32) -> S {
        if self.mu == S::zero() {
            return S::zero();
        }
        let a = S::from_u32(cutoff).expect("cutoff fits") + S::one();
        match self.family {
            NoiseFamily::Thermal => (a * (self.mu.ln() - self.mu.ln_1p())).exp(),
            NoiseFamily::Poisson => {
                if a <= self.mu {
                    S::one()
                } else {
                    (-self.mu + a * (S::one() + self.mu.ln() - a.ln())).exp()
                }
            }
        }
    }

    /// Smallest cutoff `N` whose tail bound is below `eps`.
    pub fn truncation_point(&self, eps: S) -> u32 {
        let mut n = 0;
        while self.tail_bound(n) >= eps {
            n += 1;
        }
        n
    }
}

fn ln_factorial<S: Scalar>(n: u32) -> S {
    (2..=n).fold(S::zero(), |acc, k| acc + S::from_u32(k).expect("fits").ln())
}

/// Lossy channel of transmittance `T` coupled to a noise source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel<S> {
    transmittance: S,
    noise: NoiseSource<S>,
}

impl<S: Scalar> ChannelModel<S> {
    pub fn new(transmittance: S, noise: NoiseSource<S>) -> Result<Self> {
        if !(transmittance > S::zero() && transmittance <= S::one()) {
            return Err(Error::domain("T", transmittance.as_f64(), "(0, 1]"));
        }
        Ok(Self { transmittance, noise })
    }

    pub fn thermal(transmittance: S, mu: S) -> Result<Self> {
        Self::new(transmittance, NoiseSource::thermal(mu)?)
    }

    pub fn transmittance(&self) -> S {
        self.transmittance
    }

    pub fn noise(&self) -> NoiseSource<S> {
        self.noise
    }

    pub fn with_transmittance(&self, transmittance: S) -> Result<Self> {
        Self::new(transmittance, self.noise)
    }

    pub fn with_mean_noise(&self, mu: S) -> Result<Self> {
        Self::new(self.transmittance, NoiseSource::new(self.noise.family(), mu)?)
    }

    /// Quadrature variance `W = 2 mu + 1` of the thermal reservoir in
    /// shot-noise units.
    pub fn cv_noise_variance(&self) -> S {
        S::lit(2.0) * self.noise.mean() + S::one()
    }

    /// Noise reaching one detector: the source thinned by `1 - T`.
    pub fn coupled_noise(&self) -> NoiseSource<S> {
        self.noise
            .thin(S::one() - self.transmittance)
            .expect("1 - T lies in [0, 1)")
    }

    /// `pi_k(T)`: probability that `k` noise photons reach a given detector.
    pub fn pi_k(&self, k: u32) -> S {
        self.coupled_noise().pmf(k)
    }

    pub fn arrival_probabilities(&self) -> ArrivalProbabilities<S> {
        ArrivalProbabilities {
            transmittance: self.transmittance,
            coupled: self.coupled_noise(),
        }
    }
}

/// Joint probabilities of the signal photon arriving (`p_plus`) or being
/// lost (`p_minus`) together with `k` noise photons at the right detector
/// and `l` at the wrong one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProbabilities<S> {
    transmittance: S,
    coupled: NoiseSource<S>,
}

impl<S: Scalar> ArrivalProbabilities<S> {
    pub fn p_plus(&self, k: u32, l: u32) -> S {
        self.transmittance * self.coupled.pmf(k) * self.coupled.pmf(l)
    }

    pub fn p_minus(&self, k: u32, l: u32) -> S {
        (S::one() - self.transmittance) * self.coupled.pmf(k) * self.coupled.pmf(l)
    }

    /// `sum_k p_plus(k, 0) = T pi_0`.
    pub fn signal_arrives_wrong_silent(&self) -> S {
        self.transmittance * self.coupled.pmf(0)
    }

    /// `sum_{k>=1} p_minus(k, 0) = (1-T)(1-pi_0) pi_0`.
    pub fn signal_lost_noise_right_only(&self) -> S {
        let pi0 = self.coupled.pmf(0);
        (S::one() - self.transmittance) * (S::one() - pi0) * pi0
    }

    /// `sum_{l>=1} p_minus(0, l) = (1-T) pi_0 (1-pi_0)`.
    pub fn signal_lost_noise_wrong_only(&self) -> S {
        self.signal_lost_noise_right_only()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type NoiseSource = super::NoiseSource<f64>;
    type ChannelModel = super::ChannelModel<f64>;

    fn binomial(n: u32, k: u32) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
    }

    /// Series definition of pi_k(T), truncated once the source tail is
    /// negligible.
    fn pi_k_series(src: &NoiseSource, t: f64, k: u32) -> f64 {
        let cutoff = src.truncation_point(1e-18).max(k) + 5;
        (k..=cutoff)
            .map(|n| src.pmf(n) * binomial(n, k) * (1.0 - t).powi(k as i32) * t.powi((n - k) as i32))
            .sum()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(NoiseSource::thermal(0.0).unwrap().pmf(0), 1.0);
        assert_eq!(NoiseSource::thermal(0.0).unwrap().pmf(3), 0.0);
        assert!((NoiseSource::thermal(1.0).unwrap().pmf(2) - 0.125).abs() < 1e-15);
        let p = NoiseSource::poisson(0.0).unwrap();
        assert_eq!(p.pmf(1), 0.0);
        let p = NoiseSource::poisson(2.0).unwrap();
        assert!((p.pmf(3) - (-2f64).exp() * 8.0 / 6.0).abs() < 1e-15);
        // large n must not overflow
        let big = NoiseSource::thermal(5.0).unwrap().pmf(2000);
        assert!(big.is_finite() && big >= 0.0);
        assert!(NoiseSource::thermal(-0.1).is_err());
        assert!(NoiseSource::poisson(f64::NAN).is_err());
    }

    #[test]
    fn thinning_matches_series() {
        let src = NoiseSource::thermal(0.2).unwrap();
        let thinned = src.thin(0.5).unwrap();
        assert!((thinned.mean() - 0.1).abs() < 1e-15);
        assert!((thinned.pmf(0) - 1.0 / 1.1).abs() < 1e-15);
        assert!((pi_k_series(&src, 0.5, 0) - 1.0 / 1.1).abs() < 1e-12);

        let zero = src.thin(0.0).unwrap();
        assert_eq!(zero.pmf(0), 1.0);
        assert_eq!(src.thin(1.0).unwrap(), src);
        assert!(src.thin(1.5).is_err());
    }

    #[test]
    fn pi_k_examples() {
        let ch = ChannelModel::thermal(0.3, 0.0).unwrap();
        assert_eq!(ch.pi_k(0), 1.0);
        let ch = ChannelModel::thermal(0.5, 0.2).unwrap();
        assert!((ch.pi_k(1) - 0.1 / 1.21).abs() < 1e-15);
        let ch = ChannelModel::thermal(1.0, 0.7).unwrap();
        assert_eq!(ch.pi_k(3), 0.0);
        assert!(ChannelModel::thermal(0.0, 0.1).is_err());
        assert!(ChannelModel::thermal(1.1, 0.1).is_err());
        assert!((ch.cv_noise_variance() - 2.4).abs() < 1e-15);
    }

    #[test]
    fn closed_form_pi_agrees_with_series() {
        for family in [NoiseFamily::Thermal, NoiseFamily::Poisson] {
            for &mu in &[1e-4, 0.01, 0.3, 1.0, 4.0] {
                for &t in &[1e-3, 0.1, 0.5, 0.9, 0.999] {
                    let src = NoiseSource::new(family, mu).unwrap();
                    let ch = ChannelModel::new(t, src).unwrap();
                    for k in 0..6 {
                        let a = ch.pi_k(k);
                        let b = pi_k_series(&src, t, k);
                        assert!((a - b).abs() < 1e-12, "{family:?} mu={mu} T={t} k={k}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn arrival_probability_examples() {
        let ap = ChannelModel::thermal(0.4, 0.0).unwrap().arrival_probabilities();
        assert!((ap.p_plus(0, 0) - 0.4).abs() < 1e-15);
        assert!((ap.p_minus(0, 0) - 0.6).abs() < 1e-15);
        assert_eq!(ap.p_plus(1, 0), 0.0);
        assert_eq!(ap.p_minus(0, 2), 0.0);

        let ap = ChannelModel::thermal(0.5, 0.2).unwrap().arrival_probabilities();
        assert!((ap.p_plus(0, 0) - 0.5 / 1.21).abs() < 1e-15);
        assert_eq!(ap.p_plus(2, 5), ap.p_plus(5, 2));
    }

    #[test]
    fn marginal_closed_forms_match_double_series() {
        for family in [NoiseFamily::Thermal, NoiseFamily::Poisson] {
            for &t in &[1e-4, 0.01, 0.3, 0.8, 0.99] {
                for &mu in &[1e-5, 1e-2, 0.5, 2.0] {
                    let ch = ChannelModel::new(t, NoiseSource::new(family, mu).unwrap()).unwrap();
                    let ap = ch.arrival_probabilities();
                    let cutoff = ch.coupled_noise().truncation_point(1e-17) + 5;
                    let mut plus_l0 = 0.0;
                    let mut minus_k_l0 = 0.0;
                    let mut minus_0_l = 0.0;
                    let mut total = 0.0;
                    for k in 0..=cutoff {
                        plus_l0 += ap.p_plus(k, 0);
                        if k >= 1 {
                            minus_k_l0 += ap.p_minus(k, 0);
                            minus_0_l += ap.p_minus(0, k);
                        }
                        for l in 0..=cutoff {
                            total += ap.p_plus(k, l) + ap.p_minus(k, l);
                        }
                    }
                    assert!((plus_l0 - ap.signal_arrives_wrong_silent()).abs() < 1e-12);
                    assert!((minus_k_l0 - ap.signal_lost_noise_right_only()).abs() < 1e-12);
                    assert!((minus_0_l - ap.signal_lost_noise_wrong_only()).abs() < 1e-12);
                    assert!((total - 1.0).abs() < 1e-12, "total {total}");
                }
            }
        }
    }

    #[test]
    fn thermal_pnr_identity() {
        // p_k p_1 - p_{k+1} p_0 = 0 for thermal statistics
        for &mu in &[1e-6, 1e-3, 0.1, 0.5, 1.0, 3.0, 10.0] {
            let src = NoiseSource::thermal(mu).unwrap();
            for k in 1..=50 {
                let lhs = src.pmf(k) * src.pmf(1);
                let rhs = src.pmf(k + 1) * src.pmf(0);
                let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
                assert!((lhs - rhs).abs() <= 32.0 * f64::EPSILON * scale, "mu={mu} k={k}");
            }
        }
    }

    #[test]
    fn truncation_point_bounds_tail() {
        for family in [NoiseFamily::Thermal, NoiseFamily::Poisson] {
            for &mu in &[0.0, 1e-3, 0.5, 3.0, 10.0] {
                let src = NoiseSource::new(family, mu).unwrap();
                let n = src.truncation_point(1e-15);
                let mass: f64 = (0..=n).map(|k| src.pmf(k)).sum();
                assert!(mass >= 1.0 - 1e-15 - 1e-13, "{family:?} mu={mu} n={n} mass={mass}");
            }
        }
    }

    proptest! {
        #[test]
        fn thinning_composes(mu in 0.0f64..5.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0, poisson in any::<bool>()) {
            let family = if poisson { NoiseFamily::Poisson } else { NoiseFamily::Thermal };
            let src = NoiseSource::new(family, mu).unwrap();
            let twice = src.thin(a).unwrap().thin(b).unwrap();
            let once = src.thin(a * b).unwrap();
            for n in 0..30 {
                prop_assert!((twice.pmf(n) - once.pmf(n)).abs() <= 1e-14);
            }
        }
    }
}
