use proptest::prelude::*;
use qkdnoise::analysis::{self, mu_max, AnalysisConfig, SetupTemplate};
use qkdnoise::dv_security::{key_rate_dv, Detector, DvProtocol, DvSetup};
use qkdnoise::gaussian_cv::TrustedNoise;
use qkdnoise::photon_stats::ChannelModel;

fn protocol() -> impl Strategy<Value = DvProtocol> {
    prop_oneof![Just(DvProtocol::Bb84), Just(DvProtocol::SixState)]
}

fn detector() -> impl Strategy<Value = Detector> {
    prop_oneof![Just(Detector::Binary), Just(Detector::Pnr)]
}

fn setup(protocol: DvProtocol, detector: Detector, t: f64, mu: f64, p: f64, d: f64, eta: f64) -> DvSetup<f64> {
    DvSetup::ideal(protocol, ChannelModel::thermal(t, mu).unwrap())
        .with_detector(detector)
        .with_source_p(p)
        .with_dark_counts(d, eta)
}

fn finite_mu_max(template: &SetupTemplate<f64>, t: f64, cfg: &AnalysisConfig<f64>) -> f64 {
    mu_max(template, t, cfg).unwrap().as_value().unwrap()
}

// rates that differ only by rounding count as equal
const SLACK: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dv_rate_monotone_in_t(pr in protocol(), det in detector(), t in 1e-4f64..0.9, dt in 0.0f64..0.1, mu in 0.0f64..0.01, d in 0.0f64..1e-5) {
        let lo = key_rate_dv(&setup(pr, det, t, mu, 0.9, d, 0.8)).unwrap();
        let hi = key_rate_dv(&setup(pr, det, t + dt, mu, 0.9, d, 0.8)).unwrap();
        prop_assert!(hi >= lo - SLACK);
    }

    #[test]
    fn dv_rate_monotone_in_mu(pr in protocol(), det in detector(), t in 1e-3f64..1.0, mu in 0.0f64..0.05, dmu in 0.0f64..0.05) {
        let lo = key_rate_dv(&setup(pr, det, t, mu + dmu, 1.0, 0.0, 1.0)).unwrap();
        let hi = key_rate_dv(&setup(pr, det, t, mu, 1.0, 0.0, 1.0)).unwrap();
        prop_assert!(hi >= lo - SLACK);
    }

    #[test]
    fn dv_rate_monotone_in_p(pr in protocol(), t in 1e-3f64..1.0, mu in 0.0f64..0.01, p in 0.05f64..0.95, dp in 0.0f64..0.05) {
        let lo = key_rate_dv(&setup(pr, Detector::Binary, t, mu, p, 0.0, 1.0)).unwrap();
        let hi = key_rate_dv(&setup(pr, Detector::Binary, t, mu, p + dp, 0.0, 1.0)).unwrap();
        prop_assert!(hi >= lo - SLACK);
    }

    #[test]
    fn dv_rate_monotone_in_eta(pr in protocol(), t in 1e-3f64..1.0, eta in 0.1f64..0.9, de in 0.0f64..0.1, d in 0.0f64..1e-4) {
        let lo = key_rate_dv(&setup(pr, Detector::Binary, t, 0.0, 1.0, d, eta)).unwrap();
        let hi = key_rate_dv(&setup(pr, Detector::Binary, t, 0.0, 1.0, d, eta + de)).unwrap();
        prop_assert!(hi >= lo - SLACK);
    }

    #[test]
    fn dv_rate_monotone_in_dark_counts(pr in protocol(), det in detector(), t in 1e-3f64..1.0, d in 0.0f64..1e-3, dd in 0.0f64..1e-3) {
        let lo = key_rate_dv(&setup(pr, det, t, 1e-4, 1.0, d + dd, 0.5)).unwrap();
        let hi = key_rate_dv(&setup(pr, det, t, 1e-4, 1.0, d, 0.5)).unwrap();
        prop_assert!(hi >= lo - SLACK);
    }

    #[test]
    fn cv_rate_monotone(t in 1e-3f64..0.9, dt in 0.0f64..0.1, mu in 0.0f64..0.01, dmu in 0.0f64..0.01) {
        let template = SetupTemplate::squeezed(100.0, TrustedNoise::Fixed(0.0));
        let base = template.at(t, mu).unwrap().key_rate().unwrap();
        let more_t = template.at(t + dt, mu).unwrap().key_rate().unwrap();
        let more_mu = template.at(t, mu + dmu).unwrap().key_rate().unwrap();
        prop_assert!(more_t >= base - SLACK);
        prop_assert!(more_mu <= base + SLACK);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mu_max_monotone_in_t(pr in protocol(), t in 1e-5f64..0.3, factor in 1.0f64..3.0) {
        let cfg = AnalysisConfig::default();
        let template = SetupTemplate::ideal_dv(pr);
        let lo = finite_mu_max(&template, t, &cfg);
        let hi = finite_mu_max(&template, t * factor, &cfg);
        prop_assert!(hi >= lo * (1.0 - 1e-5));
    }

    #[test]
    fn cv_mu_max_monotone_in_t(t in 1e-5f64..0.3, factor in 1.0f64..3.0) {
        let cfg = AnalysisConfig::default();
        let template = SetupTemplate::infinite_squeezing(TrustedNoise::Fixed(0.0));
        let lo = finite_mu_max(&template, t, &cfg);
        let hi = finite_mu_max(&template, t * factor, &cfg);
        prop_assert!(hi >= lo * (1.0 - 1e-5));
    }
}

#[test]
fn halving_tolerances_moves_thresholds_below_a_tenth_of_a_percent() {
    let cfg = AnalysisConfig::default();
    let fine = cfg.halved();
    let templates = [
        SetupTemplate::ideal_dv(DvProtocol::Bb84),
        SetupTemplate::ideal_dv(DvProtocol::SixState),
        SetupTemplate::infinite_squeezing(TrustedNoise::Fixed(0.0)),
        SetupTemplate::gg02(1e3, TrustedNoise::Fixed(0.0)),
    ];
    for template in &templates {
        for t in [1e-4, 1e-2, 0.3] {
            let a = finite_mu_max(template, t, &cfg);
            let b = finite_mu_max(template, t, &fine);
            assert!(((a - b) / b).abs() < 1e-3, "{} at T = {t}: {a} vs {b}", template.label());
        }
    }
}

#[test]
fn preprocessing_never_lowers_mu_max() {
    let cfg = AnalysisConfig::default();
    for pr in [DvProtocol::Bb84, DvProtocol::SixState] {
        let plain = SetupTemplate::ideal_dv(pr);
        let SetupTemplate::Dv(s) = plain else { unreachable!() };
        let pre = SetupTemplate::Dv(s.with_preprocessing(true));
        for t in [1e-5, 1e-3, 1e-1, 0.5] {
            let a = finite_mu_max(&plain, t, &cfg);
            let b = finite_mu_max(&pre, t, &cfg);
            assert!(b >= a * (1.0 - 1e-6), "{pr:?} at T = {t}: {b} < {a}");
        }
    }
}

#[test]
fn gg02_never_beats_squeezed_states() {
    let cfg = AnalysisConfig::default();
    let squeezed = SetupTemplate::infinite_squeezing(TrustedNoise::Fixed(0.0));
    let gg02 = SetupTemplate::gg02(analysis::INFINITE_SQUEEZING_V, TrustedNoise::Fixed(0.0));
    for t in [1e-4, 1e-2, 0.5, 0.95] {
        let s = finite_mu_max(&squeezed, t, &cfg);
        let g = finite_mu_max(&gg02, t, &cfg);
        assert!(g <= s * (1.0 + 1e-6), "T = {t}: {g} > {s}");
    }
}

#[test]
fn f32_instantiation_tracks_f64() {
    let a = finite_mu_max(&SetupTemplate::ideal_dv(DvProtocol::SixState), 1e-2, &AnalysisConfig::default());
    let template = SetupTemplate::<f32>::ideal_dv(DvProtocol::SixState);
    let cfg = AnalysisConfig::<f32> {
        threshold: qkdnoise::numerics::SolverConfig::relative(1e-4),
        ..AnalysisConfig::default()
    };
    let b = mu_max(&template, 1e-2f32, &cfg).unwrap().finite().unwrap();
    assert!(((b as f64 - a) / a).abs() < 1e-3);
}
