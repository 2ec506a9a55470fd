use qkdnoise::analysis::{
    self, AnalysisConfig, CurveResult, SetupTemplate, Status, DARK_COUNT_RANGE, DEFAULT_MODULATION, INFINITE_SQUEEZING_V,
};
use qkdnoise::dv_security::{self, Detector, DvProtocol, DvSetup};
use qkdnoise::gaussian_cv::{CvSetup, TrustedNoise};
use qkdnoise::photon_stats::{ChannelModel, NoiseFamily, NoiseSource};

use crate::params::Params;
use crate::CliError;

/// Relative tolerance of the asymptotic-agreement checks.
const ASYMPTOTIC_TOLERANCE: f64 = 0.05;
/// Largest accepted relative change of `mu_max` when `V` doubles.
const CONVERGENCE_TOLERANCE: f64 = 1e-3;

/// CSV body: header plus formatted rows.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: usize,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            ..Self::default()
        }
    }

    fn push(&mut self, row: Vec<String>, status: Status) {
        if status == Status::Fail {
            self.failures += 1;
        }
        let mut row = row;
        row.push(status.token().to_string());
        self.rows.push(row);
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn execute(params: &Params) -> Result<Table, CliError> {
    let cfg = AnalysisConfig::<f64>::default();
    match params.command {
        "threshold" => threshold(params, &cfg),
        "ratio" => ratio(params, &cfg),
        "keyrate" => keyrate(params),
        "minp" => minp(params, &cfg),
        "minsqueeze" => minsqueeze(params, &cfg),
        "region" => region(params, &cfg),
        "darkcount" => darkcount(params, &cfg),
        "simulate" => simulate(params),
        "validate" => validate(params, &cfg),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn usage(e: qkdnoise::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn transmittances(params: &Params) -> Result<Vec<f64>, CliError> {
    let grid = params.grid("t")?;
    if let Some(bad) = grid.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(CliError::Usage(format!("--t: {bad} is outside (0, 1]")));
    }
    Ok(grid)
}

fn noise_levels(params: &Params) -> Result<Vec<f64>, CliError> {
    let grid = params.grid("mu")?;
    if let Some(bad) = grid.iter().find(|&&m| m < 0.0) {
        return Err(CliError::Usage(format!("--mu: {bad} is negative")));
    }
    Ok(grid)
}

fn trusted_noise(params: &Params) -> Result<TrustedNoise<f64>, CliError> {
    match params.raw("trusted-noise") {
        "opt" => Ok(TrustedNoise::Optimized),
        _ => {
            let v = params.f64("trusted-noise")?;
            if v < 0.0 {
                return Err(CliError::Usage("--trusted-noise must be 0, opt or a non-negative variance".into()));
            }
            Ok(TrustedNoise::Fixed(v))
        }
    }
}

fn dv_template(params: &Params) -> Result<SetupTemplate<f64>, CliError> {
    dv_template_with_dark(params, params.f64("dark-d")?)
}

fn dv_template_with_dark(params: &Params, dark: f64) -> Result<SetupTemplate<f64>, CliError> {
    let protocol = match params.choice("protocol", &["bb84", "sixstate"])? {
        "bb84" => DvProtocol::Bb84,
        _ => DvProtocol::SixState,
    };
    let family = match params.choice("noise", &["thermal", "poisson"])? {
        "thermal" => NoiseFamily::Thermal,
        _ => NoiseFamily::Poisson,
    };
    let detector = match params.choice("detector", &["binary", "pnr"])? {
        "binary" => Detector::Binary,
        _ => Detector::Pnr,
    };
    let channel = ChannelModel::new(1.0, NoiseSource::new(family, 0.0).map_err(usage)?).map_err(usage)?;
    let setup = DvSetup::ideal(protocol, channel)
        .with_preprocessing(params.bool("preprocess")?)
        .with_detector(detector)
        .with_source_p(params.f64("source-p")?)
        .with_dark_counts(dark, params.f64("eta")?);
    setup.validate().map_err(usage)?;
    Ok(SetupTemplate::Dv(setup))
}

fn cv_template(params: &Params, variant: &str) -> Result<SetupTemplate<f64>, CliError> {
    let trusted = trusted_noise(params)?;
    let channel = ChannelModel::thermal(1.0, 0.0).map_err(usage)?;
    let vs = params.optional_f64("vs")?;
    let vm = params.optional_f64("vm")?;
    let setup = match variant {
        "squeezed" => match (vs, vm) {
            (None, None) => CvSetup::squeezed(INFINITE_SQUEEZING_V, channel),
            // pure squeezed states: V - 1/V = V_m
            (None, Some(vm)) => CvSetup::squeezed((vm + (vm * vm + 4.0).sqrt()) / 2.0, channel),
            (Some(vs), None) => CvSetup::squeezed(1.0 / vs, channel),
            (Some(vs), Some(vm)) if (vs * (vs + vm) - 1.0).abs() <= 1e-12 => CvSetup::squeezed(vs + vm, channel),
            (Some(vs), Some(vm)) => CvSetup::generalized(vs, vm, channel),
        },
        _ => {
            if vs.is_some_and(|v| v != 1.0) {
                return Err(CliError::Usage("--vs: GG02 uses unsqueezed signals (V_s = 1)".into()));
            }
            CvSetup::gg02(vm.unwrap_or(INFINITE_SQUEEZING_V), channel)
        }
    }
    .map_err(usage)?;
    Ok(SetupTemplate::Cv(setup, trusted))
}

fn any_template(params: &Params) -> Result<SetupTemplate<f64>, CliError> {
    match params.choice("protocol", &["bb84", "sixstate", "squeezed", "gg02"])? {
        "squeezed" => cv_template(params, "squeezed"),
        "gg02" => cv_template(params, "gg02"),
        _ => dv_template(params),
    }
}

fn comparison_cv(params: &Params) -> Result<SetupTemplate<f64>, CliError> {
    let variant = params.choice("cv-protocol", &["squeezed", "gg02"])?;
    cv_template(params, variant)
}

fn curve_table(curve: &CurveResult<f64>, header: &[&'static str]) -> Table {
    let mut table = Table::new(header);
    for row in &curve.rows {
        let mut cells = vec![num(row.axis)];
        cells.extend(row.values.iter().map(|&v| num(v)));
        table.push(cells, row.status);
    }
    table
}

fn threshold(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let template = any_template(params)?;
    let grid = transmittances(params)?;
    let curve = analysis::threshold_curve(&template, &grid, cfg);
    Ok(curve_table(&curve, &["T", "mu_max", "status"]))
}

fn ratio(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let dv = dv_template(params)?;
    let cv = comparison_cv(params)?;
    let grid = transmittances(params)?;
    let curve = analysis::ratio_curve(&cv, &dv, &grid, cfg);
    Ok(curve_table(&curve, &["T", "mu_max_cv", "mu_max_dv", "ratio", "status"]))
}

fn keyrate(params: &Params) -> Result<Table, CliError> {
    let template = any_template(params)?;
    let grid = transmittances(params)?;
    let mut table = Table::new(&["mu", "T", "key_rate", "status"]);
    for mu in noise_levels(params)? {
        let at_mu = template.at(1.0, mu).map_err(usage)?;
        for row in analysis::key_rate_curve(&at_mu, &grid).rows {
            table.push(vec![num(mu), num(row.axis), num(row.values[0])], row.status);
        }
    }
    Ok(table)
}

fn minp(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let dv = dv_template(params)?;
    let grid = transmittances(params)?;
    let mut table = Table::new(&["T", "mu", "min_p", "status"]);
    for mu in noise_levels(params)? {
        for &t in &grid {
            let (p, status) = match analysis::min_source_p(&dv, t, mu, cfg) {
                Ok(Some(p)) => (p, Status::Ok),
                Ok(None) => (f64::NAN, Status::None),
                Err(_) => (f64::NAN, Status::Fail),
            };
            table.push(vec![num(t), num(mu), num(p)], status);
        }
    }
    Ok(table)
}

fn minsqueeze(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let modulation = params.optional_f64("vm")?.unwrap_or(DEFAULT_MODULATION);
    if !(modulation >= 1.0) {
        return Err(CliError::Usage("--vm must be at least 1".into()));
    }
    let trusted = trusted_noise(params)?;
    let grid = transmittances(params)?;
    let mut table = Table::new(&["T", "mu", "max_vs", "status"]);
    for mu in noise_levels(params)? {
        for &t in &grid {
            let (vs, status) = match analysis::min_squeezing(modulation, trusted, t, mu, cfg) {
                Ok(Some(vs)) => (vs, Status::Ok),
                Ok(None) => (f64::NAN, Status::None),
                Err(_) => (f64::NAN, Status::Fail),
            };
            table.push(vec![num(t), num(mu), num(vs)], status);
        }
    }
    Ok(table)
}

fn region(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let dv = dv_template(params)?;
    let cv = comparison_cv(params)?;
    let curve = analysis::region_map(&dv, &cv, &transmittances(params)?, &noise_levels(params)?, cfg);
    Ok(curve_table(&curve, &["T", "mu", "min_p", "status"]))
}

fn darkcount(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let eta = params.f64("eta")?;
    let dark = params.grid("dark-d")?;
    let ratios: Vec<f64> = dark.iter().map(|d| d / eta).collect();
    let (lo, hi) = DARK_COUNT_RANGE;
    if let Some(bad) = ratios.iter().find(|&&r| !(r >= lo * (1.0 - 1e-9) && r <= hi * (1.0 + 1e-9))) {
        return Err(CliError::Usage(format!("--dark-d / --eta = {bad} is outside [{lo}, {hi}]")));
    }
    let dv = dv_template_with_dark(params, dark[0])?;
    let cv = comparison_cv(params)?;
    let curve = analysis::dark_count_curve(&dv, &cv, &ratios, cfg);
    Ok(curve_table(&curve, &["d_over_eta", "t_th", "bound", "margin_decades", "status"]))
}

fn simulate(params: &Params) -> Result<Table, CliError> {
    let SetupTemplate::Dv(base) = dv_template(params)? else {
        unreachable!("dv_template returns a DV setup")
    };
    let trials = params.u64("trials")?;
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let seed = params.u64("seed")?;
    let grid = transmittances(params)?;
    let mut table = Table::new(&[
        "T", "mu", "p_exp", "qber", "p_exp_mc", "p_exp_se", "qber_mc", "qber_se", "accepted", "status",
    ]);
    for mu in noise_levels(params)? {
        for &t in &grid {
            let family = base.channel.noise().family();
            let channel = ChannelModel::new(t, NoiseSource::new(family, mu).map_err(usage)?).map_err(usage)?;
            let setup = base.with_channel(channel);
            let result = dv_security::observables(&setup).and_then(|o| Ok((o, dv_security::simulate_dv(&setup, trials, seed)?)));
            match result {
                Ok((o, sim)) => table.push(
                    vec![
                        num(t),
                        num(mu),
                        num(o.p_exp),
                        num(o.qber),
                        num(sim.p_exp),
                        num(sim.p_exp_std_error),
                        num(sim.qber),
                        num(sim.qber_std_error),
                        sim.accepted.to_string(),
                    ],
                    Status::Ok,
                ),
                Err(_) => {
                    let mut cells = vec![num(t), num(mu)];
                    cells.extend(std::iter::repeat_n(num(f64::NAN), 6));
                    cells.push("0".to_string());
                    table.push(cells, Status::Fail);
                }
            }
        }
    }
    Ok(table)
}

fn validate(params: &Params, cfg: &AnalysisConfig<f64>) -> Result<Table, CliError> {
    let grid = transmittances(params)?;
    let mut table = Table::new(&["check", "T", "value", "reference", "relative_error", "result", "status"]);
    let verdict = |ok: bool| if ok { "pass" } else { "fail" }.to_string();
    let mut failed = 0;

    let checks = analysis::asymptotic_agreement(&grid, cfg)?;
    for c in &checks {
        let ok = c.relative_error <= ASYMPTOTIC_TOLERANCE;
        failed += usize::from(!ok);
        table.push(
            vec![
                format!("asymptotic_{}", c.protocol),
                num(c.t),
                num(c.exact),
                num(c.asymptotic),
                num(c.relative_error),
                verdict(ok),
            ],
            Status::Ok,
        );
    }
    // the DV relative error should shrink as T decreases
    {
        let protocol = "sixstate";
        let mut errors: Vec<(f64, f64)> = checks
            .iter()
            .filter(|c| c.protocol == protocol)
            .map(|c| (c.t, c.relative_error))
            .collect();
        errors.sort_by(|a, b| b.0.total_cmp(&a.0));
        let ok = errors.windows(2).all(|w| w[1].1 <= w[0].1);
        failed += usize::from(!ok);
        let last = errors.last().copied().unwrap_or((f64::NAN, f64::NAN));
        table.push(
            vec![
                format!("decreasing_error_{protocol}"),
                num(last.0),
                num(last.1),
                num(f64::NAN),
                num(f64::NAN),
                verdict(ok),
            ],
            Status::Ok,
        );
    }
    for &t in &grid {
        let change = analysis::squeezing_convergence(t, TrustedNoise::Fixed(0.0), cfg)?;
        let ok = change < CONVERGENCE_TOLERANCE;
        failed += usize::from(!ok);
        table.push(
            vec![
                "squeezing_convergence".to_string(),
                num(t),
                num(change),
                num(CONVERGENCE_TOLERANCE),
                num(change),
                verdict(ok),
            ],
            Status::Ok,
        );
    }
    if failed > 0 {
        table.failures = failed;
    }
    Ok(table)
}
