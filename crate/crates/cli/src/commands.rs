use qphase::canonical::{canonical_distribution, canonical_variance_sweep, sin2_weighted_density};
use qphase::circular::Measure;
use qphase::states::{StateKind, TwoModeState};
use qphase::trajectory::{
    exact_variance_enumeration, monte_carlo_variance, FeedbackPolicy, DEFAULT_ENUMERATION_CAP,
    DEFAULT_PHI1_GRID,
};

use crate::config::ExperimentConfig;
use crate::output::{fmt_float, write_text, Csv};
use crate::CliError;

/// Angles in the distribution CSV.
pub const DIST_GRID: usize = 4096;
const DEFAULT_TRIALS: usize = 10_000;
const DEFAULT_MARKER_MAX: usize = 128;
const FIG3_PHOTONS: [usize; 6] = [4, 8, 16, 32, 64, 128];

pub fn state(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kind = cfg.kind()?;
    let mut s = kind.build(cfg.photons()?)?;
    if let Some(basis) = cfg.basis {
        s = s.to_basis(basis)?;
    }
    let mut text = serde_json::to_string_pretty(&s).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write_text(cfg.out.as_deref(), &text)
}

pub fn canonical(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kind = cfg.kind()?;
    if cfg.dist.unwrap_or(false) {
        return distribution(cfg, kind.build(cfg.photons()?)?);
    }
    if cfg.multiply_sin2.unwrap_or(false) {
        return Err(CliError::Config("--multiply-sin2 needs --dist".into()));
    }
    let rows = canonical_variance_sweep(kind, &cfg.photon_list()?, cfg.measure())?;
    let mut csv = Csv::open(cfg.out.as_deref(), &["N", "variance"])?;
    for r in rows {
        csv.line([r.photons.to_string(), fmt_float(r.variance)])?;
    }
    csv.finish()
}

fn distribution(cfg: &ExperimentConfig, input: TwoModeState) -> Result<(), CliError> {
    let dist = canonical_distribution(&input)?;
    let (rows, header) = if cfg.multiply_sin2.unwrap_or(false) {
        (sin2_weighted_density(&dist, DIST_GRID), "density_sin2")
    } else {
        let values = dist.grid_values(DIST_GRID);
        let step = std::f64::consts::TAU / DIST_GRID as f64;
        let rows = values
            .into_iter()
            .enumerate()
            .map(|(k, v)| (step * k as f64, v))
            .collect();
        (rows, "density")
    };
    let mut csv = Csv::open(cfg.out.as_deref(), &["phi", header])?;
    for (phi, v) in rows {
        csv.line([fmt_float(phi), fmt_float(v)])?;
    }
    csv.finish()
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kind = cfg.kind.unwrap_or(StateKind::Optimal);
    let policy = cfg.policy();
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = cfg.seed.unwrap_or(0);
    let list = cfg.photon_list()?;
    let inputs = list
        .iter()
        .map(|&n| kind.build(n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Csv::open(
        cfg.out.as_deref(),
        &[
            "N",
            "policy",
            "measure",
            "trials",
            "seed",
            "variance",
            "std_error",
            "sharpness",
        ],
    )?;
    for input in &inputs {
        let rep = monte_carlo_variance(input, &policy, trials, seed)?;
        csv.line([
            rep.photons.to_string(),
            policy.rule.name().to_string(),
            policy.measure.name().to_string(),
            rep.trials.to_string(),
            rep.seed.to_string(),
            fmt_float(rep.variance),
            fmt_float(rep.std_error),
            fmt_float(rep.sharpness),
        ])?;
    }
    csv.finish()
}

pub fn enumerate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let kind = cfg.kind.unwrap_or(StateKind::Optimal);
    let policy = cfg.policy();
    let grid = cfg.phi1_grid.unwrap_or(DEFAULT_PHI1_GRID);
    let cap = cfg.cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let input = kind.build(cfg.photons()?)?;
    let rep = exact_variance_enumeration(&input, &policy, grid, cap)?;
    let mut csv = Csv::open(
        cfg.out.as_deref(),
        &[
            "N",
            "policy",
            "measure",
            "phi1_grid",
            "variance",
            "sharpness",
        ],
    )?;
    csv.line([
        rep.photons.to_string(),
        policy.rule.name().to_string(),
        policy.measure.name().to_string(),
        rep.grid.to_string(),
        fmt_float(rep.variance),
        fmt_float(rep.sharpness),
    ])?;
    csv.finish()
}

/// Canonical lines for three input states plus simulated markers, one
/// series per row. `equal` series use the mod-pi variance and skip odd N.
pub fn sweep_fig3(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let list = cfg
        .photons_list
        .clone()
        .filter(|l| !l.is_empty())
        .unwrap_or_else(|| FIG3_PHOTONS.to_vec());
    let even: Vec<usize> = list.iter().copied().filter(|n| n % 2 == 0).collect();
    let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = cfg.seed.unwrap_or(0);
    let marker_max = cfg.marker_max.unwrap_or(DEFAULT_MARKER_MAX);

    let mut csv = Csv::open(
        cfg.out.as_deref(),
        &["series", "N", "variance", "std_error"],
    )?;
    let lines = [
        (
            "canonical-optimal",
            StateKind::Optimal,
            Measure::Holevo,
            &list,
        ),
        (
            "canonical-one-port",
            StateKind::OnePort,
            Measure::Holevo,
            &list,
        ),
        (
            "canonical-equal",
            StateKind::EqualSplit,
            Measure::ModPi,
            &even,
        ),
    ];
    for (name, kind, measure, ns) in lines {
        for r in canonical_variance_sweep(kind, ns, measure)? {
            csv.line([
                name.into(),
                r.photons.to_string(),
                fmt_float(r.variance),
                "0".into(),
            ])?;
        }
    }
    let markers = [
        (
            "adaptive-optimal",
            StateKind::Optimal,
            FeedbackPolicy::adaptive(Measure::Holevo),
        ),
        (
            "adaptive-equal",
            StateKind::EqualSplit,
            FeedbackPolicy::adaptive(Measure::ModPi),
        ),
        (
            "nonadaptive-optimal",
            StateKind::Optimal,
            FeedbackPolicy::nonadaptive(Measure::Holevo),
        ),
    ];
    for (name, kind, policy) in markers {
        let ns = if kind == StateKind::EqualSplit {
            &even
        } else {
            &list
        };
        for &n in ns.iter().filter(|&&n| n <= marker_max) {
            let rep = monte_carlo_variance(&kind.build(n)?, &policy, trials, seed)?;
            csv.line([
                name.into(),
                n.to_string(),
                fmt_float(rep.variance),
                fmt_float(rep.std_error),
            ])?;
        }
    }
    csv.finish()
}
