//! Command implementations. Each builds a [`Table`] from library calls
//! only; rendering happens afterwards.

use asymkde::asymptotics::mise_lognormal_reference;
use asymkde::bandwidth::{
    cv_profile, default_sigma_grid, loo_cv_score, plugin_from_samples, MiseProfile,
};
use asymkde::reference::estimate_log_params;
use asymkde::special::normal_quantile;
use asymkde::{
    par, DensityEstimate, Error, Grid, KernelFamily, KernelSpec, LogNormalRef, Role, SampleSet,
    Spacing,
};

use crate::config::{BandwidthArgs, BandwidthMode, GridSpec, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::output::{quantile, Cell, Table};

/// Points in the default evaluation grid.
pub const DEFAULT_GRID_POINTS: usize = 512;
/// Tail probability at each end of the default evaluation grid.
pub const DEFAULT_GRID_TAIL: f64 = 1e-5;

/// Everything `estimate` needs besides the samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub family: KernelFamily,
    pub role: Role,
    pub bandwidth: BandwidthMode,
    pub grid: Option<GridSpec>,
}

/// Geometric grid between the tail quantiles of the log-normal fitted to
/// the samples.
pub fn default_grid(samples: &SampleSet) -> CliResult<Grid> {
    let (mu, big_sigma) = estimate_log_params(samples)?;
    if big_sigma == 0.0 {
        return Err(CliError::Domain(
            "the default grid needs two distinct samples; pass --grid".into(),
        ));
    }
    let z = normal_quantile(1.0 - DEFAULT_GRID_TAIL);
    Ok(Grid::new(
        (mu - big_sigma * z).exp(),
        (mu + big_sigma * z).exp(),
        DEFAULT_GRID_POINTS,
        Spacing::Geometric,
    )?)
}

/// Resolves the bandwidth mode to a σ.
pub fn select_sigma(
    family: KernelFamily,
    role: Role,
    mode: BandwidthMode,
    samples: &SampleSet,
) -> CliResult<f64> {
    match mode {
        BandwidthMode::Fixed(s) => Ok(s),
        BandwidthMode::Plugin => Ok(plugin_from_samples(family, role, samples)?),
        BandwidthMode::Cv => {
            let spec = KernelSpec::new(family, role, 1.0)?;
            let grid = default_sigma_grid(family, role, samples)?;
            Ok(cv_profile(&spec, samples, &grid)?.cv_argmin)
        }
    }
}

pub fn estimate(samples: SampleSet, opts: &EstimateOptions) -> CliResult<Table> {
    let sigma = select_sigma(opts.family, opts.role, opts.bandwidth, &samples)?;
    let grid = match &opts.grid {
        Some(g) => g.build()?,
        None => default_grid(&samples)?,
    };
    let spec = KernelSpec::new(opts.family, opts.role, sigma)?;
    let n = samples.len();
    let est = DensityEstimate::new(spec, samples)?;
    let values = par::map_slice(grid.points(), |&x| est.evaluate(x));
    // The improper RIG estimate is undefined at x <= σ²; those points stay empty.
    let undefined_ok =
        opts.family == KernelFamily::ReciprocalInverseGaussian && opts.role == Role::Improper;
    let mut table = Table::new(&["x", "density"]);
    header(&mut table, &spec, &opts.bandwidth.to_string(), n);
    for (&x, v) in grid.points().iter().zip(values) {
        let cell = match v {
            Ok(v) => Cell::Num(v),
            Err(Error::Domain(_)) if undefined_ok => Cell::Empty,
            Err(e) => return Err(e.into()),
        };
        table.push(vec![Cell::Num(x), cell]);
    }
    Ok(table)
}

fn header(table: &mut Table, spec: &KernelSpec, mode: &str, n: usize) {
    table
        .meta("kernel", spec.family())
        .meta("role", spec.role())
        .meta_num("sigma", spec.sigma())
        .meta("bandwidth", mode)
        .meta("n", n)
        .meta("version", asymkde::VERSION);
}

pub fn bandwidth(samples: &SampleSet, args: &BandwidthArgs) -> CliResult<Table> {
    let (family, role) = (args.kernel.kernel, args.kernel.role);
    let mut table = Table::new(&["sigma", "cv_score", "asymptotic_mise"]);
    table
        .meta("kernel", family)
        .meta("role", role)
        .meta("bandwidth", args.bandwidth)
        .meta("n", samples.len());
    let asymptotic = |s: f64| -> CliResult<Option<f64>> {
        let spec = KernelSpec::new(family, role, s)?;
        if !spec.asymptotics_available() || samples.len() < 2 || samples.log_std() == 0.0 {
            return Ok(None);
        }
        Ok(Some(mise_lognormal_reference(
            &spec,
            samples.log_mean(),
            samples.log_std(),
            samples.len(),
        )?))
    };
    match args.bandwidth {
        BandwidthMode::Plugin => {
            let s = plugin_from_samples(family, role, samples)?;
            table.meta_num("plugin_sigma", s);
            table.push(vec![Cell::Num(s), Cell::Empty, asymptotic(s)?.into()]);
        }
        BandwidthMode::Fixed(s) => {
            let spec = KernelSpec::new(family, role, s)?;
            let m = loo_cv_score(&spec, samples, s)?;
            table.push(vec![Cell::Num(s), Cell::Num(m), asymptotic(s)?.into()]);
        }
        BandwidthMode::Cv => {
            let grid = match &args.grid {
                Some(g) => g.build()?.points().to_vec(),
                None => default_sigma_grid(family, role, samples)?,
            };
            let spec = KernelSpec::new(family, role, grid[0])?;
            let p = cv_profile(&spec, samples, &grid)?;
            table.meta_num("cv_argmin", p.cv_argmin);
            if let Some(s) = p.plugin_sigma {
                table.meta_num("plugin_sigma", s);
            }
            if let Some(s) = p.asymptotic_argmin() {
                table.meta_num("asymptotic_argmin", s);
            }
            for (i, &s) in p.sigmas.iter().enumerate() {
                let a = p.asymptotic_mise.as_ref().map(|m| m[i]);
                table.push(vec![Cell::Num(s), Cell::Num(p.cv_scores[i]), a.into()]);
            }
        }
    }
    table.meta("version", asymkde::VERSION);
    Ok(table)
}

/// Cross-validation profiles of `reps` replications; replication `r` draws
/// from stream `r + 1` of `seed`.
pub fn simulate_profiles(
    spec: &KernelSpec,
    generating: &LogNormalRef,
    n: usize,
    reps: usize,
    seed: u64,
    sigma_grid: &[f64],
) -> CliResult<Vec<MiseProfile>> {
    Ok(par::try_map_range(reps, |r| {
        let samples = generating.sample_stream(n, seed, r as u64 + 1)?;
        cv_profile(spec, &samples, sigma_grid)
    })?)
}

pub const SIMULATE_REPS: usize = 1000;
pub const SIMULATE_QUICK_REPS: usize = 50;

pub fn simulate(args: &SimulateArgs) -> CliResult<Table> {
    let reps = args.reps.unwrap_or(if args.quick {
        SIMULATE_QUICK_REPS
    } else {
        SIMULATE_REPS
    });
    if reps < 2 {
        return Err(CliError::Domain(format!(
            "need at least two replications, got {reps}"
        )));
    }
    let grid = match &args.grid {
        Some(g) => g.build()?,
        None => Grid::new(
            0.05,
            1.5,
            if args.quick { 20 } else { 40 },
            Spacing::Geometric,
        )?,
    };
    let generating = LogNormalRef::new(args.mu, args.log_sd)?;
    let spec = KernelSpec::new(args.kernel.kernel, args.kernel.role, grid.points()[0])?;
    let profiles = simulate_profiles(&spec, &generating, args.n, reps, args.seed, grid.points())?;

    let mut table = Table::new(&["row", "replication", "sigma", "cv_score", "asymptotic_mise"]);
    table
        .meta("kernel", spec.family())
        .meta("role", spec.role())
        .meta_num("mu", args.mu)
        .meta_num("log_sd", args.log_sd)
        .meta("n", args.n)
        .meta("replications", reps)
        .meta("seed", args.seed);
    if let Ok(p) = asymkde::bandwidth::plugin_bandwidth(
        spec.family(),
        spec.role(),
        args.mu,
        args.log_sd,
        args.n,
    ) {
        table.meta_num("plugin_sigma", p);
    }
    let argmins: Vec<f64> = profiles.iter().map(|p| p.cv_argmin).collect();
    table.meta_num("median_cv_argmin", quantile(&argmins, 0.5));
    table.meta("version", asymkde::VERSION);

    for (r, p) in profiles.iter().enumerate() {
        for (i, &s) in p.sigmas.iter().enumerate() {
            let a = p.asymptotic_mise.as_ref().map(|m| m[i]);
            table.push(vec![
                "profile".into(),
                r.into(),
                Cell::Num(s),
                Cell::Num(p.cv_scores[i]),
                a.into(),
            ]);
        }
    }
    for (r, p) in profiles.iter().enumerate() {
        table.push(vec![
            "cv_argmin".into(),
            r.into(),
            Cell::Num(p.cv_argmin),
            Cell::Empty,
            Cell::Empty,
        ]);
        if let Some(s) = p.plugin_sigma {
            table.push(vec![
                "plugin".into(),
                r.into(),
                Cell::Num(s),
                Cell::Empty,
                Cell::Empty,
            ]);
        }
    }
    for (label, q) in [("q05", 0.05), ("q50", 0.5), ("q95", 0.95)] {
        for (i, &s) in grid.points().iter().enumerate() {
            let cv: Vec<f64> = profiles.iter().map(|p| p.cv_scores[i]).collect();
            let asym: Option<Vec<f64>> = profiles
                .iter()
                .map(|p| p.asymptotic_mise.as_ref().map(|m| m[i]))
                .collect();
            table.push(vec![
                label.into(),
                Cell::Empty,
                Cell::Num(s),
                Cell::Num(quantile(&cv, q)),
                asym.map(|a| quantile(&a, q)).into(),
            ]);
        }
    }
    Ok(table)
}
