use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use pqhyper::conditions::{self, ConvexityReport, LocalReport, RStar, RegionSpec, TGrid};
use pqhyper::discrete::{discrete_profile, symmetric_coefficients, DiscreteProfile};
use pqhyper::flow::{c_of_s, flow_monotonicity, global_check, uniform_s_grid, FlowConfig, FlowReport};
use pqhyper::hermite::{random_hermite, Basis, CPoly, ComplexParam};
use pqhyper::parse::{parse_complex, parse_fn, parse_pair, parse_poly};
use pqhyper::quad::QuadRule;
use pqhyper::report::{sig17, to_json, Assumptions, Envelope};
use pqhyper::scalarfn::{FnPair, PairDescription};
use pqhyper::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{GridArgs, OutArgs, PairArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

/// Errors while resolving arguments are usage errors.
fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn numeric(e: Error) -> CliError {
    CliError::Numeric(e.to_string())
}

#[derive(Serialize)]
struct PairConfig {
    p_spec: String,
    q_spec: Option<String>,
    resolved: PairDescription,
}

fn resolve_pair(args: &PairArgs) -> Result<(FnPair, PairConfig), CliError> {
    let pair = parse_pair(&args.p, args.q.as_deref()).map_err(usage)?;
    let cfg = PairConfig {
        p_spec: args.p.clone(),
        q_spec: args.q.clone(),
        resolved: pair.describe(),
    };
    Ok((pair, cfg))
}

fn resolve_z(src: &str) -> Result<ComplexParam, CliError> {
    ComplexParam::from_complex(parse_complex(src).map_err(usage)?).map_err(usage)
}

fn resolve_grid(g: &GridArgs) -> Result<TGrid, CliError> {
    TGrid::new(g.tmin, g.tmax, g.tpoints).map_err(usage)
}

fn assumptions(pair: &FnPair) -> Assumptions {
    Assumptions::declared(pair.p.growth_declared() && pair.f.growth_declared())
}

fn emit(out: &OutArgs, text: &str) -> Result<(), CliError> {
    match &out.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn no_csv(out: &OutArgs, command: &str) -> Result<(), CliError> {
    if out.csv {
        Err(CliError::Usage(format!("{command} has no CSV form")))
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct LocalConfig {
    pair: PairConfig,
    z: ComplexParam,
    t_grid: TGrid,
}

#[derive(Serialize)]
struct LocalResult {
    local: LocalReport,
    /// Convexity hypotheses on `F`, reported alongside; not part of `pass`.
    f_convexity: ConvexityReport,
}

pub fn check_local(pair: &PairArgs, z: &str, grid: &GridArgs, tol: f64, out: &OutArgs) -> Result<bool, CliError> {
    no_csv(out, "check-local")?;
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let z = resolve_z(z)?;
    let grid = resolve_grid(grid)?;
    let mut local = conditions::check_local(&fp, z, &grid).map_err(numeric)?;
    local.holds = local.min_margin >= -tol;
    let pass = local.holds;
    let result = LocalResult {
        local,
        f_convexity: conditions::convexity_report(fp.f.as_ref(), &grid),
    };
    let cfg = LocalConfig {
        pair: pair_cfg,
        z,
        t_grid: grid,
    };
    let env = Envelope::new("check-local", cfg, assumptions(&fp), pass, result)
        .tolerance("admissible", tol)
        .tolerance("convexity", conditions::CONVEXITY_TOL);
    emit(out, &to_json(&env))?;
    Ok(pass)
}

#[derive(Serialize)]
struct ScanConfig {
    pair: PairConfig,
    t_grid: TGrid,
    region: RegionSpec,
}

#[derive(Serialize)]
struct ScanSummary {
    cells: usize,
    admissible: usize,
    errors: usize,
    admissible_fraction: f64,
    first_error: Option<String>,
}

pub fn scan_region(
    pair: &PairArgs,
    grid: &GridArgs,
    n: usize,
    csv_out: Option<&Path>,
    out: &OutArgs,
) -> Result<bool, CliError> {
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let grid = resolve_grid(grid)?;
    if n == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let spec = RegionSpec::square(n);
    let scan = conditions::scan_region(&fp, spec, &grid).map_err(numeric)?;
    let csv = scan.to_csv();
    if let Some(path) = csv_out {
        write_file(path, &csv)?;
    }
    let summary = ScanSummary {
        cells: scan.cells.len(),
        admissible: scan.admissible_count(),
        errors: scan.error_count(),
        admissible_fraction: scan.admissible_count() as f64 / scan.cells.len() as f64,
        first_error: scan.cells.iter().find_map(|c| c.error.clone()),
    };
    let pass = summary.errors == 0;
    if out.csv {
        emit(out, &csv)?;
    } else {
        let cfg = ScanConfig {
            pair: pair_cfg,
            t_grid: grid,
            region: spec,
        };
        let env = Envelope::new("scan-region", cfg, assumptions(&fp), pass, summary)
            .tolerance("admissible", conditions::ADMISSIBLE_TOL);
        emit(out, &to_json(&env))?;
    }
    Ok(pass)
}

pub struct GlobalOptions {
    pub degree: u32,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub order: usize,
    pub probe: bool,
    pub eps: f64,
    pub tol: f64,
}

#[derive(Serialize)]
struct GlobalConfig {
    pair: PairConfig,
    z: ComplexParam,
    degree: u32,
    dim: usize,
    trials: usize,
    seed: u64,
    order: usize,
    probe: bool,
    eps: Option<f64>,
}

#[derive(Serialize)]
struct Trial {
    trial: usize,
    poly: String,
    rhs: f64,
    lhs: f64,
    margin: f64,
}

#[derive(Serialize)]
struct GlobalResult {
    trials: Vec<Trial>,
    min_margin: Option<f64>,
    negative: usize,
}

pub fn verify_global(pair: &PairArgs, z: &str, o: GlobalOptions, out: &OutArgs) -> Result<bool, CliError> {
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let zp = resolve_z(z)?;
    if !(1..=3).contains(&o.dim) || o.degree > 8 {
        return Err(CliError::Usage("verify-global needs --dim in 1..=3 and --degree ≤ 8".into()));
    }
    let rule = QuadRule::gauss(o.order).map_err(usage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let one = CPoly::constant(o.dim, Basis::Hermite, Complex64::new(1.0, 0.0));
    let mut trials = Vec::with_capacity(o.trials);
    for trial in 0..o.trials {
        let mut f = random_hermite(o.dim, o.degree, &mut rng);
        if o.probe {
            let mean = f.mean();
            let centred = f.add(&CPoly::constant(o.dim, Basis::Hermite, -mean)).map_err(numeric)?;
            f = one.add(&centred.scale(Complex64::new(o.eps, 0.0))).map_err(numeric)?;
        }
        let g = global_check(&f, &fp, zp, &rule).map_err(numeric)?;
        trials.push(Trial {
            trial,
            poly: f.to_string(),
            rhs: g.rhs,
            lhs: g.lhs,
            margin: g.margin,
        });
    }
    let min_margin = trials.iter().map(|t| t.margin).reduce(f64::min);
    let negative = trials.iter().filter(|t| t.margin < -o.tol).count();
    let pass = negative == 0;
    if out.csv {
        let mut s = String::from("trial,margin,rhs,lhs\n");
        for t in &trials {
            s.push_str(&format!("{},{},{},{}\n", t.trial, sig17(t.margin), sig17(t.rhs), sig17(t.lhs)));
        }
        emit(out, &s)?;
    } else {
        let cfg = GlobalConfig {
            pair: pair_cfg,
            z: zp,
            degree: o.degree,
            dim: o.dim,
            trials: o.trials,
            seed: o.seed,
            order: o.order,
            probe: o.probe,
            eps: o.probe.then_some(o.eps),
        };
        let result = GlobalResult {
            trials,
            min_margin,
            negative,
        };
        let env = Envelope::new("verify-global", cfg, assumptions(&fp), pass, result).tolerance("margin", o.tol);
        emit(out, &to_json(&env))?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct FlowCliConfig {
    pair: PairConfig,
    z: ComplexParam,
    poly: String,
    s_points: usize,
    order_u: usize,
    order_x: usize,
}

fn flow_config(fp: &FnPair, zp: ComplexParam, poly: &str, order: Option<usize>) -> Result<FlowConfig, CliError> {
    let f = parse_poly(poly, None).map_err(usage)?;
    let mut cfg = FlowConfig::new(f, fp.clone(), zp);
    if let Some(n) = order {
        QuadRule::gauss(n).map_err(usage)?;
        cfg.order_u = n;
        cfg.order_x = n;
    }
    Ok(cfg)
}

pub fn flow(
    pair: &PairArgs,
    z: &str,
    poly: &str,
    order: Option<usize>,
    spoints: usize,
    tol: f64,
    out: &OutArgs,
) -> Result<bool, CliError> {
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let zp = resolve_z(z)?;
    let mut cfg = flow_config(&fp, zp, poly, order)?;
    if spoints < 2 {
        return Err(CliError::Usage("--spoints must be at least 2".into()));
    }
    cfg.s_grid = uniform_s_grid(spoints);
    if !(1..=2).contains(&cfg.f.dim()) {
        return Err(CliError::Usage("flow polynomials must have 1 or 2 variables".into()));
    }
    let mut rep: FlowReport = flow_monotonicity(&cfg).map_err(numeric)?;
    let c1 = rep.values.last().copied().unwrap_or(0.0);
    rep.tolerance = tol * c1.abs().max(1.0);
    rep.pass = rep.min_increment >= -rep.tolerance;
    let pass = rep.pass;
    if out.csv {
        let mut s = String::from("s,C\n");
        for (a, b) in rep.s.iter().zip(&rep.values) {
            s.push_str(&format!("{},{}\n", sig17(*a), sig17(*b)));
        }
        emit(out, &s)?;
    } else {
        let c = FlowCliConfig {
            pair: pair_cfg,
            z: zp,
            poly: cfg.f.to_string(),
            s_points: spoints,
            order_u: cfg.order_u,
            order_x: cfg.order_x,
        };
        let env = Envelope::new("flow", c, assumptions(&fp), pass, rep).tolerance("relative_step", tol);
        emit(out, &to_json(&env))?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct DiscreteConfig {
    pair: PairConfig,
    z: ComplexParam,
    poly: String,
    m: usize,
    order_u: usize,
    order_x: usize,
}

#[derive(Serialize)]
struct DiscreteRow {
    k: usize,
    s: f64,
    phi: f64,
    /// `F⁻¹(C(k/m))`, which agrees with `φ` at both ends.
    flow: f64,
}

#[derive(Serialize)]
struct DiscreteResult {
    profile: DiscreteProfile,
    table: Vec<DiscreteRow>,
}

pub fn discrete(
    pair: &PairArgs,
    z: &str,
    poly: &str,
    m: usize,
    order: Option<usize>,
    tol: f64,
    out: &OutArgs,
) -> Result<bool, CliError> {
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let zp = resolve_z(z)?;
    let cfg = flow_config(&fp, zp, poly, order)?;
    if cfg.f.dim() != 1 {
        return Err(CliError::Usage("discrete needs a one-variable polynomial".into()));
    }
    if m == 0 || m > pqhyper::discrete::MAX_DIM {
        return Err(CliError::Usage(format!("--m must be in 1..={}", pqhyper::discrete::MAX_DIM)));
    }
    let coeffs = symmetric_coefficients(&cfg.f, m).map_err(numeric)?;
    let profile = discrete_profile(&coeffs, &fp, zp, tol).map_err(numeric)?;
    let table = profile
        .values
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let s = k as f64 / m as f64;
            let flow = fp.f_inverse(c_of_s(&cfg, s)?)?;
            Ok(DiscreteRow { k, s, phi, flow })
        })
        .collect::<pqhyper::Result<Vec<_>>>()
        .map_err(numeric)?;
    let pass = profile.monotone;
    if out.csv {
        let mut s = String::from("k,s,phi,flow\n");
        for r in &table {
            s.push_str(&format!("{},{},{},{}\n", r.k, sig17(r.s), sig17(r.phi), sig17(r.flow)));
        }
        emit(out, &s)?;
    } else {
        let c = DiscreteConfig {
            pair: pair_cfg,
            z: zp,
            poly: cfg.f.to_string(),
            m,
            order_u: cfg.order_u,
            order_x: cfg.order_x,
        };
        let env = Envelope::new("discrete", c, assumptions(&fp), pass, DiscreteResult { profile, table })
            .tolerance("monotone", tol);
        emit(out, &to_json(&env))?;
    }
    Ok(pass)
}

#[derive(Serialize)]
struct GridOnlyConfig {
    pair: PairConfig,
    t_grid: TGrid,
}

pub fn rstar(pair: &PairArgs, grid: &GridArgs, out: &OutArgs) -> Result<bool, CliError> {
    no_csv(out, "rstar")?;
    let (fp, pair_cfg) = resolve_pair(pair)?;
    let grid = resolve_grid(grid)?;
    let r: RStar = conditions::r_star(&fp, &grid).map_err(numeric)?;
    let cfg = GridOnlyConfig {
        pair: pair_cfg,
        t_grid: grid,
    };
    emit(out, &to_json(&Envelope::new("rstar", cfg, assumptions(&fp), true, r)))?;
    Ok(true)
}

#[derive(Serialize)]
struct LensConfig {
    p_spec: String,
    resolved: String,
    t_grid: TGrid,
    points: Vec<ComplexParam>,
}

#[derive(Serialize)]
struct LensPoint {
    z: ComplexParam,
    contained: bool,
    margin: f64,
}

#[derive(Serialize)]
struct LensResult {
    c_p: f64,
    points: Vec<LensPoint>,
}

pub fn lens(p: &str, zs: &[String], grid: &GridArgs, out: &OutArgs) -> Result<bool, CliError> {
    no_csv(out, "lens")?;
    let f = parse_fn(p).map_err(usage)?;
    let grid = resolve_grid(grid)?;
    let mut points = vec![ComplexParam::real(1.0).map_err(usage)?, ComplexParam::real(-1.0).map_err(usage)?];
    for z in zs {
        points.push(resolve_z(z)?);
    }
    let c_p = conditions::lens_cp(f.as_ref(), &grid).map_err(numeric)?;
    let results = points
        .iter()
        .map(|&z| {
            let (contained, margin) = conditions::lens_contains(c_p, z)?;
            Ok(LensPoint { z, contained, margin })
        })
        .collect::<pqhyper::Result<Vec<_>>>()
        .map_err(numeric)?;
    let pass = results.iter().all(|r| r.contained);
    let cfg = LensConfig {
        p_spec: p.to_string(),
        resolved: f.describe(),
        t_grid: grid,
        points,
    };
    let env = Envelope::new("lens", cfg, Assumptions::declared(f.growth_declared()), pass, LensResult {
        c_p,
        points: results,
    })
    .tolerance("lens", conditions::LENS_TOL);
    emit(out, &to_json(&env))?;
    Ok(pass)
}
