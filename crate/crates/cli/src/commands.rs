use std::path::Path;

use asympdiag::block::{block_diagonalize, BlockMode};
use asympdiag::document::{entries_from_series, series_from_entries, FamilyDocument, OdeDocument};
use asympdiag::hyperbolic::{sample_directions, scan_directions, write_csv, HyperbolicPolynomial};
use asympdiag::oracle::{self, default_grid, fit_above_floor, log10_grid, SlopeFit};
use asympdiag::standard::{diagonalize, residual_accurate, spectral_bound, DiagonalizationResult};
use asympdiag::thermo::{self, ThermoParams};
use asympdiag::wkb::{
    asymptotic_diagonalize_ode, reference_solve, wkb_solve, PeanoBakerMode, PeanoBakerOptions,
};
use asympdiag::linalg::vec_norm;
use asympdiag::{Error, MatrixSeries, Tolerances, C64};

use crate::args::{
    Cli, Command, ExpandArgs, IntegrateArgs, Mode, QMode, Regime, RootsArgs, ThermoArgs, TolArgs, VerifyArgs,
};
use crate::report::*;
use crate::{emit, read_input, to_json, CliError};

pub(crate) fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let tol = tolerances(&cli.tol)?;
    match &cli.command {
        Command::Expand(a) => expand(a, &tol),
        Command::Verify(a) => verify(a, &tol),
        Command::Roots(a) => roots(a, &tol),
        Command::Integrate(a) => integrate(a, &tol),
        Command::Thermo(a) => thermo_cmd(a, &tol),
    }
}

fn tolerances(t: &TolArgs) -> Result<Tolerances, CliError> {
    for (name, v) in [("tol-eig", t.tol_eig), ("tol-group", t.tol_group), ("sep-min", t.sep_min)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Input(format!("--{name} must be positive, got {v}")));
        }
    }
    Ok(Tolerances {
        eig: t.tol_eig,
        group: t.tol_group,
        sep_min: t.sep_min,
    })
}

fn load_family(path: &Path) -> Result<(FamilyDocument, MatrixSeries), CliError> {
    let doc = FamilyDocument::from_json(&read_input(path)?)?;
    let series = doc.to_series()?;
    Ok((doc, series))
}

fn run_scheme(
    a: &MatrixSeries,
    n: usize,
    mode: Mode,
    tol: &Tolerances,
) -> Result<(DiagonalizationResult, &'static str), CliError> {
    let block = |m: BlockMode| block_diagonalize(a, n, m, tol).map(|r| r.0);
    match mode {
        Mode::Standard => match diagonalize(a, n, tol) {
            Ok(r) => Ok((r, "standard")),
            Err(Error::NotDiagonable { cond, limit }) => Err(CliError::Assumption {
                level: 0,
                message: format!("leading coefficient is not diagonable (eigenvector condition {cond:.3e}, limit {limit:.3e})"),
            }),
            Err(e) => Err(e.into()),
        },
        Mode::Block => Ok((block(BlockMode::SubSteps)?, "block")),
        Mode::Remark23 => Ok((block(BlockMode::PerfectBlock)?, "remark23")),
        Mode::Auto => match diagonalize(a, n, tol) {
            Ok(r) => Ok((r, "standard")),
            Err(Error::DegenerateLeading { .. } | Error::NotDiagonable { .. }) => {
                Ok((block(BlockMode::SubSteps)?, "block"))
            }
            Err(e) => Err(e.into()),
        },
    }
}

fn expand(args: &ExpandArgs, tol: &Tolerances) -> Result<String, CliError> {
    let (doc, a) = load_family(&args.file)?;
    let (r, mode) = run_scheme(&a, args.order, args.mode, tol)?;
    let report = ExpandReport {
        mode: mode.into(),
        order: r.order,
        dim: a.dim(),
        variable: doc.variable,
        branches: r.branches(),
        nondegeneracy_order: r.nondeg_order,
        filtration: r.filtration.clone(),
        empirical_radius: r.empirical_radius,
        residuals: r
            .residual_samples
            .iter()
            .map(|&(rho, norm)| ResidualRow { rho, norm })
            .collect(),
        lambda: entries_from_series(&r.lambda),
        m: entries_from_series(&r.m),
    };
    emit(to_json(&report), &args.output)
}

fn parse_grid(spec: &Option<String>) -> Result<Vec<f64>, CliError> {
    let Some(s) = spec else {
        return Ok(default_grid());
    };
    let bad = || CliError::Input(format!("grid must be lo:hi:count with 0 < lo < hi, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite() && count >= 2) {
        return Err(bad());
    }
    Ok(log10_grid(lo, hi, count))
}

fn load_expansion(path: &Path, a: &MatrixSeries) -> Result<(DiagonalizationResult, String), CliError> {
    let text = read_input(path)?;
    let rep: ExpandReport =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("expansion report: {e}")))?;
    if rep.dim != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: rep.dim,
        }
        .into());
    }
    let lambda = series_from_entries(&rep.lambda, rep.dim)?.extend_to(rep.order);
    let m = series_from_entries(&rep.m, rep.dim)?.extend_to(rep.order);
    let r = DiagonalizationResult {
        m0: m.coeff(0).clone(),
        m,
        lambda,
        order: rep.order,
        residual_samples: Vec::new(),
        empirical_radius: rep.empirical_radius,
        filtration: rep.filtration,
        nondeg_order: rep.nondegeneracy_order,
    };
    Ok((r, rep.mode))
}

/// Runs the residual, branch and spectral-bound checks for `r` on `grid`.
pub(crate) fn verify_expansion(
    a: &MatrixSeries,
    r: &DiagonalizationResult,
    mode: String,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<VerifyReport, CliError> {
    let n = r.order;

    let samples = grid
        .iter()
        .map(|&rho| Ok(ResidualRow { rho, norm: residual_accurate(a, r, C64::new(rho, 0.0))?.norm2() }))
        .collect::<Result<Vec<_>, Error>>()?;
    let norms: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    let slope = fit_above_floor(grid, &norms, 0.0)?;
    let residual = ResidualCheck {
        passed: slope.accepts(n),
        samples,
        slope,
    };

    let spectra = oracle::sample_spectrum(a, grid, tol.eig);
    let matched = oracle::match_branches(&spectra, &r.lambda);
    let floor = 1e-12 * a.scale_norm().max(1.0);
    let slopes: Vec<BranchSlope> = (0..a.dim())
        .map(|j| {
            let y: Vec<f64> = matched.residuals.iter().map(|row| row[j]).collect();
            match fit_above_floor(&matched.grid, &y, floor) {
                Ok(SlopeFit::Fitted(s)) => BranchSlope::Fitted(s),
                Ok(SlopeFit::Exact) => BranchSlope::Exact,
                Err(_) => BranchSlope::Unresolved,
            }
        })
        .collect();
    let branch_ok = |s: &BranchSlope| match s {
        BranchSlope::Fitted(v) => SlopeFit::Fitted(*v).accepts(n),
        _ => true,
    };
    let branches = BranchCheck {
        passed: slopes.iter().all(branch_ok),
        grid: matched.grid,
        residuals: matched.residuals,
        slopes,
    };

    let points = grid
        .iter()
        .filter(|&&rho| rho <= r.empirical_radius)
        .map(|&rho| spectral_bound(a, r, C64::new(rho, 0.0)))
        .collect::<Result<Vec<_>, Error>>()?;
    let spectral = BoundCheck {
        passed: points.iter().all(|p| p.verified),
        points,
    };

    let first_failure = if !residual.passed {
        Some(format!("residual_slope: {:?} below {}", residual.slope, n as f64 + 0.8))
    } else if let Some(j) = branches.slopes.iter().position(|s| !branch_ok(s)) {
        Some(format!("branch_slope: branch {j} has {:?}, need {}", branches.slopes[j], n as f64 + 0.8))
    } else {
        spectral
            .points
            .iter()
            .find(|p| !p.verified)
            .map(|p| format!("spectral_bound: rho = {}, distance {:e} > bound {:e}", p.rho, p.distance, p.bound))
    };
    Ok(VerifyReport {
        order: n,
        mode,
        grid: grid.to_vec(),
        empirical_radius: r.empirical_radius,
        passed: first_failure.is_none(),
        residual,
        branches,
        spectral_bound: spectral,
        first_failure,
    })
}

fn verify(args: &VerifyArgs, tol: &Tolerances) -> Result<String, CliError> {
    let (_, a) = load_family(&args.file)?;
    let grid = parse_grid(&args.grid)?;
    let (r, mode) = match &args.expansion {
        Some(p) => load_expansion(p, &a)?,
        None => {
            let (r, m) = run_scheme(&a, args.order, args.mode, tol)?;
            (r, m.to_string())
        }
    };
    let report = verify_expansion(&a, &r, mode, &grid, tol)?;
    let text = to_json(&report);
    match report.first_failure {
        Some(first) => Err(CliError::Verification {
            first,
            report: emit(text, &args.output)?,
        }),
        None => emit(text, &args.output),
    }
}

fn roots(args: &RootsArgs, tol: &Tolerances) -> Result<String, CliError> {
    let text = read_input(&args.file)?;
    let l: HyperbolicPolynomial =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("polynomial document: {e}")))?;
    if args.directions == 0 {
        return Err(CliError::Input("--directions must be positive".into()));
    }
    let dirs = sample_directions(l.dim(), args.directions, args.seed);
    let scan = scan_directions(&l, &dirs, args.order, tol)?;
    let mut buf = Vec::new();
    write_csv(&scan, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
    emit(String::from_utf8(buf).expect("CSV is UTF-8"), &args.output)
}

fn parse_vector(s: &str) -> Result<Vec<C64>, CliError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<C64>()
                .map_err(|_| CliError::Input(format!("cannot parse {p:?} as a complex number")))
        })
        .collect()
}

fn integrate(args: &IntegrateArgs, tol: &Tolerances) -> Result<String, CliError> {
    let mut doc = OdeDocument::from_json(&read_input(&args.file)?)?;
    if let Some(t0) = args.t0 {
        doc.t0 = t0;
    }
    let f = doc.to_family()?;
    let v0 = parse_vector(&args.v0)?;
    let opts = PeanoBakerOptions {
        mode: match args.q_mode {
            QMode::Volterra => PeanoBakerMode::Volterra,
            QMode::Picard => PeanoBakerMode::Picard { depth: args.depth },
        },
        ..PeanoBakerOptions::default()
    };
    let sol = wkb_solve(&f, &v0, args.t_end, args.order, args.samples, &opts, tol)?;
    let d = asymptotic_diagonalize_ode(&f, args.order, tol)?;
    let reference = reference_solve(&f, &v0, &sol.times, args.rtol)?;

    let mut csv = String::from("t,r_norm,q_dev,rel_err\n");
    let mut max_err: f64 = 0.0;
    for (i, &t) in sol.times.iter().enumerate() {
        let r_norm = d.remainder_norm(t)?;
        let q_dev = (&sol.q_samples[i] - &sol.q_inf).norm2();
        let diff: Vec<C64> = sol.v[i].iter().zip(&reference[i]).map(|(x, y)| x - y).collect();
        let err = vec_norm(&diff) / vec_norm(&reference[i]).max(f64::MIN_POSITIVE);
        max_err = max_err.max(err);
        csv.push_str(&format!("{t:?},{r_norm:?},{q_dev:?},{err:?}\n"));
    }
    if let Some(path) = &args.summary {
        let summary = IntegrateSummary {
            order: args.order,
            t0: f.t0(),
            t_end: args.t_end,
            max_relative_error: max_err,
            det_q_inf: sol.det_q_inf,
            integral_trace: sol.integral_trace,
            liouville_defect: sol.liouville_defect(),
            q_tail_bound: sol.q_tail_bound,
            bound_holds: sol.bound_holds,
        };
        emit(to_json(&summary), &Some(path.clone()))?;
    }
    emit(csv, &args.output)
}

fn thermo_cmd(args: &ThermoArgs, tol: &Tolerances) -> Result<String, CliError> {
    let p = ThermoParams {
        tau: args.tau,
        kappa: args.kappa,
        gamma1: args.gamma1,
        gamma2: args.gamma2,
        m: args.m,
    };
    p.validate()?;
    if args.emit_doc {
        let a = thermo::build_family(&p)?;
        let doc = FamilyDocument::from_series(&a, "xi")
            .with_meta("model", "thermoelastic".into())
            .with_meta("params", serde_json::to_value(p).expect("plain struct"));
        return emit(to_json(&doc), &args.output);
    }
    let cf = |name: &str, value: f64| ClosedForm {
        name: name.into(),
        value,
    };
    let text = match args.regime {
        Regime::Small | Regime::Large => {
            let (e, closed_form) = if args.regime == Regime::Small {
                let (l0, lp, lm) = p.small_xi_constants();
                let e = thermo::small_xi_expansion(&p, args.order, tol)?;
                (e, vec![cf("lambda0", l0), cf("lambda_plus", lp), cf("lambda_minus", lm)])
            } else {
                let (c_par, c_hyp) = p.large_xi_constants();
                let e = thermo::large_xi_expansion(&p, args.order, tol)?;
                (e, vec![cf("parabolic_constant", c_par), cf("hyperbolic_constant", c_hyp)])
            };
            to_json(&ThermoReport {
                regime: e.regime,
                params: p,
                order: e.result.order,
                nondegeneracy_order: e.nondeg_order(),
                trace_defect: e.trace_defect(),
                branches: e.branches,
                closed_form,
            })
        }
        Regime::Signs => {
            if !(args.xi_min > 0.0 && args.xi_max > args.xi_min && args.points >= 2) {
                return Err(CliError::Input("sweep needs 0 < xi-min < xi-max and at least 2 points".into()));
            }
            let grid = log10_grid(args.xi_min, args.xi_max, args.points);
            let r = thermo::verify_spectral_signs(&p, &grid)?;
            if let Some(path) = &args.csv {
                let mut buf = Vec::new();
                thermo::write_spectrum_csv(&r, &mut buf).map_err(|e| CliError::Output(e.to_string()))?;
                emit(String::from_utf8(buf).expect("CSV is UTF-8"), &Some(path.clone()))?;
            }
            let report = SignsReport {
                params: p,
                points: r.points.len(),
                max_re: r.max_re,
                min_gap: r.min_gap,
                max_det_defect: r.max_det_defect,
                all_negative: r.all_negative(),
                violations: r.violations.clone(),
            };
            let text = to_json(&report);
            if !report.all_negative {
                return Err(CliError::Verification {
                    first: format!("nonnegative real part at xi = {}", report.violations[0]),
                    report: emit(text, &args.output)?,
                });
            }
            text
        }
    };
    emit(text, &args.output)
}
