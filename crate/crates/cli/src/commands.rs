use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use twisted_hodge::curvature::{lee_form, HermitianFundamentalForm};
use twisted_hodge::fourier::{
    self, random_form, verify_curvature_identity, verify_lie_identity, verify_real_part_identity, ThetaField,
    TorusSpec,
};
use twisted_hodge::genus::{parallel_decomposition_chi, vaisman_hodge, HodgeTable, STable};
use twisted_hodge::model::{bundled_source, AnyModel, ValidatedModel};
use twisted_hodge::scalar::Mode;
use twisted_hodge::twisted::{
    commutator_check, decomposition_at, dirac_assemble, dirac_index, h0_twisted, hodge_table, primitive_table,
    CohomologyTable,
};
use twisted_hodge::{Complex64, Error, Execution, GaussRational, OneForm01, Scalar};

use crate::report::{Check, CsvTable, RunReport, Status};
use crate::theta;
use crate::{HodgeArgs, ModelArgs, ScanArgs, VerifyArgs, Which};

/// Residual tolerance for the integral identities.
const IDENTITY_TOL: f64 = 1e-9;

pub enum Loaded {
    Exact(ValidatedModel<GaussRational>),
    Numeric(ValidatedModel<Complex64>),
}

macro_rules! with_model {
    ($loaded:expr, $m:ident => $body:expr) => {
        match $loaded {
            Loaded::Exact($m) => $body,
            Loaded::Numeric($m) => $body,
        }
    };
}

/// Reads a model from a path, falling back to the bundled model of that name.
pub fn read_model(arg: &str) -> Result<(String, AnyModel)> {
    let path = std::path::Path::new(arg);
    let text = if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?
    } else if let Some(src) = bundled_source(arg) {
        src.to_string()
    } else {
        return Err(Error::InvalidArgument(format!("no model file or bundled model named {arg:?}")).into());
    };
    let model = AnyModel::from_json(&text)?;
    Ok((model.name().to_string(), model))
}

pub fn load(args: &ModelArgs) -> Result<Loaded> {
    let (_, any) = read_model(&args.model)?;
    Ok(match (any, args.mode) {
        (AnyModel::Exact(m), None | Some(Mode::Exact)) => Loaded::Exact(m.into_validated()?),
        (AnyModel::Exact(m), Some(Mode::Numeric)) => Loaded::Numeric(m.into_validated()?.to_numeric()),
        (AnyModel::Numeric(m), None | Some(Mode::Numeric)) => Loaded::Numeric(m.into_validated()?),
        (AnyModel::Numeric(_), Some(Mode::Exact)) => {
            return Err(Error::InvalidArgument("a numeric model file cannot be run in exact mode".into()).into())
        }
    })
}

pub fn validate(args: &ModelArgs, report: &mut RunReport) -> Result<()> {
    let (name, any) = read_model(&args.model)?;
    let v = any.validate();
    report.model = Some(name);
    report.param("mode", any.mode());
    for g in &v.generators {
        report.check(Check::new(
            format!("d_squared_{}", g.generator),
            Status::from_bool(g.ok),
            format!("d(d {}) = {}", g.generator, g.residual),
        ));
    }
    report.check(Check::new(
        "unimodular",
        Status::from_bool(v.unimodular),
        match &v.unimodular_witness {
            Some(m) => format!("d is nonzero on {m}"),
            None => "d vanishes in top degree minus one".into(),
        },
    ));
    report.result("validation", &v);
    Ok(())
}

fn parse_ps(text: &str, n: usize) -> Result<Option<Vec<usize>>> {
    if text == "all" {
        return Ok(None);
    }
    let p: usize = text
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("--p must be 'all' or an integer, got {text:?}")))?;
    if p > n {
        return Err(Error::InvalidArgument(format!("p = {p} exceeds n = {n}")).into());
    }
    Ok(Some(vec![p]))
}

fn table_json(t: &CohomologyTable) -> serde_json::Value {
    json!({
        "provenance": t.provenance,
        "rows": t.rows,
        "min_gap": t.min_gap,
    })
}

pub fn hodge(args: &HodgeArgs, report: &mut RunReport) -> Result<()> {
    let loaded = load(&args.model)?;
    with_model!(loaded, m => hodge_on(&m, args, report))
}

fn hodge_on<S: Scalar>(m: &ValidatedModel<S>, args: &HodgeArgs, report: &mut RunReport) -> Result<()> {
    report.model = Some(m.name().to_string());
    report.param("mode", S::MODE);
    report.param("theta", &args.theta);
    report.param("p", &args.p);
    let th = theta::resolve(m, &args.theta)?;
    let ps = parse_ps(&args.p, m.n())?;
    let table = hodge_table(m, &th, ps.as_deref(), Execution::default(), &args.theta)?;
    report.check(Check::new("theta_dbar_closed", Status::Pass, "dbar(theta) = 0"));
    report.result("table", table_json(&table));
    let mut csv = CsvTable {
        header: ["section", "p", "q", "value"].map(String::from).to_vec(),
        ..Default::default()
    };
    for (p, row) in &table.rows {
        for (q, d) in row.iter().enumerate() {
            csv.rows.push(vec!["h".into(), p.to_string(), q.to_string(), d.to_string()]);
        }
    }
    if table.is_complete() {
        let chi = HodgeTable::from_cohomology(&table)?.chi();
        let sv = chi.special_values(m.n(), false);
        report.result("chi_y", json!({ "polynomial": chi.to_string(), "coeffs": chi.coeffs }));
        report.result("special_values", &sv);
        for (p, c) in chi.coeffs.iter().enumerate() {
            csv.rows.push(vec!["chi_p".into(), p.to_string(), String::new(), c.to_string()]);
        }
        for (k, v) in [("arithmetic_genus", sv.arithmetic_genus), ("at_one", sv.at_one), ("euler_number", sv.euler_number)] {
            csv.rows.push(vec![k.into(), String::new(), String::new(), v.to_string()]);
        }
    }
    if let Some(gap) = table.min_gap {
        report.check(Check::new(
            "spectral_gap",
            Status::Pass,
            format!("smallest gap ratio {gap:.3e}"),
        ));
    }
    report.csv = csv;
    Ok(())
}

pub fn verify(args: &VerifyArgs, report: &mut RunReport) -> Result<()> {
    report.param("which", args.which.name());
    match args.which {
        Which::LieIdentity | Which::RealPart | Which::CurvatureIdentity => return verify_torus(args, report),
        _ => {}
    }
    let model = args
        .model
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("--which {} needs --model", args.which.name())))?;
    let loaded = load(&ModelArgs {
        model: model.to_string(),
        mode: args.mode,
    })?;
    with_model!(loaded, m => verify_model(&m, args, report))
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn verify_model<S: Scalar>(m: &ValidatedModel<S>, args: &VerifyArgs, report: &mut RunReport) -> Result<()> {
    let n = m.n();
    report.model = Some(m.name().to_string());
    report.param("mode", S::MODE);
    let default_theta = match args.which {
        Which::Genus | Which::Lee => "0",
        _ => "phi_bar_1",
    };
    let theta_text = args.theta.as_deref().unwrap_or(default_theta);
    report.param("theta", theta_text);
    let th = theta::resolve(m, theta_text)?;
    let exec = Execution::default();
    let zero = OneForm01::<S>::zero(n);
    match args.which {
        Which::Vanishing => {
            let twisted = hodge_table(m, &th, None, exec, theta_text)?;
            report.result("twisted_table", table_json(&twisted));
            report.check(Check::new(
                "twisted_cohomology_vanishes",
                Status::from_bool(twisted.is_zero() && !th.is_zero()),
                if th.is_zero() {
                    "theta is zero; nothing to twist by".to_string()
                } else {
                    format!("all dim H^(p,q) = {}", if twisted.is_zero() { "0" } else { "0 fails" })
                },
            ));
            if m.is_abelian() {
                let plain = hodge_table(m, &zero, None, exec, "0")?;
                let binomial_ok = (0..=n).all(|p| (0..=n).all(|q| plain.get(p, q) == Some(binomial(n, p) * binomial(n, q))));
                report.result("untwisted_table", table_json(&plain));
                report.check(Check::new(
                    "untwisted_table_binomial",
                    Status::from_bool(binomial_ok),
                    "h^(p,q) = C(n,p) C(n,q)",
                ));
            }
        }
        Which::Index => {
            let ts: Vec<S> = args.t.iter().map(|t| S::parse(t)).collect::<Result<_, _>>()?;
            report.param("t", &args.t);
            let twisted = hodge_table(m, &th, None, exec, theta_text)?;
            let plain = hodge_table(m, &zero, None, exec, "0")?;
            let mut rows = Vec::new();
            for p in 0..=n {
                let chi_theta = twisted.euler(p).expect("complete table");
                let chi_zero = plain.euler(p).expect("complete table");
                let indices = ts
                    .iter()
                    .map(|t| dirac_index(&dirac_assemble(m, &th, p, t.clone())?))
                    .collect::<Result<Vec<_>, _>>()?;
                let ok = chi_theta == chi_zero && indices.iter().all(|&i| i == chi_theta);
                rows.push(json!({ "p": p, "chi_theta": chi_theta, "chi_untwisted": chi_zero, "dirac_index": indices }));
                report.check(Check::new(
                    format!("index_constant_p{p}"),
                    Status::from_bool(ok),
                    format!("chi_p(theta) = {chi_theta}, chi_p(0) = {chi_zero}, index over t = {indices:?}"),
                ));
            }
            report.result("rows", rows);
        }
        Which::H00 => match h0_twisted(m, &th) {
            Ok(dim) => {
                report.result("dim_h00", dim);
                report.check(Check::new("twisted_h00_vanishes", Status::from_bool(dim == 0), format!("dim H^(0,0) = {dim}")));
            }
            Err(Error::PreconditionExact { dim }) => {
                report.result("dim_h00", dim);
                report.check(Check::new(
                    "twisted_h00_vanishes",
                    Status::Indeterminate,
                    format!("theta is dbar-exact, so the vanishing statement does not apply (dim = {dim})"),
                ));
            }
            Err(e) => return Err(e.into()),
        },
        Which::Commutator => {
            let r = commutator_check(m, &th)?;
            report.check(Check::new(
                "laplacian_commutes",
                Status::from_bool(r.all_zero),
                format!(
                    "max entries {:.3e} {:.3e} {:.3e} {:.3e}",
                    r.with_wedge, r.with_contraction, r.with_conjugate_wedge, r.with_conjugate_contraction
                ),
            ));
            report.result("commutators", &r);
        }
        Which::Primitive => {
            let table = primitive_table(m, &th)?;
            let plain = hodge_table(m, &zero, None, exec, "0")?;
            let decomps: Vec<_> = (0..=n)
                .flat_map(|p| (0..=n).map(move |q| (p, q)))
                .map(|(p, q)| decomposition_at(&table, p, q, plain.get(p, q).expect("complete table")))
                .collect();
            let bad: Vec<String> = decomps
                .iter()
                .filter(|d| !d.reconstructs)
                .map(|d| format!("({}, {}): {} != {}", d.p, d.q, d.sum(), d.h))
                .collect();
            report.check(Check::new(
                "primitive_reconstruction",
                Status::from_bool(bad.is_empty()),
                if bad.is_empty() { "h = s + s' + s'' + s''' at every bidegree".into() } else { bad.join("; ") },
            ));
            let rows = parallel_decomposition_chi(m, &th)?;
            let vanish = rows.iter().all(|r| r.vanishes);
            report.check(Check::new(
                "chi_p_vanishes",
                Status::from_bool(vanish),
                format!("chi_p = {:?}", rows.iter().map(|r| r.chi_from_h).collect::<Vec<_>>()),
            ));
            report.result("s_table", &table.s);
            report.result("decompositions", &decomps);
            report.result("telescope", &rows);
        }
        Which::Genus => {
            let plain = HodgeTable::from_cohomology(&hodge_table(m, &zero, None, exec, "0")?)?;
            let chi = plain.chi();
            report.result("hodge_table", &plain.h);
            report.result("chi_y", chi.to_string());
            report.check(Check::new("serre_symmetry", Status::from_bool(plain.is_serre_symmetric()), "h^(p,q) = h^(n-p,n-q)"));
            report.check(Check::new("chi_y_vanishes", Status::from_bool(chi.is_zero()), format!("chi_y = {chi}")));
            if let Some(text) = &args.s_table {
                let st = parse_s_table(n, text)?;
                let predicted = vaisman_hodge(&st);
                report.result("predicted_table", &predicted.h);
                report.check(Check::new(
                    "s_table_prediction",
                    Status::from_bool(predicted == plain),
                    format!("table from s-data {}", if predicted == plain { "matches" } else { "differs" }),
                ));
            }
        }
        Which::Lee => {
            let r = lee_form(m, &HermitianFundamentalForm::standard(n))?;
            let s = r.summary();
            report.check(Check::new("lee_identity", Status::from_bool(r.identity_holds), format!("residual {:.3e}", r.identity_residual)));
            report.check(Check::new("gauduchon", Status::from_bool(r.gauduchon), format!("d*theta = {}", s.d_star_theta)));
            report.result("lee", &s);
        }
        Which::LieIdentity | Which::RealPart | Which::CurvatureIdentity => unreachable!("handled by verify_torus"),
    }
    Ok(())
}

/// `"1,0;0,0"`: rows separated by `;`.
fn parse_s_table(n: usize, text: &str) -> Result<STable> {
    let rows = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidArgument(format!("--s-table {text:?}: {e}")))?;
    Ok(STable::new(n, rows)?)
}

fn verify_torus(args: &VerifyArgs, report: &mut RunReport) -> Result<()> {
    let torus = TorusSpec::new(args.torus_n, args.cutoff)?;
    let theta_text = args.theta.as_deref().unwrap_or("2+cos");
    let theta = ThetaField::parse(theta_text, args.torus_n)?;
    report.model = Some(format!("flat torus n = {}", args.torus_n));
    report.param("torus_n", args.torus_n);
    report.param("cutoff", args.cutoff);
    report.param("theta", theta_text);
    let n = args.torus_n;
    match args.which {
        Which::LieIdentity | Which::RealPart => {
            let band = args
                .cutoff
                .checked_sub(theta.band())
                .ok_or(Error::BandOverflow { cutoff: args.cutoff, required: theta.band() })?
                .min(2);
            report.param("samples", args.samples);
            report.param("seed", args.seed);
            report.param("form_band", band);
            let bidegrees: Vec<(usize, usize)> = (0..=n).flat_map(|p| (0..=n).map(move |q| (p, q))).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut residuals = Vec::with_capacity(args.samples);
            let mut extra = 0f64;
            for _ in 0..args.samples {
                let u = random_form(&mut rng, n, band, &bidegrees);
                if args.which == Which::LieIdentity {
                    let v = random_form(&mut rng, n, band, &bidegrees);
                    let r = verify_lie_identity(&torus, &theta, &u, &v)?;
                    residuals.push(r.residual);
                    extra = extra.max(r.cartan_formula_residual);
                } else {
                    residuals.push(verify_real_part_identity(&torus, &theta, &u)?.residual);
                }
            }
            let worst = residuals.iter().copied().fold(0.0, f64::max);
            report.result("residuals", &residuals);
            report.result("max_residual", worst);
            let name = if args.which == Which::LieIdentity { "lie_derivative_identity" } else { "real_part_identity" };
            report.check(Check::new(name, Status::from_bool(worst <= IDENTITY_TOL), format!("max residual {worst:.3e} (tolerance {IDENTITY_TOL:.0e})")));
            if args.which == Which::LieIdentity {
                report.result("max_cartan_formula_residual", extra);
                report.check(Check::new("cartan_formula", Status::from_bool(extra <= IDENTITY_TOL), format!("max residual {extra:.3e}")));
            }
        }
        Which::CurvatureIdentity => {
            report.param("p", args.p);
            match verify_curvature_identity(&torus, &theta, args.p) {
                Ok(r) => {
                    let ok = r.residual.abs() <= IDENTITY_TOL * r.lhs.abs().max(1.0);
                    report.check(Check::new("curvature_identity", Status::from_bool(ok), format!("residual {:.3e} on a kernel element", r.residual)));
                    report.result("kernel_element", &r);
                }
                Err(Error::Vacuous { cutoff, sigma_min }) => {
                    report.check(Check::new(
                        "curvature_identity",
                        Status::Pass,
                        format!("vacuous: truncated kernel empty at cutoff {cutoff} (sigma_min {sigma_min:.3e})"),
                    ));
                    let (_, alpha) = fourier::least_singular_form(&torus, &theta, args.p, Execution::default())?;
                    let r = fourier::curvature_identity_on(&theta, &alpha);
                    let bounded = r.measured_constant.is_none_or(|c| c <= r.constant_bound * (1.0 + 1e-9));
                    report.check(Check::new(
                        "curvature_identity_defect",
                        Status::from_bool(r.consistency <= IDENTITY_TOL && bounded),
                        format!(
                            "on the least singular vector: defect {:.3e} matches Re(D a, twist a) to {:.1e}; constant {:.4} <= bound {:.4}",
                            r.residual,
                            r.consistency,
                            r.measured_constant.unwrap_or(0.0),
                            r.constant_bound
                        ),
                    ));
                    report.result("sigma_min", sigma_min);
                    report.result("least_singular_vector", &r);
                }
                Err(e) => return Err(e.into()),
            }
        }
        _ => unreachable!("model-based checks are handled by verify_model"),
    }
    Ok(())
}

pub fn scan(args: &ScanArgs, report: &mut RunReport) -> Result<()> {
    if args.t_grid.is_empty() {
        bail!(Error::InvalidArgument("--t-grid is empty".into()));
    }
    let torus = TorusSpec::new(args.torus_n, args.cutoff)?;
    let theta = ThetaField::parse(&args.theta, args.torus_n)?;
    report.model = Some(format!("flat torus n = {}", args.torus_n));
    report.param("torus_n", args.torus_n);
    report.param("cutoff", args.cutoff);
    report.param("theta", &args.theta);
    report.param("p", args.p);
    report.param("t_grid", &args.t_grid);
    let r = fourier::sigma_min_scan(&torus, &theta, args.p, &args.t_grid, !args.no_stability, Execution::default())?;
    report.check(Check::new(
        "nonvanishing_certificate",
        Status::Pass,
        format!("C1 = {:.6}, C2 = {:.6}", r.certificate.c1, r.certificate.c2),
    ));
    report.check(match r.witness {
        Some(t) => Check::new("witness", Status::Pass, format!("t* = {t}")),
        None => Check::new("witness", Status::Indeterminate, "no grid point has both sigma_min above 1e-6"),
    });
    if let Some(s) = &r.stability {
        report.check(Check::new(
            "cutoff_stability",
            if s.stable { Status::Pass } else { Status::Indeterminate },
            format!(
                "relative change {:.2e} / {:.2e} between cutoffs {} and {}",
                s.rel_change_even, s.rel_change_odd, s.cutoff, s.compare_cutoff
            ),
        ));
    }
    let mut csv = CsvTable {
        header: ["t", "sigma_min_even", "sigma_min_odd"].map(String::from).to_vec(),
        ..Default::default()
    };
    for pt in &r.points {
        csv.rows.push(vec![pt.t.to_string(), format!("{:.12e}", pt.sigma_min_even), format!("{:.12e}", pt.sigma_min_odd)]);
    }
    csv.trailer.push(match r.witness {
        Some(t) => format!("witness_t={t}"),
        None => "witness_t=none".into(),
    });
    report.csv = csv;
    let mut summary = BTreeMap::new();
    summary.insert("witness", json!(r.witness));
    report.result("scan", &r);
    report.result("summary", summary);
    Ok(())
}
