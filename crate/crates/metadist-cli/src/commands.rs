use std::io::Write;

use serde_json::json;

use metadist::analysis::{self, PercentileCurve, ThetaGridDb};
use metadist::precision::{check_complete_monotonicity, noise_safe_digits, rule_of_thumb_digits};
use metadist::{dec, moments, MomentVector, TransformMatrix};

use crate::args::{
    parse_decimal, ConvergenceArgs, MatrixArgs, MomentsArgs, PercentilesArgs, ReconstructArgs,
    Source,
};
use crate::output::{self, meta_block, plain, plot, with_writer, Format};
use crate::AppError;

fn generate(source: &Source, n: usize, digits: u32) -> Result<MomentVector, AppError> {
    let m = match source {
        Source::Uniform => moments::uniform_moments(n, digits)?,
        Source::Beta(params) => moments::beta_moments(params, n, digits)?,
        Source::PointMass(nu) => moments::point_mass_moments(nu, n, digits)?,
        Source::Sir { theta_db, delta } => {
            let params = moments::SirParams::from_db(theta_db, delta.clone(), digits)?;
            moments::sir_poisson_moments(&params, n, digits)?
        }
    };
    Ok(m)
}

pub fn matrix(args: &MatrixArgs) -> Result<(), AppError> {
    let a = TransformMatrix::build(args.n)?;
    let n = a.order();
    // cheap exhaustive self-check before anything touches disk
    for i in 0..=n {
        for j in 0..=n {
            if a.entry(i, j) != a.entry(n - j, n - i) {
                return Err(AppError::Lib(metadist::Error::Domain(format!(
                    "antidiagonal symmetry self-check failed at ({i}, {j})"
                ))));
            }
        }
    }
    eprintln!("# max|A| = {}", a.max_abs_entry());
    eprintln!("# distinct entries = {}", a.distinct_entry_count());
    eprintln!("# antidiagonal symmetry self-check: ok");

    with_writer(args.output.as_deref(), |w| match args.format {
        Format::Csv => {
            for i in 0..=n {
                let row: Vec<String> = a.row(i).iter().map(|e| e.to_string()).collect();
                writeln!(w, "{}", row.join(","))?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<Vec<String>> = (0..=n)
                .map(|i| a.row(i).iter().map(|e| e.to_string()).collect())
                .collect();
            output::write_json(
                w,
                &json!({
                    "command": "matrix",
                    "n": n,
                    "max_abs_entry": a.max_abs_entry().to_string(),
                    "distinct_entries": a.distinct_entry_count().to_string(),
                    "rows": rows,
                }),
            )
        }
    })?;
    Ok(())
}

pub fn moments(args: &MomentsArgs) -> Result<(), AppError> {
    let source = args.source.resolve()?;
    let digits = args
        .digits
        .unwrap_or_else(|| rule_of_thumb_digits(args.n).digits);
    let m = generate(&source, args.n, digits)?;

    with_writer(args.output.as_deref(), |w| match args.format {
        Format::Csv => {
            let meta = meta_block(
                !args.no_meta,
                "moments",
                &[
                    ("source", source.describe()),
                    ("n", args.n.to_string()),
                    ("digits", digits.to_string()),
                ],
            );
            write!(w, "{meta}{}", moments::moments_to_csv(&m))
        }
        Format::Json => {
            let values: Vec<String> = m.values().iter().map(|v| v.to_plain_string()).collect();
            let mut doc = json!({
                "command": "moments",
                "source": source.describe(),
                "n": args.n,
                "digits": digits,
                "values": values,
            });
            if !args.no_meta {
                doc["meta"] = json!({ "generated_at_unix": output::unix_now() });
            }
            output::write_json(w, &doc)
        }
    })?;
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<(), AppError> {
    let (m, n, desc) = match &args.moments {
        Some(path) => {
            let loaded = moments::load_moments(path).map_err(|e| match e {
                metadist::Error::Io(io) => metadist::Error::Io(std::io::Error::new(
                    io.kind(),
                    format!("{}: {io}", path.display()),
                )),
                other => other,
            })?;
            // untrusted input: demand complete monotonicity before inverting
            let report = check_complete_monotonicity(&loaded, 10);
            if !report.is_completely_monotone() {
                return Err(AppError::Cm(report));
            }
            let n = args.n.unwrap_or_else(|| loaded.order());
            if n > loaded.order() {
                return Err(AppError::Usage(format!(
                    "--n {n} exceeds the file's highest moment order {}",
                    loaded.order()
                )));
            }
            let digits = loaded.digits();
            let m = if n < loaded.order() {
                MomentVector::new(loaded.values()[..=n].to_vec(), digits)?
            } else {
                loaded
            };
            (m, n, format!("file {}", path.display()))
        }
        None => {
            let source = args.source.resolve()?;
            let n = args.n.ok_or_else(|| {
                AppError::Usage("--n is required with a generator source".into())
            })?;
            let digits = args.digits.unwrap_or_else(|| rule_of_thumb_digits(n).digits);
            (generate(&source, n, digits)?, n, source.describe())
        }
    };
    let digits = args.digits.unwrap_or_else(|| rule_of_thumb_digits(n).digits);

    let h = TransformMatrix::build(n)?.apply(&m, digits)?;
    let cdf = h.cdf_samples();
    let pdf = args.pdf.then(|| h.pdf_samples());

    let neg_desc = match h.negative_indices() {
        [] => "none".to_string(),
        neg => {
            let worst = neg
                .iter()
                .copied()
                .min_by(|&a, &b| h.values()[a].cmp(&h.values()[b]))
                .unwrap();
            format!(
                "{} within tolerance (worst h[{worst}] = {:e})",
                neg.len(),
                dec::to_f64(&h.values()[worst])
            )
        }
    };
    let mut entries = vec![
        ("source", desc.clone()),
        ("n", n.to_string()),
        ("digits", digits.to_string()),
        ("negative-weights", neg_desc.clone()),
    ];
    if h.below_recommended() {
        entries.push((
            "warning",
            format!(
                "digits below the rule-of-thumb budget {}",
                rule_of_thumb_digits(n).digits
            ),
        ));
    }

    with_writer(args.output.as_deref(), |w| match args.format {
        Format::Csv => {
            write!(w, "{}", meta_block(!args.no_meta, "reconstruct", &entries))?;
            match &pdf {
                Some(density) => {
                    writeln!(w, "x,F,f")?;
                    for (k, v) in cdf.values().iter().enumerate() {
                        let f_cell = density
                            .values()
                            .get(k)
                            .map(plot)
                            .unwrap_or_default();
                        writeln!(w, "{},{},{}", plot(&cdf.grid_point(k)), plot(v), f_cell)?;
                    }
                }
                None => {
                    writeln!(w, "x,F")?;
                    for (k, v) in cdf.values().iter().enumerate() {
                        writeln!(w, "{},{}", plot(&cdf.grid_point(k)), plot(v))?;
                    }
                }
            }
            Ok(())
        }
        Format::Json => {
            let points: Vec<serde_json::Value> = cdf
                .values()
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let mut point = json!({
                        "x": plot(&cdf.grid_point(k)),
                        "F": plot(v),
                    });
                    if let Some(density) = &pdf {
                        if let Some(f) = density.values().get(k) {
                            point["f"] = json!(plot(f));
                        }
                    }
                    point
                })
                .collect();
            let mut doc = json!({
                "command": "reconstruct",
                "source": desc,
                "n": n,
                "digits": digits,
                "negative_weights": neg_desc,
                "points": points,
            });
            if !args.no_meta {
                doc["meta"] = json!({ "generated_at_unix": output::unix_now() });
            }
            output::write_json(w, &doc)
        }
    })?;
    Ok(())
}

fn reliability_span(curve: &PercentileCurve) -> Option<(f64, f64)> {
    let open: Vec<f64> = curve
        .points
        .iter()
        .filter(|p| !p.saturated)
        .map(|p| p.reliability)
        .collect();
    let lo = open.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = open.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo < hi).then_some((lo, hi))
}

pub fn percentiles(args: &PercentilesArgs) -> Result<(), AppError> {
    let ps = args
        .p
        .iter()
        .map(|s| parse_decimal(s, "percentile"))
        .collect::<Result<Vec<_>, _>>()?;
    let delta = parse_decimal(&args.delta, "delta")?;
    let grid = ThetaGridDb::new(
        parse_decimal(&args.theta_min_db, "theta-min-db")?,
        parse_decimal(&args.theta_max_db, "theta-max-db")?,
        parse_decimal(&args.theta_step_db, "theta-step-db")?,
    )?;
    // Grid sweeps cross low-threshold regimes where the distribution
    // concentrates near 1, so the default budget must also keep inversion
    // noise under the negativity floor.
    let digits = args.digits.unwrap_or_else(|| noise_safe_digits(args.n));

    let curves = analysis::percentile_curves(&ps, &grid, &delta, args.n, digits)?;

    if let (Some(first), Some(last)) = (curves.first(), curves.last()) {
        if curves.len() >= 2 {
            match (reliability_span(first), reliability_span(last)) {
                (Some((lo_a, hi_a)), Some((lo_b, hi_b))) if lo_a.max(lo_b) < hi_a.min(hi_b) => {
                    let x = 0.5 * (lo_a.max(lo_b) + hi_a.min(hi_b));
                    if let Ok(gap) = analysis::percentile_gap(first, last, x) {
                        eprintln!(
                            "# gap p={} vs p={}: {gap:.3} dB at reliability {x:.4}",
                            plain(&first.percentile),
                            plain(&last.percentile),
                        );
                    }
                }
                _ => eprintln!("# gap: curves do not overlap in reliability"),
            }
        }
    }

    let curve_json = |curve: &PercentileCurve| {
        let rr = analysis::rate_reliability(curve);
        let points: Vec<serde_json::Value> = curve
            .points
            .iter()
            .zip(&rr)
            .map(|(pt, r)| {
                json!({
                    "theta_db": plain(&pt.theta_db),
                    "spectral_efficiency": r.spectral_efficiency,
                    "reliability": pt.reliability,
                    "saturated": pt.saturated,
                })
            })
            .collect();
        json!({
            "command": "percentiles",
            "percentile": plain(&curve.percentile),
            "delta": plain(&delta),
            "n": curve.order,
            "digits": curve.digits,
            "points": points,
        })
    };
    let write_curve_csv = |w: &mut dyn Write, curve: &PercentileCurve| -> std::io::Result<()> {
        let entries = [
            ("percentile", plain(&curve.percentile)),
            ("delta", plain(&delta)),
            ("n", curve.order.to_string()),
            ("digits", curve.digits.to_string()),
        ];
        write!(w, "{}", meta_block(!args.no_meta, "percentiles", &entries))?;
        writeln!(w, "theta_dB,spectral_efficiency,reliability,saturated")?;
        for (pt, r) in curve.points.iter().zip(analysis::rate_reliability(curve)) {
            writeln!(
                w,
                "{},{},{},{}",
                plain(&pt.theta_db),
                r.spectral_efficiency,
                pt.reliability,
                u8::from(pt.saturated)
            )?;
        }
        Ok(())
    };

    match &args.output_prefix {
        Some(prefix) => {
            for curve in &curves {
                let path = format!(
                    "{}_p{}.{}",
                    prefix.display(),
                    plain(&curve.percentile),
                    args.format.extension()
                );
                with_writer(Some(path.as_ref()), |w| match args.format {
                    Format::Csv => write_curve_csv(w, curve),
                    Format::Json => {
                        let mut doc = curve_json(curve);
                        if !args.no_meta {
                            doc["meta"] = json!({ "generated_at_unix": output::unix_now() });
                        }
                        output::write_json(w, &doc)
                    }
                })?;
            }
        }
        None => {
            with_writer(None, |w| match args.format {
                Format::Csv => {
                    for (i, curve) in curves.iter().enumerate() {
                        if i > 0 {
                            writeln!(w)?;
                        }
                        write_curve_csv(w, curve)?;
                    }
                    Ok(())
                }
                Format::Json => {
                    let mut doc = json!({
                        "command": "percentiles",
                        "curves": curves.iter().map(curve_json).collect::<Vec<_>>(),
                    });
                    if !args.no_meta {
                        doc["meta"] = json!({ "generated_at_unix": output::unix_now() });
                    }
                    output::write_json(w, &doc)
                }
            })?;
        }
    }
    Ok(())
}

pub fn convergence(args: &ConvergenceArgs) -> Result<(), AppError> {
    let source = args.source.resolve()?;
    let report = match &source {
        Source::Uniform => analysis::convergence_study(
            moments::uniform_moments,
            |x| x,
            &args.orders,
            Some(1.0),
        )?,
        Source::Beta(params) => {
            let (a, b) = (dec::to_f64(params.alpha()), dec::to_f64(params.beta()));
            let oracle = analysis::beta_cdf(a, b)?;
            analysis::convergence_study(
                |n, digits| moments::beta_moments(params, n, digits),
                oracle,
                &args.orders,
                analysis::beta_bound_constant(a, b),
            )?
        }
        _ => {
            return Err(AppError::Usage(
                "convergence needs a closed-form continuous reference: --uniform or --beta".into(),
            ))
        }
    };
    eprintln!("# fitted rate = {}", report.fitted_rate);

    let entries = [
        ("source", source.describe()),
        (
            "orders",
            args.orders
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("fitted-rate", report.fitted_rate.to_string()),
    ];
    with_writer(args.output.as_deref(), |w| match args.format {
        Format::Csv => {
            write!(w, "{}", meta_block(!args.no_meta, "convergence", &entries))?;
            writeln!(w, "n,max_error,bound")?;
            for (&n, &err) in report.orders.iter().zip(&report.max_errors) {
                let bound = report
                    .bound_constant
                    .map(|c| (c / (n as f64 + 1.0)).to_string())
                    .unwrap_or_default();
                writeln!(w, "{n},{err},{bound}")?;
            }
            Ok(())
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = report
                .orders
                .iter()
                .zip(&report.max_errors)
                .map(|(&n, &err)| {
                    json!({
                        "n": n,
                        "max_error": err,
                        "bound": report.bound_constant.map(|c| c / (n as f64 + 1.0)),
                    })
                })
                .collect();
            let mut doc = json!({
                "command": "convergence",
                "source": source.describe(),
                "fitted_rate": report.fitted_rate,
                "rows": rows,
            });
            if !args.no_meta {
                doc["meta"] = json!({ "generated_at_unix": output::unix_now() });
            }
            output::write_json(w, &doc)
        }
    })?;
    Ok(())
}
