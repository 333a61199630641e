use std::path::Path;
use std::sync::Arc;

use sumsetlab_core::density::{
    averaging_check, banach_density_windowed, berg_measure_approx, upper_density, DensityMode, FolnerFamily,
};
use sumsetlab_core::groups::{ConjugacyData, GroupTable};
use sumsetlab_core::quasirandom::{character_degrees, quasi_products_experiment, SearchResult, SetSource, TestedSet};
use sumsetlab_core::rational::{format_ratio, Rational};
use sumsetlab_core::sets::{GroupSubset, SetError, Subset};
use sumsetlab_core::stability::{
    equation_index, ladder_index, set_stability_index, FiniteRelation, IndexKind, IndexReport,
};
use sumsetlab_core::sumsets::{
    default_width_floor, ip_extract, max_product_free, nathanson_decompose, product_free_check, productset_search,
    verify_nathanson, verify_productset, IpOutcome, NathansonFailureReason, NathansonOutcome, ProductsetOutcome,
    SumsetError,
};

use crate::cert::{fmt_elems, fmt_list, Certificate};
use crate::{
    fp_budget, ints, load_group, BUDGET_ENV, load_target, sha256_file, CmdResult, Command, Mode, RelationArgs, SetArgs, Target,
    UsageError, EXIT_FAILURE, EXIT_OK,
};

/// Runs `$body` with `$s` bound to the set, whichever ambient it lives in.
macro_rules! on_target {
    ($t:expr, $s:ident => $body:expr) => {
        match $t {
            Target::Int($s) => $body,
            Target::Group($s) => $body,
        }
    };
}
pub(crate) use on_target;

pub(crate) fn ratios(values: &[Rational]) -> String {
    values.iter().map(format_ratio).collect::<Vec<_>>().join(" ")
}

pub(crate) fn dispatch(cli: &crate::Cli) -> CmdResult {
    let seed = cli.seed;
    match &cli.command {
        Command::Density { input, folner, mode, n, max_index } => density(input, folner.as_deref(), *mode, *n, *max_index),
        Command::BergMeasure { input, folner, depth, translates, max_index } => {
            berg(input, folner, *depth, translates, *max_index)
        }
        Command::IpExtract { input, depth, width_floor } => ip(input, *depth, *width_floor),
        Command::Nathanson { input, n, m, width_floor } => nathanson(input, *n, *m, *width_floor),
        Command::Productset { input, k, constrain_b, exact_bound } => productset(input, *k, *constrain_b, *exact_bound),
        Command::ProductFree { input } => product_free(input),
        Command::MaxProductFree { group, exact_bound } => max_pf(group, *exact_bound, seed),
        Command::QrDegree { group } => qr_degree(group, seed),
        Command::QrExperiment { group, epsilon, n, trials } => qr_experiment(group, *epsilon, *n, *trials, seed),
        Command::Ladder(args) => relation_index(args, IndexKind::Ladder),
        Command::Equation(args) => relation_index(args, IndexKind::Equation),
        Command::SetStability { input, exact_bound } => set_stability(input, *exact_bound),
        Command::Verify { certificate } => crate::verify::verify_file(certificate),
    }
}

fn done(cert: &Certificate, code: i32, stderr: String) -> CmdResult {
    Ok((code, cert.render(), stderr))
}

fn status(cert: &mut Certificate, success: bool, verified: bool) {
    cert.push("status", if success { "success" } else { "failure" });
    cert.push("verified", verified);
}

/// Loads a family and records its spec (and file hash for file-backed ones).
pub(crate) fn load_family(spec: &str, cert: &mut Certificate) -> Result<FolnerFamily, UsageError> {
    let family = FolnerFamily::from_spec(spec).map_err(|e| UsageError(format!("--folner: {e}")))?;
    cert.param("folner", spec);
    if let Some((_, path)) = spec.split_once(':').filter(|(kind, _)| *kind == "shifted" || *kind == "explicit") {
        cert.param("folner-sha256", sha256_file(Path::new(path))?);
    }
    Ok(family)
}

fn density_mode(mode: Mode) -> DensityMode {
    match mode {
        Mode::Lower => DensityMode::Lower,
        _ => DensityMode::Upper,
    }
}

pub(crate) fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Upper => "upper",
        Mode::Lower => "lower",
        Mode::Banach => "banach",
        Mode::Averaging => "averaging",
    }
}

fn density(input: &SetArgs, folner: Option<&str>, mode: Mode, n: Option<usize>, max_index: Option<usize>) -> CmdResult {
    let mut cert = Certificate::new("density");
    let mut stderr = String::new();
    let target = load_target(input, &mut cert, &mut stderr)?;
    cert.param("mode", mode_name(mode));
    match mode {
        Mode::Upper | Mode::Lower => {
            let spec = match (folner, &target) {
                (Some(s), _) => s,
                (None, Target::Group(_)) => "whole-group",
                (None, Target::Int(_)) => return Err(UsageError("--folner is required for integer sets".into())),
            };
            let family = load_family(spec, &mut cert)?;
            on_target!(&target, s => family.validate(s.ambient()))?;
            let max = max_index.unwrap_or(family.max_index());
            cert.param("max-index", max);
            cert.seal();
            let report = on_target!(&target, s => upper_density(s, &family, max, density_mode(mode)))?;
            let size = on_target!(&target, s => family.member(s.ambient(), report.witness as usize)?.len());
            status(&mut cert, true, true);
            cert.result("value", format_ratio(&report.value));
            cert.result("witness-index", report.witness);
            cert.result("member-size", size);
            done(&cert, EXIT_OK, stderr)
        }
        Mode::Banach | Mode::Averaging => {
            let Target::Int(set) = &target else {
                return Err(UsageError(format!("--mode {}: needs an integer set", mode_name(mode))));
            };
            let n = n.ok_or_else(|| UsageError(format!("--n is required for --mode {}", mode_name(mode))))?;
            cert.param("n", n);
            if mode == Mode::Banach {
                cert.seal();
                let report = banach_density_windowed(set, n)?;
                status(&mut cert, true, true);
                cert.result("value", format_ratio(&report.value));
                cert.result("witness-m", report.witness);
                cert.result("count", (report.value * Rational::from_integer(n as i64)).to_integer());
                return done(&cert, EXIT_OK, stderr);
            }
            let spec = folner.ok_or_else(|| UsageError("--folner is required for --mode averaging".into()))?;
            let family = load_family(spec, &mut cert)?;
            let max = max_index.unwrap_or(family.max_index());
            cert.param("max-index", max);
            cert.seal();
            let r = averaging_check(set, &family, max, n)?;
            let ok = r.holds && r.identity.0 == r.identity.1;
            status(&mut cert, ok, ok);
            cert.result("density", format_ratio(&r.density.value));
            cert.result("density-witness", r.density.witness);
            cert.result("witness-m", r.witness_m);
            cert.result("count", r.count);
            cert.result("holds", r.holds);
            cert.result("identity", format!("{} {}", r.identity.0, r.identity.1));
            done(&cert, if ok { EXIT_OK } else { EXIT_FAILURE }, stderr)
        }
    }
}

/// Parses `0;0,2;0,1` into tuples.
pub(crate) fn parse_translates(text: &str) -> Result<Vec<Vec<i64>>, String> {
    text.split(';')
        .map(|tuple| {
            let t: Vec<i64> = tuple
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| format!("bad translate `{}`", x.trim())))
                .collect::<Result<_, _>>()?;
            Ok(t)
        })
        .collect()
}

pub(crate) fn fmt_translates(tuples: &[Vec<i64>]) -> String {
    tuples
        .iter()
        .map(|t| t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn berg(input: &SetArgs, folner: &str, depth: usize, translates: &str, max_index: Option<usize>) -> CmdResult {
    let mut cert = Certificate::new("berg-measure");
    let mut stderr = String::new();
    let target = load_target(input, &mut cert, &mut stderr)?;
    let family = load_family(folner, &mut cert)?;
    on_target!(&target, s => family.validate(s.ambient()))?;
    let tuples = parse_translates(translates).map_err(|e| UsageError(format!("--translates: {e}")))?;
    let max = max_index.unwrap_or(family.max_index());
    cert.param("max-index", max);
    cert.param("depth", depth);
    cert.param("translates", fmt_translates(&tuples));
    cert.seal();
    on_target!(&target, s => {
        let requests = tuples
            .iter()
            .map(|t| crate::elems_in(s.ambient(), t))
            .collect::<Result<Vec<_>, _>>()?;
        let m = berg_measure_approx(s, &requests, &family, max, depth)?;
        status(&mut cert, true, true);
        cert.result("final-index", m.final_index());
        cert.result("base-value", format_ratio(&m.base_value));
        for (i, v) in m.values.iter().enumerate() {
            cert.result(&format!("value.{}", i + 1), format_ratio(v));
        }
        let to_i64 = |v: &[usize]| v.iter().map(|&x| x as i64).collect::<Vec<_>>();
        cert.result("first-stage", fmt_elems(&to_i64(&m.first_stage)));
        cert.result("last-stage", fmt_elems(&to_i64(&m.last_stage)));
        cert.result("diagonal", fmt_elems(&to_i64(&m.subseq_indices)));
    });
    done(&cert, EXIT_OK, stderr)
}

fn ip(input: &SetArgs, depth: usize, width_floor: Option<Rational>) -> CmdResult {
    let mut cert = Certificate::new("ip-extract");
    let mut stderr = String::new();
    let target = load_target(input, &mut cert, &mut stderr)?;
    let floor = width_floor.unwrap_or_else(default_width_floor);
    let budget = fp_budget()?;
    cert.param("depth", depth);
    cert.param("width-floor", format_ratio(&floor));
    cert.param("fp-budget", budget.0);
    cert.seal();
    let code = on_target!(&target, s => {
        let outcome = ip_extract(s, depth, floor, budget).map_err(|e| match e {
            SumsetError::Set(SetError::CapExceeded { .. }) => UsageError(format!("{e}; set {BUDGET_ENV} to raise it")),
            other => UsageError(other.to_string()),
        })?;
        match outcome {
            IpOutcome::Extracted(c) => {
                status(&mut cert, true, true);
                cert.result("base", fmt_list(&c.base));
                cert.result("sizes", fmt_list(&c.sizes));
                cert.result("regions", fmt_list(&c.regions));
                cert.result("densities", ratios(&c.densities()));
                cert.result("verified-depth", c.verified_depth);
                cert.result("words-checked", c.words_checked);
                EXIT_OK
            }
            IpOutcome::Failed(f) => {
                status(&mut cert, false, false);
                cert.result("stage", f.stage);
                cert.result("base", fmt_list(&f.base));
                cert.result("best-size", f.best_size);
                cert.result("best-candidate", f.best_candidate.map_or("none".to_string(), |x| x.to_string()));
                cert.result("sizes", fmt_list(&f.sizes));
                cert.result("regions", fmt_list(&f.regions));
                cert.result("densities", ratios(&f.densities()));
                EXIT_FAILURE
            }
        }
    });
    done(&cert, code, stderr)
}

fn nathanson(input: &SetArgs, n: usize, m: usize, width_floor: Option<Rational>) -> CmdResult {
    if n == 0 || m == 0 {
        return Err(UsageError("--n and --m must be positive".into()));
    }
    let mut cert = Certificate::new("nathanson");
    let mut stderr = String::new();
    let target = load_target(input, &mut cert, &mut stderr)?;
    let floor = width_floor.unwrap_or_else(default_width_floor);
    cert.param("n", n);
    cert.param("m", m);
    cert.param("width-floor", format_ratio(&floor));
    cert.seal();
    let code = on_target!(&target, s => {
        match nathanson_decompose(s, n, m, floor) {
            NathansonOutcome::Decomposed(c) => {
                let ok = c.b.is_subset(s) && verify_nathanson(s, &c.parts, &c.b).is_ok();
                status(&mut cert, ok, ok);
                for (i, part) in c.parts.iter().enumerate() {
                    cert.result(&format!("part.{}", i + 1), fmt_list(part));
                }
                cert.result("b", crate::set_runs(&c.b));
                cert.result("b-size", c.b.len());
                cert.result("level-densities", ratios(&c.level_densities));
                cert.result("density", format_ratio(&c.density()));
                if ok { EXIT_OK } else { EXIT_FAILURE }
            }
            NathansonOutcome::Failed(f) => {
                status(&mut cert, false, false);
                cert.result("level", f.level);
                for (i, part) in f.parts.iter().enumerate() {
                    cert.result(&format!("part.{}", i + 1), fmt_list(part));
                }
                let reason = match f.reason {
                    NathansonFailureReason::TooFewElements { have, need } => format!("too-few-elements {have} {need}"),
                    NathansonFailureReason::BelowFloor { density } => format!("below-floor {}", format_ratio(&density)),
                };
                cert.result("reason", reason);
                cert.result("level-densities", ratios(&f.level_densities));
                EXIT_FAILURE
            }
        }
    });
    done(&cert, code, stderr)
}

pub(crate) fn fmt_report(cert: &mut Certificate, prefix: &str, r: &IndexReport) {
    cert.result(&format!("{prefix}value"), r.value);
    cert.result(&format!("{prefix}exact"), r.exact);
    cert.result(&format!("{prefix}witness-a"), fmt_list(&r.witness_a));
    cert.result(&format!("{prefix}witness-b"), fmt_list(&r.witness_b));
}

fn productset(input: &SetArgs, k: usize, constrain_b: bool, exact_bound: usize) -> CmdResult {
    let mut cert = Certificate::new("productset");
    let mut stderr = String::new();
    let target = load_target(input, &mut cert, &mut stderr)?;
    cert.param("k", k);
    cert.param("constrain-b", constrain_b);
    if matches!(target, Target::Group(_)) {
        cert.param("exact-bound", exact_bound);
    }
    cert.seal();
    let code = on_target!(&target, s => {
        match productset_search(s, k, constrain_b)? {
            ProductsetOutcome::Found(c) => {
                let ok = verify_productset(s, &c.b, &c.c).is_ok();
                status(&mut cert, ok, ok);
                cert.result("b", fmt_list(&c.b));
                cert.result("c", fmt_list(&c.c));
                if let Some(w) = &c.b_witnesses {
                    let pairs: Vec<String> = w.iter().map(|(a, a2)| format!("{a},{a2}")).collect();
                    cert.result("b-witnesses", pairs.join(" "));
                }
                cert.result("staircase-b", fmt_list(&c.staircase_b));
                cert.result("staircase-c", fmt_list(&c.staircase_c));
                if ok { EXIT_OK } else { EXIT_FAILURE }
            }
            ProductsetOutcome::Failed(f) => {
                status(&mut cert, false, false);
                cert.result("staircase-b", fmt_list(&f.staircase_b));
                cert.result("staircase-c", fmt_list(&f.staircase_c));
                cert.result("best-grid", f.best_grid);
                cert.result("budget-exhausted", f.budget_exhausted);
                EXIT_FAILURE
            }
        }
    });
    if let Target::Group(set) = &target {
        let r = set_stability_index(set, exact_bound);
        fmt_report(&mut cert, "set-stability.", &r);
    }
    done(&cert, code, stderr)
}

fn group_target(input: &SetArgs, cert: &mut Certificate, stderr: &mut String) -> Result<GroupSubset, UsageError> {
    if input.group.is_none() {
        return Err(UsageError("--group is required".into()));
    }
    match load_target(input, cert, stderr)? {
        Target::Group(set) => Ok(set),
        Target::Int(_) => unreachable!("a group was given"),
    }
}

fn product_free(input: &SetArgs) -> CmdResult {
    let mut cert = Certificate::new("product-free");
    let mut stderr = String::new();
    let set = group_target(input, &mut cert, &mut stderr)?;
    cert.seal();
    status(&mut cert, true, true);
    match product_free_check(&set) {
        None => {
            cert.result("product-free", true);
        }
        Some((b, c, bc)) => {
            cert.result("product-free", false);
            cert.result("witness", format!("{b} {c} {bc}"));
        }
    }
    done(&cert, EXIT_OK, stderr)
}

fn max_pf(group: &str, exact_bound: usize, seed: u64) -> CmdResult {
    let mut cert = Certificate::new("max-product-free");
    let g = load_group(group, &mut cert)?;
    cert.param("exact-bound", exact_bound);
    cert.param("seed", seed);
    cert.seal();
    let r = max_product_free(&g, exact_bound, seed);
    let (w, _) = Subset::from_elements(g.clone(), r.witness.iter().copied());
    let ok = product_free_check(&w).is_none();
    status(&mut cert, ok, ok);
    cert.result("size", r.size);
    cert.result("exact", r.exact);
    cert.result("witness", fmt_elems(&ints(&g, &r.witness)));
    done(&cert, if ok { EXIT_OK } else { EXIT_FAILURE }, String::new())
}

/// The checks a degree list must pass against an independent class count.
pub(crate) fn degree_checks(g: &GroupTable, degrees: &[u64]) -> Vec<(&'static str, bool)> {
    let classes = ConjugacyData::compute(g).class_count();
    let linear = g.order() / g.commutator_subgroup().len();
    let sum: u64 = degrees.iter().map(|d| d * d).sum();
    vec![
        ("sum-of-squares", sum == g.order() as u64),
        ("class-count", degrees.len() == classes),
        ("divisibility", degrees.iter().all(|&d| d > 0 && g.order() as u64 % d == 0)),
        ("linear-characters", degrees.iter().filter(|&&d| d == 1).count() == linear),
        ("sorted", degrees.windows(2).all(|w| w[0] <= w[1])),
    ]
}

fn qr_degree(group: &str, seed: u64) -> CmdResult {
    let mut cert = Certificate::new("qr-degree");
    let g = load_group(group, &mut cert)?;
    cert.param("seed", seed);
    cert.seal();
    let d = character_degrees(&g, seed)?;
    let checks = degree_checks(&g, &d.degrees);
    let ok = checks.iter().all(|(_, pass)| *pass);
    status(&mut cert, ok, ok);
    cert.result("degrees", fmt_list(&d.degrees));
    cert.result("d", d.quasirandom_degree()?);
    cert.result("method", d.method.as_str());
    cert.result("prime", d.prime.map_or("none".to_string(), |p| p.to_string()));
    for (name, pass) in checks {
        cert.result(&format!("check.{name}"), pass);
    }
    done(&cert, if ok { EXIT_OK } else { EXIT_FAILURE }, String::new())
}

pub(crate) fn fmt_search(result: &SearchResult) -> String {
    match result {
        SearchResult::Found { base, greedy } => {
            format!("found {} {}", if *greedy { "greedy" } else { "exhaustive" }, fmt_list(base))
        }
        SearchResult::Counterexample => "counterexample".to_string(),
        SearchResult::Undecided => "undecided".to_string(),
    }
}

fn tested_label(t: &TestedSet) -> String {
    match &t.source {
        SetSource::Trial(i) => format!("trial.{i}"),
        SetSource::Battery(label) => format!("battery.{label}"),
    }
}

fn qr_experiment(group: &str, epsilon: Rational, n: usize, trials: usize, seed: u64) -> CmdResult {
    let mut cert = Certificate::new("qr-experiment");
    let g: Arc<GroupTable> = load_group(group, &mut cert)?;
    cert.param("epsilon", format_ratio(&epsilon));
    cert.param("n", n);
    cert.param("trials", trials);
    cert.param("seed", seed);
    cert.seal();
    let r = quasi_products_experiment(&g, epsilon, n, trials, seed)?;
    status(&mut cert, true, true);
    cert.result("set-size", r.set_size);
    cert.result("exhaustive", r.exhaustive);
    cert.result("successes", r.successes);
    cert.result("counterexamples", r.counterexamples().count());
    cert.result("undecided", r.undecided());
    for t in &r.random {
        cert.result(&tested_label(t), fmt_search(&t.result));
    }
    for t in &r.battery {
        let label = tested_label(t);
        cert.result(&format!("{label}.members"), fmt_elems(&ints(&g, &t.members)));
        cert.result(&label, fmt_search(&t.result));
    }
    done(&cert, EXIT_OK, String::new())
}

/// Relation from a file or from a group set, recorded in the certificate.
fn load_relation(args: &RelationArgs, cert: &mut Certificate, stderr: &mut String) -> Result<FiniteRelation, UsageError> {
    match (&args.relation, &args.set, &args.group) {
        (Some(path), _, _) => {
            let name = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("--relation: cannot read {name}: {e}")))?;
            let r = FiniteRelation::parse(&text, &name)?;
            cert.input("relation", &name);
            cert.input("relation-sha256", sha256_file(path)?);
            Ok(r)
        }
        (None, Some(set), Some(group)) => {
            let input = SetArgs {
                set: set.clone(),
                group: Some(group.clone()),
            };
            let set = group_target(&input, cert, stderr)?;
            Ok(FiniteRelation::from_set(&set))
        }
        _ => Err(UsageError("either --relation or --set with --group is required".into())),
    }
}

fn relation_index(args: &RelationArgs, kind: IndexKind) -> CmdResult {
    let mut cert = Certificate::new(kind.as_str());
    let mut stderr = String::new();
    let r = load_relation(args, &mut cert, &mut stderr)?;
    cert.param("exact-bound", args.exact_bound);
    cert.seal();
    let report = match kind {
        IndexKind::Ladder => ladder_index(&r, args.exact_bound),
        IndexKind::Equation => equation_index(&r, args.exact_bound),
    };
    let ok = crate::verify::pattern_holds(&r, kind, &report.witness_a, &report.witness_b);
    status(&mut cert, ok, ok);
    fmt_report(&mut cert, "", &report);
    done(&cert, if ok { EXIT_OK } else { EXIT_FAILURE }, stderr)
}

fn set_stability(input: &SetArgs, exact_bound: usize) -> CmdResult {
    let mut cert = Certificate::new("set-stability");
    let mut stderr = String::new();
    let set = group_target(input, &mut cert, &mut stderr)?;
    cert.param("exact-bound", exact_bound);
    cert.seal();
    let report = set_stability_index(&set, exact_bound);
    let r = FiniteRelation::from_set(&set);
    let ok = crate::verify::pattern_holds(&r, IndexKind::Ladder, &report.witness_a, &report.witness_b);
    status(&mut cert, ok, ok);
    fmt_report(&mut cert, "", &report);
    done(&cert, if ok { EXIT_OK } else { EXIT_FAILURE }, stderr)
}
