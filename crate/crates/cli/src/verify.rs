//! Re-checks certificates from their recorded inputs and claims.

use std::path::Path;

use rayon::prelude::*;
use sumsetlab_core::density::{
    averaging_check, banach_density_windowed, frequency_at, translate_intersection, upper_density, DensityMode,
    FolnerFamily,
};
use sumsetlab_core::quasirandom::{experiment_set_size, trial_set};
use sumsetlab_core::rational::{format_ratio, parse_ratio};
use sumsetlab_core::sets::{verify_fp, Ambient};
use sumsetlab_core::stability::{verify_equation, verify_ladder, FiniteRelation, IndexKind};
use sumsetlab_core::sumsets::{find_fp_base, nested_sets, product_free_check, verify_nathanson, verify_productset};

use crate::cert::{CertError, Certificate};
use crate::commands::{degree_checks, on_target, parse_translates};
use crate::{
    elems_in, fp_budget, group_from_cert, sha256_file, subset_of, target_from_cert, CmdResult, Target, UsageError,
    EXIT_FAILURE, EXIT_OK,
};

const EXHAUSTIVE_NODE_BUDGET: u64 = 1 << 24;

pub(crate) fn pattern_holds(r: &FiniteRelation, kind: IndexKind, a: &[usize], b: &[usize]) -> bool {
    match kind {
        IndexKind::Ladder => verify_ladder(r, a, b),
        IndexKind::Equation => verify_equation(r, a, b),
    }
}

/// Outcome of checking one certificate. `Err` is a rejection reason.
type Check = Result<Vec<String>, String>;

fn field<T>(r: Result<T, CertError>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn expect_eq(what: &str, claimed: &str, actual: &str) -> Result<(), String> {
    if claimed == actual {
        Ok(())
    } else {
        Err(format!("{what}: certificate says `{claimed}`, recomputed `{actual}`"))
    }
}

fn usize_list(cert: &Certificate, key: &str) -> Result<Vec<usize>, String> {
    field(cert.elems(key))?
        .into_iter()
        .map(|x| usize::try_from(x).map_err(|_| format!("{key}: negative entry {x}")))
        .collect()
}

pub(crate) fn verify_file(path: &Path) -> CmdResult {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let cert = match Certificate::parse(&text) {
        Ok(c) => c,
        Err(e @ CertError::SchemaMismatch(_)) => return Err(UsageError(e.to_string())),
        Err(e) => return Ok((EXIT_FAILURE, format!("verdict: rejected\nreason: {e}\n"), String::new())),
    };
    let command = cert.require("command").unwrap_or_default().to_string();
    let mut out = format!("verify: {command}\n");
    let digest_ok = cert.get("inputs-digest") == Some(cert.compute_digest().as_str());
    out.push_str(&format!("inputs-digest: {}\n", if digest_ok { "ok" } else { "mismatch" }));
    let check = if !digest_ok {
        Err("inputs-digest does not match the recorded inputs".to_string())
    } else {
        match command.as_str() {
            "density" => density(&cert),
            "berg-measure" => berg(&cert),
            "ip-extract" => ip(&cert),
            "nathanson" => nathanson(&cert),
            "productset" => productset(&cert),
            "product-free" => product_free(&cert),
            "max-product-free" => max_pf(&cert),
            "qr-degree" => qr_degree(&cert),
            "qr-experiment" => qr_experiment(&cert),
            "ladder" | "equation" | "set-stability" => relation(&cert, &command),
            other => Err(format!("unknown command `{other}`")),
        }
    };
    let code = match check {
        Ok(notes) => {
            out.push_str("verdict: verified\n");
            for n in notes {
                out.push_str(&format!("note: {n}\n"));
            }
            EXIT_OK
        }
        Err(reason) => {
            out.push_str("verdict: rejected\n");
            out.push_str(&format!("reason: {reason}\n"));
            EXIT_FAILURE
        }
    };
    Ok((code, out, String::new()))
}

fn family_from_cert(cert: &Certificate) -> Result<FolnerFamily, String> {
    let spec = field(cert.require("param.folner"))?;
    if let Some(hash) = cert.get("param.folner-sha256") {
        let path = spec.split_once(':').map_or("", |(_, p)| p);
        let found = sha256_file(Path::new(path)).map_err(|e| e.0)?;
        if found != hash {
            return Err(format!("{path} does not match the recorded hash"));
        }
    }
    FolnerFamily::from_spec(spec).map_err(|e| e.to_string())
}

fn density(cert: &Certificate) -> Check {
    let target = target_from_cert(cert)?;
    let mode = field(cert.require("param.mode"))?;
    match mode {
        "upper" | "lower" => {
            let family = family_from_cert(cert)?;
            let max: usize = field(cert.parse_field("param.max-index"))?;
            let m = if mode == "upper" { DensityMode::Upper } else { DensityMode::Lower };
            let r = on_target!(&target, s => upper_density(s, &family, max, m)).map_err(|e| e.to_string())?;
            expect_eq("value", field(cert.require("result.value"))?, &format_ratio(&r.value))?;
            expect_eq("witness-index", field(cert.require("result.witness-index"))?, &r.witness.to_string())?;
        }
        "banach" | "averaging" => {
            let Target::Int(set) = &target else {
                return Err("windowed modes need an integer set".into());
            };
            let n: usize = field(cert.parse_field("param.n"))?;
            if mode == "banach" {
                let r = banach_density_windowed(set, n).map_err(|e| e.to_string())?;
                expect_eq("value", field(cert.require("result.value"))?, &format_ratio(&r.value))?;
                expect_eq("witness-m", field(cert.require("result.witness-m"))?, &r.witness.to_string())?;
            } else {
                let family = family_from_cert(cert)?;
                let max: usize = field(cert.parse_field("param.max-index"))?;
                let r = averaging_check(set, &family, max, n).map_err(|e| e.to_string())?;
                expect_eq("density", field(cert.require("result.density"))?, &format_ratio(&r.density.value))?;
                expect_eq("witness-m", field(cert.require("result.witness-m"))?, &r.witness_m.to_string())?;
                expect_eq("count", field(cert.require("result.count"))?, &r.count.to_string())?;
                if !r.holds || r.identity.0 != r.identity.1 {
                    return Err("the averaging inequality or the counting identity fails".into());
                }
            }
        }
        other => return Err(format!("unknown mode `{other}`")),
    }
    Ok(vec![])
}

fn berg(cert: &Certificate) -> Check {
    let target = target_from_cert(cert)?;
    let family = family_from_cert(cert)?;
    let tuples = parse_translates(field(cert.require("param.translates"))?)?;
    let max: usize = field(cert.parse_field("param.max-index"))?;
    let last: usize = field(cert.parse_field("result.final-index"))?;
    let first_stage = usize_list(cert, "result.first-stage")?;
    let last_stage = usize_list(cert, "result.last-stage")?;
    let diagonal = usize_list(cert, "result.diagonal")?;
    if diagonal.last() != Some(&last) || !last_stage.contains(&last) {
        return Err("final index is not the last diagonal entry of the last stage".into());
    }
    if !last_stage.iter().all(|x| first_stage.contains(x)) {
        return Err("last-stage indices are not a subfamily of the first stage".into());
    }
    on_target!(&target, s => {
        let err = |e: sumsetlab_core::density::DensityError| e.to_string();
        let base = frequency_at(s, &family, last).map_err(err)?;
        expect_eq("base-value", field(cert.require("result.base-value"))?, &format_ratio(&base))?;
        let upper = upper_density(s, &family, max, DensityMode::Upper).map_err(err)?;
        if upper.value != base {
            return Err(format!("value of A is {} but its upper density is {}", format_ratio(&base), format_ratio(&upper.value)));
        }
        for (i, t) in tuples.iter().enumerate() {
            let gs = elems_in(s.ambient(), t)?;
            let (inter, _) = translate_intersection(s, &gs);
            let v = frequency_at(&inter, &family, last).map_err(err)?;
            expect_eq(&format!("value.{}", i + 1), field(cert.require(&format!("result.value.{}", i + 1)))?, &format_ratio(&v))?;
        }
    });
    Ok(vec![])
}

fn ip(cert: &Certificate) -> Check {
    let target = target_from_cert(cert)?;
    let budget = fp_budget().map_err(|e| e.0)?;
    let success = field(cert.require("status"))? == "success";
    on_target!(&target, s => {
        let base = elems_in(s.ambient(), &field(cert.elems("result.base"))?)?;
        let identity = s.ambient().identity();
        if base.iter().any(|&x| x == identity) {
            return Err("the base contains the identity".into());
        }
        let check_sizes = || {
            let sizes: Vec<String> = nested_sets(s, &base).iter().map(|(a, _)| a.len().to_string()).collect();
            expect_eq("sizes", field(cert.require("result.sizes"))?, &sizes.join(" "))
        };
        if !success {
            check_sizes()?;
            return Ok(vec!["failure report; density trace rechecked".to_string()]);
        }
        let depth: usize = field(cert.parse_field("result.verified-depth"))?;
        let verdict = verify_fp(&base, s, depth, budget).map_err(|e| e.to_string())?;
        if let Some(w) = verdict.violation {
            let idx: Vec<String> = w.indices.iter().map(|i| i.to_string()).collect();
            return Err(format!("product word [{}] = {} is not in the set", idx.join(" "), w.value));
        }
        check_sizes()?;
        Ok(vec![format!("{} product words checked", verdict.words_checked)])
    })
}

fn nathanson(cert: &Certificate) -> Check {
    let target = target_from_cert(cert)?;
    if field(cert.require("status"))? != "success" {
        return Ok(vec!["failure report; nothing to attest".to_string()]);
    }
    let n: usize = field(cert.parse_field("param.n"))?;
    let m: usize = field(cert.parse_field("param.m"))?;
    on_target!(&target, s => {
        let ambient = s.ambient();
        let parts = (1..=n)
            .map(|i| elems_in(ambient, &field(cert.elems(&format!("result.part.{i}")))?))
            .collect::<Result<Vec<_>, String>>()?;
        let b = subset_of(ambient, &field(cert.elems("result.b"))?)?;
        if let Some(x) = b.iter().find(|&x| !s.contains(x)) {
            return Err(format!("element {x} of B is not in A"));
        }
        if let Err(v) = verify_nathanson(s, &parts, &b) {
            let f: Vec<String> = v.factors.iter().map(|x| x.to_string()).collect();
            return Err(format!("factors [{}] times b = {} gives {}, which is not in A", f.join(" "), v.b, v.value));
        }
        for (i, p) in parts.iter().enumerate() {
            if p.len() != m {
                return Err(format!("part {} has {} elements, expected {m}", i + 1, p.len()));
            }
        }
        // The set the construction would produce from these parts.
        let mut canonical = s.clone();
        for part in &parts {
            let source = canonical.clone();
            for &h in part {
                canonical = canonical.intersection(&source.translate(ambient.inverse(h)).set);
            }
        }
        let note = if b == canonical {
            "attestation: canonical".to_string()
        } else if b.is_subset(&canonical) {
            format!("attestation: weaker (B is missing {} element(s) of the constructed set)", canonical.len() - b.len())
        } else {
            "attestation: non-canonical B; containment holds".to_string()
        };
        Ok(vec![note])
    })
}

fn productset(cert: &Certificate) -> Check {
    let target = target_from_cert(cert)?;
    let mut notes = Vec::new();
    if let Target::Group(set) = &target {
        if cert.get("result.set-stability.value").is_some() {
            let r = FiniteRelation::from_set(set);
            let a = usize_list(cert, "result.set-stability.witness-a")?;
            let b = usize_list(cert, "result.set-stability.witness-b")?;
            let value: usize = field(cert.parse_field("result.set-stability.value"))?;
            if !verify_ladder(&r, &a, &b) || a.len() != value {
                return Err("set-stability witness is not a ladder of the claimed length".into());
            }
        }
    }
    if field(cert.require("status"))? != "success" {
        notes.push("failure report; nothing to attest".to_string());
        return Ok(notes);
    }
    let k: usize = field(cert.parse_field("param.k"))?;
    on_target!(&target, s => {
        let ambient = s.ambient();
        let b = elems_in(ambient, &field(cert.elems("result.b"))?)?;
        let c = elems_in(ambient, &field(cert.elems("result.c"))?)?;
        if b.len() != k || c.len() != k {
            return Err(format!("expected |B| = |C| = {k}, found {} and {}", b.len(), c.len()));
        }
        if let Some(x) = c.iter().find(|&&x| !s.contains(x)) {
            return Err(format!("element {x} of C is not in A"));
        }
        if let Err((x, y)) = verify_productset(s, &b, &c) {
            return Err(format!("{x} * {y} = {} is not in A", ambient.op(x, y)));
        }
        if let Some(w) = cert.get("result.b-witnesses") {
            let pairs: Vec<&str> = w.split_whitespace().collect();
            if pairs.len() != b.len() {
                return Err("one witness pair per element of B is required".into());
            }
            for (&x, pair) in b.iter().zip(pairs) {
                let nums = crate::cert::parse_elems(&pair.replace(',', " "))?;
                let [a1, a2] = nums[..] else { return Err(format!("bad witness pair `{pair}`")) };
                let (a1, a2) = (elems_in(ambient, &[a1])?[0], elems_in(ambient, &[a2])?[0]);
                if !s.contains(a1) || !s.contains(a2) || ambient.op(a1, ambient.inverse(a2)) != x {
                    return Err(format!("witness `{pair}` does not show {x} in A*A^-1"));
                }
            }
            notes.push("B lies in A*A^-1".to_string());
        }
        Ok(notes)
    })
}

fn product_free(cert: &Certificate) -> Check {
    let Target::Group(set) = target_from_cert(cert)? else {
        return Err("product-free certificates need a group".into());
    };
    let claim = field(cert.require("result.product-free"))?;
    match product_free_check(&set) {
        None => expect_eq("product-free", claim, "true")?,
        Some(_) => {
            expect_eq("product-free", claim, "false")?;
            let w = field(cert.elems("result.witness"))?;
            let g = set.ambient();
            let ok = match w[..] {
                [b, c, bc] => [b, c, bc].iter().all(|&x| x >= 0 && set.contains(x as usize)) && g.mul(b as usize, c as usize) == bc as usize,
                _ => false,
            };
            if !ok {
                return Err("witness triple is not a product inside the set".into());
            }
        }
    }
    Ok(vec![])
}

fn max_pf(cert: &Certificate) -> Check {
    let g = group_from_cert(cert)?;
    let w = subset_of(&g, &field(cert.elems("result.witness"))?)?;
    let size: usize = field(cert.parse_field("result.size"))?;
    if w.len() != size {
        return Err(format!("witness has {} elements, claimed {size}", w.len()));
    }
    if let Some((b, c, bc)) = product_free_check(&w) {
        return Err(format!("{b} * {c} = {bc} lies in the witness"));
    }
    let exact = field(cert.require("result.exact"))? == "true";
    Ok(vec![if exact {
        "maximality is claimed by exhaustive search and not re-checked".to_string()
    } else {
        "size is a lower bound".to_string()
    }])
}

fn qr_degree(cert: &Certificate) -> Check {
    let g = group_from_cert(cert)?;
    let degrees: Vec<u64> = field(cert.elems("result.degrees"))?.into_iter().map(|d| d as u64).collect();
    for (name, pass) in degree_checks(&g, &degrees) {
        if !pass {
            return Err(format!("degree check `{name}` fails"));
        }
    }
    let d = degrees.get(1).ok_or("the trivial group has no nontrivial degree")?;
    expect_eq("d", field(cert.require("result.d"))?, &d.to_string())?;
    Ok(vec![])
}

/// Checks one tested set against its recorded outcome.
fn check_outcome(set: &sumsetlab_core::sets::GroupSubset, n: usize, outcome: &str) -> Result<(), String> {
    let mut words = outcome.split_whitespace();
    match words.next() {
        Some("found") => {
            words.next();
            let base: Vec<usize> = words.map(|w| w.parse().map_err(|_| format!("bad base `{outcome}`"))).collect::<Result<_, _>>()?;
            let g = set.ambient();
            let mut distinct = base.clone();
            distinct.sort();
            distinct.dedup();
            if base.len() != n || distinct.len() != n || base.contains(&g.identity()) {
                return Err(format!("base `{outcome}` is not {n} distinct non-identity elements"));
            }
            let verdict = verify_fp(&base, set, n, sumsetlab_core::sets::FpBudget::default()).map_err(|e| e.to_string())?;
            match verdict.violation {
                Some(w) => Err(format!("base `{outcome}`: product {} is not in the set", w.value)),
                None => Ok(()),
            }
        }
        Some("counterexample") => match find_fp_base(set, n, EXHAUSTIVE_NODE_BUDGET).map_err(|e| e.to_string())? {
            None => Ok(()),
            Some(b) => Err(format!("claimed counterexample contains the base {b:?}")),
        },
        Some("undecided") => Ok(()),
        _ => Err(format!("unknown outcome `{outcome}`")),
    }
}

fn qr_experiment(cert: &Certificate) -> Check {
    let g = group_from_cert(cert)?;
    let epsilon = parse_ratio(field(cert.require("param.epsilon"))?).ok_or("bad epsilon")?;
    let n: usize = field(cert.parse_field("param.n"))?;
    let trials: usize = field(cert.parse_field("param.trials"))?;
    let seed: u64 = field(cert.parse_field("param.seed"))?;
    let size = experiment_set_size(g.order(), epsilon);
    expect_eq("set-size", field(cert.require("result.set-size"))?, &size.to_string())?;
    let trial_outcomes = (0..trials)
        .map(|t| field(cert.require(&format!("result.trial.{t}"))).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    trial_outcomes
        .par_iter()
        .enumerate()
        .map(|(t, outcome)| check_outcome(&trial_set(&g, size, seed, t), n, outcome).map_err(|e| format!("trial {t}: {e}")))
        .collect::<Result<Vec<()>, String>>()?;
    let battery: Vec<(String, String)> = cert
        .with_prefix("result.battery.")
        .filter(|(k, _)| !k.ends_with(".members"))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    battery
        .par_iter()
        .map(|(key, outcome)| {
            let members = subset_of(&g, &field(cert.elems(&format!("{key}.members")))?)?;
            if members.len() != size {
                return Err(format!("{key}: {} members, expected {size}", members.len()));
            }
            check_outcome(&members, n, outcome).map_err(|e| format!("{key}: {e}"))
        })
        .collect::<Result<Vec<()>, String>>()?;
    let found = trial_outcomes.iter().filter(|o| o.starts_with("found")).count();
    expect_eq("successes", field(cert.require("result.successes"))?, &found.to_string())?;
    let cex = trial_outcomes.iter().chain(battery.iter().map(|(_, o)| o)).filter(|o| *o == "counterexample").count();
    expect_eq("counterexamples", field(cert.require("result.counterexamples"))?, &cex.to_string())?;
    Ok(vec![format!("{} tested sets rechecked; counterexamples re-searched exhaustively", trials + battery.len())])
}

fn relation(cert: &Certificate, command: &str) -> Check {
    let r = match cert.get("input.relation") {
        Some(path) => {
            let found = sha256_file(Path::new(path)).map_err(|e| e.0)?;
            if Some(found.as_str()) != cert.get("input.relation-sha256") {
                return Err(format!("{path} does not match the recorded hash"));
            }
            let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
            FiniteRelation::parse(&text, path).map_err(|e| e.to_string())?
        }
        None => match target_from_cert(cert)? {
            Target::Group(set) => FiniteRelation::from_set(&set),
            Target::Int(_) => return Err("relation certificates need a group set".into()),
        },
    };
    let kind = if command == "equation" { IndexKind::Equation } else { IndexKind::Ladder };
    let a = usize_list(cert, "result.witness-a")?;
    let b = usize_list(cert, "result.witness-b")?;
    let value: usize = field(cert.parse_field("result.value"))?;
    if a.len() != value || !pattern_holds(&r, kind, &a, &b) {
        return Err(format!("witness does not realize a {} pattern of length {value}", kind.as_str()));
    }
    let exact = field(cert.require("result.exact"))? == "true";
    Ok(vec![if exact {
        "witness re-verified; maximality is claimed by exhaustive search".to_string()
    } else {
        "witness re-verified; value is a lower bound".to_string()
    }])
}
