use serde_json::json;
use torus_bundle::complex::{
    decompose, is_parallelizable, is_singular_point, reconstruction_error, riemann_residuals, C, RIEMANN_TOL, STRUCTURE_TOL,
};
use torus_bundle::exact::{QMat, Q};
use torus_bundle::io::Input;
use torus_bundle::lattice::{is_nondegenerate, pfaffian_binary_form, pfaffian_reality, BundleDatum};
use torus_bundle::orbifold::{conjugation_data, normalized, reconstruct_from_orbifold};
use torus_bundle::real::{check_dianalytic_conditions, check_integral_conditions, eigensplit, ConditionReport, RealStructureData};
use torus_bundle::solver::{connectivity_certificate, sample_solutions, solve, ConstraintSystem, SolutionWitness, WITNESS_TOL};
use torus_bundle::{Error, Result};

use crate::report::Report;

pub struct Job<'a> {
    pub input: &'a Input,
    pub seed: u64,
    pub tol: Option<f64>,
    pub samples: usize,
}

fn need<'a, T>(section: &'a Option<T>, name: &str, command: &str) -> Result<&'a T> {
    section.as_ref().ok_or_else(|| Error::Parse(format!("{command} needs {name} in the input")))
}

fn datum<'a>(job: &Job<'a>, command: &str) -> Result<&'a BundleDatum> {
    need(&job.input.datum, "the component list `A`", command)
}

fn qstrings(v: &[Q]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn qrows(m: &QMat) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| qstrings(&m.row(i))).collect()
}

fn complex_rows(m: &nalgebra::DMatrix<C>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn add_conditions(report: &mut Report, conditions: &ConditionReport) {
    for c in &conditions.conditions {
        report.condition(&c.label, c.holds, c.detail.clone());
    }
}

pub fn check_bundle(job: &Job, report: &mut Report) -> Result<()> {
    let datum = datum(job, "check-bundle")?;
    report.field("m", datum.m());
    report.field("d", datum.d());
    let nondegenerate = is_nondegenerate(datum);
    report.field("nondegenerate", nondegenerate);
    report.condition("nondegenerate", nondegenerate, "stacked components have full column rank");
    let mut summary = format!("nondegenerate: {nondegenerate}");
    if datum.d() == 1 {
        let reality = pfaffian_reality(datum)?;
        report.field("pfaffian-reality", reality);
        report.field("pfaffian-form", qstrings(&pfaffian_binary_form(datum)?));
        report.condition("pfaffian-reality", reality, "real zero of the Pfaffian pencil");
        summary.push_str(&format!(", pfaffian-reality: {reality}"));
    } else {
        report.field("pfaffian-reality", "n/a (d > 1)");
    }
    if let Some(pair) = &job.input.structure {
        let tol = job.tol.unwrap_or(RIEMANN_TOL);
        let r = riemann_residuals(datum, pair)?;
        report.field("riemann-extraction", r.extraction);
        report.field("riemann-identity", r.identity);
        report.condition("riemann", r.value() <= tol, format!("residual {:e}, tolerance {tol:e}", r.value()));
        summary.push_str(&format!(", riemann: {}", r.value() <= tol));
    }
    report.summary = summary;
    Ok(())
}

pub fn check_real(job: &Job, report: &mut Report) -> Result<()> {
    let datum = datum(job, "check-real")?;
    let data = need(&job.input.real, "a [real] table", "check-real")?;
    let integral = check_integral_conditions(data, datum)?;
    report.field("degenerate-split", integral.degenerate);
    report.field("square-witness", &integral.gamma);
    add_conditions(report, &integral);
    let mut summary = count_line("integral", &integral);
    if let Some(pair) = &job.input.structure {
        let dec = decompose(datum, pair)?;
        let dianalytic = check_dianalytic_conditions(data, &dec, pair)?;
        add_conditions(report, &dianalytic);
        summary.push_str(", ");
        summary.push_str(&count_line("dianalytic", &dianalytic));
    }
    report.summary = summary;
    Ok(())
}

fn count_line(name: &str, r: &ConditionReport) -> String {
    let held = r.conditions.iter().filter(|c| c.holds).count();
    format!("{name}: {held}/{} hold", r.conditions.len())
}

pub fn decompose_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let datum = datum(job, "decompose")?;
    let pair = need(&job.input.structure, "a [structure] table", "decompose")?;
    let tol = job.tol.unwrap_or(RIEMANN_TOL);
    let r = riemann_residuals(datum, pair)?;
    let dec = decompose(datum, pair)?;
    let fidelity = reconstruction_error(datum, &dec);
    let parallelizable = is_parallelizable(&dec, tol);
    report.field("riemann-extraction", r.extraction);
    report.field("riemann-identity", r.identity);
    report.field("reconstruction-error", fidelity);
    report.field("hermitian-part-norm", dec.b_doubleprime_norm());
    report.field("parallelizable", parallelizable);
    report.field("singular-point", is_singular_point(datum, &dec, tol)?);
    report.field("orientation", pair.orientation_ok);
    report.condition("riemann", r.value() <= tol, format!("residual {:e}, tolerance {tol:e}", r.value()));
    report.condition("reconstruction", fidelity <= STRUCTURE_TOL, format!("relative error {fidelity:e}"));
    report.summary = format!("riemann: {}, parallelizable: {parallelizable}", r.value() <= tol);
    report.data = Some(json!({
        "holomorphic_part": dec.b_prime.iter().map(complex_rows).collect::<Vec<_>>(),
        "hermitian_part": dec.b_doubleprime.iter().map(complex_rows).collect::<Vec<_>>(),
    }));
    Ok(())
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::Dimension { .. }
            | Error::InvalidRealData(_)
            | Error::RequiresFibreDimensionOne { .. }
            | Error::UnsupportedBaseDimension { .. }
    )
}

/// The solver system from `[blocks]`, or from the eigenspace split of
/// `[real]`. A split that fails is a check failure, not an input error.
fn system(job: &Job, command: &str, report: &mut Report) -> Result<Option<ConstraintSystem>> {
    if let Some(sys) = &job.input.blocks {
        report.field("system-source", "blocks");
        return Ok(Some(sys.clone()));
    }
    let datum = datum(job, command)?;
    let data = need(&job.input.real, "a [blocks] or [real] table", command)?;
    report.field("system-source", "eigensplit");
    match eigensplit(data, datum) {
        Ok(split) => ConstraintSystem::from_split(split).map(Some),
        Err(e) if is_input_error(&e) => Err(e),
        Err(e) => {
            report.condition("eigensplit", false, e.to_string());
            report.summary = format!("eigensplit failed: {e}");
            Ok(None)
        }
    }
}

fn verify_witnesses(job: &Job, sys: &ConstraintSystem, witnesses: &[SolutionWitness], report: &mut Report) {
    let tol = job.tol.unwrap_or(WITNESS_TOL);
    let bad = witnesses.iter().filter(|w| !sys.verifies(&w.point, tol)).count();
    report.condition("witnesses", bad == 0, format!("{} of {} verified at {tol:e}", witnesses.len() - bad, witnesses.len()));
}

pub fn solve_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let Some(sys) = system(job, "solve", report)? else {
        return Ok(());
    };
    let set = solve(&sys);
    let label = set.case.full_label();
    report.field("m", sys.m);
    report.field("case", &label);
    report.field("empty", set.is_empty());
    report.field("dimension", set.dimension);
    if let Some(reason) = &set.case.empty_reason {
        report.field("empty-reason", reason);
    }
    for (k, v) in &set.case.constants {
        report.field(&format!("constant {k}"), v);
    }
    for (i, w) in set.witnesses.iter().enumerate() {
        report.field(&format!("witness {i}"), &w.point);
    }
    verify_witnesses(job, &sys, &set.witnesses, report);
    report.summary = match set.dimension {
        Some(dim) => format!("case {label}: nonempty, dimension {dim}"),
        None => format!("case {label}: empty"),
    };
    report.data = Some(json!({ "case": set.case, "dimension": set.dimension, "witnesses": set.witnesses }));
    Ok(())
}

pub fn sample_cmd(job: &Job, report: &mut Report) -> Result<()> {
    let Some(sys) = system(job, "sample", report)? else {
        return Ok(());
    };
    report.field("samples", job.samples);
    match sample_solutions(&sys, job.samples, job.seed) {
        Ok(witnesses) => {
            report.field("drawn", witnesses.len());
            verify_witnesses(job, &sys, &witnesses, report);
            report.summary = format!("{} samples drawn", witnesses.len());
            report.data = Some(json!({ "witnesses": witnesses }));
        }
        Err(Error::EmptySolutionSet) => {
            report.condition("nonempty", false, "solution set is empty");
            report.summary = "solution set is empty".into();
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

pub fn certify(job: &Job, report: &mut Report) -> Result<()> {
    let Some(sys) = system(job, "certify", report)? else {
        return Ok(());
    };
    let cert = connectivity_certificate(&sys, job.samples, job.seed);
    report.field("case", &cert.case_label);
    report.field("dimension", cert.dimension);
    report.field("samples", cert.samples);
    report.field("witnesses", cert.witnesses.len());
    report.field("paths", cert.paths.len());
    report.field("failed-pairs", cert.failures.len());
    report.field("component_count", cert.component_count);
    report.condition("connected", cert.component_count <= 1, format!("{} component(s)", cert.component_count));
    report.condition("reverified", cert.reverify(&sys), format!("path tolerance {:e}", cert.path_tolerance));
    report.summary = format!("case {}: component_count = {}", cert.case_label, cert.component_count);
    report.data = Some(serde_json::to_value(&cert).expect("certificate serializes"));
    Ok(())
}

fn real_fields(report: &mut Report, data: &RealStructureData) {
    report.field("A1", qrows(&data.a1));
    report.field("A2", qrows(&data.a2));
    report.field("L", qrows(&data.l));
    report.field("d1", qstrings(&data.d1));
    report.field("d2", qstrings(&data.d2));
}

pub fn reconstruct(job: &Job, report: &mut Report) -> Result<()> {
    let datum = datum(job, "reconstruct")?;
    let (conj, original) = match (&job.input.conjugation, &job.input.real) {
        (Some(c), _) => (c.clone(), None),
        (None, Some(real)) => (conjugation_data(real, datum, None)?, Some(real)),
        (None, None) => return Err(Error::Parse("reconstruct needs a [conjugation] or [real] table in the input".into())),
    };
    report.field("source", if original.is_some() { "real (round trip)" } else { "conjugation" });
    let rebuilt = match reconstruct_from_orbifold(&conj, datum) {
        Ok(r) => r,
        Err(e) if is_input_error(&e) => return Err(e),
        Err(e) => {
            report.condition("reconstruct", false, e.to_string());
            report.summary = format!("reconstruction failed: {e}");
            return Ok(());
        }
    };
    real_fields(report, &rebuilt);
    if let Some(real) = original {
        let expected = normalized(real)?;
        report.condition("round-trip", expected == rebuilt, "reconstruction equals the input after d1 normalization");
    }
    report.summary = "reconstructed involution datum".into();
    Ok(())
}
