use std::path::Path;

use lifeplan::fit::{best_by_ks, goodness_table, LAWLESS_30KV};
use lifeplan::sim::{simulate_double, simulate_group, simulate_single};
use lifeplan::tables::{generate, TableId, TableRow};
use lifeplan::{
    design_double, design_group, design_single, failure_prob, misspec_probabilities, oc_curve,
    percentile_multiplier, DesignOutcome, DoublePlan, LifetimeModel, LifetimeSample, ModelKind, Plan, RiskSpec,
    SearchBounds, SimConfig,
};

use crate::output::{Record, Report};
use crate::{Failure, Kind};

/// Appends `p_alpha`, `p_beta` and `asn` (or their absence) to a record.
fn with_evaluation(record: Record, outcome: &DesignOutcome) -> Record {
    match outcome.evaluation {
        Some(e) => record
            .asn("asn", e.asn)
            .prob("p_alpha", e.p_accept_producer)
            .prob("p_beta", e.p_accept_consumer),
        None => record.missing("asn").missing("p_alpha").missing("p_beta"),
    }
}

fn double_fields(record: Record, outcome: &DesignOutcome) -> Record {
    let d = outcome.double();
    record
        .opt_int("n1", d.map(|d| d.n1()))
        .opt_int("n2", d.map(|d| d.n2()))
        .opt_int("c1", d.map(|d| d.c1()))
        .opt_int("c2", d.map(|d| d.c2()))
}

fn single_fields(record: Record, outcome: &DesignOutcome) -> Record {
    let s = outcome.single();
    record.opt_int("n", s.map(|s| s.n())).opt_int("c", s.map(|s| s.c()))
}

fn group_fields(record: Record, outcome: &DesignOutcome) -> Record {
    let g = outcome.group();
    record
        .opt_int("g", g.map(|g| g.g()))
        .opt_int("c", g.map(|g| g.c()))
        .opt_int("n", g.map(|g| g.sample_size() as i64))
}

pub fn design(kind: Kind, spec: &RiskSpec, r: Option<u32>, bounds: &SearchBounds) -> Result<(Report, bool), Failure> {
    if r.is_some() && kind != Kind::Group {
        return Err(Failure::Usage("--r applies to group designs only".into()));
    }
    let (report, outcome) = match kind {
        Kind::Double => {
            let outcome = design_double(spec, bounds)?;
            let columns = ["kind", "feasible", "n1", "n2", "c1", "c2", "asn", "p_alpha", "p_beta"];
            let record = double_fields(Record::new().text("kind", "double").flag("feasible", outcome.feasible), &outcome);
            (single_report("design", &columns, with_evaluation(record, &outcome)), outcome)
        }
        Kind::Single => {
            let outcome = design_single(spec, bounds)?;
            let columns = ["kind", "feasible", "n", "c", "asn", "p_alpha", "p_beta"];
            let record = single_fields(Record::new().text("kind", "single").flag("feasible", outcome.feasible), &outcome);
            (single_report("design", &columns, with_evaluation(record, &outcome)), outcome)
        }
        Kind::Group => {
            let r = r.ok_or_else(|| Failure::Usage("group designs need --r".into()))?;
            let outcome = design_group(spec, r, bounds)?;
            let columns = ["kind", "feasible", "r", "g", "c", "n", "asn", "p_alpha", "p_beta"];
            let record = Record::new()
                .text("kind", "group")
                .flag("feasible", outcome.feasible)
                .int("r", r);
            (single_report("design", &columns, with_evaluation(group_fields(record, &outcome), &outcome)), outcome)
        }
    };
    Ok((report, outcome.feasible))
}

fn single_report(command: &'static str, columns: &[&'static str], record: Record) -> Report {
    let mut report = Report::new(command, columns);
    report.push(record);
    report
}

pub fn tables(table: u8, bounds: &SearchBounds) -> Result<Report, Failure> {
    let id = TableId::from_number(table)?;
    let rows = generate(id, bounds)?;
    let mut report = match id {
        TableId::DoubleShape075 | TableId::DoubleShape125 => Report::new(
            "tables",
            &["table", "beta", "r2", "a", "gamma", "feasible", "n1", "n2", "c1", "c2", "asn", "p_alpha", "p_beta"],
        ),
        TableId::SingleVsDouble => Report::new(
            "tables",
            &[
                "table", "beta", "r2", "gamma", "a", "kind", "feasible", "n1", "n2", "c1", "c2", "n", "c", "asn",
                "p_alpha", "p_beta",
            ],
        ),
        TableId::GroupShape075 | TableId::GroupShape125 => Report::new(
            "tables",
            &["table", "beta", "r2", "r", "a", "gamma", "feasible", "g", "c", "n", "asn", "p_alpha", "p_beta"],
        ),
    };
    for row in &rows {
        report.push(table_record(id, row));
    }
    Ok(report)
}

fn table_record(id: TableId, row: &TableRow) -> Record {
    let o = &row.outcome;
    let head = Record::new().int("table", row.table).real("beta", row.beta).real("r2", row.r2);
    let record = match id {
        TableId::DoubleShape075 | TableId::DoubleShape125 => {
            let r = head.real("a", row.a).real("gamma", row.gamma).flag("feasible", o.feasible);
            double_fields(r, o)
        }
        TableId::SingleVsDouble => {
            let r = head
                .real("gamma", row.gamma)
                .real("a", row.a)
                .text("kind", row.kind.name())
                .flag("feasible", o.feasible);
            let r = double_fields(r, o);
            single_fields(r, o)
        }
        TableId::GroupShape075 | TableId::GroupShape125 => {
            let r = head
                .opt_int("r", row.r)
                .real("a", row.a)
                .real("gamma", row.gamma)
                .flag("feasible", o.feasible);
            group_fields(r, o)
        }
    };
    with_evaluation(record, o)
}

pub fn fit(path: Option<&Path>, models: &[String]) -> Result<Report, Failure> {
    let kinds = models
        .iter()
        .map(|m| m.parse::<ModelKind>().map_err(|_| Failure::Usage(format!("unknown model {m:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(Failure::Usage("no models requested".into()));
    }
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display())))?,
        None => LAWLESS_30KV.to_string(),
    };
    let sample = LifetimeSample::parse(&text)?;
    let rows = goodness_table(&sample, &kinds);
    if let [(_, Err(e)), ..] = rows.as_slice() {
        if rows.iter().all(|(_, r)| r.is_err()) {
            return Err(e.clone().into());
        }
    }
    let best = best_by_ks(&rows);
    let mut report = Report::new("fit", &["model", "param1", "param2", "nlc", "ks", "best", "error"]);
    for (kind, result) in &rows {
        let record = Record::new().text("model", kind.name());
        let record = match result {
            Ok(f) => record
                .fixed("param1", f.param1, 5)
                .fixed("param2", f.param2, 5)
                .fixed("nlc", f.nlc, 3)
                .prob("ks", f.ks)
                .flag("best", best == Some(*kind))
                .missing("error"),
            Err(e) => record
                .missing("param1")
                .missing("param2")
                .missing("nlc")
                .missing("ks")
                .flag("best", false)
                .text("error", e.to_string()),
        };
        report.push(record);
    }
    Ok(report)
}

pub fn oc(plan: &Plan, gamma: f64, a: f64, ratios: &[f64]) -> Result<Report, Failure> {
    let mut report = Report::new("oc", &["ratio", "p_accept", "asn"]);
    for point in oc_curve(plan, gamma, a, ratios)? {
        report.push(
            Record::new()
                .real("ratio", point.ratio)
                .prob("p_accept", point.accept_prob)
                .asn("asn", point.asn),
        );
    }
    Ok(report)
}

pub fn misspec(plan: &DoublePlan, a: f64, gamma0: &[f64], r2: f64) -> Result<Report, Failure> {
    let mut report = Report::new("misspec", &["gamma0", "p_beta", "p_alpha"]);
    for &g in gamma0 {
        let (p_beta, p_alpha) = misspec_probabilities(plan, a, g, r2)?;
        report.push(Record::new().real("gamma0", g).prob("p_beta", p_beta).prob("p_alpha", p_alpha));
    }
    Ok(report)
}

pub fn simulate(plan: &Plan, gamma: f64, lambda: f64, t0: f64, reps: u64, seed: u64) -> Result<Report, Failure> {
    let model = LifetimeModel::new(gamma, lambda)?;
    let config = SimConfig::new(model, t0, reps, seed)?;
    let p = model.cdf(t0)?;
    let sim = match plan {
        Plan::Single(s) => simulate_single(s, &config),
        Plan::Double(d) => simulate_double(d, &config),
        Plan::Group(g) => simulate_group(g, &config),
    };
    let mut report = Report::new(
        "simulate",
        &[
            "plan",
            "reps",
            "seed",
            "p_fail",
            "analytic_accept",
            "accept_rate",
            "stderr",
            "analytic_asn",
            "mean_sample_number",
            "accepted",
            "rejected",
            "second_sample",
            "units_tested",
            "units_failed",
        ],
    );
    let count = |v: u64| i64::try_from(v).unwrap_or(i64::MAX);
    report.push(
        Record::new()
            .text("plan", plan.to_string())
            .int("reps", count(reps))
            .int("seed", count(seed))
            .prob("p_fail", p)
            .prob("analytic_accept", plan.accept_prob(p)?)
            .prob("accept_rate", sim.accept_rate)
            .fixed("stderr", sim.accept_rate_stderr, 6)
            .asn("analytic_asn", plan.asn(p)?)
            .asn("mean_sample_number", sim.mean_sample_number)
            .int("accepted", count(sim.decisions.accepted))
            .int("rejected", count(sim.decisions.rejected))
            .int("second_sample", count(sim.decisions.second_sample))
            .int("units_tested", count(sim.units_tested))
            .int("units_failed", count(sim.units_failed)),
    );
    Ok(report)
}

pub fn convert_percentile(a_tilde: f64, gamma: f64, p: f64) -> Result<Report, Failure> {
    let a = percentile_multiplier(a_tilde, gamma, p)?;
    let mut report = Report::new("convert-percentile", &["a_tilde", "gamma", "p", "a", "p_fail_at_specified"]);
    report.push(
        Record::new()
            .real("a_tilde", a_tilde)
            .real("gamma", gamma)
            .real("p", p)
            .fixed("a", a, 4)
            .prob("p_fail_at_specified", failure_prob(1.0, a, gamma)?),
    );
    Ok(report)
}
