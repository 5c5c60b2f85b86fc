//! Summary tables aggregated from experiment CSVs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::table::{CsvData, Table};

pub const REPORT_TABLES: [&str; 9] = [
    "beta_errors",
    "gamma_scaling",
    "thermal_accuracy",
    "gamma_quality",
    "msqw_summary",
    "msqw_stages",
    "floquet_summary",
    "dos_fit",
    "checks",
];

/// Linear-interpolation quantile of finite values; NaN when there are none.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

fn fraction(flags: impl IntoIterator<Item = bool>) -> f64 {
    let (mut yes, mut all) = (0usize, 0usize);
    for f in flags {
        all += 1;
        yes += f as usize;
    }
    if all == 0 {
        f64::NAN
    } else {
        yes as f64 / all as f64
    }
}

/// Every file called `file` under `dir`, depth first in name order, so
/// split runs can be aggregated together.
pub fn find_files(dir: &Path, file: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let direct = dir.join(file);
    if direct.is_file() {
        out.push(direct);
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for d in subdirs {
        out.extend(find_files(&d, file)?);
    }
    Ok(out)
}

fn load(dir: &Path, file: &str) -> Result<CsvData> {
    let files = find_files(dir, file)?;
    if files.is_empty() {
        return Err(HarnessError::Report(format!("no {file} under {}", dir.display())));
    }
    CsvData::read_all(&files)
}

pub fn build_report(dir: &Path, table: &str) -> Result<Table> {
    match table {
        "beta_errors" => beta_errors(&load(dir, "thermal_stats.csv")?),
        "gamma_scaling" => gamma_scaling(&load(dir, "thermal_stats.csv")?),
        "thermal_accuracy" => thermal_accuracy(&load(dir, "thermal_stats.csv")?),
        "gamma_quality" => gamma_quality(&load(dir, "thermal_stats.csv")?),
        "msqw_summary" => msqw_summary(&load(dir, "msqw_numeric.csv")?, &load(dir, "msqw_analytic.csv")?),
        "msqw_stages" => msqw_stages(&load(dir, "msqw_numeric.csv")?, &load(dir, "msqw_analytic.csv")?),
        "floquet_summary" => floquet_summary(&load(dir, "floquet_sweep.csv")?),
        "dos_fit" => dos_fit(&load(dir, "dos_fit.csv")?),
        "checks" => checks_summary(&load(dir, "checks.csv")?),
        other => Err(HarnessError::Config(format!(
            "unknown table '{other}' (expected one of {})",
            REPORT_TABLES.join(", ")
        ))),
    }
}

/// Row indices grouped by the value of `column`, ordered numerically when
/// the values parse as numbers.
fn group_by(d: &CsvData, rows: &[usize], column: &str) -> Result<Vec<(String, Vec<usize>)>> {
    let c = d.col(column)?;
    let mut groups: BTreeMap<(i64, String), Vec<usize>> = BTreeMap::new();
    for &r in rows {
        let v = d.rows[r][c].clone();
        let order = v.parse::<f64>().map(|x| (x * 1e6) as i64).unwrap_or(i64::MAX);
        groups.entry((order, v)).or_default().push(r);
    }
    Ok(groups.into_iter().map(|((_, k), v)| (k, v)).collect())
}

fn values(d: &CsvData, rows: &[usize], column: &str) -> Result<Vec<f64>> {
    rows.iter().map(|&r| d.f64(r, column)).collect()
}

fn brute_rows(d: &CsvData) -> Result<Vec<usize>> {
    d.filter("strategy", "brute")
}

/// Relative β errors `(β_model - β_exact)/β_exact` at the brute-force γ,
/// per size and overall.
fn beta_errors(d: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "beta_errors",
        &[
            "n",
            "count",
            "gauss_median_abs",
            "gauss_q1_abs",
            "gauss_q3_abs",
            "gauss_median_signed",
            "emg_median_abs",
            "emg_q1_abs",
            "emg_q3_abs",
            "emg_median_signed",
            "emg_missing",
        ],
    );
    let rows = brute_rows(d)?;
    let mut groups = group_by(d, &rows, "n")?;
    groups.push(("all".into(), rows));
    for (n, rows) in groups {
        let exact = values(d, &rows, "beta_exact")?;
        let rel = |col: &str| -> Result<Vec<f64>> {
            Ok(values(d, &rows, col)?.iter().zip(&exact).map(|(b, e)| (b - e) / e).collect())
        };
        let (gauss, emg) = (rel("beta_gauss")?, rel("beta_emg")?);
        let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
        let (ga, ea) = (abs(&gauss), abs(&emg));
        t.push(vec![
            n.into(),
            rows.len().into(),
            median(&ga).into(),
            quantile(&ga, 0.25).into(),
            quantile(&ga, 0.75).into(),
            median(&gauss).into(),
            median(&ea).into(),
            quantile(&ea, 0.25).into(),
            quantile(&ea, 0.75).into(),
            median(&emg).into(),
            emg.iter().filter(|x| x.is_nan()).count().into(),
        ]);
    }
    Ok(t)
}

/// Brute γ quartiles per size and the least-squares `a` of `γ ≈ a n^{-1/2}`
/// through the per-size medians.
fn gamma_scaling(d: &CsvData) -> Result<Table> {
    let mut t = Table::new("gamma_scaling", &["n", "count", "gamma_median", "gamma_q1", "gamma_q3", "a_fit"]);
    let rows = brute_rows(d)?;
    let mut stats = Vec::new();
    for (n, rows) in group_by(d, &rows, "n")? {
        let g = values(d, &rows, "gamma")?;
        let nn: f64 = n.parse().map_err(|_| HarnessError::Report(format!("bad n '{n}'")))?;
        stats.push((n, nn, rows.len(), median(&g), quantile(&g, 0.25), quantile(&g, 0.75)));
    }
    let num: f64 = stats.iter().map(|s| s.3 / s.1.sqrt()).sum();
    let den: f64 = stats.iter().map(|s| 1.0 / s.1).sum();
    let a = num / den;
    for (n, _, count, med, q1, q3) in stats {
        t.push(vec![n.into(), count.into(), med.into(), q1.into(), q3.into(), a.into()]);
    }
    Ok(t)
}

/// Dynamical steady value against the exact Gibbs value at the brute γ.
fn thermal_accuracy(d: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "thermal_accuracy",
        &["family", "n", "count", "median_abs_err", "max_abs_err", "frac_within_0.75", "frac_beta_below_1"],
    );
    let rows = brute_rows(d)?;
    for (family, frows) in group_by(d, &rows, "family")? {
        for (n, rows) in group_by(d, &frows, "n")? {
            let dynamic = values(d, &rows, "hp_dyn")?;
            let gibbs = values(d, &rows, "hp_gibbs")?;
            let beta = values(d, &rows, "beta_exact")?;
            let err: Vec<f64> = dynamic.iter().zip(&gibbs).map(|(a, b)| (a - b).abs()).collect();
            t.push(vec![
                family.as_str().into(),
                n.into(),
                rows.len().into(),
                median(&err).into(),
                err.iter().copied().fold(f64::NAN, f64::max).into(),
                fraction(err.iter().map(|e| *e <= 0.75)).into(),
                fraction(beta.iter().map(|b| *b < 1.0)).into(),
            ]);
        }
    }
    Ok(t)
}

/// Measured steady value at the EMG-optimal γ against the heuristic γ.
fn gamma_quality(d: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "gamma_quality",
        &["n", "count", "frac_emg_not_worse", "median_hp_emg_opt", "median_hp_heuristic", "median_hp_brute"],
    );
    let id = d.col("instance_id")?;
    let mut per: BTreeMap<String, (String, [f64; 3])> = BTreeMap::new();
    for r in 0..d.len() {
        let slot = match d.str(r, "strategy")? {
            "emg_opt" => 0,
            "heuristic" => 1,
            "brute" => 2,
            _ => continue,
        };
        let e = per
            .entry(d.rows[r][id].clone())
            .or_insert_with(|| (String::new(), [f64::NAN; 3]));
        e.0 = d.str(r, "n")?.to_string();
        e.1[slot] = d.f64(r, "hp_dyn")?;
    }
    let mut by_n: BTreeMap<usize, Vec<[f64; 3]>> = BTreeMap::new();
    for (n, v) in per.into_values() {
        if !v[0].is_nan() && !v[1].is_nan() {
            by_n.entry(n.parse().unwrap_or(0)).or_default().push(v);
        }
    }
    let all: Vec<[f64; 3]> = by_n.values().flatten().copied().collect();
    let mut groups: Vec<(String, Vec<[f64; 3]>)> = by_n.into_iter().map(|(n, v)| (n.to_string(), v)).collect();
    groups.push(("all".into(), all));
    for (n, v) in groups {
        let col = |k: usize| v.iter().map(|x| x[k]).collect::<Vec<_>>();
        t.push(vec![
            n.into(),
            v.len().into(),
            fraction(v.iter().map(|x| x[0] <= x[1])).into(),
            median(&col(0)).into(),
            median(&col(1)).into(),
            median(&col(2)).into(),
        ]);
    }
    Ok(t)
}

struct MsqwInstance {
    beta: Vec<f64>,
    numeric_final_err: f64,
    analytic_final_err: f64,
}

fn msqw_instances(numeric: &CsvData, analytic: &CsvData) -> Result<Vec<MsqwInstance>> {
    let all: Vec<usize> = (0..numeric.len()).collect();
    let mut out = Vec::new();
    for (id, rows) in group_by(numeric, &all, "instance_id")? {
        let mut rows = rows;
        rows.sort_by_key(|&r| numeric.str(r, "stage").ok().and_then(|s| s.parse::<usize>().ok()));
        let last = *rows.last().expect("non-empty group");
        let stage = numeric.str(last, "stage")?;
        let steady = numeric.f64(last, "hp_dyn_steady")?;
        let arow = analytic
            .filter("instance_id", &id)?
            .into_iter()
            .find(|&r| analytic.str(r, "stage").map(|s| s == stage).unwrap_or(false));
        let analytic_final_err = match arow {
            Some(r) => (analytic.f64(r, "hp_pred")? - steady).abs(),
            None => f64::NAN,
        };
        out.push(MsqwInstance {
            beta: values(numeric, &rows, "beta")?,
            numeric_final_err: (numeric.f64(last, "hp_pred")? - steady).abs(),
            analytic_final_err,
        });
    }
    Ok(out)
}

fn msqw_summary(numeric: &CsvData, analytic: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "msqw_summary",
        &[
            "instances",
            "frac_heating",
            "frac_numeric_within_0.5",
            "frac_analytic_within_0.5",
            "median_numeric_err",
            "median_analytic_err",
        ],
    );
    let inst = msqw_instances(numeric, analytic)?;
    let num: Vec<f64> = inst.iter().map(|i| i.numeric_final_err).collect();
    let ana: Vec<f64> = inst.iter().map(|i| i.analytic_final_err).collect();
    t.push(vec![
        inst.len().into(),
        fraction(inst.iter().map(|i| i.beta.windows(2).all(|w| w[1] < w[0]))).into(),
        fraction(num.iter().map(|e| *e <= 0.5)).into(),
        fraction(ana.iter().map(|e| *e <= 0.5)).into(),
        median(&num).into(),
        median(&ana).into(),
    ]);
    Ok(t)
}

fn msqw_stages(numeric: &CsvData, analytic: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "msqw_stages",
        &[
            "stage",
            "count",
            "gamma",
            "beta_numeric_median",
            "beta_analytic_median",
            "hp_dyn_median",
            "hp_numeric_median",
            "hp_analytic_median",
        ],
    );
    let all: Vec<usize> = (0..numeric.len()).collect();
    for (stage, rows) in group_by(numeric, &all, "stage")? {
        let arows = analytic.filter("stage", &stage)?;
        t.push(vec![
            stage.into(),
            rows.len().into(),
            median(&values(numeric, &rows, "gamma")?).into(),
            median(&values(numeric, &rows, "beta")?).into(),
            median(&values(analytic, &arows, "beta")?).into(),
            median(&values(numeric, &rows, "hp_dyn_steady")?).into(),
            median(&values(numeric, &rows, "hp_pred")?).into(),
            median(&values(analytic, &arows, "hp_pred")?).into(),
        ]);
    }
    Ok(t)
}

fn floquet_summary(d: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "floquet_summary",
        &[
            "tau",
            "count",
            "frac_ctqw_better",
            "median_hp_floquet",
            "median_hp_corrected",
            "median_hp_ctqw",
            "median_abs_pred_err",
            "max_initial_energy_gap",
            "frac_corrected_closer",
        ],
    );
    let plain = d.filter("corrected", "false")?;
    let corrected = d.filter("corrected", "true")?;
    let key = |r: usize| -> Result<(String, String)> { Ok((d.str(r, "instance_id")?.into(), d.str(r, "tau")?.into())) };
    let mut corrected_hp: BTreeMap<(String, String), f64> = BTreeMap::new();
    for &r in &corrected {
        corrected_hp.insert(key(r)?, d.f64(r, "hp_floquet")?);
    }
    for (tau, rows) in group_by(d, &plain, "tau")? {
        let hf = values(d, &rows, "hp_floquet")?;
        let hc = values(d, &rows, "hp_ctqw")?;
        let pred = values(d, &rows, "hp_pred_model")?;
        let closed = values(d, &rows, "initial_energy_closed")?;
        let direct = values(d, &rows, "initial_energy_direct")?;
        let corr: Vec<f64> = rows
            .iter()
            .map(|&r| Ok(corrected_hp.get(&key(r)?).copied().unwrap_or(f64::NAN)))
            .collect::<Result<_>>()?;
        let err: Vec<f64> = pred.iter().zip(&hf).map(|(p, h)| (p - h).abs()).collect();
        t.push(vec![
            tau.into(),
            rows.len().into(),
            fraction(hc.iter().zip(&hf).map(|(c, f)| c < f)).into(),
            median(&hf).into(),
            median(&corr).into(),
            median(&hc).into(),
            median(&err).into(),
            closed.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max).into(),
            fraction((0..rows.len()).map(|k| (corr[k] - hc[k]).abs() < (hf[k] - hc[k]).abs())).into(),
        ]);
    }
    Ok(t)
}

fn dos_fit(d: &CsvData) -> Result<Table> {
    let mut t = Table::new(
        "dos_fit",
        &["n", "count", "median_sse_gaussian", "median_sse_emg", "frac_emg_better"],
    );
    let all: Vec<usize> = (0..d.len()).collect();
    for (n, rows) in group_by(d, &all, "n")? {
        let g = values(d, &rows, "sse_gaussian")?;
        let e = values(d, &rows, "sse_emg")?;
        t.push(vec![
            n.into(),
            rows.len().into(),
            median(&g).into(),
            median(&e).into(),
            fraction(g.iter().zip(&e).map(|(g, e)| e < g)).into(),
        ]);
    }
    Ok(t)
}

fn checks_summary(d: &CsvData) -> Result<Table> {
    let mut t = Table::new("checks", &["check", "count", "failures", "max_value", "tolerance"]);
    let all: Vec<usize> = (0..d.len()).collect();
    for (name, rows) in group_by(d, &all, "check")? {
        let v = values(d, &rows, "value")?;
        let tol = values(d, &rows, "tolerance")?;
        let failures = rows.iter().filter(|&&r| d.str(r, "pass").map(|p| p != "true").unwrap_or(true)).count();
        t.push(vec![
            name.into(),
            rows.len().into(),
            failures.into(),
            v.iter().map(|x| x.abs()).fold(0.0, f64::max).into(),
            tol.iter().copied().fold(0.0, f64::max).into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, f64::NAN, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn fractions() {
        assert_eq!(fraction([true, false, true, true]), 0.75);
        assert!(fraction(std::iter::empty()).is_nan());
    }
}
