//! Human-readable tables for artifacts.

use crate::artifact::{Artifact, INFO};
use crate::config::Kind;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Aligned text table.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let parts: Vec<String> =
            cells.iter().zip(&widths).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, headers.to_vec());
    line(&mut out, widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        line(&mut out, r.iter().map(String::as_str).collect());
    }
    out
}

fn pick(a: &Artifact, cols: &[&str]) -> Vec<Vec<String>> {
    a.rows.iter().map(|r| cols.iter().map(|c| a.get(r, c).to_string()).collect()).collect()
}

fn concentration(a: &Artifact) -> String {
    let cols = [
        "statistic",
        "t",
        "interval",
        "expectation_bound",
        "variance_bound",
        "failures",
        "trials",
        "chebyshev_bound",
        "pass",
    ];
    let headers = ["statistic", "t", "I", "E-bound", "var-bound", "failures", "trials", "Chebyshev bound", "pass"];
    table(&headers, &pick(a, &cols))
}

fn ubiquity(a: &Artifact) -> String {
    let mut per_t: BTreeMap<u32, (String, f64, String, usize, usize)> = BTreeMap::new();
    let mut kappa: Option<(f64, String, String)> = None;
    for r in &a.rows {
        let t: u32 = a.get(r, "t").parse().unwrap_or(0);
        let v: f64 = a.get(r, "ratio_lower").parse().unwrap_or(f64::NAN);
        let e =
            per_t.entry(t).or_insert_with(|| (a.get(r, "block_sum").to_string(), f64::INFINITY, String::new(), 0, 0));
        if v < e.1 {
            e.1 = v;
            e.2 = a.get(r, "interval").to_string();
        }
        e.3 += 1;
        e.4 += usize::from(a.get(r, "pass") == "false");
        if kappa.as_ref().is_none_or(|k| v < k.0) {
            kappa = Some((v, t.to_string(), a.get(r, "interval").to_string()));
        }
    }
    let rows: Vec<Vec<String>> = per_t
        .iter()
        .map(|(t, e)| {
            vec![t.to_string(), e.0.clone(), format!("{:.6}", e.1), e.2.clone(), e.3.to_string(), e.4.to_string()]
        })
        .collect();
    let mut out = table(&["t", "F_t", "min ratio", "argmin I", "intervals", "failing"], &rows);
    if let Some((k, t, i)) = kappa {
        let _ = writeln!(out, "\nkappa estimate = {k:.6} (t = {t}, I = {i})");
    }
    let mut least = None;
    for (t, e) in per_t.iter().rev() {
        if e.4 > 0 {
            break;
        }
        least = Some(*t);
    }
    match least {
        Some(t) => {
            let _ = writeln!(out, "every interval passes for all t >= {t} in range");
        }
        None => out.push_str("the last t in range has failing intervals\n"),
    }
    out
}

fn counterexample(a: &Artifact) -> String {
    let mut by_j: BTreeMap<u64, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for r in &a.rows {
        if let Ok(j) = a.get(r, "j").parse::<u64>() {
            by_j.entry(j).or_default().insert(a.get(r, "check").to_string(), r.clone());
        }
    }
    let cell = |m: &BTreeMap<String, Vec<String>>, check: &str, col: &str| {
        m.get(check).map(|r| a.get(r, col).to_string()).unwrap_or_else(|| "-".into())
    };
    let rows: Vec<Vec<String>> = by_j
        .iter()
        .map(|(j, m)| {
            let chain_ok = ["chain S_j>=L1", "chain L1>=L2", "chain L2>=L3"]
                .iter()
                .map(|c| cell(m, c, "verdict"))
                .collect::<Vec<_>>()
                .join("/");
            let pass = m.values().all(|r| a.get(r, "pass") != "false");
            vec![
                j.to_string(),
                cell(m, "block", "value"),
                cell(m, "layer-measure", "value"),
                cell(m, "layer-measure", "bound"),
                cell(m, "phi-series", "verdict"),
                cell(m, "series-block", "value"),
                chain_ok,
                cell(m, "c_j/tau((M_j-1)!)", "value"),
                pass.to_string(),
            ]
        })
        .collect();
    let mut out =
        table(&["j", "block", "layer measure", "bound", "phi-series", "S_j", "chain", "c_j/tau", "pass"], &rows);
    for r in a.rows.iter().filter(|r| a.get(r, "j") == "all") {
        let status = if a.get(r, "pass") == "true" { "holds" } else { "FAILS" };
        let _ = writeln!(out, "{}: {} vs {} ({status})", a.get(r, "check"), a.get(r, "value"), a.get(r, "bound"));
    }
    out
}

fn generic(a: &Artifact) -> String {
    let cols: Vec<&str> = a.columns.iter().map(String::as_str).filter(|c| *c != "tag").collect();
    table(&cols, &pick(a, &cols))
}

/// Renders the artifact with a pass/fail summary per check and tag.
pub fn render(a: &Artifact) -> String {
    let mut out = format!("dlab artifact: {}\n\n", a.kind);
    out.push_str(&match a.kind {
        Kind::Concentration => concentration(a),
        Kind::Ubiquity => ubiquity(a),
        Kind::Counterexample => counterexample(a),
        _ => generic(a),
    });
    out.push('\n');
    let mut by_tag: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for r in &a.rows {
        let e = by_tag.entry(a.get(r, "tag")).or_default();
        match a.get(r, "pass") {
            "true" => e.0 += 1,
            "false" => e.1 += 1,
            _ => e.2 += 1,
        }
    }
    for (tag, (p, f, i)) in &by_tag {
        let status = if *f > 0 {
            "FAIL"
        } else if *p > 0 {
            "PASS"
        } else {
            "INFO"
        };
        let mut counts = format!("{p} passed");
        if *f > 0 {
            let _ = write!(counts, ", {f} failed");
        }
        if *i > 0 {
            let _ = write!(counts, ", {i} {INFO}");
        }
        let _ = writeln!(out, "{status}  {tag}  ({counts})");
    }
    let failed = a.failures().count();
    let _ = writeln!(out, "\n{} rows, {failed} failed: {}", a.rows.len(), if failed == 0 { "PASS" } else { "FAIL" });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_columns() {
        let t = table(&["a", "long"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    long\n---  ----\nxyz  1\n");
    }

    #[test]
    fn summary_counts_tags() {
        let mut a = Artifact::new(Kind::Catlin, &["check", "pass", "tag"]);
        a.push(vec!["x".into(), "true".into(), "t1".into()]);
        a.push(vec!["y".into(), "false".into(), "t1".into()]);
        a.push(vec!["z".into(), "info".into(), "t2".into()]);
        let r = render(&a);
        assert!(r.contains("FAIL  t1  (1 passed, 1 failed)"));
        assert!(r.contains("INFO  t2  (0 passed, 1 info)"));
        assert!(r.ends_with("3 rows, 1 failed: FAIL\n"));
    }
}
