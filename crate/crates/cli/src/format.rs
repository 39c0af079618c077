use std::fmt::Write;

use nicrn::dynamics::Trajectory;
use nicrn::Network;

/// 17 significant digits, enough to round trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
    format!("({})", parts.join(", "))
}

pub fn csv_header(spec: &Network) -> String {
    let mut cols = vec!["t".to_string(), "U".to_string()];
    cols.extend(spec.species().iter().map(|s| format!("N_{}", s.name)));
    cols.push("T".into());
    cols.push("S_A".into());
    cols.join(",")
}

/// `S_A` is `nan` when no reference was attached.
pub fn trajectory_csv(spec: &Network, traj: &Trajectory<f64>) -> String {
    let mut out = csv_header(spec);
    out.push('\n');
    for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![fmt_num(*t), fmt_num(s.energy)];
        row.extend(s.amounts.iter().map(|&n| fmt_num(n)));
        row.push(fmt_num(traj.temperatures[i]));
        row.push(traj.availability.as_ref().map_or_else(|| "nan".into(), |a| fmt_num(a[i])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn int_matrix(out: &mut String, name: &str, rows: &[Vec<i64>]) {
    let _ = writeln!(out, "{name} ({} x {}):", rows.len(), rows.first().map_or(0, Vec::len));
    let width = rows.iter().flatten().map(|x| x.to_string().len()).max().unwrap_or(1);
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
        let _ = writeln!(out, "  [{}]", cells.join(" "));
    }
}

pub fn float_rows(out: &mut String, name: &str, rows: &[Vec<f64>]) {
    let _ = writeln!(out, "{name}:");
    if rows.is_empty() {
        let _ = writeln!(out, "  (empty)");
    }
    for row in rows {
        let _ = writeln!(out, "  {}", fmt_vec(row));
    }
}
