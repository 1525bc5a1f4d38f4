//! Landmark, results and summary files.
//!
//! Landmark CSV: one shape per line, `x1,y1,...,xk,yk`; lines starting with
//! `#` are ignored. Reals are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use geodp::kendall::{from_xy, to_xy, CVector};
use geodp::Mechanism;

use crate::bench::{ResultRow, SummaryRow};
use crate::error::{HarnessError, Result};

pub const RESULT_COLUMNS: [&str; 9] = [
    "manifold",
    "mechanism",
    "n",
    "replicate",
    "utility_euclidean",
    "utility_intrinsic",
    "seed",
    "wall_ms",
    "error",
];

pub const SUMMARY_COLUMNS: [&str; 10] = [
    "manifold",
    "mechanism",
    "n",
    "count",
    "mean_utility_euclidean",
    "two_se_euclidean",
    "count_intrinsic",
    "mean_utility_intrinsic",
    "two_se_intrinsic",
    "failures",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::io(path, source),
        other => HarnessError::Parse { path: path.to_path_buf(), line, reason: format!("{other:?}") },
    }
}

pub fn load_landmarks(path: &Path) -> Result<Vec<CVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut shapes: Vec<CVector> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parse = |reason: String| HarnessError::Parse { path: path.to_path_buf(), line, reason };
        let xy = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| parse(format!("'{f}' is not a number"))))
            .collect::<Result<Vec<f64>>>()?;
        if xy.iter().any(|v| !v.is_finite()) {
            return Err(parse("non-finite coordinate".into()));
        }
        if xy.len() % 2 != 0 {
            return Err(parse(format!("odd number of coordinates ({})", xy.len())));
        }
        if let Some(first) = shapes.first() {
            if first.len() * 2 != xy.len() {
                return Err(HarnessError::Data(format!(
                    "{}: line {line}: {} landmarks, earlier shapes have {}",
                    path.display(),
                    xy.len() / 2,
                    first.len()
                )));
            }
        }
        shapes.push(from_xy(&xy)?);
    }
    if shapes.is_empty() {
        return Err(HarnessError::Data(format!("{}: no shapes", path.display())));
    }
    Ok(shapes)
}

pub fn write_landmarks(path: &Path, shapes: &[CVector], header: Option<&str>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(w, "# {line}").map_err(io)?;
        }
    }
    for s in shapes {
        let line: Vec<String> = to_xy(s).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e| csv_err(path, e);
    w.write_record(RESULT_COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([
            r.manifold.clone(),
            r.mechanism.to_string(),
            r.n.to_string(),
            r.replicate.to_string(),
            opt(r.utility_euclidean),
            opt(r.utility_intrinsic),
            r.seed.to_string(),
            r.wall_ms.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| HarnessError::Parse { path: path.to_path_buf(), line, reason: format!("bad {what}") };
        if rec.len() != RESULT_COLUMNS.len() {
            return Err(bad("column count"));
        }
        let num = |i: usize, what: &str| rec[i].parse::<u64>().map_err(|_| bad(what));
        let real = |i: usize, what: &str| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                rec[i].parse::<f64>().map(Some).map_err(|_| bad(what))
            }
        };
        rows.push(ResultRow {
            manifold: rec[0].to_string(),
            mechanism: rec[1].parse::<Mechanism>().map_err(|_| bad("mechanism"))?,
            n: num(2, "n")? as usize,
            replicate: num(3, "replicate")? as usize,
            utility_euclidean: real(4, "utility_euclidean")?,
            utility_intrinsic: real(5, "utility_intrinsic")?,
            seed: num(6, "seed")?,
            wall_ms: num(7, "wall_ms")?,
            error: (!rec[8].is_empty()).then(|| rec[8].to_string()),
        });
    }
    Ok(rows)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e| csv_err(path, e);
    w.write_record(SUMMARY_COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([
            r.manifold.clone(),
            r.mechanism.to_string(),
            r.n.to_string(),
            r.count.to_string(),
            opt(r.mean_euclidean),
            opt(r.two_se_euclidean),
            r.count_intrinsic.to_string(),
            opt(r.mean_intrinsic),
            opt(r.two_se_intrinsic),
            r.failures.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// A gnuplot script drawing mean utility with `2 SE` error bars against `n`,
/// one curve per mechanism, from a summary file.
pub fn write_plot_script(path: &Path, summary_file: &str, rows: &[SummaryRow], title: &str) -> Result<()> {
    let mut mechs: Vec<Mechanism> = rows.iter().map(|r| r.mechanism).collect();
    mechs.dedup();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'n'\nset ylabel 'mean utility distance'\n");
    s.push_str(&format!("set title '{title}'\n"));
    s.push_str("set key top right\n");
    let plots: Vec<String> = mechs
        .iter()
        .map(|m| {
            format!(
                "'{summary_file}' using (strcol(2) eq '{m}' ? $3 : 1/0):5:6 with yerrorlines title '{m}'"
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    std::fs::write(path, s).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn landmark_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("shapes.csv");
        let shapes = vec![
            CVector::from_vec(vec![Complex64::new(0.1, 1.0 / 3.0), Complex64::new(-2.5e-17, 7.0), Complex64::new(1e300, -0.0)]),
            CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0), Complex64::new(5.0, 6.0)]),
        ];
        write_landmarks(&p, &shapes, Some("two shapes\nk = 3")).unwrap();
        assert_eq!(load_landmarks(&p).unwrap(), shapes);
    }

    #[test]
    fn malformed_landmarks_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "# header\n1,2,3,4,5,6\n1,2,x,4,5,6\n").unwrap();
        match load_landmarks(&p) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "1,2,3,4,5,6\n1,2,3,4\n").unwrap();
        let e = load_landmarks(&p).unwrap_err();
        assert!(matches!(e, HarnessError::Data(_)) && e.exit_code() == 3, "{e}");
        std::fs::write(&p, "1,2,3\n").unwrap();
        assert!(matches!(load_landmarks(&p), Err(HarnessError::Parse { line: 1, .. })));
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_landmarks(&p), Err(HarnessError::Data(_))));
        std::fs::write(&p, "# only a header\n").unwrap();
        assert!(matches!(load_landmarks(&p), Err(HarnessError::Data(_))));
        assert!(matches!(load_landmarks(&dir.path().join("missing.csv")), Err(HarnessError::Io { .. })));
    }

    #[test]
    fn results_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        let rows = vec![
            ResultRow {
                manifold: "sphere".into(),
                mechanism: Mechanism::Kng,
                n: 25,
                replicate: 0,
                utility_euclidean: Some(0.1 + 0.2),
                utility_intrinsic: Some(1e-7),
                seed: u64::MAX,
                wall_ms: 0,
                error: None,
            },
            ResultRow {
                manifold: "sphere".into(),
                mechanism: Mechanism::EuclideanLaplace,
                n: 25,
                replicate: 1,
                utility_euclidean: None,
                utility_intrinsic: None,
                seed: 3,
                wall_ms: 12,
                error: Some("domain error, with a comma".into()),
            },
        ];
        write_results(&p, &rows).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("manifold,mechanism,n,replicate,utility_euclidean,utility_intrinsic,seed,wall_ms,error\n"));
        assert_eq!(read_results(&p).unwrap(), rows);
    }
}
