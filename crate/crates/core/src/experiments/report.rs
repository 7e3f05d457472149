//! Tabular results and their CSV form.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::schemes::Scheme;

use super::ErrorMetrics;

const FAILED: &str = "failed";

/// One (problem, scheme, q, τ) cell of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub problem: String,
    pub scheme: Scheme,
    pub q: usize,
    pub tau: f64,
    pub n_elements: usize,
    /// `None` when the run did not reach the end of the domain.
    pub metrics: Option<ErrorMetrics>,
    /// L2 order against the previous row of the same block.
    pub eoc: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parameter(format!("CSV: {e}"))
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Parameter(format!("CSV: bad {name} '{field}'")))
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parameter(format!(
            "CSV: expected header {}, found {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

impl ExperimentReport {
    pub const HEADER: [&'static str; 8] = [
        "problem",
        "scheme",
        "q",
        "tau",
        "n_elements",
        "max_nodal_error",
        "l2_error",
        "eoc",
    ];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(Self::HEADER).map_err(csv_err)?;
        for r in &self.rows {
            let (nodal, l2) = match r.metrics {
                Some(m) => (
                    format!("{:e}", m.max_nodal_error),
                    format!("{:e}", m.l2_error),
                ),
                None => (FAILED.to_string(), FAILED.to_string()),
            };
            wtr.write_record([
                r.problem.clone(),
                r.scheme.to_string(),
                r.q.to_string(),
                format!("{:e}", r.tau),
                r.n_elements.to_string(),
                nodal,
                l2,
                r.eoc.map(|e| format!("{e:e}")).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush()
            .map_err(|e| Error::Parameter(format!("CSV: {e}")))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parameter(format!("CSV: {e}")))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &Self::HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != Self::HEADER.len() {
                return Err(Error::Parameter(format!(
                    "CSV: row with {} fields",
                    rec.len()
                )));
            }
            let metrics = match (&rec[5], &rec[6]) {
                (FAILED, FAILED) => None,
                (nodal, l2) => Some(ErrorMetrics {
                    max_nodal_error: parse_field(nodal, "max_nodal_error")?,
                    l2_error: parse_field(l2, "l2_error")?,
                }),
            };
            rows.push(ReportRow {
                problem: rec[0].to_string(),
                scheme: rec[1].parse()?,
                q: parse_field(&rec[2], "q")?,
                tau: parse_field(&rec[3], "tau")?,
                n_elements: parse_field(&rec[4], "n_elements")?,
                metrics,
                eoc: match &rec[7] {
                    "" => None,
                    e => Some(parse_field(e, "eoc")?),
                },
            });
        }
        Ok(Self { rows })
    }

    /// Rows of one (scheme, q) block, in row order.
    pub fn block(&self, scheme: Scheme, q: usize) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.q == q)
            .collect()
    }

    /// Human-readable table: errors to three significant figures, EOC to two
    /// decimals.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<15} {:<10} {:>2} {:>12} {:>9} {:>11} {:>11} {:>6}\n",
            "problem", "scheme", "q", "tau", "elements", "max nodal", "L2", "EOC"
        );
        for r in &self.rows {
            let (nodal, l2) = match r.metrics {
                Some(m) => (
                    format!("{:.2e}", m.max_nodal_error),
                    format!("{:.2e}", m.l2_error),
                ),
                None => (FAILED.to_string(), FAILED.to_string()),
            };
            let eoc = r
                .eoc
                .map(|e| format!("{e:.2}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<15} {:<10} {:>2} {:>12} {:>9} {:>11} {:>11} {:>6}",
                r.problem, r.scheme, r.q, r.tau, r.n_elements, nodal, l2, eoc
            );
        }
        out
    }
}

/// Whether a scheme completed the domain at a step size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub tau: f64,
    pub solved: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub const HEADER: [&'static str; 3] = ["scheme", "tau", "solved"];

    pub fn solved(&self, scheme: Scheme, tau: f64) -> Option<bool> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.tau == tau)
            .map(|r| r.solved)
    }

    /// Largest step size at which `scheme` completed the domain.
    pub fn largest_solved(&self, scheme: Scheme) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme && r.solved)
            .map(|r| r.tau)
            .reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(Self::HEADER).map_err(csv_err)?;
        for r in &self.rows {
            wtr.write_record([
                r.scheme.to_string(),
                format!("{:e}", r.tau),
                r.solved.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush()
            .map_err(|e| Error::Parameter(format!("CSV: {e}")))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &Self::HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(SweepRow {
                scheme: rec[0].parse()?,
                tau: parse_field(&rec[1], "tau")?,
                solved: parse_field(&rec[2], "solved")?,
            });
        }
        Ok(Self { rows })
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<10} {:>12} {:>7}\n", "scheme", "tau", "solved");
        for r in &self.rows {
            let mark = if r.solved { "yes" } else { "no" };
            let _ = writeln!(out, "{:<10} {:>12} {:>7}", r.scheme, r.tau, mark);
        }
        out
    }
}

/// Absolute error of one component at one sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub component: usize,
    pub abs_error: f64,
}

impl SeriesRow {
    pub const HEADER: [&'static str; 3] = ["t", "component", "abs_error"];

    pub fn write_csv<W: Write>(rows: &[SeriesRow], w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(Self::HEADER).map_err(csv_err)?;
        for r in rows {
            wtr.write_record([
                format!("{:e}", r.t),
                r.component.to_string(),
                format!("{:e}", r.abs_error),
            ])
            .map_err(csv_err)?;
        }
        wtr.flush()
            .map_err(|e| Error::Parameter(format!("CSV: {e}")))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Vec<SeriesRow>> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(&mut rdr, &Self::HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(SeriesRow {
                t: parse_field(&rec[0], "t")?,
                component: parse_field(&rec[1], "component")?,
                abs_error: parse_field(&rec[2], "abs_error")?,
            });
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(
        scheme: Scheme,
        q: usize,
        tau: f64,
        metrics: Option<(f64, f64)>,
        eoc: Option<f64>,
    ) -> ReportRow {
        ReportRow {
            problem: "working".into(),
            scheme,
            q,
            tau,
            n_elements: (10.0 / tau).round() as usize,
            metrics: metrics.map(|(n, l)| ErrorMetrics {
                max_nodal_error: n,
                l2_error: l,
            }),
            eoc,
        }
    }

    #[test]
    fn failed_rows_round_trip() {
        let report = ExperimentReport {
            rows: vec![
                row(Scheme::Standard, 0, 0.15625, Some((7.49e-4, 1.7e-3)), None),
                row(Scheme::Standard, 0, 0.078125, None, None),
            ],
        };
        let text = report.to_csv().unwrap();
        assert!(text.starts_with("problem,scheme,q,tau,n_elements,max_nodal_error,l2_error,eoc\n"));
        assert!(text.contains(",failed,failed,\n"));
        assert_eq!(ExperimentReport::read_csv(text.as_bytes()).unwrap(), report);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(ExperimentReport::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(SweepReport::read_csv("scheme,tau\n".as_bytes()).is_err());
    }

    #[test]
    fn table_formatting() {
        let report = ExperimentReport {
            rows: vec![row(
                Scheme::Invariant,
                1,
                0.078125,
                Some((1.234e-15, 2.7449e-6)),
                Some(2.9961),
            )],
        };
        let t = report.table();
        assert!(
            t.contains("2.74e-6") && t.contains("3.00") && t.contains("1.23e-15"),
            "{t}"
        );
    }

    #[test]
    fn sweep_queries_and_round_trip() {
        let report = SweepReport {
            rows: vec![
                SweepRow {
                    scheme: Scheme::Invariant,
                    tau: 0.78125,
                    solved: true,
                },
                SweepRow {
                    scheme: Scheme::Invariant,
                    tau: 3.125,
                    solved: true,
                },
                SweepRow {
                    scheme: Scheme::Invariant,
                    tau: 6.25,
                    solved: false,
                },
                SweepRow {
                    scheme: Scheme::Standard,
                    tau: 0.78125,
                    solved: false,
                },
            ],
        };
        assert_eq!(report.largest_solved(Scheme::Invariant), Some(3.125));
        assert_eq!(report.largest_solved(Scheme::Standard), None);
        assert_eq!(report.solved(Scheme::Invariant, 6.25), Some(false));
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(SweepReport::read_csv(buf.as_slice()).unwrap(), report);
    }

    fn scheme_strategy() -> impl Strategy<Value = Scheme> {
        prop_oneof![
            Just(Scheme::Standard),
            Just(Scheme::Invariant),
            Just(Scheme::Augmented),
            Just(Scheme::Naive)
        ]
    }

    proptest! {
        #[test]
        fn report_csv_round_trips(
            cells in prop::collection::vec(
                (scheme_strategy(), 0usize..5, 1e-6f64..10.0, 1usize..100000,
                 prop::option::of((0.0f64..1.0, 0.0f64..1.0)),
                 prop::option::of(-10.0f64..10.0)),
                0..12)
        ) {
            let rows = cells
                .into_iter()
                .map(|(scheme, q, tau, n_elements, m, eoc)| ReportRow {
                    problem: "schwarzian".into(),
                    scheme,
                    q,
                    tau,
                    n_elements,
                    metrics: m.map(|(a, b)| ErrorMetrics { max_nodal_error: a, l2_error: b }),
                    eoc,
                })
                .collect();
            let report = ExperimentReport { rows };
            let parsed = ExperimentReport::read_csv(report.to_csv().unwrap().as_bytes()).unwrap();
            prop_assert_eq!(parsed, report);
        }

        #[test]
        fn series_csv_round_trips(
            cells in prop::collection::vec((-1e3f64..1e3, 0usize..3, 0.0f64..1e2), 0..20)
        ) {
            let rows: Vec<SeriesRow> = cells
                .into_iter()
                .map(|(t, component, abs_error)| SeriesRow { t, component, abs_error })
                .collect();
            let mut buf = Vec::new();
            SeriesRow::write_csv(&rows, &mut buf).unwrap();
            prop_assert_eq!(SeriesRow::read_csv(buf.as_slice()).unwrap(), rows);
        }
    }
}
