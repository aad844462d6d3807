//! Report serialization: JSON (schema versioned), CSV, and plain text.

use super::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?} (expected json|csv|text)")),
        }
    }
}

/// Serialize a report. Field order is stable, so identical reports yield
/// identical bytes.
pub fn emit(report: &ExperimentReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut out = String::from("name,observed,predicted,tolerance,tolerance_source,pass\n");
            for m in &report.metrics {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    m.name, m.observed, m.predicted, m.tolerance, m.tolerance_source, m.pass
                ));
            }
            out
        }
        Format::Text => {
            let mut out = format!(
                "suite {} seed {} trials {} bits_consumed {}\n",
                report.suite, report.seed, report.trials, report.bits_consumed
            );
            for m in &report.metrics {
                out.push_str(&format!(
                    "[{}] {}: observed {:.6} predicted {:.6} tolerance {:.6} ({})\n",
                    if m.pass { "PASS" } else { "FAIL" },
                    m.name,
                    m.observed,
                    m.predicted,
                    m.tolerance,
                    m.tolerance_source
                ));
            }
            if let Some(ms) = report.runtime_ms {
                out.push_str(&format!("runtime_ms {ms}\n"));
            }
            out.push_str(if report.all_pass() {
                "ALL PASS\n"
            } else {
                "FAILURES PRESENT\n"
            });
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ExperimentReport, MetricReport};
    use super::*;

    fn sample() -> ExperimentReport {
        ExperimentReport {
            version: 1,
            suite: "demo".into(),
            seed: 7,
            trials: 3,
            metrics: vec![
                MetricReport::band("mean", 1.01, 1.0, 0.05, "three_standard_errors"),
                MetricReport::at_most("bound", 3.6, 4.0),
            ],
            bits_consumed: 123,
            runtime_ms: None,
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let report = sample();
        let json = emit(&report, Format::Json);
        let parsed: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
        assert_eq!(emit(&parsed, Format::Json), json);
        // runtime_ms is omitted unless requested, keeping reruns byte-equal.
        assert!(!json.contains("runtime_ms"));
    }

    #[test]
    fn csv_row_count_is_metrics_plus_header() {
        let report = sample();
        let csv = emit(&report, Format::Csv);
        assert_eq!(csv.lines().count(), report.metrics.len() + 1);

        let empty = ExperimentReport {
            metrics: vec![],
            ..sample()
        };
        assert_eq!(emit(&empty, Format::Csv).lines().count(), 1);
        let json = emit(&empty, Format::Json);
        assert!(serde_json::from_str::<ExperimentReport>(&json).is_ok());
    }

    #[test]
    fn text_shows_one_line_per_metric() {
        let text = emit(&sample(), Format::Text);
        assert_eq!(text.matches("[PASS]").count(), 2);
        assert!(text.ends_with("ALL PASS\n"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("yaml".parse::<Format>().is_err());
    }
}
