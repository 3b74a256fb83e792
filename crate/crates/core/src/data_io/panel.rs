use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact header line of a panel file.
pub const PANEL_HEADER: [&str; 5] = ["industry_code", "year", "K", "L", "V"];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("header mismatch: expected `industry_code,year,K,L,V`, found `{found}`")]
    HeaderMismatch { found: String },
    #[error("line {line}, column {column}: {reason}")]
    RowParseError {
        line: u64,
        column: &'static str,
        reason: String,
    },
    #[error("line {line}: {column} must be positive (got {value})")]
    NonPositiveValue {
        line: u64,
        column: &'static str,
        value: f64,
    },
    #[error("line {line}: year {year} outside [1900, 2200]")]
    YearOutOfRange { line: u64, year: i32 },
    #[error("malformed CSV: {0}")]
    Malformed(#[from] csv::Error),
}

/// One `(industry, year, K, L, V)` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub industry_code: String,
    pub year: i32,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Panel {
    pub observations: Vec<Observation>,
    pub source_label: String,
}

impl Panel {
    pub fn new(observations: Vec<Observation>, source_label: impl Into<String>) -> Self {
        Self {
            observations,
            source_label: source_label.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Rows of one industry, order preserved.
    pub fn filter_industry(&self, code: &str) -> Panel {
        Panel {
            observations: self
                .observations
                .iter()
                .filter(|o| o.industry_code == code)
                .cloned()
                .collect(),
            source_label: format!("{} [industry {code}]", self.source_label),
        }
    }

    /// First `n` rows and the rest.
    pub fn split_at(&self, n: usize) -> (Panel, Panel) {
        let n = n.min(self.len());
        let (head, tail) = self.observations.split_at(n);
        (
            Panel::new(head.to_vec(), format!("{} [0..{n})", self.source_label)),
            Panel::new(tail.to_vec(), format!("{} [{n}..)", self.source_label)),
        )
    }
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    column: &'static str,
    line: u64,
) -> Result<T, CsvError>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).ok_or_else(|| CsvError::RowParseError {
        line,
        column,
        reason: "missing field".into(),
    })?;
    raw.trim()
        .parse::<T>()
        .map_err(|e| CsvError::RowParseError {
            line,
            column,
            reason: format!("cannot parse `{raw}`: {e}"),
        })
}

pub fn parse_panel_csv(bytes: &[u8]) -> Result<Panel, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();

    match records.next() {
        Some(header) => {
            let header = header?;
            if header.iter().ne(PANEL_HEADER.iter().copied()) {
                return Err(CsvError::HeaderMismatch {
                    found: header.iter().collect::<Vec<_>>().join(","),
                });
            }
        }
        None => {
            return Err(CsvError::HeaderMismatch {
                found: String::new(),
            })
        }
    }

    let mut observations = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != PANEL_HEADER.len() {
            return Err(CsvError::RowParseError {
                line,
                column: PANEL_HEADER.get(record.len()).copied().unwrap_or("V"),
                reason: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let industry_code = record[0].trim().to_string();
        if industry_code.is_empty() {
            return Err(CsvError::RowParseError {
                line,
                column: "industry_code",
                reason: "empty".into(),
            });
        }
        let year: i32 = parse_field(&record, 1, "year", line)?;
        if !(1900..=2200).contains(&year) {
            return Err(CsvError::YearOutOfRange { line, year });
        }
        let k: f64 = parse_field(&record, 2, "K", line)?;
        let l: f64 = parse_field(&record, 3, "L", line)?;
        let v: f64 = parse_field(&record, 4, "V", line)?;
        for (column, value) in [("K", k), ("L", l), ("V", v)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CsvError::NonPositiveValue {
                    line,
                    column,
                    value,
                });
            }
        }
        observations.push(Observation {
            industry_code,
            year,
            k,
            l,
            v,
        });
    }
    Ok(Panel {
        observations,
        source_label: String::new(),
    })
}

/// Header plus one LF-terminated row per observation. Floats use the
/// shortest representation that parses back to the same bits.
pub fn write_panel_csv(panel: &Panel) -> Vec<u8> {
    let mut out = String::with_capacity(32 * (panel.len() + 1));
    out.push_str(&PANEL_HEADER.join(","));
    out.push('\n');
    for o in &panel.observations {
        out.push_str(&format!(
            "{},{},{:?},{:?},{:?}\n",
            o.industry_code, o.year, o.k, o.l, o.v
        ));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_single_row() {
        let panel = parse_panel_csv(b"industry_code,year,K,L,V\n151,2010,4.0,1.0,1.19\n").unwrap();
        assert_eq!(
            panel.observations,
            vec![Observation {
                industry_code: "151".into(),
                year: 2010,
                k: 4.0,
                l: 1.0,
                v: 1.19
            }]
        );
    }

    #[test]
    fn header_only_is_empty_panel() {
        assert!(parse_panel_csv(b"industry_code,year,K,L,V\n")
            .unwrap()
            .is_empty());
        assert!(parse_panel_csv(b"industry_code,year,K,L,V")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn crlf_and_blank_lines() {
        let text = b"industry_code,year,K,L,V\r\n151,2010,4,1,1.19\r\n\r\n251,2011,2.5,3,0.7\r\n";
        let panel = parse_panel_csv(text).unwrap();
        assert_eq!(panel.len(), 2);
        assert_eq!(panel.observations[1].industry_code, "251");
        assert_eq!(panel.observations[1].v, 0.7);
    }

    #[test]
    fn validation_errors_carry_line_numbers() {
        match parse_panel_csv(b"industry_code,year,K,L,V\n151,2010,-1,1,1\n") {
            Err(CsvError::NonPositiveValue {
                line: 2,
                column: "K",
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_panel_csv(b"industry_code,year,K,L,V\n151,2010,1,1,1\n151,2010,1,abc,1\n") {
            Err(CsvError::RowParseError {
                line: 3,
                column: "L",
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_panel_csv(b"industry_code,year,K,L,V\n151,2010,1,1\n") {
            Err(CsvError::RowParseError {
                line: 2,
                column: "V",
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
        match parse_panel_csv(b"industry_code,year,K,L,V\n151,1850,1,1,1\n") {
            Err(CsvError::YearOutOfRange {
                line: 2,
                year: 1850,
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_panel_csv(b"industry,year,K,L,V\n"),
            Err(CsvError::HeaderMismatch { .. })
        ));
        assert!(matches!(
            parse_panel_csv(b""),
            Err(CsvError::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn writer_layout() {
        assert_eq!(
            write_panel_csv(&Panel::default()),
            b"industry_code,year,K,L,V\n"
        );
        let panel = Panel::new(
            vec![Observation {
                industry_code: "151".into(),
                year: 2010,
                k: 4.0,
                l: 1.0,
                v: 1.19,
            }],
            "",
        );
        assert_eq!(
            String::from_utf8(write_panel_csv(&panel)).unwrap(),
            "industry_code,year,K,L,V\n151,2010,4.0,1.0,1.19\n"
        );
    }

    fn positive() -> impl Strategy<Value = f64> {
        prop_oneof![1e-300f64..1e300, 1e-3f64..1e3]
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_exact(
            rows in prop::collection::vec(("[0-9]{3}", 1900i32..=2200, positive(), positive(), positive()), 0..100)
        ) {
            let panel = Panel::new(
                rows.into_iter()
                    .map(|(industry_code, year, k, l, v)| Observation { industry_code, year, k, l, v })
                    .collect(),
                "",
            );
            let back = parse_panel_csv(&write_panel_csv(&panel)).unwrap();
            prop_assert_eq!(back.observations.len(), panel.observations.len());
            for (a, b) in back.observations.iter().zip(&panel.observations) {
                prop_assert_eq!(&a.industry_code, &b.industry_code);
                prop_assert_eq!(a.year, b.year);
                prop_assert_eq!(a.k.to_bits(), b.k.to_bits());
                prop_assert_eq!(a.l.to_bits(), b.l.to_bits());
                prop_assert_eq!(a.v.to_bits(), b.v.to_bits());
            }
        }
    }
}
