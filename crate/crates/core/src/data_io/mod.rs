//! Panel CSV, synthetic panels with known parameters, and JSON report documents.

mod panel;
mod report;
mod synth;

pub use panel::{parse_panel_csv, write_panel_csv, CsvError, Observation, Panel, PANEL_HEADER};
pub use report::{
    fit_document, read_report_json, write_report_json, FitReport, ReportDocument, ReportError,
    ReportKind, SCHEMA_VERSION,
};
pub use synth::{synth_panel, SynthError, SynthSpec};
