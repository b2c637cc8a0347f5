//! Sweep tables and their CSV form.

use std::io::Write;

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Analytic,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "mc",
        }
    }
}

/// Quantity measured by a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    WeakOutage,
    StrongOutage,
    WeakOmaOutage,
    StrongOmaOutage,
    NomaSumRate,
    OmaSumRate,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::WeakOutage,
        Quantity::StrongOutage,
        Quantity::WeakOmaOutage,
        Quantity::StrongOmaOutage,
        Quantity::NomaSumRate,
        Quantity::OmaSumRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::WeakOutage => "weak_outage",
            Quantity::StrongOutage => "strong_outage",
            Quantity::WeakOmaOutage => "weak_oma_outage",
            Quantity::StrongOmaOutage => "strong_oma_outage",
            Quantity::NomaSumRate => "noma_sum_rate",
            Quantity::OmaSumRate => "oma_sum_rate",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::NomaSumRate | Quantity::OmaSumRate => "BPCU",
            _ => "probability",
        }
    }

    pub fn is_outage(self) -> bool {
        !matches!(self, Quantity::NomaSumRate | Quantity::OmaSumRate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub power_dbm: f64,
    pub metric: String,
    pub unit: &'static str,
    pub value: f64,
    pub stderr: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<Row>,
}

pub const COLUMNS: [&str; 6] = ["power_dbm", "metric", "unit", "value", "stderr", "provenance"];
pub const UNITS: [&str; 6] = ["dBm", "-", "-", "see unit", "see unit", "-"];

impl SweepTable {
    /// RFC 4180 CSV with a names line and a units line.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(writer);
        w.write_record(COLUMNS)?;
        w.write_record(UNITS)?;
        for row in &self.rows {
            w.write_record([
                row.power_dbm.to_string(),
                row.metric.clone(),
                row.unit.to_string(),
                row.value.to_string(),
                row.stderr.map(|s| s.to_string()).unwrap_or_default(),
                row.provenance.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Rows of `metric` with the given provenance, in grid order.
    pub fn series(&self, metric: &str, provenance: Provenance) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.metric == metric && r.provenance == provenance).collect()
    }
}
