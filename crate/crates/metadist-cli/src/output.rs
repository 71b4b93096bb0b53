//! Output plumbing: format selection, file-or-stdout sinks, metadata
//! lines, and decimal rendering for plot-ready data columns.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bigdecimal::BigDecimal;
use metadist::dec;

#[derive(Copy, Clone, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Data columns are rounded to this many fractional digits. Working
/// precision often runs to dozens of digits purely to keep the inverse
/// transform stable; the reconstruction itself is only first-order
/// accurate, so plot data gains nothing beyond this.
pub const PLOT_DIGITS: u32 = 12;

/// Full-precision rendering, trailing zeros dropped.
pub fn plain(x: &BigDecimal) -> String {
    x.normalized().to_plain_string()
}

/// Plot-column rendering at [`PLOT_DIGITS`].
pub fn plot(x: &BigDecimal) -> String {
    plain(&dec::round_to(x, PLOT_DIGITS))
}

pub fn with_writer(
    path: Option<&Path>,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
            lock.flush()
        }
    }
}

/// `#`-prefixed metadata block, or nothing when suppressed. The timestamp
/// is the only line that varies between identical runs.
pub fn meta_block(enabled: bool, command: &str, entries: &[(&str, String)]) -> String {
    if !enabled {
        return String::new();
    }
    let mut out = format!("# metadist {command}\n");
    for (key, value) in entries {
        out.push_str(&format!("# {key} = {value}\n"));
    }
    out.push_str(&format!("# generated-at-unix = {}\n", unix_now()));
    out
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_json(w: &mut dyn Write, value: &serde_json::Value) -> io::Result<()> {
    writeln!(w, "{}", serde_json::to_string_pretty(value)?)
}
