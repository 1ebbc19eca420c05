//! CSV export of per-step traces.

use std::io::Write;

use crate::datagen::format_decimal;
use crate::error::Result;
use crate::mixture::StepTrace;

/// Writes `t, depth, d, dhat, sqerr, logPlambda, mu_0..mu_D` where `D` is the
/// deepest active leaf in `traces`; shorter rows leave the tail empty.
pub fn write_trace_csv(traces: &[StepTrace], mut out: impl Write) -> Result<()> {
    let width = traces.iter().map(|t| t.mu.len()).max().unwrap_or(1);
    let mut header = vec!["t", "depth", "d", "dhat", "sqerr", "logPlambda"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend((0..width).map(|i| format!("mu_{i}")));
    writeln!(out, "{}", header.join(","))?;
    for tr in traces {
        let mut row = vec![
            tr.t.to_string(),
            tr.depth().to_string(),
            format_decimal(tr.desired),
            format_decimal(tr.prediction),
            format_decimal(tr.squared_error),
            format_decimal(tr.log_p_root_after),
        ];
        row.extend((0..width).map(|i| tr.mu.get(i).map_or(String::new(), |m| format_decimal(*m))));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
