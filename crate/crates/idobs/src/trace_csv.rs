//! CSV traces: `#` comment lines carrying the config echo and metrics, one
//! header row, then one row per sample with 17 significant digits.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde_json::Value;

use idobs_core::ode::StateTrace;
use idobs_core::signals::NOISE_GENERATOR;

/// `{:.16e}`: 17 significant digits, enough to round-trip any f64.
fn num(out: &mut String, v: f64) {
    write!(out, "{v:.16e}").expect("writing to a String");
}

pub fn header_row(trace: &StateTrace) -> String {
    let w = trace.width;
    let mut cols = vec![String::from("t")];
    cols.extend((1..=w).map(|i| format!("x{i}")));
    cols.extend((1..=w).map(|i| format!("ref{i}")));
    cols.extend((1..=w).map(|i| format!("e{i}")));
    cols.push("input".into());
    cols.extend(trace.extra_names.iter().cloned());
    cols.join(",")
}

/// Renders the whole file into memory.
pub fn render(trace: &StateTrace, config: &Value, report: &[String]) -> String {
    let mut out = String::with_capacity(64 + trace.len() * (4 + 3 * trace.width + trace.extra_count()) * 25);
    out.push_str("# idobs trace\n");
    writeln!(out, "# version = {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# noise_generator = {NOISE_GENERATOR}").unwrap();
    writeln!(out, "# rows = {}", trace.len()).unwrap();
    out.push_str("# config:\n");
    let pretty = serde_json::to_string_pretty(config).expect("serializing a JSON value");
    for line in pretty.lines() {
        writeln!(out, "#   {line}").unwrap();
    }
    out.push_str("# metrics:\n");
    for line in report {
        writeln!(out, "#   {line}").unwrap();
    }
    out.push_str(&header_row(trace));
    out.push('\n');
    let ne = trace.extra_count();
    for k in 0..trace.len() {
        num(&mut out, trace.times[k]);
        let (x, r) = (trace.state(k), trace.reference(k));
        for v in x.iter().chain(r) {
            out.push(',');
            num(&mut out, *v);
        }
        for (a, b) in x.iter().zip(r) {
            out.push(',');
            num(&mut out, a - b);
        }
        out.push(',');
        num(&mut out, trace.inputs[k]);
        for v in &trace.extras[k * ne..(k + 1) * ne] {
            out.push(',');
            num(&mut out, *v);
        }
        out.push('\n');
    }
    out
}

pub fn write<W: Write>(mut w: W, trace: &StateTrace, config: &Value, report: &[String]) -> io::Result<()> {
    w.write_all(render(trace, config, report).as_bytes())?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use idobs_core::ode::{simulate, FnDynamics, StateOnly, StepScheme};

    #[test]
    fn layout() {
        let mut sys = FnDynamics::new(2, |_t, x: &[f64], out: &mut [f64]| {
            out[0] = x[1];
            out[1] = -x[0];
        });
        let mut tr = simulate(StepScheme::rk4(0.5), &mut sys, 0.0, 1.0, &[1.0, 0.0], &StateOnly(2)).unwrap();
        tr.push_extra("u".into(), &[0.1, 0.2, 0.3]);
        let text = render(&tr, &serde_json::json!({"a": 1}), &["k = 1".into()]);
        let lines: Vec<&str> = text.lines().collect();
        let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[header], "t,x1,x2,ref1,ref2,e1,e2,input,u");
        assert!(lines[..header].contains(&"#   k = 1"));
        let row: Vec<&str> = lines[header + 1].split(',').collect();
        assert_eq!(row.len(), 9);
        assert_eq!(row[0], "0.0000000000000000e0");
        assert_eq!(row[1], "1.0000000000000000e0");
        assert_eq!(row[8], "1.0000000000000001e-1");
        assert_eq!(lines.len(), header + 4);
    }
}
