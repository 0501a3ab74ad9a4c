//! Deterministic text output: number formatting, CSV tables and ASCII PGM.

use std::fmt::Write as _;

/// Formats with 12 significant digits, switching to lowercase scientific
/// notation outside `[1e-5, 1e12)`. Trailing zeros are trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Grayscale P2 image: `pixel = round(255 (1 - p))`, darker means more
/// probable. `rows[t][x]` are probabilities in `[0, 1]`.
pub fn pgm(rows: &[Vec<f64>]) -> String {
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|p| {
                // snap float noise so that p = 1/2 maps to one gray level
                let p = (p.clamp(0.0, 1.0) * 1e12).round() / 1e12;
                let v = (255.0 * (1.0 - p)).round() as u8;
                v.to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Long-format CSV of a grid: one `t,x,value` row per cell.
pub fn grid_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = format!("{header}\n");
    for (t, row) in rows.iter().enumerate() {
        for (x, p) in row.iter().enumerate() {
            let _ = writeln!(out, "{t},{x},{}", fmt_num(*p));
        }
    }
    out
}
