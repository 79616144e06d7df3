//! Exact percent values.
//!
//! Thresholds and confidences are carried as `Ratio<u64>` percents so that
//! boundary comparisons never go through floating point. Text forms allow at
//! most two decimal places, i.e. whole basis points.

use num_rational::Ratio;

/// Parse a percent with up to two decimal places into an exact rational.
///
/// `"60"`, `"60.5"` and `"60.55"` are accepted; more than two decimals or
/// anything non-numeric is rejected. Values above 100 are allowed here;
/// callers with a narrower domain check their own bounds.
pub fn parse(text: &str) -> Result<Ratio<u64>, String> {
    let text = text.trim();
    let bad = || format!("invalid percent {text:?} (expected a number with at most 2 decimals)");
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() || frac_part.len() > 2 {
        return Err(bad());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let whole: u64 = int_part.parse().map_err(|_| bad())?;
    let frac: u64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    let scale = 10u64.pow(frac_part.len() as u32);
    Ok(Ratio::new(whole * scale + frac, scale))
}

/// Render a non-negative rational with `places` decimal digits, rounding
/// half-up. Used for the 2-decimal confidence columns and the 4-decimal
/// density column.
pub fn format_ratio(value: Ratio<u64>, places: u32) -> String {
    let scale = 10u64.pow(places);
    // floor(value * scale + 1/2), all in integers
    let scaled = (value.numer() * scale * 2 + value.denom()) / (2 * value.denom());
    if places == 0 {
        return scaled.to_string();
    }
    format!("{}.{:0width$}", scaled / scale, scaled % scale, width = places as usize)
}

/// Percent with two decimals, the form used in every output file.
pub fn format(value: Ratio<u64>) -> String {
    format_ratio(value, 2)
}
