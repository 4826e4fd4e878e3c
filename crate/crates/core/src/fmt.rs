//! Number formatting shared by reports and the CLI.

/// Formats `x` with six significant digits, `%g` style but keeping trailing
/// zeros: fixed notation for exponents in `[-5, 6)`, scientific otherwise.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    // Round once in scientific form so a carry (9.999996 -> 1.00000e1)
    // is reflected in the exponent used to pick the layout.
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let rounded: f64 = sci.parse().expect("round-trips");
        format!("{rounded:.decimals$}")
    } else {
        format!("{mantissa}e{exp}")
    }
}
