//! Number formatting for reports and CSV output: nine significant digits,
//! scientific notation for small magnitudes.

pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if !(1e-3..1e9).contains(&a) {
        return format!("{x:.8e}");
    }
    let magnitude = a.log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding can carry into an extra digit (9.9999999995 -> 10.00000000).
    if s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > 9 && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

/// Angle with the literal aliases used on the command line.
pub fn angle(theta: f64) -> String {
    use std::f64::consts::PI;
    for (den, label) in [(4.0, "pi/4"), (3.0, "pi/3"), (2.0, "pi/2")] {
        if (theta - PI / den).abs() < 1e-12 {
            return label.into();
        }
    }
    num(theta)
}
