//! Human-readable report formatting. Every number goes through [`g6`].

use sdcons::Matrix;

/// C-style `%g` with 6 significant digits.
pub fn g6(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // exponent after rounding to 6 significant digits
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn vec6(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| g6(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn mat6(m: &Matrix) -> String {
    let parts: Vec<String> = m.to_rows().iter().map(|r| vec6(r)).collect();
    format!("[{}]", parts.join(", "))
}

/// Accumulates `key = value` lines.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn num(&mut self, key: &str, x: f64) {
        self.lines.push(format!("{key} = {}", g6(x)));
    }

    pub fn vec(&mut self, key: &str, v: &[f64]) {
        self.lines.push(format!("{key} = {}", vec6(v)));
    }

    pub fn mat(&mut self, key: &str, m: &Matrix) {
        self.lines.push(format!("{key} = {}", mat6(m)));
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::g6;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.0185851, "0.0185851"),
            (0.018585072831951554, "0.0185851"),
            (7.21375344, "7.21375"),
            (-3.68967041, "-3.68967"),
            (1.0, "1"),
            (100000.0, "100000"),
            (1234567.0, "1.23457e+06"),
            (999999.5, "1e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (1.5e-300, "1.5e-300"),
            (-0.5, "-0.5"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(g6(x), want, "{x}");
        }
    }
}
