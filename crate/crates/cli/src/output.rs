//! Output formatting: deterministic CSV / gnuplot tables and helpers.

/// Formats a value with 6 significant digits, round half to even, in plain
/// decimal notation for readable magnitudes and scientific notation for
/// extreme ones. Identical inputs always yield identical text.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.5e}", v);
    let (mant, exp_text) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp_text.parse().expect("numeric exponent");
    if !(-5 < exp && exp < 9) {
        return sci;
    }
    let neg = mant.starts_with('-');
    let digits: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).collect();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(std::str::from_utf8(&digits).unwrap());
            out.push_str(&"0".repeat(int_len - digits.len()));
        } else {
            out.push_str(std::str::from_utf8(&digits[..int_len]).unwrap());
            out.push('.');
            out.push_str(std::str::from_utf8(&digits[int_len..]).unwrap());
        }
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(std::str::from_utf8(&digits).unwrap());
    }
    out
}

/// A rendered table of formatted cells.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_gnuplot(&self) -> String {
        let mut out = format!("# {}\n", self.headers.join(" "));
        for row in &self.rows {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
