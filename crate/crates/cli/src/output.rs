use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::CliError;

/// `%.12g`: twelve significant digits, trailing zeros dropped, exponent
/// form outside `1e-5 <= |x| < 1e12`.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct Csv {
    out: Box<dyn Write>,
}

impl Csv {
    pub fn open(path: Option<&Path>, header: &[&str]) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", p.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut csv = Csv { out };
        csv.line(header.iter().map(|s| s.to_string()))?;
        Ok(csv)
    }

    pub fn line(&mut self, fields: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let fields: Vec<String> = fields.into_iter().collect();
        writeln!(self.out, "{}", fields.join(",")).map_err(CliError::Io)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(CliError::Io)
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(CliError::Io)?;
            out.flush().map_err(CliError::Io)
        }
    }
}
