//! Parsers for the textual number forms accepted on the command line.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
}

/// Angle in radians or in multiples of π: `0.7`, `0.2pi`, `-pi`, `pi/5`,
/// `3pi/4`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return parse_f64(&t);
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let factor = match head.trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => parse_f64(h.trim_end_matches('*'))?,
    };
    let divisor = match tail.trim() {
        "" => 1.0,
        d => match d.strip_prefix('/') {
            Some(d) => parse_f64(d)?,
            None => return Err(Error::Parse(format!("bad angle `{s}`"))),
        },
    };
    Ok(factor * PI / divisor)
}

/// Complex number: `0.5`, `0.3+0.2i`, `-0.2i`, `i`, `0.3,0.2`, or polar
/// `r@angle` with the angle in [`parse_angle`] syntax.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty complex number".into()));
    }
    if let Some((r, a)) = t.split_once('@') {
        return Ok(Complex64::from_polar(parse_f64(r)?, parse_angle(a)?));
    }
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(parse_f64(&t)?, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            v => parse_f64(v),
        }
    };
    match split {
        Some(k) => Ok(Complex64::new(parse_f64(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Comma-separated list of positive integers, e.g. `100,200,400`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad integer `{p}`: {e}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.7").unwrap(), 0.7);
        assert!((parse_angle("0.2pi").unwrap() - 0.2 * PI).abs() < 1e-15);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert!((parse_angle("pi/5").unwrap() - PI / 5.0).abs() < 1e-15);
        assert!((parse_angle("3pi/4").unwrap() - 0.75 * PI).abs() < 1e-15);
        assert!(parse_angle("pix").is_err());
    }

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.3+0.2i").unwrap(), Complex64::new(0.3, 0.2));
        assert_eq!(parse_complex("0.3-0.2i").unwrap(), Complex64::new(0.3, -0.2));
        assert_eq!(parse_complex("-0.2i").unwrap(), Complex64::new(0.0, -0.2));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("1e-3+2e-3i").unwrap(), Complex64::new(1e-3, 2e-3));
        assert_eq!(parse_complex("0.3, 0.2").unwrap(), Complex64::new(0.3, 0.2));
        let p = parse_complex("1@0.5pi").unwrap();
        assert!((p - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(parse_complex("").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn usize_lists() {
        assert_eq!(parse_usize_list("100, 200,400").unwrap(), vec![100, 200, 400]);
        assert!(parse_usize_list("1,x").is_err());
    }
}
