//! Value syntax shared by the subcommands.
//!
//! Scalars: `1.5`, `-2e-3`, `inf`, `pi`, `π`, `2π`, `-π/2`, `1/3`.
//! Ranges: `lo..hi/N` is `N` equal steps, `N + 1` points including both ends;
//! `a..b` over integers is inclusive. Lists are comma separated.

use std::f64::consts::PI;

pub fn scalar(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if t.is_empty() {
        return Err("empty number".into());
    }
    if let Some((num, den)) = t.split_once('/') {
        let d = scalar(den)?;
        if d == 0.0 {
            return Err(format!("division by zero in '{s}'"));
        }
        return Ok(scalar(num)? / d);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let pi_suffix = ["π", "pi"].iter().find_map(|p| body.strip_suffix(p));
    let value = match pi_suffix {
        Some("") => PI,
        Some(coef) => coef.trim_end_matches('*').parse::<f64>().map_err(|_| format!("bad number '{s}'"))? * PI,
        None => body.parse::<f64>().map_err(|_| format!("bad number '{s}'"))?,
    };
    if value.is_nan() {
        return Err(format!("'{s}' is not a number"));
    }
    Ok(sign * value)
}

pub fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(scalar).collect()
}

/// A list of scalars and ranges, e.g. `0,0.5..1/5,3`.
pub fn grid(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            None => out.push(scalar(part)?),
            Some((lo, rest)) => {
                let (hi, steps) = rest.rsplit_once('/').ok_or_else(|| format!("range '{part}' needs a step count, as in lo..hi/N"))?;
                let steps: usize = steps.trim().parse().map_err(|_| format!("bad step count in '{part}'"))?;
                if steps == 0 {
                    return Err(format!("range '{part}' needs at least one step"));
                }
                let (lo, hi) = (scalar(lo)?, scalar(hi)?);
                out.extend((0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64));
            }
        }
    }
    Ok(out)
}

pub fn int_range(s: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            None => out.push(part.trim().parse().map_err(|_| format!("bad integer '{part}'"))?),
            Some((lo, hi)) => {
                let lo: i64 = lo.trim().parse().map_err(|_| format!("bad integer '{lo}'"))?;
                let hi: i64 = hi.trim().trim_start_matches('=').parse().map_err(|_| format!("bad integer '{hi}'"))?;
                if hi < lo {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(lo..=hi);
            }
        }
    }
    Ok(out)
}

/// Complex number `a`, `a+bi`, `a-bi`, `bi`.
pub fn complex(s: &str) -> Result<(f64, f64), String> {
    let t = s.trim();
    let Some(body) = t.strip_suffix('i') else {
        return Ok((scalar(t)?, 0.0));
    };
    // Split at the last sign that is not an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (scalar(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => scalar(other)?,
    };
    Ok((re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        assert_eq!(scalar("2π").unwrap(), 2.0 * PI);
        assert_eq!(scalar("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(scalar("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(scalar("inf").unwrap(), f64::INFINITY);
        assert!(scalar("x").is_err());
        assert!(scalar("1/0").is_err());
    }

    #[test]
    fn ranges() {
        let g = grid("0..2π/64").unwrap();
        assert_eq!(g.len(), 65);
        assert_eq!(g[64], 2.0 * PI);
        assert_eq!(grid("1,2..3/2").unwrap(), vec![1.0, 2.0, 2.5, 3.0]);
        assert!(grid("0..1").is_err());
        assert_eq!(int_range("-3..3").unwrap(), vec![-3, -2, -1, 0, 1, 2, 3]);
        assert_eq!(int_range("1,4").unwrap(), vec![1, 4]);
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(complex("1-2i").unwrap(), (1.0, -2.0));
        assert_eq!(complex("-i").unwrap(), (0.0, -1.0));
        assert_eq!(complex("0.5").unwrap(), (0.5, 0.0));
        assert_eq!(complex("1e-3+1e-2i").unwrap(), (1e-3, 1e-2));
    }
}
