//! Grid syntax: `a:b:step` (inclusive) or a comma list; a single value is a one-point grid.

use crate::CliError;

/// Longest run-away grid accepted before assuming a typo.
const MAX_POINTS: usize = 1_000_000;

fn decimals(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    mantissa.split_once('.').map_or(0, |(_, frac)| frac.len())
}

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Usage(format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// Real-valued grid. Range points are rounded to the decimal precision of the
/// inputs so `0:1:0.1` yields 0.3 rather than 0.30000000000000004.
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (number(start)?, number(stop)?, number(step)?);
            if !(h > 0.0) || b < a {
                return Err(CliError::Usage(format!(
                    "range '{spec}' needs start <= stop and a positive step"
                )));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > MAX_POINTS {
                return Err(CliError::Usage(format!("range '{spec}' has too many points")));
            }
            let places = decimals(start).max(decimals(stop)).max(decimals(step));
            (0..count)
                .map(|i| number(&format!("{:.*}", places, a + i as f64 * h)))
                .collect()
        }
        [_] => spec.split(',').map(number).collect(),
        _ => Err(CliError::Usage(format!("cannot parse grid '{spec}'"))),
    }
}

/// Integer grid with the same syntax.
pub fn parse_int_grid(spec: &str) -> Result<Vec<i64>, CliError> {
    let spec = spec.trim();
    let int = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| CliError::Usage(format!("'{s}' is not an integer")))
    };
    if spec.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (int(start)?, int(stop)?, int(step)?);
            if h <= 0 || b < a {
                return Err(CliError::Usage(format!(
                    "range '{spec}' needs start <= stop and a positive step"
                )));
            }
            if ((b - a) / h) as usize >= MAX_POINTS {
                return Err(CliError::Usage(format!("range '{spec}' has too many points")));
            }
            Ok((a..=b).step_by(h as usize).collect())
        }
        [_] => spec.split(',').map(int).collect(),
        _ => Err(CliError::Usage(format!("cannot parse grid '{spec}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_real_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_real_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_real_grid("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_real_grid("0:2:0.05").unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[6], 0.3);
        assert_eq!(g[40], 2.0);
        assert_eq!(parse_int_grid("2:10:2").unwrap(), vec![2, 4, 6, 8, 10]);
        assert_eq!(parse_int_grid("2,4,7").unwrap(), vec![2, 4, 7]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "a", "1:0:0.1", "0:1:0", "0:1", "0:1:2:3", "1,nan"] {
            assert!(parse_real_grid(bad).is_err(), "{bad}");
        }
        for bad in ["", "2.5", "4:2:1", "1:9:-1"] {
            assert!(parse_int_grid(bad).is_err(), "{bad}");
        }
    }
}
