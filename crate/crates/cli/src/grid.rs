//! Grid syntax: `v1,v2,...` or `start:step:stop` (stop included when it
//! falls on the grid).

use crate::error::{CliError, Result};

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| CliError::Usage(format!("grid `{text}`: {what}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("`{}` is not a number", s.trim())))
    };
    let values = match text.split(':').collect::<Vec<_>>()[..] {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !(stop >= start) {
                return Err(bad("needs step > 0 and stop >= start"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                return Err(bad("more than 100000 points"));
            }
            (0..=n).map(|i| start + step * i as f64).collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<f64>>>()?,
        _ => return Err(bad("expected `a,b,c` or `start:step:stop`")),
    };
    if values.is_empty() {
        return Err(bad("empty"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(bad("values must be strictly increasing"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

/// `key=grid`.
pub fn parse_axis(text: &str) -> Result<(String, Vec<f64>)> {
    let (key, grid) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("axis `{text}` must look like key=grid")))?;
    Ok((key.trim().to_string(), parse_grid(grid)?))
}

/// `key=value` for `--set`.
pub fn parse_assignment(text: &str) -> Result<(String, String)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| CliError::Usage(format!("`{text}` must look like key=value")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_stop() {
        assert_eq!(
            parse_grid("0:5:20").unwrap(),
            vec![0.0, 5.0, 10.0, 15.0, 20.0]
        );
        assert_eq!(parse_grid("-10:2.5:20").unwrap().len(), 13);
    }

    #[test]
    fn list_must_increase() {
        assert_eq!(parse_grid("1.5, 50,100").unwrap(), vec![1.5, 50.0, 100.0]);
        assert!(parse_grid("1,1").is_err());
        assert!(parse_grid("3,2").is_err());
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:0:5").is_err());
    }

    #[test]
    fn axis_and_assignment() {
        let (k, v) = parse_axis("antenna.tilt_deg=0:10:20").unwrap();
        assert_eq!(k, "antenna.tilt_deg");
        assert_eq!(v, vec![0.0, 10.0, 20.0]);
        assert!(parse_axis("tilt").is_err());
        assert_eq!(
            parse_assignment("h_u = 50").unwrap(),
            ("h_u".into(), "50".into())
        );
    }
}
