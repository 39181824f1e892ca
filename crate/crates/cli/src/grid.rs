//! Grid specs: `x0,y0:x1,y1:n` is n points on the segment from x0+iy0 to
//! x1+iy1 (ends included); `x0,y0:x1,y1:nx,ny` is the nx×ny rectangle with
//! those corners, real part varying fastest.

use num_complex::Complex64;

use crate::document::{Probes, Scalar};
use crate::error::CliError;

fn bad(spec: &str, why: &str) -> CliError {
    CliError::Input(format!("bad grid spec `{spec}`: {why}"))
}

fn numbers<T: std::str::FromStr>(spec: &str, part: &str) -> Result<Vec<T>, CliError> {
    part.split(',').map(|s| s.trim().parse::<T>().map_err(|_| bad(spec, &format!("cannot read `{s}`")))).collect()
}

fn corner(spec: &str, part: &str) -> Result<(f64, f64), CliError> {
    match numbers::<f64>(spec, part)?[..] {
        [x, y] if x.is_finite() && y.is_finite() => Ok((x, y)),
        _ => Err(bad(spec, "corners are `x,y`")),
    }
}

fn steps(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub fn parse_grid(spec: &str) -> Result<Vec<Complex64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [p0, p1, counts] = parts[..] else {
        return Err(bad(spec, "expected three `:`-separated parts"));
    };
    let (x0, y0) = corner(spec, p0)?;
    let (x1, y1) = corner(spec, p1)?;
    let counts = numbers::<usize>(spec, counts)?;
    if counts.iter().any(|&n| n == 0) {
        return Err(bad(spec, "counts must be positive"));
    }
    match counts[..] {
        [n] => Ok(steps(0.0, 1.0, n).into_iter().map(|s| Complex64::new(x0 + s * (x1 - x0), y0 + s * (y1 - y0))).collect()),
        [nx, ny] => {
            let xs = steps(x0, x1, nx);
            Ok(steps(y0, y1, ny).into_iter().flat_map(|y| xs.iter().map(move |&x| Complex64::new(x, y))).collect())
        }
        _ => Err(bad(spec, "expected `n` or `nx,ny`")),
    }
}

pub fn scalar(s: &Scalar) -> Complex64 {
    Complex64::new(s[0], s[1])
}

pub fn resolve(probes: &Probes) -> Result<Vec<Complex64>, CliError> {
    let out = match probes {
        Probes::Points(p) => p.iter().map(scalar).collect(),
        Probes::Grid(spec) => parse_grid(spec)?,
    };
    if out.is_empty() {
        return Err(CliError::Input("empty probe set".into()));
    }
    Ok(out)
}
