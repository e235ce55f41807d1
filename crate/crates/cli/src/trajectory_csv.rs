//! Trajectory CSV: header `t,x1..xn,lam1..lamn,u1..um`, one row per node,
//! values with 17 significant digits.

use std::io::{Read, Write};

use nalgebra::DVector;
use turnpike_core::Extremal;

use crate::error::{CliError, Result};

pub fn header(n: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend((1..=n).map(|i| format!("lam{i}")));
    h.extend((1..=m).map(|i| format!("u{i}")));
    h
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write<W: Write>(e: &Extremal, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(e.n(), e.m()))?;
    for i in 0..e.t.len() {
        let row = std::iter::once(e.t[i])
            .chain(e.x[i].iter().copied())
            .chain(e.lambda[i].iter().copied())
            .chain(e.u[i].iter().copied())
            .map(fmt);
        w.write_record(row)?;
    }
    w.flush().map_err(|e| CliError::io("<csv output>", e))?;
    Ok(())
}

pub fn to_string(e: &Extremal) -> Result<String> {
    let mut buf = Vec::new();
    write(e, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Parses a trajectory CSV. The multiplier and the solver statistics are not
/// part of the format: `gamma` comes back empty and `boundary_residual` as NaN.
pub fn read<R: Read>(input: R) -> Result<Extremal> {
    let mut r = csv::Reader::from_reader(input);
    let cols: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let count = |prefix: &str| {
        cols.iter()
            .filter(|c| c.strip_prefix(prefix).is_some_and(|rest| rest.parse::<usize>().is_ok()))
            .count()
    };
    let (n, m) = (count("x"), count("u"));
    if n == 0 || m == 0 || cols != header(n, m) {
        return Err(CliError::Trajectory(format!(
            "header {cols:?} does not match t,x1..xn,lam1..lamn,u1..um"
        )));
    }
    let mut e = Extremal {
        t: Vec::new(),
        x: Vec::new(),
        lambda: Vec::new(),
        u: Vec::new(),
        gamma: DVector::zeros(0),
        boundary_residual: f64::NAN,
        iterations: 0,
    };
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|err| CliError::Trajectory(format!("row {}: {err}", line + 1)))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Trajectory(format!("row {}: non-finite value", line + 1)));
        }
        e.t.push(values[0]);
        e.x.push(DVector::from_column_slice(&values[1..1 + n]));
        e.lambda.push(DVector::from_column_slice(&values[1 + n..1 + 2 * n]));
        e.u.push(DVector::from_column_slice(&values[1 + 2 * n..]));
    }
    if e.t.len() < 2 {
        return Err(CliError::Trajectory("need at least two rows".into()));
    }
    if e.t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Trajectory("time column is not increasing".into()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(n: usize, m: usize, steps: usize, seed: f64) -> Extremal {
        let t = Extremal::uniform_grid(3.0, steps);
        let f = |k: usize, i: usize, j: usize| ((k * 31 + i * 7 + j) as f64 * seed).sin() * 1e3;
        Extremal {
            x: (0..=steps).map(|i| DVector::from_fn(n, |j, _| f(0, i, j))).collect(),
            lambda: (0..=steps).map(|i| DVector::from_fn(n, |j, _| f(1, i, j))).collect(),
            u: (0..=steps).map(|i| DVector::from_fn(m, |j, _| f(2, i, j))).collect(),
            t,
            gamma: DVector::zeros(0),
            boundary_residual: f64::NAN,
            iterations: 0,
        }
    }

    #[test]
    fn header_layout() {
        assert_eq!(header(2, 1).join(","), "t,x1,x2,lam1,lam2,u1");
        let text = to_string(&sample(2, 1, 4, 0.3)).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("t,x1,x2,lam1,lam2,u1\n0.0000000000000000e0,"));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read("t,x1,u1\n0,1,2\n1,1,2\n".as_bytes()).is_err());
        assert!(read("t,x1,lam1,u1\n0,1,2,3\n".as_bytes()).is_err());
        assert!(read("t,x1,lam1,u1\n0,1,2,3\n0,1,2,3\n".as_bytes()).is_err());
        assert!(read("t,x1,lam1,u1\n0,1,2,3\n1,1,abc,3\n".as_bytes()).is_err());
        assert!(read("t,x1,lam1,u1\n0,1,2,3\n1,1,NaN,3\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(n in 1usize..5, m in 1usize..3, steps in 2usize..20, seed in 0.01f64..10.0) {
            let e = sample(n, m, steps, seed);
            let back = read(to_string(&e).unwrap().as_bytes()).unwrap();
            prop_assert_eq!(&back.t, &e.t);
            prop_assert_eq!(&back.x, &e.x);
            prop_assert_eq!(&back.lambda, &e.lambda);
            prop_assert_eq!(&back.u, &e.u);
        }
    }
}
