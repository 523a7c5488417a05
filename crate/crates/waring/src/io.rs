//! Line-oriented text formats: tensors, decompositions, finite-field
//! certificates and parameter files. Parsing is whitespace-tolerant;
//! emission is deterministic with 17 significant digits in graded-lex order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::ff::FfCertificate;
use crate::hankel::MomentAssignment;
use crate::linalg::{c, C64};
use crate::tensor::{Decomposition, PointSet, SymTensor};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Complex scalar as `re+imi`.
fn fmt_c(v: C64) -> String {
    format!("{:.16e}{:+.16e}i", v.re, v.im)
}

/// Parses `re+imi`, also accepting a bare real part.
fn parse_c(token: &str, line: usize) -> Result<C64> {
    let t = token.trim();
    if let Some(stripped) = t.strip_suffix('i') {
        // split at the sign of the imaginary part, skipping exponent signs
        let bytes = stripped.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let k = split.ok_or_else(|| parse_err(line, format!("malformed complex `{t}`")))?;
        let re: f64 = stripped[..k]
            .parse()
            .map_err(|_| parse_err(line, format!("bad real part in `{t}`")))?;
        let im: f64 = stripped[k..]
            .parse()
            .map_err(|_| parse_err(line, format!("bad imaginary part in `{t}`")))?;
        Ok(c(re, im))
    } else {
        let re: f64 = t
            .parse()
            .map_err(|_| parse_err(line, format!("bad number `{t}`")))?;
        Ok(c(re, 0.0))
    }
}

fn header_kv(token: &str, key: &str, line: usize) -> Result<usize> {
    token
        .strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(line, format!("expected `{key}=<int>`, found `{token}`")))
}

/// `symtensor n=<n> d=<d>` then one `<a1> .. <an> : <re> <im>` line per
/// nonzero coefficient.
pub fn write_tensor(phi: &SymTensor) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "symtensor n={} d={}", phi.n(), phi.d());
    for (e, v) in phi.nonzero() {
        let parts: Vec<String> = e.0.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            "{} : {} {}",
            parts.join(" "),
            fmt_f64(v.re),
            fmt_f64(v.im)
        );
    }
    out
}

pub fn read_tensor(text: &str) -> Result<SymTensor> {
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "symtensor" {
        return Err(parse_err(
            hline + 1,
            "expected header `symtensor n=<n> d=<d>`",
        ));
    }
    let n = header_kv(toks[1], "n", hline + 1)?;
    let d = header_kv(toks[2], "d", hline + 1)? as u32;
    if n == 0 {
        return Err(parse_err(hline + 1, "need n >= 1"));
    }
    let mut phi = SymTensor::zeros(n, d);
    for (lno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once(':')
            .ok_or_else(|| parse_err(lno + 1, "expected `<exponents> : <re> <im>`"))?;
        let exps: Vec<u32> = lhs
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(lno + 1, format!("bad exponent `{t}`")))
            })
            .collect::<Result<_>>()?;
        if exps.len() != n {
            return Err(parse_err(lno + 1, format!("expected {n} exponents")));
        }
        let vals: Vec<&str> = rhs.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(parse_err(lno + 1, "expected `<re> <im>` after `:`"));
        }
        let re: f64 = vals[0]
            .parse()
            .map_err(|_| parse_err(lno + 1, format!("bad real part `{}`", vals[0])))?;
        let im: f64 = vals[1]
            .parse()
            .map_err(|_| parse_err(lno + 1, format!("bad imaginary part `{}`", vals[1])))?;
        let e = Exponent(exps);
        if e.size() > d {
            return Err(parse_err(
                lno + 1,
                format!("exponent of size {} exceeds d={d}", e.size()),
            ));
        }
        phi.set(&e, c(re, im));
    }
    Ok(phi)
}

/// `decomposition n=<n> s=<s>` then per point `<z0> .. <zn> : <re> <im>`
/// with complex coordinates written as `re+imi`.
pub fn write_decomposition(dec: &Decomposition) -> String {
    let mut out = String::new();
    let n = dec.points.n();
    let _ = writeln!(out, "decomposition n={} s={}", n, dec.size());
    for i in 0..dec.size() {
        let coords: Vec<String> = (0..=n).map(|j| fmt_c(dec.points.mat[(i, j)])).collect();
        let w = dec.weights[i];
        let _ = writeln!(
            out,
            "{} : {} {}",
            coords.join(" "),
            fmt_f64(w.re),
            fmt_f64(w.im)
        );
    }
    out
}

pub fn read_decomposition(text: &str) -> Result<Decomposition> {
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 || toks[0] != "decomposition" {
        return Err(parse_err(
            hline + 1,
            "expected header `decomposition n=<n> s=<s>`",
        ));
    }
    let n = header_kv(toks[1], "n", hline + 1)?;
    let s = header_kv(toks[2], "s", hline + 1)?;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut weights = Vec::new();
    for (lno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once(':')
            .ok_or_else(|| parse_err(lno + 1, "expected `<coords> : <re> <im>`"))?;
        let coords: Vec<C64> = lhs
            .split_whitespace()
            .map(|t| parse_c(t, lno + 1))
            .collect::<Result<_>>()?;
        if coords.len() != n + 1 {
            return Err(parse_err(
                lno + 1,
                format!("expected {} coordinates", n + 1),
            ));
        }
        let vals: Vec<&str> = rhs.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(parse_err(lno + 1, "expected `<re> <im>` after `:`"));
        }
        let re: f64 = vals[0]
            .parse()
            .map_err(|_| parse_err(lno + 1, "bad weight real part"))?;
        let im: f64 = vals[1]
            .parse()
            .map_err(|_| parse_err(lno + 1, "bad weight imaginary part"))?;
        rows.push(coords);
        weights.push(c(re, im));
    }
    if rows.len() != s {
        return Err(parse_err(
            0,
            format!("expected {s} points, found {}", rows.len()),
        ));
    }
    let mat = nalgebra::DMatrix::from_fn(rows.len(), n + 1, |i, j| rows[i][j]);
    Ok(Decomposition {
        points: PointSet::new(mat),
        weights,
    })
}

/// `ffcert v1`, `p=<p> n=<n> r=<r>`, one integer row per point, then
/// `rank=<k> columns=<cols>`.
pub fn write_ffcert(cert: &FfCertificate) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ffcert v1");
    let _ = writeln!(out, "p={} n={} r={}", cert.p, cert.n, cert.r);
    for row in &cert.points {
        let parts: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", parts.join(" "));
    }
    let _ = writeln!(out, "rank={} columns={}", cert.rank, cert.columns);
    out
}

pub fn read_ffcert(text: &str) -> Result<FfCertificate> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if lines.len() < 3 {
        return Err(parse_err(1, "truncated certificate"));
    }
    if lines[0].1.trim() != "ffcert v1" {
        return Err(parse_err(lines[0].0 + 1, "expected `ffcert v1`"));
    }
    let toks: Vec<&str> = lines[1].1.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(parse_err(lines[1].0 + 1, "expected `p=<p> n=<n> r=<r>`"));
    }
    let p = header_kv(toks[0], "p", lines[1].0 + 1)? as u64;
    let n = header_kv(toks[1], "n", lines[1].0 + 1)?;
    let r = header_kv(toks[2], "r", lines[1].0 + 1)?;
    if lines.len() != 3 + r {
        return Err(parse_err(
            lines[1].0 + 1,
            format!("expected {r} point rows plus a rank line"),
        ));
    }
    let mut points = Vec::with_capacity(r);
    for (lno, raw) in &lines[2..2 + r] {
        let row: Vec<u64> = raw
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(lno + 1, format!("bad residue `{t}`")))
            })
            .collect::<Result<_>>()?;
        if row.len() != n + 1 {
            return Err(parse_err(lno + 1, format!("expected {} residues", n + 1)));
        }
        points.push(row);
    }
    let (lno, last) = lines[2 + r];
    let toks: Vec<&str> = last.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(lno + 1, "expected `rank=<k> columns=<cols>`"));
    }
    let rank = header_kv(toks[0], "rank", lno + 1)?;
    let columns = header_kv(toks[1], "columns", lno + 1)?;
    Ok(FfCertificate {
        p,
        n,
        r,
        points,
        rank,
        columns,
    })
}

/// Parameter file for the monomial path: one `<a1> .. <an> : <re> <im>` line
/// per free parameter.
pub fn read_params(text: &str, n: usize) -> Result<MomentAssignment> {
    let mut a = MomentAssignment::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (lhs, rhs) = line
            .split_once(':')
            .ok_or_else(|| parse_err(lno + 1, "expected `<exponents> : <re> <im>`"))?;
        let exps: Vec<u32> = lhs
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(lno + 1, format!("bad exponent `{t}`")))
            })
            .collect::<Result<_>>()?;
        if exps.len() != n {
            return Err(parse_err(lno + 1, format!("expected {n} exponents")));
        }
        let vals: Vec<&str> = rhs.split_whitespace().collect();
        if vals.len() != 2 {
            return Err(parse_err(lno + 1, "expected `<re> <im>` after `:`"));
        }
        let re: f64 = vals[0]
            .parse()
            .map_err(|_| parse_err(lno + 1, "bad real part"))?;
        let im: f64 = vals[1]
            .parse()
            .map_err(|_| parse_err(lno + 1, "bad imaginary part"))?;
        a.set(Exponent(exps), c(re, im));
    }
    Ok(a)
}

/// Explicit basis file: one `<a1> .. <an>` exponent row per basis element.
pub fn read_basis(text: &str, n: usize) -> Result<Vec<Exponent>> {
    let mut out = Vec::new();
    for (lno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let exps: Vec<u32> = line
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| parse_err(lno + 1, format!("bad exponent `{t}`")))
            })
            .collect::<Result<_>>()?;
        if exps.len() != n {
            return Err(parse_err(lno + 1, format!("expected {n} exponents")));
        }
        out.push(Exponent(exps));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_instance, tensor_from_points};

    #[test]
    fn tensor_round_trip() {
        let (points, weights) = random_instance(3, 4, 5);
        let t = tensor_from_points(&points, &weights, 4).unwrap();
        let text = write_tensor(&t);
        let back = read_tensor(&text).unwrap();
        assert_eq!((back.n(), back.d()), (3, 4));
        assert!(t.relative_distance(&back) < 1e-15);
        // emission is deterministic
        assert_eq!(text, write_tensor(&back));
    }

    #[test]
    fn tensor_parse_is_whitespace_tolerant() {
        let text = "symtensor   n=1  d=6\n\n  1   :  1.0   0\n 2 : 1 0\n";
        let t = read_tensor(text).unwrap();
        assert_eq!(t.coeff(&Exponent(vec![1])), c(1.0, 0.0));
        assert_eq!(t.coeff(&Exponent(vec![2])), c(1.0, 0.0));
    }

    #[test]
    fn tensor_parse_errors_name_the_line() {
        let bad = "symtensor n=2 d=4\n1 0 : 1.0 0.0\noops\n";
        match read_tensor(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(read_tensor("nonsense"), Err(Error::Parse { .. })));
    }

    #[test]
    fn decomposition_round_trip() {
        let (points, weights) = random_instance(2, 3, 9);
        let dec = Decomposition { points, weights };
        let text = write_decomposition(&dec);
        let back = read_decomposition(&text).unwrap();
        assert_eq!(back.size(), 3);
        for i in 0..3 {
            for j in 0..=2 {
                assert!((back.points.mat[(i, j)] - dec.points.mat[(i, j)]).norm() < 1e-15);
            }
            assert!((back.weights[i] - dec.weights[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn complex_token_forms() {
        assert_eq!(parse_c("1+2i", 1).unwrap(), c(1.0, 2.0));
        assert_eq!(parse_c("-1.5e0-2.25e0i", 1).unwrap(), c(-1.5, -2.25));
        assert_eq!(parse_c("3.25", 1).unwrap(), c(3.25, 0.0));
        assert!(parse_c("bogus i", 1).is_err());
    }

    #[test]
    fn ffcert_round_trip() {
        let cert = FfCertificate {
            p: 101,
            n: 2,
            r: 3,
            points: vec![vec![1, 5, 7], vec![1, 2, 9], vec![1, 0, 3]],
            rank: 2,
            columns: 2,
        };
        let text = write_ffcert(&cert);
        let back = read_ffcert(&text).unwrap();
        assert_eq!(back.p, 101);
        assert_eq!(back.points, cert.points);
        assert_eq!((back.rank, back.columns), (2, 2));
    }
}
