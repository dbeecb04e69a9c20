//! Line-oriented text format:
//!
//! ```text
//! m=8
//! t=4          (or t=- for non-GSS constellations)
//! name=4D-256-GSS-4
//! x1 x2 x3 x4 <label as m-digit binary string> <pmf>
//! ...          (2^m point lines)
//! ```
//!
//! Reals are written with 18 significant digits so a round trip is lossless.

use std::fmt::Write as _;

use super::{Constellation, ConstellationError};

pub fn serialize(c: &Constellation) -> String {
    let m = c.bits() as usize;
    let mut out = String::new();
    let _ = writeln!(out, "m={}", c.bits());
    match c.shells() {
        Some(t) => {
            let _ = writeln!(out, "t={t}");
        }
        None => out.push_str("t=-\n"),
    }
    let _ = writeln!(out, "name={}", c.name());
    for ((x, &l), p) in c.points().iter().zip(c.labels()).zip(c.pmf()) {
        let _ = writeln!(
            out,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:0width$b} {:.17e}",
            x[0],
            x[1],
            x[2],
            x[3],
            l,
            p,
            width = m
        );
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> ConstellationError {
    ConstellationError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn deserialize(text: &str) -> Result<Constellation, ConstellationError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let mut m: Option<u32> = None;
    let mut t: Option<Option<usize>> = None;
    let mut name: Option<String> = None;

    for _ in 0..3 {
        let (no, line) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(no, "expected key=value header"))?;
        match key.trim() {
            "m" => {
                m = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|_| parse_err(no, format!("bad m {value:?}")))?,
                )
            }
            "t" => {
                let v = value.trim();
                t = Some(if v == "-" {
                    None
                } else {
                    Some(v.parse().map_err(|_| parse_err(no, format!("bad t {v:?}")))?)
                })
            }
            "name" => name = Some(value.to_string()),
            other => return Err(parse_err(no, format!("unknown header key {other:?}"))),
        }
    }
    let (m, t, name) = match (m, t, name) {
        (Some(m), Some(t), Some(name)) => (m, t, name),
        _ => return Err(parse_err(3, "header must define m, t and name")),
    };
    if !(1..=16).contains(&m) {
        return Err(ConstellationError::InvalidBits(m));
    }
    let size = 1usize << m;
    let mut points = Vec::with_capacity(size);
    let mut labels = Vec::with_capacity(size);
    let mut pmf = Vec::with_capacity(size);
    let mut last = 3;
    for (no, line) in lines {
        last = no;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_err(no, format!("expected 6 fields, got {}", fields.len())));
        }
        let mut x = [0.0; 4];
        for (d, f) in fields[..4].iter().enumerate() {
            x[d] = f
                .parse()
                .map_err(|_| parse_err(no, format!("bad coordinate {f:?}")))?;
        }
        let label_str = fields[4];
        if label_str.len() != m as usize || !label_str.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(parse_err(no, format!("label {label_str:?} is not {m} binary digits")));
        }
        let label = u32::from_str_radix(label_str, 2).expect("checked binary");
        let p: f64 = fields[5]
            .parse()
            .map_err(|_| parse_err(no, format!("bad pmf {:?}", fields[5])))?;
        points.push(x);
        labels.push(label);
        pmf.push(p);
        if points.len() > size {
            return Err(parse_err(no, format!("more than {size} points")));
        }
    }
    if points.len() != size {
        return Err(parse_err(
            last,
            format!("expected {size} points, found {}", points.len()),
        ));
    }
    Ok(Constellation::new(name, m, points, labels, pmf)?.with_shells(t))
}
