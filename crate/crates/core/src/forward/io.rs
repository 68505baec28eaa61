//! Plain-text data formats.
//!
//! Far-field files:
//!
//! ```text
//! QIFF1 k=<float> nobs=<int> ninc=<int> delta=<float> seed=<int> [provenance=<tag>] [sha256=<hex>]
//! <observation angles, comma separated>
//! <incidence angles, comma separated>
//! <nobs lines of ninc comma-separated re:im pairs>
//! ```
//!
//! Cauchy files use the header
//! `QICD1 k=<float> m=<int> radius=<float> cx=<float> cy=<float> direction=<float>`,
//! then one line of node angles and `m` lines `u_re:u_im,dudn_re:dudn_im`.
//! The optional `sha256` field covers every byte after the header line.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use super::{CauchyData, FarFieldData, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{make_direction_set, Aperture, Direction, DirectionSet, Point};

fn fmt_c(v: &Complex64) -> String {
    format!("{:e}:{:e}", v.re, v.im)
}

fn join_angles(a: &[f64]) -> String {
    a.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn write_farfield(data: &FarFieldData) -> String {
    let mut body = String::new();
    body.push_str(&join_angles(&data.observation.angles()));
    body.push('\n');
    body.push_str(&join_angles(&data.incidence.angles()));
    body.push('\n');
    for row in data.matrix.row_iter() {
        let line: Vec<String> = row.iter().map(fmt_c).collect();
        body.push_str(&line.join(","));
        body.push('\n');
    }
    format!(
        "QIFF1 k={:e} nobs={} ninc={} delta={:e} seed={} provenance={} sha256={}\n{}",
        data.k,
        data.observation.len(),
        data.incidence.len(),
        data.noise_level,
        data.seed,
        data.provenance.tag(),
        digest(&body),
        body
    )
}

fn parse_header<'a>(line: &'a str, magic: &str) -> Result<BTreeMap<&'a str, &'a str>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(fmt_err(format!("expected {magic} header")));
    }
    parts
        .map(|p| {
            p.split_once('=')
                .ok_or_else(|| fmt_err(format!("malformed header field '{p}'")))
        })
        .collect()
}

fn field<T: std::str::FromStr>(h: &BTreeMap<&str, &str>, key: &str) -> Result<T> {
    h.get(key)
        .ok_or_else(|| fmt_err(format!("missing header field '{key}'")))?
        .parse()
        .map_err(|_| fmt_err(format!("invalid value for '{key}'")))
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| fmt_err(format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(fmt_err(format!("non-finite value '{s}'")));
    }
    Ok(v)
}

fn parse_c(s: &str) -> Result<Complex64> {
    let (re, im) = s
        .split_once(':')
        .ok_or_else(|| fmt_err(format!("expected re:im, got '{s}'")))?;
    Ok(Complex64::new(parse_f64(re)?, parse_f64(im)?))
}

fn parse_angles(line: &str, n: usize) -> Result<Vec<f64>> {
    let a = line.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
    if a.len() != n {
        return Err(fmt_err(format!("expected {n} angles, found {}", a.len())));
    }
    Ok(a)
}

/// Rebuilds the direction set an angle list came from.
fn direction_set_from_angles(a: &[f64]) -> Result<DirectionSet> {
    let n = a.len();
    let full = make_direction_set(n, Aperture::Full)?;
    let matches = |s: &DirectionSet| {
        s.nodes()
            .iter()
            .zip(a)
            .all(|(d, t)| (Direction::from_angle(*t).vector() - d.vector()).norm() < 1e-9)
    };
    if matches(&full) {
        return Ok(full);
    }
    let start = a[0];
    let mut end = a[n - 1];
    while end <= start {
        end += TAU;
    }
    let arc = make_direction_set(n, Aperture::Arc { start, end })?;
    if matches(&arc) {
        Ok(arc)
    } else {
        Err(fmt_err("angles are not equispaced"))
    }
}

fn split_verified<'a>(text: &'a str, h: &BTreeMap<&str, &str>) -> Result<&'a str> {
    let body = text.split_once('\n').map(|(_, b)| b).unwrap_or("");
    if let Some(expect) = h.get("sha256") {
        if digest(body) != *expect {
            return Err(fmt_err("checksum mismatch"));
        }
    }
    Ok(body)
}

pub fn read_farfield(text: &str) -> Result<FarFieldData> {
    let header = text.lines().next().ok_or_else(|| fmt_err("empty file"))?;
    let h = parse_header(header, "QIFF1")?;
    let k: f64 = field(&h, "k")?;
    let nobs: usize = field(&h, "nobs")?;
    let ninc: usize = field(&h, "ninc")?;
    let delta: f64 = field(&h, "delta")?;
    let seed: u64 = field(&h, "seed")?;
    let provenance = match h.get("provenance") {
        Some(t) => Provenance::from_tag(t).ok_or_else(|| fmt_err(format!("unknown provenance '{t}'")))?,
        None => Provenance::External,
    };
    let body = split_verified(text, &h)?;
    let mut lines = body.lines();
    let mut next = || lines.next().ok_or_else(|| fmt_err("truncated file"));
    let obs = direction_set_from_angles(&parse_angles(next()?, nobs)?)?;
    let inc = direction_set_from_angles(&parse_angles(next()?, ninc)?)?;
    let mut values = Vec::with_capacity(nobs * ninc);
    for i in 0..nobs {
        let row = next()?.split(',').map(parse_c).collect::<Result<Vec<_>>>()?;
        if row.len() != ninc {
            return Err(fmt_err(format!("row {i} has {} entries, expected {ninc}", row.len())));
        }
        values.extend(row);
    }
    Ok(FarFieldData {
        k,
        observation: obs,
        incidence: inc,
        matrix: DMatrix::from_row_slice(nobs, ninc, &values),
        noise_level: delta,
        seed,
        provenance,
    })
}

pub fn write_cauchy(data: &CauchyData) -> String {
    let mut body = join_angles(&data.angles);
    body.push('\n');
    for (u, du) in data.u.iter().zip(&data.du_dnu) {
        body.push_str(&format!("{},{}\n", fmt_c(u), fmt_c(du)));
    }
    format!(
        "QICD1 k={:e} m={} radius={:e} cx={:e} cy={:e} direction={:e} sha256={}\n{}",
        data.k,
        data.len(),
        data.radius,
        data.center.x,
        data.center.y,
        data.direction.angle(),
        digest(&body),
        body
    )
}

pub fn read_cauchy(text: &str) -> Result<CauchyData> {
    let header = text.lines().next().ok_or_else(|| fmt_err("empty file"))?;
    let h = parse_header(header, "QICD1")?;
    let m: usize = field(&h, "m")?;
    let body = split_verified(text, &h)?;
    let mut lines = body.lines();
    let angles = parse_angles(lines.next().ok_or_else(|| fmt_err("truncated file"))?, m)?;
    let mut u = Vec::with_capacity(m);
    let mut du = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines.next().ok_or_else(|| fmt_err("truncated file"))?;
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| fmt_err("expected two values per line"))?;
        u.push(parse_c(a)?);
        du.push(parse_c(b)?);
    }
    Ok(CauchyData {
        k: field(&h, "k")?,
        center: Point::new(field(&h, "cx")?, field(&h, "cy")?),
        radius: field(&h, "radius")?,
        angles,
        u,
        du_dnu: du,
        direction: Direction::from_angle(field(&h, "direction")?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{add_noise, synthesize_cauchy, synthesize_disc};
    use crate::specialfun::WaveContext;

    #[test]
    fn farfield_round_trip_is_lossless() {
        let ctx = WaveContext::new(2.0).unwrap();
        let obs = make_direction_set(12, Aperture::Full).unwrap();
        let inc = make_direction_set(7, Aperture::Arc { start: 0.5, end: 2.5 }).unwrap();
        let data = add_noise(
            &synthesize_disc(1.0, Point::new(0.1, 0.2), &ctx, &obs, &inc).unwrap(),
            0.01,
            5,
        )
        .unwrap();
        let text = write_farfield(&data);
        let back = read_farfield(&text).unwrap();
        assert_eq!(back.matrix, data.matrix);
        assert_eq!(back.k, data.k);
        assert_eq!(back.noise_level, 0.01);
        assert_eq!(back.seed, 5);
        assert_eq!(back.provenance, Provenance::DiscSeries);
        assert_eq!(back.incidence.aperture(), inc.aperture());
        assert!(back.observation.same_as(&obs));
        assert_eq!(write_farfield(&back), text);
    }

    #[test]
    fn corrupted_file_is_rejected() {
        let ctx = WaveContext::new(1.0).unwrap();
        let set = make_direction_set(4, Aperture::Full).unwrap();
        let text = write_farfield(&synthesize_disc(1.0, Point::zeros(), &ctx, &set, &set).unwrap());
        let tampered = text.replacen("e-1:", "e-2:", 1);
        assert!(matches!(read_farfield(&tampered), Err(Error::Format(_))));
        assert!(read_farfield("QIFF2 k=1").is_err());
        assert!(read_farfield("QIFF1 k=1 nobs=4 ninc=4 delta=0 seed=0\n0,1\n").is_err());
    }

    #[test]
    fn cauchy_round_trip() {
        let ctx = WaveContext::new(1.5).unwrap();
        let data = synthesize_cauchy(None, &ctx, Direction::from_angle(0.4), 2.0, 64, 64).unwrap();
        let back = read_cauchy(&write_cauchy(&data)).unwrap();
        assert_eq!(back.u, data.u);
        assert_eq!(back.du_dnu, data.du_dnu);
        assert_eq!(back.radius, 2.0);
    }
}
