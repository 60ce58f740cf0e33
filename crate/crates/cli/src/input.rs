//! Parsing of fan names, contact shorthands and subspace flags.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use tropcount::counting::SubspaceSpec;
use tropcount::exactmath::{parse_rational, IntMatrix};
use tropcount::maps::{DiscreteData, Vector};
use tropcount::polyhedral::{fan_product, fan_projective_space, Fan, FanJson};

/// `p1`, `p2`, `p3`, `p1xp1`, or a path to fan JSON.
pub fn parse_fan(spec: &str) -> Result<Arc<Fan>> {
    let fan = match spec {
        "p1xp1" => {
            let p1 = fan_projective_space(1)?;
            fan_product(&p1, &p1)
        }
        s if s.len() > 1 && s.starts_with('p') && s[1..].chars().all(|c| c.is_ascii_digit()) => {
            let r: usize = s[1..].parse()?;
            fan_projective_space(r)?
        }
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading fan file {path}"))?;
            let j: FanJson = serde_json::from_str(&text).with_context(|| format!("parsing fan JSON in {path}"))?;
            Fan::from_json(&j)?
        }
    };
    Ok(Arc::new(fan))
}

fn repeat(dirs: &[Vector], d: usize) -> Vec<Vector> {
    dirs.iter().flat_map(|v| std::iter::repeat(v.clone()).take(d)).collect()
}

fn unit(rank: usize, i: usize, s: i64) -> Vector {
    let mut v = vec![0; rank];
    v[i] = s;
    v
}

/// Contact orders from a shorthand (`p2-degree:3`, `p1xp1-degree:1,1`, optional
/// `-transverse` suffix), an inline JSON list of vectors, or a path to such a list.
pub fn parse_contacts(spec: &str, rank: usize) -> Result<Vec<Vector>> {
    let body = spec.strip_suffix("-transverse").unwrap_or(spec);
    if let Some((space, degree)) = body.split_once("-degree:") {
        let out = match space {
            "p1xp1" => {
                let (a, b) = degree.split_once(',').context("p1xp1 degree is written a,b")?;
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                let mut v = repeat(&[unit(2, 1, 1), unit(2, 1, -1)], a);
                v.extend(repeat(&[unit(2, 0, 1), unit(2, 0, -1)], b));
                v
            }
            s if s.len() > 1 && s.starts_with('p') => {
                let r: usize = s[1..].parse().with_context(|| format!("unknown space {s}"))?;
                let d: usize = degree.trim().parse()?;
                let mut dirs: Vec<Vector> = (0..r).map(|i| unit(r, i, 1)).collect();
                dirs.push(vec![-1; r]);
                repeat(&dirs, d)
            }
            s => bail!("unknown space {s} in contact shorthand"),
        };
        if out.first().is_some_and(|v| v.len() != rank) {
            bail!("contact shorthand {spec} does not match a fan of rank {rank}");
        }
        return Ok(out);
    }
    let text = if Path::new(spec).exists() { std::fs::read_to_string(spec)? } else { spec.to_string() };
    let v: Vec<Vector> = serde_json::from_str(&text).context("contacts must be a shorthand or a JSON list of integer vectors")?;
    Ok(v)
}

pub fn discrete_data(fan: Arc<Fan>, contacts: &str, points: usize) -> Result<DiscreteData> {
    let c = parse_contacts(contacts, fan.rank())?;
    Ok(DiscreteData::new(fan, c, points)?)
}

fn parse_vector(s: &str) -> Result<Vec<&str>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty coordinate in {s:?}");
    }
    Ok(parts)
}

/// `basis;translation`: basis vectors separated by `|`, coordinates by `,`. An empty basis is
/// a point; an empty translation is drawn from the seed.
pub fn parse_subspace(spec: &str, rank: usize) -> Result<SubspaceSpec> {
    let (basis, translation) = spec.split_once(';').unwrap_or((spec, ""));
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for v in basis.split('|').map(str::trim).filter(|s| !s.is_empty()) {
        let col = parse_vector(v)?.iter().map(|x| x.parse::<BigInt>()).collect::<Result<Vec<_>, _>>()?;
        if col.len() != rank {
            bail!("basis vector {v:?} has {} coordinates, fan rank is {rank}", col.len());
        }
        cols.push(col);
    }
    let translation = if translation.trim().is_empty() {
        None
    } else {
        let t = parse_vector(translation.trim())?.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>, _>>()?;
        if t.len() != rank {
            bail!("translation has {} coordinates, fan rank is {rank}", t.len());
        }
        Some(t)
    };
    Ok(SubspaceSpec { basis: IntMatrix::from_columns(&cols, rank), translation })
}
