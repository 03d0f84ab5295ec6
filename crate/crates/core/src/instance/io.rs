use std::io::{BufRead, Write};

use super::{Family, Instance, SyntheticSpec};
use crate::error::{Error, Result};

const MAGIC: &str = "ADCP";
const VERSION: &str = "v1";

/// Writes the header line and one row per factor vector (mode-major).
pub fn write_instance<W: Write>(inst: &Instance, out: &mut W) -> Result<()> {
    let spec = inst.spec();
    let dims: Vec<String> = spec.dims.iter().map(ToString::to_string).collect();
    writeln!(
        out,
        "{MAGIC} {VERSION} {} {} {} {} {:e} {}",
        spec.order(),
        dims.join(" "),
        spec.rank,
        spec.family,
        spec.noise_sigma,
        spec.seed
    )?;
    for mode in inst.factors() {
        for v in mode {
            let row: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

/// Reads an instance written by [`write_instance`]; the truth is rebuilt
/// from the factors.
pub fn read_instance<R: BufRead>(input: R) -> Result<Instance> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty instance file".into()))??;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() < 3 || tokens[0] != MAGIC || tokens[1] != VERSION {
        return Err(Error::Parse(format!("not an {MAGIC} {VERSION} header: `{header}`")));
    }
    let order: usize = parse(tokens[2], "order")?;
    if tokens.len() != 3 + order + 4 {
        return Err(Error::Parse(format!("header has {} fields, expected {}", tokens.len(), 7 + order)));
    }
    let dims = tokens[3..3 + order].iter().map(|t| parse(t, "dimension")).collect::<Result<Vec<usize>>>()?;
    let rest = &tokens[3 + order..];
    let rank: usize = parse(rest[0], "rank")?;
    let family: Family = rest[1].parse()?;
    let spec = SyntheticSpec {
        dims: dims.clone(),
        rank,
        family,
        noise_sigma: parse(rest[2], "sigma")?,
        seed: parse(rest[3], "seed")?,
        unit_frobenius: false,
    };
    let mut factors = Vec::with_capacity(order);
    for &n in &dims {
        let mut mode = Vec::with_capacity(rank);
        for _ in 0..rank {
            let line = lines.next().ok_or_else(|| Error::Parse("truncated factor rows".into()))??;
            let row = line.split_whitespace().map(|t| parse(t, "factor value")).collect::<Result<Vec<f64>>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!("factor row has {} values, expected {n}", row.len())));
            }
            mode.push(row);
        }
        factors.push(mode);
    }
    if let Some(extra) = lines.next() {
        if !extra?.trim().is_empty() {
            return Err(Error::Parse("trailing data after factor rows".into()));
        }
    }
    Instance::from_factors(spec, factors)
}

fn parse<T: std::str::FromStr>(token: &str, what: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse(format!("bad {what} `{token}`")))
}
