//! JSON checkpoints: `{spec, params, freeze_mask}` with every parameter stored
//! as a C99 hex-float string (`"0x1.921fb54442d18p+1"`), so a round trip is
//! bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Network, NetworkSpec, ParameterVector};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    spec: NetworkSpec,
    params: Vec<String>,
    freeze_mask: Vec<bool>,
}

pub fn to_json(net: &Network) -> Result<String> {
    let file = CheckpointFile {
        spec: net.spec().clone(),
        params: net.params().iter().map(|&x| format_hex(x)).collect(),
        freeze_mask: net.freeze_mask().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn from_json(json: &str) -> Result<Network> {
    let file: CheckpointFile = serde_json::from_str(json)?;
    let params = file
        .params
        .iter()
        .map(|s| parse_hex(s))
        .collect::<Result<Vec<f64>>>()?;
    Network::with_mask(file.spec, ParameterVector(params), file.freeze_mask)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(net)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let frac = format!("{mant:013x}");
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{frac}p{e:+}")
    }
}

pub fn parse_hex(s: &str) -> Result<f64> {
    let bad = || Error::Config(format!("malformed hex float {s:?}"));
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let signed = |v: f64| if negative { -v } else { v };
    match body {
        "inf" => return Ok(signed(f64::INFINITY)),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").ok_or_else(bad)?;
    let (mantissa, exponent) = body.split_once('p').ok_or_else(bad)?;
    let e: i64 = exponent.parse().map_err(|_| bad())?;
    let (lead, frac) = match mantissa.split_once('.') {
        Some((l, f)) => (l, f),
        None => (mantissa, ""),
    };
    if frac.len() > 13 {
        return Err(bad());
    }
    let frac_bits = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).map_err(|_| bad())? << (4 * (13 - frac.len()))
    };
    let bits = match lead {
        "1" => {
            let biased = e + 1023;
            if !(1..=2046).contains(&biased) {
                return Err(bad());
            }
            ((biased as u64) << 52) | frac_bits
        }
        "0" if frac_bits == 0 => 0,
        "0" if e == -1022 => frac_bits,
        _ => return Err(bad()),
    };
    Ok(signed(f64::from_bits(bits)))
}
