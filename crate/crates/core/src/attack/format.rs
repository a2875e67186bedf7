//! JSON interchange format for attacks.
//!
//! Complex numbers are `[re, im]` pairs. Bit patterns appear as
//! big-endian 0/1 strings ("01" is a = 1 on two rounds). General
//! attacks carry `alpha` as an array ordered by pattern value, plus
//! maps `E` (key: pattern) and `F` (key: "a,m"). Collective attacks
//! carry `ancilla_dim` and a map `e` keyed by "a,c" single bits.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::attack::{CollectiveAttack, GeneralAttack};
use crate::bits::BitString;
use crate::error::{Error, Result};

type PackedVec = Vec<(f64, f64)>;

fn pack(v: &[Complex64]) -> PackedVec {
    v.iter().map(|z| (z.re, z.im)).collect()
}

fn unpack(v: &[(f64, f64)]) -> Vec<Complex64> {
    v.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

fn pattern_key(value: usize, width: usize) -> String {
    BitString::from_index(value, width)
        .expect("pattern fits its width")
        .to_string()
}

fn parse_pattern(key: &str, width: usize) -> Result<usize> {
    let bits = BitString::parse(key)?;
    if bits.len() != width {
        return Err(Error::Parse(format!(
            "pattern key '{key}' must have {width} bits"
        )));
    }
    Ok(bits.to_index())
}

#[derive(Serialize, Deserialize, Clone)]
pub(crate) struct GeneralAttackRepr {
    rounds: usize,
    d_in: usize,
    d_out: usize,
    alpha: Vec<(f64, f64)>,
    #[serde(rename = "E")]
    e: BTreeMap<String, PackedVec>,
    #[serde(rename = "F")]
    f: BTreeMap<String, PackedVec>,
}

impl From<GeneralAttack> for GeneralAttackRepr {
    fn from(g: GeneralAttack) -> Self {
        let n = g.rounds();
        let patterns = 1usize << n;
        let mut e = BTreeMap::new();
        let mut f = BTreeMap::new();
        for a in 0..patterns {
            e.insert(pattern_key(a, n), pack(g.ancilla_in(a).as_slice()));
            for m in 0..patterns {
                f.insert(
                    format!("{},{}", pattern_key(a, n), pattern_key(m, n)),
                    pack(g.f(a, m).as_slice()),
                );
            }
        }
        GeneralAttackRepr {
            rounds: n,
            d_in: g.d_in(),
            d_out: g.d_out(),
            alpha: pack(g.alpha()),
            e,
            f,
        }
    }
}

impl TryFrom<GeneralAttackRepr> for GeneralAttack {
    type Error = Error;

    fn try_from(r: GeneralAttackRepr) -> Result<Self> {
        if r.rounds == 0 || r.rounds >= usize::BITS as usize {
            return Err(Error::Parse(format!("bad round count {}", r.rounds)));
        }
        let patterns = 1usize << r.rounds;
        let mut ancilla = vec![None; patterns];
        for (key, v) in &r.e {
            let a = parse_pattern(key, r.rounds)?;
            if ancilla[a].replace(unpack(v)).is_some() {
                return Err(Error::Parse(format!("duplicate E entry for '{key}'")));
            }
        }
        let mut f = vec![vec![None; patterns]; patterns];
        for (key, v) in &r.f {
            let (ka, km) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("F key '{key}' is not 'a,m'")))?;
            let a = parse_pattern(ka, r.rounds)?;
            let m = parse_pattern(km, r.rounds)?;
            if f[a][m].replace(unpack(v)).is_some() {
                return Err(Error::Parse(format!("duplicate F entry for '{key}'")));
            }
        }
        let ancilla: Vec<Vec<Complex64>> = ancilla
            .into_iter()
            .enumerate()
            .map(|(a, v)| v.ok_or_else(|| Error::Parse(format!("missing E entry for pattern {a}"))))
            .collect::<Result<_>>()?;
        let f: Vec<Vec<Vec<Complex64>>> = f
            .into_iter()
            .enumerate()
            .map(|(a, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(m, v)| {
                        v.ok_or_else(|| Error::Parse(format!("missing F entry for ({a},{m})")))
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        GeneralAttack::new(r.rounds, r.d_in, r.d_out, unpack(&r.alpha), ancilla, f)
    }
}

#[derive(Serialize, Deserialize, Clone)]
pub(crate) struct CollectiveAttackRepr {
    ancilla_dim: usize,
    e: BTreeMap<String, PackedVec>,
}

impl From<CollectiveAttack> for CollectiveAttackRepr {
    fn from(att: CollectiveAttack) -> Self {
        let mut e = BTreeMap::new();
        for a in 0..2u8 {
            for c in 0..2u8 {
                e.insert(format!("{a},{c}"), pack(att.e(a, c).as_slice()));
            }
        }
        CollectiveAttackRepr {
            ancilla_dim: att.ancilla_dim(),
            e,
        }
    }
}

impl TryFrom<CollectiveAttackRepr> for CollectiveAttack {
    type Error = Error;

    fn try_from(r: CollectiveAttackRepr) -> Result<Self> {
        let mut e: [[Option<Vec<Complex64>>; 2]; 2] = Default::default();
        for (key, v) in &r.e {
            let (ka, kc) = key
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("e key '{key}' is not 'a,c'")))?;
            let a = parse_pattern(ka, 1)?;
            let c = parse_pattern(kc, 1)?;
            if e[a][c].replace(unpack(v)).is_some() {
                return Err(Error::Parse(format!("duplicate e entry for '{key}'")));
            }
        }
        let take = |slot: &mut Option<Vec<Complex64>>, a: usize, c: usize| {
            slot.take()
                .ok_or_else(|| Error::Parse(format!("missing e entry for ({a},{c})")))
        };
        let mut rows: [[Vec<Complex64>; 2]; 2] = Default::default();
        for a in 0..2 {
            for c in 0..2 {
                rows[a][c] = take(&mut e[a][c], a, c)?;
            }
        }
        CollectiveAttack::new(r.ancilla_dim, rows)
    }
}

impl GeneralAttack {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GeneralAttackRepr::from(
            self.clone(),
        ))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: GeneralAttackRepr = serde_json::from_str(text)?;
        repr.try_into()
    }
}

impl CollectiveAttack {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CollectiveAttackRepr::from(
            self.clone(),
        ))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: CollectiveAttackRepr = serde_json::from_str(text)?;
        repr.try_into()
    }
}
