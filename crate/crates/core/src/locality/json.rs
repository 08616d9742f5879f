//! JSON document form of [`FiniteHVModel`]:
//!
//! ```json
//! {"lambdas": ["l0", ...],
//!  "measures": {"a1b1": [...], "a1b2": [...], "a2b1": [...], "a2b2": [...]},
//!  "cond": {"l0": {"a1b1": {"++": p, "+-": p, "-+": p, "--": p}, ...}, ...}}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, DeserializeSeed, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::{check_distribution, setting_pair_name, FiniteHVModel, SettingTables};
use crate::error::Error;
use crate::real::Real;

const OUTCOME_KEYS: [[&str; 2]; 2] = [["++", "+-"], ["-+", "--"]];

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct ModelDoc<T> {
    lambdas: Vec<String>,
    measures: BTreeMap<String, Vec<T>>,
    cond: BTreeMap<String, BTreeMap<String, BTreeMap<String, T>>>,
}

impl<T: Real> From<FiniteHVModel<T>> for ModelDoc<T> {
    fn from(m: FiniteHVModel<T>) -> Self {
        let mut measures = BTreeMap::new();
        for i in 0..2 {
            for j in 0..2 {
                measures.insert(setting_pair_name(i, j), m.measures[i][j].clone());
            }
        }
        let cond = m
            .lambdas
            .iter()
            .zip(&m.cond)
            .map(|(l, t)| {
                let mut per_setting = BTreeMap::new();
                for i in 0..2 {
                    for j in 0..2 {
                        let mut cells = BTreeMap::new();
                        for a in 0..2 {
                            for b in 0..2 {
                                cells.insert(OUTCOME_KEYS[a][b].to_string(), t[i][j][a][b]);
                            }
                        }
                        per_setting.insert(setting_pair_name(i, j), cells);
                    }
                }
                (l.clone(), per_setting)
            })
            .collect();
        Self {
            lambdas: m.lambdas,
            measures,
            cond,
        }
    }
}

fn expect_keys<V>(map: &BTreeMap<String, V>, keys: &[String], path: &str) -> Result<(), Error> {
    for k in map.keys() {
        if !keys.contains(k) {
            return Err(Error::MalformedModel(format!("{path}: unexpected key {k:?}")));
        }
    }
    for k in keys {
        if !map.contains_key(k) {
            return Err(Error::MalformedModel(format!("{path}: missing key {k:?}")));
        }
    }
    Ok(())
}

fn pair_names() -> Vec<String> {
    (0..2)
        .flat_map(|i| (0..2).map(move |j| setting_pair_name(i, j)))
        .collect()
}

fn measures_from<T: Real>(raw: BTreeMap<String, Vec<T>>) -> Result<[[Vec<T>; 2]; 2], Error> {
    expect_keys(&raw, &pair_names(), "measures")?;
    for (name, m) in &raw {
        check_distribution(&format!("measures.{name}"), m.iter().copied())?;
    }
    let mut raw = raw;
    let mut take = |i: usize, j: usize| raw.remove(&setting_pair_name(i, j)).unwrap_or_default();
    Ok([[take(0, 0), take(0, 1)], [take(1, 0), take(1, 1)]])
}

fn tables_from<T: Real>(
    lambda: &str,
    raw: &BTreeMap<String, BTreeMap<String, T>>,
) -> Result<SettingTables<T>, Error> {
    let outcomes: Vec<String> = OUTCOME_KEYS.iter().flatten().map(|s| s.to_string()).collect();
    expect_keys(raw, &pair_names(), &format!("cond.{lambda}"))?;
    let mut t: SettingTables<T> = [[[[T::zero(); 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let name = setting_pair_name(i, j);
            let path = format!("cond.{lambda}.{name}");
            let cells = &raw[&name];
            expect_keys(cells, &outcomes, &path)?;
            for a in 0..2 {
                for b in 0..2 {
                    t[i][j][a][b] = cells[OUTCOME_KEYS[a][b]];
                }
            }
            check_distribution(&path, t[i][j].iter().flatten().copied())?;
        }
    }
    Ok(t)
}

// Checks run as each part of the document is read, so that the JSON
// reader can attach the line where the offending value ends.

struct CondSeed<T>(PhantomData<T>);

impl<'de, T: Real> DeserializeSeed<'de> for CondSeed<T> {
    type Value = Vec<(String, SettingTables<T>)>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_map(self)
    }
}

impl<'de, T: Real> Visitor<'de> for CondSeed<T> {
    type Value = Vec<(String, SettingTables<T>)>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a map from lambda to outcome tables")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(lambda) = map.next_key::<String>()? {
            let raw: BTreeMap<String, BTreeMap<String, T>> = map.next_value()?;
            let t = tables_from(&lambda, &raw).map_err(de::Error::custom)?;
            out.push((lambda, t));
        }
        Ok(out)
    }
}

struct ModelVisitor<T>(PhantomData<T>);

const FIELDS: &[&str] = &["lambdas", "measures", "cond"];

impl<'de, T: Real> Visitor<'de> for ModelVisitor<T> {
    type Value = FiniteHVModel<T>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a hidden-variable model document")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
        let mut lambdas: Option<Vec<String>> = None;
        let mut measures = None;
        let mut cond: Option<Vec<(String, SettingTables<T>)>> = None;
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "lambdas" if lambdas.is_none() => lambdas = Some(map.next_value()?),
                "measures" if measures.is_none() => {
                    let raw: BTreeMap<String, Vec<T>> = map.next_value()?;
                    measures = Some(measures_from(raw).map_err(de::Error::custom)?);
                }
                "cond" if cond.is_none() => cond = Some(map.next_value_seed(CondSeed(PhantomData))?),
                "lambdas" | "measures" | "cond" => return Err(de::Error::duplicate_field(FIELDS[0])),
                other => return Err(de::Error::unknown_field(other, FIELDS)),
            }
        }
        let lambdas = lambdas.ok_or_else(|| de::Error::missing_field("lambdas"))?;
        let measures = measures.ok_or_else(|| de::Error::missing_field("measures"))?;
        let cond = cond.ok_or_else(|| de::Error::missing_field("cond"))?;
        let mut by_lambda: BTreeMap<String, SettingTables<T>> = BTreeMap::new();
        for (l, t) in cond {
            by_lambda.insert(l, t);
        }
        expect_keys(&by_lambda, &lambdas, "cond").map_err(de::Error::custom)?;
        let tables = lambdas.iter().map(|l| by_lambda[l]).collect();
        FiniteHVModel::new(lambdas, measures, tables).map_err(de::Error::custom)
    }
}

impl<'de, T: Real> Deserialize<'de> for FiniteHVModel<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_struct("FiniteHVModel", FIELDS, ModelVisitor(PhantomData))
    }
}
