use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::extract::{Declaration, Gender, Party, Value};
use super::rules::Attribute;
use crate::error::{Error, Result};

/// Birth years may differ by this much across declarations before the
/// user counts as inconsistent.
pub const YEAR_SLACK: i32 = 1;

pub fn filter_bots(declarations: Vec<Declaration>, botlist: &HashSet<String>) -> Vec<Declaration> {
    declarations
        .into_iter()
        .filter(|d| !botlist.contains(&d.user_id))
        .collect()
}

/// Newline-delimited user ids; blank lines and `#` comments are ignored.
pub fn parse_botlist(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedLabel {
    pub user_id: String,
    pub attribute: Attribute,
    pub value: Value,
    pub declarations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    /// Sorted by attribute, then user.
    pub resolved: Vec<ResolvedLabel>,
    pub rejected: BTreeMap<Attribute, BTreeSet<String>>,
}

impl Coherence {
    pub fn for_attribute(&self, attribute: Attribute) -> Vec<&ResolvedLabel> {
        self.resolved
            .iter()
            .filter(|r| r.attribute == attribute)
            .collect()
    }

    pub fn is_rejected(&self, user: &str, attribute: Attribute) -> bool {
        self.rejected
            .get(&attribute)
            .is_some_and(|s| s.contains(user))
    }

    /// Rejected users over all users with a declaration for the attribute.
    pub fn rejection_rate(&self, attribute: Attribute) -> f64 {
        let rejected = self.rejected.get(&attribute).map_or(0, BTreeSet::len);
        let total = rejected + self.for_attribute(attribute).len();
        if total == 0 {
            0.0
        } else {
            rejected as f64 / total as f64
        }
    }
}

fn consistent(values: &[Value]) -> bool {
    let years: Vec<i32> = values
        .iter()
        .filter_map(|v| match v {
            Value::YearOfBirth(y) => Some(*y),
            _ => None,
        })
        .collect();
    if years.len() == values.len() {
        let (lo, hi) = (years.iter().min(), years.iter().max());
        return matches!((lo, hi), (Some(lo), Some(hi)) if hi - lo <= YEAR_SLACK);
    }
    values.windows(2).all(|w| w[0] == w[1])
}

/// Most frequent value; ties go to the smallest.
fn modal(values: &[Value]) -> Value {
    let mut counts: BTreeMap<Value, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(*v).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    *counts
        .iter()
        .find(|(_, &c)| c == best)
        .map(|(v, _)| v)
        .expect("non-empty")
}

/// Collapses each user's declarations to one value per attribute, rejecting
/// users whose declarations disagree.
pub fn resolve_coherence(declarations: &[Declaration]) -> Coherence {
    let mut groups: BTreeMap<(Attribute, &str), Vec<Value>> = BTreeMap::new();
    for d in declarations {
        groups
            .entry((d.attribute, d.user_id.as_str()))
            .or_default()
            .push(d.value);
    }
    let mut out = Coherence::default();
    for ((attribute, user), values) in groups {
        if consistent(&values) {
            out.resolved.push(ResolvedLabel {
                user_id: user.to_string(),
                attribute,
                value: modal(&values),
                declarations: values.len(),
            });
        } else {
            out.rejected
                .entry(attribute)
                .or_default()
                .insert(user.to_string());
        }
    }
    out
}

/// Median birth year; the mean of the two middle values for even counts.
pub fn year_median(years: &[i32]) -> Result<f64> {
    if years.is_empty() {
        return Err(Error::data("median of an empty set of birth years"));
    }
    let mut v = years.to_vec();
    v.sort_unstable();
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0
    })
}

/// Maps one resolved value to its class: young (born strictly after the
/// median), female and republican are class 1.
pub fn binarize_value(value: Value, median: f64) -> u8 {
    match value {
        Value::YearOfBirth(y) => (y as f64 > median) as u8,
        Value::Gender(Gender::Male) | Value::Party(Party::Democrat) => 0,
        Value::Gender(Gender::Female) | Value::Party(Party::Republican) => 1,
    }
}

/// `(user, class)` pairs for one attribute. Birth years are split at
/// `median` when given, otherwise at the median of these labels.
pub fn binarize(
    resolved: &[ResolvedLabel],
    attribute: Attribute,
    median: Option<f64>,
) -> Result<(Vec<(String, u8)>, Option<f64>)> {
    let rows: Vec<&ResolvedLabel> = resolved
        .iter()
        .filter(|r| r.attribute == attribute)
        .collect();
    if rows.is_empty() {
        return Err(Error::data(format!(
            "no resolved {attribute} labels to binarize"
        )));
    }
    let median = match (attribute, median) {
        (Attribute::Year, Some(m)) => Some(m),
        (Attribute::Year, None) => {
            let years: Vec<i32> = rows
                .iter()
                .filter_map(|r| match r.value {
                    Value::YearOfBirth(y) => Some(y),
                    _ => None,
                })
                .collect();
            Some(year_median(&years)?)
        }
        _ => None,
    };
    let labels = rows
        .iter()
        .map(|r| {
            (
                r.user_id.clone(),
                binarize_value(r.value, median.unwrap_or(0.0)),
            )
        })
        .collect();
    Ok((labels, median))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decl(user: &str, attribute: Attribute, value: Value) -> Declaration {
        Declaration {
            user_id: user.into(),
            attribute,
            raw: String::new(),
            value,
            timestamp: 0,
            community: "c".into(),
        }
    }

    const M: Value = Value::Gender(Gender::Male);
    const F: Value = Value::Gender(Gender::Female);

    #[test]
    fn bot_filter() {
        let ds: Vec<Declaration> = (0..10)
            .map(|i| decl(&format!("u{i}"), Attribute::Gender, M))
            .collect();
        assert_eq!(filter_bots(ds.clone(), &HashSet::new()), ds);
        let bots = parse_botlist("u1\nu4\n# comment\n\nu7\n");
        let kept = filter_bots(ds.clone(), &bots);
        assert_eq!(kept.len(), 7);
        assert!(kept.iter().all(|d| !bots.contains(&d.user_id)));
        let all: HashSet<String> = ds.iter().map(|d| d.user_id.clone()).collect();
        assert!(filter_bots(ds, &all).is_empty());
    }

    #[test]
    fn repeated_consistent_kept() {
        let c = resolve_coherence(&[
            decl("a", Attribute::Gender, F),
            decl("a", Attribute::Gender, F),
        ]);
        assert_eq!(c.resolved.len(), 1);
        assert_eq!(c.resolved[0].value, F);
        assert_eq!(c.resolved[0].declarations, 2);
    }

    #[test]
    fn conflict_rejected() {
        let c = resolve_coherence(&[
            decl("a", Attribute::Gender, M),
            decl("a", Attribute::Gender, F),
        ]);
        assert!(c.resolved.is_empty());
        assert!(c.is_rejected("a", Attribute::Gender));
        assert_eq!(c.rejection_rate(Attribute::Gender), 1.0);
    }

    #[test]
    fn birth_year_slack() {
        // age 20 in 2018 and 21 in 2019
        let c = resolve_coherence(&[
            decl("a", Attribute::Year, Value::YearOfBirth(1998)),
            decl("a", Attribute::Year, Value::YearOfBirth(1998)),
        ]);
        assert_eq!(c.resolved[0].value, Value::YearOfBirth(1998));
        let c = resolve_coherence(&[
            decl("a", Attribute::Year, Value::YearOfBirth(1999)),
            decl("a", Attribute::Year, Value::YearOfBirth(1998)),
        ]);
        assert_eq!(c.resolved[0].value, Value::YearOfBirth(1998));
        let c = resolve_coherence(&[
            decl("a", Attribute::Year, Value::YearOfBirth(1999)),
            decl("a", Attribute::Year, Value::YearOfBirth(1997)),
        ]);
        assert!(c.is_rejected("a", Attribute::Year));
    }

    #[test]
    fn attributes_resolved_independently() {
        let c = resolve_coherence(&[
            decl("a", Attribute::Gender, M),
            decl("a", Attribute::Gender, F),
            decl("a", Attribute::Partisan, Value::Party(Party::Democrat)),
        ]);
        assert!(c.is_rejected("a", Attribute::Gender));
        assert_eq!(c.for_attribute(Attribute::Partisan).len(), 1);
    }

    #[test]
    fn year_binarization_at_median() {
        let rs: Vec<ResolvedLabel> = [1980, 1990, 2000]
            .iter()
            .enumerate()
            .map(|(i, &y)| ResolvedLabel {
                user_id: format!("u{i}"),
                attribute: Attribute::Year,
                value: Value::YearOfBirth(y),
                declarations: 1,
            })
            .collect();
        let (labels, median) = binarize(&rs, Attribute::Year, None).unwrap();
        assert_eq!(median, Some(1990.0));
        assert_eq!(
            labels.iter().map(|l| l.1).collect::<Vec<_>>(),
            vec![0, 0, 1]
        );
        let (frozen, _) = binarize(&rs, Attribute::Year, Some(1979.0)).unwrap();
        assert!(frozen.iter().all(|l| l.1 == 1));
        assert!(binarize(&[], Attribute::Year, None).is_err());
        assert_eq!(year_median(&[1, 4, 2, 3]).unwrap(), 2.5);
    }

    #[test]
    fn categorical_binarization() {
        let mk = |u: &str, a, v| ResolvedLabel {
            user_id: u.into(),
            attribute: a,
            value: v,
            declarations: 1,
        };
        let females = vec![mk("a", Attribute::Gender, F), mk("b", Attribute::Gender, F)];
        assert!(binarize(&females, Attribute::Gender, None)
            .unwrap()
            .0
            .iter()
            .all(|l| l.1 == 1));
        let parties = vec![
            mk("d", Attribute::Partisan, Value::Party(Party::Democrat)),
            mk("r", Attribute::Partisan, Value::Party(Party::Republican)),
        ];
        let (l, m) = binarize(&parties, Attribute::Partisan, None).unwrap();
        assert_eq!(l.iter().map(|l| l.1).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(m, None);
    }
}
