use std::io::BufRead;

use chrono::{DateTime, Datelike};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rules::{Attribute, CompiledRule, RuleSet};
use crate::error::{Error, Result};

pub const MIN_AGE: i32 = 13;
pub const MAX_AGE: i32 = 100;

const PRONOUNS: &[&str] = &[
    "i", "i'm", "im", "me", "my", "myself", "i've", "i'd", "i'll",
];
const WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    #[serde(alias = "author", alias = "user_id")]
    pub user: String,
    #[serde(alias = "body")]
    pub text: String,
    /// UTC seconds.
    #[serde(alias = "created_utc")]
    pub timestamp: i64,
    #[serde(alias = "subreddit")]
    pub community: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Democrat,
    Republican,
}

/// A normalized declared value; ages are already converted to birth years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    YearOfBirth(i32),
    Gender(Gender),
    Party(Party),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub user_id: String,
    pub attribute: Attribute,
    /// The matched text of the value group, e.g. `20`, `M`, `Democrat`.
    pub raw: String,
    pub value: Value,
    pub timestamp: i64,
    pub community: String,
}

/// Comments that were read but produced nothing usable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub comments: usize,
    pub skipped_records: usize,
    pub negated: usize,
    pub no_first_person: usize,
    pub out_of_range: usize,
}

fn normalize(raw: &str, attribute: Attribute, timestamp: i64) -> Option<Value> {
    let lower = raw.to_ascii_lowercase();
    match attribute {
        Attribute::Year => {
            let age: i32 = lower.parse().ok()?;
            if !(MIN_AGE..=MAX_AGE).contains(&age) {
                return None;
            }
            let year = DateTime::from_timestamp(timestamp, 0)?.year();
            Some(Value::YearOfBirth(year - age))
        }
        Attribute::Gender => match lower.as_str() {
            "m" | "male" | "man" | "guy" | "dude" => Some(Value::Gender(Gender::Male)),
            "f" | "female" | "woman" | "girl" | "lady" => Some(Value::Gender(Gender::Female)),
            _ => None,
        },
        Attribute::Partisan => match lower.as_str() {
            "democrat" => Some(Value::Party(Party::Democrat)),
            "republican" => Some(Value::Party(Party::Republican)),
            _ => None,
        },
    }
}

fn sentence_bounds(text: &str, at: usize) -> (usize, usize) {
    let is_end = |c: char| matches!(c, '.' | '!' | '?' | '\n');
    let start = text[..at].rfind(is_end).map_or(0, |i| i + 1);
    let end = text[at..].find(is_end).map_or(text.len(), |i| at + i);
    (start, end)
}

fn clean_token(t: &str) -> String {
    t.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')
        .to_lowercase()
}

/// A pronoun within [`WINDOW`] tokens before the match, or the match's own
/// token starting with one (as in `I'm20M`).
fn first_person_near(text: &str, at: usize) -> bool {
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push((s, &text[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push((s, &text[s..]));
    }
    let Some(own) = tokens.iter().rposition(|&(s, _)| s <= at) else {
        return false;
    };
    let (own_start, own_tok) = tokens[own];
    let prefix = clean_token(&text[own_start..at]);
    if PRONOUNS.contains(&prefix.as_str()) || PRONOUNS.contains(&clean_token(own_tok).as_str()) {
        return true;
    }
    tokens[own.saturating_sub(WINDOW)..own]
        .iter()
        .any(|(_, t)| PRONOUNS.contains(&clean_token(t).as_str()))
}

#[derive(Default)]
struct Local {
    out: Vec<Declaration>,
    negated: usize,
    no_first_person: usize,
    out_of_range: usize,
}

fn apply_rule(rule: &CompiledRule, c: &Comment, text: &str, acc: &mut Local) {
    let group = rule.attribute.group();
    for re in &rule.patterns {
        for caps in re.captures_iter(text) {
            let whole = caps.get(0).expect("group 0");
            let Some(m) = caps.name(group) else { continue };
            // patterns may consume one delimiter before the declaration
            let at = whole.start()
                + (whole.as_str().len()
                    - whole
                        .as_str()
                        .trim_start_matches(|c: char| !c.is_alphanumeric())
                        .len());
            let (lo, hi) = sentence_bounds(text, at);
            if rule.negations.iter().any(|n| n.is_match(&text[lo..hi])) {
                acc.negated += 1;
                continue;
            }
            if rule.first_person_required && !first_person_near(text, at) {
                acc.no_first_person += 1;
                continue;
            }
            let Some(value) = normalize(m.as_str(), rule.attribute, c.timestamp) else {
                acc.out_of_range += 1;
                continue;
            };
            let d = Declaration {
                user_id: c.user.clone(),
                attribute: rule.attribute,
                raw: m.as_str().to_string(),
                value,
                timestamp: c.timestamp,
                community: c.community.clone(),
            };
            // one declaration per comment, attribute and value
            if !acc
                .out
                .iter()
                .any(|o| o.attribute == d.attribute && o.value == d.value)
            {
                acc.out.push(d);
            }
        }
    }
}

fn extract_one(c: &Comment, rules: &RuleSet) -> Local {
    let text = c.text.replace(['\u{2019}', '\u{2018}'], "'");
    let mut acc = Local::default();
    for rule in &rules.rules {
        apply_rule(rule, c, &text, &mut acc);
    }
    acc
}

/// Runs every rule over every comment. Output follows input order.
pub fn extract_declarations(
    comments: &[Comment],
    rules: &RuleSet,
) -> (Vec<Declaration>, ExtractStats) {
    let locals: Vec<Local> = comments.par_iter().map(|c| extract_one(c, rules)).collect();
    let mut stats = ExtractStats {
        comments: comments.len(),
        ..Default::default()
    };
    let mut out = Vec::new();
    for l in locals {
        stats.negated += l.negated;
        stats.no_first_person += l.no_first_person;
        stats.out_of_range += l.out_of_range;
        out.extend(l.out);
    }
    (out, stats)
}

/// Reads comment JSONL, skipping lines that do not parse.
pub fn read_comments<R: BufRead>(reader: R) -> Result<(Vec<Comment>, usize)> {
    let mut comments = Vec::new();
    let mut skipped = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Comment>(&line) {
            Ok(c) => comments.push(c),
            Err(e) => {
                log::debug!("comment line {}: {e}", i + 1);
                skipped += 1;
            }
        }
    }
    Ok((comments, skipped))
}

pub fn read_declarations<R: BufRead>(reader: R) -> Result<Vec<Declaration>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_declarations<W: std::io::Write>(mut w: W, decls: &[Declaration]) -> Result<()> {
    for d in decls {
        let line = serde_json::to_string(d).map_err(|e| Error::data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io("<declarations>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // 2019-06-01T00:00:00Z
    const T2019: i64 = 1_559_347_200;

    fn comment(user: &str, text: &str) -> Comment {
        Comment {
            user: user.into(),
            text: text.into(),
            timestamp: T2019,
            community: "c".into(),
        }
    }

    fn run(text: &str) -> Vec<(Attribute, Value)> {
        let (d, _) = extract_declarations(&[comment("u", text)], &RuleSet::default_rules());
        d.into_iter().map(|d| (d.attribute, d.value)).collect()
    }

    #[test]
    fn democrat_declaration() {
        assert_eq!(
            run("I am a Democrat"),
            vec![(Attribute::Partisan, Value::Party(Party::Democrat))]
        );
        assert_eq!(
            run("Well, I'm a registered Republican."),
            vec![(Attribute::Partisan, Value::Party(Party::Republican))]
        );
    }

    #[test]
    fn negation_excluded() {
        assert!(run("I am not a Republican").is_empty());
        assert!(run("I'm no longer a Democrat").is_empty());
    }

    #[test]
    fn age_and_gender_token() {
        let mut got = run("I'm 20M and confused");
        got.sort();
        assert_eq!(
            got,
            vec![
                (Attribute::Year, Value::YearOfBirth(1999)),
                (Attribute::Gender, Value::Gender(Gender::Male))
            ]
        );
        let mut f = run("me (F27) looking for advice");
        f.sort();
        assert_eq!(
            f,
            vec![
                (Attribute::Year, Value::YearOfBirth(1992)),
                (Attribute::Gender, Value::Gender(Gender::Female))
            ]
        );
    }

    #[test]
    fn first_person_required_for_age_and_gender() {
        assert!(run("the suspect is a 20M wearing a hat").is_empty());
        assert!(run("My brother, who is 20M, lives here").is_empty());
        assert_eq!(run("I am a 45 year old woman").len(), 2);
    }

    #[test]
    fn age_bounds() {
        assert!(run("I'm 12M").iter().all(|(a, _)| *a != Attribute::Year));
        assert_eq!(
            run("I'm 13M")
                .iter()
                .filter(|(a, _)| *a == Attribute::Year)
                .count(),
            1
        );
        assert!(run("I'm 99 years old").contains(&(Attribute::Year, Value::YearOfBirth(1920))));
    }

    #[test]
    fn apostrophe_m_is_not_a_gender() {
        assert_eq!(
            run("I'm 25 years old"),
            vec![(Attribute::Year, Value::YearOfBirth(1994))]
        );
        assert!(run("I'm not 20M").is_empty());
    }

    #[test]
    fn sentence_level_negation() {
        assert_eq!(run("I'm not sure. I am a Democrat").len(), 1);
    }

    #[test]
    fn order_insensitive() {
        let cs = vec![
            comment("a", "I'm 30F"),
            comment("b", "I am a Democrat"),
            comment("c", "nothing here"),
        ];
        let rules = RuleSet::default_rules();
        let (mut x, _) = extract_declarations(&cs, &rules);
        let rev: Vec<Comment> = cs.iter().rev().cloned().collect();
        let (mut y, _) = extract_declarations(&rev, &rules);
        let key = |d: &Declaration| (d.user_id.clone(), d.attribute, d.value);
        x.sort_by_key(key);
        y.sort_by_key(key);
        assert_eq!(x, y);
    }

    #[test]
    fn reader_skips_bad_lines() {
        let input =
            "{\"user\":\"a\",\"text\":\"hi\",\"timestamp\":1,\"community\":\"c\"}\nnot json\n\n\
                     {\"author\":\"b\",\"body\":\"x\",\"created_utc\":2,\"subreddit\":\"d\"}\n";
        let (cs, skipped) = read_comments(input.as_bytes()).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(skipped, 1);
        assert_eq!(cs[1].user, "b");
    }

    #[test]
    fn declarations_round_trip() {
        let (d, _) = extract_declarations(
            &[comment("u", "I'm 20M, a Democrat")],
            &RuleSet::default_rules(),
        );
        let mut buf = Vec::new();
        write_declarations(&mut buf, &d).unwrap();
        assert_eq!(read_declarations(buf.as_slice()).unwrap(), d);
    }
}
