use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Year,
    Gender,
    Partisan,
}

impl Attribute {
    pub const ALL: [Attribute; 3] = [Attribute::Year, Attribute::Gender, Attribute::Partisan];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Year => "year",
            Attribute::Gender => "gender",
            Attribute::Partisan => "partisan",
        }
    }

    /// Capture group carrying the declared value.
    pub fn group(self) -> &'static str {
        match self {
            Attribute::Year => "age",
            Attribute::Gender => "gender",
            Attribute::Partisan => "party",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "year" | "age" => Ok(Attribute::Year),
            "gender" => Ok(Attribute::Gender),
            "partisan" | "party" => Ok(Attribute::Partisan),
            other => Err(Error::arg(format!("unknown attribute `{other}`"))),
        }
    }
}

/// One attribute's extraction rule as stored in the rules file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclarationRule {
    pub attribute: Attribute,
    pub patterns: Vec<String>,
    #[serde(default)]
    pub negation_patterns: Vec<String>,
    #[serde(default)]
    pub first_person_required: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub attribute: Attribute,
    pub patterns: Vec<Regex>,
    pub negations: Vec<Regex>,
    pub first_person_required: bool,
}

/// Rules compiled and ready for matching.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub(crate) rules: Vec<CompiledRule>,
}

const DEFAULT_RULES: &str = include_str!("../../config/rules.json");

impl RuleSet {
    pub fn compile(rules: &[DeclarationRule]) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::data("rule set is empty"));
        }
        let mut compiled = Vec::with_capacity(rules.len());
        for rule in rules {
            if rule.patterns.is_empty() {
                return Err(Error::data(format!(
                    "{} rule has no patterns",
                    rule.attribute
                )));
            }
            let patterns = rule
                .patterns
                .iter()
                .map(|p| Regex::new(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            for p in &patterns {
                if !p
                    .capture_names()
                    .flatten()
                    .any(|n| n == rule.attribute.group())
                {
                    return Err(Error::data(format!(
                        "{} pattern `{}` lacks the `{}` group",
                        rule.attribute,
                        p.as_str(),
                        rule.attribute.group()
                    )));
                }
            }
            let negations = rule
                .negation_patterns
                .iter()
                .map(|p| Regex::new(p))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            compiled.push(CompiledRule {
                attribute: rule.attribute,
                patterns,
                negations,
                first_person_required: rule.first_person_required,
            });
        }
        Ok(Self { rules: compiled })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rules: Vec<DeclarationRule> =
            serde_json::from_str(text).map_err(|e| Error::data(format!("rules file: {e}")))?;
        Self::compile(&rules)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// The shipped defaults for all three attributes.
    pub fn default_rules() -> Self {
        Self::from_json(DEFAULT_RULES).expect("bundled rules are valid")
    }

    pub fn default_source() -> &'static str {
        DEFAULT_RULES
    }

    pub fn attributes(&self) -> Vec<Attribute> {
        let mut a: Vec<Attribute> = self.rules.iter().map(|r| r.attribute).collect();
        a.sort();
        a.dedup();
        a
    }

    /// Keeps only the rules for the given attributes.
    pub fn restrict(&self, attributes: &[Attribute]) -> Result<Self> {
        let rules: Vec<CompiledRule> = self
            .rules
            .iter()
            .filter(|r| attributes.contains(&r.attribute))
            .cloned()
            .collect();
        for a in attributes {
            if !rules.iter().any(|r| r.attribute == *a) {
                return Err(Error::arg(format!("no rule covers attribute `{a}`")));
            }
        }
        Ok(Self { rules })
    }
}
