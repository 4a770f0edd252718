//! Ground-truth labels from self-declarations in comment text, and distant
//! labels from seed-community participation.

mod activity;
mod coherence;
mod distant;
mod extract;
mod rules;

pub use activity::activity_corpus;
pub use coherence::{
    binarize, binarize_value, filter_bots, parse_botlist, resolve_coherence, year_median,
    Coherence, ResolvedLabel, YEAR_SLACK,
};
pub use distant::{distant_label, DistantLabels, SeedSets};
pub use extract::{
    extract_declarations, read_comments, read_declarations, write_declarations, Comment,
    Declaration, ExtractStats, Gender, Party, Value, MAX_AGE, MIN_AGE,
};
pub use rules::{Attribute, DeclarationRule, RuleSet};
