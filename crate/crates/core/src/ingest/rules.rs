use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an item's source answers collapse to a binary indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItemRule {
    /// 1 = yes, 2 = no.
    YesNo,
    /// 1 = never, 2 = once, 3 = more than once; once or more is exposure.
    OnceOrMore,
    /// Several questions; exposed if any source is positive, unexposed if all are negative.
    SumAcrossQuestions,
    /// 1 = never … 5 = all of the time; never or a little of the time is exposure.
    SafetyReversed,
    /// 1 = never … 5 = all of the time; some of the time or more is coded 1.
    NeedsDirect,
}

impl ItemRule {
    fn default_codes(self) -> (Vec<i64>, Vec<i64>) {
        match self {
            ItemRule::YesNo => (vec![1], vec![2]),
            ItemRule::OnceOrMore | ItemRule::SumAcrossQuestions => (vec![2, 3], vec![1]),
            ItemRule::SafetyReversed => (vec![1, 2], vec![3, 4, 5]),
            ItemRule::NeedsDirect => (vec![3, 4, 5], vec![1, 2]),
        }
    }
}

/// One source variable and the raw codes meaning "exposed" / "not exposed".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub variable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<Vec<i64>>,
}

impl SourceSpec {
    fn plain(variable: &str) -> Self {
        Self {
            variable: variable.into(),
            positive: None,
            negative: None,
        }
    }

    fn coded(variable: &str, positive: &[i64], negative: &[i64]) -> Self {
        Self {
            variable: variable.into(),
            positive: Some(positive.to_vec()),
            negative: Some(negative.to_vec()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub name: String,
    pub rule: ItemRule,
    pub sources: Vec<SourceSpec>,
    /// Codes explicitly treated as missing. Codes in no set are missing as well.
    #[serde(default)]
    pub missing: Vec<i64>,
}

impl ItemSpec {
    /// `(positive, negative)` code sets of source `i`, defaults filled in from the rule.
    pub fn codes(&self, i: usize) -> (Vec<i64>, Vec<i64>) {
        let (pos, neg) = self.rule.default_codes();
        let src = &self.sources[i];
        (
            src.positive.clone().unwrap_or(pos),
            src.negative.clone().unwrap_or(neg),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSpec {
    pub variable: String,
    pub positive: Vec<i64>,
    pub negative: Vec<i64>,
}

/// Codebook-driven encoding rules: ACE items in output order, outcome, and
/// state-to-group assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingRules {
    pub state_variable: String,
    pub outcome: OutcomeSpec,
    pub blue_states: Vec<String>,
    pub red_states: Vec<String>,
    pub items: Vec<ItemSpec>,
}

/// Output coordinates of the ACE profile.
pub const ACE_ITEM_COUNT: usize = 10;

/// BRFSS "don't know / not sure" and "refused".
const DK_REFUSED: [i64; 2] = [7, 9];

impl Default for EncodingRules {
    /// BRFSS 2023 ACE module, ten items in the order ACEDEPRS, ACESUB, ACEPRIS,
    /// ACEDIVRC, ACEPUNCH, ACEHURT1, ACESWEAR, ACESEX, ACEADSAF, ACEADNED.
    ///
    /// ACEADNED defaults to the neglect direction (rarely having basic needs
    /// met is the exposure); switch its rule to `needs-direct` for the
    /// opposite coding.
    fn default() -> Self {
        let item = |name: &str, rule: ItemRule, sources: Vec<SourceSpec>| ItemSpec {
            name: name.into(),
            rule,
            sources,
            missing: DK_REFUSED.to_vec(),
        };
        Self {
            state_variable: "_STATE".into(),
            outcome: OutcomeSpec {
                variable: "ADDEPEV3".into(),
                positive: vec![1],
                negative: vec![2],
            },
            // Delaware, New Jersey, Oregon, Rhode Island, Virginia.
            blue_states: ["10", "34", "41", "44", "51"].map(String::from).to_vec(),
            // Florida, Georgia, Missouri, Nevada, Tennessee.
            red_states: ["12", "13", "29", "32", "47"].map(String::from).to_vec(),
            items: vec![
                item("ACEDEPRS", ItemRule::YesNo, vec![SourceSpec::plain("ACEDEPRS")]),
                item(
                    "ACESUB",
                    ItemRule::SumAcrossQuestions,
                    vec![
                        SourceSpec::coded("ACEDRINK", &[1], &[2]),
                        SourceSpec::coded("ACEDRUGS", &[1], &[2]),
                    ],
                ),
                item("ACEPRIS", ItemRule::YesNo, vec![SourceSpec::plain("ACEPRISN")]),
                // 8 = parents not married.
                item(
                    "ACEDIVRC",
                    ItemRule::YesNo,
                    vec![SourceSpec::coded("ACEDIVRC", &[1], &[2, 8])],
                ),
                item("ACEPUNCH", ItemRule::OnceOrMore, vec![SourceSpec::plain("ACEPUNCH")]),
                item("ACEHURT1", ItemRule::OnceOrMore, vec![SourceSpec::plain("ACEHURT1")]),
                item("ACESWEAR", ItemRule::OnceOrMore, vec![SourceSpec::plain("ACESWEAR")]),
                item(
                    "ACESEX",
                    ItemRule::SumAcrossQuestions,
                    vec![
                        SourceSpec::plain("ACETOUCH"),
                        SourceSpec::plain("ACETTHEM"),
                        SourceSpec::plain("ACEHVSEX"),
                    ],
                ),
                item("ACEADSAF", ItemRule::SafetyReversed, vec![SourceSpec::plain("ACEADSAF")]),
                item("ACEADNED", ItemRule::SafetyReversed, vec![SourceSpec::plain("ACEADNED")]),
            ],
        }
    }
}

impl EncodingRules {
    pub fn from_json(text: &str) -> Result<Self> {
        let rules: Self = serde_json::from_str(text)?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn dimension(&self) -> usize {
        self.items.len()
    }

    /// Every raw variable the rules read, state and outcome included.
    pub fn variables(&self) -> Vec<String> {
        let mut vars: BTreeSet<String> = BTreeSet::new();
        vars.insert(self.state_variable.clone());
        vars.insert(self.outcome.variable.clone());
        for item in &self.items {
            for s in &item.sources {
                vars.insert(s.variable.clone());
            }
        }
        vars.into_iter().collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.items.len() != ACE_ITEM_COUNT {
            return Err(Error::InvalidConfig(format!(
                "rules define {} items, expected {ACE_ITEM_COUNT}",
                self.items.len()
            )));
        }
        for item in &self.items {
            if item.sources.is_empty() {
                return Err(Error::InvalidConfig(format!("item {} has no sources", item.name)));
            }
            if item.rule != ItemRule::SumAcrossQuestions && item.sources.len() != 1 {
                return Err(Error::InvalidConfig(format!(
                    "item {} combines {} sources but its rule takes exactly one",
                    item.name,
                    item.sources.len()
                )));
            }
            for i in 0..item.sources.len() {
                let (pos, neg) = item.codes(i);
                if let Some(code) = pos
                    .iter()
                    .find(|c| neg.contains(c) || item.missing.contains(c))
                {
                    return Err(Error::InvalidConfig(format!(
                        "item {}: code {code} is in more than one category",
                        item.name
                    )));
                }
                if let Some(code) = neg.iter().find(|c| item.missing.contains(c)) {
                    return Err(Error::InvalidConfig(format!(
                        "item {}: code {code} is both negative and missing",
                        item.name
                    )));
                }
            }
        }
        if let Some(s) = self.blue_states.iter().find(|s| self.red_states.contains(s)) {
            return Err(Error::InvalidConfig(format!("state {s} is listed as both red and blue")));
        }
        Ok(())
    }
}
