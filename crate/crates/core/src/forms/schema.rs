use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AnswerValue, FormError};
use crate::ids::QuestionId;

/// Whether answers are shared by all annotators or kept per user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormMode {
    /// One answer set per annotation, editable by every annotator.
    Attributes,
    /// One answer set per annotation and user, blinded from peers.
    Questions,
}

/// Items -> Classes -> Questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormSchema {
    pub mode: FormMode,
    pub items: Vec<FormItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormItem {
    pub name: String,
    pub classes: Vec<FormClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormClass {
    pub name: String,
    pub questions: Vec<Question>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QuestionRepr", into = "QuestionRepr")]
pub struct Question {
    pub id: QuestionId,
    pub prompt: String,
    pub qtype: QuestionType,
    pub required: bool,
}

impl Question {
    pub fn new(id: impl Into<QuestionId>, prompt: impl Into<String>, qtype: QuestionType) -> Self {
        Question { id: id.into(), prompt: prompt.into(), qtype, required: true }
    }

    pub fn optional(mut self) -> Self {
        self.required = false;
        self
    }
}

/// Supported question types. New types are added here and registered in
/// [`QUESTION_TYPES`].
#[derive(Debug, Clone, PartialEq)]
pub enum QuestionType {
    TrueFalse,
    PresetNumberChoice(Vec<f64>),
    SelectOne(Vec<String>),
    SelectMany(Vec<String>),
    FreeText,
    IntegerInRange { lo: i64, hi: i64 },
}

/// Registry entry: wire name plus a decoder for the `options` array.
pub struct QuestionTypeDef {
    pub name: &'static str,
    pub decode: fn(&[Value]) -> Result<QuestionType, String>,
}

fn numbers(options: &[Value]) -> Result<Vec<f64>, String> {
    options.iter().map(|v| v.as_f64().ok_or_else(|| format!("{v} is not a number"))).collect()
}

fn strings(options: &[Value]) -> Result<Vec<String>, String> {
    options
        .iter()
        .map(|v| v.as_str().map(str::to_owned).ok_or_else(|| format!("{v} is not a string")))
        .collect()
}

pub const QUESTION_TYPES: &[QuestionTypeDef] = &[
    QuestionTypeDef { name: "true_false", decode: |_| Ok(QuestionType::TrueFalse) },
    QuestionTypeDef { name: "preset_number", decode: |o| numbers(o).map(QuestionType::PresetNumberChoice) },
    QuestionTypeDef { name: "select_one", decode: |o| strings(o).map(QuestionType::SelectOne) },
    QuestionTypeDef { name: "select_many", decode: |o| strings(o).map(QuestionType::SelectMany) },
    QuestionTypeDef { name: "free_text", decode: |_| Ok(QuestionType::FreeText) },
    QuestionTypeDef {
        name: "integer_range",
        decode: |o| match o {
            [lo, hi] => match (lo.as_i64(), hi.as_i64()) {
                (Some(lo), Some(hi)) => Ok(QuestionType::IntegerInRange { lo, hi }),
                _ => Err("range bounds must be integers".into()),
            },
            _ => Err("integer_range takes [lo, hi]".into()),
        },
    },
];

impl QuestionType {
    pub fn name(&self) -> &'static str {
        match self {
            QuestionType::TrueFalse => "true_false",
            QuestionType::PresetNumberChoice(_) => "preset_number",
            QuestionType::SelectOne(_) => "select_one",
            QuestionType::SelectMany(_) => "select_many",
            QuestionType::FreeText => "free_text",
            QuestionType::IntegerInRange { .. } => "integer_range",
        }
    }

    pub fn decode(name: &str, options: &[Value]) -> Result<Self, String> {
        let def = QUESTION_TYPES
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| format!("unknown question type `{name}`"))?;
        (def.decode)(options)
    }

    pub fn options(&self) -> Vec<Value> {
        match self {
            QuestionType::TrueFalse | QuestionType::FreeText => Vec::new(),
            QuestionType::PresetNumberChoice(v) => v.iter().map(|n| json!(n)).collect(),
            QuestionType::SelectOne(v) | QuestionType::SelectMany(v) => v.iter().map(|s| json!(s)).collect(),
            QuestionType::IntegerInRange { lo, hi } => vec![json!(lo), json!(hi)],
        }
    }

    /// Free text is never compared against ground truth.
    pub fn is_scored(&self) -> bool {
        !matches!(self, QuestionType::FreeText)
    }

    pub fn accepts(&self, value: &AnswerValue) -> bool {
        match (self, value) {
            (QuestionType::TrueFalse, AnswerValue::Bool(_)) => true,
            (QuestionType::PresetNumberChoice(opts), AnswerValue::Number(n)) => opts.contains(n),
            (QuestionType::SelectOne(opts), AnswerValue::Text(s)) => opts.contains(s),
            (QuestionType::SelectMany(opts), AnswerValue::Choices(set)) => set.iter().all(|s| opts.contains(s)),
            (QuestionType::FreeText, AnswerValue::Text(_)) => true,
            (QuestionType::IntegerInRange { lo, hi }, AnswerValue::Number(n)) => {
                n.fract() == 0.0 && (*lo as f64..=*hi as f64).contains(n)
            }
            _ => false,
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            QuestionType::PresetNumberChoice(v) if v.is_empty() => Err("empty number choices".into()),
            QuestionType::SelectOne(v) | QuestionType::SelectMany(v) if v.is_empty() => {
                Err("empty option list".into())
            }
            QuestionType::SelectOne(v) | QuestionType::SelectMany(v)
                if v.iter().collect::<BTreeSet<_>>().len() != v.len() =>
            {
                Err("duplicate options".into())
            }
            QuestionType::IntegerInRange { lo, hi } if lo > hi => Err(format!("range {lo}..{hi} is empty")),
            _ => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct QuestionRepr {
    id: QuestionId,
    prompt: String,
    qtype: String,
    #[serde(default)]
    options: Vec<Value>,
    #[serde(default = "default_required")]
    required: bool,
}

fn default_required() -> bool {
    true
}

impl TryFrom<QuestionRepr> for Question {
    type Error = String;

    fn try_from(r: QuestionRepr) -> Result<Self, Self::Error> {
        let qtype = QuestionType::decode(&r.qtype, &r.options)?;
        Ok(Question { id: r.id, prompt: r.prompt, qtype, required: r.required })
    }
}

impl From<Question> for QuestionRepr {
    fn from(q: Question) -> Self {
        QuestionRepr {
            options: q.qtype.options(),
            qtype: q.qtype.name().to_owned(),
            id: q.id,
            prompt: q.prompt,
            required: q.required,
        }
    }
}

impl FormSchema {
    /// A single item/class holding `questions`.
    pub fn flat(mode: FormMode, questions: Vec<Question>) -> Self {
        FormSchema {
            mode,
            items: vec![FormItem { name: "Item".into(), classes: vec![FormClass { name: "Class".into(), questions }] }],
        }
    }

    pub fn is_questions(&self) -> bool {
        self.mode == FormMode::Questions
    }

    pub fn questions(&self) -> impl Iterator<Item = &Question> {
        self.items.iter().flat_map(|i| i.classes.iter()).flat_map(|c| c.questions.iter())
    }

    pub fn question(&self, id: &QuestionId) -> Option<&Question> {
        self.questions().find(|q| &q.id == id)
    }

    pub fn required_questions(&self) -> impl Iterator<Item = &Question> {
        self.questions().filter(|q| q.required)
    }

    pub fn validate(&self) -> Result<(), FormError> {
        let invalid = |msg: String| FormError::InvalidSchema(msg);
        let mut seen = HashSet::new();
        let mut count = 0;
        for q in self.questions() {
            count += 1;
            if !seen.insert(&q.id) {
                return Err(invalid(format!("question id `{}` is used twice", q.id)));
            }
            q.qtype.validate().map_err(|e| invalid(format!("question `{}`: {e}", q.id)))?;
        }
        if count == 0 {
            return Err(invalid("a form needs at least one question".into()));
        }
        Ok(())
    }
}
