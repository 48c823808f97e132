//! Template instantiation: one statement per answer option, with the
//! character span of the substituted answer.
//!
//! A placeholder at the very start of a template gets its first character
//! uppercased when the label starts lowercase; the recorded span always
//! refers to the final text. Terminal punctuation is left alone, so an answer
//! such as "Apple Inc." in "[X] is made by [Y]." yields "... Apple Inc..".

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, Relation, Template, OBJECT_PLACEHOLDER, SUBJECT_PLACEHOLDER};
use crate::error::{Error, Result};

/// Half-open interval of character (Unicode scalar) indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn intersects(&self, start: usize, end: usize) -> bool {
        start < self.end && self.start < end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub text: String,
    pub answer_span: CharSpan,
    pub answer_id: String,
    pub instance_id: String,
    pub template_index: usize,
}

impl Statement {
    /// The substituted answer as it appears in the text.
    pub fn answer_text(&self) -> String {
        self.text
            .chars()
            .skip(self.answer_span.start)
            .take(self.answer_span.len())
            .collect()
    }
}

fn sentence_initial(label: &str) -> String {
    let mut chars = label.chars();
    match chars.next() {
        Some(first) if first.is_lowercase() => first.to_uppercase().chain(chars).collect(),
        _ => label.to_string(),
    }
}

/// Fills both placeholders. The returned statement carries empty identity
/// fields; [`enumerate_statements`] fills them in.
pub fn instantiate(template: &Template, subject_label: &str, answer_label: &str) -> Result<Statement> {
    if subject_label.is_empty() {
        return Err(Error::Statement("empty subject label".into()));
    }
    if answer_label.is_empty() {
        return Err(Error::Statement("empty answer label".into()));
    }
    let slots = template.placeholders()?;
    let raw = template.as_str();

    // (byte offset, placeholder length, substitution, is answer)
    let mut parts = [
        (slots.subject, SUBJECT_PLACEHOLDER.len(), subject_label, false),
        (slots.object, OBJECT_PLACEHOLDER.len(), answer_label, true),
    ];
    parts.sort_by_key(|p| p.0);

    let mut text = String::with_capacity(raw.len() + subject_label.len() + answer_label.len());
    let mut chars = 0usize;
    let mut cursor = 0usize;
    let mut span = CharSpan { start: 0, end: 0 };
    for (offset, len, label, is_answer) in parts {
        let literal = &raw[cursor..offset];
        text.push_str(literal);
        chars += literal.chars().count();
        let filled = if offset == 0 {
            sentence_initial(label)
        } else {
            label.to_string()
        };
        let n = filled.chars().count();
        if is_answer {
            span = CharSpan {
                start: chars,
                end: chars + n,
            };
        }
        text.push_str(&filled);
        chars += n;
        cursor = offset + len;
    }
    text.push_str(&raw[cursor..]);

    Ok(Statement {
        text,
        answer_span: span,
        answer_id: String::new(),
        instance_id: String::new(),
        template_index: 0,
    })
}

/// One statement per answer option, in answer-space order.
pub fn enumerate_statements(
    instance: &Instance,
    relation: &Relation,
    template_index: usize,
) -> Result<Vec<Statement>> {
    let template = relation.templates.get(template_index).ok_or_else(|| {
        Error::Statement(format!(
            "relation {} has {} templates, index {template_index} requested",
            relation.id,
            relation.templates.len()
        ))
    })?;
    relation
        .answers
        .iter()
        .map(|answer| {
            let mut st = instantiate(template, &instance.subject_label, &answer.label)?;
            st.answer_id = answer.answer_id.clone();
            st.instance_id = instance.instance_id.clone();
            st.template_index = template_index;
            Ok(st)
        })
        .collect()
}
