//! Prompt templates, rendering, and mapping model replies back to labels.
//!
//! A template file has `key: value` header lines (`id`, `label-style`),
//! then a `[system]` section and a `[user]` section. The user section may use
//! the placeholders `{instruction}`, `{demos}`, `{possible}`, `{impossible}`
//! and `{query}`; each is expanded once, in a single pass, so text coming
//! from data can never introduce new placeholders.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Sample;
use crate::error::{Error, Result};
use crate::label::{EmotionLabel, LabelSpace};
use crate::labeling::SoftLabel;
use crate::partition::CandidatePartition;

/// Line prefix under which every built-in template lists the possible
/// candidates, comma-separated.
pub const POSSIBLE_PREFIX: &str = "Possible emotions: ";
pub const IMPOSSIBLE_PREFIX: &str = "Impossible emotions: ";
/// Section delimiter; occurrences inside data text are escaped.
pub const SECTION_DELIMITER: &str = "###";

pub const ZERO_SHOT: &str = "zero-shot";

const BUILTIN: &[&str] = &[
    include_str!("templates/e-icl.txt"),
    include_str!("templates/e-icl-multilabel.txt"),
    include_str!("templates/icl.txt"),
    include_str!("templates/zero-shot.txt"),
];

/// How a demonstration's soft label is written out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelStyle {
    /// `joyful (0.88), excited (0.12)`
    Weighted,
    /// `joyful, excited`
    Plain,
    /// `joyful` (heaviest entry only)
    Top,
}

impl LabelStyle {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "weighted" => Some(LabelStyle::Weighted),
            "plain" => Some(LabelStyle::Plain),
            "top" => Some(LabelStyle::Top),
            _ => None,
        }
    }

    pub fn render(self, label: &SoftLabel) -> String {
        match self {
            LabelStyle::Weighted => label
                .entries
                .iter()
                .map(|e| format!("{} ({:.2})", e.label, e.weight))
                .collect::<Vec<_>>()
                .join(", "),
            LabelStyle::Plain => label
                .entries
                .iter()
                .map(|e| e.label.as_str())
                .collect::<Vec<_>>()
                .join(", "),
            LabelStyle::Top => label
                .entries
                .first()
                .map(|e| e.label.to_string())
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub id: String,
    pub label_style: LabelStyle,
    pub system: String,
    pub user: String,
}

impl Template {
    pub fn parse(source: &str) -> Result<Self> {
        let mut id = None;
        let mut style = LabelStyle::Weighted;
        let mut section: Option<&str> = None;
        let mut system = Vec::new();
        let mut user = Vec::new();
        for line in source.lines() {
            match line.trim_end() {
                "[system]" => {
                    section = Some("system");
                    continue;
                }
                "[user]" => {
                    section = Some("user");
                    continue;
                }
                _ => {}
            }
            match section {
                None => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let (key, value) = line
                        .split_once(':')
                        .ok_or_else(|| Error::Template(format!("bad header line `{line}`")))?;
                    match key.trim() {
                        "id" => id = Some(value.trim().to_string()),
                        "label-style" => {
                            style = LabelStyle::parse(value.trim()).ok_or_else(|| {
                                Error::Template(format!("unknown label style `{}`", value.trim()))
                            })?
                        }
                        other => return Err(Error::Template(format!("unknown header `{other}`"))),
                    }
                }
                Some("system") => system.push(line),
                Some(_) => user.push(line),
            }
        }
        let id = id.ok_or_else(|| Error::Template("missing id".into()))?;
        if user.is_empty() {
            return Err(Error::Template(format!("template `{id}` has no [user] section")));
        }
        Ok(Template {
            id,
            label_style: style,
            system: system.join("\n").trim().to_string(),
            user: user.join("\n").trim_end().to_string() + "\n",
        })
    }

    fn uses(&self, placeholder: &str) -> bool {
        self.user.contains(&format!("{{{placeholder}}}"))
    }
}

/// Templates by id.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, Template>,
}

impl TemplateRegistry {
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        for src in BUILTIN {
            let t = Template::parse(src).expect("built-in template parses");
            templates.insert(t.id.clone(), t);
        }
        TemplateRegistry { templates }
    }

    /// Built-ins plus every `*.txt` template in `dir`; a file may replace a
    /// built-in with the same id.
    pub fn with_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut reg = Self::builtin();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let src = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let t = Template::parse(&src)?;
            reg.templates.insert(t.id.clone(), t);
        }
        Ok(reg)
    }

    pub fn get(&self, id: &str) -> Result<&Template> {
        self.templates
            .get(id)
            .ok_or_else(|| Error::UnknownTemplate(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(|s| s.as_str())
    }
}

impl Default for TemplateRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub sample: Sample,
    pub soft_label: SoftLabel,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub system_text: String,
    pub user_text: String,
    pub template_id: String,
    pub byte_length: usize,
}

/// Escapes data text so it stays on one line and cannot open a section.
pub fn escape_text(text: &str) -> Cow<'_, str> {
    if !text.contains(SECTION_DELIMITER) && !text.contains(['\n', '\r', '\\']) {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    Cow::Owned(out.replace(SECTION_DELIMITER, "\\#\\#\\#"))
}

fn join_labels(labels: &[EmotionLabel]) -> String {
    if labels.is_empty() {
        return "(none)".into();
    }
    labels
        .iter()
        .map(|l| l.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Renders the prompt for one query.
pub fn render_prompt(
    query: &Sample,
    demos: &[Demonstration],
    partition: &CandidatePartition,
    template: &Template,
) -> Result<RenderedPrompt> {
    if template.uses("demos") && demos.is_empty() {
        return Err(Error::Template(format!(
            "template `{}` needs at least one demonstration",
            template.id
        )));
    }
    if !template.uses("impossible") && !partition.impossible.is_empty() {
        return Err(Error::Template(format!(
            "template `{}` has no impossible-candidate section but {} impossible label(s) were given",
            template.id,
            partition.impossible.len()
        )));
    }
    let n = partition.possible.len() + partition.impossible.len();
    let instruction = format!(
        "Identify the fine-grained emotion expressed in the query text. \
         There are {n} emotion categories."
    );
    let demos_text = demos
        .iter()
        .map(|d| {
            let label_line = match template.label_style {
                LabelStyle::Top => format!("Emotion: {}", LabelStyle::Top.render(&d.soft_label)),
                style => format!("Emotions: {}", style.render(&d.soft_label)),
            };
            format!("Text: {}\n{}", escape_text(&d.sample.text), label_line)
        })
        .collect::<Vec<_>>()
        .join("\n\n");

    let mut user = String::with_capacity(template.user.len() + demos_text.len() + 512);
    let mut rest = template.user.as_str();
    while let Some(open) = rest.find('{') {
        user.push_str(&rest[..open]);
        let tail = &rest[open..];
        let close = tail.find('}');
        let expansion = close.and_then(|c| match &tail[1..c] {
            "instruction" => Some(Cow::Borrowed(instruction.as_str())),
            "demos" => Some(Cow::Borrowed(demos_text.as_str())),
            "possible" => Some(Cow::Owned(join_labels(&partition.possible))),
            "impossible" => Some(Cow::Owned(join_labels(&partition.impossible))),
            "query" => Some(escape_text(&query.text)),
            _ => None,
        });
        match (expansion, close) {
            (Some(text), Some(c)) => {
                user.push_str(&text);
                rest = &tail[c + 1..];
            }
            _ => {
                user.push('{');
                rest = &tail[1..];
            }
        }
    }
    user.push_str(rest);

    let system_text = template.system.clone();
    Ok(RenderedPrompt {
        byte_length: system_text.len() + user.len(),
        system_text,
        user_text: user,
        template_id: template.id.clone(),
    })
}

/// Labels listed on the possible-candidates line of a rendered prompt.
pub fn extract_possible(user_text: &str) -> Option<Vec<&str>> {
    user_text
        .lines()
        .find_map(|l| l.strip_prefix(POSSIBLE_PREFIX))
        .map(|rest| {
            rest.split(", ")
                .map(str::trim)
                .filter(|s| !s.is_empty() && *s != "(none)")
                .collect()
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ParsedPrediction {
    Label(EmotionLabel),
    Unparseable(String),
}

impl ParsedPrediction {
    pub fn label(&self) -> Option<&EmotionLabel> {
        match self {
            ParsedPrediction::Label(l) => Some(l),
            ParsedPrediction::Unparseable(_) => None,
        }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Byte offset of the first whole-word occurrence of `needle` in `hay`.
fn find_word(hay: &str, needle: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(pos) = hay[from..].find(needle) {
        let start = from + pos;
        let end = start + needle.len();
        let before_ok = hay[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
        let after_ok = hay[end..].chars().next().is_none_or(|c| !is_word_char(c));
        if before_ok && after_ok {
            return Some(start);
        }
        from = start + hay[start..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Maps a model reply onto the label space.
///
/// An exact match (after case-folding, whitespace collapsing and trimming
/// surrounding punctuation) wins; otherwise a single whole-word mention is
/// taken; several mentions resolve to the one listed first in the partition.
pub fn parse_response(
    raw: &str,
    aligned: &LabelSpace,
    partition: &CandidatePartition,
) -> ParsedPrediction {
    let folded = crate::label::canonicalize(raw);
    let trimmed = folded.trim_matches(|c: char| !c.is_alphanumeric());
    if let Ok(label) = EmotionLabel::new(trimmed) {
        if aligned.contains(&label) {
            return ParsedPrediction::Label(label);
        }
    }

    let order = partition
        .iter()
        .chain(aligned.iter())
        .filter(|l| aligned.contains(l));
    let mut seen = std::collections::HashSet::new();
    let mut first = None;
    let mut hits = 0;
    for label in order {
        if !seen.insert(label) {
            continue;
        }
        if find_word(&folded, label.as_str()).is_some() {
            hits += 1;
            first.get_or_insert(label);
        }
    }
    match (hits, first) {
        (0, _) | (_, None) => ParsedPrediction::Unparseable(raw.to_string()),
        (_, Some(label)) => ParsedPrediction::Label(label.clone()),
    }
}
