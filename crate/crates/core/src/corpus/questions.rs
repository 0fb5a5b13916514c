use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use log::{info, warn};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{normalize_space, Choice, Difficulty, QuestionRecord, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionLoad {
    pub records: Vec<QuestionRecord>,
    /// Rows dropped because the answer key, choices or id were unusable.
    pub excluded: usize,
    /// Rows whose difficulty could not be read and defaulted to easy.
    pub unknown_difficulty: usize,
}

struct Columns {
    id: usize,
    question: usize,
    answer: usize,
    explanation: Option<usize>,
    difficulty: Vec<usize>,
    choices: Vec<(String, usize)>,
}

impl Columns {
    fn resolve(headers: &[String], path: &Path) -> Result<Self> {
        let find = |names: &[&str]| {
            headers
                .iter()
                .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
        };
        let missing = |what: &str| Error::Malformed {
            path: path.to_owned(),
            reason: format!("no {what} column"),
        };
        let choices = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                let h = h.to_ascii_uppercase();
                let label = h
                    .strip_prefix("CHOICE_")
                    .or_else(|| h.strip_prefix("OPTION_"))
                    .unwrap_or(&h);
                (label.len() == 1 && ("A"..="E").contains(&label)).then(|| (label.to_owned(), i))
            })
            .collect();
        Ok(Columns {
            id: find(&["QuestionID", "question_id", "id"]).ok_or_else(|| missing("question id"))?,
            question: find(&["question"]).ok_or_else(|| missing("question"))?,
            answer: find(&["AnswerKey", "answer_key", "answer"]).ok_or_else(|| missing("answer key"))?,
            explanation: find(&["explanation"]),
            difficulty: ["arcset", "difficulty", "category", "set"]
                .iter()
                .filter_map(|n| find(&[n]))
                .collect(),
            choices,
        })
    }
}

/// Loads a delimited question file (tab-separated unless the extension is
/// `.csv`). Choices are read from `A`..`E` columns when present, otherwise
/// from `(A) ... (B) ...` markers embedded in the question text.
pub fn load_questions(path: impl AsRef<Path>, split: Split) -> Result<QuestionLoad> {
    let path = path.as_ref();
    let csv_like = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut builder = csv::ReaderBuilder::new();
    builder.flexible(true).has_headers(true);
    if csv_like {
        builder.delimiter(b',');
    } else {
        builder.delimiter(b'\t').quoting(false);
    }
    let mut reader = builder.from_path(path).map_err(|e| Error::Malformed {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim().to_owned())
        .collect();
    let cols = Columns::resolve(&headers, path)?;
    let file_says_challenge = path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.to_ascii_lowercase().contains("challenge"));

    let mut load = QuestionLoad::default();
    for record in reader.records() {
        let record = record?;
        let cell = |i: usize| record.get(i).map(str::trim).unwrap_or_default();
        let id = cell(cols.id).to_owned();
        let text = cell(cols.question);

        let (stem, choices) = if cols.choices.iter().any(|(_, i)| !cell(*i).is_empty()) {
            let choices = cols
                .choices
                .iter()
                .filter(|(_, i)| !cell(*i).is_empty())
                .map(|(label, i)| Choice {
                    label: label.clone(),
                    text: normalize_space([cell(*i)]),
                })
                .collect();
            (normalize_space([text]), choices)
        } else {
            split_choices(text)
        };

        let correct = resolve_answer(cell(cols.answer), &choices);
        let (Some(correct_label), false, 2..=5) = (correct, id.is_empty(), choices.len()) else {
            load.excluded += 1;
            continue;
        };

        let mut difficulty = None;
        for &c in &cols.difficulty {
            let v = cell(c).to_ascii_lowercase();
            if v.contains("challenge") {
                difficulty = Some(Difficulty::Challenge);
            } else if v.contains("easy") {
                difficulty = Some(Difficulty::Easy);
            }
            if difficulty.is_some() {
                break;
            }
        }
        let difficulty = difficulty.unwrap_or_else(|| {
            if file_says_challenge {
                Difficulty::Challenge
            } else {
                load.unknown_difficulty += 1;
                Difficulty::Easy
            }
        });

        let gold_explanation = cols
            .explanation
            .map(|c| parse_explanation(cell(c)))
            .filter(|g| !g.is_empty());

        load.records.push(QuestionRecord {
            id,
            stem,
            choices,
            correct_label,
            difficulty,
            split,
            gold_explanation,
        });
    }
    if load.excluded > 0 {
        warn!("{}: excluded {} questions", path.display(), load.excluded);
    }
    Ok(load)
}

/// Loads every question file in `dir` whose name mentions `train`, `dev` or
/// `test`, grouped by split. Multiple files for one split are concatenated
/// in file-name order.
pub fn load_question_dir(dir: impl AsRef<Path>) -> Result<BTreeMap<Split, QuestionLoad>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| ["tsv", "csv", "txt"].iter().any(|x| e.eq_ignore_ascii_case(x)))
        })
        .collect();
    paths.sort();
    let mut out: BTreeMap<Split, QuestionLoad> = BTreeMap::new();
    for path in paths {
        let Some(split) = split_of_path(&path) else {
            continue;
        };
        let load = load_questions(&path, split)?;
        let acc = out.entry(split).or_default();
        acc.records.extend(load.records);
        acc.excluded += load.excluded;
        acc.unknown_difficulty += load.unknown_difficulty;
    }
    if out.is_empty() {
        return Err(Error::Ingest(format!("no train/dev/test question files in {}", dir.display())));
    }
    for (split, load) in &out {
        info!("{}: {} questions ({} excluded)", split.name(), load.records.len(), load.excluded);
    }
    Ok(out)
}

pub fn split_of_path(path: &Path) -> Option<Split> {
    let name = path.file_name()?.to_str()?.to_ascii_lowercase();
    if name.contains("train") {
        Some(Split::Train)
    } else if name.contains("dev") {
        Some(Split::Dev)
    } else if name.contains("test") {
        Some(Split::Test)
    } else {
        None
    }
}

fn marker_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(([A-E1-5])\)").unwrap())
}

/// Splits `"stem (A) x (B) y"` into the stem and labelled choices. The
/// markers must form a run `A, B, C, ...` (or `1, 2, 3, ...`); the last such
/// run starting at `A`/`1` is used so that a stray "(A)" in the stem is
/// ignored.
fn split_choices(text: &str) -> (String, Vec<Choice>) {
    let marks: Vec<(usize, usize, char)> = marker_regex()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            (m.start(), m.end(), c[1].chars().next().unwrap())
        })
        .collect();

    let mut best: Vec<usize> = Vec::new();
    for (start_idx, &(_, _, label)) in marks.iter().enumerate() {
        if label != 'A' && label != '1' {
            continue;
        }
        let mut run = vec![start_idx];
        let mut expected = (label as u8 + 1) as char;
        for (j, &(_, _, l)) in marks.iter().enumerate().skip(start_idx + 1) {
            if l == expected {
                run.push(j);
                expected = (expected as u8 + 1) as char;
            }
        }
        if run.len() >= 2 && (run.len() >= best.len() || best.is_empty()) {
            best = run;
        }
    }
    if best.is_empty() {
        return (normalize_space([text]), Vec::new());
    }
    let stem = normalize_space([&text[..marks[best[0]].0]]);
    let choices = best
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let (_, end, label) = marks[m];
            let stop = best.get(k + 1).map(|&n| marks[n].0).unwrap_or(text.len());
            Choice {
                label: label.to_string(),
                text: normalize_space([&text[end..stop]]),
            }
        })
        .collect();
    (stem, choices)
}

/// Maps an answer key to a choice label. Numeric keys select letter labels
/// by position and vice versa; multi-answer keys keep the first answer.
fn resolve_answer(key: &str, choices: &[Choice]) -> Option<String> {
    let first = key
        .split(|c: char| c == ',' || c == ';' || c == '|' || c.is_whitespace())
        .find(|s| !s.is_empty())?
        .trim_matches(|c| c == '(' || c == ')')
        .to_ascii_uppercase();
    if let Some(c) = choices.iter().find(|c| c.label == first) {
        return Some(c.label.clone());
    }
    let position = match first.as_bytes() {
        [d @ b'1'..=b'9'] => Some((d - b'1') as usize),
        [l @ b'A'..=b'Z'] => Some((l - b'A') as usize),
        _ => None,
    }?;
    choices.get(position).map(|c| c.label.clone())
}

/// Gold explanation cell: whitespace-separated `UID|ROLE` pairs. Roles are
/// dropped.
fn parse_explanation(cell: &str) -> BTreeSet<String> {
    cell.split_whitespace()
        .filter_map(|tok| tok.split('|').next())
        .filter(|uid| !uid.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "QuestionID\tquestion\tAnswerKey\texplanation\tarcset\n";

    fn write(body: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("questions.train.tsv");
        fs::write(&path, format!("{HEADER}{body}")).unwrap();
        (dir, path)
    }

    #[test]
    fn embedded_markers() {
        let (_d, path) = write(
            "Q1\tWhat force is needed to help stop a child from slipping on ice? (A) gravity (B) friction (C) electric (D) magnetic\tB\tf1|CENTRAL f2|GROUNDING\tARC-Easy\n",
        );
        let load = load_questions(&path, Split::Train).unwrap();
        let q = &load.records[0];
        assert_eq!(q.stem, "What force is needed to help stop a child from slipping on ice?");
        assert_eq!(q.choices.len(), 4);
        assert_eq!(q.choices[1].text, "friction");
        assert_eq!(q.correct_label, "B");
        assert_eq!(q.difficulty, Difficulty::Easy);
        assert_eq!(q.gold_explanation.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn missing_choice_in_answer_key_is_excluded() {
        let (_d, path) = write(
            "Q1\tWhy? (A) x (B) y\tD\t\tARC-Challenge\n\
             Q2\tWhy not? (A) x (B) y (C) z\tC\t\tARC-Challenge\n",
        );
        let load = load_questions(&path, Split::Train).unwrap();
        assert_eq!(load.excluded, 1);
        assert_eq!(load.records.len(), 1);
        assert_eq!(load.records[0].difficulty, Difficulty::Challenge);
        assert!(load.records[0].gold_explanation.is_none());
    }

    #[test]
    fn numeric_labels_and_keys() {
        let (stem, choices) = split_choices("Pick one (1) red (2) blue (3) green");
        assert_eq!(stem, "Pick one");
        assert_eq!(choices.len(), 3);
        assert_eq!(resolve_answer("2", &choices).as_deref(), Some("2"));
        assert_eq!(resolve_answer("B", &choices).as_deref(), Some("2"));
    }

    #[test]
    fn multi_answer_keeps_first() {
        let (_, choices) = split_choices("q (A) a (B) b (C) c");
        assert_eq!(resolve_answer("B,C", &choices).as_deref(), Some("B"));
    }

    #[test]
    fn stray_marker_in_stem_ignored() {
        let (stem, choices) = split_choices("In figure (A) the ball rolls. Why? (A) gravity (B) friction");
        assert_eq!(stem, "In figure (A) the ball rolls. Why?");
        assert_eq!(choices[0].text, "gravity");
    }

    #[test]
    fn separate_choice_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.csv");
        fs::write(
            &path,
            "id,question,A,B,C,answer,difficulty\nx1,\"Why, really?\",gravity,friction,,A,challenge\n",
        )
        .unwrap();
        let q = &load_questions(&path, Split::Test).unwrap().records[0];
        assert_eq!(q.stem, "Why, really?");
        assert_eq!(q.choices.len(), 2);
        assert_eq!(q.difficulty, Difficulty::Challenge);
    }

    #[test]
    fn split_from_file_name() {
        assert_eq!(split_of_path(Path::new("questions.dev.tsv")), Some(Split::Dev));
        assert_eq!(split_of_path(Path::new("ARC-Easy-Train.csv")), Some(Split::Train));
        assert_eq!(split_of_path(Path::new("README.txt")), None);
    }

    #[test]
    fn explanation_roles_ignored() {
        let g = parse_explanation("a|CENTRAL b|GROUNDING a|LEXGLUE");
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec!["a", "b"]);
    }
}
