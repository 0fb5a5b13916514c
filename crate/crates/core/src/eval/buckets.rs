use serde::{Deserialize, Serialize};

use super::{match_questions, pct};
use crate::concepts::ConceptSet;
use crate::error::Result;
use crate::output::AnswerRecord;
use crate::snapshot::AnnotatedQuestion;

pub const OVERLAP_BANDS: [&str; 5] = ["0-20%", "20-40%", "40-60%", "60-80%", "80-100%"];
pub const CONCEPT_BANDS: [&str; 3] = ["1-5", "6-10", ">10"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub band: String,
    pub questions: usize,
    pub accuracy_with_us: f64,
    pub accuracy_without_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketTables {
    pub choice_overlap: Vec<BucketRow>,
    pub question_concepts: Vec<BucketRow>,
}

/// Mean Jaccard overlap over unordered pairs of choice concept sets, as a
/// percentage. Two empty sets count as identical.
pub fn choice_overlap(choices: &[ConceptSet]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, a) in choices.iter().enumerate() {
        for b in &choices[i + 1..] {
            let inter = a.intersection(b).count();
            let union = a.len() + b.len() - inter;
            total += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        100.0 * total / pairs as f64
    }
}

/// Bands are half-open `[20k, 20k+20)` except the last, which includes 100.
pub fn overlap_band(overlap: f64) -> usize {
    ((overlap / 20.0).floor().max(0.0) as usize).min(OVERLAP_BANDS.len() - 1)
}

/// Questions with no stem concepts fall in the first band.
pub fn concept_band(n: usize) -> usize {
    match n {
        0..=5 => 0,
        6..=10 => 1,
        _ => 2,
    }
}

/// Accuracy per band for the same questions answered with and without the
/// unification score.
pub fn error_buckets(
    with_us: &[AnswerRecord],
    without_us: &[AnswerRecord],
    questions: &[&AnnotatedQuestion],
) -> Result<BucketTables> {
    let records: Vec<_> = questions.iter().map(|q| &q.record).collect();
    let on = match_questions(with_us, &records)?;
    let off = match_questions(without_us, &records)?;

    let mut overlap = vec![(0usize, 0usize, 0usize); OVERLAP_BANDS.len()];
    let mut concepts = vec![(0usize, 0usize, 0usize); CONCEPT_BANDS.len()];
    for (i, q) in questions.iter().enumerate() {
        let right_on = usize::from(on[i].0.chosen_label == q.record.correct_label);
        let right_off = usize::from(off[i].0.chosen_label == q.record.correct_label);
        for slot in [
            &mut overlap[overlap_band(choice_overlap(&q.choice_concepts))],
            &mut concepts[concept_band(q.stem_concepts.len())],
        ] {
            slot.0 += 1;
            slot.1 += right_on;
            slot.2 += right_off;
        }
    }
    let rows = |counts: Vec<(usize, usize, usize)>, names: &[&str]| {
        counts
            .into_iter()
            .zip(names)
            .map(|((n, on, off), name)| BucketRow {
                band: name.to_string(),
                questions: n,
                accuracy_with_us: pct(on, n),
                accuracy_without_us: pct(off, n),
            })
            .collect()
    };
    Ok(BucketTables {
        choice_overlap: rows(overlap, &OVERLAP_BANDS),
        question_concepts: rows(concepts, &CONCEPT_BANDS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> ConceptSet {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn identical_choices_are_full_overlap() {
        let c = set(&["ice", "water"]);
        let o = choice_overlap(&[c.clone(), c.clone(), c]);
        assert_eq!(o, 100.0);
        assert_eq!(overlap_band(o), 4);
    }

    /// Pairs: {a,b}/{b,c} = 1/3, {a,b}/{d} = 0, {b,c}/{d} = 0; mean 1/9.
    #[test]
    fn hand_computed_overlap() {
        let o = choice_overlap(&[set(&["a", "b"]), set(&["b", "c"]), set(&["d"])]);
        assert!((o - 100.0 / 9.0).abs() < 1e-12);
        assert_eq!(overlap_band(o), 0);
        let o = choice_overlap(&[set(&["a", "b"]), set(&["a", "b", "c"])]);
        assert!((o - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(overlap_band(o), 3);
        assert_eq!(overlap_band(40.0), 2);
    }

    #[test]
    fn concept_bands() {
        assert_eq!([0, 1, 5, 6, 10, 11].map(concept_band), [0, 0, 0, 1, 1, 2]);
    }
}
