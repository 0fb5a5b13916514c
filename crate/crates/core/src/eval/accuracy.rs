use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{match_questions, pct};
use crate::corpus::{Difficulty, QuestionRecord};
use crate::error::Result;
use crate::output::AnswerRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub questions: usize,
    pub easy_questions: usize,
    pub challenge_questions: usize,
    pub fallbacks: usize,
    pub overall: f64,
    pub easy: f64,
    pub challenge: f64,
    /// Gold choice among the two best-scored hypotheses.
    pub at2: f64,
}

pub fn accuracy(answers: &[AnswerRecord], questions: &[&QuestionRecord]) -> Result<AccuracyReport> {
    let pairs = match_questions(answers, questions)?;
    let mut counts: BTreeMap<Difficulty, (usize, usize)> = BTreeMap::new();
    let (mut at2, mut fallbacks) = (0, 0);
    for (a, q) in &pairs {
        let correct = a.chosen_label == q.correct_label;
        let slot = counts.entry(q.difficulty).or_default();
        slot.0 += 1;
        slot.1 += usize::from(correct);
        if a.ranking().iter().take(2).any(|l| *l == q.correct_label) {
            at2 += 1;
        }
        fallbacks += usize::from(a.fallback);
    }
    let get = |d| counts.get(&d).copied().unwrap_or_default();
    let (easy_n, easy_ok) = get(Difficulty::Easy);
    let (ch_n, ch_ok) = get(Difficulty::Challenge);
    let n = pairs.len();
    Ok(AccuracyReport {
        questions: n,
        easy_questions: easy_n,
        challenge_questions: ch_n,
        fallbacks,
        overall: pct(easy_ok + ch_ok, n),
        easy: pct(easy_ok, easy_n),
        challenge: pct(ch_ok, ch_n),
        at2: pct(at2, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::tests::{answer, question};

    #[test]
    fn all_correct_is_100() {
        let qs = [question("q1", "A", Difficulty::Easy), question("q2", "B", Difficulty::Challenge)];
        let ans = [answer("q1", &[2.0, 1.0]), answer("q2", &[0.0, 3.0])];
        let r = accuracy(&ans, &qs.iter().collect::<Vec<_>>()).unwrap();
        assert_eq!((r.overall, r.easy, r.challenge, r.at2), (100.0, 100.0, 100.0, 100.0));
    }

    /// q1 right, q2 gold ranked 2nd, q3 gold ranked 3rd, q4 right.
    #[test]
    fn four_question_fixture() {
        let qs = [
            question("q1", "A", Difficulty::Easy),
            question("q2", "C", Difficulty::Easy),
            question("q3", "C", Difficulty::Challenge),
            question("q4", "B", Difficulty::Challenge),
        ];
        let ans = [
            answer("q1", &[3.0, 1.0, 0.5]),
            answer("q2", &[3.0, 1.0, 2.0]),
            answer("q3", &[3.0, 2.0, 1.0]),
            answer("q4", &[1.0, 3.0, 2.0]),
        ];
        let r = accuracy(&ans, &qs.iter().collect::<Vec<_>>()).unwrap();
        assert_eq!(r.overall, 50.0);
        assert_eq!(r.easy, 50.0);
        assert_eq!(r.challenge, 50.0);
        assert_eq!(r.at2, 75.0);
    }

    #[test]
    fn id_mismatch_is_fatal() {
        let qs = [question("q1", "A", Difficulty::Easy)];
        let ans = [answer("other", &[1.0, 0.0])];
        assert!(accuracy(&ans, &qs.iter().collect::<Vec<_>>()).is_err());
    }
}
