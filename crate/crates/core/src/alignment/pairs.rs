use serde::Serialize;

use super::MatchSet;
use crate::catalog::FrameworkCatalog;

/// Topic shared by an ordered subject pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SharedTopic {
    pub topic: i32,
    pub count_a: u32,
    pub count_b: u32,
    /// Outcomes of either subject in the topic.
    pub count: u32,
}

/// A matched outcome pair; indices refer to `catalog.los()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoPair {
    pub a: usize,
    pub b: usize,
    pub topic: i32,
}

/// Topics holding at least one matched pair between `subject_a` and `subject_b`.
pub fn shared_topics(ms: &MatchSet, catalog: &FrameworkCatalog, subject_a: &str, subject_b: &str) -> Vec<SharedTopic> {
    let mut out = Vec::new();
    for t in ms.topic_ids() {
        let members = ms.members(t);
        let subj = |i: &&usize| catalog.los()[**i].subject.as_str();
        let count_a = members.iter().filter(|i| subj(i) == subject_a).count() as u32;
        let count_b = members.iter().filter(|i| subj(i) == subject_b).count() as u32;
        let paired = if subject_a == subject_b { count_a >= 2 } else { count_a > 0 && count_b > 0 };
        if paired {
            let count = if subject_a == subject_b { count_a } else { count_a + count_b };
            out.push(SharedTopic { topic: t, count_a, count_b, count });
        }
    }
    out
}

/// Every matched pair `(a, b)` with `a` in `subject_a` and `b` in `subject_b`,
/// ordered by topic then catalog position. Within one subject each unordered
/// pair appears once (`a` before `b` in the catalog).
pub fn lo_pairs(ms: &MatchSet, catalog: &FrameworkCatalog, subject_a: &str, subject_b: &str) -> Vec<LoPair> {
    let mut out = Vec::new();
    let same = subject_a == subject_b;
    for t in ms.topic_ids() {
        let members = ms.members(t);
        for &a in members {
            if catalog.los()[a].subject != subject_a {
                continue;
            }
            for &b in members {
                if a == b || catalog.los()[b].subject != subject_b || (same && b < a) {
                    continue;
                }
                out.push(LoPair { a, b, topic: t });
            }
        }
    }
    out
}
