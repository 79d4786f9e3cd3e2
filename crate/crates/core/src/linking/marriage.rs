use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::run::LinkingRun;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarriageOptions {
    /// Replace an incumbent when the newcomer ranks *lower* in the reference
    /// object's list, i.e. keep the worse proposer. Off by default.
    pub paper_literal_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub candidate: String,
    pub similarity: f64,
    /// True when the proposal phase left this query unmatched and it fell
    /// back to its top-1 candidate.
    pub fallback: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Marriage {
    pub assignments: BTreeMap<String, Assignment>,
    /// Queries with an empty candidate list.
    pub unassigned: Vec<String>,
    /// Reference ids given to more than one query after fallback.
    pub collisions: Vec<String>,
    pub proposals: usize,
}

impl Marriage {
    /// Pairs fixed by the proposal phase; injective.
    pub fn matched(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments
            .iter()
            .filter(|(_, a)| !a.fallback)
            .map(|(q, a)| (q.as_str(), a.candidate.as_str()))
    }

    /// Fraction of all queries assigned to their own id.
    pub fn accuracy(&self) -> f64 {
        let total = self.assignments.len() + self.unassigned.len();
        if total == 0 {
            return 0.0;
        }
        let hits = self.assignments.iter().filter(|(q, a)| **q == a.candidate).count();
        hits as f64 / total as f64
    }
}

fn rank_table(run: &LinkingRun) -> HashMap<&str, HashMap<&str, usize>> {
    run.results
        .iter()
        .map(|(o, r)| {
            (
                o.as_str(),
                r.neighbors.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect(),
            )
        })
        .collect()
}

/// Mutual-preference matching over two directions of top-k lists.
///
/// Queries propose down their own lists; a reference object only considers
/// proposers that appear in its list and holds on to the one it ranks
/// highest. Queries that run out of candidates take their top-1 and are
/// flagged.
pub fn stable_marriage(q_to_d: &LinkingRun, d_to_q: &LinkingRun, opts: MarriageOptions) -> Marriage {
    let d_rank = rank_table(d_to_q);
    let mut next: HashMap<&str, usize> = HashMap::new();
    let mut engaged: HashMap<&str, &str> = HashMap::new();
    let mut partner: HashMap<&str, &str> = HashMap::new();
    let mut exhausted = Vec::new();
    let mut queue: VecDeque<&str> = q_to_d.results.keys().map(String::as_str).collect();
    let mut proposals = 0;

    while let Some(q) = queue.pop_front() {
        let list = &q_to_d.results[q].neighbors;
        let pos = next.entry(q).or_insert(0);
        let Some(cand) = list.get(*pos) else {
            exhausted.push(q);
            continue;
        };
        *pos += 1;
        proposals += 1;
        let d = cand.id.as_str();
        let Some(rank_q) = d_rank.get(d).and_then(|r| r.get(q)).copied() else {
            queue.push_front(q);
            continue;
        };
        match engaged.get(d).copied() {
            None => {
                engaged.insert(d, q);
                partner.insert(q, d);
            }
            Some(inc) => {
                let rank_inc = d_rank[d][inc];
                let replace = if opts.paper_literal_rank {
                    rank_q > rank_inc
                } else {
                    rank_q < rank_inc
                };
                if replace {
                    engaged.insert(d, q);
                    partner.remove(inc);
                    partner.insert(q, d);
                    queue.push_back(inc);
                } else {
                    queue.push_front(q);
                }
            }
        }
    }

    let mut out = Marriage {
        proposals,
        ..Default::default()
    };
    for (q, r) in &q_to_d.results {
        let list = &r.neighbors;
        if let Some(&d) = partner.get(q.as_str()) {
            let sim = list.iter().find(|n| n.id == d).map(|n| n.similarity).unwrap_or(0.0);
            out.assignments.insert(
                q.clone(),
                Assignment {
                    candidate: d.to_string(),
                    similarity: sim,
                    fallback: false,
                },
            );
        } else if let Some(top) = list.first() {
            out.assignments.insert(
                q.clone(),
                Assignment {
                    candidate: top.id.clone(),
                    similarity: top.similarity,
                    fallback: true,
                },
            );
        } else {
            out.unassigned.push(q.clone());
        }
    }
    let mut uses: BTreeMap<&str, usize> = BTreeMap::new();
    for a in out.assignments.values() {
        *uses.entry(a.candidate.as_str()).or_default() += 1;
    }
    out.collisions = uses
        .into_iter()
        .filter(|&(_, n)| n > 1)
        .map(|(d, _)| d.to_string())
        .collect();
    debug_assert!(exhausted.len() <= q_to_d.len());
    out
}

/// Pairs (q, d) listed by each other where both would rather be together
/// than with their proposal-phase partners.
pub fn blocking_pairs(m: &Marriage, q_to_d: &LinkingRun, d_to_q: &LinkingRun) -> Vec<(String, String)> {
    let q_rank = rank_table(q_to_d);
    let d_rank = rank_table(d_to_q);
    let q_partner: HashMap<&str, &str> = m.matched().collect();
    let d_partner: HashMap<&str, &str> = q_partner.iter().map(|(&q, &d)| (d, q)).collect();
    let mut out = Vec::new();
    for (&q, ranks) in &q_rank {
        for (&d, &rq) in ranks {
            let Some(&rd) = d_rank.get(d).and_then(|r| r.get(q)) else {
                continue;
            };
            let q_wants = q_partner.get(q).is_none_or(|&cur| rq < ranks[cur]);
            let d_wants = d_partner.get(d).is_none_or(|&cur| rd < d_rank[d][cur]);
            if q_wants && d_wants {
                out.push((q.to_string(), d.to_string()));
            }
        }
    }
    out.sort();
    out
}
