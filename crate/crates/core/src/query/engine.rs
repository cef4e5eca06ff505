use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::Result;
use crate::model::{descriptor_pair, ConceptBase, ConceptNode, DescriptorId, TreeKey};

use super::{
    parse_query, Binding, BoundDescriptor, CandidateSource, Clause, ConceptSlot, DescriptorSlot, Query, ResultSet,
    ResultStatus, Solution,
};

/// A node that satisfies one clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub key: TreeKey,
    pub path: Vec<String>,
    pub lemma: String,
    pub count: u64,
    pub descriptor: Option<BoundDescriptor>,
    pub concept_suggested: bool,
    pub descriptor_suggested: bool,
    pub unfilled: bool,
    /// Every descriptor on the node, for cycle detection.
    #[serde(skip)]
    pub node_descriptors: Vec<DescriptorId>,
}

impl Candidate {
    fn binding(&self) -> Binding {
        Binding {
            key: self.key,
            path: self.path.clone(),
            lemma: self.lemma.clone(),
            node_count: self.count,
            descriptor: self.descriptor.clone(),
            concept_suggested: self.concept_suggested,
            descriptor_suggested: self.descriptor_suggested,
            unfilled: self.unfilled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub query: Query,
    pub solutions: Vec<Solution>,
    pub sources: Vec<CandidateSource>,
}

/// Highest count first, then alphabetical.
fn best_descriptor(node: &ConceptNode) -> Option<BoundDescriptor> {
    node.descriptors
        .iter()
        .min_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)))
        .map(|d| BoundDescriptor {
            id: d.id,
            word: d.word.clone(),
            count: d.count,
        })
}

/// Precomputed link structure used for scoring.
struct ScoreContext {
    /// Trees joined through tree links (undirected) share a component.
    component: BTreeMap<TreeKey, usize>,
    /// Sum of link levels from a node of the first tree to the second.
    tree_link_levels: BTreeMap<(TreeKey, TreeKey), u64>,
    descriptor_levels: BTreeMap<(DescriptorId, DescriptorId), u64>,
}

impl ScoreContext {
    fn new(base: &ConceptBase) -> Self {
        let mut adjacency: BTreeMap<TreeKey, BTreeSet<TreeKey>> = BTreeMap::new();
        let mut tree_link_levels = BTreeMap::new();
        for tree in base.trees.values() {
            adjacency.entry(tree.key).or_default();
            tree.base.walk(&mut |_, node| {
                for link in &node.tree_links {
                    if !base.trees.contains_key(&link.target_key) {
                        continue;
                    }
                    adjacency.entry(tree.key).or_default().insert(link.target_key);
                    adjacency.entry(link.target_key).or_default().insert(tree.key);
                    if link.target_key != tree.key {
                        *tree_link_levels.entry((tree.key, link.target_key)).or_insert(0) +=
                            u64::from(link.state.level);
                    }
                }
            });
        }
        let mut component = BTreeMap::new();
        let mut next = 0;
        for &start in adjacency.keys() {
            if component.contains_key(&start) {
                continue;
            }
            let mut stack = vec![start];
            component.insert(start, next);
            while let Some(k) = stack.pop() {
                for &m in &adjacency[&k] {
                    if component.insert(m, next).is_none() {
                        stack.push(m);
                    }
                }
            }
            next += 1;
        }
        let descriptor_levels = base
            .descriptor_links
            .iter()
            .map(|(pair, l)| (*pair, u64::from(l.state.level)))
            .collect();
        ScoreContext {
            component,
            tree_link_levels,
            descriptor_levels,
        }
    }

    fn connected(&self, a: TreeKey, b: TreeKey) -> bool {
        a == b || matches!((self.component.get(&a), self.component.get(&b)), (Some(x), Some(y)) if x == y)
    }

    fn descriptors_linked(&self, a: &[DescriptorId], b: &[DescriptorId]) -> bool {
        a.iter().any(|&x| {
            b.iter()
                .any(|&y| x != y && self.descriptor_levels.contains_key(&descriptor_pair(x, y)))
        })
    }

    fn cycles(&self, items: &[ScoredItem<'_>]) -> u64 {
        let mut cycles = 0;
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if self.connected(items[i].key, items[j].key)
                    && self.descriptors_linked(items[i].node_descriptors, items[j].node_descriptors)
                {
                    cycles += 1;
                }
            }
        }
        cycles
    }

    fn score(&self, base: &ConceptBase, items: &[ScoredItem<'_>]) -> (f64, u64) {
        let config = &base.config;
        let counts: u64 = items
            .iter()
            .map(|it| it.count + it.descriptor.map_or(0, |(_, c)| c))
            .sum();

        let mut same_tree = 0u64;
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                if items[i].key == items[j].key {
                    same_tree += 1;
                }
            }
        }

        let keys: BTreeSet<TreeKey> = items.iter().map(|it| it.key).collect();
        let mut link_levels = 0u64;
        for &a in &keys {
            for &b in &keys {
                if a != b {
                    link_levels += self.tree_link_levels.get(&(a, b)).copied().unwrap_or(0);
                }
            }
        }
        let bound: BTreeSet<DescriptorId> = items.iter().filter_map(|it| it.descriptor.map(|(id, _)| id)).collect();
        for &a in &bound {
            for &b in bound.range(a..).skip(1) {
                link_levels += self.descriptor_levels.get(&(a, b)).copied().unwrap_or(0);
            }
        }

        let cycles = self.cycles(items);
        let score = counts as f64
            + config.w_same_tree * same_tree as f64
            + config.w_link * link_levels as f64
            + config.w_cycle * cycles as f64;
        (score, cycles)
    }
}

struct ScoredItem<'a> {
    key: TreeKey,
    count: u64,
    descriptor: Option<(DescriptorId, u64)>,
    node_descriptors: &'a [DescriptorId],
}

/// Ranking: score descending, then fewer distinct trees, then the per-clause
/// tree keys, then the per-clause node paths.
pub(crate) fn rank(a: &Solution, b: &Solution) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.tree_keys().len().cmp(&b.tree_keys().len()))
        .then_with(|| {
            let ka = a.bindings.iter().map(|x| x.key);
            let kb = b.bindings.iter().map(|x| x.key);
            ka.cmp(kb)
        })
        .then_with(|| {
            let pa = a.bindings.iter().map(|x| &x.path);
            let pb = b.bindings.iter().map(|x| &x.path);
            pa.cmp(pb)
        })
}

impl ConceptBase {
    /// Candidate nodes for one clause.
    ///
    /// A wildcard concept is first looked for among descriptors linked to
    /// `bound` (descriptors matched by other clauses); only when none are
    /// linked does it fall back to every node carrying the descriptor.
    pub fn match_clause(&self, clause: &Clause, bound: &BTreeSet<DescriptorId>) -> (Vec<Candidate>, CandidateSource) {
        let mut out = Vec::new();
        match &clause.concept {
            ConceptSlot::Word(lemma) => {
                for tree in self.trees.values() {
                    tree.base.walk(&mut |path, node| {
                        if &node.lemma != lemma {
                            return;
                        }
                        let (descriptor, suggested, unfilled) = match &clause.descriptor {
                            DescriptorSlot::Word(word) => match node.descriptor(word) {
                                Some(d) => (
                                    Some(BoundDescriptor {
                                        id: d.id,
                                        word: d.word.clone(),
                                        count: d.count,
                                    }),
                                    false,
                                    false,
                                ),
                                None => return,
                            },
                            DescriptorSlot::Wildcard => {
                                let best = best_descriptor(node);
                                let unfilled = best.is_none();
                                (best, !unfilled, unfilled)
                            }
                            DescriptorSlot::Unconstrained => (None, false, false),
                        };
                        out.push(Candidate {
                            key: tree.key,
                            path: path.to_vec(),
                            lemma: node.lemma.clone(),
                            count: node.count,
                            descriptor,
                            concept_suggested: false,
                            descriptor_suggested: suggested,
                            unfilled,
                            node_descriptors: node.descriptors.iter().map(|d| d.id).collect(),
                        });
                    });
                }
                (out, CandidateSource::Concept)
            }
            ConceptSlot::Wildcard => {
                let DescriptorSlot::Word(word) = &clause.descriptor else {
                    // rejected by the parser
                    return (out, CandidateSource::Scan);
                };
                let mut linked = Vec::new();
                for tree in self.trees.values() {
                    tree.base.walk(&mut |path, node| {
                        let Some(d) = node.descriptor(word) else { return };
                        let candidate = Candidate {
                            key: tree.key,
                            path: path.to_vec(),
                            lemma: node.lemma.clone(),
                            count: node.count,
                            descriptor: Some(BoundDescriptor {
                                id: d.id,
                                word: d.word.clone(),
                                count: d.count,
                            }),
                            concept_suggested: true,
                            descriptor_suggested: false,
                            unfilled: false,
                            node_descriptors: node.descriptors.iter().map(|d| d.id).collect(),
                        };
                        if bound
                            .iter()
                            .any(|&b| b != d.id && self.descriptor_links.contains_key(&descriptor_pair(b, d.id)))
                        {
                            linked.push(candidate.clone());
                        }
                        out.push(candidate);
                    });
                }
                if linked.is_empty() {
                    (out, CandidateSource::Scan)
                } else {
                    (linked, CandidateSource::LinkedDescriptors)
                }
            }
        }
    }

    /// Binds every clause, scores each combination and ranks them.
    pub fn enumerate_solutions(&self, query: &Query) -> Evaluation {
        let n = query.clauses.len();
        let mut candidates: Vec<Vec<Candidate>> = vec![Vec::new(); n];
        let mut sources = vec![CandidateSource::Concept; n];

        let mut bound = BTreeSet::new();
        for (i, clause) in query.clauses.iter().enumerate() {
            if let ConceptSlot::Word(_) = clause.concept {
                let (c, s) = self.match_clause(clause, &BTreeSet::new());
                if matches!(clause.descriptor, DescriptorSlot::Word(_)) {
                    bound.extend(c.iter().filter_map(|c| c.descriptor.as_ref().map(|d| d.id)));
                }
                candidates[i] = c;
                sources[i] = s;
            }
        }
        for (i, clause) in query.clauses.iter().enumerate() {
            if let ConceptSlot::Wildcard = clause.concept {
                let (c, s) = self.match_clause(clause, &bound);
                candidates[i] = c;
                sources[i] = s;
            }
        }

        let mut solutions = Vec::new();
        if n > 0 && candidates.iter().all(|c| !c.is_empty()) {
            let ctx = ScoreContext::new(self);
            let mut odometer = vec![0usize; n];
            'product: loop {
                let picked: Vec<&Candidate> = odometer.iter().enumerate().map(|(i, &k)| &candidates[i][k]).collect();
                let items: Vec<ScoredItem<'_>> = picked
                    .iter()
                    .map(|c| ScoredItem {
                        key: c.key,
                        count: c.count,
                        descriptor: c.descriptor.as_ref().map(|d| (d.id, d.count)),
                        node_descriptors: &c.node_descriptors,
                    })
                    .collect();
                let (score, cycles) = ctx.score(self, &items);
                solutions.push(Solution {
                    bindings: picked.iter().map(|c| c.binding()).collect(),
                    score,
                    cycles,
                });

                let mut i = n;
                loop {
                    if i == 0 {
                        break 'product;
                    }
                    i -= 1;
                    odometer[i] += 1;
                    if odometer[i] < candidates[i].len() {
                        continue 'product;
                    }
                    odometer[i] = 0;
                }
            }
        }

        solutions.sort_by(rank);
        solutions.dedup_by(|a, b| a.bindings == b.bindings);
        solutions.truncate(self.config.max_solutions);
        Evaluation {
            query: query.clone(),
            solutions,
            sources,
        }
    }

    fn items_for<'a>(&self, solution: &Solution, ids: &'a [Vec<DescriptorId>]) -> Vec<ScoredItem<'a>> {
        solution
            .bindings
            .iter()
            .zip(ids)
            .map(|(b, ids)| ScoredItem {
                key: b.key,
                count: b.node_count,
                descriptor: b.descriptor.as_ref().map(|d| (d.id, d.count)),
                node_descriptors: ids,
            })
            .collect()
    }

    fn node_descriptor_ids(&self, solution: &Solution) -> Vec<Vec<DescriptorId>> {
        solution
            .bindings
            .iter()
            .map(|b| {
                self.trees
                    .get(&b.key)
                    .and_then(|t| t.find(&b.path))
                    .map(|n| n.descriptors.iter().map(|d| d.id).collect())
                    .unwrap_or_default()
            })
            .collect()
    }

    /// Score of a solution against the current base.
    pub fn score_solution(&self, solution: &Solution) -> f64 {
        let ids = self.node_descriptor_ids(solution);
        ScoreContext::new(self).score(self, &self.items_for(solution, &ids)).0
    }

    /// Clause pairs whose nodes are structurally connected and whose
    /// descriptor layers are joined by a descriptor link.
    pub fn detect_cycles(&self, solution: &Solution) -> u64 {
        let ids = self.node_descriptor_ids(solution);
        ScoreContext::new(self).cycles(&self.items_for(solution, &ids))
    }

    /// Parses and evaluates without touching the base.
    pub fn evaluate_query(&self, text: &str) -> Result<Evaluation> {
        let query = parse_query(text)?;
        Ok(self.enumerate_solutions(&query))
    }

    /// Stores an evaluation as a pending result and marks the trees it
    /// touched as accessed.
    pub fn record_result(&mut self, evaluation: Evaluation) -> &ResultSet {
        let touched: BTreeSet<TreeKey> = evaluation
            .solutions
            .iter()
            .flat_map(|s| s.bindings.iter().map(|b| b.key))
            .collect();
        for key in touched {
            self.touch(key);
        }
        let id = self.alloc_id();
        let result = ResultSet {
            id,
            query: evaluation.query,
            solutions: evaluation.solutions,
            sources: evaluation.sources,
            status: ResultStatus::Pending,
            approved_solution: None,
        };
        self.results.entry(id).or_insert(result)
    }

    /// Parse, evaluate, and store the result as pending.
    pub fn execute_query(&mut self, text: &str) -> Result<ResultSet> {
        let evaluation = self.evaluate_query(text)?;
        Ok(self.record_result(evaluation).clone())
    }
}
