//! Brute-force reference for query evaluation.
//!
//! Walks every tuple of nodes in the base, keeps those that satisfy each
//! clause, and scores them straight from the definitions. Slow on purpose.

use std::collections::BTreeSet;

use conceptbase::{ConceptBase, ConceptNode, DescriptorId, TreeKey};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// (tree key, node path, bound descriptor word) per clause.
    pub bindings: Vec<(TreeKey, Vec<String>, Option<String>)>,
    pub score: f64,
    pub cycles: u64,
}

#[derive(Debug, Clone)]
enum Concept {
    Word(String),
    Any,
}

#[derive(Debug, Clone)]
enum Desc {
    Word(String),
    Any,
    Free,
}

struct Node<'a> {
    key: TreeKey,
    path: Vec<String>,
    node: &'a ConceptNode,
}

/// Parses `[a:b] AND [c]` style text. Only accepts well-formed queries.
fn parse(text: &str) -> Vec<(Concept, Desc)> {
    text.split(" AND ")
        .map(|clause| {
            let inner = clause.trim().trim_start_matches('[').trim_end_matches(']');
            let (c, d) = match inner.split_once(':') {
                Some((c, d)) => (c, Some(d)),
                None => (inner, None),
            };
            let concept = if c == "?" {
                Concept::Any
            } else {
                Concept::Word(c.to_string())
            };
            let desc = match d {
                None => Desc::Free,
                Some("?") => Desc::Any,
                Some(w) => Desc::Word(w.to_string()),
            };
            (concept, desc)
        })
        .collect()
}

fn linked(base: &ConceptBase, a: DescriptorId, b: DescriptorId) -> bool {
    a != b && base.descriptor_link(a, b).is_some()
}

/// The descriptor id a node binds for a clause, or `Err(())` if the node
/// does not satisfy the clause at all.
fn bind(node: &ConceptNode, concept: &Concept, desc: &Desc) -> Result<Option<(DescriptorId, String, u64)>, ()> {
    if let Concept::Word(w) = concept {
        if &node.lemma != w {
            return Err(());
        }
    }
    match desc {
        Desc::Word(w) => node
            .descriptors
            .iter()
            .find(|d| &d.word == w)
            .map(|d| Some((d.id, d.word.clone(), d.count)))
            .ok_or(()),
        Desc::Any => {
            let mut ds: Vec<_> = node.descriptors.iter().collect();
            ds.sort_by(|a, b| b.count.cmp(&a.count).then(a.word.cmp(&b.word)));
            Ok(ds.first().map(|d| (d.id, d.word.clone(), d.count)))
        }
        Desc::Free => Ok(None),
    }
}

/// Trees reachable from `a` following tree links in either direction.
fn reachable(base: &ConceptBase, a: TreeKey) -> BTreeSet<TreeKey> {
    let mut edges = Vec::new();
    for tree in base.trees() {
        tree.base.walk(&mut |_, n| {
            for l in &n.tree_links {
                if base.tree(l.target_key).is_some() {
                    edges.push((tree.key, l.target_key));
                }
            }
        });
    }
    let mut seen = BTreeSet::from([a]);
    loop {
        let before = seen.len();
        for &(x, y) in &edges {
            if seen.contains(&x) || seen.contains(&y) {
                seen.insert(x);
                seen.insert(y);
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}

pub fn evaluate(base: &ConceptBase, query: &str) -> Vec<OracleSolution> {
    let clauses = parse(query);
    let mut nodes = Vec::new();
    for tree in base.trees() {
        tree.base.walk(&mut |path, node| {
            nodes.push(Node {
                key: tree.key,
                path: path.to_vec(),
                node,
            });
        });
    }

    // Descriptors fixed by clauses naming both concept and descriptor.
    let mut fixed = BTreeSet::new();
    for (c, d) in &clauses {
        if let (Concept::Word(_), Desc::Word(_)) = (c, d) {
            for n in &nodes {
                if let Ok(Some((id, _, _))) = bind(n.node, c, d) {
                    fixed.insert(id);
                }
            }
        }
    }
    // A wildcard concept only considers linked nodes when any exist.
    let restrict: Vec<bool> = clauses
        .iter()
        .map(|(c, d)| {
            matches!(c, Concept::Any)
                && nodes.iter().any(|n| match bind(n.node, c, d) {
                    Ok(Some((id, _, _))) => fixed.iter().any(|&f| linked(base, f, id)),
                    _ => false,
                })
        })
        .collect();
    let admits = |i: usize, n: &Node| -> Option<Option<(DescriptorId, String, u64)>> {
        let (c, d) = &clauses[i];
        let b = bind(n.node, c, d).ok()?;
        if restrict[i] {
            let id = b.as_ref()?.0;
            if !fixed.iter().any(|&f| linked(base, f, id)) {
                return None;
            }
        }
        Some(b)
    };

    let k = clauses.len();
    let total = nodes.len().pow(k as u32);
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut pick = Vec::with_capacity(k);
        for _ in 0..k {
            pick.push(code % nodes.len());
            code /= nodes.len();
        }
        let mut bound = Vec::new();
        let mut ok = true;
        for (i, &p) in pick.iter().enumerate() {
            match admits(i, &nodes[p]) {
                Some(b) => bound.push(b),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let chosen: Vec<&Node> = pick.iter().map(|&p| &nodes[p]).collect();
        out.push(score(base, &chosen, &bound));
    }

    out.sort_by(|a, b| {
        let ka: Vec<_> = a.bindings.iter().map(|x| x.0).collect();
        let kb: Vec<_> = b.bindings.iter().map(|x| x.0).collect();
        let ta: BTreeSet<_> = ka.iter().collect();
        let tb: BTreeSet<_> = kb.iter().collect();
        let pa: Vec<_> = a.bindings.iter().map(|x| &x.1).collect();
        let pb: Vec<_> = b.bindings.iter().map(|x| &x.1).collect();
        b.score
            .partial_cmp(&a.score)
            .unwrap()
            .then(ta.len().cmp(&tb.len()))
            .then(ka.cmp(&kb))
            .then(pa.cmp(&pb))
    });
    out
}

fn score(base: &ConceptBase, chosen: &[&Node], bound: &[Option<(DescriptorId, String, u64)>]) -> OracleSolution {
    let config = base.config();
    let mut total = 0u64;
    for (n, b) in chosen.iter().zip(bound) {
        total += n.node.count;
        if let Some((_, _, c)) = b {
            total += c;
        }
    }

    let mut same = 0u64;
    let mut cycles = 0u64;
    for i in 0..chosen.len() {
        for j in i + 1..chosen.len() {
            if chosen[i].key == chosen[j].key {
                same += 1;
            }
            let connected = reachable(base, chosen[i].key).contains(&chosen[j].key);
            let joined = chosen[i]
                .node
                .descriptors
                .iter()
                .any(|x| chosen[j].node.descriptors.iter().any(|y| linked(base, x.id, y.id)));
            if connected && joined {
                cycles += 1;
            }
        }
    }

    let trees: BTreeSet<TreeKey> = chosen.iter().map(|n| n.key).collect();
    let mut levels = 0u64;
    for tree in base.trees() {
        if !trees.contains(&tree.key) {
            continue;
        }
        tree.base.walk(&mut |_, n| {
            for l in &n.tree_links {
                if l.target_key != tree.key && trees.contains(&l.target_key) {
                    levels += u64::from(l.state.level);
                }
            }
        });
    }
    let ids: BTreeSet<DescriptorId> = bound.iter().flatten().map(|b| b.0).collect();
    for link in base.descriptor_links() {
        if link.from_id != link.to_id && ids.contains(&link.from_id) && ids.contains(&link.to_id) {
            levels += u64::from(link.state.level);
        }
    }

    OracleSolution {
        bindings: chosen
            .iter()
            .zip(bound)
            .map(|(n, b)| (n.key, n.path.clone(), b.as_ref().map(|b| b.1.clone())))
            .collect(),
        score: total as f64
            + config.w_same_tree * same as f64
            + config.w_link * levels as f64
            + config.w_cycle * cycles as f64,
        cycles,
    }
}

/// The engine's ranked solutions in the oracle's shape.
pub fn engine(base: &ConceptBase, query: &str) -> Vec<OracleSolution> {
    base.evaluate_query(query)
        .unwrap()
        .solutions
        .into_iter()
        .map(|s| OracleSolution {
            bindings: s
                .bindings
                .into_iter()
                .map(|b| (b.key, b.path, b.descriptor.map(|d| d.word)))
                .collect(),
            score: s.score,
            cycles: s.cycles,
        })
        .collect()
}
