//! Command-line and HTTP front ends for a concept base.

pub mod http;

use std::fmt;
use std::path::Path;

use conceptbase::{fill_slots, ApprovalReport, ConceptBase, IngestReport, MaintenanceReport, ResultSet, ResultStatus};
use serde::Serialize;

/// Loads the base at `path`, or starts an empty one if the file is missing.
pub fn open_base(path: &Path) -> conceptbase::Result<ConceptBase> {
    if path.exists() {
        ConceptBase::load(path)
    } else {
        Ok(ConceptBase::default())
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

pub fn describe_ingest(report: &IngestReport) -> String {
    let mut parts = vec![
        plural(report.sentences, "sentence"),
        plural(report.trees_created, "tree"),
        plural(report.concepts, "concept"),
        plural(report.descriptors, "descriptor"),
    ];
    if report.splits > 0 {
        parts.push(plural(report.splits, "split"));
    }
    parts.join(", ")
}

/// The result id followed by up to `limit` ranked solutions.
pub fn describe_result(result: &ResultSet, limit: usize) -> String {
    let mut out = format!(
        "result {} for {} ({})\n",
        result.id,
        result.query,
        plural(result.solutions.len(), "solution")
    );
    for (i, solution) in result.solutions.iter().take(limit).enumerate() {
        out.push_str(&format!("#{i} score {} cycles {}\n", solution.score, solution.cycles));
        for filled in fill_slots(&result.query, solution) {
            out.push_str(&format!("  {filled}\n"));
        }
    }
    out
}

pub fn describe_approval(report: &ApprovalReport, index: usize) -> String {
    format!(
        "approved solution {index} of result {}: {}, {}, global node {}",
        report.result_id,
        plural(report.descriptor_links.len(), "descriptor link"),
        plural(report.tree_links.len(), "tree link"),
        report.global_id
    )
}

pub fn describe_maintenance(report: &MaintenanceReport) -> String {
    format!(
        "cycle {}: {} decremented, {} removed, {} merged",
        report.decay.cycle,
        plural(report.decay.decremented.len(), "tree"),
        plural(report.decay.removed_trees.len(), "tree"),
        plural(report.merge.merged.len(), "tree")
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub trees: usize,
    pub nodes: usize,
    pub descriptors: usize,
    pub tree_links: usize,
    pub descriptor_links: usize,
    pub global_nodes: usize,
    pub pending_results: usize,
    pub maintenance_cycle: u64,
}

impl Stats {
    pub fn of(base: &ConceptBase) -> Self {
        Stats {
            trees: base.tree_count(),
            nodes: base.trees().map(|t| t.base.node_count()).sum(),
            descriptors: base.descriptor_index().len(),
            tree_links: base.tree_link_count(),
            descriptor_links: base.descriptor_links().count(),
            global_nodes: base.global_nodes().count(),
            pending_results: base.results().filter(|r| r.status == ResultStatus::Pending).count(),
            maintenance_cycle: base.maintenance_cycle(),
        }
    }
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trees: {}", self.trees)?;
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "descriptors: {}", self.descriptors)?;
        writeln!(f, "tree links: {}", self.tree_links)?;
        writeln!(f, "descriptor links: {}", self.descriptor_links)?;
        writeln!(f, "global nodes: {}", self.global_nodes)?;
        writeln!(f, "pending results: {}", self.pending_results)?;
        write!(f, "maintenance cycle: {}", self.maintenance_cycle)
    }
}
