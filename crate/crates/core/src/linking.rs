//! Three-level link lifecycle.
//!
//! Links start as candidates (level 1), become established (level 2) once
//! their strength reaches `promote_t1`, and permanent (level 3) at
//! `promote_t2`. Decay lowers strength by one, demotes an established link
//! that falls below `promote_t1`, and removes a candidate at zero strength.
//! Permanent links never decay.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::{descriptor_pair, ConceptBase, DescriptorId, DescriptorLink, LinkState, TreeKey, TreeLink};

pub const PERMANENT: u8 = 3;

pub fn reinforce(state: LinkState, config: &Config) -> LinkState {
    let mut next = LinkState {
        level: state.level,
        strength: state.strength + 1,
    };
    if next.level == 1 && next.strength >= config.promote_t1 {
        next.level = 2;
    }
    if next.level == 2 && next.strength >= config.promote_t2 {
        next.level = PERMANENT;
    }
    next
}

/// Returns `None` when the link is removed.
pub fn decay_link(state: LinkState, config: &Config) -> Option<LinkState> {
    if state.level >= PERMANENT {
        return Some(state);
    }
    let mut next = LinkState {
        level: state.level,
        strength: state.strength.saturating_sub(1),
    };
    if next.level == 2 && next.strength < config.promote_t1 {
        next.level = 1;
    }
    (next.strength > 0).then_some(next)
}

impl ConceptBase {
    /// Creates the descriptor link at level 1, or reinforces it if the pair
    /// is already linked.
    pub fn link_descriptors(&mut self, a: DescriptorId, b: DescriptorId) -> Result<LinkState> {
        if a == b {
            return Err(Error::SelfLink(a));
        }
        let live = self.descriptor_index();
        for id in [a, b] {
            if !live.contains_key(&id) {
                return Err(Error::DescriptorNotFound(id));
            }
        }
        let cycle = self.maintenance_cycle;
        let config = &self.config;
        let (from_id, to_id) = descriptor_pair(a, b);
        let link = self
            .descriptor_links
            .entry((from_id, to_id))
            .and_modify(|l| {
                l.state = reinforce(l.state, config);
                l.last_touched_cycle = cycle;
            })
            .or_insert(DescriptorLink {
                from_id,
                to_id,
                state: LinkState::fresh(),
                last_touched_cycle: cycle,
            });
        Ok(link.state)
    }

    /// Creates or reinforces a keyed link from node `(key, path)` to the base
    /// of tree `to_key`.
    pub fn link_trees(&mut self, key: TreeKey, path: &[String], to_key: TreeKey) -> Result<LinkState> {
        if !self.trees.contains_key(&to_key) {
            return Err(Error::KeyNotFound(to_key));
        }
        let config = self.config.clone();
        let node = self.node_mut(key, path)?;
        let state = match node.tree_links.iter_mut().find(|l| l.target_key == to_key) {
            Some(link) => {
                link.state = reinforce(link.state, &config);
                link.state
            }
            None => {
                node.tree_links.push(TreeLink {
                    target_key: to_key,
                    state: LinkState::fresh(),
                });
                LinkState::fresh()
            }
        };
        Ok(state)
    }
}
