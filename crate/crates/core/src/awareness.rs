//! Bounded-depth AL neighborhoods.
//!
//! The awareness of `x` at depth `k` holds every node reachable from `x` in at
//! most `k` AL hops. Levels store only newly discovered nodes, so
//! `levels()[i]` is the set of nodes first reached at hop `i`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::netgen::{NodeId, SmallWorldNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Member {
    node: NodeId,
    level: u32,
    parent: Option<NodeId>,
}

#[derive(Debug, Clone)]
pub struct Awareness {
    origin: NodeId,
    depth: u32,
    levels: Vec<Vec<NodeId>>,
    /// Members in discovery order.
    members: Vec<Member>,
    index: HashMap<NodeId, usize>,
}

/// Breadth-first traversal over AL links from `x`, truncated at `depth` hops.
///
/// Nodes are expanded in discovery order and each node's AL links in stored
/// order; the first discoverer of a node becomes its parent.
pub fn build_awareness(net: &SmallWorldNet, x: NodeId, depth: u32) -> Result<Awareness> {
    if !net.is_augmented() {
        return Err(Error::NotAugmented);
    }
    if x >= net.n() {
        return Err(Error::UnknownNode(x));
    }
    let mut members = vec![Member {
        node: x,
        level: 0,
        parent: None,
    }];
    let mut index = HashMap::from([(x, 0)]);
    let mut levels = vec![vec![x]];
    for level in 1..=depth {
        let mut fresh = Vec::new();
        for &u in &levels[level as usize - 1] {
            for &v in net.al_neighbors(u) {
                if let Entry::Vacant(slot) = index.entry(v) {
                    slot.insert(members.len());
                    members.push(Member {
                        node: v,
                        level,
                        parent: Some(u),
                    });
                    fresh.push(v);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        levels.push(fresh);
    }
    // Pad so that `levels().len() == depth + 1` even when the frontier dies out.
    levels.resize(depth as usize + 1, Vec::new());
    Ok(Awareness {
        origin: x,
        depth,
        levels,
        members,
        index,
    })
}

impl Awareness {
    pub fn origin(&self) -> NodeId {
        self.origin
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn levels(&self) -> &[Vec<NodeId>] {
        &self.levels
    }

    /// All members in discovery order (origin first).
    pub fn members(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.members.iter().map(|m| m.node)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, z: NodeId) -> bool {
        self.index.contains_key(&z)
    }

    pub fn level_of(&self, z: NodeId) -> Option<u32> {
        self.index.get(&z).map(|&i| self.members[i].level)
    }

    pub fn parent(&self, z: NodeId) -> Option<NodeId> {
        self.index.get(&z).and_then(|&i| self.members[i].parent)
    }

    /// Position of `z` in discovery order.
    pub fn discovery_rank(&self, z: NodeId) -> Option<usize> {
        self.index.get(&z).copied()
    }

    /// Minimum-hop AL path `[origin, .., z]` recovered from parent pointers.
    pub fn shortest_path(&self, z: NodeId) -> Result<Vec<NodeId>> {
        let mut at = *self.index.get(&z).ok_or(Error::UnknownNode(z))?;
        let mut path = Vec::with_capacity(self.members[at].level as usize + 1);
        path.push(z);
        while let Some(p) = self.members[at].parent {
            path.push(p);
            at = self.index[&p];
        }
        path.reverse();
        Ok(path)
    }
}
