//! Capacitated clustering via a modified Kruskal forest algorithm.
//!
//! Candidate edges are scanned in ascending length. Two trees merge only if
//! they are distinct, the combined cargo fits one vehicle, and the edge is no
//! longer than either endpoint's distance to the depot — the last rule stops
//! clusters from sprawling across the whole map. Clients already committed to
//! a vehicle enter as one pre-merged tree per vehicle; edges between two
//! committed clients are not considered at all.

use crate::model::{distance, Point, FEAS_TOL};
use thiserror::Error;

/// One clustering participant: a request with its cargo weight and, for
/// committed clients, the vehicle it is bound to.
#[derive(Debug, Clone)]
pub struct ClusterNode {
    pub request_index: usize,
    pub location: Point,
    /// Cargo counting toward the capacity rule (undelivered size).
    pub weight: f64,
    pub fixed_to: Option<usize>,
}

/// A tree of the output forest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    /// Vehicle this tree is bound to, if it grew from committed clients.
    pub vehicle: Option<usize>,
    /// Member request indices, ascending.
    pub members: Vec<usize>,
    pub weight: f64,
}

/// Clustering result: the trees plus the log of merged edges (request-index
/// pairs with lengths, in merge order) for post-hoc verification.
#[derive(Debug, Clone)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub merge_log: Vec<(usize, usize, f64)>,
}

impl Forest {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("request {index} weighs {weight}, more than vehicle capacity {capacity}")]
    OverweightNode { index: usize, weight: f64, capacity: f64 },
}

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    /// Unites two distinct roots, returning the surviving root.
    fn union(&mut self, a: usize, b: usize) -> usize {
        debug_assert_ne!(a, b);
        let (big, small) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        self.parent[small] = big;
        if self.rank[big] == self.rank[small] {
            self.rank[big] += 1;
        }
        big
    }
}

/// Clusters requests into a capacity-respecting forest.
pub fn cluster(nodes: &[ClusterNode], depot: Point, capacity: f64) -> Result<Forest, ClusterError> {
    cluster_impl(nodes, depot, capacity, true)
}

/// Same algorithm with the depot-distance merge rule switchable; the public
/// entry point always enables it. Kept separate so the rule's effect on tree
/// count is testable.
fn cluster_impl(
    nodes: &[ClusterNode],
    depot: Point,
    capacity: f64,
    depot_distance_rule: bool,
) -> Result<Forest, ClusterError> {
    for node in nodes {
        if node.weight > capacity + FEAS_TOL {
            return Err(ClusterError::OverweightNode {
                index: node.request_index,
                weight: node.weight,
                capacity,
            });
        }
    }

    let n = nodes.len();
    let mut dsu = Dsu::new(n);
    let mut weight: Vec<f64> = nodes.iter().map(|c| c.weight).collect();
    let mut binding: Vec<Option<usize>> = vec![None; n];

    // Pre-merge each vehicle's committed clients into a single bound tree.
    let mut first_of_vehicle: Vec<(usize, usize)> = Vec::new(); // (vehicle, position)
    for (pos, node) in nodes.iter().enumerate() {
        if let Some(v) = node.fixed_to {
            match first_of_vehicle.iter().find(|&&(veh, _)| veh == v) {
                None => {
                    first_of_vehicle.push((v, pos));
                    binding[pos] = Some(v);
                }
                Some(&(_, anchor)) => {
                    let ra = dsu.find(anchor);
                    let rb = dsu.find(pos);
                    let w = weight[ra] + weight[rb];
                    let root = dsu.union(ra, rb);
                    weight[root] = w;
                    binding[root] = Some(v);
                }
            }
        }
    }

    // Candidate edges: every pair with at least one movable endpoint.
    struct Edge {
        a: usize, // positions in `nodes`
        b: usize,
        len: f64,
        key: (usize, usize), // request-index pair for deterministic ties
    }
    let mut edges = Vec::with_capacity(n.saturating_mul(n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if nodes[i].fixed_to.is_some() && nodes[j].fixed_to.is_some() {
                continue;
            }
            let len = distance(nodes[i].location, nodes[j].location);
            let (ra, rb) = (nodes[i].request_index, nodes[j].request_index);
            let key = if ra <= rb { (ra, rb) } else { (rb, ra) };
            edges.push(Edge { a: i, b: j, len, key });
        }
    }
    edges.sort_unstable_by(|x, y| {
        x.len.partial_cmp(&y.len).expect("edge lengths are never NaN").then(x.key.cmp(&y.key))
    });

    let mut merge_log = Vec::new();
    for e in &edges {
        let ra = dsu.find(e.a);
        let rb = dsu.find(e.b);
        if ra == rb {
            continue;
        }
        // Trees bound to two different vehicles must stay separate.
        if binding[ra].is_some() && binding[rb].is_some() {
            continue;
        }
        if weight[ra] + weight[rb] > capacity + FEAS_TOL {
            continue;
        }
        if depot_distance_rule {
            let da = distance(nodes[e.a].location, depot);
            let db = distance(nodes[e.b].location, depot);
            if e.len > da || e.len > db {
                continue;
            }
        }
        let w = weight[ra] + weight[rb];
        let bind = binding[ra].or(binding[rb]);
        let root = dsu.union(ra, rb);
        weight[root] = w;
        binding[root] = bind;
        merge_log.push((nodes[e.a].request_index, nodes[e.b].request_index, e.len));
    }

    // Materialize trees, members ascending, trees ordered by smallest member.
    let mut by_root: Vec<(usize, Tree)> = Vec::new();
    for pos in 0..n {
        let root = dsu.find(pos);
        match by_root.iter_mut().find(|(r, _)| *r == root) {
            Some((_, tree)) => tree.members.push(nodes[pos].request_index),
            None => by_root.push((
                root,
                Tree {
                    vehicle: binding[root],
                    members: vec![nodes[pos].request_index],
                    weight: weight[root],
                },
            )),
        }
    }
    let mut trees: Vec<Tree> = by_root.into_iter().map(|(_, t)| t).collect();
    for t in &mut trees {
        t.members.sort_unstable();
    }
    trees.sort_by_key(|t| t.members[0]);
    Ok(Forest { trees, merge_log })
}
