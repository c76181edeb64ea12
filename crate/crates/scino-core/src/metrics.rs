//! Causal-discovery metrics: order divergence, structural Hamming distance,
//! and structural intervention distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;

/// Bundle of metric values for one prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub od: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shd: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cumulative_od: Option<Vec<usize>>,
}

/// Number of true edges that run against the order: edges u→v where u
/// appears after v in `order` (a topological order, causes first).
pub fn order_divergence(order: &[usize], g: &Dag) -> Result<usize> {
    let pos = order_positions(order, g)?;
    let mut count = 0;
    for (u, v) in g.edges() {
        if pos[u] > pos[v] {
            count += 1;
        }
    }
    Ok(count)
}

/// Per-step series of order violations in leaf-removal order (the reverse
/// of the topological order). Step k charges the edges from the removed
/// leaf to nodes removed strictly later; the running sum ends at the total
/// order divergence.
pub fn cumulative_od(order: &[usize], g: &Dag) -> Result<Vec<usize>> {
    let pos = order_positions(order, g)?;
    let d = g.n_nodes();
    // removal_step[node]: 0-based step at which the node was removed.
    // Topological position p is removed at step d-1-p.
    let mut removal_step = vec![0usize; d];
    for (node, &p) in pos.iter().enumerate() {
        removal_step[node] = d - 1 - p;
    }
    let mut per_step = vec![0usize; d.saturating_sub(1)];
    for (u, v) in g.edges() {
        if removal_step[u] < removal_step[v] {
            per_step[removal_step[u]] += 1;
        }
    }
    let mut acc = 0;
    Ok(per_step
        .into_iter()
        .map(|c| {
            acc += c;
            acc
        })
        .collect())
}

fn order_positions(order: &[usize], g: &Dag) -> Result<Vec<usize>> {
    let d = g.n_nodes();
    if order.len() != d {
        return Err(Error::Data(format!(
            "order covers {} nodes, graph has {d}",
            order.len()
        )));
    }
    let mut pos = vec![usize::MAX; d];
    for (p, &node) in order.iter().enumerate() {
        if node >= d || pos[node] != usize::MAX {
            return Err(Error::Data(format!("order is not a permutation: node {node}")));
        }
        pos[node] = p;
    }
    Ok(pos)
}

/// Count of unordered pairs whose edge type (none / i→j / j→i) differs;
/// a reversal costs 1.
pub fn shd(g: &Dag, g_hat: &Dag) -> Result<usize> {
    check_same_nodes(g, g_hat)?;
    let d = g.n_nodes();
    let mut count = 0;
    for i in 0..d {
        for j in i + 1..d {
            let a = (g.has_edge(i, j), g.has_edge(j, i));
            let b = (g_hat.has_edge(i, j), g_hat.has_edge(j, i));
            if a != b {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Ordered pairs (i, j) for which the predicted parent set Pa_ĝ(i) fails
/// the adjustment criterion for the effect of do(x_i) on x_j in the true
/// graph.
pub fn sid(g: &Dag, g_hat: &Dag) -> Result<usize> {
    check_same_nodes(g, g_hat)?;
    let d = g.n_nodes();
    let mut count = 0;
    for i in 0..d {
        let z: Vec<usize> = g_hat.parents(i);
        for j in 0..d {
            if i != j && !adjustment_valid(g, i, j, &z) {
                count += 1;
            }
        }
    }
    Ok(count)
}

fn check_same_nodes(a: &Dag, b: &Dag) -> Result<()> {
    if a.names() != b.names() {
        return Err(Error::Data("graphs have different node sets".into()));
    }
    Ok(())
}

/// Is `z` a valid adjustment set for the effect of do(x_i) on x_j in `g`?
///
/// Nodes on proper causal paths and their descendants are forbidden in
/// `z`; the remaining (non-causal) paths must be d-separated by `z` in the
/// proper back-door graph, i.e. `g` with the first edge of every proper
/// causal path removed. When j itself sits in `z`, adjustment collapses to
/// the marginal of x_j, which is correct exactly when there is no directed
/// path from i to j.
fn adjustment_valid(g: &Dag, i: usize, j: usize, z: &[usize]) -> bool {
    let d = g.n_nodes();
    let de_i = g.descendants(i);
    let causal_reach_j = reaches(g, j); // w →* j
    // Nodes (≠ i) lying on a directed path i →* j.
    let cpn: Vec<usize> = (0..d)
        .filter(|&w| w != i && de_i[w] && (w == j || causal_reach_j[w]))
        .collect();

    if z.contains(&j) {
        return cpn.is_empty();
    }

    // forbidden set: causal-path nodes and all their descendants
    let mut forbidden = vec![false; d];
    for &w in &cpn {
        forbidden[w] = true;
        for (v, &is_de) in g.descendants(w).iter().enumerate() {
            if is_de {
                forbidden[v] = true;
            }
        }
    }
    if z.iter().any(|&v| forbidden[v]) {
        return false;
    }

    // proper back-door graph: drop i→c for children c on causal paths
    let first_on_causal: Vec<usize> = g
        .children(i)
        .into_iter()
        .filter(|&c| cpn.contains(&c))
        .collect();
    d_separated(g, i, j, z, &first_on_causal)
}

/// Nodes from which `target` is reachable along directed edges.
fn reaches(g: &Dag, target: usize) -> Vec<bool> {
    let d = g.n_nodes();
    let mut out = vec![false; d];
    let mut stack = vec![target];
    // walk edges backwards
    while let Some(v) = stack.pop() {
        for p in g.parents(v) {
            if !out[p] {
                out[p] = true;
                stack.push(p);
            }
        }
    }
    out
}

/// d-separation of `src` and `dst` given `z`, in `g` with the edges
/// `src→c, c ∈ removed_children` deleted. Reachability over (node, arrival
/// direction) states; collider activation uses the ancestors-of-z closure.
fn d_separated(g: &Dag, src: usize, dst: usize, z: &[usize], removed_children: &[usize]) -> bool {
    let d = g.n_nodes();
    let in_z = {
        let mut v = vec![false; d];
        for &n in z {
            v[n] = true;
        }
        v
    };
    let edge_removed =
        |u: usize, v: usize| -> bool { u == src && removed_children.contains(&v) };

    // z together with its ancestors: a collider can open iff it lies here.
    let mut anz = in_z.clone();
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        for p in g.parents(v) {
            if !edge_removed(p, v) && !anz[p] {
                anz[p] = true;
                stack.push(p);
            }
        }
    }

    // state: (node, arrived_via_arrowhead). arrived_via_arrowhead = true
    // means the trail entered through an edge pointing at the node.
    let mut visited = vec![[false; 2]; d];
    let mut queue: Vec<(usize, bool)> = Vec::new();
    for c in g.children(src) {
        if !edge_removed(src, c) {
            queue.push((c, true));
        }
    }
    for p in g.parents(src) {
        queue.push((p, false));
    }

    while let Some((v, head_on)) = queue.pop() {
        if v == dst {
            return false; // active trail found
        }
        if visited[v][head_on as usize] {
            continue;
        }
        visited[v][head_on as usize] = true;

        if head_on {
            // chain: continue downward through a non-conditioned node
            if !in_z[v] {
                for c in g.children(v) {
                    if !edge_removed(v, c) {
                        queue.push((c, true));
                    }
                }
            }
            // collider: bounce back up if v or a descendant is conditioned
            if anz[v] {
                for p in g.parents(v) {
                    if !edge_removed(p, v) {
                        queue.push((p, false));
                    }
                }
            }
        } else if !in_z[v] {
            // arrived at the tail: fork or chain through v
            for p in g.parents(v) {
                if !edge_removed(p, v) {
                    queue.push((p, false));
                }
            }
            for c in g.children(v) {
                if !edge_removed(v, c) {
                    queue.push((c, true));
                }
            }
        }
    }
    true
}
