//! Directed acyclic graphs over named nodes.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Adjacency-matrix DAG: `adj[i][j]` means an edge i→j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    adj: Vec<Vec<bool>>,
}

impl Dag {
    /// Build from an edge list; validates acyclicity and rejects self-loops.
    pub fn new(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let d = names.len();
        let mut adj = vec![vec![false; d]; d];
        for &(i, j) in edges {
            if i >= d || j >= d {
                return Err(Error::Data(format!("edge ({i},{j}) out of range for {d} nodes")));
            }
            if i == j {
                return Err(Error::Data(format!("self-loop at node {i}")));
            }
            adj[i][j] = true;
        }
        let dag = Self { names, adj };
        if dag.topological_order().is_none() {
            return Err(Error::Data("graph contains a cycle".into()));
        }
        Ok(dag)
    }

    pub fn empty(names: Vec<String>) -> Self {
        let d = names.len();
        Self {
            names,
            adj: vec![vec![false; d]; d],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i][j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n_nodes() {
            for j in 0..self.n_nodes() {
                if self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().flatten().filter(|&&e| e).count()
    }

    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| self.adj[i][j]).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&j| self.adj[i][j]).collect()
    }

    /// Nodes with no children.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&i| self.adj[i].iter().all(|&e| !e))
            .collect()
    }

    /// Kahn's algorithm; ties broken by smallest node index so the result
    /// is deterministic. `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let d = self.n_nodes();
        let mut indeg = vec![0usize; d];
        for i in 0..d {
            for j in 0..d {
                if self.adj[i][j] {
                    indeg[j] += 1;
                }
            }
        }
        // BinaryHeap would also work; a scan keeps the index tie-break obvious.
        let mut order = Vec::with_capacity(d);
        let mut ready: Vec<usize> = (0..d).filter(|&i| indeg[i] == 0).collect();
        while let Some(&next) = ready.iter().min() {
            ready.retain(|&v| v != next);
            order.push(next);
            for j in 0..d {
                if self.adj[next][j] {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        (order.len() == d).then_some(order)
    }

    /// All descendants of `i` (excluding `i` itself).
    pub fn descendants(&self, i: usize) -> Vec<bool> {
        let d = self.n_nodes();
        let mut seen = vec![false; d];
        let mut queue = VecDeque::from(self.children(i));
        while let Some(v) = queue.pop_front() {
            if !seen[v] {
                seen[v] = true;
                queue.extend(self.children(v));
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn rejects_cycles() {
        let err = Dag::new(names(2), &[(0, 1), (1, 0)]).unwrap_err();
        assert!(err.to_string().contains("cycle"));
    }

    #[test]
    fn rejects_self_loop() {
        assert!(Dag::new(names(2), &[(0, 0)]).is_err());
    }

    #[test]
    fn topological_order_of_chain() {
        let dag = Dag::new(names(3), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(dag.topological_order().unwrap(), vec![0, 1, 2]);
        assert_eq!(dag.leaves(), vec![2]);
    }

    #[test]
    fn descendants_follow_paths() {
        let dag = Dag::new(names(4), &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let de = dag.descendants(0);
        assert_eq!(de, vec![false, true, true, true]);
    }
}
