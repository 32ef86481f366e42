//! Strongly connected components of small digraphs, used for the
//! structural analysis of gambler transition graphs.

use std::collections::BTreeSet;

/// Condensation of a digraph given by adjacency lists.
#[derive(Clone, Debug)]
pub(crate) struct Condensation {
    /// Component index of each vertex. Components are numbered by their
    /// smallest vertex, ascending, so the labeling is deterministic.
    pub comp_of: Vec<usize>,
    /// Vertices of each component, ascending.
    pub components: Vec<Vec<usize>>,
    /// Edges between distinct components.
    pub comp_edges: Vec<BTreeSet<usize>>,
}

impl Condensation {
    pub fn new(adjacency: &[Vec<usize>]) -> Self {
        let comps = tarjan(adjacency);
        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by_key(|&c| comps[c][0]);
        let mut components = Vec::with_capacity(comps.len());
        let mut comp_of = vec![usize::MAX; adjacency.len()];
        for &c in &order {
            let idx = components.len();
            for &v in &comps[c] {
                comp_of[v] = idx;
            }
            components.push(comps[c].clone());
        }
        let mut comp_edges = vec![BTreeSet::new(); components.len()];
        for (v, succ) in adjacency.iter().enumerate() {
            for &w in succ {
                if comp_of[v] != comp_of[w] {
                    comp_edges[comp_of[v]].insert(comp_of[w]);
                }
            }
        }
        Condensation {
            comp_of,
            components,
            comp_edges,
        }
    }

    /// Components with no outgoing edges, as component indices.
    pub fn bottom_components(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&c| self.comp_edges[c].is_empty())
            .collect()
    }

    /// For each component, the set of bottom components reachable from it
    /// (a bottom component reaches itself).
    pub fn reachable_bottoms(&self) -> Vec<BTreeSet<usize>> {
        let n = self.components.len();
        let bottoms: BTreeSet<usize> = self.bottom_components().into_iter().collect();
        let mut reach: Vec<Option<BTreeSet<usize>>> = vec![None; n];
        fn solve(
            c: usize,
            edges: &[BTreeSet<usize>],
            bottoms: &BTreeSet<usize>,
            reach: &mut Vec<Option<BTreeSet<usize>>>,
        ) -> BTreeSet<usize> {
            if let Some(r) = &reach[c] {
                return r.clone();
            }
            let mut acc = BTreeSet::new();
            if bottoms.contains(&c) {
                acc.insert(c);
            }
            // The condensation is acyclic, so recursion terminates.
            for &next in edges[c].iter() {
                acc.extend(solve(next, edges, bottoms, reach));
            }
            reach[c] = Some(acc.clone());
            acc
        }
        (0..n)
            .map(|c| solve(c, &self.comp_edges, &bottoms, &mut reach))
            .collect()
    }
}

/// Iterative Tarjan; components come out in reverse topological order.
fn tarjan(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();
    // (vertex, next successor position) frames replace recursion.
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos < adjacency[v].len() {
                let w = adjacency[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("root still on stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}
