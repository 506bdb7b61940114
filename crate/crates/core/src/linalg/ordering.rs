//! Fill-reducing nested-dissection ordering on the symmetrized pattern.

use std::collections::VecDeque;

use super::CsrMatrix;

const LEAF_SIZE: usize = 64;

struct Graph {
    ptr: Vec<usize>,
    adj: Vec<usize>,
}

impl Graph {
    fn from_matrix(a: &CsrMatrix) -> Self {
        let n = a.nrows;
        let t = a.transpose();
        let mut ptr = Vec::with_capacity(n + 1);
        let mut adj = Vec::with_capacity(2 * a.nnz());
        ptr.push(0);
        let mut row: Vec<usize> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend(a.row(i).map(|(j, _)| j).filter(|&j| j != i));
            row.extend(t.row(i).map(|(j, _)| j).filter(|&j| j != i));
            row.sort_unstable();
            row.dedup();
            adj.extend_from_slice(&row);
            ptr.push(adj.len());
        }
        Graph { ptr, adj }
    }

    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
}

struct Dissector<'g> {
    g: &'g Graph,
    region: Vec<usize>,
    level: Vec<usize>,
    next_region: usize,
    order: Vec<usize>,
}

impl Dissector<'_> {
    /// BFS over `region == id` from `start`; returns nodes in visit order
    /// and fills `level`.
    fn bfs(&mut self, start: usize, id: usize) -> Vec<usize> {
        let mut seen = vec![start];
        let mut queue = VecDeque::from([start]);
        let stamp = usize::MAX - id;
        self.level[start] = 0;
        let mut marker = std::mem::take(&mut self.region);
        marker[start] = stamp;
        while let Some(v) = queue.pop_front() {
            for &w in self.g.neighbors(v) {
                if marker[w] == id {
                    marker[w] = stamp;
                    self.level[w] = self.level[v] + 1;
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        for &v in &seen {
            marker[v] = id;
        }
        self.region = marker;
        seen
    }

    fn fresh(&mut self, nodes: &[usize]) -> usize {
        self.next_region += 1;
        for &v in nodes {
            self.region[v] = self.next_region;
        }
        self.next_region
    }

    fn dissect(&mut self, nodes: Vec<usize>) {
        // separators of a parent are emitted after both children
        let mut tasks = vec![Task::Split(nodes)];
        while let Some(task) = tasks.pop() {
            match task {
                Task::Emit(sep) => self.order.extend(sep),
                Task::Split(nodes) => {
                    if nodes.len() <= LEAF_SIZE {
                        self.order.extend(nodes);
                        continue;
                    }
                    let id = self.fresh(&nodes);
                    let comp = self.bfs(nodes[0], id);
                    if comp.len() < nodes.len() {
                        let mut comps = vec![comp];
                        self.fresh(&comps[0]);
                        for &v in &nodes {
                            if self.region[v] == id {
                                let c = self.bfs(v, id);
                                self.fresh(&c);
                                comps.push(c);
                            }
                        }
                        // batch tiny components into one task
                        let mut small = Vec::new();
                        for c in comps {
                            if c.len() <= LEAF_SIZE {
                                small.extend(c);
                            } else {
                                tasks.push(Task::Split(c));
                            }
                        }
                        self.order.extend(small);
                        continue;
                    }
                    let (a, b, sep) = self.split(comp, id);
                    if a.is_empty() || b.is_empty() {
                        self.order.extend(a.into_iter().chain(b).chain(sep));
                        continue;
                    }
                    tasks.push(Task::Emit(sep));
                    tasks.push(Task::Split(b));
                    tasks.push(Task::Split(a));
                }
            }
        }
    }

    /// Level-set separator from a pseudo-peripheral node of a connected set.
    fn split(&mut self, nodes: Vec<usize>, id: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut start = nodes[0];
        let mut visit = self.bfs(start, id);
        let mut depth = self.level[*visit.last().unwrap()];
        for _ in 0..4 {
            let far = *visit.last().unwrap();
            let trial = self.bfs(far, id);
            let d = self.level[*trial.last().unwrap()];
            if d <= depth {
                // restore levels for the chosen root
                visit = self.bfs(start, id);
                break;
            }
            start = far;
            depth = d;
            visit = trial;
        }
        let half = visit.len() / 2;
        let cut = self.level[visit[half]].max(1);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut sep = Vec::new();
        for &v in &visit {
            let l = self.level[v];
            if l < cut {
                a.push(v);
            } else if l > cut {
                b.push(v);
            } else if self.g.neighbors(v).iter().any(|&w| self.region[w] == id && self.level[w] == cut + 1) {
                sep.push(v);
            } else {
                a.push(v);
            }
        }
        (a, b, sep)
    }
}

enum Task {
    Split(Vec<usize>),
    Emit(Vec<usize>),
}

/// Returns `perm` with `perm[k]` the original index eliminated `k`-th.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let g = Graph::from_matrix(a);
    let n = a.nrows;
    let mut d =
        Dissector { g: &g, region: vec![0; n], level: vec![0; n], next_region: 0, order: Vec::with_capacity(n) };
    d.dissect((0..n).collect());
    debug_assert_eq!(d.order.len(), n);
    d.order
}
