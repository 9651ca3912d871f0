//! Stallings folding for finitely generated subgroups of a free group.
//!
//! Each generator is glued in as a loop at the base vertex, then edges with a
//! common source and label are identified until the graph is folded. Reading a
//! word from the base decides membership; the edges outside a breadth-first
//! spanning tree give a free basis.

use std::collections::{BTreeMap, VecDeque};

use crate::word::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupGraph {
    /// `out[v][l]` is the end of the edge leaving `v` with label `l`.
    out: Vec<BTreeMap<Letter, usize>>,
    /// Positively labelled edges `(source, generator, target)`.
    edges: Vec<(usize, usize, usize)>,
    /// Reduced label of the spanning-tree path from the base to each vertex.
    tree_path: Vec<Word>,
    /// For each edge, its index in the basis when it lies outside the tree.
    basis_index: BTreeMap<(usize, Letter), (usize, bool)>,
    basis: Vec<Word>,
}

struct Folder {
    parent: Vec<usize>,
    out: Vec<BTreeMap<Letter, usize>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.out.push(BTreeMap::new());
        self.parent.len() - 1
    }

    fn attach(&mut self, u: usize, l: Letter, v: usize) {
        match self.out[u].get(&l) {
            Some(&w) => self.pending.push((w, v)),
            None => {
                self.out[u].insert(l, v);
            }
        }
    }

    fn add_edge(&mut self, u: usize, l: Letter, v: usize) {
        let (u, v) = (self.find(u), self.find(v));
        self.attach(u, l, v);
        self.attach(v, l.inverse(), u);
        self.fold();
    }

    fn fold(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (mut a, mut b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            if self.out[a].len() < self.out[b].len() {
                std::mem::swap(&mut a, &mut b);
            }
            self.parent[b] = a;
            for (l, t) in std::mem::take(&mut self.out[b]) {
                self.attach(a, l, t);
            }
        }
    }
}

impl SubgroupGraph {
    /// Folded graph of the subgroup generated by `generators`.
    pub fn fold(generators: &[Word]) -> SubgroupGraph {
        let mut f = Folder {
            parent: Vec::new(),
            out: Vec::new(),
            pending: Vec::new(),
        };
        let base = f.vertex();
        for g in generators {
            let g = g.reduce();
            let n = g.len();
            let mut prev = base;
            for (i, &l) in g.letters().iter().enumerate() {
                let next = if i + 1 == n { base } else { f.vertex() };
                f.add_edge(prev, l, next);
                prev = next;
            }
        }

        // Relabel surviving vertices in breadth-first order from the base.
        let root = f.find(base);
        let mut label = vec![usize::MAX; f.parent.len()];
        let mut order = vec![root];
        label[root] = 0;
        let mut tree_path = vec![Word::empty()];
        let mut tree_edge: Vec<(usize, Letter)> = Vec::new();
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let entries: Vec<(Letter, usize)> = f.out[v].iter().map(|(&l, &t)| (l, t)).collect();
            for (l, t) in entries {
                let t = f.find(t);
                if label[t] == usize::MAX {
                    label[t] = order.len();
                    order.push(t);
                    let mut p = tree_path[label[v]].clone();
                    p.push(l);
                    tree_path.push(p);
                    tree_edge.push((label[v], l));
                    queue.push_back(t);
                }
            }
        }
        let mut out = vec![BTreeMap::new(); order.len()];
        for (i, &v) in order.iter().enumerate() {
            let entries: Vec<(Letter, usize)> = f.out[v].iter().map(|(&l, &t)| (l, t)).collect();
            for (l, t) in entries {
                out[i].insert(l, label[f.find(t)]);
            }
        }

        let mut edges = Vec::new();
        let mut basis = Vec::new();
        let mut basis_index = BTreeMap::new();
        for (u, targets) in out.iter().enumerate() {
            for (&l, &v) in targets {
                if l.is_inverse() {
                    continue;
                }
                edges.push((u, l.generator(), v));
                let in_tree = tree_edge.contains(&(u, l)) || tree_edge.contains(&(v, l.inverse()));
                if !in_tree {
                    let mut w = tree_path[u].clone();
                    w.push(l);
                    basis_index.insert((u, l), (basis.len(), false));
                    basis_index.insert((v, l.inverse()), (basis.len(), true));
                    basis.push(w.free_mul(&tree_path[v].inverse()));
                }
            }
        }
        SubgroupGraph {
            out,
            edges,
            tree_path,
            basis_index,
            basis,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    /// Free basis; its length is the rank of the subgroup.
    pub fn basis(&self) -> &[Word] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Label of the spanning-tree path from the base vertex to `v`.
    pub fn tree_path(&self, v: usize) -> &Word {
        &self.tree_path[v]
    }

    /// Whether no two edges with the same label leave one vertex.
    pub fn is_folded(&self) -> bool {
        // holds by construction of `out`; also check edge symmetry
        self.out.iter().enumerate().all(|(u, targets)| {
            targets
                .iter()
                .all(|(&l, &v)| self.out[v].get(&l.inverse()) == Some(&u))
        })
    }

    fn trace(&self, w: &Word) -> Option<usize> {
        let mut v = 0;
        for l in w.letters() {
            v = *self.out[v].get(l)?;
        }
        Some(v)
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.trace(w) == Some(0)
    }

    /// Coordinates of a member in the free basis: letter `i` stands for
    /// `basis()[i]`. `None` for non-members.
    pub fn express(&self, w: &Word) -> Option<Word> {
        let mut v = 0;
        let mut out = Word::empty();
        for &l in w.letters() {
            if let Some(&(i, inv)) = self.basis_index.get(&(v, l)) {
                out.push_reduced(Letter::new(i, inv));
            }
            v = *self.out[v].get(&l)?;
        }
        (v == 0).then_some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::w;

    #[test]
    fn whole_group() {
        let g = SubgroupGraph::fold(&[w("a"), w("b")]);
        assert_eq!(g.rank(), 2);
        assert_eq!(g.vertex_count(), 1);
        assert!(g.contains(&w("abAAbB")));
    }

    #[test]
    fn squares() {
        let g = SubgroupGraph::fold(&[w("a"), w("bb")]);
        assert!(!g.contains(&w("b")));
        assert!(g.contains(&w("bbabb")));
        assert_eq!(g.rank(), 2);
        let coords = g.express(&w("bbabb")).unwrap();
        assert_eq!(coords.substitute(g.basis()).reduce(), w("bbabb"));
    }

    #[test]
    fn folding_collapses_redundant_generators() {
        // <ab, abab, b> = <a, b>
        let g = SubgroupGraph::fold(&[w("ab"), w("abab"), w("b")]);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.rank(), 2);
        assert!(g.is_folded());
        let g = SubgroupGraph::fold(&[w("aba"), w("aBa")]);
        assert!(g.contains(&w("abbA")));
        assert!(!g.contains(&w("a")));
    }

    #[test]
    fn edges_minus_vertices_plus_one_is_rank() {
        for gens in [vec![w("abA"), w("bab")], vec![w("aab"), w("bAAb"), w("ba")], vec![w("e")]] {
            let g = SubgroupGraph::fold(&gens);
            assert_eq!(g.edges().len() + 1, g.vertex_count() + g.rank());
            for b in g.basis() {
                assert!(g.contains(b));
            }
        }
    }
}
