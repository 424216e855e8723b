//! DAGs over `n` variables: acyclicity maintenance, the single-edge move
//! neighborhood used by structure MCMC, and conversion to the CPDAG
//! representative of the Markov equivalence class.
//!
//! Nodes are zero-based indices. An edge `(j, i)` always means `X_j -> X_i`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A directed acyclic graph stored as an adjacency matrix plus sorted parent
/// and child lists (kept mutually consistent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dag {
    n: usize,
    adj: Vec<bool>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

/// Kind of a single-edge move. The derived order (add < delete < reverse)
/// fixes the deterministic enumeration order of a [`Neighborhood`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// A single-edge move on some DAG; `from -> to` names the edge acted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
}

/// All legal single-edge moves from a DAG, in deterministic order
/// (kind, then lexicographic edge). Every listed move keeps the graph acyclic.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub moves: Vec<Move>,
}

impl Neighborhood {
    pub fn size(&self) -> usize {
        self.moves.len()
    }
}

impl Dag {
    /// Edgeless DAG on `n` nodes.
    pub fn empty(n: usize) -> Self {
        Dag {
            n,
            adj: vec![false; n * n],
            parents: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
        }
    }

    /// Complete DAG in the natural topological order (`j -> i` for all `j < i`).
    pub fn complete(n: usize) -> Self {
        let mut g = Dag::empty(n);
        for i in 0..n {
            for j in 0..i {
                g.insert_edge(j, i);
            }
        }
        g
    }

    /// Builds from an edge list, rejecting self-loops, duplicates and cycles.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Dag::empty(n);
        for &(j, i) in edges {
            if j >= n || i >= n {
                return Err(Error::Dimension(format!("edge ({j},{i}) out of range")));
            }
            if j == i {
                return Err(Error::Cycle(format!("self-loop at {j}")));
            }
            if g.has_edge(j, i) {
                return Err(Error::Parse(format!("duplicate edge ({j},{i})")));
            }
            g.insert_edge(j, i);
        }
        if g.topological_order().is_none() {
            return Err(Error::Cycle("edge list contains a directed cycle".into()));
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, j: usize, i: usize) -> bool {
        self.adj[j * self.n + i]
    }

    /// Sorted parent set of node `i`.
    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    /// All edges `(j, i)` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                if self.has_edge(j, i) {
                    out.push((j, i));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|b| **b).count()
    }

    fn insert_edge(&mut self, j: usize, i: usize) {
        debug_assert!(!self.has_edge(j, i));
        self.adj[j * self.n + i] = true;
        let pos = self.parents[i].partition_point(|&p| p < j);
        self.parents[i].insert(pos, j);
        let pos = self.children[j].partition_point(|&c| c < i);
        self.children[j].insert(pos, i);
    }

    fn delete_edge(&mut self, j: usize, i: usize) {
        debug_assert!(self.has_edge(j, i));
        self.adj[j * self.n + i] = false;
        self.parents[i].retain(|&p| p != j);
        self.children[j].retain(|&c| c != i);
    }

    /// Is there a directed path `from ~> to`? (`true` when `from == to`.)
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.reaches_skipping(from, to, None)
    }

    /// Reachability with one edge treated as absent.
    fn reaches_skipping(&self, from: usize, to: usize, skip: Option<(usize, usize)>) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            if std::mem::replace(&mut seen[u], true) {
                continue;
            }
            for &v in &self.children[u] {
                if skip == Some((u, v)) {
                    continue;
                }
                if !seen[v] {
                    stack.push(v);
                }
            }
        }
        false
    }

    /// Kahn topological order with the smallest eligible index first;
    /// `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|i| self.parents[i].len()).collect();
        let mut placed = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let next = (0..self.n).find(|&i| !placed[i] && indeg[i] == 0)?;
            placed[next] = true;
            order.push(next);
            for &v in &self.children[next] {
                indeg[v] -= 1;
            }
        }
        Some(order)
    }

    fn move_is_legal(&self, mv: &Move, cap: usize) -> bool {
        match mv.kind {
            // adding j -> i closes a cycle iff i already reaches j
            MoveKind::Add => self.parents[mv.to].len() < cap && !self.reaches(mv.to, mv.from),
            MoveKind::Delete => true,
            // i -> j is safe iff j cannot reach i once j -> i is gone
            MoveKind::Reverse => {
                self.parents[mv.from].len() < cap
                    && !self.reaches_skipping(mv.from, mv.to, Some((mv.from, mv.to)))
            }
        }
    }

    /// Enumerates every legal single-edge move: deletions of existing edges,
    /// plus additions and reversals whose result stays acyclic. With
    /// `max_fanin` set, moves that would push a parent set beyond the cap are
    /// excluded, and the reported size reflects that (so Hastings ratios
    /// built from it stay correct).
    pub fn neighborhood(&self, max_fanin: Option<usize>) -> Neighborhood {
        let cap = max_fanin.unwrap_or(usize::MAX);
        let mut moves = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                if j == i || self.has_edge(j, i) || self.has_edge(i, j) {
                    continue;
                }
                let mv = Move { kind: MoveKind::Add, from: j, to: i };
                if self.move_is_legal(&mv, cap) {
                    moves.push(mv);
                }
            }
        }
        for (j, i) in self.edges() {
            moves.push(Move { kind: MoveKind::Delete, from: j, to: i });
        }
        for (j, i) in self.edges() {
            let mv = Move { kind: MoveKind::Reverse, from: j, to: i };
            if self.move_is_legal(&mv, cap) {
                moves.push(mv);
            }
        }
        moves.sort();
        Neighborhood { moves }
    }

    /// `|N(G)|` without materializing the move list (used for the Hastings
    /// ratio of a proposal).
    pub fn neighborhood_size(&self, max_fanin: Option<usize>) -> usize {
        let cap = max_fanin.unwrap_or(usize::MAX);
        let mut count = 0;
        for j in 0..self.n {
            for i in 0..self.n {
                if j == i || self.has_edge(i, j) {
                    continue;
                }
                let mv = if self.has_edge(j, i) {
                    Move { kind: MoveKind::Reverse, from: j, to: i }
                } else {
                    Move { kind: MoveKind::Add, from: j, to: i }
                };
                if self.move_is_legal(&mv, cap) {
                    count += 1;
                }
            }
        }
        count + self.edge_count() // deletions are always legal
    }

    /// Applies a move taken from [`Dag::neighborhood`]; a move that would
    /// introduce a cycle (only possible on misuse) is a hard error.
    pub fn apply_move(&self, mv: &Move) -> Result<Dag> {
        let mut g = self.clone();
        match mv.kind {
            MoveKind::Add => {
                if g.has_edge(mv.from, mv.to) || mv.from == mv.to {
                    return Err(Error::Cycle(format!("cannot add ({},{})", mv.from, mv.to)));
                }
                g.insert_edge(mv.from, mv.to);
            }
            MoveKind::Delete => {
                if !g.has_edge(mv.from, mv.to) {
                    return Err(Error::Cycle(format!("no edge ({},{})", mv.from, mv.to)));
                }
                g.delete_edge(mv.from, mv.to);
            }
            MoveKind::Reverse => {
                if !g.has_edge(mv.from, mv.to) {
                    return Err(Error::Cycle(format!("no edge ({},{})", mv.from, mv.to)));
                }
                g.delete_edge(mv.from, mv.to);
                g.insert_edge(mv.to, mv.from);
            }
        }
        if g.topological_order().is_none() {
            return Err(Error::Cycle(format!(
                "move {:?} ({} -> {}) introduces a cycle",
                mv.kind, mv.from, mv.to
            )));
        }
        Ok(g)
    }

    /// Undirected skeleton as `(min, max)` pairs.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges()
            .into_iter()
            .map(|(j, i)| (j.min(i), j.max(i)))
            .collect()
    }

    /// V-structures `(p, q, child)` with `p < q`: two parents of `child`
    /// with no edge between them.
    pub fn v_structures(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for child in 0..self.n {
            let ps = &self.parents[child];
            for a in 0..ps.len() {
                for b in (a + 1)..ps.len() {
                    let (p, q) = (ps[a], ps[b]);
                    if !self.has_edge(p, q) && !self.has_edge(q, p) {
                        out.insert((p, q, child));
                    }
                }
            }
        }
        out
    }

    /// Converts to the completed partially directed representative of the
    /// equivalence class, via compelled/reversible edge labeling: edges are
    /// ordered from a topological node order and labels are propagated with
    /// the classical rules.
    pub fn to_cpdag(&self) -> Cpdag {
        #[derive(Clone, Copy, PartialEq)]
        enum Label {
            Unknown,
            Compelled,
            Reversible,
        }

        let order = self
            .topological_order()
            .expect("a Dag is acyclic by construction");
        let mut pos = vec![0usize; self.n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }

        // total edge order: by target position ascending, source position descending
        let mut edges = self.edges();
        edges.sort_by_key(|&(x, y)| (pos[y], std::cmp::Reverse(pos[x])));
        let index_of = |x: usize, y: usize| -> usize {
            edges.iter().position(|&e| e == (x, y)).unwrap()
        };

        let mut label = vec![Label::Unknown; edges.len()];
        for e in 0..edges.len() {
            if label[e] != Label::Unknown {
                continue;
            }
            let (x, y) = edges[e];
            let mut resolved = false;
            for &w in self.parents(x) {
                if label[index_of(w, x)] != Label::Compelled {
                    continue;
                }
                if !self.has_edge(w, y) {
                    // x -> y and every edge into y become compelled
                    for &p in self.parents(y) {
                        label[index_of(p, y)] = Label::Compelled;
                    }
                    resolved = true;
                    break;
                } else {
                    label[index_of(w, y)] = Label::Compelled;
                }
            }
            if resolved {
                continue;
            }
            let outside_parent = self
                .parents(y)
                .iter()
                .any(|&z| z != x && !self.has_edge(z, x));
            let new_label = if outside_parent {
                Label::Compelled
            } else {
                Label::Reversible
            };
            label[e] = new_label;
            for &p in self.parents(y) {
                let idx = index_of(p, y);
                if label[idx] == Label::Unknown {
                    label[idx] = new_label;
                }
            }
        }

        let mut directed = BTreeSet::new();
        let mut undirected = BTreeSet::new();
        for (e, &(x, y)) in edges.iter().enumerate() {
            match label[e] {
                Label::Compelled => {
                    directed.insert((x, y));
                }
                Label::Reversible => {
                    undirected.insert((x.min(y), x.max(y)));
                }
                Label::Unknown => unreachable!("all edges get labeled"),
            }
        }
        Cpdag {
            n: self.n,
            directed,
            undirected,
        }
    }

    /// Edge-list text, one `j -> i` per line, lexicographic order.
    pub fn to_edge_list_text(&self) -> String {
        let mut s = String::new();
        for (j, i) in self.edges() {
            s.push_str(&format!("{j} -> {i}\n"));
        }
        s
    }

    /// Parses the [`Dag::to_edge_list_text`] format. Blank lines are ignored.
    pub fn from_edge_list_text(n: usize, text: &str) -> Result<Dag> {
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split("->").map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("bad edge line '{line}'")));
            }
            let j = parts[0]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad node '{}'", parts[0])))?;
            let i = parts[1]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad node '{}'", parts[1])))?;
            edges.push((j, i));
        }
        Dag::from_edges(n, &edges)
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list_text())
    }
}

/// Completed partially directed acyclic graph: the representative of a
/// Markov equivalence class. Directed edges are compelled in every member of
/// the class; undirected edges occur in both orientations across members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpdag {
    n: usize,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

impl Cpdag {
    pub fn new(
        n: usize,
        directed: BTreeSet<(usize, usize)>,
        undirected: BTreeSet<(usize, usize)>,
    ) -> Self {
        Cpdag { n, directed, undirected }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    /// Is `j -> i` present, counting an undirected `j -- i` for both
    /// orientations?
    pub fn implies_edge(&self, j: usize, i: usize) -> bool {
        self.directed.contains(&(j, i)) || self.undirected.contains(&(j.min(i), j.max(i)))
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    /// Text form: `j -> i` for directed, `j -- i` for undirected edges.
    pub fn to_edge_list_text(&self) -> String {
        let mut s = String::new();
        for &(j, i) in &self.directed {
            s.push_str(&format!("{j} -> {i}\n"));
        }
        for &(j, i) in &self.undirected {
            s.push_str(&format!("{j} -- {i}\n"));
        }
        s
    }
}

impl fmt::Display for Cpdag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list_text())
    }
}

/// Structural equality of directed and undirected edge sets.
pub fn cpdag_equal(a: &Cpdag, b: &Cpdag) -> bool {
    a == b
}
