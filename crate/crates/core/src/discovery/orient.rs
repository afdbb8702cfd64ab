use std::collections::BTreeMap;

use super::Skeleton;
use crate::graph::{topological_order, CausalGraph};

/// Partially directed graph produced by the orientation phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpdag {
    pub names: Vec<String>,
    /// `arrow[a][b]`: directed edge `a -> b`.
    arrow: Vec<Vec<bool>>,
    /// Symmetric: undirected edge `a - b`.
    undirected: Vec<Vec<bool>>,
    pub sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    /// Colliders `(a, c, b)` oriented as `a -> c <- b`.
    pub v_structures: Vec<(usize, usize, usize)>,
    /// Edges left undirected because v-structures disagreed on them.
    pub conflicts: Vec<(usize, usize)>,
}

impl Cpdag {
    pub fn new(names: Vec<String>) -> Self {
        let d = names.len();
        Cpdag {
            names,
            arrow: vec![vec![false; d]; d],
            undirected: vec![vec![false; d]; d],
            sepsets: BTreeMap::new(),
            v_structures: Vec::new(),
            conflicts: Vec::new(),
        }
    }

    pub fn from_edges(names: Vec<String>, directed: &[(usize, usize)], undirected: &[(usize, usize)]) -> Self {
        let mut g = Cpdag::new(names);
        for &(a, b) in directed {
            g.arrow[a][b] = true;
        }
        for &(a, b) in undirected {
            g.undirected[a][b] = true;
            g.undirected[b][a] = true;
        }
        g
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_directed(&self, a: usize, b: usize) -> bool {
        self.arrow[a][b]
    }

    pub fn is_undirected(&self, a: usize, b: usize) -> bool {
        self.undirected[a][b]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.arrow[a][b] || self.arrow[b][a] || self.undirected[a][b]
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let d = self.len();
        (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .filter(|&(a, b)| self.arrow[a][b])
            .collect()
    }

    /// Undirected edges as `(a, b)` with `a < b`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize)> {
        let d = self.len();
        (0..d)
            .flat_map(|a| (a + 1..d).map(move |b| (a, b)))
            .filter(|&(a, b)| self.undirected[a][b])
            .collect()
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.undirected[a][b] = false;
        self.undirected[b][a] = false;
        self.arrow[a][b] = true;
    }
}

/// Orientation phase of PC: v-structures from the sepsets, then Meek rules
/// 1-4 applied to closure.
pub fn orient(skeleton: &Skeleton) -> Cpdag {
    let d = skeleton.len();
    let mut g = Cpdag::new(skeleton.names.clone());
    g.sepsets = skeleton.sepsets.clone();
    for (a, b) in skeleton.edges() {
        g.undirected[a][b] = true;
        g.undirected[b][a] = true;
    }

    // Collect every collider proposal first; an edge proposed in both
    // directions stays undirected.
    let mut proposals: Vec<Vec<bool>> = vec![vec![false; d]; d];
    let mut colliders = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if skeleton.adjacent(a, b) {
                continue;
            }
            let Some(sep) = skeleton.sepset(a, b) else {
                continue;
            };
            for c in 0..d {
                if skeleton.adjacent(a, c) && skeleton.adjacent(b, c) && !sep.contains(&c) {
                    proposals[a][c] = true;
                    proposals[b][c] = true;
                    colliders.push((a, c, b));
                }
            }
        }
    }
    for a in 0..d {
        for b in 0..d {
            if !proposals[a][b] {
                continue;
            }
            if proposals[b][a] {
                if a < b {
                    log::warn!(
                        "conflicting collider orientations on {} - {}; left undirected",
                        g.names[a],
                        g.names[b]
                    );
                    g.conflicts.push((a, b));
                }
                continue;
            }
            g.orient(a, b);
        }
    }
    g.v_structures = colliders
        .into_iter()
        .filter(|&(a, c, b)| g.arrow[a][c] && g.arrow[b][c])
        .collect();

    apply_meek_rules(&mut g);
    g
}

/// Applies Meek rules 1-4 until no edge changes. Edges listed in
/// `conflicts` are not touched.
pub fn apply_meek_rules(g: &mut Cpdag) {
    let d = g.len();
    let frozen = |g: &Cpdag, a: usize, b: usize| g.conflicts.contains(&(a.min(b), a.max(b)));
    loop {
        let mut changed = false;
        for a in 0..d {
            for b in 0..d {
                if a == b || !g.undirected[a][b] || frozen(g, a, b) {
                    continue;
                }
                if meek_r1(g, a, b) || meek_r2(g, a, b) || meek_r3(g, a, b) || meek_r4(g, a, b) {
                    g.orient(a, b);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// `c -> a - b`, `c` not adjacent to `b`.
fn meek_r1(g: &Cpdag, a: usize, b: usize) -> bool {
    (0..g.len()).any(|c| g.arrow[c][a] && c != b && !g.adjacent(c, b))
}

/// `a -> c -> b` with `a - b`.
fn meek_r2(g: &Cpdag, a: usize, b: usize) -> bool {
    (0..g.len()).any(|c| g.arrow[a][c] && g.arrow[c][b])
}

/// `a - c -> b`, `a - e -> b`, `c` and `e` non-adjacent.
fn meek_r3(g: &Cpdag, a: usize, b: usize) -> bool {
    let mids: Vec<usize> = (0..g.len())
        .filter(|&c| g.undirected[a][c] && g.arrow[c][b])
        .collect();
    mids.iter()
        .enumerate()
        .any(|(i, &c)| mids[i + 1..].iter().any(|&e| !g.adjacent(c, e)))
}

/// `a - c -> e -> b`, `a` adjacent to `e`, `c` not adjacent to `b`.
fn meek_r4(g: &Cpdag, a: usize, b: usize) -> bool {
    let d = g.len();
    (0..d).any(|c| {
        c != b
            && g.undirected[a][c]
            && !g.adjacent(c, b)
            && (0..d).any(|e| e != a && g.arrow[c][e] && g.arrow[e][b] && g.adjacent(a, e))
    })
}

/// A DAG extension of a CPDAG, with a flag recording whether the
/// consistent-extension search failed and a fallback ordering was used.
#[derive(Debug, Clone, PartialEq)]
pub struct DagExtension {
    pub dag: CausalGraph,
    pub fallback: bool,
}

/// Consistent DAG extension in the style of Dor and Tarsi.
///
/// Repeatedly removes a sink: a node with no outgoing directed edge whose
/// undirected neighbours are adjacent to all of its other neighbours. The
/// highest-index qualifying node is taken first, so a lone undirected edge
/// `A - B` becomes `A -> B`. If no node qualifies, remaining undirected edges
/// are oriented along a topological order of the directed part and
/// `fallback` is set.
pub fn cpdag_to_dag(cpdag: &Cpdag) -> DagExtension {
    let d = cpdag.len();
    let mut arrow = cpdag.arrow.clone();
    let mut undirected = cpdag.undirected.clone();
    let mut alive = vec![true; d];
    let mut fallback = false;

    for _ in 0..d {
        let adj = |x: usize, y: usize, arrow: &Vec<Vec<bool>>, und: &Vec<Vec<bool>>| {
            arrow[x][y] || arrow[y][x] || und[x][y]
        };
        let candidate = (0..d).rev().find(|&x| {
            if !alive[x] || (0..d).any(|y| alive[y] && arrow[x][y]) {
                return false;
            }
            let neighbours: Vec<usize> = (0..d)
                .filter(|&y| alive[y] && y != x && adj(x, y, &arrow, &undirected))
                .collect();
            neighbours.iter().filter(|&&y| undirected[x][y]).all(|&y| {
                neighbours
                    .iter()
                    .all(|&z| z == y || adj(y, z, &arrow, &undirected))
            })
        });
        let Some(x) = candidate else {
            fallback = true;
            break;
        };
        for y in 0..d {
            if alive[y] && undirected[x][y] {
                undirected[x][y] = false;
                undirected[y][x] = false;
                arrow[y][x] = true;
            }
        }
        alive[x] = false;
    }

    if fallback {
        log::warn!("no consistent DAG extension; orienting remaining edges by topological position");
        let parents: Vec<Vec<usize>> = (0..d).map(|b| (0..d).filter(|&a| arrow[a][b]).collect()).collect();
        let order = topological_order(&parents).unwrap_or_else(|_| {
            // Directed part itself is cyclic: fall back to index order for everything.
            for a in 0..d {
                for b in 0..d {
                    if arrow[a][b] && a > b {
                        arrow[a][b] = false;
                        undirected[a][b] = true;
                        undirected[b][a] = true;
                    }
                }
            }
            (0..d).collect()
        });
        let mut position = vec![0; d];
        for (p, &node) in order.iter().enumerate() {
            position[node] = p;
        }
        for a in 0..d {
            for b in 0..d {
                if undirected[a][b] && position[a] < position[b] {
                    undirected[a][b] = false;
                    undirected[b][a] = false;
                    arrow[a][b] = true;
                }
            }
        }
    }

    let edges: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .filter(|&(a, b)| arrow[a][b])
        .collect();
    let dag = CausalGraph::from_edges(cpdag.names.clone(), &edges).expect("extension is acyclic");
    DagExtension { dag, fallback }
}
