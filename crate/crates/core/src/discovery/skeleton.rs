use std::collections::BTreeMap;

use nalgebra::DMatrix;
use statrs::function::erf::erfc;

use super::{DiscoveryError, SurrogateCorrelation};

/// Undirected skeleton with the separating set of every removed pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub names: Vec<String>,
    adjacent: Vec<Vec<bool>>,
    /// Keyed by `(i, j)` with `i < j`.
    pub sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    pub tests_run: usize,
    /// Tests whose partial correlation was undefined (treated as dependence).
    pub singular_tests: usize,
}

impl Skeleton {
    pub fn complete(names: Vec<String>) -> Self {
        let d = names.len();
        let adjacent = (0..d).map(|i| (0..d).map(|j| i != j).collect()).collect();
        Skeleton {
            names,
            adjacent,
            sepsets: BTreeMap::new(),
            tests_run: 0,
            singular_tests: 0,
        }
    }

    /// Builds a skeleton from explicit edges and sepsets (mostly for tests).
    pub fn from_edges(
        names: Vec<String>,
        edges: &[(usize, usize)],
        sepsets: BTreeMap<(usize, usize), Vec<usize>>,
    ) -> Self {
        let d = names.len();
        let mut adjacent = vec![vec![false; d]; d];
        for &(a, b) in edges {
            adjacent[a][b] = true;
            adjacent[b][a] = true;
        }
        Skeleton {
            names,
            adjacent,
            sepsets,
            tests_run: 0,
            singular_tests: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacent[a][b]
    }

    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.adjacent[a][b]).collect()
    }

    /// Edges `(i, j)` with `i < j`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.len();
        (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adjacent[i][j])
            .collect()
    }

    pub fn sepset(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.sepsets.get(&(a.min(b), a.max(b))).map(Vec::as_slice)
    }
}

/// Partial correlation of `i` and `j` given `cond`, from the inverse of the
/// corresponding principal submatrix. `None` when the submatrix is singular.
pub fn partial_correlation(corr: &DMatrix<f64>, i: usize, j: usize, cond: &[usize]) -> Option<f64> {
    if cond.is_empty() {
        return Some(corr[(i, j)]);
    }
    let idx: Vec<usize> = [i, j].iter().chain(cond).copied().collect();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| corr[(idx[r], idx[c])]);
    let inv = sub.try_inverse()?;
    let (pii, pjj) = (inv[(0, 0)], inv[(1, 1)]);
    if !(pii > 0.0 && pjj > 0.0) || !inv.iter().all(|v| v.is_finite()) {
        return None;
    }
    Some((-inv[(0, 1)] / (pii * pjj).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of the Fisher-z test for a partial correlation `r`
/// estimated from `n` samples with `k` conditioning variables.
pub fn fisher_z_pvalue(r: f64, n: usize, k: usize) -> f64 {
    let dof = n as f64 - k as f64 - 3.0;
    if dof <= 0.0 {
        return 1.0;
    }
    let r = r.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln() * dof.sqrt();
    // 2 * (1 - Φ(|z|)) = erfc(|z| / √2)
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Lexicographic `k`-subsets of `items`.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// PC skeleton search with Fisher-z tests on `corr`.
///
/// Level by level (conditioning-set size 0..=`max_cond`), every adjacent pair
/// `(i, j)`, `i < j`, is tested against subsets of `adj(i) \ {j}` and then
/// `adj(j) \ {i}`, in lexicographic order. Adjacency is frozen within a level
/// and removals are applied between levels, so the result does not depend on
/// pair order.
pub fn pc_skeleton(corr: &SurrogateCorrelation, alpha: f64, max_cond: usize) -> Result<Skeleton, DiscoveryError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DiscoveryError::InvalidParameter(format!("alpha = {alpha}")));
    }
    let d = corr.dim();
    let mut skel = Skeleton::complete(corr.names.clone());
    for level in 0..=max_cond {
        let frozen: Vec<Vec<usize>> = (0..d).map(|a| skel.neighbors(a)).collect();
        if frozen.iter().all(|nb| nb.len() <= level) {
            break;
        }
        let mut removals: Vec<((usize, usize), Vec<usize>)> = Vec::new();
        for (i, j) in skel.edges() {
            let mut found = None;
            'sides: for (x, y) in [(i, j), (j, i)] {
                let pool: Vec<usize> = frozen[x].iter().copied().filter(|&v| v != y).collect();
                if pool.len() < level {
                    continue;
                }
                for cond in subsets(&pool, level) {
                    skel.tests_run += 1;
                    match partial_correlation(&corr.matrix, i, j, &cond) {
                        Some(r) => {
                            if fisher_z_pvalue(r, corr.n, cond.len()) > alpha {
                                found = Some(cond);
                                break 'sides;
                            }
                        }
                        None => {
                            skel.singular_tests += 1;
                            log::warn!(
                                "singular conditioning submatrix for ({}, {}) | {:?}; treating as dependent",
                                corr.names[i],
                                corr.names[j],
                                cond.iter().map(|&c| corr.names[c].as_str()).collect::<Vec<_>>()
                            );
                        }
                    }
                }
            }
            if let Some(mut cond) = found {
                cond.sort_unstable();
                removals.push(((i, j), cond));
            }
        }
        for ((i, j), cond) in removals {
            skel.adjacent[i][j] = false;
            skel.adjacent[j][i] = false;
            skel.sepsets.insert((i, j), cond);
        }
    }
    Ok(skel)
}
