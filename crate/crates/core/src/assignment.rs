//! Permutation optimization kernels.
//!
//! * [`lap_max`]: dense linear assignment by shortest augmenting paths
//!   (Jonker-Volgenant), `O(m³)`.
//! * [`rank_one_lap_max`]: the same problem for costs `C[i][j] = c_i·y_j`,
//!   solved by sorting through the rearrangement inequality.
//! * [`match_1d`]: the least-squares matching of two vectors, also sorting.
//!
//! All sorts are stable so tied inputs produce a canonical permutation.

use std::cmp::Ordering;

use crate::error::{check_finite, check_len, Error, Result};

/// A bijection on `{0, …, m−1}` acting on vectors by `(Π y)_i = y[map[i]]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        let mut seen = vec![false; m];
        for &j in &map {
            if j >= m || seen[j] {
                return Err(Error::InvalidInput(format!(
                    "not a permutation of 0..{m}: {map:?}"
                )));
            }
            seen[j] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            map: (0..m).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `Π y`, i.e. `out[i] = y[map[i]]`.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), y.len())?;
        Ok(self.map.iter().map(|&j| y[j]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Self { map: inv }
    }
}

/// Square gain matrix; `C[i][j]` is the gain of assigning source `j` to slot `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    m: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(m: usize, data: Vec<f64>) -> Result<Self> {
        check_len(m * m, data.len())?;
        check_finite("cost matrix", &data)?;
        Ok(Self { m, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::InvalidInput(format!(
                    "cost matrix must be square, found a row of length {} in a {m}-row matrix",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(m, data)
    }

    /// `C[i][j] = c_i · y_j`.
    pub fn rank_one(c: &[f64], y: &[f64]) -> Result<Self> {
        check_len(c.len(), y.len())?;
        let data = c
            .iter()
            .flat_map(|&ci| y.iter().map(move |&yj| ci * yj))
            .collect();
        Self::new(c.len(), data)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    /// `Σ_i C[i][π(i)]`, summed in slot order.
    pub fn value(&self, pi: &Permutation) -> f64 {
        pi.as_slice()
            .iter()
            .enumerate()
            .map(|(i, &j)| self.get(i, j))
            .sum()
    }
}

/// Maximizes `Σ_i C[i][π(i)]` exactly.
pub fn lap_max(cost: &CostMatrix) -> (Permutation, f64) {
    let m = cost.size();
    let negated: Vec<f64> = cost.data.iter().map(|c| -c).collect();
    let pi = Permutation {
        map: shortest_augmenting_path(&negated, m),
    };
    let value = cost.value(&pi);
    (pi, value)
}

const NONE: usize = usize::MAX;

/// Minimum-cost assignment of a square row-major cost matrix; returns the
/// column for each row.
fn shortest_augmenting_path(cost: &[f64], n: usize) -> Vec<usize> {
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut col4row = vec![NONE; n];
    let mut row4col = vec![NONE; n];
    let mut path = vec![NONE; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut row_seen = vec![false; n];
    let mut col_seen = vec![false; n];
    let mut remaining: Vec<usize> = Vec::with_capacity(n);

    for cur_row in 0..n {
        dist.fill(f64::INFINITY);
        row_seen.fill(false);
        col_seen.fill(false);
        remaining.clear();
        // reverse fill keeps constant matrices on the identity
        remaining.extend((0..n).rev());

        let mut min_val = 0.0;
        let mut i = cur_row;
        let sink = loop {
            row_seen[i] = true;
            let mut index = NONE;
            let mut lowest = f64::INFINITY;
            for (it, &j) in remaining.iter().enumerate() {
                let reduced = min_val + cost[i * n + j] - u[i] - v[j];
                if reduced < dist[j] {
                    path[j] = i;
                    dist[j] = reduced;
                }
                if dist[j] < lowest || (dist[j] == lowest && row4col[j] == NONE) {
                    lowest = dist[j];
                    index = it;
                }
            }
            min_val = lowest;
            let j = remaining.swap_remove(index);
            col_seen[j] = true;
            if row4col[j] == NONE {
                break j;
            }
            i = row4col[j];
        };

        u[cur_row] += min_val;
        for r in 0..n {
            if row_seen[r] && r != cur_row {
                u[r] += min_val - dist[col4row[r]];
            }
        }
        for c in 0..n {
            if col_seen[c] {
                v[c] -= min_val - dist[c];
            }
        }

        let mut j = sink;
        loop {
            let r = path[j];
            row4col[j] = r;
            std::mem::swap(&mut col4row[r], &mut j);
            if r == cur_row {
                break;
            }
        }
    }
    col4row
}

fn stable_argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Maximizes `Σ_i c_i · y[π(i)]` by pairing equal ranks of the ascending
/// orders of `c` and `y`.
pub fn rank_one_lap_max(c: &[f64], y: &[f64]) -> Result<(Permutation, f64)> {
    check_len(c.len(), y.len())?;
    check_finite("c", c)?;
    check_finite("y", y)?;
    let y_order = stable_argsort(y);
    Ok(rank_one_lap_max_presorted(c, y, &y_order))
}

/// [`rank_one_lap_max`] with `y_order` the stable ascending argsort of `y`.
pub(crate) fn rank_one_lap_max_presorted(
    c: &[f64],
    y: &[f64],
    y_order: &[usize],
) -> (Permutation, f64) {
    let m = c.len();
    let c_order = stable_argsort(c);
    let mut map = vec![0; m];
    let mut start = 0;
    while start < m {
        // a run of equal c values takes its block of y indices in index order
        let mut end = start + 1;
        while end < m && c[c_order[end]].total_cmp(&c[c_order[start]]) == Ordering::Equal {
            end += 1;
        }
        if end - start == 1 {
            map[c_order[start]] = y_order[start];
        } else {
            let mut slots = c_order[start..end].to_vec();
            let mut sources = y_order[start..end].to_vec();
            slots.sort_unstable();
            sources.sort_unstable();
            for (s, j) in slots.into_iter().zip(sources) {
                map[s] = j;
            }
        }
        start = end;
    }
    let value = map.iter().enumerate().map(|(i, &j)| c[i] * y[j]).sum();
    (Permutation { map }, value)
}

/// Permutation minimizing `Σ_i (p[π(i)] − q_i)²`.
pub fn match_1d(p: &[f64], q: &[f64]) -> Result<Permutation> {
    check_len(p.len(), q.len())?;
    let p_order = stable_argsort(p);
    let q_order = stable_argsort(q);
    let mut map = vec![0; p.len()];
    for (&slot, &src) in q_order.iter().zip(&p_order) {
        map[slot] = src;
    }
    Ok(Permutation { map })
}
