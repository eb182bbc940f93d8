//! Enumeration of every square minor of a small matrix.
//!
//! Row subsets are visited depth first: the children of a row set `R` are
//! `{r} ∪ R` for every `r < min R`, so each subset is reached exactly once.
//! At each node the minors for all column subsets of the matching size are
//! obtained from the parent's by Laplace expansion along the new first row,
//! costing `j` multiply-adds per `j x j` minor and `O(2^cols)` memory.
//! Column subsets are bit masks in colex order (increasing numeric value).

use crate::linalg::{CMat, C64, ONE};

/// `C(n, k)`, saturating at `u64::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Total number of square minors of an `r x c` matrix, `C(r + c, r) - 1`.
pub(crate) fn minor_count(rows: usize, cols: usize) -> u64 {
    binomial(rows + cols, rows).saturating_sub(1)
}

/// Colex rank of a subset among subsets of the same size.
fn colex_rank(mut mask: u64) -> usize {
    let mut r = 0u64;
    let mut i = 1;
    while mask != 0 {
        let pos = mask.trailing_zeros() as usize;
        r += binomial(pos, i);
        mask &= mask - 1;
        i += 1;
    }
    r as usize
}

/// All `k`-subsets of `{0..n}` as masks in colex order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    let mut m: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while m < limit {
        out.push(m);
        // Gosper's hack
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

pub(crate) fn mask_elements(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Column-subset bookkeeping for one size `j`.
pub(crate) struct ColumnLevel {
    pub(crate) masks: Vec<u64>,
    /// `elems[c * j + p]`: the `p`-th column of subset `c`.
    elems: Vec<u32>,
    /// `subs[c * j + p]`: colex index of subset `c` without its `p`-th column.
    subs: Vec<u32>,
}

/// Column tables for every size of an `n`-column matrix.
pub(crate) struct ColumnLevels {
    levels: Vec<ColumnLevel>,
}

impl ColumnLevels {
    pub(crate) fn new(ncols: usize, max_size: usize) -> Self {
        assert!(ncols <= 32, "too many columns for minor enumeration");
        let levels = (0..=max_size.min(ncols))
            .map(|j| {
                let masks = subsets(ncols, j);
                let mut elems = Vec::with_capacity(masks.len() * j);
                let mut subs = Vec::with_capacity(masks.len() * j);
                for &cm in &masks {
                    for e in mask_elements(cm) {
                        elems.push(e as u32);
                        subs.push(colex_rank(cm & !(1u64 << e)) as u32);
                    }
                }
                ColumnLevel { masks, elems, subs }
            })
            .collect();
        Self { levels }
    }

    pub(crate) fn level(&self, j: usize) -> &ColumnLevel {
        &self.levels[j]
    }

    pub(crate) fn max_size(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Visits every square minor of `m` up to `levels.max_size()`.
///
/// `visit(row_mask, size, values)` receives the minors for one row subset,
/// `values[c]` belonging to column subset `levels.level(size).masks[c]`. It
/// returns the largest size still worth exploring, which prunes the walk.
pub(crate) fn sweep_minors<F>(m: &CMat, levels: &ColumnLevels, mut visit: F)
where
    F: FnMut(u64, usize, &[C64]) -> usize,
{
    let nr = m.nrows();
    assert!(nr <= 63, "too many rows for minor enumeration");
    let max_size = levels.max_size().min(nr);
    let mut bufs: Vec<Vec<C64>> = (0..=max_size)
        .map(|j| vec![C64::new(0.0, 0.0); levels.level(j).masks.len()])
        .collect();
    bufs[0][0] = ONE;
    let rows: Vec<Vec<C64>> = (0..nr)
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect();
    let mut limit = max_size;
    descend(&rows, levels, &mut bufs, 0, 0, &mut limit, &mut visit);
}

fn descend<F>(
    rows: &[Vec<C64>],
    levels: &ColumnLevels,
    bufs: &mut [Vec<C64>],
    rmask: u64,
    depth: usize,
    limit: &mut usize,
    visit: &mut F,
) where
    F: FnMut(u64, usize, &[C64]) -> usize,
{
    let j = depth + 1;
    if j > *limit {
        return;
    }
    let top = if rmask == 0 {
        rows.len()
    } else {
        rmask.trailing_zeros() as usize
    };
    let level = levels.level(j);
    for r0 in 0..top {
        let mask = rmask | (1u64 << r0);
        {
            let (head, tail) = bufs.split_at_mut(j);
            let prev = &head[depth];
            let cur = &mut tail[0];
            let row = &rows[r0];
            for (c, out) in cur.iter_mut().enumerate() {
                let elems = &level.elems[c * j..(c + 1) * j];
                let subs = &level.subs[c * j..(c + 1) * j];
                let mut acc = C64::new(0.0, 0.0);
                for p in 0..j {
                    let term = row[elems[p] as usize] * prev[subs[p] as usize];
                    if p % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                *out = acc;
            }
        }
        let keep = visit(mask, j, &bufs[j]);
        *limit = (*limit).min(keep);
        if j > *limit {
            continue;
        }
        descend(rows, levels, bufs, mask, j, limit, visit);
    }
}
