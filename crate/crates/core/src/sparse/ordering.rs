//! Row orderings for the sparse factorizations.

use std::collections::VecDeque;

use super::SparseMatrix;

/// Adjacency lists of the graph of `A Aᵀ`: rows `i` and `k` are adjacent
/// when they share a column. Lists are sorted and exclude `i` itself.
pub(crate) fn row_graph(a: &SparseMatrix, at: &SparseMatrix) -> Vec<Vec<usize>> {
    let m = a.nrows();
    let mut mark = vec![usize::MAX; m];
    (0..m)
        .map(|i| {
            let mut nb = Vec::new();
            mark[i] = i;
            for &j in a.row(i).0 {
                for &k in at.row(j).0 {
                    if mark[k] != i {
                        mark[k] = i;
                        nb.push(k);
                    }
                }
            }
            nb.sort_unstable();
            nb
        })
        .collect()
}

/// Reverse Cuthill–McKee ordering of the rows of `a`.
///
/// Returns `perm` with `perm[new] = old`. Each connected component starts
/// from a pseudo-peripheral vertex; ties are broken by index, so the result
/// depends only on the sparsity pattern.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let at = a.transpose();
    rcm_from_graph(&row_graph(a, &at))
}

pub(crate) fn rcm_from_graph(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (adj[i].len(), i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, seed, &visited);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut nbrs = Vec::new();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (adj[u].len(), u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Level structure rooted at `root` restricted to unvisited vertices:
/// returns (eccentricity, vertices of the last level).
fn level_structure(adj: &[Vec<usize>], root: usize, blocked: &[bool]) -> (usize, Vec<usize>) {
    let mut depth = vec![usize::MAX; adj.len()];
    depth[root] = 0;
    let mut frontier = vec![root];
    let mut ecc = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in &adj[v] {
                if !blocked[u] && depth[u] == usize::MAX {
                    depth[u] = depth[v] + 1;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return (ecc, frontier);
        }
        ecc += 1;
        frontier = next;
    }
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize, blocked: &[bool]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = level_structure(adj, root, blocked);
    loop {
        let cand = *last.iter().min_by_key(|&&u| (adj[u].len(), u)).expect("level non-empty");
        let (e, l) = level_structure(adj, cand, blocked);
        if e <= ecc {
            return root;
        }
        root = cand;
        ecc = e;
        last = l;
    }
}

/// Rows much denser than the typical row, such as constraint rows that
/// touch every node. They are ordered last and kept out of the row graph.
pub(crate) fn dense_rows(a: &SparseMatrix) -> Vec<bool> {
    const MAX_DENSE: usize = 8;
    let m = a.nrows();
    let mut counts: Vec<usize> = (0..m).map(|i| a.row_nnz(i)).collect();
    counts.sort_unstable();
    let mut dense = vec![false; m];
    if m < 4 {
        return dense;
    }
    let cutoff = (2 * counts[m / 2]).max(16);
    let mut cand: Vec<usize> = (0..m).filter(|&i| a.row_nnz(i) > cutoff).collect();
    cand.sort_by_key(|&i| (std::cmp::Reverse(a.row_nnz(i)), i));
    for &i in cand.iter().take(MAX_DENSE) {
        dense[i] = true;
    }
    dense
}

/// Goal of a row ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowOrder {
    /// Small envelope: reverse Cuthill–McKee.
    Profile,
    /// Little fill in a general sparse factor: nested dissection.
    Fill,
}

/// Row order used by the factorizations: the chosen ordering of the sparse
/// rows followed by the dense rows in index order. Returns `(perm, n_sparse)`.
pub(crate) fn order_rows(a: &SparseMatrix, at: &SparseMatrix, goal: RowOrder) -> (Vec<usize>, usize) {
    let m = a.nrows();
    let dense = dense_rows(a);
    let sparse_ids: Vec<usize> = (0..m).filter(|&i| !dense[i]).collect();
    let mut local = vec![usize::MAX; m];
    for (l, &i) in sparse_ids.iter().enumerate() {
        local[i] = l;
    }
    let full = row_graph(a, at);
    let adj: Vec<Vec<usize>> = sparse_ids
        .iter()
        .map(|&i| full[i].iter().filter(|&&k| !dense[k]).map(|&k| local[k]).collect())
        .collect();
    let n_sparse = sparse_ids.len();
    let local_order = match goal {
        RowOrder::Profile => rcm_from_graph(&adj),
        RowOrder::Fill => nested_dissection(&adj),
    };
    let mut perm: Vec<usize> = local_order.into_iter().map(|l| sparse_ids[l]).collect();
    perm.extend((0..m).filter(|&i| dense[i]));
    (perm, n_sparse)
}

/// Subgraphs at most this large are ordered by RCM instead of being split.
const ND_LEAF: usize = 128;

/// Nested dissection by level-structure bisection.
///
/// Each connected piece is split at the middle level of a breadth-first
/// search from a pseudo-peripheral vertex. The vertices of that level that
/// touch the next level form the separator, which is numbered after both
/// halves. Ties are broken by index, so the result depends only on the
/// sparsity pattern.
pub(crate) fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut tag = vec![0u32; n];
    let mut next_tag = 1u32;
    let mut order = Vec::with_capacity(n);
    let mut depth = vec![usize::MAX; n];
    // (vertices, separator appended once both halves are done)
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split((0..n).collect())];
    while let Some(task) = stack.pop() {
        let verts = match task {
            Task::Emit(sep) => {
                order.extend(sep);
                continue;
            }
            Task::Split(v) => v,
        };
        let t = next_tag;
        next_tag += 1;
        for &v in &verts {
            tag[v] = t;
        }
        if verts.len() <= ND_LEAF {
            order.extend(local_rcm(adj, &verts, &tag, t));
            continue;
        }
        let seed = *verts.iter().min_by_key(|&&v| (adj[v].iter().filter(|&&u| tag[u] == t).count(), v)).expect("non-empty");
        let root = peripheral_in(adj, seed, &tag, t, &mut depth);
        let levels = bfs_levels(adj, root, &tag, t, &mut depth);
        let reached: usize = levels.iter().map(Vec::len).sum();
        let rest: Vec<usize> = verts.iter().copied().filter(|&v| depth[v] == usize::MAX).collect();
        for l in &levels {
            for &v in l {
                depth[v] = usize::MAX;
            }
        }
        if !rest.is_empty() {
            let comp: Vec<usize> = levels.into_iter().flatten().collect();
            stack.push(Task::Split(rest));
            stack.push(Task::Split(comp));
            continue;
        }
        if levels.len() < 3 {
            order.extend(local_rcm(adj, &verts, &tag, t));
            continue;
        }
        let mut acc = 0;
        let mut mid = 1;
        for (i, l) in levels.iter().enumerate().take(levels.len() - 1).skip(1) {
            acc += l.len();
            mid = i;
            if 2 * (acc + levels[0].len()) >= reached {
                break;
            }
        }
        let next_level: std::collections::HashSet<usize> = levels[mid + 1].iter().copied().collect();
        let (mut sep, mut low) = (Vec::new(), Vec::new());
        for &v in &levels[mid] {
            if adj[v].iter().any(|u| next_level.contains(u)) {
                sep.push(v);
            } else {
                low.push(v);
            }
        }
        low.extend(levels[..mid].iter().flatten().copied());
        let high: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
        low.sort_unstable();
        sep.sort_unstable();
        stack.push(Task::Emit(sep));
        stack.push(Task::Split(high));
        stack.push(Task::Split(low));
    }
    order
}

/// Breadth-first levels from `root` within the vertices tagged `t`; leaves
/// `depth` set for every reached vertex.
fn bfs_levels(adj: &[Vec<usize>], root: usize, tag: &[u32], t: u32, depth: &mut [usize]) -> Vec<Vec<usize>> {
    depth[root] = 0;
    let mut levels = vec![vec![root]];
    loop {
        let d = levels.len();
        let mut next = Vec::new();
        for &v in levels.last().expect("non-empty") {
            for &u in &adj[v] {
                if tag[u] == t && depth[u] == usize::MAX {
                    depth[u] = d;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn peripheral_in(adj: &[Vec<usize>], seed: usize, tag: &[u32], t: u32, depth: &mut [usize]) -> usize {
    let mut eval = |root: usize| {
        let levels = bfs_levels(adj, root, tag, t, depth);
        for &v in levels.iter().flatten() {
            depth[v] = usize::MAX;
        }
        let last = levels.last().expect("non-empty");
        let far = *last.iter().min_by_key(|&&u| (adj[u].len(), u)).expect("non-empty");
        (levels.len(), far)
    };
    let (mut root, (mut ecc, mut far)) = (seed, eval(seed));
    for _ in 0..8 {
        let (e, f) = eval(far);
        if e <= ecc {
            break;
        }
        (root, ecc, far) = (far, e, f);
    }
    root
}

/// RCM restricted to the vertices tagged `t`.
fn local_rcm(adj: &[Vec<usize>], verts: &[usize], tag: &[u32], t: u32) -> Vec<usize> {
    let mut local = std::collections::HashMap::with_capacity(verts.len());
    for (i, &v) in verts.iter().enumerate() {
        local.insert(v, i);
    }
    let sub: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| adj[v].iter().filter(|&&u| tag[u] == t).map(|u| local[u]).collect())
        .collect();
    rcm_from_graph(&sub).into_iter().map(|i| verts[i]).collect()
}

/// Inverse of a permutation given as `perm[new] = old`.
#[cfg(test)]
pub(crate) fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}
