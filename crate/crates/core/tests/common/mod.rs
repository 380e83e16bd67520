//! Brute-force oracles and random instance generators shared by the
//! integration suites. Nothing here calls the matching, Gramian or
//! hitting-set code under test.
#![allow(dead_code)]

use netplace::{DiGraph, Matrix, NodeSet};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn star_graph() -> DiGraph {
    DiGraph::from_rows(&[
        vec![0.0, -0.5, -0.8, -0.6],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
    ])
    .unwrap()
}

/// Nonzero weight with magnitude in `[0.5, 1.5]` and random sign.
pub fn random_weight<R: Rng>(rng: &mut R) -> f64 {
    let w = rng.gen_range(0.5..1.5);
    if rng.gen_bool(0.5) {
        w
    } else {
        -w
    }
}

/// Each ordered pair (self-loops included) is an edge with probability
/// `density`.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, density: f64) -> DiGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                edges.push((i, j, random_weight(rng)));
            }
        }
    }
    DiGraph::new(n, edges).unwrap()
}

/// Random graph with a Hamiltonian cycle (so strongly connected) and
/// about `extra` further edges.
pub fn random_strongly_connected<R: Rng>(rng: &mut R, n: usize, extra: usize) -> DiGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs = std::collections::BTreeSet::new();
    for i in 0..n {
        pairs.insert((order[i], order[(i + 1) % n]));
    }
    while pairs.len() < n + extra {
        pairs.insert((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    DiGraph::new(
        n,
        pairs.into_iter().map(|(a, b)| (a, b, random_weight(rng))),
    )
    .unwrap()
}

/// Graph built from `blocks` dense-ish strongly connected blocks with
/// forward edges only from lower to higher blocks; block 0 and at least
/// one more block have no incoming edges.
pub fn random_multi_source<R: Rng>(rng: &mut R, n: usize, blocks: usize) -> DiGraph {
    assert!(blocks >= 2 && n >= blocks);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for (i, &v) in nodes.iter().enumerate() {
        groups[if i < blocks {
            i
        } else {
            rng.gen_range(0..blocks)
        }]
        .push(v);
    }
    let mut pairs = std::collections::BTreeSet::new();
    for g in &groups {
        for i in 0..g.len() {
            if g.len() > 1 {
                pairs.insert((g[i], g[(i + 1) % g.len()]));
            }
            for &w in g {
                if rng.gen_bool(0.3) {
                    pairs.insert((g[i], w));
                }
            }
        }
    }
    // Blocks 0 and 1 stay sources; later blocks receive forward edges.
    for b in 2..blocks {
        let from = rng.gen_range(0..b);
        let u = *groups[from].choose(rng).unwrap();
        let w = *groups[b].choose(rng).unwrap();
        pairs.insert((u, w));
        for _ in 0..2 {
            let from = rng.gen_range(0..b);
            let u = *groups[from].choose(rng).unwrap();
            let w = *groups[b].choose(rng).unwrap();
            if rng.gen_bool(0.5) {
                pairs.insert((u, w));
            }
        }
    }
    DiGraph::new(
        n,
        pairs.into_iter().map(|(a, b)| (a, b, random_weight(rng))),
    )
    .unwrap()
}

pub fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> NodeSet {
    (0..n).filter(|_| rng.gen_bool(p)).collect()
}

pub fn subsets(n: usize) -> impl Iterator<Item = NodeSet> {
    (0u32..(1 << n)).map(move |mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
}

/// Hall's condition in the actuator-augmented graph: every node set `U`
/// has at least `|U|` distinct in-neighbours, counting actuator copies.
pub fn hall_dilation_free(g: &DiGraph, s: &NodeSet) -> bool {
    let n = g.node_count();
    let mut preds = vec![0u64; n];
    for e in g.edges() {
        preds[e.target] |= 1 << e.source;
    }
    for v in s.iter() {
        preds[v] |= 1 << (n + v);
    }
    (1u64..(1 << n)).all(|mask| {
        let nbrs = (0..n)
            .filter(|&i| mask & (1 << i) != 0)
            .fold(0u64, |acc, i| acc | preds[i]);
        nbrs.count_ones() >= mask.count_ones()
    })
}

/// Maximum matching size by exhaustive search over assignments of right
/// vertices to distinct left vertices.
pub fn brute_matching_size(g: &DiGraph, s: &NodeSet) -> usize {
    let n = g.node_count();
    let lefts: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            let mut l: Vec<usize> = g
                .edges()
                .iter()
                .filter(|e| e.target == r)
                .map(|e| e.source)
                .collect();
            if s.contains(r) {
                l.push(n + r);
            }
            l
        })
        .collect();
    fn go(r: usize, lefts: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
        if r == lefts.len() {
            return 0;
        }
        let mut best = go(r + 1, lefts, used);
        for &l in &lefts[r] {
            if !used[l] {
                used[l] = true;
                best = best.max(1 + go(r + 1, lefts, used));
                used[l] = false;
            }
        }
        best
    }
    go(0, &lefts, &mut vec![false; 2 * n])
}

/// Membership in `C_K` from the definition.
pub fn brute_in_c_k(g: &DiGraph, s: &NodeSet, k: usize) -> bool {
    s.len() == k && hall_dilation_free(g, s)
}

/// Membership in `C̃_K` by searching for a dilation-free superset of size K.
pub fn brute_in_c_tilde_k(g: &DiGraph, s: &NodeSet, k: usize) -> bool {
    let n = g.node_count();
    if s.len() > k {
        return false;
    }
    subsets(n).any(|sup| sup.len() == k && s.is_subset(&sup) && hall_dilation_free(g, &sup))
}

/// Reachability matrix by repeated BFS.
pub fn reach(g: &DiGraph) -> Vec<Vec<bool>> {
    (0..g.node_count())
        .map(|v| g.reachable_from(&NodeSet::from([v])))
        .collect()
}

pub fn brute_structurally_controllable(g: &DiGraph, s: &NodeSet) -> bool {
    let r = reach(g);
    !s.is_empty()
        && (0..g.node_count()).all(|v| s.iter().any(|u| r[u][v]))
        && hall_dilation_free(g, s)
}

/// Smallest hitting set size by enumeration over subsets of `0..ground`.
pub fn brute_hitting_size(families: &[NodeSet], ground: usize) -> usize {
    subsets(ground)
        .filter(|h| families.iter().all(|f| f.intersects(h)))
        .map(|h| h.len())
        .min()
        .unwrap()
}

/// Taylor-series exponential with scaling and squaring.
pub fn taylor_expm(a: &Matrix) -> Matrix {
    let n = a.rows();
    let norm = a.norm_one();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(2f64.powi(-squarings));
    let mut out = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..30 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        out = out.add(&term);
    }
    for _ in 0..squarings {
        out = out.matmul(&out);
    }
    out
}

fn gramian_integrand(a: &Matrix, b: &Matrix, tau: f64) -> Matrix {
    let e = taylor_expm(&a.scale(tau));
    e.matmul(b).matmul(&e.transpose())
}

/// Controllability Gramian by adaptive Simpson quadrature, refined until
/// successive estimates on each panel differ by less than `tol`.
pub fn quadrature_gramian(a: &Matrix, s: &NodeSet, horizon: f64, tol: f64) -> Matrix {
    let n = a.rows();
    let b = Matrix::from_diagonal(
        &(0..n)
            .map(|i| if s.contains(i) { 1.0 } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    let f = |t: f64| gramian_integrand(a, &b, t);
    let (fa, fm, fb) = (f(0.0), f(horizon / 2.0), f(horizon));
    let whole = simpson(&fa, &fm, &fb, horizon);
    adaptive(&f, 0.0, horizon, &fa, &fm, &fb, whole, tol, 40)
}

fn simpson(fa: &Matrix, fm: &Matrix, fb: &Matrix, width: f64) -> Matrix {
    fa.add(&fm.scale(4.0)).add(fb).scale(width / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> Matrix,
    a: f64,
    b: f64,
    fa: &Matrix,
    fm: &Matrix,
    fb: &Matrix,
    whole: Matrix,
    tol: f64,
    depth: usize,
) -> Matrix {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, &flm, fm, m - a);
    let right = simpson(fm, &frm, fb, b - m);
    let both = left.add(&right);
    let diff = both.sub(&whole).norm_frobenius();
    if depth == 0 || diff <= 15.0 * tol {
        return both.add(&both.sub(&whole).scale(1.0 / 15.0));
    }
    adaptive(f, a, m, fa, &flm, fm, left, tol / 2.0, depth - 1).add(&adaptive(
        f,
        m,
        b,
        fm,
        &frm,
        fb,
        right,
        tol / 2.0,
        depth - 1,
    ))
}

/// Trace of the inverse by Gauss-Jordan elimination (no factorization
/// shared with the library path).
pub fn trace_inverse(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = m.to_rows();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
            .unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    (0..n).map(|i| inv[i][i]).sum()
}

/// Random matrix with Frobenius norm at most `max_norm`.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize, max_norm: f64) -> Matrix {
    let m = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0f64..1.0));
    let target: f64 = rng.gen_range(0.1..max_norm);
    m.scale(target / m.norm_frobenius().max(1e-12f64))
}
