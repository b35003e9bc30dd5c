//! Loop hafnians.
//!
//! The loop hafnian of a symmetric `n x n` matrix sums, over every way of
//! partitioning `{0..n}` into pairs and singletons, the product of `A_ij`
//! over pairs and `A_ii` over singletons.
//!
//! The production kernel is the power-trace formula with inclusion-exclusion
//! over "pair" subsets. The vertices are grouped into pairs `(i, i + n/2)`;
//! for each subset `S` of pairs the summand is the `lambda^(n/2)` coefficient of
//!
//! ```text
//! exp( sum_k [ tr((A_S X_S)^k) / 2k + d_S^T X_S (A_S X_S)^(k-1) d_S / 2 ] lambda^k )
//! ```
//!
//! with sign `(-1)^(n/2 - |S|)`. When rows are repeated (as in photon-number
//! patterns) subsets that keep the same number of copies of each row are
//! merged: `X_S` becomes `X K` with `K` the kept multiplicities, and the
//! summand is weighted by a product of binomials. The cost is then
//! `prod_i (m_i + 1)` small dense problems instead of `2^(sum m_i)`.
//!
//! The alternating sum loses digits quickly once a row is repeated many
//! times (a single mode with 40 photons already cancels terms of order
//! `2^40`). Repeated matrices with a small multiset table therefore go
//! through a direct recursion over multiplicities instead: the first
//! remaining vertex either takes its loop or pairs with one of the other
//! remaining copies.

mod pattern;

pub use pattern::{
    build_pattern_matrix, pattern_probability, PatternMatrix, PreparedState, MAX_TOTAL_PHOTONS,
};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::CMatrix;

/// Symmetry tolerance for matrices handed to [`loop_hafnian`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Largest multiset table handled by the recursion in
/// [`loop_hafnian_repeated`].
const MULTISET_TABLE_LIMIT: usize = 1 << 20;

const ONE: C64 = C64::new(1.0, 0.0);

fn check_symmetric(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let deviation = (a - a.transpose()).camax();
    if deviation > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    Ok(())
}

/// Loop hafnian of a complex symmetric matrix.
pub fn loop_hafnian(a: &CMatrix) -> Result<C64> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(ONE);
    }
    // An isolated vertex with a unit loop leaves the value unchanged and
    // makes the size even.
    let a = if n % 2 == 1 {
        let mut padded = CMatrix::zeros(n + 1, n + 1);
        padded.view_mut((0, 0), (n, n)).copy_from(a);
        padded[(n, n)] = ONE;
        padded
    } else {
        a.clone()
    };
    let half = a.nrows() / 2;
    let diag: Vec<C64> = a.diagonal().iter().copied().collect();
    let t = Types::new(&a, &diag, &vec![1; half]);
    Ok(power_trace_sum(&t.a, &t.d, &t.mult, half))
}

/// Loop hafnian of the matrix obtained from the `2M x 2M` symmetric `base`
/// by repeating rows/columns `i` and `i + M` exactly `reps[i]` times (and
/// deleting them when `reps[i] == 0`), with diagonal taken from `diag`.
///
/// Entries between two copies of the same row come from the diagonal of
/// `base`; the loop weights come from `diag`. Inputs are not validated.
pub fn loop_hafnian_repeated(base: &CMatrix, diag: &[C64], reps: &[usize]) -> C64 {
    let total: usize = reps.iter().sum();
    if total == 0 {
        return ONE;
    }
    let t = Types::new(base, diag, reps);
    let table = t
        .mult
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul((k + 1) * (k + 1)));
    match table {
        Some(size) if size <= MULTISET_TABLE_LIMIT => multiset_recursion(&t.a, &t.d, &t.mult),
        _ => power_trace_sum(&t.a, &t.d, &t.mult, total),
    }
}

/// Rows with a nonzero repeat count, as `2p` vertex types.
struct Types {
    a: CMatrix,
    d: Vec<C64>,
    mult: Vec<usize>,
}

impl Types {
    fn new(base: &CMatrix, diag: &[C64], reps: &[usize]) -> Self {
        let m = reps.len();
        debug_assert_eq!(base.nrows(), 2 * m);
        debug_assert_eq!(diag.len(), 2 * m);
        let active: Vec<usize> = (0..m).filter(|&i| reps[i] > 0).collect();
        let idx: Vec<usize> = active.iter().copied().chain(active.iter().map(|&i| i + m)).collect();
        Types {
            a: CMatrix::from_fn(idx.len(), idx.len(), |r, c| base[(idx[r], idx[c])]),
            d: idx.iter().map(|&i| diag[i]).collect(),
            mult: active.iter().map(|&i| reps[i]).collect(),
        }
    }
}

/// Loop hafnian over vertex types `0..2p`, type `t` and `t + p` both
/// occurring `mult[t]` times.
fn multiset_recursion(a: &CMatrix, d: &[C64], mult: &[usize]) -> C64 {
    let p = mult.len();
    let counts: Vec<usize> = mult.iter().chain(mult).copied().collect();
    let types = counts.len();
    let mut stride = vec![1usize; types];
    for t in 1..types {
        stride[t] = stride[t - 1] * (counts[t - 1] + 1);
    }
    let size = stride[types - 1] * (counts[types - 1] + 1);
    debug_assert_eq!(a.nrows(), 2 * p);

    // f[v] for every sub-multiset v (mixed radix, type 0 fastest); every
    // predecessor of v has a smaller index.
    let mut f = vec![C64::new(0.0, 0.0); size];
    f[0] = ONE;
    let mut v = vec![0usize; types];
    for index in 1..size {
        let mut t = 0;
        while v[t] == counts[t] {
            v[t] = 0;
            t += 1;
        }
        v[t] += 1;

        let i = v.iter().position(|&k| k > 0).unwrap();
        let without_i = index - stride[i];
        let mut acc = d[i] * f[without_i];
        for j in i..types {
            let available = if j == i { v[i] - 1 } else { v[j] };
            if available > 0 {
                acc += a[(i, j)] * f[without_i - stride[j]] * available as f64;
            }
        }
        f[index] = acc;
    }
    f[size - 1]
}

fn power_trace_sum(a: &CMatrix, d: &[C64], mult: &[usize], total: usize) -> C64 {
    let p = mult.len();
    let binom = binomial_table(*mult.iter().max().unwrap());
    let mut kept = vec![0usize; p];
    let mut acc = C64::new(0.0, 0.0);
    loop {
        // odometer over kept multiplicities
        let mut pos = 0;
        while pos < p {
            if kept[pos] < mult[pos] {
                kept[pos] += 1;
                break;
            }
            kept[pos] = 0;
            pos += 1;
        }
        if pos == p {
            break;
        }
        let kept_total: usize = kept.iter().sum();
        let weight: f64 = kept
            .iter()
            .zip(mult)
            .map(|(&k, &mm)| binom[mm][k])
            .product();
        let sign = if (total - kept_total).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += power_trace_term(a, d, &kept, total) * (sign * weight);
    }
    acc
}

/// `[lambda^total] exp(sum_k f_k lambda^k)` for one choice of kept copies.
fn power_trace_term(a: &CMatrix, d: &[C64], kept: &[usize], total: usize) -> C64 {
    let p = kept.len();
    let live: Vec<usize> = (0..p).filter(|&i| kept[i] > 0).collect();
    let q = live.len();
    let rows: Vec<usize> = live.iter().copied().chain(live.iter().map(|&i| i + p)).collect();
    let count = |c: usize| kept[live[c % q]] as f64;
    let partner = |c: usize| if c < q { c + q } else { c - q };

    // A W with W = X K
    let aw = CMatrix::from_fn(2 * q, 2 * q, |r, c| a[(rows[r], rows[partner(c)])] * count(c));
    let dd: Vec<C64> = rows.iter().map(|&r| d[r]).collect();
    let mut w: Vec<C64> = (0..2 * q).map(|b| dd[partner(b)] * count(b)).collect();

    let mut f = vec![C64::new(0.0, 0.0); total + 1];
    let mut power = aw.clone();
    for k in 1..=total {
        let loop_term: C64 = w.iter().zip(&dd).map(|(x, y)| x * y).sum();
        f[k] = power.trace() / (2.0 * k as f64) + loop_term * 0.5;
        if k < total {
            w = (0..2 * q)
                .map(|c| (0..2 * q).map(|r| w[r] * aw[(r, c)]).sum())
                .collect();
            power = &power * &aw;
        }
    }

    // g = exp(h): g_k = (1/k) sum_{i=1..k} i h_i g_{k-i}
    let mut g = vec![C64::new(0.0, 0.0); total + 1];
    g[0] = ONE;
    for k in 1..=total {
        let mut s = C64::new(0.0, 0.0);
        for i in 1..=k {
            s += f[i] * g[k - i] * i as f64;
        }
        g[k] = s / k as f64;
    }
    g[total]
}

fn binomial_table(n: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1.0;
        for k in 1..=i {
            t[i][k] = t[i - 1][k - 1] + if k < i { t[i - 1][k] } else { 0.0 };
        }
    }
    t
}

/// Reference loop hafnian by direct enumeration of matchings with loops.
///
/// Exponential in `n` with a large constant; intended for `n <= 10` as an
/// oracle for [`loop_hafnian`].
pub fn loop_hafnian_reference(a: &CMatrix) -> Result<C64> {
    check_symmetric(a)?;
    let vertices: Vec<usize> = (0..a.nrows()).collect();
    Ok(enumerate(a, &vertices))
}

fn enumerate(a: &CMatrix, vertices: &[usize]) -> C64 {
    let Some((&u, rest)) = vertices.split_first() else {
        return ONE;
    };
    let mut sum = a[(u, u)] * enumerate(a, rest);
    for (pos, &w) in rest.iter().enumerate() {
        let remaining: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &v)| v)
            .collect();
        sum += a[(u, w)] * enumerate(a, &remaining);
    }
    sum
}
