//! Small dense linear solves shared by the vertex enumerator and the LP.

/// Pivots below this (after row scaling) mark a system as rank deficient.
pub const PIVOT_THRESHOLD: f64 = 1e-10;

/// Solves a square system given as `(row, rhs)` pairs by Gaussian elimination
/// with complete pivoting. Rows are rescaled to unit max-norm first so the
/// pivot threshold is scale free. Returns `None` when the system is
/// rank deficient.
pub(crate) fn solve_square(mut rows: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = rows.len();
    for (r, b) in rows.iter_mut() {
        let scale = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        r.iter_mut().for_each(|v| *v /= scale);
        *b /= scale;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for (i, (r, _)) in rows.iter().enumerate().skip(k) {
            for j in k..n {
                let v = r[perm[j]].abs();
                if v > best {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        }
        if best < PIVOT_THRESHOLD {
            return None;
        }
        rows.swap(k, pr);
        perm.swap(k, pc);
        let col = perm[k];
        let (head, tail) = rows.split_at_mut(k + 1);
        let (pivot_row, pivot_rhs) = &head[k];
        let pivot = pivot_row[col];
        for (r, b) in tail.iter_mut() {
            let f = r[col] / pivot;
            if f != 0.0 {
                for &c in &perm[k..] {
                    r[c] -= f * pivot_row[c];
                }
                *b -= f * pivot_rhs;
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let (r, b) = &rows[k];
        let mut acc = *b;
        for j in k + 1..n {
            acc -= r[perm[j]] * x[perm[j]];
        }
        x[perm[k]] = acc / r[perm[k]];
    }
    Some(x)
}
