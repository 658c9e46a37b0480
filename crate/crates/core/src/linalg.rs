//! Dense linear algebra over `Z/p^k`.

use crate::poly::{mulmod, pow_u64};
use crate::util::{modinv_u64, vp_u64};

fn val(x: u64, p: u64, k: u32) -> u32 {
    vp_u64(x, p).map_or(k, |v| (v as u32).min(k))
}

/// Row-echelon form by minimal-valuation full pivoting. Returns the pivots as
/// `(row, column, valuation)`, in elimination order.
fn echelon(a: &mut [Vec<u64>], b: &mut [u64], p: u64, k: u32) -> Vec<(usize, usize, u32)> {
    let q = pow_u64(p, k);
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut used_cols = vec![false; cols];
    let mut pivots = vec![];
    let mut r0 = 0;
    while r0 < rows {
        let mut best: Option<(u32, usize, usize)> = None;
        for r in r0..rows {
            for c in 0..cols {
                if used_cols[c] || a[r][c] == 0 {
                    continue;
                }
                let v = val(a[r][c], p, k);
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, r, c));
                    if v == 0 {
                        break;
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((v, r, c)) = best else { break };
        a.swap(r0, r);
        b.swap(r0, r);
        used_cols[c] = true;
        let pv = pow_u64(p, v);
        let unit = a[r0][c] / pv;
        let inv = modinv_u64(unit, q).unwrap();
        for r in r0 + 1..rows {
            if a[r][c] == 0 {
                continue;
            }
            let f = mulmod(a[r][c] / pv, inv, q);
            for j in 0..cols {
                if a[r0][j] != 0 {
                    a[r][j] = (a[r][j] + q - mulmod(f, a[r0][j], q)) % q;
                }
            }
            b[r] = (b[r] + q - mulmod(f, b[r0], q)) % q;
        }
        pivots.push((r0, c, v));
        r0 += 1;
    }
    pivots
}

/// Solve `A x = b` over `Z/p^k`; free unknowns are set to zero.
pub fn solve_mod_pk(a: &[Vec<u64>], b: &[u64], p: u64, k: u32) -> Option<Vec<u64>> {
    let q = pow_u64(p, k);
    let mut a: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| x % q).collect()).collect();
    let mut b: Vec<u64> = b.iter().map(|x| x % q).collect();
    let cols = a.first().map_or(0, |r| r.len());
    let piv = echelon(&mut a, &mut b, p, k);
    let rank = piv.len();
    if b[rank..].iter().any(|&x| x != 0) {
        return None;
    }
    let mut x = vec![0u64; cols];
    for &(r, c, v) in piv.iter().rev() {
        let mut rhs = b[r];
        for j in 0..cols {
            if j != c && a[r][j] != 0 && x[j] != 0 {
                rhs = (rhs + q - mulmod(a[r][j], x[j], q)) % q;
            }
        }
        if val(rhs, p, k) < v {
            return None;
        }
        let pv = pow_u64(p, v);
        let unit = a[r][c] / pv;
        let qv = q / pv;
        let inv = modinv_u64(unit % qv, qv).unwrap_or(0);
        x[c] = mulmod(rhs / pv, inv, qv);
    }
    Some(x)
}

/// Rank over `F_p`.
pub fn rank_mod_p(a: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let mut b = vec![0; a.len()];
    echelon(&mut a, &mut b, p, 1).len()
}

pub fn mat_vec(a: &[Vec<u64>], x: &[u64], q: u64) -> Vec<u64> {
    a.iter()
        .map(|r| r.iter().zip(x).fold(0u64, |s, (u, v)| (s + mulmod(*u, *v, q)) % q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_systems() {
        let a = vec![vec![2, 1], vec![4, 0]];
        let x = solve_mod_pk(&a, &[3, 4], 2, 3).unwrap();
        assert_eq!(mat_vec(&a, &x, 8), vec![3, 4]);
        assert!(solve_mod_pk(&[vec![2]], &[1], 2, 3).is_none());
        assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 4]], 3), 1);
    }

    proptest! {
        #[test]
        fn solves_consistent_systems(
            a in proptest::collection::vec(proptest::collection::vec(0u64..27, 3), 4),
            x in proptest::collection::vec(0u64..27, 3),
        ) {
            let b = mat_vec(&a, &x, 27);
            let y = solve_mod_pk(&a, &b, 3, 3).expect("consistent");
            prop_assert_eq!(mat_vec(&a, &y, 27), b);
        }
    }
}

/// Solve a possibly rectangular system over the rationals; free unknowns are set to zero.
/// Returns `None` when inconsistent.
pub fn solve_rational_rect(
    a: &[Vec<num_rational::BigRational>],
    b: &[num_rational::BigRational],
) -> Option<Vec<num_rational::BigRational>> {
    use num_traits::Zero;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut r0 = 0;
    for c in 0..cols {
        let Some(r) = (r0..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(r0, r);
        b.swap(r0, r);
        let inv = a[r0][c].recip();
        for j in 0..cols {
            a[r0][j] = &a[r0][j] * &inv;
        }
        b[r0] = &b[r0] * &inv;
        for r in 0..rows {
            if r != r0 && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..cols {
                    let t = &a[r0][j] * &f;
                    a[r][j] -= t;
                }
                let t = &b[r0] * &f;
                b[r] -= t;
            }
        }
        pivots.push((r0, c));
        r0 += 1;
        if r0 == rows {
            break;
        }
    }
    if b[r0..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut x = vec![num_rational::BigRational::zero(); cols];
    for (r, c) in pivots {
        x[c] = b[r].clone();
    }
    Some(x)
}

/// Rank over the rationals.
pub fn rank_rational(a: &[Vec<num_rational::BigRational>]) -> usize {
    use num_traits::Zero;
    let mut a = a.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r0 = 0;
    for c in 0..cols {
        let Some(r) = (r0..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(r0, r);
        for r in r0 + 1..rows {
            if !a[r][c].is_zero() {
                let f = &a[r][c] / &a[r0][c];
                for j in c..cols {
                    let t = &a[r0][j] * &f;
                    a[r][j] -= t;
                }
            }
        }
        r0 += 1;
        if r0 == rows {
            break;
        }
    }
    r0
}
