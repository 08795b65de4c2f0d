//! Banded LU factorization with partial pivoting for complex matrices.
//!
//! Row `i` stores columns `i − kl ..= i + kl + ku`; the extra `kl`
//! super-diagonals hold the fill produced by row interchanges.

use num_complex::Complex64 as C64;

pub(crate) struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

pub(crate) struct BandedLu {
    m: BandedMatrix,
    pivots: Vec<usize>,
    /// Smallest |pivot| relative to the largest matrix entry.
    pub min_relative_pivot: f64,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
        }
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band"
        );
        let p = self.pos(i, j);
        self.data[p] = v;
    }

    #[allow(clippy::needless_range_loop)]
    pub fn factor(mut self) -> BandedLu {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut pivots = vec![0; n];
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.pos(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.pos(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            min_pivot = min_pivot.min(best);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.pos(k, j), self.pos(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.pos(k, k)];
            if pivot.norm() == 0.0 {
                continue;
            }
            let inv = pivot.inv();
            let row_k = self.pos(k, k);
            for i in k + 1..=last_row {
                let ik = self.pos(i, k);
                let l = self.data[ik] * inv;
                self.data[ik] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let len = last_col - k;
                let (head, tail) = self.data.split_at_mut(ik);
                let upper = &head[row_k + 1..=row_k + len];
                for (x, &u) in tail[1..=len].iter_mut().zip(upper) {
                    *x -= l * u;
                }
            }
        }
        BandedLu {
            m: self,
            pivots,
            min_relative_pivot: min_pivot / scale,
        }
    }
}

impl BandedLu {
    /// Solves `A x = b` in place.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &mut [C64]) {
        let m = &self.m;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= m.data[m.pos(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= m.data[m.pos(k, j)] * b[j];
            }
            b[k] = acc / m.data[m.pos(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn matches_dense_solve() {
        let n = 40;
        let (kl, ku) = (3, 5);
        // Deterministic pseudo-random entries; small diagonal forces pivoting.
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut dense = DMatrix::<C64>::zeros(n, n);
        let mut band = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = if i == j {
                    C64::new(1e-3 * next(), 0.0)
                } else {
                    C64::new(next(), next())
                };
                dense[(i, j)] = v;
                band.set(i, j, v);
            }
        }
        let rhs: Vec<C64> = (0..n).map(|k| C64::new(k as f64, 1.0)).collect();
        let want = dense
            .clone()
            .lu()
            .solve(&DVector::from_vec(rhs.clone()))
            .unwrap();
        let lu = band.factor();
        let mut got = rhs;
        lu.solve(&mut got);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-8 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn singular_reports_zero_pivot() {
        let mut band = BandedMatrix::zeros(3, 1, 1);
        band.set(0, 0, C64::new(1.0, 0.0));
        band.set(1, 0, C64::new(1.0, 0.0));
        let lu = band.factor();
        assert_eq!(lu.min_relative_pivot, 0.0);
    }
}
