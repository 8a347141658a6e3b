//! Supercommutative monomials in the ghost variables `c^i`, one per basis
//! vector, of parity opposite to it. Monomials are nondecreasing index
//! lists; a ghost of odd parity occurs at most once. Every Koszul sign in
//! the complex comes from [`Ghosts::mul`] and [`Ghosts::derive`].

use smallvec::SmallVec;

pub type Word = SmallVec<[u16; 8]>;

#[derive(Clone, Debug)]
pub struct Ghosts {
    /// `odd[i]` holds when `c^i` anticommutes (the basis vector is even).
    odd: Vec<bool>,
}

impl Ghosts {
    pub fn new(odd: Vec<bool>) -> Self {
        Ghosts { odd }
    }

    #[inline]
    pub fn is_odd(&self, i: u16) -> bool {
        self.odd[i as usize]
    }

    /// Number of anticommuting factors, mod 2.
    pub fn parity(&self, m: &[u16]) -> u32 {
        m.iter().filter(|&&i| self.is_odd(i)).count() as u32 & 1
    }

    /// `a * b` with its reordering sign; `None` when an anticommuting ghost
    /// repeats.
    pub fn mul(&self, a: &[u16], b: &[u16]) -> Option<(bool, Word)> {
        let mut out = Word::with_capacity(a.len() + b.len());
        let mut negative = false;
        // Anticommuting factors of `a` not yet emitted.
        let mut odd_left = a.iter().filter(|&&i| self.is_odd(i)).count();
        let (mut x, mut y) = (0, 0);
        while x < a.len() || y < b.len() {
            let take_a = y == b.len() || (x < a.len() && a[x] <= b[y]);
            if take_a {
                if y < b.len() && a[x] == b[y] && self.is_odd(a[x]) {
                    return None;
                }
                if self.is_odd(a[x]) {
                    odd_left -= 1;
                }
                out.push(a[x]);
                x += 1;
            } else {
                if self.is_odd(b[y]) && odd_left % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[y]);
                y += 1;
            }
        }
        Some((negative, out))
    }

    /// Left derivative `d/dc^k` of the monomial: signed multiplicity and
    /// the remaining factors.
    pub fn derive(&self, k: u16, m: &[u16]) -> Option<(i64, Word)> {
        let pos = m.iter().position(|&i| i == k)?;
        let mut rest = Word::from_slice(&m[..pos]);
        rest.extend_from_slice(&m[pos + 1..]);
        if self.is_odd(k) {
            let before = m[..pos].iter().filter(|&&i| self.is_odd(i)).count();
            Some((if before % 2 == 0 { 1 } else { -1 }, rest))
        } else {
            let mult = m.iter().filter(|&&i| i == k).count() as i64;
            Some((mult, rest))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Expands a word into an ordered product and sorts it by adjacent
    /// transpositions, the slow way.
    fn bubble(g: &Ghosts, mut w: Vec<u16>) -> Option<(bool, Vec<u16>)> {
        let mut neg = false;
        for i in 0..w.len() {
            for j in 0..w.len() - 1 - i {
                if w[j] > w[j + 1] {
                    if g.is_odd(w[j]) && g.is_odd(w[j + 1]) {
                        neg = !neg;
                    }
                    w.swap(j, j + 1);
                }
            }
        }
        if w.windows(2).any(|p| p[0] == p[1] && g.is_odd(p[0])) {
            return None;
        }
        Some((neg, w))
    }

    #[test]
    fn mul_matches_bubble_sort() {
        let g = Ghosts::new(vec![true, false, true, false, true]);
        let words: Vec<Vec<u16>> = vec![
            vec![],
            vec![0],
            vec![1, 1],
            vec![0, 2],
            vec![1, 3, 4],
            vec![2, 3, 3],
            vec![0, 1, 4],
        ];
        for a in &words {
            for b in &words {
                let mut cat = a.clone();
                cat.extend(b);
                let want = bubble(&g, cat);
                let got = g.mul(a, b).map(|(n, w)| (n, w.to_vec()));
                assert_eq!(got, want, "{a:?} * {b:?}");
            }
        }
    }

    #[test]
    fn derive_signs() {
        let g = Ghosts::new(vec![true, false, true]);
        assert_eq!(g.derive(2, &[0, 2]).unwrap(), (-1, Word::from_slice(&[0])));
        assert_eq!(g.derive(0, &[0, 2]).unwrap(), (1, Word::from_slice(&[2])));
        assert_eq!(
            g.derive(1, &[0, 1, 1, 2]).unwrap(),
            (2, Word::from_slice(&[0, 1, 2]))
        );
        assert!(g.derive(1, &[0, 2]).is_none());
    }
}
