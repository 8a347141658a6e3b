//! Monomials of the Grassmann algebra on at most 32 odd generators.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub u32);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn generator(i: usize) -> Self {
        Monomial(1 << i)
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn generators(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.0 & (1 << i) != 0)
    }

    /// Left derivative `d/dtheta_i`: the generator is moved to the front
    /// past the generators of lower index, then removed.
    pub fn derive(self, i: usize) -> Option<(i64, Monomial)> {
        if !self.contains(i) {
            return None;
        }
        let before = (self.0 & ((1u32 << i) - 1)).count_ones();
        let sign = if before.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, Monomial(self.0 & !(1 << i))))
    }

    /// Product with the generators of both factors reordered increasingly.
    pub fn mul(self, other: Monomial) -> Option<(i64, Monomial)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0;
        for j in other.generators() {
            swaps += (self.0 >> j).count_ones() - u32::from(self.contains(j));
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, Monomial(self.0 | other.0)))
    }

    pub fn name(self, generator_names: &[String]) -> String {
        if self.0 == 0 {
            return "1".into();
        }
        self.generators()
            .map(|i| generator_names[i].as_str())
            .collect()
    }

    /// All monomials on `n` generators ordered by degree, then bit pattern.
    pub fn all(n: usize) -> Vec<Monomial> {
        let mut v: Vec<Monomial> = (0..(1u32 << n)).map(Monomial).collect();
        v.sort_by_key(|m| (m.degree(), m.0));
        v
    }
}
