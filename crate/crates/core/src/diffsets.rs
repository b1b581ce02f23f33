//! Two-dimensional difference sets on `Z_P x Z_Q`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sequences::ExcitationGrid;

/// Default primitive polynomials over GF(2) as bit masks, one per degree 2..=16.
/// Bit `i` is the coefficient of `x^i`.
pub const PRIMITIVE_POLYS: [(u32, u64); 15] = [
    (2, 0x7),
    (3, 0xB),
    (4, 0x13),
    (5, 0x25),
    (6, 0x43),
    (7, 0x83),
    (8, 0x11D),
    (9, 0x211),
    (10, 0x409),
    (11, 0x805),
    (12, 0x1053),
    (13, 0x201B),
    (14, 0x4443),
    (15, 0x8003),
    (16, 0x1100B),
];

/// Default cell limit for [`brute_force_search`].
pub const BRUTE_FORCE_LIMIT: usize = 25;

/// `(P, Q, H, gamma)` with `H(H-1) = gamma(PQ-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Descriptors {
    pub p: usize,
    pub q: usize,
    pub h: usize,
    pub gamma: usize,
}

impl Descriptors {
    pub fn new(p: usize, q: usize, h: usize, gamma: usize) -> Result<Self> {
        let d = Self { p, q, h, gamma };
        let n = p.checked_mul(q).unwrap_or(0);
        if n == 0 || h == 0 || h > n || gamma > h || h * (h - 1) != gamma * (n - 1) {
            return Err(Error::InvalidDescriptors { p, q, h, gamma });
        }
        Ok(d)
    }

    /// Re-check the counting identity (fields are public).
    pub fn check(&self) -> Result<()> {
        Self::new(self.p, self.q, self.h, self.gamma).map(|_| ())
    }

    pub fn order(&self) -> usize {
        self.p * self.q
    }

    pub fn thinning(&self) -> f64 {
        self.h as f64 / self.order() as f64
    }

    /// Beam sample level `gamma(PQ-1) + H`, equal to `H^2`.
    pub fn peak(&self) -> f64 {
        (self.gamma * (self.order() - 1) + self.h) as f64
    }

    /// Off-beam sample level `H - gamma`.
    pub fn offpeak(&self) -> f64 {
        (self.h - self.gamma) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceSet {
    desc: Descriptors,
    indices: Vec<(usize, usize)>,
}

impl DifferenceSet {
    /// Validate and wrap an index set; indices are stored sorted.
    pub fn new(p: usize, q: usize, mut indices: Vec<(usize, usize)>) -> Result<Self> {
        let (h, gamma) = validate(p, q, &indices)?;
        indices.sort_unstable();
        Ok(Self { desc: Descriptors { p, q, h, gamma }, indices })
    }

    pub fn descriptors(&self) -> Descriptors {
        self.desc
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.desc.p, self.desc.q)
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    pub fn contains(&self, p: usize, q: usize) -> bool {
        self.indices.binary_search(&(p, q)).is_ok()
    }

    /// Binary grid with a one at `(p, q)` iff `((p+sx) mod P, (q+sy) mod Q)` is in the set.
    pub fn to_excitations(&self, sx: i64, sy: i64) -> ExcitationGrid {
        let (p, q) = self.dims();
        let ox = sx.rem_euclid(p as i64) as usize;
        let oy = sy.rem_euclid(q as i64) as usize;
        ExcitationGrid::from_binary(p, q, |a, b| self.contains((a + ox) % p, (b + oy) % q)).expect("nonzero dimensions")
    }

    /// The set translated so that `to_excitations(0, 0)` of the result equals
    /// `to_excitations(sx, sy)` of `self`.
    pub fn shifted(&self, sx: i64, sy: i64) -> Self {
        let (p, q) = self.dims();
        let ox = sx.rem_euclid(p as i64) as usize;
        let oy = sy.rem_euclid(q as i64) as usize;
        let mut indices: Vec<(usize, usize)> =
            self.indices.iter().map(|&(a, b)| ((a + p - ox) % p, (b + q - oy) % q)).collect();
        indices.sort_unstable();
        Self { desc: self.desc, indices }
    }

    /// Complement `(PQ, PQ-H, PQ-2H+gamma)`.
    pub fn complement(&self) -> Result<Self> {
        let (p, q) = self.dims();
        let mut out = Vec::with_capacity(p * q - self.indices.len());
        for a in 0..p {
            for b in 0..q {
                if !self.contains(a, b) {
                    out.push((a, b));
                }
            }
        }
        Self::new(p, q, out)
    }
}

/// Return `(H, gamma)` when the indicator of `indices` has a two-level circular
/// autocorrelation.
pub fn validate(p: usize, q: usize, indices: &[(usize, usize)]) -> Result<(usize, usize)> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive"));
    }
    if indices.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = p * q;
    let mut seen = vec![false; n];
    for &(a, b) in indices {
        if a >= p || b >= q {
            return Err(Error::IndexOutOfRange { p: a, q: b, pp: p, qq: q });
        }
        if core::mem::replace(&mut seen[a + p * b], true) {
            return Err(Error::DuplicateIndex { p: a, q: b });
        }
    }
    let h = indices.len();
    if n == 1 {
        return Ok((h, 0));
    }
    let mut counts = vec![0usize; n];
    for &(a1, b1) in indices {
        for &(a2, b2) in indices {
            let s = (a2 + p - a1) % p;
            let t = (b2 + q - b1) % q;
            counts[s + p * t] += 1;
        }
    }
    let gamma = counts[1];
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c != gamma {
            return Err(Error::NotADifferenceSet { s: i % p, t: i / p, found: c, expected: gamma });
        }
    }
    Ok((h, gamma))
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

// Legendre symbol for odd prime `p` and `x` not divisible by `p`.
fn legendre(x: usize, p: usize) -> i32 {
    if pow_mod(x as u64, (p as u64 - 1) / 2, p as u64) == 1 {
        1
    } else {
        -1
    }
}

/// Twin-prime `(pq, (pq-1)/2, (pq-3)/4)` set on the `p x q` grid.
pub fn twin_prime(p: usize, q: usize) -> Result<DifferenceSet> {
    if q != p + 2 || !is_prime(p) || !is_prime(q) || p < 3 {
        return Err(Error::NotTwinPrimes { p, q });
    }
    let mut idx = Vec::with_capacity((p * q - 1) / 2);
    for a in 0..p {
        idx.push((a, 0));
        if a == 0 {
            continue;
        }
        let la = legendre(a, p);
        for b in 1..q {
            if la * legendre(b, q) == 1 {
                idx.push((a, b));
            }
        }
    }
    DifferenceSet::new(p, q, idx)
}

/// Singer set from the zero positions of an m-sequence, as a `(2^m - 1) x 1` grid.
pub fn singer(m: u32, poly: u64) -> Result<DifferenceSet> {
    if !(2..=24).contains(&m) || poly >> m != 1 || poly & 1 == 0 {
        return Err(Error::NonPrimitivePolynomial { m, poly });
    }
    let n = (1usize << m) - 1;
    let taps = poly & ((1u64 << m) - 1);
    let mut state: u64 = 1;
    let mut zeros = Vec::with_capacity(n / 2 + 1);
    for i in 0..n {
        if i > 0 && state == 1 {
            return Err(Error::NonPrimitivePolynomial { m, poly });
        }
        if state & 1 == 0 {
            zeros.push((i, 0));
        }
        let fb = (state & taps).count_ones() as u64 & 1;
        state = (state >> 1) | (fb << (m - 1));
    }
    if state != 1 {
        return Err(Error::NonPrimitivePolynomial { m, poly });
    }
    DifferenceSet::new(n, 1, zeros)
}

/// Singer set with the built-in primitive polynomial for degree `m`.
pub fn singer_default(m: u32) -> Result<DifferenceSet> {
    let poly = PRIMITIVE_POLYS
        .iter()
        .find(|(d, _)| *d == m)
        .map(|(_, p)| *p)
        .ok_or(Error::InvalidArgument("no built-in primitive polynomial for this degree"))?;
    singer(m, poly)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Map a cyclic set on `Z_N` to `Z_P x Z_Q` through `n -> (n mod P, n mod Q)`.
pub fn crt_fold(cyclic: &DifferenceSet, p: usize, q: usize) -> Result<DifferenceSet> {
    let (n, one) = cyclic.dims();
    if one != 1 {
        return Err(Error::InvalidArgument("fold expects a one-dimensional set"));
    }
    if p.checked_mul(q) != Some(n) {
        return Err(Error::SizeMismatch { expected: n, got: p.saturating_mul(q) });
    }
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let idx = cyclic.indices().iter().map(|&(i, _)| (i % p, i % q)).collect();
    DifferenceSet::new(p, q, idx)
}

/// Exhaustive search for `H`-subsets of `Z_P x Z_Q` forming a difference set,
/// in lexicographic order, at most `limit` results. Grids larger than
/// `max_cells` are refused.
pub fn brute_force_search(p: usize, q: usize, h: usize, limit: usize, max_cells: usize) -> Result<Vec<DifferenceSet>> {
    let n = p * q;
    if n > max_cells {
        return Err(Error::SearchSpaceTooLarge { cells: n, limit: max_cells });
    }
    if n == 0 || h == 0 || h > n || limit == 0 {
        return Ok(Vec::new());
    }
    if n > 1 && (h * (h - 1)) % (n - 1) != 0 {
        return Ok(Vec::new());
    }
    let gamma = if n > 1 { h * (h - 1) / (n - 1) } else { 0 };
    let mut search = Search { p, q, h, gamma, limit, chosen: Vec::new(), counts: vec![0; n], found: Vec::new() };
    search.extend(0);
    search
        .found
        .into_iter()
        .map(|cells| DifferenceSet::new(p, q, cells.into_iter().map(|c| (c / q, c % q)).collect()))
        .collect()
}

struct Search {
    p: usize,
    q: usize,
    h: usize,
    gamma: usize,
    limit: usize,
    chosen: Vec<usize>,
    counts: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl Search {
    // Cells are numbered `a*Q + b` so ascending numbers are lexicographic in (a, b).
    fn lag(&self, from: usize, to: usize) -> usize {
        let (a1, b1) = (from / self.q, from % self.q);
        let (a2, b2) = (to / self.q, to % self.q);
        (a2 + self.p - a1) % self.p + self.p * ((b2 + self.q - b1) % self.q)
    }

    fn extend(&mut self, start: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if self.chosen.len() == self.h {
            self.found.push(self.chosen.clone());
            return;
        }
        let n = self.p * self.q;
        let need = self.h - self.chosen.len();
        for c in start..=(n - need) {
            let mut ok = true;
            let mut touched = Vec::with_capacity(2 * self.chosen.len());
            for i in 0..self.chosen.len() {
                let o = self.chosen[i];
                for lag in [self.lag(o, c), self.lag(c, o)] {
                    self.counts[lag] += 1;
                    touched.push(lag);
                    if self.counts[lag] > self.gamma {
                        ok = false;
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.chosen.push(c);
                self.extend(c + 1);
                self.chosen.pop();
            }
            for lag in touched {
                self.counts[lag] -= 1;
            }
            if self.found.len() >= self.limit {
                return;
            }
        }
    }
}
