//! The code `C_m` with generator `[I_m | J_m]`, where `J_m` holds every
//! weight-2 column.
//!
//! Positions are unordered pairs `[i, j]` of vertices `0..=m`. Position
//! `[0, j]` carries information bit `j` (1-based), position `[i, j]` with
//! `1 <= i < j` carries the parity `a_i + a_j`. The generator matrix is
//! never materialized.

use crate::error::{invalid, Error, Result};

/// Code length `n = (m+1 choose 2)`.
pub const fn pair_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// An unordered position `[i, j]`, stored with `i < j`.
///
/// The linear layout is colexicographic: `[i, j] ↦ j(j-1)/2 + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    i: usize,
    j: usize,
}

impl PairIndex {
    /// # Panics
    ///
    /// If `a == b`.
    #[inline]
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "a position needs two distinct vertices");
        if a < b {
            Self { i: a, j: b }
        } else {
            Self { i: b, j: a }
        }
    }

    pub fn i(self) -> usize {
        self.i
    }

    pub fn j(self) -> usize {
        self.j
    }

    #[inline]
    pub fn linear(self) -> usize {
        self.j * (self.j - 1) / 2 + self.i
    }

    pub fn from_linear(k: usize) -> Self {
        // Largest j with j(j-1)/2 <= k.
        let mut j = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0) as usize;
        while j * (j - 1) / 2 > k {
            j -= 1;
        }
        while (j + 1) * j / 2 <= k {
            j += 1;
        }
        Self {
            i: k - j * (j - 1) / 2,
            j,
        }
    }

    /// Information positions are exactly `[0, j]`.
    pub fn is_information(self) -> bool {
        self.i == 0
    }
}

/// Linear position of information bit `bit` (1-based).
#[inline]
pub fn info_position(bit: usize) -> usize {
    PairIndex::new(0, bit).linear()
}

/// `m` information bits `a_{0,1}, …, a_{0,m}`, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoWord(Vec<u8>);

impl InfoWord {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("info", "bits must be 0 or 1"));
        }
        Ok(Self(bits))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Systematic encoder; `O(n)`.
pub fn encode(info: &InfoWord, m: usize) -> Result<Vec<u8>> {
    if info.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: info.len(),
        });
    }
    let a = info.bits();
    let mut word = Vec::with_capacity(pair_count(m));
    for j in 1..=m {
        let aj = a[j - 1];
        word.push(aj);
        for i in 1..j {
            word.push(a[i - 1] ^ aj);
        }
    }
    Ok(word)
}

/// Antipodal map `0 ↦ +1`, `1 ↦ -1`.
pub fn modulate(bits: &[u8]) -> Vec<i8> {
    bits.iter().map(|&b| 1 - 2 * (b as i8)).collect()
}

/// Weight of any codeword generated by `s` rows: `s(m - s + 1)`.
pub fn codeword_weight(s: usize, m: usize) -> Result<usize> {
    if s > m {
        return Err(invalid("s", format!("{s} > m = {m}")));
    }
    Ok(s * (m - s + 1))
}

/// Minimum distance of `C_m`, attained by single rows and by the all-rows sum.
pub fn min_distance(m: usize) -> usize {
    m
}

/// Linear positions in the support of generator row `p` (1-based): the
/// information position `[0, p]` and every parity `[p, j]`.
pub fn row_support(p: usize, m: usize) -> impl Iterator<Item = usize> {
    (0..=m)
        .filter(move |&j| j != p)
        .map(move |j| PairIndex::new(p, j).linear())
}
