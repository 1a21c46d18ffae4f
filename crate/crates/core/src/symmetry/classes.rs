//! Orbits of outcome/index strings under simultaneous relabeling by `S_d`.
//!
//! A string `(i, j_N, ..., j_1)` is mapped to its canonical form by renaming
//! symbols in order of first appearance, so `(2, 0, 2)` becomes `(0, 1, 0)`,
//! printed as `xyx`.

use serde::Serialize;

const LETTERS: &[u8] = b"xyzwvutsrq";

/// One relabeling orbit of strings of a fixed length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EquivClass {
    /// Canonical digits: symbols appear in increasing order of first use.
    pub pattern: Vec<usize>,
    /// Number of distinct symbols.
    pub parts: usize,
    /// Number of strings in the orbit, `d (d-1) ... (d-p+1)`.
    pub multiplicity: u64,
}

impl EquivClass {
    /// Letter form of the pattern (`x`, `y`, `z`, ...).
    pub fn letters(&self) -> String {
        pattern_letters(&self.pattern)
    }
}

pub fn pattern_letters(pattern: &[usize]) -> String {
    pattern
        .iter()
        .map(|&k| LETTERS.get(k).map(|&b| b as char).unwrap_or('?'))
        .collect()
}

/// Canonical representative of the orbit of `s`.
pub fn canonical(s: &[usize]) -> Vec<usize> {
    let mut seen: Vec<usize> = Vec::new();
    s.iter()
        .map(|x| match seen.iter().position(|y| y == x) {
            Some(k) => k,
            None => {
                seen.push(*x);
                seen.len() - 1
            }
        })
        .collect()
}

/// `d (d-1) ... (d-p+1)`.
pub fn falling_factorial(d: usize, p: usize) -> u64 {
    (0..p).map(|k| (d - k) as u64).product()
}

/// Canonical strings of length `len` with at most `d` distinct symbols, in
/// lexicographic order.
pub fn canonical_strings(len: usize, d: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, used: usize, len: usize, d: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=used.min(d - 1) {
            prefix.push(k);
            grow(prefix, used.max(k + 1), len, d, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 0, len, d, &mut out);
    out
}

/// Classes of strings of length `len` over `d` symbols.
pub fn string_classes(len: usize, d: usize) -> Vec<EquivClass> {
    canonical_strings(len, d)
        .into_iter()
        .map(|pattern| {
            let parts = pattern.iter().max().map(|m| m + 1).unwrap_or(0);
            EquivClass {
                multiplicity: falling_factorial(d, parts),
                pattern,
                parts,
            }
        })
        .collect()
}

/// Classes of `(i, j_N, ..., j_1)` for `N` uses in dimension `d`.
pub fn equivalence_classes(n_uses: usize, d: usize) -> Vec<EquivClass> {
    string_classes(n_uses + 1, d)
}

/// Position of the class of `s` within `string_classes(s.len(), d)`.
pub fn class_index(classes: &[EquivClass], s: &[usize]) -> Option<usize> {
    let c = canonical(s);
    classes.iter().position(|k| k.pattern == c)
}

/// All strings of length `len` over `d` symbols, first symbol most
/// significant.
pub fn all_strings(len: usize, d: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = d.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut s = vec![0; len];
        for k in (0..len).rev() {
            s[k] = idx % d;
            idx /= d;
        }
        s
    })
}

/// Flat index of a string over `d` symbols, first symbol most significant.
pub fn string_index(s: &[usize], d: usize) -> usize {
    s.iter().fold(0, |acc, &x| acc * d + x)
}
