use std::fmt;

use crate::error::{Error, Result};

/// A bijection on `{0, …, n−1}`; `mapping[i]` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n {
                return Err(Error::InvalidPermutation(format!(
                    "index {m} out of range for n = {n}"
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPermutation(format!("duplicate index {m}")));
            }
        }
        Ok(Self { mapping })
    }

    /// Builds from 1-based images, as permutations are usually written.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let mapping = images
            .iter()
            .map(|&m| {
                m.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("index 0 in 1-based input".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mapping)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn normal_cycle_form(&self) -> NormalCycleForm {
        NormalCycleForm::of_mapping(&self.mapping)
    }
}

/// Disjoint cycle decomposition in normal form: each cycle starts at its
/// largest element, cycles are listed by strictly decreasing leader, fixed
/// points are kept as singleton cycles. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalCycleForm {
    n: usize,
    cycles: Vec<Vec<usize>>,
}

impl NormalCycleForm {
    pub(crate) fn of_mapping(mapping: &[usize]) -> Self {
        let n = mapping.len();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        // Scanning leaders from the top guarantees each new cycle starts at
        // its own maximum: every larger index is already placed.
        for lead in (0..n).rev() {
            if seen[lead] {
                continue;
            }
            let mut cycle = vec![lead];
            seen[lead] = true;
            let mut m = mapping[lead];
            while m != lead {
                seen[m] = true;
                cycle.push(m);
                m = mapping[m];
            }
            cycles.push(cycle);
        }
        Self { n, cycles }
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// Number of cycles `r`, fixed points included.
    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// `ε(σ) = (−1)^{n−r}`.
    pub fn sign(&self) -> i32 {
        if (self.n - self.cycles.len()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn is_normal(&self) -> bool {
        let leaders_ok = self.cycles.iter().all(|c| c.iter().all(|&m| m <= c[0]));
        let decreasing = self.cycles.windows(2).all(|w| w[0][0] > w[1][0]);
        leaders_ok && decreasing && self.cycles.first().is_none_or(|c| c[0] + 1 == self.n)
    }
}

/// 1-based rendering, e.g. `(3)(2 1)`.
impl fmt::Display for NormalCycleForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cycles {
            let body: Vec<String> = c.iter().map(|m| (m + 1).to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

/// Calls `visit` once per element of `S_n`, in lexicographic order of the
/// image arrays.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        visit(&p);
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return;
        };
        let pivot = i - 1;
        let j = (i..n).rev().find(|&j| p[j] > p[pivot]).unwrap();
        p.swap(pivot, j);
        p[i..].reverse();
    }
}
