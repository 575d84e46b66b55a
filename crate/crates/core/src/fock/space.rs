use crate::error::{DqsError, Result};
use serde::Serialize;

/// Truncated Fock space of `M` modes, row-major with mode 0 slowest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeSpace {
    cutoffs: Vec<usize>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    dim: usize,
}

impl ModeSpace {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(DqsError::InvalidParameter("mode space needs at least one mode".into()));
        }
        if let Some(d) = cutoffs.iter().find(|&&d| d < 2) {
            return Err(DqsError::InvalidParameter(format!("cutoff {d} below 2")));
        }
        let mut strides = vec![1usize; cutoffs.len()];
        let mut dim: usize = 1;
        for m in (0..cutoffs.len()).rev() {
            strides[m] = dim;
            dim = dim.checked_mul(cutoffs[m]).ok_or_else(|| {
                DqsError::InvalidParameter(format!("Hilbert dimension overflows for {cutoffs:?}"))
            })?;
        }
        Ok(Self { cutoffs, strides, dim })
    }

    pub fn uniform(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; modes])
    }

    pub fn modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest total excitation number representable.
    pub fn max_total(&self) -> usize {
        self.cutoffs.iter().map(|d| d - 1).sum()
    }

    pub fn index(&self, occupations: &[usize]) -> Option<usize> {
        if occupations.len() != self.modes() {
            return None;
        }
        let mut idx = 0;
        for (m, &n) in occupations.iter().enumerate() {
            if n >= self.cutoffs[m] {
                return None;
            }
            idx += n * self.strides[m];
        }
        Some(idx)
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.cutoffs[mode]
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes()).map(|m| self.occupation(index, m)).collect()
    }

    pub fn total_number(&self, index: usize) -> usize {
        (0..self.modes()).map(|m| self.occupation(index, m)).sum()
    }

    /// Total excitation number of every basis state.
    pub fn total_numbers(&self) -> Vec<usize> {
        (0..self.dim).map(|i| self.total_number(i)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &ModeSpace) -> Result<()> {
        if self != other {
            return Err(DqsError::Dimension(format!(
                "mode spaces differ: {:?} vs {:?}",
                self.cutoffs, other.cutoffs
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_mode_zero_slowest() {
        let s = ModeSpace::new(vec![3, 4]).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(s.index(&[1, 2]), Some(6));
        assert_eq!(s.occupations(6), vec![1, 2]);
        assert_eq!(s.index(&[3, 0]), None);
        assert_eq!(s.total_number(11), 5);
        assert_eq!(s.max_total(), 5);
    }

    #[test]
    fn rejects_bad_cutoffs() {
        assert!(ModeSpace::new(vec![]).is_err());
        assert!(ModeSpace::new(vec![4, 1]).is_err());
        assert!(ModeSpace::new(vec![usize::MAX / 2, 4]).is_err());
    }
}
