use super::space::ModeSpace;
use super::state::DensityOp;
use crate::error::{DqsError, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PovmKind {
    JointParity,
    PerModeParity,
    Excitation,
}

/// Projective measurement that coarse-grains the Fock basis.
///
/// Each basis state belongs to exactly one outcome, so the elements are diagonal
/// projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    kind: PovmKind,
    space: ModeSpace,
    outcome_of: Vec<usize>,
    outcomes: usize,
}

impl Povm {
    pub fn new(kind: PovmKind, space: &ModeSpace) -> Self {
        let (outcome_of, outcomes) = match kind {
            PovmKind::JointParity => ((0..space.dim()).map(|i| space.total_number(i) % 2).collect(), 2),
            PovmKind::PerModeParity => (
                (0..space.dim())
                    .map(|i| {
                        (0..space.modes()).fold(0, |acc, m| (acc << 1) | (space.occupation(i, m) % 2))
                    })
                    .collect(),
                1 << space.modes(),
            ),
            PovmKind::Excitation => ((0..space.dim()).collect(), space.dim()),
        };
        Self { kind, space: space.clone(), outcome_of, outcomes }
    }

    pub fn kind(&self) -> PovmKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.outcomes
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes == 0
    }

    pub fn label(&self, k: usize) -> String {
        match self.kind {
            PovmKind::JointParity => if k == 0 { "even" } else { "odd" }.to_string(),
            PovmKind::PerModeParity => (0..self.space.modes())
                .rev()
                .map(|b| if (k >> b) & 1 == 0 { 'e' } else { 'o' })
                .collect(),
            PovmKind::Excitation => format!("{:?}", self.space.occupations(k)),
        }
    }

    pub fn outcome_of(&self, basis_index: usize) -> usize {
        self.outcome_of[basis_index]
    }

    /// Dense projector for outcome `k`.
    pub fn element(&self, k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.space.dim(), self.space.dim(), |i, j| {
            if i == j && self.outcome_of[i] == k {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn probabilities_from_diagonal(&self, diag: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.outcomes];
        for (i, &w) in diag.iter().enumerate() {
            p[self.outcome_of[i]] += w;
        }
        p
    }

    pub fn probabilities(&self, rho: &DensityOp) -> Result<Vec<f64>> {
        self.space.ensure_same(rho.space())?;
        Ok(self.probabilities_from_diagonal(&rho.diagonal()))
    }
}

pub fn joint_parity_povm(space: &ModeSpace) -> Povm {
    Povm::new(PovmKind::JointParity, space)
}

pub fn per_mode_parity_povm(space: &ModeSpace) -> Povm {
    Povm::new(PovmKind::PerModeParity, space)
}

pub fn excitation_povm(space: &ModeSpace) -> Result<Povm> {
    if space.dim() > 1 << 20 {
        return Err(DqsError::InvalidParameter(format!(
            "excitation POVM over {} outcomes",
            space.dim()
        )));
    }
    Ok(Povm::new(PovmKind::Excitation, space))
}

/// `Π = (−1)^N` as a diagonal matrix.
pub fn joint_parity_operator(space: &ModeSpace) -> DMatrix<f64> {
    DMatrix::from_fn(space.dim(), space.dim(), |i, j| {
        if i != j {
            0.0
        } else if space.total_number(i) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elements_resolve_identity() {
        let space = ModeSpace::new(vec![3, 2]).unwrap();
        for kind in [PovmKind::JointParity, PovmKind::PerModeParity, PovmKind::Excitation] {
            let povm = Povm::new(kind, &space);
            let sum = (0..povm.len()).fold(DMatrix::<f64>::zeros(6, 6), |acc, k| acc + povm.element(k));
            assert_eq!(sum, DMatrix::identity(6, 6));
        }
    }

    #[test]
    fn per_mode_labels() {
        let space = ModeSpace::new(vec![3, 3]).unwrap();
        let povm = per_mode_parity_povm(&space);
        let idx = space.index(&[1, 2]).unwrap();
        assert_eq!(povm.label(povm.outcome_of(idx)), "oe");
        assert_eq!(joint_parity_povm(&space).label(1), "odd");
    }

    #[test]
    fn parity_operator_squares_to_identity() {
        let space = ModeSpace::new(vec![3, 4]).unwrap();
        let p = joint_parity_operator(&space);
        assert_eq!(&p * &p, DMatrix::identity(12, 12));
        assert_eq!(p[(space.index(&[1, 2]).unwrap(), space.index(&[1, 2]).unwrap())], -1.0);
    }
}
