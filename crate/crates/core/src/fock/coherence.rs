use super::ops::{lower, raise};
use super::space::ModeSpace;
use super::state::{DensityOp, PureState};
use super::C64;
use nalgebra::DMatrix;
use serde::Serialize;

/// Anything whose expectation values of Fock-space operators can be taken.
pub trait Expectation {
    fn space(&self) -> &ModeSpace;

    /// `Tr(ρ X)` for an operator given by its action on vectors.
    fn expect(&self, op: &dyn Fn(&[C64]) -> Vec<C64>) -> C64;
}

impl Expectation for PureState {
    fn space(&self) -> &ModeSpace {
        PureState::space(self)
    }

    fn expect(&self, op: &dyn Fn(&[C64]) -> Vec<C64>) -> C64 {
        let v = self.amplitudes().as_slice();
        let w = op(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }
}

impl Expectation for DensityOp {
    fn space(&self) -> &ModeSpace {
        DensityOp::space(self)
    }

    fn expect(&self, op: &dyn Fn(&[C64]) -> Vec<C64>) -> C64 {
        let m = self.matrix();
        (0..m.ncols())
            .map(|k| {
                let col: Vec<C64> = m.column(k).iter().copied().collect();
                op(&col)[k]
            })
            .sum()
    }
}

/// First and second moments that control the small-displacement sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceSummary {
    pub modes: usize,
    /// `⟨a_i† a_i⟩`
    pub occupations: Vec<f64>,
    /// `C[i][j] = ⟨a_i† a_j⟩`
    #[serde(skip)]
    pub coherences: DMatrix<C64>,
    /// `⟨n_B⟩` for `b = Σ a_i / √M`
    pub nb_mean: f64,
    pub nb_sq_mean: f64,
    pub total_mean: f64,
}

impl CoherenceSummary {
    /// `4 Σ (2⟨n_i⟩ + 1)`
    pub fn f_self(&self) -> f64 {
        4.0 * self.occupations.iter().map(|n| 2.0 * n + 1.0).sum::<f64>()
    }

    /// `4 Σ_{i≠j} ⟨a_i† a_j + h.c.⟩`
    pub fn f_cross(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.modes {
            for j in 0..self.modes {
                if i != j {
                    s += 2.0 * self.coherences[(i, j)].re;
                }
            }
        }
        4.0 * s
    }

    pub fn max_occupation(&self) -> f64 {
        self.occupations.iter().copied().fold(0.0, f64::max)
    }

    /// Common-mode summary of `modes` modes sharing one excitation distribution.
    pub fn common_mode(modes: usize, nb_mean: f64, nb_sq_mean: f64) -> Self {
        let per = nb_mean / modes as f64;
        Self {
            modes,
            occupations: vec![per; modes],
            coherences: DMatrix::from_element(modes, modes, C64::new(per, 0.0)),
            nb_mean,
            nb_sq_mean,
            total_mean: nb_mean,
        }
    }
}

pub fn coherence_summary<S: Expectation + ?Sized>(state: &S) -> CoherenceSummary {
    let space = state.space().clone();
    let m = space.modes();
    let mut c = DMatrix::<C64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let sp = space.clone();
            c[(i, j)] = state.expect(&move |v: &[C64]| raise(&sp, &lower(&sp, v, j), i));
        }
    }
    let occupations: Vec<f64> = (0..m).map(|i| c[(i, i)].re).collect();
    let total_mean: f64 = occupations.iter().sum();
    let nb_mean = c.iter().map(|z| z.re).sum::<f64>() / m as f64;
    let sp = space.clone();
    let n_b = move |v: &[C64]| -> Vec<C64> {
        let s: Vec<C64> = (0..m).fold(vec![C64::new(0.0, 0.0); v.len()], |mut acc, j| {
            for (a, b) in acc.iter_mut().zip(lower(&sp, v, j)) {
                *a += b;
            }
            acc
        });
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for i in 0..m {
            for (a, b) in out.iter_mut().zip(raise(&sp, &s, i)) {
                *a += b / m as f64;
            }
        }
        out
    };
    let nb_sq_mean = state.expect(&|v: &[C64]| n_b(&n_b(v))).re;
    CoherenceSummary { modes: m, occupations, coherences: c, nb_mean, nb_sq_mean, total_mean }
}
