//! Ladder operators, displacement matrices and per-mode operator application.

use super::space::ModeSpace;
use super::C64;
use crate::error::{DqsError, Result};
use nalgebra::DMatrix;

/// Largest amplitude allowed in the last padded level of a displacement column.
pub const DISPLACEMENT_BOUNDARY_TOL: f64 = 1e-13;

/// Truncated `(a, a†)` on `cutoff` levels.
pub fn ladder(cutoff: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::<f64>::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    let ad = a.transpose();
    (a, ad)
}

pub fn default_pad(amplitude: f64, cutoff: usize) -> usize {
    10usize.max((6.0 * amplitude.abs() * (cutoff as f64).sqrt()).ceil() as usize)
}

/// Displacement operator cropped to the retained levels.
#[derive(Debug, Clone)]
pub struct Displacement {
    pub matrix: DMatrix<C64>,
    pub pad: usize,
    /// Largest amplitude any retained column leaves in the last padded level.
    pub boundary_leakage: f64,
}

/// Real displacement `exp(alpha (a† - a))`, cropped; returns the matrix, pad and boundary amplitude.
///
/// With `pad = None` the default pad is grown until the boundary amplitude is below
/// [`DISPLACEMENT_BOUNDARY_TOL`]. An explicit pad is used as given.
pub fn real_displacement(alpha: f64, cutoff: usize, pad: Option<usize>) -> Result<(DMatrix<f64>, usize, f64)> {
    if !alpha.is_finite() {
        return Err(DqsError::InvalidParameter(format!("displacement amplitude {alpha}")));
    }
    if cutoff < 1 {
        return Err(DqsError::InvalidParameter("cutoff must be positive".into()));
    }
    let (mut p, fixed) = match pad {
        Some(p) => (p, true),
        None => (default_pad(alpha, cutoff), false),
    };
    for _ in 0..8 {
        let n = cutoff + p;
        let (a, ad) = ladder(n);
        let full = ((ad - a) * alpha).exp();
        let boundary = (0..cutoff)
            .map(|j| full[(n - 1, j)].abs())
            .fold(0.0, f64::max);
        if boundary <= DISPLACEMENT_BOUNDARY_TOL || fixed {
            if boundary > DISPLACEMENT_BOUNDARY_TOL {
                return Err(DqsError::Truncation {
                    leakage: boundary,
                    tolerance: DISPLACEMENT_BOUNDARY_TOL,
                    context: format!("displacement alpha={alpha} cutoff={cutoff} pad={p}"),
                });
            }
            return Ok((full.view((0, 0), (cutoff, cutoff)).into_owned(), p, boundary));
        }
        p *= 2;
    }
    Err(DqsError::Truncation {
        leakage: 1.0,
        tolerance: DISPLACEMENT_BOUNDARY_TOL,
        context: format!("displacement alpha={alpha} cutoff={cutoff}: padding did not converge"),
    })
}

/// `D(z) = exp(z a† - z* a)` on `cutoff` levels, computed with padding and cropped.
pub fn displacement_matrix(amplitude: C64, cutoff: usize, pad: Option<usize>) -> Result<Displacement> {
    let r = amplitude.norm();
    let phi = amplitude.arg();
    let (d, pad, boundary_leakage) = real_displacement(r, cutoff, pad)?;
    // D(r e^{i phi}) = e^{i phi n} D(r) e^{-i phi n}
    let matrix = DMatrix::from_fn(cutoff, cutoff, |j, k| {
        C64::from_polar(d[(j, k)], phi * (j as f64 - k as f64))
    });
    Ok(Displacement { matrix, pad, boundary_leakage })
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` acting on `mode`.
pub fn embed_operator(op: &DMatrix<C64>, mode: usize, space: &ModeSpace) -> Result<DMatrix<C64>> {
    if mode >= space.modes() {
        return Err(DqsError::Dimension(format!("mode {mode} out of range")));
    }
    let d = space.cutoff(mode);
    if op.nrows() != d || op.ncols() != d {
        return Err(DqsError::Dimension(format!(
            "operator is {}x{}, mode {mode} has cutoff {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    let before: usize = space.cutoffs()[..mode].iter().product();
    let after = space.stride(mode);
    let left = DMatrix::<C64>::identity(before, before).kronecker(op);
    Ok(left.kronecker(&DMatrix::<C64>::identity(after, after)))
}

/// `a_mode |v⟩`.
pub fn lower(space: &ModeSpace, v: &[C64], mode: usize) -> Vec<C64> {
    let stride = space.stride(mode);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        let n = space.occupation(i, mode);
        if n > 0 && x != C64::new(0.0, 0.0) {
            out[i - stride] += x * (n as f64).sqrt();
        }
    }
    out
}

/// `a†_mode |v⟩` with the top level annihilated.
pub fn raise(space: &ModeSpace, v: &[C64], mode: usize) -> Vec<C64> {
    let stride = space.stride(mode);
    let top = space.cutoff(mode) - 1;
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        let n = space.occupation(i, mode);
        if n < top && x != C64::new(0.0, 0.0) {
            out[i + stride] += x * ((n + 1) as f64).sqrt();
        }
    }
    out
}

/// Applies a single-mode matrix `op` to `mode` of a flat state vector.
pub fn apply_mode<T>(space: &ModeSpace, v: &[C64], mode: usize, op: &DMatrix<T>) -> Vec<C64>
where
    T: Copy + Into<C64> + nalgebra::Scalar,
{
    let d = space.cutoff(mode);
    let stride = space.stride(mode);
    let block = d * stride;
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for base in (0..v.len()).step_by(block) {
        for inner in 0..stride {
            for k in 0..d {
                let x = v[base + k * stride + inner];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    let o: C64 = op[(j, k)].into();
                    out[base + j * stride + inner] += o * x;
                }
            }
        }
    }
    out
}

/// `rho ↦ ⊗ops rho (⊗ops)†` applied mode by mode.
pub fn conjugate_by_modes(space: &ModeSpace, rho: &DMatrix<C64>, ops: &[&DMatrix<C64>]) -> DMatrix<C64> {
    let n = space.dim();
    let mut x = rho.clone();
    for _ in 0..2 {
        for col in 0..n {
            let mut c: Vec<C64> = x.column(col).iter().copied().collect();
            for (mode, op) in ops.iter().enumerate() {
                c = apply_mode(space, &c, mode, *op);
            }
            x.column_mut(col).copy_from_slice(&c);
        }
        x = x.adjoint();
    }
    x
}
