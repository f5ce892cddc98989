//! Dense complex linear algebra: products, norms, a pivoted linear solve and
//! the matrix exponential.
//!
//! The exponential uses scaling and squaring around diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, picked from the 1-norm of the
//! input (Higham, SIAM J. Matrix Anal. Appl. 26, 2005). The degree thresholds
//! bound the backward error by the double-precision unit roundoff, so any
//! requested tolerance in `(0, 1e-6]` is met.

mod matrix;

pub use matrix::ComplexMatrix;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix shape {rows}x{cols} must be nonempty")]
    EmptyShape { rows: usize, cols: usize },
    #[error("{op}: non-finite entry")]
    NonFinite { op: &'static str },
    #[error("tolerance {0} outside (0, 1e-6]")]
    InvalidTolerance(f64),
    #[error("singular system in {op}")]
    Singular { op: &'static str },
}

/// Largest tolerance `expm` accepts.
pub const MAX_EXPM_TOLERANCE: f64 = 1e-6;

/// Product `a * b`.
pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if a.cols() != b.rows() {
        return Err(LinalgError::Dimension {
            op: "mat_mul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let out = mul_unchecked(a, b);
    out.ensure_finite("mat_mul")?;
    Ok(out)
}

/// i-k-j product: the inner loop streams a row of `b` into a row of the output.
pub(crate) fn mul_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.cols();
    let mut out = ComplexMatrix::zeros(a.rows(), n);
    let data = out.data_mut();
    for i in 0..a.rows() {
        let out_row = &mut data[i * n..(i + 1) * n];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            for (o, &bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Max column sum of entry moduli.
pub fn one_norm(a: &ComplexMatrix) -> f64 {
    let mut sums = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        for (s, z) in sums.iter_mut().zip(a.row(i)) {
            *s += z.norm();
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}

/// Solves `a * x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(LinalgError::Dimension {
            op: "solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let n = a.rows();
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = one_norm(a);

    for k in 0..n {
        let (piv, piv_abs) =
            (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs == 0.0 || piv_abs <= f64::EPSILON * scale * 1e-3 {
            return Err(LinalgError::Singular { op: "solve" });
        }
        if piv != k {
            swap_rows(&mut lu, k, piv);
            swap_rows(&mut x, k, piv);
        }
        let inv_pivot = lu[(k, k)].inv();
        for i in k + 1..n {
            let f = lu[(i, k)] * inv_pivot;
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            lu[(i, k)] = Complex64::new(0.0, 0.0);
            row_axpy(&mut lu, i, k, f, k + 1);
            row_axpy(&mut x, i, k, f, 0);
        }
    }

    // back substitution, row by row over all right-hand sides
    for i in (0..n).rev() {
        for j in i + 1..n {
            let f = lu[(i, j)];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            row_axpy(&mut x, i, j, f, 0);
        }
        let inv = lu[(i, i)].inv();
        for c in 0..m {
            x[(i, c)] *= inv;
        }
    }
    x.ensure_finite("solve")?;
    Ok(x)
}

fn swap_rows(m: &mut ComplexMatrix, r1: usize, r2: usize) {
    let cols = m.cols();
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let data = m.data_mut();
    let (head, tail) = data.split_at_mut(hi * cols);
    head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
}

/// `row[dst][from..] -= f * row[src][from..]`, with `dst != src`.
fn row_axpy(m: &mut ComplexMatrix, dst: usize, src: usize, f: Complex64, from: usize) {
    let cols = m.cols();
    let data = m.data_mut();
    let (d, s) = if dst > src {
        let (head, tail) = data.split_at_mut(dst * cols);
        (&mut tail[..cols], &head[src * cols..(src + 1) * cols])
    } else {
        let (head, tail) = data.split_at_mut(src * cols);
        (&mut head[dst * cols..(dst + 1) * cols], &tail[..cols])
    };
    for (a, &b) in d[from..].iter_mut().zip(&s[from..]) {
        *a -= f * b;
    }
}

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential `e^a`.
pub fn expm(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, LinalgError> {
    if !(tol > 0.0 && tol <= MAX_EXPM_TOLERANCE) {
        return Err(LinalgError::InvalidTolerance(tol));
    }
    if !a.is_square() {
        return Err(LinalgError::Dimension {
            op: "expm",
            left: a.shape(),
            right: a.shape(),
        });
    }
    a.ensure_finite("expm")?;

    let norm = one_norm(a);
    let n = a.rows();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }

    let low_orders: [(f64, &[f64]); 4] = [
        (THETA_3, &PADE_3),
        (THETA_5, &PADE_5),
        (THETA_7, &PADE_7),
        (THETA_9, &PADE_9),
    ];
    for (theta, coeffs) in low_orders {
        if norm <= theta {
            let out = pade_low(a, coeffs)?;
            out.ensure_finite("expm")?;
            return Ok(out);
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings as i32));
    let mut out = pade_13(&scaled)?;
    for _ in 0..squarings {
        out = mul_unchecked(&out, &out);
    }
    out.ensure_finite("expm")?;
    Ok(out)
}

/// Degree 3..9 approximant from explicit even powers.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix, LinalgError> {
    let n = a.rows();
    let a2 = mul_unchecked(a, a);
    let mut even_powers = vec![ComplexMatrix::identity(n), a2.clone()];
    while 2 * even_powers.len() < b.len() {
        let next = mul_unchecked(even_powers.last().unwrap(), &a2);
        even_powers.push(next);
    }

    let mut u_inner = ComplexMatrix::zeros(n, n);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, pow) in even_powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u_inner.axpy(b[2 * k + 1], pow);
        }
        v.axpy(b[2 * k], pow);
    }
    let u = mul_unchecked(a, &u_inner);
    pade_quotient(&u, &v)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let b = &PADE_13;
    let n = a.rows();
    let a2 = mul_unchecked(a, a);
    let a4 = mul_unchecked(&a2, &a2);
    let a6 = mul_unchecked(&a4, &a2);

    let mut u_hi = a6.scale_real(b[13]);
    u_hi.axpy(b[11], &a4);
    u_hi.axpy(b[9], &a2);
    let mut u_inner = mul_unchecked(&a6, &u_hi);
    u_inner.axpy(b[7], &a6);
    u_inner.axpy(b[5], &a4);
    u_inner.axpy(b[3], &a2);
    u_inner.add_diagonal(b[1]);
    let u = mul_unchecked(a, &u_inner);

    let mut v_hi = a6.scale_real(b[12]);
    v_hi.axpy(b[10], &a4);
    v_hi.axpy(b[8], &a2);
    let mut v = mul_unchecked(&a6, &v_hi);
    v.axpy(b[6], &a6);
    v.axpy(b[4], &a4);
    v.axpy(b[2], &a2);
    v.add_diagonal(b[0]);
    debug_assert_eq!(v.rows(), n);

    pade_quotient(&u, &v)
}

/// `(v - u)^{-1} (v + u)`.
fn pade_quotient(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let denom = v.sub(u)?;
    let numer = v.add(u)?;
    solve(&denom, &numer)
}
