//! Small dense helpers shared across modules.

use faer::Mat;
use num_complex::Complex64;

pub type RMat = Mat<f64>;
pub type CMat = Mat<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn max_abs(m: &RMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for &x in m.col_as_slice(j) {
            out = out.max(x.abs());
        }
    }
    out
}

pub fn max_abs_c(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for x in m.col_as_slice(j) {
            out = out.max(x.norm());
        }
    }
    out
}

/// Largest |m_ij - m_ji|.
pub fn symmetry_defect(m: &RMat) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            out = out.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    out
}

/// Largest |m_ij - conj(m_ji)|.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in j..n {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

pub fn identity(n: usize) -> RMat {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// Kronecker product `a ⊗ b` with row index `i_a * b.nrows() + i_b`.
pub fn kron(a: &RMat, b: &RMat) -> RMat {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| {
        a[(i / rb, j / cb)] * b[(i % rb, j % cb)]
    })
}

/// Diagonal matrix from a slice.
pub fn diag(v: &[f64]) -> RMat {
    Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
}

/// Max-norm of the commutator `[a, d]` where `d` is diagonal with entries `dv`.
pub fn commutator_with_diag(a: &RMat, dv: &[f64]) -> f64 {
    let mut out = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out = out.max((a[(i, j)] * (dv[j] - dv[i])).abs());
        }
    }
    out
}

/// Dense symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eigen(m: &RMat) -> Option<(Vec<f64>, RMat)> {
    let e = m.self_adjoint_eigen(faer::Side::Lower).ok();
    clear_upper_simd();
    let e = e?;
    let vals: Vec<f64> = (0..m.nrows()).map(|i| e.S()[i]).collect();
    Some((vals, e.U().to_owned()))
}

/// Resets the upper halves of the vector registers after wide SIMD kernels.
///
/// faer's AVX-512 kernels can return with dirty upper state, and every later
/// SSE instruction on that thread (including libm `sin`) then pays a
/// transition penalty, an order of magnitude on some Xeons.
pub fn clear_upper_simd() {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX support was just checked at runtime.
        unsafe { zeroupper() }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx")]
unsafe fn zeroupper() {
    std::arch::x86_64::_mm256_zeroupper();
}
