//! Dense complex linear algebra and bracketed root finding.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Tolerance used by [`hermitian_eig`] to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default number of scan points for [`find_roots`].
pub const DEFAULT_ROOT_GRID: usize = 2001;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Rebuild `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut d = ComplexMatrix::zeros(n, n);
        for (k, &v) in self.values.iter().enumerate() {
            d[(k, k)] = cr(v);
        }
        &self.vectors * d * self.vectors.adjoint()
    }

    /// Apply `f` to the spectrum: `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let fk = f(self.values[k]);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| cr(rows[i][j]))
}

pub fn diag_real(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { cr(d[i]) } else { Complex64::default() })
}

/// Largest absolute entry.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// max |M − M†|.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_deviation(m) <= tol
}

/// ∥U†U − 1∥ measured as the largest entry.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - identity(n)))
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(QmError::NonSquare { rows: m.nrows(), cols: m.ncols() })
    }
}

pub fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    check_square(m)?;
    let scale = max_abs(m).max(1.0);
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * scale {
        return Err(QmError::NonHermitian { deviation: dev });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Vectors inside a degenerate subspace are orthonormal but otherwise arbitrary.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(m)?;
    let n = m.nrows();
    // Symmetrize to remove round-off asymmetry before handing it to the solver.
    let sym = (m + m.adjoint()) * cr(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eig(m)?.values)
}

/// `U(t) = exp(−i t H)` through the spectral decomposition of `H`.
pub fn evolve_unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.map(|e| Complex64::from_polar(1.0, -e * t)))
}

/// Kronecker product; the row index of `A ⊗ B` is `i_A·dim(B) + i_B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(rho: &ComplexMatrix, dim_a: usize, dim_b: usize, keep: Keep) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(QmError::DimensionMismatch(format!(
            "rho is {}x{}, expected {n}x{n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let out = match keep {
        Keep::A => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|b| rho[(i * dim_b + b, j * dim_b + b)]).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|a| rho[(a * dim_b + i, a * dim_b + j)]).sum()
        }),
    };
    Ok(out)
}

/// Commutator `AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Anticommutator `AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Principal square root with the branch `Im ≥ 0`.
pub fn sqrt_retarded(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

/// All sign changes of `f` on a uniform scan of `[lo, hi]`, refined by bisection.
///
/// Bisection stops when `|f| < 1e-12` or the bracket is shorter than
/// `1e-13·(hi − lo)`. Exact zeros on scan points are reported too. Roots closer
/// than the bisection tolerance are merged.
pub fn find_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let grid = grid.max(2);
    let width = hi - lo;
    let xs: Vec<f64> = (0..grid)
        .map(|i| if i + 1 == grid { hi } else { lo + width * i as f64 / (grid - 1) as f64 })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let tol = 1e-13 * width.abs();
    let mut roots = Vec::new();
    for i in 0..grid {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < grid && fs[i + 1] != 0.0 && fs[i].is_finite() && fs[i + 1].is_finite() && (fs[i] < 0.0) != (fs[i + 1] < 0.0) {
            roots.push(bisect(&f, xs[i], xs[i + 1], fs[i], tol));
        }
    }
    dedup_sorted(&mut roots, 10.0 * tol.max(f64::EPSILON));
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < 1e-12 || (b - a).abs() < tol || fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn dedup_sorted(v: &mut Vec<f64>, eps: f64) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|b, a| (*b - *a).abs() <= eps);
}

/// Zeros of a non-negative-looking function where it touches the axis without
/// changing sign: local minima of `|f|` on the scan are polished by golden-section
/// search and accepted when `|f(x*)| < accept`.
pub fn find_touching_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize, accept: f64) -> Vec<f64> {
    let grid = grid.max(3);
    let h = (hi - lo) / (grid - 1) as f64;
    let g = |x: f64| f(x).abs();
    let vals: Vec<f64> = (0..grid).map(|i| g(lo + h * i as f64)).collect();
    let mut out = Vec::new();
    for i in 1..grid - 1 {
        if vals[i] <= vals[i - 1] && vals[i] < vals[i + 1] {
            let x = golden_min(&g, lo + h * (i - 1) as f64, lo + h * (i + 1) as f64);
            if g(x) < accept {
                out.push(x);
            }
        }
    }
    dedup_sorted(&mut out, 1e-9 * (hi - lo).abs());
    out
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 { x1 } else { x2 }
}

/// Composite Gauss-Legendre quadrature (8 nodes per panel).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + h * (p as f64 + 0.5);
        let half = 0.5 * h;
        let mut s = 0.0;
        for k in 0..4 {
            s += W[k] * (f(mid - half * X[k]) + f(mid + half * X[k]));
        }
        total += s * half;
    }
    total
}

/// Adaptive version of [`integrate`]: doubles the panel count until two
/// successive estimates agree to `rel_tol`.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Option<f64> {
    let mut panels = 8;
    let mut prev = integrate(&f, a, b, panels);
    for _ in 0..14 {
        panels *= 2;
        let next = integrate(&f, a, b, panels);
        if !next.is_finite() {
            return None;
        }
        if (next - prev).abs() <= rel_tol * next.abs().max(1e-300) || (next - prev).abs() < 1e-300 {
            return Some(next);
        }
        prev = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pauli_x() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_level_splitting_is_omega() {
        let (eps, cpl) = (0.0, 1.0);
        let h = from_real_rows(&[&[eps / 2.0, cpl], &[cpl, -eps / 2.0]]);
        let omega = ((2.0 * cpl).powi(2) + eps * eps).sqrt();
        let v = hermitian_eigenvalues(&h).unwrap();
        assert!((v[0] + omega / 2.0).abs() < 1e-14 && (v[1] - omega / 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_keeps_basis() {
        let e = hermitian_eig(&diag_real(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        for k in 0..3 {
            assert!((e.vectors[(k, k)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(QmError::NonHermitian { .. })));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r), Err(QmError::NonSquare { .. })));
    }

    #[test]
    fn evolution_examples() {
        let h = from_real_rows(&[&[0.3, 0.7], &[0.7, -1.1]]);
        assert!(max_abs(&(evolve_unitary(&h, 0.0).unwrap() - identity(2))) < 1e-14);

        // π S_y rotates up into down.
        let sy = ComplexMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -0.5), c(0.0, 0.5), cr(0.0)]) * cr(PI);
        let u = evolve_unitary(&sy, 1.0).unwrap();
        assert!(u[(0, 0)].norm() < 1e-14 && (u[(1, 0)].norm() - 1.0).abs() < 1e-14);

        let u = evolve_unitary(&diag_real(&[0.4, -2.0]), 1.7).unwrap();
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -0.4 * 1.7)).norm() < 1e-14);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, 2.0 * 1.7)).norm() < 1e-14);
    }

    #[test]
    fn kron_examples() {
        let x = diag_real(&[1.0, 2.0, 3.0]);
        assert_eq!(kron(&x, &identity(2)), diag_real(&[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]));
        assert_eq!(kron(&identity(3), &identity(2)), identity(6));
        let a = from_real_rows(&[&[1.0, 0.0, 2.0], &[0.0, 1.0, 0.0], &[2.0, 0.0, 1.0]]);
        let b = from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let k = kron(&a, &b);
        // Block (0,2) is 2·B.
        assert_eq!(k[(0, 4)], cr(4.0));
        assert_eq!(k[(1, 4)], cr(2.0));
        assert_eq!(k[(5, 1)], cr(4.0));
    }

    #[test]
    fn singlet_reduces_to_unpolarized() {
        let s = 1.0 / 2f64.sqrt();
        let psi = nalgebra::DVector::from_vec(vec![cr(0.0), cr(s), cr(-s), cr(0.0)]);
        let rho = &psi * psi.adjoint();
        for keep in [Keep::A, Keep::B] {
            let r = partial_trace(&rho, 2, 2, keep).unwrap();
            assert!(max_abs(&(r - diag_real(&[0.5, 0.5]))) < 1e-15);
        }
        assert!(partial_trace(&rho, 2, 3, Keep::A).is_err());
    }

    #[test]
    fn product_state_partial_trace() {
        let ra = from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        let rb = from_real_rows(&[&[0.5, 0.1, 0.0], &[0.1, 0.25, 0.0], &[0.0, 0.0, 0.25]]);
        let r = partial_trace(&kron(&ra, &rb), 2, 3, Keep::A).unwrap();
        assert!(max_abs(&(r - &ra)) < 1e-15);
        let r = partial_trace(&kron(&ra, &rb), 2, 3, Keep::B).unwrap();
        assert!(max_abs(&(r - &rb)) < 1e-15);
    }

    #[test]
    fn root_examples() {
        let r = find_roots(f64::cos, 0.0, 8.0, DEFAULT_ROOT_GRID);
        let expect = [PI / 2.0, 1.5 * PI, 2.5 * PI];
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(find_roots(|x| x - 2.0, 0.0, 5.0, 11), vec![2.0]);
        assert!(find_roots(|x| x * x + 1.0, -1.0, 1.0, 50).is_empty());
    }

    #[test]
    fn touching_root_is_found() {
        let r = find_touching_roots(|x| (x - 1.3).powi(2), 0.0, 3.0, 301, 1e-12);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.3).abs() < 1e-6);
    }

    #[test]
    fn quadrature() {
        let v = integrate(f64::sin, 0.0, PI, 4);
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_adaptive(|x| (-x * x).exp(), -8.0, 8.0, 1e-13).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn retarded_branch() {
        assert!((sqrt_retarded(cr(-4.0)) - c(0.0, 2.0)).norm() < 1e-15);
        assert!((sqrt_retarded(cr(4.0)) - cr(2.0)).norm() < 1e-15);
        assert!(sqrt_retarded(c(-1.0, -1e-3)).im >= 0.0);
    }
}
