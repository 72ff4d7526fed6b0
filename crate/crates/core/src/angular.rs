//! Spin representations, rotations, Clebsch-Gordan decomposition and the
//! ℓ=1, s=½ Zeeman problem.
//!
//! Half-integers are carried as twice their value (`two_j = 2j`). Every basis
//! is ordered `m = +j, j−1, …, −j`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmError, Result};
use crate::numeric::{self, c, cr, kron, ComplexMatrix};

/// Convert a floating half-integer to its doubled integer form.
pub fn twice(j: f64) -> Result<u32> {
    let t = (2.0 * j).round();
    if (2.0 * j - t).abs() > 1e-9 || t < 0.0 {
        return Err(QmError::InvalidJ((2.0 * j).round() as i64));
    }
    Ok(t as u32)
}

/// Generators of the (2j+1)-dimensional representation.
#[derive(Debug, Clone)]
pub struct SpinRepresentation {
    pub two_j: u32,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
    pub jplus: ComplexMatrix,
    pub jminus: ComplexMatrix,
}

impl SpinRepresentation {
    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// `m` value of basis index `k` (as 2m).
    pub fn two_m(&self, k: usize) -> i32 {
        self.two_j as i32 - 2 * k as i32
    }

    /// `n·J` for a direction `n` (not normalized here).
    pub fn along(&self, n: [f64; 3]) -> ComplexMatrix {
        &self.jx * cr(n[0]) + &self.jy * cr(n[1]) + &self.jz * cr(n[2])
    }

    pub fn casimir(&self) -> ComplexMatrix {
        &self.jx * &self.jx + &self.jy * &self.jy + &self.jz * &self.jz
    }
}

/// Ladder construction: `⟨m+1|J₊|m⟩ = √(j(j+1) − m(m+1))`.
pub fn build_spin_rep(two_j: u32) -> SpinRepresentation {
    let dim = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let mut jplus = ComplexMatrix::zeros(dim, dim);
    let mut jz = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        let m = j - k as f64;
        jz[(k, k)] = cr(m);
        if k + 1 < dim {
            // column k+1 has m−1, raised into row k
            let mm = m - 1.0;
            jplus[(k, k + 1)] = cr((j * (j + 1.0) - mm * (mm + 1.0)).sqrt());
        }
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus) * cr(0.5);
    let jy = (&jplus - &jminus) * c(0.0, -0.5);
    SpinRepresentation { two_j, jx, jy, jz, jplus, jminus }
}

pub fn build_spin_rep_f64(j: f64) -> Result<SpinRepresentation> {
    Ok(build_spin_rep(twice(j)?))
}

fn unit_axis(n: [f64; 3]) -> Result<[f64; 3]> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QmError::NonUnitAxis(norm));
    }
    Ok(n)
}

/// `R = exp(−iΦ n·J)`.
pub fn rotation_matrix(rep: &SpinRepresentation, n: [f64; 3], phi: f64) -> Result<ComplexMatrix> {
    let n = unit_axis(n)?;
    numeric::evolve_unitary(&rep.along(n), phi)
}

/// Closed form for spin ½: `cos(Φ/2)·1 − i sin(Φ/2) n·σ`.
pub fn rotation_half_closed(n: [f64; 3], phi: f64) -> ComplexMatrix {
    let (s, co) = (0.5 * phi).sin_cos();
    let nsig = pauli_dot(n);
    numeric::identity(2) * cr(co) - nsig * c(0.0, s)
}

/// Closed form for spin 1: `1 − i sinΦ S_n − (1 − cosΦ) S_n²`.
pub fn rotation_one_closed(n: [f64; 3], phi: f64) -> ComplexMatrix {
    let sn = build_spin_rep(2).along(n);
    let sn2 = &sn * &sn;
    numeric::identity(3) - &sn * c(0.0, phi.sin()) - sn2 * cr(1.0 - phi.cos())
}

/// `n·σ`.
pub fn pauli_dot(n: [f64; 3]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[cr(n[2]), c(n[0], -n[1]), c(n[0], n[1]), cr(-n[2])],
    )
}

/// Axis and angle of an SU(2) element, `U = ±[cos(Φ/2) − i sin(Φ/2) n·σ]`.
///
/// Returns `Φ ∈ [0, 2π)`. When the rotation is trivial the axis is
/// indeterminate and `ẑ` is returned; `−1` is reported as `Φ = 0` since it
/// equals the identity up to the global sign.
pub fn su2_axis_angle(u: &ComplexMatrix) -> Result<([f64; 3], f64)> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(QmError::NotSU2);
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    if numeric::unitarity_deviation(u) > 1e-10 || (det - cr(1.0)).norm() > 1e-10 {
        return Err(QmError::NotSU2);
    }
    let a = 0.5 * (u[(0, 0)] + u[(1, 1)]).re;
    let i = Complex64::i();
    let vx = (i * (u[(0, 1)] + u[(1, 0)]) * 0.5).re;
    let vy = ((u[(1, 0)] - u[(0, 1)]) * 0.5).re;
    let vz = (i * (u[(0, 0)] - u[(1, 1)]) * 0.5).re;
    let s = (vx * vx + vy * vy + vz * vz).sqrt();
    if s < 1e-14 {
        return Ok(([0.0, 0.0, 1.0], 0.0));
    }
    let phi = 2.0 * s.atan2(a);
    Ok(([vx / s, vy / s, vz / s], phi))
}

/// `R = e^{−iαJz} e^{−iβJy} e^{−iγJz}`.
pub fn euler_rotation(rep: &SpinRepresentation, alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let rz = |angle: f64| {
        let n = rep.dim();
        ComplexMatrix::from_fn(n, n, |r, k| {
            if r == k {
                Complex64::from_polar(1.0, -angle * rep.two_m(k) as f64 / 2.0)
            } else {
                Complex64::default()
            }
        })
    };
    let ry = numeric::evolve_unitary(&rep.jy, beta).expect("J_y is Hermitian");
    rz(alpha) * ry * rz(gamma)
}

/// Product-to-coupled change of basis for `j1 ⊗ j2`.
#[derive(Debug, Clone)]
pub struct CGDecomposition {
    pub two_j1: u32,
    pub two_j2: u32,
    /// Coupled multiplets (2j), from `j1+j2` down to `|j1−j2|`.
    pub multiplets: Vec<u32>,
    /// Rows: `|m1,m2⟩` with `m1` outer; columns: `|j,m⟩` by descending `j`, then `m`.
    pub t: DMatrix<f64>,
    /// `(2m1, 2m2)` for each row.
    pub rows: Vec<(i32, i32)>,
    /// `(2j, 2m)` for each column.
    pub cols: Vec<(u32, i32)>,
}

impl CGDecomposition {
    pub fn column_of(&self, two_j: u32, two_m: i32) -> Option<usize> {
        self.cols.iter().position(|&(j, m)| j == two_j && m == two_m)
    }

    pub fn row_of(&self, two_m1: i32, two_m2: i32) -> Option<usize> {
        self.rows.iter().position(|&(a, b)| a == two_m1 && b == two_m2)
    }

    /// Column range of the multiplet `two_j`.
    pub fn multiplet_columns(&self, two_j: u32) -> std::ops::Range<usize> {
        let start = self.cols.iter().position(|&(j, _)| j == two_j).unwrap_or(0);
        start..start + two_j as usize + 1
    }
}

/// Decompose `j1 ⊗ j2` by lowering from the top state and Gram-Schmidt at each
/// new head. Each head state is signed so that its component with the largest
/// `m1` is positive.
pub fn add_angular_momentum(two_j1: u32, two_j2: u32) -> CGDecomposition {
    let r1 = build_spin_rep(two_j1);
    let r2 = build_spin_rep(two_j2);
    let (d1, d2) = (r1.dim(), r2.dim());
    let dim = d1 * d2;
    let rows: Vec<(i32, i32)> = (0..dim).map(|k| (r1.two_m(k / d2), r2.two_m(k % d2))).collect();
    let jm = kron(&r1.jminus, &numeric::identity(d2)) + kron(&numeric::identity(d1), &r2.jminus);
    let jm: DMatrix<f64> = jm.map(|z| z.re);

    let top = two_j1 + two_j2;
    let bottom = two_j1.abs_diff(two_j2);
    let multiplets: Vec<u32> = (0..=(top - bottom) / 2).map(|k| top - 2 * k).collect();

    let mut found: Vec<(u32, i32, nalgebra::DVector<f64>)> = Vec::with_capacity(dim);
    for &tj in &multiplets {
        let tm = tj as i32;
        // Sector basis vectors with m1 + m2 = j, in descending m1 order.
        let sector: Vec<usize> = (0..dim).filter(|&k| rows[k].0 + rows[k].1 == tm).collect();
        let mut best: Option<nalgebra::DVector<f64>> = None;
        let mut best_norm = 0.0;
        for &k in &sector {
            let mut v = nalgebra::DVector::<f64>::zeros(dim);
            v[k] = 1.0;
            // two passes keep the result orthogonal to round-off
            for _ in 0..2 {
                for (_, _, w) in found.iter().filter(|(_, m, _)| *m == tm) {
                    let p = w.dot(&v);
                    v -= w * p;
                }
            }
            let nv = v.norm();
            if nv > best_norm + 1e-12 {
                best_norm = nv;
                best = Some(v);
            }
        }
        let mut head = best.expect("sector dimension exceeds found states") / best_norm;
        // `sector` runs in descending m1, so the first nonzero entry fixes the sign.
        if let Some(&k) = sector.iter().find(|&&k| head[k].abs() > 1e-12) {
            if head[k] < 0.0 {
                head = -head;
            }
        }
        let mut cur = head;
        let mut m = tm;
        loop {
            found.push((tj, m, cur.clone()));
            if m == -(tj as i32) {
                break;
            }
            let next = &jm * &cur;
            let n = next.norm();
            cur = next / n;
            m -= 2;
        }
    }
    let mut t = DMatrix::<f64>::zeros(dim, dim);
    let mut cols = Vec::with_capacity(dim);
    for (col, (tj, m, v)) in found.iter().enumerate() {
        t.set_column(col, v);
        cols.push((*tj, *m));
    }
    CGDecomposition { two_j1, two_j2, multiplets, t, rows, cols }
}

/// `J² = T · diag(j(j+1)) · Tᵀ` in the product basis.
pub fn j_squared_product_basis(d: &CGDecomposition) -> ComplexMatrix {
    let n = d.cols.len();
    let diag = DMatrix::<f64>::from_fn(n, n, |r, k| {
        if r == k {
            let j = d.cols[k].0 as f64 / 2.0;
            j * (j + 1.0)
        } else {
            0.0
        }
    });
    (&d.t * diag * d.t.transpose()).map(cr)
}

/// Projection factors `(g_L, g_S)`; `g_L + g_S = 1`.
pub fn wigner_eckart_g(two_j: u32, two_l: u32, two_s: u32) -> Result<(f64, f64)> {
    let (j, l, s) = (two_j as f64 / 2.0, two_l as f64 / 2.0, two_s as f64 / 2.0);
    if !triangle(two_l, two_s, two_j) {
        return Err(QmError::TriangleViolation(l, s, j));
    }
    if two_j == 0 {
        return Err(QmError::InvalidArgument("projection factors undefined at j = 0".into()));
    }
    let jj = j * (j + 1.0);
    let gl = (jj + l * (l + 1.0) - s * (s + 1.0)) / (2.0 * jj);
    Ok((gl, 1.0 - gl))
}

fn triangle(a: u32, b: u32, c: u32) -> bool {
    c >= a.abs_diff(b) && c <= a + b && (a + b + c) % 2 == 0
}

/// ℓ=1, s=½ Zeeman Hamiltonian `h L_z + g h S_z + v L·S` in the `|m_ℓ, m_s⟩` basis.
pub fn zeeman_hamiltonian(v: f64, g: f64, h: f64) -> ComplexMatrix {
    let l = build_spin_rep(2);
    let s = build_spin_rep(1);
    let i3 = numeric::identity(3);
    let i2 = numeric::identity(2);
    kron(&l.jz, &i2) * cr(h) + kron(&i3, &s.jz) * cr(g * h) + spin_orbit() * cr(v)
}

/// `L·S` for ℓ=1, s=½.
pub fn spin_orbit() -> ComplexMatrix {
    let l = build_spin_rep(2);
    let s = build_spin_rep(1);
    kron(&l.jx, &s.jx) + kron(&l.jy, &s.jy) + kron(&l.jz, &s.jz)
}

/// Sorted eigenvalues of the Zeeman Hamiltonian for each field value.
pub fn zeeman_spectrum(v: f64, g: f64, h_values: &[f64]) -> Vec<[f64; 6]> {
    h_values
        .iter()
        .map(|&h| {
            let vals = numeric::hermitian_eigenvalues(&zeeman_hamiltonian(v, g, h)).expect("Hermitian by construction");
            let mut out = [0.0; 6];
            out.copy_from_slice(&vals);
            out
        })
        .collect()
}

/// The uncoupled (v = 0) levels `(m_ℓ + g m_s) h`, sorted.
pub fn zeeman_uncoupled(g: f64, h: f64) -> [f64; 6] {
    let mut out = [0.0; 6];
    let mut k = 0;
    for ml in [1.0, 0.0, -1.0] {
        for ms in [0.5, -0.5] {
            out[k] = (ml + g * ms) * h;
            k += 1;
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)` from the Racah sum; arguments doubled.
///
/// Selection-rule violations give 0.
pub fn wigner_3j(two_j1: u32, two_j2: u32, two_j3: u32, two_m1: i32, two_m2: i32, two_m3: i32) -> f64 {
    let (j1, j2, j3) = (two_j1 as i64, two_j2 as i64, two_j3 as i64);
    let (m1, m2, m3) = (two_m1 as i64, two_m2 as i64, two_m3 as i64);
    if m1 + m2 + m3 != 0 || !triangle(two_j1, two_j2, two_j3) {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 || (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    // Everything below in ordinary (undoubled) integers.
    let h = |x: i64| x / 2;
    let a = h(j1 + j2 - j3);
    let b = h(j1 - j2 + j3);
    let cc = h(-j1 + j2 + j3);
    let big = h(j1 + j2 + j3) + 1;
    let use_logs = big > 150;
    let tri = if use_logs {
        (ln_factorial(a) + ln_factorial(b) + ln_factorial(cc) - ln_factorial(big)).exp()
    } else {
        factorial(a) * factorial(b) * factorial(cc) / factorial(big)
    };
    let facts = [h(j1 + m1), h(j1 - m1), h(j2 + m2), h(j2 - m2), h(j3 + m3), h(j3 - m3)];
    let pref = if use_logs {
        facts.iter().map(|&f| ln_factorial(f)).sum::<f64>().exp()
    } else {
        facts.iter().map(|&f| factorial(f)).product::<f64>()
    };
    let k_min = 0.max(h(j2 - j3 - m1)).max(h(j1 - j3 + m2));
    let k_max = a.min(h(j1 - m1)).min(h(j2 + m2));
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = [k, h(j3 - j2 + m1) + k, h(j3 - j1 - m2) + k, a - k, h(j1 - m1) - k, h(j2 + m2) - k];
        if den.iter().any(|&d| d < 0) {
            continue;
        }
        let term = if use_logs {
            (-den.iter().map(|&d| ln_factorial(d)).sum::<f64>()).exp()
        } else {
            1.0 / den.iter().map(|&d| factorial(d)).product::<f64>()
        };
        sum += if k % 2 == 0 { term } else { -term };
    }
    let phase_exp = h(j1 - j2 - m3);
    let phase = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * (tri * pref).sqrt() * sum
}

/// Clebsch-Gordan coefficient `⟨j1 m1; j2 m2 | j m⟩` through the 3j symbol:
/// `(−1)^{j1−j2+m} √(2j+1) (j1 j2 j; m1 m2 −m)`.
pub fn clebsch_gordan(two_j1: u32, two_m1: i32, two_j2: u32, two_m2: i32, two_j: u32, two_m: i32) -> f64 {
    let e = (two_j1 as i64 - two_j2 as i64 + two_m as i64) / 2;
    let phase = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * ((two_j + 1) as f64).sqrt() * wigner_3j(two_j1, two_j2, two_j, two_m1, two_m2, -two_m)
}

/// Amplitudes `(α, β)` of the `(2ℓ+1) ⊗ ½` states:
/// `|ℓ+½, m⟩ = β|m+½, ↓⟩ + α|m−½, ↑⟩` with `α = √((ℓ+½+m)/(2ℓ+1))`,
/// `β = √((ℓ+½−m)/(2ℓ+1))`. Only the magnitudes are convention-free.
pub fn spin_half_coupling(two_l: u32, two_m: i32) -> (f64, f64) {
    let l = two_l as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    let alpha = ((l + 0.5 + m) / (2.0 * l + 1.0)).max(0.0).sqrt();
    let beta = ((l + 0.5 - m) / (2.0 * l + 1.0)).max(0.0).sqrt();
    (alpha, beta)
}
