//! Wigner-Weyl phase-space representation on uniform grids.
//!
//! `ρ_W(X, P) = ∫ ρ(X + r/2, X − r/2) e^{−iPr} dr` with phase-space measure
//! `dX dP / 2π`. The samples `X ± r/2` fall on half-grid points, so the density
//! matrix is first interpolated to a grid of twice the resolution with the
//! periodic sinc kernel (exact for band-limited states and reproducing the
//! original samples). For an `N`-point grid of spacing `dx` the transform has
//! `2N` rows at spacing `dx/2` and `2N` momenta `P_j = jπ/(N dx)`, `j ∈ [−N, N)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{QmError, Result};
use crate::numeric::{self, cr, ComplexMatrix};

use std::f64::consts::PI;

/// Edge guard for the periodic transform.
pub const EDGE_TOL: f64 = 1e-8;

/// Density matrix on a uniform grid `x_a = x0 + a·dx`, normalized so that
/// `Σ ρ_aa dx = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x0: f64,
    pub dx: f64,
    pub rho: ComplexMatrix,
}

impl GridState {
    pub fn from_wavefunction(x0: f64, dx: f64, psi: &[Complex64]) -> Self {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm.sqrt()).collect();
        let n = v.len();
        let rho = ComplexMatrix::from_fn(n, n, |a, b| v[a] * v[b].conj());
        GridState { x0, dx, rho }
    }

    /// Normalize an arbitrary Hermitian kernel to unit trace.
    pub fn from_density(x0: f64, dx: f64, rho: ComplexMatrix) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(QmError::NonSquare { rows: rho.nrows(), cols: rho.ncols() });
        }
        let tr = rho.trace().re * dx;
        if !(tr > 0.0) {
            return Err(QmError::InvalidArgument("density matrix has non-positive trace".into()));
        }
        Ok(GridState { x0, dx, rho: rho / cr(tr) })
    }

    pub fn len(&self) -> usize {
        self.rho.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.nrows() == 0
    }

    pub fn x(&self) -> Vec<f64> {
        (0..self.len()).map(|a| self.x0 + a as f64 * self.dx).collect()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re * self.dx
    }

    /// `trace(ρ²) = dx² Σ |ρ_ab|²`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx * self.dx
    }

    /// `⟨x̂⟩`.
    pub fn mean_x(&self) -> f64 {
        self.x().iter().enumerate().map(|(a, x)| x * self.rho[(a, a)].re).sum::<f64>() * self.dx
    }
}

/// Real function on a rectangular phase-space grid with cell `dx × dp`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceFunction {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    /// Rows index `x`, columns index `p`.
    pub w: DMatrix<f64>,
    pub dx: f64,
    pub dp: f64,
}

impl PhaseSpaceFunction {
    /// Sample `f(X, P)` on the given grids.
    pub fn sample(x: &[f64], p: &[f64], f: impl Fn(f64, f64) -> f64) -> Self {
        let w = DMatrix::from_fn(x.len(), p.len(), |i, j| f(x[i], p[j]));
        let dx = if x.len() > 1 { x[1] - x[0] } else { 1.0 };
        let dp = if p.len() > 1 { p[1] - p[0] } else { 1.0 };
        PhaseSpaceFunction { x: x.to_vec(), p: p.to_vec(), w, dx, dp }
    }

    /// `dX dP / 2π`.
    pub fn measure(&self) -> f64 {
        self.dx * self.dp / (2.0 * PI)
    }

    pub fn normalization(&self) -> f64 {
        self.w.sum() * self.measure()
    }

    /// `∫ W² dX dP / 2π`.
    pub fn purity(&self) -> f64 {
        self.w.iter().map(|v| v * v).sum::<f64>() * self.measure()
    }

    /// `ρ(X) = ∫ W dP / 2π` for every row.
    pub fn x_marginal(&self) -> Vec<f64> {
        self.w.row_iter().map(|r| r.sum() * self.dp / (2.0 * PI)).collect()
    }

    /// `ρ(P) = ∫ W dX` for every column, normalized as `∫ ρ(P) dP/2π = 1`.
    pub fn p_marginal(&self) -> Vec<f64> {
        self.w.column_iter().map(|c| c.sum() * self.dx).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.w.min()
    }

    pub fn max_value(&self) -> f64 {
        self.w.max()
    }

    pub fn scale(&mut self, s: f64) {
        self.w *= s;
    }

    fn same_grid(&self, other: &PhaseSpaceFunction) -> bool {
        let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(u, v)| (u - v).abs() <= 1e-12 * (1.0 + u.abs()));
        close(&self.x, &other.x) && close(&self.p, &other.p)
    }
}

/// Periodic sinc kernel of an even-length grid, `sin(πt)/(N tan(πt/N))`.
fn periodic_sinc(t: f64, n: usize) -> f64 {
    if t.abs() < 1e-14 {
        return 1.0;
    }
    let nn = n as f64;
    let den = nn * (PI * t / nn).tan();
    if den.abs() < 1e-300 {
        return (PI * t).cos();
    }
    (PI * t).sin() / den
}

/// `2N × N` matrix interpolating to half-grid points.
fn doubling_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, n, |p, a| {
        if p % 2 == 0 {
            if p / 2 == a { 1.0 } else { 0.0 }
        } else {
            periodic_sinc(0.5 * p as f64 - a as f64, n)
        }
    })
}

fn fft_pair(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

/// Largest `|ρ|` on the outer rows and columns relative to the largest entry.
fn edge_fraction(rho: &ComplexMatrix) -> f64 {
    let n = rho.nrows();
    let max = numeric::max_abs(rho).max(f64::MIN_POSITIVE);
    let mut edge = 0.0_f64;
    for i in 0..n {
        for &(a, b) in &[(0, i), (n - 1, i), (i, 0), (i, n - 1)] {
            edge = edge.max(rho[(a, b)].norm());
        }
    }
    edge / max
}

/// Wigner transform of a grid density matrix.
pub fn wigner_transform(state: &GridState) -> Result<PhaseSpaceFunction> {
    let n = state.len();
    if n < 2 || n % 2 != 0 {
        return Err(QmError::InvalidArgument(format!("grid size must be even and ≥ 2, got {n}")));
    }
    let dev = numeric::hermitian_deviation(&state.rho);
    if dev > numeric::HERMITIAN_TOL * numeric::max_abs(&state.rho).max(1.0) {
        return Err(QmError::NonHermitian { deviation: dev });
    }
    let edge = edge_fraction(&state.rho);
    if edge > EDGE_TOL {
        return Err(QmError::WindowTooSmall(format!("state reaches {edge:.1e} of its peak at the window edge")));
    }
    let m = 2 * n;
    let interp = doubling_matrix(n).map(cr);
    let fine = &interp * &state.rho * interp.transpose();
    let (fwd, _) = fft_pair(m);
    let mut w = DMatrix::zeros(m, m);
    let mut buf = vec![Complex64::default(); m];
    for row in 0..m {
        buf.iter_mut().for_each(|z| *z = Complex64::default());
        let reach = row.min(m - 1 - row);
        for s in 0..=reach {
            buf[s] = fine[(row + s, row - s)];
            if s > 0 {
                buf[m - s] = fine[(row - s, row + s)];
            }
        }
        fwd.process(&mut buf);
        // Column j' = j + N holds P_j, j ∈ [−N, N).
        for jj in 0..m {
            let j = jj as i64 - n as i64;
            let k = j.rem_euclid(m as i64) as usize;
            w[(row, jj)] = buf[k].re * state.dx;
        }
    }
    let x = (0..m).map(|c| state.x0 + 0.5 * c as f64 * state.dx).collect();
    let dp = PI / (n as f64 * state.dx);
    let p = (0..m).map(|jj| (jj as f64 - n as f64) * dp).collect();
    Ok(PhaseSpaceFunction { x, p, w, dx: 0.5 * state.dx, dp })
}

/// Imaginary residue of the transform, a Hermiticity diagnostic.
pub fn wigner_imaginary_residue(state: &GridState) -> Result<f64> {
    let n = state.len();
    let m = 2 * n;
    let interp = doubling_matrix(n).map(cr);
    let fine = &interp * &state.rho * interp.transpose();
    let (fwd, _) = fft_pair(m);
    let mut buf = vec![Complex64::default(); m];
    let mut worst = 0.0_f64;
    for row in 0..m {
        buf.iter_mut().for_each(|z| *z = Complex64::default());
        let reach = row.min(m - 1 - row);
        for s in 0..=reach {
            buf[s] = fine[(row + s, row - s)];
            if s > 0 {
                buf[m - s] = fine[(row - s, row + s)];
            }
        }
        fwd.process(&mut buf);
        worst = buf.iter().fold(worst, |a, z| a.max((z.im * state.dx).abs()));
    }
    Ok(worst)
}

/// Inverse of [`wigner_transform`] on its own grid.
pub fn inverse_wigner(w: &PhaseSpaceFunction) -> Result<GridState> {
    let m = w.x.len();
    if m < 4 || m % 4 != 0 || w.p.len() != m {
        return Err(QmError::GridMismatch(format!("expected a 2N × 2N grid with N even, got {} × {}", m, w.p.len())));
    }
    let n = m / 2;
    let dx = 2.0 * w.dx;
    let expect_dp = PI / (n as f64 * dx);
    if (w.dp - expect_dp).abs() > 1e-12 * expect_dp || (w.p[0] + n as f64 * expect_dp).abs() > 1e-9 * expect_dp * n as f64 {
        return Err(QmError::GridMismatch("momentum grid is not conjugate to the position grid".into()));
    }
    let (_, inv) = fft_pair(m);
    let mut rho = ComplexMatrix::zeros(n, n);
    let mut buf = vec![Complex64::default(); m];
    for row in 0..m {
        for jj in 0..m {
            let j = jj as i64 - n as i64;
            buf[j.rem_euclid(m as i64) as usize] = cr(w.w[(row, jj)]);
        }
        inv.process(&mut buf);
        // ρ̃(row + s, row − s) = (1/(2N dx)) Σ_j W e^{+2πi js/2N}; coarse (a, b) has row = a + b, s = a − b.
        for a in 0..n {
            let b = row as i64 - a as i64;
            if b < 0 || b >= n as i64 {
                continue;
            }
            let s = (a as i64 - b).rem_euclid(m as i64) as usize;
            rho[(a, b as usize)] = buf[s] / (m as f64 * dx);
        }
    }
    GridState::from_density(w.x[0], dx, rho)
}

/// `Σ A W dX dP / 2π` on a shared grid.
pub fn weyl_expectation(a: &PhaseSpaceFunction, rho_w: &PhaseSpaceFunction) -> Result<f64> {
    if !a.same_grid(rho_w) {
        return Err(QmError::GridMismatch("operator and state live on different grids".into()));
    }
    Ok(a.w.component_mul(&rho_w.w).sum() * rho_w.measure())
}

/// `Σ A(X, P) W dX dP / 2π` for a symbol given as a function.
pub fn weyl_expectation_fn(a: impl Fn(f64, f64) -> f64, rho_w: &PhaseSpaceFunction) -> f64 {
    let mut s = 0.0;
    for (i, &x) in rho_w.x.iter().enumerate() {
        for (j, &p) in rho_w.p.iter().enumerate() {
            s += a(x, p) * rho_w.w[(i, j)];
        }
    }
    s * rho_w.measure()
}

/// Gaussian wavepacket `ψ ∝ exp(−(x−x0)²/4σ² + ip0 x)` on a grid.
pub fn gaussian_wavefunction(x: &[f64], x0: f64, p0: f64, sigma: f64) -> Vec<Complex64> {
    x.iter().map(|&xx| Complex64::from_polar((-(xx - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * xx)).collect()
}

/// `W = (1/σ_x σ_p) exp(−(X−x0)²/2σ_x² − (P−p0)²/2σ_p²)`.
pub fn gaussian_wigner(x: f64, p: f64, x0: f64, p0: f64, sigma_x: f64, sigma_p: f64) -> f64 {
    (-(x - x0).powi(2) / (2.0 * sigma_x * sigma_x) - (p - p0).powi(2) / (2.0 * sigma_p * sigma_p)).exp() / (sigma_x * sigma_p)
}

/// Closed-form Wigner function of the box eigenstate `√(2/L) sin(kx)` on
/// `0 < x < L`, valid on the half box `0 ≤ X ≤ L/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxWigner {
    pub n: u32,
    pub length: f64,
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z }
}

impl BoxWigner {
    pub fn new(n: u32, length: f64) -> Result<Self> {
        if n < 1 || !(length > 0.0) {
            return Err(QmError::InvalidArgument("need n ≥ 1 and L > 0".into()));
        }
        Ok(BoxWigner { n, length })
    }

    pub fn k(&self) -> f64 {
        self.n as f64 * PI / self.length
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(0.0..=0.5 * self.length).contains(&x) {
            return Err(QmError::DomainError(format!("X = {x} outside the half box [0, {}]", 0.5 * self.length)));
        }
        Ok(())
    }

    /// `ρ₊ = (4X/L) sinc(2X(P − k))`.
    pub fn classical_plus(&self, x: f64, p: f64) -> Result<f64> {
        self.check(x)?;
        Ok(4.0 * x / self.length * sinc(2.0 * x * (p - self.k())))
    }

    /// `ρ₋ = (4X/L) sinc(2X(P + k))`.
    pub fn classical_minus(&self, x: f64, p: f64) -> Result<f64> {
        self.check(x)?;
        Ok(4.0 * x / self.length * sinc(2.0 * x * (p + self.k())))
    }

    /// `−cos(2kX)(4X/L) sinc(2XP)`.
    pub fn interference(&self, x: f64, p: f64) -> Result<f64> {
        self.check(x)?;
        Ok(-(2.0 * self.k() * x).cos() * 4.0 * x / self.length * sinc(2.0 * x * p))
    }

    /// `½ρ₊ + ½ρ₋ + interference`.
    pub fn total(&self, x: f64, p: f64) -> Result<f64> {
        Ok(0.5 * self.classical_plus(x, p)? + 0.5 * self.classical_minus(x, p)? + self.interference(x, p)?)
    }

    /// `2 sin²(kX)/L`.
    pub fn position_density(&self, x: f64) -> f64 {
        2.0 * (self.k() * x).sin().powi(2) / self.length
    }
}

/// Box eigenstate sampled on `[x0, x0 + N dx)`, zero outside `0 < x < L`.
pub fn box_wavefunction(x: &[f64], n: u32, length: f64) -> Vec<Complex64> {
    let k = n as f64 * PI / length;
    x.iter()
        .map(|&xx| if xx > 0.0 && xx < length { cr((2.0 / length).sqrt() * (k * xx).sin()) } else { cr(0.0) })
        .collect()
}

/// Two separated Gaussians `(φ(x − d/2) + φ(x + d/2))/√2` of width `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSlit {
    pub d: f64,
    pub sigma: f64,
}

impl TwoSlit {
    /// Overlap `⟨φ₁|φ₂⟩ = exp(−d²/8σ²)`; the closed forms neglect it.
    pub fn overlap(&self) -> f64 {
        (-self.d * self.d / (8.0 * self.sigma * self.sigma)).exp()
    }

    fn w0(&self, x: f64, p: f64) -> f64 {
        gaussian_wigner(x, p, 0.0, 0.0, self.sigma, 0.5 / self.sigma)
    }

    /// `½W₀(X − d/2, P) + ½W₀(X + d/2, P) + cos(Pd) W₀(X, P)`.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        0.5 * self.w0(x - 0.5 * self.d, p) + 0.5 * self.w0(x + 0.5 * self.d, p) + self.interference(x, p)
    }

    pub fn interference(&self, x: f64, p: f64) -> f64 {
        (p * self.d).cos() * self.w0(x, p)
    }

    /// `ρ(P) = 2 cos²(Pd/2) ρ₀(P)`, with `∫ρ(P) dP/2π = 1`.
    pub fn momentum_marginal(&self, p: f64) -> f64 {
        let sp = 0.5 / self.sigma;
        let rho0 = (2.0 * PI).sqrt() / sp * (-p * p / (2.0 * sp * sp)).exp();
        2.0 * (0.5 * p * self.d).cos().powi(2) * rho0
    }

    pub fn on_grid(&self, x: &[f64], p: &[f64]) -> PhaseSpaceFunction {
        PhaseSpaceFunction::sample(x, p, |a, b| self.wigner(a, b))
    }

    pub fn wavefunction(&self, x: &[f64]) -> Vec<Complex64> {
        let a = gaussian_wavefunction(x, -0.5 * self.d, 0.0, self.sigma);
        let b = gaussian_wavefunction(x, 0.5 * self.d, 0.0, self.sigma);
        a.iter().zip(&b).map(|(u, v)| u + v).collect()
    }
}

/// Thermal oscillator `W ∝ exp(−β_eff H)` with `β_eff = tanh(βω/2)/(ω/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalOscillator {
    pub mass: f64,
    pub omega: f64,
    pub beta: f64,
}

impl ThermalOscillator {
    pub fn new(mass: f64, omega: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && omega > 0.0 && mass > 0.0) {
            return Err(QmError::InvalidArgument("need β, ω, m > 0".into()));
        }
        Ok(ThermalOscillator { mass, omega, beta })
    }

    pub fn beta_eff(&self) -> f64 {
        let h = 0.5 * self.beta * self.omega;
        h.tanh() / (0.5 * self.omega)
    }

    pub fn energy(&self, x: f64, p: f64) -> f64 {
        p * p / (2.0 * self.mass) + 0.5 * self.mass * self.omega * self.omega * x * x
    }

    /// Analytically normalized value, `β_eff ω exp(−β_eff H)`.
    pub fn value(&self, x: f64, p: f64) -> f64 {
        let b = self.beta_eff();
        b * self.omega * (-b * self.energy(x, p)).exp()
    }

    /// `(σ_x, σ_p)` of the Gaussian.
    pub fn widths(&self) -> (f64, f64) {
        let b = self.beta_eff();
        ((1.0 / (b * self.mass * self.omega * self.omega)).sqrt(), (self.mass / b).sqrt())
    }

    /// Sample on a grid of `points_per_sigma` per width out to `±extent` widths,
    /// renormalized to unit integral on the grid.
    pub fn on_grid(&self, points_per_sigma: usize, extent: f64) -> PhaseSpaceFunction {
        let (sx, sp) = self.widths();
        let half = (extent * points_per_sigma as f64).round() as i64;
        let x: Vec<f64> = (-half..=half).map(|i| i as f64 * sx / points_per_sigma as f64).collect();
        let p: Vec<f64> = (-half..=half).map(|i| i as f64 * sp / points_per_sigma as f64).collect();
        let mut w = PhaseSpaceFunction::sample(&x, &p, |a, b| self.value(a, b));
        let norm = w.normalization();
        w.scale(1.0 / norm);
        w
    }
}

/// `tanh(βω/2)` from the Boltzmann weights, `Σ p_n²` with `p_n ∝ e^{−βωn}`.
pub fn thermal_purity_oracle(beta_omega: f64) -> f64 {
    let q = (-beta_omega).exp();
    (1.0 - q).powi(2) / (1.0 - q * q)
}

/// Rectangular phase-space window with `n × n` midpoint cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseWindow {
    pub x: (f64, f64),
    pub p: (f64, f64),
    pub cells: usize,
}

impl PhaseWindow {
    fn cells(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        let n = self.cells;
        let hx = (self.x.1 - self.x.0) / n as f64;
        let hp = (self.p.1 - self.p.0) / n as f64;
        (0..n).flat_map(move |i| {
            (0..n).map(move |j| {
                let boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
                (self.x.0 + (i as f64 + 0.5) * hx, self.p.0 + (j as f64 + 0.5) * hp, boundary)
            })
        })
    }

    fn measure(&self) -> f64 {
        let n = self.cells as f64;
        (self.x.1 - self.x.0) * (self.p.1 - self.p.0) / (n * n * 2.0 * PI)
    }
}

/// `𝒩(E) = ∫_{H ≤ E} dX dP / 2π` by cell counting.
pub fn weyl_count(h: impl Fn(f64, f64) -> f64, e: f64, window: PhaseWindow) -> Result<f64> {
    let mut count = 0usize;
    for (x, p, boundary) in window.cells() {
        if h(x, p) <= e {
            if boundary {
                return Err(QmError::WindowTooSmall(format!("H ≤ {e} reaches the window boundary")));
            }
            count += 1;
        }
    }
    Ok(count as f64 * window.measure())
}

/// `𝒵(β) = ∫ e^{−βH} dX dP / 2π`.
pub fn semiclassical_partition(h: impl Fn(f64, f64) -> f64, beta: f64, window: PhaseWindow) -> f64 {
    window.cells().map(|(x, p, _)| (-beta * h(x, p)).exp()).sum::<f64>() * window.measure()
}
