//! Driven two-level dynamics, Landau-Zener sweeps, golden-rule transitions,
//! decay into a quasi-continuum, Gamow poles, the Pauli master equation and
//! adiabatic coupling matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmError, Result};
use crate::numeric::{self, c, cr, ComplexMatrix};

/// `H = ε/2 σ₃ + c σ₁` on the two-site basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevel {
    pub eps: f64,
    pub c: f64,
}

impl TwoLevel {
    /// `Ω = √((2c)² + ε²)`.
    pub fn omega(&self) -> f64 {
        ((2.0 * self.c).powi(2) + self.eps * self.eps).sqrt()
    }

    /// Mixing angle `θ₀ = arctan(2c/ε)`.
    pub fn theta0(&self) -> f64 {
        (2.0 * self.c).atan2(self.eps)
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        numeric::from_real_rows(&[&[self.eps / 2.0, self.c], &[self.c, -self.eps / 2.0]])
    }

    /// Precession vector `(2c, 0, ε)`.
    pub fn precession(&self) -> [f64; 3] {
        [2.0 * self.c, 0.0, self.eps]
    }
}

/// Probability to remain in the starting site: `1 − sin²θ₀ sin²(Ωt/2)`.
pub fn rabi_probability(tl: TwoLevel, t: f64) -> f64 {
    let s = tl.theta0().sin();
    1.0 - s * s * (0.5 * tl.omega() * t).sin().powi(2)
}

/// Rotate `m0` by the angle `|Ω|t` about `Ω̂` (Rodrigues formula).
pub fn bloch_precession(omega: [f64; 3], m0: [f64; 3], t: f64) -> [f64; 3] {
    let w = (omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2]).sqrt();
    if w == 0.0 {
        return m0;
    }
    let k = [omega[0] / w, omega[1] / w, omega[2] / w];
    let (s, co) = (w * t).sin_cos();
    let dot = k[0] * m0[0] + k[1] * m0[1] + k[2] * m0[2];
    let cross = [k[1] * m0[2] - k[2] * m0[1], k[2] * m0[0] - k[0] * m0[2], k[0] * m0[1] - k[1] * m0[0]];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = m0[i] * co + cross[i] * s + k[i] * dot * (1.0 - co);
    }
    out
}

/// Linear sweep `H = ½αtσ₃ + ½κσ₁` on `[−T, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZSweep {
    pub alpha: f64,
    pub kappa: f64,
    pub t_half: f64,
}

impl LZSweep {
    /// Half-window satisfying `αT = 20·max(κ, √α)`.
    pub fn with_min_window(alpha: f64, kappa: f64) -> Self {
        let t_half = 20.0 * kappa.max(alpha.sqrt()) / alpha;
        LZSweep { alpha, kappa, t_half }
    }

    /// Largest admissible step, `0.01·min(1/κ, 1/√α)`.
    pub fn max_step(&self) -> f64 {
        let a = 1.0 / self.alpha.sqrt();
        let k = if self.kappa > 0.0 { 1.0 / self.kappa } else { f64::INFINITY };
        0.01 * a.min(k)
    }

    fn hamiltonian_coeffs(&self, t: f64) -> [f64; 3] {
        [0.5 * self.kappa, 0.0, 0.5 * self.alpha * t]
    }
}

/// `p = exp(−(π/2) κ²/α)`, the probability to stay in the diabatic ↑ state.
pub fn lz_formula(s: LZSweep) -> f64 {
    (-std::f64::consts::FRAC_PI_2 * s.kappa * s.kappa / s.alpha).exp()
}

/// Which states are used for preparation at −T and readout at +T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzReadout {
    /// Start in ↑, read `|⟨↑|ψ(T)⟩|²`.
    Diabatic,
    /// Start in the instantaneous eigenstate that continues ↑ at −T and read
    /// out the eigenstate that continues ↑ at +T. Removes the finite-window
    /// admixture oscillations of the diabatic readout.
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzOutcome {
    pub probability: f64,
    /// Change of the result when the step count is halved.
    pub step_sensitivity: f64,
    /// Largest `| |c↑|²+|c↓|² − 1 |` seen along the trajectory.
    pub norm_drift: f64,
    pub steps: usize,
}

/// Exponential of `−i(h0 + h·σ)τ` for a 2×2 Hermitian generator.
fn su2_exp(h: [f64; 3], tau: f64) -> [[Complex64; 2]; 2] {
    let n = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    let (s, co) = (n * tau).sin_cos();
    if n == 0.0 {
        return [[cr(1.0), cr(0.0)], [cr(0.0), cr(1.0)]];
    }
    let (x, y, z) = (h[0] / n * s, h[1] / n * s, h[2] / n * s);
    // cos − i sin n̂·σ
    [[c(co, -z), c(-y, -x)], [c(y, -x), c(co, z)]]
}

fn lz_eigvec(coeffs: [f64; 3], upper: bool) -> [Complex64; 2] {
    // Real symmetric 2×2 [[z, x],[x, −z]].
    let (x, z) = (coeffs[0], coeffs[2]);
    let r = (x * x + z * z).sqrt();
    if r == 0.0 {
        return if upper { [cr(1.0), cr(0.0)] } else { [cr(0.0), cr(1.0)] };
    }
    let theta = x.atan2(z);
    let (s, co) = (0.5 * theta).sin_cos();
    if upper {
        [cr(co), cr(s)]
    } else {
        [cr(-s), cr(co)]
    }
}

fn lz_propagate(sweep: LZSweep, steps: usize, readout: LzReadout) -> (f64, f64) {
    let t0 = -sweep.t_half;
    let dt = 2.0 * sweep.t_half / steps as f64;
    // ↑ is the lower level at −T and the upper level at +T (α > 0).
    let mut psi = match readout {
        LzReadout::Diabatic => [cr(1.0), cr(0.0)],
        LzReadout::Adiabatic => lz_eigvec(sweep.hamiltonian_coeffs(t0), false),
    };
    let g = 3f64.sqrt() / 6.0;
    let mut drift = 0.0_f64;
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let h1 = sweep.hamiltonian_coeffs(t + (0.5 - g) * dt);
        let h2 = sweep.hamiltonian_coeffs(t + (0.5 + g) * dt);
        // Fourth-order Magnus: Ω = −i dt (H1+H2)/2 + (√3 dt²/12)[A2, A1], A = −iH.
        // For H = h·σ the commutator term is −(√3 dt²/12)·2i (h2 × h1)·σ.
        let cross = [
            h2[1] * h1[2] - h2[2] * h1[1],
            h2[2] * h1[0] - h2[0] * h1[2],
            h2[0] * h1[1] - h2[1] * h1[0],
        ];
        let f = 3f64.sqrt() * dt / 12.0 * 2.0;
        let heff = [
            0.5 * (h1[0] + h2[0]) + f * cross[0],
            0.5 * (h1[1] + h2[1]) + f * cross[1],
            0.5 * (h1[2] + h2[2]) + f * cross[2],
        ];
        let u = su2_exp(heff, dt);
        psi = [u[0][0] * psi[0] + u[0][1] * psi[1], u[1][0] * psi[0] + u[1][1] * psi[1]];
        drift = drift.max((psi[0].norm_sqr() + psi[1].norm_sqr() - 1.0).abs());
    }
    let p = match readout {
        LzReadout::Diabatic => psi[0].norm_sqr(),
        LzReadout::Adiabatic => {
            let v = lz_eigvec(sweep.hamiltonian_coeffs(sweep.t_half), true);
            (v[0].conj() * psi[0] + v[1].conj() * psi[1]).norm_sqr()
        }
    };
    (p, drift)
}

/// Integrate the sweep with a fourth-order Magnus scheme.
///
/// `steps` is raised to respect [`LZSweep::max_step`]. The run is repeated with
/// half the steps and the difference reported; more than `1e-4` is an error.
pub fn lz_numeric(sweep: LZSweep, steps: usize, readout: LzReadout) -> Result<LzOutcome> {
    if sweep.alpha <= 0.0 || sweep.kappa < 0.0 {
        return Err(QmError::InvalidArgument("need α > 0 and κ ≥ 0".into()));
    }
    let need = 20.0 * sweep.kappa.max(sweep.alpha.sqrt());
    if sweep.alpha * sweep.t_half < need * (1.0 - 1e-12) {
        return Err(QmError::WindowTooSmall(format!("αT = {} < {need}", sweep.alpha * sweep.t_half)));
    }
    let min_steps = (2.0 * sweep.t_half / sweep.max_step()).ceil() as usize;
    let mut steps = steps.max(min_steps);
    steps += steps % 2;
    let (p, drift) = lz_propagate(sweep, steps, readout);
    let (p_half, _) = lz_propagate(sweep, steps / 2, readout);
    let sens = (p - p_half).abs();
    if sens >= 1e-4 {
        return Err(QmError::NoConvergence(format!("step halving changes p by {sens:.2e}")));
    }
    Ok(LzOutcome { probability: p, step_sensitivity: sens, norm_drift: drift, steps })
}

/// First-order transition probability under periodic driving,
/// `|W|² t² sinc²((ω − Ω_d) t / 2)`. The flag marks results above one, where
/// first order is no longer meaningful.
pub fn fgr_probability(w: f64, omega: f64, drive: f64, t: f64) -> (f64, bool) {
    let x = 0.5 * (omega - drive) * t;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    let p = w * w * t * t * sinc * sinc;
    (p, p > 1.0)
}

/// Golden-rule rate `Γ = 2πσ²/Δ`.
pub fn fgr_rate(delta: f64, sigma: f64) -> f64 {
    2.0 * std::f64::consts::PI * sigma * sigma / delta
}

/// Dimensionless adiabaticity diagnostic `Ẋ σ / Δ²`; small means adiabatic.
pub fn adiabaticity_ratio(xdot: f64, sigma: f64, delta: f64) -> f64 {
    xdot.abs() * sigma / (delta * delta)
}

/// A level coupled uniformly to a finite band centred on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    pub e0: f64,
    pub delta: f64,
    pub sigma: f64,
    pub n_band: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySpectrum {
    pub energies: Vec<f64>,
    pub overlaps: Vec<f64>,
}

impl DecayModel {
    pub fn gamma(&self) -> f64 {
        fgr_rate(self.delta, self.sigma)
    }

    /// `E_k = E0 + (k − (N−1)/2)Δ`.
    pub fn band(&self) -> Vec<f64> {
        let mid = (self.n_band as f64 - 1.0) / 2.0;
        (0..self.n_band).map(|k| self.e0 + (k as f64 - mid) * self.delta).collect()
    }

    /// Half-width of the Lorentzian overlap profile, `√(σ² + (πσ²/Δ)²)`.
    pub fn half_width(&self) -> f64 {
        let g = std::f64::consts::PI * self.sigma * self.sigma / self.delta;
        (self.sigma * self.sigma + g * g).sqrt()
    }

    /// `E − E0 − Σ σ²/(E − E_k)`, increasing between poles.
    pub fn secular(&self, band: &[f64], e: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        e - self.e0 - band.iter().map(|&ek| s2 / (e - ek)).sum::<f64>()
    }
}

fn bisect_increasing(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return m;
        }
        if f(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Eigenvalues of the finite model and overlaps `|⟨0|n⟩|²` from the Lorentzian
/// `σ²/((E−E0)² + (Γ/2)²)`, renormalized on the band.
pub fn decay_spectrum(model: &DecayModel) -> Result<DecaySpectrum> {
    if model.delta <= 0.0 || model.n_band < 2 {
        return Err(QmError::InvalidArgument("need Δ > 0 and at least two band levels".into()));
    }
    let band = model.band();
    let f = |e: f64| model.secular(&band, e);
    let mut energies = Vec::with_capacity(band.len() + 1);
    if model.sigma == 0.0 {
        energies.push(model.e0);
        energies.extend_from_slice(&band);
        energies.sort_by(|a, b| a.total_cmp(b));
    } else {
        let nudge = |x: f64, dir: f64| {
            let eps = 1e-13 * model.delta.max(x.abs());
            x + dir * eps
        };
        let lo_edge = band[0];
        let mut lo = lo_edge - model.delta;
        while f(lo) > 0.0 {
            lo = lo_edge - 2.0 * (lo_edge - lo);
        }
        energies.push(bisect_increasing(f, lo, nudge(lo_edge, -1.0)));
        for w in band.windows(2) {
            energies.push(bisect_increasing(f, nudge(w[0], 1.0), nudge(w[1], -1.0)));
        }
        let hi_edge = *band.last().unwrap();
        let mut hi = hi_edge + model.delta;
        while f(hi) < 0.0 {
            hi = hi_edge + 2.0 * (hi - hi_edge);
        }
        energies.push(bisect_increasing(f, nudge(hi_edge, 1.0), hi));
    }
    let overlaps = if model.sigma == 0.0 {
        energies.iter().map(|&e| if e == model.e0 { 1.0 } else { 0.0 }).collect()
    } else {
        let hw2 = model.half_width().powi(2);
        let s2 = model.sigma * model.sigma;
        let raw: Vec<f64> = energies.iter().map(|&e| s2 / ((e - model.e0).powi(2) + hw2)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    };
    Ok(DecaySpectrum { energies, overlaps })
}

/// Exact overlaps of the finite model, `1 / (1 + Σ σ²/(E_n − E_k)²)`.
pub fn decay_exact_overlaps(model: &DecayModel, spec: &DecaySpectrum) -> Vec<f64> {
    let band = model.band();
    let s2 = model.sigma * model.sigma;
    spec.energies
        .iter()
        .map(|&e| 1.0 / (1.0 + band.iter().map(|&ek| s2 / (e - ek).powi(2)).sum::<f64>()))
        .collect()
}

/// `P(t) = |Σ_n |Ψ0(E_n)|² e^{−iE_n t}|²`.
pub fn survival_probability(spec: &DecaySpectrum, t: f64) -> f64 {
    let amp: Complex64 = spec
        .energies
        .iter()
        .zip(&spec.overlaps)
        .map(|(&e, &w)| Complex64::from_polar(w, -e * t))
        .sum();
    amp.norm_sqr()
}

/// Metastable level in `0 < x < a` sealed by `u δ(x − a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowWell {
    pub a: f64,
    pub u: f64,
    pub mass: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowPole {
    /// First-order resonance energy `k_r²/2m`.
    pub e_r: f64,
    /// First-order width `2 v_r γ_r`.
    pub gamma_r: f64,
    /// Barrier transmission `(k_n/α_b)²`.
    pub g: f64,
    /// Complex pole `k` of the secular equation (first order if Newton failed).
    pub k_exact: Complex64,
    /// `E` and `Γ = −Im(k²)/m` from the refined pole.
    pub e_exact: f64,
    pub gamma_exact: f64,
    pub converged: bool,
}

impl GamowWell {
    pub fn alpha_b(&self) -> f64 {
        self.mass * self.u
    }

    /// `F(k) = ik − k cot(ka) − 2α_b`.
    pub fn secular(&self, k: Complex64) -> Complex64 {
        let ka = k * self.a;
        c(0.0, 1.0) * k - k * ka.cos() / ka.sin() - cr(2.0 * self.alpha_b())
    }

    fn secular_deriv(&self, k: Complex64) -> Complex64 {
        let ka = k * self.a;
        let s = ka.sin();
        c(0.0, 1.0) - ka.cos() / s + ka / (s * s)
    }
}

/// First-order Gamow pole plus the complex Newton refinement of
/// `ik − k cot(ka) = 2α_b` seeded with it.
///
/// If Newton fails the first-order values are kept and `converged` is false.
pub fn gamow_pole(w: GamowWell) -> Result<GamowPole> {
    if w.n == 0 || w.a <= 0.0 || w.mass <= 0.0 || w.u <= 0.0 {
        return Err(QmError::InvalidArgument("need n ≥ 1, a > 0, m > 0, u > 0".into()));
    }
    let ab = w.alpha_b();
    let kn = std::f64::consts::PI * w.n as f64 / w.a;
    let kr = kn - (kn / (2.0 * ab)) / w.a;
    let gr = (kn / (2.0 * ab)).powi(2) / w.a;
    let vr = kr / w.mass;
    let gamma_r = 2.0 * vr * gr;
    let e_r = kr * kr / (2.0 * w.mass);
    let g = (kn / ab).powi(2);

    let seed = c(kr, -gr);
    let mut k = seed;
    let mut converged = false;
    for _ in 0..100 {
        let f = w.secular(k);
        let step = f / w.secular_deriv(k);
        k -= step;
        if !k.re.is_finite() || !k.im.is_finite() {
            break;
        }
        if step.norm() < 1e-15 * k.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    // Reject a jump to a neighbouring resonance.
    if converged && (k - seed).norm() > 0.25 * std::f64::consts::PI / w.a {
        converged = false;
    }
    let (k_exact, e_exact, gamma_exact) = if converged {
        let k2 = k * k;
        (k, k2.re / (2.0 * w.mass), -k2.im / w.mass)
    } else {
        (seed, e_r, gamma_r)
    };
    Ok(GamowPole { e_r, gamma_r, g, k_exact, e_exact, gamma_exact, converged })
}

/// Generator `𝒲` of the Pauli master equation: `w_nm = ν|W_nm|²` off the
/// diagonal and `−Σ_m w_mn` on it, so every column sums to zero.
pub fn pauli_generator(w: &DMatrix<f64>, nu: f64) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(QmError::NonSquare { rows: n, cols: w.ncols() });
    }
    if nu < 0.0 {
        return Err(QmError::NegativeInput(format!("noise intensity ν = {nu}")));
    }
    let mut g = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let mut out = 0.0;
        for row in 0..n {
            if row != col {
                let rate = nu * w[(row, col)] * w[(row, col)];
                g[(row, col)] = rate;
                out += rate;
            }
        }
        g[(col, col)] = -out;
    }
    Ok(g)
}

/// Total decay constant of each level, `Γ_n = Σ_m w_mn`.
pub fn pauli_decay_constants(w: &DMatrix<f64>, nu: f64) -> Result<Vec<f64>> {
    let g = pauli_generator(w, nu)?;
    Ok((0..g.nrows()).map(|n| -g[(n, n)]).collect())
}

/// `p(t) = exp(𝒲t) p0`.
pub fn pauli_master(w: &DMatrix<f64>, nu: f64, p0: &[f64], t: f64) -> Result<Vec<f64>> {
    let g = pauli_generator(w, nu)?;
    if p0.len() != g.nrows() {
        return Err(QmError::DimensionMismatch(format!("{} probabilities for {} levels", p0.len(), g.nrows())));
    }
    if p0.iter().any(|&p| p < 0.0) {
        return Err(QmError::NegativeInput("initial probabilities".into()));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(QmError::InvalidArgument(format!("probabilities sum to {total}")));
    }
    let prop = (g * t).exp();
    let p = prop * nalgebra::DVector::from_column_slice(p0);
    Ok(p.iter().copied().collect())
}

/// `A_nm = i V_nm / (E_m − E_n)` in the eigenbasis of `H(X)`, with
/// `V = ∂H/∂X` by central difference. The diagonal is left at zero.
pub fn adiabatic_coupling(h: impl Fn(f64) -> ComplexMatrix, x: f64, dx: f64) -> Result<ComplexMatrix> {
    let h0 = h(x);
    let eig = numeric::hermitian_eig(&h0)?;
    let scale = numeric::max_abs(&h0).max(f64::MIN_POSITIVE);
    let gap = eig.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap <= 1e-8 * scale {
        return Err(QmError::DegenerateSpectrum(gap));
    }
    let v = (h(x + dx) - h(x - dx)) / cr(2.0 * dx);
    let ve = eig.vectors.adjoint() * v * &eig.vectors;
    let n = ve.nrows();
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::default()
        } else {
            c(0.0, 1.0) * ve[(a, b)] / (eig.values[b] - eig.values[a])
        }
    }))
}
