//! Spherical scattering: special functions, partial-wave phase shifts, Born
//! approximations, cross sections, resonances, low-energy parameters and free
//! Green functions.
//!
//! Hankel functions follow the `h± = n ± i j` convention with
//! `n₀(x) = +cos x / x`. Many textbooks use `y_ℓ = −n_ℓ` instead; signs of
//! formulas written with `y_ℓ` flip accordingly.
//!
//! Log-derivatives: `k_ℓ` means `R'/R` of the radial function `R(r)` and
//! `k̃₀ = u'/u` of `u = rR`, so `k₀ = k̃₀ − 1/a`.

use num_complex::Complex64;

use crate::error::{QmError, Result};
use crate::numeric::{self, c};

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Spherical Bessel data at one order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalBessel {
    pub j: f64,
    pub n: f64,
    pub dj: f64,
    pub dn: f64,
}

impl SphericalBessel {
    pub fn h_plus(&self) -> Complex64 {
        c(self.n, self.j)
    }

    pub fn h_minus(&self) -> Complex64 {
        c(self.n, -self.j)
    }

    pub fn dh_plus(&self) -> Complex64 {
        c(self.dn, self.dj)
    }

    pub fn dh_minus(&self) -> Complex64 {
        c(self.dn, -self.dj)
    }
}

/// `j_0..=j_lmax` at `x ≥ 0`: upward recurrence when `x > lmax`, Miller's
/// downward recurrence otherwise.
pub fn sph_j_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let j0 = x.sin() / x;
    if x > lmax as f64 {
        out[0] = j0;
        if lmax >= 1 {
            out[1] = x.sin() / (x * x) - x.cos() / x;
        }
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
        }
        return out;
    }
    let start = lmax + 20 + (x as usize) + ((40 * (lmax + 1)) as f64).sqrt() as usize;
    let (mut up, mut cur) = (0.0_f64, 1e-30_f64);
    let mut tmp = vec![0.0; lmax + 2];
    for l in (1..=start).rev() {
        let down = (2 * l + 1) as f64 / x * cur - up;
        up = cur;
        cur = down;
        if l - 1 <= lmax + 1 {
            tmp[l - 1] = cur;
        }
        if l <= lmax + 2 && l < tmp.len() {
            tmp[l] = up;
        }
        if cur.abs() > 1e250 {
            up *= 1e-250;
            cur *= 1e-250;
            for t in tmp.iter_mut() {
                *t *= 1e-250;
            }
        }
    }
    let j1 = x.sin() / (x * x) - x.cos() / x;
    let scale = if j0.abs() >= j1.abs() { j0 / tmp[0] } else { j1 / tmp[1] };
    for l in 0..=lmax {
        out[l] = tmp[l] * scale;
    }
    out
}

/// `n_0..=n_lmax` (with `n₀ = cos x/x`) by upward recurrence.
pub fn sph_n_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    out[0] = x.cos() / x;
    if lmax >= 1 {
        out[1] = x.cos() / (x * x) + x.sin() / x;
    }
    for l in 1..lmax {
        out[l + 1] = (2 * l + 1) as f64 / x * out[l] - out[l - 1];
    }
    out
}

/// `j_ℓ(x)` for `x ≥ 0`.
pub fn sph_j(l: usize, x: f64) -> f64 {
    sph_j_all(l, x)[l]
}

/// `j_ℓ, n_ℓ` and their derivatives, using `f'_ℓ = f_{ℓ−1} − (ℓ+1)f_ℓ/x`, `f'_0 = −f_1`.
pub fn spherical_bessel(l: usize, x: f64) -> Result<SphericalBessel> {
    if !(x > 0.0) {
        return Err(QmError::DomainError(format!("spherical Bessel n_ℓ needs x > 0, got {x}")));
    }
    let js = sph_j_all(l + 1, x);
    let ns = sph_n_all(l + 1, x);
    let (dj, dn) = if l == 0 {
        (-js[1], -ns[1])
    } else {
        let f = (l + 1) as f64 / x;
        (js[l - 1] - f * js[l], ns[l - 1] - f * ns[l])
    };
    Ok(SphericalBessel { j: js[l], n: ns[l], dj, dn })
}

/// Legendre polynomial `P_ℓ(x)` by Bonnet's recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

fn bessel_asymptotic(x: f64) -> (f64, f64) {
    // Hankel expansion for order zero: a_k = Π(−(2j−1)²)/(k! 8^k).
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            a *= -((2 * k - 1) as f64).powi(2) / (k as f64 * 8.0 * x);
        }
        if a.abs() > prev || a.abs() < 1e-18 {
            break;
        }
        prev = a.abs();
        // a already carries x^{−k}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    let chi = x - 0.25 * PI;
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * chi.cos() - q * chi.sin()), amp * (p * chi.sin() + q * chi.cos()))
}

/// `J₀(x)` and `Y₀(x)` for `x > 0`: power series below 12, asymptotic
/// expansion above; absolute error below 1e-10.
pub fn bessel_j0_y0(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(QmError::DomainError(format!("Y₀ needs x > 0, got {x}")));
    }
    if x >= 12.0 {
        return Ok(bessel_asymptotic(x));
    }
    let z = 0.25 * x * x;
    let (mut j, mut ys) = (0.0, 0.0);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    for k in 0..200 {
        if k > 0 {
            term *= -z / (k * k) as f64;
            harmonic += 1.0 / k as f64;
        }
        j += term;
        ys -= harmonic * term;
        if term.abs() < 1e-18 && k > 2 {
            break;
        }
    }
    let y = 2.0 / PI * (((0.5 * x).ln() + EULER_GAMMA) * j + ys);
    Ok((j, y))
}

/// Spherical well of radius `a` with floor `V` and a shell `U δ(r − a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShieldedWell {
    pub a: f64,
    pub v: f64,
    pub u: f64,
    pub mass: f64,
}

impl ShieldedWell {
    pub fn alpha(&self, e: f64) -> f64 {
        (2.0 * self.mass * (e - self.v).abs()).sqrt()
    }
}

/// `i_ℓ'(x)/i_ℓ(x)` of the modified spherical Bessel function via the ratio
/// continued fraction `i_ℓ/i_{ℓ−1} = 1/((2ℓ+1)/x + i_{ℓ+1}/i_ℓ)`.
fn modified_log_derivative(l: usize, x: f64) -> f64 {
    if l == 0 {
        return 1.0 / x.tanh() - 1.0 / x;
    }
    let start = l + 40 + x as usize;
    let mut r = 0.0;
    for k in (l..=start).rev() {
        r = 1.0 / ((2 * k + 1) as f64 / x + r);
    }
    1.0 / r - (l + 1) as f64 / x
}

/// Exterior log-derivative `k_ℓ = R'/R` at `r = a⁺` of the regular interior
/// solution (`j_ℓ(αr)` above the floor, `i_ℓ(αr)` below), boosted by `2mU`.
pub fn interior_log_derivative(well: &ShieldedWell, e: f64, l: usize) -> f64 {
    if well.v == f64::INFINITY || well.u == f64::INFINITY {
        return f64::INFINITY;
    }
    let boost = 2.0 * well.mass * well.u;
    let alpha = well.alpha(e);
    let x = alpha * well.a;
    if x < 1e-6 {
        // r^ℓ with an O(x²) correction of either sign.
        let s = if e > well.v { -1.0 } else { 1.0 };
        return (l as f64 + s * x * x / (2 * l + 3) as f64) / well.a + boost;
    }
    if e > well.v {
        let js = sph_j_all(l + 1, x);
        let dj = if l == 0 { -js[1] } else { js[l - 1] - (l + 1) as f64 / x * js[l] };
        alpha * dj / js[l] + boost
    } else {
        alpha * modified_log_derivative(l, x) + boost
    }
}

/// s-wave log-derivative of `u = rR`: `k̃₀ = α CTG(αa) + 2mU`.
pub fn reduced_log_derivative_s(well: &ShieldedWell, e: f64) -> f64 {
    interior_log_derivative(well, e, 0) + 1.0 / well.a
}

fn reduce_mod_pi(d: f64) -> f64 {
    let mut d = d % PI;
    if d <= -0.5 * PI {
        d += PI;
    } else if d > 0.5 * PI {
        d -= PI;
    }
    d
}

/// Phase shift from matching at `r = a`:
/// `tan δ_ℓ = −(k_ℓ j − k j')/(k_ℓ n − k n')`, returned in `(−π/2, π/2]`.
pub fn phase_shift(k_l: f64, l: usize, e: f64, a: f64, mass: f64) -> Result<f64> {
    if !(a > 0.0 && e > 0.0) {
        return Err(QmError::DomainError("phase shift needs a > 0 and E > 0".into()));
    }
    let k = (2.0 * mass * e).sqrt();
    let b = spherical_bessel(l, k * a)?;
    let (num, den) = if k_l.is_infinite() {
        (-b.j, b.n)
    } else {
        (-(k_l * b.j - k * b.dj), k_l * b.n - k * b.dn)
    };
    Ok(reduce_mod_pi(num.atan2(den)))
}

/// Shift consecutive phases by multiples of π to remove jumps.
pub fn unwrap_mod_pi(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0_f64;
    for (i, &p) in phases.iter().enumerate() {
        if i > 0 {
            let prev: f64 = out[i - 1];
            offset += PI * ((prev - (p + offset)) / PI).round();
        }
        out.push(p + offset);
    }
    out
}

/// Phase shifts `δ_0..=δ_ℓmax` at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftSet {
    pub e: f64,
    pub k: f64,
    pub deltas: Vec<f64>,
}

/// `⌈ka⌉ + 8`.
pub fn default_lmax(k: f64, a: f64) -> usize {
    (k * a).ceil() as usize + 8
}

impl PhaseShiftSet {
    pub fn from_well(well: &ShieldedWell, e: f64, lmax: usize) -> Result<Self> {
        let deltas = (0..=lmax)
            .map(|l| phase_shift(interior_log_derivative(well, e, l), l, e, well.a, well.mass))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseShiftSet { e, k: (2.0 * well.mass * e).sqrt(), deltas })
    }

    /// Partial cross section of the last kept wave, an estimate of the truncation error.
    pub fn tail_estimate(&self) -> f64 {
        let l = self.deltas.len() - 1;
        partial_sigma(l, self.deltas[l], self.k)
    }
}

/// `σ_ℓ = (2ℓ+1)(4π/k²) sin²δ_ℓ`.
pub fn partial_sigma(l: usize, delta: f64, k: f64) -> f64 {
    (2 * l + 1) as f64 * 4.0 * PI / (k * k) * delta.sin().powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSections {
    pub partial: Vec<f64>,
    pub total: f64,
}

pub fn cross_sections(ps: &PhaseShiftSet) -> CrossSections {
    let partial: Vec<f64> = ps.deltas.iter().enumerate().map(|(l, &d)| partial_sigma(l, d, ps.k)).collect();
    let total = partial.iter().sum();
    CrossSections { partial, total }
}

/// `f(θ) = −(1/k) Σ √((2ℓ+1)π) T_ℓℓ Y^{ℓ0}(θ)` with `T_ℓℓ = −2 e^{iδ} sin δ`.
pub fn scattering_amplitude(ps: &PhaseShiftSet, theta: f64) -> Complex64 {
    let x = theta.cos();
    let mut f = Complex64::default();
    for (l, &d) in ps.deltas.iter().enumerate() {
        let w = (2 * l + 1) as f64;
        let t = Complex64::from_polar(-2.0 * d.sin(), d);
        let y = (w / (4.0 * PI)).sqrt() * legendre_p(l, x);
        f -= t * ((w * PI).sqrt() * y);
    }
    f / ps.k
}

/// `|σ_total − (4π/k) Im f(0)|`.
pub fn optical_theorem_residual(ps: &PhaseShiftSet) -> f64 {
    let sigma = cross_sections(ps).total;
    (sigma - 4.0 * PI / ps.k * scattering_amplitude(ps, 0.0).im).abs()
}

/// `σ_ℓ` for `δ_ℓ = δ_bg − arctan((Γ/2)/(E − E_r))`.
pub fn resonance_sigma(delta_bg: f64, e_r: f64, gamma_r: f64, e: f64, l: usize, k: f64) -> Result<f64> {
    if !(gamma_r > 0.0) {
        return Err(QmError::InvalidArgument("resonance width must be positive".into()));
    }
    let delta = delta_bg - (0.5 * gamma_r / (e - e_r)).atan();
    Ok(partial_sigma(l, delta, k))
}

/// Fano profile `(ε + q)²/(ε² + 1)`.
pub fn fano_profile(eps: f64, q: f64) -> f64 {
    (eps + q).powi(2) / (eps * eps + 1.0)
}

/// Exact s-wave phase of the shielded well, `−ka + arctan(k/k̃₀)`.
pub fn s_wave_phase(well: &ShieldedWell, e: f64) -> f64 {
    let k = (2.0 * well.mass * e).sqrt();
    let kt = reduced_log_derivative_s(well, e);
    -k * well.a + (k / kt).atan()
}

/// Wigner delay `τ = dθ/dE` with `θ = 2δ`, by central difference.
pub fn wigner_delay(delta: impl Fn(f64) -> f64, e: f64, de: f64) -> f64 {
    let d = reduce_mod_pi(delta(e + de) - delta(e - de));
    2.0 * d / (2.0 * de)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub e_r: f64,
    pub gamma_r: f64,
    /// `v_r` in `k̃₀(E) ≈ −(E − E_r)/v_r`.
    pub v_r: f64,
}

/// s-wave resonances of a shielded well on `[e_lo, e_hi]` from the zero
/// crossings of `k̃₀(E)`, linearized as `k̃₀ ≈ −(E − E_r)/v_r`, `Γ_r = 2 v_r k_E`.
pub fn shielded_resonances(well: &ShieldedWell, e_lo: f64, e_hi: f64, grid: usize) -> Vec<Resonance> {
    let f = |e: f64| reduced_log_derivative_s(well, e);
    let mut out = Vec::new();
    for e in numeric::find_roots(f, e_lo, e_hi, grid) {
        let h = 1e-6 * e.abs().max(1e-3);
        let slope = (f(e + h) - f(e - h)) / (2.0 * h);
        let scale = 1.0 + 2.0 * well.mass * well.u + well.alpha(e);
        // Discard the cot poles, where k̃₀ jumps from −∞ to +∞.
        if f(e).abs() > 1e-6 * scale || slope >= 0.0 {
            continue;
        }
        let v_r = -1.0 / slope;
        let k = (2.0 * well.mass * e).sqrt();
        out.push(Resonance { e_r: e, gamma_r: 2.0 * v_r * k, v_r });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringLength {
    pub a_s: f64,
    pub bound_energy: Option<f64>,
}

/// `a_s = a − 1/k̃₀(E → 0⁺)`; a shallow bound state `−1/(2m(a_s − a)²)` is
/// reported when `a_s > a`.
pub fn scattering_length(well: &ShieldedWell) -> ScatteringLength {
    let kt = reduced_log_derivative_s(well, 0.0);
    let a_s = if kt.is_infinite() { well.a } else { well.a - 1.0 / kt };
    let bound_energy = (a_s > well.a).then(|| -1.0 / (2.0 * well.mass * (a_s - well.a).powi(2)));
    ScatteringLength { a_s, bound_energy }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornPhase {
    pub delta: f64,
    /// `|δ| < 0.1`.
    pub valid: bool,
}

/// `δ_ℓ ≈ −(2/v_E) ∫₀^{r_max} V(r) (k r j_ℓ(kr))² dr`.
pub fn born_phase_shift(v: impl Fn(f64) -> f64, l: usize, e: f64, mass: f64, r_max: f64) -> Result<BornPhase> {
    if !(e > 0.0) {
        return Err(QmError::DomainError("Born phase shift needs E > 0".into()));
    }
    let k = (2.0 * mass * e).sqrt();
    let integrand = |r: f64| v(r) * (k * r * sph_j(l, k * r)).powi(2);
    let integral = numeric::integrate_adaptive(integrand, 0.0, r_max, 1e-10)
        .ok_or_else(|| QmError::IntegralDiverged(format!("Born integral for ℓ = {l}")))?;
    let delta = -2.0 * mass / k * integral;
    Ok(BornPhase { delta, valid: delta.abs() < 0.1 })
}

/// `Ũ(q) = 4π ∫ U(r) sinc(qr) r² dr`.
pub fn born_transform(u: impl Fn(f64) -> f64, q: f64, r_max: f64) -> Result<f64> {
    let sinc = |x: f64| if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    numeric::integrate_adaptive(|r| u(r) * sinc(q * r) * r * r, 0.0, r_max, 1e-10)
        .map(|x| 4.0 * PI * x)
        .ok_or_else(|| QmError::IntegralDiverged("Born transform".into()))
}

/// `dσ/dΩ = (m/2π)² |Ũ(q)|²` with `q = 2k sin(θ/2)`.
pub fn born_dcs(u: impl Fn(f64) -> f64, e: f64, theta: f64, mass: f64, r_max: f64) -> Result<f64> {
    let k = (2.0 * mass * e).sqrt();
    let q = 2.0 * k * (0.5 * theta).sin();
    let ut = born_transform(u, q, r_max)?;
    Ok((mass / (2.0 * PI)).powi(2) * ut * ut)
}

/// `σ = (1/2πv²) ∫₀^{2k} |Ũ(q)|² q dq`.
pub fn born_total(u: impl Fn(f64) -> f64, e: f64, mass: f64, r_max: f64) -> Result<f64> {
    let k = (2.0 * mass * e).sqrt();
    let v = k / mass;
    let err = std::cell::RefCell::new(None);
    let s = numeric::integrate(
        |q| match born_transform(&u, q, r_max) {
            Ok(x) => x * x * q,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        2.0 * k,
        64,
    );
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(s / (2.0 * PI * v * v)),
    }
}

/// Free outgoing Green function in `dim` = 1, 2 or 3 dimensions.
pub fn free_green(dim: u8, e: f64, r: f64, mass: f64) -> Result<Complex64> {
    if !(e > 0.0) {
        return Err(QmError::DomainError("free Green function needs E > 0".into()));
    }
    let k = (2.0 * mass * e).sqrt();
    match dim {
        1 => Ok(c(0.0, -mass / k) * Complex64::from_polar(1.0, k * r.abs())),
        2 | 3 if !(r > 0.0) => Err(QmError::DomainError("need r > 0".into())),
        2 => {
            let (j0, y0) = bessel_j0_y0(k * r)?;
            Ok(c(0.0, -0.5 * mass) * c(j0, y0))
        }
        3 => Ok(Complex64::from_polar(-mass / (2.0 * PI * r), k * r)),
        _ => Err(QmError::DomainError(format!("dimension {dim} not supported"))),
    }
}

/// `Λ_E = Λ − ½k log((Λ+k)/(Λ−k)) + iπk/2`.
pub fn lambda_e(cutoff: f64, k: f64) -> Complex64 {
    c(cutoff - 0.5 * k * ((cutoff + k) / (cutoff - k)).ln(), 0.5 * PI * k)
}

/// `u_eff = u/(1 − u𝒢(E))` for a 3D delta regularized at momentum `Λ`,
/// `𝒢 = −(m/π²)Λ_E`.
pub fn regularized_delta_ueff(u: f64, cutoff: f64, e: f64, mass: f64) -> Result<Complex64> {
    let k = (2.0 * mass * e).sqrt();
    if !(e > 0.0) || cutoff <= k {
        return Err(QmError::DomainError("need E > 0 and Λ > k_E".into()));
    }
    let g = -lambda_e(cutoff, k) * (mass / (PI * PI));
    Ok(u / (1.0 - g * u))
}

/// `E = −α² m / (2(ℓ+ν)²)`.
pub fn hydrogen_levels(alpha: f64, mass: f64, l: u32, nu: u32) -> Result<f64> {
    if nu < 1 {
        return Err(QmError::DomainError("ν must be at least 1".into()));
    }
    Ok(-alpha * alpha * mass / (2.0 * ((l + nu) as f64).powi(2)))
}
