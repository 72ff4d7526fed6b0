//! State-vector simulator with single-qubit gates, controlled operations,
//! Hadamard and Fourier transforms, modular exponentiation, period finding,
//! the factoring pipeline and an RSA toy.
//!
//! Qubit 0 is the least significant bit: basis index `x = Σ x_r 2^r`.
//! The Fourier transform uses `e^{−2πi kx/N}`.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{QmError, Result};
use crate::numeric::{c, cr};

/// Upper bound on register width; 2^26 amplitudes is about 1 GiB.
pub const MAX_QUBITS: usize = 26;

/// Engineering bound on factoring attempts.
pub const DEFAULT_RETRIES: usize = 32;

pub type Gate2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    T,
    S,
    Z,
    X,
    Y,
    H,
    /// 90° rotation about y; `R⁴ = −1`.
    R,
}

impl Gate {
    pub fn matrix(self) -> Gate2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let o = cr(0.0);
        let l = cr(1.0);
        match self {
            Gate::T => [[l, o], [o, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
            Gate::S => [[l, o], [o, c(0.0, 1.0)]],
            Gate::Z => [[l, o], [o, cr(-1.0)]],
            Gate::X => [[o, l], [l, o]],
            Gate::Y => [[o, c(0.0, -1.0)], [c(0.0, 1.0), o]],
            Gate::H => [[cr(s), cr(s)], [cr(s), cr(-s)]],
            Gate::R => [[cr(s), cr(-s)], [cr(s), cr(s)]],
        }
    }
}

pub fn mat2_mul(a: &Gate2, b: &Gate2) -> Gate2 {
    let mut out = [[Complex64::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    n: usize,
    amps: Vec<Complex64>,
}

impl QubitRegister {
    /// `|0…0⟩` on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, x: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(QmError::InvalidArgument(format!("{n} qubits exceeds the limit of {MAX_QUBITS}")));
        }
        let dim = 1usize << n;
        if x >= dim {
            return Err(QmError::InvalidArgument(format!("basis index {x} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[x] = cr(1.0);
        Ok(QubitRegister { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(QmError::InvalidArgument(format!("length {dim} is not a power of two")));
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QmError::InvalidArgument("zero state".into()));
        }
        Ok(QubitRegister { n: dim.trailing_zeros() as usize, amps: amps.into_iter().map(|z| z / norm).collect() })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `|⟨a|b⟩|`.
    pub fn overlap(&self, other: &QubitRegister) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(QmError::IndexOutOfRange { index: q, n: self.n });
        }
        Ok(())
    }

    fn check_distinct(&self, qs: &[usize]) -> Result<()> {
        for (i, &a) in qs.iter().enumerate() {
            self.check(a)?;
            if qs[i + 1..].contains(&a) {
                return Err(QmError::DuplicateIndex(a));
            }
        }
        Ok(())
    }

    fn check_range(&self, sub: &Range<usize>) -> Result<()> {
        if sub.end > self.n || sub.start > sub.end {
            return Err(QmError::IndexOutOfRange { index: sub.end.saturating_sub(1), n: self.n });
        }
        Ok(())
    }

    pub fn apply_matrix(&mut self, m: &Gate2, target: usize) -> Result<()> {
        self.controlled_apply(m, &[], target)
    }

    pub fn apply_gate(&mut self, gate: Gate, target: usize) -> Result<()> {
        self.apply_matrix(&gate.matrix(), target)
    }

    /// Apply `m` to `target` on the subspace where every control bit is 1.
    pub fn controlled_apply(&mut self, m: &Gate2, controls: &[usize], target: usize) -> Result<()> {
        let mut all = controls.to_vec();
        all.push(target);
        self.check_distinct(&all)?;
        let cmask: usize = controls.iter().map(|&q| 1usize << q).sum();
        let t = 1usize << target;
        for i in 0..self.amps.len() {
            if i & t != 0 || i & cmask != cmask {
                continue;
            }
            let a0 = self.amps[i];
            let a1 = self.amps[i | t];
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | t] = m[1][0] * a0 + m[1][1] * a1;
        }
        Ok(())
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.controlled_apply(&Gate::X.matrix(), &[control], target)
    }

    pub fn toffoli(&mut self, c1: usize, c2: usize, target: usize) -> Result<()> {
        self.controlled_apply(&Gate::X.matrix(), &[c1, c2], target)
    }

    /// Swap two qubits with three alternating CNOTs.
    pub fn swap_via_cnots(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_distinct(&[a, b])?;
        self.cnot(a, b)?;
        self.cnot(b, a)?;
        self.cnot(a, b)
    }

    pub fn hadamard_all(&mut self, sub: Range<usize>) -> Result<()> {
        self.check_range(&sub)?;
        for q in sub {
            self.apply_gate(Gate::H, q)?;
        }
        Ok(())
    }

    fn fourier(&mut self, sub: Range<usize>, inverse: bool) -> Result<()> {
        self.check_range(&sub)?;
        let w = sub.end - sub.start;
        if w == 0 {
            return Ok(());
        }
        let len = 1usize << w;
        let mut planner = FftPlanner::new();
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let scale = 1.0 / (len as f64).sqrt();
        let field = (len - 1) << sub.start;
        let mut buf = vec![Complex64::ZERO; len];
        for rest in 0..self.amps.len() {
            if rest & field != 0 {
                continue;
            }
            for (x, b) in buf.iter_mut().enumerate() {
                *b = self.amps[rest | (x << sub.start)];
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                self.amps[rest | (k << sub.start)] = b * scale;
            }
        }
        Ok(())
    }

    /// `|x⟩ → N_c^{−1/2} Σ_k e^{−2πi kx/N_c} |k⟩` on the qubits in `sub`.
    pub fn qft(&mut self, sub: Range<usize>) -> Result<()> {
        self.fourier(sub, false)
    }

    pub fn inverse_qft(&mut self, sub: Range<usize>) -> Result<()> {
        self.fourier(sub, true)
    }

    /// Apply a permutation of the `sub` field, conditioned on bit `control`.
    fn permute_field(&mut self, sub: &Range<usize>, control: Option<usize>, perm: &[usize]) {
        let field = ((1usize << (sub.end - sub.start)) - 1) << sub.start;
        let mut out = vec![Complex64::ZERO; self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let on = control.map_or(true, |q| i & (1 << q) != 0);
            let j = if on {
                let y = (i & field) >> sub.start;
                (i & !field) | (perm[y] << sub.start)
            } else {
                i
            };
            out[j] = a;
        }
        self.amps = out;
    }

    /// Probability of each value of the `sub` field, summed over the rest.
    pub fn marginal(&self, sub: Range<usize>) -> Result<Vec<f64>> {
        self.check_range(&sub)?;
        let w = sub.end - sub.start;
        let mut p = vec![0.0; 1 << w];
        let mask = (1usize << w) - 1;
        for (i, a) in self.amps.iter().enumerate() {
            p[(i >> sub.start) & mask] += a.norm_sqr();
        }
        Ok(p)
    }
}

/// One stage `|y⟩ → |m·y mod N⟩` for `y < N`, identity on `[N, 2^width)`.
pub fn modmul_stage_permutation(m: u64, n: u64, width: usize) -> Vec<usize> {
    (0..1usize << width)
        .map(|y| if (y as u64) < n { ((m as u128 * y as u128) % n as u128) as usize } else { y })
        .collect()
}

fn bits_for(n: u64) -> usize {
    (64 - (n - 1).leading_zeros()) as usize
}

/// `|x⟩|y⟩ → |x⟩|M^x y mod N⟩` as `n_c` controlled stages with `M_s = M^{2^s}`.
pub fn controlled_modmul(reg: &mut QubitRegister, x: Range<usize>, y: Range<usize>, m: u64, n: u64) -> Result<()> {
    if n < 2 {
        return Err(QmError::InvalidArgument("modulus must be ≥ 2".into()));
    }
    if euclid_gcd(m, n) != 1 {
        return Err(QmError::NotCoprime { m, n });
    }
    reg.check_range(&x)?;
    reg.check_range(&y)?;
    if x.start < y.end && y.start < x.end {
        return Err(QmError::DuplicateIndex(x.start.max(y.start)));
    }
    let width = y.end - y.start;
    if width < bits_for(n) {
        return Err(QmError::InvalidArgument(format!("{width} target qubits cannot hold residues mod {n}")));
    }
    let mut ms = m % n;
    for s in x.clone() {
        let perm = modmul_stage_permutation(ms, n, width);
        reg.permute_field(&y, Some(s), &perm);
        ms = mod_mul(ms, ms, n);
    }
    Ok(())
}

pub fn mod_mul(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, n);
        }
        base = mod_mul(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Remainder iteration `N₃ = N₁ mod N₂`.
pub fn euclid_gcd(a: u64, b: u64) -> u64 {
    let (mut n1, mut n2) = (a, b);
    while n2 != 0 {
        let n3 = n1 % n2;
        n1 = n2;
        n2 = n3;
    }
    n1
}

/// Multiplicative order of `m` modulo `n`, by direct iteration.
pub fn classical_order(m: u64, n: u64) -> Option<u64> {
    if euclid_gcd(m, n) != 1 {
        return None;
    }
    let mut v = m % n;
    for r in 1..=n {
        if v == 1 % n {
            return Some(r);
        }
        v = mod_mul(v, m, n);
    }
    None
}

/// Convergents `p/q` of the continued fraction of `num/den`.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let (mut a, mut b) = (num as u128, den as u128);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut out = Vec::new();
    while b != 0 {
        let t = a / b;
        let p2 = t * p1 + p0;
        let q2 = t * q1 + q0;
        out.push((p2 as u64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (a, b) = (b, a % b);
    }
    out
}

/// Smallest validated period suggested by the sample `k`: each convergent
/// denominator `q < N` of `k/2^{n_c}` is tried together with its multiples
/// below `N`.
pub fn extract_period(k: u64, n_c: usize, n: u64, m: u64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let mut best: Option<u64> = None;
    for (_, q) in convergents(k, 1u64 << n_c) {
        if q == 0 || q >= n {
            continue;
        }
        let mut r = q;
        while r < n {
            if mod_pow(m, r, n) == 1 {
                best = Some(best.map_or(r, |b| b.min(r)));
                break;
            }
            r += q;
        }
    }
    best
}

/// Default control width `2⌈log₂N⌉ + 1`.
pub fn default_control_width(n: u64) -> usize {
    2 * bits_for(n) + 1
}

/// Probability of each control-register outcome after
/// Hadamard → modular exponentiation → Fourier transform.
pub fn period_distribution(n: u64, m: u64, n_c: usize) -> Result<Vec<f64>> {
    let n_y = bits_for(n);
    let mut reg = QubitRegister::basis(n_c + n_y, 1 << n_c)?;
    reg.hadamard_all(0..n_c)?;
    controlled_modmul(&mut reg, 0..n_c, n_c..n_c + n_y, m, n)?;
    reg.qft(0..n_c)?;
    reg.marginal(0..n_c)
}

pub fn sample_index<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let total: f64 = p.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in p.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRun {
    pub samples: Vec<u64>,
    pub r: Option<u64>,
}

/// Sample `k` up to `attempts` times and return the first validated period.
pub fn period_find<R: Rng + ?Sized>(n: u64, m: u64, n_c: usize, attempts: usize, rng: &mut R) -> Result<u64> {
    let run = period_find_run(n, m, n_c, attempts, rng)?;
    run.r.ok_or(QmError::ExtractionFailed(attempts))
}

pub fn period_find_run<R: Rng + ?Sized>(n: u64, m: u64, n_c: usize, attempts: usize, rng: &mut R) -> Result<PeriodRun> {
    let p = period_distribution(n, m, n_c)?;
    let mut samples = Vec::new();
    for _ in 0..attempts {
        let k = sample_index(&p, rng) as u64;
        samples.push(k);
        if let Some(r) = extract_period(k, n_c, n, m) {
            debug_assert_eq!(mod_pow(m, r, n), 1);
            return Ok(PeriodRun { samples, r: Some(r) });
        }
    }
    Ok(PeriodRun { samples, r: None })
}

/// Outcome of one pass through the factoring steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ShorAttempt {
    pub m: u64,
    pub lucky_gcd: Option<u64>,
    pub k: Option<u64>,
    pub r: Option<u64>,
    pub q: Option<u64>,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptOutcome {
    Factored,
    LuckyGcd,
    ExtractionFailed,
    OddPeriod,
    TrivialRoot,
}

impl AttemptOutcome {
    pub fn label(self) -> &'static str {
        match self {
            AttemptOutcome::Factored => "factored",
            AttemptOutcome::LuckyGcd => "lucky-gcd",
            AttemptOutcome::ExtractionFailed => "extraction-failed",
            AttemptOutcome::OddPeriod => "odd-period",
            AttemptOutcome::TrivialRoot => "trivial-root",
        }
    }
}

/// How the factors were obtained when the quantum routine was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalShortcut {
    Even,
    PrimePower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShorRun {
    pub n: u64,
    pub n_c: usize,
    pub shortcut: Option<ClassicalShortcut>,
    pub attempts: Vec<ShorAttempt>,
    pub factors: Option<(u64, u64)>,
}

impl ShorRun {
    pub fn result(&self) -> Result<(u64, u64)> {
        self.factors.ok_or(QmError::RetriesExhausted(self.attempts.len()))
    }
}

fn integer_root(n: u64, b: u32) -> u64 {
    let mut r = (n as f64).powf(1.0 / b as f64).round() as u64;
    while r > 1 && (r as u128).pow(b) > n as u128 {
        r -= 1;
    }
    while ((r + 1) as u128).pow(b) <= n as u128 {
        r += 1;
    }
    r
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `n = p^b` with `b ≥ 2`, if any.
pub fn prime_power_base(n: u64) -> Option<u64> {
    for b in 2..64u32 {
        let r = integer_root(n, b);
        if r < 2 {
            break;
        }
        if (r as u128).pow(b) == n as u128 {
            return Some(r);
        }
    }
    None
}

fn one_attempt<R: Rng + ?Sized>(n: u64, m: u64, n_c: usize, rng: &mut R) -> Result<ShorAttempt> {
    let mut at = ShorAttempt { m, lucky_gcd: None, k: None, r: None, q: None, outcome: AttemptOutcome::ExtractionFailed };
    let g = euclid_gcd(m, n);
    if g != 1 {
        at.lucky_gcd = Some(g);
        at.outcome = AttemptOutcome::LuckyGcd;
        return Ok(at);
    }
    let run = period_find_run(n, m, n_c, 1, rng)?;
    at.k = run.samples.first().copied();
    let Some(r) = run.r else { return Ok(at) };
    at.r = Some(r);
    if r % 2 == 1 {
        at.outcome = AttemptOutcome::OddPeriod;
        return Ok(at);
    }
    let q = mod_pow(m, r / 2, n);
    at.q = Some(q);
    at.outcome = if q == 1 || q == n - 1 { AttemptOutcome::TrivialRoot } else { AttemptOutcome::Factored };
    Ok(at)
}

fn attempt_factors(n: u64, at: &ShorAttempt) -> Option<(u64, u64)> {
    let p = match at.outcome {
        AttemptOutcome::LuckyGcd => at.lucky_gcd?,
        AttemptOutcome::Factored => {
            let q = at.q?;
            let g = euclid_gcd(q - 1, n);
            if g > 1 && g < n {
                g
            } else {
                euclid_gcd(q + 1, n)
            }
        }
        _ => return None,
    };
    (p > 1 && p < n).then(|| (p.min(n / p), p.max(n / p)))
}

fn validate_composite(n: u64) -> Result<()> {
    if n < 4 || is_prime(n) {
        return Err(QmError::InvalidArgument(format!("{n} is not composite")));
    }
    Ok(())
}

fn classical_shortcut(n: u64, n_c: usize) -> Option<ShorRun> {
    let (shortcut, p) = if n % 2 == 0 {
        (ClassicalShortcut::Even, 2)
    } else {
        (ClassicalShortcut::PrimePower, prime_power_base(n)?)
    };
    Some(ShorRun { n, n_c, shortcut: Some(shortcut), attempts: Vec::new(), factors: Some((p.min(n / p), p.max(n / p))) })
}

/// Full pipeline with random bases `M ∈ [2, N−1]`, at most `retries` attempts.
pub fn shor_factor<R: Rng + ?Sized>(n: u64, retries: usize, rng: &mut R) -> Result<ShorRun> {
    validate_composite(n)?;
    let n_c = default_control_width(n);
    if let Some(run) = classical_shortcut(n, n_c) {
        return Ok(run);
    }
    let mut run = ShorRun { n, n_c, shortcut: None, attempts: Vec::new(), factors: None };
    for _ in 0..retries {
        let m = rng.random_range(2..n);
        let at = one_attempt(n, m, n_c, rng)?;
        let f = attempt_factors(n, &at);
        run.attempts.push(at);
        if f.is_some() {
            run.factors = f;
            break;
        }
    }
    Ok(run)
}

/// Pipeline with a fixed base `M`; only the sampling is random.
pub fn shor_with_base<R: Rng + ?Sized>(n: u64, m: u64, retries: usize, rng: &mut R) -> Result<ShorRun> {
    validate_composite(n)?;
    if m < 2 || m >= n {
        return Err(QmError::InvalidArgument(format!("base {m} must lie in [2, {n})")));
    }
    let n_c = default_control_width(n);
    let mut run = ShorRun { n, n_c, shortcut: None, attempts: Vec::new(), factors: None };
    for _ in 0..retries {
        let at = one_attempt(n, m, n_c, rng)?;
        let f = attempt_factors(n, &at);
        let terminal = matches!(at.outcome, AttemptOutcome::OddPeriod | AttemptOutcome::TrivialRoot);
        run.attempts.push(at);
        if f.is_some() {
            run.factors = f;
            break;
        }
        if terminal {
            break;
        }
    }
    Ok(run)
}

/// Modular inverse by the extended Euclid algorithm.
pub fn mod_inverse(a: u64, modulus: u64) -> Result<u64> {
    let (mut r0, mut r1) = (modulus as i128, (a % modulus) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(QmError::NoInverse { a, modulus });
    }
    Ok(t0.rem_euclid(modulus as i128) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsaRun {
    pub n: u64,
    pub b: u64,
    pub encrypted: u64,
    pub recovered: u64,
}

/// `B = A^a mod N`, decoded with `b = a⁻¹ mod (p−1)(q−1)`.
pub fn rsa_roundtrip(p: u64, q: u64, a: u64, message: u64) -> Result<RsaRun> {
    if !is_prime(p) || !is_prime(q) {
        return Err(QmError::InvalidArgument(format!("{p} and {q} must both be prime")));
    }
    let n = p * q;
    if message >= n {
        return Err(QmError::InvalidArgument(format!("message {message} must be below N = {n}")));
    }
    let phi = (p - 1) * (q - 1);
    let b = mod_inverse(a, phi)?;
    let encrypted = mod_pow(message, a, n);
    let recovered = mod_pow(encrypted, b, n);
    Ok(RsaRun { n, b, encrypted, recovered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &Gate2, b: &Gate2) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() < 1e-15))
    }

    fn random_register(n: usize, seed: u64) -> QubitRegister {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        QubitRegister::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn hadamard_on_zero() {
        let mut r = QubitRegister::new(1).unwrap();
        r.apply_gate(Gate::H, 0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.amplitudes()[0] - cr(s)).norm() < 1e-16);
        assert!((r.amplitudes()[1] - cr(s)).norm() < 1e-16);
    }

    #[test]
    fn gate_identities() {
        let id = [[cr(1.0), cr(0.0)], [cr(0.0), cr(1.0)]];
        for g in [Gate::X, Gate::Y, Gate::Z, Gate::H] {
            assert!(close(&mat2_mul(&g.matrix(), &g.matrix()), &id));
        }
        assert!(close(&mat2_mul(&Gate::T.matrix(), &Gate::T.matrix()), &Gate::S.matrix()));
        assert!(close(&mat2_mul(&Gate::S.matrix(), &Gate::S.matrix()), &Gate::Z.matrix()));
        let r2 = mat2_mul(&Gate::R.matrix(), &Gate::R.matrix());
        let r4 = mat2_mul(&r2, &r2);
        assert!(close(&r4, &[[cr(-1.0), cr(0.0)], [cr(0.0), cr(-1.0)]]));
        let ir2 = r2.map(|row| row.map(|z| z * c(0.0, 1.0)));
        assert!(close(&ir2, &Gate::Y.matrix()));

        let start = random_register(4, 1);
        for g in [Gate::X, Gate::Y, Gate::Z, Gate::H] {
            let mut r = start.clone();
            r.apply_gate(g, 2).unwrap();
            r.apply_gate(g, 2).unwrap();
            assert!((r.overlap(&start) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn index_errors() {
        let mut r = QubitRegister::new(2).unwrap();
        assert!(matches!(r.apply_gate(Gate::X, 2), Err(QmError::IndexOutOfRange { .. })));
        assert!(matches!(r.cnot(1, 1), Err(QmError::DuplicateIndex(1))));
    }

    #[test]
    fn cnot_and_toffoli() {
        // |x₁x₂⟩ with x₁ the control held in qubit 1
        let mut r = QubitRegister::basis(2, 0b10).unwrap();
        r.cnot(1, 0).unwrap();
        assert_eq!(r.probabilities()[0b11], 1.0);
        for x in 0..4usize {
            let mut r = QubitRegister::basis(3, x).unwrap();
            r.toffoli(0, 1, 2).unwrap();
            let and = (x & 1) & (x >> 1);
            assert_eq!(r.probabilities()[x | (and << 2)], 1.0);
        }
    }

    #[test]
    fn swap_matches_permutation() {
        for x in 0..4usize {
            let mut r = QubitRegister::basis(2, x).unwrap();
            r.swap_via_cnots(0, 1).unwrap();
            let swapped = ((x & 1) << 1) | (x >> 1);
            assert_eq!(r.probabilities()[swapped], 1.0);
        }
        let start = random_register(3, 2);
        let mut r = start.clone();
        r.swap_via_cnots(0, 2).unwrap();
        for (i, a) in r.amplitudes().iter().enumerate() {
            let j = (i & 0b010) | ((i & 1) << 2) | ((i >> 2) & 1);
            assert_eq!(*a, start.amplitudes()[j]);
        }
    }

    #[test]
    fn hadamard_transform() {
        let mut r = QubitRegister::new(4).unwrap();
        r.hadamard_all(0..4).unwrap();
        assert!(r.amplitudes().iter().all(|a| (a - cr(0.25)).norm() < 1e-15));
        r.hadamard_all(0..4).unwrap();
        assert!((r.amplitudes()[0] - cr(1.0)).norm() < 1e-14);
        let x = 0b1011usize;
        let mut r = QubitRegister::basis(4, x).unwrap();
        r.hadamard_all(0..4).unwrap();
        for (k, a) in r.amplitudes().iter().enumerate() {
            let sign = if (k & x).count_ones() % 2 == 0 { 0.25 } else { -0.25 };
            assert!((a - cr(sign)).norm() < 1e-15);
        }
    }

    #[test]
    fn qft_examples() {
        let start = random_register(1, 3);
        let mut a = start.clone();
        a.qft(0..1).unwrap();
        let mut b = start.clone();
        b.apply_gate(Gate::H, 0).unwrap();
        assert!((a.overlap(&b) - 1.0).abs() < 1e-14);

        let start = random_register(6, 4);
        let mut r = start.clone();
        r.qft(1..5).unwrap();
        r.inverse_qft(1..5).unwrap();
        assert!(r.amplitudes().iter().zip(start.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-14));

        // period-4 comb on 16 points against the direct sum
        let nc = 16usize;
        let comb: Vec<Complex64> = (0..nc).map(|x| if x % 4 == 1 { cr(1.0) } else { cr(0.0) }).collect();
        let mut r = QubitRegister::from_amplitudes(comb.clone()).unwrap();
        r.qft(0..4).unwrap();
        for k in 0..nc {
            let direct: Complex64 = (0..nc)
                .map(|x| comb[x] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * x) as f64 / nc as f64))
                .sum::<Complex64>()
                / (nc as f64).sqrt()
                / 2.0;
            assert!((r.amplitudes()[k] - direct).norm() < 1e-14);
            if k % 4 != 0 {
                assert!(r.amplitudes()[k].norm() < 1e-14);
            }
        }
    }

    #[test]
    fn modmul_examples() {
        let n_c = 3;
        let y0 = 1usize << n_c;
        let mut r = QubitRegister::basis(n_c + 4, y0).unwrap();
        controlled_modmul(&mut r, 0..n_c, n_c..n_c + 4, 7, 15).unwrap();
        assert_eq!(r.probabilities()[y0], 1.0);
        let mut r = QubitRegister::basis(n_c + 4, 2 | y0).unwrap();
        controlled_modmul(&mut r, 0..n_c, n_c..n_c + 4, 7, 15).unwrap();
        assert_eq!(r.probabilities()[2 | (4 << n_c)], 1.0);
        let mut r = QubitRegister::new(7).unwrap();
        assert!(matches!(controlled_modmul(&mut r, 0..3, 3..7, 6, 15), Err(QmError::NotCoprime { .. })));
        let mut p = modmul_stage_permutation(7, 15, 4);
        p.sort_unstable();
        assert_eq!(p, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(euclid_gcd(15, 6), 3);
        assert_eq!(euclid_gcd(13, 7), 1);
        assert_eq!(euclid_gcd(48, 18), 6);
    }

    #[test]
    fn orders() {
        assert_eq!(classical_order(7, 15), Some(4));
        assert_eq!(classical_order(4, 15), Some(2));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(period_find(15, 7, 8, 32, &mut rng).unwrap(), 4);
        assert_eq!(period_find(15, 4, 8, 32, &mut rng).unwrap(), 2);
    }

    #[test]
    fn distribution_peaks() {
        let p = period_distribution(15, 7, 8).unwrap();
        for (k, w) in p.iter().enumerate() {
            if k % 64 == 0 {
                assert!((w - 0.25).abs() < 1e-12);
            } else {
                assert!(*w < 1e-12);
            }
        }
    }

    #[test]
    fn convergent_expansion() {
        assert_eq!(convergents(3, 8), vec![(0, 1), (1, 2), (1, 3), (3, 8)]);
        assert_eq!(extract_period(192, 8, 15, 7), Some(4));
        assert_eq!(extract_period(0, 8, 15, 7), None);
    }

    #[test]
    fn shor_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let run = shor_with_base(15, 7, 8, &mut rng).unwrap();
        assert_eq!(run.result().unwrap(), (3, 5));
        let last = run.attempts.last().unwrap();
        assert_eq!((last.r, last.q), (Some(4), Some(4)));

        let run = shor_with_base(21, 2, 8, &mut rng).unwrap();
        assert_eq!(run.result().unwrap(), (3, 7));
        assert_eq!(run.attempts.last().unwrap().q, Some(8));

        let run = shor_with_base(35, 10, 1, &mut rng).unwrap();
        assert_eq!(run.attempts[0].outcome, AttemptOutcome::LuckyGcd);
        assert_eq!(run.result().unwrap(), (5, 7));

        assert_eq!(shor_factor(49, 4, &mut rng).unwrap().shortcut, Some(ClassicalShortcut::PrimePower));
        assert!(shor_factor(13, 4, &mut rng).is_err());
    }

    #[test]
    fn rsa_examples() {
        let run = rsa_roundtrip(3, 11, 3, 5).unwrap();
        assert_eq!((run.n, run.b, run.encrypted, run.recovered), (33, 7, 26, 5));
        assert_eq!(rsa_roundtrip(3, 11, 3, 0).unwrap().encrypted, 0);
        assert_eq!(rsa_roundtrip(3, 11, 3, 1).unwrap().encrypted, 1);
        assert!(matches!(rsa_roundtrip(3, 11, 5, 2), Err(QmError::NoInverse { .. })));
    }
}
