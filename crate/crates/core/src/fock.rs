//! Occupation-number (Fock) spaces, many-body operators, the two-site
//! Bose-Hubbard dimer, bipartite entanglement, Bell correlations and
//! projective measurement.
//!
//! Orbitals are indexed from 0. Fermion operators carry the sign string
//! `(−1)^{Σ_{s>r} n_s}` over the orbitals *above* `r`; many texts use `s < r`
//! instead, which flips the sign of some off-diagonal matrix elements.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::angular::build_spin_rep;
use crate::error::{QmError, Result};
use crate::numeric::{self, c, cr, ComplexMatrix};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Boson,
    Fermion,
}

/// Truncation rule that defined a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Every allowed occupation up to a per-orbital cap.
    Capped(u32),
    /// Fixed total particle number.
    Fixed(u32),
}

/// Ordered list of occupation tuples. Enumeration is lexicographic with
/// orbital 0 running fastest.
#[derive(Debug, Clone)]
pub struct FockBasis {
    m: usize,
    statistics: Statistics,
    sector: Sector,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockBasis {
    fn enumerate(m: usize, statistics: Statistics, sector: Sector) -> Self {
        let radix = match (statistics, sector) {
            (Statistics::Fermion, _) => 2,
            (Statistics::Boson, Sector::Capped(cap)) => cap + 1,
            (Statistics::Boson, Sector::Fixed(n)) => n + 1,
        };
        let mut states = Vec::new();
        let mut occ = vec![0u32; m];
        loop {
            let keep = match sector {
                Sector::Fixed(n) => occ.iter().sum::<u32>() == n,
                Sector::Capped(_) => true,
            };
            if keep {
                states.push(occ.clone());
            }
            // odometer, orbital 0 fastest
            let mut r = 0;
            while r < m {
                occ[r] += 1;
                if occ[r] < radix {
                    break;
                }
                occ[r] = 0;
                r += 1;
            }
            if r == m {
                break;
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        FockBasis { m, statistics, sector, states, index }
    }

    /// All `2^M` fermionic occupations.
    pub fn fermions(m: usize) -> Self {
        Self::enumerate(m, Statistics::Fermion, Sector::Capped(1))
    }

    /// Fermions with exactly `n` particles.
    pub fn fermions_n(m: usize, n: u32) -> Self {
        Self::enumerate(m, Statistics::Fermion, Sector::Fixed(n))
    }

    /// Bosons with exactly `n` particles.
    pub fn bosons_n(m: usize, n: u32) -> Self {
        Self::enumerate(m, Statistics::Boson, Sector::Fixed(n))
    }

    /// Bosons with at most `cap` quanta per orbital.
    pub fn bosons_capped(m: usize, cap: u32) -> Self {
        Self::enumerate(m, Statistics::Boson, Sector::Capped(cap))
    }

    pub fn orbitals(&self) -> usize {
        self.m
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Basis vector for an occupation tuple.
    pub fn ket(&self, occ: &[u32]) -> Option<DVector<Complex64>> {
        let i = self.index_of(occ)?;
        let mut v = DVector::zeros(self.dim());
        v[i] = cr(1.0);
        Some(v)
    }

    fn sign_above(&self, occ: &[u32], r: usize) -> f64 {
        match self.statistics {
            Statistics::Boson => 1.0,
            Statistics::Fermion => {
                if occ[r + 1..].iter().sum::<u32>() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Apply `a_r` to an occupation tuple in place; returns the amplitude.
    fn annihilate(&self, occ: &mut [u32], r: usize) -> Option<f64> {
        let n = occ[r];
        if n == 0 {
            return None;
        }
        let amp = match self.statistics {
            Statistics::Boson => (n as f64).sqrt(),
            Statistics::Fermion => self.sign_above(occ, r),
        };
        occ[r] -= 1;
        Some(amp)
    }

    /// Apply `a_r†` to an occupation tuple in place; returns the amplitude.
    fn create(&self, occ: &mut [u32], r: usize) -> Option<f64> {
        let n = occ[r];
        let amp = match self.statistics {
            Statistics::Boson => ((n + 1) as f64).sqrt(),
            Statistics::Fermion => {
                if n == 1 {
                    return None;
                }
                self.sign_above(occ, r)
            }
        };
        occ[r] += 1;
        Some(amp)
    }

    fn check_orbital(&self, r: usize) -> Result<()> {
        if r >= self.m {
            return Err(QmError::IndexOutOfRange { index: r, n: self.m });
        }
        Ok(())
    }
}

/// Matrices of `a_r` and `a_r†` on the basis. Terms leaving the basis are
/// dropped, so on truncated boson sectors the canonical algebra only holds on
/// interior states.
pub fn ladder(basis: &FockBasis, r: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    basis.check_orbital(r)?;
    let d = basis.dim();
    let mut a = ComplexMatrix::zeros(d, d);
    for (j, s) in basis.states.iter().enumerate() {
        let mut occ = s.clone();
        if let Some(amp) = basis.annihilate(&mut occ, r) {
            if let Some(i) = basis.index_of(&occ) {
                a[(i, j)] = cr(amp);
            }
        }
    }
    let adag = a.adjoint();
    Ok((a, adag))
}

/// Rectangular `a_r` from one basis into another, e.g. from the N-particle to
/// the (N−1)-particle sector; its adjoint is `a_r†` in the reverse direction.
pub fn ladder_between(from: &FockBasis, to: &FockBasis, r: usize) -> Result<ComplexMatrix> {
    from.check_orbital(r)?;
    if to.m != from.m || to.statistics != from.statistics {
        return Err(QmError::DimensionMismatch("bases describe different systems".into()));
    }
    let mut a = ComplexMatrix::zeros(to.dim(), from.dim());
    for (j, s) in from.states.iter().enumerate() {
        let mut occ = s.clone();
        if let Some(amp) = from.annihilate(&mut occ, r) {
            if let Some(i) = to.index_of(&occ) {
                a[(i, j)] = cr(amp);
            }
        }
    }
    Ok(a)
}

/// `V = Σ a_{k'}† V_{k'k} a_k`, applied symbolically on each occupation tuple.
pub fn one_body_operator(basis: &FockBasis, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.nrows() != basis.m || h.ncols() != basis.m {
        return Err(QmError::DimensionMismatch(format!(
            "one-body matrix is {}x{}, basis has {} orbitals",
            h.nrows(),
            h.ncols(),
            basis.m
        )));
    }
    numeric::check_hermitian(h)?;
    let d = basis.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (j, s) in basis.states.iter().enumerate() {
        for k in 0..basis.m {
            let mut occ = s.clone();
            let Some(a1) = basis.annihilate(&mut occ, k) else { continue };
            for kp in 0..basis.m {
                let hv = h[(kp, k)];
                if hv == Complex64::ZERO {
                    continue;
                }
                let mut o2 = occ.clone();
                let Some(a2) = basis.create(&mut o2, kp) else { continue };
                if let Some(i) = basis.index_of(&o2) {
                    out[(i, j)] += hv * (a1 * a2);
                }
            }
        }
    }
    Ok(out)
}

/// Two-body matrix elements `U_{k'l',kl}` on `M` orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyTensor {
    m: usize,
    data: Vec<Complex64>,
}

impl TwoBodyTensor {
    pub fn zeros(m: usize) -> Self {
        TwoBodyTensor { m, data: vec![Complex64::ZERO; m.pow(4)] }
    }

    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Complex64) -> Self {
        let mut t = Self::zeros(m);
        for kp in 0..m {
            for lp in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        t.set(kp, lp, k, l, f(kp, lp, k, l));
                    }
                }
            }
        }
        t
    }

    /// Density-density interaction `U_{k'l',kl} = v_{kl} δ_{k'k} δ_{l'l}`.
    pub fn density_density(v: &DMatrix<f64>) -> Self {
        let m = v.nrows();
        Self::from_fn(m, |kp, lp, k, l| if kp == k && lp == l { cr(v[(k, l)]) } else { Complex64::ZERO })
    }

    /// Random tensor projected onto the exchange and Hermitian symmetries.
    pub fn random_symmetric<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let raw = Self::from_fn(m, |_, _, _, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        Self::from_fn(m, |kp, lp, k, l| {
            let a = raw.get(kp, lp, k, l);
            let b = raw.get(lp, kp, l, k);
            let h = raw.get(k, l, kp, lp).conj();
            let ph = raw.get(l, k, lp, kp).conj();
            (a + b + h + ph) * 0.25
        })
    }

    pub fn orbitals(&self) -> usize {
        self.m
    }

    fn offset(&self, kp: usize, lp: usize, k: usize, l: usize) -> usize {
        ((kp * self.m + lp) * self.m + k) * self.m + l
    }

    pub fn get(&self, kp: usize, lp: usize, k: usize, l: usize) -> Complex64 {
        self.data[self.offset(kp, lp, k, l)]
    }

    pub fn set(&mut self, kp: usize, lp: usize, k: usize, l: usize, v: Complex64) {
        let o = self.offset(kp, lp, k, l);
        self.data[o] = v;
    }

    /// Largest violation of `U_{k'l',kl} = U_{l'k',lk}` and
    /// `U_{k'l',kl} = conj(U_{kl,k'l'})`.
    pub fn symmetry_deviation(&self) -> f64 {
        let m = self.m;
        let mut dev = 0.0_f64;
        for kp in 0..m {
            for lp in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let u = self.get(kp, lp, k, l);
                        dev = dev.max((u - self.get(lp, kp, l, k)).norm());
                        dev = dev.max((u - self.get(k, l, kp, lp).conj()).norm());
                    }
                }
            }
        }
        dev
    }
}

/// `U = ½ Σ a_{k'}† a_{l'}† U_{k'l',kl} a_l a_k`.
pub fn two_body_operator(basis: &FockBasis, u: &TwoBodyTensor) -> Result<ComplexMatrix> {
    if u.m != basis.m {
        return Err(QmError::DimensionMismatch(format!(
            "tensor has {} orbitals, basis has {}",
            u.m, basis.m
        )));
    }
    let dev = u.symmetry_deviation();
    if dev > SYMMETRY_TOL {
        return Err(QmError::SymmetryViolation(format!("max deviation {dev:.3e}")));
    }
    let m = basis.m;
    let d = basis.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (j, s) in basis.states.iter().enumerate() {
        for k in 0..m {
            let mut o1 = s.clone();
            let Some(a1) = basis.annihilate(&mut o1, k) else { continue };
            for l in 0..m {
                let mut o2 = o1.clone();
                let Some(a2) = basis.annihilate(&mut o2, l) else { continue };
                for lp in 0..m {
                    let mut o3 = o2.clone();
                    let Some(a3) = basis.create(&mut o3, lp) else { continue };
                    for kp in 0..m {
                        let uv = u.get(kp, lp, k, l);
                        if uv == Complex64::ZERO {
                            continue;
                        }
                        let mut o4 = o3.clone();
                        let Some(a4) = basis.create(&mut o4, kp) else { continue };
                        if let Some(i) = basis.index_of(&o4) {
                            out[(i, j)] += uv * (0.5 * a1 * a2 * a3 * a4);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Energy of a single Slater determinant: `½ Σ_{k,l∈R} (U_{kl,kl} − U_{lk,kl})`.
pub fn slater_expectation(occupied: &[usize], u: &TwoBodyTensor) -> f64 {
    let mut sum = Complex64::ZERO;
    for &k in occupied {
        for &l in occupied {
            sum += u.get(k, l, k, l) - u.get(l, k, k, l);
        }
    }
    0.5 * sum.re
}

/// Occupation tuple with the listed orbitals filled.
pub fn slater_occupation(m: usize, occupied: &[usize]) -> Vec<u32> {
    let mut occ = vec![0; m];
    for &r in occupied {
        occ[r] = 1;
    }
    occ
}

/// Bose-Hubbard dimer with site energies `∓ε/2`, interaction `U` and hopping `K`.
#[derive(Debug, Clone)]
pub struct Dimer {
    pub n: u32,
    /// Hamiltonian in the `|n₁⟩` basis, `n₁ = N, N−1, …, 0`.
    pub hamiltonian: ComplexMatrix,
    /// `U(N²/4 − N/2)`, the offset between the site form and `UJz² − εJz − KJx`.
    pub constant: f64,
}

/// Site-form Hamiltonian from ladder operators:
/// `Σ_i [ε_i n_i + (U/2) n_i(n_i − 1)] − (K/2)(a₂†a₁ + a₁†a₂)`.
pub fn dimer_from_ladders(n: u32, u: f64, k: f64, eps: f64) -> Result<ComplexMatrix> {
    let s0 = FockBasis::bosons_n(2, n);
    let s1 = FockBasis::bosons_n(2, n - 1);
    let a1 = ladder_between(&s0, &s1, 0)?;
    let a2 = ladder_between(&s0, &s1, 1)?;
    let n1 = a1.adjoint() * &a1;
    let n2 = a2.adjoint() * &a2;
    let one = numeric::identity(s0.dim());
    let eps_i = [-0.5 * eps, 0.5 * eps];
    let mut h = &n1 * cr(eps_i[0]) + &n2 * cr(eps_i[1]);
    h += &n1 * (&n1 - &one) * cr(0.5 * u);
    h += &n2 * (&n2 - &one) * cr(0.5 * u);
    h -= (a2.adjoint() * &a1 + a1.adjoint() * &a2) * cr(0.5 * k);
    Ok(h)
}

/// Spin-`N/2` form `U Jz² − ε Jz − K Jx` (no constant).
pub fn dimer_from_spin(n: u32, u: f64, k: f64, eps: f64) -> ComplexMatrix {
    let rep = build_spin_rep(n);
    &rep.jz * &rep.jz * cr(u) - &rep.jz * cr(eps) - &rep.jx * cr(k)
}

/// Builds both forms, checks they agree after the constant shift and returns
/// the ladder-built matrix.
pub fn bose_hubbard_dimer(n: u32, u: f64, k: f64, eps: f64) -> Result<Dimer> {
    if n == 0 {
        return Err(QmError::InvalidArgument("dimer needs N ≥ 1".into()));
    }
    let h = dimer_from_ladders(n, u, k, eps)?;
    let nf = n as f64;
    let constant = u * (nf * nf / 4.0 - nf / 2.0);
    let spin = dimer_from_spin(n, u, k, eps) + numeric::identity(h.nrows()) * cr(constant);
    let scale = 1.0 + u.abs() * nf * nf + k.abs() * nf + eps.abs() * nf;
    let dev = numeric::max_abs(&(&h - &spin));
    if dev > 1e-13 * scale {
        return Err(QmError::NoConvergence(format!("dimer constructions differ by {dev:.3e}")));
    }
    Ok(Dimer { n, hamiltonian: h, constant })
}

#[derive(Debug, Clone)]
pub struct DimerObservables {
    /// Polarization `⟨S⟩ = (2/N)⟨J⟩`.
    pub polarization: [f64; 3],
    /// One-body matrix `½(1 + ⟨S⟩·σ)` in the site basis.
    pub rho1: ComplexMatrix,
    pub one_body_purity: f64,
}

pub fn dimer_observables(state: &DVector<Complex64>, n: u32) -> Result<DimerObservables> {
    let rep = build_spin_rep(n);
    if state.len() != rep.dim() {
        return Err(QmError::DimensionMismatch(format!(
            "state has {} entries, N = {n} sector has {}",
            state.len(),
            rep.dim()
        )));
    }
    let ev = |op: &ComplexMatrix| (state.adjoint() * op * state)[(0, 0)].re;
    let f = 2.0 / n as f64;
    let s = [f * ev(&rep.jx), f * ev(&rep.jy), f * ev(&rep.jz)];
    let rho1 = ComplexMatrix::from_row_slice(
        2,
        2,
        &[c(0.5 * (1.0 + s[2]), 0.0), c(0.5 * s[0], -0.5 * s[1]), c(0.5 * s[0], 0.5 * s[1]), c(0.5 * (1.0 - s[2]), 0.0)],
    );
    let one_body_purity = 0.5 * (1.0 + s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    Ok(DimerObservables { polarization: s, rho1, one_body_purity })
}

/// Pure state of a bipartite system, `Ψ_{iα}` with `i` in A and `α` in B.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    pub psi: ComplexMatrix,
}

pub use crate::numeric::Keep;

impl BipartiteState {
    pub fn new(psi: ComplexMatrix) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QmError::InvalidArgument(format!("state norm {norm} is not 1")));
        }
        Ok(BipartiteState { psi })
    }

    pub fn normalized(psi: ComplexMatrix) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(QmError::InvalidArgument("zero state".into()));
        }
        Ok(BipartiteState { psi: psi / cr(norm) })
    }

    /// From a vector in the product basis `i·N_B + α`.
    pub fn from_vector(na: usize, nb: usize, v: &DVector<Complex64>) -> Result<Self> {
        if v.len() != na * nb {
            return Err(QmError::DimensionMismatch(format!("{} != {na}·{nb}", v.len())));
        }
        Self::new(ComplexMatrix::from_fn(na, nb, |i, a| v[i * nb + a]))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.psi.nrows(), self.psi.ncols())
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        let (na, nb) = self.dims();
        DVector::from_fn(na * nb, |k, _| self.psi[(k / nb, k % nb)])
    }

    pub fn reduce(&self, keep: Keep) -> ComplexMatrix {
        match keep {
            Keep::A => &self.psi * self.psi.adjoint(),
            Keep::B => self.psi.transpose() * self.psi.map(|z| z.conj()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Weights `p_r`, descending, zero weights dropped.
    pub p: Vec<f64>,
    pub a_vectors: Vec<DVector<Complex64>>,
    pub b_vectors: Vec<DVector<Complex64>>,
}

impl Schmidt {
    /// `Σ √p_r |a_r⟩⊗|b_r⟩` as an `N_A × N_B` matrix.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let na = self.a_vectors.first().map_or(0, |v| v.len());
        let nb = self.b_vectors.first().map_or(0, |v| v.len());
        let mut out = ComplexMatrix::zeros(na, nb);
        for ((p, a), b) in self.p.iter().zip(&self.a_vectors).zip(&self.b_vectors) {
            out += a * b.transpose() * cr(p.sqrt());
        }
        out
    }
}

fn first_nonzero(v: &DVector<Complex64>) -> usize {
    v.iter().position(|z| z.norm() > 1e-12).unwrap_or(v.len())
}

/// Schmidt decomposition from the singular values of `Ψ`. Each A-vector is
/// rephased so its first non-negligible component is real positive; equal
/// weights are ordered by the position of that component.
pub fn schmidt(state: &BipartiteState) -> Schmidt {
    let svd = state.psi.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut terms: Vec<(f64, DVector<Complex64>, DVector<Complex64>)> = Vec::new();
    for (r, &s) in svd.singular_values.iter().enumerate() {
        let p = s * s;
        if p < 1e-14 {
            continue;
        }
        let mut a: DVector<Complex64> = u.column(r).into_owned();
        let mut b: DVector<Complex64> = v_t.row(r).transpose();
        let i0 = first_nonzero(&a);
        if i0 < a.len() {
            let ph = a[i0] / a[i0].norm();
            a /= ph;
            b *= ph;
        }
        terms.push((p, a, b));
    }
    terms.sort_by(|x, y| {
        if (x.0 - y.0).abs() > 1e-12 {
            y.0.total_cmp(&x.0)
        } else {
            first_nonzero(&x.1).cmp(&first_nonzero(&y.1))
        }
    });
    let mut out = Schmidt { p: Vec::new(), a_vectors: Vec::new(), b_vectors: Vec::new() };
    for (p, a, b) in terms {
        out.p.push(p);
        out.a_vectors.push(a);
        out.b_vectors.push(b);
    }
    out
}

/// Von Neumann entropy `−tr ρ ln ρ` in nats, with `0 ln 0 = 0`.
pub fn entropy(rho: &ComplexMatrix) -> Result<f64> {
    let ev = numeric::hermitian_eigenvalues(rho)?;
    Ok(ev.iter().filter(|&&p| p > 1e-300).map(|&p| -p * p.ln()).sum())
}

pub fn purity(rho: &ComplexMatrix) -> f64 {
    (rho * rho).trace().re
}

/// `σ_θ = cos θ σ_z + sin θ σ_x`.
pub fn spin_along(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[cr(theta.cos()), cr(theta.sin()), cr(theta.sin()), cr(-theta.cos())])
}

/// `(|↑↓⟩ − |↓↑⟩)/√2` in the product basis `(↑↑, ↑↓, ↓↑, ↓↓)`.
pub fn singlet() -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DVector::from_vec(vec![cr(0.0), cr(s), cr(-s), cr(0.0)])
}

/// `⟨σ_{θA} ⊗ σ_{θB}⟩` in the singlet; angles in radians.
pub fn singlet_correlation(theta_a: f64, theta_b: f64) -> f64 {
    let op = numeric::kron(&spin_along(theta_a), &spin_along(theta_b));
    let psi = singlet();
    (psi.adjoint() * op * &psi)[(0, 0)].re
}

/// `C(A,B) + C(A,B') + C(A',B) − C(A',B')` (signed).
pub fn chsh(theta_a: f64, theta_b: f64, theta_a2: f64, theta_b2: f64) -> f64 {
    singlet_correlation(theta_a, theta_b) + singlet_correlation(theta_a, theta_b2)
        + singlet_correlation(theta_a2, theta_b)
        - singlet_correlation(theta_a2, theta_b2)
}

/// Projector `|v⟩⟨v|` for a normalized vector.
pub fn projector(v: &DVector<Complex64>) -> ComplexMatrix {
    v * v.adjoint()
}

/// Projective measurement: outcome probabilities `tr(PρP)` and the
/// non-selective post-measurement state `Σ PρP`.
pub fn measure(rho: &ComplexMatrix, projectors: &[ComplexMatrix]) -> Result<(Vec<f64>, ComplexMatrix)> {
    let d = rho.nrows();
    if projectors.is_empty() {
        return Err(QmError::IncompleteProjectors(1.0));
    }
    let mut dev = 0.0_f64;
    let mut sum = ComplexMatrix::zeros(d, d);
    for (a, p) in projectors.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(QmError::DimensionMismatch(format!("projector {a} has wrong shape")));
        }
        dev = dev.max(numeric::hermitian_deviation(p));
        dev = dev.max(numeric::max_abs(&(p * p - p)));
        for q in &projectors[a + 1..] {
            dev = dev.max(numeric::max_abs(&(p * q)));
        }
        sum += p;
    }
    dev = dev.max(numeric::max_abs(&(sum - numeric::identity(d))));
    if dev > 1e-10 {
        return Err(QmError::IncompleteProjectors(dev));
    }
    let mut post = ComplexMatrix::zeros(d, d);
    let mut probs = Vec::with_capacity(projectors.len());
    for p in projectors {
        let block = p * rho * p;
        probs.push(block.trace().re);
        post += block;
    }
    Ok((probs, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

    fn apply(m: &ComplexMatrix, basis: &FockBasis, occ: &[u32]) -> DVector<Complex64> {
        m * basis.ket(occ).unwrap()
    }

    #[test]
    fn enumeration_order() {
        let b = FockBasis::bosons_n(2, 3);
        assert_eq!(b.states(), &[vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        let f = FockBasis::fermions(2);
        assert_eq!(f.states(), &[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(FockBasis::fermions_n(5, 3).dim(), 10);
        assert_eq!(FockBasis::bosons_capped(3, 2).dim(), 27);
    }

    #[test]
    fn boson_lowering() {
        let b = FockBasis::bosons_capped(1, 5);
        let (a, _) = ladder(&b, 0).unwrap();
        let v = apply(&a, &b, &[3]);
        let expect = b.ket(&[2]).unwrap() * cr(3f64.sqrt());
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn fermion_creation_order() {
        let b = FockBasis::fermions(2);
        let (_, c1) = ladder(&b, 0).unwrap();
        let (_, c2) = ladder(&b, 1).unwrap();
        let v21 = apply(&(&c2 * &c1), &b, &[0, 0]);
        let v12 = apply(&(&c1 * &c2), &b, &[0, 0]);
        assert!((&v21 - b.ket(&[1, 1]).unwrap()).norm() < 1e-15);
        assert!((&v21 + &v12).norm() < 1e-15);
    }

    #[test]
    fn fermion_lowering_on_empty() {
        let b = FockBasis::fermions(3);
        let (a, _) = ladder(&b, 1).unwrap();
        assert_eq!(apply(&a, &b, &[1, 0, 1]).norm(), 0.0);
    }

    #[test]
    fn ladder_index_checked() {
        assert!(matches!(ladder(&FockBasis::fermions(2), 2), Err(QmError::IndexOutOfRange { .. })));
    }

    #[test]
    fn boson_enhancement_and_fermion_blocking() {
        let mut h = ComplexMatrix::zeros(2, 2);
        let v21 = c(0.3, 0.4);
        h[(1, 0)] = v21;
        h[(0, 1)] = v21.conj();
        for n in 1..6u32 {
            let b = FockBasis::bosons_n(2, n);
            let op = one_body_operator(&b, &h).unwrap();
            for n2 in 0..n {
                let n1 = n - n2;
                let i = b.index_of(&[n1 - 1, n2 + 1]).unwrap();
                let j = b.index_of(&[n1, n2]).unwrap();
                let lhs = op[(i, j)].norm_sqr();
                let rhs = (n2 + 1) as f64 * n1 as f64 * v21.norm_sqr();
                assert!((lhs - rhs).abs() < 1e-13);
            }
        }
        let f = FockBasis::fermions(2);
        let op = one_body_operator(&f, &h).unwrap();
        let j = f.index_of(&[1, 1]).unwrap();
        assert_eq!(op.column(j).norm(), 0.0);
        let i = f.index_of(&[0, 1]).unwrap();
        let j = f.index_of(&[1, 0]).unwrap();
        assert!((op[(i, j)].norm_sqr() - v21.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_one_body() {
        let b = FockBasis::bosons_capped(3, 2);
        let h = numeric::diag_real(&[0.5, -1.0, 2.0]);
        let op = one_body_operator(&b, &h).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            let e = 0.5 * s[0] as f64 - s[1] as f64 + 2.0 * s[2] as f64;
            assert!((op[(i, i)].re - e).abs() < 1e-14);
        }
        let off = &op - ComplexMatrix::from_diagonal(&op.diagonal());
        assert_eq!(numeric::max_abs(&off), 0.0);
    }

    #[test]
    fn one_body_rejects_non_hermitian() {
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 1)] = cr(1.0);
        assert!(one_body_operator(&FockBasis::fermions(2), &h).is_err());
    }

    #[test]
    fn two_body_symmetry_checked() {
        let mut u = TwoBodyTensor::zeros(2);
        u.set(0, 1, 1, 0, cr(1.0));
        assert!(matches!(
            two_body_operator(&FockBasis::fermions(2), &u),
            Err(QmError::SymmetryViolation(_))
        ));
    }

    #[test]
    fn slater_single_particle_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = TwoBodyTensor::random_symmetric(4, &mut rng);
        assert_eq!(slater_expectation(&[2], &u), 0.0);
    }

    #[test]
    fn slater_diagonal_direct_only() {
        let v = DMatrix::from_row_slice(3, 3, &[0.0, 1.5, 0.2, 1.5, 0.0, 0.7, 0.2, 0.7, 0.0]);
        let u = TwoBodyTensor::density_density(&v);
        assert!((slater_expectation(&[0, 2], &u) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn slater_matches_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = TwoBodyTensor::random_symmetric(5, &mut rng);
        let basis = FockBasis::fermions_n(5, 3);
        let op = two_body_operator(&basis, &u).unwrap();
        assert!(numeric::hermitian_deviation(&op) < 1e-14);
        let occ = slater_occupation(5, &[0, 2, 3]);
        let i = basis.index_of(&occ).unwrap();
        assert!((op[(i, i)].re - slater_expectation(&[0, 2, 3], &u)).abs() < 1e-12);
    }

    #[test]
    fn dimer_free_spectrum() {
        let n = 6;
        let k = 0.8;
        let d = bose_hubbard_dimer(n, 0.0, k, 0.0).unwrap();
        let ev = numeric::hermitian_eigenvalues(&d.hamiltonian).unwrap();
        for (i, e) in ev.iter().enumerate() {
            let m = n as f64 / 2.0 - i as f64;
            assert!((e - (-k * m + d.constant)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimer_cat_pairs() {
        let d = bose_hubbard_dimer(8, 1.0, 0.0, 0.0).unwrap();
        let h = &d.hamiltonian;
        for i in 0..9 {
            assert!((h[(i, i)] - h[(8 - i, 8 - i)]).norm() < 1e-13);
            for j in 0..9 {
                if i != j {
                    assert_eq!(h[(i, j)], Complex64::ZERO);
                }
            }
        }
    }

    #[test]
    fn dimer_single_particle() {
        let d = bose_hubbard_dimer(1, 2.0, 0.6, 0.4).unwrap();
        let expect = ComplexMatrix::from_row_slice(2, 2, &[cr(-0.2), cr(-0.3), cr(-0.3), cr(0.2)]);
        assert!(numeric::max_abs(&(&d.hamiltonian - expect)) < 1e-15);
    }

    #[test]
    fn dimer_constructions_agree() {
        for n in 1..=40 {
            assert!(bose_hubbard_dimer(n, 0.37, 1.1, -0.25).is_ok());
        }
    }

    #[test]
    fn dimer_observables_examples() {
        let n = 10;
        let mut pole = DVector::zeros(11);
        pole[0] = cr(1.0);
        let obs = dimer_observables(&pole, n).unwrap();
        assert!((obs.polarization[2] - 1.0).abs() < 1e-14);
        assert!((obs.one_body_purity - 1.0).abs() < 1e-14);

        let d = bose_hubbard_dimer(n, 0.0, 1.0, 0.0).unwrap();
        let eig = numeric::hermitian_eig(&d.hamiltonian).unwrap();
        let g: DVector<Complex64> = eig.vectors.column(0).into_owned();
        let obs = dimer_observables(&g, n).unwrap();
        assert!((obs.polarization[0] - 1.0).abs() < 1e-12);
        assert!((obs.one_body_purity - 1.0).abs() < 1e-12);

        // ρ⁽¹⁾_{ji} = ⟨a_i† a_j⟩/N
        let basis = FockBasis::bosons_n(2, n);
        for i in 0..2 {
            for j in 0..2 {
                let mut h = ComplexMatrix::zeros(2, 2);
                h[(i, j)] = cr(0.5);
                h[(j, i)] += cr(0.5);
                let hop = one_body_operator(&basis, &h).unwrap();
                // hop = (a_i†a_j + a_j†a_i)/2; the state is real so ⟨a_i†a_j⟩ is too
                let op = hop;
                let e = (g.adjoint() * op * &g)[(0, 0)] / n as f64;
                assert!((e - obs.rho1[(j, i)]).norm() < 1e-12);
            }
        }

        // equal weights over the equator: superpose x-y plane coherent states
        let rep = build_spin_rep(n);
        let mut spread = DVector::zeros(11);
        for q in 0..64 {
            let phi = 2.0 * PI * q as f64 / 64.0;
            let tilt = numeric::evolve_unitary(&rep.jy, PI / 2.0).unwrap();
            let turn = numeric::evolve_unitary(&rep.jz, phi).unwrap();
            spread += turn * tilt * &pole;
        }
        let spread = &spread / cr(spread.norm());
        let obs = dimer_observables(&spread, n).unwrap();
        assert!((obs.one_body_purity - 0.5).abs() < 1e-10);
    }

    #[test]
    fn singlet_schmidt_and_entropy() {
        let s = BipartiteState::from_vector(2, 2, &singlet()).unwrap();
        let sch = schmidt(&s);
        assert_eq!(sch.p.len(), 2);
        assert!(sch.p.iter().all(|p| (p - 0.5).abs() < 1e-14));
        assert!(numeric::max_abs(&(sch.reconstruct() - &s.psi)) < 1e-14);
        for keep in [Keep::A, Keep::B] {
            assert!((entropy(&s.reduce(keep)).unwrap() - LN_2).abs() < 1e-14);
        }
    }

    #[test]
    fn product_state_schmidt() {
        let a = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let b = DVector::from_vec(vec![cr(FRAC_1_SQRT_2), cr(0.0), c(0.0, -FRAC_1_SQRT_2)]);
        let s = BipartiteState::new(&a * b.transpose()).unwrap();
        let sch = schmidt(&s);
        assert_eq!(sch.p.len(), 1);
        assert!((sch.p[0] - 1.0).abs() < 1e-14);
        assert!(entropy(&s.reduce(Keep::A)).unwrap().abs() < 1e-12);
        assert!(sch.a_vectors[0][0].im == 0.0 && sch.a_vectors[0][0].re > 0.0);
    }

    #[test]
    fn reductions_share_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = ComplexMatrix::from_fn(3, 7, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let s = BipartiteState::normalized(psi).unwrap();
        let mut ea = numeric::hermitian_eigenvalues(&s.reduce(Keep::A)).unwrap();
        let eb = numeric::hermitian_eigenvalues(&s.reduce(Keep::B)).unwrap();
        ea.reverse();
        let mut eb_top: Vec<f64> = eb.iter().rev().take(3).copied().collect();
        eb_top.truncate(3);
        for (x, y) in ea.iter().zip(&eb_top) {
            assert!((x - y).abs() < 1e-10);
        }
        let via_partial = numeric::partial_trace(&projector(&s.to_vector()), 3, 7, Keep::B).unwrap();
        assert!(numeric::max_abs(&(via_partial - s.reduce(Keep::B))) < 1e-14);
    }

    #[test]
    fn bell_values() {
        let deg = PI / 180.0;
        assert!((singlet_correlation(0.0, 0.0) + 1.0).abs() < 1e-12);
        assert!(singlet_correlation(0.0, 90.0 * deg).abs() < 1e-12);
        assert!((singlet_correlation(0.0, 180.0 * deg) - 1.0).abs() < 1e-12);
        let s = chsh(0.0, 45.0 * deg, 90.0 * deg, -45.0 * deg);
        assert!((s.abs() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((chsh(0.3, 0.3, 0.3, 0.3) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_examples() {
        let psi = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho = projector(&psi);
        let up = projector(&DVector::from_vec(vec![cr(1.0), cr(0.0)]));
        let down = projector(&DVector::from_vec(vec![cr(0.0), cr(1.0)]));
        let (p, post) = measure(&rho, &[up.clone(), down.clone()]).unwrap();
        assert!((p[0] - 0.36).abs() < 1e-15 && (p[1] - 0.64).abs() < 1e-15);
        let expect = numeric::diag_real(&[0.36, 0.64]);
        assert!(numeric::max_abs(&(&post - &expect)) < 1e-15);
        let (_, again) = measure(&post, &[up.clone(), down.clone()]).unwrap();
        assert_eq!(again, post);
        assert!(matches!(measure(&rho, &[up]), Err(QmError::IncompleteProjectors(_))));
    }
}
