//! Quasi one-dimensional scattering: point scatterers and junctions, transfer
//! matrices, multichannel delta scattering, quantum graphs and rings.
//!
//! Channel amplitudes are flux normalized (`Ã = √v A`). On a wire the radial
//! function is `A e^{−ikr} + B e^{+ikr}` with `r` measured away from the
//! scatterer, so `A` is incoming and `B` outgoing.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmError, Result};
use crate::numeric::{self, c, cr, ComplexMatrix};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `v_E = √(2E/m)`.
pub fn velocity(e: f64, mass: f64) -> f64 {
    (2.0 * e / mass).sqrt()
}

/// `k_E = √(2mE)`.
pub fn wavenumber(e: f64, mass: f64) -> f64 {
    (2.0 * mass * e).sqrt()
}

/// Unitary channel-to-channel amplitude matrix at fixed energy.
#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    pub s: ComplexMatrix,
    pub energy: f64,
    pub velocities: Vec<f64>,
    pub thresholds: Option<Vec<f64>>,
}

impl ScatteringMatrix {
    pub fn unitarity_deviation(&self) -> f64 {
        numeric::unitarity_deviation(&self.s)
    }

    pub fn reciprocity_deviation(&self) -> f64 {
        numeric::max_abs(&(&self.s - self.s.transpose()))
    }

    pub fn channels(&self) -> usize {
        self.s.nrows()
    }
}

/// Reflection and transmission of `u δ(x)`:
/// `r = −i(u/v)/(1 + i u/v)`, `t = 1 + r`. An infinite `u` is a hard wall.
pub fn delta_amplitudes(u: f64, v: f64) -> (Complex64, Complex64) {
    if u.is_infinite() {
        return (cr(-1.0), cr(0.0));
    }
    let x = u / v;
    let r = c(0.0, -x) / c(1.0, x);
    (r, cr(1.0) + r)
}

/// Transmission probability `g = 1/(1 + (u/v)²)`.
pub fn delta_transmission(u: f64, v: f64) -> f64 {
    1.0 / (1.0 + (u / v).powi(2))
}

/// Delta junction of `M` wires, `S_ab = δ_ab − (2/M)/(1 + iu/v)`; the identity
/// (total reflection) at `u = ∞`.
pub fn junction_smatrix(wires: usize, u: f64, v: f64) -> Result<ScatteringMatrix> {
    if wires == 0 || v <= 0.0 {
        return Err(QmError::InvalidArgument("need at least one wire and v > 0".into()));
    }
    let amp = if u.is_infinite() { cr(0.0) } else { cr(2.0 / wires as f64) / c(1.0, u / v) };
    let s = ComplexMatrix::from_fn(wires, wires, |a, b| if a == b { cr(1.0) - amp } else { -amp });
    Ok(ScatteringMatrix { s, energy: 0.5 * v * v, velocities: vec![v; wires], thresholds: None })
}

/// Channel ordering of the two-wire delta S matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoWireOrdering {
    /// The `M = 2` delta junction, `−[[r, t], [t, r]]`.
    Junction,
    /// Rows swapped so that transmission sits on the diagonal, `[[t, r], [r, t]]`.
    Swapped,
}

pub fn two_wire_delta_smatrix(u: f64, v: f64, ordering: TwoWireOrdering) -> ComplexMatrix {
    let (r, t) = delta_amplitudes(u, v);
    match ordering {
        TwoWireOrdering::Junction => ComplexMatrix::from_row_slice(2, 2, &[-r, -t, -t, -r]),
        TwoWireOrdering::Swapped => ComplexMatrix::from_row_slice(2, 2, &[t, r, r, t]),
    }
}

/// Fabry-Perot transmission `1/(1 + 4[(1−g)/g²] sin²φ)`.
pub fn fabry_perot(g: f64, phi: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(QmError::InvalidG(g));
    }
    Ok(1.0 / (1.0 + 4.0 * (1.0 - g) / (g * g) * phi.sin().powi(2)))
}

/// Transfer matrix `(B̃_R, Ã_R)ᵀ = T (Ã_L, B̃_L)ᵀ` in channel blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub pp: ComplexMatrix,
    pub pm: ComplexMatrix,
    pub mp: ComplexMatrix,
    pub mm: ComplexMatrix,
}

impl TransferMatrix {
    pub fn channels(&self) -> usize {
        self.pp.nrows()
    }

    pub fn identity(n: usize) -> Self {
        let z = ComplexMatrix::zeros(n, n);
        TransferMatrix { pp: numeric::identity(n), pm: z.clone(), mp: z, mm: numeric::identity(n) }
    }

    pub fn to_full(&self) -> ComplexMatrix {
        let n = self.channels();
        let mut t = ComplexMatrix::zeros(2 * n, 2 * n);
        t.view_mut((0, 0), (n, n)).copy_from(&self.pp);
        t.view_mut((0, n), (n, n)).copy_from(&self.pm);
        t.view_mut((n, 0), (n, n)).copy_from(&self.mp);
        t.view_mut((n, n), (n, n)).copy_from(&self.mm);
        t
    }

    pub fn from_full(t: &ComplexMatrix) -> Self {
        let n = t.nrows() / 2;
        TransferMatrix {
            pp: t.view((0, 0), (n, n)).into_owned(),
            pm: t.view((0, n), (n, n)).into_owned(),
            mp: t.view((n, 0), (n, n)).into_owned(),
            mm: t.view((n, n), (n, n)).into_owned(),
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &TransferMatrix) -> TransferMatrix {
        TransferMatrix::from_full(&(self.to_full() * first.to_full()))
    }

    /// Point scatterer with effective coupling `𝓜`:
    /// `[[1 − i𝓜, −i𝓜], [i𝓜, 1 + i𝓜]]`.
    pub fn delta(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        let im = m * c(0.0, 1.0);
        TransferMatrix { pp: numeric::identity(n) - &im, pm: -&im, mp: im.clone(), mm: numeric::identity(n) + im }
    }

    /// Free flight over a segment; `phases[a] = k_a L`.
    pub fn free(phases: &[f64]) -> Self {
        let n = phases.len();
        let d = |sign: f64| ComplexMatrix::from_fn(n, n, |i, j| if i == j { Complex64::from_polar(1.0, sign * phases[i]) } else { cr(0.0) });
        let z = ComplexMatrix::zeros(n, n);
        TransferMatrix { pp: d(1.0), pm: z.clone(), mp: z, mm: d(-1.0) }
    }
}

/// Eliminate the transfer matrix into `S` acting on `(Ã_L, Ã_R) → (B̃_L, B̃_R)`:
/// `S = [[−T₋₋⁻¹T₋₊, T₋₋⁻¹], [T₊₊ − T₊₋T₋₋⁻¹T₋₊, T₊₋T₋₋⁻¹]]`.
pub fn transfer_to_smatrix(t: &TransferMatrix) -> Result<ComplexMatrix> {
    let n = t.channels();
    let inv = t.mm.clone().try_inverse().ok_or(QmError::SingularBlock)?;
    if !numeric::max_abs(&inv).is_finite() {
        return Err(QmError::SingularBlock);
    }
    let mut s = ComplexMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&(-(&inv * &t.mp)));
    s.view_mut((0, n), (n, n)).copy_from(&inv);
    s.view_mut((n, 0), (n, n)).copy_from(&(&t.pp - &t.pm * &inv * &t.mp));
    s.view_mut((n, n), (n, n)).copy_from(&(&t.pm * &inv));
    Ok(s)
}

/// Inverse of [`transfer_to_smatrix`].
pub fn smatrix_to_transfer(s: &ComplexMatrix) -> Result<TransferMatrix> {
    let n = s.nrows() / 2;
    let sll = s.view((0, 0), (n, n)).into_owned();
    let slr = s.view((0, n), (n, n)).into_owned();
    let srl = s.view((n, 0), (n, n)).into_owned();
    let srr = s.view((n, n), (n, n)).into_owned();
    let mm = slr.try_inverse().ok_or(QmError::SingularBlock)?;
    let mp = -(&mm * &sll);
    let pm = &srr * &mm;
    let pp = &srl - &srr * &mm * &sll;
    Ok(TransferMatrix { pp, pm, mp, mm })
}

/// Left and right transmission probabilities summed over channels.
pub fn transmissions(s: &ComplexMatrix) -> (f64, f64) {
    let n = s.nrows() / 2;
    let lr: f64 = s.view((n, 0), (n, n)).iter().map(|z| z.norm_sqr()).sum();
    let rl: f64 = s.view((0, n), (n, n)).iter().map(|z| z.norm_sqr()).sum();
    (lr, rl)
}

/// Effective coupling `𝓜 = M_vv − M_vu (1 + M_uu)⁻¹ M_uv` of a delta scatterer
/// with internal levels, and the open-channel velocities.
pub fn effective_coupling(q: &ComplexMatrix, e: f64, thresholds: &[f64], mass: f64) -> Result<(ComplexMatrix, Vec<f64>)> {
    let n = thresholds.len();
    if q.nrows() != n || q.ncols() != n {
        return Err(QmError::DimensionMismatch(format!("Q is {}x{}, {} thresholds", q.nrows(), q.ncols(), n)));
    }
    let scale = thresholds.iter().fold(e.abs(), |a, &b| a.max(b.abs())).max(1.0);
    if let Some(&th) = thresholds.iter().find(|&&th| (e - th).abs() <= 1e-14 * scale) {
        return Err(QmError::AtThreshold(th));
    }
    let open: Vec<usize> = (0..n).filter(|&i| e > thresholds[i]).collect();
    let closed: Vec<usize> = (0..n).filter(|&i| e < thresholds[i]).collect();
    if open.is_empty() {
        return Err(QmError::NoOpenChannel(e));
    }
    // v_n = k_n/m for open channels, u_n = α_n/m for closed ones.
    let speed: Vec<f64> = (0..n).map(|i| (2.0 * mass * (e - thresholds[i]).abs()).sqrt() / mass).collect();
    let m = ComplexMatrix::from_fn(n, n, |i, j| q[(i, j)] / (speed[i] * speed[j]).sqrt());
    let pick = |rows: &[usize], cols: &[usize]| ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
    let mvv = pick(&open, &open);
    let eff = if closed.is_empty() {
        mvv
    } else {
        let muu = pick(&closed, &closed);
        let inv = (numeric::identity(closed.len()) + muu).try_inverse().ok_or(QmError::SingularBlock)?;
        mvv - pick(&open, &closed) * inv * pick(&closed, &open)
    };
    Ok((eff, open.iter().map(|&i| speed[i]).collect()))
}

/// `2N×2N` S matrix of `Q δ(x)` coupled to internal levels at `thresholds`;
/// closed channels are eliminated first.
pub fn inelastic_delta_smatrix(q: &ComplexMatrix, e: f64, thresholds: &[f64], mass: f64) -> Result<ScatteringMatrix> {
    let (eff, v) = effective_coupling(q, e, thresholds, mass)?;
    let s = transfer_to_smatrix(&TransferMatrix::delta(&eff))?;
    let mut velocities = v.clone();
    velocities.extend_from_slice(&v);
    Ok(ScatteringMatrix { s, energy: e, velocities, thresholds: Some(thresholds.to_vec()) })
}

/// Transverse modes `χ_n(y) = √(2/W) sin(nπy/W)` of a waveguide of width `W`
/// and their thresholds `(nπ/W)²/2m`, for `n = 1..=modes`.
pub fn waveguide_modes(width: f64, y0: f64, modes: usize, mass: f64) -> (Vec<f64>, Vec<f64>) {
    let pi = std::f64::consts::PI;
    let chi = (1..=modes).map(|n| (2.0 / width).sqrt() * (n as f64 * pi * y0 / width).sin()).collect();
    let th = (1..=modes).map(|n| (n as f64 * pi / width).powi(2) / (2.0 * mass)).collect();
    (chi, th)
}

/// Point scatterer `c δ(x) δ(y − y0)` in a waveguide truncated to `modes`.
pub fn waveguide_delta_smatrix(strength: f64, y0: f64, width: f64, e: f64, modes: usize, mass: f64) -> Result<ScatteringMatrix> {
    let (chi, th) = waveguide_modes(width, y0, modes, mass);
    let q = ComplexMatrix::from_fn(modes, modes, |i, j| cr(strength * chi[i] * chi[j]));
    inelastic_delta_smatrix(&q, e, &th, mass)
}

/// Rank-one closed form of the waveguide reflection block,
/// `S_R = −i M_vv / (1 + i tr M_vv + tr M_uu)`.
pub fn waveguide_reflection_closed(strength: f64, y0: f64, width: f64, e: f64, modes: usize, mass: f64) -> Result<ComplexMatrix> {
    let (chi, th) = waveguide_modes(width, y0, modes, mass);
    let speed: Vec<f64> = th.iter().map(|&t| (2.0 * mass * (e - t).abs()).sqrt() / mass).collect();
    let open: Vec<usize> = (0..modes).filter(|&i| e > th[i]).collect();
    if open.is_empty() {
        return Err(QmError::NoOpenChannel(e));
    }
    let a: Vec<f64> = (0..modes).map(|i| chi[i] / speed[i].sqrt()).collect();
    let tr_vv: f64 = open.iter().map(|&i| strength * a[i] * a[i]).sum();
    let tr_uu: f64 = (0..modes).filter(|i| !open.contains(i)).map(|i| strength * a[i] * a[i]).sum();
    let den = c(1.0 + tr_uu, tr_vv);
    Ok(ComplexMatrix::from_fn(open.len(), open.len(), |i, j| c(0.0, -strength * a[open[i]] * a[open[j]]) / den))
}

/// Scatterer placed on a graph vertex.
pub enum Vertex {
    /// Delta junction of strength `u` joining all incident bond ends.
    /// One end with `u = ∞` is a Dirichlet wall, with `u = 0` a Neumann end.
    Junction { u: f64 },
    /// Arbitrary energy-dependent vertex matrix in the `ψ = A + B` convention.
    Custom(Box<dyn Fn(f64) -> ComplexMatrix + Send + Sync>),
}

impl std::fmt::Debug for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Junction { u } => write!(f, "Junction {{ u: {u} }}"),
            Vertex::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Vertex matrix of a delta junction with `ψ = A + B` at the vertex:
/// `S_ab = −δ_ab + (2/M)/(1 + iu/v)`, the negative of [`junction_smatrix`].
pub fn vertex_junction_matrix(wires: usize, u: f64, v: f64) -> ComplexMatrix {
    let amp = if u.is_infinite() { cr(0.0) } else { cr(2.0 / wires as f64) / c(1.0, u / v) };
    ComplexMatrix::from_fn(wires, wires, |a, b| if a == b { amp - cr(1.0) } else { amp })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    /// Flux phase accumulated from `from` to `to`.
    pub flux: f64,
}

/// Quantum graph. Directed bond `a < nb` runs `from → to`; `a + nb` is its reversal.
#[derive(Debug)]
pub struct Network {
    pub bonds: Vec<Bond>,
    pub vertices: Vec<Vertex>,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkLevel {
    pub energy: f64,
    pub multiplicity: usize,
}

impl Network {
    pub fn directed_count(&self) -> usize {
        2 * self.bonds.len()
    }

    fn start_vertex(&self, a: usize) -> usize {
        let nb = self.bonds.len();
        if a < nb { self.bonds[a].from } else { self.bonds[a - nb].to }
    }

    /// `J`: the involution `a ↔ ã`.
    pub fn reversal(&self) -> DMatrix<f64> {
        let nb = self.bonds.len();
        let n = 2 * nb;
        DMatrix::from_fn(n, n, |i, j| if (i + nb) % n == j { 1.0 } else { 0.0 })
    }

    /// Block-diagonal vertex matrix over directed bonds grouped by start vertex.
    pub fn vertex_smatrix(&self, e: f64) -> Result<ComplexMatrix> {
        let n = self.directed_count();
        let v = velocity(e, self.mass);
        let mut s = ComplexMatrix::zeros(n, n);
        for (iv, vert) in self.vertices.iter().enumerate() {
            let ends: Vec<usize> = (0..n).filter(|&a| self.start_vertex(a) == iv).collect();
            if ends.is_empty() {
                continue;
            }
            let block = match vert {
                Vertex::Junction { u } => vertex_junction_matrix(ends.len(), *u, v),
                Vertex::Custom(f) => f(e),
            };
            if block.nrows() != ends.len() || block.ncols() != ends.len() {
                return Err(QmError::DimensionMismatch(format!("vertex {iv} has {} ends", ends.len())));
            }
            for (i, &a) in ends.iter().enumerate() {
                for (j, &b) in ends.iter().enumerate() {
                    s[(a, b)] = block[(i, j)];
                }
            }
        }
        Ok(s)
    }

    /// `U(E) = J e^{ikL} S(E)` with `k_a L_a = √(2mE) L_a + φ_a`.
    pub fn evolution(&self, e: f64) -> Result<ComplexMatrix> {
        let nb = self.bonds.len();
        let k = wavenumber(e, self.mass);
        let s = self.vertex_smatrix(e)?;
        let n = 2 * nb;
        let mut u = ComplexMatrix::zeros(n, n);
        for a in 0..n {
            let (bond, sign) = if a < nb { (self.bonds[a], 1.0) } else { (self.bonds[a - nb], -1.0) };
            let phase = Complex64::from_polar(1.0, k * bond.length + sign * bond.flux);
            let target = (a + nb) % n;
            for b in 0..n {
                u[(target, b)] = phase * s[(a, b)];
            }
        }
        Ok(u)
    }
}

/// `det(1 − U)` and `det U` for the secular function.
fn secular_parts(net: &Network, e: f64) -> Result<(Complex64, Complex64)> {
    let u = net.evolution(e)?;
    let n = u.nrows();
    let d1 = (numeric::identity(n) - &u).determinant();
    Ok((d1, u.determinant()))
}

/// Real secular function `Π_j sin(θ_j/2) = det(1−U)(det U)^{−1/2}(i/2)^N`,
/// with the branch of the square root picked closest to `half_phase_ref`.
fn real_secular(d1: Complex64, du: Complex64, n: usize, half_phase_ref: f64) -> (f64, f64) {
    let mut half = 0.5 * du.arg();
    // choose half or half+π to stay continuous with the reference
    while half - half_phase_ref > std::f64::consts::FRAC_PI_2 {
        half -= std::f64::consts::PI;
    }
    while half_phase_ref - half > std::f64::consts::FRAC_PI_2 {
        half += std::f64::consts::PI;
    }
    let pref = c(0.0, 0.5).powu(n as u32);
    let z = d1 * Complex64::from_polar(1.0, -half) * pref;
    (z.re, half)
}

/// Number of eigenphases of `U` that wind through zero between `lo` and `hi`.
fn winding_count(net: &Network, lo: f64, hi: f64) -> Result<usize> {
    let phases = |e: f64| -> Result<Vec<f64>> {
        let u = net.evolution(e)?;
        let ev = u.schur().eigenvalues().ok_or_else(|| QmError::NoConvergence("Schur eigenvalues".into()))?;
        Ok(ev.iter().map(|z| z.arg()).collect())
    };
    let a = phases(lo)?;
    let b = phases(hi)?;
    // Near the root the relevant eigenvalues are close to 1, so count small phases.
    let near = |v: &[f64]| v.iter().filter(|p| p.abs() < 0.5).map(|p| p.signum()).collect::<Vec<_>>();
    let (na, nb) = (near(&a), near(&b));
    let neg_a = na.iter().filter(|&&s| s < 0.0).count();
    let neg_b = nb.iter().filter(|&&s| s < 0.0).count();
    Ok(neg_a.abs_diff(neg_b).max(1))
}

/// Eigenenergies of a graph on `[e_lo, e_hi]` from the real secular function.
///
/// Sign changes are bisected; touching zeros (degenerate levels) are found from
/// minima of `|Z|`. Multiplicity is the number of eigenphases of `U` crossing
/// zero at the level.
pub fn network_spectrum(net: &Network, e_lo: f64, e_hi: f64, grid: usize) -> Result<Vec<NetworkLevel>> {
    let grid = grid.max(3);
    let n = net.directed_count();
    let h = (e_hi - e_lo) / (grid - 1) as f64;
    let mut es = Vec::with_capacity(grid);
    let mut zs = Vec::with_capacity(grid);
    let mut halves = Vec::with_capacity(grid);
    let mut href = {
        let (_, du) = secular_parts(net, e_lo)?;
        0.5 * du.arg()
    };
    for i in 0..grid {
        let e = e_lo + h * i as f64;
        let (d1, du) = secular_parts(net, e)?;
        let (z, half) = real_secular(d1, du, n, href);
        href = half;
        es.push(e);
        zs.push(z);
        halves.push(half);
    }
    let scale = zs.iter().fold(0.0_f64, |a, z| a.max(z.abs())).max(1e-300);
    let eval = |e: f64, r: f64| -> f64 {
        let (d1, du) = secular_parts(net, e).expect("checked on the grid");
        real_secular(d1, du, n, r).0
    };
    let mut roots: Vec<f64> = Vec::new();
    for i in 0..grid - 1 {
        if zs[i] == 0.0 {
            roots.push(es[i]);
            continue;
        }
        if (zs[i] < 0.0) != (zs[i + 1] < 0.0) && zs[i + 1] != 0.0 {
            let r = halves[i];
            let (mut a, mut b, fa) = (es[i], es[i + 1], zs[i]);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = eval(m, r);
                if (fm < 0.0) == (fa < 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    // Touching zeros.
    for i in 1..grid - 1 {
        let (l, m, r) = (zs[i - 1].abs(), zs[i].abs(), zs[i + 1].abs());
        let same_sign = (zs[i - 1] < 0.0) == (zs[i] < 0.0) && (zs[i] < 0.0) == (zs[i + 1] < 0.0);
        if m <= l && m < r && same_sign {
            let rf = halves[i];
            let g = |e: f64| eval(e, rf).abs();
            let x = numeric::golden_min(&g, es[i - 1], es[i + 1]);
            if g(x) < 1e-9 * scale {
                roots.push(x);
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|b, a| (*b - *a).abs() < 1e-9 * (e_hi - e_lo).abs());
    let mut out = Vec::with_capacity(roots.len());
    for e in roots {
        let d = 0.25 * h;
        let lo = (e - d).max(e_lo.max(f64::MIN_POSITIVE));
        let mult = winding_count(net, lo, e + d)?;
        out.push(NetworkLevel { energy: e, multiplicity: mult });
    }
    Ok(out)
}

/// Expand levels into a flat list repeating degenerate energies.
pub fn expand_levels(levels: &[NetworkLevel]) -> Vec<f64> {
    levels.iter().flat_map(|l| std::iter::repeat(l.energy).take(l.multiplicity)).collect()
}

/// Ring of circumference `L` with a single delta scatterer, as a one-bond graph.
pub fn ring_network(length: f64, u: f64, flux: f64, mass: f64) -> Network {
    Network {
        bonds: vec![Bond { from: 0, to: 0, length, flux }],
        vertices: vec![Vertex::Junction { u }],
        mass,
    }
}

/// Secular function `cos γ(E) − √g(E) cos φ` of a ring with a delta scatterer,
/// `γ = kL − arctan(mu/k)`, `g = 1/(1 + (mu/k)²)`.
pub fn ring_secular(length: f64, u: f64, flux: f64, mass: f64, e: f64) -> f64 {
    let k = wavenumber(e, mass);
    let x = mass * u / k;
    let (gamma, sqrt_g) = if u.is_infinite() {
        (k * length - std::f64::consts::FRAC_PI_2, 0.0)
    } else {
        (k * length - x.atan(), 1.0 / (1.0 + x * x).sqrt())
    };
    gamma.cos() - sqrt_g * flux.cos()
}

/// Levels of the ring with a scatterer on `(e_lo, e_hi]`, with touching
/// (doubly degenerate) roots reported with multiplicity two.
pub fn ring_with_scatterer_spectrum(length: f64, u: f64, flux: f64, mass: f64, e_lo: f64, e_hi: f64, grid: usize) -> Vec<NetworkLevel> {
    let lo = e_lo.max(1e-12 * e_hi.abs().max(1.0));
    let f = |e: f64| ring_secular(length, u, flux, mass, e);
    let mut roots = numeric::find_roots(f, lo, e_hi, grid);
    for e in numeric::find_touching_roots(f, lo, e_hi, grid, 1e-10) {
        if !roots.iter().any(|&r| (r - e).abs() < 1e-7 * e.max(1.0)) {
            roots.push(e);
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let h = (e_hi - lo) / grid.max(2) as f64;
    // A double level is a tangential zero: F has the same value to first order on both sides.
    (0..roots.len())
        .map(|i| {
            let e = roots[i];
            let gap = [i.checked_sub(1).map(|j| e - roots[j]), roots.get(i + 1).map(|r| r - e)]
                .into_iter()
                .flatten()
                .fold(f64::INFINITY, f64::min);
            let d = (0.25 * h).min(0.25 * gap);
            let (fm, fp) = (f(e - d), f(e + d));
            let odd = (fp - fm).abs() > 0.5 * (fp.abs() + fm.abs());
            NetworkLevel { energy: e, multiplicity: if odd { 1 } else { 2 } }
        })
        .collect()
}

/// Clean ring levels `E_n = (1/2m)(2π/L)²(n − Φ/2π)²`.
pub fn ab_ring_energy(length: f64, flux: f64, n: i64, mass: f64) -> f64 {
    let q = TWO_PI / length * (n as f64 - flux / TWO_PI);
    q * q / (2.0 * mass)
}

/// Levels for every `n` in `n_range`, in that order.
pub fn ab_ring_spectrum(length: f64, flux: f64, n_range: std::ops::RangeInclusive<i64>, mass: f64) -> Vec<f64> {
    n_range.map(|n| ab_ring_energy(length, flux, n, mass)).collect()
}

/// `I_n = −dE_n/dΦ`.
pub fn persistent_current(length: f64, flux: f64, n: i64, mass: f64) -> f64 {
    let q = TWO_PI / length;
    q * q * (n as f64 - flux / TWO_PI) / (mass * TWO_PI)
}

/// `ϱ(E) = (1/2πi) tr(dS/dE S†)` by central difference; returns the real
/// density and the discarded imaginary part.
pub fn friedel_dos(sfun: impl Fn(f64) -> ComplexMatrix, e: f64, de: f64) -> (f64, f64) {
    let ds = (sfun(e + de) - sfun(e - de)) / cr(2.0 * de);
    let s = sfun(e);
    let tr = (ds * s.adjoint()).trace() / c(0.0, TWO_PI);
    (tr.re, tr.im)
}

/// Retarded 1D Green function `−(i/v)[e^{ik|x−x0|} + r e^{ik(|x|+|x0|)}]`, the
/// second term present when a delta `u` sits at the origin.
pub fn green_1d(e: f64, x: f64, x0: f64, u: Option<f64>, mass: f64) -> Result<Complex64> {
    if e <= 0.0 {
        return Err(QmError::DomainError("1D Green function needs E > 0".into()));
    }
    let k = wavenumber(e, mass);
    let v = k / mass;
    let mut g = Complex64::from_polar(1.0, k * (x - x0).abs());
    if let Some(u) = u {
        let (r, _) = delta_amplitudes(u, v);
        g += r * Complex64::from_polar(1.0, k * (x.abs() + x0.abs()));
    }
    Ok(c(0.0, -1.0 / v) * g)
}

/// `V_nm = −π² n m / (m L³)`, the derivative of a box Hamiltonian with respect to its length.
pub fn wall_shift_matrix(n: u32, m: u32, length: f64, mass: f64) -> f64 {
    -std::f64::consts::PI.powi(2) * n as f64 * m as f64 / (mass * length.powi(3))
}

/// `W_nm = −ψ_n' ψ_m' / (4 m² u)` for a weak delta junction between boxes.
pub fn junction_coupling(dpsi_n: f64, dpsi_m: f64, u: f64, mass: f64) -> f64 {
    -dpsi_n * dpsi_m / (4.0 * mass * mass * u)
}

/// Tunnelling frequency `Ω = (v_E/a)√g` of a symmetric double well.
pub fn double_well_splitting(a: f64, g: f64, e: f64, mass: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(QmError::InvalidG(g));
    }
    Ok(velocity(e, mass) / a * g.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn delta_examples() {
        let (r, t) = delta_amplitudes(0.0, 1.3);
        assert_eq!((r, t), (cr(0.0), cr(1.0)));
        let (r, t) = delta_amplitudes(f64::INFINITY, 1.3);
        assert_eq!((r, t), (cr(-1.0), cr(0.0)));
        let (r, t) = delta_amplitudes(1e12, 1.0);
        assert!((r + 1.0).norm() < 1e-11 && t.norm() < 1e-11);
        let (r, t) = delta_amplitudes(0.7, 0.7);
        assert!((t.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn junction_examples() {
        let s = junction_smatrix(3, 0.0, 1.0).unwrap().s;
        for a in 0..3 {
            for b in 0..3 {
                let e = if a == b { 1.0 / 3.0 } else { -2.0 / 3.0 };
                assert!((s[(a, b)] - cr(e)).norm() < 1e-15);
            }
        }
        let s = junction_smatrix(2, 0.0, 1.0).unwrap().s;
        assert!(s[(0, 0)].norm() < 1e-15 && (s[(0, 1)].norm() - 1.0).abs() < 1e-15);
        let s = junction_smatrix(4000, 0.0, 1.0).unwrap().s;
        assert!(numeric::max_abs(&(s - numeric::identity(4000))) < 1e-3);
        let s = junction_smatrix(4, f64::INFINITY, 1.0).unwrap().s;
        assert_eq!(s, numeric::identity(4));
    }

    #[test]
    fn two_wire_orderings_agree_up_to_permutation() {
        let a = two_wire_delta_smatrix(0.8, 1.1, TwoWireOrdering::Junction);
        let b = two_wire_delta_smatrix(0.8, 1.1, TwoWireOrdering::Swapped);
        assert!(numeric::unitarity_deviation(&a) < 1e-15);
        assert!(numeric::unitarity_deviation(&b) < 1e-15);
        assert!((a[(0, 1)].norm() - b[(0, 0)].norm()).abs() < 1e-15);
        let j = junction_smatrix(2, 0.8, 1.1).unwrap().s;
        assert!(numeric::max_abs(&(j - a)) < 1e-15);
    }

    #[test]
    fn fabry_perot_examples() {
        for n in 0..4 {
            assert_eq!(fabry_perot(0.3, PI * n as f64).unwrap(), 1.0 / (1.0 + 4.0 * 0.7 / 0.09 * (PI * n as f64).sin().powi(2)));
            assert!((fabry_perot(0.3, PI * n as f64).unwrap() - 1.0).abs() < 1e-28_f64.max(1e-12));
        }
        assert_eq!(fabry_perot(1.0, 0.77).unwrap(), 1.0);
        assert!((fabry_perot(0.5, PI / 2.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(matches!(fabry_perot(0.0, 1.0), Err(QmError::InvalidG(_))));
    }

    #[test]
    fn transfer_examples() {
        let s = transfer_to_smatrix(&TransferMatrix::identity(2)).unwrap();
        let expect = ComplexMatrix::from_fn(4, 4, |i, j| if (i + 2) % 4 == j { cr(1.0) } else { cr(0.0) });
        assert_eq!(s, expect);

        let m = numeric::from_real_rows(&[&[0.4, 0.1], &[0.1, -0.3]]);
        let s = transfer_to_smatrix(&TransferMatrix::delta(&m)).unwrap();
        let st = (numeric::identity(2) + &m * c(0.0, 1.0)).try_inverse().unwrap();
        assert!(numeric::max_abs(&(s.view((0, 2), (2, 2)).into_owned() - &st)) < 1e-14);
        assert!(numeric::max_abs(&(s.view((0, 0), (2, 2)).into_owned() - (&st - numeric::identity(2)))) < 1e-14);
        let back = smatrix_to_transfer(&s).unwrap();
        assert!(numeric::max_abs(&(back.to_full() - TransferMatrix::delta(&m).to_full())) < 1e-13);
    }

    #[test]
    fn singular_block_detected() {
        let z = ComplexMatrix::zeros(1, 1);
        let t = TransferMatrix { pp: z.clone(), pm: z.clone(), mp: z.clone(), mm: z };
        assert!(matches!(transfer_to_smatrix(&t), Err(QmError::SingularBlock)));
    }

    #[test]
    fn two_delta_composition_is_fabry_perot() {
        let (u, v) = (1.7, 1.0);
        let (r, _) = delta_amplitudes(u, v);
        let g = delta_transmission(u, v);
        let m = ComplexMatrix::from_element(1, 1, cr(u / v));
        for phi in [0.1, 0.9, 2.3] {
            let kl = phi - r.arg();
            let t = TransferMatrix::delta(&m).compose(&TransferMatrix::free(&[kl])).compose(&TransferMatrix::delta(&m));
            let s = transfer_to_smatrix(&t).unwrap();
            let (lr, rl) = transmissions(&s);
            assert!((lr - fabry_perot(g, phi).unwrap()).abs() < 1e-13);
            assert!((lr - rl).abs() < 1e-13);
        }
    }

    #[test]
    fn inelastic_single_channel_reduces_to_delta() {
        let (u, e) = (0.9, 1.4);
        let q = ComplexMatrix::from_element(1, 1, cr(u));
        let s = inelastic_delta_smatrix(&q, e, &[0.0], 1.0).unwrap();
        let (r, t) = delta_amplitudes(u, velocity(e, 1.0));
        assert!((s.s[(0, 0)] - r).norm() < 1e-14 && (s.s[(1, 0)] - t).norm() < 1e-14);
        assert!(matches!(inelastic_delta_smatrix(&q, -1.0, &[0.0], 1.0), Err(QmError::NoOpenChannel(_))));
        assert!(matches!(inelastic_delta_smatrix(&q, 0.0, &[0.0], 1.0), Err(QmError::AtThreshold(_))));
    }

    #[test]
    fn waveguide_rank_one_formula() {
        let (w, y0, cst, modes) = (1.0, 0.31, 0.8, 6);
        for e in [6.0, 25.0, 60.0] {
            let s = waveguide_delta_smatrix(cst, y0, w, e, modes, 1.0).unwrap();
            let closed = waveguide_reflection_closed(cst, y0, w, e, modes, 1.0).unwrap();
            let n = closed.nrows();
            assert!(numeric::max_abs(&(s.s.view((0, 0), (n, n)).into_owned() - closed)) < 1e-12);
            assert!(s.unitarity_deviation() < 1e-12);
        }
    }

    #[test]
    fn reflection_vanishes_at_channel_opening() {
        let (w, y0, cst) = (1.0, 0.31, 0.8);
        let e2 = (2.0 * PI).powi(2) / 2.0;
        let r = |e: f64| waveguide_delta_smatrix(cst, y0, w, e, 8, 1.0).unwrap().s[(0, 0)].norm();
        let far = r(e2 - 3.0);
        assert!(r(e2 - 1e-9) < 1e-3 * far);
        assert!(r(e2 + 1e-9) < 1e-3 * far);
    }

    #[test]
    fn free_ring_network_levels() {
        let l = 2.0;
        let net = ring_network(l, 0.0, 0.0, 1.0);
        let levels = network_spectrum(&net, 0.05, 50.0, 5000).unwrap();
        let exact: Vec<f64> = (1..=3).map(|n| ab_ring_energy(l, 0.0, n, 1.0)).collect();
        assert_eq!(levels.len(), 3);
        for (lv, e) in levels.iter().zip(&exact) {
            assert!((lv.energy - e).abs() < 1e-7 * e);
            assert_eq!(lv.multiplicity, 2);
        }
    }

    #[test]
    fn ring_with_scatterer_limits() {
        let (l, m) = (2.0 * PI, 1.0);
        let phi = 0.4;
        let lv = ring_with_scatterer_spectrum(l, 0.0, phi, m, 0.0, 20.0, 4001);
        let mut exact: Vec<f64> = (-8..=8).map(|n| ab_ring_energy(l, phi, n, m)).filter(|&e| e > 0.0 && e < 20.0).collect();
        exact.sort_by(|a, b| a.total_cmp(b));
        let got = expand_levels(&lv);
        assert_eq!(got.len(), exact.len());
        for (a, b) in got.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
        let lv = ring_with_scatterer_spectrum(l, f64::INFINITY, phi, m, 0.0, 20.0, 4001);
        for (n, level) in lv.iter().enumerate() {
            let e = (PI * (n + 1) as f64 / l).powi(2) / (2.0 * m);
            assert!((level.energy - e).abs() < 1e-9 * e);
            assert_eq!(level.multiplicity, 1);
        }
        let a = expand_levels(&ring_with_scatterer_spectrum(l, 3.0, 0.7, m, 0.0, 20.0, 4001));
        let b = expand_levels(&ring_with_scatterer_spectrum(l, 3.0, -0.7, m, 0.0, 20.0, 4001));
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_clean_ring_levels_are_doubled() {
        let l = 2.0 * PI;
        let lv = ring_with_scatterer_spectrum(l, 0.0, 0.0, 1.0, 0.0, 5.0, 2001);
        let e: Vec<f64> = lv.iter().map(|x| x.energy).collect();
        assert_eq!(e.len(), 3);
        for (n, (x, level)) in e.iter().zip(&lv).enumerate() {
            let k = (n + 1) as f64;
            assert!((x - k * k / 2.0).abs() < 1e-6);
            assert_eq!(level.multiplicity, 2);
        }
    }

    #[test]
    fn network_agrees_with_ring_secular_equation() {
        let (la, lb, u1) = (1.3, 2.1, 2.5);
        let two_bond = Network {
            bonds: vec![Bond { from: 0, to: 1, length: la, flux: 0.0 }, Bond { from: 0, to: 1, length: lb, flux: 0.3 }],
            vertices: vec![Vertex::Junction { u: u1 }, Vertex::Junction { u: 0.0 }],
            mass: 1.0,
        };
        let got = expand_levels(&network_spectrum(&two_bond, 0.05, 12.0, 4000).unwrap());
        let want = expand_levels(&ring_with_scatterer_spectrum(la + lb, u1, 0.3, 1.0, 0.05, 12.0, 4000));
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn ab_examples() {
        assert_eq!(ab_ring_energy(3.0, 0.0, 0, 1.0), 0.0);
        assert_eq!(persistent_current(3.0, 0.0, 0, 1.0), 0.0);
        let l = 6.5;
        let a: Vec<f64> = ab_ring_spectrum(l, 0.7, -5..=5, 1.0);
        let b: Vec<f64> = ab_ring_spectrum(l, 0.7 + TWO_PI, -4..=6, 1.0);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((ab_ring_energy(l, PI, 0, 1.0) - ab_ring_energy(l, PI, 1, 1.0)).abs() < 1e-15);
        let h = 1e-6;
        let num = -(ab_ring_energy(l, 0.5 + h, 2, 1.0) - ab_ring_energy(l, 0.5 - h, 2, 1.0)) / (2.0 * h);
        assert!((num - persistent_current(l, 0.5, 2, 1.0)).abs() < 1e-8);
    }

    #[test]
    fn friedel_examples() {
        let fixed = two_wire_delta_smatrix(1.0, 1.0, TwoWireOrdering::Junction);
        let (d, im) = friedel_dos(|_| fixed.clone(), 2.0, 1e-4);
        assert!(d.abs() < 1e-12 && im.abs() < 1e-12);
        // Lorentzian resonance e^{2iδ}, δ = −arctan((Γ/2)/(E − E_r)); θ = 2δ winds by 2π.
        let (er, gw) = (1.0_f64, 0.05_f64);
        let s = |e: f64| {
            let delta = (0.5 * gw).atan2(er - e);
            ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, 2.0 * delta))
        };
        let total = numeric::integrate(|e| friedel_dos(s, e, 1e-6).0, er - 40.0, er + 40.0, 4000);
        assert!((total - 1.0).abs() < 2e-3, "{total}");
        let e = 1.01;
        let th = |e: f64| 2.0 * (0.5 * gw).atan2(er - e);
        let dth = (th(e + 1e-6) - th(e - 1e-6)) / 2e-6;
        assert!((friedel_dos(s, e, 1e-6).0 - dth / TWO_PI).abs() < 1e-6);
    }

    #[test]
    fn green_examples() {
        let e = 1.3;
        let g0 = green_1d(e, 0.2, -0.5, None, 1.0).unwrap();
        let g1 = green_1d(e, 3.2, -0.5, None, 1.0).unwrap();
        assert!((g0.norm() - g1.norm()).abs() < 1e-15);
        let g = green_1d(e, 0.0, 0.7, Some(f64::INFINITY), 1.0).unwrap();
        assert!(g.norm() < 1e-15);
        assert!(green_1d(-1.0, 0.0, 0.0, None, 1.0).is_err());
    }

    #[test]
    fn green_satisfies_helmholtz_off_source() {
        let (e, m, x0, u) = (0.8, 1.0, 0.9, 0.6);
        let h = 1e-3;
        for x in [-1.4, 0.4, 2.5] {
            let g = |x: f64| green_1d(e, x, x0, Some(u), m).unwrap();
            let lap = (g(x + h) - g(x) * 2.0 + g(x - h)) / (h * h);
            let res = g(x) * e + lap / (2.0 * m);
            assert!(res.norm() < 1e-5, "{res}");
        }
    }

    #[test]
    fn green_reflection_term_structure() {
        let (e, m, u) = (0.8, 1.0, 0.6);
        let (x, x0) = (1.1, -0.4);
        let v = velocity(e, m);
        let (r, _) = delta_amplitudes(u, v);
        let g0 = |a: f64, b: f64| green_1d(e, a, b, None, m).unwrap();
        let expect = g0(x, x0) + c(0.0, v) * r * g0(x, 0.0) * g0(0.0, x0);
        assert!((green_1d(e, x, x0, Some(u), m).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn wall_and_junction_couplings() {
        let (l, m, n) = (1.7, 1.0, 3u32);
        let en = |l: f64| (PI * n as f64 / l).powi(2) / (2.0 * m);
        let dl = 1e-6;
        let num = (en(l + dl) - en(l - dl)) / (2.0 * dl);
        assert!((num - wall_shift_matrix(n, n, l, m)).abs() < 1e-6);
        let (a, u) = (1.0_f64, 200.0);
        let dpsi = (2.0 / a).sqrt() * PI / a;
        let omega = 2.0 * junction_coupling(dpsi, dpsi, u, m).abs();
        let e = (PI / a).powi(2) / (2.0 * m);
        let g = delta_transmission(u, velocity(e, m));
        let dw = double_well_splitting(a, g, e, m).unwrap();
        assert!((omega - dw).abs() / dw < 1e-3);
        assert_eq!(double_well_splitting(2.0, 1.0, 2.0, 1.0).unwrap(), 1.0);
    }
}
