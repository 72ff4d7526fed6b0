use crate::output::{Report, Table, Value};
use crate::parse;
use crate::Failure;
use clap::{Args, ValueEnum};
use qmkit_core::angular::{self, add_angular_momentum, build_spin_rep, j_squared_product_basis, rotation_matrix, su2_axis_angle};
use qmkit_core::dynamics::{self, DecayModel, DecaySpectrum, GamowWell, LZSweep, LzReadout, TwoLevel};
use qmkit_core::fock::{self, BipartiteState, Keep};
use qmkit_core::numeric::{self, cr};
use qmkit_core::qc::{self, QubitRegister};
use qmkit_core::quasi1d::{self, Bond, Network, TransferMatrix, Vertex};
use qmkit_core::spherical::{self, PhaseShiftSet, ShieldedWell};
use qmkit_core::wigner::{self, GridState, PhaseSpaceFunction};
use qmkit_core::{Complex64, ComplexMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

type Out = Result<Report, Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn compute<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Compute { message: e.to_string(), report: None }
}

fn half_integer(two: i64) -> String {
    if two % 2 == 0 {
        (two / 2).to_string()
    } else {
        format!("{two}/2")
    }
}

fn twice(s: &str) -> Result<u32, Failure> {
    angular::twice(parse::scalar(s).map_err(usage)?).map_err(usage)
}

/// Map `f` over `items` on up to `threads` workers; results keep input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

// ---------------------------------------------------------------- angular momentum

#[derive(Args, Debug)]
pub struct CgArgs {
    /// First angular momentum (integer or half-integer, e.g. 1 or 1/2).
    #[arg(long, default_value = "1")]
    pub j1: String,
    #[arg(long, default_value = "1/2")]
    pub j2: String,
}

pub fn cg(a: &CgArgs) -> Out {
    let (t1, t2) = (twice(&a.j1)?, twice(&a.j2)?);
    if (t1 as u64 + 1) * (t2 as u64 + 1) > 400 {
        return Err(usage("product space larger than 400 states"));
    }
    let d = add_angular_momentum(t1, t2);
    let mut r = Report::default();
    r.param("j1", half_integer(t1 as i64));
    r.param("j2", half_integer(t2 as i64));
    let col_labels: Vec<String> = d.cols.iter().map(|&(j, m)| format!("j={} m={}", half_integer(j as i64), half_integer(m as i64))).collect();
    let row_labels: Vec<String> = d.rows.iter().map(|&(m1, m2)| format!("m1={} m2={}", half_integer(m1 as i64), half_integer(m2 as i64))).collect();
    let mut t = Table::with_columns("transformation", [vec!["m1".to_string(), "m2".to_string()], col_labels].concat());
    let j2 = j_squared_product_basis(&d);
    let mut js = Table::with_columns("j_squared", [vec!["m1".to_string(), "m2".to_string()], row_labels].concat());
    for (i, &(m1, m2)) in d.rows.iter().enumerate() {
        let head = vec![Value::from(half_integer(m1 as i64)), Value::from(half_integer(m2 as i64))];
        t.push(head.iter().cloned().chain(d.t.row(i).iter().map(|&x| Value::Num(x))).collect());
        js.push(head.into_iter().chain(j2.row(i).iter().map(|z| Value::Num(z.re))).collect());
    }
    r.tables.push(t);
    r.tables.push(js);
    r.note("multiplets", d.multiplets.iter().map(|&j| half_integer(j as i64)).collect::<Vec<_>>());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ZeemanArgs {
    /// Spin-orbit strength v.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub v: String,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub g: String,
    /// Field values, e.g. -3..3/60.
    #[arg(long, default_value = "-3..3/60", allow_hyphen_values = true)]
    pub h: String,
}

pub fn zeeman(a: &ZeemanArgs) -> Out {
    let v = parse::scalar(&a.v).map_err(usage)?;
    let g = parse::scalar(&a.g).map_err(usage)?;
    let hs = parse::grid(&a.h).map_err(usage)?;
    let mut r = Report::default();
    r.param("v", v);
    r.param("g", g);
    r.param("h", a.h.as_str());
    let mut t = Table::new("levels", &["h", "E1", "E2", "E3", "E4", "E5", "E6"]);
    for (h, levels) in hs.iter().zip(angular::zeeman_spectrum(v, g, &hs)) {
        t.push(std::iter::once(*h).chain(levels).map(Value::Num).collect());
    }
    r.tables.push(t);
    r.note("stretched_slope", 1.0 + 0.5 * g);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct RotateArgs {
    /// Representation, e.g. 1/2 or 1.
    #[arg(long, default_value = "1/2")]
    pub j: String,
    /// Rotation `x,y,z:degrees`; repeat to compose, leftmost acting last.
    #[arg(long = "rot", default_values = ["0,1,0:90", "0,0,1:90"], allow_hyphen_values = true)]
    pub rot: Vec<String>,
}

pub fn rotate(a: &RotateArgs) -> Out {
    let tj = twice(&a.j)?;
    if tj > 40 {
        return Err(usage("j above 20 is not supported"));
    }
    let rep = build_spin_rep(tj);
    let half = build_spin_rep(1);
    let mut total = numeric::identity(rep.dim());
    let mut total_half = numeric::identity(2);
    for spec in &a.rot {
        let (axis, angle) = spec.split_once(':').ok_or_else(|| usage(format!("rotation '{spec}' must be x,y,z:degrees")))?;
        let n = parse::list(axis).map_err(usage)?;
        if n.len() != 3 {
            return Err(usage(format!("axis '{axis}' needs three components")));
        }
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 {
            return Err(usage("zero rotation axis"));
        }
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        let phi = parse::scalar(angle).map_err(usage)?.to_radians();
        total *= rotation_matrix(&rep, n, phi).map_err(compute)?;
        total_half *= rotation_matrix(&half, n, phi).map_err(compute)?;
    }
    let (axis, phi) = su2_axis_angle(&total_half).map_err(compute)?;
    let mut r = Report::default();
    r.param("j", half_integer(tj as i64));
    r.param("rot", a.rot.clone());
    let mut t = Table::new("matrix", &["row_m", "col_m", "re", "im"]);
    for i in 0..rep.dim() {
        for k in 0..rep.dim() {
            let z = total[(i, k)];
            t.push(vec![half_integer(rep.two_m(i) as i64).into(), half_integer(rep.two_m(k) as i64).into(), z.re.into(), z.im.into()]);
        }
    }
    r.tables.push(t);
    r.note("axis", axis.to_vec());
    r.note("angle_deg", phi.to_degrees());
    Ok(r)
}

// ---------------------------------------------------------------- driven dynamics

#[derive(Args, Debug)]
pub struct RabiArgs {
    /// Level detuning ε.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub eps: String,
    /// Coupling c.
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    pub c: String,
    #[arg(long, default_value = "0..20/200")]
    pub t: String,
}

pub fn rabi(a: &RabiArgs) -> Out {
    let tl = TwoLevel { eps: parse::scalar(&a.eps).map_err(usage)?, c: parse::scalar(&a.c).map_err(usage)? };
    let ts = parse::grid(&a.t).map_err(usage)?;
    let h = tl.hamiltonian();
    let mut r = Report::default();
    r.param("eps", tl.eps);
    r.param("c", tl.c);
    r.param("t", a.t.as_str());
    let mut t = Table::new("occupation", &["t", "p_stay", "p_stay_numeric"]);
    for &time in &ts {
        let u = numeric::evolve_unitary(&h, time).map_err(compute)?;
        t.push(vec![time.into(), dynamics::rabi_probability(tl, time).into(), u[(0, 0)].norm_sqr().into()]);
    }
    r.tables.push(t);
    r.note("omega", tl.omega());
    r.note("amplitude", tl.theta0().sin().powi(2));
    Ok(r)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Readout {
    Adiabatic,
    Diabatic,
}

#[derive(Args, Debug)]
pub struct LzArgs {
    #[arg(long, default_value = "1")]
    pub alpha: String,
    /// Values of κ²/α.
    #[arg(long, default_value = "0.25,0.5,1,2,3")]
    pub ratio: String,
    #[arg(long, value_enum, default_value_t = Readout::Adiabatic)]
    pub readout: Readout,
}

pub fn lz(a: &LzArgs, threads: usize) -> Out {
    let alpha = parse::scalar(&a.alpha).map_err(usage)?;
    let ratios = parse::grid(&a.ratio).map_err(usage)?;
    if alpha <= 0.0 || ratios.iter().any(|&x| x < 0.0) {
        return Err(usage("need α > 0 and κ²/α ≥ 0"));
    }
    let readout = match a.readout {
        Readout::Adiabatic => LzReadout::Adiabatic,
        Readout::Diabatic => LzReadout::Diabatic,
    };
    let runs = par_map(&ratios, threads, |&x| {
        let sweep = LZSweep::with_min_window(alpha, (x * alpha).sqrt());
        dynamics::lz_numeric(sweep, 0, readout).map(|o| (sweep, o))
    });
    let mut r = Report::default();
    r.param("alpha", alpha);
    r.param("ratio", a.ratio.as_str());
    r.param("readout", format!("{:?}", a.readout).to_lowercase());
    let mut t = Table::new("transitions", &["ratio", "kappa", "t_half", "numeric", "formula", "rel_err", "steps", "step_sensitivity"]);
    for (&x, run) in ratios.iter().zip(runs) {
        let (sweep, o) = run.map_err(compute)?;
        let f = dynamics::lz_formula(sweep);
        t.push(vec![
            x.into(),
            sweep.kappa.into(),
            sweep.t_half.into(),
            o.probability.into(),
            f.into(),
            ((o.probability - f).abs() / f).into(),
            o.steps.into(),
            o.step_sensitivity.into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FgrDecayArgs {
    /// Band level spacing Δ.
    #[arg(long, default_value = "0.01")]
    pub delta: String,
    /// Coupling σ to each band level.
    #[arg(long, default_value = "0.03")]
    pub sigma: String,
    #[arg(long = "n-band", default_value_t = 2000)]
    pub n_band: usize,
    /// Times in units of 1/Γ.
    #[arg(long = "gamma-t", default_value = "0..3/60")]
    pub gamma_t: String,
}

pub fn fgr_decay(a: &FgrDecayArgs) -> Out {
    let model = DecayModel {
        e0: 0.0,
        delta: parse::scalar(&a.delta).map_err(usage)?,
        sigma: parse::scalar(&a.sigma).map_err(usage)?,
        n_band: a.n_band,
    };
    let gts = parse::grid(&a.gamma_t).map_err(usage)?;
    let spec = dynamics::decay_spectrum(&model).map_err(compute)?;
    let exact = DecaySpectrum { energies: spec.energies.clone(), overlaps: dynamics::decay_exact_overlaps(&model, &spec) };
    let gamma = model.gamma();
    let mut r = Report::default();
    r.param("delta", model.delta);
    r.param("sigma", model.sigma);
    r.param("n_band", model.n_band);
    r.param("gamma_t", a.gamma_t.as_str());
    let mut t = Table::new("survival", &["gamma_t", "t", "survival", "survival_lorentzian", "exponential"]);
    for &gt in &gts {
        let time = gt / gamma;
        t.push(vec![
            gt.into(),
            time.into(),
            dynamics::survival_probability(&exact, time).into(),
            dynamics::survival_probability(&spec, time).into(),
            (-gt).exp().into(),
        ]);
    }
    r.tables.push(t);
    r.note("gamma", gamma);
    r.note("half_width", model.half_width());
    r.note("heisenberg_time", 2.0 * PI / model.delta);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct GamowArgs {
    /// Well width.
    #[arg(long, default_value = "π")]
    pub a: String,
    /// Barrier strengths.
    #[arg(long, default_value = "20,40,80")]
    pub u: String,
    /// Resonance index.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value = "1")]
    pub mass: String,
}

pub fn gamow(a: &GamowArgs) -> Out {
    let width = parse::scalar(&a.a).map_err(usage)?;
    let mass = parse::scalar(&a.mass).map_err(usage)?;
    let us = parse::grid(&a.u).map_err(usage)?;
    let mut r = Report::default();
    r.param("a", width);
    r.param("u", a.u.as_str());
    r.param("n", a.n);
    r.param("mass", mass);
    let mut t = Table::new("poles", &["u", "g", "e_r", "gamma_r", "e_exact", "gamma_exact", "re_k", "im_k", "converged"]);
    for &u in &us {
        let p = dynamics::gamow_pole(GamowWell { a: width, u, mass, n: a.n }).map_err(usage)?;
        t.push(vec![
            u.into(),
            p.g.into(),
            p.e_r.into(),
            p.gamma_r.into(),
            p.e_exact.into(),
            p.gamma_exact.into(),
            p.k_exact.re.into(),
            p.k_exact.im.into(),
            p.converged.into(),
        ]);
    }
    r.tables.push(t);
    Ok(r)
}

// ---------------------------------------------------------------- quasi-1D

#[derive(Args, Debug)]
pub struct RingArgs {
    /// Ring circumference.
    #[arg(long = "L", default_value = "2π")]
    pub length: String,
    /// Scatterer strength.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub u: String,
    /// Flux phases (one fluxon = 2π).
    #[arg(long, default_value = "0.3", allow_hyphen_values = true)]
    pub flux: String,
    #[arg(long, default_value = "1")]
    pub mass: String,
    #[arg(long, default_value = "40")]
    pub emax: String,
    #[arg(long, default_value_t = 20_000)]
    pub grid: usize,
}

pub fn ring_spectrum(a: &RingArgs, threads: usize) -> Out {
    let length = parse::scalar(&a.length).map_err(usage)?;
    let u = parse::scalar(&a.u).map_err(usage)?;
    let mass = parse::scalar(&a.mass).map_err(usage)?;
    let emax = parse::scalar(&a.emax).map_err(usage)?;
    let fluxes = parse::grid(&a.flux).map_err(usage)?;
    if length <= 0.0 || mass <= 0.0 || emax <= 0.0 {
        return Err(usage("need L, mass and emax positive"));
    }
    let spectra = par_map(&fluxes, threads, |&f| quasi1d::ring_with_scatterer_spectrum(length, u, f, mass, 0.0, emax, a.grid));
    let mut r = Report::default();
    r.param("L", length);
    r.param("u", u);
    r.param("flux", a.flux.as_str());
    r.param("mass", mass);
    r.param("emax", emax);
    r.param("grid", a.grid);
    let mut t = Table::new("levels", &["flux", "level", "energy", "multiplicity"]);
    for (&f, levels) in fluxes.iter().zip(spectra) {
        for (i, l) in levels.iter().enumerate() {
            t.push(vec![f.into(), i.into(), l.energy.into(), l.multiplicity.into()]);
        }
    }
    r.tables.push(t);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct AbArgs {
    #[arg(long = "L", default_value = "2π")]
    pub length: String,
    /// Angular quantum numbers, e.g. -3..3.
    #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
    pub n: String,
    /// Flux phases, e.g. 0..2π/64.
    #[arg(long, default_value = "0..2π/64", allow_hyphen_values = true)]
    pub flux: String,
    #[arg(long, default_value = "1")]
    pub mass: String,
}

pub fn ab_flux_sweep(a: &AbArgs) -> Out {
    let length = parse::scalar(&a.length).map_err(usage)?;
    let mass = parse::scalar(&a.mass).map_err(usage)?;
    let ns = parse::int_range(&a.n).map_err(usage)?;
    let fluxes = parse::grid(&a.flux).map_err(usage)?;
    if length <= 0.0 || mass <= 0.0 {
        return Err(usage("need L and mass positive"));
    }
    let mut r = Report::default();
    r.param("L", length);
    r.param("n", a.n.as_str());
    r.param("flux", a.flux.as_str());
    r.param("mass", mass);
    let mut cols = vec!["flux".to_string()];
    cols.extend(ns.iter().map(|n| format!("E[n={n}]")));
    cols.extend(["ground_n".to_string(), "ground_current".to_string()]);
    let mut t = Table::with_columns("levels", cols);
    for &f in &fluxes {
        let energies: Vec<f64> = ns.iter().map(|&n| quasi1d::ab_ring_energy(length, f, n, mass)).collect();
        let g = (0..ns.len()).min_by(|&x, &y| energies[x].total_cmp(&energies[y])).expect("nonempty range");
        let mut row: Vec<Value> = vec![f.into()];
        row.extend(energies.iter().map(|&e| Value::Num(e)));
        row.push(ns[g].into());
        row.push(quasi1d::persistent_current(length, f, ns[g], mass).into());
        t.push(row);
    }
    r.tables.push(t);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    /// Bonds `from-to:length[:flux]`, comma separated.
    #[arg(long, default_value = "0-1:1,0-1:1.3,0-1:1.7")]
    pub bonds: String,
    /// Delta strength at each vertex (`inf` for a wall).
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, default_value = "1")]
    pub mass: String,
    #[arg(long, default_value = "20")]
    pub emax: String,
    #[arg(long, default_value_t = 20_000)]
    pub grid: usize,
}

pub fn network(a: &NetworkArgs) -> Out {
    let mass = parse::scalar(&a.mass).map_err(usage)?;
    let emax = parse::scalar(&a.emax).map_err(usage)?;
    let us = parse::list(&a.u).map_err(usage)?;
    let mut bonds = Vec::new();
    for spec in a.bonds.split(',') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (ends, rest) = parts.split_first().ok_or_else(|| usage("empty bond"))?;
        let (from, to) = ends.split_once('-').ok_or_else(|| usage(format!("bond '{spec}' must start with from-to")))?;
        let from: usize = from.trim().parse().map_err(|_| usage(format!("bad vertex in '{spec}'")))?;
        let to: usize = to.trim().parse().map_err(|_| usage(format!("bad vertex in '{spec}'")))?;
        let length = parse::scalar(rest.first().ok_or_else(|| usage(format!("bond '{spec}' needs a length")))?).map_err(usage)?;
        let flux = rest.get(1).map(|s| parse::scalar(s)).transpose().map_err(usage)?.unwrap_or(0.0);
        if rest.len() > 2 || length <= 0.0 {
            return Err(usage(format!("bad bond '{spec}'")));
        }
        if from >= us.len() || to >= us.len() {
            return Err(usage(format!("bond '{spec}' refers to a vertex without a --u entry")));
        }
        bonds.push(Bond { from, to, length, flux });
    }
    let net = Network { bonds, vertices: us.iter().map(|&u| Vertex::Junction { u }).collect(), mass };
    let levels = quasi1d::network_spectrum(&net, 0.0, emax, a.grid).map_err(compute)?;
    let mut r = Report::default();
    r.param("bonds", a.bonds.as_str());
    r.param("u", us.clone());
    r.param("mass", mass);
    r.param("emax", emax);
    r.param("grid", a.grid);
    let mut t = Table::new("levels", &["level", "energy", "multiplicity"]);
    for (i, l) in levels.iter().enumerate() {
        t.push(vec![i.into(), l.energy.into(), l.multiplicity.into()]);
    }
    r.tables.push(t);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FabryPerotArgs {
    /// Single-barrier transmission g.
    #[arg(long, default_value = "0.5")]
    pub g: String,
    #[arg(long, default_value = "0..π/100")]
    pub phi: String,
}

pub fn fabry_perot(a: &FabryPerotArgs) -> Out {
    let g = parse::scalar(&a.g).map_err(usage)?;
    let phis = parse::grid(&a.phi).map_err(usage)?;
    if !(g > 0.0 && g <= 1.0) {
        return Err(usage(format!("g = {g} outside (0, 1]")));
    }
    let u = (1.0 / g - 1.0).max(0.0).sqrt();
    let (refl, _) = quasi1d::delta_amplitudes(u, 1.0);
    let m = ComplexMatrix::from_element(1, 1, cr(u));
    let mut r = Report::default();
    r.param("g", g);
    r.param("phi", a.phi.as_str());
    let mut t = Table::new("transmission", &["phi", "closed_form", "transfer_matrix"]);
    for &phi in &phis {
        let tm = TransferMatrix::delta(&m).compose(&TransferMatrix::free(&[phi - refl.arg()])).compose(&TransferMatrix::delta(&m));
        let (lr, _) = quasi1d::transmissions(&quasi1d::transfer_to_smatrix(&tm).map_err(compute)?);
        t.push(vec![phi.into(), quasi1d::fabry_perot(g, phi).map_err(usage)?.into(), lr.into()]);
    }
    r.tables.push(t);
    r.note("u_over_v", u);
    Ok(r)
}

// ---------------------------------------------------------------- spherical scattering

#[derive(Args, Debug)]
pub struct WellArgs {
    /// Radius.
    #[arg(long, default_value = "1")]
    pub a: String,
    /// Floor inside the sphere; `inf` for a hard sphere.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<String>,
    /// Shell strength at r = a.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, default_value = "1")]
    pub mass: String,
}

impl WellArgs {
    fn well(&self, default_v: f64) -> Result<ShieldedWell, Failure> {
        let a = parse::scalar(&self.a).map_err(usage)?;
        let v = self.v.as_deref().map(parse::scalar).transpose().map_err(usage)?.unwrap_or(default_v);
        let u = parse::scalar(&self.u).map_err(usage)?;
        let mass = parse::scalar(&self.mass).map_err(usage)?;
        if a <= 0.0 || mass <= 0.0 {
            return Err(usage("need a and mass positive"));
        }
        Ok(ShieldedWell { a, v, u, mass })
    }

    fn record(&self, r: &mut Report, w: &ShieldedWell) {
        r.param("a", w.a);
        r.param("v", w.v);
        r.param("u", w.u);
        r.param("mass", w.mass);
    }
}

#[derive(Args, Debug)]
pub struct SphereArgs {
    #[command(flatten)]
    pub well: WellArgs,
    /// Values of ka.
    #[arg(long, default_value = "0.01,0.1..10/99")]
    pub ka: String,
    /// Highest partial wave; default ⌈ka⌉ + 8.
    #[arg(long)]
    pub lmax: Option<usize>,
}

pub fn sphere_xsec(a: &SphereArgs) -> Out {
    let well = a.well.well(f64::INFINITY)?;
    let kas = parse::grid(&a.ka).map_err(usage)?;
    let mut r = Report::default();
    a.well.record(&mut r, &well);
    r.param("ka", a.ka.as_str());
    r.param("lmax", a.lmax.map(|l| l as u64));
    let mut t = Table::new("cross_section", &["ka", "energy", "lmax", "sigma_total", "sigma_over_pi_a2", "tail"]);
    for &ka in &kas {
        if ka <= 0.0 {
            return Err(usage("ka must be positive"));
        }
        let k = ka / well.a;
        let e = k * k / (2.0 * well.mass);
        let lmax = a.lmax.unwrap_or_else(|| spherical::default_lmax(k, well.a));
        let ps = PhaseShiftSet::from_well(&well, e, lmax).map_err(compute)?;
        let total = spherical::cross_sections(&ps).total;
        t.push(vec![ka.into(), e.into(), lmax.into(), total.into(), (total / (PI * well.a * well.a)).into(), ps.tail_estimate().into()]);
    }
    r.tables.push(t);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct PhaseShiftArgs {
    #[command(flatten)]
    pub well: WellArgs,
    #[arg(long, default_value = "1")]
    pub e: String,
    #[arg(long)]
    pub lmax: Option<usize>,
}

pub fn phase_shifts(a: &PhaseShiftArgs) -> Out {
    let well = a.well.well(-5.0)?;
    let e = parse::scalar(&a.e).map_err(usage)?;
    if e <= 0.0 {
        return Err(usage("energy must be positive"));
    }
    let k = (2.0 * well.mass * e).sqrt();
    let lmax = a.lmax.unwrap_or_else(|| spherical::default_lmax(k, well.a));
    let ps = PhaseShiftSet::from_well(&well, e, lmax).map_err(compute)?;
    let xs = spherical::cross_sections(&ps);
    let mut r = Report::default();
    a.well.record(&mut r, &well);
    r.param("e", e);
    r.param("lmax", lmax);
    let mut t = Table::new("partial_waves", &["l", "delta", "sigma_l"]);
    for (l, (&d, &s)) in ps.deltas.iter().zip(&xs.partial).enumerate() {
        t.push(vec![l.into(), d.into(), s.into()]);
    }
    r.tables.push(t);
    r.note("k", k);
    r.note("sigma_total", xs.total);
    r.note("optical_residual", spherical::optical_theorem_residual(&ps));
    r.note("tail", ps.tail_estimate());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct BornArgs {
    /// Depth of the square well (weak: |v0| ≪ E).
    #[arg(long, default_value = "-0.01", allow_hyphen_values = true)]
    pub v0: String,
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long, default_value = "1")]
    pub mass: String,
    #[arg(long, default_value = "0.5..3/10")]
    pub e: String,
    #[arg(long, default_value_t = 0)]
    pub l: usize,
}

pub fn born(a: &BornArgs) -> Out {
    let v0 = parse::scalar(&a.v0).map_err(usage)?;
    let radius = parse::scalar(&a.a).map_err(usage)?;
    let mass = parse::scalar(&a.mass).map_err(usage)?;
    let es = parse::grid(&a.e).map_err(usage)?;
    if radius <= 0.0 || mass <= 0.0 || es.iter().any(|&e| e <= 0.0) {
        return Err(usage("need a, mass and energies positive"));
    }
    let well = ShieldedWell { a: radius, v: v0, u: 0.0, mass };
    let mut r = Report::default();
    r.param("v0", v0);
    r.param("a", radius);
    r.param("mass", mass);
    r.param("e", a.e.as_str());
    r.param("l", a.l);
    let mut t = Table::new("phase_shift", &["e", "born", "exact", "rel_diff", "born_valid"]);
    for &e in &es {
        let b = spherical::born_phase_shift(|x| if x < radius { v0 } else { 0.0 }, a.l, e, mass, radius).map_err(compute)?;
        let exact = PhaseShiftSet::from_well(&well, e, a.l).map_err(compute)?.deltas[a.l];
        let rel = if exact == 0.0 { 0.0 } else { (b.delta - exact).abs() / exact.abs() };
        t.push(vec![e.into(), b.delta.into(), exact.into(), rel.into(), b.valid.into()]);
    }
    r.tables.push(t);
    Ok(r)
}

// ---------------------------------------------------------------- phase space

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum WignerState {
    Gaussian,
    Box,
    TwoSlit,
    Thermal,
}

#[derive(Args, Debug)]
pub struct WignerArgs {
    #[arg(long, value_enum, default_value_t = WignerState::Gaussian)]
    pub state: WignerState,
    /// Position samples (even).
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Window is [-half, half).
    #[arg(long, default_value = "8")]
    pub half: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub p0: String,
    #[arg(long, default_value = "0.7")]
    pub sigma: String,
    /// Box level n.
    #[arg(long, default_value_t = 1)]
    pub level: u32,
    /// Box length (box occupies 0 < x < length).
    #[arg(long, default_value = "2")]
    pub length: String,
    /// Slit separation.
    #[arg(long, default_value = "6")]
    pub d: String,
    #[arg(long = "beta-omega", default_value = "1")]
    pub beta_omega: String,
}

pub fn wigner(a: &WignerArgs) -> Out {
    let num = |s: &str| parse::scalar(s).map_err(usage);
    let half = num(&a.half)?;
    if a.points < 4 || a.points % 2 == 1 || a.points > 1024 || half <= 0.0 {
        return Err(usage("need an even number of points in [4, 1024] and half > 0"));
    }
    let dx = 2.0 * half / a.points as f64;
    let x: Vec<f64> = (0..a.points).map(|i| -half + i as f64 * dx).collect();
    let mut r = Report::default();
    r.param("state", format!("{:?}", a.state).to_lowercase());
    let w: PhaseSpaceFunction = match a.state {
        WignerState::Gaussian => {
            let (x0, p0, sigma) = (num(&a.x0)?, num(&a.p0)?, num(&a.sigma)?);
            r.param("points", a.points);
            r.param("half", half);
            r.param("x0", x0);
            r.param("p0", p0);
            r.param("sigma", sigma);
            let st = GridState::from_wavefunction(-half, dx, &wigner::gaussian_wavefunction(&x, x0, p0, sigma));
            wigner::wigner_transform(&st).map_err(compute)?
        }
        WignerState::Box => {
            let length = num(&a.length)?;
            r.param("points", a.points);
            r.param("half", half);
            r.param("level", a.level);
            r.param("length", length);
            if a.level == 0 || length <= 0.0 || length > half {
                return Err(usage("need level ≥ 1 and 0 < length ≤ half"));
            }
            let st = GridState::from_wavefunction(-half, dx, &wigner::box_wavefunction(&x, a.level, length));
            wigner::wigner_transform(&st).map_err(compute)?
        }
        WignerState::TwoSlit => {
            let ts = wigner::TwoSlit { d: num(&a.d)?, sigma: num(&a.sigma)? };
            r.param("points", a.points);
            r.param("half", half);
            r.param("d", ts.d);
            r.param("sigma", ts.sigma);
            let st = GridState::from_wavefunction(-half, dx, &ts.wavefunction(&x));
            wigner::wigner_transform(&st).map_err(compute)?
        }
        WignerState::Thermal => {
            let bw = num(&a.beta_omega)?;
            r.param("beta_omega", bw);
            let t = wigner::ThermalOscillator::new(1.0, 1.0, bw).map_err(usage)?;
            r.note("purity_oracle", wigner::thermal_purity_oracle(bw));
            t.on_grid(4, 6.0)
        }
    };
    let mut t = Table::new("wigner", &["x", "p", "w"]);
    for (i, &xx) in w.x.iter().enumerate() {
        for (j, &pp) in w.p.iter().enumerate() {
            t.push(vec![xx.into(), pp.into(), w.w[(i, j)].into()]);
        }
    }
    r.tables.push(t);
    r.note("normalization", w.normalization());
    r.note("purity", w.purity());
    r.note("min", w.min_value());
    r.note("max", w.max_value());
    Ok(r)
}

// ---------------------------------------------------------------- Fock space and measurement

#[derive(Args, Debug)]
pub struct DimerArgs {
    /// Number of bosons.
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub u: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub k: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub eps: String,
}

pub fn dimer(a: &DimerArgs) -> Out {
    if a.n == 0 || a.n > 400 {
        return Err(usage("need 1 ≤ N ≤ 400"));
    }
    let (u, k, eps) = (
        parse::scalar(&a.u).map_err(usage)?,
        parse::scalar(&a.k).map_err(usage)?,
        parse::scalar(&a.eps).map_err(usage)?,
    );
    let d = fock::bose_hubbard_dimer(a.n, u, k, eps).map_err(compute)?;
    let eig = numeric::hermitian_eig(&d.hamiltonian).map_err(compute)?;
    let mut r = Report::default();
    r.param("n", a.n);
    r.param("u", u);
    r.param("k", k);
    r.param("eps", eps);
    let mut t = Table::new("eigenstates", &["index", "energy", "sx", "sy", "sz", "one_body_purity"]);
    for (i, &e) in eig.values.iter().enumerate() {
        let v: DVector<Complex64> = eig.vectors.column(i).into_owned();
        let o = fock::dimer_observables(&v, a.n).map_err(compute)?;
        let [sx, sy, sz] = o.polarization;
        t.push(vec![i.into(), e.into(), sx.into(), sy.into(), sz.into(), o.one_body_purity.into()]);
    }
    r.tables.push(t);
    r.note("dim", d.hamiltonian.nrows());
    r.note("constant", d.constant);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct BellArgs {
    /// Analyzer angles A, B, A', B' in degrees.
    #[arg(long, default_value = "0,45,90,-45", allow_hyphen_values = true)]
    pub angles: String,
}

pub fn bell(a: &BellArgs) -> Out {
    let ang = parse::list(&a.angles).map_err(usage)?;
    if ang.len() != 4 {
        return Err(usage("--angles takes exactly four values: A,B,A',B'"));
    }
    let rad: Vec<f64> = ang.iter().map(|d| d.to_radians()).collect();
    let mut r = Report::default();
    r.param("angles", ang.clone());
    let mut t = Table::new("correlations", &["pair", "theta_a", "theta_b", "correlation"]);
    for (label, i, j) in [("AB", 0, 1), ("AB'", 0, 3), ("A'B", 2, 1), ("A'B'", 2, 3)] {
        t.push(vec![label.into(), ang[i].into(), ang[j].into(), fock::singlet_correlation(rad[i], rad[j]).into()]);
    }
    r.tables.push(t);
    let s = fock::chsh(rad[0], rad[1], rad[2], rad[3]);
    r.note("chsh_signed", s);
    r.note("classical_bound", 2.0);
    r.note("violation", s.abs() > 2.0);
    r.note("chsh", s.abs());
    Ok(r)
}

#[derive(Args, Debug)]
pub struct SchmidtArgs {
    /// Dimensions `NAxNB`.
    #[arg(long, default_value = "2x2")]
    pub dims: String,
    /// Amplitudes Ψ_{iα}, row-major over (i, α); complex as `a+bi`.
    #[arg(long, default_value = "0,1,-1,0", allow_hyphen_values = true)]
    pub amplitudes: String,
}

pub fn schmidt(a: &SchmidtArgs) -> Out {
    let (na, nb) = a.dims.split_once('x').ok_or_else(|| usage("--dims must look like 2x3"))?;
    let na: usize = na.trim().parse().map_err(|_| usage("bad NA"))?;
    let nb: usize = nb.trim().parse().map_err(|_| usage("bad NB"))?;
    let amps: Vec<Complex64> = a
        .amplitudes
        .split(',')
        .map(|s| parse::complex(s).map(|(re, im)| Complex64::new(re, im)))
        .collect::<Result<_, _>>()
        .map_err(usage)?;
    if na == 0 || nb == 0 || amps.len() != na * nb {
        return Err(usage(format!("{} amplitudes for a {na}x{nb} system", amps.len())));
    }
    let psi = ComplexMatrix::from_row_slice(na, nb, &amps);
    let state = BipartiteState::normalized(psi).map_err(usage)?;
    let sch = fock::schmidt(&state);
    let rho_a = state.reduce(Keep::A);
    let rho_b = state.reduce(Keep::B);
    let mut r = Report::default();
    r.param("dims", format!("{na}x{nb}"));
    r.param("amplitudes", a.amplitudes.as_str());
    let mut t = Table::new("schmidt", &["r", "p"]);
    for (i, &p) in sch.p.iter().enumerate() {
        t.push(vec![i.into(), p.into()]);
    }
    r.tables.push(t);
    r.note("rank", sch.p.len());
    r.note("entropy_a", fock::entropy(&rho_a).map_err(compute)?);
    r.note("entropy_b", fock::entropy(&rho_b).map_err(compute)?);
    r.note("purity", fock::purity(&rho_a));
    Ok(r)
}

// ---------------------------------------------------------------- quantum computation

#[derive(Args, Debug)]
pub struct ShorArgs {
    /// Number to factor.
    pub n: u64,
    /// Fixed base M instead of random draws.
    #[arg(long)]
    pub base: Option<u64>,
    #[arg(long, default_value_t = qc::DEFAULT_RETRIES)]
    pub retries: usize,
    /// Also print the exact control-register distribution for each base tried.
    #[arg(long)]
    pub exact: bool,
}

pub fn shor(a: &ShorArgs, seed: u64) -> Out {
    if a.n < 2 {
        return Err(usage("N must be at least 2"));
    }
    if let Some(m) = a.base {
        if m < 2 || m >= a.n {
            return Err(usage(format!("base must lie in [2, {})", a.n)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run = match a.base {
        Some(m) => qc::shor_with_base(a.n, m, a.retries, &mut rng),
        None => qc::shor_factor(a.n, a.retries, &mut rng),
    }
    .map_err(|e| match e {
        qmkit_core::QmError::InvalidArgument(_) | qmkit_core::QmError::NotCoprime { .. } => usage(e),
        other => compute(other),
    })?;
    let mut r = Report::default();
    r.param("n", a.n);
    r.param("base", a.base);
    r.param("retries", a.retries);
    r.param("exact", a.exact);
    let mut t = Table::new("attempts", &["attempt", "m", "gcd", "k", "r", "q", "outcome"]);
    for (i, at) in run.attempts.iter().enumerate() {
        t.push(vec![(i + 1).into(), at.m.into(), at.lucky_gcd.into(), at.k.into(), at.r.into(), at.q.into(), at.outcome.label().into()]);
    }
    r.tables.push(t);
    if a.exact {
        let mut bases: Vec<u64> = run.attempts.iter().filter(|at| at.k.is_some()).map(|at| at.m).collect();
        bases.sort_unstable();
        bases.dedup();
        let mut d = Table::new("distribution", &["m", "k", "probability"]);
        for m in bases {
            for (k, p) in qc::period_distribution(a.n, m, run.n_c).map_err(compute)?.into_iter().enumerate() {
                if p > 1e-12 {
                    d.push(vec![m.into(), k.into(), p.into()]);
                }
            }
        }
        r.tables.push(d);
    }
    r.note("n_c", run.n_c);
    r.note(
        "shortcut",
        run.shortcut.map(|s| match s {
            qc::ClassicalShortcut::Even => "even",
            qc::ClassicalShortcut::PrimePower => "prime-power",
        }),
    );
    r.note("attempts", run.attempts.len());
    r.note("factors", run.factors.map(|(p, q)| vec![p.min(q), p.max(q)]));
    match run.result() {
        Ok(_) => Ok(r),
        Err(e) => Err(Failure::Compute { message: e.to_string(), report: Some(r) }),
    }
}

#[derive(Args, Debug)]
pub struct RsaArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    #[arg(long, default_value_t = 11)]
    pub q: u64,
    /// Public exponent.
    #[arg(long, default_value_t = 3)]
    pub a: u64,
    /// Messages, e.g. 5 or 0..32.
    #[arg(long, default_value = "5")]
    pub messages: String,
}

pub fn rsa(a: &RsaArgs) -> Out {
    let msgs = parse::int_range(&a.messages).map_err(usage)?;
    let mut r = Report::default();
    r.param("p", a.p);
    r.param("q", a.q);
    r.param("a", a.a);
    r.param("messages", a.messages.as_str());
    let mut t = Table::new("messages", &["message", "encrypted", "recovered"]);
    let mut b = None;
    for &m in &msgs {
        if m < 0 {
            return Err(usage("messages must be non-negative"));
        }
        let run = qc::rsa_roundtrip(a.p, a.q, a.a, m as u64).map_err(usage)?;
        b = Some(run.b);
        t.push(vec![m.into(), run.encrypted.into(), run.recovered.into()]);
    }
    r.tables.push(t);
    r.note("n", a.p * a.q);
    r.note("phi", (a.p - 1) * (a.q - 1));
    r.note("b", b);
    Ok(r)
}

#[derive(Args, Debug)]
pub struct QftArgs {
    #[arg(long, default_value_t = 4)]
    pub qubits: usize,
    /// Period of the input comb.
    #[arg(long, default_value_t = 4)]
    pub period: usize,
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
}

pub fn qft_demo(a: &QftArgs) -> Out {
    if a.qubits == 0 || a.qubits > 20 || a.period == 0 || a.offset >= a.period {
        return Err(usage("need 1 ≤ qubits ≤ 20, period ≥ 1 and offset < period"));
    }
    let dim = 1usize << a.qubits;
    let amps: Vec<Complex64> = (0..dim).map(|x| if x % a.period == a.offset % a.period { cr(1.0) } else { cr(0.0) }).collect();
    let mut reg = QubitRegister::from_amplitudes(amps).map_err(usage)?;
    reg.qft(0..a.qubits).map_err(compute)?;
    let mut r = Report::default();
    r.param("qubits", a.qubits);
    r.param("period", a.period);
    r.param("offset", a.offset);
    let mut t = Table::new("spectrum", &["k", "probability", "re", "im"]);
    for (k, z) in reg.amplitudes().iter().enumerate() {
        t.push(vec![k.into(), z.norm_sqr().into(), z.re.into(), z.im.into()]);
    }
    r.tables.push(t);
    r.note("peak_spacing", dim as f64 / a.period as f64);
    r.note("norm", reg.norm());
    Ok(r)
}

/// Subcommand, topic, default output format.
pub const EXPERIMENTS: [(&str, &str, &str); 21] = [
    ("cg", "Multiplying representations", "json"),
    ("zeeman", "Detailed analysis of the Zeeman effect", "csv"),
    ("rotate", "How to calculate a general rotation matrix", "json"),
    ("rabi", "The evolution of a two-site system", "csv"),
    ("lz", "Landau-Zener dynamics", "csv"),
    ("fgr-decay", "Wigner decay and its connection to the LDOS", "csv"),
    ("gamow", "The Gamow Formula", "csv"),
    ("ring-spectrum", "The energy levels of a ring with a scatterer", "csv"),
    ("ab-flux-sweep", "The Aharonov-Bohm geometry", "csv"),
    ("network", "Finding the eigenstates of a network", "csv"),
    ("fabry-perot", "Fabry-Perot interference / transmission resonance", "csv"),
    ("sphere-xsec", "Scattering by a hard sphere", "csv"),
    ("phase-shifts", "The scattered wave, phase shifts, cross section", "json"),
    ("born", "The cross section in the Born approximation", "csv"),
    ("wigner", "Wigner function and Wigner-Weyl formalism", "csv"),
    ("dimer", "A two site system with N Bosons", "csv"),
    ("bell", "The violation of Bell's inequality", "json"),
    ("schmidt", "Schmidt decomposition", "json"),
    ("shor", "The factoring algorithm", "json"),
    ("rsa", "Motivating Quantum Computation", "json"),
    ("qft-demo", "The quantum Fourier transform", "csv"),
];

pub fn list() -> Report {
    let mut r = Report::default();
    let mut t = Table::new("experiments", &["subcommand", "topic", "default_format"]);
    for (name, topic, fmt) in EXPERIMENTS {
        t.push(vec![name.into(), topic.into(), fmt.into()]);
    }
    r.tables.push(t);
    r.note("count", EXPERIMENTS.len());
    r
}
