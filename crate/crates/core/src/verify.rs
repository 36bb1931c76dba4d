//! Oracle-equivalence suites. Each suite compares closed-form evaluators
//! with independent ground truth (exact finite sums or truncated-Fock
//! computations) and reports the largest residual per check together with
//! the leak and cutoff-doubling gates of every truncated computation.

use std::f64::consts::PI;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coords::{DiskPoint, HyperboloidPoint};
use crate::error::{Error, Result};
use crate::geometry::{compose, interferometer_element, mobius_apply_inverse, InterferometerConfig};
use crate::half_integer::HalfInteger;
use crate::interferometer::{output_wigner_covariant, propagate_direct, DIRECT_LEAK_TARGET};
use crate::linalg::{adjoint, identity};
use crate::oracle::{
    boxed_kernel_block, build_operators, converged, disentangled_dfunction_exact, disentangled_kernel_element, fock_wigner, squeeze_matrix,
    GateReport, LEAK_LIMIT,
};
use crate::scalar::{cis, cx, Cx};
use crate::special::{dfunction, dfunction_matrix, DFunctionQuery};
use crate::state::TwoModeState;
use crate::states::{build_coherent_squeezed, build_su11_coherent, build_tmsv, decompose, recompose, Folding};
use crate::wigner::{wigner_grid, wigner_point, GridSpec, PhaseConvention, WignerEvaluator};

/// Largest chain or work cutoff the suites will try.
const MAX_ORACLE_CUTOFF: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Dfunc,
    Kernel,
    Wigner,
    Interferometer,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dfunc => "dfunc",
            Self::Kernel => "kernel",
            Self::Wigner => "wigner",
            Self::Interferometer => "interferometer",
            Self::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Self::All => vec![Self::Dfunc, Self::Kernel, Self::Wigner, Self::Interferometer],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dfunc" => Ok(Self::Dfunc),
            "kernel" => Ok(Self::Kernel),
            "wigner" => Ok(Self::Wigner),
            "interferometer" => Ok(Self::Interferometer),
            "all" => Ok(Self::All),
            _ => Err(Error::InvalidArgument(format!(
                "unknown suite '{s}' (expected dfunc, kernel, wigner, interferometer or all)"
            ))),
        }
    }
}

/// Sample sizes. [`VerifyOptions::default`] is the full acceptance size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub symmetry_queries: usize,
    pub wigner_points: usize,
    pub covariance_points: usize,
    pub covariance_grid: usize,
    pub kernel_max_offset: usize,
    pub kernel_taus: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_611,
            symmetry_queries: 10_000,
            wigner_points: 200,
            covariance_points: 100,
            covariance_grid: 101,
            kernel_max_offset: 15,
            kernel_taus: vec![0.1, 0.7, 1.4, 2.0, 2.5],
        }
    }
}

impl VerifyOptions {
    /// Reduced sizes for smoke runs.
    pub fn quick() -> Self {
        Self {
            symmetry_queries: 500,
            wigner_points: 20,
            covariance_points: 20,
            covariance_grid: 21,
            kernel_max_offset: 6,
            kernel_taus: vec![0.7, 2.5],
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_case: Option<Value>,
}

/// All gates of one kind folded together: worst leak, worst doubling
/// residual and the largest cutoff that was needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSummary {
    pub name: String,
    pub evaluations: usize,
    pub max_cutoff: usize,
    pub max_leak: f64,
    pub max_convergence_residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub gates: Vec<GateSummary>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub options: VerifyOptions,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == name)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max: f64,
    worst: Option<Value>,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, cases: 0, max: 0.0, worst: None }
    }

    fn record(&mut self, residual: f64, case: impl FnOnce() -> Value) {
        self.cases += 1;
        if residual.is_nan() || residual > self.max || self.worst.is_none() {
            self.max = if residual.is_nan() { f64::NAN } else { residual.max(self.max) };
            self.worst = Some(case());
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.into(),
            cases: self.cases,
            max_residual: self.max,
            tolerance: self.tolerance,
            passed: self.max <= self.tolerance,
            worst_case: self.worst,
        }
    }
}

struct GateTracker {
    name: &'static str,
    evaluations: usize,
    max_cutoff: usize,
    max_leak: f64,
    max_residual: f64,
    passed: bool,
}

impl GateTracker {
    fn new(name: &'static str) -> Self {
        Self { name, evaluations: 0, max_cutoff: 0, max_leak: 0.0, max_residual: 0.0, passed: true }
    }

    fn add(&mut self, g: &GateReport) {
        self.evaluations += 1;
        self.max_cutoff = self.max_cutoff.max(g.doubled_cutoff);
        self.max_leak = self.max_leak.max(g.leak);
        self.max_residual = self.max_residual.max(g.convergence_residual);
        self.passed &= g.passed;
    }

    fn finish(self) -> GateSummary {
        GateSummary {
            name: self.name.into(),
            evaluations: self.evaluations,
            max_cutoff: self.max_cutoff,
            max_leak: self.max_leak,
            max_convergence_residual: self.max_residual,
            passed: self.passed && self.evaluations > 0,
        }
    }
}

fn suite_report(suite: Suite, checks: Vec<Check>, gates: Vec<GateSummary>) -> SuiteReport {
    let passed = checks.iter().all(|c| c.passed) && gates.iter().all(|g| g.passed);
    SuiteReport { suite: suite.name().into(), passed, checks, gates }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut suites = Vec::new();
    for s in suite.members() {
        suites.push(match s {
            Suite::Dfunc => dfunc_suite(opts)?,
            Suite::Kernel => kernel_suite(opts)?,
            Suite::Wigner => wigner_suite(opts)?,
            Suite::Interferometer => interferometer_suite(opts)?,
            Suite::All => unreachable!("expanded by members"),
        });
    }
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport { passed, options: opts.clone(), suites })
}

fn h(twice: i64) -> HalfInteger {
    HalfInteger::from_twice(twice)
}

fn shift(k: HalfInteger, j: usize) -> HalfInteger {
    k + HalfInteger::from_int(j as i64)
}

/// `d_{mu mu'}(tau)` read off the normal-ordered kernel at `(tau/2, 0)`:
/// `<mu| w |mu'> = 2 d_{mu mu'}(tau) e^{i pi mu'}`.
pub fn disentangled_dfunction(k: HalfInteger, mu: HalfInteger, mu_prime: HalfInteger, tau: f64) -> Result<f64> {
    let p = HyperboloidPoint::new(tau / 2.0, 0.0)?;
    let w = disentangled_kernel_element(k, mu, mu_prime, &p)?;
    Ok((w * (-mu_prime).phase::<f64>()).re / 2.0)
}

/// Doubles `start` until `leak(cutoff) < LEAK_LIMIT` and the value at the
/// cutoff survives the doubling test, or the cap is reached.
fn gated<V>(
    start: usize,
    f: impl Fn(usize) -> Result<(V, f64)>,
    distance: impl Fn(&V, &V) -> f64,
) -> Result<(V, GateReport)> {
    let mut n = start;
    loop {
        let (_, leak) = f(n)?;
        if leak < LEAK_LIMIT || 2 * n > MAX_ORACLE_CUTOFF {
            break;
        }
        n *= 2;
    }
    loop {
        let (v, g) = converged(n, &f, &distance)?;
        if g.passed || 4 * n > MAX_ORACLE_CUTOFF {
            return Ok((v, g));
        }
        n *= 2;
    }
}

fn max_abs_diff(a: &Array2<Cx<f64>>, b: &Array2<Cx<f64>>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn dfunc_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut delta = Tracker::new("delta_at_zero", 0.0);
    for tk in 1..=8 {
        let k = h(tk);
        for j in 0..=30 {
            for jp in 0..=30 {
                let d = dfunction(&DFunctionQuery::new(k, shift(k, j), shift(k, jp), 0.0)?);
                let want: f64 = if j == jp { 1.0 } else { 0.0 };
                delta.record((d - want).abs(), || json!({"twice_k": tk, "j": j, "j_prime": jp, "value": d}));
            }
        }
    }

    // left side from the closed form, right side from the exact kernel series
    let mut symmetry = Tracker::new("exchange_symmetry", 1e-10);
    for _ in 0..opts.symmetry_queries {
        let tk = rng.gen_range(1..=8i64);
        let k = h(tk);
        let (j, jp) = (rng.gen_range(0..=30usize), rng.gen_range(0..=30usize));
        let tau = rng.gen_range(0.0..5.0);
        let (mu, mup) = (shift(k, j), shift(k, jp));
        let lhs = dfunction(&DFunctionQuery::new(k, mu, mup, tau)?);
        let sign = if (j + jp) % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = sign * disentangled_dfunction_exact(k, mup, mu, tau)?;
        let scale = lhs.abs().max(rhs.abs());
        let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        symmetry.record(rel, || json!({"twice_k": tk, "j": j, "j_prime": jp, "tau": tau, "lhs": lhs, "rhs": rhs}));
    }

    let mut series = Tracker::new("disentangled_series", 1e-8);
    for tk in 1..=6 {
        let k = h(tk);
        for tau in [0.3, 1.0, 2.0, 3.5, 5.0] {
            let m = dfunction_matrix(k, 16, tau)?;
            for j in 0..16 {
                for jp in 0..16 {
                    let o = disentangled_dfunction(k, shift(k, j), shift(k, jp), tau)?;
                    let r = (m[[j, jp]] - o).abs();
                    series.record(r, || json!({"twice_k": tk, "j": j, "j_prime": jp, "tau": tau, "closed_form": m[[j, jp]], "oracle": o}));
                }
            }
        }
    }

    let mut boxed = Tracker::new("boxed_kernel", 1e-8);
    let mut gate = GateTracker::new("boxed_kernel_chain");
    for tk in 1..=4 {
        let k = h(tk);
        for tau in [0.5, 1.0] {
            let p = HyperboloidPoint::new(tau, 0.0)?;
            let (b, g) = gated(64, |n| boxed_kernel_block(k, 11, &p, n), max_abs_diff)?;
            gate.add(&g);
            let m = dfunction_matrix(k, 11, 2.0 * tau)?;
            for j in 0..11 {
                for jp in 0..11 {
                    let want = shift(k, jp).phase::<f64>() * (2.0 * m[[j, jp]]);
                    let r = (b[[j, jp]] - want).norm();
                    boxed.record(r, || json!({"twice_k": tk, "j": j, "j_prime": jp, "tau": tau}));
                }
            }
        }
    }

    Ok(suite_report(
        Suite::Dfunc,
        vec![delta.finish(), symmetry.finish(), series.finish(), boxed.finish()],
        vec![gate.finish()],
    ))
}

fn kernel_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6b65_726e);
    let count = opts.kernel_max_offset + 1;
    let mut cross = Tracker::new("disentangled_vs_boxed", 1e-8);
    let mut closed = Tracker::new("closed_form_vs_boxed", 1e-8);
    let mut gate = GateTracker::new("boxed_kernel_chain");
    for tk in 1..=6 {
        let k = h(tk);
        for &tau in &opts.kernel_taus {
            let chi = rng.gen_range(-PI..PI);
            let p = HyperboloidPoint::new(tau, chi)?;
            let (b, g) = gated(64, |n| boxed_kernel_block(k, count, &p, n), max_abs_diff)?;
            gate.add(&g);
            let m = dfunction_matrix(k, count, 2.0 * tau)?;
            for j in 0..count {
                for jp in 0..count {
                    let (mu, mup) = (shift(k, j), shift(k, jp));
                    let dis = disentangled_kernel_element(k, mu, mup, &p)?;
                    let r = (dis - b[[j, jp]]).norm();
                    cross.record(r, || {
                        json!({"twice_k": tk, "j": j, "j_prime": jp, "tau": tau, "chi": chi,
                               "disentangled": [dis.re, dis.im], "boxed": [b[[j, jp]].re, b[[j, jp]].im]})
                    });
                    let cf = cis(chi * (j as f64 - jp as f64)) * mup.phase::<f64>() * (2.0 * m[[j, jp]]);
                    let r = (cf - b[[j, jp]]).norm();
                    closed.record(r, || json!({"twice_k": tk, "j": j, "j_prime": jp, "tau": tau, "chi": chi}));
                }
            }
        }
    }

    let mut unitarity = Tracker::new("squeeze_unitarity", 1e-8);
    let ops = build_operators::<f64>(24)?;
    for zeta in [cx(0.3, 0.2), cx(-0.5, 0.1), cx(0.0, 0.6)] {
        let s = squeeze_matrix(&ops, zeta)?.to_dense();
        let r = max_abs_diff(&s.dot(&adjoint(&s)), &identity(s.nrows()));
        unitarity.record(r, || json!({"zeta": [zeta.re, zeta.im], "cutoff": 24}));
    }

    Ok(suite_report(Suite::Kernel, vec![cross.finish(), closed.finish(), unitarity.finish()], vec![gate.finish()]))
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, tau_max: f64) -> Result<Vec<HyperboloidPoint<f64>>> {
    (0..n)
        .map(|_| HyperboloidPoint::new(rng.gen_range(0.0..tau_max), rng.gen_range(-PI..PI)))
        .collect()
}

fn fock_gated(state: &TwoModeState<f64>, p: &HyperboloidPoint<f64>) -> Result<(Cx<f64>, GateReport)> {
    let (na, nb) = (state.cutoff_a(), state.cutoff_b());
    gated(
        na.max(nb) + 40,
        |w| fock_wigner(state, p, na.max(w), nb.max(w)),
        |a, b| (a - b).norm(),
    )
}

fn wigner_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7769_676e);
    let mut states: Vec<(String, TwoModeState<f64>)> = Vec::new();
    for xi in [0.3, 0.485, 0.6] {
        states.push((format!("tmsv xi={xi}"), build_tmsv(cx(xi, 0.0), 60)?));
    }
    for tk in [2, 3] {
        let k = h(tk);
        let s = build_su11_coherent(k, DiskPoint::from_parts(0.35, -0.2)?, 60 + tk as usize)?;
        states.push((format!("su11_coherent k={k} xi=(0.35,-0.2)"), recompose(&s)?));
    }

    let mut oracle = Tracker::new("fock_oracle", 1e-6);
    let mut gate = GateTracker::new("fock_work_cutoff");
    for (name, s) in &states {
        let eval = WignerEvaluator::new(&decompose(s, Folding::Separate)?);
        for p in random_points(&mut rng, opts.wigner_points, 2.0)? {
            let w = eval.eval(&p, PhaseConvention::Literal);
            let (o, g) = fock_gated(s, &p)?;
            gate.add(&g);
            let r = (w - o).norm() / o.norm().max(1.0);
            oracle.record(r, || {
                json!({"state": name, "tau": p.tau(), "chi": p.chi(), "closed_form": [w.re, w.im], "oracle": [o.re, o.im]})
            });
        }
    }

    // several irreps of both families at once
    let mut multi = Tracker::new("fock_oracle_multi_irrep", 1e-6);
    let s = build_coherent_squeezed(cx(1.0, 0.0), cx(0.6, 0.3), Some(40))?;
    let d = decompose(&s, Folding::Separate)?;
    for p in random_points(&mut rng, (opts.wigner_points / 4).max(5), 2.0)? {
        let w = wigner_point(&d, &p, PhaseConvention::Literal);
        let (o, g) = fock_gated(&s, &p)?;
        gate.add(&g);
        let r = (w - o).norm() / o.norm().max(1.0);
        multi.record(r, || json!({"state": "coherent_times_squeezed alpha=1 xi=(0.6,0.3)", "tau": p.tau(), "chi": p.chi()}));
    }

    let mut real = Tracker::new("single_irrep_real", 1e-10);
    for (name, s) in &states {
        let d = decompose(s, Folding::Separate)?;
        for p in random_points(&mut rng, 10, 2.0)? {
            let w = wigner_point(&d, &p, PhaseConvention::PerIrrepNormalized);
            real.record(w.im.abs(), || json!({"state": name, "tau": p.tau(), "chi": p.chi()}));
        }
    }

    Ok(suite_report(Suite::Wigner, vec![oracle.finish(), multi.finish(), real.finish()], vec![gate.finish()]))
}

fn field_distance(a: &[Cx<f64>], b: &[Cx<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Work cutoffs at which direct propagation meets [`DIRECT_LEAK_TARGET`].
fn direct_work(state: &TwoModeState<f64>, cfg: &InterferometerConfig) -> Result<usize> {
    let mut w = state.cutoff_a().max(state.cutoff_b()) + 40;
    loop {
        let (_, leak) = propagate_direct(state, cfg, w, w)?;
        if leak < DIRECT_LEAK_TARGET || 2 * w > MAX_ORACLE_CUTOFF {
            return Ok(w);
        }
        w *= 2;
    }
}

fn direct_field(
    state: &TwoModeState<f64>,
    cfg: &InterferometerConfig,
    work: usize,
    points: &[HyperboloidPoint<f64>],
) -> Result<(Vec<Cx<f64>>, f64)> {
    let (amps, leak) = propagate_direct(state, cfg, work, work)?;
    let out = TwoModeState::new(amps, 1e-6)?;
    let eval = WignerEvaluator::new(&decompose(&out, Folding::Separate)?);
    Ok((points.iter().map(|p| eval.eval(p, PhaseConvention::Literal)).collect(), leak))
}

fn interferometer_suite(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x696e_7466);
    let mut gate = GateTracker::new("direct_work_cutoff");

    let mut grid_cov = Tracker::new("grid_covariance", 1e-6);
    let tmsv = build_tmsv(cx(0.5, 0.0), 60)?;
    let tmsv_d = decompose(&tmsv, Folding::Separate)?;
    let cfg = InterferometerConfig::new(0.5, 0.0, PI / 2.0)?;
    let grid = GridSpec::disk(1.0, opts.covariance_grid)?;
    let cov = output_wigner_covariant(&tmsv_d, &cfg, &grid, PhaseConvention::Literal)?;
    let pts: Vec<HyperboloidPoint<f64>> = cov.points.iter().map(|p| p.point).collect();
    let work = direct_work(&tmsv, &cfg)?;
    let (dir, g) = converged(work, |w| direct_field(&tmsv, &cfg, w, &pts), |a, b| field_distance(a, b))?;
    gate.add(&g);
    for ((a, b), p) in cov.values.iter().zip(&dir).zip(&cov.points) {
        grid_cov.record((a - b).norm(), || {
            json!({"xi": [p.xi.re, p.xi.im], "covariant": [a.re, a.im], "direct": [b.re, b.im]})
        });
    }

    let mut random = Tracker::new("random_covariance", 1e-6);
    let mut cases: Vec<(String, TwoModeState<f64>)> = vec![("tmsv xi=(0.3,0.2)".into(), build_tmsv(cx(0.3, 0.2), 60)?)];
    for tk in 1..=4 {
        let xi = cis(rng.gen_range(-PI..PI)) * rng.gen_range(0.0..0.5);
        let s = build_su11_coherent(h(tk), DiskPoint::new(xi)?, 60 + tk as usize)?;
        cases.push((format!("su11_coherent k={} xi=({:.6},{:.6})", h(tk), xi.re, xi.im), recompose(&s)?));
    }
    for (name, s) in &cases {
        let c = InterferometerConfig::new(rng.gen_range(0.0..0.8), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))?;
        let g_el = interferometer_element::<f64>(&c)?;
        let d = decompose(s, Folding::Separate)?;
        let eval = WignerEvaluator::new(&d);
        let pts: Vec<DiskPoint<f64>> = (0..opts.covariance_points)
            .map(|_| DiskPoint::new(cis(rng.gen_range(-PI..PI)) * rng.gen_range(0.0..0.95)))
            .collect::<Result<_>>()?;
        let hyp: Vec<HyperboloidPoint<f64>> = pts.iter().map(|p| p.to_hyperboloid()).collect();
        let work = direct_work(s, &c)?;
        let (dir, g) = converged(work, |w| direct_field(s, &c, w, &hyp), |a, b| field_distance(a, b))?;
        gate.add(&g);
        for (p, b) in pts.iter().zip(&dir) {
            let a = eval.eval(&mobius_apply_inverse(&g_el, p).to_hyperboloid(), PhaseConvention::Literal);
            random.record((a - b).norm(), || {
                json!({"state": name, "cfg": c, "xi": [p.xi().re, p.xi().im], "covariant": [a.re, a.im], "direct": [b.re, b.im]})
            });
        }
    }

    let mut unitary = Tracker::new("direct_unitarity", 1e-8);
    let mut group = Tracker::new("phase_composition", 1e-8);
    for (name, s) in &cases[..3] {
        let (c1, c2) = (InterferometerConfig::new(0.4, 0.7, 0.6)?, InterferometerConfig::new(0.4, 0.7, 1.5)?);
        let c12 = InterferometerConfig::new(0.4, 0.7, 2.1)?;
        let work = direct_work(s, &c12)?.max(direct_work(s, &c1)?);
        let (once, _) = propagate_direct(s, &c12, work, work)?;
        let norm: f64 = once.iter().map(|z| z.norm_sqr()).sum();
        unitary.record((norm - 1.0).abs(), || json!({"state": name, "cfg": c12}));
        let (first, _) = propagate_direct(s, &c1, work, work)?;
        let mid = TwoModeState::new(first, 1e-6)?;
        let (twice, _) = propagate_direct(&mid, &c2, 2 * work, 2 * work)?;
        let grid = GridSpec::disk(0.9, 11)?;
        let fa = wigner_grid(&decompose(&TwoModeState::new(once, 1e-6)?, Folding::Separate)?, &grid, PhaseConvention::Literal)?;
        let fb = wigner_grid(&decompose(&TwoModeState::new(twice, 1e-6)?, Folding::Separate)?, &grid, PhaseConvention::Literal)?;
        group.record(field_distance(&fa.values, &fb.values), || json!({"state": name, "phases": [0.6, 1.5]}));
    }

    let geometry = geometry_checks(&mut rng)?;
    let mut checks = vec![grid_cov.finish(), random.finish(), unitary.finish(), group.finish()];
    checks.extend(geometry);
    Ok(suite_report(Suite::Interferometer, checks, vec![gate.finish()]))
}

fn geometry_checks(rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let random_cfg = |rng: &mut ChaCha8Rng| {
        InterferometerConfig::new(rng.gen_range(0.0..1.2), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI))
    };
    let mut identities = Tracker::new("group_identities", 1e-12);
    let mut det = Tracker::new("determinant_under_composition", 1e-10);
    let mut action = Tracker::new("mobius_composition", 1e-12);
    let mut disk = Tracker::new("disk_preservation", 0.0);
    let mut minkowski = Tracker::new("minkowski_norm", 1e-10);
    for i in 0..10_000 {
        let a = interferometer_element::<f64>(&random_cfg(rng)?)?;
        let b = interferometer_element::<f64>(&random_cfg(rng)?)?;
        let raw_a = a.alpha() * b.alpha() + a.beta() * b.beta().conj();
        let raw_b = a.alpha() * b.beta() + a.beta() * b.alpha().conj();
        det.record((raw_a.norm_sqr() - raw_b.norm_sqr() - 1.0).abs(), || json!({"case": i}));
        if i < 500 {
            let c = interferometer_element::<f64>(&random_cfg(rng)?)?;
            let e = compose(&a, &a.inverse())?;
            let r1 = (e.alpha() - cx(1.0, 0.0)).norm().max(e.beta().norm());
            let l = compose(&compose(&a, &b)?, &c)?;
            let r = compose(&a, &compose(&b, &c)?)?;
            let r2 = ((l.alpha() - r.alpha()).norm().max((l.beta() - r.beta()).norm())) / l.alpha().norm();
            identities.record(r1.max(r2), || json!({"case": i}));

            let p = DiskPoint::new(cis(rng.gen_range(-PI..PI)) * rng.gen_range(0.0..0.95))?;
            let lhs = mobius_apply_inverse(&compose(&a, &b)?, &p);
            let rhs = mobius_apply_inverse(&b, &mobius_apply_inverse(&a, &p));
            let back = mobius_apply_inverse(&a.inverse(), &mobius_apply_inverse(&a, &p));
            action.record((lhs.xi() - rhs.xi()).norm().max((back.xi() - p.xi()).norm()), || {
                json!({"case": i, "xi": [p.xi().re, p.xi().im]})
            });

            let edge = DiskPoint::new(cis(rng.gen_range(-PI..PI)) * (1.0 - 1e-9))?;
            // unclamped image, so the check sees what rounding does at the rim
            let z = edge.xi();
            let img = ((-a.alpha().conj() * z + a.beta()) / (a.beta().conj() * z - a.alpha())).norm();
            disk.record(if img < 1.0 { 0.0 } else { img }, || json!({"case": i, "image_modulus": img}));

            let q = HyperboloidPoint::new(rng.gen_range(0.0..6.0), rng.gen_range(-PI..PI))?;
            let [n0, n1, n2] = q.minkowski_vector();
            minkowski.record((n0 * n0 - n1 * n1 - n2 * n2 - 1.0).abs() / (n0 * n0), || {
                json!({"tau": q.tau(), "chi": q.chi()})
            });
        }
    }
    Ok(vec![identities.finish(), det.finish(), action.finish(), disk.finish(), minkowski.finish()])
}
