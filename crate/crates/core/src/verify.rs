//! Numerical self-check battery: every layer's invariants evaluated on a
//! configurable set of dimensions and channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{basis_states, gamma_triple, make_channel, modified_completeness_error, SchmidtChannel};
use crate::dilation::dilate;
use crate::error::{Error, Result};
use crate::fidelity::{report, simulate, Corrections, SimulationOptions};
use crate::formulas::{entropy_to_channel_d2, f_otaf, f_product, f_theta_d2};
use crate::linalg::{haar_random_ket, Operator, C64};
use crate::povm::{
    assemble_conclusive, build_theta_povm, lambda_max, refine_inconclusive_product,
    refine_inconclusive_residual, PovmSet, ThetaPovmFamily,
};
use crate::weyl::{build_weyl_basis, maximally_entangled_basis, UnitaryBasis};

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Coeffs(Vec<f64>),
    Entropy(f64),
    CosThetaC(f64),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<SchmidtChannel> {
        match self {
            ChannelSpec::Coeffs(c) => make_channel(c),
            ChannelSpec::Entropy(s) => Ok(entropy_to_channel_d2(*s)?.channel),
            ChannelSpec::CosThetaC(c) => SchmidtChannel::from_cos_theta_c(*c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Value(f64),
    Max,
}

impl LambdaSpec {
    pub fn resolve(&self, ch: &SchmidtChannel) -> f64 {
        match self {
            LambdaSpec::Value(v) => *v,
            LambdaSpec::Max => lambda_max(ch),
        }
    }
}

/// Channel used for dimension `d` when none is given: weights ∝ `d, d-1, …, 1`.
pub fn default_channel(d: usize) -> Result<SchmidtChannel> {
    let total = (d * (d + 1) / 2) as f64;
    make_channel(&(0..d).map(|k| ((d - k) as f64 / total).sqrt()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub dims: Vec<usize>,
    pub channel: Option<ChannelSpec>,
    pub lambda: LambdaSpec,
    pub seed: u64,
    pub mc_runs: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            channel: None,
            lambda: LambdaSpec::Max,
            seed: 1,
            mc_runs: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// Pass when `residual ≤ tolerance`.
    AtMost,
    /// Pass when `residual ≥ tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub group: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Default)]
struct Battery {
    rows: Vec<CheckRow>,
}

impl Battery {
    fn push(&mut self, group: &str, name: impl Into<String>, residual: f64, tolerance: f64, bound: Bound, note: Option<String>) {
        let passed = match bound {
            Bound::AtMost => residual <= tolerance,
            Bound::AtLeast => residual >= tolerance,
        };
        self.rows.push(CheckRow {
            group: group.into(),
            name: name.into(),
            residual,
            tolerance,
            bound,
            passed,
            note,
        });
    }

    fn at_most(&mut self, group: &str, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.push(group, name, residual, tolerance, Bound::AtMost, None);
    }

    fn error(&mut self, group: &str, name: impl Into<String>, err: &Error) {
        self.push(group, name, f64::INFINITY, 0.0, Bound::AtMost, Some(err.to_string()));
    }

    fn guard(&mut self, group: &str, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(group, name, &e);
        }
    }
}

fn weyl_checks(b: &mut Battery, d: usize, basis: &UnitaryBasis) {
    let g = format!("weyl d={d}");
    let unit = basis.ops().iter().map(|u| u.unitarity_error()).fold(0.0, f64::max);
    b.at_most(&g, "unitarity", unit, 1e-12);
    b.at_most(&g, "trace orthogonality", basis.trace_orthogonality_error(), 1e-10);
    b.at_most(&g, "completeness relation", basis.completeness_error(), 1e-10);
    let bell = maximally_entangled_basis(basis);
    let mut gram: f64 = 0.0;
    for (x, kx) in bell.iter().enumerate() {
        for (y, ky) in bell.iter().enumerate() {
            let want = if x == y { 1.0 } else { 0.0 };
            gram = gram.max((kx.inner(ky).unwrap_or(C64::new(f64::NAN, 0.0)) - want).norm());
        }
    }
    b.at_most(&g, "entangled basis orthonormality", gram, 1e-12);
}

fn channel_checks(b: &mut Battery, d: usize, ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<()> {
    let g = format!("channel d={d}");
    let t = gamma_triple(ch, basis)?;
    b.at_most(&g, "gamma left inverse", t.left_inverse_error(), 1e-10);
    b.at_most(&g, "gamma right inverse", t.right_inverse_error(), 1e-10);
    b.at_most(&g, "modified completeness", modified_completeness_error(ch, basis)?, 1e-10);
    Ok(())
}

fn povm_checks(b: &mut Battery, d: usize, p: &PovmSet, ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<bool> {
    let g = format!("povm d={d}");
    let lam = p.lambda();
    b.at_most(&g, "completeness", p.completeness_error(), 1e-10);
    let min = p.min_eigenvalue()?;
    b.push(
        &g,
        format!("positivity (lambda = {lam}, lambda_max = {})", lambda_max(ch)),
        (-min).max(0.0),
        1e-10,
        Bound::AtMost,
        (min < -1e-10).then(|| format!("min eigenvalue {min:e}")),
    );
    let states = basis_states(ch, basis)?;
    b.at_most(&g, "identification ratio", p.identification_ratio(&states)?, 1e-10);
    let probs = p.haar_probabilities(ch)?;
    let n = d * d;
    let conc = probs[..n].iter().map(|q| (q - lam / n as f64).abs()).fold(0.0, f64::max);
    b.at_most(&g, "conclusive probability lambda/d^2", conc, 1e-10);
    let inc: f64 = probs[n..].iter().sum();
    b.at_most(&g, "inconclusive probability 1 - lambda", (inc - (1.0 - lam)).abs(), 1e-10);
    Ok(min >= -1e-10)
}

fn engine_checks(b: &mut Battery, d: usize, p: &PovmSet, ch: &SchmidtChannel, basis: &UnitaryBasis, cfg: &VerifyConfig) -> Result<()> {
    let g = format!("engine d={d}");
    let lam = p.lambda();
    let residual = refine_inconclusive_residual(p, basis)?;
    let product = refine_inconclusive_product(p)?;
    let r_res = report(&residual, ch, basis, Corrections::Auto)?;
    let reference = f_otaf(&ch.weights(), lam)?;
    b.at_most(&g, "residual strategy vs optimal formula", (r_res.f_total - reference).abs(), 1e-9);
    let r_prod = report(&product, ch, basis, Corrections::Paper)?;
    b.at_most(&g, "product strategy closed form", (r_prod.f_total - f_product(d, lam)).abs(), 1e-9);
    b.at_most(&g, "probabilities sum to one", (r_res.probability_sum() - 1.0).abs(), 1e-10);
    let r_auto = report(&product, ch, basis, Corrections::Auto)?;
    let cond = r_auto
        .outcomes
        .iter()
        .filter(|o| o.kind.is_conclusive())
        .filter_map(|o| o.conditional_fidelity())
        .map(|f| (f - 1.0).abs())
        .fold(0.0, f64::max);
    b.at_most(&g, "conclusive conditional fidelity", cond, 1e-10);
    if cfg.mc_runs > 0 {
        let sim = simulate(&residual, ch, basis, Corrections::Auto, cfg.mc_runs, cfg.seed, &SimulationOptions::default())?;
        let se = sim.report.f_total_se.max(1e-300);
        b.push(
            &g,
            format!("monte carlo vs exact ({} runs, sigmas)", cfg.mc_runs),
            (sim.report.f_total - r_res.f_total).abs() / se,
            4.0,
            Bound::AtMost,
            None,
        );
        if let Some(dev) = sim.report.conclusive_max_deviation {
            b.at_most(&g, "conclusive runs perfect", dev, 1e-12);
        }
    }
    Ok(())
}

fn dilation_checks(b: &mut Battery, d: usize, p: &PovmSet, ch: &SchmidtChannel, basis: &UnitaryBasis, seed: u64) -> Result<()> {
    let g = format!("dilation d={d}");
    let residual = refine_inconclusive_residual(p, basis)?;
    let dil = dilate(&residual, d)?;
    let c = dil.check();
    b.at_most(&g, "unitarity", c.unitarity_error, 1e-10);
    b.at_most(&g, "reconstruction", c.max_residual, 1e-10);
    b.at_most(&g, "completeness", c.completeness_error, 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = haar_random_ket(d, &mut rng)?;
    let psi = phi.tensor(&ch.state())?;
    let extended = dil.outcome_probabilities(&psi)?;
    let mut worst: f64 = 0.0;
    for (e, q) in residual.elements().iter().zip(&extended) {
        let direct = psi
            .inner(&e.operator.tensor(&Operator::identity(d))?.apply(&psi)?)?
            .re;
        worst = worst.max((direct - q).abs());
    }
    b.at_most(&g, "extended vs direct probabilities", worst, 1e-10);
    Ok(())
}

fn theta_checks(b: &mut Battery) -> Result<()> {
    let g = "theta family d=2";
    let basis = build_weyl_basis(2)?;
    let mut worst: f64 = 0.0;
    for cc in [0.0, 0.3, 0.6, 0.9] {
        let ch = SchmidtChannel::from_cos_theta_c(cc)?;
        for k in 0..20 {
            let c = k as f64 * 0.05;
            let fam = ThetaPovmFamily::optimal(cc, c)?;
            let p = refine_inconclusive_product(&build_theta_povm(&fam)?)?;
            let r = report(&p, &ch, &basis, Corrections::Paper)?;
            worst = worst.max((r.f_total - f_theta_d2(cc, c, fam.lambda())?).abs());
        }
    }
    b.at_most(g, "engine vs relaxed-angle formula", worst, 1e-9);
    let rejected = ThetaPovmFamily::new(0.6, 0.5, 0.5 + 1e-3).is_err();
    b.push(g, "positivity boundary rejects lambda + 1e-3", if rejected { 0.0 } else { 1.0 }, 0.0, Bound::AtMost, None);
    let mut inv: f64 = 0.0;
    for s in [0.19, 0.55, 1.0] {
        inv = inv.max((entropy_to_channel_d2(s)?.channel.entanglement_entropy()? - s).abs());
    }
    b.at_most(g, "entropy inversion round trip", inv, 1e-10);
    Ok(())
}

/// Product and residual strategies at `λ_max`: distinct for `d = 3`, equal
/// for `d = 2`.
fn discrepancy_checks(b: &mut Battery) -> Result<()> {
    let g = "strategy discrepancy";
    let w3 = [0.5, 0.3, 0.2];
    let ch3 = make_channel(&w3.map(f64::sqrt))?;
    let basis3 = build_weyl_basis(3)?;
    let lam3 = lambda_max(&ch3);
    let base = assemble_conclusive(&ch3, &basis3, lam3)?;
    let prod = report(&refine_inconclusive_product(&base)?, &ch3, &basis3, Corrections::Paper)?.f_total;
    let res = report(&refine_inconclusive_residual(&base, &basis3)?, &ch3, &basis3, Corrections::Auto)?.f_total;
    b.push(
        g,
        "d=3 a^2=(0.5,0.3,0.2) lambda_max: residual - product",
        res - prod,
        1e-3,
        Bound::AtLeast,
        Some(format!(
            "product {prod:.12} (= lambda + 2(1-lambda)/(d+1)), residual {res:.12} (= optimal formula {:.12})",
            f_otaf(&w3, lam3)?
        )),
    );
    let ch2 = SchmidtChannel::from_cos_theta_c(0.6)?;
    let basis2 = build_weyl_basis(2)?;
    let base = assemble_conclusive(&ch2, &basis2, lambda_max(&ch2))?;
    let prod = report(&refine_inconclusive_product(&base)?, &ch2, &basis2, Corrections::Paper)?.f_total;
    let res = report(&refine_inconclusive_residual(&base, &basis2)?, &ch2, &basis2, Corrections::Auto)?.f_total;
    b.push(
        g,
        "d=2 cos(theta_c)=0.6 lambda_max: |residual - product|",
        (res - prod).abs(),
        1e-12,
        Bound::AtMost,
        Some(format!("product {prod:.12}, residual {res:.12}")),
    );
    Ok(())
}

/// Run the whole battery. Failures become failing rows; this never panics
/// on bad input.
pub fn run_checks(cfg: &VerifyConfig) -> Vec<CheckRow> {
    let mut b = Battery::default();
    for &d in &cfg.dims {
        let basis = match build_weyl_basis(d) {
            Ok(x) => x,
            Err(e) => {
                b.error(&format!("weyl d={d}"), "construction", &e);
                continue;
            }
        };
        weyl_checks(&mut b, d, &basis);
        let ch = match &cfg.channel {
            Some(spec) => spec.build(),
            None => default_channel(d),
        };
        let ch = match ch {
            Ok(ch) if ch.dim() == d => ch,
            Ok(ch) => {
                b.error(&format!("channel d={d}"), "construction", &Error::Shape(format!("channel has dimension {}", ch.dim())));
                continue;
            }
            Err(e) => {
                b.error(&format!("channel d={d}"), "construction", &e);
                continue;
            }
        };
        b.guard(&format!("channel d={d}"), "gamma", |b| channel_checks(b, d, &ch, &basis));
        let lam = cfg.lambda.resolve(&ch);
        let p = match assemble_conclusive(&ch, &basis, lam) {
            Ok(p) => p,
            Err(e) => {
                b.error(&format!("povm d={d}"), "construction", &e);
                continue;
            }
        };
        let mut psd = false;
        b.guard(&format!("povm d={d}"), "structure", |b| {
            psd = povm_checks(b, d, &p, &ch, &basis)?;
            Ok(())
        });
        if !psd {
            continue;
        }
        b.guard(&format!("engine d={d}"), "evaluation", |b| engine_checks(b, d, &p, &ch, &basis, cfg));
        b.guard(&format!("dilation d={d}"), "construction", |b| dilation_checks(b, d, &p, &ch, &basis, cfg.seed));
    }
    b.guard("theta family d=2", "evaluation", theta_checks);
    b.guard("strategy discrepancy", "evaluation", discrepancy_checks);
    b.rows
}

pub fn all_passed(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.passed)
}

/// Plain-text table of check rows.
pub fn render_table(rows: &[CheckRow]) -> String {
    let name_w = rows.iter().map(|r| r.group.len() + r.name.len() + 2).max().unwrap_or(10);
    let mut out = format!("{:<name_w$}  {:>12}  {:>10}  {}\n", "check", "residual", "tolerance", "status");
    for r in rows {
        let label = format!("{}: {}", r.group, r.name);
        let op = match r.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        out.push_str(&format!(
            "{label:<name_w$}  {:>12.3e}  {op}{:>8.1e}  {}\n",
            r.residual,
            r.tolerance,
            if r.passed { "ok" } else { "FAIL" }
        ));
        if let Some(n) = &r.note {
            out.push_str(&format!("    {n}\n"));
        }
    }
    out
}
