//! Haar-averaged teleportation fidelity, exact and sampled.
//!
//! For a rank-one element `|v⟩⟨v|` the receiver's unnormalized state is
//! `B|φ⟩` with `B_{j,i} = conj(v_{ij}) a_j`. Over Haar-random inputs
//!
//! ```text
//! E[‖Bφ‖²]          = Tr(B†B) / d
//! E[|⟨φ|VBφ⟩|²]     = (|Tr(VB)|² + Tr(B†B)) / (d(d+1))
//! ```
//!
//! so every outcome's probability and fidelity contribution is a closed
//! form in `B` and the receiver's correction `V`.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::SchmidtChannel;
use crate::error::{Error, Result};
use crate::linalg::{fill_haar, hermitian_eigen, Ket, Operator, C64, ZERO};
use crate::povm::{ElementKind, PovmElement, PovmSet, Refinement};
use crate::weyl::{shift_power, UnitaryBasis};

/// Unitarity tolerance for corrections.
pub const CORRECTION_UNITARY_TOL: f64 = 1e-10;
/// Largest per-run drift of the total outcome probability.
pub const PROBABILITY_DRIFT_TOL: f64 = 1e-8;
/// Runs per independently seeded shard.
pub const SHARD_RUNS: usize = 2048;

/// How the receiver picks a correction for each outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Corrections {
    /// Fidelity-maximizing unitary for each outcome.
    Auto,
    /// `U^α` for outcomes tied to a basis unitary, the shift `|j⟩ → |i⟩` for
    /// product outcomes.
    Paper,
}

impl FromStr for Corrections {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Corrections::Auto),
            "paper" => Ok(Corrections::Paper),
            other => Err(Error::Domain(format!(
                "unknown corrections '{other}' (expected auto|paper)"
            ))),
        }
    }
}

impl Corrections {
    pub fn as_str(&self) -> &'static str {
        match self {
            Corrections::Auto => "auto",
            Corrections::Paper => "paper",
        }
    }
}

/// Linear map from the sender's input amplitudes to the receiver's
/// unnormalized state for one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeChannelMap {
    pub alpha: usize,
    pub b: Operator,
}

impl OutcomeChannelMap {
    /// `Tr(B†B) / d`
    pub fn haar_probability(&self) -> f64 {
        self.b.hs_inner(&self.b).expect("square").re / self.b.dim_in() as f64
    }
}

fn map_from_factor(v: Option<&Ket>, ch: &SchmidtChannel) -> Operator {
    let d = ch.dim();
    let a = ch.coeffs();
    match v {
        None => Operator::zeros(d, d),
        Some(v) => {
            let amps = v.amplitudes();
            Operator::from_matrix(DMatrix::from_fn(d, d, |j, i| {
                amps[i * d + j].conj() * a[j]
            }))
        }
    }
}

/// Contract a rank-one (or zero) joint element with the channel.
pub fn outcome_channel(
    alpha: usize,
    element: &Operator,
    ch: &SchmidtChannel,
) -> Result<OutcomeChannelMap> {
    let d = ch.dim();
    if element.dim_in() != d * d || element.dim_out() != d * d {
        return Err(Error::Shape(format!(
            "element is {}x{}, expected {n}x{n}",
            element.dim_out(),
            element.dim_in(),
            n = d * d
        )));
    }
    let wrapped = PovmElement {
        kind: ElementKind::Remainder,
        operator: element.clone(),
        factor: None,
    };
    let v = wrapped.rank_one_factor(alpha)?;
    Ok(OutcomeChannelMap {
        alpha,
        b: map_from_factor(v.as_ref(), ch),
    })
}

fn element_map(alpha: usize, e: &PovmElement, ch: &SchmidtChannel) -> Result<OutcomeChannelMap> {
    let v = e.rank_one_factor(alpha)?;
    Ok(OutcomeChannelMap {
        alpha,
        b: map_from_factor(v.as_ref(), ch),
    })
}

/// Exact Haar-averaged `(probability, fidelity term)` of an outcome with map
/// `b` and receiver correction `v`.
pub fn avg_fidelity_term(b: &Operator, v: &Operator) -> Result<(f64, f64)> {
    if !b.is_square() || v.dim_in() != b.dim_out() || v.dim_out() != b.dim_out() {
        return Err(Error::Shape(format!(
            "map {}x{} with correction {}x{}",
            b.dim_out(),
            b.dim_in(),
            v.dim_out(),
            v.dim_in()
        )));
    }
    let err = v.unitarity_error();
    if err > CORRECTION_UNITARY_TOL {
        return Err(Error::Domain(format!("correction is not unitary (error {err:e})")));
    }
    let d = b.dim_in() as f64;
    let weight = b.hs_inner(b)?.re;
    let overlap = v.mul(b)?.trace().norm_sqr();
    Ok((weight / d, (overlap + weight) / (d * (d + 1.0))))
}

/// Unitary `V` maximizing `|Tr(VB)|`: with `B = P Σ Q†`, `V = Q P†`.
///
/// `Q` comes from the eigenvectors of `B†B` (largest first) and `P` from
/// Gram-Schmidt on the columns `B q_k`, completed over the computational
/// basis where `B` is rank deficient. Each `p_k` has its largest-modulus
/// entry made real positive, with `q_k` rotated by the same phase.
pub fn optimal_correction(b: &Operator) -> Operator {
    let n = b.dim_in();
    let gram = b.adjoint().mul(b).expect("square");
    let eig = hermitian_eigen(&gram).expect("square");
    let scale = eig.max_value().max(0.0).sqrt().max(1.0);
    let mut q = DMatrix::from_element(n, n, ZERO);
    let mut p = DMatrix::from_element(n, n, ZERO);
    let mut used = vec![false; n];
    for k in 0..n {
        let src = n - 1 - k;
        let qk = eig.vectors.column(src).into_owned();
        let mut w = b.matrix() * &qk;
        for _ in 0..2 {
            for prev in 0..k {
                let c = p.column(prev).dotc(&w);
                w -= p.column(prev) * c;
            }
        }
        let mut norm = w.norm();
        if norm <= 1e-13 * scale {
            // null direction: the basis vector with the largest residual
            let mut best = (0, DVector::from_element(n, ZERO), -1.0);
            for t in (0..n).filter(|&t| !used[t]) {
                let mut r = DVector::from_element(n, ZERO);
                r[t] = C64::new(1.0, 0.0);
                for _ in 0..2 {
                    for prev in 0..k {
                        let c = p.column(prev).dotc(&r);
                        r -= p.column(prev) * c;
                    }
                }
                let rn = r.norm();
                if rn > best.2 {
                    best = (t, r, rn);
                }
            }
            used[best.0] = true;
            w = best.1;
            norm = best.2;
        }
        let mut pk = w / C64::new(norm, 0.0);
        let pivot = pk
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap_or(ZERO);
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
        pk *= phase;
        p.set_column(k, &pk);
        q.set_column(k, &(qk * phase));
    }
    Operator::from_matrix(q * p.adjoint())
}

/// Correction the receiver applies after outcome `alpha`.
pub fn correction_for(
    alpha: usize,
    kind: ElementKind,
    map: &OutcomeChannelMap,
    basis: &UnitaryBasis,
    corrections: Corrections,
) -> Result<Operator> {
    let d = basis.dim();
    match corrections {
        Corrections::Auto => Ok(optimal_correction(&map.b)),
        Corrections::Paper => match kind {
            ElementKind::Conclusive { alpha: a } | ElementKind::InconclusiveResidual { alpha: a } => {
                Ok(basis.op(a).clone())
            }
            ElementKind::InconclusiveProduct { i, j } => Ok(shift_power(d, (i + d - j) % d)),
            ElementKind::Remainder => {
                if map.b.max_abs() == 0.0 {
                    Ok(Operator::identity(d))
                } else {
                    Err(Error::DecompositionRequired { alpha, rank: 2 })
                }
            }
        },
    }
}

/// Per-outcome map and correction.
#[derive(Debug, Clone)]
pub struct PreparedOutcome {
    pub alpha: usize,
    pub kind: ElementKind,
    pub map: OutcomeChannelMap,
    pub correction: Operator,
}

pub fn prepare_outcomes(
    p: &PovmSet,
    ch: &SchmidtChannel,
    basis: &UnitaryBasis,
    corrections: Corrections,
) -> Result<Vec<PreparedOutcome>> {
    let d = p.local_dim();
    if ch.dim() != d || basis.dim() != d {
        return Err(Error::Shape(format!(
            "POVM d = {d}, channel d = {}, basis d = {}",
            ch.dim(),
            basis.dim()
        )));
    }
    p.elements()
        .iter()
        .enumerate()
        .map(|(alpha, e)| {
            let map = element_map(alpha, e, ch)?;
            let correction = correction_for(alpha, e.kind, &map, basis, corrections)?;
            Ok(PreparedOutcome {
                alpha,
                kind: e.kind,
                map,
                correction,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeTerm {
    pub alpha: usize,
    #[serde(flatten)]
    pub kind: ElementKind,
    pub probability: f64,
    pub fidelity_term: f64,
    pub probability_se: f64,
    pub fidelity_term_se: f64,
}

impl OutcomeTerm {
    /// Fidelity given that this outcome occurred; `None` for a never-seen outcome.
    pub fn conditional_fidelity(&self) -> Option<f64> {
        (self.probability > 0.0).then(|| self.fidelity_term / self.probability)
    }
}

/// Haar-averaged outcome probabilities and fidelity contributions, split into
/// conclusive and inconclusive events.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub method: Method,
    pub lambda: f64,
    pub refinement: Refinement,
    pub corrections: Corrections,
    pub runs: usize,
    pub outcomes: Vec<OutcomeTerm>,
    pub p_conclusive: f64,
    pub p_inconclusive: f64,
    pub f_conclusive: f64,
    pub f_inconclusive: f64,
    pub f_total: f64,
    pub p_inconclusive_se: f64,
    pub f_conclusive_se: f64,
    pub f_inconclusive_se: f64,
    pub f_total_se: f64,
    /// Largest `|f - 1|` over conclusive runs (sampled reports only).
    pub conclusive_max_deviation: Option<f64>,
}

impl FidelityReport {
    pub fn probability_sum(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }
}

/// Exact Haar-average report.
pub fn report(
    p: &PovmSet,
    ch: &SchmidtChannel,
    basis: &UnitaryBasis,
    corrections: Corrections,
) -> Result<FidelityReport> {
    let prepared = prepare_outcomes(p, ch, basis, corrections)?;
    let mut outcomes = Vec::with_capacity(prepared.len());
    let (mut pc, mut pi, mut fc, mut fi) = (0.0, 0.0, 0.0, 0.0);
    for o in &prepared {
        let (prob, term) = avg_fidelity_term(&o.map.b, &o.correction)?;
        if o.kind.is_conclusive() {
            pc += prob;
            fc += term;
        } else {
            pi += prob;
            fi += term;
        }
        outcomes.push(OutcomeTerm {
            alpha: o.alpha,
            kind: o.kind,
            probability: prob,
            fidelity_term: term,
            probability_se: 0.0,
            fidelity_term_se: 0.0,
        });
    }
    Ok(FidelityReport {
        method: Method::Exact,
        lambda: p.lambda(),
        refinement: p.refinement(),
        corrections,
        runs: 0,
        outcomes,
        p_conclusive: pc,
        p_inconclusive: pi,
        f_conclusive: fc,
        f_inconclusive: fi,
        f_total: fc + fi,
        p_inconclusive_se: 0.0,
        f_conclusive_se: 0.0,
        f_inconclusive_se: 0.0,
        f_total_se: 0.0,
        conclusive_max_deviation: None,
    })
}

/// One classical message from sender to receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TranscriptRecord {
    pub run_index: u64,
    pub outcome_alpha: usize,
    pub conclusive_flag: u8,
    pub bits_sent: u32,
}

/// `ceil(log2 n) + 1`: the outcome label plus the conclusive/inconclusive bit.
pub fn bits_per_message(n_outcomes: usize) -> u32 {
    let label = if n_outcomes <= 1 {
        0
    } else {
        n_outcomes.next_power_of_two().trailing_zeros()
    };
    label + 1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulationOptions {
    pub record_transcript: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub report: FidelityReport,
    pub transcript: Option<Vec<TranscriptRecord>>,
}

/// Produces the receiver's unnormalized post-measurement states.
///
/// For input `φ`, `fill` writes every Kraus branch of every outcome as a
/// `d`-vector, outcomes in order, `branch_counts()[α]` branches each.
pub trait BranchSource: Sync {
    fn local_dim(&self) -> usize;
    fn branch_counts(&self) -> Vec<usize>;
    fn fill(&self, phi: &[C64], out: &mut [C64]);
}

/// Branches read directly off the joint state `|φ⟩ ⊗ |ψ⟩₂₃`: for Kraus
/// vector `w`, `x_k = Σ_ij conj(w_ij) φ_i ψ_jk`.
struct DirectBranches {
    d: usize,
    channel: Vec<C64>,
    rows: Vec<Vec<Vec<C64>>>,
}

impl DirectBranches {
    fn new(p: &PovmSet, ch: &SchmidtChannel) -> Result<Self> {
        let d = p.local_dim();
        let mut rows = Vec::with_capacity(p.len());
        for e in p.elements() {
            let eig = hermitian_eigen(&e.operator)?;
            let tol = 1e-12 * eig.max_value().max(1.0);
            let mut branch = Vec::new();
            for (k, &mu) in eig.values.iter().enumerate() {
                if mu > tol {
                    let w = eig.vector(k);
                    let s = mu.sqrt();
                    branch.push(w.amplitudes().iter().map(|c| c.conj() * s).collect());
                }
            }
            rows.push(branch);
        }
        Ok(Self {
            d,
            channel: ch.state().amplitudes().to_vec(),
            rows,
        })
    }
}

impl BranchSource for DirectBranches {
    fn local_dim(&self) -> usize {
        self.d
    }

    fn branch_counts(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.len()).collect()
    }

    fn fill(&self, phi: &[C64], out: &mut [C64]) {
        let d = self.d;
        let mut y = vec![ZERO; d];
        let mut cursor = 0;
        for row in self.rows.iter().flatten() {
            for (j, yj) in y.iter_mut().enumerate() {
                *yj = (0..d).map(|i| row[i * d + j] * phi[i]).sum();
            }
            for k in 0..d {
                out[cursor + k] = (0..d).map(|j| y[j] * self.channel[j * d + k]).sum();
            }
            cursor += d;
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    runs: u64,
    count: Vec<u64>,
    term_sum: Vec<f64>,
    term_sq: Vec<f64>,
    total: (f64, f64),
    conclusive: (f64, f64),
    inconclusive: (f64, f64),
    inconclusive_hits: u64,
    conclusive_max_dev: f64,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n],
            term_sum: vec![0.0; n],
            term_sq: vec![0.0; n],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.runs += other.runs;
        for a in 0..self.count.len() {
            self.count[a] += other.count[a];
            self.term_sum[a] += other.term_sum[a];
            self.term_sq[a] += other.term_sq[a];
        }
        for (x, y) in [
            (&mut self.total, other.total),
            (&mut self.conclusive, other.conclusive),
            (&mut self.inconclusive, other.inconclusive),
        ] {
            x.0 += y.0;
            x.1 += y.1;
        }
        self.inconclusive_hits += other.inconclusive_hits;
        self.conclusive_max_dev = self.conclusive_max_dev.max(other.conclusive_max_dev);
    }
}

struct ShardContext<'a> {
    source: &'a dyn BranchSource,
    counts: Vec<usize>,
    conclusive: Vec<bool>,
    corrections: Vec<DMatrix<C64>>,
    bits: u32,
    record: bool,
}

fn run_shard(
    ctx: &ShardContext<'_>,
    seed: u64,
    shard: usize,
    first_run: u64,
    runs: usize,
) -> Result<(Tally, Vec<TranscriptRecord>)> {
    let d = ctx.source.local_dim();
    let n = ctx.counts.len();
    let total_branches: usize = ctx.counts.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    let mut phi = vec![ZERO; d];
    let mut buf = vec![ZERO; total_branches * d];
    let mut probs = vec![0.0; n];
    let mut tally = Tally::new(n);
    let mut transcript = Vec::with_capacity(if ctx.record { runs } else { 0 });
    for r in 0..runs {
        fill_haar(&mut phi, &mut rng);
        ctx.source.fill(&phi, &mut buf);
        let mut cursor = 0;
        let mut total = 0.0;
        for (a, &c) in ctx.counts.iter().enumerate() {
            let chunk = &buf[cursor * d..(cursor + c) * d];
            probs[a] = chunk.iter().map(|x| x.norm_sqr()).sum();
            total += probs[a];
            cursor += c;
        }
        if (total - 1.0).abs() > PROBABILITY_DRIFT_TOL {
            return Err(Error::Consistency(format!(
                "outcome probabilities sum to {total} in run {}",
                first_run + r as u64
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut alpha = n;
        for (a, &pa) in probs.iter().enumerate() {
            if pa <= 0.0 {
                continue;
            }
            acc += pa;
            alpha = a;
            if target < acc {
                break;
            }
        }
        let start: usize = ctx.counts[..alpha].iter().sum();
        let v = &ctx.corrections[alpha];
        let mut overlap = 0.0;
        for b in 0..ctx.counts[alpha] {
            let x = &buf[(start + b) * d..(start + b + 1) * d];
            // ⟨φ|V x⟩
            let mut s = ZERO;
            for (row, ph) in phi.iter().enumerate() {
                let vx: C64 = (0..d).map(|col| v[(row, col)] * x[col]).sum();
                s += ph.conj() * vx;
            }
            overlap += s.norm_sqr();
        }
        let f = overlap / probs[alpha];
        tally.runs += 1;
        tally.count[alpha] += 1;
        tally.term_sum[alpha] += f;
        tally.term_sq[alpha] += f * f;
        tally.total.0 += f;
        tally.total.1 += f * f;
        if ctx.conclusive[alpha] {
            tally.conclusive.0 += f;
            tally.conclusive.1 += f * f;
            tally.conclusive_max_dev = tally.conclusive_max_dev.max((f - 1.0).abs());
        } else {
            tally.inconclusive.0 += f;
            tally.inconclusive.1 += f * f;
            tally.inconclusive_hits += 1;
        }
        if ctx.record {
            transcript.push(TranscriptRecord {
                run_index: first_run + r as u64,
                outcome_alpha: alpha,
                conclusive_flag: ctx.conclusive[alpha] as u8,
                bits_sent: ctx.bits,
            });
        }
    }
    Ok((tally, transcript))
}

fn mean_se(sum: f64, sq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Sample `n_runs` teleportations through any branch source, using the
/// corrections from `prepared`. Shard `s` draws from ChaCha8 stream `s` of
/// `seed`; shards are merged in index order.
pub(crate) fn simulate_with_source(
    source: &dyn BranchSource,
    p: &PovmSet,
    prepared: &[PreparedOutcome],
    corrections: Corrections,
    n_runs: usize,
    seed: u64,
    options: &SimulationOptions,
) -> Result<Simulation> {
    if n_runs == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one run".into()));
    }
    let counts = source.branch_counts();
    if counts.len() != prepared.len() {
        return Err(Error::Shape(format!(
            "{} outcomes from the source, {} prepared",
            counts.len(),
            prepared.len()
        )));
    }
    let ctx = ShardContext {
        source,
        conclusive: prepared.iter().map(|o| o.kind.is_conclusive()).collect(),
        corrections: prepared.iter().map(|o| o.correction.matrix().clone()).collect(),
        bits: bits_per_message(counts.len()),
        counts,
        record: options.record_transcript,
    };
    let shards = n_runs.div_ceil(SHARD_RUNS);
    let results: Vec<Result<(Tally, Vec<TranscriptRecord>)>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let first = s * SHARD_RUNS;
            let runs = SHARD_RUNS.min(n_runs - first);
            run_shard(&ctx, seed, s, first as u64, runs)
        })
        .collect();
    let n = prepared.len();
    let mut tally = Tally::new(n);
    let mut transcript = Vec::new();
    for r in results {
        let (t, tr) = r?;
        tally.merge(&t);
        transcript.extend(tr);
    }
    let nf = tally.runs as f64;
    let outcomes = prepared
        .iter()
        .map(|o| {
            let a = o.alpha;
            let prob = tally.count[a] as f64 / nf;
            let (term, term_se) = mean_se(tally.term_sum[a], tally.term_sq[a], nf);
            OutcomeTerm {
                alpha: a,
                kind: o.kind,
                probability: prob,
                fidelity_term: term,
                probability_se: (prob * (1.0 - prob) / nf).sqrt(),
                fidelity_term_se: term_se,
            }
        })
        .collect::<Vec<_>>();
    let p_inc = tally.inconclusive_hits as f64 / nf;
    let (fc, fc_se) = mean_se(tally.conclusive.0, tally.conclusive.1, nf);
    let (fi, fi_se) = mean_se(tally.inconclusive.0, tally.inconclusive.1, nf);
    let (ft, ft_se) = mean_se(tally.total.0, tally.total.1, nf);
    let conclusive_runs = tally.runs - tally.inconclusive_hits;
    let report = FidelityReport {
        method: Method::MonteCarlo,
        lambda: p.lambda(),
        refinement: p.refinement(),
        corrections,
        runs: n_runs,
        outcomes,
        p_conclusive: 1.0 - p_inc,
        p_inconclusive: p_inc,
        f_conclusive: fc,
        f_inconclusive: fi,
        f_total: ft,
        p_inconclusive_se: (p_inc * (1.0 - p_inc) / nf).sqrt(),
        f_conclusive_se: fc_se,
        f_inconclusive_se: fi_se,
        f_total_se: ft_se,
        conclusive_max_deviation: (conclusive_runs > 0).then_some(tally.conclusive_max_dev),
    };
    Ok(Simulation {
        report,
        transcript: options.record_transcript.then_some(transcript),
    })
}

/// Monte Carlo teleportation: Haar-random inputs, outcomes drawn with
/// probability `⟨Ψ|M_α ⊗ 1|Ψ⟩`, the receiver's correction applied, and the
/// overlap with the input recorded.
pub fn simulate(
    p: &PovmSet,
    ch: &SchmidtChannel,
    basis: &UnitaryBasis,
    corrections: Corrections,
    n_runs: usize,
    seed: u64,
    options: &SimulationOptions,
) -> Result<Simulation> {
    let prepared = prepare_outcomes(p, ch, basis, corrections)?;
    let source = DirectBranches::new(p, ch)?;
    simulate_with_source(&source, p, &prepared, corrections, n_runs, seed, options)
}
