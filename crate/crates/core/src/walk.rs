//! Structured evolution kernel for the lackadaisical walk with `m` self-loops.
//!
//! The state lives in `(coin ⊗ vertex)` space of dimension `(n+m)·N` with a
//! coin-major layout: amplitude index `c·N + x` for coin direction `c` and
//! vertex `x`. Directions `0..n` are hypercube edges, `n..n+m` are the self
//! loops `⟲_0..⟲_{m-1}`. All operators are real, so amplitudes are `f64`.
//!
//! One step applies the oracle, then the weighted Grover coin on every
//! vertex block, then the flip-flop shift along each edge direction. None of
//! these is ever materialized as a matrix; see [`crate::dense`] for the
//! brute-force reference.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hypercube::{check_degree, MarkedSet};
use crate::par::KernelMode;
use crate::weights::{self_loop_weight, split_per_loop, LoopWeights, WeightScheme};

/// Fraction of the global maximum a local maximum must reach to count as the
/// first peak (see [`WalkResult::first_peak_step`]).
pub const FIRST_PEAK_RATIO: f64 = 0.99;

/// Which components of marked vertices the oracle negates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// All edge directions plus the first `s` self-loops.
    #[serde(rename = "partial")]
    PartialInversion,
    /// Every coin direction.
    #[serde(rename = "full")]
    FullInversion,
    /// No oracle; the bare walk.
    #[serde(rename = "none")]
    NoOracle,
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMode::PartialInversion => "partial",
            OracleMode::FullInversion => "full",
            OracleMode::NoOracle => "none",
        })
    }
}

impl FromStr for OracleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "partial" => Ok(OracleMode::PartialInversion),
            "full" => Ok(OracleMode::FullInversion),
            "none" => Ok(OracleMode::NoOracle),
            other => Err(Error::Parse(format!(
                "unknown oracle mode `{other}` (expected partial, full or none)"
            ))),
        }
    }
}

/// Parameters of one walk family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Hypercube degree.
    pub n: usize,
    /// Self-loops per vertex.
    pub m: usize,
    /// Number of self-loops whose phase the partial oracle inverts.
    pub s: usize,
    pub scheme: WeightScheme,
    pub oracle: OracleMode,
}

impl WalkConfig {
    /// A config with `s = 1` (or 0 when there are no loops).
    pub fn new(n: usize, m: usize, scheme: WeightScheme, oracle: OracleMode) -> Self {
        WalkConfig {
            n,
            m,
            s: m.min(1),
            scheme,
            oracle,
        }
    }

    pub fn with_inverted_loops(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn vertex_count(&self) -> usize {
        1usize << self.n
    }

    pub fn coin_dim(&self) -> usize {
        self.n + self.m
    }

    /// `(n+m)·N`
    pub fn dim(&self) -> usize {
        self.coin_dim() * self.vertex_count()
    }

    pub fn validate(&self) -> Result<()> {
        check_degree(self.n)?;
        self.scheme.validate()?;
        if self.s > self.m {
            return Err(Error::config(format!(
                "inverted-loop count s = {} exceeds loop count m = {}",
                self.s, self.m
            )));
        }
        if self.oracle == OracleMode::PartialInversion && (self.m == 0 || self.s == 0) {
            return Err(Error::config("partial inversion needs m ≥ 1 and s ≥ 1"));
        }
        if self.coin_dim().checked_mul(self.vertex_count()).is_none() {
            return Err(Error::config("state dimension overflows"));
        }
        Ok(())
    }

    /// Total and per-loop weight when `k` vertices are marked.
    pub fn loop_weights(&self, k: usize) -> Result<LoopWeights> {
        let total = self_loop_weight(self.scheme, self.n, k)?;
        split_per_loop(total, self.m)
    }

    /// Default step budget `ceil(6·√((n+m)·N)) + 100`.
    pub fn default_horizon(&self) -> usize {
        (6.0 * (self.dim() as f64).sqrt()).ceil() as usize + 100
    }
}

/// The weighted uniform coin state `|s^C⟩`, one entry per coin direction.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinAxis {
    pub weights: LoopWeights,
    axis: Vec<f64>,
}

impl CoinAxis {
    pub fn new(config: &WalkConfig, k_for_weight: usize) -> Result<Self> {
        config.validate()?;
        let weights = config.loop_weights(k_for_weight)?;
        let norm = 1.0 / (config.n as f64 + weights.total).sqrt();
        let loop_amp = weights.per_loop.sqrt() * norm;
        let axis = (0..config.coin_dim())
            .map(|c| if c < config.n { norm } else { loop_amp })
            .collect();
        Ok(CoinAxis { weights, axis })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.axis
    }
}

/// Real amplitudes over the `(coin direction, vertex)` basis, coin-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    m: usize,
    amplitudes: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize, m: usize) -> Self {
        StateVector {
            n,
            m,
            amplitudes: vec![0.0; (n + m) << n],
        }
    }

    /// The basis state `|c, x⟩`.
    pub fn basis(n: usize, m: usize, coin: usize, vertex: usize) -> Self {
        let mut s = Self::zeros(n, m);
        let idx = s.index(coin, vertex);
        s.amplitudes[idx] = 1.0;
        s
    }

    pub fn from_amplitudes(n: usize, m: usize, amplitudes: Vec<f64>) -> Result<Self> {
        let expected = (n + m) << n;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        Ok(StateVector { n, m, amplitudes })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn loops(&self) -> usize {
        self.m
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.n
    }

    pub fn coin_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    #[inline]
    pub fn index(&self, coin: usize, vertex: usize) -> usize {
        coin * self.vertex_count() + vertex
    }

    #[inline]
    pub fn get(&self, coin: usize, vertex: usize) -> f64 {
        self.amplitudes[self.index(coin, vertex)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.amplitudes
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// The `coin_dim()` amplitudes sitting on vertex `x`.
    pub fn vertex_block(&self, vertex: usize) -> Vec<f64> {
        (0..self.coin_dim()).map(|c| self.get(c, vertex)).collect()
    }

    fn check(&self, config: &WalkConfig) -> Result<()> {
        if self.n != config.n || self.m != config.m {
            return Err(Error::DimensionMismatch {
                expected: config.dim(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// `|Ψ(0)⟩ = |s^C⟩ ⊗ (1/√N) Σ_x |x⟩`.
pub fn initial_state(config: &WalkConfig, k_for_weight: usize) -> Result<StateVector> {
    let coin = CoinAxis::new(config, k_for_weight)?;
    Ok(initial_state_from_axis(config, &coin))
}

fn initial_state_from_axis(config: &WalkConfig, coin: &CoinAxis) -> StateVector {
    let vertices = config.vertex_count();
    let spread = 1.0 / (vertices as f64).sqrt();
    let mut amplitudes = Vec::with_capacity(config.dim());
    for &a in coin.as_slice() {
        amplitudes.extend(std::iter::repeat_n(a * spread, vertices));
    }
    StateVector {
        n: config.n,
        m: config.m,
        amplitudes,
    }
}

/// Reflect every vertex block about `|s^C⟩`: `ψ_x ← 2⟨s^C|ψ_x⟩ s^C − ψ_x`.
pub fn apply_coin(state: &mut StateVector, config: &WalkConfig, k_for_weight: usize) -> Result<()> {
    state.check(config)?;
    let coin = CoinAxis::new(config, k_for_weight)?;
    let mut scratch = vec![0.0; config.vertex_count()];
    coin_kernel(
        &mut state.amplitudes,
        coin.as_slice(),
        &mut scratch,
        KernelMode::Sequential,
    );
    Ok(())
}

/// Swap `(i, x)` with `(i, x ⊕ e_i)` on every edge direction; loops stay put.
pub fn apply_shift(state: &mut StateVector, config: &WalkConfig) -> Result<()> {
    state.check(config)?;
    shift_kernel(&mut state.amplitudes, config.n, KernelMode::Sequential);
    Ok(())
}

/// Negate the `n` edge components and the first `s` self-loop components of
/// each marked vertex.
pub fn apply_oracle_partial(state: &mut StateVector, marked: &MarkedSet, config: &WalkConfig) -> Result<()> {
    state.check(config)?;
    check_marked(marked, config)?;
    if config.oracle != OracleMode::PartialInversion {
        return Err(Error::config(
            "partial oracle applied to a config without partial inversion",
        ));
    }
    negate_marked(
        &mut state.amplitudes,
        marked,
        config.vertex_count(),
        config.n + config.s,
    );
    Ok(())
}

/// Negate every coin component of each marked vertex.
pub fn apply_oracle_full(state: &mut StateVector, marked: &MarkedSet, config: &WalkConfig) -> Result<()> {
    state.check(config)?;
    check_marked(marked, config)?;
    negate_marked(&mut state.amplitudes, marked, config.vertex_count(), config.coin_dim());
    Ok(())
}

/// One application of `S·(C⊗I)·Q`. The coin weight uses `k = |marked|`.
pub fn step(state: &mut StateVector, marked: &MarkedSet, config: &WalkConfig) -> Result<()> {
    let mut walk = Walk::new(*config, marked.clone())?;
    state.check(config)?;
    walk.step(state);
    Ok(())
}

/// `Σ_{ω ∈ marked} Σ_c |ψ(c, ω)|²`.
pub fn success_probability(state: &StateVector, marked: &MarkedSet) -> f64 {
    let vertices = state.vertex_count();
    let amps = &state.amplitudes;
    marked
        .vertices()
        .iter()
        .map(|w| {
            let x = w.index();
            (0..state.coin_dim())
                .map(|c| {
                    let a = amps[c * vertices + x];
                    a * a
                })
                .sum::<f64>()
        })
        .sum()
}

/// Run `horizon` steps from the initial state, recording the success probability.
pub fn run_walk(config: &WalkConfig, marked: &MarkedSet, horizon: usize) -> Result<WalkResult> {
    Walk::new(*config, marked.clone())?.run(horizon)
}

fn check_marked(marked: &MarkedSet, config: &WalkConfig) -> Result<()> {
    if marked.degree() != config.n {
        return Err(Error::config(format!(
            "marked set is for Q_{} but the walk is on Q_{}",
            marked.degree(),
            config.n
        )));
    }
    Ok(())
}

fn negate_marked(amps: &mut [f64], marked: &MarkedSet, vertices: usize, directions: usize) {
    for w in marked.vertices() {
        let x = w.index();
        for c in 0..directions {
            let a = &mut amps[c * vertices + x];
            *a = -*a;
        }
    }
}

/// Coin reflection over coin-major storage. `scratch` has one slot per vertex.
fn coin_kernel(amps: &mut [f64], axis: &[f64], scratch: &mut [f64], mode: KernelMode) {
    let vertices = scratch.len();
    debug_assert_eq!(amps.len(), axis.len() * vertices);
    match mode {
        KernelMode::Sequential => {
            scratch.fill(0.0);
            for (plane, &w) in amps.chunks_exact(vertices).zip(axis) {
                for (acc, &a) in scratch.iter_mut().zip(plane) {
                    *acc += w * a;
                }
            }
            for (plane, &w) in amps.chunks_exact_mut(vertices).zip(axis) {
                let w2 = 2.0 * w;
                for (a, &dot) in plane.iter_mut().zip(scratch.iter()) {
                    *a = w2 * dot - *a;
                }
            }
        }
        #[cfg(feature = "parallel")]
        KernelMode::Parallel => {
            use rayon::prelude::*;
            const CHUNK: usize = 1 << 12;
            let src: &[f64] = amps;
            // Each vertex still accumulates in coin order, so the result is
            // bit-identical to the sequential path.
            scratch.par_chunks_mut(CHUNK).enumerate().for_each(|(j, acc)| {
                acc.fill(0.0);
                let lo = j * CHUNK;
                for (c, &w) in axis.iter().enumerate() {
                    let plane = &src[c * vertices + lo..c * vertices + lo + acc.len()];
                    for (s, &a) in acc.iter_mut().zip(plane) {
                        *s += w * a;
                    }
                }
            });
            let dots: &[f64] = scratch;
            amps.par_chunks_mut(vertices)
                .zip(axis.par_iter())
                .for_each(|(plane, &w)| {
                    let w2 = 2.0 * w;
                    for (a, &dot) in plane.iter_mut().zip(dots) {
                        *a = w2 * dot - *a;
                    }
                });
        }
    }
}

fn shift_plane(plane: &mut [f64], direction: usize) {
    let half = 1usize << direction;
    for block in plane.chunks_exact_mut(2 * half) {
        let (lo, hi) = block.split_at_mut(half);
        lo.swap_with_slice(hi);
    }
}

fn shift_kernel(amps: &mut [f64], n: usize, mode: KernelMode) {
    let vertices = 1usize << n;
    let edges = &mut amps[..n * vertices];
    match mode {
        KernelMode::Sequential => {
            for (i, plane) in edges.chunks_exact_mut(vertices).enumerate() {
                shift_plane(plane, i);
            }
        }
        #[cfg(feature = "parallel")]
        KernelMode::Parallel => {
            use rayon::prelude::*;
            edges
                .par_chunks_mut(vertices)
                .enumerate()
                .for_each(|(i, plane)| shift_plane(plane, i));
        }
    }
}

/// A prepared walk: validated config, coin axis and marked set, plus scratch
/// space so repeated steps do not allocate.
#[derive(Clone, Debug)]
pub struct Walk {
    config: WalkConfig,
    marked: MarkedSet,
    coin: CoinAxis,
    scratch: Vec<f64>,
    mode: KernelMode,
}

impl Walk {
    pub fn new(config: WalkConfig, marked: MarkedSet) -> Result<Self> {
        config.validate()?;
        check_marked(&marked, &config)?;
        let coin = CoinAxis::new(&config, marked.len())?;
        Ok(Walk {
            scratch: vec![0.0; config.vertex_count()],
            config,
            marked,
            coin,
            mode: KernelMode::Sequential,
        })
    }

    /// Select the kernel implementation. Results do not depend on the choice.
    pub fn with_kernel(mut self, mode: KernelMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    pub fn coin(&self) -> &CoinAxis {
        &self.coin
    }

    pub fn initial_state(&self) -> StateVector {
        initial_state_from_axis(&self.config, &self.coin)
    }

    pub fn apply_oracle(&self, state: &mut StateVector) {
        let directions = match self.config.oracle {
            OracleMode::NoOracle => return,
            OracleMode::FullInversion => self.config.coin_dim(),
            OracleMode::PartialInversion => self.config.n + self.config.s,
        };
        negate_marked(
            &mut state.amplitudes,
            &self.marked,
            self.config.vertex_count(),
            directions,
        );
    }

    pub fn apply_coin(&mut self, state: &mut StateVector) {
        coin_kernel(
            &mut state.amplitudes,
            self.coin.as_slice(),
            &mut self.scratch,
            self.mode,
        );
    }

    pub fn apply_shift(&self, state: &mut StateVector) {
        shift_kernel(&mut state.amplitudes, self.config.n, self.mode);
    }

    /// Oracle, then coin, then shift. `state` must match the config's shape.
    pub fn step(&mut self, state: &mut StateVector) {
        assert_eq!(state.len(), self.config.dim(), "state does not match walk");
        self.apply_oracle(state);
        self.apply_coin(state);
        self.apply_shift(state);
    }

    pub fn success_probability(&self, state: &StateVector) -> f64 {
        success_probability(state, &self.marked)
    }

    pub fn run(&mut self, horizon: usize) -> Result<WalkResult> {
        if horizon == 0 {
            return Err(Error::config("horizon must be at least one step"));
        }
        let mut state = self.initial_state();
        let mut series = Vec::with_capacity(horizon + 1);
        series.push(self.success_probability(&state));
        for _ in 0..horizon {
            self.step(&mut state);
            series.push(self.success_probability(&state));
        }
        Ok(WalkResult::from_series(series))
    }
}

/// Success-probability trace of one walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub peak_probability: f64,
    /// First step attaining `peak_probability`.
    pub peak_step: usize,
    /// Step of the first local maximum reaching [`FIRST_PEAK_RATIO`] of the
    /// global peak. The trace is close to periodic, so over a long horizon the
    /// global argmax can land on any later revival; this is the step count
    /// that tracks the `O(√((n+m)·N))` runtime.
    pub first_peak_step: usize,
    pub first_peak_probability: f64,
    pub steps_run: usize,
    /// Entry `t` is the success probability after `t` steps.
    #[serde(rename = "series")]
    pub probabilities: Vec<f64>,
}

impl WalkResult {
    pub fn from_series(probabilities: Vec<f64>) -> Self {
        assert!(!probabilities.is_empty());
        let (mut peak_step, mut peak_probability) = (0, probabilities[0]);
        for (t, &p) in probabilities.iter().enumerate() {
            if p > peak_probability {
                peak_step = t;
                peak_probability = p;
            }
        }
        let threshold = FIRST_PEAK_RATIO * peak_probability;
        let mut first = probabilities.iter().position(|&p| p >= threshold).unwrap_or(peak_step);
        while first + 1 < probabilities.len() && probabilities[first + 1] > probabilities[first] {
            first += 1;
        }
        WalkResult {
            peak_probability,
            peak_step,
            first_peak_step: first,
            first_peak_probability: probabilities[first],
            steps_run: probabilities.len() - 1,
            probabilities,
        }
    }
}
