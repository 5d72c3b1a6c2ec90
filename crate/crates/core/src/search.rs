//! Campaigns over the first-row space of structured matrices, non-existence
//! certificates for orthogonal MDS g-circulants of order `2^d`, and the
//! named verification suites.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2m::{Element, FieldSpec};
use crate::matrix::{Matrix, MAX_ORDER};
use crate::props::{self, Half, PropertyReport, PropsError, Witness};
use crate::structured::{
    self, associated_circulant, circulant, g_circulant, gcd, left_circulant, parse_cycle, FirstRow,
    KCycle, Shape, StructureError,
};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest exhaustive candidate count accepted unless overridden.
pub const DEFAULT_CEILING: u64 = 1 << 26;
/// Name recorded alongside seeds so random runs can be replayed.
pub const RNG_ALGORITHM: &str = "chacha8";

const CHUNK: u64 = 1 << 10;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("exhaustive scan needs {candidates} candidates, ceiling is {ceiling}")]
    CeilingExceeded { candidates: u128, ceiling: u64 },
    #[error("bad campaign spec: {0}")]
    BadSpec(String),
    #[error("recorded result does not re-verify: {0}")]
    Reverify(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Props(#[from] PropsError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Orthogonal,
    Involutory,
    Mds,
}

impl Predicate {
    pub const ALL: [Predicate; 3] = [Predicate::Orthogonal, Predicate::Involutory, Predicate::Mds];

    pub fn name(self) -> &'static str {
        match self {
            Predicate::Orthogonal => "orthogonal",
            Predicate::Involutory => "involutory",
            Predicate::Mds => "mds",
        }
    }

    pub fn check(self, a: &Matrix) -> PropertyReport {
        match self {
            Predicate::Orthogonal => props::is_orthogonal(a),
            Predicate::Involutory => props::is_involutory(a),
            Predicate::Mds => props::is_mds(a),
        }
    }

    /// The two products cost one matrix multiplication each; MDS needs every minor.
    fn cost(self) -> u8 {
        match self {
            Predicate::Orthogonal => 0,
            Predicate::Involutory => 1,
            Predicate::Mds => 2,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predicate {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Predicate::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| SearchError::BadSpec(format!("unknown property `{}`", s.trim())))
    }
}

/// Comma-separated predicate names.
pub fn parse_predicates(text: &str) -> Result<Vec<Predicate>, SearchError> {
    text.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Random { seed: u64, trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub field: FieldSpec,
    pub k: usize,
    pub shape: Shape,
    pub predicates: Vec<Predicate>,
    pub mode: Mode,
    /// Most hits kept in the result; all hits are counted.
    pub limit: usize,
}

impl CampaignSpec {
    /// Candidate count, after checking the campaign is well formed and an
    /// exhaustive scan stays under `ceiling`.
    pub fn validate(&self, ceiling: u64) -> Result<u64, SearchError> {
        if !(1..=MAX_ORDER).contains(&self.k) {
            return Err(SearchError::BadSpec(format!(
                "k = {} outside 1..={MAX_ORDER}",
                self.k
            )));
        }
        if let Some(order) = self.shape.required_order() {
            if order != self.k {
                return Err(SearchError::BadSpec(format!(
                    "shape {} has order {order}, campaign has k = {}",
                    self.shape, self.k
                )));
            }
        }
        if self.predicates.iter().duplicates().next().is_some() {
            return Err(SearchError::BadSpec("repeated property".into()));
        }
        match self.mode {
            Mode::Exhaustive => {
                let candidates = candidate_count(self.field, self.k);
                if candidates > u128::from(ceiling) {
                    return Err(SearchError::CeilingExceeded {
                        candidates,
                        ceiling,
                    });
                }
                Ok(candidates as u64)
            }
            Mode::Random { trials, .. } => Ok(trials),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.mode {
            Mode::Exhaustive => None,
            Mode::Random { seed, .. } => Some(seed),
        }
    }
}

/// `q^k`, saturating.
pub fn candidate_count(field: FieldSpec, k: usize) -> u128 {
    let q = u128::from(field.order());
    (0..k)
        .try_fold(1u128, |acc, _| acc.checked_mul(q))
        .unwrap_or(u128::MAX)
}

/// Progress callback: `(candidates done, candidates total)`.
pub type Progress = Arc<dyn Fn(u64, u64) + Send + Sync>;

#[derive(Clone)]
pub struct CampaignOptions {
    pub parallel: bool,
    /// Evaluate predicates cheapest first rather than in the requested order.
    pub cheapest_first: bool,
    pub ceiling: u64,
    /// Checked between chunks. A cancelled run is never marked exhausted.
    pub cancel: Option<Arc<AtomicBool>>,
    pub progress: Option<Progress>,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            parallel: true,
            cheapest_first: true,
            ceiling: DEFAULT_CEILING,
            cancel: None,
            progress: None,
        }
    }
}

impl fmt::Debug for CampaignOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CampaignOptions")
            .field("parallel", &self.parallel)
            .field("cheapest_first", &self.cheapest_first)
            .field("ceiling", &self.ceiling)
            .field("cancel", &self.cancel)
            .field("progress", &self.progress.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub row: Vec<Element>,
    pub shape: Shape,
    /// One passing report per predicate, in the requested order.
    pub reports: Vec<PropertyReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub schema_version: u32,
    pub spec: CampaignSpec,
    pub rng: Option<String>,
    pub seed: Option<u64>,
    pub candidates_scanned: u64,
    pub hit_count: u64,
    pub hits: Vec<Hit>,
    pub exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl CampaignResult {
    /// `"0 hits / 256 scanned / exhausted"`.
    pub fn summary(&self) -> String {
        format!(
            "{} hits / {} scanned / {}",
            self.hit_count,
            self.candidates_scanned,
            if self.exhausted {
                "exhausted"
            } else {
                "not exhausted"
            }
        )
    }

    /// Parses a stored result and re-verifies every recorded hit.
    pub fn from_json(text: &str) -> Result<Self, SearchError> {
        let result: CampaignResult = serde_json::from_str(text)?;
        result.reverify()?;
        Ok(result)
    }

    /// Rebuilds each hit and re-runs the property checkers on it.
    pub fn reverify(&self) -> Result<(), SearchError> {
        let spec = &self.spec;
        if self.schema_version != SCHEMA_VERSION {
            return Err(SearchError::Reverify(format!(
                "schema version {}",
                self.schema_version
            )));
        }
        if self.hits.len() > spec.limit || self.hits.len() as u64 > self.hit_count {
            return Err(SearchError::Reverify(
                "more hits recorded than allowed".into(),
            ));
        }
        if self.exhausted {
            let full = candidate_count(spec.field, spec.k);
            if spec.mode != Mode::Exhaustive || u128::from(self.candidates_scanned) != full {
                return Err(SearchError::Reverify(
                    "marked exhausted without a full exhaustive scan".into(),
                ));
            }
        }
        for hit in &self.hits {
            if hit.shape != spec.shape || hit.row.len() != spec.k {
                return Err(SearchError::Reverify("hit does not match the campaign".into()));
            }
            let row = FirstRow::new(spec.field, hit.row.clone())?;
            let m = hit.shape.build(&row)?;
            let reports: Vec<PropertyReport> =
                spec.predicates.iter().map(|p| p.check(&m)).collect();
            if reports.iter().any(|r| !r.verdict) || reports != hit.reports {
                return Err(SearchError::Reverify(format!(
                    "row {} fails its recorded properties",
                    row
                )));
            }
        }
        Ok(())
    }
}

/// Seeded generator for an independent stream.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The `n`-th row in lexicographic order of element bitmasks, `c0` most significant.
pub fn row_from_index(field: FieldSpec, k: usize, mut n: u64) -> FirstRow {
    let q = u64::from(field.order());
    let mut c = vec![Element::ZERO; k];
    for slot in c.iter_mut().rev() {
        *slot = Element::from_bits((n % q) as u16);
        n /= q;
    }
    FirstRow::new(field, c).expect("digits lie in the field")
}

pub fn random_row(rng: &mut impl Rng, field: FieldSpec, k: usize) -> FirstRow {
    let c = (0..k)
        .map(|_| Element::from_bits(rng.gen_range(0..field.order()) as u16))
        .collect();
    FirstRow::new(field, c).expect("sampled inside the field")
}

/// `k` distinct nonzero entries, standing in for independent symbols.
pub fn random_distinct_row(
    rng: &mut impl Rng,
    field: FieldSpec,
    k: usize,
) -> Result<FirstRow, SearchError> {
    let nonzero = field.order() as usize - 1;
    if k > nonzero {
        return Err(SearchError::BadSpec(format!(
            "{field} has only {nonzero} nonzero elements, need {k}"
        )));
    }
    let c = rand::seq::index::sample(rng, nonzero, k)
        .into_iter()
        .map(|i| Element::from_bits(i as u16 + 1))
        .collect();
    Ok(FirstRow::new(field, c)?)
}

pub fn random_k_cycle(rng: &mut impl Rng, k: usize) -> KCycle {
    let mut rest: Vec<usize> = (1..k).collect();
    rest.shuffle(rng);
    let seq: Vec<usize> = std::iter::once(0).chain(rest).collect();
    KCycle::from_sequence(&seq).expect("a full cycle")
}

#[derive(Default)]
struct ChunkOutcome {
    scanned: u64,
    hit_count: u64,
    hits: Vec<Hit>,
    cancelled: bool,
}

/// Scans the campaign's candidate rows and records those passing every predicate.
///
/// Exhaustive mode visits rows in lexicographic order; random mode draws trial
/// `t` from stream `t` of the seeded generator. Chunks are merged by index, so
/// parallel and sequential runs give the same result.
pub fn run_campaign(
    spec: &CampaignSpec,
    options: &CampaignOptions,
) -> Result<CampaignResult, SearchError> {
    let total = spec.validate(options.ceiling)?;
    spec.shape.build(&FirstRow::unit(spec.field, spec.k))?;
    let mut order = spec.predicates.clone();
    if options.cheapest_first {
        order.sort_by_key(|p| p.cost());
    }
    let candidate = |n: u64| match spec.mode {
        Mode::Exhaustive => row_from_index(spec.field, spec.k, n),
        Mode::Random { seed, .. } => random_row(&mut stream_rng(seed, n), spec.field, spec.k),
    };
    let evaluate = |row: FirstRow| -> Option<Hit> {
        let m = spec.shape.build(&row).expect("shape checked above");
        let mut reports = Vec::with_capacity(order.len());
        for &p in &order {
            let report = p.check(&m);
            if !report.verdict {
                return None;
            }
            reports.push((p, report));
        }
        let reports = spec
            .predicates
            .iter()
            .map(|p| {
                let i = reports.iter().position(|(q, _)| q == p).expect("evaluated");
                reports[i].1.clone()
            })
            .collect();
        Some(Hit {
            row: row.elements().to_vec(),
            shape: spec.shape.clone(),
            reports,
        })
    };
    let done = AtomicU64::new(0);
    let run_chunk = |chunk: u64| -> ChunkOutcome {
        if options
            .cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::Relaxed))
        {
            return ChunkOutcome {
                cancelled: true,
                ..ChunkOutcome::default()
            };
        }
        let mut out = ChunkOutcome::default();
        let range = chunk * CHUNK..((chunk + 1) * CHUNK).min(total);
        for n in range {
            out.scanned += 1;
            if let Some(hit) = evaluate(candidate(n)) {
                out.hit_count += 1;
                if out.hits.len() < spec.limit {
                    out.hits.push(hit);
                }
            }
        }
        let finished = done.fetch_add(out.scanned, Ordering::Relaxed) + out.scanned;
        if let Some(progress) = &options.progress {
            progress(finished, total);
        }
        out
    };
    let chunks = total.div_ceil(CHUNK);
    let outcomes: Vec<ChunkOutcome> = if options.parallel {
        (0..chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..chunks).map(run_chunk).collect()
    };

    let mut result = CampaignResult {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        rng: spec.seed().map(|_| RNG_ALGORITHM.to_string()),
        seed: spec.seed(),
        candidates_scanned: 0,
        hit_count: 0,
        hits: Vec::new(),
        exhausted: false,
        elapsed_ms: None,
    };
    let mut cancelled = false;
    for out in outcomes {
        cancelled |= out.cancelled;
        result.candidates_scanned += out.scanned;
        result.hit_count += out.hit_count;
        let room = spec.limit - result.hits.len();
        result.hits.extend(out.hits.into_iter().take(room));
    }
    result.exhausted =
        spec.mode == Mode::Exhaustive && !cancelled && result.candidates_scanned == total;
    Ok(result)
}

/// Odd residues `g` in `1..k`, for `k` a power of two.
pub fn odd_residues(k: usize) -> Vec<usize> {
    (1..k).step_by(2).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionRecord {
    pub row: Vec<Element>,
    pub verdict: bool,
    pub even_sum: Element,
    pub odd_sum: Element,
    pub singular_half: Half,
    pub minor_rows: Vec<usize>,
    pub minor_cols: Vec<usize>,
}

impl ObstructionRecord {
    fn compute(row: &FirstRow, g: usize, d: u32) -> Result<Self, SearchError> {
        let report = props::orthogonality_obstruction_2d(row, g, d)?;
        match report.witness {
            Some(Witness::Obstruction {
                even_sum,
                odd_sum,
                singular_half,
                rows,
                cols,
            }) => Ok(ObstructionRecord {
                row: row.elements().to_vec(),
                verdict: report.verdict,
                even_sum,
                odd_sum,
                singular_half,
                minor_rows: rows,
                minor_cols: cols,
            }),
            other => unreachable!("obstruction check returned {other:?}"),
        }
    }
}

/// Outcome of the scan for one value of `g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GScan {
    pub g: usize,
    pub candidates_scanned: u64,
    pub exhausted: bool,
    pub hit_count: u64,
    pub hits: Vec<Vec<Element>>,
    pub orthogonal_count: u64,
    pub obstructions: Vec<ObstructionRecord>,
}

/// Replayable record that no orthogonal MDS g-circulant of order `2^d`
/// exists over one field, for the listed `g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub kind: String,
    pub field: FieldSpec,
    pub d: u32,
    pub k: usize,
    pub predicates: Vec<Predicate>,
    pub scans: Vec<GScan>,
    pub total_scanned: u64,
    pub total_hits: u64,
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

pub const NONEXISTENCE_KIND: &str = "nonexistence_2d";
const HIT_RECORD_LIMIT: usize = 1024;

fn nonexistence_order(d: u32) -> Result<usize, SearchError> {
    if d < 2 {
        return Err(SearchError::BadSpec(format!(
            "d = {d}: orthogonal MDS matrices of order {} exist",
            1 << d
        )));
    }
    1usize
        .checked_shl(d)
        .filter(|&k| k <= MAX_ORDER)
        .ok_or_else(|| SearchError::BadSpec(format!("2^{d} exceeds order {MAX_ORDER}")))
}

/// Exhaustive {orthogonal, mds} scan of `g_circulant(g, row)` for each `g`,
/// plus an obstruction witness for every orthogonal instance met.
pub fn verify_nonexistence_2d(
    field: FieldSpec,
    d: u32,
    gs: &[usize],
    options: &CampaignOptions,
) -> Result<Certificate, SearchError> {
    let k = nonexistence_order(d)?;
    if gs.is_empty() {
        return Err(SearchError::BadSpec("no values of g".into()));
    }
    if let Some(&g) = gs.iter().find(|&&g| gcd(k, g % k) != 1) {
        return Err(SearchError::BadSpec(format!("gcd({k}, {g}) > 1")));
    }
    let predicates = vec![Predicate::Orthogonal, Predicate::Mds];
    let spec_for = |g: usize, predicates: Vec<Predicate>, limit: usize| CampaignSpec {
        field,
        k,
        shape: Shape::GCirculant(g),
        predicates,
        mode: Mode::Exhaustive,
        limit,
    };
    let total = spec_for(0, Vec::new(), 0).validate(options.ceiling)?;

    let mut scans = Vec::with_capacity(gs.len());
    for &g in gs {
        let full = run_campaign(&spec_for(g, predicates.clone(), HIT_RECORD_LIMIT), options)?;
        let orth = run_campaign(
            &spec_for(g, vec![Predicate::Orthogonal], total as usize),
            options,
        )?;
        let obstructions = orth
            .hits
            .par_iter()
            .map(|hit| {
                let row = FirstRow::new(field, hit.row.clone())?;
                ObstructionRecord::compute(&row, g, d)
            })
            .collect::<Result<Vec<_>, _>>()?;
        scans.push(GScan {
            g,
            candidates_scanned: full.candidates_scanned,
            exhausted: full.exhausted && orth.exhausted,
            hit_count: full.hit_count,
            hits: full.hits.into_iter().map(|h| h.row).collect(),
            orthogonal_count: orth.hit_count,
            obstructions,
        });
    }
    let total_scanned = scans.iter().map(|s| s.candidates_scanned).sum();
    let total_hits = scans.iter().map(|s| s.hit_count).sum();
    let verdict = scans.iter().all(|s| {
        s.exhausted
            && s.hit_count == 0
            && s.orthogonal_count == s.obstructions.len() as u64
            && s.obstructions.iter().all(|o| o.verdict)
    });
    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        kind: NONEXISTENCE_KIND.to_string(),
        field,
        d,
        k,
        predicates,
        scans,
        total_scanned,
        total_hits,
        verdict,
        elapsed_ms: None,
    })
}

impl Certificate {
    /// Checks internal consistency and recomputes every obstruction witness,
    /// without repeating the scans.
    pub fn recheck(&self) -> Result<(), SearchError> {
        let fail = |msg: String| Err(SearchError::Reverify(msg));
        if self.schema_version != SCHEMA_VERSION || self.kind != NONEXISTENCE_KIND {
            return fail("unknown certificate kind or version".into());
        }
        if nonexistence_order(self.d)? != self.k {
            return fail(format!("k = {} is not 2^{}", self.k, self.d));
        }
        let full = candidate_count(self.field, self.k);
        for scan in &self.scans {
            if scan.exhausted && u128::from(scan.candidates_scanned) != full {
                return fail(format!(
                    "g = {}: exhausted after {} rows",
                    scan.g, scan.candidates_scanned
                ));
            }
            if scan.orthogonal_count != scan.obstructions.len() as u64 {
                return fail(format!("g = {}: missing obstruction records", scan.g));
            }
            for hit in &scan.hits {
                let m = g_circulant(scan.g, &FirstRow::new(self.field, hit.clone())?);
                if !props::is_orthogonal(&m).verdict || !props::is_mds(&m).verdict {
                    return fail(format!("g = {}: recorded hit does not re-verify", scan.g));
                }
            }
            for record in &scan.obstructions {
                let row = FirstRow::new(self.field, record.row.clone())?;
                if ObstructionRecord::compute(&row, scan.g, self.d)? != *record {
                    return fail(format!(
                        "g = {}: obstruction record for {row} differs",
                        scan.g
                    ));
                }
            }
        }
        let verdict = self
            .scans
            .iter()
            .all(|s| s.exhausted && s.hit_count == 0 && s.obstructions.iter().all(|o| o.verdict));
        if verdict != self.verdict
            || self.total_scanned != self.scans.iter().map(|s| s.candidates_scanned).sum::<u64>()
            || self.total_hits != self.scans.iter().map(|s| s.hit_count).sum::<u64>()
        {
            return fail("totals or verdict inconsistent with the scans".into());
        }
        Ok(())
    }

    /// Reruns every scan and compares with the stored certificate.
    pub fn replay(&self, options: &CampaignOptions) -> Result<bool, SearchError> {
        let gs: Vec<usize> = self.scans.iter().map(|s| s.g).collect();
        let mut fresh = verify_nonexistence_2d(self.field, self.d, &gs, options)?;
        fresh.elapsed_ms = self.elapsed_ms;
        Ok(fresh == *self)
    }
}

/// Named group of checks, one report per assertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub reports: Vec<PropertyReport>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(
        suite: &str,
        seed: Option<u64>,
        trials: Option<u64>,
        reports: Vec<PropertyReport>,
    ) -> Self {
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            seed,
            trials,
            passed: reports.iter().all(|r| r.verdict),
            reports,
        }
    }

    pub fn first_failure(&self) -> Option<&PropertyReport> {
        self.reports.iter().find(|r| !r.verdict)
    }
}

fn named(name: impl Into<String>, mut report: PropertyReport) -> PropertyReport {
    report.property = name.into();
    report
}

/// The orthogonal MDS examples over `gf(2^8)/0x11b`.
#[derive(Debug, Clone)]
pub struct ReferenceExamples {
    /// First row of a 3x3 orthogonal MDS circulant.
    pub circulant_3: FirstRow,
    /// First row of a 6x6 orthogonal MDS circulant.
    pub circulant_6: FirstRow,
    pub cyclic_rho: KCycle,
    /// First row of the 6x6 cyclic matrix whose associated circulant is `circulant_6`.
    pub cyclic_6: FirstRow,
}

pub fn reference_examples() -> ReferenceExamples {
    let f = FieldSpec::aes();
    let row = |text: &str| FirstRow::parse(f, text).expect("valid literal");
    ReferenceExamples {
        circulant_3: row("a,1+a^2+a^3+a^4+a^6,a+a^2+a^3+a^4+a^6"),
        circulant_6: row("1,1,a,1+a^2+a^3+a^5+a^6+a^7,a+a^5,a^2+a^3+a^6+a^7"),
        cyclic_rho: parse_cycle("(0 2 4 3 5 1)", 6).expect("valid cycle"),
        cyclic_6: row("1,a^2+a^3+a^6+a^7,1,1+a^2+a^3+a^5+a^6+a^7,a,a^5+a"),
    }
}

pub fn verify_reference_examples() -> Result<SuiteReport, SearchError> {
    let ex = reference_examples();
    let c3 = circulant(&ex.circulant_3);
    let l3 = left_circulant(&ex.circulant_3);
    let c6 = circulant(&ex.circulant_6);
    let cyc = structured::cyclic(&ex.cyclic_rho, &ex.cyclic_6)?;
    let (assoc, q) = associated_circulant(&ex.cyclic_rho, &ex.cyclic_6)?;
    let reports = vec![
        named("circulant_3x3/orthogonal", props::is_orthogonal(&c3)),
        named("circulant_3x3/mds", props::is_mds(&c3)),
        named("left_circulant_3x3/involutory", props::is_involutory(&l3)),
        named("left_circulant_3x3/mds", props::is_mds(&l3)),
        named("circulant_6x6/orthogonal", props::is_orthogonal(&c6)),
        named("circulant_6x6/mds", props::is_mds(&c6)),
        named("cyclic_6x6/orthogonal", props::is_orthogonal(&cyc)),
        named("cyclic_6x6/mds", props::is_mds(&cyc)),
        PropertyReport::compare("cyclic_6x6/associated_row", &c6, &circulant(&assoc)),
        PropertyReport::compare(
            "cyclic_6x6/column_permutation",
            &c6,
            &cyc.mat_mul(&q.to_matrix(cyc.field()))
                .map_err(PropsError::from)?,
        ),
    ];
    Ok(SuiteReport::new("reference-examples", None, None, reports))
}

/// Runs `check` for each trial until one returns a witness.
fn run_trials(
    name: String,
    trials: u64,
    mut check: impl FnMut(u64) -> Result<Option<Witness>, SearchError>,
) -> Result<PropertyReport, SearchError> {
    for t in 0..trials {
        if let Some(w) = check(t)? {
            return Ok(PropertyReport::fail(name, w));
        }
    }
    Ok(PropertyReport::pass(name))
}

fn counterexample(trial: u64, row: &FirstRow, detail: impl fmt::Debug) -> Option<Witness> {
    Some(Witness::Counterexample {
        trial,
        row: row.elements().to_vec(),
        detail: format!("{detail:?}"),
    })
}

fn failed_report(trial: u64, row: &FirstRow, report: PropertyReport) -> Option<Witness> {
    if report.verdict {
        None
    } else {
        counterexample(trial, row, report.witness)
    }
}

/// The power-of-two lemmas, shift laws, gcd obstruction, structure
/// decompositions and the integer divisibility law, on seeded random rows.
pub fn verify_lemmas(trials: u64, seed: u64) -> Result<SuiteReport, SearchError> {
    let aes = FieldSpec::aes();
    let gf16 = FieldSpec::new(4, 0x13).expect("irreducible");
    let mut stream = 0u64;
    let mut next_rng = || {
        stream += 1;
        stream_rng(seed, stream)
    };
    let mut reports = Vec::new();

    for (d, g) in [(2u32, 1usize), (2, 3), (3, 3), (3, 5)] {
        let k = 1usize << d;
        let mut rng = next_rng();
        reports.push(run_trials(format!("det_formula/d{d}_g{g}"), trials, |t| {
            let row = random_row(&mut rng, aes, k);
            let (formula, det) = props::det_formula(&row, g, d)?;
            Ok((formula != det)
                .then(|| counterexample(t, &row, (formula, det)))
                .flatten())
        })?);
        let mut rng = next_rng();
        reports.push(run_trials(
            format!("scalar_power_law/d{d}_g{g}"),
            trials,
            |t| {
                let row = random_row(&mut rng, aes, k);
                let (report, scalar) = props::scalar_power_law(&row, g, d)?;
                if scalar != aes.pow(row.sum(), k as u64) {
                    return Ok(counterexample(t, &row, scalar));
                }
                Ok(failed_report(t, &row, report))
            },
        )?);
    }

    for k in 2..=8 {
        for g in (1..k).filter(|&g| gcd(k, g) == 1) {
            let mut rng = next_rng();
            let unit = props::shift_conjugation_law(g, &FirstRow::unit(aes, k));
            let report = if unit.verdict {
                run_trials(format!("shift_conjugation_law/k{k}_g{g}"), trials, |t| {
                    let row = random_row(&mut rng, aes, k);
                    Ok(failed_report(
                        t,
                        &row,
                        props::shift_conjugation_law(g, &row),
                    ))
                })?
            } else {
                named(format!("shift_conjugation_law/k{k}_g{g}"), unit)
            };
            reports.push(report);
        }
    }

    for k in [5usize, 6] {
        let mut rng = next_rng();
        reports.push(run_trials(format!("gh_product_law/k{k}"), trials, |t| {
            let (g, h) = (rng.gen_range(0..k), rng.gen_range(0..k));
            let (a, b) = (random_row(&mut rng, aes, k), random_row(&mut rng, aes, k));
            let report = props::gh_product_law(g, h, &a, &b)?;
            Ok(failed_report(t, &a, report))
        })?);
    }

    for g in [2usize, 3, 4] {
        let mut rng = next_rng();
        reports.push(run_trials(
            format!("gcd_obstruction/k6_g{g}"),
            trials,
            |t| {
                let row = random_row(&mut rng, gf16, 6);
                Ok(failed_report(t, &row, props::gcd_obstruction(g, &row)?))
            },
        )?);
    }

    let mut rng = next_rng();
    let cycles: Vec<KCycle> = (1..=5).flat_map(KCycle::all).collect();
    reports.push(run_trials(
        "cyclic_structure_decomposition/k_le_5".into(),
        cycles.len() as u64,
        |t| {
            let rho = &cycles[t as usize];
            let row = random_distinct_row(&mut rng, aes, rho.order())?;
            let report = structured::cyclic_structure_decomposition(rho, &row)?;
            Ok(failed_report(t, &row, report))
        },
    )?);
    let cases: Vec<(usize, usize)> = (1..=8).flat_map(|k| (0..k).map(move |g| (k, g))).collect();
    let mut rng = next_rng();
    reports.push(run_trials(
        "g_circulant_structure_decomposition/k_le_8".into(),
        cases.len() as u64,
        |t| {
            let (k, g) = cases[t as usize];
            let row = random_distinct_row(&mut rng, aes, k)?;
            let report = structured::g_circulant_structure_decomposition(g, &row)?;
            Ok(failed_report(t, &row, report))
        },
    )?);
    let cycles: Vec<KCycle> = (1..=6).flat_map(KCycle::all).collect();
    reports.push(
        match cycles
            .iter()
            .map(structured::q_rho_inverse_law)
            .find(|r| !r.verdict)
        {
            Some(r) => named("q_rho_inverse_law/k_le_6", r),
            None => PropertyReport::pass("q_rho_inverse_law/k_le_6"),
        },
    );

    let divisibility = (3..64u64)
        .step_by(2)
        .flat_map(|g| (1..=8u32).map(move |d| (g, d)))
        .map(|(g, d)| props::divisibility_law(g, d))
        .find(|r| r.as_ref().map_or(true, |r| !r.verdict))
        .transpose()?;
    reports.push(match divisibility {
        Some(r) => named("divisibility_law/g_lt_64_d_le_8", r),
        None => PropertyReport::pass("divisibility_law/g_lt_64_d_le_8"),
    });

    Ok(SuiteReport::new(
        "lemmas",
        Some(seed),
        Some(trials),
        reports,
    ))
}

/// A case where the cyclic matrix and its associated circulant disagree on
/// being orthogonal and MDS.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceViolation {
    pub rho: KCycle,
    pub row: Vec<Element>,
    pub cyclic: bool,
    pub circulant: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub field: FieldSpec,
    pub k: usize,
    pub mode: Mode,
    pub cases: u64,
    /// Cases where both sides are orthogonal and MDS.
    pub both_hold: u64,
    pub violations: Vec<EquivalenceViolation>,
    pub verdict: bool,
}

impl EquivalenceReport {
    fn new(field: FieldSpec, k: usize, mode: Mode, outcomes: Vec<EquivalenceOutcome>) -> Self {
        let violations: Vec<EquivalenceViolation> = outcomes
            .iter()
            .filter(|o| o.cyclic != o.circulant)
            .map(|o| EquivalenceViolation {
                rho: o.rho.clone(),
                row: o.row.elements().to_vec(),
                cyclic: o.cyclic,
                circulant: o.circulant,
            })
            .collect();
        EquivalenceReport {
            field,
            k,
            mode,
            cases: outcomes.len() as u64,
            both_hold: outcomes.iter().filter(|o| o.cyclic && o.circulant).count() as u64,
            verdict: violations.is_empty(),
            violations,
        }
    }

    pub fn to_property_report(&self, name: impl Into<String>) -> PropertyReport {
        match self.violations.first() {
            None => PropertyReport::pass(name),
            Some(v) => PropertyReport::fail(
                name,
                Witness::Counterexample {
                    trial: 0,
                    row: v.row.clone(),
                    detail: format!(
                        "rho {}: cyclic {}, circulant {}",
                        v.rho, v.cyclic, v.circulant
                    ),
                },
            ),
        }
    }
}

struct EquivalenceOutcome {
    rho: KCycle,
    row: FirstRow,
    cyclic: bool,
    circulant: bool,
}

fn orthogonal_mds(m: &Matrix) -> bool {
    props::is_orthogonal(m).verdict && props::is_mds(m).verdict
}

/// `(cyclic(rho, row) orthogonal and MDS, its associated circulant orthogonal and MDS)`.
pub fn equivalence_case(rho: &KCycle, row: &FirstRow) -> Result<(bool, bool), SearchError> {
    let cyc = structured::cyclic(rho, row)?;
    let (assoc, _) = associated_circulant(rho, row)?;
    Ok((orthogonal_mds(&cyc), orthogonal_mds(&circulant(&assoc))))
}

fn outcome(rho: KCycle, row: FirstRow) -> EquivalenceOutcome {
    let (cyclic, circulant) = equivalence_case(&rho, &row).expect("orders agree");
    EquivalenceOutcome {
        rho,
        row,
        cyclic,
        circulant,
    }
}

/// Random rows and random `k`-cycles: the cyclic matrix is orthogonal MDS
/// exactly when its associated circulant is.
pub fn cyclic_equivalence_theorem_check(
    field: FieldSpec,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport, SearchError> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(SearchError::BadSpec(format!(
            "k = {k} outside 1..={MAX_ORDER}"
        )));
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t);
            let rho = random_k_cycle(&mut rng, k);
            let row = random_row(&mut rng, field, k);
            outcome(rho, row)
        })
        .collect();
    Ok(EquivalenceReport::new(
        field,
        k,
        Mode::Random { seed, trials },
        outcomes,
    ))
}

/// Same check over every row and every `k`-cycle.
pub fn cyclic_equivalence_exhaustive(
    field: FieldSpec,
    k: usize,
    ceiling: u64,
) -> Result<EquivalenceReport, SearchError> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(SearchError::BadSpec(format!(
            "k = {k} outside 1..={MAX_ORDER}"
        )));
    }
    let cycle_count = (1..k as u128).product::<u128>();
    let candidates = candidate_count(field, k).saturating_mul(cycle_count);
    if candidates > u128::from(ceiling) {
        return Err(SearchError::CeilingExceeded {
            candidates,
            ceiling,
        });
    }
    let cycles = KCycle::all(k);
    let rows = candidate_count(field, k) as u64;
    let outcomes = (0..rows)
        .into_par_iter()
        .flat_map_iter(|n| {
            let row = row_from_index(field, k, n);
            cycles
                .iter()
                .map(move |rho| outcome(rho.clone(), row.clone()))
        })
        .collect();
    Ok(EquivalenceReport::new(field, k, Mode::Exhaustive, outcomes))
}

/// Permutation-equivalence recovery on the worked pairs, and the cyclic /
/// associated-circulant equivalence on random, reference and exhaustive cases.
pub fn verify_equivalence(trials: u64, seed: u64) -> Result<SuiteReport, SearchError> {
    let aes = FieldSpec::aes();
    let mut rng = stream_rng(seed, 0);
    let c = random_distinct_row(&mut rng, aes, 5)?;
    let pick = |idx: &[usize]| FirstRow::new(aes, idx.iter().map(|&i| c.get(i)).collect());
    let row_a = pick(&[0, 2, 4, 1, 3])?;
    let row_b = pick(&[0, 3, 1, 4, 2])?;
    let rho_1 = parse_cycle("(0 2 4 1 3)", 5)?;
    let rho_2 = parse_cycle("(0 3 1 4 2)", 5)?;

    let ex = reference_examples();
    let (cyclic_side, circulant_side) = equivalence_case(&ex.cyclic_rho, &ex.cyclic_6)?;
    let reference = PropertyReport::new(
        "cyclic_equivalence/reference_k6",
        cyclic_side && circulant_side,
        None,
    );
    let gf16 = FieldSpec::new(4, 0x13).expect("irreducible");
    let gf4 = FieldSpec::new(2, 0x7).expect("irreducible");
    let reports = vec![
        named(
            "perm_equiv_circulant/worked_pair",
            props::perm_equiv_circulant(&row_a, &row_b)?,
        ),
        named(
            "perm_equiv_cyclic/worked_pair",
            props::perm_equiv_cyclic(&rho_1, &rho_2, &c)?,
        ),
        cyclic_equivalence_theorem_check(gf16, 3, trials, seed)?
            .to_property_report("cyclic_equivalence/gf16_k3_random"),
        cyclic_equivalence_theorem_check(aes, 6, trials, seed)?
            .to_property_report("cyclic_equivalence/gf256_k6_random"),
        reference,
        cyclic_equivalence_exhaustive(gf4, 5, DEFAULT_CEILING)?
            .to_property_report("cyclic_equivalence/gf4_k5_exhaustive"),
    ];
    Ok(SuiteReport::new(
        "equivalence",
        Some(seed),
        Some(trials),
        reports,
    ))
}
