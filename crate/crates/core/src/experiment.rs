//! Declarative experiments: parse a JSON spec, build the objects it names,
//! run the harness, and render a deterministic report or a DOT graph.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ceers::{self, BlockPattern, CeerRef, MapFn};
use crate::error::CeerError;
use crate::jumps;
use crate::kernel::asm::Asm;
use crate::kernel::{builtin_indices, nat_serde, pair_u64, Budget, Nat, ProgramIndex};
use crate::reductions::{self as red, Reduction};
use crate::sets::{self, SetRef};
use crate::verify::{self, Report, Status, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("parse error at {path} (line {line}, column {column}): {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("invalid value at {path}: {msg}")]
    Semantic { path: String, msg: String },
}

impl SpecError {
    pub fn path(&self) -> &str {
        match self {
            SpecError::Parse { path, .. } | SpecError::Semantic { path, .. } => path,
        }
    }
}

fn semantic(path: &str, msg: impl Into<String>) -> SpecError {
    SpecError::Semantic { path: path.to_string(), msg: msg.into() }
}

/// A program given by code, by builtin name, or as a lister of pair codes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProgramSpec {
    Code(#[serde(with = "nat_serde")] Nat),
    Builtin(String),
    /// Halts exactly on the codes `⟨x,y⟩` of the listed pairs.
    Listing(Vec<(u64, u64)>),
    /// `count` random pairs below `max`, drawn with `seed`.
    Random { seed: u64, count: usize, max: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    K,
    KI { i: u64 },
    W { program: ProgramSpec },
    Residue { m: u64, r: u64 },
    Evens,
    All,
    Empty,
    Finite { elems: Vec<u64> },
    PostSimple,
    Dekker { base: Box<SetSpec> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseCeer {
    Id { n: u64 },
    Omega,
    H,
    RInfinity,
    EN { n: u32 },
    UniversalBounded { k: u64 },
    KPairs,
    KTriples,
    Explicit { pairs: Vec<(u64, u64)> },
    Periodic {
        seed: u64,
        k: u64,
        #[serde(default = "default_blocks")]
        blocks: usize,
        #[serde(default)]
        nontrivial: bool,
    },
    FromPairs { program: ProgramSpec },
    FromFunction { program: ProgramSpec },
    Truncate { base: Box<CeerSpec>, k: u64 },
    Cylinder { base: Box<CeerSpec> },
    Join { a: Box<CeerSpec>, b: Box<CeerSpec> },
    Interval { set: SetSpec },
    FromSets { sets: Vec<SetSpec> },
    Layers {
        set: SetSpec,
        #[serde(default)]
        k: Option<u64>,
    },
    KInterval { set: SetSpec },
    Rows { set: SetSpec },
    OmegaKappa { n: u64 },
    OmegaOmega,
}

fn default_blocks() -> usize {
    5
}

fn one() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    Halting,
    Saturation,
    OmegaPlus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpCeer {
    pub jump: JumpKind,
    #[serde(default = "one")]
    pub n: u32,
    pub base: Box<CeerSpec>,
}

/// Either `{"kind": ...}` or `{"jump": ..., "n": ..., "base": ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum CeerSpec {
    Base(BaseCeer),
    Jump(JumpCeer),
}

impl<'de> Deserialize<'de> for CeerSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = Value::deserialize(d)?;
        let is_jump = v.as_object().map(|m| m.contains_key("jump")).unwrap_or(false);
        if is_jump {
            JumpCeer::deserialize(v).map(CeerSpec::Jump).map_err(D::Error::custom)
        } else {
            BaseCeer::deserialize(v).map(CeerSpec::Base).map_err(D::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Mod(u64),
    Constant(u64),
    /// `x ↦ a·x + b`.
    Affine(u64, u64),
    Program(ProgramSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReductionSpec {
    Map {
        source: CeerSpec,
        target: CeerSpec,
        map: MapSpec,
        #[serde(default)]
        injective: bool,
    },
    OmegaInto { ceer: CeerSpec, count: u64 },
    Transversal { ceer: CeerSpec, set: SetSpec },
    OmegaToBounded { ceer: CeerSpec, l: u64, f: Vec<u64> },
    Singleton { ceer: CeerSpec },
    Lift { of: Box<ReductionSpec>, n: u32 },
    Absorb { ceer: CeerSpec },
    Containment,
    Collapse,
    JumpEmbedding { ceer: CeerSpec },
    JumpForward { of: Box<ReductionSpec> },
    JumpBackward { of: Box<ReductionSpec>, source: CeerSpec, target: CeerSpec },
    Halve {
        ceer: CeerSpec,
        #[serde(default = "two")]
        threshold: u64,
    },
    BoundedToJump { ceer: CeerSpec },
    BoundedToOmegaN { ceer: CeerSpec, n: u32 },
    ToOmegaOmega { ceer: CeerSpec },
}

fn two() -> u64 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PairSpec {
    /// All `x < y <= n`.
    Exhaustive(u64),
    /// `count` pairs below `n`; `seed` defaults to the experiment seed.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        count: usize,
        n: u64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Budget for class listings and set enumerations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
    /// Budget ladder for the harness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<Budget>>,
    /// Budget for builders that tabulate or audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub build: Option<Budget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PairSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceer: Option<CeerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reductions: Vec<ReductionSpec>,
}

/// Parses and validates a spec. Errors name a JSONPath-like location.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = json_path(&e.path().to_string());
        let inner = e.into_inner();
        SpecError::Parse { path, line: inner.line(), column: inner.column(), msg: inner.to_string() }
    })?;
    spec.validate()?;
    Ok(spec)
}

fn json_path(p: &str) -> String {
    if p == "." || p.is_empty() {
        "$".into()
    } else {
        format!("$.{p}")
    }
}

fn positive(path: &str, field: &str, v: u64) -> Result<(), SpecError> {
    if v == 0 {
        return Err(semantic(&format!("{path}.{field}"), format!("{field} must be positive")));
    }
    Ok(())
}

impl ProgramSpec {
    pub fn validate(&self, path: &str) -> Result<(), SpecError> {
        match self {
            ProgramSpec::Builtin(name) => {
                if !builtin_indices().named().iter().any(|(n, _)| n == name) {
                    return Err(semantic(&format!("{path}.builtin"), format!("unknown builtin {name:?}")));
                }
            }
            ProgramSpec::Random { max, .. } => positive(&format!("{path}.random"), "max", *max)?,
            _ => {}
        }
        Ok(())
    }

    pub fn build(&self) -> ProgramIndex {
        match self {
            ProgramSpec::Code(c) => ProgramIndex(c.clone()),
            ProgramSpec::Builtin(name) => builtin_indices()
                .named()
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, e)| e)
                .expect("validated builtin"),
            ProgramSpec::Listing(pairs) => {
                pair_lister(&pairs.iter().map(|&(x, y)| pair_u64(x, y)).collect::<Vec<_>>())
            }
            ProgramSpec::Random { seed, count, max } => random_pair_lister(*seed, *count, *max),
        }
    }
}

/// A program halting exactly on the given codes.
pub fn pair_lister(codes: &[Nat]) -> ProgramIndex {
    let mut a = Asm::new();
    for c in codes {
        a.set(1, c.clone()).jeq(0, 1, "halt");
    }
    a.label("loop").jmp(0, "loop");
    a.index()
}

/// `count` pairs `(x, y)` with `x != y <= max`, drawn with `seed`.
pub fn random_pairs_below(seed: u64, count: usize, max: u64) -> Vec<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count && max > 0 {
        let (x, y) = (rng.gen_range(0..=max), rng.gen_range(0..=max));
        if x != y {
            out.push((x, y));
        }
    }
    out
}

/// Lister of [`random_pairs_below`], the `W_e` of a random `from_pairs` ceer.
pub fn random_pair_lister(seed: u64, count: usize, max: u64) -> ProgramIndex {
    let codes: Vec<Nat> = random_pairs_below(seed, count, max).into_iter().map(|(x, y)| pair_u64(x, y)).collect();
    pair_lister(&codes)
}

impl SetSpec {
    pub fn validate(&self, path: &str) -> Result<(), SpecError> {
        match self {
            SetSpec::W { program } => program.validate(&format!("{path}.program")),
            SetSpec::Residue { m, r } => {
                positive(path, "m", *m)?;
                if r >= m {
                    return Err(semantic(&format!("{path}.r"), "residue must be below the modulus"));
                }
                Ok(())
            }
            SetSpec::Dekker { base } => base.validate(&format!("{path}.base")),
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<SetRef, CeerError> {
        Ok(match self {
            SetSpec::K => sets::k(),
            SetSpec::KI { i } => sets::k_i(&Nat::from(*i)),
            SetSpec::W { program } => sets::w(program.build()),
            SetSpec::Residue { m, r } => sets::residue(*m, *r)?,
            SetSpec::Evens => sets::evens(),
            SetSpec::All => sets::all(),
            SetSpec::Empty => sets::empty(),
            SetSpec::Finite { elems } => sets::finite(elems),
            SetSpec::PostSimple => sets::post_simple(),
            SetSpec::Dekker { base } => sets::dekker_deficiency(base.build()?),
        })
    }
}

impl CeerSpec {
    pub fn validate(&self, path: &str) -> Result<(), SpecError> {
        let sub = |f: &str| format!("{path}.{f}");
        match self {
            CeerSpec::Jump(j) => j.base.validate(&sub("base")),
            CeerSpec::Base(b) => match b {
                BaseCeer::Id { n } => positive(path, "n", *n),
                BaseCeer::EN { n } if *n > 16 => Err(semantic(&sub("n"), "n must be at most 16")),
                BaseCeer::UniversalBounded { k } => positive(path, "k", *k),
                BaseCeer::Periodic { k, blocks, .. } => {
                    positive(path, "k", *k)?;
                    positive(path, "blocks", *blocks as u64)
                }
                BaseCeer::FromPairs { program } | BaseCeer::FromFunction { program } => {
                    program.validate(&sub("program"))
                }
                BaseCeer::Truncate { base, k } => {
                    positive(path, "k", *k)?;
                    base.validate(&sub("base"))
                }
                BaseCeer::Cylinder { base } => base.validate(&sub("base")),
                BaseCeer::Join { a, b } => {
                    a.validate(&sub("a"))?;
                    b.validate(&sub("b"))
                }
                BaseCeer::Interval { set }
                | BaseCeer::Layers { set, .. }
                | BaseCeer::KInterval { set }
                | BaseCeer::Rows { set } => set.validate(&sub("set")),
                BaseCeer::FromSets { sets } => {
                    if sets.is_empty() {
                        return Err(semantic(&sub("sets"), "at least one set required"));
                    }
                    sets.iter().enumerate().try_for_each(|(i, s)| s.validate(&format!("{path}.sets[{i}]")))
                }
                _ => Ok(()),
            },
        }
    }

    pub fn build(&self, check: &Budget) -> Result<CeerRef, CeerError> {
        Ok(match self {
            CeerSpec::Jump(j) => {
                let base = j.base.build(check)?;
                match j.jump {
                    JumpKind::Halting => jumps::halting_jump(base, j.n),
                    JumpKind::Saturation => jumps::saturation_jump(base, j.n),
                    JumpKind::OmegaPlus => (0..j.n).fold(base, |r, _| jumps::omega_plus(r)),
                }
            }
            CeerSpec::Base(b) => match b {
                BaseCeer::Id { n } => ceers::id(*n)?,
                BaseCeer::Omega => ceers::omega(),
                BaseCeer::H => ceers::h(),
                BaseCeer::RInfinity => ceers::r_infinity(),
                BaseCeer::EN { n } => ceers::e_n(*n)?,
                BaseCeer::UniversalBounded { k } => ceers::universal_bounded(*k)?,
                BaseCeer::KPairs => ceers::k_pairs(),
                BaseCeer::KTriples => ceers::k_triples(),
                BaseCeer::Explicit { pairs } => ceers::explicit("explicit", pairs.clone()),
                BaseCeer::Periodic { seed, k, blocks, nontrivial } => {
                    ceers::periodic_blocks(BlockPattern::random(*seed, *k, *blocks, *nontrivial))
                }
                BaseCeer::FromPairs { program } => ceers::from_pairs(program.build()),
                BaseCeer::FromFunction { program } => ceers::from_function(program.build()),
                BaseCeer::Truncate { base, k } => ceers::bounded_truncate_of(base.build(check)?, *k)?,
                BaseCeer::Cylinder { base } => ceers::cylinder(base.build(check)?),
                BaseCeer::Join { a, b } => ceers::join(a.build(check)?, b.build(check)?),
                BaseCeer::Interval { set } => ceers::interval(set.build()?),
                BaseCeer::FromSets { sets } => {
                    ceers::from_sets(sets.iter().map(SetSpec::build).collect::<Result<_, _>>()?, check)?
                }
                BaseCeer::Layers { set, k: Some(k) } => ceers::layers_bounded(set.build()?, *k),
                BaseCeer::Layers { set, k: None } => ceers::layers_finite(set.build()?),
                BaseCeer::KInterval { set } => ceers::k_interval(set.build()?),
                BaseCeer::Rows { set } => ceers::row_ceer(set.build()?),
                BaseCeer::OmegaKappa { n } => jumps::omega_n_kappa(*n),
                BaseCeer::OmegaOmega => jumps::omega_omega(),
            },
        })
    }
}

impl MapSpec {
    fn build(&self) -> MapFn {
        match self {
            MapSpec::Identity => MapFn::Program(builtin_indices().identity.clone()),
            MapSpec::Mod(m) => {
                let m = *m;
                MapFn::total(move |x| x % m)
            }
            MapSpec::Constant(c) => {
                let c = Nat::from(*c);
                MapFn::total(move |_| c.clone())
            }
            MapSpec::Affine(a, b) => {
                let (a, b) = (*a, *b);
                MapFn::total(move |x| x * a + b)
            }
            MapSpec::Program(p) => MapFn::Program(p.build()),
        }
    }
}

/// What a reduction spec builds: a map, or a partial-classification witness.
pub enum Built {
    Map(Reduction),
    Witness { source: CeerRef, witness: ceers::PcWitness },
}

impl ReductionSpec {
    pub fn validate(&self, path: &str) -> Result<(), SpecError> {
        let sub = |f: &str| format!("{path}.{f}");
        match self {
            ReductionSpec::Map { source, target, map, .. } => {
                source.validate(&sub("source"))?;
                target.validate(&sub("target"))?;
                match map {
                    MapSpec::Mod(m) => positive(&sub("map"), "mod", *m),
                    MapSpec::Program(p) => p.validate(&sub("map.program")),
                    _ => Ok(()),
                }
            }
            ReductionSpec::OmegaInto { ceer, count } => {
                positive(path, "count", *count)?;
                ceer.validate(&sub("ceer"))
            }
            ReductionSpec::Transversal { ceer, set } => {
                ceer.validate(&sub("ceer"))?;
                set.validate(&sub("set"))
            }
            ReductionSpec::OmegaToBounded { ceer, l, .. } => {
                positive(path, "l", *l)?;
                ceer.validate(&sub("ceer"))
            }
            ReductionSpec::Lift { of, .. } | ReductionSpec::JumpForward { of } => of.validate(&sub("of")),
            ReductionSpec::JumpBackward { of, source, target } => {
                of.validate(&sub("of"))?;
                source.validate(&sub("source"))?;
                target.validate(&sub("target"))
            }
            ReductionSpec::Halve { ceer, threshold } => {
                if *threshold < 2 {
                    return Err(semantic(&sub("threshold"), "threshold must be at least 2"));
                }
                ceer.validate(&sub("ceer"))
            }
            ReductionSpec::Singleton { ceer }
            | ReductionSpec::Absorb { ceer }
            | ReductionSpec::JumpEmbedding { ceer }
            | ReductionSpec::BoundedToJump { ceer }
            | ReductionSpec::BoundedToOmegaN { ceer, .. }
            | ReductionSpec::ToOmegaOmega { ceer } => ceer.validate(&sub("ceer")),
            ReductionSpec::Containment | ReductionSpec::Collapse => Ok(()),
        }
    }

    fn reduction(&self, build: &Budget) -> Result<Reduction, CeerError> {
        match self.build(build)? {
            Built::Map(f) => Ok(f),
            Built::Witness { .. } => Err(CeerError::Unsupported("a witness is not a reduction".into())),
        }
    }

    pub fn build(&self, build: &Budget) -> Result<Built, CeerError> {
        let f = match self {
            ReductionSpec::Map { source, target, map, injective } => {
                let label = serde_json::to_string(map).unwrap_or_default();
                let (s, t) = (source.build(build)?, target.build(build)?);
                let f = Reduction::new(format!("{} ≤ {} via {label}", s.name(), t.name()), map.build(), s, t);
                if *injective {
                    f.one_one()
                } else {
                    f
                }
            }
            ReductionSpec::OmegaInto { ceer, count } => red::omega_into(ceer.build(build)?, *count, build)?,
            ReductionSpec::Transversal { ceer, set } => red::via_transversal(ceer.build(build)?, set.build()?),
            ReductionSpec::OmegaToBounded { ceer, l, f } => red::omega_to_bounded(ceer.build(build)?, *l, f)?,
            ReductionSpec::Singleton { ceer } => red::singleton_embedding(ceer.build(build)?),
            ReductionSpec::Lift { of, n } => red::lift_saturation(&of.reduction(build)?, *n),
            ReductionSpec::Absorb { ceer } => red::omega_plus_absorb(ceer.build(build)?),
            ReductionSpec::Containment => red::collapse_containment(),
            ReductionSpec::Collapse => {
                let (g1, g2) = red::collapse_gadgets();
                red::satjump_collapse(&g1, &g2, build)?
            }
            ReductionSpec::JumpEmbedding { ceer } => red::jump_embedding(ceer.build(build)?),
            ReductionSpec::JumpForward { of } => red::jump_transfer_forward(&of.reduction(build)?, build)?,
            ReductionSpec::JumpBackward { of, source, target } => {
                red::jump_transfer_backward(&of.reduction(build)?, source.build(build)?, target.build(build)?, build)?
            }
            ReductionSpec::Halve { ceer, threshold } => red::halve_bounded(ceer.build(build)?, *threshold)?.f,
            ReductionSpec::BoundedToJump { ceer } => {
                let source = ceer.build(build)?;
                let (_, witness) = red::bounded_to_jump(source.clone())?;
                return Ok(Built::Witness { source, witness });
            }
            ReductionSpec::BoundedToOmegaN { ceer, n } => red::bounded_to_omega_n(ceer.build(build)?, *n, build)?,
            ReductionSpec::ToOmegaOmega { ceer } => red::to_omega_omega(ceer.build(build)?)?,
        };
        Ok(Built::Map(f))
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if let Some(v) = self.version {
            if v != SCHEMA_VERSION {
                return Err(semantic("$.version", format!("unsupported schema version {v}")));
            }
        }
        if matches!(&self.ladder, Some(l) if l.is_empty()) {
            return Err(semantic("$.ladder", "ladder must not be empty"));
        }
        if let Some(PairSpec::Random { count: 0, .. }) = self.pairs {
            return Err(semantic("$.pairs.random.count", "count must be positive"));
        }
        if let Some(c) = &self.ceer {
            c.validate("$.ceer")?;
        }
        for (i, s) in self.sets.iter().enumerate() {
            s.validate(&format!("$.sets[{i}]"))?;
        }
        for (i, r) in self.reductions.iter().enumerate() {
            r.validate(&format!("$.reductions[{i}]"))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Command-line overrides applied on top of a spec.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub budget: Option<Budget>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&CeerError> for ErrorRecord {
    fn from(e: &CeerError) -> Self {
        let kind = match e {
            CeerError::BudgetExceeded(_) => "BUDGET_EXCEEDED",
            CeerError::InvalidParameter(_) => "INVALID_PARAMETER",
            CeerError::InputViolation(_) => "INPUT_VIOLATION",
            CeerError::PromiseViolated(_) => "PROMISE_VIOLATED",
            CeerError::Unsupported(_) => "UNSUPPORTED",
        };
        ErrorRecord { kind: kind.into(), message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeerListing {
    pub name: String,
    pub budget: Budget,
    pub singletons: usize,
    /// Classes with at least two elements, within the universe.
    pub classes: Vec<Vec<u64>>,
    pub audit: verify::PromiseAudit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetListing {
    pub name: String,
    pub budget: Budget,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionOutcome {
    pub index: usize,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<Report>,
}

impl ReductionOutcome {
    /// An edge in the DOT graph.
    pub fn is_edge(&self) -> bool {
        self.status == Some(Status::Confirmed)
            && self.report.as_ref().map(|r| r.verdict.counts.violated == 0).unwrap_or(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub seed: u64,
    pub budget: Budget,
    pub build: Budget,
    pub ladder: Vec<Budget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceer: Option<CeerListing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceer_error: Option<ErrorRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetListing>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reductions: Vec<ReductionOutcome>,
    pub exit_code: i32,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

fn exit_for(e: &CeerError) -> i32 {
    match e {
        CeerError::BudgetExceeded(_) => EXIT_BUDGET,
        CeerError::PromiseViolated(_) => EXIT_VIOLATED,
        _ => EXIT_INPUT,
    }
}

/// Violations dominate budget failures, which dominate input errors.
fn worse(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_VIOLATED => 3,
        EXIT_BUDGET => 2,
        EXIT_INPUT => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

pub fn list_classes(r: &CeerRef, b: &Budget) -> CeerListing {
    let part = r.fragment(b).partition();
    let singletons = part.iter().filter(|c| c.len() == 1).count();
    CeerListing {
        name: r.name(),
        budget: *b,
        singletons,
        classes: part.into_iter().filter(|c| c.len() > 1).collect(),
        audit: verify::audit_promises(r.as_ref(), b),
    }
}

/// Runs every part of the spec. Deterministic for a fixed spec and options.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> ExperimentReport {
    let seed = opts.seed.unwrap_or(spec.seed);
    let budget = opts.budget.or(spec.budget).unwrap_or_default();
    let build = spec.build.unwrap_or(budget);
    let ladder = spec.ladder.clone().unwrap_or_else(|| vec![budget]);
    let pairs = match &spec.pairs {
        Some(PairSpec::Exhaustive(n)) => verify::all_pairs(*n),
        Some(PairSpec::Random { seed: s, count, n }) => verify::random_pairs(s.unwrap_or(seed), *count, *n),
        None => verify::all_pairs(budget.universe.min(20)),
    };
    let mut exit = EXIT_OK;
    let (mut ceer, mut ceer_error) = (None, None);
    if let Some(c) = &spec.ceer {
        match c.build(&build) {
            Ok(r) => {
                let l = list_classes(&r, &budget);
                if l.audit.status == Status::Violated {
                    exit = worse(exit, EXIT_VIOLATED);
                }
                ceer = Some(l);
            }
            Err(e) => {
                exit = worse(exit, exit_for(&e));
                ceer_error = Some(ErrorRecord::from(&e));
            }
        }
    }
    let mut set_listings = Vec::new();
    for s in &spec.sets {
        match s.build() {
            Ok(set) => set_listings.push(SetListing {
                name: set.name(),
                budget,
                members: set.members(&budget).iter().map(|m| m.to_string()).collect(),
            }),
            Err(e) => exit = worse(exit, exit_for(&e)),
        }
    }
    let mut outcomes = Vec::new();
    for (index, r) in spec.reductions.iter().enumerate() {
        let out = run_reduction(index, r, &build, &ladder, &pairs, seed);
        exit = worse(exit, outcome_exit(&out));
        outcomes.push(out);
    }
    ExperimentReport {
        schema: SCHEMA_VERSION,
        experiment: spec.name.clone().unwrap_or_else(|| "experiment".into()),
        seed,
        budget,
        build,
        ladder,
        ceer,
        ceer_error,
        sets: set_listings,
        reductions: outcomes,
        exit_code: exit,
    }
}

fn outcome_exit(o: &ReductionOutcome) -> i32 {
    if o.status == Some(Status::Violated) {
        return EXIT_VIOLATED;
    }
    match o.error.as_ref().map(|e| e.kind.as_str()) {
        Some("BUDGET_EXCEEDED") => EXIT_BUDGET,
        Some("PROMISE_VIOLATED") => EXIT_VIOLATED,
        Some(_) => EXIT_INPUT,
        None => EXIT_OK,
    }
}

fn run_reduction(
    index: usize,
    r: &ReductionSpec,
    build: &Budget,
    ladder: &[Budget],
    pairs: &[(Nat, Nat)],
    seed: u64,
) -> ReductionOutcome {
    let kind = serde_json::to_value(r).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default();
    let mut out =
        ReductionOutcome { index, name: kind.clone(), source: None, target: None, status: None, error: None, report: None };
    let (name, verdict): (String, Verdict) = match r.build(build) {
        Err(e) => {
            out.error = Some(ErrorRecord::from(&e));
            return out;
        }
        Ok(Built::Map(f)) => {
            out.source = Some(f.source.name());
            out.target = Some(f.target.name());
            (f.name.clone(), verify::check_reduction(&f, pairs, ladder))
        }
        Ok(Built::Witness { source, witness }) => {
            out.source = Some(source.name());
            out.target = Some(format!("{}′", witness.target.name()));
            (format!("PC witness for {}", source.name()), verify::check_pc_witness(&witness, &source, pairs, ladder))
        }
    };
    let provenance = [("kind".to_string(), kind), ("seed".to_string(), seed.to_string())].into_iter().collect();
    out.name = name.clone();
    out.status = Some(verdict.status());
    out.report = Some(verify::emit_report(&name, &verdict, ladder, provenance));
    out
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Nodes are ceers; edges are confirmed reductions with no violated pair.
    pub fn to_dot(&self) -> String {
        let mut nodes: Vec<&str> = Vec::new();
        let named = self.ceer.iter().map(|c| &c.name);
        let ends = self.reductions.iter().flat_map(|o| [&o.source, &o.target]).flatten();
        for n in named.chain(ends) {
            if !nodes.contains(&n.as_str()) {
                nodes.push(n);
            }
        }
        let mut s = String::from("digraph ceerlab {\n");
        for n in &nodes {
            let _ = writeln!(s, "  {};", quote(n));
        }
        for o in self.reductions.iter().filter(|o| o.is_edge()) {
            if let (Some(a), Some(b)) = (&o.source, &o.target) {
                let _ = writeln!(s, "  {} -> {} [label={}];", quote(a), quote(b), quote(&format!("#{}", o.index)));
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {} (seed {}, budget {})", self.experiment, self.seed, self.budget);
        if let Some(c) = &self.ceer {
            let _ = writeln!(
                s,
                "ceer {}: {} nontrivial classes, {} singletons, audit {:?}",
                c.name,
                c.classes.len(),
                c.singletons,
                c.audit.status
            );
            for cl in &c.classes {
                let _ = writeln!(s, "  {cl:?}");
            }
        }
        if let Some(e) = &self.ceer_error {
            let _ = writeln!(s, "ceer error {}: {}", e.kind, e.message);
        }
        for l in &self.sets {
            let _ = writeln!(s, "set {}: {}", l.name, l.members.join(" "));
        }
        for o in &self.reductions {
            match (&o.status, &o.error, &o.report) {
                (_, Some(e), _) => {
                    let _ = writeln!(s, "[{}] {} error {}: {}", o.index, o.name, e.kind, e.message);
                }
                (Some(st), None, Some(r)) => {
                    let c = &r.verdict.counts;
                    let _ = writeln!(
                        s,
                        "[{}] {} {:?}: +{} -{} violated {} unknown {}",
                        o.index, o.name, st, c.confirmed_pos, c.confirmed_neg, c.violated, c.unknown
                    );
                    if let Some(w) = &r.witness {
                        let _ = writeln!(s, "    witness ({}, {}) {:?}", w.x, w.y, w.outcome);
                    }
                }
                _ => {}
            }
        }
        let _ = writeln!(s, "exit {}", self.exit_code);
        s
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Named demo specs, one per scenario the test suite exercises.
pub const DEMOS: &[(&str, &str)] = &[
    (
        "mod2",
        r#"{"name":"mod2","reductions":[{"kind":"map","source":{"kind":"id","n":2},"target":{"kind":"id","n":4},"map":{"mod":2}}],"pairs":{"exhaustive":20}}"#,
    ),
    (
        "constant-zero",
        r#"{"name":"constant-zero","reductions":[{"kind":"map","source":{"kind":"id","n":2},"target":{"kind":"id","n":2},"map":{"constant":0}}],"pairs":{"exhaustive":10}}"#,
    ),
    (
        "classes",
        r#"{"name":"classes","budget":{"stage":200,"fuel":200,"universe":30},"ceer":{"kind":"truncate","k":3,"base":{"kind":"from_pairs","program":{"random":{"seed":7,"count":12,"max":30}}}}}"#,
    ),
    (
        "halving",
        r#"{"name":"halving","seed":11,"budget":{"stage":200,"fuel":200,"universe":40},"ceer":{"kind":"periodic","seed":11,"k":4,"nontrivial":true},"reductions":[{"kind":"halve","ceer":{"kind":"periodic","seed":11,"k":4,"nontrivial":true}},{"kind":"bounded_to_jump","ceer":{"kind":"periodic","seed":11,"k":4,"nontrivial":true}}],"pairs":{"random":{"count":200,"n":40}}}"#,
    ),
    (
        "omega-n",
        r#"{"name":"omega-n","budget":{"stage":200,"fuel":20000,"universe":12},"build":{"stage":60,"fuel":200,"universe":12},"reductions":[{"kind":"bounded_to_omega_n","n":1,"ceer":{"kind":"periodic","seed":3,"k":3,"nontrivial":true}}],"pairs":{"exhaustive":12}}"#,
    ),
    (
        "jump-transfer",
        r#"{"name":"jump-transfer","budget":{"stage":100,"fuel":1000,"universe":20},"build":{"stage":50,"fuel":50,"universe":50},"reductions":[{"kind":"jump_forward","of":{"kind":"map","source":{"kind":"id","n":2},"target":{"kind":"id","n":4},"map":{"mod":2}}},{"kind":"jump_embedding","ceer":{"kind":"id","n":2}}],"pairs":{"exhaustive":20}}"#,
    ),
    (
        "saturation",
        r#"{"name":"saturation","budget":{"stage":100,"fuel":2000,"universe":20},"build":{"stage":50,"fuel":2000,"universe":20},"reductions":[{"kind":"singleton","ceer":{"kind":"id","n":3}},{"kind":"absorb","ceer":{"kind":"id","n":2}},{"kind":"containment"},{"kind":"collapse"}],"pairs":{"exhaustive":15}}"#,
    ),
    (
        "universality",
        r#"{"name":"universality","budget":{"stage":60,"fuel":100000,"universe":12},"reductions":[{"kind":"to_omega_omega","ceer":{"kind":"from_pairs","program":{"listing":[[0,1]]}}}],"pairs":{"exhaustive":5}}"#,
    ),
    (
        "jump-sanity",
        r#"{"name":"jump-sanity","budget":{"stage":100,"fuel":100,"universe":30},"ceer":{"jump":"halting","n":1,"base":{"kind":"omega"}}}"#,
    ),
    (
        "sets",
        r#"{"name":"sets","budget":{"stage":100,"fuel":100,"universe":30},"sets":[{"kind":"post_simple"},{"kind":"dekker","base":{"kind":"k"}},{"kind":"residue","m":3,"r":1}]}"#,
    ),
];

pub fn demo(name: &str) -> Option<ExperimentSpec> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, t)| parse_spec(t).expect("demo spec parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let s = parse_spec(r#"{"ceer":{"kind":"id","n":3}}"#).unwrap();
        assert_eq!(s.ceer, Some(CeerSpec::Base(BaseCeer::Id { n: 3 })));
        let e = parse_spec(r#"{"ceer":{"kind":"id","n":0}}"#).unwrap_err();
        assert!(matches!(e, SpecError::Semantic { .. }));
        assert_eq!(e.path(), "$.ceer.n");
        let j = parse_spec(r#"{"ceer":{"jump":"halting","n":2,"base":{"kind":"omega"}}}"#).unwrap();
        assert!(matches!(j.ceer, Some(CeerSpec::Jump(JumpCeer { jump: JumpKind::Halting, n: 2, .. }))));
        let bad = parse_spec(r#"{"ceer":{"kind":"nope"}}"#).unwrap_err();
        assert!(matches!(bad, SpecError::Parse { .. }));
        assert_eq!(bad.path(), "$.ceer");
        let nested = parse_spec(r#"{"reductions":[{"kind":"omega_into","count":0,"ceer":{"kind":"omega"}}]}"#);
        assert_eq!(nested.unwrap_err().path(), "$.reductions[0].count");
    }

    #[test]
    fn demos_round_trip() {
        for (name, _) in DEMOS {
            let s = demo(name).unwrap();
            assert_eq!(parse_spec(&s.to_json()).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn mod2_and_constant() {
        let r = run(&demo("mod2").unwrap(), &RunOptions::default());
        assert_eq!(r.exit_code, EXIT_OK);
        assert!(r.to_dot().contains("\"id(2)\" -> \"id(4)\""));
        let r = run(&demo("constant-zero").unwrap(), &RunOptions::default());
        assert_eq!(r.exit_code, EXIT_VIOLATED);
        let w = r.reductions[0].report.as_ref().unwrap().witness.as_ref().unwrap();
        assert_eq!(w.outcome, verify::PairOutcome::Violated);
        assert!(!r.to_dot().contains("->"));
    }
}
