//! End-to-end kernelization: connectivity and stop checks, one marking
//! rule applied until nothing changes, then weight compression.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::fes::kernelize_fes;
use crate::instance::{compute_vc, find_modulator, is_vertex_cover, Instance, Kind, ModulatorError, Target};
use crate::modulator::{rule_components_tsp, rule_paths_subtsp, saturate_path_nonterminals, DEFAULT_GUARD};
use crate::preprocess::{compress_weights, ensure_connected, rr_stop, RuleOutcome, Verdict};
use crate::report::{KernelError, KernelOutcome, KernelReport, KernelResult};
use crate::vc::{rule_vc_tsp, rule_vc_wrp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Fes,
    VcTsp,
    VcWrp,
    Components,
    Paths,
}

impl Pipeline {
    pub const ALL: [Pipeline; 5] = [
        Pipeline::Fes,
        Pipeline::VcTsp,
        Pipeline::VcWrp,
        Pipeline::Components,
        Pipeline::Paths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Fes => "fes",
            Pipeline::VcTsp => "vc-tsp",
            Pipeline::VcWrp => "vc-wrp",
            Pipeline::Components => "components",
            Pipeline::Paths => "paths",
        }
    }

    /// Whether instances of `kind` are accepted. Waypoint routing with a
    /// bounded path modulator has no known kernel, so `paths` rejects it.
    pub fn accepts(self, kind: Kind) -> bool {
        match self {
            Pipeline::Fes => true,
            Pipeline::VcTsp | Pipeline::Components => kind == Kind::Tsp,
            Pipeline::VcWrp => kind == Kind::Wrp,
            Pipeline::Paths => kind != Kind::Wrp,
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown pipeline '{s}' (expected fes, vc-tsp, vc-wrp, components or paths)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelConfig {
    pub pipeline: Pipeline,
    /// Component size bound of the `components` and `paths` pipelines.
    pub r: usize,
    /// Largest modulator searched for when the instance carries no hint.
    pub k_max: usize,
    /// Limit on enumerated behavior candidates per component.
    pub guard: u64,
}

impl KernelConfig {
    pub fn new(pipeline: Pipeline) -> Self {
        KernelConfig {
            pipeline,
            r: 2,
            k_max: 8,
            guard: DEFAULT_GUARD,
        }
    }
}

impl KernelReport {
    /// Folds the report of one rule application into this one.
    pub fn absorb(&mut self, other: KernelReport) {
        for entry in other.log {
            self.record(entry);
        }
        self.marks.red += other.marks.red;
        self.marks.blue += other.marks.blue;
        self.marks.yellow += other.marks.yellow;
        self.marks.green += other.marks.green;
        self.promoted.extend(other.promoted);
        self.bounds.extend(other.bounds);
        for (key, value) in other.stats {
            self.stat_max(&key, value);
        }
        for n in other.notes {
            self.note(n);
        }
        if other.decided.is_some() {
            self.decided = other.decided;
        }
    }
}

/// Applies `outcome`; `Err` carries the final result when it decided.
fn step(cur: &mut Instance, outcome: RuleOutcome, report: &mut KernelReport) -> Result<bool, bool> {
    match outcome.verdict {
        Verdict::Unchanged => Ok(false),
        Verdict::Yes | Verdict::No => {
            report.record(outcome.log);
            Err(outcome.verdict == Verdict::Yes)
        }
        Verdict::Reduced(next) => {
            report.record(outcome.log);
            *cur = next;
            Ok(true)
        }
    }
}

fn modulator_error(e: ModulatorError) -> KernelError {
    KernelError::BadModulator(e.to_string())
}

/// The modulator for `inst`: its hint when present, otherwise a smallest
/// one of size at most `k_max`.
fn modulator(inst: &Instance, pipeline: Pipeline, config: &KernelConfig) -> Result<Vec<usize>, KernelError> {
    match pipeline {
        Pipeline::VcTsp | Pipeline::VcWrp => match &inst.modulator_hint {
            Some(h) if is_vertex_cover(inst, h) => Ok(h.clone()),
            Some(_) => Err(KernelError::BadModulator("hint is not a vertex cover".to_string())),
            None => compute_vc(inst, config.k_max).ok_or(KernelError::NoModulator(config.k_max)),
        },
        _ => {
            let target = if pipeline == Pipeline::Paths {
                Target::Paths(config.r)
            } else {
                Target::Components(config.r)
            };
            find_modulator(inst, target, config.k_max)
                .map_err(modulator_error)?
                .map(|d| d.modulator)
                .ok_or(KernelError::NoModulator(config.k_max))
        }
    }
}

fn changed(before: &Instance, after: &Instance) -> bool {
    before.n != after.n
        || before.m() != after.m()
        || before.budget != after.budget
        || before.waypoints != after.waypoints
}

/// Runs the selected pipeline. Marking rules are repeated while they change
/// the instance; the modulator of the next round is the hint the rule left
/// on its output.
pub fn kernelize(inst: &Instance, config: &KernelConfig) -> Result<KernelResult, KernelError> {
    let pipeline = config.pipeline;
    if !pipeline.accepts(inst.kind) {
        return Err(KernelError::KindMismatch {
            pipeline: pipeline.name().to_string(),
            kind: inst.kind,
        });
    }
    if pipeline == Pipeline::Fes {
        return Ok(kernelize_fes(inst));
    }
    let mut report = KernelReport::new(pipeline.name());
    let mut cur = inst.clone();
    for rule in [rr_stop, ensure_connected] {
        let outcome = rule(&cur);
        if let Err(yes) = step(&mut cur, outcome, &mut report) {
            return Ok(KernelResult::decided(yes, report));
        }
    }
    let mut m = modulator(&cur, pipeline, config)?;
    if pipeline == Pipeline::Paths {
        let (sat, log) = saturate_path_nonterminals(&cur, &m)?;
        for entry in log {
            report.record(entry);
        }
        m = sat.modulator_hint.clone().unwrap_or(m);
        cur = sat;
    }
    for round in 0.. {
        let res = match pipeline {
            Pipeline::VcTsp => rule_vc_tsp(&cur, &m)?,
            Pipeline::VcWrp => rule_vc_wrp(&cur, &m)?,
            Pipeline::Components => rule_components_tsp(&cur, &m, config.r, config.guard)?,
            Pipeline::Paths => rule_paths_subtsp(&cur, &m, config.r, config.guard)?,
            Pipeline::Fes => unreachable!("handled above"),
        };
        let KernelResult { outcome, report: applied } = res;
        let next = match outcome {
            KernelOutcome::Decided(yes) => {
                report.absorb(applied);
                return Ok(KernelResult::decided(yes, report));
            }
            KernelOutcome::Kernel(next) => next,
        };
        // A final round that changes nothing only repeats earlier checks.
        if !changed(&cur, &next) {
            if round == 0 {
                report.absorb(applied);
            }
            break;
        }
        report.absorb(applied);
        m = next.modulator_hint.clone().unwrap_or(m);
        cur = next;
        let stop = rr_stop(&cur);
        if let Err(yes) = step(&mut cur, stop, &mut report) {
            return Ok(KernelResult::decided(yes, report));
        }
    }
    cur.modulator_hint = Some(m);
    loop {
        let outcome = compress_weights(&cur);
        if step(&mut cur, outcome, &mut report) != Ok(true) {
            break;
        }
    }
    report.stat_max("kernel_vertices", cur.n as u64);
    report.stat_max("kernel_edges", cur.m() as u64);
    Ok(KernelResult::kernel(cur, report))
}
