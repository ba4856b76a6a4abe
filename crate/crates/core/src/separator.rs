//! Separation over the full arc-set hull: screening, variable fixing, the cheap
//! membership tests, closed forms, row generation, then scaling and lifting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arcset::{
    ceil_div, screen_trivial, ArcSetError, ArcSetInstance, CutInequality, FracPoint, IntCut, Provenance, Verdict,
    FEAS_TOL, VIOLATION_TOL,
};
use crate::closed_form::{self, CaseId};
use crate::knapsack::{exact_maximum, KnapsackSet};
use crate::refine::{self, Fixing, LiftError, LiftOrder, LiftStep, ReducedCosts, ScaleOutcome, ScalingPolicy};
use crate::rowgen::{self, RowGenError, RowGenOptions, TraceRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparationError {
    #[error(transparent)]
    Input(#[from] ArcSetError),
    #[error("row generation failed: {0}")]
    RowGen(#[from] RowGenError),
    #[error("reduced costs have {got} entries for {what}, expected {expected}")]
    ReducedCostShape { what: &'static str, got: usize, expected: usize },
    #[error("internal check failed: {0}")]
    Internal(String),
}

/// Pipeline step at which the answer was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Screening,
    /// Every variable sits at a bound and no facility is used.
    AllFixed,
    /// Only one facility is free, so a single bound describes the reduced hull.
    SingleFacility,
    /// Rounding the point stays feasible.
    RoundingFeasible,
    ClosedForm,
    RowGeneration,
    Scaling,
    Lifting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorOptions {
    pub lift_order: LiftOrder,
    pub reduced_costs: Option<ReducedCosts>,
    pub scaling: ScalingPolicy,
    pub use_closed_forms: bool,
    pub strengthen: bool,
    /// Cuts violated by no more than this are not reported.
    pub min_violation: f64,
    /// Points seeded into row generation, in reduced coordinates.
    #[serde(skip)]
    pub seed_points: Vec<rowgen::SetPoint>,
}

impl Default for SeparatorOptions {
    fn default() -> Self {
        Self {
            lift_order: LiftOrder::default(),
            reduced_costs: None,
            scaling: ScalingPolicy::default(),
            use_closed_forms: true,
            strengthen: true,
            min_violation: VIOLATION_TOL,
            seed_points: Vec::new(),
        }
    }
}

/// The reduced problem and the cut found on it, before lifting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRecord {
    pub free_x: Vec<usize>,
    pub free_y: Vec<usize>,
    pub existing: i64,
    pub fixing: Fixing,
    /// Integral cut in reduced coordinates, if one was produced.
    pub cut: Option<IntCut>,
}

impl ReducedRecord {
    pub fn instance(&self, inst: &ArcSetInstance) -> Result<ArcSetInstance, ArcSetError> {
        ArcSetInstance::new(
            self.free_x.iter().map(|&q| inst.demands()[q]).collect(),
            self.free_y.iter().map(|&t| inst.capacities()[t]).collect(),
            self.existing,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub verdict: Verdict,
    pub cut: Option<CutInequality>,
    pub cut_text: Option<String>,
    /// Violation of the reported cut at the point.
    pub violation: f64,
    /// Violation after dividing by the normalized facility's coefficient.
    pub normalized_violation: f64,
    pub provenance: Option<Provenance>,
    pub stage: Stage,
    pub closed_form_case: Option<CaseId>,
    /// Why a found cut was not reported.
    pub dropped: Option<String>,
    /// Number of partial LP solves.
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub lift_steps: Vec<LiftStep>,
    pub reduced: Option<ReducedRecord>,
}

impl SeparationReport {
    fn member(stage: Stage) -> Self {
        Self {
            verdict: Verdict::Member,
            cut: None,
            cut_text: None,
            violation: 0.0,
            normalized_violation: 0.0,
            provenance: None,
            stage,
            closed_form_case: None,
            dropped: None,
            iterations: 0,
            trace: Vec::new(),
            lift_steps: Vec::new(),
            reduced: None,
        }
    }

    fn violated(cut: CutInequality, point: &FracPoint, norm_facility: Option<usize>, provenance: Provenance, stage: Stage) -> Self {
        let violation = cut.violation(point);
        let scale = norm_facility.map(|t| cut.beta[t]).filter(|&b| b > 0.0).unwrap_or(1.0);
        Self {
            verdict: Verdict::Violated,
            cut_text: Some(cut.render()),
            cut: Some(cut),
            violation,
            normalized_violation: violation / scale,
            provenance: Some(provenance),
            stage,
            ..Self::member(stage)
        }
    }

    /// True when a cut was found but not reported.
    pub fn is_dropped(&self) -> bool {
        self.dropped.is_some()
    }
}

/// Smallest-capacity facility with positive value; facility `0` when there is none.
pub fn choose_normalized_facility(caps: &[i64], ybar: &[f64]) -> usize {
    (0..caps.len())
        .filter(|&t| ybar[t] > FEAS_TOL)
        .min_by_key(|&t| (caps[t], t))
        .unwrap_or_else(|| (0..caps.len()).min_by_key(|&t| (caps[t], t)).unwrap_or(0))
}

struct Reduced {
    record: ReducedRecord,
    point: FracPoint,
}

fn reduce(inst: &ArcSetInstance, point: &FracPoint) -> Reduced {
    let mut fixing = Fixing::default();
    let mut free_x = Vec::new();
    let mut existing = inst.existing();
    for (q, &v) in point.x.iter().enumerate() {
        if v <= FEAS_TOL {
            fixing.x_zero.push(q);
        } else if v >= 1.0 - FEAS_TOL {
            fixing.x_one.push(q);
            existing -= inst.demands()[q];
        } else {
            free_x.push(q);
        }
    }
    let mut free_y = Vec::new();
    for (t, &v) in point.y.iter().enumerate() {
        if v <= FEAS_TOL {
            fixing.y_zero.push(t);
        } else {
            free_y.push(t);
        }
    }
    let rp = FracPoint::new(
        free_x.iter().map(|&q| point.x[q]).collect(),
        free_y.iter().map(|&t| point.y[t]).collect(),
    );
    Reduced { record: ReducedRecord { free_x, free_y, existing, fixing, cut: None }, point: rp }
}

/// Separates `point` from the hull of the arc set.
pub fn separate(inst: &ArcSetInstance, point: &FracPoint, opts: &SeparatorOptions) -> Result<SeparationReport, SeparationError> {
    point.check_dims(inst)?;
    if let Some(rc) = &opts.reduced_costs {
        if rc.x.len() != inst.num_commodities() {
            return Err(SeparationError::ReducedCostShape { what: "x", got: rc.x.len(), expected: inst.num_commodities() });
        }
        if rc.y.len() != inst.num_facilities() {
            return Err(SeparationError::ReducedCostShape { what: "y", got: rc.y.len(), expected: inst.num_facilities() });
        }
    }
    if let Some(tv) = screen_trivial(inst, point) {
        let mut rep = SeparationReport::violated(tv.cut, point, None, Provenance::TrivialBound, Stage::Screening);
        rep.normalized_violation = rep.violation;
        return Ok(rep);
    }

    let Reduced { mut record, point: rpoint } = reduce(inst, point);
    let a = inst.demands();
    let b = inst.capacities();

    if record.free_x.is_empty() && record.free_y.is_empty() {
        return Ok(SeparationReport::member(Stage::AllFixed));
    }

    if record.free_x.is_empty() && record.free_y.len() == 1 {
        let t = record.free_y[0];
        let need = ceil_div(-record.existing, b[t]).max(0);
        let reduced_cut = IntCut { alpha: vec![], beta: vec![1], gamma: -need };
        if reduced_cut.to_cut().violation(&rpoint) <= opts.min_violation {
            let mut rep = SeparationReport::member(Stage::SingleFacility);
            rep.reduced = Some(record);
            return Ok(rep);
        }
        let full = embed(&reduced_cut, &record, inst);
        record.cut = Some(reduced_cut);
        return finish(inst, point, record, full, t, Provenance::ReducedBound, Stage::SingleFacility, opts);
    }

    let rounded_load: i64 = record.free_x.iter().map(|&q| a[q]).sum();
    let floor_supply: i64 = record.free_y.iter().map(|&t| b[t] * (point.y[t] + FEAS_TOL).floor() as i64).sum();
    if rounded_load <= floor_supply + record.existing {
        let mut rep = SeparationReport::member(Stage::RoundingFeasible);
        rep.reduced = Some(record);
        return Ok(rep);
    }

    // no free facility: keep the smallest one so the normalization has a target
    let mut rpoint = rpoint;
    if record.free_y.is_empty() {
        let t = choose_normalized_facility(b, &point.y);
        record.free_y.push(t);
        record.fixing.y_zero.retain(|&s| s != t);
        rpoint.y.push(0.0);
    }
    let rinst = record.instance(inst).map_err(|e| SeparationError::Internal(format!("reduced set: {e}")))?;
    let rcaps = rinst.capacities().to_vec();
    let norm_local = choose_normalized_facility(&rcaps, &rpoint.y);
    let norm = record.free_y[norm_local];

    if opts.use_closed_forms {
        let case = closed_form::detect(&rinst, &rpoint);
        match case.id {
            CaseId::NotApplicable => {}
            CaseId::CoveredByLargeModules => {
                let mut rep = SeparationReport::member(Stage::ClosedForm);
                rep.closed_form_case = Some(case.id);
                rep.reduced = Some(record);
                return Ok(rep);
            }
            id => {
                let cut = closed_form::build(&case, &rinst).expect("case has an inequality");
                let provenance = id.provenance().expect("every closed-form case has a provenance");
                if cut.violation(&rpoint) <= opts.min_violation {
                    let mut rep = SeparationReport::member(Stage::ClosedForm);
                    rep.closed_form_case = Some(id);
                    rep.reduced = Some(record);
                    return Ok(rep);
                }
                let closed_norm = record.free_y[0];
                let mut rep = integral_then_lift(inst, point, &rinst, &rpoint, record, cut, closed_norm, provenance, opts)?;
                rep.closed_form_case = Some(id);
                if rep.verdict == Verdict::Violated {
                    rep.stage = if rep.lift_steps.is_empty() { Stage::ClosedForm } else { Stage::Lifting };
                }
                return Ok(rep);
            }
        }
    }

    let rg_opts = RowGenOptions { strengthen: opts.strengthen, initial_points: opts.seed_points.clone(), ..Default::default() };
    let run = rowgen::run(&rinst, &rpoint, norm_local, &rg_opts)?;
    let Some(cut) = run.cut.clone() else {
        let mut rep = SeparationReport::member(Stage::RowGeneration);
        rep.iterations = run.iterations;
        rep.trace = run.trace;
        rep.reduced = Some(record);
        return Ok(rep);
    };
    let mut rep = integral_then_lift(inst, point, &rinst, &rpoint, record, cut, norm, Provenance::RowGeneration, opts)?;
    rep.iterations = run.iterations;
    rep.trace = run.trace;
    if rep.verdict == Verdict::Violated {
        rep.stage = if rep.lift_steps.is_empty() { Stage::RowGeneration } else { Stage::Lifting };
    }
    Ok(rep)
}

/// Scale, recompute the right-hand side on the reduced set, then lift.
#[allow(clippy::too_many_arguments)]
fn integral_then_lift(
    inst: &ArcSetInstance,
    point: &FracPoint,
    rinst: &ArcSetInstance,
    rpoint: &FracPoint,
    mut record: ReducedRecord,
    cut: CutInequality,
    norm: usize,
    provenance: Provenance,
    opts: &SeparatorOptions,
) -> Result<SeparationReport, SeparationError> {
    let scaled = match refine::scale(&cut, &opts.scaling) {
        ScaleOutcome::Scaled { cut, .. } => cut,
        ScaleOutcome::Rejected(why) => {
            let mut rep = SeparationReport::member(Stage::Scaling);
            rep.dropped = Some(format!("scaling rejected: {why}"));
            rep.provenance = Some(provenance);
            rep.reduced = Some(record);
            return Ok(rep);
        }
    };
    let exact = refine::recompute_gamma(&scaled, KnapsackSet::of(rinst));
    if exact.violation(rpoint) <= opts.min_violation {
        let mut rep = SeparationReport::member(Stage::Scaling);
        rep.dropped = Some("violation vanished after recomputing the right-hand side".into());
        rep.provenance = Some(provenance);
        rep.reduced = Some(record);
        return Ok(rep);
    }
    let reduced_cut = exact.to_int().ok_or_else(|| SeparationError::Internal("scaled cut is not integral".into()))?;
    record.cut = Some(reduced_cut.clone());
    let full = embed(&reduced_cut, &record, inst);
    finish(inst, point, record, full, norm, provenance, Stage::RowGeneration, opts)
}

/// Places a reduced-coordinate cut into full coordinates, zero on fixed variables.
fn embed(cut: &IntCut, record: &ReducedRecord, inst: &ArcSetInstance) -> IntCut {
    let mut alpha = vec![0; inst.num_commodities()];
    let mut beta = vec![0; inst.num_facilities()];
    for (k, &q) in record.free_x.iter().enumerate() {
        alpha[q] = cut.alpha[k];
    }
    for (k, &t) in record.free_y.iter().enumerate() {
        beta[t] = cut.beta[k];
    }
    IntCut { alpha, beta, gamma: cut.gamma }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &ArcSetInstance,
    point: &FracPoint,
    record: ReducedRecord,
    cut: IntCut,
    norm: usize,
    provenance: Provenance,
    stage: Stage,
    opts: &SeparatorOptions,
) -> Result<SeparationReport, SeparationError> {
    let (full, steps) = if record.fixing.is_empty() {
        (cut, Vec::new())
    } else {
        match refine::lift(inst, &cut, &record.fixing, opts.lift_order, opts.reduced_costs.as_ref()) {
            Ok(l) => (l.cut, l.steps),
            Err(LiftError::CoefficientTooLarge(v)) => {
                let mut rep = SeparationReport::member(Stage::Lifting);
                rep.dropped = Some(format!("lifted coefficient {v} is too large"));
                rep.provenance = Some(provenance);
                rep.reduced = Some(record);
                return Ok(rep);
            }
            Err(e) => return Err(SeparationError::Internal(e.to_string())),
        }
    };
    match exact_maximum(inst, &full) {
        Some(ans) if ans.value <= 0 => {}
        other => {
            return Err(SeparationError::Internal(format!(
                "lifted cut {full:?} is not valid (maximum {:?})",
                other.map(|a| a.value)
            )))
        }
    }
    let cut = full.to_cut();
    let mut rep = SeparationReport::violated(cut, point, Some(norm), provenance, stage);
    if rep.violation <= opts.min_violation {
        let mut member = SeparationReport::member(Stage::Lifting);
        member.dropped = Some("lifted cut is not violated".into());
        member.provenance = Some(provenance);
        member.reduced = Some(record);
        return Ok(member);
    }
    if !steps.is_empty() {
        rep.stage = Stage::Lifting;
    }
    rep.lift_steps = steps;
    rep.reduced = Some(record);
    Ok(rep)
}
