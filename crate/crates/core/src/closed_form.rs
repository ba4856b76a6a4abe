//! Closed-form separation for instances where each commodity needs exactly one extra
//! module of the smallest facility and the larger facilities each carry everything.
//!
//! Facility `0` (the smallest capacity) plays the role of the normalized facility.

use serde::{Deserialize, Serialize};

use crate::arcset::{ArcSetInstance, CutInequality, FracPoint, Provenance, FEAS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    P5,
    P6a,
    P6b1,
    P6b2,
    P6b3,
    P7a,
    P7b,
    P8a,
    P8b,
    P8c,
    P8d1,
    P8d2,
    P8d3,
    /// The larger facilities already cover the whole demand at the point, so it lies in the hull.
    CoveredByLargeModules,
    NotApplicable,
}

impl CaseId {
    pub fn provenance(self) -> Option<Provenance> {
        use CaseId::*;
        match self {
            P5 => Some(Provenance::ClosedFormP5),
            P6a | P6b1 | P6b2 | P6b3 => Some(Provenance::ClosedFormP6),
            P7a | P7b => Some(Provenance::ClosedFormP7),
            P8a | P8b | P8c | P8d1 | P8d2 | P8d3 => Some(Provenance::ClosedFormP8),
            CoveredByLargeModules | NotApplicable => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCase {
    pub id: CaseId,
    pub r: i64,
    pub d: Option<usize>,
    pub q_tilde: Vec<usize>,
}

impl ClosedFormCase {
    fn none() -> Self {
        Self { id: CaseId::NotApplicable, r: 0, d: None, q_tilde: Vec::new() }
    }
}

/// Whether every commodity fits one module of the smallest facility but forces a new one.
fn single_module_assumptions(inst: &ArcSetInstance, r: i64) -> bool {
    let b1 = inst.capacities()[0];
    let slack = b1 * r + inst.existing();
    inst.demands().iter().all(|&a| a <= b1 && slack < a)
}

/// Picks the applicable case, or `NotApplicable` when an assumption fails.
pub fn detect(inst: &ArcSetInstance, point: &FracPoint) -> ClosedFormCase {
    let n = inst.num_commodities();
    if n == 0 {
        return ClosedFormCase::none();
    }
    let r = inst.r_value();
    if !single_module_assumptions(inst, r) {
        return ClosedFormCase::none();
    }
    let b = inst.capacities();
    let c = inst.existing();
    let total = inst.total_demand();
    let multi = b.len() >= 2;
    if multi && b[1..].iter().any(|&bt| total > bt + c) {
        return ClosedFormCase::none();
    }
    let d = point.d_index();
    let others: f64 = point.y.iter().skip(1).sum();
    let q_tilde = if multi { point.q_tilde() } else { Vec::new() };
    let mut case = ClosedFormCase { id: CaseId::NotApplicable, r, d, q_tilde };
    if multi && others >= 1.0 - FEAS_TOL {
        case.id = CaseId::CoveredByLargeModules;
        return case;
    }
    let one_more = b[0] * (r + 1) + c;
    let single_cover = total <= one_more;
    let sandwich = one_more < total && inst.demands().iter().all(|&a| total - a <= one_more);
    let xd = d.map_or(0.0, |d| point.x[d]);
    let sum_x: f64 = point.x.iter().sum();
    let threshold = |s: f64| -> u8 {
        let s = s / (n as f64 - 1.0);
        if s <= xd + FEAS_TOL {
            1
        } else if s <= 1.0 + FEAS_TOL {
            2
        } else {
            3
        }
    };
    case.id = match (multi, single_cover, sandwich) {
        (false, true, _) => CaseId::P5,
        (false, false, true) if n <= 2 => CaseId::P6a,
        (false, false, true) => match threshold(sum_x) {
            1 => CaseId::P6b1,
            2 => CaseId::P6b2,
            _ => CaseId::P6b3,
        },
        (true, true, _) if case.q_tilde.is_empty() => CaseId::P7a,
        (true, true, _) => CaseId::P7b,
        (true, false, true) if case.q_tilde.is_empty() => CaseId::P8a,
        (true, false, true) if case.q_tilde.len() < n => CaseId::P8b,
        (true, false, true) if n <= 2 => CaseId::P8c,
        (true, false, true) => match threshold(sum_x - others) {
            1 => CaseId::P8d1,
            2 => CaseId::P8d2,
            _ => CaseId::P8d3,
        },
        _ => CaseId::NotApplicable,
    };
    case
}

/// The case's inequality, or `None` for the two cases without one.
pub fn build(case: &ClosedFormCase, inst: &ArcSetInstance) -> Option<CutInequality> {
    use CaseId::*;
    let n = inst.num_commodities();
    let nt = inst.num_facilities();
    let r = case.r as f64;
    let nf = n as f64;
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; nt];
    beta[0] = 1.0;
    let mut gamma = -r;
    let others = |v: f64, beta: &mut Vec<f64>| beta[1..].iter_mut().for_each(|b| *b = v);
    match case.id {
        P5 | P6b1 | P7b | P8b | P8d1 => {
            alpha[case.d?] = 1.0;
            others(r + 1.0, &mut beta);
        }
        P6a => alpha.fill(1.0),
        P6b2 => alpha.fill(1.0 / (nf - 1.0)),
        P6b3 => {
            alpha.fill(1.0);
            gamma += nf - 2.0;
        }
        P7a | P8a => others(r, &mut beta),
        P8c => {
            alpha.fill(1.0);
            others(r + nf, &mut beta);
        }
        P8d2 => {
            alpha.fill(1.0 / (nf - 1.0));
            others(r + nf / (nf - 1.0), &mut beta);
        }
        P8d3 => {
            alpha.fill(1.0);
            others(r + 2.0, &mut beta);
            gamma += nf - 2.0;
        }
        CoveredByLargeModules | NotApplicable => return None,
    }
    Some(CutInequality::new(alpha, beta, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::is_valid;

    fn inst(a: &[i64], b: &[i64], c: i64) -> ArcSetInstance {
        ArcSetInstance::new(a.to_vec(), b.to_vec(), c).unwrap()
    }

    #[test]
    fn first_example() {
        let i = inst(&[11, 15, 24, 50], &[100], 0);
        let p = FracPoint::new(vec![0.3, 0.5, 0.9, 0.1], vec![0.38]);
        let case = detect(&i, &p);
        assert_eq!(case.id, CaseId::P5);
        let cut = build(&case, &i).unwrap();
        assert_eq!(cut.render(), "x3 <= y");
        assert!((cut.violation(&p) - 0.52).abs() < 1e-12);
    }

    #[test]
    fn second_example() {
        let i = inst(&[11, 15, 24, 50], &[90], 0);
        let p = FracPoint::new(vec![0.4, 0.5, 0.4, 0.4], vec![0.47]);
        let case = detect(&i, &p);
        assert_eq!(case.id, CaseId::P6b2);
        assert_eq!(case.d, Some(1));
        let cut = build(&case, &i).unwrap();
        assert!((cut.violation(&p) - (17.0 / 30.0 - 0.47)).abs() < 1e-12);
        assert!(is_valid(&i, &cut.integer_multiple(1000).unwrap()));
    }

    #[test]
    fn third_example_not_applicable() {
        let i = inst(&[11, 15, 24, 50], &[60], 0);
        let p = FracPoint::new(vec![0.9, 0.5, 0.7, 0.1], vec![0.7]);
        assert_eq!(detect(&i, &p).id, CaseId::NotApplicable);
    }

    #[test]
    fn empty_q_tilde_two_facilities() {
        let i = inst(&[6, 6], &[10, 100], -5);
        let p = FracPoint::new(vec![0.2, 0.2], vec![0.5, 0.3]);
        let case = detect(&i, &p);
        assert_eq!(case.r, 1);
        assert_eq!(case.id, CaseId::P7a);
        let cut = build(&case, &i).unwrap();
        assert_eq!(cut.render(), "0 <= y1 + y2 - 1");
        assert!((cut.violation(&p) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn large_modules_cover() {
        let i = inst(&[6, 6], &[10, 100], -5);
        let p = FracPoint::new(vec![0.9, 0.9], vec![0.1, 1.0]);
        assert_eq!(detect(&i, &p).id, CaseId::CoveredByLargeModules);
    }

    #[test]
    fn multi_facility_sandwich_cases() {
        // b1 = 10, r = 0, total 18 with 10 < 18 and 18 - 9 <= 10
        let i = inst(&[9, 9], &[10, 40], 0);
        let p = FracPoint::new(vec![0.8, 0.7], vec![0.9, 0.2]);
        let case = detect(&i, &p);
        assert_eq!(case.id, CaseId::P8c);
        let cut = build(&case, &i).unwrap();
        assert_eq!(cut.render(), "x1 + x2 <= y1 + 2 y2");
        let p = FracPoint::new(vec![0.8, 0.1], vec![0.9, 0.2]);
        assert_eq!(detect(&i, &p).id, CaseId::P8b);
    }

    #[test]
    fn single_facility_thresholds() {
        // five commodities of 10, b = 45: sandwich holds (40 <= 45 < 50)
        let i = inst(&[10; 5], &[45], 0);
        let low = FracPoint::new(vec![0.9, 0.1, 0.1, 0.1, 0.1], vec![0.95]);
        assert_eq!(detect(&i, &low).id, CaseId::P6b1);
        let mid = FracPoint::new(vec![0.7; 5], vec![0.9]);
        assert_eq!(detect(&i, &mid).id, CaseId::P6b2);
        let high = FracPoint::new(vec![0.9; 5], vec![1.0]);
        assert_eq!(detect(&i, &high).id, CaseId::P6b3);
        let cut = build(&detect(&i, &high), &i).unwrap();
        assert_eq!(cut.render(), "x1 + x2 + x3 + x4 + x5 <= y + 3");
    }
}
