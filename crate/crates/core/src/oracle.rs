//! Brute-force ground truth on small arc sets.
//!
//! Every integer point of the set is a catalogued point (a binary `x` with a minimal cover
//! `y`) plus nonnegative multiples of the unit directions on `y`, so LPs over the catalogue
//! decide membership and solve the full separation problem exactly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arcset::{ceil_div, ArcSetInstance, CutInequality, FracPoint};
use crate::knapsack::exact_maximum;
use crate::lp::{solve, LpError, LpModel, LpRow, LpStatus, ObjSense, RowSense};

pub const MAX_COMMODITIES: usize = 12;
pub const MAX_FACILITIES: usize = 3;
pub const MAX_POINTS: usize = 100_000;
/// Residual allowed on the matching equations of the membership LP.
pub const MEMBERSHIP_TOL: f64 = 1e-7;
/// Pivot threshold for the rank computation and tightness slack.
pub const RANK_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(
        "instance is beyond the enumeration budget: {commodities} commodities (limit {MAX_COMMODITIES}), \
         {facilities} facilities (limit {MAX_FACILITIES}), {points} catalogue points (limit {MAX_POINTS})"
    )]
    BudgetExceeded { commodities: usize, facilities: usize, points: usize },
    #[error("cut is not valid: it reaches {value} at x = {x:?}, y = {y:?}")]
    InvalidCut { value: f64, x: Vec<u8>, y: Vec<i64> },
    #[error("point has the wrong dimensions")]
    Dimension,
    #[error("LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("catalogue LP ended {0:?}")]
    Status(LpStatus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCatalogue {
    pub points: Vec<(Vec<u8>, Vec<i64>)>,
    num_commodities: usize,
    num_facilities: usize,
}

/// All `y` with `b.y >= deficit` from which no single module can be removed.
fn minimal_covers(caps: &[i64], deficit: i64) -> Vec<Vec<i64>> {
    if deficit <= 0 {
        return vec![vec![0; caps.len()]];
    }
    let mut out = Vec::new();
    let mut y = vec![0; caps.len()];
    fn walk(caps: &[i64], deficit: i64, t: usize, supply: i64, y: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let last = caps.len() - 1;
        if t == last {
            y[t] = ceil_div((deficit - supply).max(0), caps[t]);
            let total = supply + y[t] * caps[t];
            let minimal = (0..caps.len()).all(|s| y[s] == 0 || total - caps[s] < deficit);
            if minimal {
                out.push(y.clone());
            }
            return;
        }
        for k in 0..=ceil_div(deficit, caps[t]) {
            y[t] = k;
            walk(caps, deficit, t + 1, supply + k * caps[t], y, out);
        }
        y[t] = 0;
    }
    walk(caps, deficit, 0, 0, &mut y, &mut out);
    out
}

impl PointCatalogue {
    pub fn build(inst: &ArcSetInstance) -> Result<Self, OracleError> {
        let nq = inst.num_commodities();
        let nt = inst.num_facilities();
        let refuse = |points| OracleError::BudgetExceeded { commodities: nq, facilities: nt, points };
        if nq > MAX_COMMODITIES || nt > MAX_FACILITIES {
            return Err(refuse(0));
        }
        let mut covers: HashMap<i64, Vec<Vec<i64>>> = HashMap::new();
        let mut points = Vec::new();
        for mask in 0u32..(1 << nq) {
            let x: Vec<u8> = (0..nq).map(|q| ((mask >> q) & 1) as u8).collect();
            let deficit = inst.load(&x) - inst.existing();
            let ys = covers.entry(deficit).or_insert_with(|| minimal_covers(inst.capacities(), deficit));
            if points.len() + ys.len() > MAX_POINTS {
                return Err(refuse(points.len() + ys.len()));
            }
            for y in ys.iter() {
                points.push((x.clone(), y.clone()));
            }
        }
        Ok(Self { points, num_commodities: nq, num_facilities: nt })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn coords(&self, k: usize) -> Vec<f64> {
        let (x, y) = &self.points[k];
        x.iter().map(|&v| v as f64).chain(y.iter().map(|&v| v as f64)).collect()
    }
}

/// Optimum of the full separation LP with `beta` fixed to one on `normalized`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSeparation {
    pub value: f64,
    pub cut: CutInequality,
}

/// Decides whether `point` is a convex combination of catalogue points plus a conic part on `y`.
pub fn membership(inst: &ArcSetInstance, point: &FracPoint) -> Result<bool, OracleError> {
    point.check_dims(inst).map_err(|_| OracleError::Dimension)?;
    let cat = PointCatalogue::build(inst)?;
    membership_in(&cat, point)
}

pub fn membership_in(cat: &PointCatalogue, point: &FracPoint) -> Result<bool, OracleError> {
    let nq = cat.num_commodities;
    let nt = cat.num_facilities;
    let mut lp = LpModel::new(ObjSense::Minimize);
    let lambdas: Vec<usize> = (0..cat.len()).map(|_| lp.add_var(0.0, f64::INFINITY, 0.0)).collect::<Result<_, _>>()?;
    let rays: Vec<usize> = (0..nt).map(|_| lp.add_var(0.0, f64::INFINITY, 0.0)).collect::<Result<_, _>>()?;
    let target: Vec<f64> = point.x.iter().chain(&point.y).copied().chain([1.0]).collect();
    for (i, &rhs) in target.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (k, &v) in lambdas.iter().enumerate() {
            let c = if i < nq {
                cat.points[k].0[i] as f64
            } else if i < nq + nt {
                cat.points[k].1[i - nq] as f64
            } else {
                1.0
            };
            if c != 0.0 {
                coeffs.push((v, c));
            }
        }
        if i >= nq && i < nq + nt {
            coeffs.push((rays[i - nq], 1.0));
        }
        let plus = lp.add_var(0.0, f64::INFINITY, 1.0)?;
        let minus = lp.add_var(0.0, f64::INFINITY, 1.0)?;
        coeffs.push((plus, 1.0));
        coeffs.push((minus, -1.0));
        lp.add_row(LpRow::new(coeffs, RowSense::Eq, rhs))?;
    }
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(OracleError::Status(sol.status));
    }
    Ok(sol.objective <= MEMBERSHIP_TOL)
}

/// Solves the separation LP over the whole catalogue through its dual.
///
/// The dual asks for the cheapest use of facility `normalized` by a combination of catalogue
/// points matching `x̄` and not exceeding `ȳ` elsewhere; its row prices are `alpha`, `beta`
/// and `gamma`.
pub fn full_separation(inst: &ArcSetInstance, point: &FracPoint, normalized: usize) -> Result<FullSeparation, OracleError> {
    point.check_dims(inst).map_err(|_| OracleError::Dimension)?;
    let cat = PointCatalogue::build(inst)?;
    full_separation_in(&cat, point, normalized)
}

pub fn full_separation_in(cat: &PointCatalogue, point: &FracPoint, normalized: usize) -> Result<FullSeparation, OracleError> {
    let nq = cat.num_commodities;
    let nt = cat.num_facilities;
    let mut lp = LpModel::new(ObjSense::Minimize);
    for (_, y) in &cat.points {
        lp.add_var(0.0, f64::INFINITY, y[normalized] as f64)?;
    }
    let col = |f: &dyn Fn(&(Vec<u8>, Vec<i64>)) -> f64| -> Vec<(usize, f64)> {
        cat.points.iter().enumerate().map(|(k, p)| (k, f(p))).filter(|&(_, c)| c != 0.0).collect()
    };
    for q in 0..nq {
        lp.add_row(LpRow::new(col(&|p| p.0[q] as f64), RowSense::Eq, point.x[q]))?;
    }
    let mut facility_rows = Vec::new();
    for t in (0..nt).filter(|&t| t != normalized) {
        facility_rows.push(t);
        lp.add_row(LpRow::new(col(&|p| p.1[t] as f64), RowSense::Le, point.y[t]))?;
    }
    lp.add_row(LpRow::new(col(&|_| 1.0), RowSense::Eq, 1.0))?;
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(OracleError::Status(sol.status));
    }
    let pi = &sol.row_duals;
    let alpha = pi[..nq].to_vec();
    let mut beta = vec![0.0; nt];
    beta[normalized] = 1.0;
    for (k, &t) in facility_rows.iter().enumerate() {
        beta[t] = -pi[nq + k];
    }
    let gamma = -pi[nq + facility_rows.len()];
    Ok(FullSeparation { value: sol.objective - point.y[normalized], cut: CutInequality::new(alpha, beta, gamma) })
}

/// Largest value of `alpha.x - beta.y - gamma` over the set, with a maximizer, using the catalogue.
fn catalogue_maximum(cat: &PointCatalogue, cut: &CutInequality) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, (x, y)) in cat.points.iter().enumerate() {
        let v = lhs_minus_rhs(cut, x, y);
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

fn lhs_minus_rhs(cut: &CutInequality, x: &[u8], y: &[i64]) -> f64 {
    let ax: f64 = cut.alpha.iter().zip(x).map(|(a, &v)| a * v as f64).sum();
    let by: f64 = cut.beta.iter().zip(y).map(|(b, &v)| b * v as f64).sum();
    ax - by - cut.gamma
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// Number of affinely independent tight points.
    pub rank: usize,
    pub dimension: usize,
    pub tight_points: usize,
}

impl RankReport {
    pub fn is_facet(&self) -> bool {
        self.rank == self.dimension
    }
}

/// Checks validity, then counts affinely independent points on the cut's face.
pub fn facet_rank(inst: &ArcSetInstance, cut: &CutInequality) -> Result<RankReport, OracleError> {
    let cat = PointCatalogue::build(inst)?;
    facet_rank_in(inst, &cat, cut)
}

pub fn facet_rank_in(inst: &ArcSetInstance, cat: &PointCatalogue, cut: &CutInequality) -> Result<RankReport, OracleError> {
    let nq = cat.num_commodities;
    let nt = cat.num_facilities;
    if let Some(t) = cut.beta.iter().position(|&b| b < -RANK_TOL) {
        let mut y = vec![0; nt];
        y[t] = 1;
        return Err(OracleError::InvalidCut { value: f64::INFINITY, x: vec![0; nq], y });
    }
    match cut.to_int() {
        Some(int) => {
            let ans = exact_maximum(inst, &int).expect("beta is nonnegative");
            if ans.value > 0 {
                return Err(OracleError::InvalidCut { value: ans.value as f64, x: ans.x, y: ans.y });
            }
        }
        None => {
            let (v, k) = catalogue_maximum(cat, cut);
            if v > RANK_TOL {
                let (x, y) = cat.points[k].clone();
                return Err(OracleError::InvalidCut { value: v, x, y });
            }
        }
    }
    let mut tight: Vec<Vec<f64>> = Vec::new();
    for (k, (x, y)) in cat.points.iter().enumerate() {
        if lhs_minus_rhs(cut, x, y).abs() <= RANK_TOL {
            let p = cat.coords(k);
            for t in (0..nt).filter(|&t| cut.beta[t].abs() <= RANK_TOL) {
                let mut shifted = p.clone();
                shifted[nq + t] += 1.0;
                tight.push(shifted);
            }
            tight.push(p);
        }
    }
    let rank = if tight.is_empty() { 0 } else { 1 + matrix_rank(&tight[1..], &tight[0]) };
    Ok(RankReport { rank, dimension: nq + nt, tight_points: tight.len() })
}

/// Rank of the rows `p - origin` by Gaussian elimination with partial pivoting.
fn matrix_rank(rows: &[Vec<f64>], origin: &[f64]) -> usize {
    let dim = origin.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in rows {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        for b in &basis {
            let lead = b.iter().position(|c| c.abs() > RANK_TOL).expect("basis rows are nonzero");
            let f = v[lead] / b[lead];
            if f != 0.0 {
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= f * bi);
            }
        }
        if let Some(lead) = v.iter().position(|c| c.abs() > RANK_TOL) {
            let s = v[lead];
            v.iter_mut().for_each(|c| *c /= s);
            // keep rows in echelon form: eliminate the new pivot from existing rows
            for b in basis.iter_mut() {
                let f = b[lead];
                if f != 0.0 {
                    b.iter_mut().zip(&v).for_each(|(bi, vi)| *bi -= f * vi);
                }
            }
            basis.push(v);
            if basis.len() == dim {
                break;
            }
        }
    }
    basis.len()
}
