//! Interpolating cumulants: conjugation-invariant tables of orders 2–6
//! and the order-7 obstruction to their existence.
//!
//! A cumulant of order `n` is a conjugacy-class function `c` on the
//! symmetric group, normalized by `c_(n) = 1`, such that the form
//! `sum_sigma c(sigma) phi_sigma` vanishes whenever the arguments split
//! into two centered groups from the two coupled families. Vanishing on
//! centered arguments is equivalent to the vanishing of the linear
//! combinations `D_c(pi, pi') = sum_lambda c_lambda E_lambda(pi, pi')`
//! over all singleton-free pattern pairs, which is the system solved
//! here. Values with singleton parts are then forced by the rule for
//! dropping an argument equal to 1.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational as Rat;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::combinatorics::{IntegerPartition, SetPartition};
use crate::exp_poly::ExpPoly;
use crate::moment_engine::{split_slots, MomentEngine};

#[derive(Debug, Error)]
pub enum CumulantError {
    #[error("order {0} is outside the solvable range 2..=6")]
    OrderOutOfRange(usize),
    #[error("linear system stalled: no equation isolates a single unknown ({0})")]
    Underdetermined(String),
    #[error("inconsistent linear system at pattern {0}: residual {1}")]
    Inconsistent(String, String),
    #[error("unknown {0} appears with non-constant coefficient {1}")]
    NonConstantPivot(String, String),
}

/// A complete cumulant table of a given order: one exponential
/// polynomial per integer partition (conjugacy class) of `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantTable {
    order: usize,
    coefficients: BTreeMap<IntegerPartition, ExpPoly>,
}

impl CumulantTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, lambda: &IntegerPartition) -> Option<&ExpPoly> {
        self.coefficients.get(lambda)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&IntegerPartition, &ExpPoly)> {
        self.coefficients.iter()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .coefficients
            .iter()
            .map(|(lambda, coeff)| {
                json!({
                    "partition": lambda.parts(),
                    "label": lambda.label(),
                    "coeff": coeff.to_json(),
                    "display": coeff.to_string(),
                })
            })
            .collect();
        json!({ "order": self.order, "coefficients": rows })
    }
}

impl fmt::Display for CumulantTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .coefficients
            .keys()
            .map(|l| l.label().len())
            .max()
            .unwrap_or(0);
        for (lambda, coeff) in &self.coefficients {
            writeln!(f, "c_{:<width$} : {}", lambda.label(), coeff)?;
        }
        Ok(())
    }
}

/// One linear condition on the singleton-free cumulant values: the
/// coefficients `E_lambda(pi, pi')`, indexed by fixed-point-free cycle
/// types, must combine to zero.
struct PatternEquation {
    label: String,
    e: BTreeMap<IntegerPartition, ExpPoly>,
}

/// All singleton-free pattern pairs for the split with `k` slots in
/// family A and `n - k` in family B, with the corresponding coefficient
/// vectors.
fn split_equations(engine: &MomentEngine, n: usize, k: usize) -> Vec<PatternEquation> {
    let slots = split_slots(k, n);
    let a_ground: Vec<usize> = (1..=k).collect();
    let b_ground: Vec<usize> = (k + 1..=n).collect();
    let pis: Vec<SetPartition> = SetPartition::enumerate_of(&a_ground)
        .into_iter()
        .filter(|p| !p.has_singleton())
        .collect();
    let pi_primes: Vec<SetPartition> = SetPartition::enumerate_of(&b_ground)
        .into_iter()
        .filter(|p| !p.has_singleton())
        .collect();
    let mut equations = Vec::new();
    for pi in &pis {
        for pi_prime in &pi_primes {
            let mut e = BTreeMap::new();
            for lambda in IntegerPartition::enumerate(n)
                .into_iter()
                .filter(|l| l.has_no_singleton_part())
            {
                let coeff = engine.e_lambda(&lambda, &slots, pi, pi_prime);
                if !coeff.is_zero() {
                    e.insert(lambda, coeff);
                }
            }
            equations.push(PatternEquation {
                label: format!("split {k}|{}: ({pi}, {pi_prime})", n - k),
                e,
            });
        }
    }
    equations
}

/// If an `ExpPoly` is a rational constant, return it.
fn as_constant(p: &ExpPoly) -> Option<Rat> {
    let c = p.constant_term();
    if *p == ExpPoly::constant(c.clone()) {
        Some(c)
    } else {
        None
    }
}

/// Solve the singleton-free system by iterated substitution: whenever an
/// equation has a single unsolved unknown with a nonzero constant
/// coefficient, isolate it; repeat until everything is determined, then
/// demand that every equation vanishes identically.
fn solve_singleton_free(
    equations: &[PatternEquation],
    n: usize,
) -> Result<BTreeMap<IntegerPartition, ExpPoly>, CumulantError> {
    let mut solved: BTreeMap<IntegerPartition, ExpPoly> = BTreeMap::new();
    solved.insert(IntegerPartition::new(vec![n]), ExpPoly::one());
    let unknown_count = IntegerPartition::enumerate(n)
        .into_iter()
        .filter(|l| l.has_no_singleton_part())
        .count();
    while solved.len() < unknown_count {
        let mut progressed = false;
        for eq in equations {
            let mut residual = ExpPoly::zero();
            let mut pending: Vec<(&IntegerPartition, &ExpPoly)> = Vec::new();
            for (lambda, coeff) in &eq.e {
                match solved.get(lambda) {
                    Some(value) => residual = residual.add(&coeff.mul(value)),
                    None => pending.push((lambda, coeff)),
                }
            }
            if pending.len() != 1 {
                continue;
            }
            let (lambda, coeff) = pending[0];
            let pivot = as_constant(coeff).ok_or_else(|| {
                CumulantError::NonConstantPivot(lambda.label(), coeff.to_string())
            })?;
            if pivot.is_zero() {
                continue;
            }
            let value = residual.scale(&(-Rat::one() / pivot));
            solved.insert(lambda.clone(), value);
            progressed = true;
        }
        if !progressed {
            return Err(CumulantError::Underdetermined(format!(
                "{} of {} unknowns solved at order {}",
                solved.len(),
                unknown_count,
                n
            )));
        }
    }
    // consistency: every equation must vanish exactly
    for eq in equations {
        let mut residual = ExpPoly::zero();
        for (lambda, coeff) in &eq.e {
            residual = residual.add(&coeff.mul(&solved[lambda]));
        }
        if !residual.is_zero() {
            return Err(CumulantError::Inconsistent(
                eq.label.clone(),
                residual.to_string(),
            ));
        }
    }
    Ok(solved)
}

/// Extend values on partitions with no part 1 to the full table, filling
/// in by increasing number of singleton parts via
/// `c_{mu + part 1} = - sum_i mu_i c_{mu + delta_i}`.
pub fn extend_with_singletons(
    order: usize,
    partial: BTreeMap<IntegerPartition, ExpPoly>,
) -> CumulantTable {
    let mut coefficients = partial;
    let all = IntegerPartition::enumerate(order);
    for ones in 1..=order {
        for lambda in all.iter().filter(|l| l.count_ones() == ones) {
            // mu = lambda with one part 1 removed
            let mut mu_parts = lambda.parts().to_vec();
            let pos = mu_parts.iter().rposition(|&p| p == 1).expect("has a 1");
            mu_parts.remove(pos);
            let mu = IntegerPartition::new(mu_parts);
            let mut value = ExpPoly::zero();
            for (i, &part) in mu.parts().iter().enumerate() {
                let bumped = mu.add_delta(i + 1).expect("index within range");
                let c = coefficients
                    .get(&bumped)
                    .expect("filled in order of singleton count");
                value = value.add(&c.scale(&Rat::from_integer((part as i64).into())));
            }
            coefficients.insert(lambda.clone(), value.neg());
        }
    }
    CumulantTable {
        order,
        coefficients,
    }
}

/// Compute the unique conjugation-invariant cumulant table of order
/// `2 <= n <= 6`, normalized by `c_(n) = 1`.
pub fn solve_cumulant(engine: &MomentEngine, n: usize) -> Result<CumulantTable, CumulantError> {
    if !(2..=6).contains(&n) {
        return Err(CumulantError::OrderOutOfRange(n));
    }
    let mut equations = Vec::new();
    for k in 2..=n.saturating_sub(2) {
        equations.extend(split_equations(engine, n, k));
    }
    let solved = solve_singleton_free(&equations, n)?;
    Ok(extend_with_singletons(n, solved))
}

/// Verify that the form defined by a table vanishes on every centered
/// mixed split: for all splits and all singleton-free pattern pairs,
/// `sum_lambda c_lambda E_lambda(pi, pi')` is exactly zero.
pub fn verify_centered_vanishing(
    engine: &MomentEngine,
    table: &CumulantTable,
) -> Result<(), CumulantError> {
    let n = table.order();
    for k in 1..n {
        for eq in split_equations(engine, n, k) {
            let mut residual = ExpPoly::zero();
            for (lambda, coeff) in &eq.e {
                let value = table.get(lambda).expect("table is complete");
                residual = residual.add(&coeff.mul(value));
            }
            if !residual.is_zero() {
                return Err(CumulantError::Inconsistent(
                    eq.label,
                    residual.to_string(),
                ));
            }
        }
    }
    Ok(())
}

/// Outcome of the order-7 computation: the values forced by the
/// single-block patterns, the two incompatible candidates for the value
/// on the class (3,2,2), and their difference.
pub struct Order7Obstruction {
    pub c52: ExpPoly,
    pub c43: ExpPoly,
    pub c322_from_25_split: ExpPoly,
    pub c322_from_34_split: ExpPoly,
    pub difference: ExpPoly,
}

/// Derive both candidate values for the order-7 coefficient on the class
/// (3,2,2) and return their difference, which is nonzero for every
/// finite positive time: no cumulant of order 7 exists.
pub fn order7_obstruction(engine: &MomentEngine) -> Result<Order7Obstruction, CumulantError> {
    let n = 7;
    let p = |blocks: &[&[usize]]| SetPartition::new(blocks.iter().map(|b| b.to_vec()).collect());
    let solve_for = |k: usize,
                     pi: &SetPartition,
                     pi_prime: &SetPartition,
                     target: &IntegerPartition,
                     known: &BTreeMap<IntegerPartition, ExpPoly>|
     -> Result<ExpPoly, CumulantError> {
        let slots = split_slots(k, n);
        let mut residual = ExpPoly::zero();
        let mut pivot: Option<ExpPoly> = None;
        for lambda in IntegerPartition::enumerate(n)
            .into_iter()
            .filter(|l| l.has_no_singleton_part())
        {
            let coeff = engine.e_lambda(&lambda, &slots, pi, pi_prime);
            if coeff.is_zero() {
                continue;
            }
            if lambda == *target {
                pivot = Some(coeff);
            } else {
                let value = known.get(&lambda).ok_or_else(|| {
                    CumulantError::Underdetermined(format!(
                        "pattern ({pi}, {pi_prime}) involves unsolved {}",
                        lambda.label()
                    ))
                })?;
                residual = residual.add(&coeff.mul(value));
            }
        }
        let pivot = pivot.ok_or_else(|| {
            CumulantError::Underdetermined(format!(
                "target {} absent from pattern ({pi}, {pi_prime})",
                target.label()
            ))
        })?;
        let pivot = as_constant(&pivot)
            .ok_or_else(|| CumulantError::NonConstantPivot(target.label(), pivot.to_string()))?;
        Ok(residual.scale(&(-Rat::one() / pivot)))
    };

    let mut known = BTreeMap::new();
    known.insert(IntegerPartition::new(vec![7]), ExpPoly::one());

    let l52 = IntegerPartition::new(vec![5, 2]);
    let c52 = solve_for(2, &p(&[&[1, 2]]), &p(&[&[3, 4, 5, 6, 7]]), &l52, &known)?;
    known.insert(l52, c52.clone());

    let l43 = IntegerPartition::new(vec![4, 3]);
    let c43 = solve_for(3, &p(&[&[1, 2, 3]]), &p(&[&[4, 5, 6, 7]]), &l43, &known)?;
    known.insert(l43, c43.clone());

    let l322 = IntegerPartition::new(vec![3, 2, 2]);
    let c322_from_25_split = solve_for(
        2,
        &p(&[&[1, 2]]),
        &p(&[&[3, 4], &[5, 6, 7]]),
        &l322,
        &known,
    )?;
    let c322_from_34_split = solve_for(
        3,
        &p(&[&[1, 2, 3]]),
        &p(&[&[4, 5], &[6, 7]]),
        &l322,
        &known,
    )?;
    let difference = c322_from_25_split.sub(&c322_from_34_split);
    Ok(Order7Obstruction {
        c52,
        c43,
        c322_from_25_split,
        c322_from_34_split,
        difference,
    })
}

/// `D_c(pi, pi')` for a complete table: the linear combination of the
/// pattern coefficients over fixed-point-free classes, with family A on
/// slots `1..=k`.
pub fn d_coefficient(
    engine: &MomentEngine,
    table_values: &BTreeMap<IntegerPartition, ExpPoly>,
    n: usize,
    k: usize,
    pi: &SetPartition,
    pi_prime: &SetPartition,
) -> ExpPoly {
    let slots = split_slots(k, n);
    let mut out = ExpPoly::zero();
    for lambda in IntegerPartition::enumerate(n)
        .into_iter()
        .filter(|l| l.has_no_singleton_part())
    {
        let coeff = engine.e_lambda(&lambda, &slots, pi, pi_prime);
        if coeff.is_zero() {
            continue;
        }
        if let Some(value) = table_values.get(&lambda) {
            out = out.add(&coeff.mul(value));
        }
    }
    out
}
