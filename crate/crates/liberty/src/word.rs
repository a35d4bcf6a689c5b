//! Words in two commuting families and formal moment polynomials.
//!
//! A `Word` is a cyclic product `x_1 (u y_1 u*) x_2 (u y_2 u*) ...` with
//! the `x_i` drawn from family A and the `y_i` from family B; letters are
//! multisets of formal generator indices because each family is
//! commutative. A `MomentPolynomial` is a formal linear combination of
//! products of family moments with exponential-polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational as Rat;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::exp_poly::ExpPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::A => Family::B,
            Family::B => Family::A,
        }
    }

    pub fn tag(self) -> char {
        match self {
            Family::A => 'a',
            Family::B => 'b',
        }
    }
}

/// One letter of a word: a product of generators from a single family.
/// An empty multiset is the identity letter.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub family: Family,
    gens: Vec<u32>,
}

impl Letter {
    pub fn new(family: Family, mut gens: Vec<u32>) -> Self {
        gens.sort_unstable();
        Letter { family, gens }
    }

    pub fn single(family: Family, gen: u32) -> Self {
        Letter {
            family,
            gens: vec![gen],
        }
    }

    pub fn identity(family: Family) -> Self {
        Letter {
            family,
            gens: Vec::new(),
        }
    }

    pub fn gens(&self) -> &[u32] {
        &self.gens
    }

    pub fn is_identity(&self) -> bool {
        self.gens.is_empty()
    }

    fn merge(&self, other: &Letter) -> Letter {
        debug_assert_eq!(self.family, other.family);
        let mut gens = self.gens.clone();
        gens.extend_from_slice(&other.gens);
        Letter::new(self.family, gens)
    }
}

/// A cyclic word, normalized so that consecutive letters strictly
/// alternate between the families and identity letters are removed.
/// Cyclic rotations are identified (the trace is cyclic), so the stored
/// form is the lexicographically minimal rotation.
///
/// The normal form is either empty, a single letter, or an even-length
/// alternating sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        let mut letters: Vec<Letter> = letters.into_iter().filter(|l| !l.is_identity()).collect();
        // merge cyclically adjacent same-family letters until alternating
        loop {
            let n = letters.len();
            if n <= 1 {
                break;
            }
            let mut merged = false;
            for i in 0..n {
                let j = (i + 1) % n;
                if letters[i].family == letters[j].family {
                    let combined = letters[i].merge(&letters[j]);
                    letters[i] = combined;
                    letters.remove(j);
                    // removing j < i shifts i
                    merged = true;
                    break;
                }
            }
            if !merged {
                break;
            }
        }
        // minimal rotation as the canonical representative
        if letters.len() > 1 {
            let n = letters.len();
            let best = (0..n)
                .map(|s| {
                    let mut rot = letters[s..].to_vec();
                    rot.extend_from_slice(&letters[..s]);
                    rot
                })
                .min()
                .unwrap();
            letters = best;
        }
        Word { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Half-length `n` of an alternating word of `2n` letters.
    pub fn half_length(&self) -> usize {
        debug_assert!(self.letters.len() % 2 == 0);
        self.letters.len() / 2
    }

    /// The two arcs obtained by cutting the cyclic word between positions
    /// `k|k+1` and `l|l+1` (1-based, `k < l`): outer arc
    /// `1..k, l+1..2n` and inner arc `k+1..l`, each as a normalized word.
    pub fn split_arcs(&self, k: usize, l: usize) -> (Word, Word) {
        let mut outer: Vec<Letter> = self.letters[..k].to_vec();
        outer.extend_from_slice(&self.letters[l..]);
        let inner: Vec<Letter> = self.letters[k..l].to_vec();
        (Word::new(outer), Word::new(inner))
    }
}

/// A product of family moments: one multiset of generator indices per
/// `phi(...)` factor, kept per family. The empty key is the constant 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MomentKey {
    pub a_factors: Vec<Vec<u32>>,
    pub b_factors: Vec<Vec<u32>>,
}

impl MomentKey {
    pub fn one() -> Self {
        MomentKey::default()
    }

    pub fn from_symbol(family: Family, gens: Vec<u32>) -> Self {
        let mut key = MomentKey::default();
        key.push(family, gens);
        key
    }

    pub fn push(&mut self, family: Family, mut gens: Vec<u32>) {
        if gens.is_empty() {
            return; // phi(1) = 1
        }
        gens.sort_unstable();
        match family {
            Family::A => {
                self.a_factors.push(gens);
                self.a_factors.sort();
            }
            Family::B => {
                self.b_factors.push(gens);
                self.b_factors.sort();
            }
        }
    }

    pub fn product(&self, other: &MomentKey) -> MomentKey {
        let mut a = self.a_factors.clone();
        a.extend(other.a_factors.iter().cloned());
        a.sort();
        let mut b = self.b_factors.clone();
        b.extend(other.b_factors.iter().cloned());
        b.sort();
        MomentKey {
            a_factors: a,
            b_factors: b,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.gens.is_empty() {
            return write!(f, "{}()", self.family.tag());
        }
        let inner: Vec<String> = self
            .gens
            .iter()
            .map(|g| format!("{}{g}", self.family.tag()))
            .collect();
        if self.gens.len() == 1 {
            write!(f, "{}", inner[0])
        } else {
            write!(f, "({})", inner.join(" "))
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Display for MomentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.a_factors.is_empty() && self.b_factors.is_empty() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for (tag, factors) in [('a', &self.a_factors), ('b', &self.b_factors)] {
            for factor in factors {
                let inner: Vec<String> = factor.iter().map(|g| format!("{tag}{g}")).collect();
                parts.push(format!("phi({})", inner.join(" ")));
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Formal linear combination of moment products with `ExpPoly`
/// coefficients, in canonical form (no zero coefficients).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MomentPolynomial {
    terms: BTreeMap<MomentKey, ExpPoly>,
}

impl MomentPolynomial {
    pub fn zero() -> Self {
        MomentPolynomial::default()
    }

    pub fn one() -> Self {
        MomentPolynomial::from_term(MomentKey::one(), ExpPoly::one())
    }

    pub fn from_term(key: MomentKey, coeff: ExpPoly) -> Self {
        let mut out = MomentPolynomial::zero();
        out.accumulate(key, coeff);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MomentKey, &ExpPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &MomentKey) -> ExpPoly {
        self.terms.get(key).cloned().unwrap_or_else(ExpPoly::zero)
    }

    fn accumulate(&mut self, key: MomentKey, coeff: ExpPoly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(ExpPoly::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            // re-borrow not possible after remove; look up by a fresh entry
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &MomentPolynomial) -> MomentPolynomial {
        let mut out = self.clone();
        for (key, coeff) in &other.terms {
            out.accumulate(key.clone(), coeff.clone());
        }
        out
    }

    pub fn sub(&self, other: &MomentPolynomial) -> MomentPolynomial {
        self.add(&other.scale(&ExpPoly::constant(-Rat::one())))
    }

    pub fn scale(&self, factor: &ExpPoly) -> MomentPolynomial {
        let mut out = MomentPolynomial::zero();
        for (key, coeff) in &self.terms {
            out.accumulate(key.clone(), coeff.mul(factor));
        }
        out
    }

    pub fn mul(&self, other: &MomentPolynomial) -> MomentPolynomial {
        let mut out = MomentPolynomial::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.accumulate(ka.product(kb), ca.mul(cb));
            }
        }
        out
    }

    /// Substitute numeric values for the formal moments: `assign` maps a
    /// family and generator multiset to the value of `phi(product)`.
    pub fn substitute<F>(&self, assign: F) -> ExpPoly
    where
        F: Fn(Family, &[u32]) -> Rat,
    {
        let mut out = ExpPoly::zero();
        for (key, coeff) in &self.terms {
            let mut value = Rat::one();
            for factor in &key.a_factors {
                value *= assign(Family::A, factor);
            }
            for factor in &key.b_factors {
                value *= assign(Family::B, factor);
            }
            if !value.is_zero() {
                out = out.add(&coeff.scale(&value));
            }
        }
        out
    }

    /// JSON rendering: a list of `{A_moments, B_moments, coeff}` objects.
    pub fn to_json(&self) -> Value {
        let items: Vec<Value> = self
            .terms
            .iter()
            .map(|(key, coeff)| {
                json!({
                    "A_moments": key.a_factors,
                    "B_moments": key.b_factors,
                    "coeff": coeff.to_json(),
                })
            })
            .collect();
        Value::Array(items)
    }
}

impl fmt::Display for MomentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, coeff) in &self.terms {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "({coeff}) * {key}")?;
        }
        Ok(())
    }
}
