//! Exact mixed moments of two commutative families joined by a free
//! unitary Brownian motion, via the triangular first-order ODE system
//! satisfied by `f(w, t) = e^{n t} tau(x_1 u_t y_1 u_t^* ...)`.
//!
//! For an alternating cyclic word of `2n` letters the time derivative of
//! `f` is a sum over index pairs `k < l`:
//!   * same-family pair: `- f(outer) * f(inner)`;
//!   * different-family pair: `+ e^t * f(outer) * f(inner)`,
//! where the outer arc keeps positions `1..k, l+1..2n` and the inner arc
//! keeps `k+1..l`; arcs are again cyclic words, so same-family letters
//! that become adjacent (including around the wrap) merge into one
//! product letter. Each level integrates exactly from the classical
//! independence factorization at `t = 0`, so the whole computation stays
//! in the exponential-polynomial ring.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_rational::BigRational as Rat;
use num_traits::One;

use crate::combinatorics::{enumerate_by_cycle_type, IntegerPartition, Permutation, SetPartition};
use crate::exp_poly::{rat_int, ExpPoly};
use crate::word::{Family, Letter, MomentKey, MomentPolynomial, Word};

/// Memoizing solver for the mixed-moment recursion. All returned values
/// are immutable and shared; the memo table supports concurrent readers.
#[derive(Default)]
pub struct MomentEngine {
    memo: RwLock<HashMap<Word, Arc<MomentPolynomial>>>,
}

impl MomentEngine {
    pub fn new() -> Self {
        MomentEngine::default()
    }

    /// The rescaled moment `f(w, t) = e^{n t} tau(...)` for a normalized
    /// cyclic word `w` of `2n` letters (or a plain family moment when the
    /// word has at most one letter).
    pub fn f_hat(&self, w: &Word) -> Arc<MomentPolynomial> {
        if let Some(found) = self.memo.read().unwrap().get(w) {
            return Arc::clone(found);
        }
        let value = Arc::new(self.compute_f_hat(w));
        let mut table = self.memo.write().unwrap();
        Arc::clone(table.entry(w.clone()).or_insert(value))
    }

    fn compute_f_hat(&self, w: &Word) -> MomentPolynomial {
        if w.is_empty() {
            return MomentPolynomial::one();
        }
        if w.len() == 1 {
            let letter = &w.letters()[0];
            let key = MomentKey::from_symbol(letter.family, letter.gens().to_vec());
            return MomentPolynomial::from_term(key, ExpPoly::one());
        }
        debug_assert!(w.len() % 2 == 0, "normalized word must alternate");
        let m = w.len();
        let e_t = ExpPoly::exponential(Rat::one());
        let minus_one = ExpPoly::constant(-Rat::one());
        let mut rhs = MomentPolynomial::zero();
        for k in 1..m {
            for l in (k + 1)..=m {
                let (outer, inner) = w.split_arcs(k, l);
                let product = self.f_hat(&outer).mul(&self.f_hat(&inner));
                let same_family = w.letters()[k - 1].family == w.letters()[l - 1].family;
                let contribution = if same_family {
                    product.scale(&minus_one)
                } else {
                    product.scale(&e_t)
                };
                rhs = rhs.add(&contribution);
            }
        }
        // integrate from the classical independence factorization at t=0
        let init_key = independence_key(w);
        let mut result = MomentPolynomial::zero();
        let mut init_seen = false;
        for (key, coeff) in rhs.terms() {
            let initial = if *key == init_key {
                init_seen = true;
                Rat::one()
            } else {
                Rat::from_integer(0.into())
            };
            result = result.add(&MomentPolynomial::from_term(
                key.clone(),
                coeff.integrate_from_zero(&initial),
            ));
        }
        if !init_seen {
            result = result.add(&MomentPolynomial::from_term(init_key, ExpPoly::one()));
        }
        result
    }

    /// The exact mixed moment `tau(x_1 u_t y_1 u_t^* x_2 ...) = e^{-n t} f(w, t)`
    /// as a formal polynomial in the family moments.
    pub fn mixed_moment(&self, w: &Word) -> MomentPolynomial {
        let f = self.f_hat(w);
        if w.len() <= 1 {
            return (*f).clone();
        }
        let n = w.half_length() as i64;
        f.scale(&ExpPoly::exponential(rat_int(-n)))
    }

    /// The multiplicative extension of the mixed moment along the cycles
    /// of `sigma`: the product over cycles of the mixed moment of the
    /// cyclic word reading the slots in cycle order. Slots are 1-based and
    /// carry a family tag plus a formal generator label.
    pub fn phi_sigma(&self, sigma: &Permutation, slots: &[(Family, u32)]) -> MomentPolynomial {
        debug_assert_eq!(sigma.len(), slots.len());
        let mut out = MomentPolynomial::one();
        for cycle in sigma.cycles() {
            let letters: Vec<Letter> = cycle
                .iter()
                .map(|&i| {
                    let (family, gen) = slots[i - 1];
                    Letter::single(family, gen)
                })
                .collect();
            out = out.mul(&self.mixed_moment(&Word::new(letters)));
        }
        out
    }

    /// The universal coefficient `C(sigma, pi, pi')`: the coefficient of
    /// the moment product whose factors are the blocks of `pi` (family A)
    /// and `pi'` (family B) in `phi_sigma`, with slots labeled by their
    /// own global indices.
    pub fn pattern_coefficient(
        &self,
        sigma: &Permutation,
        slots: &[(Family, u32)],
        pi: &SetPartition,
        pi_prime: &SetPartition,
    ) -> ExpPoly {
        self.phi_sigma(sigma, slots)
            .coefficient(&pattern_key(pi, pi_prime))
    }

    /// `E_lambda(pi, pi') = sum of C(sigma, pi, pi')` over all `sigma`
    /// with cycle type `lambda`.
    pub fn e_lambda(
        &self,
        lambda: &IntegerPartition,
        slots: &[(Family, u32)],
        pi: &SetPartition,
        pi_prime: &SetPartition,
    ) -> ExpPoly {
        let key = pattern_key(pi, pi_prime);
        let mut sum = ExpPoly::zero();
        for sigma in enumerate_by_cycle_type(lambda) {
            sum = sum.add(&self.phi_sigma(&sigma, slots).coefficient(&key));
        }
        sum
    }
}

/// Slot layout for a mixed split: slots `1..=k` in family A, `k+1..=n` in
/// family B, each carrying its global index as the formal generator.
pub fn split_slots(k: usize, n: usize) -> Vec<(Family, u32)> {
    (1..=n)
        .map(|i| {
            let family = if i <= k { Family::A } else { Family::B };
            (family, i as u32)
        })
        .collect()
}

/// The moment product selected by a pair of set partitions: blocks of
/// `pi` become A-factors and blocks of `pi_prime` become B-factors.
pub fn pattern_key(pi: &SetPartition, pi_prime: &SetPartition) -> MomentKey {
    let mut key = MomentKey::one();
    for block in pi.blocks() {
        key.push(Family::A, block.iter().map(|&i| i as u32).collect());
    }
    for block in pi_prime.blocks() {
        key.push(Family::B, block.iter().map(|&i| i as u32).collect());
    }
    key
}

/// The classical independence factorization of a word at `t = 0`: one
/// moment factor per family, collecting every generator of that family.
fn independence_key(w: &Word) -> MomentKey {
    let mut key = MomentKey::one();
    for family in [Family::A, Family::B] {
        let gens: Vec<u32> = w
            .letters()
            .iter()
            .filter(|l| l.family == family)
            .flat_map(|l| l.gens().iter().copied())
            .collect();
        key.push(family, gens);
    }
    key
}

/// Rescaled even moments `g_{2n}(t) = e^{2 n t} tau((a u_t b u_t^*)^{2n})`
/// for a pair of symmetric Bernoulli variables, via the closed recursion
/// `dg_{2n}/dt = -2n * sum_{i=1}^{n-1} g_{2(n-i)} g_{2i}` with
/// `g_{2n}(0) = 1`. Returns `[g_2, g_4, ..., g_{2 n_max}]`.
pub fn bernoulli_g(n_max: usize) -> Vec<ExpPoly> {
    let mut g: Vec<ExpPoly> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n == 1 {
            g.push(ExpPoly::one());
            continue;
        }
        let mut rhs = ExpPoly::zero();
        for i in 1..n {
            rhs = rhs.add(&g[n - i - 1].mul(&g[i - 1]));
        }
        rhs = rhs.scale(&rat_int(-2 * n as i64));
        g.push(rhs.integrate_from_zero(&Rat::one()));
    }
    g
}
