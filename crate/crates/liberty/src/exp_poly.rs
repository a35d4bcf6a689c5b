//! Exact arithmetic in the ring of exponential polynomials
//! `sum_i p_i(t) * exp(lambda_i * t)` with rational polynomial coefficients
//! and rational exponents.
//!
//! All time-dependent scalars produced by the moment machinery live in this
//! ring: it is closed under addition, multiplication, differentiation and
//! antidifferentiation, so every moment formula stays in exact closed form
//! until the final numeric evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Map as JsonMap, Value};
use thiserror::Error;

pub type Rat = BigRational;

/// Shorthand for an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Evaluation time: a finite non-negative rational or the limit `t -> inf`.
#[derive(Clone, Debug, PartialEq)]
pub enum Time {
    Finite(Rat),
    Infinity,
}

impl Time {
    pub fn finite_f64(t: f64) -> Self {
        Time::Finite(Rat::from_float(t).expect("finite time"))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("limit t -> infinity diverges: term t^{degree} e^({exponent} t) is unbounded")]
    Diverges { exponent: String, degree: usize },
}

/// An element of the ring `span{ t^j e^(lambda t) }`, in canonical form:
/// the map holds no zero polynomials and polynomials carry no trailing
/// zero coefficients, so structural equality is semantic equality.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExpPoly {
    // exponent lambda -> polynomial in t, coefficients by ascending degree
    terms: BTreeMap<Rat, Vec<Rat>>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn one() -> Self {
        ExpPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        ExpPoly::from_term(Rat::zero(), vec![c])
    }

    /// `e^(lambda t)`.
    pub fn exponential(lambda: Rat) -> Self {
        ExpPoly::from_term(lambda, vec![Rat::one()])
    }

    /// `c * t^degree * e^(lambda t)`.
    pub fn monomial(c: Rat, degree: usize, lambda: Rat) -> Self {
        let mut poly = vec![Rat::zero(); degree + 1];
        poly[degree] = c;
        ExpPoly::from_term(lambda, poly)
    }

    pub fn from_term(lambda: Rat, poly: Vec<Rat>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(lambda, poly);
        let mut out = ExpPoly { terms };
        out.canonicalize();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterator over `(lambda, polynomial)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &[Rat])> {
        self.terms.iter().map(|(l, p)| (l, p.as_slice()))
    }

    /// The constant term (coefficient of `t^0 e^(0 t)`).
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&Rat::zero())
            .and_then(|p| p.first().cloned())
            .unwrap_or_else(Rat::zero)
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, poly| {
            while poly.last().map_or(false, |c| c.is_zero()) {
                poly.pop();
            }
            !poly.is_empty()
        });
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (lambda, poly) in &other.terms {
            let entry = out.terms.entry(lambda.clone()).or_default();
            if entry.len() < poly.len() {
                entry.resize(poly.len(), Rat::zero());
            }
            for (i, c) in poly.iter().enumerate() {
                entry[i] += c;
            }
        }
        out.canonicalize();
        out
    }

    pub fn neg(&self) -> ExpPoly {
        let terms = self
            .terms
            .iter()
            .map(|(l, p)| (l.clone(), p.iter().map(|c| -c).collect()))
            .collect();
        ExpPoly { terms }
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> ExpPoly {
        if c.is_zero() {
            return ExpPoly::zero();
        }
        let terms = self
            .terms
            .iter()
            .map(|(l, p)| (l.clone(), p.iter().map(|x| x * c).collect()))
            .collect();
        ExpPoly { terms }
    }

    /// Substitute `t -> c t`: exponents scale by `c`, degree-`d`
    /// polynomial coefficients pick up a factor `c^d`.
    pub fn scale_time(&self, c: &Rat) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (lambda, poly) in &self.terms {
            let mut scaled = Vec::with_capacity(poly.len());
            let mut pow = Rat::one();
            for coeff in poly {
                scaled.push(coeff * &pow);
                pow *= c;
            }
            out = out.add(&ExpPoly::from_term(lambda * c, scaled));
        }
        out
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (la, pa) in &self.terms {
            for (lb, pb) in &other.terms {
                let lambda = la + lb;
                let mut prod = vec![Rat::zero(); pa.len() + pb.len() - 1];
                for (i, ca) in pa.iter().enumerate() {
                    for (j, cb) in pb.iter().enumerate() {
                        prod[i + j] += ca * cb;
                    }
                }
                let entry = out.terms.entry(lambda).or_default();
                if entry.len() < prod.len() {
                    entry.resize(prod.len(), Rat::zero());
                }
                for (i, c) in prod.into_iter().enumerate() {
                    entry[i] += c;
                }
            }
        }
        out.canonicalize();
        out
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (lambda, poly) in &self.terms {
            // d/dt [p e^(lt)] = (p' + l p) e^(lt)
            let mut d = vec![Rat::zero(); poly.len()];
            for (j, c) in poly.iter().enumerate() {
                if j > 0 {
                    d[j - 1] += c * rat_int(j as i64);
                }
                d[j] += c * lambda;
            }
            out = out.add(&ExpPoly::from_term(lambda.clone(), d));
        }
        out
    }

    /// The antiderivative `F` with `dF/dt = self` and `F(0) = initial`.
    pub fn integrate_from_zero(&self, initial: &Rat) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (lambda, poly) in &self.terms {
            if lambda.is_zero() {
                // plain polynomial: raise degrees
                let mut anti = vec![Rat::zero(); poly.len() + 1];
                for (j, c) in poly.iter().enumerate() {
                    anti[j + 1] = c / rat_int(j as i64 + 1);
                }
                out = out.add(&ExpPoly::from_term(Rat::zero(), anti));
            } else {
                // find q with q' + lambda q = p, so (q e^(lt))' = p e^(lt)
                let mut q = vec![Rat::zero(); poly.len()];
                for j in (0..poly.len()).rev() {
                    let higher = if j + 1 < poly.len() {
                        &q[j + 1] * rat_int(j as i64 + 1)
                    } else {
                        Rat::zero()
                    };
                    q[j] = (&poly[j] - higher) / lambda;
                }
                out = out.add(&ExpPoly::from_term(lambda.clone(), q));
            }
        }
        // fix the integration constant so that F(0) = initial
        let at_zero: Rat = out
            .terms
            .values()
            .map(|p| p.first().cloned().unwrap_or_else(Rat::zero))
            .sum();
        out.add(&ExpPoly::constant(initial - at_zero))
    }

    /// High-precision evaluation from the exact rational data.
    ///
    /// `precision_bits` controls the internal binary precision; the returned
    /// rational approximates the true value to within a few ulps at that
    /// precision. At `t -> inf` the value is the constant term, provided no
    /// term diverges.
    pub fn eval_rational(&self, t: &Time, precision_bits: u32) -> Result<Rat, EvalError> {
        match t {
            Time::Infinity => {
                for (lambda, poly) in &self.terms {
                    let diverges = lambda.is_positive() || (lambda.is_zero() && poly.len() > 1);
                    if diverges {
                        return Err(EvalError::Diverges {
                            exponent: lambda.to_string(),
                            degree: poly.len() - 1,
                        });
                    }
                }
                Ok(self.constant_term())
            }
            Time::Finite(t) => {
                let work = precision_bits + 96;
                let mut sum = Rat::zero();
                for (lambda, poly) in &self.terms {
                    let mut p = Rat::zero();
                    for c in poly.iter().rev() {
                        p = p * t + c;
                    }
                    let e = exp_rational(&(lambda * t), work);
                    sum += round_to_bits(&(p * e), work);
                }
                Ok(round_to_bits(&sum, precision_bits))
            }
        }
    }

    /// Evaluation to `f64`, computed through 128-bit exact-rational
    /// arithmetic so that alternating sums of large coefficients do not
    /// cancel catastrophically.
    pub fn eval(&self, t: &Time) -> Result<f64, EvalError> {
        let r = self.eval_rational(t, 128)?;
        Ok(r.to_f64().expect("rational fits f64"))
    }

    /// JSON form `{ "lambda": ["p/q", ...], ... }` with rationals as strings.
    pub fn to_json(&self) -> Value {
        let mut map = JsonMap::new();
        for (lambda, poly) in &self.terms {
            let coeffs: Vec<Value> = poly.iter().map(|c| Value::String(c.to_string())).collect();
            map.insert(lambda.to_string(), Value::Array(coeffs));
        }
        Value::Object(map)
    }

    pub fn from_json(value: &Value) -> Option<ExpPoly> {
        let obj = value.as_object()?;
        let mut out = ExpPoly::zero();
        for (key, coeffs) in obj {
            let lambda: Rat = key.parse().ok()?;
            let poly: Option<Vec<Rat>> = coeffs
                .as_array()?
                .iter()
                .map(|c| c.as_str().and_then(|s| s.parse().ok()))
                .collect();
            out = out.add(&ExpPoly::from_term(lambda, poly?));
        }
        Some(out)
    }
}

impl std::iter::Sum for ExpPoly {
    fn sum<I: Iterator<Item = ExpPoly>>(iter: I) -> ExpPoly {
        iter.fold(ExpPoly::zero(), |acc, x| acc.add(&x))
    }
}

/// Round a rational to the nearest multiple of `2^-bits`.
fn round_to_bits(r: &Rat, bits: u32) -> Rat {
    let scale = BigInt::one() << bits;
    let scaled = r * Rat::from_integer(scale.clone());
    Rat::new(scaled.round().to_integer(), scale)
}

/// `e^x` for rational `x`, to roughly `bits` binary digits.
///
/// Range-reduces to `|y| <= 1` with `e^x = (e^(x/m))^m`, sums the Taylor
/// series with intermediate rounding to keep denominators bounded, then
/// powers back up by binary exponentiation.
pub fn exp_rational(x: &Rat, bits: u32) -> Rat {
    if x.is_zero() {
        return Rat::one();
    }
    if x.is_negative() {
        let inv = exp_rational(&-x, bits + 8);
        return round_to_bits(&(Rat::one() / inv), bits);
    }
    let work = bits + 32;
    let m = x.ceil().to_integer().to_u64().unwrap_or(1).max(1);
    let y = x / rat_int(m as i64);
    let threshold = Rat::new(BigInt::one(), BigInt::one() << work);
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut k: i64 = 1;
    loop {
        term = round_to_bits(&(term * &y / rat_int(k)), work);
        if term.abs() < threshold {
            break;
        }
        sum += &term;
        k += 1;
    }
    // sum^m by binary exponentiation with rounding
    let mut base = sum;
    let mut exp = m;
    let mut acc = Rat::one();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = round_to_bits(&(acc * &base), work);
        }
        exp >>= 1;
        if exp > 0 {
            base = round_to_bits(&(&base * &base), work);
        }
    }
    round_to_bits(&acc, bits)
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        // largest exponent first: constants, then e^(-t), e^(-2t), ...
        for (lambda, poly) in self.terms.iter().rev() {
            for (degree, c) in poly.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mag = c.abs();
                if first {
                    if c.is_negative() {
                        write!(f, "-")?;
                    }
                    first = false;
                } else if c.is_negative() {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                let mut factors: Vec<String> = Vec::new();
                if !mag.is_one() || (degree == 0 && lambda.is_zero()) {
                    factors.push(mag.to_string());
                }
                match degree {
                    0 => {}
                    1 => factors.push("t".into()),
                    d => factors.push(format!("t^{d}")),
                }
                if !lambda.is_zero() {
                    let l = if lambda.is_one() {
                        "t".to_string()
                    } else if (-lambda.clone()).is_one() {
                        "-t".to_string()
                    } else {
                        format!("{lambda}t")
                    };
                    factors.push(format!("e^({l})"));
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}
