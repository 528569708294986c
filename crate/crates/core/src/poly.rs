//! Sparse polynomials in the variables ρₙ, ρ̄ₙ with exact or floating
//! coefficients, and the Poisson bracket
//! {F, G} = i Σₙ (∂F/∂ρ̄ₙ ∂G/∂ρₙ − ∂F/∂ρₙ ∂G/∂ρ̄ₙ).

use std::collections::{BTreeMap, BTreeSet};

use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

use crate::resonance::{Mode, Quartet};
use crate::scalar::Scalar;

/// A variable: the mode and whether it is conjugated.
pub type Var = (Mode, bool);

/// A monomial as a sorted multiset of variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<Var>);

impl Monomial {
    pub fn new(mut vars: Vec<Var>) -> Self {
        vars.sort();
        Monomial(vars)
    }

    /// ρ_{n₁} ρ̄_{n₂} ρ_{n₃} ρ̄_{n₄}.
    pub fn quartic(q: &Quartet) -> Self {
        let [a, b, c, d] = q.0;
        Monomial::new(vec![(a, false), (b, true), (c, false), (d, true)])
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    fn power_of(&self, v: &Var) -> usize {
        self.0.iter().filter(|x| *x == v).count()
    }

    fn without_one(&self, v: &Var) -> Monomial {
        let mut out = self.0.clone();
        let pos = out.iter().position(|x| x == v).expect("variable present");
        out.remove(pos);
        Monomial(out)
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial::new(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar> {
    terms: BTreeMap<Monomial, Complex<S>>,
}

impl<S: Scalar> Default for Poly<S> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

fn c_from<S: Scalar>(v: i64) -> Complex<S> {
    Complex::new(S::from_i64(v), S::zero())
}

impl<S: Scalar> Poly<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex<S>) {
        let e = self.terms.entry(m.clone()).or_insert_with(Complex::zero);
        *e = e.clone() + c;
        if e.re.is_zero() && e.im.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex<S> {
        self.terms.get(m).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex<S>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, k: &Complex<S>) -> Poly<S> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * k.clone());
        }
        out
    }

    pub fn times(&self, other: &Poly<S>) -> Poly<S> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn derivative(&self, v: &Var) -> Poly<S> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let k = m.power_of(v);
            if k > 0 {
                out.add_term(m.without_one(v), c.clone() * c_from::<S>(k as i64));
            }
        }
        out
    }

    /// Every nonzero first derivative, keyed by variable.
    pub fn gradients(&self) -> BTreeMap<Var, Poly<S>> {
        let mut out: BTreeMap<Var, Poly<S>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut vars = m.0.clone();
            vars.dedup();
            for v in vars {
                let k = m.power_of(&v);
                out.entry(v)
                    .or_default()
                    .add_term(m.without_one(&v), c.clone() * c_from::<S>(k as i64));
            }
        }
        out
    }

    pub fn modes(&self) -> BTreeSet<Mode> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(n, _)| *n)).collect()
    }

    /// max |coefficient|, rounded to f64.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.re.to_f64().hypot(c.im.to_f64())).fold(0.0, f64::max)
    }

    /// Evaluates at `ρ`, with `ρ̄` taken as the conjugate.
    pub fn eval(&self, rho: &dyn Fn(&Mode) -> Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = Complex64::new(c.re.to_f64(), c.im.to_f64());
                for (n, conj) in &m.0 {
                    let x = rho(n);
                    v *= if *conj { x.conj() } else { x };
                }
                v
            })
            .sum()
    }

    pub fn map_coefficients<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Poly<T> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), Complex::new(f(&c.re), f(&c.im)));
        }
        out
    }
}

/// {F, G} = i Σₙ (∂F/∂ρ̄ₙ ∂G/∂ρₙ − ∂F/∂ρₙ ∂G/∂ρ̄ₙ).
pub fn poisson_bracket<S: Scalar>(f: &Poly<S>, g: &Poly<S>) -> Poly<S> {
    let df = f.gradients();
    let dg = g.gradients();
    let mut sum = Poly::zero();
    for ((n, conj), fp) in &df {
        let Some(gp) = dg.get(&(*n, !conj)) else { continue };
        let prod = fp.times(gp);
        sum = if *conj {
            sum.plus(&prod)
        } else {
            sum.plus(&prod.scaled(&c_from(-1)))
        };
    }
    sum.scaled(&Complex::new(S::zero(), S::one()))
}

/// H⁽²⁾ = Σ λ(n)|ρₙ|² over the given modes.
pub fn quadratic_part<S: Scalar>(modes: &[Mode], lambda: impl Fn(&Mode) -> S) -> Poly<S> {
    let mut p = Poly::zero();
    for n in modes {
        p.add_term(Monomial::new(vec![(*n, false), (*n, true)]), Complex::new(lambda(n), S::zero()));
    }
    p
}

/// Σ over ordered quartets of `weight · ρ_{n₁} ρ̄_{n₂} ρ_{n₃} ρ̄_{n₄}`.
pub fn quartic_sum<S: Scalar>(ordered: impl IntoIterator<Item = (Quartet, Complex<S>)>) -> Poly<S> {
    let mut p = Poly::zero();
    for (q, w) in ordered {
        p.add_term(Monomial::quartic(&q), w);
    }
    p
}

/// The distinct slot orderings of a quartet that give the same monomial.
pub fn orderings(q: &Quartet) -> Vec<Quartet> {
    let [a, b, c, d] = q.0;
    let mut v = vec![
        Quartet::new(a, b, c, d),
        Quartet::new(c, b, a, d),
        Quartet::new(a, d, c, b),
        Quartet::new(c, d, a, b),
    ];
    v.sort();
    v.dedup();
    v
}

pub fn one<S: Scalar>() -> Complex<S> {
    Complex::one()
}
