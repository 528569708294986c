//! Numerical quartic forms Σ C·x_a x̄_b x_c x̄_d over an indexed mode list,
//! with optional rotating-frame phases e^{iΩt}.

use std::collections::HashMap;

use num_complex::Complex;

use crate::resonance::{Mode, Quartet};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct QuarticTerm<T: Real> {
    /// `[a, b, c, d]`: `a, c` unconjugated, `b, d` conjugated.
    pub idx: [usize; 4],
    /// Coefficient of the canonical monomial.
    pub coef: Complex<T>,
    /// λ_a − λ_b + λ_c − λ_d.
    pub omega: T,
}

#[derive(Clone, Debug, Default)]
pub struct QuarticForm<T: Real> {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
    terms: Vec<QuarticTerm<T>>,
}

impl<T: Real> QuarticForm<T> {
    pub fn new(modes: Vec<Mode>) -> Self {
        let index = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        QuarticForm {
            modes,
            index,
            terms: Vec::new(),
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn index_of(&self, m: &Mode) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn terms(&self) -> &[QuarticTerm<T>] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Adds `coef · x_{n₁} x̄_{n₂} x_{n₃} x̄_{n₄}` for a canonical monomial.
    /// Every mode must already be indexed.
    pub fn push(&mut self, q: &Quartet, coef: Complex<T>, omega: T) {
        let ix = |m: &Mode| self.index[m];
        let [a, b, c, d] = q.0;
        self.terms.push(QuarticTerm {
            idx: [ix(&a), ix(&b), ix(&c), ix(&d)],
            coef,
            omega,
        });
    }

    fn phase(term: &QuarticTerm<T>, t: Option<T>) -> Complex<T> {
        match t {
            Some(t) => Complex::from_polar(T::one(), term.omega * t),
            None => Complex::new(T::one(), T::zero()),
        }
    }

    /// Value of the form; `t` switches on the rotating-frame phases.
    pub fn value(&self, x: &[Complex<T>], t: Option<T>) -> Complex<T> {
        self.terms
            .iter()
            .map(|term| {
                let [a, b, c, d] = term.idx;
                term.coef * Self::phase(term, t) * x[a] * x[b].conj() * x[c] * x[d].conj()
            })
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v)
    }

    /// Adds ∂/∂x̄ of the form into `out`.
    pub fn add_grad_conj(&self, x: &[Complex<T>], t: Option<T>, out: &mut [Complex<T>]) {
        for term in &self.terms {
            let [a, b, c, d] = term.idx;
            let k = term.coef * Self::phase(term, t) * x[a] * x[c];
            out[b] = out[b] + k * x[d].conj();
            out[d] = out[d] + k * x[b].conj();
        }
    }
}
