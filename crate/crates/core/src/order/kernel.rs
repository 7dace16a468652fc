//! Dense f64 evaluation of pattern residuals.
//!
//! The coefficient search evaluates residuals at millions of float points,
//! which the exact engine cannot afford. This kernel precomputes a
//! concatenation table over the words of degree `<= order` and runs the same
//! compilation in f64. It is checked against [`super::residual`] in tests;
//! feasibility is never decided from it alone.

use super::{exact_series, residual_words, Model, OrderError};
use crate::schemes::{Pattern, PatternFactor, Placement, Slot};
use crate::series::{enumerate_words, Word};

const NONE: u16 = u16::MAX;

#[derive(Debug, Clone, Copy)]
enum Value {
    Free(usize),
    Fixed(f64),
}

impl Value {
    #[inline]
    fn get(self, x: &[f64]) -> f64 {
        match self {
            Value::Free(i) => x[i],
            Value::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
enum Step {
    A(Value),
    B {
        b: Value,
        c: Option<Value>,
        placement: Placement,
    },
    Stage(Value, Value),
}

#[derive(Debug, Clone)]
struct WordTable {
    n: usize,
    /// `concat[u * n + v]` is the id of `uv`, or `NONE` above the truncation
    concat: Vec<u16>,
    /// id of each single-letter word
    letter: Vec<u16>,
    /// ids of `L, LL, LLL, ...` for each letter `L`, up to the truncation
    powers: Vec<Vec<u16>>,
}

impl WordTable {
    fn new(words: &[Word], letters: usize) -> Self {
        let n = words.len();
        let index: std::collections::HashMap<&Word, u16> =
            words.iter().enumerate().map(|(i, w)| (w, i as u16)).collect();
        let mut concat = vec![NONE; n * n];
        for (i, u) in words.iter().enumerate() {
            for (j, v) in words.iter().enumerate() {
                if let Some(&k) = index.get(&u.concat(v)) {
                    concat[i * n + j] = k;
                }
            }
        }
        let letter = (0..letters as u8)
            .map(|l| {
                words
                    .iter()
                    .position(|w| w.letters() == [l])
                    .map_or(NONE, |p| p as u16)
            })
            .collect::<Vec<u16>>();
        let mut table = Self {
            n,
            concat,
            letter,
            powers: Vec::new(),
        };
        table.powers = table
            .letter
            .iter()
            .map(|&l| {
                let mut ids = Vec::new();
                let mut p = l;
                while p != NONE {
                    ids.push(p);
                    p = table.cat(p as usize, l as usize);
                }
                ids
            })
            .collect();
        table
    }

    #[inline]
    fn cat(&self, u: usize, v: usize) -> u16 {
        self.concat[u * self.n + v]
    }

    fn one(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        v[0] = 1.0;
        v
    }

    /// `x · y` where `y` is a sparse list.
    fn mul_sparse_right(&self, x: &[f64], y: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (u, &xu) in x.iter().enumerate() {
            if xu == 0.0 {
                continue;
            }
            for &(v, yv) in y {
                let w = self.cat(u, v);
                if w != NONE {
                    out[w as usize] += xu * yv;
                }
            }
        }
        out
    }

    /// `y · x` where `y` is a sparse list.
    fn mul_sparse_left(&self, y: &[(usize, f64)], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(u, yu) in y {
            for (v, &xv) in x.iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                let w = self.cat(u, v);
                if w != NONE {
                    out[w as usize] += yu * xv;
                }
            }
        }
        out
    }

    /// Truncated exponential of a sparse series without constant term,
    /// returned in sparse form.
    fn exp_sparse(&self, x: &[(usize, f64)]) -> Vec<(usize, f64)> {
        let mut sum = self.one();
        let mut term: Vec<(usize, f64)> = vec![(0, 1.0)];
        let mut next = vec![0.0; self.n];
        let mut seen = vec![false; self.n];
        let mut touched = Vec::new();
        let mut k = 1.0;
        loop {
            // term stays sorted by word id, so each entry of `next`
            // accumulates in the same order as a dense product would
            for &(u, tu) in &term {
                for &(v, xv) in x {
                    let w = self.cat(u, v);
                    if w != NONE {
                        let w = w as usize;
                        if !seen[w] {
                            seen[w] = true;
                            touched.push(w);
                        }
                        next[w] += tu * xv;
                    }
                }
            }
            touched.sort_unstable();
            term.clear();
            for &w in &touched {
                let t = next[w] / k;
                next[w] = 0.0;
                seen[w] = false;
                if t != 0.0 {
                    sum[w] += t;
                    term.push((w, t));
                }
            }
            touched.clear();
            if term.is_empty() {
                break;
            }
            k += 1.0;
        }
        sparse(&sum)
    }
}

fn sparse(x: &[f64]) -> Vec<(usize, f64)> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect()
}

/// Precompiled residual evaluator for one pattern, order and model.
#[derive(Debug, Clone)]
pub struct ResidualKernel {
    model: Model,
    order: u32,
    free: usize,
    steps: Vec<Step>,
    table: WordTable,
    exact: Vec<f64>,
    /// `BBA - 2BAB + ABB` in sparse form (autonomous model only)
    double_commutator: Vec<(usize, f64)>,
    /// `n!` for each residual entry of degree `n`
    factorials: Vec<f64>,
}

impl ResidualKernel {
    pub fn new(pattern: &Pattern, order: u32, model: Model) -> Result<Self, OrderError> {
        let cap = model.max_check_cap();
        if order > cap {
            return Err(OrderError::CapExceeded {
                model,
                requested: order,
                cap,
            });
        }
        let mut free = 0;
        let mut value = |s: &Slot| match s {
            Slot::Free => {
                free += 1;
                Value::Free(free - 1)
            }
            Slot::Fixed(c) => Value::Fixed(c.to_f64()),
        };
        let steps: Vec<Step> = match pattern {
            Pattern::Splitting { factors } => factors
                .iter()
                .map(|f| match f {
                    PatternFactor::A { a } => Step::A(value(a)),
                    PatternFactor::B { b, c, placement } => Step::B {
                        b: value(b),
                        c: c.as_ref().map(&mut value),
                        placement: *placement,
                    },
                })
                .collect(),
            Pattern::CommutatorFree { stages } => {
                if model != Model::NonautonomousK1 {
                    return Err(OrderError::ModelMismatch {
                        model,
                        what: "a commutator-free pattern (only nonautonomous-k1 applies)",
                    });
                }
                stages
                    .iter()
                    .map(|(a, c)| {
                        let a = value(a);
                        Step::Stage(a, value(c))
                    })
                    .collect()
            }
        };
        let alphabet = model.alphabet();
        let words = enumerate_words(&alphabet, order)?;
        let table = WordTable::new(&words, alphabet.len());
        let exact_series = exact_series(model, order)?;
        let exact = words
            .iter()
            .map(|w| crate::schemes::rational_to_f64(&exact_series.coefficient(w)))
            .collect();
        let factorials = words[1..]
            .iter()
            .map(|w| (1..=w.degree()).map(f64::from).product())
            .collect();
        let mut double_commutator = Vec::new();
        if model == Model::Autonomous && order >= 3 {
            for (letters, c) in [([1u8, 1, 0], 1.0), ([1, 0, 1], -2.0), ([0, 1, 1], 1.0)] {
                let w = alphabet.word_from_letters(letters.to_vec());
                let id = words.iter().position(|x| *x == w).expect("degree 3 present");
                double_commutator.push((id, c));
            }
        }
        Ok(Self {
            model,
            order,
            free,
            steps,
            table,
            exact,
            double_commutator,
            factorials,
        })
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Number of residual entries (words of degree `1..=order`).
    pub fn len(&self) -> usize {
        self.table.n - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `exp(coef·L)`; same arithmetic as `exp_sparse` on a single letter.
    fn letter_exp(&self, letter: usize, coef: f64) -> Vec<(usize, f64)> {
        let mut out = vec![(0, 1.0)];
        let mut term = 1.0;
        for (j, &id) in self.table.powers[letter].iter().enumerate() {
            term = term * coef / (j + 1) as f64;
            if term == 0.0 {
                break;
            }
            out.push((id as usize, term));
        }
        out
    }

    fn series(&self, x: &[f64]) -> Vec<f64> {
        let t = &self.table;
        let mut acc = t.one();
        if t.n == 1 {
            return acc;
        }
        match self.model {
            Model::Autonomous => {
                for step in self.steps.iter().rev() {
                    match *step {
                        Step::A(a) => acc = t.mul_sparse_right(&acc, &self.letter_exp(0, a.get(x))),
                        Step::B { b, c, placement } => {
                            let b = b.get(x);
                            let c = c.map_or(0.0, |c| c.get(x));
                            if c == 0.0 || self.double_commutator.is_empty() {
                                acc = t.mul_sparse_right(&acc, &self.letter_exp(1, b));
                                continue;
                            }
                            let scaled: Vec<(usize, f64)> =
                                self.double_commutator.iter().map(|&(w, k)| (w, k * c)).collect();
                            match placement {
                                Placement::Combined => {
                                    let mut exponent = scaled;
                                    exponent.push((t.letter[1] as usize, b));
                                    exponent.retain(|&(_, v)| v != 0.0);
                                    acc = t.mul_sparse_right(&acc, &t.exp_sparse(&exponent));
                                }
                                Placement::Separate => {
                                    acc = t.mul_sparse_right(&acc, &self.letter_exp(1, b));
                                    acc = t.mul_sparse_right(&acc, &t.exp_sparse(&scaled));
                                }
                            }
                        }
                        Step::Stage(..) => unreachable!("checked in new"),
                    }
                }
            }
            Model::NonautonomousK1 | Model::NonautonomousK2 => {
                let k2 = self.model == Model::NonautonomousK2;
                let mut shift = 0.0;
                for step in self.steps.iter().rev() {
                    match *step {
                        Step::A(a) => {
                            let a = a.get(x);
                            let mut exponent = vec![
                                (t.letter[0] as usize, a),
                                (t.letter[1] as usize, a * shift),
                            ];
                            if k2 {
                                exponent.push((t.letter[2] as usize, a * shift * shift));
                            }
                            exponent.retain(|&(w, c)| w != NONE as usize && c != 0.0);
                            acc = t.mul_sparse_left(&t.exp_sparse(&exponent), &acc);
                        }
                        Step::B { b, c, .. } => {
                            if let (true, Some(c)) = (k2, c) {
                                let c = c.get(x);
                                if c != 0.0 && t.letter[2] != NONE {
                                    acc = t.mul_sparse_left(&self.letter_exp(2, 2.0 * c), &acc);
                                }
                            }
                            shift += b.get(x);
                        }
                        Step::Stage(a, c) => {
                            let mut exponent =
                                vec![(t.letter[0] as usize, a.get(x)), (t.letter[1] as usize, c.get(x))];
                            exponent.retain(|&(w, c)| w != NONE as usize && c != 0.0);
                            acc = t.mul_sparse_left(&t.exp_sparse(&exponent), &acc);
                        }
                    }
                }
            }
        }
        acc
    }

    /// Residual at slot values `x` (one per free slot), ordered as
    /// [`residual_words`].
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.free, "free slot count");
        let s = self.series(x);
        s.iter().zip(&self.exact).skip(1).map(|(a, b)| a - b).collect()
    }

    /// Squared Euclidean norm of [`ResidualKernel::eval`].
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        self.eval(x).iter().map(|r| r * r).sum()
    }

    /// Residual with each degree-`n` entry multiplied by `n!`, i.e. relative
    /// to the exact coefficient of a word of that degree.
    pub fn eval_relative(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.eval(x);
        for (v, f) in r.iter_mut().zip(&self.factorials) {
            *v *= f;
        }
        r
    }

    pub fn norm_sq_relative(&self, x: &[f64]) -> f64 {
        self.eval_relative(x).iter().map(|r| r * r).sum()
    }

    pub fn words(&self) -> Result<Vec<Word>, OrderError> {
        residual_words(self.model, self.order)
    }
}
