//! Scheme shapes with open coefficient slots, for residual evaluation and
//! coefficient search.

use serde::Serialize;

use super::{CfScheme, CfStage, Coefficient, Factor, Method, Placement, Scheme, SchemeError};

#[derive(Debug, Clone, PartialEq)]
pub enum Slot {
    Free,
    Fixed(Coefficient),
}

/// What a free slot multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRole {
    /// `a_j` of an A flow
    FlowA,
    /// `b_j` of a B flow
    FlowB,
    /// `c_j` on `[B,[B,A]]`
    Commutator,
    /// `a_j` of a commutator-free stage (multiplies H0)
    StageA,
    /// `c_j` of a commutator-free stage (multiplies H1)
    StageC,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternFactor {
    A { a: Slot },
    B {
        b: Slot,
        c: Option<Slot>,
        placement: Placement,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    /// Factor list, last acts first (as for [`Scheme`]).
    Splitting { factors: Vec<PatternFactor> },
    /// `(a, c)` stages, last acts first (as for [`CfScheme`]).
    CommutatorFree { stages: Vec<(Slot, Slot)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotInfo {
    pub label: String,
    pub role: SlotRole,
}

impl Pattern {
    /// `e^{b_s B} e^{a_s A} ⋯ e^{b_1 B} e^{a_1 A}` with every slot free.
    pub fn classical(stages: usize) -> Self {
        let mut factors = Vec::with_capacity(2 * stages);
        for _ in 0..stages {
            factors.push(PatternFactor::B {
                b: Slot::Free,
                c: None,
                placement: Placement::Combined,
            });
            factors.push(PatternFactor::A { a: Slot::Free });
        }
        Pattern::Splitting { factors }
    }

    /// Like [`Pattern::classical`] with a free `[B,[B,A]]` coefficient on
    /// every B flow.
    pub fn generalized(stages: usize, placement: Placement) -> Self {
        let mut factors = Vec::with_capacity(2 * stages);
        for _ in 0..stages {
            factors.push(PatternFactor::B {
                b: Slot::Free,
                c: Some(Slot::Free),
                placement,
            });
            factors.push(PatternFactor::A { a: Slot::Free });
        }
        Pattern::Splitting { factors }
    }

    /// `B A B' A B` with the commutator term only on the middle B flow.
    pub fn chin_shape() -> Self {
        let plain = || PatternFactor::B {
            b: Slot::Free,
            c: None,
            placement: Placement::Combined,
        };
        Pattern::Splitting {
            factors: vec![
                plain(),
                PatternFactor::A { a: Slot::Free },
                PatternFactor::B {
                    b: Slot::Free,
                    c: Some(Slot::Free),
                    placement: Placement::Combined,
                },
                PatternFactor::A { a: Slot::Free },
                plain(),
            ],
        }
    }

    /// Pattern from factor letters in printed order: `A`, `B`, and `G` for a
    /// B flow with a commutator slot. A string of `E`s gives commutator-free
    /// stages.
    pub fn from_shape(shape: &str, placement: Placement) -> Result<Self, SchemeError> {
        let bad = || SchemeError::BadShape(shape.to_string());
        if shape.is_empty() {
            return Err(bad());
        }
        if shape.chars().all(|c| c == 'E') {
            return Ok(Pattern::commutator_free(shape.len()));
        }
        let factors = shape
            .chars()
            .map(|ch| match ch {
                'A' => Ok(PatternFactor::A { a: Slot::Free }),
                'B' | 'G' => Ok(PatternFactor::B {
                    b: Slot::Free,
                    c: (ch == 'G').then_some(Slot::Free),
                    placement,
                }),
                _ => Err(bad()),
            })
            .collect::<Result<_, _>>()?;
        Ok(Pattern::Splitting { factors })
    }

    pub fn commutator_free(stages: usize) -> Self {
        Pattern::CommutatorFree {
            stages: vec![(Slot::Free, Slot::Free); stages],
        }
    }

    fn slots_mut(&mut self) -> Vec<&mut Slot> {
        match self {
            Pattern::Splitting { factors } => factors
                .iter_mut()
                .flat_map(|f| match f {
                    PatternFactor::A { a } => vec![a],
                    PatternFactor::B { b, c, .. } => {
                        let mut v = vec![b];
                        if let Some(c) = c {
                            v.push(c);
                        }
                        v
                    }
                })
                .collect(),
            Pattern::CommutatorFree { stages } => {
                stages.iter_mut().flat_map(|(a, c)| [a, c]).collect()
            }
        }
    }

    /// Pins the `index`-th free slot (in [`Pattern::free_slots`] order).
    pub fn fix(mut self, index: usize, value: Coefficient) -> Self {
        let slot = self
            .slots_mut()
            .into_iter()
            .filter(|s| **s == Slot::Free)
            .nth(index)
            .expect("free slot index in range");
        *slot = Slot::Fixed(value);
        self
    }

    /// All slots in list order with labels; `a_j`/`b_j`/`c_j` are numbered in
    /// application order, so `a1` is the first flow to act.
    fn all_slots(&self) -> Vec<(SlotInfo, &Slot)> {
        let mut out = Vec::new();
        match self {
            Pattern::Splitting { factors } => {
                let n_a = factors.iter().filter(|f| matches!(f, PatternFactor::A { .. })).count();
                let n_b = factors.len() - n_a;
                let (mut ia, mut ib) = (n_a, n_b);
                for f in factors {
                    match f {
                        PatternFactor::A { a } => {
                            out.push((info(format!("a{ia}"), SlotRole::FlowA), a));
                            ia -= 1;
                        }
                        PatternFactor::B { b, c, .. } => {
                            out.push((info(format!("b{ib}"), SlotRole::FlowB), b));
                            if let Some(c) = c {
                                out.push((info(format!("c{ib}"), SlotRole::Commutator), c));
                            }
                            ib -= 1;
                        }
                    }
                }
            }
            Pattern::CommutatorFree { stages } => {
                let n = stages.len();
                for (i, (a, c)) in stages.iter().enumerate() {
                    let j = n - i;
                    out.push((info(format!("a{j}"), SlotRole::StageA), a));
                    out.push((info(format!("c{j}"), SlotRole::StageC), c));
                }
            }
        }
        out
    }

    pub fn free_slots(&self) -> Vec<SlotInfo> {
        self.all_slots()
            .into_iter()
            .filter(|(_, s)| **s == Slot::Free)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn free_count(&self) -> usize {
        self.free_slots().len()
    }

    /// Compact description such as `B(b2) A(a2) B(b1=1) A(a1)`.
    pub fn describe(&self) -> String {
        let slots = self.all_slots();
        let mut it = slots.iter();
        let fmt_slot = |(info, slot): &(SlotInfo, &Slot)| match slot {
            Slot::Free => info.label.clone(),
            Slot::Fixed(v) => format!("{}={v}", info.label),
        };
        let mut parts = Vec::new();
        match self {
            Pattern::Splitting { factors } => {
                for f in factors {
                    match f {
                        PatternFactor::A { .. } => {
                            parts.push(format!("A({})", fmt_slot(it.next().unwrap())))
                        }
                        PatternFactor::B { c, placement, .. } => {
                            let b = fmt_slot(it.next().unwrap());
                            match c {
                                None => parts.push(format!("B({b})")),
                                Some(_) => {
                                    let c = fmt_slot(it.next().unwrap());
                                    let tag = match placement {
                                        Placement::Combined => "",
                                        Placement::Separate => ";sep",
                                    };
                                    parts.push(format!("B({b},{c}{tag})"))
                                }
                            }
                        }
                    }
                }
            }
            Pattern::CommutatorFree { stages } => {
                for _ in stages {
                    let a = fmt_slot(it.next().unwrap());
                    let c = fmt_slot(it.next().unwrap());
                    parts.push(format!("E({a},{c})"));
                }
            }
        }
        parts.join(" ")
    }

    /// Fills the free slots, in [`Pattern::free_slots`] order.
    pub fn instantiate(&self, values: &[Coefficient]) -> Result<Method, SchemeError> {
        let expected = self.free_count();
        if values.len() != expected {
            return Err(SchemeError::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        let mut next = values.iter();
        let mut fill = |slot: &Slot| match slot {
            Slot::Free => next.next().expect("counted").clone(),
            Slot::Fixed(v) => v.clone(),
        };
        match self {
            Pattern::Splitting { factors } => {
                let factors = factors
                    .iter()
                    .map(|f| match f {
                        PatternFactor::A { a } => Factor::a(fill(a)),
                        PatternFactor::B { b, c, placement } => {
                            let b = fill(b);
                            let c = c.as_ref().map_or_else(Coefficient::zero, &mut fill);
                            Factor::b_generalized(b, c, *placement)
                        }
                    })
                    .collect();
                Ok(Method::Splitting(Scheme::new("pattern", factors, None)?))
            }
            Pattern::CommutatorFree { stages } => {
                let stages = stages
                    .iter()
                    .map(|(a, c)| {
                        let a = fill(a);
                        CfStage::new(a, fill(c))
                    })
                    .collect();
                Ok(Method::CommutatorFree(CfScheme::new(stages)?))
            }
        }
    }
}

fn info(label: String, role: SlotRole) -> SlotInfo {
    SlotInfo { label, role }
}
