use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A method coefficient: exact when written as a fraction or integer,
/// a binary float otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Exact(BigRational),
    Float(f64),
}

impl Coefficient {
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Coefficient::Exact(BigRational::new(numer.into(), denom.into()))
    }

    pub fn integer(n: i64) -> Self {
        Coefficient::Exact(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Coefficient::integer(0)
    }

    pub fn one() -> Self {
        Coefficient::integer(1)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Exact(q) => q.is_zero(),
            Coefficient::Float(x) => *x == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coefficient::Exact(_))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Coefficient::Exact(_) => true,
            Coefficient::Float(x) => x.is_finite(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Exact(q) => rational_to_f64(q),
            Coefficient::Float(x) => *x,
        }
    }

    /// Exact value; floats convert through their binary representation.
    /// `None` for non-finite floats.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Coefficient::Exact(q) => Some(q.clone()),
            Coefficient::Float(x) => BigRational::from_float(*x),
        }
    }

    /// Parses `p/q`, an integer, or a decimal literal (the latter as a float).
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| format!("invalid numerator in {t:?}"))?;
            let d: BigInt = d
                .trim()
                .parse()
                .map_err(|_| format!("invalid denominator in {t:?}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {t:?}"));
            }
            return Ok(Coefficient::Exact(BigRational::new(n, d)));
        }
        if let Ok(n) = t.parse::<BigInt>() {
            return Ok(Coefficient::Exact(BigRational::from_integer(n)));
        }
        t.parse::<f64>()
            .map(Coefficient::Float)
            .map_err(|_| format!("invalid coefficient {t:?}"))
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Exact(q) => write!(f, "{q}"),
            Coefficient::Float(x) => write!(f, "{x:?}"),
        }
    }
}

impl From<f64> for Coefficient {
    fn from(x: f64) -> Self {
        Coefficient::Float(x)
    }
}

impl From<BigRational> for Coefficient {
    fn from(q: BigRational) -> Self {
        Coefficient::Exact(q)
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        match (self, rhs) {
            (Coefficient::Exact(x), Coefficient::Exact(y)) => Coefficient::Exact(x + y),
            _ => Coefficient::Float(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        match (self, rhs) {
            (Coefficient::Exact(x), Coefficient::Exact(y)) => Coefficient::Exact(x * y),
            _ => Coefficient::Float(self.to_f64() * rhs.to_f64()),
        }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        match self {
            Coefficient::Exact(x) => Coefficient::Exact(-x),
            Coefficient::Float(x) => Coefficient::Float(-x),
        }
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // huge numerators/denominators: shift both down before dividing
    let bits = q.numer().bits().max(q.denom().bits()) as i64;
    let shift = (bits - 900).max(0) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
    n / d
}

/// Best rational approximation of `x` with denominator at most
/// `max_denominator`, from the continued-fraction convergents and their
/// semiconvergents.
pub fn rationalize(x: f64, max_denominator: u64) -> BigRational {
    if !x.is_finite() {
        return BigRational::zero();
    }
    let target = BigRational::from_float(x).expect("finite");
    let negative = target.is_negative();
    let mut rest = target.abs();
    // convergents p/q
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let bound = BigInt::from(max_denominator.max(1));
    let abs_target = target.abs();
    let mut best = BigRational::from_integer(abs_target.floor().to_integer());
    loop {
        let a = rest.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > bound {
            // largest admissible semiconvergent
            let k = (&bound - &q0) / &q1;
            if k > BigInt::zero() {
                let semi = BigRational::new(&k * &p1 + &p0, &k * &q1 + &q0);
                let conv = BigRational::new(p1.clone(), q1.clone());
                best = if (&semi - &abs_target).abs() < (&conv - &abs_target).abs() {
                    semi
                } else {
                    conv
                };
            }
            break;
        }
        best = BigRational::new(p2.clone(), q2.clone());
        let frac = &rest - BigRational::from_integer(a);
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
    }
    if negative {
        -best
    } else {
        best
    }
}
