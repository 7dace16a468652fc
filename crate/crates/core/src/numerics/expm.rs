//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13 (Higham, 2005).

use nalgebra::{ComplexField, DMatrix};

use super::NumericsError;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.clone().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, s: f64) -> DMatrix<T> {
    m.map(|x| x * T::from_real(s))
}

fn low_order<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &[f64]) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = DMatrix::<T>::identity(n, n);
    let mut u = scaled(&power, b[1]);
    let mut v = scaled(&power, b[0]);
    for k in (2..b.len()).step_by(2) {
        power = &power * &a2;
        v += scaled(&power, b[k]);
        if k + 1 < b.len() {
            u += scaled(&power, b[k + 1]);
        }
    }
    (a * u, v)
}

fn order_13<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a * (&a6 * inner_u
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]));
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = &a6 * inner_v + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    (u, v)
}

/// `e^M` for a square real or complex matrix.
pub fn expm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Result<DMatrix<T>, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.clone().abs().is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(m.clone());
    }
    let norm = norm1(m);
    let mut squarings = 0;
    let (u, v) = match THETA.iter().find(|(_, t)| norm <= *t) {
        Some((3, _)) => low_order(m, &B3),
        Some((5, _)) => low_order(m, &B5),
        Some((7, _)) => low_order(m, &B7),
        Some((9, _)) => low_order(m, &B9),
        _ => {
            if norm > THETA_13 {
                squarings = (norm / THETA_13).log2().ceil() as i32;
            }
            order_13(&scaled(m, 2f64.powi(-squarings)))
        }
    };
    let p = &v - &u;
    let q = &v + &u;
    let mut r = p.lu().solve(&q).unwrap_or_else(|| DMatrix::from_element(n, n, T::from_real(f64::NAN)));
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
