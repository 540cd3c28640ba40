//! Dense matrix exponential by scaling and squaring with Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham, SIAM J. Matrix Anal.
//! Appl. 26, 1179 (2005)).

use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par};
use num_complex::Complex64 as C64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

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

fn mm(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::<C64>::zeros(a.nrows(), b.ncols());
    faer::linalg::matmul::matmul(out.as_mut(), Accum::Replace, a, b, C64::new(1.0, 0.0), Par::Seq);
    out
}

fn one_norm(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|c| (0..a.nrows()).map(|r| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `c0 · I + Σ c · M`.
fn combine(n: usize, c0: f64, terms: &[(f64, &Mat<C64>)]) -> Mat<C64> {
    let mut out = Mat::<C64>::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = C64::new(c0, 0.0);
    }
    for &(c, m) in terms {
        for col in 0..n {
            for row in 0..n {
                out[(row, col)] += m[(row, col)] * c;
            }
        }
    }
    out
}

fn pade_low(a: MatRef<'_, C64>, b: &[f64], powers: &[Mat<C64>]) -> (Mat<C64>, Mat<C64>) {
    // powers[k] = A^(2k + 2)
    let n = a.nrows();
    let odd: Vec<(f64, &Mat<C64>)> = (1..b.len() / 2).map(|k| (b[2 * k + 1], &powers[k - 1])).collect();
    let even: Vec<(f64, &Mat<C64>)> = (1..b.len() / 2).map(|k| (b[2 * k], &powers[k - 1])).collect();
    let u_inner = combine(n, b[1], &odd);
    let u = mm(a, u_inner.as_ref());
    let v = combine(n, b[0], &even);
    (u, v)
}

pub fn expm(a: MatRef<'_, C64>) -> Mat<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let norm = one_norm(a);
    let a2 = mm(a, a);

    let (u, v, squarings) = if let Some(&(m, _)) = THETA.iter().find(|&&(_, theta)| norm <= theta) {
        let count = (m - 1) / 2;
        let mut powers = vec![a2];
        while powers.len() < count {
            let next = mm(powers.last().unwrap().as_ref(), powers[0].as_ref());
            powers.push(next);
        }
        let b: &[f64] = match m {
            3 => &B3,
            5 => &B5,
            7 => &B7,
            _ => &B9,
        };
        let (u, v) = pade_low(a, b, &powers);
        (u, v, 0)
    } else {
        let s = if norm > THETA_13 {
            (norm / THETA_13).log2().ceil() as i32
        } else {
            0
        };
        let scale = 0.5f64.powi(s);
        let a = Mat::from_fn(n, n, |r, c| a[(r, c)] * scale);
        let a2 = Mat::from_fn(n, n, |r, c| a2[(r, c)] * (scale * scale));
        let a4 = mm(a2.as_ref(), a2.as_ref());
        let a6 = mm(a4.as_ref(), a2.as_ref());
        let b = &B13;
        let u_hi = combine(n, 0.0, &[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
        let u_hi = mm(a6.as_ref(), u_hi.as_ref());
        let u_inner = combine(n, b[1], &[(1.0, &u_hi), (b[7], &a6), (b[5], &a4), (b[3], &a2)]);
        let u = mm(a.as_ref(), u_inner.as_ref());
        let v_hi = combine(n, 0.0, &[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
        let v_hi = mm(a6.as_ref(), v_hi.as_ref());
        let v = combine(n, b[0], &[(1.0, &v_hi), (b[6], &a6), (b[4], &a4), (b[2], &a2)]);
        (u, v, s)
    };

    let p = Mat::from_fn(n, n, |r, c| v[(r, c)] + u[(r, c)]);
    let q = Mat::from_fn(n, n, |r, c| v[(r, c)] - u[(r, c)]);
    let mut x = q.partial_piv_lu().solve(p.as_ref());
    for _ in 0..squarings {
        x = mm(x.as_ref(), x.as_ref());
    }
    x
}
