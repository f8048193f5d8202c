//! Derivation of the normalized skew-symmetrizer of an integer matrix.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{MatrixError, Result};

/// Computes `d` with `d[i]·b[i][j] = −d[j]·b[j][i]`, normalized so that the
/// entries of each connected component of the support graph have gcd 1.
///
/// `b` is row-major with side `size`. Sign-coherence and the zero diagonal are
/// checked first; cycle inconsistencies surface in the final global check.
pub(crate) fn skew_symmetrizer(size: usize, b: &[i64]) -> Result<Vec<i64>> {
    let at = |i: usize, j: usize| b[i * size + j];
    for i in 0..size {
        if at(i, i) != 0 {
            return Err(MatrixError::NotSkewSymmetrizable(format!(
                "diagonal entry b[{0}][{0}] = {1} is nonzero",
                i + 1,
                at(i, i)
            )));
        }
        for j in (i + 1)..size {
            let (x, y) = (at(i, j), at(j, i));
            if x.signum() != -y.signum() {
                return Err(MatrixError::NotSkewSymmetrizable(format!(
                    "sign-coherence fails at ({}, {}): {} vs {}",
                    i + 1,
                    j + 1,
                    x,
                    y
                )));
            }
        }
    }

    let mut ratio: Vec<Option<Ratio<i128>>> = vec![None; size];
    let mut component = vec![usize::MAX; size];
    let mut components = 0;
    for root in 0..size {
        if ratio[root].is_some() {
            continue;
        }
        ratio[root] = Some(Ratio::from_integer(1));
        component[root] = components;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let di = ratio[i].expect("visited");
            for j in 0..size {
                if j == i || at(i, j) == 0 || ratio[j].is_some() {
                    continue;
                }
                // d[j]·|b[j][i]| = d[i]·|b[i][j]|
                let dj = di * Ratio::new(at(i, j).unsigned_abs() as i128, at(j, i).unsigned_abs() as i128);
                ratio[j] = Some(dj);
                component[j] = components;
                stack.push(j);
            }
        }
        components += 1;
    }

    let mut d = vec![0i64; size];
    for c in 0..components {
        let members: Vec<usize> = (0..size).filter(|&i| component[i] == c).collect();
        let lcm = members
            .iter()
            .fold(1i128, |acc, &i| acc.lcm(ratio[i].expect("assigned").denom()));
        let scaled: Vec<i128> = members
            .iter()
            .map(|&i| {
                let r = ratio[i].expect("assigned") * lcm;
                r.to_integer()
            })
            .collect();
        let g = scaled.iter().fold(0i128, |acc, &x| acc.gcd(&x));
        for (&i, &x) in members.iter().zip(&scaled) {
            d[i] = i64::try_from(x / g).map_err(|_| {
                MatrixError::NotSkewSymmetrizable("skew-symmetrizer does not fit in 64 bits".into())
            })?;
        }
    }

    for i in 0..size {
        for j in (i + 1)..size {
            let lhs = d[i] as i128 * at(i, j) as i128;
            let rhs = -(d[j] as i128) * at(j, i) as i128;
            if lhs != rhs {
                return Err(MatrixError::NotSkewSymmetrizable(format!(
                    "no positive rescaling balances the cycle through ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(d)
}
