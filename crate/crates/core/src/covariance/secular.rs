//! Smallest eigenvalue of `diag(d) + c·uuᵀ` from the secular equation
//!
//! ```text
//! f(λ) = 1 + c Σᵢ uᵢ² / (dᵢ − λ) = 0
//! ```
//!
//! Components with `uᵢ = 0` are eigenvectors `eᵢ` with eigenvalue `dᵢ` and are
//! split off. Repeated diagonal values among the remaining components leave
//! that value as an eigenvalue of multiplicity `m − 1`. What remains has at
//! most one secular root below the smallest pole (`c < 0`) or one between the
//! two smallest poles (`c > 0`), which is bracketed and bisected to full
//! working precision.

use crate::error::{check_dim, Error, Result};
use crate::Scalar;

const MAX_BISECTIONS: usize = 400;

/// `λ_min(diag(d) + c·uuᵀ)`. The diagonal may have any sign.
pub fn min_eig_diag_plus_rank1<T: Scalar>(d: &[T], c: T, u: &[T]) -> Result<T> {
    check_dim(d.len(), u.len())?;
    if d.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if !c.is_finite() || d.iter().chain(u).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input to eigenvalue solver".into()));
    }

    let mut decoupled = T::infinity();
    let mut pole = T::infinity();
    let mut pole_mult = 0usize;
    let mut weight_sum = T::zero();
    for (&di, &ui) in d.iter().zip(u) {
        if ui == T::zero() || c == T::zero() {
            decoupled = decoupled.min(di);
            continue;
        }
        weight_sum += ui * ui;
        if di < pole {
            pole = di;
            pole_mult = 1;
        } else if di == pole {
            pole_mult += 1;
        }
    }
    if pole_mult == 0 {
        return Ok(decoupled);
    }

    let secular = |lambda: T| -> T {
        let mut s = T::zero();
        for (&di, &ui) in d.iter().zip(u) {
            if ui != T::zero() {
                s += ui * ui / (di - lambda);
            }
        }
        T::one() + c * s
    };

    let root = if c > T::zero() {
        if pole_mult >= 2 {
            pole
        } else {
            let next_pole = d
                .iter()
                .zip(u)
                .filter(|&(&di, &ui)| ui != T::zero() && di > pole)
                .fold(T::infinity(), |m, (&di, _)| m.min(di));
            let hi = next_pole.min(pole + c * weight_sum);
            // f rises from −∞ just above the pole to ≥ 0 at `hi`
            bisect(pole, hi, |l| secular(l) < T::zero())
        }
    } else {
        let lo = pole + c * weight_sum;
        // f falls from ≥ 0 at `lo` to −∞ just below the pole
        bisect(lo, pole, |l| secular(l) > T::zero())
    };
    Ok(root.min(decoupled))
}

/// Shrinks `[lo, hi]` keeping the root inside; `go_right(mid)` is true when the
/// root lies above `mid`.
fn bisect<T: Scalar>(mut lo: T, mut hi: T, go_right: impl Fn(T) -> bool) -> T {
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if go_right(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * T::lit(0.5)
}
