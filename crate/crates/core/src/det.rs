use nalgebra::DMatrix;

/// Determinant stored as sign and log-magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogDet {
    /// -1, 0 or +1
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedLogDet {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// LU factorisation with partial pivoting, accumulating log|u_ii| instead of
/// the raw product so long decaying Toeplitz determinants do not underflow.
pub fn signed_log_det(mut m: DMatrix<f64>) -> SignedLogDet {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[(r, col)].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs == 0.0 {
            return SignedLogDet {
                sign: 0.0,
                log_abs: f64::NEG_INFINITY,
            };
        }
        if pivot_row != col {
            m.swap_rows(pivot_row, col);
            sign = -sign;
        }
        let pivot = m[(col, col)];
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();
        for r in col + 1..n {
            let factor = m[(r, col)] / pivot;
            if factor != 0.0 {
                for c in col + 1..n {
                    let u = m[(col, c)];
                    m[(r, c)] -= factor * u;
                }
            }
        }
    }
    SignedLogDet { sign, log_abs }
}

pub fn det(m: DMatrix<f64>) -> f64 {
    signed_log_det(m).value()
}
