//! Exact dense matrices over ℚ(i) with fraction-free (Bareiss) elimination.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::GaussianRational;

#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussianRational>,
}

/// Row echelon form produced by fraction-free elimination.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: ExactMatrix,
    /// `(row, column)` of every pivot, in order.
    pub pivots: Vec<(usize, usize)>,
    /// Parity of the row permutation applied.
    pub swaps_odd: bool,
    /// Product of the row scalings used to clear denominators.
    pub row_scale: GaussianRational,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![GaussianRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GaussianRational::one());
        }
        m
    }

    /// Builds from row vectors of equal length `cols`.
    pub fn from_rows(rows: Vec<Vec<GaussianRational>>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let n = rows.len();
        Ok(Self { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussianRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: GaussianRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[GaussianRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul_vec(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(GaussianRational::zero(), |acc, (a, b)| &acc + &(a * b))
            })
            .collect()
    }

    pub fn mul(&self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = ExactMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut s = GaussianRational::zero();
                for k in 0..self.cols {
                    s += &(self.get(i, k) * rhs.get(k, j));
                }
                out.set(i, j, s);
            }
        }
        out
    }

    /// Fraction-free elimination. Each row is first scaled to Gaussian-integer
    /// entries; every subsequent division is exact in ℤ[i].
    pub fn echelon(&self) -> Echelon {
        let mut a = self.clone();
        let mut row_scale = GaussianRational::one();
        for i in 0..a.rows {
            let l = a.row(i).iter().fold(BigInt::one(), |acc, x| {
                use num_integer::Integer;
                acc.lcm(&x.denominator_lcm())
            });
            if !l.is_one() {
                let s = BigRational::from_integer(l);
                for j in 0..a.cols {
                    let v = a.get(i, j).scale(&s);
                    a.set(i, j, v);
                }
                row_scale = row_scale.scale(&s);
            }
        }

        let mut pivots = Vec::new();
        let mut prev = GaussianRational::one();
        let mut swaps_odd = false;
        let mut pr = 0;
        for pc in 0..a.cols {
            if pr == a.rows {
                break;
            }
            let Some(sel) = (pr..a.rows).find(|&i| !a.get(i, pc).is_zero()) else {
                continue;
            };
            if sel != pr {
                for j in 0..a.cols {
                    a.data.swap(sel * a.cols + j, pr * a.cols + j);
                }
                swaps_odd = !swaps_odd;
            }
            let piv = a.get(pr, pc).clone();
            for i in pr + 1..a.rows {
                let lead = a.get(i, pc).clone();
                for j in pc + 1..a.cols {
                    let num = &(&piv * a.get(i, j)) - &(&lead * a.get(pr, j));
                    let v = &num / &prev;
                    debug_assert!(v.is_gaussian_integer(), "Bareiss division not exact");
                    a.set(i, j, v);
                }
                a.set(i, pc, GaussianRational::zero());
            }
            prev = piv;
            pivots.push((pr, pc));
            pr += 1;
        }
        Echelon { matrix: a, pivots, swaps_odd, row_scale }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Exact basis of the right kernel. Each basis vector has a single 1 in
    /// one free column and zeros in the other free columns.
    pub fn kernel(&self) -> Vec<Vec<GaussianRational>> {
        let ech = self.echelon();
        let m = &ech.matrix;
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![GaussianRational::zero(); self.cols];
                x[f] = GaussianRational::one();
                for &(r, c) in ech.pivots.iter().rev() {
                    let mut s = GaussianRational::zero();
                    for j in c + 1..self.cols {
                        if !x[j].is_zero() {
                            s += &(m.get(r, j) * &x[j]);
                        }
                    }
                    x[c] = -&(&s / m.get(r, c));
                }
                x
            })
            .collect()
    }

    /// Exact determinant of a square matrix.
    pub fn det(&self) -> Result<GaussianRational> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok(GaussianRational::one());
        }
        let ech = self.echelon();
        if ech.pivots.len() < self.rows {
            return Ok(GaussianRational::zero());
        }
        // the last Bareiss pivot is det of the row-scaled, row-permuted matrix
        let mut d = ech.matrix.get(self.rows - 1, self.cols - 1).clone();
        if ech.swaps_odd {
            d = -d;
        }
        Ok(&d / &ech.row_scale)
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}
