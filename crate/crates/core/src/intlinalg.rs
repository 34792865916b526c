//! Exact integer linear algebra: Smith normal form and classification of
//! the integer solution set of `A x = b`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            entries.extend(row.iter().cloned().map(Into::into));
        }
        Ok(IntegerMatrix {
            rows: r,
            cols: c,
            entries,
        })
    }

    /// Builds an `rows × cols` matrix, for use when `cols` matters even with no rows.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        IntegerMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(IntegerMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|t| &self[(i, t)] * &other[(t, j)]).sum()
        }))
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * q;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * q;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }
}

impl Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            write!(f, "[{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, `d_i | d_{i+1}`, `d_i ≥ 0`.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.d.diagonal().iter().take_while(|x| !x.is_zero()).count()
    }
}

pub fn smith_normal_form(a: &IntegerMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut v = IntegerMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = find_pivot(&d, t) else {
                return SmithForm { u, d, v };
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let pivot = d[(t, t)].clone();
            let mut dirty = false;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&pivot);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                dirty |= !d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&pivot);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                dirty |= !d[(t, j)].is_zero();
            }
            if dirty {
                continue;
            }
            // divisibility: fold an offending row into row t and go again
            let offending = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&pivot)));
            match offending {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { u, d, v }
}

/// Smallest nonzero absolute value in the lower-right block, ties by row-major position.
fn find_pivot(d: &IntegerMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows {
        for j in t..d.cols {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if d[(bi, bj)].abs() <= x.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolutionSet {
    NoSolution,
    Unique {
        #[serde(serialize_with = "ser_vec")]
        x: Vec<BigInt>,
    },
    Infinite {
        #[serde(serialize_with = "ser_vec")]
        particular: Vec<BigInt>,
        #[serde(serialize_with = "ser_vecs")]
        lattice: Vec<Vec<BigInt>>,
    },
}

pub(crate) fn ser_vec<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

pub(crate) fn ser_bigint<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

fn ser_vecs<S: serde::Serializer>(v: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    serde::Serialize::serialize(&strs, s)
}

impl SolutionSet {
    pub fn is_unique(&self) -> bool {
        matches!(self, SolutionSet::Unique { .. })
    }
}

/// Pivot rows and columns of a fraction-free row echelon form of `a`.
fn rank_profile(a: &IntegerMatrix) -> (Vec<usize>, Vec<usize>) {
    let (m, n) = (a.rows, a.cols);
    let mut rows: Vec<Vec<BigInt>> = (0..m).map(|i| a.row(i).to_vec()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let mut prev = BigInt::one();
    let (mut prow, mut pcol) = (Vec::new(), Vec::new());
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        order.swap(r, p);
        let (top, rest) = rows.split_at_mut(r + 1);
        let pivot = &top[r];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[c]);
            for j in c + 1..n {
                let v = &pivot[c] * &row[j] - &lead * &pivot[j];
                row[j] = v / &prev;
            }
        }
        prev = top[r][c].clone();
        prow.push(order[r]);
        pcol.push(c);
        r += 1;
    }
    (prow, pcol)
}

/// `(d, R)` with `B R = d I` and `d = ±det B`, for nonsingular square `B`.
fn scaled_inverse(b: &IntegerMatrix) -> (BigInt, IntegerMatrix) {
    let n = b.rows;
    let mut aug: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = b.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&i| !aug[i][k].is_zero()).expect("nonsingular block");
        aug.swap(k, p);
        let pivot = aug[k].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let lead = std::mem::take(&mut row[k]);
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let v = &pivot[k] * &row[j] - &lead * &pivot[j];
                row[j] = v / &prev;
            }
        }
        prev = pivot[k].clone();
    }
    let r = IntegerMatrix::from_fn(n, n, |i, j| aug[i][n + j].clone());
    (prev, r)
}

/// `A` prepared for repeated solves of `A x = b`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: IntegerMatrix,
    method: Method,
}

#[derive(Debug, Clone)]
enum Method {
    /// Full column rank: `rows` select a nonsingular block `B` with `B R = d I`.
    Injective { rows: Vec<usize>, d: BigInt, r: IntegerMatrix },
    Smith(SmithForm),
}

impl LinearSystem {
    pub fn new(a: &IntegerMatrix) -> Self {
        let (prow, _) = rank_profile(a);
        let method = if prow.len() == a.cols {
            let b = IntegerMatrix::from_fn(a.cols, a.cols, |i, j| a[(prow[i], j)].clone());
            let (d, r) = scaled_inverse(&b);
            Method::Injective { rows: prow, d, r }
        } else {
            Method::Smith(smith_normal_form(a))
        };
        LinearSystem { a: a.clone(), method }
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.a
    }

    /// Rank of the matrix.
    pub fn rank(&self) -> usize {
        match &self.method {
            Method::Injective { rows, .. } => rows.len(),
            Method::Smith(s) => s.rank(),
        }
    }

    pub fn solve(&self, b: &[BigInt]) -> Result<SolutionSet> {
        let a = &self.a;
        if b.len() != a.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                a.rows
            )));
        }
        match &self.method {
            Method::Injective { rows, d, r } => {
                let picked: Vec<BigInt> = rows.iter().map(|&i| b[i].clone()).collect();
                let mut x = Vec::with_capacity(a.cols);
                for y in r.mul_vec(&picked)? {
                    let (q, rem) = y.div_rem(d);
                    if !rem.is_zero() {
                        return Ok(SolutionSet::NoSolution);
                    }
                    x.push(q);
                }
                // rows outside the block may still be violated
                if a.mul_vec(&x)? != b {
                    return Ok(SolutionSet::NoSolution);
                }
                Ok(SolutionSet::Unique { x })
            }
            Method::Smith(snf) => solve_with_smith(a, snf, b),
        }
    }
}

pub fn solve_linear(a: &IntegerMatrix, b: &[BigInt]) -> Result<SolutionSet> {
    LinearSystem::new(a).solve(b)
}

fn solve_with_smith(a: &IntegerMatrix, snf: &SmithForm, b: &[BigInt]) -> Result<SolutionSet> {
    let r = snf.rank();
    let c = snf.u.mul_vec(b)?;
    let mut y = vec![BigInt::zero(); a.cols];
    for i in 0..a.rows {
        if i < r {
            let (q, rem) = c[i].div_rem(&snf.d[(i, i)]);
            if !rem.is_zero() {
                return Ok(SolutionSet::NoSolution);
            }
            y[i] = q;
        } else if !c[i].is_zero() {
            return Ok(SolutionSet::NoSolution);
        }
    }
    let x = snf.v.mul_vec(&y)?;
    if r == a.cols {
        return Ok(SolutionSet::Unique { x });
    }
    let lattice = (r..a.cols)
        .map(|j| (0..a.cols).map(|i| snf.v[(i, j)].clone()).collect())
        .collect();
    Ok(SolutionSet::Infinite { particular: x, lattice })
}
