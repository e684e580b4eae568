//! Reverse-mode automatic differentiation over dense matrices.
//!
//! Every value on the tape is a matrix whose rows are samples. Nodes only
//! refer to earlier nodes, so the recorded graph is a DAG in creation order
//! and [`Tape::backward`] is a single reverse sweep.

use nalgebra::{DMatrix, Quaternion};

use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::projections::{gso, gso_vjp, svd_plus, svd_plus_vjp};
use crate::repr::SixD;
use crate::so3::{quat_unit_to_matrix, Mat3};

pub type Matrix = DMatrix<f64>;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Per-row maps with hand-written derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowMap {
    /// `n×6 → n×9`: Gram-Schmidt frame, flattened column-major.
    Gso,
    /// `n×9 → n×9`: SVD⁺ of each column-major 3×3 row.
    SvdPlus,
    /// `n×4 → n×4`: divide each row by its norm.
    QuatNormalize,
    /// `n×4 → n×9`: rotation matrix of the normalized quaternion.
    QuatMatrix,
}

impl RowMap {
    pub fn in_dim(self) -> usize {
        match self {
            RowMap::Gso => 6,
            RowMap::SvdPlus => 9,
            RowMap::QuatNormalize | RowMap::QuatMatrix => 4,
        }
    }

    pub fn out_dim(self) -> usize {
        match self {
            RowMap::QuatNormalize => 4,
            _ => 9,
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    AddRow(Var, Var),
    Relu(Var),
    LeakyRelu(Var, f64),
    Map(Var, RowMap),
    SumSquares(Var),
    /// Mean of a per-row metric; holds `∂loss/∂input`.
    RowLoss(Var, Matrix),
}

#[derive(Debug, Clone)]
struct Node {
    value: Matrix,
    op: Op,
}

#[derive(Debug, Default, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Grads {
    adj: Vec<Option<Matrix>>,
}

impl Grads {
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.adj.get(v.0).and_then(|a| a.as_ref())
    }

    /// Adjoint of `v`, or zeros of `shape` when `v` did not influence the root.
    pub fn get_or_zeros(&self, v: Var, shape: (usize, usize)) -> Matrix {
        self.get(v).cloned().unwrap_or_else(|| Matrix::zeros(shape.0, shape.1))
    }
}

fn shape_err(expected: (usize, usize), got: (usize, usize)) -> Error {
    Error::Shape {
        expected: format!("{}x{}", expected.0, expected.1),
        got: format!("{}x{}", got.0, got.1),
    }
}

/// `op(a)·op(b)` with optional transposes, passed to gemm as strides.
fn gemm(a: &Matrix, ta: bool, b: &Matrix, tb: bool) -> Matrix {
    let (m, k) = if ta { (a.ncols(), a.nrows()) } else { a.shape() };
    let (kb, n) = if tb { (b.ncols(), b.nrows()) } else { b.shape() };
    assert_eq!(k, kb, "gemm inner dimensions");
    let mut c = Matrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    let (rsa, csa) = if ta { (a.nrows() as isize, 1) } else { (1, a.nrows() as isize) };
    let (rsb, csb) = if tb { (b.nrows() as isize, 1) } else { (1, b.nrows() as isize) };
    // SAFETY: the strides describe the column-major buffers of `a`, `b`
    // (possibly transposed) and `c`, whose sizes match m, k, n above.
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), rsa, csa,
            b.as_ptr(), rsb, csb,
            0.0, c.as_mut_ptr(), 1, m as isize,
        );
    }
    c
}

fn row(m: &Matrix, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

fn set_row(m: &mut Matrix, i: usize, v: &[f64]) {
    for (j, x) in v.iter().enumerate() {
        m[(i, j)] = *x;
    }
}

fn quat_norm(q: &[f64]) -> Result<f64> {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 1e-12 {
        Ok(n)
    } else {
        Err(Error::ZeroLength)
    }
}

fn map_row(map: RowMap, x: &[f64]) -> Result<Vec<f64>> {
    Ok(match map {
        RowMap::Gso => {
            let s = SixD::new(
                nalgebra::Vector3::from_column_slice(&x[..3]),
                nalgebra::Vector3::from_column_slice(&x[3..]),
            );
            gso(&s)?.matrix().as_slice().to_vec()
        }
        RowMap::SvdPlus => svd_plus(&Mat3::from_column_slice(x))?.matrix().as_slice().to_vec(),
        RowMap::QuatNormalize => {
            let n = quat_norm(x)?;
            x.iter().map(|v| v / n).collect()
        }
        RowMap::QuatMatrix => {
            let n = quat_norm(x)?;
            let q = Quaternion::new(x[0] / n, x[1] / n, x[2] / n, x[3] / n);
            quat_unit_to_matrix(&q).as_slice().to_vec()
        }
    })
}

/// `∂R/∂u` for `R(u)` expanded as a quadratic in the quaternion `u = (w,x,y,z)`.
fn quat_matrix_partials(u: &[f64]) -> [Mat3; 4] {
    let (w, x, y, z) = (u[0], u[1], u[2], u[3]);
    let t = |a: [[f64; 3]; 3]| Mat3::from_fn(|i, j| 2.0 * a[i][j]);
    [
        t([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]]),
        t([[0.0, y, z], [y, -2.0 * x, -w], [z, w, -2.0 * x]]),
        t([[-2.0 * y, x, w], [x, 0.0, z], [-w, z, -2.0 * y]]),
        t([[-2.0 * z, -w, x], [w, -2.0 * z, y], [x, y, 0.0]]),
    ]
}

/// Pulls a cotangent on the unit quaternion back through `q ↦ q/‖q‖`.
fn normalize_vjp(q: &[f64], gu: &[f64]) -> Result<Vec<f64>> {
    let n = quat_norm(q)?;
    let u: Vec<f64> = q.iter().map(|v| v / n).collect();
    let ug: f64 = u.iter().zip(gu).map(|(a, b)| a * b).sum();
    Ok(gu.iter().zip(&u).map(|(g, ui)| (g - ui * ug) / n).collect())
}

fn map_row_vjp(map: RowMap, x: &[f64], cot: &[f64]) -> Result<Vec<f64>> {
    Ok(match map {
        RowMap::Gso => {
            let s = SixD::new(
                nalgebra::Vector3::from_column_slice(&x[..3]),
                nalgebra::Vector3::from_column_slice(&x[3..]),
            );
            let g = gso_vjp(&s, &Mat3::from_column_slice(cot))?;
            let mut v = g.nu1.as_slice().to_vec();
            v.extend_from_slice(g.nu2.as_slice());
            v
        }
        RowMap::SvdPlus => {
            let (g, _) = svd_plus_vjp(&Mat3::from_column_slice(x), &Mat3::from_column_slice(cot))?;
            g.as_slice().to_vec()
        }
        RowMap::QuatNormalize => normalize_vjp(x, cot)?,
        RowMap::QuatMatrix => {
            let n = quat_norm(x)?;
            let u: Vec<f64> = x.iter().map(|v| v / n).collect();
            let g = Mat3::from_column_slice(cot);
            let gu: Vec<f64> = quat_matrix_partials(&u)
                .iter()
                .map(|p| p.component_mul(&g).sum())
                .collect();
            normalize_vjp(x, &gu)?
        }
    })
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.ncols() != bv.nrows() {
            return Err(shape_err((av.ncols(), bv.ncols()), bv.shape()));
        }
        let v = gemm(av, false, bv, false);
        Ok(self.push(v, Op::MatMul(a, b)))
    }

    /// `x + 1·bᵀ`: adds the `1×c` row `b` to every row of `x`.
    pub fn add_row(&mut self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        if bv.nrows() != 1 || bv.ncols() != xv.ncols() {
            return Err(shape_err((1, xv.ncols()), bv.shape()));
        }
        let mut v = xv.clone();
        for j in 0..v.ncols() {
            v.column_mut(j).add_scalar_mut(bv[(0, j)]);
        }
        Ok(self.push(v, Op::AddRow(x, b)))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x).map(|e| if e > 0.0 { e } else { 0.0 });
        self.push(v, Op::Relu(x))
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Var {
        let v = self.value(x).map(|e| if e > 0.0 { e } else { slope * e });
        self.push(v, Op::LeakyRelu(x, slope))
    }

    pub fn map_rows(&mut self, x: Var, map: RowMap) -> Result<Var> {
        let xv = self.value(x);
        if xv.ncols() != map.in_dim() {
            return Err(shape_err((xv.nrows(), map.in_dim()), xv.shape()));
        }
        let mut out = Matrix::zeros(xv.nrows(), map.out_dim());
        for i in 0..xv.nrows() {
            set_row(&mut out, i, &map_row(map, &row(xv, i))?);
        }
        Ok(self.push(out, Op::Map(x, map)))
    }

    /// `Σ xᵢⱼ²` as a 1×1 value.
    pub fn sum_squares(&mut self, x: Var) -> Var {
        let s = self.value(x).norm_squared();
        self.push(Matrix::from_element(1, 1, s), Op::SumSquares(x))
    }

    /// Mean over rows of `metric(predᵢ, targetᵢ)`. With `pick` the target is
    /// also tried with its sign flipped and the smaller distance is kept.
    pub fn row_loss(&mut self, pred: Var, targets: &Matrix, metric: Metric, pick: bool) -> Result<Var> {
        let p = self.value(pred);
        if p.shape() != targets.shape() {
            return Err(shape_err(p.shape(), targets.shape()));
        }
        let n = p.nrows();
        if n == 0 {
            return Err(Error::Shape {
                expected: "at least one row".into(),
                got: "0 rows".into(),
            });
        }
        let mut total = 0.0;
        let mut grad = Matrix::zeros(n, p.ncols());
        for i in 0..n {
            let (pi, ti) = (row(p, i), row(targets, i));
            let (mut v, mut g) = metric.value_grad(&pi, &ti)?;
            if pick {
                let neg: Vec<f64> = ti.iter().map(|t| -t).collect();
                let (v2, g2) = metric.value_grad(&pi, &neg)?;
                if v2 < v {
                    (v, g) = (v2, g2);
                }
            }
            total += v;
            let scaled: Vec<f64> = g.iter().map(|x| x / n as f64).collect();
            set_row(&mut grad, i, &scaled);
        }
        Ok(self.push(
            Matrix::from_element(1, 1, total / n as f64),
            Op::RowLoss(pred, grad),
        ))
    }

    /// Reverse sweep from a 1×1 root.
    pub fn backward(&self, root: Var) -> Result<Grads> {
        let rv = self.value(root);
        if rv.shape() != (1, 1) {
            return Err(shape_err((1, 1), rv.shape()));
        }
        let mut adj: Vec<Option<Matrix>> = vec![None; root.0 + 1];
        adj[root.0] = Some(Matrix::from_element(1, 1, 1.0));
        for i in (0..=root.0).rev() {
            let Some(g) = adj[i].take() else { continue };
            let node = &self.nodes[i];
            let mut send = |target: Var, contrib: Matrix| -> Result<()> {
                if target.0 >= i {
                    return Err(Error::Numerical(format!(
                        "tape node {i} refers forward to node {}",
                        target.0
                    )));
                }
                match &mut adj[target.0] {
                    Some(acc) => *acc += contrib,
                    slot => *slot = Some(contrib),
                }
                Ok(())
            };
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let (av, bv) = (self.value(*a), self.value(*b));
                    send(*a, gemm(&g, false, bv, true))?;
                    send(*b, gemm(av, true, &g, false))?;
                }
                Op::AddRow(x, b) => {
                    let sums = Matrix::from_fn(1, g.ncols(), |_, j| g.column(j).sum());
                    send(*b, sums)?;
                    send(*x, g.clone())?;
                }
                Op::Relu(x) => {
                    let xv = self.value(*x);
                    let d = g.zip_map(xv, |gi, xi| if xi > 0.0 { gi } else { 0.0 });
                    send(*x, d)?;
                }
                Op::LeakyRelu(x, slope) => {
                    let xv = self.value(*x);
                    let d = g.zip_map(xv, |gi, xi| if xi > 0.0 { gi } else { slope * gi });
                    send(*x, d)?;
                }
                Op::Map(x, map) => {
                    let xv = self.value(*x);
                    let mut d = Matrix::zeros(xv.nrows(), xv.ncols());
                    for r in 0..xv.nrows() {
                        set_row(&mut d, r, &map_row_vjp(*map, &row(xv, r), &row(&g, r))?);
                    }
                    send(*x, d)?;
                }
                Op::SumSquares(x) => {
                    send(*x, self.value(*x) * (2.0 * g[(0, 0)]))?;
                }
                Op::RowLoss(x, grad) => {
                    send(*x, grad * g[(0, 0)])?;
                }
            }
            adj[i] = Some(g);
        }
        adj.resize(self.nodes.len(), None);
        Ok(Grads { adj })
    }
}
