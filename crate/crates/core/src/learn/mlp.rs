//! Fully connected networks `h(x; θ)` with a representation head.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tape::{Matrix, Tape, Var};
use crate::error::{Error, Result};
use crate::repr::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
}

impl Activation {
    fn tag(self) -> String {
        match self {
            Activation::Relu => "relu".into(),
            Activation::LeakyRelu(s) => format!("leaky_relu:{}", fmt_f64(s)),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        if s == "relu" {
            return Ok(Activation::Relu);
        }
        if let Some(v) = s.strip_prefix("leaky_relu:") {
            if let Ok(slope) = v.parse() {
                return Ok(Activation::LeakyRelu(slope));
            }
        }
        Err(Error::Parse {
            line: 0,
            msg: format!("unknown activation `{s}`"),
        })
    }
}

/// One affine map `x W + b`; `w` is `in × out`, `b` is `1 × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Matrix,
    pub b: Matrix,
}

/// Multi-layer perceptron; the activation follows every layer but the last.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    activation: Activation,
    head: String,
}

/// Parameter handles of one forward pass, in layer order.
#[derive(Debug, Clone)]
pub struct Forward {
    pub params: Vec<(Var, Var)>,
    pub output: Var,
}

impl Mlp {
    /// Xavier-uniform weights and zero biases, drawn from `seed`.
    pub fn new(widths: &[usize], head: &str, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::build(widths, head, |fan_in, fan_out| {
            let a = (6.0 / (fan_in + fan_out).max(1) as f64).sqrt();
            Matrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-a..=a))
        })
    }

    pub fn zeros(widths: &[usize], head: &str) -> Result<Self> {
        Self::build(widths, head, Matrix::zeros)
    }

    fn build(widths: &[usize], head: &str, mut init: impl FnMut(usize, usize) -> Matrix) -> Result<Self> {
        if widths.len() < 2 || widths[0] == 0 || widths[widths.len() - 1] == 0 {
            return Err(Error::Shape {
                expected: "at least input and output widths, both nonzero".into(),
                got: format!("{widths:?}"),
            });
        }
        let layers = widths
            .windows(2)
            .map(|p| Layer {
                w: init(p[0], p[1]),
                b: Matrix::zeros(1, p[1]),
            })
            .collect();
        Ok(Mlp {
            widths: widths.to_vec(),
            layers,
            activation: Activation::Relu,
            head: head.to_string(),
        })
    }

    pub fn with_activation(mut self, a: Activation) -> Self {
        self.activation = a;
        self
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn head(&self) -> &str {
        &self.head
    }

    pub fn in_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn out_dim(&self) -> usize {
        self.widths[self.widths.len() - 1]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Records the network on `tape` for the batch held in `x`.
    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Forward> {
        if tape.value(x).ncols() != self.in_dim() {
            return Err(Error::Shape {
                expected: format!("{} input columns", self.in_dim()),
                got: tape.value(x).ncols().to_string(),
            });
        }
        let mut h = x;
        let mut params = Vec::with_capacity(self.layers.len());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = tape.leaf(layer.w.clone());
            let b = tape.leaf(layer.b.clone());
            params.push((w, b));
            h = tape.matmul(h, w)?;
            h = tape.add_row(h, b)?;
            if i < last {
                h = match self.activation {
                    Activation::Relu => tape.relu(h),
                    Activation::LeakyRelu(s) => tape.leaky_relu(h, s),
                };
            }
        }
        Ok(Forward { params, output: h })
    }

    /// Raw network outputs for the rows of `x`.
    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        let mut tape = Tape::new();
        let xv = tape.leaf(x.clone());
        let f = self.forward(&mut tape, xv)?;
        Ok(tape.value(f.output).clone())
    }

    /// Plain-text checkpoint: a header with widths, head and activation,
    /// then each weight and bias block row by row at 17 significant digits.
    pub fn to_text(&self) -> String {
        let widths: Vec<String> = self.widths.iter().map(|w| w.to_string()).collect();
        let mut out = format!(
            "# rotkit-mlp\nwidths = {}\nhead = {}\nactivation = {}\n",
            widths.join(","),
            self.head,
            self.activation.tag()
        );
        for (i, layer) in self.layers.iter().enumerate() {
            for (name, m) in [("w", &layer.w), ("b", &layer.b)] {
                out.push_str(&format!("{name}{i} {} {}\n", m.nrows(), m.ncols()));
                for r in 0..m.nrows() {
                    let vals: Vec<String> = m.row(r).iter().map(|v| fmt_f64(*v)).collect();
                    out.push_str(&vals.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("checkpoint ends before {what}"),
            })
        };
        let (n, magic) = next("header")?;
        if magic != "# rotkit-mlp" {
            return Err(Error::Parse {
                line: n,
                msg: "not an mlp checkpoint".into(),
            });
        }
        let mut field = |key: &str| -> Result<(usize, String)> {
            let (n, l) = next(key)?;
            let v = l
                .strip_prefix(key)
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| Error::Parse {
                    line: n,
                    msg: format!("expected `{key} = ...`"),
                })?;
            Ok((n, v.trim().to_string()))
        };
        let (n, w) = field("widths")?;
        let widths = w
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: n,
                msg: e.to_string(),
            })?;
        let (_, head) = field("head")?;
        let (n, act) = field("activation")?;
        let activation = Activation::parse(&act).map_err(|_| Error::Parse {
            line: n,
            msg: format!("unknown activation `{act}`"),
        })?;
        let mut model = Mlp::zeros(&widths, &head)?.with_activation(activation);
        for i in 0..model.layers.len() {
            for name in ["w", "b"] {
                let (n, hdr) = next("layer block")?;
                let expected = if name == "w" {
                    model.layers[i].w.shape()
                } else {
                    model.layers[i].b.shape()
                };
                if hdr != format!("{name}{i} {} {}", expected.0, expected.1) {
                    return Err(Error::Parse {
                        line: n,
                        msg: format!("expected block `{name}{i} {} {}`", expected.0, expected.1),
                    });
                }
                let mut m = Matrix::zeros(expected.0, expected.1);
                for r in 0..expected.0 {
                    let (n, l) = next("weights")?;
                    let vals = l
                        .split_whitespace()
                        .map(|s| s.parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| Error::Parse {
                            line: n,
                            msg: e.to_string(),
                        })?;
                    if vals.len() != expected.1 {
                        return Err(Error::Parse {
                            line: n,
                            msg: format!("expected {} values, found {}", expected.1, vals.len()),
                        });
                    }
                    for (c, v) in vals.into_iter().enumerate() {
                        m[(r, c)] = v;
                    }
                }
                if name == "w" {
                    model.layers[i].w = m;
                } else {
                    model.layers[i].b = m;
                }
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
